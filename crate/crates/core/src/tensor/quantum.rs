//! Quantum correlations from qubit states and planar/spatial Bloch vectors.
//!
//! Every correlator is assembled from the Pauli coefficients
//! `P[i_1..i_N] = Tr[(σ_{i_1} ⊗ … ⊗ σ_{i_N}) ρ]` (σ_0 = identity) followed by
//! one mode product per party with rows `(1,0,0,0)` for the marginal slot and
//! `(0, a_x)` for input `x`.

use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{CorrelationTensor, RationalTensor, Scenario};
use crate::error::{Error, Result};

pub type ExactBloch = [BigRational; 3];

const MAX_QUBITS: usize = 4;
const UNIT_TOL: f64 = 1e-9;
const STATE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    /// `(|01> - |10>)/√2`
    Singlet,
    /// `(|0…0> + |1…1>)/√2` on `N` qubits.
    Ghz(usize),
    /// `(|001> + |010> + |100>)/√3`
    W3,
}

impl StateKind {
    pub fn qubits(&self) -> usize {
        match self {
            StateKind::Singlet => 2,
            StateKind::Ghz(n) => *n,
            StateKind::W3 => 3,
        }
    }

    /// Exact real density matrix, row-major.
    pub fn density_rational(&self) -> Vec<Vec<BigRational>> {
        let dim = 1usize << self.qubits();
        let mut rho = vec![vec![BigRational::zero(); dim]; dim];
        let (support, signs, norm): (Vec<usize>, Vec<i64>, i64) = match self {
            StateKind::Singlet => (vec![1, 2], vec![1, -1], 2),
            StateKind::Ghz(_) => (vec![0, dim - 1], vec![1, 1], 2),
            StateKind::W3 => (vec![1, 2, 4], vec![1, 1, 1], 3),
        };
        for (i, &si) in support.iter().zip(&signs) {
            for (j, &sj) in support.iter().zip(&signs) {
                rho[*i][*j] = BigRational::new(BigInt::from(si * sj), BigInt::from(norm));
            }
        }
        rho
    }

    pub fn state(&self) -> QuantumState {
        let rho = self
            .density_rational()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| Complex64::new(crate::rational::to_f64(v), 0.0))
                    .collect()
            })
            .collect();
        QuantumState::Density(rho)
    }
}

#[derive(Clone, Debug)]
pub enum QuantumState {
    Pure(Vec<Complex64>),
    Density(Vec<Vec<Complex64>>),
}

impl QuantumState {
    fn density(&self) -> Vec<Vec<Complex64>> {
        match self {
            QuantumState::Pure(psi) => psi
                .iter()
                .map(|a| psi.iter().map(|b| a * b.conj()).collect())
                .collect(),
            QuantumState::Density(rho) => rho.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuantumSetup {
    pub state: QuantumState,
    /// Per party, one Bloch vector per input.
    pub observables: Vec<Vec<[f64; 3]>>,
}

/// Pauli action on one qubit: for row `b`, the nonzero column and its phase
/// as a power of `i`.
fn pauli_action(p: usize, b: usize) -> (usize, u8) {
    match p {
        0 => (b, 0),
        1 => (1 - b, 0),
        2 => (1 - b, if b == 0 { 3 } else { 1 }),
        _ => (b, if b == 0 { 0 } else { 2 }),
    }
}

/// `Tr[(σ_{p_1} ⊗ … ⊗ σ_{p_N}) ρ]` as a sum over rows of the signed permutation.
fn pauli_terms(paulis: &[usize]) -> Vec<(usize, usize, u8)> {
    let n = paulis.len();
    let dim = 1usize << n;
    (0..dim)
        .map(|row| {
            let mut col = 0;
            let mut phase = 0u8;
            for (k, &p) in paulis.iter().enumerate() {
                let b = row >> (n - 1 - k) & 1;
                let (c, ph) = pauli_action(p, b);
                col = col << 1 | c;
                phase = (phase + ph) % 4;
            }
            (row, col, phase)
        })
        .collect()
}

fn pauli_labels(n: usize, flat: usize) -> Vec<usize> {
    (0..n).map(|k| flat >> (2 * (n - 1 - k)) & 3).collect()
}

fn pauli_coefficients_f64(rho: &[Vec<Complex64>], n: usize) -> Vec<f64> {
    (0..1usize << (2 * n))
        .map(|flat| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (row, col, phase) in pauli_terms(&pauli_labels(n, flat)) {
                let w = Complex64::i().powu(u32::from(phase));
                acc += w * rho[col][row];
            }
            acc.re
        })
        .collect()
}

fn pauli_coefficients_exact(rho: &[Vec<BigRational>], n: usize) -> Vec<BigRational> {
    (0..1usize << (2 * n))
        .map(|flat| {
            let (mut re, mut im) = (BigRational::zero(), BigRational::zero());
            for (row, col, phase) in pauli_terms(&pauli_labels(n, flat)) {
                let v = &rho[col][row];
                match phase {
                    0 => re += v,
                    1 => im += v,
                    2 => re -= v,
                    _ => im -= v,
                }
            }
            debug_assert!(
                im.is_zero(),
                "real symmetric state has real Pauli coefficients"
            );
            re
        })
        .collect()
}

/// Applies a `rows x 4` matrix along `axis` of a tensor whose trailing axes
/// after `axis` have total size `inner`.
fn mode_product<T>(data: &[T], axis_len: usize, inner: usize, rows: &[[T; 4]]) -> Vec<T>
where
    T: Clone + Zero + Add<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    debug_assert_eq!(axis_len, 4);
    let outer = data.len() / (axis_len * inner);
    let mut out = Vec::with_capacity(outer * rows.len() * inner);
    for o in 0..outer {
        let block = &data[o * 4 * inner..(o + 1) * 4 * inner];
        for row in rows {
            for i in 0..inner {
                let mut acc = T::zero();
                for (k, coef) in row.iter().enumerate() {
                    if !coef.is_zero() {
                        acc = acc + coef * &block[k * inner + i];
                    }
                }
                out.push(acc);
            }
        }
    }
    out
}

fn contract_paulis<T>(mut data: Vec<T>, per_party_rows: &[Vec<[T; 4]>]) -> Vec<T>
where
    T: Clone + Zero + Add<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let n = per_party_rows.len();
    // Axis k currently has length 4 for k >= processed; earlier axes are already mapped.
    for axis in (0..n).rev() {
        let inner: usize = per_party_rows[axis + 1..].iter().map(|r| r.len()).product();
        data = mode_product(&data, 4, inner, &per_party_rows[axis]);
    }
    data
}

fn check_qubits(n: usize, sc: &Scenario, observables: usize) -> Result<()> {
    if n != sc.parties || observables != sc.parties {
        return Err(Error::Shape(format!(
            "{n}-qubit state with {observables} observable lists for {} parties",
            sc.parties
        )));
    }
    if n > MAX_QUBITS {
        return Err(Error::Unsupported(format!(
            "quantum tensors support at most {MAX_QUBITS} qubits"
        )));
    }
    Ok(())
}

fn check_density(rho: &[Vec<Complex64>], dim: usize) -> Result<()> {
    if rho.len() != dim || rho.iter().any(|r| r.len() != dim) {
        return Err(Error::Shape(format!("density matrix must be {dim}x{dim}")));
    }
    let mut trace = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        trace += rho[i][i];
        for j in 0..dim {
            if (rho[i][j] - rho[j][i].conj()).norm() > STATE_TOL {
                return Err(Error::Domain("density matrix is not Hermitian".into()));
            }
        }
    }
    if (trace - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::Domain(format!("density matrix has trace {trace}")));
    }
    let min_eig = min_eigenvalue_hermitian(rho);
    if min_eig < -STATE_TOL {
        return Err(Error::Domain(format!(
            "density matrix is not positive semidefinite (eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of a Hermitian matrix via cyclic Jacobi on its real
/// `2d x 2d` embedding `[[Re, -Im], [Im, Re]]`.
fn min_eigenvalue_hermitian(h: &[Vec<Complex64>]) -> f64 {
    let d = h.len();
    let n = 2 * d;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..d {
        for j in 0..d {
            a[i][j] = h[i][j].re;
            a[i + d][j + d] = h[i][j].re;
            a[i][j + d] = -h[i][j].im;
            a[i + d][j] = h[i][j].im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

fn party_rows_f64(obs: &[[f64; 3]], sc: &Scenario) -> Result<Vec<[f64; 4]>> {
    if obs.len() != sc.inputs {
        return Err(Error::Shape(format!(
            "{} Bloch vectors for {} inputs",
            obs.len(),
            sc.inputs
        )));
    }
    let mut rows = Vec::with_capacity(sc.side());
    if sc.marginals {
        rows.push([1.0, 0.0, 0.0, 0.0]);
    }
    for a in obs {
        let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!(
                "Bloch vector {a:?} has length {norm}"
            )));
        }
        rows.push([0.0, a[0], a[1], a[2]]);
    }
    Ok(rows)
}

/// Born-rule correlation tensor `Tr[(A_{x_1} ⊗ … ⊗ A_{x_N}) ρ]`.
pub fn quantum_tensor(q: &QuantumSetup, sc: &Scenario) -> Result<CorrelationTensor> {
    let rho = q.state.density();
    let n = rho.len().trailing_zeros() as usize;
    if 1usize << n != rho.len() {
        return Err(Error::Shape(format!(
            "state dimension {} is not a power of two",
            rho.len()
        )));
    }
    check_qubits(n, sc, q.observables.len())?;
    if let QuantumState::Pure(psi) = &q.state {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Domain(format!(
                "state vector has squared norm {norm}"
            )));
        }
    } else {
        check_density(&rho, 1 << n)?;
    }
    let rows = q
        .observables
        .iter()
        .map(|o| party_rows_f64(o, sc))
        .collect::<Result<Vec<_>>>()?;
    let data = contract_paulis(pauli_coefficients_f64(&rho, n), &rows);
    CorrelationTensor::from_entries(*sc, data)
}

/// Direct evaluation of every entry as a trace of a Kronecker product; slow,
/// kept as an independent cross-check of [`quantum_tensor`].
pub fn quantum_tensor_by_trace(q: &QuantumSetup, sc: &Scenario) -> Result<CorrelationTensor> {
    let rho = q.state.density();
    let n = sc.parties;
    let dim = 1usize << n;
    if rho.len() != dim {
        return Err(Error::Shape("state dimension mismatch".into()));
    }
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let observable = |a: Option<&[f64; 3]>| -> [[Complex64; 2]; 2] {
        match a {
            None => [[one, zero], [zero, one]],
            Some(a) => [
                [Complex64::new(a[2], 0.0), a[0] - i * a[1]],
                [a[0] + i * a[1], Complex64::new(-a[2], 0.0)],
            ],
        }
    };
    Ok(CorrelationTensor::from_fn(*sc, |idx| {
        let ops: Vec<[[Complex64; 2]; 2]> = idx
            .iter()
            .enumerate()
            .map(|(party, &slot)| {
                observable(sc.input_of_slot(slot).map(|x| &q.observables[party][x - 1]))
            })
            .collect();
        let mut tr = zero;
        for r in 0..dim {
            for c in 0..dim {
                let mut e = one;
                for (k, op) in ops.iter().enumerate() {
                    let br = r >> (n - 1 - k) & 1;
                    let bc = c >> (n - 1 - k) & 1;
                    e *= op[br][bc];
                }
                tr += e * rho[c][r];
            }
        }
        tr.re
    }))
}

/// Exact tensor for a built-in state with rational unit Bloch vectors.
pub fn exact_quantum_tensor(
    kind: StateKind,
    observables: &[Vec<ExactBloch>],
    sc: &Scenario,
) -> Result<RationalTensor> {
    let n = kind.qubits();
    check_qubits(n, sc, observables.len())?;
    let mut rows = Vec::with_capacity(n);
    for obs in observables {
        if obs.len() != sc.inputs {
            return Err(Error::Shape(format!(
                "{} Bloch vectors for {} inputs",
                obs.len(),
                sc.inputs
            )));
        }
        let mut party = Vec::with_capacity(sc.side());
        if sc.marginals {
            party.push([
                BigRational::one(),
                BigRational::zero(),
                BigRational::zero(),
                BigRational::zero(),
            ]);
        }
        for a in obs {
            let norm_sq = &a[0] * &a[0] + &a[1] * &a[1] + &a[2] * &a[2];
            if !norm_sq.is_one() {
                return Err(Error::Domain(
                    "exact Bloch vector does not have unit length".into(),
                ));
            }
            party.push([
                BigRational::zero(),
                a[0].clone(),
                a[1].clone(),
                a[2].clone(),
            ]);
        }
        rows.push(party);
    }
    let coeffs = pauli_coefficients_exact(&kind.density_rational(), n);
    RationalTensor::from_entries(*sc, contract_paulis(coeffs, &rows))
}

/// `cos(j π / m)` when it is rational (values `0, ±1/2, ±1`).
pub fn exact_cos_pi(j: i64, m: i64) -> Option<BigRational> {
    assert!(m > 0);
    // reduce j/m to an angle in [0, 2) turns of π
    let g = j.gcd(&m);
    let (num, den) = (j / g, m / g);
    let num = num.rem_euclid(2 * den);
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    match (num, den) {
        (0, 1) => Some(q(1, 1)),
        (1, 1) => Some(q(-1, 1)),
        (1, 2) | (3, 2) => Some(q(0, 1)),
        (1, 3) | (5, 3) => Some(q(1, 2)),
        (2, 3) | (4, 3) => Some(q(-1, 2)),
        _ => None,
    }
}

/// Regular polygon of `m` unit vectors on the XY plane at angles `(x-1)π/m`.
pub fn polygon_bloch_vectors(m: usize) -> Vec<[f64; 3]> {
    (0..m)
        .map(|x| {
            let phi = x as f64 * std::f64::consts::PI / m as f64;
            [phi.cos(), phi.sin(), 0.0]
        })
        .collect()
}

/// Exact polygon vectors, available when every coordinate is rational.
pub fn exact_polygon_bloch_vectors(m: usize) -> Option<Vec<ExactBloch>> {
    let m = m as i64;
    (0..m)
        .map(|x| {
            let c = exact_cos_pi(x, m)?;
            // sin(xπ/m) = cos((m - 2x)π / 2m)
            let s = exact_cos_pi(m - 2 * x, 2 * m)?;
            Some([c, s, BigRational::zero()])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bloch_to_f64(a: &ExactBloch) -> [f64; 3] {
        [
            crate::rational::to_f64(&a[0]),
            crate::rational::to_f64(&a[1]),
            crate::rational::to_f64(&a[2]),
        ]
    }
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
        loop {
            let v: [f64; 3] = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.1 && n <= 1.0 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    #[test]
    fn singlet_is_minus_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<[f64; 3]> = (0..3).map(|_| random_unit(&mut rng)).collect();
        let b: Vec<[f64; 3]> = (0..3).map(|_| random_unit(&mut rng)).collect();
        let sc = Scenario::new(2, 3, true).unwrap();
        let setup = QuantumSetup {
            state: StateKind::Singlet.state(),
            observables: vec![a.clone(), b.clone()],
        };
        let t = quantum_tensor(&setup, &sc).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let dot: f64 = (0..3).map(|k| a[x][k] * b[y][k]).sum();
                assert!((t.get(&[x + 1, y + 1]) + dot).abs() < 1e-12);
            }
            assert!(t.get(&[x + 1, 0]).abs() < 1e-12);
        }
        assert!(t.marginals_vanish(1e-12));
    }

    #[test]
    fn ghz_polygon_entries() {
        let m = 2;
        let sc = Scenario::new(3, m, true).unwrap();
        let setup = QuantumSetup {
            state: StateKind::Ghz(3).state(),
            observables: vec![polygon_bloch_vectors(m); 3],
        };
        let t = quantum_tensor(&setup, &sc).unwrap();
        assert!((t.get(&[1, 1, 1]) - 1.0).abs() < 1e-12);
        assert!((t.get(&[1, 2, 2]) + 1.0).abs() < 1e-12);
        assert!(t.get(&[1, 1, 2]).abs() < 1e-12);
        assert!(t.marginals_vanish(1e-12));
        for m in [3, 5] {
            let sc = Scenario::new(3, m, false).unwrap();
            let setup = QuantumSetup {
                state: StateKind::Ghz(3).state(),
                observables: vec![polygon_bloch_vectors(m); 3],
            };
            let t = quantum_tensor(&setup, &sc).unwrap();
            for flat in 0..sc.len() {
                let idx = sc.multi_index(flat);
                let sum: usize = idx.iter().sum();
                let expect = (sum as f64 * std::f64::consts::PI / m as f64).cos();
                assert!((t.entries()[flat] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_path_matches_trace_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in [
            StateKind::Singlet,
            StateKind::Ghz(3),
            StateKind::W3,
            StateKind::Ghz(4),
        ] {
            let n = kind.qubits();
            let sc = Scenario::new(n, 2, true).unwrap();
            let obs: Vec<Vec<[f64; 3]>> = (0..n)
                .map(|_| (0..2).map(|_| random_unit(&mut rng)).collect())
                .collect();
            let setup = QuantumSetup {
                state: kind.state(),
                observables: obs,
            };
            let fast = quantum_tensor(&setup, &sc).unwrap();
            let slow = quantum_tensor_by_trace(&setup, &sc).unwrap();
            for (a, b) in fast.entries().iter().zip(slow.entries()) {
                assert!((a - b).abs() < 1e-12);
                assert!(a.abs() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn pure_state_input() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let sc = Scenario::bipartite(1).unwrap();
        let setup = QuantumSetup {
            state: QuantumState::Pure(psi),
            observables: vec![vec![[0.0, 0.0, 1.0]], vec![[0.0, 0.0, 1.0]]],
        };
        let t = quantum_tensor(&setup, &sc).unwrap();
        assert!((t.entries()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sc = Scenario::bipartite(1).unwrap();
        let bad_bloch = QuantumSetup {
            state: StateKind::Singlet.state(),
            observables: vec![vec![[0.0, 0.0, 1.1]], vec![[0.0, 0.0, 1.0]]],
        };
        assert!(matches!(
            quantum_tensor(&bad_bloch, &sc),
            Err(Error::Domain(_))
        ));
        let mut rho = vec![vec![Complex64::new(0.0, 0.0); 4]; 4];
        rho[0][0] = Complex64::new(1.5, 0.0);
        rho[1][1] = Complex64::new(-0.5, 0.0);
        let not_psd = QuantumSetup {
            state: QuantumState::Density(rho),
            observables: vec![vec![[0.0, 0.0, 1.0]], vec![[0.0, 0.0, 1.0]]],
        };
        assert!(matches!(
            quantum_tensor(&not_psd, &sc),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exact_tensors_match_float() {
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let a = vec![[q(3, 5), q(4, 5), q(0, 1)], [q(0, 1), q(0, 1), q(1, 1)]];
        let b = vec![[q(2, 3), q(1, 3), q(2, 3)], [q(-1, 1), q(0, 1), q(0, 1)]];
        for (kind, obs) in [
            (StateKind::Singlet, vec![a.clone(), b.clone()]),
            (StateKind::W3, vec![a.clone(), b.clone(), a.clone()]),
            (StateKind::Ghz(3), vec![b.clone(), a.clone(), b.clone()]),
        ] {
            let sc = Scenario::new(kind.qubits(), 2, true).unwrap();
            let exact = exact_quantum_tensor(kind, &obs, &sc).unwrap();
            let setup = QuantumSetup {
                state: kind.state(),
                observables: obs
                    .iter()
                    .map(|p| p.iter().map(bloch_to_f64).collect())
                    .collect(),
            };
            let float = quantum_tensor(&setup, &sc).unwrap();
            for (e, f) in exact.to_f64().entries().iter().zip(float.entries()) {
                assert!((e - f).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rational_cosines() {
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(exact_cos_pi(0, 5), Some(q(1, 1)));
        assert_eq!(exact_cos_pi(1, 2), Some(q(0, 1)));
        assert_eq!(exact_cos_pi(2, 3), Some(q(-1, 2)));
        assert_eq!(exact_cos_pi(-1, 3), Some(q(1, 2)));
        assert_eq!(exact_cos_pi(1, 4), None);
        let ex = exact_polygon_bloch_vectors(2).unwrap();
        assert_eq!(ex[1], [q(0, 1), q(1, 1), q(0, 1)]);
        assert!(exact_polygon_bloch_vectors(3).is_none());
    }
}
