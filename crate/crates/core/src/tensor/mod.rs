//! Correlation tensors over binary-outcome Bell scenarios.
//!
//! A scenario with `N` parties and `m` inputs per party is stored as one dense
//! order-`N` tensor in row-major order. With marginals every party index runs
//! over `0..=m`, where slot `0` means "this party is not measured"; the
//! all-zero multi-index (the root) is the constant 1 and never takes part in
//! inner products, norms or optimization. Full-correlation scenarios drop the
//! marginal slot and index inputs as `0..m`.

mod io;
mod quantum;
mod strategy;

pub use io::{
    format_strategy, parse_strategy, read_rational_tensor, read_tensor, write_rational_tensor,
    write_tensor,
};
pub use quantum::{
    exact_cos_pi, exact_polygon_bloch_vectors, exact_quantum_tensor, polygon_bloch_vectors,
    quantum_tensor, quantum_tensor_by_trace, ExactBloch, QuantumSetup, QuantumState, StateKind,
};
pub(crate) use strategy::party_factor;
pub use strategy::{DeterministicStrategy, SignVector};

use std::borrow::Cow;

use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};

use crate::error::{Error, Result};

/// Maximum number of dense entries a tensor may hold.
pub const MAX_ENTRIES: usize = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub parties: usize,
    pub inputs: usize,
    pub marginals: bool,
}

impl Scenario {
    pub fn new(parties: usize, inputs: usize, marginals: bool) -> Result<Self> {
        if parties == 0 || inputs == 0 {
            return Err(Error::Scenario(format!(
                "need at least one party and one input, got N={parties}, m={inputs}"
            )));
        }
        if !marginals && parties < 2 {
            return Err(Error::Scenario(
                "full-correlation scenarios need at least two parties".into(),
            ));
        }
        let side = if marginals { inputs + 1 } else { inputs };
        let mut len: usize = 1;
        for _ in 0..parties {
            len = len
                .checked_mul(side)
                .filter(|&l| l <= MAX_ENTRIES)
                .ok_or_else(|| {
                    Error::Size(format!(
                        "({side})^{parties} entries exceeds the cap of {MAX_ENTRIES}"
                    ))
                })?;
        }
        Ok(Scenario {
            parties,
            inputs,
            marginals,
        })
    }

    /// Bipartite full-correlation scenario (the Werner/CHSH setting).
    pub fn bipartite(inputs: usize) -> Result<Self> {
        Scenario::new(2, inputs, false)
    }

    /// Index range per party.
    pub fn side(&self) -> usize {
        if self.marginals {
            self.inputs + 1
        } else {
            self.inputs
        }
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.parties as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First flat index that belongs to the optimization space.
    pub fn first_free(&self) -> usize {
        usize::from(self.marginals)
    }

    /// Dimension of the local polytope's ambient space.
    pub fn dimension(&self) -> usize {
        self.len() - self.first_free()
    }

    /// log2 of the number of sign assignments, `N * m`.
    pub fn strategy_bits(&self) -> usize {
        self.parties * self.inputs
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let side = self.side();
        let mut idx = vec![0; self.parties];
        for slot in idx.iter_mut().rev() {
            *slot = flat % side;
            flat /= side;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let side = self.side();
        idx.iter().fold(0, |acc, &i| acc * side + i)
    }

    /// Input label (1-based) addressed by a slot, or `None` for the marginal slot.
    pub fn input_of_slot(&self, slot: usize) -> Option<usize> {
        if self.marginals {
            (slot > 0).then_some(slot)
        } else {
            Some(slot + 1)
        }
    }

    /// Number of parties actually measured at a flat index.
    pub fn body_order(&self, flat: usize) -> usize {
        if !self.marginals {
            return self.parties;
        }
        self.multi_index(flat).iter().filter(|&&s| s > 0).count()
    }

    pub(crate) fn check_same(&self, other: &Scenario) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!(
                "scenario mismatch: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.parties, self.inputs, self.marginals)
    }
}

/// Dense real tensor over a scenario: correlations, gradients and Bell
/// functionals all share this layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTensor {
    scenario: Scenario,
    data: Vec<f64>,
}

impl CorrelationTensor {
    /// The origin of the correlation space (root entry 1 when marginals are kept).
    pub fn zeros(scenario: Scenario) -> Self {
        let mut data = vec![0.0; scenario.len()];
        if scenario.marginals {
            data[0] = 1.0;
        }
        CorrelationTensor { scenario, data }
    }

    pub fn from_entries(scenario: Scenario, data: Vec<f64>) -> Result<Self> {
        if data.len() != scenario.len() {
            return Err(Error::Shape(format!(
                "expected {} entries, got {}",
                scenario.len(),
                data.len()
            )));
        }
        let mut t = CorrelationTensor { scenario, data };
        t.fix_root();
        Ok(t)
    }

    /// Builds a tensor by evaluating `f` at every multi-index (root included).
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let data = (0..scenario.len())
            .map(|i| f(&scenario.multi_index(i)))
            .collect();
        let mut t = CorrelationTensor { scenario, data };
        t.fix_root();
        t
    }

    fn fix_root(&mut self) {
        if self.scenario.marginals {
            self.data[0] = 1.0;
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// Entries of the optimization space (root excluded).
    pub fn free_entries(&self) -> &[f64] {
        &self.data[self.scenario.first_free()..]
    }

    pub fn free_entries_mut(&mut self) -> &mut [f64] {
        let start = self.scenario.first_free();
        &mut self.data[start..]
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.scenario.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let flat = self.scenario.flat_index(idx);
        if flat == 0 && self.scenario.marginals {
            return;
        }
        self.data[flat] = value;
    }

    pub fn inner(&self, other: &CorrelationTensor) -> Result<f64> {
        self.scenario.check_same(&other.scenario)?;
        Ok(dot(self.free_entries(), other.free_entries()))
    }

    pub fn norm2(&self) -> f64 {
        self.norm2_sq().sqrt()
    }

    pub fn norm2_sq(&self) -> f64 {
        self.free_entries().iter().map(|v| v * v).sum()
    }

    pub fn norm1(&self) -> f64 {
        self.free_entries().iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.free_entries().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Entrywise multiplication by a visibility. The root stays at 1.
    pub fn scale(&self, v: f64) -> CorrelationTensor {
        let mut out = self.clone();
        out.free_entries_mut().iter_mut().for_each(|e| *e *= v);
        out
    }

    pub fn sub(&self, other: &CorrelationTensor) -> Result<CorrelationTensor> {
        self.scenario.check_same(&other.scenario)?;
        let mut out = self.clone();
        for (a, b) in out.free_entries_mut().iter_mut().zip(other.free_entries()) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn neg(&self) -> CorrelationTensor {
        self.scale(-1.0)
    }

    /// True when every lower-order correlator (a marginal) vanishes within `tol`.
    pub fn marginals_vanish(&self, tol: f64) -> bool {
        if !self.scenario.marginals {
            return true;
        }
        let n = self.scenario.parties;
        (1..self.data.len())
            .filter(|&i| self.scenario.body_order(i) < n)
            .all(|i| self.data[i].abs() <= tol)
    }

    /// Restriction to the full-body correlators (drops marginal slots).
    pub fn full_body(&self) -> Result<CorrelationTensor> {
        if !self.scenario.marginals {
            return Ok(self.clone());
        }
        let sc = Scenario::new(self.scenario.parties, self.scenario.inputs, false)?;
        Ok(CorrelationTensor::from_fn(sc, |idx| {
            let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            self.get(&shifted)
        }))
    }

    /// Checks that every free entry is a correlation value in `[-1, 1]`.
    pub fn check_correlations(&self, tol: f64) -> Result<()> {
        match self
            .free_entries()
            .iter()
            .position(|v| !v.is_finite() || v.abs() > 1.0 + tol)
        {
            Some(i) => Err(Error::Domain(format!(
                "entry {} = {} is not a correlation",
                i + self.scenario.first_free(),
                self.free_entries()[i]
            ))),
            None => Ok(()),
        }
    }

    /// `<self, d_s>` by per-party contraction, without materializing `d_s`.
    pub fn strategy_inner(&self, s: &DeterministicStrategy) -> f64 {
        let factors = s.factor_vectors(&self.scenario);
        let refs: Vec<&[f64]> = factors.iter().map(|v| v.as_slice()).collect();
        let total = contract_all(&self.data, self.scenario.side(), &refs);
        if self.scenario.marginals {
            total - self.data[0]
        } else {
            total
        }
    }
}

pub(crate) fn dot<T: Copy + Num>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Contracts every axis except `keep` against `factors`, returning a vector
/// of length `side`.
pub(crate) fn contract_except<T: Copy + Num>(
    data: &[T],
    side: usize,
    factors: &[&[T]],
    keep: usize,
) -> Vec<T> {
    let n = factors.len();
    let mut buf: Cow<[T]> = Cow::Borrowed(data);
    for axis in (keep + 1..n).rev() {
        let f = factors[axis];
        buf = Cow::Owned(buf.chunks_exact(side).map(|c| dot(c, f)).collect());
    }
    for &f in factors.iter().take(keep) {
        let rest = buf.len() / side;
        let mut next = vec![T::zero(); rest];
        for (i, &w) in f.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (acc, &v) in next.iter_mut().zip(&buf[i * rest..(i + 1) * rest]) {
                *acc = *acc + w * v;
            }
        }
        buf = Cow::Owned(next);
    }
    buf.into_owned()
}

pub(crate) fn contract_all<T: Copy + Num>(data: &[T], side: usize, factors: &[&[T]]) -> T {
    let last = factors.len() - 1;
    let v = contract_except(data, side, factors, last);
    dot(&v, factors[last])
}

/// Explicit tensor of a deterministic strategy.
pub fn strategy_tensor(s: &DeterministicStrategy, sc: &Scenario) -> Result<CorrelationTensor> {
    s.check_shape(sc)?;
    let factors = s.factor_vectors(sc);
    let mut data = vec![1.0];
    for f in &factors {
        let mut next = Vec::with_capacity(data.len() * f.len());
        for a in &data {
            next.extend(f.iter().map(|b| a * b));
        }
        data = next;
    }
    CorrelationTensor::from_entries(*sc, data)
}

/// Dense exact-rational tensor, used wherever certificates need exact values.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalTensor {
    scenario: Scenario,
    data: Vec<BigRational>,
}

impl RationalTensor {
    pub fn zeros(scenario: Scenario) -> Self {
        let mut data = vec![BigRational::zero(); scenario.len()];
        if scenario.marginals {
            data[0] = num_traits::One::one();
        }
        RationalTensor { scenario, data }
    }

    pub fn from_entries(scenario: Scenario, mut data: Vec<BigRational>) -> Result<Self> {
        if data.len() != scenario.len() {
            return Err(Error::Shape(format!(
                "expected {} entries, got {}",
                scenario.len(),
                data.len()
            )));
        }
        if scenario.marginals {
            data[0] = num_traits::One::one();
        }
        Ok(RationalTensor { scenario, data })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.data
    }

    pub fn free_entries(&self) -> &[BigRational] {
        &self.data[self.scenario.first_free()..]
    }

    pub fn get(&self, idx: &[usize]) -> &BigRational {
        &self.data[self.scenario.flat_index(idx)]
    }

    pub fn to_f64(&self) -> CorrelationTensor {
        let data = self.data.iter().map(crate::rational::to_f64).collect();
        CorrelationTensor::from_entries(self.scenario, data).expect("same shape")
    }

    pub fn scale(&self, v: &BigRational) -> RationalTensor {
        let mut out = self.clone();
        let start = self.scenario.first_free();
        for e in &mut out.data[start..] {
            *e = &*e * v;
        }
        out
    }

    pub fn norm2_sq(&self) -> BigRational {
        self.free_entries()
            .iter()
            .fold(BigRational::zero(), |acc, v| acc + v * v)
    }

    pub fn norm1(&self) -> BigRational {
        self.free_entries()
            .iter()
            .fold(BigRational::zero(), |acc, v| acc + v.abs())
    }

    pub fn inner(&self, other: &RationalTensor) -> Result<BigRational> {
        self.scenario.check_same(&other.scenario)?;
        Ok(self
            .free_entries()
            .iter()
            .zip(other.free_entries())
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b))
    }

    /// Exact `<self, d_s>`, computed entrywise.
    pub fn strategy_inner(&self, s: &DeterministicStrategy) -> BigRational {
        let mut acc = BigRational::zero();
        for flat in self.scenario.first_free()..self.data.len() {
            let v = &self.data[flat];
            if v.is_zero() {
                continue;
            }
            if s.entry(&self.scenario, flat) > 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc
    }

    pub fn marginals_vanish(&self) -> bool {
        if !self.scenario.marginals {
            return true;
        }
        let n = self.scenario.parties;
        (1..self.data.len())
            .filter(|&i| self.scenario.body_order(i) < n)
            .all(|i| self.data[i].is_zero())
    }

    pub fn full_body(&self) -> Result<RationalTensor> {
        if !self.scenario.marginals {
            return Ok(self.clone());
        }
        let sc = Scenario::new(self.scenario.parties, self.scenario.inputs, false)?;
        let data = (0..sc.len())
            .map(|i| {
                let idx: Vec<usize> = sc.multi_index(i).iter().map(|x| x + 1).collect();
                self.get(&idx).clone()
            })
            .collect();
        RationalTensor::from_entries(sc, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn strat(parties: &[&[i8]]) -> DeterministicStrategy {
        DeterministicStrategy::from_signs(parties.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn scenario_dimensions() {
        let sc = Scenario::new(2, 3, true).unwrap();
        assert_eq!(sc.dimension(), 15);
        assert_eq!(Scenario::bipartite(3).unwrap().dimension(), 9);
        assert_eq!(Scenario::new(3, 2, true).unwrap().dimension(), 26);
        assert!(Scenario::new(1, 3, false).is_err());
        assert!(Scenario::new(0, 3, true).is_err());
        assert!(matches!(Scenario::new(4, 200, true), Err(Error::Size(_))));
        for flat in 0..sc.len() {
            assert_eq!(sc.flat_index(&sc.multi_index(flat)), flat);
        }
    }

    #[test]
    fn strategy_tensor_examples() {
        let sc = Scenario::bipartite(2).unwrap();
        let t = strategy_tensor(&strat(&[&[1, 1], &[1, -1]]), &sc).unwrap();
        assert_eq!(t.entries(), &[1.0, -1.0, 1.0, -1.0]);
        let flipped = strategy_tensor(&strat(&[&[-1, -1], &[-1, 1]]), &sc).unwrap();
        assert_eq!(t, flipped);

        let sc3 = Scenario::new(3, 1, true).unwrap();
        let ones = strategy_tensor(&strat(&[&[1], &[1], &[1]]), &sc3).unwrap();
        assert!(ones.entries().iter().all(|&v| v == 1.0));

        assert!(matches!(
            strategy_tensor(&strat(&[&[1, 1, 1], &[1, -1, 1]]), &sc),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn norms_and_inner() {
        let sc = Scenario::bipartite(2).unwrap();
        assert_eq!(CorrelationTensor::zeros(sc).norm2(), 0.0);
        let d = strategy_tensor(&strat(&[&[1, -1], &[-1, -1]]), &sc).unwrap();
        assert_eq!(d.norm2(), 2.0);
        assert_eq!(d.norm1(), 4.0);
        assert_eq!(d.inner(&d).unwrap(), 4.0);
        let other = CorrelationTensor::zeros(Scenario::bipartite(3).unwrap());
        assert!(d.inner(&other).is_err());
    }

    #[test]
    fn scaling() {
        let sc = Scenario::new(2, 2, true).unwrap();
        let d = strategy_tensor(&strat(&[&[1, -1], &[-1, 1]]), &sc).unwrap();
        assert_eq!(d.scale(1.0), d);
        let z = d.scale(0.0);
        assert_eq!(z, CorrelationTensor::zeros(sc));
        assert_eq!(z.entries()[0], 1.0);
    }

    #[test]
    fn fast_inner_matches_entrywise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shapes = [
            (2, 3, false),
            (2, 4, true),
            (3, 2, true),
            (3, 3, false),
            (4, 2, true),
        ];
        for trial in 0..1000 {
            let (n, m, marg) = shapes[trial % shapes.len()];
            let sc = Scenario::new(n, m, marg).unwrap();
            let t = CorrelationTensor::from_fn(sc, |_| rng.gen_range(-1.0..1.0));
            let s = DeterministicStrategy::random(&sc, &mut rng);
            let d = strategy_tensor(&s, &sc).unwrap();
            let slow = t.inner(&d).unwrap();
            let fast = t.strategy_inner(&s);
            assert!((slow - fast).abs() < 1e-12, "{slow} vs {fast}");
        }
    }
}
