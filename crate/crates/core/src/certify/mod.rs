//! Exact certificates: lower bounds from rationalized local models and upper
//! bounds from integer Bell functionals, plus their file format and an
//! independent verifier.

mod ball;
mod format;
mod verify;
mod weights;

pub use ball::{ball_decomposition, ExactDecomposition, BALL_BITS};
pub use format::{parse_certificate, write_certificate};
pub use verify::{verify, VerifyReport};
pub use weights::{exact_residual_sq, rationalize_weights, RationalizedWeights, WEIGHT_BITS};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lmo::BellFunctional;
use crate::polyhedra::{RationalPoint, RationalPolyhedron};
use crate::rational::{sqrt_lower, sqrt_upper, to_f64};
use crate::tensor::{exact_quantum_tensor, CorrelationTensor, RationalTensor, Scenario, StateKind};

/// Default smallest accepted analyticity factor.
pub const DEFAULT_MIN_NU: f64 = 0.5;
/// Default scale applied to a max-normalized gradient before rounding.
pub const DEFAULT_INTEGER_SCALE: f64 = 1e4;

/// Where the target correlations come from.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetSource {
    /// Built-in state measured along exact unit Bloch vectors, one list per party.
    Quantum {
        state: StateKind,
        directions: Vec<Vec<RationalPoint>>,
    },
    /// Explicit exact tensor.
    Tensor(RationalTensor),
}

impl TargetSource {
    pub fn tensor(&self, sc: &Scenario) -> Result<RationalTensor> {
        match self {
            TargetSource::Quantum { state, directions } => {
                let obs: Vec<Vec<_>> = directions
                    .iter()
                    .map(|d| d.iter().map(|p| p.to_array()).collect())
                    .collect();
                exact_quantum_tensor(*state, &obs, sc)
            }
            TargetSource::Tensor(t) => {
                sc.check_same(t.scenario())?;
                Ok(t.clone())
            }
        }
    }

    pub fn state(&self) -> Option<StateKind> {
        match self {
            TargetSource::Quantum { state, .. } => Some(*state),
            TargetSource::Tensor(_) => None,
        }
    }
}

/// Polyhedron part of a lower certificate: the measurement directions of
/// every party, together with their antipodes, are exactly these vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhedronClaim {
    pub vertices: Vec<RationalPoint>,
    pub eta_sq: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundCertificate {
    pub scenario: Scenario,
    pub source: TargetSource,
    /// Absent for finite-scenario bounds (the factor `η^N` is then 1).
    pub polyhedron: Option<PolyhedronClaim>,
    pub v0: BigRational,
    pub decomposition: ExactDecomposition,
    pub residual_sq: BigRational,
    pub nu: BigRational,
    /// Rational lower bound on `η^N`.
    pub eta_pow: BigRational,
    pub v_low: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundCertificate {
    pub scenario: Scenario,
    pub source: TargetSource,
    /// Dense integer functional (root slot zero).
    pub functional: Vec<i64>,
    pub ell: i64,
    /// `<M, p>`.
    pub q: BigRational,
    pub v_up: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Lower(LowerBoundCertificate),
    Upper(UpperBoundCertificate),
}

impl Certificate {
    pub fn scenario(&self) -> &Scenario {
        match self {
            Certificate::Lower(c) => &c.scenario,
            Certificate::Upper(c) => &c.scenario,
        }
    }

    pub fn source(&self) -> &TargetSource {
        match self {
            Certificate::Lower(c) => &c.source,
            Certificate::Upper(c) => &c.source,
        }
    }
}

/// `1 / (1 + s)` with `s >= √residual_sq` rounded up at scale `10^18`.
pub fn nu_factor(residual_sq: &BigRational) -> BigRational {
    (BigRational::one() + sqrt_upper(residual_sq)).recip()
}

/// Rational lower bound on `η^n` from `η²`: exact for even `n`, otherwise the
/// even power times a floored square root.
pub fn eta_power_lower(eta_sq: &BigRational, n: usize) -> BigRational {
    let even = num_traits::pow(eta_sq.clone(), n / 2);
    if n % 2 == 0 {
        even
    } else {
        even * sqrt_lower(eta_sq)
    }
}

/// Lower certificate `v_low = lb(η^N) · ν · v0`.
///
/// The analyticity factor relies on the 2-norm ball lemma, which holds for
/// full-correlation tensors only, so scenarios with marginals are refused.
pub fn assemble_lower(
    scenario: Scenario,
    source: TargetSource,
    polyhedron: Option<&RationalPolyhedron>,
    v0: BigRational,
    weights: RationalizedWeights,
    min_nu: f64,
) -> Result<LowerBoundCertificate> {
    if scenario.marginals {
        return Err(Error::Unsupported(
            "lower certificates need a full-correlation scenario (vanishing marginals)".into(),
        ));
    }
    if v0.is_negative() || v0 > BigRational::one() {
        return Err(Error::Domain("v0 outside [0, 1]".into()));
    }
    let nu = nu_factor(&weights.residual_sq);
    if to_f64(&nu) < min_nu {
        return Err(Error::Rejected(format!(
            "analyticity factor {:.6} below {min_nu}; residual too large",
            to_f64(&nu)
        )));
    }
    let (claim, eta_pow) = match polyhedron {
        Some(poly) => (
            Some(PolyhedronClaim {
                vertices: poly.vertices().to_vec(),
                eta_sq: poly.eta_sq().clone(),
            }),
            eta_power_lower(poly.eta_sq(), scenario.parties),
        ),
        None => (None, BigRational::one()),
    };
    let v_low = &eta_pow * &nu * &v0;
    Ok(LowerBoundCertificate {
        scenario,
        source,
        polyhedron: claim,
        v0,
        decomposition: weights.decomposition,
        residual_sq: weights.residual_sq,
        nu,
        eta_pow,
        v_low,
    })
}

/// Rounds `scale * g / max|g|` to integers (root slot zero), divided by
/// their common gcd.
pub fn integerize(g: &CorrelationTensor, scale: f64) -> Result<Vec<i64>> {
    let max = g.max_abs();
    if !(max > 0.0) || !(scale >= 1.0) {
        return Err(Error::Degenerate(
            "cannot integerize a zero functional".into(),
        ));
    }
    let start = g.scenario().first_free();
    let mut ints: Vec<i64> = g
        .entries()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i < start {
                0
            } else {
                (v / max * scale).round() as i64
            }
        })
        .collect();
    let d = ints.iter().fold(0i64, |acc, &v| acc.gcd(&v));
    if d > 1 {
        ints.iter_mut().for_each(|v| *v /= d);
    }
    Ok(ints)
}

/// Exact `<M, p>` over the free entries.
pub fn functional_value(functional: &[i64], p: &RationalTensor) -> BigRational {
    let start = p.scenario().first_free();
    functional
        .iter()
        .zip(p.entries())
        .skip(start)
        .fold(BigRational::zero(), |acc, (&m, e)| {
            acc + BigRational::from_integer(BigInt::from(m)) * e
        })
}

/// Upper certificate `v_up = ℓ / <M, p>` for an integer functional with a
/// proven local bound `ℓ`.
pub fn assemble_upper(
    functional: &BellFunctional,
    ell: i64,
    source: TargetSource,
) -> Result<UpperBoundCertificate> {
    let sc = *functional.scenario();
    let ints = functional
        .integer_entries()
        .ok_or_else(|| Error::Domain("upper certificates need an integer functional".into()))?
        .to_vec();
    let p = source.tensor(&sc)?;
    let q = functional_value(&ints, &p);
    let ell_q = BigRational::from_integer(BigInt::from(ell));
    if q <= ell_q {
        return Err(Error::NoViolation(format!(
            "<M, p> = {:.6} does not exceed the local bound {ell}; try a larger integer scale or a better solve",
            to_f64(&q)
        )));
    }
    let v_up = &ell_q / &q;
    Ok(UpperBoundCertificate {
        scenario: sc,
        source,
        functional: ints,
        ell,
        q,
        v_up,
    })
}

/// Bounds that follow from certified thresholds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DerivedBounds {
    /// `2/3 · v_low`, for the singlet under general POVMs.
    pub povm_lower: Option<f64>,
    /// `K_G(3) >= 1 / v_up`.
    pub grothendieck_lower: Option<f64>,
    /// `K_G(3) <= 1 / v_low`.
    pub grothendieck_upper: Option<f64>,
    /// `cos(π/2m)^N · v_low` for planar-polygon GHZ lower bounds.
    pub planar_lower: Option<f64>,
}

pub fn povm_bound(v_low: f64) -> f64 {
    2.0 / 3.0 * v_low
}

/// `[1/v_up, 1/v_low]`.
pub fn grothendieck_interval(v_low: Option<f64>, v_up: Option<f64>) -> (Option<f64>, Option<f64>) {
    (v_up.map(|v| 1.0 / v), v_low.map(|v| 1.0 / v))
}

/// Ratio between the threshold of `m` planar directions and all planar
/// projective measurements for `N` parties.
pub fn planar_ghz_factor(m: usize, n: usize) -> f64 {
    (std::f64::consts::PI / (2.0 * m as f64))
        .cos()
        .powi(n as i32)
}

fn is_planar(directions: &[Vec<RationalPoint>]) -> bool {
    directions.iter().flatten().all(|p| p.z.is_zero())
}

/// Derived bounds for one or two certificates about the same setup.
pub fn derived_bounds(
    lower: Option<&LowerBoundCertificate>,
    upper: Option<&UpperBoundCertificate>,
) -> DerivedBounds {
    let v_low = lower.map(|c| to_f64(&c.v_low));
    let v_up = upper.map(|c| to_f64(&c.v_up));
    let mut out = DerivedBounds::default();
    if let Some(c) = lower {
        match &c.source {
            TargetSource::Quantum {
                state: StateKind::Singlet,
                ..
            } if c.polyhedron.is_some() => {
                out.povm_lower = v_low.map(povm_bound);
            }
            TargetSource::Quantum {
                state: StateKind::Ghz(n),
                directions,
            } if c.polyhedron.is_none() && is_planar(directions) => {
                out.planar_lower = v_low.map(|v| v * planar_ghz_factor(c.scenario.inputs, *n));
            }
            _ => {}
        }
    }
    let singlet = |s: &TargetSource| s.state() == Some(StateKind::Singlet);
    if lower.map_or(true, |c| singlet(&c.source) && c.polyhedron.is_some())
        && upper.map_or(true, |c| singlet(&c.source))
    {
        (out.grothendieck_lower, out.grothendieck_upper) = grothendieck_interval(
            v_low.filter(|_| lower.is_some()),
            v_up.filter(|_| upper.is_some()),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu_factor(&BigRational::zero()), BigRational::one());
        assert_eq!(nu_factor(&BigRational::one()), r("1/2"));
        let nu = to_f64(&nu_factor(&r("4e-8")));
        assert!((nu - 1.0 / 1.0002).abs() < 1e-12);
        assert!((nu - 0.9998).abs() < 1e-4);
    }

    #[test]
    fn nu_is_safe_lower_bound() {
        for s in ["2/3", "1e-12", "7/11", "123456789/1000"] {
            let res = r(s);
            let nu = nu_factor(&res);
            // 1/ν - 1 >= √res  ⟺  (1/ν - 1)² >= res
            let t = nu.recip() - BigRational::one();
            assert!(&t * &t >= res);
            let tight = 1.0 / (1.0 + to_f64(&res).sqrt());
            assert!(to_f64(&nu) <= tight + 1e-15 && to_f64(&nu) > tight - 1e-15);
        }
    }

    #[test]
    fn eta_power_bounds() {
        let e = r("9/16");
        assert_eq!(eta_power_lower(&e, 2), e);
        assert_eq!(eta_power_lower(&e, 4), r("81/256"));
        assert_eq!(eta_power_lower(&e, 3), r("27/64"));
        let e = r("2/3");
        let low = eta_power_lower(&e, 3);
        assert!(&low * &low <= num_traits::pow(e.clone(), 3));
        assert!((to_f64(&low) - (2.0f64 / 3.0).powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn lower_assembly_arithmetic() {
        // icosahedron η² = (5+2√5)/15 ≈ 0.631476
        let eta_sq = 0.631476f64;
        assert!((eta_sq * 0.9999 * 0.60 - 0.3789).abs() < 1e-4);
        // pipeline shape η ≈ 0.9968, ν ≈ 0.9998, v0 = 0.692
        assert!((0.9968f64.powi(2) * 0.9998 * 0.692 - 0.6875).abs() < 1e-3);
    }

    #[test]
    fn derived_constants() {
        assert!((povm_bound(0.6875) - 0.4583).abs() < 1e-4);
        let (lo, hi) = grothendieck_interval(Some(0.6875), Some(0.6955));
        // 1/0.6955 = 1.43781 while the quoted interval end is 1.4376
        assert!((lo.unwrap() - 1.4376).abs() < 5e-4);
        assert!((hi.unwrap() - 1.4546).abs() < 1e-4);
        assert!((0.49160 * planar_ghz_factor(16, 3) - 0.48453).abs() < 1e-5);
    }

    #[test]
    fn integerize_normalizes_by_max() {
        let sc = Scenario::new(2, 1, true).unwrap();
        let g = CorrelationTensor::from_entries(sc, vec![5.0, 0.5, -0.25, 1.0]).unwrap();
        assert_eq!(integerize(&g, 4.0).unwrap(), vec![0, 2, -1, 4]);
        assert_eq!(integerize(&g, 8.0).unwrap(), vec![0, 2, -1, 4]);
        assert!(integerize(&CorrelationTensor::zeros(sc), 10.0).is_err());
    }
}
