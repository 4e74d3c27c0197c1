use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    exact_residual_sq, functional_value, Certificate, LowerBoundCertificate, TargetSource,
    UpperBoundCertificate,
};
use crate::lmo::{
    exhaustive_max_i64, qubo_branch_and_bound, to_qubo, BellFunctional, DEFAULT_BB_BUDGET,
    EXHAUSTIVE_BITS,
};
use crate::polyhedra::{faces_and_eta, RationalPoint};
use crate::tensor::{DeterministicStrategy, RationalTensor, Scenario};

/// Random strategies checked against `ℓ` in every upper certificate.
pub const SPOT_CHECKS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub ok: bool,
    /// Name of the first violated invariant.
    pub failure: Option<String>,
    /// Checks that passed, in order.
    pub passed: Vec<String>,
    /// False when an upper certificate's local bound was only spot-checked.
    pub exact: bool,
}

struct Checker {
    passed: Vec<String>,
    exact: bool,
}

type Check = std::result::Result<(), String>;

impl Checker {
    fn check(&mut self, name: &str, ok: bool, failure: &str) -> Check {
        if ok {
            self.passed.push(name.to_string());
            Ok(())
        } else {
            Err(failure.to_string())
        }
    }
}

/// Re-checks every certificate invariant in exact arithmetic, using nothing
/// but the certificate itself.
pub fn verify(cert: &Certificate) -> VerifyReport {
    let mut c = Checker {
        passed: Vec::new(),
        exact: true,
    };
    let res = match cert {
        Certificate::Lower(l) => verify_lower(&mut c, l),
        Certificate::Upper(u) => verify_upper(&mut c, u),
    };
    VerifyReport {
        ok: res.is_ok(),
        failure: res.err(),
        passed: c.passed,
        exact: c.exact,
    }
}

fn target(
    c: &mut Checker,
    sc: &Scenario,
    src: &TargetSource,
) -> std::result::Result<RationalTensor, String> {
    if let TargetSource::Quantum { directions, .. } = src {
        let units = directions.iter().flatten().all(RationalPoint::is_on_sphere);
        c.check("unit directions", units, "direction not unit")?;
        let shape =
            directions.len() == sc.parties && directions.iter().all(|d| d.len() == sc.inputs);
        c.check("direction count", shape, "malformed directions")?;
    }
    src.tensor(sc).map_err(|e| format!("malformed target: {e}"))
}

fn verify_lower(c: &mut Checker, l: &LowerBoundCertificate) -> Check {
    let sc = l.scenario;
    c.check("full correlation", !sc.marginals, "marginals present")?;
    let shapes = l.decomposition.scenario == sc
        && l.decomposition.atoms.len() == l.decomposition.weights.len()
        && l.decomposition
            .atoms
            .iter()
            .all(|a| a.check_shape(&sc).is_ok());
    c.check("atom shapes", shapes, "malformed atoms")?;
    let p = target(c, &sc, &l.source)?;
    if let TargetSource::Quantum { state, directions } = &l.source {
        let with = Scenario::new(sc.parties, sc.inputs, true).map_err(|e| e.to_string())?;
        let full = TargetSource::Quantum {
            state: *state,
            directions: directions.clone(),
        }
        .tensor(&with)
        .map_err(|e| format!("malformed target: {e}"))?;
        c.check(
            "vanishing marginals",
            full.marginals_vanish(),
            "marginals do not vanish",
        )?;
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    c.check("v0 range", l.v0 >= zero && l.v0 <= one, "v0 out of range")?;
    c.check(
        "nonnegative weights",
        l.decomposition.weights.iter().all(|w| !w.is_negative()),
        "negative weight",
    )?;
    c.check(
        "weight sum",
        l.decomposition.weight_sum() <= one,
        "weight sum exceeds one",
    )?;
    let residual = exact_residual_sq(&l.decomposition, &p, &l.v0).map_err(|e| e.to_string())?;
    c.check("residual", residual == l.residual_sq, "residual mismatch")?;
    let nu_ok = l.nu.is_positive() && {
        let t = l.nu.recip() - &one;
        !t.is_negative() && &t * &t >= residual
    };
    c.check("nu bound", nu_ok, "nu bound violated")?;
    match &l.polyhedron {
        Some(poly) => {
            let TargetSource::Quantum { directions, .. } = &l.source else {
                return Err("polyhedron claim without measurement directions".into());
            };
            let verts: HashSet<&RationalPoint> = poly.vertices.iter().collect();
            let matches = directions.iter().all(|dirs| {
                let covered: HashSet<RationalPoint> =
                    dirs.iter().flat_map(|d| [d.clone(), d.neg()]).collect();
                covered.len() == verts.len() && covered.iter().all(|p| verts.contains(p))
            });
            c.check(
                "directions span vertices",
                matches,
                "directions do not match vertices",
            )?;
            let eta = faces_and_eta(&poly.vertices).map_err(|e| format!("eta mismatch: {e}"))?;
            c.check("eta", eta.eta_sq() == &poly.eta_sq, "eta mismatch")?;
            let bound = !l.eta_pow.is_negative()
                && &l.eta_pow * &l.eta_pow <= num_traits::pow(poly.eta_sq.clone(), sc.parties);
            c.check("eta power", bound, "eta bound violated")?;
        }
        None => {
            let bound = !l.eta_pow.is_negative() && l.eta_pow <= one;
            c.check("eta power", bound, "eta bound violated")?;
        }
    }
    let product = &l.eta_pow * &l.nu * &l.v0;
    c.check("v_low", l.v_low <= product, "v_low mismatch")
}

fn verify_upper(c: &mut Checker, u: &UpperBoundCertificate) -> Check {
    let sc = u.scenario;
    let shape = u.functional.len() == sc.len() && (!sc.marginals || u.functional[0] == 0);
    c.check("functional shape", shape, "malformed functional")?;
    let p = target(c, &sc, &u.source)?;
    let q = functional_value(&u.functional, &p);
    c.check("quantum value", q == u.q, "quantum value mismatch")?;
    let ell = BigRational::from_integer(BigInt::from(u.ell));
    c.check("violation", q > ell, "no violation")?;
    c.check("v_up", u.v_up >= &ell / &q, "v_up mismatch")?;
    let f = BellFunctional::from_integers(sc, u.functional.clone()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let spot = (0..SPOT_CHECKS).all(|_| {
        let s = DeterministicStrategy::random(&sc, &mut rng);
        f.integer_value_at(&s).expect("integer functional") <= u.ell
    });
    c.check(
        "local bound (random strategies)",
        spot,
        "local bound violated",
    )?;
    let ints = f.integer_entries().expect("integer functional");
    let exact = if sc.strategy_bits() <= EXHAUSTIVE_BITS {
        exhaustive_max_i64(&sc, ints).ok().map(|(_, v)| v)
    } else if sc.parties == 2 && 2 * sc.inputs <= 64 {
        to_qubo(&sc, ints)
            .and_then(|inst| Ok((inst.c, qubo_branch_and_bound(&inst, DEFAULT_BB_BUDGET)?)))
            .ok()
            .filter(|(_, sol)| sol.optimal)
            .map(|(c0, sol)| c0 + 2 * sol.value)
    } else {
        None
    };
    match exact {
        Some(max) => c.check("local bound (exact)", max <= u.ell, "local bound violated"),
        None => {
            c.exact = false;
            Ok(())
        }
    }
}
