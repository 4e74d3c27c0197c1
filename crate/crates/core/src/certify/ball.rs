use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::tensor::{DeterministicStrategy, RationalTensor, Scenario};

/// Largest `N * m` for which the decomposition is materialized.
pub const BALL_BITS: usize = 22;

/// Exact convex combination of deterministic strategies, completed by the
/// zero tensor with weight `1 - Σ weights`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDecomposition {
    pub scenario: Scenario,
    pub atoms: Vec<DeterministicStrategy>,
    pub weights: Vec<BigRational>,
}

impl ExactDecomposition {
    pub fn weight_sum(&self) -> BigRational {
        self.weights
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + w)
    }

    /// Weight of the zero tensor.
    pub fn deficit(&self) -> BigRational {
        BigRational::one() - self.weight_sum()
    }

    /// `Σ w_i d_i` (the zero tensor contributes nothing).
    pub fn reconstruct(&self) -> RationalTensor {
        let sc = self.scenario;
        let mut data = vec![BigRational::zero(); sc.len()];
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            for (flat, e) in data.iter_mut().enumerate().skip(sc.first_free()) {
                if a.entry(&sc, flat) > 0 {
                    *e += w;
                } else {
                    *e -= w;
                }
            }
        }
        RationalTensor::from_entries(sc, data).expect("scenario shape")
    }
}

fn pow2(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

/// Explicit local decomposition of a point of the 2-norm unit ball.
///
/// Full-correlation scenarios: with `w_λ = <r, d_λ>`,
/// `r = Σ_{λ: Π a⁽ⁱ⁾₁ = 1} |w_λ| / 2^(Nm-1) · d_{±λ}` where the sign is
/// folded into the first party, and Cauchy–Schwarz gives `Σ |w_λ| / 2^(Nm-1)
/// <= ‖r‖₂`.
///
/// With marginals the 2-norm ball is not contained in the local polytope (for
/// `N = 2, m = 1` the point `-(1,1,1)/√3` violates positivity), so the affine
/// decomposition `r = Σ_λ (1 + w_λ) / 2^(Nm) · d_λ` is used instead; it is
/// valid exactly when `min_λ w_λ >= -1`, which `‖r‖₁ <= 1` guarantees.
pub fn ball_decomposition(r: &RationalTensor) -> Result<ExactDecomposition> {
    let sc = *r.scenario();
    let bits = sc.strategy_bits();
    if bits > BALL_BITS {
        return Err(Error::Size(format!(
            "materializing the ball decomposition needs N*m <= {BALL_BITS}, got {bits}; \
             certify with the analyticity factor alone"
        )));
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    if !sc.marginals {
        if r.norm2_sq() > BigRational::one() {
            return Err(Error::Domain(
                "tensor lies outside the 2-norm unit ball".into(),
            ));
        }
        let denom = pow2(bits - 1);
        let mut index = HashMap::new();
        for code in 0..1u64 << bits {
            let mut s = DeterministicStrategy::from_code(&sc, code);
            let first: i8 = s.parties().iter().map(|p| p.get(0)).product();
            if first != 1 {
                continue;
            }
            let w = r.strategy_inner(&s);
            if w.is_zero() {
                continue;
            }
            if w.is_negative() {
                s.party_mut(0).flip();
            }
            // strategies related by an even number of party flips coincide
            let s = s.canonical(false);
            let w = w.abs() / &denom;
            match index.get(&s) {
                Some(&i) => weights[i] += w,
                None => {
                    index.insert(s.clone(), atoms.len());
                    atoms.push(s);
                    weights.push(w);
                }
            }
        }
    } else {
        let denom = pow2(bits);
        for code in 0..1u64 << bits {
            let s = DeterministicStrategy::from_code(&sc, code);
            let c = BigRational::one() + r.strategy_inner(&s);
            if c.is_negative() {
                return Err(Error::Domain(
                    "tensor with marginals is outside the region covered by the affine decomposition".into(),
                ));
            }
            if !c.is_zero() {
                atoms.push(s);
                weights.push(c / &denom);
            }
        }
    }
    Ok(ExactDecomposition {
        scenario: sc,
        atoms,
        weights,
    })
}
