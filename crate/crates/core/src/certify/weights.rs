use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::ExactDecomposition;
use crate::error::{Error, Result};
use crate::fw::ActiveSet;
use crate::tensor::{strategy_tensor, RationalTensor};

/// Weights are rounded to multiples of `2^-WEIGHT_BITS`.
pub const WEIGHT_BITS: u32 = 48;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalizedWeights {
    pub decomposition: ExactDecomposition,
    /// `‖Σ w_i d_i - v0 p‖²`, exact.
    pub residual_sq: BigRational,
}

/// Rounds active-set weights to the nearest multiple of `2^-48` (clipped at
/// zero, any excess over 1 taken from the largest weight) and recomputes the
/// residual exactly. The deficit `1 - Σ w` belongs to the zero tensor.
pub fn rationalize_weights(
    active: &ActiveSet,
    p: &RationalTensor,
    v0: &BigRational,
) -> Result<RationalizedWeights> {
    let sc = *active.scenario();
    sc.check_same(p.scenario())?;
    let one = 1i128 << WEIGHT_BITS;
    let mut ks: Vec<i128> = active
        .weights()
        .iter()
        .map(|&w| (w * one as f64).round().max(0.0) as i128)
        .collect();
    let total: i128 = ks.iter().sum();
    if total > one {
        let (imax, _) = ks
            .iter()
            .enumerate()
            .max_by_key(|(_, &k)| k)
            .expect("nonempty");
        if ks[imax] < total - one {
            return Err(Error::Domain(
                "active-set weights far from a probability vector".into(),
            ));
        }
        ks[imax] -= total - one;
    }
    let mut x = vec![0i128; sc.len()];
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (a, &k) in active.atoms().iter().zip(&ks) {
        if k == 0 {
            continue;
        }
        let d = strategy_tensor(a, &sc)?;
        for (xe, &de) in x.iter_mut().zip(d.entries()).skip(sc.first_free()) {
            *xe += if de > 0.0 { k } else { -k };
        }
        atoms.push(a.clone());
        weights.push(BigRational::new(BigInt::from(k), BigInt::from(one)));
    }
    let denom = BigRational::from_integer(BigInt::from(one));
    let mut residual_sq = BigRational::zero();
    for (xe, pe) in x.iter().zip(p.entries()).skip(sc.first_free()) {
        let diff = BigRational::from_integer(BigInt::from(*xe)) / &denom - v0 * pe;
        residual_sq += &diff * &diff;
    }
    Ok(RationalizedWeights {
        decomposition: ExactDecomposition {
            scenario: sc,
            atoms,
            weights,
        },
        residual_sq,
    })
}

/// `‖Σ w_i d_i - v0 p‖²` recomputed from scratch.
pub fn exact_residual_sq(
    dec: &ExactDecomposition,
    p: &RationalTensor,
    v0: &BigRational,
) -> Result<BigRational> {
    let x = dec.reconstruct();
    let target = p.scale(v0);
    let mut acc = BigRational::zero();
    x.scenario().check_same(target.scenario())?;
    for (a, b) in x.free_entries().iter().zip(target.free_entries()) {
        let d = a - b;
        acc += &d * &d;
    }
    Ok(acc)
}
