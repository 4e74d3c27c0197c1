use num_traits::Num;

use crate::error::{Error, Result};
use crate::tensor::{
    contract_except, CorrelationTensor, DeterministicStrategy, Scenario, SignVector,
};

/// Largest `N * m` accepted by exhaustive enumeration.
pub const EXHAUSTIVE_BITS: usize = 26;

fn check_cap(sc: &Scenario) -> Result<()> {
    if sc.strategy_bits() > EXHAUSTIVE_BITS {
        return Err(Error::Size(format!(
            "exhaustive enumeration needs N*m <= {EXHAUSTIVE_BITS}, got {}",
            sc.strategy_bits()
        )));
    }
    Ok(())
}

/// Minimizes `<data, d>` (root excluded) over all strategies. All parties
/// but the last are enumerated in sign-string order; the last party's best
/// response is closed form with `+` on ties, so the first strict minimum
/// found is the lexicographically smallest minimizer.
fn enumerate<T>(sc: &Scenario, data: &[T]) -> (DeterministicStrategy, T)
where
    T: Copy + Num + PartialOrd + From<i8>,
{
    let root = if sc.marginals { data[0] } else { T::zero() };
    let last = sc.parties - 1;
    let prefix_bits = last * sc.inputs;
    let mut best: Option<(DeterministicStrategy, T)> = None;
    for code in 0..1u64 << prefix_bits {
        let mut s = DeterministicStrategy::from_code(sc, code << sc.inputs);
        let factors: Vec<Vec<T>> = s.factors(sc);
        let refs: Vec<&[T]> = factors.iter().map(|f| f.as_slice()).collect();
        let c = contract_except(data, sc.side(), &refs, last);
        let (offset, coeffs) = if sc.marginals {
            (c[0], &c[1..])
        } else {
            (T::zero(), &c[..])
        };
        let mut signs = SignVector::all_plus(sc.inputs);
        let mut value = offset - root;
        for (x, &v) in coeffs.iter().enumerate() {
            if v > T::zero() {
                signs.set(x, -1);
                value = value - v;
            } else {
                value = value + v;
            }
        }
        if best.as_ref().map_or(true, |(_, b)| value < *b) {
            *s.party_mut(last) = signs;
            best = Some((s, value));
        }
    }
    best.expect("at least one strategy")
}

/// Global minimizer of `<gradient, d_λ>`.
pub fn exhaustive_lmo(gradient: &CorrelationTensor) -> Result<(DeterministicStrategy, f64)> {
    let sc = gradient.scenario();
    check_cap(sc)?;
    Ok(enumerate(sc, gradient.entries()))
}

/// Exact `max_λ <M, d_λ>` for an integer functional given by its dense entries.
pub fn exhaustive_max_i64(sc: &Scenario, entries: &[i64]) -> Result<(DeterministicStrategy, i64)> {
    check_cap(sc)?;
    let neg: Vec<i64> = entries.iter().map(|v| -v).collect();
    let (s, v) = enumerate(sc, &neg);
    Ok((s, -v))
}
