//! Linear minimization oracles over deterministic strategies and exact local
//! bounds of Bell functionals.

mod exhaustive;
mod heuristic;
mod qubo;

pub use exhaustive::{exhaustive_lmo, exhaustive_max_i64, EXHAUSTIVE_BITS};
pub use heuristic::{alternating_descent, heuristic_lmo, DEFAULT_RESTARTS};
pub use qubo::{
    qubo_branch_and_bound, strategy_from_assignment, to_qubo, QuboInstance, QuboSolution, Weight,
};

use crate::error::{Error, Result};
use crate::tensor::{CorrelationTensor, DeterministicStrategy, Scenario};

/// Integer entries above this magnitude are treated as real-valued.
const MAX_INTEGER_ENTRY: f64 = (1u64 << 40) as f64;

pub const DEFAULT_BB_BUDGET: u64 = 50_000_000;

/// Linear functional `<M, ·>` on correlation tensors (root excluded).
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    tensor: CorrelationTensor,
    integer: Option<Vec<i64>>,
}

impl BellFunctional {
    pub fn new(tensor: CorrelationTensor) -> Self {
        let start = tensor.scenario().first_free();
        let integer = tensor
            .free_entries()
            .iter()
            .all(|v| v.fract() == 0.0 && v.abs() <= MAX_INTEGER_ENTRY);
        let integer = integer.then(|| {
            let mut ints: Vec<i64> = tensor.entries().iter().map(|&v| v as i64).collect();
            if start == 1 {
                ints[0] = 0;
            }
            ints
        });
        BellFunctional { tensor, integer }
    }

    pub fn from_integers(sc: Scenario, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != sc.len() {
            return Err(Error::Shape(format!(
                "expected {} entries, got {}",
                sc.len(),
                entries.len()
            )));
        }
        let floats = entries.iter().map(|&v| v as f64).collect();
        Ok(BellFunctional::new(CorrelationTensor::from_entries(
            sc, floats,
        )?))
    }

    pub fn scenario(&self) -> &Scenario {
        self.tensor.scenario()
    }

    pub fn tensor(&self) -> &CorrelationTensor {
        &self.tensor
    }

    pub fn is_integer(&self) -> bool {
        self.integer.is_some()
    }

    /// Dense integer entries (root slot zero) when the functional is integral.
    pub fn integer_entries(&self) -> Option<&[i64]> {
        self.integer.as_deref()
    }

    pub fn value_at(&self, s: &DeterministicStrategy) -> f64 {
        self.tensor.strategy_inner(s)
    }

    /// Exact `<M, d_s>` for integral functionals.
    pub fn integer_value_at(&self, s: &DeterministicStrategy) -> Option<i64> {
        let ints = self.integer.as_ref()?;
        let sc = self.scenario();
        let factors: Vec<Vec<i64>> = s.factors(sc);
        let refs: Vec<&[i64]> = factors.iter().map(|f| f.as_slice()).collect();
        Some(crate::tensor::contract_all(ints, sc.side(), &refs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMethod {
    Exhaustive,
    BranchAndBound,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalBound {
    pub value: f64,
    /// Exact value when the functional is integral and the method is exact.
    pub exact: Option<i64>,
    pub strategy: DeterministicStrategy,
    pub method: BoundMethod,
    /// True when the maximum is proven (exhaustive or completed B&B).
    pub optimal: bool,
}

/// `max_λ <M, d_λ>`: exhaustive when `N*m <= 26`, branch and bound for larger
/// bipartite functionals, and the alternating heuristic (flagged non-optimal)
/// otherwise.
pub fn local_bound(
    m: &BellFunctional,
    budget: u64,
    restarts: usize,
    seed: u64,
) -> Result<LocalBound> {
    let sc = *m.scenario();
    if sc.strategy_bits() <= EXHAUSTIVE_BITS {
        if let Some(ints) = m.integer_entries() {
            let (s, v) = exhaustive_max_i64(&sc, ints)?;
            return Ok(LocalBound {
                value: v as f64,
                exact: Some(v),
                strategy: s,
                method: BoundMethod::Exhaustive,
                optimal: true,
            });
        }
        let (s, v) = exhaustive_lmo(&m.tensor.neg())?;
        return Ok(LocalBound {
            value: -v,
            exact: None,
            strategy: s,
            method: BoundMethod::Exhaustive,
            optimal: true,
        });
    }
    if sc.parties == 2 && 2 * sc.inputs <= 64 {
        if let Some(ints) = m.integer_entries() {
            let inst = to_qubo(&sc, ints)?;
            let sol = qubo_branch_and_bound(&inst, budget)?;
            let v = inst.c + 2 * sol.value;
            let s = strategy_from_assignment(&sc, &sol.assignment);
            return Ok(LocalBound {
                value: v as f64,
                exact: sol.optimal.then_some(v),
                strategy: s,
                method: BoundMethod::BranchAndBound,
                optimal: sol.optimal,
            });
        }
        let inst = to_qubo(&sc, m.tensor.entries())?;
        let sol = qubo_branch_and_bound(&inst, budget)?;
        return Ok(LocalBound {
            value: inst.c + 2.0 * sol.value,
            exact: None,
            strategy: strategy_from_assignment(&sc, &sol.assignment),
            method: BoundMethod::BranchAndBound,
            optimal: sol.optimal,
        });
    }
    log::warn!("no exact oracle for this scenario; local bound is a heuristic lower estimate");
    let (s, v) = heuristic_lmo(&m.tensor.neg(), restarts, seed);
    Ok(LocalBound {
        value: -v,
        exact: m.integer_value_at(&s),
        strategy: s,
        method: BoundMethod::Heuristic,
        optimal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_and_single_cell() {
        let sc = Scenario::bipartite(2).unwrap();
        let chsh = BellFunctional::from_integers(sc, vec![1, 1, 1, -1]).unwrap();
        let lb = local_bound(&chsh, 1000, 10, 0).unwrap();
        assert_eq!(lb.exact, Some(2));
        assert!(lb.optimal);
        let cell = BellFunctional::from_integers(Scenario::bipartite(3).unwrap(), {
            let mut v = vec![0; 9];
            v[4] = 1;
            v
        })
        .unwrap();
        assert_eq!(local_bound(&cell, 1000, 10, 0).unwrap().exact, Some(1));
    }

    #[test]
    fn mermin_bound_is_two() {
        // +XXX -XYY -YXY -YYX with inputs 1 = X, 2 = Y
        let sc = Scenario::new(3, 2, false).unwrap();
        let mut e = vec![0i64; 8];
        e[sc.flat_index(&[0, 0, 0])] = 1;
        e[sc.flat_index(&[0, 1, 1])] = -1;
        e[sc.flat_index(&[1, 0, 1])] = -1;
        e[sc.flat_index(&[1, 1, 0])] = -1;
        let f = BellFunctional::from_integers(sc, e).unwrap();
        let lb = local_bound(&f, 1000, 10, 0).unwrap();
        assert_eq!(lb.exact, Some(2));
        assert_eq!(f.integer_value_at(&lb.strategy), Some(2));
    }

    #[test]
    fn large_bipartite_uses_branch_and_bound() {
        let sc = Scenario::bipartite(15).unwrap();
        let e: Vec<i64> = (0..sc.len() as i64).map(|i| (i * 7919 % 11) - 5).collect();
        let f = BellFunctional::from_integers(sc, e).unwrap();
        let lb = local_bound(&f, DEFAULT_BB_BUDGET, 50, 0).unwrap();
        assert_eq!(lb.method, BoundMethod::BranchAndBound);
        assert!(lb.optimal);
        assert_eq!(f.integer_value_at(&lb.strategy), lb.exact);
        let (_, h) = heuristic_lmo(&f.tensor().neg(), 200, 1);
        assert!(-h <= lb.value);
    }

    #[test]
    fn fractional_entries_are_not_integer() {
        let sc = Scenario::bipartite(2).unwrap();
        let f = BellFunctional::new(
            CorrelationTensor::from_entries(sc, vec![0.5, 1.0, 1.0, -1.0]).unwrap(),
        );
        assert!(!f.is_integer());
        let lb = local_bound(&f, 1000, 10, 0).unwrap();
        assert_eq!(lb.exact, None);
        assert_eq!(lb.value, 2.5);
    }
}
