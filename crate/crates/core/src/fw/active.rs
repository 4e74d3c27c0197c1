use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tensor::{strategy_tensor, CorrelationTensor, DeterministicStrategy, Scenario};

/// Convex combination of deterministic strategies with its dense iterate.
#[derive(Clone, Debug)]
pub struct ActiveSet {
    scenario: Scenario,
    atoms: Vec<DeterministicStrategy>,
    weights: Vec<f64>,
    index: HashMap<DeterministicStrategy, usize>,
    x: CorrelationTensor,
}

impl ActiveSet {
    pub fn singleton(scenario: Scenario, atom: DeterministicStrategy) -> Self {
        let atom = atom.canonical(scenario.marginals);
        let x = strategy_tensor(&atom, &scenario).expect("atom matches scenario");
        let mut index = HashMap::new();
        index.insert(atom.clone(), 0);
        ActiveSet {
            scenario,
            atoms: vec![atom],
            weights: vec![1.0],
            index,
            x,
        }
    }

    /// Builds a set from explicit atoms and weights (duplicates merged).
    pub fn from_parts(
        scenario: Scenario,
        atoms: Vec<DeterministicStrategy>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::Shape(
                "atoms and weights must be nonempty and parallel".into(),
            ));
        }
        let mut set = ActiveSet {
            scenario,
            atoms: Vec::new(),
            weights: Vec::new(),
            index: HashMap::new(),
            x: CorrelationTensor::zeros(scenario),
        };
        for (a, w) in atoms.into_iter().zip(weights) {
            a.check_shape(&scenario)?;
            let i = set.find_or_insert(a);
            set.weights[i] += w;
        }
        set.recompute_iterate();
        Ok(set)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn atoms(&self) -> &[DeterministicStrategy] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iterate(&self) -> &CorrelationTensor {
        &self.x
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn position(&self, atom: &DeterministicStrategy) -> Option<usize> {
        self.index
            .get(&atom.canonical(self.scenario.marginals))
            .copied()
    }

    /// Index of `atom`, appending it with weight 0 when new.
    pub(crate) fn find_or_insert(&mut self, atom: DeterministicStrategy) -> usize {
        let atom = atom.canonical(self.scenario.marginals);
        if let Some(&i) = self.index.get(&atom) {
            return i;
        }
        self.index.insert(atom.clone(), self.atoms.len());
        self.atoms.push(atom);
        self.weights.push(0.0);
        self.atoms.len() - 1
    }

    /// Removes atom `i` by swapping in the last atom.
    pub(crate) fn swap_remove(&mut self, i: usize) {
        let atom = self.atoms.swap_remove(i);
        self.weights.swap_remove(i);
        self.index.remove(&atom);
        if i < self.atoms.len() {
            self.index.insert(self.atoms[i].clone(), i);
        }
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// `x += coef * d_atom`.
    pub(crate) fn add_to_iterate(&mut self, atom: usize, coef: f64) {
        let d = strategy_tensor(&self.atoms[atom], &self.scenario).expect("shape checked");
        for (x, v) in self.x.free_entries_mut().iter_mut().zip(d.free_entries()) {
            *x += coef * v;
        }
    }

    pub(crate) fn scale_iterate(&mut self, factor: f64) {
        self.x
            .free_entries_mut()
            .iter_mut()
            .for_each(|v| *v *= factor);
    }

    /// Rebuilds `x` from the weights.
    pub fn recompute_iterate(&mut self) {
        self.x = CorrelationTensor::zeros(self.scenario);
        for i in 0..self.atoms.len() {
            let w = self.weights[i];
            if w != 0.0 {
                self.add_to_iterate(i, w);
            }
        }
    }

    /// Rescales weights to sum to one when drift exceeds `1e-12`.
    pub(crate) fn renormalize(&mut self) -> bool {
        let s = self.weight_sum();
        if (s - 1.0).abs() <= 1e-12 {
            return false;
        }
        self.weights.iter_mut().for_each(|w| *w /= s);
        self.recompute_iterate();
        true
    }

    /// Checks weights, duplicates, and the cached iterate against a recomputation.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if let Some(w) = self.weights.iter().find(|&&w| w < 0.0) {
            return Err(Error::Domain(format!("negative weight {w}")));
        }
        let s = self.weight_sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::Domain(format!("weights sum to {s}")));
        }
        if self.index.len() != self.atoms.len() {
            return Err(Error::Domain("duplicate atoms in active set".into()));
        }
        let mut fresh = self.clone();
        fresh.recompute_iterate();
        let err = fresh.x.sub(&self.x)?.max_abs();
        if err > tol.max(1e-10) {
            return Err(Error::Domain(format!("cached iterate off by {err}")));
        }
        Ok(())
    }
}

/// Incremental values `<∇f(x), d_λ> = Σ_μ q_μ <d_μ, d_λ> - <v0 p, d_λ>` over
/// the active atoms, using closed-form Gram entries.
#[derive(Clone, Debug)]
pub struct InnerCache {
    target_inner: Vec<f64>,
    iterate_inner: Vec<f64>,
}

impl InnerCache {
    /// Full build: `O(|S|^2)` Gram entries plus one target contraction per atom.
    pub fn new(active: &ActiveSet, target: &CorrelationTensor) -> Self {
        let marg = active.scenario.marginals;
        let target_inner = active
            .atoms
            .iter()
            .map(|a| target.strategy_inner(a))
            .collect();
        let iterate_inner = active
            .atoms
            .iter()
            .map(|l| {
                active
                    .atoms
                    .iter()
                    .zip(&active.weights)
                    .map(|(mu, &q)| q * mu.gram(l, marg) as f64)
                    .sum()
            })
            .collect();
        InnerCache {
            target_inner,
            iterate_inner,
        }
    }

    pub fn len(&self) -> usize {
        self.target_inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_inner.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.iterate_inner[i] - self.target_inner[i]
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// `<x, d_i>`.
    pub fn iterate_inner(&self, i: usize) -> f64 {
        self.iterate_inner[i]
    }

    /// After weights of atoms `a` and `b` changed by `da` and `db`.
    pub fn update_pair(&mut self, active: &ActiveSet, a: usize, da: f64, b: usize, db: f64) {
        let marg = active.scenario.marginals;
        let (sa, sb) = (&active.atoms[a], &active.atoms[b]);
        for (l, v) in active.atoms.iter().zip(self.iterate_inner.iter_mut()) {
            *v += da * sa.gram(l, marg) as f64 + db * sb.gram(l, marg) as f64;
        }
    }

    /// After `x <- (1-γ) x + γ d_ω`, where `ω` is already an active atom.
    pub fn update_frank_wolfe(&mut self, active: &ActiveSet, omega: usize, gamma: f64) {
        let marg = active.scenario.marginals;
        let so = &active.atoms[omega];
        for (l, v) in active.atoms.iter().zip(self.iterate_inner.iter_mut()) {
            *v = (1.0 - gamma) * *v + gamma * so.gram(l, marg) as f64;
        }
    }

    /// Appends the entry of a newly inserted atom (last in `active`).
    pub fn push(&mut self, active: &ActiveSet, target: &CorrelationTensor) {
        let marg = active.scenario.marginals;
        let new = active.atoms.last().expect("atom was inserted");
        self.target_inner.push(target.strategy_inner(new));
        let s = active
            .atoms
            .iter()
            .zip(&active.weights)
            .map(|(mu, &q)| q * mu.gram(new, marg) as f64)
            .sum();
        self.iterate_inner.push(s);
    }

    /// Mirrors [`ActiveSet::swap_remove`].
    pub fn swap_remove(&mut self, i: usize) {
        self.target_inner.swap_remove(i);
        self.iterate_inner.swap_remove(i);
    }
}
