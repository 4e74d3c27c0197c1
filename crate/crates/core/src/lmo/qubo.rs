//! Bipartite local bounds as QUBO instances, solved by depth-first branch and
//! bound with roof-dual style bounds.
//!
//! With `u = (a+1)/2` and `v = (b+1)/2`, `aᵀMb = c + 2 wᵀQw` where
//! `w = (u, v)`, `Q = [[-diag(row sums), M], [Mᵀ, -diag(col sums)]]` and
//! `c = Σ M`.

use num_traits::{Num, Signed};

use crate::error::{Error, Result};
use crate::tensor::{DeterministicStrategy, Scenario, SignVector};

/// Scalar usable by the QUBO solver (`f64` or `i64`).
pub trait Weight: Copy + Num + Signed + PartialOrd + std::fmt::Debug + Send + Sync {}
impl<T: Copy + Num + Signed + PartialOrd + std::fmt::Debug + Send + Sync> Weight for T {}

fn pos<T: Weight>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuboInstance<T> {
    /// Symmetric `n x n` matrix, row-major.
    pub q: Vec<T>,
    pub n: usize,
    pub c: T,
}

impl<T: Weight> QuboInstance<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.q[i * self.n + j]
    }

    /// `wᵀQw` for a 0/1 vector.
    pub fn evaluate(&self, w: &[bool]) -> T {
        let mut acc = T::zero();
        for i in (0..self.n).filter(|&i| w[i]) {
            for j in (0..self.n).filter(|&j| w[j]) {
                acc = acc + self.get(i, j);
            }
        }
        acc
    }
}

/// QUBO form of a bipartite functional given by its dense entries.
///
/// Without marginals `entries` is the `m x m` matrix `M`. With marginals it is
/// the `(m+1) x (m+1)` tensor whose row/column 0 hold the single-party terms;
/// those add `M_x0` (resp. `M_0y`) to the diagonal and `-Σ M_x0 - Σ M_0y` to
/// `c`. The root entry is ignored.
pub fn to_qubo<T: Weight>(sc: &Scenario, entries: &[T]) -> Result<QuboInstance<T>> {
    if sc.parties != 2 {
        return Err(Error::Unsupported(format!(
            "QUBO reformulation is bipartite only, got N={}",
            sc.parties
        )));
    }
    if entries.len() != sc.len() {
        return Err(Error::Shape("functional does not match scenario".into()));
    }
    let m = sc.inputs;
    let side = sc.side();
    let off = sc.first_free();
    let mat = |x: usize, y: usize| entries[(x + off) * side + y + off];
    let n = 2 * m;
    let mut q = vec![T::zero(); n * n];
    let mut c = T::zero();
    for x in 0..m {
        for y in 0..m {
            let v = mat(x, y);
            q[x * n + m + y] = v;
            q[(m + y) * n + x] = v;
            q[x * n + x] = q[x * n + x] - v;
            q[(m + y) * n + m + y] = q[(m + y) * n + m + y] - v;
            c = c + v;
        }
    }
    if sc.marginals {
        for x in 0..m {
            let a = entries[(x + 1) * side];
            let b = entries[x + 1];
            q[x * n + x] = q[x * n + x] + a;
            q[(m + x) * n + m + x] = q[(m + x) * n + m + x] + b;
            c = c - a - b;
        }
    }
    Ok(QuboInstance { q, n, c })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuboSolution<T> {
    /// `max_w wᵀQw` (best found when `optimal` is false).
    pub value: T,
    pub assignment: Vec<bool>,
    pub optimal: bool,
    pub nodes: u64,
}

struct Search<'a, T> {
    inst: &'a QuboInstance<T>,
    order: Vec<usize>,
    fixed: Vec<Option<bool>>,
    /// Linear coefficient of each free variable given the current fixings.
    linear: Vec<T>,
    /// `Σ_{j free, j≠i} max(0, Q_ij)` for each variable.
    positive: Vec<T>,
    best: T,
    best_w: Vec<bool>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<T: Weight> Search<'_, T> {
    fn bound(&self, depth: usize, value: T) -> T {
        self.order[depth..].iter().fold(value, |acc, &i| {
            acc + pos(self.linear[i] + self.positive[i])
        })
    }

    fn fix(&mut self, i: usize, one: bool) {
        self.fixed[i] = Some(one);
        let q = self.inst;
        for j in 0..q.n {
            if j == i || self.fixed[j].is_some() {
                continue;
            }
            let qij = q.get(i, j);
            self.positive[j] = self.positive[j] - pos(qij);
            if one {
                self.linear[j] = self.linear[j] + qij + qij;
            }
        }
    }

    fn unfix(&mut self, i: usize, one: bool) {
        self.fixed[i] = None;
        let q = self.inst;
        for j in 0..q.n {
            if j == i || self.fixed[j].is_some() {
                continue;
            }
            let qij = q.get(i, j);
            self.positive[j] = self.positive[j] + pos(qij);
            if one {
                self.linear[j] = self.linear[j] - qij - qij;
            }
        }
    }

    fn dfs(&mut self, depth: usize, value: T) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if depth == self.order.len() {
            if value > self.best {
                self.best = value;
                self.best_w = self.fixed.iter().map(|f| f == &Some(true)).collect();
            }
            return;
        }
        if self.bound(depth, value) <= self.best {
            return;
        }
        let i = self.order[depth];
        let gain = self.linear[i];
        let prefer_one = gain + self.positive[i] > T::zero();
        for one in [prefer_one, !prefer_one] {
            self.fix(i, one);
            let next = if one { value + gain } else { value };
            self.dfs(depth + 1, next);
            self.unfix(i, one);
        }
    }
}

/// Maximizes `wᵀQw` over `{0,1}^n`, exploring at most `budget` nodes.
pub fn qubo_branch_and_bound<T: Weight>(
    inst: &QuboInstance<T>,
    budget: u64,
) -> Result<QuboSolution<T>> {
    let n = inst.n;
    if n > 64 {
        return Err(Error::Size(format!("QUBO with {n} > 64 variables")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let row_sum = |i: usize| (0..n).fold(T::zero(), |acc, j| acc + inst.get(i, j).abs());
    // stable sort keeps index order among equal row sums
    order.sort_by(|&a, &b| {
        row_sum(b)
            .partial_cmp(&row_sum(a))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let linear: Vec<T> = (0..n).map(|i| inst.get(i, i)).collect();
    let positive: Vec<T> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .fold(T::zero(), |acc, j| acc + pos(inst.get(i, j)))
        })
        .collect();
    let mut s = Search {
        inst,
        order,
        fixed: vec![None; n],
        linear,
        positive,
        best: T::zero(),
        best_w: vec![false; n],
        nodes: 0,
        budget,
        exhausted: false,
    };
    s.dfs(0, T::zero());
    Ok(QuboSolution {
        value: s.best,
        assignment: s.best_w,
        optimal: !s.exhausted,
        nodes: s.nodes,
    })
}

/// Strategy `(a, b)` encoded by `w = ((a+1)/2, (b+1)/2)`.
pub fn strategy_from_assignment(sc: &Scenario, w: &[bool]) -> DeterministicStrategy {
    let m = sc.inputs;
    let party = |bits: &[bool]| {
        let mut v = SignVector::all_plus(m);
        for (x, &b) in bits.iter().enumerate() {
            if !b {
                v.set(x, -1);
            }
        }
        v
    };
    DeterministicStrategy::new(vec![party(&w[..m]), party(&w[m..])]).expect("two parties")
}
