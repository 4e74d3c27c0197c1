//! Frank–Wolfe membership solvers for `v0 p` in the local polytope, minimizing
//! `f(x) = ½‖x - v0 p‖²` over convex combinations of deterministic strategies.

mod active;

pub use active::{ActiveSet, InnerCache};

use crate::error::{Error, Result};
use crate::lmo::{
    alternating_descent, exhaustive_lmo, heuristic_lmo, BellFunctional, DEFAULT_RESTARTS,
};
use crate::tensor::{CorrelationTensor, DeterministicStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Oracle {
    /// Multi-start alternating minimization; the solver also runs one descent
    /// from the best active atom.
    Heuristic { restarts: usize },
    /// Full enumeration (`N*m <= 26`).
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub lazy_k: f64,
    pub max_iter: usize,
    pub eps: f64,
    pub oracle: Oracle,
    pub seed: u64,
    /// Invoke the callback every this many iterations (0 disables it).
    pub callback_every: usize,
    /// Record a [`TraceEntry`] for every iteration.
    pub trace: bool,
    /// Full cache rebuild and weight renormalization cadence.
    pub rebuild_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lazy_k: 2.0,
            max_iter: 100_000,
            eps: 1e-6,
            oracle: Oracle::Heuristic {
                restarts: DEFAULT_RESTARTS,
            },
            seed: 0,
            callback_every: 0,
            trace: false,
            rebuild_every: 1000,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lazy_k >= 1.0) {
            return Err(Error::Domain(format!(
                "lazy tolerance K = {} < 1",
                self.lazy_k
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Domain(format!(
                "eps = {} must be positive",
                self.eps
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    ConvergedInside,
    Separated,
    IterationCap,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::ConvergedInside => "converged_inside",
            Status::Separated => "separated",
            Status::IterationCap => "iteration_cap",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Pairwise,
    Drop,
    FrankWolfe,
    /// LMO gap too small: `γ = 0` and `Φ` is halved.
    Null,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `f` after the step.
    pub objective: f64,
    /// `Φ` after the step.
    pub phi: f64,
    pub step: StepKind,
    pub gamma: f64,
    pub weight_sum: f64,
    pub active_size: usize,
    pub lmo_calls: usize,
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    pub active: ActiveSet,
    pub status: Status,
    pub distance: f64,
    /// Final `Φ` (the last Frank–Wolfe gap for the vanilla solver).
    pub phi: f64,
    /// Last Frank–Wolfe gap `<∇f, x - d_ω>` returned by the oracle.
    pub fw_gap: f64,
    /// `x_T - v0 p`.
    pub gradient: CorrelationTensor,
    pub iterations: usize,
    pub lmo_calls: usize,
    pub trace: Vec<TraceEntry>,
}

impl SolverResult {
    pub fn objective(&self) -> f64 {
        0.5 * self.distance * self.distance
    }
}

fn check_v0(v0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v0) {
        return Err(Error::Domain(format!("visibility {v0} outside [0, 1]")));
    }
    Ok(())
}

struct Lmo<'a> {
    cfg: &'a SolverConfig,
    calls: usize,
}

impl Lmo<'_> {
    /// Minimizer of `<g, d>` and its value.
    fn call(
        &mut self,
        g: &CorrelationTensor,
        warm: Option<&DeterministicStrategy>,
    ) -> Result<(DeterministicStrategy, f64)> {
        let seed = self.cfg.seed.wrapping_add(self.calls as u64);
        self.calls += 1;
        match self.cfg.oracle {
            Oracle::Exhaustive => exhaustive_lmo(g),
            Oracle::Heuristic { restarts } => {
                let (mut s, mut v) = heuristic_lmo(g, restarts, seed);
                if let Some(w) = warm {
                    let (ws, wv) = alternating_descent(g, w.clone());
                    if wv < v {
                        (s, v) = (ws, wv);
                    }
                }
                Ok((s, v))
            }
        }
    }
}

fn residual(x: &CorrelationTensor, target: &CorrelationTensor) -> CorrelationTensor {
    x.sub(target).expect("same scenario")
}

fn dot_free(a: &CorrelationTensor, b: &CorrelationTensor) -> f64 {
    a.free_entries()
        .iter()
        .zip(b.free_entries())
        .map(|(x, y)| x * y)
        .sum()
}

/// Drops zero-weight atoms (after a full Frank–Wolfe step).
fn prune(active: &mut ActiveSet, cache: Option<&mut InnerCache>) {
    let mut cache = cache;
    let mut i = 0;
    while i < active.len() {
        if active.weights()[i] <= 0.0 {
            active.swap_remove(i);
            if let Some(c) = cache.as_deref_mut() {
                c.swap_remove(i);
            }
        } else {
            i += 1;
        }
    }
}

/// `x <- (1-γ) x + γ d_i` on the active set.
fn frank_wolfe_move(active: &mut ActiveSet, i: usize, gamma: f64) {
    active
        .weights_mut()
        .iter_mut()
        .for_each(|w| *w *= 1.0 - gamma);
    active.weights_mut()[i] += gamma;
    active.scale_iterate(1.0 - gamma);
    active.add_to_iterate(i, gamma);
}

/// Exact line search from `x` toward `d` with `‖x - d‖² = xx - 2 xd + D`.
fn toward_vertex_step(gap: f64, x: &CorrelationTensor, d: &DeterministicStrategy) -> f64 {
    let dim = x.scenario().dimension() as f64;
    let denom = x.norm2_sq() - 2.0 * x.strategy_inner(d) + dim;
    if denom <= 0.0 {
        return 0.0;
    }
    (gap / denom).clamp(0.0, 1.0)
}

fn debug_check_monotone(before: f64, after: f64) {
    debug_assert!(
        after <= before + 1e-12 * before.max(1.0),
        "objective increased from {before} to {after}"
    );
}

/// Gilbert's algorithm: one oracle call per iteration and an exact line
/// search toward the returned vertex.
pub fn frank_wolfe_vanilla(
    p: &CorrelationTensor,
    v0: f64,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    frank_wolfe_vanilla_with(p, v0, cfg, &mut |_| {})
}

pub fn frank_wolfe_vanilla_with(
    p: &CorrelationTensor,
    v0: f64,
    cfg: &SolverConfig,
    callback: &mut dyn FnMut(&TraceEntry),
) -> Result<SolverResult> {
    check_v0(v0)?;
    cfg.validate()?;
    let target = p.scale(v0);
    let mut lmo = Lmo { cfg, calls: 0 };
    let (d0, _) = lmo.call(&target.neg(), None)?;
    let mut active = ActiveSet::singleton(*p.scenario(), d0);
    let mut trace = Vec::new();
    let mut status = Status::IterationCap;
    let mut fw_gap = f64::INFINITY;
    let mut iterations = 0;
    let tol_f = 0.5 * cfg.eps * cfg.eps;
    for it in 0..cfg.max_iter {
        let g = residual(active.iterate(), &target);
        let dist = g.norm2();
        if dist <= cfg.eps {
            status = Status::ConvergedInside;
            break;
        }
        let f = 0.5 * dist * dist;
        let best = argmin(&active, &g);
        let (omega, value) = lmo.call(&g, Some(&active.atoms()[best]))?;
        fw_gap = dot_free(&g, active.iterate()) - value;
        if fw_gap < tol_f {
            status = Status::Separated;
            break;
        }
        let gamma = toward_vertex_step(fw_gap, active.iterate(), &omega);
        let i = active.find_or_insert(omega);
        frank_wolfe_move(&mut active, i, gamma);
        prune(&mut active, None);
        if cfg.rebuild_every > 0 && (it + 1) % cfg.rebuild_every == 0 {
            active.renormalize();
        }
        iterations = it + 1;
        let f_new = 0.5 * residual(active.iterate(), &target).norm2_sq();
        debug_check_monotone(f, f_new);
        let entry = TraceEntry {
            iteration: it,
            objective: f_new,
            phi: fw_gap,
            step: StepKind::FrankWolfe,
            gamma,
            weight_sum: active.weight_sum(),
            active_size: active.len(),
            lmo_calls: lmo.calls,
        };
        if cfg.callback_every > 0 && (it + 1) % cfg.callback_every == 0 {
            callback(&entry);
        }
        if cfg.trace {
            trace.push(entry);
        }
    }
    active.renormalize();
    let gradient = residual(active.iterate(), &target);
    Ok(SolverResult {
        distance: gradient.norm2(),
        active,
        status,
        phi: fw_gap,
        fw_gap,
        gradient,
        iterations,
        lmo_calls: lmo.calls,
        trace,
    })
}

fn argmin(active: &ActiveSet, g: &CorrelationTensor) -> usize {
    active
        .atoms()
        .iter()
        .map(|a| g.strategy_inner(a))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("nonempty active set")
}

/// Lazy blended pairwise conditional gradients.
pub fn bpcg(p: &CorrelationTensor, v0: f64, cfg: &SolverConfig) -> Result<SolverResult> {
    bpcg_with(p, v0, cfg, &mut |_| {})
}

pub fn bpcg_with(
    p: &CorrelationTensor,
    v0: f64,
    cfg: &SolverConfig,
    callback: &mut dyn FnMut(&TraceEntry),
) -> Result<SolverResult> {
    check_v0(v0)?;
    cfg.validate()?;
    let sc = *p.scenario();
    let dim = sc.dimension() as f64;
    let marg = sc.marginals;
    let target = p.scale(v0);
    let mut lmo = Lmo { cfg, calls: 0 };
    let (d0, _) = lmo.call(&target.neg(), None)?;
    let mut active = ActiveSet::singleton(sc, d0);
    let mut cache = InnerCache::new(&active, &target);
    let mut phi = 0.5 * residual(active.iterate(), &target).norm2_sq();
    let mut trace = Vec::new();
    let mut status = Status::IterationCap;
    let mut fw_gap = f64::INFINITY;
    let mut iterations = 0;
    let tol_f = 0.5 * cfg.eps * cfg.eps;
    for it in 0..cfg.max_iter {
        let g = residual(active.iterate(), &target);
        let dist = g.norm2();
        if dist <= cfg.eps {
            status = Status::ConvergedInside;
            break;
        }
        if phi < tol_f || fw_gap < tol_f {
            status = Status::Separated;
            break;
        }
        let f = 0.5 * dist * dist;
        let values = cache.values();
        let (mut away, mut local) = (0, 0);
        for (i, &v) in values.iter().enumerate() {
            if v > values[away] {
                away = i;
            }
            if v < values[local] {
                local = i;
            }
        }
        let pair_gap = values[away] - values[local];
        let (step, gamma);
        if away != local && pair_gap >= phi {
            let a_norm_sq =
                2.0 * (dim - active.atoms()[away].gram(&active.atoms()[local], marg) as f64);
            let cap = active.weights()[away];
            let unconstrained = pair_gap / a_norm_sq;
            if unconstrained < cap {
                step = StepKind::Pairwise;
                gamma = unconstrained;
            } else {
                step = StepKind::Drop;
                gamma = cap;
            }
            active.weights_mut()[away] -= gamma;
            active.weights_mut()[local] += gamma;
            active.add_to_iterate(away, -gamma);
            active.add_to_iterate(local, gamma);
            cache.update_pair(&active, away, -gamma, local, gamma);
            if step == StepKind::Drop {
                active.weights_mut()[away] = 0.0;
                active.swap_remove(away);
                cache.swap_remove(away);
            }
        } else {
            let (omega, value) = lmo.call(&g, Some(&active.atoms()[local]))?;
            let gap = dot_free(&g, active.iterate()) - value;
            fw_gap = gap;
            if gap >= phi / cfg.lazy_k {
                step = StepKind::FrankWolfe;
                gamma = toward_vertex_step(gap, active.iterate(), &omega);
                let before = active.len();
                let i = active.find_or_insert(omega);
                if active.len() > before {
                    cache.push(&active, &target);
                }
                frank_wolfe_move(&mut active, i, gamma);
                cache.update_frank_wolfe(&active, i, gamma);
                prune(&mut active, Some(&mut cache));
            } else {
                step = StepKind::Null;
                gamma = 0.0;
                phi /= 2.0;
            }
        }
        if cfg.rebuild_every > 0 && (it + 1) % cfg.rebuild_every == 0 {
            active.renormalize();
            cache = InnerCache::new(&active, &target);
        }
        iterations = it + 1;
        let f_new = 0.5 * residual(active.iterate(), &target).norm2_sq();
        debug_check_monotone(f, f_new);
        let entry = TraceEntry {
            iteration: it,
            objective: f_new,
            phi,
            step,
            gamma,
            weight_sum: active.weight_sum(),
            active_size: active.len(),
            lmo_calls: lmo.calls,
        };
        if cfg.callback_every > 0 && (it + 1) % cfg.callback_every == 0 {
            callback(&entry);
        }
        if cfg.trace {
            trace.push(entry);
        }
    }
    active.renormalize();
    let gradient = residual(active.iterate(), &target);
    let distance = gradient.norm2();
    if status != Status::ConvergedInside && distance <= cfg.eps {
        status = Status::ConvergedInside;
    }
    Ok(SolverResult {
        active,
        status,
        distance,
        phi,
        fw_gap,
        gradient,
        iterations,
        lmo_calls: lmo.calls,
        trace,
    })
}

/// Separating functional `G = v0 p - x_T`.
pub fn extract_hyperplane(
    res: &SolverResult,
    p: &CorrelationTensor,
    v0: f64,
) -> Result<BellFunctional> {
    p.scenario().check_same(res.gradient.scenario())?;
    if res.status == Status::ConvergedInside {
        log::warn!(
            "solver converged inside (distance {:.3e}); the gradient is not a separating direction",
            res.distance
        );
    }
    let target = p.scale(v0);
    Ok(BellFunctional::new(residual(&target, res.active.iterate())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{strategy_tensor, Scenario};

    /// Singlet correlations for Alice at Z, X and Bob at (Z ± X)/√2.
    fn chsh_singlet() -> CorrelationTensor {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CorrelationTensor::from_entries(Scenario::bipartite(2).unwrap(), vec![-s, -s, -s, s])
            .unwrap()
    }

    fn cfg(seed: u64) -> SolverConfig {
        SolverConfig {
            oracle: Oracle::Heuristic { restarts: 8 },
            seed,
            trace: true,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn vertex_target_converges_immediately() {
        let sc = Scenario::new(2, 3, true).unwrap();
        let s = DeterministicStrategy::from_signs(vec![vec![1, -1, 1], vec![-1, -1, 1]]).unwrap();
        let p = strategy_tensor(&s, &sc).unwrap();
        for solver in [frank_wolfe_vanilla, bpcg] {
            let res = solver(&p, 1.0, &cfg(0)).unwrap();
            assert_eq!(res.status, Status::ConvergedInside);
            assert_eq!(res.distance, 0.0);
        }
    }

    #[test]
    fn origin_target_converges() {
        let p = chsh_singlet();
        for solver in [frank_wolfe_vanilla, bpcg] {
            let res = solver(&p, 0.0, &cfg(3)).unwrap();
            assert_eq!(res.status, Status::ConvergedInside);
        }
    }

    #[test]
    fn chsh_threshold_verdicts() {
        let p = chsh_singlet();
        // distance to the CHSH facet: (0.75·2√2 - 2) / 2
        let facet = (0.75 * 2.0 * std::f64::consts::SQRT_2 - 2.0) / 2.0;
        for solver in [frank_wolfe_vanilla, bpcg] {
            let inside = solver(&p, 0.65, &cfg(1)).unwrap();
            assert_eq!(inside.status, Status::ConvergedInside);
            inside.active.check_invariants(1e-12).unwrap();
        }
        let outside = bpcg(&p, 0.75, &cfg(1)).unwrap();
        assert_eq!(outside.status, Status::Separated);
        assert!(
            (outside.distance - facet).abs() < 1e-6,
            "{}",
            outside.distance
        );
        // vanilla zigzags on the facet; it stays away but converges slowly
        let capped = SolverConfig {
            max_iter: 2000,
            ..cfg(1)
        };
        let outside = frank_wolfe_vanilla(&p, 0.75, &capped).unwrap();
        assert_ne!(outside.status, Status::ConvergedInside);
        assert!(outside.distance >= facet - 1e-9 && outside.distance < facet + 1e-2);
    }

    #[test]
    fn bpcg_trace_properties() {
        let p = chsh_singlet();
        let res = bpcg(&p, 0.7, &cfg(2)).unwrap();
        let mut prev_phi = f64::INFINITY;
        let mut prev_f = f64::INFINITY;
        for e in &res.trace {
            assert!(e.objective <= prev_f + 1e-15);
            assert!((e.weight_sum - 1.0).abs() < 1e-12);
            if e.step == StepKind::Null {
                assert_eq!(e.phi, prev_phi / 2.0);
            } else if prev_phi.is_finite() {
                assert_eq!(e.phi, prev_phi);
            }
            prev_phi = e.phi;
            prev_f = e.objective;
        }
    }

    #[test]
    fn hyperplane_points_from_iterate_to_target() {
        let p = chsh_singlet();
        let res = bpcg(&p, 0.75, &cfg(4)).unwrap();
        let g = extract_hyperplane(&res, &p, 0.75).unwrap();
        assert_eq!(g.tensor(), &res.gradient.neg());
        // normalized gradient is proportional to a CHSH variant
        let e = g.tensor().entries();
        let scale = e[0].abs();
        for v in e {
            assert!((v.abs() - scale).abs() < 1e-4 * scale);
        }
        assert!(e.iter().product::<f64>() < 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = chsh_singlet();
        assert!(bpcg(&p, 1.5, &cfg(0)).is_err());
        let bad = SolverConfig {
            lazy_k: 0.5,
            ..cfg(0)
        };
        assert!(bpcg(&p, 0.5, &bad).is_err());
    }
}
