use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::tensor::{
    contract_except, party_factor, CorrelationTensor, DeterministicStrategy, SignVector,
};

pub const DEFAULT_RESTARTS: usize = 3000;
const MAX_ROUNDS: usize = 10_000;

/// Best response of one party: minimizes `sum_k c[k] f[k]` over its signs
/// (`+` on ties), returning the new signs and the resulting value of
/// `<g, d>` including the root term.
pub(crate) fn best_response(c: &[f64], marginals: bool) -> (SignVector, f64) {
    let (offset, coeffs) = if marginals { (c[0], &c[1..]) } else { (0.0, c) };
    let mut signs = SignVector::all_plus(coeffs.len());
    let mut value = offset;
    for (x, &v) in coeffs.iter().enumerate() {
        if v > 0.0 {
            signs.set(x, -1);
            value -= v;
        } else {
            value += v;
        }
    }
    (signs, value)
}

/// Alternating minimization from `start`: parties are updated in order
/// `1..N` until a full round brings no strict decrease.
pub fn alternating_descent(
    gradient: &CorrelationTensor,
    start: DeterministicStrategy,
) -> (DeterministicStrategy, f64) {
    let sc = *gradient.scenario();
    let root = if sc.marginals {
        gradient.entries()[0]
    } else {
        0.0
    };
    let mut s = start;
    let mut factors: Vec<Vec<f64>> = s.factors(&sc);
    let mut best = f64::INFINITY;
    for _ in 0..MAX_ROUNDS {
        let mut value = f64::INFINITY;
        for n in 0..sc.parties {
            let refs: Vec<&[f64]> = factors.iter().map(|f| f.as_slice()).collect();
            let c = contract_except(gradient.entries(), sc.side(), &refs, n);
            let (signs, v) = best_response(&c, sc.marginals);
            factors[n] = party_factor(&signs, &sc);
            *s.party_mut(n) = signs;
            value = v - root;
        }
        if value < best {
            best = value;
        } else {
            break;
        }
    }
    (s, best)
}

/// Multi-start alternating minimization of `<gradient, d>`. Restarts run in
/// parallel, each with its own ChaCha stream, and the best value wins with
/// ties going to the lowest restart index, so the result depends on `seed`
/// only.
pub fn heuristic_lmo(
    gradient: &CorrelationTensor,
    restarts: usize,
    seed: u64,
) -> (DeterministicStrategy, f64) {
    let sc = *gradient.scenario();
    (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let start = DeterministicStrategy::random(&sc, &mut rng);
            let (s, v) = alternating_descent(gradient, start);
            (v, r, s)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(v, _, s)| (s, v))
        .expect("at least one restart")
}
