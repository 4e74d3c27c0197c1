//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL` line to stderr (outside the test harness capture).

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bellfw::certify::{
    ball_decomposition, parse_certificate, verify, write_certificate, Certificate,
};
use bellfw::fw::{bpcg, bpcg_with, frank_wolfe_vanilla, Oracle, SolverConfig, Status, StepKind};
use bellfw::lmo::{
    exhaustive_max_i64, heuristic_lmo, qubo_branch_and_bound, to_qubo, BellFunctional,
};
use bellfw::polyhedra::rationalize;
use bellfw::rational::{parse_rational, to_f64};
use bellfw::tensor::{strategy_tensor, DeterministicStrategy, RationalTensor, Scenario};
use bellfw_cli::{build_setup, SetupArgs, StateArg};

type Outcome = Result<String, String>;

fn report(n: usize, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let mut res = f();
    let elapsed = start.elapsed();
    if res.is_ok() && elapsed > limit {
        res = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
    }
    let line = match &res {
        Ok(detail) => format!("criterion {n}: PASS  {title} ({elapsed:.2?}) {detail}"),
        Err(why) => format!("criterion {n}: FAIL  {title} ({elapsed:.2?}) {why}"),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    if let Err(why) = res {
        panic!("criterion {n} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bellfw(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bellfw"))
        .args(args)
        .output()
        .expect("binary runs");
    let text =
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

fn load(path: &Path) -> Certificate {
    parse_certificate(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn criterion_1_chsh_bracket() {
    report(1, "CHSH bracket", Duration::from_secs(10), || {
        let dir = tmp();
        let up = dir.path().join("up.txt");
        let t = Instant::now();
        let (code, out) = bellfw(&[
            "solve",
            "upper",
            "--state",
            "singlet",
            "--m",
            "2",
            "--v0",
            "0.75",
            "--cert",
            path_str(&up),
        ]);
        let t_up = t.elapsed();
        ensure(code == 0, format!("upper run exited {code}: {out}"))?;
        ensure(
            t_up < Duration::from_secs(5),
            format!("upper run took {t_up:?}"),
        )?;
        let Certificate::Upper(u) = load(&up) else {
            return Err("expected an upper certificate".into());
        };
        ensure(
            verify(&Certificate::Upper(u.clone())).ok,
            "upper certificate does not verify",
        )?;
        let v_up = to_f64(&u.v_up);
        ensure((v_up - 0.70711).abs() < 1e-3, format!("v_up = {v_up}"))?;

        let low = dir.path().join("low.txt");
        let t = Instant::now();
        let (code, out) = bellfw(&[
            "solve",
            "lower",
            "--state",
            "singlet",
            "--m",
            "2",
            "--v0",
            "0.70",
            "--cert",
            path_str(&low),
        ]);
        let t_low = t.elapsed();
        ensure(code == 0, format!("lower run exited {code}: {out}"))?;
        ensure(
            t_low < Duration::from_secs(5),
            format!("lower run took {t_low:?}"),
        )?;
        let cert = load(&low);
        let report = verify(&cert);
        ensure(
            report.ok,
            format!("lower certificate rejected: {:?}", report.failure),
        )?;
        let Certificate::Lower(l) = cert else {
            return Err("expected a lower certificate".into());
        };
        let v_low = to_f64(&l.v_low);
        ensure(v_low >= 0.69, format!("v_low = {v_low}"))?;
        Ok(format!("v_low {v_low:.6} <= v_c <= v_up {v_up:.6}"))
    });
}

fn eta_sq_of(out: &str) -> Result<BigRational, String> {
    out.lines()
        .find_map(|l| l.strip_prefix("eta_sq "))
        .and_then(|s| parse_rational(s.trim()))
        .ok_or_else(|| format!("no eta_sq line in {out:?}"))
}

#[test]
fn criterion_2_icosahedron_shrinking_factor() {
    report(
        2,
        "icosahedron and pentakis shrinking factors",
        Duration::from_secs(5),
        || {
            let dir = tmp();
            let ico = dir.path().join("ico.txt");
            let (code, out) = bellfw(&[
                "polyhedron",
                "gen",
                "--schedule",
                "",
                "--tol",
                "1e-9",
                "--out",
                path_str(&ico),
            ]);
            ensure(code == 0, out)?;
            let (code, out) = bellfw(&["polyhedron", "eta", "--in", path_str(&ico)]);
            ensure(code == 0, out.clone())?;
            let eta_sq = to_f64(&eta_sq_of(&out)?);
            let expected = (5.0 + 2.0 * 5f64.sqrt()) / 15.0;
            ensure(
                (eta_sq - expected).abs() < 1e-8,
                format!("icosahedron eta^2 = {eta_sq}"),
            )?;

            let pk = dir.path().join("pentakis.txt");
            let (code, out) = bellfw(&[
                "polyhedron",
                "gen",
                "--name",
                "pentakis",
                "--tol",
                "1e-9",
                "--out",
                path_str(&pk),
            ]);
            ensure(code == 0, out)?;
            let (code, out) = bellfw(&["polyhedron", "eta", "--in", path_str(&pk)]);
            ensure(code == 0, out.clone())?;
            let eta = to_f64(&eta_sq_of(&out)?).sqrt();
            ensure((eta - 0.9226).abs() < 1e-3, format!("pentakis eta = {eta}"))?;
            Ok(format!("eta6^2 = {eta_sq:.10}, eta16 = {eta:.6}"))
        },
    );
}

#[test]
fn criterion_3_rational_sphere_exactness() {
    report(
        3,
        "rational sphere exactness",
        Duration::from_secs(10),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let (mut failures, mut calls) = (0, 0);
            while calls < 10_000 {
                let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n < 1e-3 {
                    continue;
                }
                let p = [v[0] / n, v[1] / n, v[2] / n];
                let tol = 10f64.powf(-rng.gen_range(3.0..9.0));
                calls += 1;
                let r = match rationalize(&p, tol) {
                    Ok(r) => r,
                    Err(_) => {
                        failures += 1;
                        continue;
                    }
                };
                let d = r.to_f64();
                let dist =
                    ((d[0] - p[0]).powi(2) + (d[1] - p[1]).powi(2) + (d[2] - p[2]).powi(2)).sqrt();
                if !r.is_on_sphere() || dist > tol {
                    failures += 1;
                }
            }
            ensure(failures == 0, format!("{failures} failures"))?;
            Ok("10000 points exact, zero failures".into())
        },
    );
}

/// Exact rational point of the unit sphere in dimension `d` by inverse
/// stereographic projection of a random rational vector.
fn rational_unit_vector(d: usize, rng: &mut impl Rng) -> Vec<BigRational> {
    let u: Vec<BigRational> = (0..d - 1)
        .map(|_| q(rng.gen_range(-30..=30), rng.gen_range(1..=20)))
        .collect();
    let s = u.iter().fold(BigRational::zero(), |acc, x| acc + x * x);
    let den = &s + BigRational::one();
    let two = q(2, 1);
    let mut out: Vec<BigRational> = u.iter().map(|x| &two * x / &den).collect();
    out.push((s - BigRational::one()) / den);
    out
}

#[test]
fn criterion_4_ball_decomposition() {
    report(
        4,
        "unit-ball decomposition",
        Duration::from_secs(60),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let scenarios =
                [(2, 2), (2, 3), (3, 2)].map(|(n, m)| Scenario::new(n, m, false).unwrap());
            for i in 0..1000 {
                let sc = scenarios[i % 3];
                let data = rational_unit_vector(sc.len(), &mut rng);
                let r = RationalTensor::from_entries(sc, data).unwrap();
                if !r.norm2_sq().is_one() {
                    return Err("generator produced a non-unit tensor".into());
                }
                let dec = ball_decomposition(&r).map_err(|e| format!("sample {i}: {e}"))?;
                ensure(
                    dec.reconstruct() == r,
                    format!("sample {i} does not reconstruct"),
                )?;
                ensure(
                    dec.weights.iter().all(|w| !w.is_negative()),
                    format!("sample {i}: negative weight"),
                )?;
                ensure(
                    dec.weight_sum() <= BigRational::one(),
                    format!("sample {i}: weight sum above one"),
                )?;
            }
            // tightness on normalized strategy tensors, as stated: with
            // r = d_s / c for an integer c >= ‖d_s‖, the weight sum of
            // d_s / ‖d_s‖ is sum · c / ‖d_s‖, which equals 1 iff (sum · c)² = ‖d_s‖².
            let mut sums = Vec::new();
            for sc in scenarios {
                let s =
                    DeterministicStrategy::from_code(&sc, 0b1011 & ((1 << sc.strategy_bits()) - 1));
                let d = strategy_tensor(&s, &sc).unwrap();
                let norm_sq = d.norm2_sq().round() as i64;
                let c = (norm_sq as f64).sqrt().ceil() as i64;
                let r = RationalTensor::from_entries(
                    sc,
                    d.entries().iter().map(|&v| q(v as i64, c)).collect(),
                )
                .unwrap();
                let dec = ball_decomposition(&r).map_err(|e| e.to_string())?;
                let scaled = dec.weight_sum() * q(c, 1);
                let normalized_sq = &scaled * &scaled / q(norm_sq, 1);
                sums.push((sc, normalized_sq));
            }
            let off: Vec<String> = sums
                .iter()
                .filter(|(_, v)| !v.is_one())
                .map(|(sc, v)| format!("N={} m={}: sum^2 = {}", sc.parties, sc.inputs, v))
                .collect();
            ensure(
                off.is_empty(),
                format!(
                    "1000 unit tensors ok, but normalized strategy tensors miss sum = 1: {}",
                    off.join("; ")
                ),
            )?;
            Ok("1000 unit tensors decomposed exactly; strategy tensors tight".into())
        },
    );
}

#[test]
fn criterion_5_qubo_oracle_equivalence() {
    report(
        5,
        "QUBO oracle equivalence",
        Duration::from_secs(30),
        || {
            let sc = Scenario::bipartite(6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut samples = 0;
            for i in 0..100 {
                let ints: Vec<i64> = (0..36).map(|_| rng.gen_range(-50..=50)).collect();
                let inst = to_qubo(&sc, &ints).map_err(|e| e.to_string())?;
                let sol = qubo_branch_and_bound(&inst, u64::MAX).map_err(|e| e.to_string())?;
                let (_, exact) = exhaustive_max_i64(&sc, &ints).map_err(|e| e.to_string())?;
                ensure(
                    sol.optimal && inst.c + 2 * sol.value == exact,
                    format!("functional {i}: B&B disagrees"),
                )?;
                let f = BellFunctional::from_integers(sc, ints).unwrap();
                for _ in 0..10 {
                    let s = DeterministicStrategy::random(&sc, &mut rng);
                    let w: Vec<bool> = s
                        .parties()
                        .iter()
                        .flat_map(|p| (0..6).map(move |x| p.get(x) > 0))
                        .collect();
                    ensure(
                        inst.c + 2 * inst.evaluate(&w) == f.integer_value_at(&s).unwrap(),
                        format!("functional {i}: QUBO identity fails"),
                    )?;
                    samples += 1;
                }
            }
            Ok(format!("100 functionals, {samples} identity samples"))
        },
    );
}

#[test]
fn criterion_6_mermin_ghz_threshold() {
    report(6, "GHZ3 polygon threshold", Duration::from_secs(5), || {
        let dir = tmp();
        let path = dir.path().join("ghz.txt");
        let (code, out) = bellfw(&[
            "solve",
            "upper",
            "--state",
            "ghz",
            "--N",
            "3",
            "--polygon",
            "--m",
            "2",
            "--v0",
            "0.55",
            "--cert",
            path_str(&path),
        ]);
        ensure(code == 0, format!("exit {code}: {out}"))?;
        let Certificate::Upper(u) = load(&path) else {
            return Err("expected an upper certificate".into());
        };
        let sc = u.scenario;
        ensure(
            sc.strategy_bits() == 6,
            "expected 64 deterministic strategies",
        )?;
        let (_, ell) = exhaustive_max_i64(&sc, &u.functional).map_err(|e| e.to_string())?;
        ensure(
            ell == 2 && u.ell == 2,
            format!("local bound {ell} (certificate {})", u.ell),
        )?;
        ensure(u.q == q(4, 1), format!("quantum value {}", u.q))?;
        ensure(u.v_up == q(1, 2), format!("v_up = {}", u.v_up))?;
        Ok("ell = 2, q = 4, v_up = 1/2".into())
    });
}

#[test]
fn criterion_7_bpcg_membership_icosahedron() {
    report(
        7,
        "BPCG membership, singlet icosahedron",
        Duration::from_secs(120),
        || {
            let dir = tmp();
            let cert = dir.path().join("ico.txt");
            let result = dir.path().join("ico.json");
            let (code, out) = bellfw(&[
                "solve",
                "lower",
                "--state",
                "werner",
                "--m",
                "6",
                "--v0",
                "0.60",
                "--max-iter",
                "100000",
                "--cert",
                path_str(&cert),
                "--out",
                path_str(&result),
            ]);
            ensure(code == 0, format!("exit {code}: {out}"))?;
            let json: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
            ensure(
                json["status"] == "converged_inside",
                format!("status {}", json["status"]),
            )?;
            let dist = json["distance"].as_f64().unwrap();
            ensure(dist <= 1e-6, format!("distance {dist}"))?;
            let iters = json["iterations"].as_u64().unwrap();
            ensure(iters <= 100_000, format!("{iters} iterations"))?;
            let c = load(&cert);
            let rep = verify(&c);
            ensure(rep.ok, format!("certificate rejected: {:?}", rep.failure))?;
            let Certificate::Lower(l) = c else {
                return Err("expected a lower certificate".into());
            };
            let nu = to_f64(&l.nu);
            let v_low = to_f64(&l.v_low);
            ensure(nu >= 0.999, format!("nu = {nu}"))?;
            ensure(v_low >= 0.378, format!("v_low = {v_low}"))?;
            Ok(format!(
                "{iters} iterations, distance {dist:.2e}, nu {nu:.9}, v_low {v_low:.6}"
            ))
        },
    );
}

fn chsh_tensor() -> bellfw::tensor::CorrelationTensor {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    bellfw::tensor::CorrelationTensor::from_entries(
        Scenario::bipartite(2).unwrap(),
        vec![-s, -s, -s, s],
    )
    .unwrap()
}

#[test]
fn criterion_8_solver_soundness() {
    report(
        8,
        "solver soundness and 406-input smoke test",
        Duration::from_secs(120),
        || {
            let p = chsh_tensor();
            let mut wins = 0;
            for i in 0..20u64 {
                let v0 = 0.40 + 0.025 * i as f64;
                let cfg = SolverConfig {
                    max_iter: 5000,
                    eps: 1e-6,
                    seed: i,
                    trace: true,
                    oracle: Oracle::Heuristic { restarts: 50 },
                    ..SolverConfig::default()
                };
                let b = bpcg_with(&p, v0, &cfg, &mut |_| {}).map_err(|e| e.to_string())?;
                for w in b.trace.windows(2) {
                    ensure(
                        w[1].objective <= w[0].objective + 1e-12,
                        format!("run {i}: objective increased"),
                    )?;
                    let halved = w[1].phi == w[0].phi / 2.0;
                    ensure(
                        if w[1].step == StepKind::Null {
                            halved
                        } else {
                            w[1].phi == w[0].phi
                        },
                        format!("run {i}: phi changed off a null step"),
                    )?;
                }
                ensure(
                    b.trace.iter().all(|e| (e.weight_sum - 1.0).abs() < 1e-9),
                    format!("run {i}: weights not conserved"),
                )?;
                let f = frank_wolfe_vanilla(&p, v0, &cfg).map_err(|e| e.to_string())?;
                if b.lmo_calls <= f.lmo_calls {
                    wins += 1;
                }
            }
            ensure(
                wins >= 18,
                format!("BPCG used no more LMO calls in only {wins}/20 runs"),
            )?;

            // structural smoke test on a 406-input polyhedron file
            let dir = tmp();
            let file = dir.path().join("su3su3i.txt");
            let (code, out) = bellfw(&[
                "polyhedron",
                "gen",
                "--name",
                "su3su3i",
                "--out",
                path_str(&file),
            ]);
            ensure(code == 0, out)?;
            let start = Instant::now();
            let setup = build_setup(&SetupArgs {
                state: StateArg::Werner,
                parties: None,
                m: None,
                polyhedron: Some(file.to_string_lossy().into_owned()),
                polygon: false,
                tensor: None,
                tol: 1e-9,
            })
            .map_err(|e| e.to_string())?;
            ensure(
                setup.scenario.inputs == 406,
                format!("{} inputs", setup.scenario.inputs),
            )?;
            let x = strategy_tensor(
                &DeterministicStrategy::all_plus(&setup.scenario),
                &setup.scenario,
            )
            .unwrap();
            let gradient = x.sub(&setup.tensor.scale(0.6875)).unwrap();
            let (s, v) = heuristic_lmo(&gradient, 64, 8);
            ensure(
                (gradient.strategy_inner(&s) - v).abs() < 1e-6,
                "inconsistent LMO value",
            )?;
            let smoke = start.elapsed();
            ensure(
                smoke < Duration::from_secs(60),
                format!("smoke test took {smoke:?}"),
            )?;
            Ok(format!(
                "BPCG <= FW LMO calls in {wins}/20 runs, 406-input smoke {smoke:.2?}"
            ))
        },
    );
}

/// Certificates for the mutation test: a lower one (singlet, icosahedron)
/// and an upper one (CHSH).
fn base_certificates() -> (Certificate, Certificate) {
    let low_args = SetupArgs {
        state: StateArg::Werner,
        parties: None,
        m: Some(6),
        polyhedron: None,
        polygon: false,
        tensor: None,
        tol: 1e-9,
    };
    let setup = build_setup(&low_args).unwrap();
    let v0 = q(3, 5);
    let res = bpcg(&setup.tensor, 0.6, &SolverConfig::default()).unwrap();
    assert_eq!(res.status, Status::ConvergedInside);
    let w = bellfw::certify::rationalize_weights(&res.active, &setup.exact, &v0).unwrap();
    let low = bellfw::certify::assemble_lower(
        setup.scenario,
        setup.source,
        setup.polyhedron.as_ref(),
        v0,
        w,
        0.5,
    )
    .unwrap();

    let up_args = SetupArgs {
        m: Some(2),
        ..low_args
    };
    let setup = build_setup(&up_args).unwrap();
    let res = bpcg(&setup.tensor, 0.75, &SolverConfig::default()).unwrap();
    let g = bellfw::fw::extract_hyperplane(&res, &setup.tensor, 0.75).unwrap();
    let ints = bellfw::certify::integerize(g.tensor(), 1e4).unwrap();
    let m = BellFunctional::from_integers(setup.scenario, ints.clone()).unwrap();
    let (_, ell) = exhaustive_max_i64(&setup.scenario, &ints).unwrap();
    let up = bellfw::certify::assemble_upper(&m, ell, setup.source).unwrap();
    (Certificate::Lower(low), Certificate::Upper(up))
}

fn mutations(
    low: &Certificate,
    up: &Certificate,
    rng: &mut ChaCha8Rng,
) -> Vec<(String, Certificate)> {
    let mut out = Vec::new();
    let Certificate::Lower(l) = low else {
        unreachable!()
    };
    let Certificate::Upper(u) = up else {
        unreachable!()
    };
    let n_atoms = l.decomposition.atoms.len();
    for k in 0..10 {
        let mut c = l.clone();
        let i = rng.gen_range(0..n_atoms);
        let party = rng.gen_range(0..c.scenario.parties);
        let x = rng.gen_range(0..c.scenario.inputs);
        let sv = c.decomposition.atoms[i].party_mut(party);
        let s = sv.get(x);
        sv.set(x, -s);
        out.push((format!("atom sign flip {k}"), Certificate::Lower(c)));
    }
    for k in 0..10 {
        let mut c = l.clone();
        let i = rng.gen_range(0..n_atoms);
        let delta =
            q(rng.gen_range(1..=1000), 1 << 40) * if k % 2 == 0 { q(1, 1) } else { q(-1, 1) };
        c.decomposition.weights[i] += delta;
        out.push((format!("weight perturbation {k}"), Certificate::Lower(c)));
    }
    for k in 0..8 {
        let mut c = l.clone();
        c.residual_sq = &c.residual_sq * q(rng.gen_range(1..=99), 100);
        out.push((format!("understated residual {k}"), Certificate::Lower(c)));
    }
    let mut c = l.clone();
    c.nu = &c.nu + q(1, 1 << 20);
    out.push(("overstated nu".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    c.v_low = &c.v_low + q(1, 1 << 30);
    out.push(("overstated v_low".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    let poly = c.polyhedron.as_mut().unwrap();
    poly.eta_sq = &poly.eta_sq + q(1, 1 << 30);
    out.push(("overstated eta_sq".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    c.eta_pow = &c.eta_pow + q(1, 1 << 30);
    out.push(("overstated eta power".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    c.v0 = &c.v0 + q(1, 100);
    out.push(("shifted v0".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    c.polyhedron.as_mut().unwrap().vertices.pop();
    out.push(("dropped vertex".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    c.decomposition.weights[0] = -c.decomposition.weights[0].clone();
    out.push(("negative weight".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    for w in &mut c.decomposition.weights {
        *w = &*w * q(2, 1);
    }
    out.push(("doubled weights".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    c.decomposition.atoms.remove(0);
    c.decomposition.weights.remove(0);
    out.push(("dropped atom".into(), Certificate::Lower(c)));
    let mut c = l.clone();
    let ws = &c.decomposition.weights;
    let j = (1..n_atoms)
        .find(|&j| ws[j] != ws[0])
        .expect("distinct weights");
    c.decomposition.weights.swap(0, j);
    out.push(("swapped weights".into(), Certificate::Lower(c)));
    let mut c = u.clone();
    c.functional.iter_mut().for_each(|v| *v *= 2);
    out.push(("doubled functional".into(), Certificate::Upper(c)));
    let mut c = u.clone();
    if let bellfw::certify::TargetSource::Quantum { directions, .. } = &mut c.source {
        directions[1].swap(0, 1);
    }
    out.push(("swapped directions".into(), Certificate::Upper(c)));
    for k in 0..6 {
        let mut c = u.clone();
        let i = rng.gen_range(0..c.functional.len());
        c.functional[i] = -c.functional[i] + if k % 2 == 0 { 1 } else { -1 };
        out.push((format!("functional sign flip {k}"), Certificate::Upper(c)));
    }
    let mut c = u.clone();
    c.ell -= 1;
    out.push(("understated local bound".into(), Certificate::Upper(c)));
    let mut c = u.clone();
    c.q = &c.q + q(1, 1000);
    out.push(("overstated quantum value".into(), Certificate::Upper(c)));
    let mut c = u.clone();
    c.v_up = &c.v_up - q(1, 1 << 30);
    out.push(("understated v_up".into(), Certificate::Upper(c)));
    let mut c = u.clone();
    let bump = q(1, 1000);
    if let bellfw::certify::TargetSource::Quantum { directions, .. } = &mut c.source {
        directions[1][0].x = &directions[1][0].x + bump;
    }
    out.push(("non-unit direction".into(), Certificate::Upper(c)));
    out
}

#[test]
fn criterion_9_certificate_mutation_hardening() {
    report(
        9,
        "certificate mutation hardening",
        Duration::from_secs(30),
        || {
            let (low, up) = base_certificates();
            ensure(
                verify(&low).ok && verify(&up).ok,
                "unmutated certificates must verify",
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let muts = mutations(&low, &up, &mut rng);
            ensure(muts.len() == 50, format!("{} mutations", muts.len()))?;
            let dir = tmp();
            let mut accepted = Vec::new();
            for (i, (name, cert)) in muts.iter().enumerate() {
                let path: PathBuf = dir.path().join(format!("m{i}.txt"));
                std::fs::write(&path, write_certificate(cert)).unwrap();
                let (code, _) = bellfw(&["certify", "verify", "--in", path_str(&path)]);
                if code == 0 {
                    accepted.push(name.clone());
                }
            }
            ensure(
                accepted.is_empty(),
                format!("accepted mutations: {accepted:?}"),
            )?;
            Ok("50/50 mutations rejected".into())
        },
    );
}
