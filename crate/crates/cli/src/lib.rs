//! Pipeline behind the `bellfw` binary: polyhedron generation, target
//! construction for built-in states, solving, certificate assembly,
//! verification and reporting.

mod report;
mod setup;

pub use report::{report, ReportRow};
pub use setup::{build_setup, chsh_directions, Setup, SetupArgs, StateArg};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::json;

use bellfw::certify::{
    assemble_lower, assemble_upper, derived_bounds, integerize, parse_certificate,
    rationalize_weights, verify, write_certificate, Certificate, DEFAULT_INTEGER_SCALE,
    DEFAULT_MIN_NU,
};
use bellfw::fw::{
    bpcg, extract_hyperplane, frank_wolfe_vanilla, Oracle, SolverConfig, SolverResult, Status,
};
use bellfw::lmo::{local_bound, BellFunctional, DEFAULT_BB_BUDGET, DEFAULT_RESTARTS};
use bellfw::polyhedra::{
    faces_and_eta, geodesic_icosahedron, named_polyhedron, rational_polyhedron, read_vertices,
    write_vertices,
};
use bellfw::rational::{format_rational, parse_rational, to_f64};
use bellfw::tensor::read_tensor;

/// Exit status of a pipeline run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Certificate written and verified, or a decide verdict reached.
    Certified,
    /// The run finished without a certificate (e.g. no convergence).
    Inconclusive,
    /// A verification failure.
    Failed,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Certified => 0,
            Outcome::Inconclusive => 2,
            Outcome::Failed => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "bellfw",
    version,
    about = "Certified bounds on nonlocality thresholds"
)]
pub struct Cli {
    /// Worker threads for the heuristic oracle (defaults to all cores).
    #[arg(long, global = true, env = "BELLFW_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate measurement polyhedra or compute their shrinking factor.
    #[command(subcommand)]
    Polyhedron(PolyhedronCmd),
    /// Run the solver and assemble a certificate.
    Solve(SolveArgs),
    /// Exact local bound of an integer Bell functional.
    Bound(BoundArgs),
    /// Check certificates.
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Tabulate verified certificates.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
pub enum PolyhedronCmd {
    /// Rational vertices of a geodesic icosahedron or a named polyhedron.
    Gen {
        /// Comma-separated subdivision frequencies; empty for the icosahedron.
        #[arg(long, default_value = "", conflicts_with = "name")]
        schedule: String,
        /// octahedron, icosahedron, pentakis, su3i or su3su3i.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact squared shrinking factor of a vertex file.
    Eta {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum CertifyCmd {
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Lower,
    Upper,
    Decide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Bpcg,
    Fw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Heuristic,
    Exhaustive,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub mode: Mode,
    #[command(flatten)]
    pub setup: SetupArgs,
    /// Visibility, as a decimal or `num/den`.
    #[arg(long)]
    pub v0: String,
    #[arg(long, value_enum, default_value_t = Algo::Bpcg)]
    pub algo: Algo,
    /// Lazy tolerance K >= 1.
    #[arg(long = "K", default_value_t = 2.0)]
    pub lazy_k: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = OracleArg::Heuristic)]
    pub oracle: OracleArg,
    /// Integerization scale for upper bounds.
    #[arg(long, default_value_t = DEFAULT_INTEGER_SCALE)]
    pub scale: f64,
    /// Smallest accepted analyticity factor for lower bounds.
    #[arg(long, default_value_t = DEFAULT_MIN_NU)]
    pub min_nu: f64,
    /// Node budget of the exact bipartite local-bound search.
    #[arg(long, default_value_t = DEFAULT_BB_BUDGET)]
    pub budget: u64,
    /// Solver result and run metadata as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Certificate path (a `.meta.json` sidecar is written next to it).
    #[arg(long)]
    pub cert: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Functional in tensor format (header `N m marginals`, then entries).
    #[arg(long)]
    pub functional: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BB_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = 1000)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fail unless the bound is proven optimal.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        // a second initialization (tests, embedding) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Polyhedron(cmd) => polyhedron(cmd),
        Command::Solve(args) => solve(&args),
        Command::Bound(args) => bound(&args),
        Command::Certify(CertifyCmd::Verify { input }) => verify_file(&input),
        Command::Report(args) => {
            let (text, csv, ok) = report(&args.files)?;
            print!("{text}");
            if let Some(path) = args.csv {
                fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if ok {
                Outcome::Certified
            } else {
                Outcome::Failed
            })
        }
    }
}

fn parse_schedule(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .with_context(|| format!("bad subdivision frequency {t:?}"))
        })
        .collect()
}

fn polyhedron(cmd: PolyhedronCmd) -> Result<Outcome> {
    match cmd {
        PolyhedronCmd::Gen {
            schedule,
            name,
            tol,
            out,
        } => {
            let points = match name {
                Some(n) => {
                    named_polyhedron(&n).with_context(|| format!("unknown polyhedron {n:?}"))?
                }
                None => geodesic_icosahedron(&parse_schedule(&schedule)?),
            };
            let poly = rational_polyhedron(&points, tol)?;
            let text = write_vertices(poly.vertices());
            match out {
                Some(path) => {
                    fs::write(&path, text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!(
                        "vertices {} inputs {} eta {:.10}",
                        poly.vertices().len(),
                        poly.inputs(),
                        poly.eta()
                    );
                }
                None => print!("{text}"),
            }
            Ok(Outcome::Certified)
        }
        PolyhedronCmd::Eta { input } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let poly = faces_and_eta(&read_vertices(&text)?)?;
            println!("vertices {}", poly.vertices().len());
            println!("faces {}", poly.faces().len());
            println!("eta_sq {}", format_rational(poly.eta_sq()));
            println!("eta {:.12}", poly.eta());
            Ok(Outcome::Certified)
        }
    }
}

fn solver_config(args: &SolveArgs) -> SolverConfig {
    SolverConfig {
        lazy_k: args.lazy_k,
        max_iter: args.max_iter,
        eps: args.eps,
        oracle: match args.oracle {
            OracleArg::Heuristic => Oracle::Heuristic {
                restarts: args.restarts,
            },
            OracleArg::Exhaustive => Oracle::Exhaustive,
        },
        seed: args.seed,
        ..SolverConfig::default()
    }
}

fn result_json(res: &SolverResult, args: &SolveArgs) -> serde_json::Value {
    let atoms: Vec<_> = res
        .active
        .atoms()
        .iter()
        .zip(res.active.weights())
        .map(|(a, w)| json!({ "strategy": a.sign_string(), "weight": w }))
        .collect();
    json!({
        "status": res.status.as_str(),
        "distance": res.distance,
        "phi": res.phi,
        "fw_gap": res.fw_gap,
        "iterations": res.iterations,
        "lmo_calls": res.lmo_calls,
        "seed": args.seed,
        "v0": args.v0,
        "active_set": atoms,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn meta_path(cert: &Path) -> PathBuf {
    let mut s = cert.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn solve(args: &SolveArgs) -> Result<Outcome> {
    let start = Instant::now();
    let v0 = parse_rational(&args.v0).with_context(|| format!("bad visibility {:?}", args.v0))?;
    let v0_f = to_f64(&v0);
    let setup = build_setup(&args.setup)?;
    if args.mode == Mode::Lower && setup.scenario.marginals {
        bail!("lower bounds need vanishing marginals; this target has nonzero marginals");
    }
    let t_setup = start.elapsed().as_secs_f64();
    let cfg = solver_config(args);
    let solve_start = Instant::now();
    let res = match args.algo {
        Algo::Bpcg => bpcg(&setup.tensor, v0_f, &cfg)?,
        Algo::Fw => frank_wolfe_vanilla(&setup.tensor, v0_f, &cfg)?,
    };
    let t_solve = solve_start.elapsed().as_secs_f64();
    println!("target {} ({})", setup.label, setup.scenario);
    println!(
        "status {} distance {:.3e} iterations {} lmo_calls {}",
        res.status, res.distance, res.iterations, res.lmo_calls
    );
    if let Some(path) = &args.out {
        write_json(path, &result_json(&res, args))?;
    }
    let cert_start = Instant::now();
    let outcome = match args.mode {
        Mode::Decide => match res.status {
            Status::IterationCap => Outcome::Inconclusive,
            _ => Outcome::Certified,
        },
        Mode::Lower => {
            if res.status != Status::ConvergedInside {
                println!("inconclusive: the solver did not converge inside the local polytope");
                return Ok(Outcome::Inconclusive);
            }
            let weights = rationalize_weights(&res.active, &setup.exact, &v0)?;
            let cert = assemble_lower(
                setup.scenario,
                setup.source.clone(),
                setup.polyhedron.as_ref(),
                v0.clone(),
                weights,
                args.min_nu,
            )?;
            println!("nu {:.12}", to_f64(&cert.nu));
            println!(
                "v_low {:.12} = {}",
                to_f64(&cert.v_low),
                format_rational(&cert.v_low)
            );
            emit(Certificate::Lower(cert), args)?
        }
        Mode::Upper => {
            if res.status == Status::ConvergedInside {
                println!("inconclusive: the target is inside the local polytope");
                return Ok(Outcome::Inconclusive);
            }
            let g = extract_hyperplane(&res, &setup.tensor, v0_f)?;
            let m =
                BellFunctional::from_integers(setup.scenario, integerize(g.tensor(), args.scale)?)?;
            let lb = local_bound(&m, args.budget, args.restarts, args.seed)?;
            let Some(ell) = lb.exact.filter(|_| lb.optimal) else {
                println!(
                    "inconclusive: the local bound could not be proven (method {:?})",
                    lb.method
                );
                return Ok(Outcome::Inconclusive);
            };
            let cert = match assemble_upper(&m, ell, setup.source.clone()) {
                Ok(c) => c,
                Err(bellfw::Error::NoViolation(msg)) => {
                    println!("inconclusive: {msg}");
                    return Ok(Outcome::Inconclusive);
                }
                Err(e) => return Err(e.into()),
            };
            println!("ell {ell} q {:.12}", to_f64(&cert.q));
            println!(
                "v_up {:.12} = {}",
                to_f64(&cert.v_up),
                format_rational(&cert.v_up)
            );
            emit(Certificate::Upper(cert), args)?
        }
    };
    if let Some(path) = &args.cert {
        if outcome == Outcome::Certified && args.mode != Mode::Decide {
            let meta = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "seed": args.seed,
                "mode": format!("{:?}", args.mode).to_lowercase(),
                "algo": format!("{:?}", args.algo).to_lowercase(),
                "v0": args.v0,
                "status": res.status.as_str(),
                "iterations": res.iterations,
                "lmo_calls": res.lmo_calls,
                "timings": {
                    "setup_s": t_setup,
                    "solve_s": t_solve,
                    "certify_s": cert_start.elapsed().as_secs_f64(),
                    "total_s": start.elapsed().as_secs_f64(),
                },
            });
            write_json(&meta_path(path), &meta)?;
        }
    }
    Ok(outcome)
}

/// Verifies and writes a certificate.
fn emit(cert: Certificate, args: &SolveArgs) -> Result<Outcome> {
    let report = verify(&cert);
    if !report.ok {
        println!(
            "verification failed: {}",
            report.failure.unwrap_or_default()
        );
        return Ok(Outcome::Failed);
    }
    print_derived(&cert);
    if let Some(path) = &args.cert {
        fs::write(path, write_certificate(&cert))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("certificate {}", path.display());
    }
    Ok(Outcome::Certified)
}

fn print_derived(cert: &Certificate) {
    let d = match cert {
        Certificate::Lower(c) => derived_bounds(Some(c), None),
        Certificate::Upper(c) => derived_bounds(None, Some(c)),
    };
    if let Some(v) = d.povm_lower {
        println!("povm_lower {v:.6}");
    }
    if let Some(v) = d.planar_lower {
        println!("planar_lower {v:.6}");
    }
    if let Some(v) = d.grothendieck_lower {
        println!("grothendieck_kg3_lower {v:.6}");
    }
    if let Some(v) = d.grothendieck_upper {
        println!("grothendieck_kg3_upper {v:.6}");
    }
}

fn bound(args: &BoundArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.functional)
        .with_context(|| format!("reading {}", args.functional.display()))?;
    let m = BellFunctional::new(read_tensor(&text)?);
    let lb = local_bound(&m, args.budget, args.restarts, args.seed)?;
    println!(
        "local_bound {}",
        lb.exact.map_or(lb.value.to_string(), |v| v.to_string())
    );
    println!("method {:?}", lb.method);
    println!("optimal {}", lb.optimal);
    println!("strategy {}", lb.strategy.sign_string());
    if args.exact && !lb.optimal {
        bail!("the local bound could not be proven within the node budget");
    }
    Ok(if lb.optimal {
        Outcome::Certified
    } else {
        Outcome::Inconclusive
    })
}

pub fn verify_file(path: &Path) -> Result<Outcome> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cert = parse_certificate(&text)?;
    let report = verify(&cert);
    for check in &report.passed {
        println!("ok {check}");
    }
    if let Some(f) = &report.failure {
        println!("FAILED {f}");
        return Ok(Outcome::Failed);
    }
    match &cert {
        Certificate::Lower(c) => println!(
            "v_low {} = {:.12}",
            format_rational(&c.v_low),
            to_f64(&c.v_low)
        ),
        Certificate::Upper(c) => {
            println!(
                "v_up {} = {:.12}",
                format_rational(&c.v_up),
                to_f64(&c.v_up)
            );
            if !report.exact {
                println!("note: local bound spot-checked only (no exact oracle at this size)");
            }
        }
    }
    print_derived(&cert);
    println!("verified");
    Ok(Outcome::Certified)
}

/// `v0` parsed exactly, for callers that build certificates directly.
pub fn parse_v0(s: &str) -> Result<BigRational> {
    parse_rational(s).with_context(|| format!("bad visibility {s:?}"))
}
