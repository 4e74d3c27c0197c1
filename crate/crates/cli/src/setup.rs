use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;

use bellfw::certify::TargetSource;
use bellfw::polyhedra::{
    faces_and_eta, named_polyhedron, rational_polyhedron, rationalize, read_vertices,
    RationalPoint, RationalPolyhedron,
};
use bellfw::tensor::{
    exact_polygon_bloch_vectors, polygon_bloch_vectors, read_rational_tensor, CorrelationTensor,
    RationalTensor, Scenario, StateKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    /// Singlet correlations; the Werner visibility is `v0`.
    Werner,
    Singlet,
    Ghz,
    /// Three-qubit W state.
    W,
    /// Explicit tensor from `--tensor`.
    Custom,
}

#[derive(Args, Debug, Clone)]
pub struct SetupArgs {
    #[arg(long, value_enum, default_value_t = StateArg::Werner)]
    pub state: StateArg,
    /// Number of parties (GHZ only; singlet is bipartite and W tripartite).
    #[arg(long = "N", alias = "parties")]
    pub parties: Option<usize>,
    /// Inputs per party: 2 (CHSH directions, singlet only), 6, 16, 46 or 406
    /// (icosahedron family), or any m with `--polygon`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Named polyhedron or vertex file shared by all parties.
    #[arg(long, conflicts_with_all = ["polygon", "m"])]
    pub polyhedron: Option<String>,
    /// `m` planar directions at angles `kπ/m` (GHZ only).
    #[arg(long, requires = "m")]
    pub polygon: bool,
    /// Tensor file (implies `--state custom`).
    #[arg(long)]
    pub tensor: Option<std::path::PathBuf>,
    /// Rationalization tolerance for measurement directions.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

/// A fully resolved target.
#[derive(Clone, Debug)]
pub struct Setup {
    pub scenario: Scenario,
    pub tensor: CorrelationTensor,
    pub exact: RationalTensor,
    pub source: TargetSource,
    pub polyhedron: Option<RationalPolyhedron>,
    pub label: String,
}

/// Alice measures Z and X, Bob `(Z ± X)/√2` rationalized within `tol`.
pub fn chsh_directions(tol: f64) -> Result<Vec<Vec<RationalPoint>>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let alice = vec![
        RationalPoint::from_ints(0, 0, 1),
        RationalPoint::from_ints(1, 0, 0),
    ];
    let bob = vec![
        rationalize(&[s, 0.0, s], tol)?,
        rationalize(&[-s, 0.0, s], tol)?,
    ];
    Ok(vec![alice, bob])
}

fn load_polyhedron(spec: &str, tol: f64) -> Result<(RationalPolyhedron, String)> {
    if let Some(points) = named_polyhedron(spec) {
        return Ok((rational_polyhedron(&points, tol)?, spec.to_string()));
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path)
        .with_context(|| format!("{spec:?} is neither a named polyhedron nor a readable file"))?;
    let name = path
        .file_name()
        .map_or(spec.to_string(), |n| n.to_string_lossy().into_owned());
    Ok((faces_and_eta(&read_vertices(&text)?)?, name))
}

fn preset_polyhedron(m: usize) -> Option<&'static str> {
    match m {
        6 => Some("icosahedron"),
        16 => Some("pentakis"),
        46 => Some("su3i"),
        406 => Some("su3su3i"),
        _ => None,
    }
}

fn polygon_directions(m: usize, tol: f64) -> Result<Vec<RationalPoint>> {
    if let Some(exact) = exact_polygon_bloch_vectors(m) {
        return Ok(exact
            .into_iter()
            .map(|[x, y, z]| RationalPoint::new(x, y, z))
            .collect());
    }
    polygon_bloch_vectors(m)
        .iter()
        .map(|p| {
            let r = rationalize(p, tol)?;
            if !r.z.is_zero() {
                bail!("rationalized polygon direction left the XY plane");
            }
            Ok(r)
        })
        .collect()
}

/// Drops the marginal slots when they vanish exactly.
fn finish(
    source: TargetSource,
    parties: usize,
    inputs: usize,
    polyhedron: Option<RationalPolyhedron>,
    label: String,
) -> Result<Setup> {
    let with = Scenario::new(parties, inputs, true)?;
    let exact = source.tensor(&with)?;
    let (scenario, exact) = if exact.marginals_vanish() {
        let t = exact.full_body()?;
        (*t.scenario(), t)
    } else {
        (with, exact)
    };
    Ok(Setup {
        scenario,
        tensor: exact.to_f64(),
        exact,
        source,
        polyhedron,
        label,
    })
}

fn custom(path: &Path) -> Result<Setup> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let t = read_rational_tensor(&text)?;
    let t = if t.scenario().marginals && t.marginals_vanish() && t.scenario().parties >= 2 {
        t.full_body()?
    } else {
        t
    };
    let one = BigRational::from_integer(1.into());
    if t.scenario().marginals && t.entries()[0] != one {
        bail!("tensor root entry must be 1");
    }
    Ok(Setup {
        scenario: *t.scenario(),
        tensor: t.to_f64(),
        exact: t.clone(),
        source: TargetSource::Tensor(t),
        polyhedron: None,
        label: format!("tensor {}", path.display()),
    })
}

pub fn build_setup(args: &SetupArgs) -> Result<Setup> {
    let state = if args.tensor.is_some() {
        StateArg::Custom
    } else {
        args.state
    };
    if args.polygon && state != StateArg::Ghz {
        bail!("--polygon is only valid with --state ghz");
    }
    let kind = match state {
        StateArg::Custom => {
            let path = args
                .tensor
                .as_ref()
                .context("--state custom needs --tensor")?;
            return custom(path);
        }
        StateArg::Werner | StateArg::Singlet => StateKind::Singlet,
        StateArg::W => StateKind::W3,
        StateArg::Ghz => StateKind::Ghz(args.parties.unwrap_or(3)),
    };
    let parties = kind.qubits();
    if let Some(n) = args.parties {
        if n != parties {
            bail!("{kind:?} is a {parties}-party state, got --N {n}");
        }
    }
    let name = format!("{state:?}").to_lowercase();
    let (dirs, poly, label) = if let Some(spec) = &args.polyhedron {
        let (poly, pname) = load_polyhedron(spec, args.tol)?;
        (
            poly.measurement_directions(),
            Some(poly),
            format!("{name} {pname}"),
        )
    } else {
        let m = args.m.context("give --m, --polyhedron or --tensor")?;
        if args.polygon {
            (
                polygon_directions(m, args.tol)?,
                None,
                format!("{name} polygon"),
            )
        } else if m == 2 && kind == StateKind::Singlet {
            let d = chsh_directions(args.tol)?;
            return finish(
                TargetSource::Quantum {
                    state: kind,
                    directions: d,
                },
                parties,
                2,
                None,
                format!("{name} chsh"),
            );
        } else if let Some(pname) = preset_polyhedron(m) {
            let (poly, _) = load_polyhedron(pname, args.tol)?;
            (
                poly.measurement_directions(),
                Some(poly),
                format!("{name} {pname}"),
            )
        } else {
            bail!("no built-in measurement set with m = {m}; use --polyhedron or --polygon");
        }
    };
    let inputs = dirs.len();
    finish(
        TargetSource::Quantum {
            state: kind,
            directions: vec![dirs; parties],
        },
        parties,
        inputs,
        poly,
        label,
    )
}
