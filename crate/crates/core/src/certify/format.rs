//! Line-based certificate files. The first line is `BELLFW-CERTIFICATE lower`
//! or `... upper`; every later keyword line opens a section whose content
//! lines follow it. Rationals are written as `num/den`, strategies as sign
//! strings such as `+-+|--+`, and `#` starts a comment.

use std::collections::HashMap;
use std::fmt::Write;

use num_rational::BigRational;

use super::{
    Certificate, ExactDecomposition, LowerBoundCertificate, PolyhedronClaim, TargetSource,
    UpperBoundCertificate,
};
use crate::error::{Error, Result};
use crate::polyhedra::RationalPoint;
use crate::rational::{format_rational, parse_rational_at};
use crate::tensor::{parse_strategy, RationalTensor, Scenario, StateKind};

const MAGIC: &str = "BELLFW-CERTIFICATE";
const KEYWORDS: &[&str] = &[
    "SCENARIO",
    "STATE",
    "DIRECTIONS",
    "TENSOR",
    "VERTICES",
    "ETA_SQ",
    "V0",
    "ATOMS",
    "WEIGHTS",
    "RESIDUAL_SQ",
    "NU",
    "ETA_POW",
    "V_LOW",
    "M",
    "ELL",
    "Q",
    "V_UP",
    "END",
];

fn state_name(s: StateKind) -> String {
    match s {
        StateKind::Singlet => "singlet".into(),
        StateKind::Ghz(n) => format!("ghz{n}"),
        StateKind::W3 => "w3".into(),
    }
}

fn parse_state(s: &str, line: usize) -> Result<StateKind> {
    match s {
        "singlet" => Ok(StateKind::Singlet),
        "w3" => Ok(StateKind::W3),
        _ => s
            .strip_prefix("ghz")
            .and_then(|n| n.parse().ok())
            .map(StateKind::Ghz)
            .ok_or_else(|| Error::parse(line, format!("unknown state {s:?}"))),
    }
}

fn point_line(p: &RationalPoint) -> String {
    format!(
        "{} {} {}",
        format_rational(&p.x),
        format_rational(&p.y),
        format_rational(&p.z)
    )
}

fn section(out: &mut String, name: &str, lines: impl IntoIterator<Item = String>) {
    out.push_str(name);
    out.push('\n');
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
}

fn scalar(out: &mut String, name: &str, v: &BigRational) {
    section(out, name, [format_rational(v)]);
}

fn write_source(out: &mut String, sc: &Scenario, src: &TargetSource) {
    let _ = writeln!(
        out,
        "SCENARIO {} {} {}",
        sc.parties,
        sc.inputs,
        u8::from(sc.marginals)
    );
    match src {
        TargetSource::Quantum { state, directions } => {
            let _ = writeln!(out, "STATE {}", state_name(*state));
            for (n, dirs) in directions.iter().enumerate() {
                section(out, &format!("DIRECTIONS {n}"), dirs.iter().map(point_line));
            }
        }
        TargetSource::Tensor(t) => {
            out.push_str("STATE tensor\n");
            section(out, "TENSOR", t.entries().iter().map(format_rational));
        }
    }
}

pub fn write_certificate(cert: &Certificate) -> String {
    let mut out = String::new();
    match cert {
        Certificate::Lower(c) => {
            let _ = writeln!(out, "{MAGIC} lower");
            write_source(&mut out, &c.scenario, &c.source);
            if let Some(p) = &c.polyhedron {
                section(&mut out, "VERTICES", p.vertices.iter().map(point_line));
                scalar(&mut out, "ETA_SQ", &p.eta_sq);
            }
            scalar(&mut out, "V0", &c.v0);
            section(
                &mut out,
                "ATOMS",
                c.decomposition.atoms.iter().map(|a| a.sign_string()),
            );
            section(
                &mut out,
                "WEIGHTS",
                c.decomposition.weights.iter().map(format_rational),
            );
            scalar(&mut out, "RESIDUAL_SQ", &c.residual_sq);
            scalar(&mut out, "NU", &c.nu);
            scalar(&mut out, "ETA_POW", &c.eta_pow);
            scalar(&mut out, "V_LOW", &c.v_low);
        }
        Certificate::Upper(c) => {
            let _ = writeln!(out, "{MAGIC} upper");
            write_source(&mut out, &c.scenario, &c.source);
            section(&mut out, "M", c.functional.iter().map(|v| v.to_string()));
            let _ = writeln!(out, "ELL\n{}", c.ell);
            scalar(&mut out, "Q", &c.q);
            scalar(&mut out, "V_UP", &c.v_up);
        }
    }
    out.push_str("END\n");
    out
}

struct Section {
    args: Vec<String>,
    line: usize,
    body: Vec<(usize, String)>,
}

struct Parsed {
    sections: HashMap<String, Vec<Section>>,
}

impl Parsed {
    fn one(&self, name: &str) -> Result<&Section> {
        match self.sections.get(name).map(|v| v.as_slice()) {
            Some([s]) => Ok(s),
            Some(_) => Err(Error::parse(0, format!("section {name} repeated"))),
            None => Err(Error::parse(0, format!("missing section {name}"))),
        }
    }

    fn opt(&self, name: &str) -> Result<Option<&Section>> {
        if self.sections.contains_key(name) {
            self.one(name).map(Some)
        } else {
            Ok(None)
        }
    }

    fn scalar(&self, name: &str) -> Result<BigRational> {
        let s = self.one(name)?;
        match s.body.as_slice() {
            [(line, v)] => parse_rational_at(v, *line),
            _ => Err(Error::parse(
                s.line,
                format!("{name} needs exactly one value"),
            )),
        }
    }

    fn rationals(&self, name: &str) -> Result<Vec<BigRational>> {
        self.one(name)?
            .body
            .iter()
            .map(|(line, v)| parse_rational_at(v, *line))
            .collect()
    }
}

fn parse_point(line: usize, text: &str) -> Result<RationalPoint> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::parse(line, "expected three coordinates"));
    }
    Ok(RationalPoint::new(
        parse_rational_at(toks[0], line)?,
        parse_rational_at(toks[1], line)?,
        parse_rational_at(toks[2], line)?,
    ))
}

fn split_sections(text: &str) -> Result<(String, Parsed)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty certificate"))?;
    let kind = header
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| Error::parse(hline, "missing certificate header"))?
        .to_string();
    let mut sections: HashMap<String, Vec<Section>> = HashMap::new();
    let mut current: Option<String> = None;
    let mut ended = false;
    for (line, l) in lines {
        if ended {
            return Err(Error::parse(line, "content after END"));
        }
        let mut toks = l.split_whitespace();
        let first = toks.next().expect("nonempty line");
        if KEYWORDS.contains(&first) {
            if first == "END" {
                ended = true;
                continue;
            }
            let args: Vec<String> = toks.map(String::from).collect();
            sections
                .entry(first.to_string())
                .or_default()
                .push(Section {
                    args,
                    line,
                    body: Vec::new(),
                });
            current = Some(first.to_string());
        } else {
            let name = current
                .as_ref()
                .ok_or_else(|| Error::parse(line, "content before the first section"))?;
            let sec = sections
                .get_mut(name)
                .and_then(|v| v.last_mut())
                .expect("section exists");
            sec.body.push((line, l.to_string()));
        }
    }
    if !ended {
        return Err(Error::parse(0, "missing END"));
    }
    Ok((kind, Parsed { sections }))
}

fn read_scenario(p: &Parsed) -> Result<Scenario> {
    let s = p.one("SCENARIO")?;
    let nums: Vec<usize> = s
        .args
        .iter()
        .map(|a| {
            a.parse()
                .map_err(|_| Error::parse(s.line, format!("bad scenario field {a:?}")))
        })
        .collect::<Result<_>>()?;
    match nums.as_slice() {
        [n, m, marg] if *marg <= 1 => Scenario::new(*n, *m, *marg == 1),
        _ => Err(Error::parse(s.line, "SCENARIO needs `N m marginals`")),
    }
}

fn read_source(p: &Parsed, sc: &Scenario) -> Result<TargetSource> {
    let st = p.one("STATE")?;
    let name = st
        .args
        .first()
        .ok_or_else(|| Error::parse(st.line, "STATE needs a name"))?;
    if name == "tensor" {
        let entries = p.rationals("TENSOR")?;
        return Ok(TargetSource::Tensor(RationalTensor::from_entries(
            *sc, entries,
        )?));
    }
    let state = parse_state(name, st.line)?;
    let secs = p
        .sections
        .get("DIRECTIONS")
        .ok_or_else(|| Error::parse(0, "missing section DIRECTIONS"))?;
    let mut directions = vec![None; secs.len()];
    for s in secs {
        let n: usize = s
            .args
            .first()
            .and_then(|a| a.parse().ok())
            .filter(|&n| n < secs.len())
            .ok_or_else(|| Error::parse(s.line, "DIRECTIONS needs a party index"))?;
        let pts = s
            .body
            .iter()
            .map(|(line, t)| parse_point(*line, t))
            .collect::<Result<Vec<_>>>()?;
        if directions[n].replace(pts).is_some() {
            return Err(Error::parse(
                s.line,
                format!("directions of party {n} repeated"),
            ));
        }
    }
    Ok(TargetSource::Quantum {
        state,
        directions: directions
            .into_iter()
            .map(|d| d.expect("every index filled"))
            .collect(),
    })
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let (kind, p) = split_sections(text)?;
    let scenario = read_scenario(&p)?;
    let source = read_source(&p, &scenario)?;
    match kind.as_str() {
        "lower" => {
            let polyhedron = match p.opt("VERTICES")? {
                Some(s) => Some(PolyhedronClaim {
                    vertices: s
                        .body
                        .iter()
                        .map(|(line, t)| parse_point(*line, t))
                        .collect::<Result<_>>()?,
                    eta_sq: p.scalar("ETA_SQ")?,
                }),
                None => None,
            };
            let atoms = p
                .one("ATOMS")?
                .body
                .iter()
                .map(|(line, t)| parse_strategy(t).map_err(|_| Error::parse(*line, "bad strategy")))
                .collect::<Result<Vec<_>>>()?;
            let weights = p.rationals("WEIGHTS")?;
            if weights.len() != atoms.len() {
                return Err(Error::parse(0, "ATOMS and WEIGHTS differ in length"));
            }
            Ok(Certificate::Lower(LowerBoundCertificate {
                scenario,
                source,
                polyhedron,
                v0: p.scalar("V0")?,
                decomposition: ExactDecomposition {
                    scenario,
                    atoms,
                    weights,
                },
                residual_sq: p.scalar("RESIDUAL_SQ")?,
                nu: p.scalar("NU")?,
                eta_pow: p.scalar("ETA_POW")?,
                v_low: p.scalar("V_LOW")?,
            }))
        }
        "upper" => {
            let m = p.one("M")?;
            let functional = m
                .body
                .iter()
                .map(|(line, t)| t.parse().map_err(|_| Error::parse(*line, "bad integer")))
                .collect::<Result<Vec<i64>>>()?;
            let ell = p.one("ELL")?;
            let ell = match ell.body.as_slice() {
                [(line, t)] => t.parse().map_err(|_| Error::parse(*line, "bad integer"))?,
                _ => return Err(Error::parse(ell.line, "ELL needs one value")),
            };
            Ok(Certificate::Upper(UpperBoundCertificate {
                scenario,
                source,
                functional,
                ell,
                q: p.scalar("Q")?,
                v_up: p.scalar("V_UP")?,
            }))
        }
        other => Err(Error::parse(
            1,
            format!("unknown certificate kind {other:?}"),
        )),
    }
}
