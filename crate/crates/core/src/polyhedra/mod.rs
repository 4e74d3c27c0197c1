//! Symmetric polyhedra on the unit sphere, their exact rational versions, and
//! the shrinking factor `η² = min_f β_f²` over hull faces.

mod geodesic;
mod hull;
mod sphere;

pub use geodesic::{
    dedupe, geodesic_icosahedron, icosahedron_mesh, octahedron, pentakis_dodecahedron,
};
pub use sphere::{rationalize, RationalPoint};

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational_at, to_f64};

/// Face inequality `<a_f, r> <= β_f`, kept exactly as `A x + B y + C z <= D`.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub coefficients: [BigInt; 4],
    pub normal: [f64; 3],
    pub beta: f64,
    pub beta_sq: BigRational,
}

impl Face {
    fn from_plane(coefficients: [BigInt; 4]) -> Self {
        let [a, b, c, d] = &coefficients;
        let norm_sq = a * a + b * b + c * c;
        let beta_sq = BigRational::new(d * d, norm_sq.clone());
        let norm = to_f64(&BigRational::from_integer(norm_sq)).sqrt();
        let f = |v: &BigInt| to_f64(&BigRational::from_integer(v.clone())) / norm;
        Face {
            normal: [f(a), f(b), f(c)],
            beta: f(d),
            beta_sq,
            coefficients,
        }
    }

    /// Exact `A x + B y + C z - D`; nonpositive for every hull point.
    pub fn slack(&self, p: &RationalPoint) -> BigRational {
        let [a, b, c, d] = &self.coefficients;
        let int = |v: &BigInt| BigRational::from_integer(v.clone());
        int(a) * &p.x + int(b) * &p.y + int(c) * &p.z - int(d)
    }
}

#[derive(Clone, Debug)]
pub struct RationalPolyhedron {
    vertices: Vec<RationalPoint>,
    antipode: Vec<usize>,
    triangles: Vec<[usize; 3]>,
    faces: Vec<Face>,
    eta_sq: BigRational,
}

impl RationalPolyhedron {
    pub fn vertices(&self) -> &[RationalPoint] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn eta_sq(&self) -> &BigRational {
        &self.eta_sq
    }

    pub fn eta(&self) -> f64 {
        to_f64(&self.eta_sq).sqrt()
    }

    pub fn antipode(&self, i: usize) -> usize {
        self.antipode[i]
    }

    /// Number of measurement inputs: one per antipodal pair.
    pub fn inputs(&self) -> usize {
        self.vertices.len() / 2
    }

    /// First vertex of every antipodal pair, in vertex order.
    pub fn measurement_directions(&self) -> Vec<RationalPoint> {
        (0..self.vertices.len())
            .filter(|&i| self.antipode[i] > i)
            .map(|i| self.vertices[i].clone())
            .collect()
    }
}

/// Adds missing antipodes (with a warning) and drops exact duplicates.
fn antipodal_closure(vertices: &[RationalPoint]) -> Vec<RationalPoint> {
    let mut out: Vec<RationalPoint> = Vec::with_capacity(vertices.len() * 2);
    let mut seen: HashMap<RationalPoint, usize> = HashMap::new();
    for v in vertices {
        if !seen.contains_key(v) {
            seen.insert(v.clone(), out.len());
            out.push(v.clone());
        }
    }
    let mut added = 0;
    for i in 0..out.len() {
        let neg = out[i].neg();
        if !seen.contains_key(&neg) {
            seen.insert(neg.clone(), out.len());
            out.push(neg);
            added += 1;
        }
    }
    if added > 0 {
        log::warn!("vertex set not closed under antipodes; added {added} antipodal points");
    }
    out
}

/// Exact hull faces and shrinking factor of an antipodally closed point set.
pub fn faces_and_eta(vertices: &[RationalPoint]) -> Result<RationalPolyhedron> {
    if let Some(v) = vertices.iter().find(|v| !v.is_on_sphere()) {
        return Err(Error::Domain(format!(
            "vertex {:?} is not exactly on the unit sphere",
            v.to_f64()
        )));
    }
    let vertices = antipodal_closure(vertices);
    if vertices.len() < 4 {
        return Err(Error::Degenerate(format!(
            "need at least 4 vertices, got {}",
            vertices.len()
        )));
    }
    let index: HashMap<&RationalPoint, usize> =
        vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let antipode: Vec<usize> = vertices.iter().map(|v| index[&v.neg()]).collect();

    let h = hull::convex_hull(&vertices)?;
    let mut faces: Vec<Face> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for pi in &h.planes {
        let coeffs = hull::plane_coefficients(pi);
        if seen.insert(coeffs.clone()) {
            faces.push(Face::from_plane(coeffs));
        }
    }
    let eta_sq = faces
        .iter()
        .map(|f| f.beta_sq.clone())
        .min()
        .ok_or_else(|| Error::Degenerate("hull has no faces".into()))?;
    Ok(RationalPolyhedron {
        vertices,
        antipode,
        triangles: h.triangles,
        faces,
        eta_sq,
    })
}

/// Rationalizes every point and builds the exact polyhedron.
pub fn rational_polyhedron(points: &[[f64; 3]], tol: f64) -> Result<RationalPolyhedron> {
    let exact = points
        .iter()
        .map(|p| rationalize(p, tol))
        .collect::<Result<Vec<_>>>()?;
    faces_and_eta(&exact)
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut a = m;
        for row in 0..3 {
            a[row][col] = rhs[row];
        }
        *o = det(a) / d;
    }
    Some(out)
}

/// Convex weights over all vertices with `sum_x p_x v_x = η · direction`.
///
/// The direction is located in the cone of one hull triangle; the slack
/// `1 - η Σμ` is split evenly between a vertex of that triangle and its
/// antipode, which cancel.
pub fn shrink_weights(poly: &RationalPolyhedron, direction: &[f64; 3]) -> Result<Vec<f64>> {
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "direction {direction:?} is not a unit vector"
        )));
    }
    let eta = poly.eta();
    let fv: Vec<[f64; 3]> = poly.vertices.iter().map(|v| v.to_f64()).collect();
    let mut best: Option<([usize; 3], [f64; 3])> = None;
    for t in &poly.triangles {
        let m = [
            [fv[t[0]][0], fv[t[1]][0], fv[t[2]][0]],
            [fv[t[0]][1], fv[t[1]][1], fv[t[2]][1]],
            [fv[t[0]][2], fv[t[1]][2], fv[t[2]][2]],
        ];
        let Some(mu) = solve3(m, *direction) else {
            continue;
        };
        let worst = mu.iter().cloned().fold(f64::INFINITY, f64::min);
        if worst >= -1e-12 {
            best = Some((*t, mu));
            break;
        }
        if best.as_ref().map_or(true, |(_, b)| {
            b.iter().cloned().fold(f64::INFINITY, f64::min) < worst
        }) {
            best = Some((*t, mu));
        }
    }
    let (t, mu) = best.ok_or_else(|| Error::Infeasible("polyhedron has no triangles".into()))?;
    if mu.iter().any(|&v| v < -1e-12) {
        return Err(Error::Infeasible(format!(
            "direction {direction:?} lies in no face cone"
        )));
    }
    let mut weights = vec![0.0; poly.vertices.len()];
    let mut total = 0.0;
    for (&i, &u) in t.iter().zip(&mu) {
        let w = eta * u.max(0.0);
        weights[i] += w;
        total += w;
    }
    let rest = 1.0 - total;
    if rest < -1e-12 {
        return Err(Error::Infeasible(format!(
            "shrunk direction leaves the polyhedron (weight sum {total})"
        )));
    }
    let rest = rest.max(0.0);
    weights[t[0]] += rest / 2.0;
    weights[poly.antipode[t[0]]] += rest / 2.0;
    Ok(weights)
}

/// Named polyhedra: `octahedron`, `icosahedron`, `pentakis`, `su3i`, `su3su3i`.
pub fn named_polyhedron(name: &str) -> Option<Vec<[f64; 3]>> {
    match name.to_ascii_lowercase().as_str() {
        "octahedron" => Some(octahedron()),
        "icosahedron" => Some(geodesic_icosahedron(&[])),
        "pentakis" => Some(pentakis_dodecahedron()),
        "su3i" => Some(geodesic_icosahedron(&[3])),
        "su3su3i" => Some(geodesic_icosahedron(&[3, 3])),
        _ => None,
    }
}

/// One vertex per line as `x y z` exact rationals; `#` starts a comment.
pub fn write_vertices(vertices: &[RationalPoint]) -> String {
    let mut out = String::new();
    for v in vertices {
        let _ = writeln!(
            out,
            "{} {} {}",
            format_rational(&v.x),
            format_rational(&v.y),
            format_rational(&v.z)
        );
    }
    out
}

pub fn read_vertices(text: &str) -> Result<Vec<RationalPoint>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::parse(i + 1, "expected three coordinates"));
        }
        let p = RationalPoint::new(
            parse_rational_at(toks[0], i + 1)?,
            parse_rational_at(toks[1], i + 1)?,
            parse_rational_at(toks[2], i + 1)?,
        );
        if !p.is_on_sphere() {
            return Err(Error::parse(
                i + 1,
                "vertex is not exactly on the unit sphere",
            ));
        }
        out.push(p);
    }
    Ok(out)
}
