//! Exact incremental convex hull of rational points in 3D.
//!
//! Points are lifted to integer homogeneous coordinates `(X, Y, Z, W)` with
//! `W > 0`; a plane is an integer 4-vector `π` with `π·P = 0` on the plane and
//! `π·P > 0` on the outer side. Float planes filter the obvious cases, exact
//! integer arithmetic decides the rest.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::sphere::{common_denominator, RationalPoint};
use crate::error::{Error, Result};

const FILTER: f64 = 1e-9;

type Homogeneous = [BigInt; 4];

fn lift(p: &RationalPoint) -> Homogeneous {
    let w = common_denominator(p);
    let c = |v: &BigRational| v.numer() * (&w / v.denom());
    [c(&p.x), c(&p.y), c(&p.z), w]
}

fn det3(m: [[&BigInt; 3]; 3]) -> BigInt {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Plane through three homogeneous points, gcd-reduced.
fn plane_through(a: &Homogeneous, b: &Homogeneous, c: &Homogeneous) -> Homogeneous {
    let rows = [a, b, c];
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        let [r0, r1, r2] = rows;
        det3([
            [&r0[cols[0]], &r0[cols[1]], &r0[cols[2]]],
            [&r1[cols[0]], &r1[cols[1]], &r1[cols[2]]],
            [&r2[cols[0]], &r2[cols[1]], &r2[cols[2]]],
        ])
    };
    let mut pi = [minor(0), -minor(1), minor(2), -minor(3)];
    let g = pi.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if !g.is_zero() {
        for v in &mut pi {
            *v /= &g;
        }
    }
    pi
}

fn eval(pi: &Homogeneous, p: &Homogeneous) -> BigInt {
    pi.iter().zip(p).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Debug)]
struct HullFace {
    v: [usize; 3],
    plane: Homogeneous,
    normal: [f64; 3],
    offset: f64,
    alive: bool,
}

fn float_plane(pts: &[[f64; 3]], v: [usize; 3]) -> ([f64; 3], f64) {
    let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let n = [n[0] / len, n[1] / len, n[2] / len];
    (n, n[0] * a[0] + n[1] * a[1] + n[2] * a[2])
}

struct Builder<'a> {
    pts: &'a [Homogeneous],
    fpts: Vec<[f64; 3]>,
    interior: Homogeneous,
    faces: Vec<HullFace>,
}

impl Builder<'_> {
    fn add_face(&mut self, mut v: [usize; 3]) {
        let mut plane = plane_through(&self.pts[v[0]], &self.pts[v[1]], &self.pts[v[2]]);
        if eval(&plane, &self.interior).is_positive() {
            for c in &mut plane {
                *c = -&*c;
            }
            v.swap(1, 2);
        }
        let (normal, offset) = float_plane(&self.fpts, v);
        self.faces.push(HullFace {
            v,
            plane,
            normal,
            offset,
            alive: true,
        });
    }

    fn sees(&self, f: &HullFace, i: usize) -> bool {
        let p = &self.fpts[i];
        let s = f.normal[0] * p[0] + f.normal[1] * p[1] + f.normal[2] * p[2] - f.offset;
        if s > FILTER {
            true
        } else if s < -FILTER {
            false
        } else {
            eval(&f.plane, &self.pts[i]).is_positive()
        }
    }

    fn insert(&mut self, i: usize) {
        let visible: Vec<usize> = (0..self.faces.len())
            .filter(|&f| self.faces[f].alive && self.sees(&self.faces[f], i))
            .collect();
        if visible.is_empty() {
            return;
        }
        let mut edges: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
        for &f in &visible {
            let v = self.faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let e = edges.entry((a.min(b), a.max(b))).or_insert((a, b, 0));
                e.2 += 1;
            }
            self.faces[f].alive = false;
        }
        let mut horizon: Vec<(usize, usize)> = edges
            .into_values()
            .filter(|e| e.2 == 1)
            .map(|e| (e.0, e.1))
            .collect();
        horizon.sort_unstable();
        for (a, b) in horizon {
            self.add_face([a, b, i]);
        }
    }
}

/// Exact hull facets: each triangle with its oriented integer plane.
pub(crate) struct Hull {
    pub triangles: Vec<[usize; 3]>,
    pub planes: Vec<Homogeneous>,
}

fn collinear(a: &Homogeneous, b: &Homogeneous, c: &Homogeneous) -> bool {
    plane_through(a, b, c).iter().all(|v| v.is_zero())
}

pub(crate) fn convex_hull(points: &[RationalPoint]) -> Result<Hull> {
    let pts: Vec<Homogeneous> = points.iter().map(lift).collect();
    let fpts: Vec<[f64; 3]> = points.iter().map(|p| p.to_f64()).collect();
    let degenerate = || Error::Degenerate("points are coplanar; the hull has no interior".into());
    let i0 = 0;
    let i1 = (1..pts.len())
        .find(|&i| points[i] != points[i0])
        .ok_or_else(degenerate)?;
    let i2 = (i1 + 1..pts.len())
        .find(|&i| !collinear(&pts[i0], &pts[i1], &pts[i]))
        .ok_or_else(degenerate)?;
    let base = plane_through(&pts[i0], &pts[i1], &pts[i2]);
    let i3 = (i2 + 1..pts.len())
        .find(|&i| !eval(&base, &pts[i]).is_zero())
        .ok_or_else(degenerate)?;

    let seed = [i0, i1, i2, i3];
    let sum = seed.iter().fold(
        [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ],
        |acc, &i| {
            [
                &acc[0] + &points[i].x,
                &acc[1] + &points[i].y,
                &acc[2] + &points[i].z,
            ]
        },
    );
    let four = BigRational::from_integer(BigInt::from(4));
    let centroid = RationalPoint::new(&sum[0] / &four, &sum[1] / &four, &sum[2] / &four);

    let mut b = Builder {
        pts: &pts,
        fpts,
        interior: lift(&centroid),
        faces: Vec::new(),
    };
    for f in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        b.add_face(f);
    }
    for i in 0..pts.len() {
        if !seed.contains(&i) {
            b.insert(i);
        }
    }
    let (triangles, planes) = b
        .faces
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| (f.v, f.plane))
        .unzip();
    Ok(Hull { triangles, planes })
}

/// Plane `A x + B y + C z = D` from its homogeneous form.
pub(crate) fn plane_coefficients(pi: &Homogeneous) -> [BigInt; 4] {
    [pi[0].clone(), pi[1].clone(), pi[2].clone(), -&pi[3]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_has_twelve_triangles() {
        let mut pts = Vec::new();
        for x in [-1, 1] {
            for y in [-1, 1] {
                for z in [-1, 1] {
                    pts.push(RationalPoint::from_ints(x, y, z));
                }
            }
        }
        pts.push(RationalPoint::from_ints(0, 0, 0));
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.triangles.len(), 12);
        for (t, pi) in hull.triangles.iter().zip(&hull.planes) {
            assert!(!t.contains(&8));
            for p in &pts {
                assert!(!eval(pi, &lift(p)).is_positive());
            }
        }
    }

    #[test]
    fn coplanar_input_is_rejected() {
        let pts = vec![
            RationalPoint::from_ints(1, 0, 0),
            RationalPoint::from_ints(0, 1, 0),
            RationalPoint::from_ints(-1, 0, 0),
            RationalPoint::from_ints(0, -1, 0),
        ];
        assert!(matches!(convex_hull(&pts), Err(Error::Degenerate(_))));
    }
}
