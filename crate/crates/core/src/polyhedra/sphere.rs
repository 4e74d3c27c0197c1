//! Rational points exactly on the unit sphere.
//!
//! `(x, y, z)` is written through half-angle tangents `t_φ = tan(φ/2)` and
//! `t_θ = tan(θ/2)` of its spherical angles; the map from `(t_φ, t_θ)` back to
//! the sphere is rational, so rational tangents give rational points.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{from_f64, to_f64};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    pub x: BigRational,
    pub y: BigRational,
    pub z: BigRational,
}

impl RationalPoint {
    pub fn new(x: BigRational, y: BigRational, z: BigRational) -> Self {
        RationalPoint { x, y, z }
    }

    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        RationalPoint::new(
            BigRational::from_integer(x.into()),
            BigRational::from_integer(y.into()),
            BigRational::from_integer(z.into()),
        )
    }

    pub fn coords(&self) -> [&BigRational; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn norm_sq(&self) -> BigRational {
        &self.x * &self.x + &self.y * &self.y + &self.z * &self.z
    }

    pub fn is_on_sphere(&self) -> bool {
        self.norm_sq().is_one()
    }

    pub fn neg(&self) -> RationalPoint {
        RationalPoint::new(-&self.x, -&self.y, -&self.z)
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [to_f64(&self.x), to_f64(&self.y), to_f64(&self.z)]
    }

    pub fn to_array(&self) -> [BigRational; 3] {
        [self.x.clone(), self.y.clone(), self.z.clone()]
    }

    /// Exact squared distance to a float point.
    pub fn dist_sq_to(&self, p: &[f64; 3]) -> BigRational {
        self.coords()
            .iter()
            .zip(p)
            .map(|(c, &v)| {
                let d = *c - from_f64(v);
                &d * &d
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }
}

/// First continued-fraction convergent of `t` within `delta` of it.
fn convergent_within(t: &BigRational, delta: &BigRational) -> BigRational {
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = t.clone();
    loop {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        let approx = BigRational::new(h2.clone(), k2.clone());
        let frac = &rest - BigRational::from_integer(a);
        if (&approx - t).abs() <= *delta || frac.is_zero() {
            return approx;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        rest = frac.recip();
    }
}

/// `(2t/(1+t²), (1-t²)/(1+t²))`: sine and cosine from a half-angle tangent.
fn sin_cos(t: &BigRational) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let d = &one + t * t;
    let two = BigRational::from_integer(BigInt::from(2));
    (&two * t / &d, (&one - t * t) / d)
}

fn point_from_tangents(t_phi: &BigRational, t_theta: &BigRational) -> RationalPoint {
    let (sp, cp) = sin_cos(t_phi);
    let (st, ct) = sin_cos(t_theta);
    RationalPoint::new(&sp * ct, sp * st, cp)
}

/// Rational point on the unit sphere within distance `tol` of `p`.
pub fn rationalize(p: &[f64; 3], tol: f64) -> Result<RationalPoint> {
    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "point {p:?} is not on the unit sphere"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let [x, y, z] = *p;
    let r = x.hypot(y);
    if r == 0.0 {
        let sign = if z < 0.0 { -1 } else { 1 };
        return Ok(RationalPoint::from_ints(0, 0, sign));
    }
    // Reflect into x >= 0, z >= 0 so both tangents lie in [-1, 1].
    let flip_xy = x < 0.0;
    let flip_z = z < 0.0;
    let (xr, yr) = if flip_xy { (-x, -y) } else { (x, y) };
    let zr = z.abs();
    let t_phi = from_f64(r / (1.0 + zr));
    let t_theta = from_f64(yr / (r + xr));
    let tol_sq = from_f64(tol) * from_f64(tol);
    let mut delta = from_f64(tol / 8.0);
    let eight = BigRational::from_integer(BigInt::from(8));
    for _ in 0..40 {
        let mut q = point_from_tangents(
            &convergent_within(&t_phi, &delta),
            &convergent_within(&t_theta, &delta),
        );
        if flip_xy {
            q.x = -q.x;
            q.y = -q.y;
        }
        if flip_z {
            q.z = -q.z;
        }
        if q.dist_sq_to(p) <= tol_sq {
            return Ok(q);
        }
        delta /= &eight;
    }
    Err(Error::Domain(format!(
        "could not rationalize {p:?} within {tol}"
    )))
}

/// Least common denominator of the three coordinates.
pub(crate) fn common_denominator(p: &RationalPoint) -> BigInt {
    let d = p.x.denom().lcm(p.y.denom());
    d.lcm(p.z.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_special_points() {
        assert_eq!(
            rationalize(&[0.0, 0.0, 1.0], 1e-6).unwrap(),
            RationalPoint::from_ints(0, 0, 1)
        );
        assert_eq!(
            rationalize(&[0.0, 0.0, -1.0], 1e-6).unwrap(),
            RationalPoint::from_ints(0, 0, -1)
        );
        assert_eq!(
            rationalize(&[1.0, 0.0, 0.0], 1e-6).unwrap(),
            RationalPoint::from_ints(1, 0, 0)
        );
        assert_eq!(
            rationalize(&[-1.0, 0.0, 0.0], 1e-6).unwrap(),
            RationalPoint::from_ints(-1, 0, 0)
        );
        assert_eq!(
            rationalize(&[0.0, -1.0, 0.0], 1e-6).unwrap(),
            RationalPoint::from_ints(0, -1, 0)
        );
    }

    #[test]
    fn random_points_land_on_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for i in 0..300 {
            let v: [f64; 3] = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let p = [v[0] / n, v[1] / n, v[2] / n];
            let tol = [1e-3, 1e-6, 1e-9, 1e-12][i % 4];
            let q = rationalize(&p, tol).unwrap();
            assert!(q.is_on_sphere());
            assert!(q.dist_sq_to(&p) <= from_f64(tol) * from_f64(tol));
        }
    }

    #[test]
    fn rejects_off_sphere_input() {
        assert!(rationalize(&[1.0, 1.0, 0.0], 1e-6).is_err());
        assert!(rationalize(&[1.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn coarse_tolerance_gives_small_denominators() {
        let p = [0.6, 0.8, 0.0];
        let q = rationalize(&p, 1e-3).unwrap();
        assert!(common_denominator(&q) < BigInt::from(10_000));
    }
}
