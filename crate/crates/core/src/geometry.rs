//! Unit disk geometry: Cayley transform, horocycle distance, Stolz regions.
//!
//! Points close to the Denjoy–Wolff point 1 lose their distinguishing digits when stored as
//! `z` alone, so [`Point`] carries the complement `q = 1 - z` as an independent value.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

pub type C64 = Complex64;

/// Membership tolerance for [`DiskPoint`].
pub const DISK_TOL: f64 = 1e-12;

/// A complex point together with its gap `q = 1 - z` to the boundary point 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub z: C64,
    pub q: C64,
}

impl Point {
    pub fn new(z: C64) -> Self {
        Point { z, q: C64::new(1.0, 0.0) - z }
    }

    /// Point `1 - q`, keeping `q` exact.
    pub fn from_gap(q: C64) -> Self {
        Point { z: C64::new(1.0, 0.0) - q, q }
    }

    /// `z + dz` with both coordinates updated independently.
    pub fn shifted(&self, dz: C64) -> Self {
        Point { z: self.z + dz, q: self.q - dz }
    }

    /// `1 - |z|^2`, accurate when z is close to 1.
    pub fn one_minus_abs_sq(&self) -> f64 {
        if self.q.norm() < 0.5 {
            2.0 * self.q.re - self.q.norm_sqr()
        } else {
            1.0 - self.z.norm_sqr()
        }
    }

    /// `1 - |z|`.
    pub fn boundary_gap(&self) -> f64 {
        let s = self.one_minus_abs_sq();
        s / (1.0 + (1.0 - s).max(0.0).sqrt())
    }

    pub fn in_disk(&self) -> bool {
        self.one_minus_abs_sq() > 0.0
    }
}

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint {
    pub value: C64,
    pub gap: C64,
    /// Set when `1 - 1e-12 <= |z| < 1`.
    pub near_boundary: bool,
}

impl DiskPoint {
    pub fn new(z: C64) -> Result<Self> {
        Self::from_point(Point::new(z))
    }

    pub fn from_point(p: Point) -> Result<Self> {
        let gap = p.boundary_gap();
        if !(gap > 0.0) || !p.z.re.is_finite() || !p.z.im.is_finite() {
            return Err(Error::NotInDisk { z: p.z });
        }
        Ok(DiskPoint { value: p.z, gap: p.q, near_boundary: gap <= DISK_TOL })
    }

    pub fn point(&self) -> Point {
        Point { z: self.value, q: self.gap }
    }
}

/// Nontangential approach region with vertex on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StolzRegion {
    pub vertex: C64,
    pub aperture: f64,
    pub radius_cap: f64,
}

impl Default for StolzRegion {
    fn default() -> Self {
        StolzRegion { vertex: C64::new(1.0, 0.0), aperture: FRAC_PI_4, radius_cap: 1.0 }
    }
}

impl StolzRegion {
    pub fn new(vertex: C64, aperture: f64, radius_cap: f64) -> Result<Self> {
        if !(aperture > 0.0 && aperture < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config(format!("Stolz aperture {aperture} not in (0, pi/2)")));
        }
        if !(radius_cap > 0.0 && radius_cap <= 2.0) {
            return Err(Error::Config(format!("Stolz radius cap {radius_cap} not in (0, 2]")));
        }
        if (vertex.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("Stolz vertex {vertex} is not unimodular")));
        }
        Ok(StolzRegion { vertex, aperture, radius_cap })
    }
}

/// `C(z) = (1+z)/(1-z)`, mapping the disk onto the right half-plane.
pub fn cayley(z: C64) -> Result<C64> {
    cayley_pt(&Point::new(z))
}

pub fn cayley_pt(p: &Point) -> Result<C64> {
    if p.q == C64::new(0.0, 0.0) {
        return Err(Error::PoleAtOne);
    }
    Ok((C64::new(2.0, 0.0) - p.q) / p.q)
}

/// `(w-1)/(w+1)`.
pub fn inverse_cayley(w: C64) -> Result<C64> {
    inverse_cayley_pt(w).map(|p| p.z)
}

/// Inverse Cayley transform returning the point with an accurate gap `q = 2/(w+1)`.
pub fn inverse_cayley_pt(w: C64) -> Result<Point> {
    let den = w + 1.0;
    if den == C64::new(0.0, 0.0) {
        return Err(Error::PoleAtMinusOne);
    }
    Ok(Point { z: (w - 1.0) / den, q: C64::new(2.0, 0.0) / den })
}

/// `d(z) = |1-z|^2 / (1-|z|^2)`.
pub fn horocycle_distance(z: C64) -> Result<f64> {
    horocycle_distance_pt(&Point::new(z))
}

pub fn horocycle_distance_pt(p: &Point) -> Result<f64> {
    let s = p.one_minus_abs_sq();
    if !(s > 0.0) {
        return Err(Error::NotInDisk { z: p.z });
    }
    Ok(p.q.norm_sqr() / s)
}

pub fn in_stolz(z: C64, region: &StolzRegion) -> bool {
    let p = Point::new(z);
    let dist = if region.vertex == C64::new(1.0, 0.0) { p.q.norm() } else { (region.vertex - z).norm() };
    dist <= p.boundary_gap() / region.aperture.cos() && dist <= region.radius_cap
}

/// Rotation of the disk `z -> e^{i theta} z`.
pub fn rotate(z: C64, theta: f64) -> C64 {
    z * C64::from_polar(1.0, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cayley_examples() {
        assert!((cayley(c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((cayley(c(0.5, 0.0)).unwrap() - 3.0).norm() < 1e-15);
        assert!((cayley(c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(cayley(c(1.0, 0.0)), Err(Error::PoleAtOne));
        assert!((inverse_cayley(c(3.0, 0.0)).unwrap() - 0.5).norm() < 1e-15);
        assert!((inverse_cayley(c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(inverse_cayley(c(-1.0, 0.0)), Err(Error::PoleAtMinusOne));
    }

    #[test]
    fn horocycle_examples() {
        assert!((horocycle_distance(c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((horocycle_distance(c(0.5, 0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((horocycle_distance(c(0.0, 0.5)).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!(horocycle_distance(c(1.0, 0.0)).is_err());
        for k in 0..200 {
            let r = -0.995 + 0.01 * k as f64;
            let d = horocycle_distance(c(r, 0.0)).unwrap();
            assert!((d - (1.0 - r) / (1.0 + r)).abs() <= 1e-14 * d.max(1.0));
        }
    }

    #[test]
    fn stolz_examples() {
        let reg = StolzRegion::default();
        assert!(in_stolz(c(0.9, 0.0), &reg));
        assert!(!in_stolz(c(0.99, 0.0999), &reg));
        let capped = StolzRegion::new(c(1.0, 0.0), FRAC_PI_4, 0.5).unwrap();
        assert!(!in_stolz(c(0.0, 0.0), &capped));
        assert!(StolzRegion::new(c(1.0, 0.0), 1.6, 1.0).is_err());
    }

    #[test]
    fn disk_point_flags() {
        assert!(DiskPoint::new(c(1.0, 0.0)).is_err());
        let p = DiskPoint::from_point(Point::from_gap(c(1e-13, 0.0))).unwrap();
        assert!(p.near_boundary);
        assert!(!DiskPoint::new(c(0.3, 0.2)).unwrap().near_boundary);
    }

    #[test]
    fn gap_is_accurate_near_one() {
        let p = Point::from_gap(c(1e-30, 1e-20));
        let d = horocycle_distance_pt(&p).unwrap();
        // |q|^2 / (2 Re q - |q|^2) with |q|^2 ~ 1e-40
        assert!((d - 1e-40 / (2e-30 - 1e-40)).abs() < 1e-22);
    }
}
