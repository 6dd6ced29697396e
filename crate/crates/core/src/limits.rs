//! Angular and tangential boundary limits by geometric sampling and Aitken acceleration.

use crate::error::Result;
use crate::expr::FunctionExpr;
use crate::geometry::{Point, C64};
use std::ops::RangeInclusive;

pub const LIMIT_TOL: f64 = 1e-6;
pub const NUMERICALLY_INFINITE: f64 = 1e8;
pub const NUMERICALLY_ZERO: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Approach {
    Radial,
    /// Straight ray making the given angle with the radius.
    StolzRay(f64),
    /// Horocycle `d(z) = level` through the vertex.
    TangentialCurve(f64),
}

impl Approach {
    pub fn label(&self) -> String {
        match self {
            Approach::Radial => "radial".into(),
            Approach::StolzRay(t) => format!("stolz-ray({t})"),
            Approach::TangentialCurve(c) => format!("tangential-curve({c})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryLimitEstimate {
    pub value: C64,
    pub converged: bool,
    pub approach: Approach,
    pub samples_used: usize,
    /// Magnitudes beyond [`NUMERICALLY_INFINITE`] with growing trend.
    pub infinite: bool,
}

impl BoundaryLimitEstimate {
    pub fn is_zero(&self) -> bool {
        !self.infinite && self.value.norm() < NUMERICALLY_ZERO
    }

    pub fn finite(&self) -> Option<C64> {
        (self.converged && !self.infinite).then_some(self.value)
    }
}

/// One sample point of an approach path.
#[derive(Clone, Copy, Debug)]
pub struct Sample {
    pub pt: Point,
    /// `z - vertex`, computed without cancellation.
    pub offset: C64,
    pub k: u32,
}

/// The k-th point of an approach path ending at the unimodular `vertex`.
pub fn approach_sample(vertex: C64, approach: Approach, k: u32) -> Sample {
    let s = 2f64.powi(-(k as i32));
    // displacement from the vertex expressed for vertex 1, i.e. the gap q1
    let q1 = match approach {
        Approach::Radial => C64::new(s, 0.0),
        Approach::StolzRay(theta) => C64::from_polar(s, theta),
        Approach::TangentialCurve(level) => {
            let c = C64::new(1.0 / level, 2.0 / s);
            C64::new(2.0, 0.0) / (c + 1.0)
        }
    };
    if vertex == C64::new(1.0, 0.0) {
        Sample { pt: Point::from_gap(q1), offset: -q1, k }
    } else {
        let offset = -vertex * q1;
        let z = vertex + offset;
        let q = (C64::new(1.0, 0.0) - vertex) - offset;
        Sample { pt: Point { z, q }, offset, k }
    }
}

/// Aitken-accelerate a sequence with (roughly) geometric error decay.
pub fn aitken(seq: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(seq.len().saturating_sub(2));
    for w in seq.windows(3) {
        let d1 = w[1] - w[0];
        let d2 = w[2] - w[1];
        let denom = d2 - d1;
        let ratio = if d1.norm() > 0.0 { d2.norm() / d1.norm() } else { f64::INFINITY };
        if denom.norm() == 0.0 || !(ratio < 0.95) {
            out.push(w[2]);
        } else {
            out.push(w[2] - d2 * d2 / denom);
        }
    }
    out
}

/// Result of extrapolating a sampled sequence.
#[derive(Clone, Copy, Debug)]
pub struct Extrapolation {
    pub value: C64,
    /// Spread of the best window of three accelerated values.
    pub spread: f64,
    pub converged: bool,
    pub infinite: bool,
}

pub fn extrapolate(seq: &[C64], tol: f64) -> Extrapolation {
    let n = seq.len();
    if n == 0 {
        return Extrapolation {
            value: C64::new(f64::NAN, f64::NAN),
            spread: f64::INFINITY,
            converged: false,
            infinite: false,
        };
    }
    let last = seq[n - 1];
    if n >= 3 {
        let tail = &seq[n - 3..];
        let mags: Vec<f64> = tail.iter().map(|v| v.norm()).collect();
        if mags[2] > NUMERICALLY_INFINITE && mags[2] >= mags[1] && mags[1] >= mags[0] {
            return Extrapolation { value: last, spread: 0.0, converged: true, infinite: true };
        }
    }
    let acc = aitken(seq);
    if acc.len() < 3 {
        return Extrapolation { value: last, spread: f64::INFINITY, converged: false, infinite: false };
    }
    let mut best: Option<(f64, C64)> = None;
    for w in acc.windows(3) {
        let scale = w[2].norm().max(1.0);
        let spread = ((w[0] - w[1]).norm()).max((w[1] - w[2]).norm()).max((w[0] - w[2]).norm()) / scale;
        if !spread.is_finite() {
            continue;
        }
        if best.map_or(true, |(s, _)| spread <= s) {
            best = Some((spread, w[2]));
        }
    }
    match best {
        Some((spread, value)) => {
            Extrapolation { value, spread, converged: spread <= tol, infinite: value.norm() > NUMERICALLY_INFINITE }
        }
        None => Extrapolation { value: last, spread: f64::INFINITY, converged: false, infinite: false },
    }
}

/// Boundary limit of an arbitrary sampled quantity along an approach to `vertex`.
pub fn boundary_limit_with<G>(
    g: G,
    vertex: C64,
    approach: Approach,
    ks: RangeInclusive<u32>,
    tol: f64,
) -> BoundaryLimitEstimate
where
    G: Fn(&Sample) -> Result<C64>,
{
    let mut vals = Vec::new();
    for k in ks {
        let s = approach_sample(vertex, approach, k);
        if let Ok(v) = g(&s) {
            if v.re.is_finite() && v.im.is_finite() {
                vals.push(v);
            }
        }
    }
    let ex = extrapolate(&vals, tol);
    BoundaryLimitEstimate {
        value: ex.value,
        converged: ex.converged,
        approach,
        samples_used: vals.len(),
        infinite: ex.infinite,
    }
}

/// Limit of `g(z)` as `z -> 1` along `approach`, sampling `z_k = 1 - 2^{-k} e^{i theta}` for
/// k = 4..40.
pub fn boundary_limit(g: &FunctionExpr, approach: Approach, tol: f64) -> BoundaryLimitEstimate {
    boundary_limit_with(|s| g.eval(&s.pt), C64::new(1.0, 0.0), approach, 4..=40, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_cubic_ratio() {
        let g = FunctionExpr::parse("(-(1-z)^2*(1-z^2)/(1+z^2))/(1-z)^3").unwrap();
        let est = boundary_limit(&g, Approach::Radial, LIMIT_TOL);
        assert!(est.converged);
        assert!((est.value - C64::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn angular_only_radial_and_tangential() {
        let beta = 0.5;
        let f = format!("-(1-z)^2*(1-exp(-(1+z)/(1-z)))^{beta}*(1-z)^(1-{beta})");
        let g = FunctionExpr::parse(&format!("({f})/(1-z)^(3-{beta})")).unwrap();
        let r = boundary_limit(&g, Approach::Radial, LIMIT_TOL);
        assert!(r.converged && (r.value + 1.0).norm() < 1e-6);
        let s = boundary_limit(&g, Approach::StolzRay(1.0), LIMIT_TOL);
        assert!(s.converged && (s.value + 1.0).norm() < 1e-6);
        let t = boundary_limit(&g, Approach::TangentialCurve(1.0), LIMIT_TOL);
        assert!(!t.converged);
    }

    #[test]
    fn hyperbolic_automorphism_abel_derivative() {
        // h = log((1+z)/(1-z)), (1-z) h'(z) = 2/(1+z) -> 1
        let g = FunctionExpr::parse("(1-z)*2/((1+z)*(1-z))").unwrap();
        let est = boundary_limit(&g, Approach::Radial, LIMIT_TOL);
        assert!(est.converged && (est.value - 1.0).norm() < 1e-6);
    }

    #[test]
    fn infinite_limits_are_flagged() {
        let g = FunctionExpr::parse("1/(1-z)^2").unwrap();
        let est = boundary_limit(&g, Approach::Radial, LIMIT_TOL);
        assert!(est.infinite);
    }

    #[test]
    fn other_vertices() {
        // f1'(-1) = -4 with f1 = -(1-z)^2 (2+s)/(1+s) C, s = sqrt(C)
        let f1 = FunctionExpr::parse("-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)").unwrap();
        let v = C64::new(-1.0, 0.0);
        let est = boundary_limit_with(|s| Ok(f1.eval(&s.pt)? / s.offset), v, Approach::Radial, 4..=40, LIMIT_TOL);
        assert!(est.converged, "{est:?}");
        assert!((est.value + 4.0).norm() < 1e-6, "{est:?}");
    }
}
