//! Outer and inner conjugations with Möbius groups, boundary null points and backward flow
//! invariant domains (BFIDs).
//!
//! Group convention: `g(z) = a(z²-1) + ib(z-1)²`, whose second zero is `η = (ib-a)/(a+ib)`.
//! The linearizer `k` of the group satisfies `k(G_t(z)) = k(z) + t`:
//! `k(z) = (1/2a) log((1-η̄z)/(1-z))` when `a > 0`, `k(z) = (i/b) z/(1-z)` when `a = 0`.

use crate::abel::{planar_domain_stats, radial_exponent, LinearizationModel};
use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::flow::{backward_extendability_from, FlowMap, OdeFlow};
use crate::geometry::{DiskPoint, Point, C64};
use crate::limits::{boundary_limit_with, extrapolate, Approach, LIMIT_TOL};
use crate::report::{complex, real};
use serde_json::{json, Value};
use std::cell::RefCell;
use std::f64::consts::PI;

pub const RESIDUAL_TIMES: [f64; 3] = [1.0, 5.0, 25.0];
/// Distance kept from the edge of a candidate strip or half-plane.
pub const CONTAINMENT_MARGIN: f64 = 1e-3;
/// Backward time used to decide that a horizontal line reaches the boundary point 1.
const P_TYPE_HORIZON: f64 = 1e4;
const RIGHT_SHIFT: f64 = 50.0;

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusGroup {
    pub a: f64,
    pub b: f64,
    pub eta: C64,
}

impl MobiusGroup {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0) || !b.is_finite() || (a == 0.0 && b == 0.0) {
            return Err(Error::Config(format!("group parameters (a, b) = ({a}, {b}) need a >= 0, (a, b) != 0")));
        }
        let eta = if a == 0.0 { C64::new(1.0, 0.0) } else { (i() * b - a) / (i() * b + a) };
        Ok(MobiusGroup { a, b, eta })
    }

    /// Hyperbolic group with repelling point `zeta` and `g'(zeta) = -2a`.
    pub fn with_repelling_point(zeta: C64, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Config(format!("repelling multiplier a = {a} must be positive")));
        }
        let zeta = zeta / zeta.norm();
        // ib = a (1+η)/(1-η)
        let b = (a * (1.0 + zeta) / (1.0 - zeta) / i()).re;
        Ok(MobiusGroup { a, b, eta: zeta })
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.a != 0.0
    }

    pub fn generator(&self) -> FunctionExpr {
        let z = FunctionExpr::z();
        let one = FunctionExpr::constant(C64::new(1.0, 0.0));
        let sq = |e: &FunctionExpr| e.mul(e);
        FunctionExpr::constant(C64::new(self.a, 0.0))
            .mul(&sq(&z).sub(&one))
            .add(&FunctionExpr::constant(C64::new(0.0, self.b)).mul(&sq(&z.sub(&one))))
    }

    pub fn g(&self, p: &Point) -> C64 {
        -self.a * p.q * (1.0 + p.z) + i() * self.b * p.q * p.q
    }

    /// Linearizer without additive constant.
    pub fn k0(&self, p: &Point) -> C64 {
        if self.is_hyperbolic() {
            ((1.0 - self.eta.conj() * p.z) / p.q).ln() / (2.0 * self.a)
        } else {
            i() / self.b * p.z / p.q
        }
    }

    /// `Im` of the midline of the strip `k0(Δ)` (hyperbolic groups).
    pub fn k0_midline(&self) -> f64 {
        -(1.0 - self.eta).arg() / (2.0 * self.a)
    }

    /// `G_t(p)`.
    pub fn apply(&self, t: f64, p: &Point) -> Point {
        if self.is_hyperbolic() {
            let e = (1.0 - self.eta.conj() * p.z) / p.q * (2.0 * self.a * t).exp();
            let den = e - self.eta.conj();
            Point { z: (e - 1.0) / den, q: (1.0 - self.eta.conj()) / den }
        } else {
            let r = p.z / p.q - i() * self.b * t;
            Point { z: r / (1.0 + r), q: 1.0 / (1.0 + r) }
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "a": real(self.a), "b": real(self.b), "eta": complex(self.eta) })
    }
}

/// `G_t(z) = (ibz + t(1-z))/(ib + t(1-z))`, the parabolic group generated by `(i/b)(1-z)²`.
pub fn parabolic_group_apply(b: f64, t: f64, z: C64) -> Result<C64> {
    if b == 0.0 {
        return Err(Error::Config("parabolic group needs b != 0".into()));
    }
    let z = DiskPoint::new(z)?.value;
    let ib = i() * b;
    Ok((ib * z + t * (1.0 - z)) / (ib + t * (1.0 - z)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    Outer,
    Inner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfidType {
    PType,
    HType,
    None,
}

impl BfidType {
    pub fn label(&self) -> &'static str {
        match self {
            BfidType::PType => "p-type",
            BfidType::HType => "h-type",
            BfidType::None => "none",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConjugationCertificate {
    pub kind: CertificateKind,
    /// Human-readable description of ψ or φ.
    pub map: String,
    pub group: MobiusGroup,
    pub residual_sup: f64,
    pub bfid_type: BfidType,
    pub corner_gamma: Option<f64>,
    pub corner_m: Option<C64>,
    /// Parameter `b` of ψ = h/(ib + h) for outer certificates.
    pub outer_b: Option<f64>,
    pub base_point: Option<Point>,
    /// Additive constant of `k`.
    pub k_const: C64,
    /// `sup |g φ' - f(φ)|` on the grid.
    pub ode_residual: Option<f64>,
    pub zeta: Option<C64>,
    /// `|2a + f'(ζ)|` with `f'(ζ)` from the difference quotient `f/(z-ζ)`.
    pub multiplier_mismatch: Option<f64>,
}

impl ConjugationCertificate {
    pub fn k(&self, p: &Point) -> C64 {
        self.group.k0(p) + self.k_const
    }

    /// `φ(p) = h^{-1}(k(p))`, continued from the base point.
    pub fn phi(&self, model: &LinearizationModel, p: &Point) -> Result<Point> {
        let base = self.base_point.ok_or_else(|| Error::Config("outer certificate has no φ".into()))?;
        model.invert_from(self.k(p), base, self.base_h(model)?)
    }

    fn base_h(&self, model: &LinearizationModel) -> Result<C64> {
        model.h(&self.base_point.ok_or_else(|| Error::Config("no base point".into()))?)
    }

    /// `ψ(p) = h(p)/(ib + h(p))`.
    pub fn psi(&self, model: &LinearizationModel, p: &Point) -> Result<C64> {
        let b = self.outer_b.ok_or_else(|| Error::Config("inner certificate has no ψ".into()))?;
        let h = model.h(p)?;
        Ok(h / (i() * b + h))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": match self.kind { CertificateKind::Outer => "outer", CertificateKind::Inner => "inner" },
            "bfid_type": self.bfid_type.label(),
            "group": self.group.to_json(),
            "residual_sup": real(self.residual_sup),
            "corner_gamma": self.corner_gamma.map(real),
            "corner_m": self.corner_m.map(complex),
            "base_point": self.base_point.map(|p| complex(p.z)),
            "map": self.map,
            "k_const": complex(self.k_const),
            "ode_residual": self.ode_residual.map(real),
            "zeta": self.zeta.map(complex),
            "multiplier_mismatch": self.multiplier_mismatch.map(real),
        })
    }
}

pub fn bfid_json(certs: &[ConjugationCertificate]) -> Value {
    Value::Array(certs.iter().map(|c| c.to_json()).collect())
}

/// 20 points: radii 0.1, 0.4, 0.7, 0.9 at five angles each.
pub fn verification_grid() -> Vec<Point> {
    let mut v = vec![];
    for (j, r) in [0.1, 0.4, 0.7, 0.9].into_iter().enumerate() {
        for m in 0..5 {
            let th = 2.0 * PI * (m as f64 + 0.25 * j as f64) / 5.0 + 0.1;
            v.push(Point::new(C64::from_polar(r, th)));
        }
    }
    v
}

fn sup(vals: Vec<Result<f64>>) -> Result<f64> {
    let mut m = 0f64;
    for v in vals {
        m = m.max(v?);
    }
    Ok(m)
}

/// Smallest `b` with `|b| >= 1` whose half-plane `{±Im > ∓b/2}` holds `h(Δ)`, if one exists.
pub fn auto_outer_b(model: &LinearizationModel) -> Result<Option<f64>> {
    let st = planar_domain_stats(model, 64)?;
    Ok(if st.inf_im.is_finite() {
        Some((2.0 * st.inf_im.abs() - 1e-9).ceil().max(1.0))
    } else if st.sup_im.is_finite() {
        Some(-(2.0 * st.sup_im.abs() - 1e-9).ceil().max(1.0))
    } else {
        None
    })
}

/// ψ = h/(ib + h), which conjugates the semigroup to the parabolic group of
/// [`parabolic_group_apply`] when `h(Δ)` lies in the half-plane `ib·{Re > -1/2}`.
pub fn outer_conjugator(model: &LinearizationModel, b: f64) -> Result<ConjugationCertificate> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Config(format!("outer conjugator needs a finite b != 0, got {b}")));
    }
    let st = planar_domain_stats(model, 64)?;
    let edge = -0.5 * b;
    let slack = 1e-6 * (1.0 + edge.abs());
    if b > 0.0 && !(st.inf_im >= edge - slack) {
        let k = st.inf_series.iter().position(|v| *v < edge - slack).unwrap_or(st.inf_points.len() - 1);
        return Err(Error::NotContained { witness: st.inf_points[k].z });
    }
    if b < 0.0 && !(st.sup_im <= edge + slack) {
        let k = st.sup_series.iter().position(|v| *v > edge + slack).unwrap_or(st.sup_points.len() - 1);
        return Err(Error::NotContained { witness: st.sup_points[k].z });
    }
    let cert = ConjugationCertificate {
        kind: CertificateKind::Outer,
        map: format!("psi(z) = h(z)/({}i + h(z))", crate::report::fmt_f64(b)),
        group: MobiusGroup::new(0.0, 1.0 / b)?,
        residual_sup: f64::NAN,
        bfid_type: BfidType::None,
        corner_gamma: None,
        corner_m: None,
        outer_b: Some(b),
        base_point: None,
        k_const: C64::new(0.0, 0.0),
        ode_residual: None,
        zeta: None,
        multiplier_mismatch: None,
    };
    let ode = OdeFlow::new(&model.f);
    let grid = verification_grid();
    let res = crate::par_map(&grid, |p| -> Result<f64> {
        let psi = cert.psi(model, p)?;
        if !(psi.norm() < 1.0) {
            return Err(Error::NotContained { witness: p.z });
        }
        let mut m = 0f64;
        for (ft, t) in ode.flow_many(p, &RESIDUAL_TIMES)?.iter().zip(RESIDUAL_TIMES) {
            m = m.max((cert.psi(model, ft)? - parabolic_group_apply(b, t, psi)?).norm());
        }
        Ok(m)
    });
    Ok(ConjugationCertificate { residual_sup: sup(res)?, ..cert })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullPoint {
    pub zeta: C64,
    pub f_prime: C64,
    pub regular: bool,
    /// `f/(z-ζ)` limit, an independent estimate of `f'(ζ)`.
    pub quotient: Option<C64>,
}

impl NullPoint {
    pub fn to_json(&self) -> Value {
        json!({
            "zeta": complex(self.zeta),
            "f_prime": complex(self.f_prime),
            "regular": self.regular,
        })
    }
}

fn golden_min(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = g(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

fn abs_f_on_circle(f: &FunctionExpr, gap: f64, th: f64) -> f64 {
    f.eval(&crate::abel::polar_point(gap, th)).map_or(f64::INFINITY, |v| {
        let n = v.norm();
        if n.is_finite() {
            n
        } else {
            f64::INFINITY
        }
    })
}

/// Boundary null points of `f`: local minima of `|f|` on the circle `r = 1 - 1e-4`, refined in
/// angle on circles closer to the boundary, kept when the radial limit of `f` vanishes.
pub fn find_boundary_null_points(f: &FunctionExpr, samples: usize) -> Result<Vec<NullPoint>> {
    if samples < 64 {
        return Err(Error::Config(format!("need at least 64 samples, got {samples}")));
    }
    let n = samples;
    let step = 2.0 * PI / n as f64;
    let ths: Vec<f64> = (0..n).map(|j| j as f64 * step).collect();
    let vals: Vec<f64> = ths.iter().map(|th| abs_f_on_circle(f, 1e-4, *th)).collect();
    let mut cands = vec![];
    for j in 0..n {
        let (l, r) = (vals[(j + n - 1) % n], vals[(j + 1) % n]);
        if vals[j].is_finite() && vals[j] <= l && vals[j] < r {
            cands.push(ths[j]);
        }
    }
    let fp = f.derivative();
    let mut out: Vec<NullPoint> = vec![];
    for th0 in cands {
        let mut th = golden_min(|t| abs_f_on_circle(f, 1e-4, t), th0 - step, th0 + step, 80);
        for m in 5..=11 {
            let gap = 10f64.powi(-m);
            let w = 50.0 * 10f64.powi(1 - m);
            th = golden_min(|t| abs_f_on_circle(f, gap, t), th - w, th + w, 80);
        }
        let th = th.rem_euclid(2.0 * PI);
        let zeta = if th.min(2.0 * PI - th) < 1e-9 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, th) };
        if out.iter().any(|p| (p.zeta - zeta).norm() < 1e-6) {
            continue;
        }
        let at = boundary_limit_with(|s| f.eval(&s.pt), zeta, Approach::Radial, 4..=30, LIMIT_TOL);
        let vanishes = !at.infinite && at.value.norm() < 1e-6;
        if !vanishes {
            continue;
        }
        let deriv = boundary_limit_with(|s| fp.eval(&s.pt), zeta, Approach::Radial, 4..=30, LIMIT_TOL);
        let quot = boundary_limit_with(|s| Ok(f.eval(&s.pt)? / s.offset), zeta, Approach::Radial, 4..=20, 1e-4);
        let regular = deriv.finite().is_some() && quot.finite().is_some();
        out.push(NullPoint { zeta, f_prime: deriv.value, regular, quotient: quot.finite() });
    }
    out.sort_by(|a, b| a.zeta.arg().rem_euclid(2.0 * PI).total_cmp(&b.zeta.arg().rem_euclid(2.0 * PI)));
    Ok(out)
}

/// Point with `h = w`, reached from `anchor` along a straight path in `h(Δ)`.
fn point_at(model: &LinearizationModel, w: C64, anchor: (Point, C64)) -> Result<Point> {
    model.invert_from(w, anchor.0, anchor.1)
}

/// Whether the backward orbit of `p` stays in the disk and tends to `target`.
fn backward_tends_to(f: &FunctionExpr, p: &Point, horizon: f64, target: C64) -> bool {
    match backward_extendability_from(f, *p, horizon) {
        Ok(rep) => rep.extendable && rep.limit_point.is_none_or(|l| (l - target).norm() < 1e-2),
        Err(_) => false,
    }
}

fn backward_reaches(f: &FunctionExpr, p: &Point, horizon: f64, target: C64) -> bool {
    match backward_extendability_from(f, *p, horizon) {
        Ok(rep) => rep.extendable && rep.limit_point.is_some_and(|l| (l - target).norm() < 1e-2),
        Err(_) => false,
    }
}

fn check_strip(model: &LinearizationModel, group: &MobiusGroup, anchor: (Point, C64)) -> Result<()> {
    let hb = anchor.1;
    let half = PI / (4.0 * group.a) * (1.0 - CONTAINMENT_MARGIN);
    let horizon = 8.0 * 10f64.ln() / (2.0 * group.a);
    for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let w = C64::new(hb.re, hb.im + s * half);
        let p = point_at(model, w, anchor).map_err(|_| Error::StripNotContained { witness: w })?;
        if !backward_tends_to(&model.f, &p, horizon, group.eta) {
            return Err(Error::StripNotContained { witness: w });
        }
    }
    Ok(())
}

fn check_half_plane(model: &LinearizationModel, group: &MobiusGroup, anchor: (Point, C64), k_const: C64) -> Result<()> {
    let sign = group.b.signum();
    let scale = 0.5 / group.b.abs();
    let edge = k_const.im - sign * scale;
    for d in [CONTAINMENT_MARGIN, 0.5, 1.0, 4.0, 16.0] {
        let w = C64::new(k_const.re, edge + sign * d * scale.max(CONTAINMENT_MARGIN));
        let p = point_at(model, w, anchor).map_err(|_| Error::StripNotContained { witness: w })?;
        if !backward_reaches(&model.f, &p, P_TYPE_HORIZON, C64::new(1.0, 0.0)) {
            return Err(Error::StripNotContained { witness: w });
        }
    }
    Ok(())
}

/// Five-point central difference of `φ` at `p`.
fn phi_derivative(cert: &ConjugationCertificate, model: &LinearizationModel, p: &Point) -> Result<C64> {
    let h = 1e-3;
    let at = |d: f64| cert.phi(model, &p.shifted(C64::new(d, 0.0))).map(|x| x.z);
    Ok((at(-2.0 * h)? - 8.0 * at(-h)? + 8.0 * at(h)? - at(2.0 * h)?) / (12.0 * h))
}

/// `φ = h^{-1} ∘ k` for the group `group`, with `k` normalised at `base`.
///
/// Hyperbolic groups: the strip `k(Δ)` of width `π/(2a)` has its midline through `h(base)`.
/// Parabolic groups: `k(base) = h(base)`, so `k(Δ) = {Im > Im h(base) - 1/(2b)}` for `b > 0`.
pub fn inner_conjugator(model: &LinearizationModel, group: MobiusGroup, base: Point) -> Result<ConjugationCertificate> {
    let base = DiskPoint::from_point(base)?.point();
    let hb = model.h(&base)?;
    let anchor = (base, hb);
    let (k_const, bfid_type, map) = if group.is_hyperbolic() {
        let c = hb - i() * group.k0_midline();
        check_strip(model, &group, anchor)?;
        (c, BfidType::HType, format!("phi = h^-1((1/(2a)) log((1 - conj(eta) z)/(1 - z)) + C), a = {}", group.a))
    } else {
        check_half_plane(model, &group, anchor, hb)?;
        (hb, BfidType::PType, format!("phi = h^-1((i/b) z/(1 - z) + C), b = {}", group.b))
    };
    let cert = ConjugationCertificate {
        kind: CertificateKind::Inner,
        map,
        group,
        residual_sup: f64::NAN,
        bfid_type,
        corner_gamma: None,
        corner_m: None,
        outer_b: None,
        base_point: Some(base),
        k_const,
        ode_residual: None,
        zeta: group.is_hyperbolic().then_some(group.eta),
        multiplier_mismatch: None,
    };
    let ode = OdeFlow::new(&model.f);
    let grid = verification_grid();
    let res = crate::par_map(&grid, |p| -> Result<(f64, f64)> {
        let phi = cert.phi(model, p)?;
        let mut m = 0f64;
        for (ft, t) in ode.flow_many(&phi, &RESIDUAL_TIMES)?.iter().zip(RESIDUAL_TIMES) {
            let rhs = cert.phi(model, &group.apply(t, p))?;
            m = m.max((ft.z - rhs.z).norm());
        }
        let ode_res = (group.g(p) * phi_derivative(&cert, model, p)? - model.f.eval(&phi)?).norm();
        Ok((m, ode_res))
    });
    let (mut rs, mut os) = (0f64, 0f64);
    for r in res {
        let (a, b) = r?;
        rs = rs.max(a);
        os = os.max(b);
    }
    Ok(ConjugationCertificate { residual_sup: rs, ode_residual: Some(os), ..cert })
}

/// Opening `γ` of the corner of `φ(Δ)` at 1 and `m = lim (1-φ(z))/(1-z)^γ` along the radius.
pub fn corner_opening(cert: &ConjugationCertificate, model: &LinearizationModel) -> Result<(f64, C64)> {
    if cert.bfid_type != BfidType::PType {
        return Err(Error::Config("corner opening needs an inner certificate of p-type".into()));
    }
    let base = cert.base_point.expect("inner certificates carry a base point");
    // each radial point continues from the previous one; k doubles along the way
    let prev = RefCell::new((base, model.h(&base)?));
    let cache = RefCell::new(Vec::<(f64, Point)>::new());
    let gap_of = |p: &Point| -> Result<C64> {
        if let Some((_, v)) = cache.borrow().iter().find(|(g, _)| *g == p.q.re) {
            return Ok(v.q);
        }
        let w = cert.k(p);
        let (s, hs) = *prev.borrow();
        let phi = model.invert_from(w, s, hs)?;
        *prev.borrow_mut() = (phi, w);
        cache.borrow_mut().push((p.q.re, phi));
        Ok(phi.q)
    };
    let (gamma, r2) = radial_exponent(gap_of)?;
    if r2 < 0.9999 || !gamma.is_finite() {
        return Err(Error::CornerUndetermined { r2 });
    }
    let ratios: Vec<C64> = cache.borrow().iter().map(|(g, phi)| phi.q / g.powf(gamma)).collect();
    let m = extrapolate(&ratios, 1e-6).value;
    Ok((gamma, m))
}

/// Orbit-limit test for the horizontal line `Im h = y`: a point on it far to the right, then its
/// backward orbit, which must tend to 1.
struct LevelProbe<'a> {
    model: &'a LinearizationModel,
    anchor: (Point, C64),
}

impl LevelProbe<'_> {
    fn point(&self, y: f64) -> Result<Point> {
        point_at(self.model, C64::new(self.anchor.1.re, y), self.anchor)
    }

    fn reaches_one(&self, y: f64) -> bool {
        self.point(y).is_ok_and(|p| backward_reaches(&self.model.f, &p, P_TYPE_HORIZON, C64::new(1.0, 0.0)))
    }
}

struct Channel {
    midline: f64,
    half_width: f64,
}

fn p_type_side(
    model: &LinearizationModel,
    st: &crate::abel::PlanarDomainStats,
    sign: f64,
    channels: &[Channel],
) -> Result<Option<ConjugationCertificate>> {
    let (series, points, other) = if sign > 0.0 {
        (&st.sup_series, &st.sup_points, st.inf_im)
    } else {
        (&st.inf_series, &st.inf_points, st.sup_im)
    };
    let mut reference = 0f64;
    if other.is_finite() {
        reference = reference.max(sign * other);
    }
    for c in channels {
        reference = reference.max(sign * c.midline + c.half_width);
    }
    let Some(j) = series.iter().position(|v| sign * v >= reference + 2.0) else { return Ok(None) };
    let hi_pt = points[j];
    let h_hi = model.h(&hi_pt)?;
    let x_right = h_hi.re.max(0.0) + RIGHT_SHIFT;
    let right = match model.invert_from(C64::new(x_right, h_hi.im), hi_pt, h_hi) {
        Ok(p) => p,
        Err(_) => return Ok(None),
    };
    let probe = LevelProbe { model, anchor: (right, C64::new(x_right, h_hi.im)) };
    let y_hi = h_hi.im;
    if !probe.reaches_one(y_hi) {
        return Ok(None);
    }
    // a level that does not reach 1: the opposite edge of h(Δ), a channel, or far away
    let mut y_lo = None;
    if other.is_finite() {
        y_lo = Some(other);
    }
    for c in channels {
        if sign * (c.midline - y_hi) < 0.0 && y_lo.is_none_or(|y: f64| sign * (c.midline - y) > 0.0) {
            y_lo = Some(c.midline);
        }
    }
    let y_lo = match y_lo {
        Some(y) => y,
        None => {
            let y = y_hi - sign * 1e3;
            if probe.reaches_one(y) {
                return Ok(None);
            }
            y
        }
    };
    let (mut pass, mut fail) = (y_hi, y_lo);
    for _ in 0..40 {
        if (pass - fail).abs() < 1e-6 {
            break;
        }
        let mid = 0.5 * (pass + fail);
        if probe.reaches_one(mid) {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    let edge = pass + sign * CONTAINMENT_MARGIN;
    let group = MobiusGroup::new(0.0, sign)?;
    let base = probe.point(edge + sign * 0.5)?;
    let mut cert = inner_conjugator(model, group, base)?;
    if let Ok((g, m)) = corner_opening(&cert, model) {
        cert.corner_gamma = Some(g);
        cert.corner_m = Some(m);
    }
    Ok(Some(cert))
}

/// One certificate per detected BFID: an h-type strip for each regular repelling boundary null
/// point, a p-type half-plane for each unbounded side of `h(Δ)` whose horizontal lines flow
/// back to 1.
pub fn bfid_report(f: &FunctionExpr) -> Result<Vec<ConjugationCertificate>> {
    let model = LinearizationModel::new(f)?;
    bfid_report_for(&model)
}

pub fn bfid_report_for(model: &LinearizationModel) -> Result<Vec<ConjugationCertificate>> {
    let f = &model.f;
    let mut certs = vec![];
    let mut channels = vec![];
    for np in find_boundary_null_points(f, 256)? {
        if !np.regular || np.zeta == C64::new(1.0, 0.0) {
            continue;
        }
        if !(np.f_prime.re < -1e-8 && np.f_prime.im.abs() <= 1e-6 * np.f_prime.norm()) {
            continue;
        }
        let a = -0.5 * np.f_prime.re;
        let group = MobiusGroup::with_repelling_point(np.zeta, a)?;
        let mid = boundary_limit_with(
            |s| Ok(C64::new(model.h(&s.pt)?.im, 0.0)),
            np.zeta,
            Approach::Radial,
            4..=30,
            LIMIT_TOL,
        );
        let Some(m) = mid.finite() else { continue };
        let seed = Point::new(0.5 * np.zeta);
        let hs = model.h(&seed)?;
        let Ok(base) = model.invert_from(C64::new(hs.re, m.re), seed, hs) else { continue };
        if let Ok(mut cert) = inner_conjugator(model, group, base) {
            cert.multiplier_mismatch = np.quotient.map(|q| (2.0 * a + q).norm());
            channels.push(Channel { midline: m.re, half_width: PI / (4.0 * a) });
            certs.push(cert);
        }
    }
    let st = planar_domain_stats(model, 64)?;
    for sign in [1.0, -1.0] {
        let unbounded = if sign > 0.0 { st.sup_im.is_infinite() } else { st.inf_im.is_infinite() };
        if unbounded {
            if let Some(c) = p_type_side(model, &st, sign, &channels)? {
                certs.push(c);
            }
        }
    }
    Ok(certs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> FunctionExpr {
        FunctionExpr::parse(s).unwrap()
    }

    const F1: &str = "-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)";
    const F2: &str = "-(1-z)^2*(1-z^2)/(1+z^2)";

    #[test]
    fn parabolic_group_examples() {
        let z0 = C64::new(0.0, 0.0);
        assert_eq!(parabolic_group_apply(1.0, 0.0, C64::new(0.3, 0.1)).unwrap(), C64::new(0.3, 0.1));
        let v = parabolic_group_apply(1.0, 3.0, z0).unwrap();
        assert!((v - C64::new(3.0, 0.0) / C64::new(3.0, 1.0)).norm() < 1e-15);
        let z = C64::new(0.3, 0.0);
        let lhs = parabolic_group_apply(0.7, 7.0, z).unwrap();
        let rhs = parabolic_group_apply(0.7, 2.0, parabolic_group_apply(0.7, 5.0, z).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        // same maps as the group record with b -> 1/b
        let g = MobiusGroup::new(0.0, 1.0 / 0.7).unwrap();
        assert!((g.apply(7.0, &Point::new(z)).z - lhs).norm() < 1e-12);
    }

    #[test]
    fn hyperbolic_group_law_and_linearizer() {
        let g = MobiusGroup::new(1.5, -0.8).unwrap();
        assert!(g.g(&Point::new(g.eta)).norm() < 1e-12);
        let with = MobiusGroup::with_repelling_point(g.eta, 1.5).unwrap();
        assert!((with.b - g.b).abs() < 1e-12);
        let p = Point::new(C64::new(0.2, -0.4));
        let a = g.apply(0.7, &g.apply(1.1, &p));
        assert!((a.z - g.apply(1.8, &p).z).norm() < 1e-12);
        assert!((g.k0(&g.apply(1.8, &p)) - g.k0(&p) - 1.8).norm() < 1e-12);
        // k' = -1/g
        let e = 1e-6;
        let d = (g.k0(&p.shifted(C64::new(e, 0.0))) - g.k0(&p.shifted(C64::new(-e, 0.0)))) / (2.0 * e);
        assert!((d + 1.0 / g.g(&p)).norm() < 1e-6);
        assert!((g.generator().eval(&p).unwrap() - g.g(&p)).norm() < 1e-14);
    }

    #[test]
    fn null_points_examples() {
        let np = find_boundary_null_points(&parse(F1), 128).unwrap();
        assert_eq!(np.len(), 2, "{np:?}");
        assert!((np[0].zeta - 1.0).norm() < 1e-12 && (np[0].f_prime - 2.0).norm() < 1e-5 && np[0].regular);
        assert!((np[1].zeta + 1.0).norm() < 1e-8 && (np[1].f_prime + 4.0).norm() < 1e-5 && np[1].regular);
        let np = find_boundary_null_points(&parse("z^2-1"), 64).unwrap();
        assert_eq!(np.len(), 2);
        assert!((np[0].f_prime - 2.0).norm() < 1e-6 && (np[1].f_prime + 2.0).norm() < 1e-6);
        let np = find_boundary_null_points(&parse(F2), 64).unwrap();
        assert_eq!(np.len(), 2);
        assert!(np[0].f_prime.norm() < 1e-6 && (np[1].f_prime + 4.0).norm() < 1e-5);
        assert!(find_boundary_null_points(&parse(F2), 10).is_err());
    }

    #[test]
    fn outer_examples() {
        let m = LinearizationModel::new(&parse("i*(1-z)^2")).unwrap();
        let c = outer_conjugator(&m, 1.0).unwrap();
        assert!(c.residual_sup < 1e-9);
        let p = Point::new(C64::new(0.3, 0.4));
        assert!((c.psi(&m, &p).unwrap() - p.z).norm() < 1e-10);
        let f2 = LinearizationModel::new(&parse(F2)).unwrap();
        assert!(matches!(outer_conjugator(&f2, 1.0), Err(Error::NotContained { .. })));
        assert!(matches!(outer_conjugator(&f2, -3.0), Err(Error::NotContained { .. })));
    }

    #[test]
    fn f1_inner_matches_closed_form() {
        let m = LinearizationModel::new(&parse(F1)).unwrap();
        let g = MobiusGroup::new(2.0, 0.0).unwrap();
        assert!((g.eta + 1.0).norm() < 1e-15);
        let closed = |z: C64| {
            let w = (1.0 + ((1.0 + z) / (1.0 - z)).sqrt()).sqrt();
            let s = (w - 1.0) * (w - 1.0);
            (s - 1.0) / (s + 1.0)
        };
        let base = Point::new(closed(C64::new(0.0, 0.0)));
        let c = inner_conjugator(&m, g, base).unwrap();
        assert_eq!(c.bfid_type, BfidType::HType);
        assert!(c.residual_sup < 1e-6, "{}", c.residual_sup);
        assert!(c.ode_residual.unwrap() < 1e-5, "{:?}", c.ode_residual);
        for p in verification_grid() {
            assert!((c.phi(&m, &p).unwrap().z - closed(p.z)).norm() < 1e-6);
        }
    }

    #[test]
    fn bfid_counts() {
        let count = |s: &str| {
            let v = bfid_report(&parse(s)).unwrap();
            let h = v.iter().filter(|c| c.bfid_type == BfidType::HType).count();
            let p = v.iter().filter(|c| c.bfid_type == BfidType::PType).count();
            for c in &v {
                assert!(c.residual_sup < 1e-6 && c.ode_residual.unwrap() < 1e-5);
            }
            (h, p, v)
        };
        assert_eq!(count(F1).0, 1);
        assert_eq!(count(F1).1, 0);
        let (h, p, v) = count(F2);
        assert_eq!((h, p), (1, 2));
        for c in v.iter().filter(|c| c.bfid_type == BfidType::PType) {
            assert!((c.corner_gamma.unwrap() - 0.5).abs() < 1e-3);
            let edge = c.k_const.im - 0.5 / c.group.b;
            assert!((edge.abs() - PI / 8.0).abs() < 2e-3, "{edge}");
        }
        assert_eq!(count("-(1-z)^2*exp(-i*pi/4)*sqrt((1+z)/(1-z))").2.len(), 0);
    }
}
