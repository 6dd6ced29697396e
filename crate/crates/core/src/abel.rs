//! The Abel function `h = -∫_0^z dz/f`, its inverse, and the geometry of `h(Δ)`.

use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::flow::{FlowMap, OdeFlow};
use crate::geometry::{DiskPoint, Point, C64};
use crate::limits::{
    approach_sample, boundary_limit_with, extrapolate, Approach, BoundaryLimitEstimate, LIMIT_TOL, NUMERICALLY_INFINITE,
};
use crate::quad::integrate_segment;
use crate::report::{complex, real};
use serde_json::{json, Value};
use std::f64::consts::PI;

pub const QUAD_RTOL: f64 = 1e-13;
const ANCHOR_RAYS: usize = 16;
const ANCHOR_RADII: usize = 64;
const MAX_SUBSTEPS: usize = 64;
const NEWTON_ITERS: usize = 50;
const INVERT_TOL: f64 = 1e-11;
const BETA_CUT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuClass {
    Sigma0,
    SigmaAlphaAngular,
    SigmaAlphaUnrestricted,
    Undetermined,
}

impl MuClass {
    pub fn label(&self) -> &'static str {
        match self {
            MuClass::Sigma0 => "Sigma0",
            MuClass::SigmaAlphaAngular => "SigmaAlpha-angular",
            MuClass::SigmaAlphaUnrestricted => "SigmaAlpha-unrestricted",
            MuClass::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AlphaMu {
    pub alpha: f64,
    pub mu: C64,
    pub class: MuClass,
    /// Angular derivative `f'(1)`.
    pub beta: f64,
    /// R² of the log-log fit (1 for hyperbolic entries).
    pub fit_r2: f64,
    pub mu_converged: bool,
}

impl AlphaMu {
    pub fn is_hyperbolic(&self) -> bool {
        self.beta > BETA_CUT
    }
}

pub struct LinearizationModel {
    pub f: FunctionExpr,
    hprime: FunctionExpr,
    /// `(z, h(z))` on 16 rays at 64 Chebyshev radii, plus the origin.
    anchors: Vec<(Point, C64)>,
    pub asymptotics: Result<AlphaMu>,
}

fn h_integrand(hp: &FunctionExpr) -> impl Fn(&Point) -> Result<C64> + '_ {
    move |p: &Point| hp.eval(p)
}

/// `h(z)` by quadrature along `[0, z]`.
pub fn abel_h(f: &FunctionExpr, z: C64) -> Result<C64> {
    let p = DiskPoint::new(z)?.point();
    let hp = FunctionExpr::constant(C64::new(-1.0, 0.0)).div(f);
    let g = h_integrand(&hp);
    let v = integrate_segment(&Point::new(C64::new(0.0, 0.0)), &p, &g, QUAD_RTOL);
    v
}

impl LinearizationModel {
    pub fn new(f: &FunctionExpr) -> Result<Self> {
        let hprime = FunctionExpr::constant(C64::new(-1.0, 0.0)).div(f);
        let radii: Vec<f64> =
            (0..ANCHOR_RADII).map(|j| 0.5 * (1.0 - ((j as f64 + 0.5) * PI / ANCHOR_RADII as f64).cos())).collect();
        let rays: Vec<usize> = (0..ANCHOR_RAYS).collect();
        let g = h_integrand(&hprime);
        let per_ray = crate::par_map(&rays, |&i| -> Result<Vec<(Point, C64)>> {
            let th = 2.0 * PI * i as f64 / ANCHOR_RAYS as f64;
            let dir = C64::from_polar(1.0, th);
            let mut prev = Point::new(C64::new(0.0, 0.0));
            let mut hv = C64::new(0.0, 0.0);
            let mut out = Vec::with_capacity(ANCHOR_RADII);
            for r in &radii {
                let p = if i == 0 { Point::from_gap(C64::new(1.0 - r, 0.0)) } else { Point::new(dir * *r) };
                hv += integrate_segment(&prev, &p, &g, QUAD_RTOL)?;
                out.push((p, hv));
                prev = p;
            }
            Ok(out)
        });
        let mut anchors = vec![(Point::new(C64::new(0.0, 0.0)), C64::new(0.0, 0.0))];
        for r in per_ray {
            anchors.extend(r?);
        }
        drop(g);
        let asymptotics = estimate_alpha_mu(f);
        Ok(LinearizationModel { f: f.clone(), hprime, anchors, asymptotics })
    }

    pub fn anchors(&self) -> &[(Point, C64)] {
        &self.anchors
    }

    pub fn hprime(&self, p: &Point) -> Result<C64> {
        self.hprime.eval(p)
    }

    pub fn hprime_expr(&self) -> &FunctionExpr {
        &self.hprime
    }

    fn nearest_anchor(&self, p: &Point) -> &(Point, C64) {
        self.anchors
            .iter()
            .min_by(|a, b| (a.0.q - p.q).norm().total_cmp(&(b.0.q - p.q).norm()))
            .expect("anchor table is never empty")
    }

    pub fn h(&self, p: &Point) -> Result<C64> {
        if !p.in_disk() {
            return Err(Error::NotInDisk { z: p.z });
        }
        let (a, ha) = self.nearest_anchor(p);
        Ok(ha + self.integral(a, p)?)
    }

    pub fn h_z(&self, z: C64) -> Result<C64> {
        self.h(&Point::new(z))
    }

    /// `h(b) - h(a)`.
    pub fn integral(&self, a: &Point, b: &Point) -> Result<C64> {
        integrate_segment(a, b, &h_integrand(&self.hprime), QUAD_RTOL)
    }

    pub fn alpha_mu(&self) -> Result<AlphaMu> {
        self.asymptotics.clone()
    }

    /// Newton iteration in `s = log(1 - z)` from `(p, hp)` towards `h = w`.
    fn newton(&self, w: C64, mut p: Point, mut hp: C64, tol: f64) -> Result<(Point, C64)> {
        let fail = |p: &Point| Error::InversionFailure { last: p.z, target: w };
        for _ in 0..NEWTON_ITERS {
            let r = hp - w;
            if r.norm() <= tol {
                return Ok((p, hp));
            }
            let fz = self.f.eval(&p).map_err(|_| fail(&p))?;
            // dh/ds = q/f
            let mut ds = -r * fz / p.q;
            if !(ds.norm().is_finite()) {
                return Err(fail(&p));
            }
            // radial moves may be long (h ~ log q on hyperbolic orbits), turns stay short
            let shrink = (ds.re.abs() / 8.0).max(ds.im.abs()).max(1.0);
            ds /= shrink;
            let mut accepted = false;
            for _ in 0..40 {
                let pn = Point::from_gap(p.q * ds.exp());
                if pn.in_disk() {
                    if let Ok(dh) = self.integral(&p, &pn) {
                        let hn = hp + dh;
                        if (hn - w).norm() < r.norm() {
                            p = pn;
                            hp = hn;
                            accepted = true;
                            break;
                        }
                    }
                }
                ds *= 0.5;
            }
            if !accepted {
                return Err(fail(&p));
            }
        }
        if (hp - w).norm() <= tol {
            Ok((p, hp))
        } else {
            Err(fail(&p))
        }
    }

    /// Solve `h(z) = w` by continuation from `seed` along the segment `[h(seed), w]`.
    pub fn invert_h(&self, w: C64, seed: &Point) -> Result<Point> {
        let h0 = self.h(seed)?;
        self.invert_from(w, *seed, h0)
    }

    pub fn invert_from(&self, w: C64, seed: Point, h_seed: C64) -> Result<Point> {
        let mut p = seed;
        let mut hp = h_seed;
        let mut wc = h_seed;
        let mut steps = 0;
        while wc != w {
            steps += 1;
            if steps > MAX_SUBSTEPS {
                return Err(Error::InversionFailure { last: p.z, target: w });
            }
            let mut dw = w - wc;
            let cap = 0.5 * (1.0 + wc.norm());
            if dw.norm() > cap {
                dw *= cap / dw.norm();
                wc += dw;
            } else {
                wc = w;
            }
            let tol = if wc == w { 1e-9 * (1.0 + w.norm()) } else { 1e-7 * (1.0 + wc.norm()) };
            (p, hp) = self.newton(wc, p, hp, tol)?;
        }
        // polish against a fresh quadrature of h
        let fresh = self.h(&p)?;
        let (p, _) = self.newton(w, p, fresh, INVERT_TOL * w.norm().max(1.0))?;
        Ok(p)
    }

    /// Solve `h(z) = w` from the stored anchors, nearest to `w` first; `h` is univalent, so
    /// whichever continuation converges has found the preimage. The nearest anchors can sit
    /// across a slit of `h(Δ)` from `w`, and failed continuations are cheap, so all are tried.
    pub fn invert_auto(&self, w: C64) -> Result<Point> {
        let mut order: Vec<&(Point, C64)> = self.anchors.iter().collect();
        order.sort_by(|a, b| (a.1 - w).norm().total_cmp(&(b.1 - w).norm()));
        let mut last = Err(Error::InversionFailure { last: C64::new(0.0, 0.0), target: w });
        for (p, hp) in order {
            last = self.invert_from(w, *p, *hp);
            if last.is_ok() {
                break;
            }
        }
        last
    }

    /// `F_t(p) = h^{-1}(h(p) + t)`.
    pub fn abel_flow(&self, p: &Point, t: f64) -> Result<Point> {
        if t == 0.0 {
            return Ok(*p);
        }
        let hp = self.h(p)?;
        self.invert_from(hp + t, *p, hp)
    }
}

impl FlowMap for LinearizationModel {
    fn flow(&self, p: &Point, t: f64) -> Result<Point> {
        self.abel_flow(p, t)
    }

    fn flow_many(&self, p: &Point, ts: &[f64]) -> Result<Vec<Point>> {
        let hp = self.h(p)?;
        let mut out = Vec::with_capacity(ts.len());
        let (mut cur, mut hc) = (*p, hp);
        for t in ts {
            let next = self.invert_from(hp + t, cur, hc)?;
            hc = hp + t;
            cur = next;
            out.push(next);
        }
        Ok(out)
    }
}

pub fn invert_h(model: &LinearizationModel, w: C64, seed: C64) -> Result<C64> {
    Ok(model.invert_h(w, &DiskPoint::new(seed)?.point())?.z)
}

pub fn abel_flow(model: &LinearizationModel, z: C64, t: f64) -> Result<C64> {
    Ok(model.abel_flow(&DiskPoint::new(z)?.point(), t)?.z)
}

/// `|h(F_t(z)) - h(z) - t|` with `F_t` from the ODE integrator.
pub fn abel_residual(model: &LinearizationModel, z: C64, t: f64) -> Result<f64> {
    let p = DiskPoint::new(z)?.point();
    let ft = OdeFlow::new(&model.f).flow(&p, t)?;
    Ok((model.h(&ft)? - model.h(&p)? - t).norm())
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Power-law exponent of `|g|` along the radius to 1, with the R² of the fit on k = 8..24.
/// Returns the Aitken-extrapolated local slope when it converges, the fitted slope otherwise.
pub(crate) fn radial_exponent<G: Fn(&Point) -> Result<C64>>(g: G) -> Result<(f64, f64)> {
    let mut logs = vec![];
    for k in 4..=40u32 {
        let p = Point::from_gap(C64::new(2f64.powi(-(k as i32)), 0.0));
        let v = g(&p)?;
        logs.push((k, v.norm().ln()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = logs
        .iter()
        .filter(|(k, _)| (8..=24).contains(k))
        .map(|(k, y)| (-(*k as f64) * std::f64::consts::LN_2, *y))
        .unzip();
    let (slope, r2) = least_squares(&xs, &ys);
    let local: Vec<C64> = logs.windows(2).map(|w| C64::new((w[1].1 - w[0].1) / -std::f64::consts::LN_2, 0.0)).collect();
    let ex = extrapolate(&local, 1e-7);
    let s = if ex.converged && !ex.infinite { ex.value.re } else { slope };
    Ok((s, r2))
}

/// `(α, μ)` with `μ = ∠lim (1-z)^{1+α} h'(z)`; hyperbolic generators get `α = 0, μ = 1/β`.
pub fn estimate_alpha_mu(f: &FunctionExpr) -> Result<AlphaMu> {
    let beta_est =
        boundary_limit_with(|s| Ok(f.eval(&s.pt)? / -s.pt.q), C64::new(1.0, 0.0), Approach::Radial, 4..=40, LIMIT_TOL);
    if beta_est.converged && !beta_est.infinite && beta_est.value.re > BETA_CUT {
        let beta = beta_est.value.re;
        return Ok(AlphaMu {
            alpha: 0.0,
            mu: C64::new(1.0 / beta, 0.0),
            class: MuClass::Sigma0,
            beta,
            fit_r2: 1.0,
            mu_converged: true,
        });
    }
    let hp = |p: &Point| -> Result<C64> { Ok(-1.0 / f.eval(p)?) };
    let (slope, r2) = radial_exponent(hp)?;
    if r2 < 0.9999 {
        return Err(Error::Undetermined { what: format!("power-law fit for alpha (R^2 = {r2})") });
    }
    let alpha = -slope - 1.0;
    if !(-0.05..=2.05).contains(&alpha) {
        return Err(Error::NotInClass { alpha });
    }
    let mu_along = |ap: Approach| {
        boundary_limit_with(
            |s| Ok(crate::expr::eval::pow(s.pt.q, C64::new(1.0 + alpha, 0.0)) * hp(&s.pt)?),
            C64::new(1.0, 0.0),
            ap,
            4..=40,
            LIMIT_TOL,
        )
    };
    let radial = mu_along(Approach::Radial);
    let mu = radial.value;
    let agrees =
        |e: &BoundaryLimitEstimate| e.converged && !e.infinite && (e.value - mu).norm() <= 1e-4 * mu.norm().max(1e-12);
    let stolz = agrees(&mu_along(Approach::StolzRay(PI / 3.0))) && agrees(&mu_along(Approach::StolzRay(-PI / 3.0)));
    let class = if !radial.converged || radial.infinite {
        MuClass::Undetermined
    } else if stolz && agrees(&mu_along(Approach::TangentialCurve(1.0))) {
        MuClass::SigmaAlphaUnrestricted
    } else if stolz {
        MuClass::SigmaAlphaAngular
    } else {
        MuClass::Undetermined
    };
    Ok(AlphaMu {
        alpha,
        mu,
        class,
        beta: beta_est.value.re.max(0.0),
        fit_r2: r2,
        mu_converged: radial.converged && !radial.infinite,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HalfPlane {
    Above(f64),
    Below(f64),
    None,
}

impl HalfPlane {
    pub fn label(&self) -> String {
        match self {
            HalfPlane::Above(c) => format!("above({c})"),
            HalfPlane::Below(c) => format!("below({c})"),
            HalfPlane::None => "none".into(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            HalfPlane::Above(c) => json!({"side": "above", "c": real(*c)}),
            HalfPlane::Below(c) => json!({"side": "below", "c": real(*c)}),
            HalfPlane::None => json!("none"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlanarDomainStats {
    pub sup_im: f64,
    pub inf_im: f64,
    pub strip_width: f64,
    pub half_plane: HalfPlane,
    pub midline_level: f64,
    /// Circle-by-circle extremes used for the extrapolation.
    pub sup_series: Vec<f64>,
    pub inf_series: Vec<f64>,
    /// Sample points where `Im h` is largest / smallest on each circle.
    pub sup_points: Vec<Point>,
    pub inf_points: Vec<Point>,
}

/// Angles on a circle: `n` uniform ones plus a geometric cluster at 0 down to `scale`.
pub(crate) fn circle_angles(n: usize, scale: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|j| -PI + 2.0 * PI * j as f64 / n as f64).collect();
    v.push(PI);
    let mut m = 1;
    loop {
        let th = PI * 2f64.powf(-(m as f64) / 4.0);
        if th < 0.25 * scale {
            break;
        }
        v.push(th);
        v.push(-th);
        m += 1;
    }
    v.push(0.0);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    v
}

/// Point `r e^{iθ}` with the gap computed without cancellation.
pub(crate) fn polar_point(gap: f64, th: f64) -> Point {
    let r = 1.0 - gap;
    let s = (0.5 * th).sin();
    Point::from_gap(C64::new(gap + 2.0 * r * s * s, -r * th.sin()))
}

fn golden_max(mut a: f64, mut b: f64, g: impl Fn(f64) -> Option<f64>) -> Option<f64> {
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = g(c)?;
    let mut fd = g(d)?;
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = g(d)?;
        }
    }
    Some(fc.max(fd))
}

/// Extremes of `Im h` on the circle of radius `1 - gap`, with the sample points attaining
/// them.
fn circle_extremes(model: &LinearizationModel, gap: f64, n: usize) -> Result<(f64, f64, Point, Point)> {
    let angles = circle_angles(n, gap);
    let zero = angles.iter().position(|a| *a == 0.0).expect("0 is always sampled");
    let mut hv = vec![C64::new(0.0, 0.0); angles.len()];
    let pts: Vec<Point> = angles.iter().map(|t| polar_point(gap, *t)).collect();
    hv[zero] = model.h(&pts[zero])?;
    for i in zero + 1..angles.len() {
        hv[i] = hv[i - 1] + model.integral(&pts[i - 1], &pts[i])?;
    }
    for i in (0..zero).rev() {
        hv[i] = hv[i + 1] + model.integral(&pts[i + 1], &pts[i])?;
    }
    let mut best = [f64::NEG_INFINITY, f64::NEG_INFINITY];
    let mut at = [pts[zero], pts[zero]];
    for (sgn, slot) in [(1.0, 0), (-1.0, 1)] {
        let (imax, vmax) = hv
            .iter()
            .enumerate()
            .map(|(i, h)| (i, sgn * h.im))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty circle");
        let mut v = vmax;
        at[slot] = pts[imax];
        let lo = imax.saturating_sub(1);
        let hi = (imax + 1).min(angles.len() - 1);
        if hi > lo {
            let (p0, h0) = (pts[lo], hv[lo]);
            let g = |th: f64| -> Option<f64> {
                let p = polar_point(gap, th);
                Some(sgn * (h0 + model.integral(&p0, &p).ok()?).im)
            };
            if let Some(r) = golden_max(angles[lo], angles[hi], g) {
                v = v.max(r);
            }
        }
        best[slot] = v;
    }
    Ok((best[0], -best[1], at[0], at[1]))
}

/// Limit of a monotone sequence of extremes: infinite when the increments stop shrinking
/// geometrically or the magnitude passes the infinity threshold.
fn extreme_limit(seq: &[f64], sgn: f64) -> f64 {
    let n = seq.len();
    let last = seq[n - 1];
    if last.abs() > NUMERICALLY_INFINITE {
        return sgn * f64::INFINITY;
    }
    let inc: Vec<f64> = seq.windows(2).map(|w| sgn * (w[1] - w[0])).collect();
    let m = inc.len();
    let flat = |d: f64| d.abs() <= 1e-9 * last.abs().max(1.0);
    if m >= 3 && !flat(inc[m - 1]) && inc[m - 1] > 0.0 && inc[m - 2] > 0.0 && inc[m - 1] >= 0.95 * inc[m - 2] {
        return sgn * f64::INFINITY;
    }
    let c: Vec<C64> = seq.iter().map(|v| C64::new(*v, 0.0)).collect();
    let ex = extrapolate(&c, 1e-6);
    if ex.value.re.is_finite() {
        ex.value.re
    } else {
        last
    }
}

pub fn planar_domain_stats(model: &LinearizationModel, boundary_density: usize) -> Result<PlanarDomainStats> {
    let n = boundary_density.max(16);
    let ks: Vec<i32> = (1..=24).collect();
    let ext = crate::par_map(&ks, |k| circle_extremes(model, 2f64.powi(-k), n));
    let mut sup_series = vec![];
    let mut inf_series = vec![];
    let mut sup_points = vec![];
    let mut inf_points = vec![];
    for e in ext {
        let (s, i, ps, pi) = e?;
        sup_series.push(s);
        inf_series.push(i);
        sup_points.push(ps);
        inf_points.push(pi);
    }
    // the extremes over the closed disk of radius r grow with r
    for i in 1..sup_series.len() {
        sup_series[i] = sup_series[i].max(sup_series[i - 1]);
        inf_series[i] = inf_series[i].min(inf_series[i - 1]);
    }
    let sup_im = extreme_limit(&sup_series, 1.0);
    let inf_im = extreme_limit(&inf_series, -1.0);
    let strip_width = sup_im - inf_im;
    let half_plane = match (sup_im.is_finite(), inf_im.is_finite()) {
        (_, true) => HalfPlane::Above(inf_im),
        (true, false) => HalfPlane::Below(sup_im),
        (false, false) => HalfPlane::None,
    };
    let midline_level = match (sup_im.is_finite(), inf_im.is_finite()) {
        (true, true) => 0.5 * (sup_im + inf_im),
        (true, false) => sup_im,
        (false, true) => inf_im,
        (false, false) => 0.0,
    };
    Ok(PlanarDomainStats {
        sup_im,
        inf_im,
        strip_width,
        half_plane,
        midline_level,
        sup_series,
        inf_series,
        sup_points,
        inf_points,
    })
}

/// `sup (1-|z|^2)|h'(z)|` for an arbitrary derivative `hp`.
pub fn bloch_norm_of<G: Fn(&Point) -> Result<C64> + Sync>(hp: G, grid_density: usize) -> f64 {
    let n = grid_density.max(16);
    let js: Vec<i32> = (0..=30).collect();
    let per_circle = crate::par_map(&js, |j| {
        let gap = 2f64.powi(-j);
        let angles = if *j == 0 { vec![0.0] } else { circle_angles(n, gap) };
        let val = |th: f64| -> Option<f64> {
            let p = if *j == 0 { Point::new(C64::new(0.0, 0.0)) } else { polar_point(gap, th) };
            hp(&p).ok().map(|v| p.one_minus_abs_sq() * v.norm())
        };
        let vals: Vec<(f64, f64)> = angles.iter().filter_map(|t| val(*t).map(|v| (*t, v))).collect();
        let Some(&(tb, vb)) = vals.iter().max_by(|a, b| a.1.total_cmp(&b.1)) else { return 0.0 };
        if *j == 0 {
            return vb;
        }
        let step = 2.0 * PI / n as f64;
        let w = step.min(tb.abs().max(gap));
        golden_max(tb - w, tb + w, val).map_or(vb, |r| r.max(vb))
    });
    let n = per_circle.len();
    let mut running = per_circle.clone();
    for i in 1..n {
        running[i] = running[i].max(running[i - 1]);
    }
    let last = running[n - 1];
    if last > NUMERICALLY_INFINITE {
        return f64::INFINITY;
    }
    let inc: Vec<f64> = running.windows(2).map(|w| w[1] - w[0]).collect();
    let m = inc.len();
    if inc[m - 1] > 1e-9 * last.max(1.0) && inc[m - 1] >= 0.95 * inc[m - 2] {
        return f64::INFINITY;
    }
    last
}

pub fn bloch_norm(model: &LinearizationModel, grid_density: usize) -> f64 {
    bloch_norm_of(|p| model.hprime(p), grid_density)
}

/// Radial limit of `h(z)/((z-1)h'(z)) = h f/(1-z)`; tends to `-1/α`.
pub fn visser_ostrovskii(model: &LinearizationModel) -> BoundaryLimitEstimate {
    boundary_limit_with(
        |s| Ok(model.h(&s.pt)? * model.f.eval(&s.pt)? / s.pt.q),
        C64::new(1.0, 0.0),
        Approach::Radial,
        4..=40,
        LIMIT_TOL,
    )
}

pub fn linearization_report(model: &LinearizationModel, density: usize) -> Result<Value> {
    let am = model.alpha_mu()?;
    let stats = planar_domain_stats(model, density)?;
    let bloch = bloch_norm(model, density);
    let vo = visser_ostrovskii(model);
    Ok(json!({
        "alpha": am.alpha,
        "mu": complex(am.mu),
        "mu_class": am.class.label(),
        "strip_width": real(stats.strip_width),
        "sup_im": real(stats.sup_im),
        "inf_im": real(stats.inf_im),
        "half_plane": stats.half_plane.to_json(),
        "bloch_norm": real(bloch),
        "visser_ostrovskii": complex(vo.value),
        "visser_ostrovskii_converged": vo.converged,
    }))
}

/// Sample point helper re-exported for callers probing along approach paths.
pub fn radial_point(k: u32) -> Point {
    approach_sample(C64::new(1.0, 0.0), Approach::Radial, k).pt
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> FunctionExpr {
        FunctionExpr::parse(s).unwrap()
    }

    const QUADRANT: &str = "-(1-z)^2*sqrt((1+z)/(1-z))*exp(-i*pi/4)";

    #[test]
    fn closed_form_values() {
        let h = abel_h(&parse("i*(1-z)^2"), C64::new(0.5, 0.0)).unwrap();
        assert!((h - C64::new(0.0, 1.0)).norm() < 1e-13);
        let hq = abel_h(&parse(QUADRANT), C64::new(0.5, 0.0)).unwrap();
        let ex = C64::from_polar(1.0, PI / 4.0) * (3f64.sqrt() - 1.0);
        assert!((hq - ex).norm() < 1e-12);
        assert_eq!(abel_h(&parse(QUADRANT), C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn model_matches_direct_quadrature() {
        let f = parse("-(1-z)^2*(1-z^2)/(1+z^2)");
        let m = LinearizationModel::new(&f).unwrap();
        for z in [C64::new(0.3, 0.4), C64::new(-0.7, 0.1), C64::new(0.95, -0.2)] {
            let a = m.h_z(z).unwrap();
            let b = abel_h(&f, z).unwrap();
            assert!((a - b).norm() < 1e-11 * b.norm().max(1.0));
        }
        // closed form z/(2(1-z)^2) + log((1+z)/(1-z))/4
        let z = C64::new(0.6, 0.3);
        let q = 1.0 - z;
        let ex = z / (2.0 * q * q) + ((1.0 + z) / q).ln() / 4.0;
        assert!((m.h_z(z).unwrap() - ex).norm() < 1e-11);
    }

    #[test]
    fn inversion_round_trip() {
        let m = LinearizationModel::new(&parse("i*(1-z)^2")).unwrap();
        let w = m.h_z(C64::new(0.5, 0.0)).unwrap();
        let z = invert_h(&m, w, C64::new(0.0, 0.0)).unwrap();
        assert!((z - 0.5).norm() < 1e-10);
        let z3 = abel_flow(&m, C64::new(0.0, 0.0), 3.0).unwrap();
        assert!((z3 - C64::new(3.0, 0.0) / C64::new(3.0, 1.0)).norm() < 1e-10);
        assert_eq!(invert_h(&m, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn quadrant_far_flow() {
        let m = LinearizationModel::new(&parse(QUADRANT)).unwrap();
        let p = m.abel_flow(&Point::new(C64::new(0.0, 0.0)), 1e6).unwrap();
        // closed-form inverse: sqrt(C) = 1 + e^{-iπ/4} w
        let w = C64::new(1e6, 0.0);
        let s = 1.0 + C64::from_polar(1.0, -PI / 4.0) * w;
        let c = s * s;
        let q_exact = 2.0 / (c + 1.0);
        assert!((p.q - q_exact).norm() < 1e-9 * q_exact.norm(), "{} vs {}", p.q, q_exact);
        let back = m.abel_flow(&Point::new(C64::new(0.0, 0.0)), -0.5).unwrap();
        assert!(back.in_disk());
    }

    #[test]
    fn alpha_mu_examples() {
        let q = estimate_alpha_mu(&parse(QUADRANT)).unwrap();
        assert!((q.alpha - 0.5).abs() < 1e-6);
        assert!((q.mu.arg() - PI / 4.0).abs() < 1e-6);
        assert_eq!(q.class, MuClass::SigmaAlphaUnrestricted);
        let f2 = estimate_alpha_mu(&parse("-(1-z)^2*(1-z^2)/(1+z^2)")).unwrap();
        assert!((f2.alpha - 2.0).abs() < 1e-6 && (f2.mu - 1.0).norm() < 1e-6);
        let hyp = estimate_alpha_mu(&parse("0.5*(z^2-1)")).unwrap();
        assert_eq!(hyp.alpha, 0.0);
        assert!((hyp.mu - 1.0).norm() < 1e-9);
        let ex10 = estimate_alpha_mu(&parse("-(1-z)^2*(1-exp(-(1+z)/(1-z)))^0.5*(1-z)^0.5")).unwrap();
        assert!((ex10.alpha - 1.5).abs() < 1e-6);
        assert_eq!(ex10.class, MuClass::SigmaAlphaAngular);
    }

    #[test]
    fn strip_and_bloch() {
        let m = LinearizationModel::new(&parse("0.5*(z^2-1)")).unwrap();
        let st = planar_domain_stats(&m, 32).unwrap();
        assert!((st.sup_im - PI / 2.0).abs() < 1e-3, "{st:?}");
        assert!((st.strip_width - PI).abs() < 1e-2, "{st:?}");
        let b = bloch_norm(&m, 32);
        assert!((b - 2.0).abs() < 1e-6, "{b}");
        assert_eq!(bloch_norm_of(|_| Ok(C64::new(1.0, 0.0)), 16), 1.0);
        let auto = LinearizationModel::new(&parse("i*(1-z)^2")).unwrap();
        assert!(bloch_norm(&auto, 16).is_infinite());
    }

    #[test]
    fn quadrant_half_plane() {
        let m = LinearizationModel::new(&parse(QUADRANT)).unwrap();
        let st = planar_domain_stats(&m, 32).unwrap();
        assert!(st.sup_im.is_infinite());
        assert!((st.inf_im + 0.5f64.sqrt()).abs() < 1e-3, "{st:?}");
        assert!(matches!(st.half_plane, HalfPlane::Above(_)));
        let f2 = LinearizationModel::new(&parse("-(1-z)^2*(1-z^2)/(1+z^2)")).unwrap();
        let s2 = planar_domain_stats(&f2, 32).unwrap();
        assert_eq!(s2.half_plane, HalfPlane::None, "{s2:?}");
    }

    #[test]
    fn visser_ostrovskii_values() {
        let auto = LinearizationModel::new(&parse("i*(1-z)^2")).unwrap();
        let v = visser_ostrovskii(&auto);
        assert!((v.value + 1.0).norm() < 1e-6);
        let q = LinearizationModel::new(&parse(QUADRANT)).unwrap();
        assert!((visser_ostrovskii(&q).value.norm() - 2.0).abs() < 1e-3);
    }
}
