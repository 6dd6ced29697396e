//! Semigroup trajectories `F_t(z)` and their boundary diagnostics.

use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::geometry::{horocycle_distance_pt, DiskPoint, Point, C64};
use crate::limits::{extrapolate, NUMERICALLY_INFINITE};
use crate::ode::{integrate_gap, OdeOptions, Termination, Trajectory};
use crate::report::{fmt_f64, real};
use serde_json::{json, Value};

pub use crate::ode::{Direction, OdeOptions as FlowOptions};

/// Solve `u' = -f(u)`, `u(0) = z0` up to `t_end` (negative for a backward run).
pub fn integrate(f: &FunctionExpr, z0: C64, t_end: f64, opts: &OdeOptions) -> Result<Trajectory> {
    integrate_from(f, DiskPoint::new(z0)?.point(), t_end, opts)
}

pub fn integrate_from(f: &FunctionExpr, p0: Point, t_end: f64, opts: &OdeOptions) -> Result<Trajectory> {
    if !p0.in_disk() {
        return Err(Error::NotInDisk { z: p0.z });
    }
    Ok(integrate_gap(f, p0, t_end, &[], opts, &f.to_string())?.0)
}

/// Anything that can move a point along the semigroup.
pub trait FlowMap {
    fn flow(&self, p: &Point, t: f64) -> Result<Point>;

    /// `F_t(p)` for increasing times `ts`.
    fn flow_many(&self, p: &Point, ts: &[f64]) -> Result<Vec<Point>> {
        ts.iter().map(|t| self.flow(p, *t)).collect()
    }
}

/// Flow computed by integrating the Cauchy problem.
pub struct OdeFlow<'a> {
    pub f: &'a FunctionExpr,
    pub opts: OdeOptions,
}

impl<'a> OdeFlow<'a> {
    pub fn new(f: &'a FunctionExpr) -> Self {
        OdeFlow { f, opts: OdeOptions { record: false, ..OdeOptions::default() } }
    }
}

impl FlowMap for OdeFlow<'_> {
    fn flow(&self, p: &Point, t: f64) -> Result<Point> {
        if t == 0.0 {
            return Ok(*p);
        }
        let (tr, _) = integrate_gap(self.f, *p, t, &[], &self.opts, "")?;
        let (te, pt) = tr.last();
        if te != t {
            return Err(Error::NotInDisk { z: pt.z });
        }
        Ok(pt)
    }

    fn flow_many(&self, p: &Point, ts: &[f64]) -> Result<Vec<Point>> {
        let Some(&t_end) = ts.last() else { return Ok(vec![]) };
        let (_, hits) = integrate_gap(self.f, *p, t_end, ts, &self.opts, "")?;
        if hits.len() != ts.len() {
            let z = hits.last().map_or(p.z, |h| h.1.z);
            return Err(Error::NotInDisk { z });
        }
        Ok(hits.into_iter().map(|h| h.1).collect())
    }
}

pub fn flow_point(f: &FunctionExpr, z: C64, t: f64) -> Result<C64> {
    Ok(OdeFlow::new(f).flow(&DiskPoint::new(z)?.point(), t)?.z)
}

/// `|F_{t+s}(z) - F_t(F_s(z))|`.
pub fn semigroup_residual(f: &FunctionExpr, z: C64, t: f64, s: f64) -> Result<f64> {
    let fl = OdeFlow::new(f);
    let p = DiskPoint::new(z)?.point();
    let direct = fl.flow(&p, t + s)?;
    let composed = fl.flow(&fl.flow(&p, s)?, t)?;
    Ok((direct.q - composed.q).norm())
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t,re,im,d,abs1mz\n");
    for (t, p) in &tr.samples {
        let d = horocycle_distance_pt(p).unwrap_or(f64::INFINITY);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(*t),
            fmt_f64(p.z.re),
            fmt_f64(p.z.im),
            fmt_f64(d),
            fmt_f64(p.q.norm())
        ));
    }
    out
}

pub fn trajectory_json(tr: &Trajectory) -> Value {
    let (t, p) = tr.last();
    json!({
        "generator": tr.generator_id,
        "direction": match tr.direction { Direction::Forward => "forward", Direction::Backward => "backward" },
        "termination": tr.termination.label(),
        "tol": tr.tol,
        "samples": tr.samples.len(),
        "t_final": t,
        "z_final": crate::report::complex(p.z),
        "abs1mz_final": p.q.norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Nontangential,
    Tangential,
    StronglyTangential,
    Undetermined,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Nontangential => "nontangential",
            Regime::Tangential => "tangential",
            Regime::StronglyTangential => "strongly-tangential",
            Regime::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceDiagnostics {
    /// `ε(z) = lim d(F_t(z))`.
    pub d_limit: f64,
    /// `sup t(1-|F_t|)/|1-F_t|` over the sampled times.
    pub m_estimate: f64,
    /// Limit of the same statistic; infinite when it keeps growing.
    pub l_estimate: f64,
    pub arg_limit: f64,
    pub ratio_limit: f64,
    pub regime: Regime,
    pub times: Vec<f64>,
    /// `t(1-|F_t|)/|1-F_t|` at `times`.
    pub m_series: Vec<f64>,
    pub d_series: Vec<f64>,
}

impl ConvergenceDiagnostics {
    pub fn to_json(&self) -> Value {
        json!({
            "d_limit": real(self.d_limit),
            "M_estimate": real(self.m_estimate),
            "L_estimate": real(self.l_estimate),
            "arg_limit": real(self.arg_limit),
            "ratio_limit": real(self.ratio_limit),
            "regime": self.regime.label(),
        })
    }
}

const D_STRONG: f64 = 1e-6;

fn limit_of(seq: &[f64]) -> (f64, bool) {
    let c: Vec<C64> = seq.iter().map(|v| C64::new(*v, 0.0)).collect();
    let ex = extrapolate(&c, 1e-4);
    (ex.value.re, ex.converged)
}

/// Sample the trajectory of `z0` at `t = 2^j` up to `horizon` and extrapolate the boundary
/// statistics.
pub fn convergence_profile_with(flow: &dyn FlowMap, z0: C64, horizon: f64) -> Result<ConvergenceDiagnostics> {
    let p0 = DiskPoint::new(z0)?.point();
    let mut times = vec![];
    let mut t = 1.0;
    while t <= horizon * (1.0 + 1e-12) {
        times.push(t);
        t *= 2.0;
    }
    let pts = flow.flow_many(&p0, &times)?;
    let mut d = vec![];
    let mut ratio = vec![];
    let mut m = vec![];
    let mut arg = vec![];
    for (t, p) in times.iter().zip(&pts) {
        let dd = horocycle_distance_pt(p)?;
        let r = p.boundary_gap() / p.q.norm();
        d.push(dd);
        ratio.push(r);
        m.push(t * r);
        arg.push(p.q.arg());
    }
    let m_estimate = m.iter().cloned().fold(0.0, f64::max);
    if times.len() < 6 {
        return Ok(ConvergenceDiagnostics {
            d_limit: d.last().copied().unwrap_or(f64::NAN),
            m_estimate,
            l_estimate: m.last().copied().unwrap_or(f64::NAN),
            arg_limit: arg.last().copied().unwrap_or(f64::NAN),
            ratio_limit: ratio.last().copied().unwrap_or(f64::NAN),
            regime: Regime::Undetermined,
            times,
            m_series: m,
            d_series: d,
        });
    }
    let (d_lim, d_ok) = limit_of(&d);
    let (r_lim, r_ok) = limit_of(&ratio);
    let (a_lim, _) = limit_of(&arg);
    // M_t grows linearly for nontangential orbits; doubling ratio near 2 means divergence
    let n = m.len();
    let growth = m[n - 1] / m[n - 2].max(f64::MIN_POSITIVE);
    let l_estimate = if growth > 1.5 || m[n - 1] > NUMERICALLY_INFINITE { f64::INFINITY } else { limit_of(&m).0 };
    let d_lim = d_lim.max(0.0);
    let r_lim = r_lim.max(0.0);
    let regime = if d_ok && d_lim > D_STRONG {
        Regime::StronglyTangential
    } else if !r_ok && !d_ok {
        Regime::Undetermined
    } else if r_lim < 1e-4 {
        Regime::Tangential
    } else if r_lim > 1e-3 {
        Regime::Nontangential
    } else {
        Regime::Undetermined
    };
    Ok(ConvergenceDiagnostics {
        d_limit: d_lim,
        m_estimate,
        l_estimate,
        arg_limit: a_lim,
        ratio_limit: r_lim,
        regime,
        times,
        m_series: m,
        d_series: d,
    })
}

pub fn convergence_profile(f: &FunctionExpr, z0: C64, horizon: f64) -> Result<ConvergenceDiagnostics> {
    convergence_profile_with(&OdeFlow::new(f), z0, horizon)
}

#[derive(Clone, Debug)]
pub struct BackwardReport {
    pub extendable: bool,
    pub limit_point: Option<C64>,
    /// Time at which a non-extendable orbit leaves the disk.
    pub exit_time: Option<f64>,
    pub termination: Termination,
    pub last: Point,
}

impl BackwardReport {
    pub fn to_json(&self) -> Value {
        json!({
            "extendable": self.extendable,
            "limit_point": self.limit_point.map(crate::report::complex),
            "exit_time": self.exit_time.map(real),
            "termination": self.termination.label(),
        })
    }
}

/// Time the backward orbit would need to cross the remaining gap at its current radial speed.
fn time_to_exit(f: &FunctionExpr, p: &Point) -> Option<f64> {
    let v = f.eval(p).ok()?;
    let radial = (p.z.conj() * v).re / p.z.norm();
    Some(p.boundary_gap() / radial.abs())
}

/// Run the backward flow from `z0` for `horizon` time units and decide whether the orbit
/// stays in the disk.
///
/// An orbit tending to a boundary point as `t -> -inf` also hits the exit margin at some
/// finite time; it is told apart from a genuine exit by how the time-to-exit scales with the
/// gap (constant or growing for an asymptotic approach, proportional to the gap for a
/// transversal crossing).
pub fn backward_extendability(f: &FunctionExpr, z0: C64, horizon: f64) -> Result<BackwardReport> {
    backward_extendability_from(f, DiskPoint::new(z0)?.point(), horizon)
}

pub fn backward_extendability_from(f: &FunctionExpr, p0: Point, horizon: f64) -> Result<BackwardReport> {
    let opts = OdeOptions::default();
    let (tr, _) = integrate_gap(f, p0, -horizon.abs(), &[], &opts, &f.to_string())?;
    let (t_last, last) = tr.last();
    let limit_of_last = |p: &Point| (p.boundary_gap() < 1e-3).then(|| p.z / p.z.norm());
    match tr.termination {
        Termination::HorizonReached | Termination::Stagnation => Ok(BackwardReport {
            extendable: true,
            limit_point: limit_of_last(&last),
            exit_time: None,
            termination: tr.termination,
            last,
        }),
        Termination::BoundaryExit => {
            let first = tr.samples.iter().find(|(_, p)| p.boundary_gap() < 1e-3).map(|s| s.1);
            let asymptotic = match first {
                Some(a) if a.boundary_gap() > 10.0 * last.boundary_gap() => {
                    match (time_to_exit(f, &a), time_to_exit(f, &last)) {
                        (Some(ta), Some(tb)) => tb / ta > (last.boundary_gap() / a.boundary_gap()).sqrt(),
                        _ => false,
                    }
                }
                _ => false,
            };
            Ok(BackwardReport {
                extendable: asymptotic,
                limit_point: if asymptotic { limit_of_last(&last) } else { None },
                exit_time: (!asymptotic).then_some(t_last),
                termination: tr.termination,
                last,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> FunctionExpr {
        FunctionExpr::parse(s).unwrap()
    }

    #[test]
    fn automorphism_closed_form() {
        let f = parse("i*(1-z)^2");
        let tr = integrate(&f, C64::new(0.0, 0.0), 10.0, &OdeOptions::default()).unwrap();
        let (t, p) = tr.last();
        assert_eq!(t, 10.0);
        let ex = C64::new(10.0, 0.0) / C64::new(10.0, 1.0);
        assert!((p.z - ex).norm() < 1e-9);
        assert_eq!(tr.termination, Termination::HorizonReached);
    }

    #[test]
    fn hyperbolic_cayley_growth() {
        let f = parse("0.5*(z^2-1)");
        let u = flow_point(&f, C64::new(0.0, 0.0), 5.0).unwrap();
        let w = crate::geometry::cayley(u).unwrap();
        assert!((w - 5f64.exp()).norm() < 1e-9 * 5f64.exp());
    }

    #[test]
    fn f2_converges_to_one() {
        let f = parse("-(1-z)^2*(1-z^2)/(1+z^2)");
        let tr = integrate(&f, C64::new(0.0, 0.0), 1e3, &OdeOptions::default()).unwrap();
        let gaps: Vec<f64> = tr.samples.iter().map(|s| s.1.q.norm()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(*gaps.last().unwrap() < 0.03);
    }

    #[test]
    fn semigroup_residuals() {
        let f2 = parse("-(1-z)^2*(1-z^2)/(1+z^2)");
        assert!(semigroup_residual(&f2, C64::new(0.0, 0.0), 2.0, 3.0).unwrap() < 1e-8);
        let a = parse("i*(1-z)^2");
        assert!(semigroup_residual(&a, C64::new(0.2, 0.1), 1.0, 1.0).unwrap() < 1e-9);
        let quad = parse("-(1-z)^2*sqrt((1+z)/(1-z))*exp(-i*pi/4)");
        assert_eq!(semigroup_residual(&quad, C64::new(0.0, 0.0), 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let f = parse("i*(1-z)^2");
        let tr = integrate(&f, C64::new(0.0, 0.0), 1.0, &OdeOptions::default()).unwrap();
        let csv = trajectory_csv(&tr);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,re,im,d,abs1mz"));
        assert_eq!(lines.count(), tr.samples.len());
    }

    #[test]
    fn profiles() {
        let a = convergence_profile(&parse("i*(1-z)^2"), C64::new(0.0, 0.0), 1e6).unwrap();
        assert!((a.d_limit - 1.0).abs() < 1e-9);
        assert_eq!(a.regime, Regime::StronglyTangential);
        let f2 = convergence_profile(&parse("-(1-z)^2*(1-z^2)/(1+z^2)"), C64::new(0.0, 0.0), 1e6).unwrap();
        assert_eq!(f2.regime, Regime::Nontangential);
        assert!(f2.arg_limit.abs() < 0.02);
        assert!(f2.l_estimate.is_infinite());
    }

    #[test]
    fn backward_runs() {
        let a = backward_extendability(&parse("i*(1-z)^2"), C64::new(0.3, 0.2), 1e4).unwrap();
        assert!(a.extendable);
        if let Some(l) = a.limit_point {
            assert!((l - 1.0).norm() < 1e-3);
        }
        let f2 = backward_extendability(&parse("-(1-z)^2*(1-z^2)/(1+z^2)"), C64::new(0.5, 0.0), 1e3).unwrap();
        assert!(f2.extendable);
        assert!((f2.limit_point.unwrap() + 1.0).norm() < 1e-3);
        // h(D) is the half-plane Re w > -1/2, left in finite backward time
        let out = backward_extendability(&parse("-(1-z)^2"), C64::new(0.0, 0.5), 1e3).unwrap();
        assert!(!out.extendable);
        let te = out.exit_time.unwrap();
        assert!(te < 0.0 && te > -2.0, "{te}");
    }

    #[test]
    fn deep_hyperbolic_orbit() {
        // u = tanh(t), so 1 - u = 2/(e^{2t} + 1)
        let f = parse("z^2-1");
        let p = OdeFlow::new(&f).flow(&Point::new(C64::new(0.0, 0.0)), 300.0).unwrap();
        let exact = 2.0 * (-600f64).exp();
        assert!((p.q.re / exact - 1.0).abs() < 1e-8, "{}", p.q);
        // this form squares 1 - z and underflows near 1e-162; it must not stall silently
        let g = parse("-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)");
        let r = OdeFlow::new(&g).flow(&Point::new(C64::new(0.0, 0.0)), 300.0);
        assert!(matches!(r, Err(Error::Undetermined { .. })), "{r:?}");
    }
}
