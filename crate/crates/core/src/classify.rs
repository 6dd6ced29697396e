//! Boundary asymptotics of a generator at its Denjoy–Wolff point and the criterion checks
//! built on them.

use crate::abel::{estimate_alpha_mu, AlphaMu};
use crate::error::Result;
use crate::expr::FunctionExpr;
use crate::flow::{convergence_profile, ConvergenceDiagnostics, FlowMap, Regime};
use crate::geometry::{DiskPoint, C64};
use crate::limits::{boundary_limit, boundary_limit_with, Approach, LIMIT_TOL};
use crate::report::{complex, real};
use serde_json::{json, Value};
use std::f64::consts::FRAC_PI_2;

pub const BETA_THRESHOLD: f64 = 1e-8;
/// Uniform slack of the angle inequalities.
pub const ANGLE_SLACK: f64 = 0.02;
pub const RIGIDITY_SLACK: f64 = 1e-9;
pub const DEFAULT_HORIZON: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemigroupType {
    Hyperbolic,
    Parabolic,
}

impl SemigroupType {
    pub fn label(&self) -> &'static str {
        match self {
            SemigroupType::Hyperbolic => "hyperbolic",
            SemigroupType::Parabolic => "parabolic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticProfile {
    pub beta: f64,
    pub kind: SemigroupType,
    pub alpha: Option<f64>,
    pub mu: Option<C64>,
    /// `-1/μ`.
    pub a: Option<C64>,
    pub regime: Regime,
    /// Coefficient of `(z-1)^2` at 1.
    pub taylor_a: Option<C64>,
    /// Coefficient of `(1-z)^3` at 1.
    pub taylor_b: Option<C64>,
    pub diagnostics: Option<ConvergenceDiagnostics>,
    pub alpha_mu: Option<AlphaMu>,
    pub notes: Vec<String>,
}

/// Verdict of one criterion with the margin by which it holds (positive) or fails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub verdict: Option<bool>,
    pub margin: f64,
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": match self.verdict { Some(true) => json!(true), Some(false) => json!(false), None => json!("undetermined") },
            "margin": real(self.margin),
        })
    }

    fn undetermined() -> Self {
        Verdict { verdict: None, margin: f64::NAN }
    }
}

fn finite_limit(g: &FunctionExpr) -> Option<C64> {
    let e = boundary_limit(g, Approach::Radial, LIMIT_TOL);
    e.finite()
}

/// Taylor coefficients `(a, b)` of `f = a(z-1)^2 + b(1-z)^3 + ...` at 1, as angular limits
/// of `f/(1-z)^2` and `-(d/dz)[f/(1-z)^2]`.
pub fn taylor_coefficients(f: &FunctionExpr) -> (Option<C64>, Option<C64>) {
    let g = f.div(&FunctionExpr::one_minus_z().powc(C64::new(2.0, 0.0)));
    let a = finite_limit(&g);
    let b = a.and_then(|_| finite_limit(&g.derivative().neg()));
    (a, b)
}

pub fn classify(f: &FunctionExpr) -> Result<AsymptoticProfile> {
    classify_with_horizon(f, DEFAULT_HORIZON)
}

pub fn classify_with_horizon(f: &FunctionExpr, horizon: f64) -> Result<AsymptoticProfile> {
    let mut notes = vec![];
    let beta_est =
        boundary_limit_with(|s| Ok(f.eval(&s.pt)? / -s.pt.q), C64::new(1.0, 0.0), Approach::Radial, 4..=40, LIMIT_TOL);
    let beta = if beta_est.converged && !beta_est.infinite { beta_est.value.re.max(0.0) } else { f64::NAN };
    if beta.is_nan() {
        notes.push("angular derivative at 1 did not converge".into());
    }
    let kind = if beta > BETA_THRESHOLD { SemigroupType::Hyperbolic } else { SemigroupType::Parabolic };
    let am = match estimate_alpha_mu(f) {
        Ok(am) => Some(am),
        Err(e) => {
            notes.push(format!("alpha/mu: {e}"));
            None
        }
    };
    // hyperbolic orbits approach 1 exponentially fast; keep the gap representable
    let horizon = if kind == SemigroupType::Hyperbolic { horizon.min(300.0 / beta) } else { horizon };
    let diagnostics = match convergence_profile(f, C64::new(0.0, 0.0), horizon) {
        Ok(d) => Some(d),
        Err(e) => {
            notes.push(format!("flow: {e}"));
            None
        }
    };
    let regime = diagnostics.as_ref().map_or(Regime::Undetermined, |d| d.regime);
    let (taylor_a, taylor_b) = if kind == SemigroupType::Parabolic { taylor_coefficients(f) } else { (None, None) };
    let mu = am.filter(|a| a.mu_converged).map(|a| a.mu);
    Ok(AsymptoticProfile {
        beta,
        kind,
        alpha: am.map(|a| a.alpha),
        mu,
        a: mu.filter(|m| m.norm() > 0.0).map(|m| -1.0 / m),
        regime,
        taylor_a,
        taylor_b,
        diagnostics,
        alpha_mu: am,
        notes,
    })
}

/// Tangential convergence is expected iff `|arg(-a)| = (π/2)α`.
pub fn tangency_criterion(p: &AsymptoticProfile) -> Verdict {
    match (p.kind, p.a, p.alpha) {
        (SemigroupType::Parabolic, Some(a), Some(alpha)) => {
            let gap = ((-a).arg().abs() - FRAC_PI_2 * alpha).abs();
            Verdict { verdict: Some(gap < ANGLE_SLACK), margin: ANGLE_SLACK - gap }
        }
        _ => Verdict::undetermined(),
    }
}

/// Whether the measured regime agrees with [`tangency_criterion`].
pub fn tangency_consistent(p: &AsymptoticProfile) -> Option<bool> {
    let expected = tangency_criterion(p).verdict?;
    match p.regime {
        Regime::Tangential | Regime::StronglyTangential => Some(expected),
        Regime::Nontangential => Some(!expected),
        Regime::Undetermined => None,
    }
}

#[derive(Clone, Debug)]
pub struct HalfPlaneM {
    /// `Some(true)` when the statistic plateaus at every grid point.
    pub verdict: Option<bool>,
    /// Largest value of `t(1-|F_t|)/|1-F_t|` seen.
    pub max_statistic: f64,
    /// Time at which the statistic first exceeded 10^3 (if it did).
    pub exceeded_at: Option<f64>,
    pub plateau: Option<f64>,
}

impl HalfPlaneM {
    pub fn as_verdict(&self) -> Verdict {
        Verdict { verdict: self.verdict, margin: self.max_statistic }
    }
}

fn judge_series(m: &[f64]) -> (Option<bool>, Option<f64>) {
    let n = m.len();
    if n < 4 {
        return (None, None);
    }
    let g1 = m[n - 1] / m[n - 2];
    let g2 = m[n - 2] / m[n - 3];
    if g1 > 1.5 && g2 > 1.5 {
        return (Some(false), None);
    }
    if (g1 - 1.0).abs() < 0.01 && (g2 - 1.0).abs() < 0.02 {
        return (Some(true), Some(m[n - 1]));
    }
    (None, None)
}

/// Boundedness of the statistic `t(1-|F_t(z)|)/|1-F_t(z)|` up to `horizon`.
pub fn halfplane_criterion_m(flow: &dyn FlowMap, z_grid: &[C64], horizon: f64) -> Result<HalfPlaneM> {
    let mut verdict = Some(true);
    let mut max_statistic: f64 = 0.0;
    let mut exceeded_at: Option<f64> = None;
    let mut plateau: Option<f64> = None;
    for z in z_grid {
        let d = crate::flow::convergence_profile_with(flow, *z, horizon)?;
        max_statistic = max_statistic.max(d.m_estimate);
        if let Some((t, _)) = d.times.iter().zip(&d.m_series).find(|(_, m)| **m > 1e3) {
            exceeded_at = Some(exceeded_at.map_or(*t, |e: f64| e.min(*t)));
        }
        let (v, pl) = judge_series(&d.m_series);
        verdict = match (verdict, v) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        if let Some(p) = pl {
            plateau = Some(plateau.map_or(p, |q: f64| q.max(p)));
        }
    }
    Ok(HalfPlaneM { verdict, max_statistic, exceeded_at, plateau })
}

#[derive(Clone, Copy, Debug)]
pub struct Rigidity {
    pub halfplane_predicted: bool,
    pub is_automorphism_group: bool,
    /// `Re(conj(a) b)`.
    pub re_abar_b: f64,
}

pub fn rigidity_criterion(p: &AsymptoticProfile) -> Option<Rigidity> {
    let (a, b) = (p.taylor_a?, p.taylor_b?);
    let re = (a.conj() * b).re;
    Some(Rigidity {
        halfplane_predicted: re <= RIGIDITY_SLACK,
        is_automorphism_group: a.re.abs() < RIGIDITY_SLACK && b.norm() < RIGIDITY_SLACK,
        re_abar_b: re,
    })
}

/// `|arg μ| <= (π/2) min{α, 2-α}` with the uniform slack.
pub fn argument_bound(p: &AsymptoticProfile) -> Verdict {
    match (p.kind, p.mu, p.alpha) {
        (SemigroupType::Parabolic, Some(mu), Some(alpha)) => {
            let bound = FRAC_PI_2 * alpha.min(2.0 - alpha) + ANGLE_SLACK;
            let margin = bound - mu.arg().abs();
            Verdict { verdict: Some(margin >= 0.0), margin }
        }
        (SemigroupType::Hyperbolic, Some(mu), _) => {
            // α = 0: μ must be real and positive
            let margin = ANGLE_SLACK - mu.arg().abs();
            Verdict { verdict: Some(margin >= 0.0), margin }
        }
        _ => Verdict::undetermined(),
    }
}

/// Argument bound for a Carathéodory function `p` with `(1-z)^k p(z) -> γ`:
/// returns `(γ, bound - |arg γ|)`.
pub fn caratheodory_argument_check(p: &FunctionExpr, k: f64) -> Option<(C64, f64)> {
    let g = FunctionExpr::one_minus_z().powc(C64::new(k, 0.0)).mul(p);
    let gamma = boundary_limit(&g, Approach::StolzRay(0.3), LIMIT_TOL).finite()?;
    let bound = FRAC_PI_2 * (1.0 - k.abs()) + ANGLE_SLACK;
    Some((gamma, bound - gamma.arg().abs()))
}

pub fn classification_json(p: &AsymptoticProfile, halfplane_m: Option<&HalfPlaneM>) -> Value {
    let opt_c = |c: Option<C64>| c.map_or(json!("undetermined"), complex);
    let rig = rigidity_criterion(p);
    let alpha_is_one = p.alpha.is_some_and(|a| (a - 1.0).abs() < 1e-3);
    json!({
        "beta": real(p.beta),
        "type": p.kind.label(),
        "alpha": p.alpha.map_or(json!("undetermined"), real),
        "mu": opt_c(p.mu),
        "a": opt_c(p.a),
        "regime": p.regime.label(),
        "taylor_a": opt_c(p.taylor_a),
        "taylor_b": opt_c(p.taylor_b),
        "diagnostics": p.diagnostics.as_ref().map(|d| d.to_json()),
        "criteria": {
            "tangency": tangency_criterion(p).to_json(),
            "halfplane_M": halfplane_m.map_or(Verdict::undetermined(), |h| h.as_verdict()).to_json(),
            "rigidity": match rig {
                Some(r) if alpha_is_one => json!({
                    "verdict": r.halfplane_predicted,
                    "margin": real(RIGIDITY_SLACK - r.re_abar_b),
                    "is_automorphism_group": r.is_automorphism_group,
                }),
                _ => Verdict::undetermined().to_json(),
            },
            "argument_bound": argument_bound(p).to_json(),
        },
        "notes": p.notes,
    })
}

/// `ε(z)` proxy: the horocycle distance of a point.
pub fn horocycle_of(z: C64) -> Result<f64> {
    crate::geometry::horocycle_distance_pt(&DiskPoint::new(z)?.point())
}

/// Strong tangency constant from `L(z)`: `ε = 1/(2|a| L)`.
pub fn epsilon_from_l(a: C64, l: f64) -> f64 {
    1.0 / (2.0 * a.norm() * l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::OdeFlow;

    fn parse(s: &str) -> FunctionExpr {
        FunctionExpr::parse(s).unwrap()
    }

    #[test]
    fn taylor_examples() {
        let (a, b) = taylor_coefficients(&parse("-(1-z)^2-0.5*(1-z)^3"));
        let (a, b) = (a.unwrap(), b.unwrap());
        assert!((a + 1.0).norm() < 1e-9 && (b + 0.5).norm() < 1e-9);
        assert!(((a.conj() * b).re - 0.5).abs() < 1e-9);
        let (a, b) = taylor_coefficients(&parse("i*(1-z)^2-0.5*(1-z)^3"));
        assert!((a.unwrap() - C64::new(0.0, 1.0)).norm() < 1e-9);
        assert!((a.unwrap().conj() * b.unwrap()).re.abs() < 1e-9);
    }

    #[test]
    fn classify_examples() {
        let q = classify(&parse("-(1-z)^2*sqrt((1+z)/(1-z))*exp(-i*pi/4)")).unwrap();
        assert_eq!(q.kind, SemigroupType::Parabolic);
        assert!((q.alpha.unwrap() - 0.5).abs() < 1e-3);
        assert_eq!(q.regime, Regime::Tangential);
        assert_eq!(tangency_criterion(&q).verdict, Some(true));
        assert_eq!(tangency_consistent(&q), Some(true));
        assert!(argument_bound(&q).verdict.unwrap());
        let f2 = classify(&parse("-(1-z)^2*(1-z^2)/(1+z^2)")).unwrap();
        assert_eq!(f2.regime, Regime::Nontangential);
        assert_eq!(tangency_criterion(&f2).verdict, Some(false));
        let f1 = classify(&parse("-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)")).unwrap();
        assert_eq!(f1.kind, SemigroupType::Hyperbolic);
        assert!((f1.beta - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rigidity_examples() {
        let auto = classify(&parse("i*(1-z)^2")).unwrap();
        let r = rigidity_criterion(&auto).unwrap();
        assert!(r.halfplane_predicted && r.is_automorphism_group);
        let pert = classify(&parse("i*(1-z)^2-0.5*(1-z)^3")).unwrap();
        let r = rigidity_criterion(&pert).unwrap();
        assert!(r.halfplane_predicted && !r.is_automorphism_group);
        let no = classify(&parse("-(1-z)^2-0.5*(1-z)^3")).unwrap();
        assert!(!rigidity_criterion(&no).unwrap().halfplane_predicted);
    }

    #[test]
    fn m_statistic() {
        let f2 = parse("-(1-z)^2*(1-z^2)/(1+z^2)");
        let m = halfplane_criterion_m(&OdeFlow::new(&f2), &[C64::new(0.0, 0.0)], 1e5).unwrap();
        assert_eq!(m.verdict, Some(false));
        assert!(m.exceeded_at.unwrap() <= 1e5);
        let q = parse("-(1-z)^2*sqrt((1+z)/(1-z))*exp(-i*pi/4)");
        let m = halfplane_criterion_m(&OdeFlow::new(&q), &[C64::new(0.0, 0.0), C64::new(0.3, -0.2)], 1e8).unwrap();
        assert_eq!(m.verdict, Some(true), "{m:?}");
    }

    #[test]
    fn caratheodory_bound() {
        for s in [0.5, -0.5, 0.9, -0.9] {
            let th = 0.9 * FRAC_PI_2 * (1.0 - f64::abs(s));
            let p = parse(&format!("exp(i*{th})*((1+z)/(1-z))^({s})"));
            let (g, margin) = caratheodory_argument_check(&p, s).unwrap();
            assert!((g.arg() - th).abs() < 1e-6 && margin > 0.0);
        }
    }
}
