//! The reproduction suite: one function per criterion, each returning its individual checks.

use crate::abel::{
    abel_residual, bloch_norm, estimate_alpha_mu, planar_domain_stats, visser_ostrovskii, HalfPlane, LinearizationModel,
};
use crate::catalog::{self, power_admissible, power_admissible_printed};
use crate::classify::{
    argument_bound, caratheodory_argument_check, classify, halfplane_criterion_m, rigidity_criterion, SemigroupType,
};
use crate::conjugation::{
    bfid_report_for, corner_opening, find_boundary_null_points, inner_conjugator, verification_grid, BfidType,
    MobiusGroup,
};
use crate::error::Result;
use crate::expr::FunctionExpr;
use crate::flow::{integrate, semigroup_residual, Regime};
use crate::generator::validate_generator;
use crate::geometry::{horocycle_distance_pt, Point, C64};
use crate::limits::{boundary_limit, Approach, LIMIT_TOL};
use crate::ode::OdeOptions;
use serde_json::{json, Value};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub measured: String,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    fn new(id: u8, title: &'static str) -> Self {
        CriterionResult { id, title, checks: vec![] }
    }

    fn check(&mut self, name: impl Into<String>, measured: impl Into<String>, pass: bool) {
        self.checks.push(Check { name: name.into(), measured: measured.into(), pass });
    }

    /// Record an error as a failed check instead of aborting the criterion.
    fn attempt<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(name, format!("error: {e}"), false);
                None
            }
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn line(&self) -> String {
        format!("{} criterion {:>2}: {}", if self.passed() { "PASS" } else { "FAIL" }, self.id, self.title)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "title": self.title,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "measured": c.measured, "pass": c.pass})).collect::<Vec<_>>(),
        })
    }
}

fn entry_f(id: &str) -> FunctionExpr {
    catalog::get(id).expect("catalog id").f()
}

fn origin() -> Point {
    Point::new(C64::new(0.0, 0.0))
}

fn cfmt(c: C64) -> String {
    format!("{:.6}{:+.6}i", c.re, c.im)
}

pub fn criterion_1() -> CriterionResult {
    let mut r = CriterionResult::new(1, "quadrant: alpha, mu, t(1-F_t)^alpha, tangential regime");
    let f = entry_f("quadrant");
    if let Some(am) = r.attempt("alpha/mu", estimate_alpha_mu(&f)) {
        r.check("alpha = 0.5 +- 0.005", format!("{:.6}", am.alpha), (am.alpha - 0.5).abs() <= 0.005);
        let arg = am.mu.arg();
        r.check("arg mu = pi/4 +- 0.01", format!("{arg:.6}"), (arg - FRAC_PI_4).abs() <= 0.01);
    }
    if let Some(model) = r.attempt("model", LinearizationModel::new(&f)) {
        if let Some(p) = r.attempt("abel flow t = 1e6", model.abel_flow(&origin(), 1e6)) {
            let v = 1e6 * p.q.sqrt();
            let target = C64::from_polar(2.0, FRAC_PI_4);
            r.check(
                "|t(1-F_t(0))^(1/2) - 2e^{i pi/4}| < 0.04 at t = 1e6",
                format!("{} (|diff| = {:.4})", cfmt(v), (v - target).norm()),
                (v - target).norm() < 0.04,
            );
        }
    }
    if let Some(p) = r.attempt("classify", classify(&f)) {
        let d = p.diagnostics.as_ref();
        let arg = d.map_or(f64::NAN, |d| d.arg_limit);
        r.check("regime tangential", p.regime.label(), p.regime == Regime::Tangential);
        r.check("arg limit = pi/2 +- 0.02", format!("{arg:.6}"), (arg - FRAC_PI_2).abs() <= 0.02);
        r.check("not strongly tangential", p.regime.label(), p.regime != Regime::StronglyTangential);
    }
    r
}

/// `(K, arg μ)` lattice for the admissibility test.
pub fn power_lattice() -> Vec<(f64, f64)> {
    let ks = [-0.5, 0.0, 0.5, 1.0, 1.5];
    let args = [-1.2, -0.6, 0.0, 0.6, 1.2];
    ks.iter().flat_map(|k| args.iter().map(move |a| (*k, *a))).collect()
}

pub fn criterion_2() -> CriterionResult {
    let mut r = CriterionResult::new(2, "power family: alpha = K+1, mu, admissibility lattice");
    for id in ["power(-0.5,1)", "power(0,i)", "power(0.5,1)", "power(1,1)"] {
        let e = catalog::get(id).expect("catalog id");
        let (alpha, mu) = (e.truth.alpha.unwrap(), e.truth.mu.unwrap());
        if let Some(am) = r.attempt(id, estimate_alpha_mu(&e.f())) {
            r.check(format!("{id}: alpha +- 0.01"), format!("{:.6}", am.alpha), (am.alpha - alpha).abs() <= 0.01);
            let rel = (am.mu - mu).norm() / mu.norm();
            r.check(format!("{id}: mu rel. error < 1%"), format!("{} (rel {rel:.2e})", cfmt(am.mu)), rel < 0.01);
        }
    }
    let lattice = power_lattice();
    let mut wrong = vec![];
    let mut printed_differs = vec![];
    for (k, a) in &lattice {
        let mu = C64::from_polar(1.0, *a);
        let f = FunctionExpr::parse(&format!("-(1-z)^({})/({}+{}*i)", k + 2.0, mu.re, mu.im)).expect("power generator");
        let numeric = validate_generator(&f, 32).map(|c| c.is_generator).unwrap_or(false);
        if numeric != power_admissible(*k, mu) {
            wrong.push(format!("({k},{a})"));
        }
        if power_admissible(*k, mu) != power_admissible_printed(*k, mu) {
            printed_differs.push(format!("({k},{a})"));
        }
    }
    r.check(
        "25 lattice points classified as -1<K<=1, |arg mu| <= (pi/2)(1-|K|)",
        format!(
            "{} misclassified {:?}; printed form |arg mu| <= pi/2 - pi K/2 differs at {:?}",
            wrong.len(),
            wrong,
            printed_differs
        ),
        wrong.is_empty(),
    );
    r
}

pub fn criterion_3() -> CriterionResult {
    let mut r = CriterionResult::new(3, "Abel residual |h(F_t z) - h(z) - t| < 1e-7 on every catalog entry");
    let entries = catalog::all_entries();
    let rows = crate::par_map(&entries, |e| -> (String, Result<f64>) {
        let res = (|| {
            let model = LinearizationModel::new(&e.f())?;
            let mut worst = 0f64;
            for p in verification_grid() {
                for t in [1.0, 10.0, 100.0] {
                    worst = worst.max(abel_residual(&model, p.z, t)?);
                }
            }
            Ok(worst)
        })();
        (e.id.clone(), res)
    });
    for (id, res) in rows {
        match res {
            Ok(w) => r.check(id, format!("{w:.3e}"), w < 1e-7),
            Err(e) => r.check(id, format!("error: {e}"), false),
        }
    }
    r
}

pub fn criterion_4() -> CriterionResult {
    let mut r = CriterionResult::new(4, "hyperbolic strip width pi and Bloch norm 2");
    let f = entry_f("hyperbolic-auto(0.5,0)");
    if let Some(model) = r.attempt("model", LinearizationModel::new(&f)) {
        if let Some(st) = r.attempt("planar stats", planar_domain_stats(&model, 64)) {
            r.check("strip width = pi +- 0.01", format!("{:.6}", st.strip_width), (st.strip_width - PI).abs() <= 0.01);
        }
        let b = bloch_norm(&model, 64);
        r.check("Bloch norm in [2, 4]", format!("{b:.6}"), (2.0 - 1e-9..=4.0).contains(&b));
        r.check("Bloch norm = 2 +- 0.01", format!("{b:.6}"), (b - 2.0).abs() <= 0.01);
    }
    r
}

pub fn criterion_5() -> CriterionResult {
    let mut r = CriterionResult::new(5, "f1: null points, one h-type BFID, closed-form phi");
    let e = catalog::get("bfid-hyp").expect("catalog id");
    let f = e.f();
    if let Some(np) = r.attempt("null points", find_boundary_null_points(&f, 256)) {
        let at = |z: f64| np.iter().find(|p| (p.zeta - z).norm() < 1e-6);
        let one = at(1.0).map(|p| p.f_prime);
        let minus = at(-1.0).map(|p| p.f_prime);
        r.check("f'(1) = 2 +- 1e-5", format!("{one:?}"), one.is_some_and(|v| (v - 2.0).norm() <= 1e-5));
        r.check("f'(-1) = -4 +- 1e-5", format!("{minus:?}"), minus.is_some_and(|v| (v + 4.0).norm() <= 1e-5));
    }
    let Some(model) = r.attempt("model", LinearizationModel::new(&f)) else { return r };
    if let Some(certs) = r.attempt("bfid report", bfid_report_for(&model)) {
        let h = certs.iter().filter(|c| c.bfid_type == BfidType::HType).count();
        r.check("exactly one BFID, of h-type", format!("{h} h-type of {}", certs.len()), h == 1 && certs.len() == 1);
    }
    let base = Point::new(e.closed_form_phi(C64::new(0.0, 0.0)).expect("closed-form phi"));
    let group = MobiusGroup::new(2.0, 0.0).expect("group");
    if let Some(c) = r.attempt("inner conjugator", inner_conjugator(&model, group, base)) {
        r.check("inner residual < 1e-6", format!("{:.3e}", c.residual_sup), c.residual_sup < 1e-6);
        let mut worst = 0f64;
        for p in verification_grid() {
            worst = worst.max(match c.phi(&model, &p) {
                Ok(v) => (v.z - e.closed_form_phi(p.z).unwrap()).norm(),
                Err(_) => f64::INFINITY,
            });
        }
        r.check("|phi - closed form| < 1e-6 on 20 points", format!("{worst:.3e}"), worst < 1e-6);
    }
    r
}

pub fn criterion_6() -> CriterionResult {
    let mut r = CriterionResult::new(6, "f2: alpha = 2, mu = 1, 2 p-type + 1 h-type, corners, M unbounded");
    let f = entry_f("bfid-par");
    if let Some(am) = r.attempt("alpha/mu", estimate_alpha_mu(&f)) {
        r.check("alpha = 2 +- 0.02", format!("{:.6}", am.alpha), (am.alpha - 2.0).abs() <= 0.02);
        r.check("mu = 1 +- 0.01", cfmt(am.mu), (am.mu - 1.0).norm() <= 0.01);
    }
    let Some(model) = r.attempt("model", LinearizationModel::new(&f)) else { return r };
    if let Some(certs) = r.attempt("bfid report", bfid_report_for(&model)) {
        let p = certs.iter().filter(|c| c.bfid_type == BfidType::PType).count();
        let h = certs.iter().filter(|c| c.bfid_type == BfidType::HType).count();
        r.check("2 p-type + 1 h-type", format!("{p} p-type, {h} h-type"), p == 2 && h == 1 && certs.len() == 3);
        let worst = certs.iter().map(|c| c.residual_sup).fold(0.0, f64::max);
        r.check("every residual < 1e-6", format!("{worst:.3e}"), worst < 1e-6);
        for c in certs.iter().filter(|c| c.bfid_type == BfidType::PType) {
            match corner_opening(c, &model) {
                Ok((g, _)) => r.check(
                    format!("corner gamma (b = {}) = 0.5 +- 0.05", c.group.b),
                    format!("{g:.6}"),
                    (g - 0.5).abs() <= 0.05,
                ),
                Err(e) => r.check("corner gamma", format!("error: {e}"), false),
            }
        }
    }
    if let Some(m) = r.attempt("M statistic", halfplane_criterion_m(&model, &[C64::new(0.0, 0.0)], 1e5)) {
        r.check("half-plane criterion false", format!("{:?}", m.verdict), m.verdict == Some(false));
        r.check(
            "M exceeds 1e3 by t = 1e5",
            format!("max {:.3e}, first above 1e3 at t = {:?}", m.max_statistic, m.exceeded_at),
            m.exceeded_at.is_some_and(|t| t <= 1e5),
        );
    }
    r
}

pub fn criterion_7() -> CriterionResult {
    let mut r = CriterionResult::new(7, "|arg mu| <= (pi/2) min(alpha, 2-alpha) + 0.02 on parabolic entries");
    for e in catalog::all_entries().into_iter().filter(|e| e.truth.beta == 0.0) {
        if let Some(p) = r.attempt(&e.id, classify(&e.f())) {
            if p.kind != SemigroupType::Parabolic {
                r.check(e.id.clone(), format!("classified {}", p.kind.label()), false);
                continue;
            }
            let v = argument_bound(&p);
            r.check(e.id.clone(), format!("margin {:.4}", v.margin), v.verdict == Some(true));
        }
    }
    r
}

pub fn criterion_8() -> CriterionResult {
    let mut r = CriterionResult::new(8, "strong tangency: epsilon(0) for automorphism, perturbed, quadrant");
    if let Some(p) = r.attempt("parabolic-auto(1)", classify(&entry_f("parabolic-auto(1)"))) {
        let eps = p.diagnostics.as_ref().map_or(f64::NAN, |d| d.d_limit);
        r.check("parabolic-auto(1): epsilon(0) = 1 +- 1e-9", format!("{eps:.12}"), (eps - 1.0).abs() <= 1e-9);
        r.check("parabolic-auto(1): strongly tangential", p.regime.label(), p.regime == Regime::StronglyTangential);
    }
    let f = entry_f("perturbed-parabolic");
    if let Some(p) = r.attempt("perturbed-parabolic", classify(&f)) {
        let eps = p.diagnostics.as_ref().map_or(f64::NAN, |d| d.d_limit);
        r.check("perturbed-parabolic: epsilon(0) > 1e-3", format!("{eps:.6}"), eps > 1e-3);
    }
    if let Some(st) =
        r.attempt("perturbed planar", LinearizationModel::new(&f).and_then(|m| planar_domain_stats(&m, 64)))
    {
        let finite = st.sup_im.is_finite() as u8 + st.inf_im.is_finite() as u8;
        r.check(
            "perturbed-parabolic: exactly one finite Im bound",
            format!("sup {:.4}, inf {:.4}", st.sup_im, st.inf_im),
            finite == 1,
        );
    }
    if let Some(model) = r.attempt("quadrant model", LinearizationModel::new(&entry_f("quadrant"))) {
        if let Some(p) = r.attempt("quadrant flow", model.abel_flow(&origin(), 1e8)) {
            let d = horocycle_distance_pt(&p).unwrap_or(f64::NAN);
            r.check("quadrant: d(F_t(0)) < 1e-3 at t = 1e8", format!("{d:.3e}"), d < 1e-3);
        }
    }
    r
}

pub fn criterion_9() -> CriterionResult {
    let mut r = CriterionResult::new(9, "rigidity Re(conj(a) b) against planar half-plane detection");
    for (id, expect_half) in [("perturbed-parabolic", true), ("no-halfplane", false)] {
        let f = entry_f(id);
        let Some(p) = r.attempt(id, classify(&f)) else { continue };
        let Some(rig) = rigidity_criterion(&p) else {
            r.check(id, "Taylor coefficients undetermined", false);
            continue;
        };
        let Some(st) = r.attempt(id, LinearizationModel::new(&f).and_then(|m| planar_domain_stats(&m, 64))) else {
            continue;
        };
        let planar_half = !matches!(st.half_plane, HalfPlane::None) && (st.sup_im.is_finite() != st.inf_im.is_finite());
        if expect_half {
            r.check(format!("{id}: Re(conj(a) b) <= 0"), format!("{:.3e}", rig.re_abar_b), rig.halfplane_predicted);
            r.check(format!("{id}: half-plane found"), st.half_plane.label(), planar_half);
        } else {
            r.check(
                format!("{id}: Re(conj(a) b) = 0.5"),
                format!("{:.9}", rig.re_abar_b),
                (rig.re_abar_b - 0.5).abs() < 1e-6,
            );
            r.check(
                format!("{id}: both Im bounds infinite"),
                format!("sup {}, inf {}", st.sup_im, st.inf_im),
                st.sup_im.is_infinite() && st.inf_im.is_infinite(),
            );
        }
        r.check(
            format!("{id}: rigidity and planar verdicts agree"),
            format!("{} / {}", rig.halfplane_predicted, planar_half),
            rig.halfplane_predicted == planar_half,
        );
    }
    r
}

pub fn criterion_10() -> CriterionResult {
    let mut r = CriterionResult::new(10, "angular-only(0.5): angular limit -1, no unrestricted limit");
    let f = entry_f("angular-only(0.5)");
    let g = f.div(&FunctionExpr::one_minus_z().powc(C64::new(2.5, 0.0)));
    let rad = boundary_limit(&g, Approach::Radial, LIMIT_TOL);
    r.check(
        "radial limit = -1 +- 0.01",
        format!("{} (converged {})", cfmt(rad.value), rad.converged),
        rad.converged && (rad.value + 1.0).norm() <= 0.01,
    );
    let tan = boundary_limit(&g, Approach::TangentialCurve(1.0), LIMIT_TOL);
    r.check("tangential-curve estimate does not converge", format!("converged {}", tan.converged), !tan.converged);
    r
}

/// Carathéodory test functions `e^{iθ}((1+z)/(1-z))^s` with their exponents `s`.
pub fn caratheodory_test_functions() -> Vec<(FunctionExpr, f64)> {
    [-0.5, 0.0, 0.5, 1.0]
        .into_iter()
        .map(|s: f64| {
            let th = 0.9 * FRAC_PI_2 * (1.0 - s.abs());
            let text = format!("exp({th}*i)*((1+z)/(1-z))^({s})");
            (FunctionExpr::parse(&text).expect("test function"), s)
        })
        .collect()
}

pub fn criterion_11() -> CriterionResult {
    let mut r = CriterionResult::new(11, "property suites");
    let entries = catalog::all_entries();
    let pts: Vec<C64> = verification_grid().iter().step_by(3).map(|p| p.z).collect();
    let mut semi = 0f64;
    let mut horo_violation = 0f64;
    for e in &entries {
        let f = e.f();
        for z in &pts {
            semi = semi.max(semigroup_residual(&f, *z, 1.5, 2.5).unwrap_or(f64::INFINITY));
            let opts = OdeOptions { record: true, ..OdeOptions::default() };
            if let Ok(tr) = integrate(&f, *z, 20.0, &opts) {
                let ds: Vec<f64> = tr.samples.iter().filter_map(|s| horocycle_distance_pt(&s.1).ok()).collect();
                for w in ds.windows(2) {
                    horo_violation = horo_violation.max((w[1] - w[0]) / w[0]);
                }
            }
        }
    }
    r.check("semigroup residual < 1e-8", format!("{semi:.3e}"), semi < 1e-8);
    r.check("d(F_t(z)) non-increasing", format!("max relative increase {horo_violation:.3e}"), horo_violation <= 1e-9);

    // distance from h(0) = 0 to the boundary of the known image
    let koebe = [
        ("quadrant", 1.0 / SQRT_2),
        ("parabolic-auto(1)", 0.5),
        ("hyperbolic-auto(0.5,0)", FRAC_PI_2),
        ("bfid-par", (1.0f64 / 16.0 + PI * PI / 64.0).sqrt()),
    ];
    for (id, dist) in koebe {
        if let Some(m) = r.attempt(id, LinearizationModel::new(&entry_f(id))) {
            let d0 = m.hprime(&origin()).map_or(f64::NAN, |v| v.norm());
            r.check(
                format!("Koebe |h'(0)|/4 <= dist <= |h'(0)| ({id})"),
                format!("{:.4} <= {dist:.4} <= {d0:.4}", d0 / 4.0),
                d0 / 4.0 <= dist && dist <= d0,
            );
        }
    }

    let mut trip = 0f64;
    for e in &entries {
        if let Ok(m) = LinearizationModel::new(&e.f()) {
            for p in verification_grid() {
                let err = m.h(&p).and_then(|w| m.invert_auto(w)).map_or(f64::INFINITY, |q| (q.z - p.z).norm());
                trip = trip.max(err);
            }
        }
    }
    r.check("invert_h round trip < 1e-10", format!("{trip:.3e}"), trip < 1e-10);

    for (id, alpha) in [("quadrant", 0.5), ("bfid-par", 2.0), ("parabolic-auto(1)", 1.0)] {
        if let Some(m) = r.attempt(id, LinearizationModel::new(&entry_f(id))) {
            let vo = visser_ostrovskii(&m);
            let modulus = vo.value.norm();
            r.check(
                format!("Visser-Ostrovskii |limit| = 1/alpha +- 0.05 ({id})"),
                format!("{modulus:.6}"),
                vo.converged && (modulus - 1.0 / alpha).abs() <= 0.05,
            );
        }
    }

    for (p, s) in caratheodory_test_functions() {
        match caratheodory_argument_check(&p, s) {
            Some((g, margin)) => r.check(
                format!("Caratheodory argument bound, k = {s}"),
                format!("gamma {}, margin {margin:.4}", cfmt(g)),
                margin >= 0.0,
            ),
            None => r.check(format!("Caratheodory argument bound, k = {s}"), "limit undetermined", false),
        }
    }
    r
}

pub fn run_all() -> Vec<CriterionResult> {
    let fs: [fn() -> CriterionResult; 11] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    fs.iter().map(|f| f()).collect()
}

pub fn table(results: &[CriterionResult]) -> String {
    let mut s = String::new();
    for r in results {
        s.push_str(&r.line());
        s.push('\n');
        for c in &r.checks {
            s.push_str(&format!("      [{}] {}: {}\n", if c.pass { "ok" } else { "xx" }, c.name, c.measured));
        }
    }
    let passed = results.iter().filter(|r| r.passed()).count();
    s.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    s
}
