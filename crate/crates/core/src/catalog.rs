//! Built-in generators with closed forms and known asymptotics.

use crate::abel::HalfPlane;
use crate::error::{Error, Result};
use crate::expr::{format_const, FunctionExpr};
use crate::flow::Regime;
use crate::generator::validate_generator;
use crate::geometry::{Point, C64};
use crate::report::{complex, real};
use serde_json::{json, Value};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub beta: f64,
    pub alpha: Option<f64>,
    pub mu: Option<C64>,
    pub regime: Option<Regime>,
    /// `HalfPlane::None` records that no horizontal half-plane contains `h(Δ)`.
    pub halfplane: Option<HalfPlane>,
    pub strip_width: Option<f64>,
    /// `(p-type, h-type)` BFID counts.
    pub bfid_counts: Option<(usize, usize)>,
    pub notes: Vec<String>,
}

impl Truth {
    fn new(beta: f64) -> Self {
        Truth {
            beta,
            alpha: None,
            mu: None,
            regime: None,
            halfplane: None,
            strip_width: None,
            bfid_counts: None,
            notes: vec![],
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "beta": real(self.beta),
            "alpha": self.alpha.map(real),
            "mu": self.mu.map(complex),
            "regime": self.regime.map(|r| r.label()),
            "halfplane": self.halfplane.map(|h| h.to_json()),
            "strip_width": self.strip_width.map(real),
            "bfid_counts": self.bfid_counts.map(|(p, h)| json!({"p": p, "h": h})),
            "notes": self.notes,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: String,
    pub f_text: String,
    pub h_text: Option<String>,
    pub truth: Truth,
    phi: Option<fn(C64) -> C64>,
}

impl CatalogEntry {
    pub fn f(&self) -> FunctionExpr {
        FunctionExpr::parse(&self.f_text).expect("catalog generators parse")
    }

    pub fn h(&self) -> Option<FunctionExpr> {
        self.h_text.as_ref().map(|t| FunctionExpr::parse(t).expect("catalog Abel functions parse"))
    }

    /// Closed-form inner conjugator, where one is known.
    pub fn closed_form_phi(&self, z: C64) -> Option<C64> {
        self.phi.map(|p| p(z))
    }

    pub fn has_closed_form_phi(&self) -> bool {
        self.phi.is_some()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "f": self.f_text,
            "h": self.h_text,
            "truth": self.truth.to_json(),
        })
    }
}

/// Ids of the default catalog instances.
pub const DEFAULT_IDS: [&str; 12] = [
    "parabolic-auto(1)",
    "hyperbolic-auto(0.5,0)",
    "quadrant",
    "power(-0.5,1)",
    "power(0,i)",
    "power(0.5,1)",
    "power(1,1)",
    "bfid-hyp",
    "bfid-par",
    "angular-only(0.5)",
    "perturbed-parabolic",
    "no-halfplane",
];

pub fn all_entries() -> Vec<CatalogEntry> {
    DEFAULT_IDS.iter().map(|id| get(id).expect("default ids resolve")).collect()
}

fn parse_param(text: &str) -> Result<C64> {
    let e = FunctionExpr::parse(text)?;
    let (a, b) = (e.eval_z(C64::new(0.0, 0.0))?, e.eval_z(C64::new(0.5, 0.25))?);
    if a != b {
        return Err(Error::Config(format!("catalog parameter `{text}` depends on z")));
    }
    Ok(a)
}

fn split_id(id: &str) -> Result<(&str, Vec<C64>)> {
    let id = id.trim();
    let Some(open) = id.find('(') else { return Ok((id, vec![])) };
    if !id.ends_with(')') {
        return Err(Error::UnknownCatalogId(id.into()));
    }
    let inner = &id[open + 1..id.len() - 1];
    let mut params = vec![];
    let (mut depth, mut start) = (0i32, 0);
    for (k, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                params.push(parse_param(&inner[start..k])?);
                start = k + 1;
            }
            _ => {}
        }
    }
    params.push(parse_param(&inner[start..])?);
    Ok((&id[..open], params))
}

fn real_param(v: C64, what: &str) -> Result<f64> {
    if v.im.abs() > 1e-15 * v.norm().max(1.0) {
        return Err(Error::Config(format!("{what} must be real, got {v}")));
    }
    Ok(v.re)
}

fn c(v: C64) -> String {
    format!("({})", format_const(v))
}

fn r(v: f64) -> String {
    c(C64::new(v, 0.0))
}

/// `-1 < K <= 1` and `|arg μ| <= (π/2)(1-|K|)`: when `(1-z)²h'(z) = μ(1-z)^{-K}` has
/// nonnegative real part.
pub fn power_admissible(k: f64, mu: C64) -> bool {
    k > -1.0 && k <= 1.0 && mu.arg().abs() <= FRAC_PI_2 * (1.0 - k.abs()) + 1e-12
}

/// The admissibility region in the printed form `|arg μ| <= π/2 - πK/2`.
pub fn power_admissible_printed(k: f64, mu: C64) -> bool {
    k > -1.0 && k <= 1.0 && mu.arg().abs() <= FRAC_PI_2 - PI * k / 2.0 + 1e-12
}

fn bfid_hyp_phi(z: C64) -> C64 {
    let w = (1.0 + ((1.0 + z) / (1.0 - z)).sqrt()).sqrt();
    let s = (w - 1.0) * (w - 1.0);
    (s - 1.0) / (s + 1.0)
}

fn arity(name: &str, params: &[C64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::Config(format!("catalog entry `{name}` takes {n} parameter(s), got {}", params.len())));
    }
    Ok(())
}

pub fn get(id: &str) -> Result<CatalogEntry> {
    let (name, params) = split_id(id)?;
    let params = if params.is_empty() {
        match name {
            "parabolic-auto" => vec![C64::new(1.0, 0.0)],
            "hyperbolic-auto" => vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0)],
            "power" => vec![C64::new(0.5, 0.0), C64::new(1.0, 0.0)],
            "angular-only" => vec![C64::new(0.5, 0.0)],
            _ => params,
        }
    } else {
        params
    };
    let mut phi = None;
    let (f_text, h_text, truth) = match name {
        "parabolic-auto" => {
            arity(name, &params, 1)?;
            let b = real_param(params[0], "b")?;
            if b == 0.0 {
                return Err(Error::Config("parabolic-auto needs b != 0".into()));
            }
            let mut t = Truth::new(0.0);
            t.alpha = Some(1.0);
            t.mu = Some(C64::new(0.0, 1.0 / b));
            t.regime = Some(Regime::StronglyTangential);
            t.halfplane = Some(if b > 0.0 { HalfPlane::Above(-0.5 / b) } else { HalfPlane::Below(-0.5 / b) });
            t.strip_width = Some(f64::INFINITY);
            t.bfid_counts = Some((1, 0));
            (format!("{}*(1-z)^2", c(C64::new(0.0, b))), Some(format!("{}*z/(1-z)", c(C64::new(0.0, 1.0 / b)))), t)
        }
        "hyperbolic-auto" => {
            arity(name, &params, 2)?;
            let a = real_param(params[0], "a")?;
            let b = real_param(params[1], "b")?;
            if !(a > 0.0) {
                return Err(Error::Config("hyperbolic-auto needs a > 0".into()));
            }
            let eta = (C64::new(-a, b)) / C64::new(a, b);
            let mut t = Truth::new(2.0 * a);
            t.alpha = Some(0.0);
            t.mu = Some(C64::new(0.5 / a, 0.0));
            t.regime = Some(Regime::Nontangential);
            t.halfplane = Some(HalfPlane::None);
            t.strip_width = Some(PI / (2.0 * a));
            t.bfid_counts = Some((0, 1));
            t.notes.push(format!("repelling point eta = {}", format_const(eta)));
            (
                format!("{}*(z^2-1)+{}*(1-z)^2", r(a), c(C64::new(0.0, b))),
                Some(format!("{}*log((1-{}*z)/(1-z))", r(0.5 / a), c(eta.conj()))),
                t,
            )
        }
        "quadrant" => {
            arity(name, &params, 0)?;
            let mut t = Truth::new(0.0);
            t.alpha = Some(0.5);
            t.mu = Some(C64::from_polar(1.0 / SQRT_2, FRAC_PI_4));
            t.regime = Some(Regime::Tangential);
            t.halfplane = Some(HalfPlane::Above(-1.0 / SQRT_2));
            t.strip_width = Some(f64::INFINITY);
            t.bfid_counts = Some((0, 0));
            t.notes.push(
                "mu printed as e^{i pi/4}; the closed-form h gives (1-z)^{3/2} h'(z) -> e^{i pi/4}/sqrt(2)".into(),
            );
            t.notes.push("h(D) is the quadrant {Re w > -sqrt(2)/2, Im w > -sqrt(2)/2}".into());
            (
                "-(1-z)^2*sqrt((1+z)/(1-z))*exp(-i*pi/4)".to_string(),
                Some("exp(i*pi/4)*(sqrt((1+z)/(1-z))-1)".to_string()),
                t,
            )
        }
        "power" => {
            arity(name, &params, 2)?;
            let k = real_param(params[0], "K")?;
            let mu = params[1];
            if k == -1.0 || mu == C64::new(0.0, 0.0) {
                return Err(Error::Config("power needs K != -1 and mu != 0".into()));
            }
            let mut t = Truth::new(0.0);
            t.alpha = Some(k + 1.0);
            t.mu = Some(mu);
            let strict = mu.arg().abs() < FRAC_PI_2 * (1.0 - k.abs()) - 1e-12;
            if k == 0.0 && (mu.arg().abs() - FRAC_PI_2).abs() < 1e-12 {
                let s = mu.norm();
                t.halfplane = Some(if mu.im > 0.0 { HalfPlane::Above(-0.5 * s) } else { HalfPlane::Below(0.5 * s) });
                t.regime = Some(Regime::StronglyTangential);
            } else if power_admissible(k, mu) && (k > 0.0 || strict) {
                t.halfplane = Some(HalfPlane::None);
            }
            if t.regime.is_none() && power_admissible(k, mu) {
                t.regime = Some(if mu.arg().abs() < 1e-12 { Regime::Nontangential } else { Regime::Tangential });
            }
            if !power_admissible(k, mu) {
                t.notes.push("not a generator: (1-z)^2 h'(z) takes values with negative real part".into());
            }
            (
                format!("-(1-z)^{}/{}", r(k + 2.0), c(mu)),
                Some(format!("{}*((1-z)^{}-1)", c(mu / (k + 1.0)), r(-(k + 1.0)))),
                t,
            )
        }
        "bfid-hyp" => {
            arity(name, &params, 0)?;
            let mut t = Truth::new(2.0);
            t.alpha = Some(0.0);
            t.mu = Some(C64::new(0.5, 0.0));
            t.regime = Some(Regime::Nontangential);
            t.halfplane = Some(HalfPlane::None);
            t.strip_width = Some(FRAC_PI_2);
            t.bfid_counts = Some((0, 1));
            t.notes.push("f'(1) = 2, f(-1) = 0, f'(-1) = -4".into());
            phi = Some(bfid_hyp_phi as fn(C64) -> C64);
            (
                "-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)".to_string(),
                Some("0.5*log(sqrt((1+z)/(1-z))*(sqrt((1+z)/(1-z))+2)/3)".to_string()),
                t,
            )
        }
        "bfid-par" => {
            arity(name, &params, 0)?;
            let mut t = Truth::new(0.0);
            t.alpha = Some(2.0);
            t.mu = Some(C64::new(1.0, 0.0));
            t.regime = Some(Regime::Nontangential);
            t.halfplane = Some(HalfPlane::None);
            t.strip_width = Some(f64::INFINITY);
            t.bfid_counts = Some((2, 1));
            t.notes.push("h(D) is the plane minus the slits {Im w = +-pi/8, Re w <= -1/4}".into());
            ("-(1-z)^2*(1-z^2)/(1+z^2)".to_string(), Some("z/(2*(1-z)^2)+0.25*log((1+z)/(1-z))".to_string()), t)
        }
        "angular-only" => {
            arity(name, &params, 1)?;
            let beta = real_param(params[0], "beta")?;
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::Config(format!("angular-only needs 0 < beta <= 1, got {beta}")));
            }
            let mut t = Truth::new(0.0);
            t.alpha = Some(2.0 - beta);
            t.mu = Some(C64::new(1.0, 0.0));
            t.notes.push("angular limit of f/(1-z)^{1+alpha} is -1; the unrestricted limit does not exist".into());
            (format!("-(1-z)^2*(1-exp(-(1+z)/(1-z)))^{}*(1-z)^{}", r(beta), r(1.0 - beta)), None, t)
        }
        "perturbed-parabolic" => {
            arity(name, &params, 0)?;
            let mut t = Truth::new(0.0);
            t.alpha = Some(1.0);
            t.mu = Some(C64::new(0.0, 1.0));
            t.regime = Some(Regime::StronglyTangential);
            t.halfplane = Some(HalfPlane::Above(f64::NAN));
            t.strip_width = Some(f64::INFINITY);
            t.notes.push("Taylor data a = i, b = -1/2 at 1, Re(conj(a) b) = 0".into());
            ("i*(1-z)^2-0.5*(1-z)^3".to_string(), Some("i*z/(1-z)+0.5*log((z-1+2*i)/((2*i-1)*(1-z)))".to_string()), t)
        }
        "no-halfplane" => {
            arity(name, &params, 0)?;
            let mut t = Truth::new(0.0);
            t.alpha = Some(1.0);
            t.mu = Some(C64::new(1.0, 0.0));
            t.regime = Some(Regime::Nontangential);
            t.halfplane = Some(HalfPlane::None);
            t.strip_width = Some(f64::INFINITY);
            t.notes.push("Taylor data a = -1, b = -1/2 at 1, Re(conj(a) b) = 1/2".into());
            ("-(1-z)^2-0.5*(1-z)^3".to_string(), Some("z/(1-z)+0.5*log(3*(1-z)/(3-z))".to_string()), t)
        }
        _ => return Err(Error::UnknownCatalogId(id.to_string())),
    };
    Ok(CatalogEntry { id: id.trim().to_string(), f_text, h_text, truth, phi })
}

pub fn list_json() -> Value {
    Value::Array(all_entries().iter().map(|e| json!({"id": e.id, "f": e.f_text})).collect())
}

/// 50 points: radii 0.1..0.9 at ten angles each.
pub fn consistency_grid() -> Vec<Point> {
    let mut v = vec![];
    for j in 0..5 {
        let rad = 0.1 + 0.2 * j as f64;
        for m in 0..10 {
            let th = 2.0 * PI * m as f64 / 10.0 + 0.05 * j as f64 + 0.01;
            v.push(Point::new(C64::from_polar(rad, th)));
        }
    }
    v
}

#[derive(Clone, Debug)]
pub struct EntryValidation {
    pub id: String,
    /// `sup |f + 1/h'|` on the 50-point grid, scaled by `max(1, |f|)`.
    pub consistency: Option<f64>,
    pub h_at_zero: Option<f64>,
    pub is_generator: bool,
    pub failures: Vec<String>,
}

impl EntryValidation {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "consistency": self.consistency.map(real),
            "h_at_zero": self.h_at_zero.map(real),
            "is_generator": self.is_generator,
            "failures": self.failures,
        })
    }
}

pub const CONSISTENCY_TOL: f64 = 1e-10;

pub fn validate_entry(e: &CatalogEntry) -> EntryValidation {
    let mut failures = vec![];
    let f = match FunctionExpr::parse(&e.f_text) {
        Ok(f) => Some(f),
        Err(err) => {
            failures.push(format!("f does not parse: {err}"));
            None
        }
    };
    let mut consistency = None;
    let mut h_at_zero = None;
    if let (Some(f), Some(text)) = (&f, &e.h_text) {
        match FunctionExpr::parse(text) {
            Ok(h) => {
                let hp = h.derivative();
                let mut worst = 0f64;
                for p in consistency_grid() {
                    match (f.eval(&p), hp.eval(&p)) {
                        (Ok(fv), Ok(d)) => worst = worst.max((fv + 1.0 / d).norm() / fv.norm().max(1.0)),
                        _ => worst = f64::INFINITY,
                    }
                }
                consistency = Some(worst);
                if !(worst < CONSISTENCY_TOL) {
                    failures.push(format!("f + 1/h' reaches {worst:e} on the grid"));
                }
                let h0 = h.eval_z(C64::new(0.0, 0.0)).map_or(f64::INFINITY, |v| v.norm());
                h_at_zero = Some(h0);
                if !(h0 < CONSISTENCY_TOL) {
                    failures.push(format!("h(0) = {h0:e} is not 0"));
                }
            }
            Err(err) => failures.push(format!("h does not parse: {err}")),
        }
    }
    let is_generator = match &f {
        Some(f) => match validate_generator(f, 32) {
            Ok(chk) => chk.is_generator,
            Err(err) => {
                failures.push(format!("generator check failed: {err}"));
                false
            }
        },
        None => false,
    };
    if f.is_some() && !is_generator {
        failures.push("Berkson-Porta function has negative real part".into());
    }
    EntryValidation { id: e.id.clone(), consistency, h_at_zero, is_generator, failures }
}

pub fn validate_all() -> Vec<EntryValidation> {
    let entries = all_entries();
    crate::par_map(&entries, validate_entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_entries() {
        let q = get("quadrant").unwrap();
        assert_eq!(q.truth.alpha, Some(0.5));
        assert!((q.truth.mu.unwrap().arg() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(get("power(0.5,1)").unwrap().truth.alpha, Some(1.5));
        assert_eq!(get("bfid-par").unwrap().truth.bfid_counts, Some((2, 1)));
        assert!(matches!(get("nope"), Err(Error::UnknownCatalogId(_))));
        assert!(get("power(0, exp(i*pi/2))").is_ok());
        assert!(get("parabolic-auto(0)").is_err());
    }

    #[test]
    fn all_defaults_validate() {
        for v in validate_all() {
            assert!(v.passed(), "{}: {:?}", v.id, v.failures);
        }
    }

    #[test]
    fn corrupted_h_is_reported() {
        let mut e = get("bfid-par").unwrap();
        e.h_text = Some("z/(2*(1-z)^2)+0.3*log((1+z)/(1-z))".into());
        let v = validate_entry(&e);
        assert!(!v.passed());
        assert!(v.consistency.unwrap() > 1e-3);
    }

    #[test]
    fn power_outside_range_is_not_a_generator() {
        let v = validate_entry(&get("power(1.5,1)").unwrap());
        assert!(!v.is_generator);
    }

    #[test]
    fn phi_closed_form_fixes_the_repelling_point() {
        let e = get("bfid-hyp").unwrap();
        let v = e.closed_form_phi(C64::new(-0.999999, 0.0)).unwrap();
        assert!((v + 1.0).norm() < 1e-2);
        assert!((e.closed_form_phi(C64::new(0.0, 0.0)).unwrap() + 1.0 / SQRT_2).norm() < 1e-12);
    }
}
