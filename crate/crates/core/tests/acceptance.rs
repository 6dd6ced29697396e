//! One test per reproduction criterion. Each prints a PASS/FAIL line with its measurements.

use semiflow::verify::{self, CriterionResult};
use std::f64::consts::FRAC_PI_4;

fn report(r: &CriterionResult) {
    println!("{}", r.line());
    for c in &r.checks {
        println!("      [{}] {}: {}", if c.pass { "ok" } else { "xx" }, c.name, c.measured);
    }
}

fn require(r: CriterionResult) {
    report(&r);
    assert!(r.passed(), "{}", r.line());
}

/// The target `2e^{iπ/4}` for `t(1-F_t(0))^{1/2}` is `μ/α` with `μ = e^{iπ/4}`. The quadrant's
/// closed-form Abel function `h = e^{iπ/4}(√((1+z)/(1-z)) - 1)` gives
/// `(1-z)^{3/2} h'(z) -> e^{iπ/4}/√2`, so the limit is `√2 e^{iπ/4} = 1+i` and the criterion
/// cannot hold. The test keeps the FAIL line and checks that the miss is exactly that factor.
#[test]
fn criterion_01_quadrant() {
    let r = verify::criterion_1();
    report(&r);
    for c in &r.checks {
        if c.name.starts_with("|t(1-F_t(0))") {
            assert!(!c.pass, "the printed target became attainable: {}", c.measured);
            let m = semiflow::abel::LinearizationModel::new(&semiflow::catalog::get("quadrant").unwrap().f()).unwrap();
            let p = m.abel_flow(&semiflow::Point::new(semiflow::C64::new(0.0, 0.0)), 1e6).unwrap();
            let v = 1e6 * p.q.sqrt();
            let derived = semiflow::C64::from_polar(std::f64::consts::SQRT_2, FRAC_PI_4);
            assert!((v - derived).norm() < 0.02 * derived.norm(), "measured {v}");
        } else {
            assert!(c.pass, "{}: {}", c.name, c.measured);
        }
    }
}

#[test]
fn criterion_02_power_family() {
    require(verify::criterion_2());
}

#[test]
fn criterion_03_abel_residual() {
    require(verify::criterion_3());
}

#[test]
fn criterion_04_hyperbolic_strip() {
    require(verify::criterion_4());
}

#[test]
fn criterion_05_f1() {
    require(verify::criterion_5());
}

#[test]
fn criterion_06_f2() {
    require(verify::criterion_6());
}

#[test]
fn criterion_07_argument_bound() {
    require(verify::criterion_7());
}

#[test]
fn criterion_08_strong_tangency() {
    require(verify::criterion_8());
}

#[test]
fn criterion_09_rigidity() {
    require(verify::criterion_9());
}

#[test]
fn criterion_10_angular_only() {
    require(verify::criterion_10());
}

#[test]
fn criterion_11_properties() {
    require(verify::criterion_11());
}
