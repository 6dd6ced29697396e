//! Berkson–Porta factor `p = -f/(1-z)^2` and the generator test `Re p >= 0`.

use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::geometry::{Point, C64};

pub const GENERATOR_SLACK: f64 = 1e-9;

pub fn berkson_porta_p(f: &FunctionExpr) -> FunctionExpr {
    f.neg().div(&FunctionExpr::one_minus_z().powc(C64::new(2.0, 0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorCheck {
    pub min_re_p: f64,
    pub is_generator: bool,
    pub witness: C64,
    pub skipped: usize,
    pub total: usize,
}

/// Polar grid with radii clustered towards the circle; roughly `n^2` points plus two
/// near-boundary rings.
pub fn polar_grid(n: usize) -> Vec<Point> {
    let mut pts = vec![Point::new(C64::new(0.0, 0.0))];
    let mut radii: Vec<f64> = (1..n).map(|i| 1.0 - (1.0 - i as f64 / n as f64).powi(3)).collect();
    radii.extend([1.0 - 1e-4, 1.0 - 1e-6]);
    let m = n.max(8);
    for (ri, r) in radii.iter().enumerate() {
        let offset = if ri % 2 == 0 { 0.0 } else { 0.5 };
        for j in 0..m {
            let th = 2.0 * std::f64::consts::PI * (j as f64 + offset) / m as f64;
            let q = C64::new(1.0, 0.0) - C64::from_polar(*r, th);
            // for th = 0 keep the gap exact
            let q = if j == 0 && offset == 0.0 { C64::new(1.0 - r, 0.0) } else { q };
            pts.push(Point::from_gap(q));
        }
    }
    pts
}

pub fn validate_generator(f: &FunctionExpr, grid_density: usize) -> Result<GeneratorCheck> {
    if grid_density < 8 {
        return Err(Error::Config("grid density must be at least 8".into()));
    }
    let p = berkson_porta_p(f);
    let grid = polar_grid(grid_density);
    let mut min_re = f64::INFINITY;
    let mut witness = C64::new(0.0, 0.0);
    let mut skipped = 0;
    for pt in &grid {
        match p.eval(pt) {
            Ok(v) => {
                if v.re < min_re {
                    min_re = v.re;
                    witness = pt.z;
                }
            }
            Err(_) => skipped += 1,
        }
    }
    if skipped * 10 > grid.len() {
        return Err(Error::GridUnreliable { skipped, total: grid.len() });
    }
    Ok(GeneratorCheck {
        min_re_p: min_re,
        is_generator: min_re >= -GENERATOR_SLACK,
        witness,
        skipped,
        total: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_examples() {
        let p = berkson_porta_p(&FunctionExpr::parse("i*(1-z)^2").unwrap());
        for z in [C64::new(0.2, 0.3), C64::new(-0.6, 0.1)] {
            assert!((p.eval_z(z).unwrap() - C64::new(0.0, -1.0)).norm() < 1e-14);
        }
        let p2 = berkson_porta_p(&FunctionExpr::parse("-(1-z)^2*(1-z^2)/(1+z^2)").unwrap());
        assert!((p2.eval_z(C64::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        let pm = berkson_porta_p(&FunctionExpr::parse("(1-z)^2").unwrap());
        assert!((pm.eval_z(C64::new(0.4, 0.0)).unwrap() + 1.0).norm() < 1e-15);
    }

    #[test]
    fn validate_examples() {
        let f2 = FunctionExpr::parse("-(1-z)^2*(1-z^2)/(1+z^2)").unwrap();
        let r = validate_generator(&f2, 24).unwrap();
        assert!(r.is_generator && r.min_re_p >= -1e-9);
        let bad = FunctionExpr::parse("(1-z)^2").unwrap();
        let r = validate_generator(&bad, 24).unwrap();
        assert!(!r.is_generator && (r.min_re_p + 1.0).abs() < 1e-9);
        let f1 = FunctionExpr::parse("-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)").unwrap();
        assert!(validate_generator(&f1, 24).unwrap().is_generator);
        assert!(validate_generator(&f1, 4).is_err());
    }
}
