//! SVG phase portraits: the field `-f`, the unit circle, trajectories and BFID outlines.

use crate::abel::LinearizationModel;
use crate::conjugation::ConjugationCertificate;
use crate::error::Result;
use crate::expr::FunctionExpr;
use crate::flow::integrate_from;
use crate::geometry::{DiskPoint, Point, C64};
use crate::ode::OdeOptions;
use std::f64::consts::PI;
use std::fmt::Write;

const SIZE: f64 = 640.0;
const RADIUS: f64 = 280.0;
/// Arrow length cap in disk radii.
pub const ARROW_CAP: f64 = 0.08;

#[derive(Clone, Debug)]
pub struct PlotOptions {
    /// Number of Chebyshev radii for the vector field.
    pub density: usize,
    pub arrow_scale: f64,
    pub seeds: Vec<C64>,
    pub horizon: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions { density: 12, arrow_scale: 0.05, seeds: seed_ring(8), horizon: 50.0 }
    }
}

/// `n` seeds on the circle of radius 0.9.
pub fn seed_ring(n: usize) -> Vec<C64> {
    (0..n).map(|j| C64::from_polar(0.9, 2.0 * PI * (j as f64 + 0.5) / n as f64)).collect()
}

fn xy(z: C64) -> (f64, f64) {
    (SIZE / 2.0 + RADIUS * z.re, SIZE / 2.0 - RADIUS * z.im)
}

/// Chebyshev radii on (0, 1) with angular counts proportional to the circumference.
pub fn field_nodes(density: usize) -> Vec<C64> {
    let n = density.max(2);
    let mut v = vec![];
    for j in 0..n {
        let r = 0.5 * (1.0 - (PI * (j as f64 + 0.5) / n as f64).cos()) * 0.97;
        let m = ((2.0 * PI * r * n as f64).round() as usize).max(4);
        for k in 0..m {
            v.push(C64::from_polar(r, 2.0 * PI * k as f64 / m as f64 + 0.3 * j as f64));
        }
    }
    v
}

fn polyline(out: &mut String, pts: &[C64], style: &str) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::new();
    for p in pts {
        let (x, y) = xy(*p);
        let _ = write!(d, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(out, r#"<polyline points="{}" {style}/>"#, d.trim_end());
}

fn arrow(out: &mut String, z: C64, v: C64, opts: &PlotOptions) {
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return;
    }
    let len = (opts.arrow_scale * n).min(ARROW_CAP);
    let tip = z + v / n * len;
    let (x0, y0) = xy(z);
    let (x1, y1) = xy(tip);
    let back = -v / n * (0.3 * len);
    let (xa, ya) = xy(tip + back * C64::from_polar(1.0, 0.5));
    let (xb, yb) = xy(tip + back * C64::from_polar(1.0, -0.5));
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2},{y0:.2} L{x1:.2},{y1:.2} M{xa:.2},{ya:.2} L{x1:.2},{y1:.2} L{xb:.2},{yb:.2}" class="arrow"/>"#
    );
}

/// Image under φ of the circle of radius 0.995.
pub fn bfid_outline(model: &LinearizationModel, cert: &ConjugationCertificate, n: usize) -> Vec<C64> {
    let th: Vec<f64> = (0..=n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect();
    crate::par_map(&th, |t| cert.phi(model, &Point::new(C64::from_polar(0.995, *t))).ok().map(|p| p.z))
        .into_iter()
        .flatten()
        .collect()
}

pub fn phase_portrait(
    f: &FunctionExpr,
    opts: &PlotOptions,
    bfid: Option<(&LinearizationModel, &[ConjugationCertificate])>,
) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    out.push_str(
        "<style>.arrow{stroke:#555;stroke-width:1;fill:none}.traj{stroke:#c03;stroke-width:1.5;fill:none}\
         .bfid{stroke:#06c;stroke-width:2;fill:none}.disk{stroke:#000;stroke-width:1.5;fill:none}</style>\n",
    );
    let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{RADIUS}" class="disk"/>"#, SIZE / 2.0, SIZE / 2.0);
    let nodes = field_nodes(opts.density);
    let vals = crate::par_map(&nodes, |z| f.eval_z(*z).ok());
    for (z, v) in nodes.iter().zip(vals) {
        if let Some(v) = v {
            arrow(&mut out, *z, -v, opts);
        }
    }
    let rec = OdeOptions { record: true, ..OdeOptions::default() };
    let trajs = crate::par_map(&opts.seeds, |z| -> Result<Vec<C64>> {
        let p = DiskPoint::new(*z)?.point();
        let tr = integrate_from(f, p, opts.horizon, &rec)?;
        Ok(tr.samples.iter().map(|s| s.1.z).collect())
    });
    for t in trajs {
        polyline(&mut out, &t?, r#"class="traj""#);
    }
    if let Some((model, certs)) = bfid {
        for c in certs {
            polyline(&mut out, &bfid_outline(model, c, 240), r#"class="bfid""#);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portrait_has_all_layers() {
        let f = FunctionExpr::parse("i*(1-z)^2").unwrap();
        let svg = phase_portrait(&f, &PlotOptions::default(), None).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("class=\"disk\""));
        assert_eq!(svg.matches("class=\"traj\"").count(), 8);
        assert!(svg.matches("class=\"arrow\"").count() > 50);
    }

    #[test]
    fn arrows_are_clipped() {
        let f = FunctionExpr::parse("100*(z^2-1)").unwrap();
        let mut s = String::new();
        let opts = PlotOptions::default();
        arrow(&mut s, C64::new(0.0, 0.0), -f.eval_z(C64::new(0.0, 0.0)).unwrap(), &opts);
        let nums: Vec<f64> = s
            .split(|c: char| !(c.is_ascii_digit() || c == '.'))
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().unwrap())
            .collect();
        let len = ((nums[2] - nums[0]).powi(2) + (nums[3] - nums[1]).powi(2)).sqrt();
        assert!((len / RADIUS - ARROW_CAP).abs() < 1e-3);
    }
}
