//! Dormand–Prince 5(4) integration of `u' = -f(u)`, carried out in the gap variable
//! `q = 1 - u` (so `q' = f(1 - q)`) with error control relative to `min(|q|, 1)`.

use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::geometry::{Point, C64};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// Local error tolerance, relative to `min(|1 - u|, 1)`.
    pub tol: f64,
    pub exit_margin: f64,
    pub max_steps: usize,
    /// Keep every accepted step in the trajectory.
    pub record: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { tol: 1e-12, exit_margin: 1e-9, max_steps: 5_000_000, record: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    HorizonReached,
    BoundaryExit,
    Stagnation,
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::HorizonReached => "horizon-reached",
            Termination::BoundaryExit => "boundary-exit",
            Termination::Stagnation => "stagnation",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, Point)>,
    pub direction: Direction,
    pub termination: Termination,
    pub generator_id: String,
    pub tol: f64,
}

impl Trajectory {
    pub fn last(&self) -> (f64, Point) {
        *self.samples.last().expect("trajectory has its initial sample")
    }
}

/// Integrate from `p0` up to time `t_end` (negative for backward runs), stopping exactly at
/// each time in `stops` (same sign as `t_end`, increasing in modulus). Returns the trajectory
/// and the states at the stops that were reached.
pub fn integrate_gap(
    f: &FunctionExpr,
    p0: Point,
    t_end: f64,
    stops: &[f64],
    opts: &OdeOptions,
    generator_id: &str,
) -> Result<(Trajectory, Vec<(f64, Point)>)> {
    let sign = if t_end < 0.0 { -1.0 } else { 1.0 };
    let direction = if sign > 0.0 { Direction::Forward } else { Direction::Backward };
    let horizon = t_end.abs();
    let rhs = |q: C64| -> Result<C64> { Ok(f.eval(&Point::from_gap(q))? * sign) };

    let mut samples = vec![(0.0, p0)];
    let mut hits = Vec::new();
    let mut stop_iter = stops.iter().map(|s| s.abs()).filter(|s| *s <= horizon).peekable();
    while let Some(&s) = stop_iter.peek() {
        if s <= 0.0 {
            hits.push((0.0, p0));
            stop_iter.next();
        } else {
            break;
        }
    }
    let mut tau = 0.0f64;
    let mut q = p0.q;
    let mut z = p0.z;
    let mut k1 = rhs(q)?;
    let scale = |q: C64| q.norm().min(1.0).max(1e-300);
    let mut h = if k1.norm() > 0.0 { (1e-3 * scale(q) / k1.norm()).min(horizon.max(1e-12)) } else { 1e-3 };
    let mut termination = Termination::HorizonReached;
    let mut steps = 0usize;
    let one = C64::new(1.0, 0.0);

    while tau < horizon {
        // f has no zero in the disk; an exact zero this close to 1 is underflow
        if k1 == C64::default() && q != C64::default() && q.norm() < 1e-100 {
            return Err(Error::Undetermined { what: format!("f underflows at |1-z| = {:e}", q.norm()) });
        }
        if direction == Direction::Backward && k1.norm() < 1e-14 {
            termination = Termination::Stagnation;
            break;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StiffFailure { t: sign * tau, z });
        }
        let target = stop_iter.peek().copied().unwrap_or(horizon).min(horizon);
        let mut hit_stop = false;
        let h_free = h;
        if tau + h >= target {
            h = target - tau;
            hit_stop = true;
        }
        if h <= 1e-15 * tau.max(1.0) && !hit_stop {
            return Err(Error::StiffFailure { t: sign * tau, z });
        }
        let stage = || -> Result<(C64, C64, C64)> {
            let k2 = rhs(q + h * (A21 * k1))?;
            let k3 = rhs(q + h * (A31 * k1 + A32 * k2))?;
            let k4 = rhs(q + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
            let k5 = rhs(q + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
            let k6 = rhs(q + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
            let dq = h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let qn = q + dq;
            let k7 = rhs(qn)?;
            let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            Ok((qn, err, k7))
        };
        let (qn, err, k7) = match stage() {
            Ok(v) => v,
            Err(_) => {
                // stage left the domain of f; retry smaller
                h *= 0.25;
                continue;
            }
        };
        let pn = Point::from_gap(qn);
        let inside = pn.in_disk();
        let en = err.norm() / (opts.tol * scale(q).min(scale(qn)));
        if !en.is_finite() || en > 1.0 || (!inside && direction == Direction::Forward) {
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h *= fac;
            continue;
        }
        tau = if hit_stop { target } else { tau + h };
        q = qn;
        z = one - q;
        let pt = Point { z, q };
        k1 = k7;
        if opts.record || hit_stop {
            samples.push((sign * tau, pt));
        }
        if hit_stop && stop_iter.peek().is_some_and(|s| *s == target) {
            hits.push((sign * tau, pt));
            stop_iter.next();
        }
        if direction == Direction::Backward && pt.boundary_gap() < opts.exit_margin {
            termination = Termination::BoundaryExit;
            break;
        }
        let fac = if en > 0.0 { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h = if hit_stop { h_free.max(h * fac) } else { h * fac };
    }
    if !opts.record {
        let last = samples.last().map(|s| s.0);
        if last != Some(sign * tau) {
            samples.push((sign * tau, Point { z, q }));
        }
    }
    Ok((Trajectory { samples, direction, termination, generator_id: generator_id.to_string(), tol: opts.tol }, hits))
}
