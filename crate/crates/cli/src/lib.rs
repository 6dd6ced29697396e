//! `semiflow` command line: JSON reports on stdout, optional JSON/CSV/SVG files.

use clap::{Args, Parser, Subcommand};
use semiflow::abel::{linearization_report, LinearizationModel};
use semiflow::classify::{classification_json, classify_with_horizon, halfplane_criterion_m, DEFAULT_HORIZON};
use semiflow::conjugation::{auto_outer_b, bfid_json, bfid_report_for, outer_conjugator};
use semiflow::flow::{integrate, trajectory_csv, trajectory_json};
use semiflow::generator::validate_generator;
use semiflow::ode::OdeOptions;
use semiflow::plot::{phase_portrait, seed_ring, PlotOptions};
use semiflow::report::{complex, real, to_json_string};
use semiflow::{catalog, verify, Error, FunctionExpr, C64};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const GRID_DENSITY: usize = 24;

#[derive(Parser, Debug)]
#[command(name = "semiflow", version, about = "Semigroups of holomorphic self-maps of the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the Berkson–Porta condition Re p >= 0 on a polar grid.
    Validate(Common),
    /// Boundary asymptotics at the Denjoy–Wolff point.
    Classify(Common),
    /// Integrate one trajectory.
    Trace(Common),
    /// Abel function statistics.
    Linearize(Common),
    /// Outer conjugation with a parabolic automorphism group.
    Conjugate(Common),
    /// Backward flow invariant domains.
    Bfid(Common),
    /// Built-in examples.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Run the acceptance suite and print a pass/fail table.
    VerifyPaper {
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List,
    Show { id: String },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Generator expression in z.
    #[arg(long = "f", allow_hyphen_values = true, conflicts_with = "catalog", required_unless_present = "catalog")]
    f: Option<String>,
    #[arg(long)]
    catalog: Option<String>,
    /// Start point as `re,im`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    z0: String,
    #[arg(long, default_value_t = 10.0)]
    t: f64,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Number of trajectory seeds on the circle |z| = 0.9.
    #[arg(long, default_value_t = 8)]
    seed_grid: usize,
    /// Parameter of the outer parabolic group; chosen automatically when absent.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn io_err(path: &PathBuf, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

struct RunConfig {
    f: FunctionExpr,
    z0: C64,
    common: Common,
}

impl RunConfig {
    fn new(c: &Common) -> Result<Self, Error> {
        let f = match (&c.f, &c.catalog) {
            (Some(s), None) => FunctionExpr::parse(s)?,
            (None, Some(id)) => catalog::get(id)?.f(),
            _ => return Err(Error::Config("give exactly one of --f and --catalog".into())),
        };
        if let Some(h) = c.horizon {
            if !(h > 0.0) {
                return Err(Error::Config("--horizon must be positive".into()));
            }
        }
        if !(c.tol > 0.0) {
            return Err(Error::Config("--tol must be positive".into()));
        }
        if !(c.t >= 0.0) {
            return Err(Error::Config("--t must be non-negative".into()));
        }
        Ok(RunConfig { f, z0: parse_complex(&c.z0)?, common: c.clone() })
    }

    fn plot_options(&self) -> PlotOptions {
        let mut seeds = seed_ring(self.common.seed_grid);
        if self.z0.norm() > 0.0 {
            seeds.push(self.z0);
        }
        PlotOptions { seeds, ..PlotOptions::default() }
    }

    fn source(&self) -> Value {
        match &self.common.catalog {
            Some(id) => json!({ "catalog": id, "f": self.f.to_string() }),
            None => json!({ "f": self.f.to_string() }),
        }
    }
}

fn parse_complex(s: &str) -> Result<C64, Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Config(format!("bad number `{t}` in `{s}`")));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(Error::Config(format!("expected `re,im`, got `{s}`"))),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let json_path = match &cli.command {
        Command::VerifyPaper { json } => json.clone(),
        Command::Catalog { .. } => None,
        Command::Validate(c)
        | Command::Classify(c)
        | Command::Trace(c)
        | Command::Linearize(c)
        | Command::Conjugate(c)
        | Command::Bfid(c) => c.json.clone(),
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Lib(e)) => {
            let code = if e.is_numeric() { EXIT_NUMERIC } else { EXIT_CONFIG };
            let report = to_json_string(&json!({ "error": e.kind(), "message": e.to_string() }));
            if code == EXIT_NUMERIC {
                let _ = out.write_all(report.as_bytes());
                if let Some(p) = json_path {
                    let _ = std::fs::write(p, &report);
                }
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            code
        }
    }
}

fn emit(out: &mut dyn Write, cfg: Option<&RunConfig>, v: &Value) -> Result<(), Failure> {
    let text = to_json_string(v);
    if let Some(p) = cfg.and_then(|c| c.common.json.as_ref()) {
        write_file(p, &text)?;
    }
    out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
}

fn write_svg(
    cfg: &RunConfig,
    bfid: Option<(&LinearizationModel, &[semiflow::conjugation::ConjugationCertificate])>,
) -> Result<(), Failure> {
    if let Some(p) = &cfg.common.svg {
        let svg = phase_portrait(&cfg.f, &cfg.plot_options(), bfid)?;
        write_file(p, &svg)?;
    }
    Ok(())
}

fn require_generator(f: &FunctionExpr) -> Result<(), Error> {
    let g = validate_generator(f, GRID_DENSITY)?;
    if g.is_generator {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "not a generator with Denjoy–Wolff point 1: Re p = {:.3e} at {}",
            g.min_re_p, g.witness
        )))
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Catalog { action } => {
            let v = match action {
                CatalogAction::List => catalog::list_json(),
                CatalogAction::Show { id } => catalog::get(&id)?.to_json(),
            };
            emit(out, None, &v)?;
            Ok(0)
        }
        Command::VerifyPaper { json } => {
            let results = verify::run_all();
            out.write_all(verify::table(&results).as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
            if let Some(p) = json {
                let v = Value::Array(results.iter().map(|r| r.to_json()).collect());
                write_file(&p, &to_json_string(&v))?;
            }
            Ok(if results.iter().all(|r| r.passed()) { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Validate(c) => {
            let cfg = RunConfig::new(&c)?;
            let g = validate_generator(&cfg.f, GRID_DENSITY)?;
            let v = json!({
                "source": cfg.source(),
                "is_generator": g.is_generator,
                "min_re_p": real(g.min_re_p),
                "witness": complex(g.witness),
                "skipped": g.skipped,
                "total": g.total,
            });
            emit(out, Some(&cfg), &v)?;
            write_svg(&cfg, None)?;
            Ok(0)
        }
        Command::Classify(c) => {
            let cfg = RunConfig::new(&c)?;
            require_generator(&cfg.f)?;
            let horizon = c.horizon.unwrap_or(DEFAULT_HORIZON);
            let profile = classify_with_horizon(&cfg.f, horizon)?;
            let hm = LinearizationModel::new(&cfg.f)
                .ok()
                .and_then(|m| halfplane_criterion_m(&m, &[cfg.z0], horizon.min(1e5)).ok());
            let mut v = classification_json(&profile, hm.as_ref());
            v["source"] = cfg.source();
            emit(out, Some(&cfg), &v)?;
            write_svg(&cfg, None)?;
            Ok(0)
        }
        Command::Trace(c) => {
            let cfg = RunConfig::new(&c)?;
            require_generator(&cfg.f)?;
            let opts = OdeOptions { tol: c.tol, record: true, ..OdeOptions::default() };
            let tr = integrate(&cfg.f, cfg.z0, c.t, &opts)?;
            let mut v = trajectory_json(&tr);
            v["source"] = cfg.source();
            emit(out, Some(&cfg), &v)?;
            if let Some(p) = &c.csv {
                write_file(p, &trajectory_csv(&tr))?;
            }
            write_svg(&cfg, None)?;
            Ok(0)
        }
        Command::Linearize(c) => {
            let cfg = RunConfig::new(&c)?;
            require_generator(&cfg.f)?;
            let m = LinearizationModel::new(&cfg.f)?;
            let mut v = linearization_report(&m, GRID_DENSITY)?;
            v["source"] = cfg.source();
            v["h_z0"] = complex(m.h_z(cfg.z0)?);
            emit(out, Some(&cfg), &v)?;
            write_svg(&cfg, None)?;
            Ok(0)
        }
        Command::Conjugate(c) => {
            let cfg = RunConfig::new(&c)?;
            require_generator(&cfg.f)?;
            let m = LinearizationModel::new(&cfg.f)?;
            let b = match c.b {
                Some(b) => b,
                None => auto_outer_b(&m)?.ok_or_else(|| Error::Undetermined {
                    what: "h(D) lies in no half-plane {Im w > c} or {Im w < c}; pass --b to force".into(),
                })?,
            };
            let cert = outer_conjugator(&m, b)?;
            let mut v = cert.to_json();
            v["source"] = cfg.source();
            v["psi_z0"] = complex(cert.psi(&m, &semiflow::Point::new(cfg.z0))?);
            emit(out, Some(&cfg), &v)?;
            write_svg(&cfg, None)?;
            Ok(0)
        }
        Command::Bfid(c) => {
            let cfg = RunConfig::new(&c)?;
            require_generator(&cfg.f)?;
            let m = LinearizationModel::new(&cfg.f)?;
            let certs = bfid_report_for(&m)?;
            let v = json!({ "source": cfg.source(), "count": certs.len(), "certificates": bfid_json(&certs) });
            emit(out, Some(&cfg), &v)?;
            write_svg(&cfg, Some((&m, &certs)))?;
            Ok(0)
        }
    }
}
