//! The `utm` command line.
//!
//! Every verb reads one problem document (or names a catalog case), writes a
//! single JSON or CSV payload to stdout or to `--output`, and exits 0.
//! Operational failures go to stderr with exit code 2. An ill-posed verdict
//! is a result like any other; `verify` alone exits 1, when one of its
//! residuals misses its threshold.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::charmat::{build_char_matrix, char_det, cramer_system};
use crate::ibvp::{parse_problem, validate_with, ProblemSpec, ValidatedProblem};
use crate::oracle::{mol_solve, MolConfig, OracleCase};
use crate::solution::{
    data_identity_residual, global_relation_residual, DataEvaluator, Representation, Solver,
};
use crate::spectrum::{default_radius, find_zeros, verify_symmetry, Spectrum, CLUSTER_SIZE};
use crate::wellposed::{
    condition_51, condition_robin, duality_verdict, pseudo_periodic_criterion, verdict_for, Status,
    TOL_MARGIN,
};
use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("problem rejected:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("bad --tol `{0}`: expected compat=<float> or margin=<float>")]
    Tolerance(String),
    #[error("bad --grid `{0}`: expected <x points>x<t points>, both at least 1")]
    Grid(String),
    #[error("{0}")]
    Failed(String),
}

#[derive(Parser, Debug)]
#[command(
    name = "utm",
    version,
    about = "Well-posedness, spectra and transform-method solutions of two-point evolution problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the payload here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Override a tolerance: `compat=<f>` or `margin=<f>`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Boundary-condition classification and index sets.
    Classify { spec: PathBuf },
    /// Characteristic matrix entries and determinant in dump format.
    Matrix { spec: PathBuf },
    /// Decay verdict, per sector.
    Wellposed {
        spec: PathBuf,
        /// Also report the problem with the direction reversed.
        #[arg(long)]
        dual: bool,
    },
    /// Zeros of the characteristic determinant.
    Spectrum {
        spec: PathBuf,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Solution on a uniform grid as CSV `x,t,re,im,error`.
    Solve {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Rep::Series)]
        rep: Rep,
        /// `<x points>x<t points>`; x spans [0, 1], t spans (0, T].
        #[arg(long, default_value = "11x5")]
        grid: String,
    },
    /// Symmetry, identity and reference residuals.
    Verify { spec: PathBuf },
    /// A catalog reference solution on the same grid and CSV shape as `solve`.
    Oracle {
        case: String,
        #[arg(long, default_value = "11x5")]
        grid: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Rep {
    Series,
    Integral,
}

#[derive(Clone, Copy, Debug)]
struct Tolerances {
    compat: Option<f64>,
    margin: f64,
}

fn parse_tolerances(items: &[String]) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances {
        compat: None,
        margin: TOL_MARGIN,
    };
    for item in items {
        let bad = || CliError::Tolerance(item.clone());
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(value.is_finite() && value > 0.0) {
            return Err(bad());
        }
        match key.trim() {
            "compat" => tol.compat = Some(value),
            "margin" => tol.margin = value,
            _ => return Err(bad()),
        }
    }
    Ok(tol)
}

/// `"5x3"` or `"5×3"` into point counts.
pub fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Grid(text.to_string());
    let (x, t) = text.split_once(['x', 'X', '×']).ok_or_else(bad)?;
    let x: usize = x.trim().parse().map_err(|_| bad())?;
    let t: usize = t.trim().parse().map_err(|_| bad())?;
    if x == 0 || t == 0 {
        return Err(bad());
    }
    Ok((x, t))
}

/// `x` points spanning `[0, 1]` and `t` points `T k / nt`, `k = 1..=nt`.
fn grid_points(nx: usize, nt: usize, horizon: f64) -> (Vec<f64>, Vec<f64>) {
    let xs = if nx == 1 {
        vec![0.5]
    } else {
        (0..nx).map(|i| i as f64 / (nx - 1) as f64).collect()
    };
    let ts = (1..=nt).map(|k| horizon * k as f64 / nt as f64).collect();
    (xs, ts)
}

fn load(path: &Path, tol: Tolerances) -> Result<ValidatedProblem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let spec =
        parse_problem(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    check(&spec, tol)
}

fn check(spec: &ProblemSpec, tol: Tolerances) -> Result<ValidatedProblem, CliError> {
    validate_with(spec, tol.compat)
        .map_err(|v| CliError::Invalid(v.iter().map(ToString::to_string).collect()))
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("payload serializes");
    s.push('\n');
    s
}

fn spectrum_of(p: &ValidatedProblem, radius: f64) -> Result<Spectrum, CliError> {
    let delta = char_det(&build_char_matrix(p)).map_err(failed)?;
    find_zeros(&delta, radius).map_err(failed)
}

fn classify(p: &ValidatedProblem) -> Result<String, CliError> {
    let spec = p.spec();
    let sets = p.sets();
    let c51 = condition_51(p.classification(), spec.order, spec.direction).ok();
    Ok(pretty(&json!({
        "n": spec.order,
        "a": [spec.direction.re, spec.direction.im],
        "classification": p.classification(),
        "index_sets": {
            "hat_plus": sets.hat_plus,
            "hat_minus": sets.hat_minus,
            "tilde_plus": sets.tilde_plus,
            "tilde_minus": sets.tilde_minus,
            "unknown_labels": sets.unknown_labels,
            "pivot_labels": sets.pivot_labels,
        },
        "condition_51": c51,
        "condition_robin": condition_robin(p.classification(), spec.order, spec.direction),
        "pseudo_periodic_ill_posed": pseudo_periodic_criterion(spec),
    })))
}

fn matrix(p: &ValidatedProblem) -> Result<String, CliError> {
    let m = build_char_matrix(p);
    let delta = char_det(&m).map_err(failed)?;
    Ok(m.dump(&delta))
}

fn wellposed(p: &ValidatedProblem, dual: bool, tol: Tolerances) -> Result<String, CliError> {
    let verdict = if dual {
        let (mut forward, backward) = duality_verdict(p, tol.margin).map_err(failed)?;
        forward.dual = Some(Box::new(backward));
        forward
    } else {
        verdict_for(p, tol.margin).map_err(failed)?
    };
    Ok(pretty(&verdict))
}

fn spectrum(p: &ValidatedProblem, radius: Option<f64>, format: Format) -> Result<String, CliError> {
    let radius = radius.unwrap_or_else(|| default_radius(p.order()));
    if !(radius.is_finite() && radius > 0.0) {
        return Err(CliError::Failed(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let s = spectrum_of(p, radius)?;
    Ok(match format {
        Format::Json => pretty(&s),
        Format::Csv => {
            let mut out = String::from("re,im,mult,class\n");
            for z in &s.zeros {
                out.push_str(&format!("{},{},{},{:?}\n", z.re, z.im, z.mult, z.class));
            }
            out
        }
    })
}

fn csv_rows(rows: impl Iterator<Item = (f64, f64, C64, f64)>) -> String {
    let mut out = String::from("x,t,re,im,error\n");
    for (x, t, v, err) in rows {
        out.push_str(&format!("{x},{t},{},{},{err:e}\n", v.re, v.im));
    }
    out
}

fn solve(p: &ValidatedProblem, rep: Rep, grid: &str) -> Result<String, CliError> {
    let (nx, nt) = parse_grid(grid)?;
    let (xs, ts) = grid_points(nx, nt, p.spec().final_time);
    let solver = Solver::new(p, ts[0]).map_err(failed)?;
    let rep = match rep {
        Rep::Series => Representation::Series,
        Rep::Integral => Representation::Integral,
    };
    let rows = solver.grid(rep, &xs, &ts);
    let mut values = Vec::with_capacity(rows.len());
    for row in rows {
        let e = row
            .result
            .map_err(|e| CliError::Failed(format!("at x={}, t={}: {e}", row.x, row.t)))?;
        values.push((row.x, row.t, e.value, e.error));
    }
    Ok(csv_rows(values.into_iter()))
}

fn oracle(case: &str, grid: &str) -> Result<String, CliError> {
    let case = OracleCase::catalog(case).map_err(failed)?;
    let (nx, nt) = parse_grid(grid)?;
    let (xs, ts) = grid_points(nx, nt, case.spec.final_time);
    let rows = ts.iter().flat_map(|&t| {
        let tail = case.tail_bound(t);
        let case = &case;
        xs.iter().map(move |&x| (x, t, case.value(x, t), tail))
    });
    Ok(csv_rows(rows))
}

/// Residual suite. Returns the payload and whether every check passed.
fn verify(p: &ValidatedProblem) -> Result<(String, bool), CliError> {
    let spec = p.spec();
    let n = spec.order;
    let m = build_char_matrix(p);
    let delta = char_det(&m).map_err(failed)?;
    let symmetry = verify_symmetry(&delta, 10.0, 7).map_err(failed)?;
    let cs = cramer_system(p).map_err(failed)?;
    let de = DataEvaluator::new(spec);
    let samples: Vec<C64> = (0..50)
        .map(|k| C64::from_polar(0.5 + 5.0 * (k as f64 / 50.0), 2.399963 * k as f64))
        .collect();
    let identity = samples
        .iter()
        .map(|&rho| data_identity_residual(&cs, &de, rho))
        .fold(0.0, f64::max);
    let spectrum = spectrum_of(p, default_radius(n))?;
    let rotation = spectrum.rotation_defect(n);
    // Repeated zeros are only located to about the square root of the
    // working precision.
    let rotation_tol = if spectrum.has_multiple() {
        CLUSTER_SIZE
    } else {
        1e-8
    };

    let mut checks = vec![
        json!({"name": "determinant_symmetry", "residual": symmetry, "threshold": 1e-10, "pass": symmetry <= 1e-10}),
        json!({"name": "data_identity", "residual": identity, "threshold": 1e-9, "pass": identity <= 1e-9}),
        json!({"name": "spectrum_rotation", "residual": rotation, "threshold": rotation_tol, "pass": rotation <= rotation_tol}),
    ];
    // The finite-difference reference covers second-order parabolic problems.
    if n == 2 && spec.direction.re > 0.0 {
        let sol = mol_solve(
            spec,
            MolConfig {
                cells: 1024,
                steps: 8192,
                horizon: None,
            },
            &[],
        )
        .map_err(failed)?;
        let gr =
            global_relation_residual(spec, &sol.traces(), &*sol.final_transform(), &samples[..20]);
        checks.push(json!({"name": "global_relation_mol", "residual": gr, "threshold": 1e-4, "pass": gr <= 1e-4}));
    }
    if let Ok(solver) = Solver::new(p, 0.1_f64.min(spec.final_time)) {
        let t = 0.1_f64.min(spec.final_time);
        let mut worst: Option<f64> = None;
        for x in [0.25, 0.5, 0.75] {
            if let (Ok(a), Ok(b)) = (solver.series(x, t, 0), solver.integral(x, t, 0)) {
                worst = Some(worst.unwrap_or(0.0).max((a.value - b.value).norm()));
            }
        }
        if let Some(w) = worst {
            checks.push(json!({"name": "series_vs_integral", "residual": w, "threshold": 1e-6, "pass": w <= 1e-6}));
        }
    }
    let pass = checks.iter().all(|c| c["pass"] == true);
    let status = verdict_for(p, TOL_MARGIN)
        .map(|v| v.status)
        .unwrap_or(Status::Indeterminate);
    Ok((
        pretty(&json!({"status": status, "checks": checks, "pass": pass})),
        pass,
    ))
}

/// Writes through a sibling temporary file so readers never see a partial
/// payload.
fn write_atomic(path: &Path, payload: &str) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, payload).map_err(wrap)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        wrap(e)
    })
}

/// Runs one parsed command. Returns the exit code.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = (|| -> Result<(String, i32), CliError> {
        let tol = parse_tolerances(&cli.tol)?;
        let payload = match &cli.command {
            Command::Classify { spec } => classify(&load(spec, tol)?)?,
            Command::Matrix { spec } => matrix(&load(spec, tol)?)?,
            Command::Wellposed { spec, dual } => wellposed(&load(spec, tol)?, *dual, tol)?,
            Command::Spectrum {
                spec,
                radius,
                format,
            } => spectrum(&load(spec, tol)?, *radius, *format)?,
            Command::Solve { spec, rep, grid } => solve(&load(spec, tol)?, *rep, grid)?,
            Command::Oracle { case, grid } => oracle(case, grid)?,
            Command::Verify { spec } => {
                let (payload, pass) = verify(&load(spec, tol)?)?;
                return Ok((payload, if pass { 0 } else { 1 }));
            }
        };
        Ok((payload, 0))
    })();
    let result = outcome.and_then(|(payload, code)| {
        match &cli.output {
            Some(path) => write_atomic(path, &payload)?,
            None => stdout
                .write_all(payload.as_bytes())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?,
        }
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "utm: {e}");
            2
        }
    }
}

/// Parses `args` (program name first) and runs. Usage errors exit 2.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, stdout, stderr),
        Err(e) => {
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let text = e.render().to_string();
            if is_help {
                let _ = stdout.write_all(text.as_bytes());
                0
            } else {
                let _ = stderr.write_all(text.as_bytes());
                2
            }
        }
    }
}
