//! Implementations of the subcommands.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ppt_bell_core::analytic::quantum_value_analytic;
use ppt_bell_core::bell::{
    classical_bound, evaluate_behavior, make_d4_first, make_d4_second, make_id, make_yu_oh, BellFunctional,
};
use ppt_bell_core::linalg::{BipartiteShape, Matrix};
use ppt_bell_core::model::{
    behavior, bell_operator, build_measurements, build_state_vectors, theta_frame, DensityMatrix,
};
use ppt_bell_core::optimize::{
    curve, log_spaced_dims, optimize_full, restricted_dimension_search, seesaw, CurveMode, SeesawConfig,
    SimplexConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::formats::{
    fmt_value, matrix_doc, measurement_docs, write_csv, CsvRow, FunctionalDoc, OptResultDoc, ParamsDoc,
    ParamsInput, SeesawConfigDoc, SeesawDoc, SimplexConfigDoc,
};

/// Tolerance applied to every residual checked by `verify`.
pub const VERIFY_TOL: f64 = 1e-9;
/// Eigenvalues at or below this count as zero when reporting rank.
pub const RANK_TOL: f64 = 1e-7;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// A checked quantity is out of tolerance.
    Verify(String),
    /// Bad arguments, unreadable input or an enumeration beyond the cap.
    Usage(String),
    /// An optimizer did not produce a usable result.
    Optimizer(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Optimizer(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Verify(m) => write!(f, "verification failed: {m}"),
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Optimizer(m) => write!(f, "optimizer failed: {m}"),
        }
    }
}

pub type Outcome = Result<(), Failure>;

fn io_err(e: std::io::Error) -> Failure {
    Failure::Usage(format!("i/o error: {e}"))
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(usage)?;
    fs::write(path, text + "\n").map_err(io_err)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    /// The `I_d` family.
    Id,
    /// The Yu–Oh inequality.
    YuOh,
    /// First `d = 4` inequality as printed.
    D4First,
    /// Second `d = 4` inequality.
    D4Second,
}

pub fn functional(family: Family, d: usize) -> Result<BellFunctional, Failure> {
    match family {
        Family::Id => make_id(d).map_err(usage),
        Family::YuOh => make_yu_oh(d).map_err(usage),
        Family::D4First => Ok(make_d4_first()),
        Family::D4Second => Ok(make_d4_second()),
    }
}

fn outcomes(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Exact classical bound of a functional with one maximizing strategy.
pub fn cmd_bound(family: Family, d: usize, functional_out: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let f = functional(family, d)?;
    let cb = classical_bound(&f).map_err(usage)?;
    writeln!(out, "classical bound: {}", cb.value).map_err(io_err)?;
    writeln!(out, "alice outcomes by setting: {}", outcomes(&cb.strategy.alice)).map_err(io_err)?;
    writeln!(out, "bob outcomes by setting: {}", outcomes(&cb.strategy.bob)).map_err(io_err)?;
    writeln!(out, "strategies checked: {}", cb.strategies_checked).map_err(io_err)?;
    if let Some(path) = functional_out {
        let mut doc = FunctionalDoc::from(&f);
        doc.bound = cb.value;
        write_json(path, &doc)?;
    }
    Ok(())
}

/// Run metadata written next to a CSV file.
#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    mode: &'a str,
    dims: &'a [usize],
    seed: u64,
    config: SimplexConfigDoc,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes rows as CSV (or the given JSON documents) to `out` or stdout.
fn emit<T: Serialize>(
    rows: &[CsvRow],
    docs: &T,
    format: Format,
    out_path: Option<&Path>,
    stdout: &mut dyn Write,
) -> Outcome {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, rows).map_err(usage)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, docs).map_err(usage)?;
            buf.push(b'\n');
        }
    }
    match out_path {
        Some(p) => fs::write(p, buf).map_err(io_err),
        None => stdout.write_all(&buf).map_err(io_err),
    }
}

pub struct TableArgs<'a> {
    pub d_min: usize,
    pub d_max: usize,
    pub cfg: SimplexConfig,
    pub format: Format,
    pub out: Option<&'a Path>,
    pub params_dir: Option<&'a Path>,
}

/// Optimized family value for every `d` in a range, one worker task per `d`.
pub fn cmd_table(a: &TableArgs<'_>, stdout: &mut dyn Write) -> Outcome {
    if a.d_min < 3 || a.d_min > a.d_max {
        return Err(Failure::Usage("table needs 3 <= d-min <= d-max".into()));
    }
    a.cfg.validate().map_err(usage)?;
    let dims: Vec<usize> = (a.d_min..=a.d_max).collect();
    let results: Vec<_> = dims.par_iter().map(|&d| (d, optimize_full(d, &a.cfg))).collect();

    let mut rows = Vec::new();
    let mut docs = Vec::new();
    let mut failed = Vec::new();
    for (d, r) in results {
        match r {
            Ok(o) => {
                let doc = OptResultDoc {
                    d,
                    value: o.value,
                    params: ParamsDoc::new(d, &o.state, &o.measurements),
                    diagnostics: o.diagnostics.into(),
                    seed: a.cfg.seed,
                    config: a.cfg.into(),
                };
                rows.push(CsvRow {
                    d,
                    value: o.value,
                    mode: "full".into(),
                    seed: a.cfg.seed,
                });
                docs.push(doc);
            }
            Err(e) => {
                failed.push(format!("d={d}: {e}"));
                rows.push(CsvRow {
                    d,
                    value: f64::NAN,
                    mode: "failed".into(),
                    seed: a.cfg.seed,
                });
            }
        }
    }

    let params_dir = a.params_dir.map(Path::to_path_buf).or_else(|| {
        a.out
            .map(|p| p.parent().map(Path::to_path_buf).unwrap_or_default())
    });
    if let Some(dir) = params_dir {
        let dir = if dir.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            dir
        };
        fs::create_dir_all(&dir).map_err(io_err)?;
        for doc in &docs {
            write_json(&dir.join(format!("params_d{}.json", doc.d)), doc)?;
        }
    }
    emit(&rows, &docs, a.format, a.out, stdout)?;
    if let (Some(p), Format::Csv) = (a.out, a.format) {
        write_json(
            &sidecar_path(p),
            &Sidecar {
                command: "table",
                mode: "full",
                dims: &dims,
                seed: a.cfg.seed,
                config: a.cfg.into(),
            },
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Optimizer(failed.join("; ")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Full,
    Reduced,
    Asymptotic,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Reduced => "reduced",
            Mode::Asymptotic => "asymptotic",
        }
    }
}

pub struct CurveArgs<'a> {
    pub d_min: usize,
    pub d_max: usize,
    pub per_octave: usize,
    pub mode: Mode,
    pub cfg: SimplexConfig,
    pub format: Format,
    pub out: Option<&'a Path>,
}

#[derive(Serialize)]
struct CurveDoc {
    d: usize,
    value: f64,
    mode: &'static str,
    diagnostics: crate::formats::DiagnosticsDoc,
    seed: u64,
    config: SimplexConfigDoc,
}

/// Value against log-spaced `d`, warm-started across dimensions.
pub fn cmd_curve(a: &CurveArgs<'_>, stdout: &mut dyn Write) -> Outcome {
    // the reduced solution needs d >= 4
    let lowest = if a.mode == Mode::Reduced { 4 } else { 3 };
    let d_min = a.d_min.max(lowest);
    if d_min > a.d_max || a.per_octave == 0 {
        return Err(Failure::Usage(format!(
            "curve needs {lowest} <= d-min <= d-max and per-octave >= 1"
        )));
    }
    a.cfg.validate().map_err(usage)?;
    let dims = log_spaced_dims(d_min, a.d_max, a.per_octave);
    let mode = match a.mode {
        Mode::Full => CurveMode::Full,
        Mode::Reduced => CurveMode::Reduced,
        Mode::Asymptotic => CurveMode::Asymptotic,
    };
    let points = curve(&dims, mode, &a.cfg).map_err(|e| Failure::Optimizer(e.to_string()))?;
    let rows: Vec<CsvRow> = points
        .iter()
        .map(|p| CsvRow {
            d: p.d,
            value: p.value,
            mode: a.mode.name().into(),
            seed: a.cfg.seed,
        })
        .collect();
    let docs: Vec<CurveDoc> = points
        .iter()
        .map(|p| CurveDoc {
            d: p.d,
            value: p.value,
            mode: a.mode.name(),
            diagnostics: p.diagnostics.into(),
            seed: a.cfg.seed,
            config: a.cfg.into(),
        })
        .collect();
    emit(&rows, &docs, a.format, a.out, stdout)?;
    if let (Some(p), Format::Csv) = (a.out, a.format) {
        write_json(
            &sidecar_path(p),
            &Sidecar {
                command: "curve",
                mode: a.mode.name(),
                dims: &dims,
                seed: a.cfg.seed,
                config: a.cfg.into(),
            },
        )?;
    }
    Ok(())
}

/// One line of the verification report.
struct Check {
    name: String,
    value: f64,
    ok: bool,
    /// Reported only, never fails.
    info: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            // NaN fails
            ok: value.abs() <= tol,
            info: false,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, floor: f64) -> Self {
        Check {
            name: name.into(),
            value,
            ok: value >= floor,
            info: false,
        }
    }

    fn info(name: impl Into<String>, value: f64) -> Self {
        Check {
            name: name.into(),
            value,
            ok: true,
            info: true,
        }
    }
}

fn eigen_checks(rho: &DensityMatrix, checks: &mut Vec<Check>) -> Result<(), Failure> {
    checks.push(Check::at_least(
        "min eigenvalue of rho",
        rho.min_eigenvalue().map_err(usage)?,
        -VERIFY_TOL,
    ));
    checks.push(Check::at_least(
        "min eigenvalue of partial transpose",
        rho.min_eigenvalue_pt().map_err(usage)?,
        -VERIFY_TOL,
    ));
    checks.push(Check::info("rank", rho.rank(RANK_TOL).map_err(usage)? as f64));
    Ok(())
}

fn family_checks(p: &ParamsDoc) -> Result<Vec<Check>, Failure> {
    let d = p.d;
    if d < 3 {
        return Err(Failure::Usage("params need d >= 3".into()));
    }
    let sp = p.state();
    let mp = p.measurements();
    let mut checks = vec![
        Check::at_most("normalization residual", sp.normalization_deficit(d), VERIFY_TOL),
        Check::at_most("measurement norm residual", mp.norm_residual(), VERIFY_TOL),
    ];
    for (i, r) in sp.constraint_residuals(d).iter().enumerate() {
        checks.push(Check::at_most(
            format!("constraint {} residual", i + 1),
            *r,
            VERIFY_TOL,
        ));
    }
    let frame = theta_frame(d).map_err(usage)?;
    let n = d * d;
    let mut m = Matrix::zeros(n, n);
    for b in build_state_vectors(&sp, &frame).map_err(usage)?.blocks() {
        m.add_scaled(1.0, &b);
    }
    let rho = DensityMatrix::new(BipartiteShape::square(d).map_err(usage)?, m).map_err(usage)?;
    checks.push(Check::at_most(
        "partial-transpose residual",
        rho.ppt_residual(),
        VERIFY_TOL,
    ));
    eigen_checks(&rho, &mut checks)?;
    let analytic = quantum_value_analytic(d, &sp, &mp).total;
    // the trace side needs valid measurement directions
    let direct = match build_measurements(d, &mp) {
        Ok(ms) => bell_operator(&make_id(d).map_err(usage)?, &ms)
            .map_err(usage)?
            .dot(rho.matrix()),
        Err(_) => f64::NAN,
    };
    checks.push(Check::at_most(
        "analytic vs trace gap",
        analytic - direct,
        VERIFY_TOL,
    ));
    checks.push(Check::info("value", analytic));
    Ok(checks)
}

fn seesaw_checks(doc: &SeesawDoc) -> Result<Vec<Check>, Failure> {
    let rho = doc.state().map_err(usage)?;
    let ms = doc.measurement_set().map_err(usage)?;
    let f = make_id(doc.d).map_err(usage)?;
    let mut checks = vec![
        Check::at_most("trace residual", rho.trace() - 1.0, VERIFY_TOL),
        Check::at_most("symmetry residual", rho.matrix().symmetry_residual(), VERIFY_TOL),
        Check::at_most("measurement completeness", ms.completeness_residual(), VERIFY_TOL),
        Check::at_least(
            "min effect eigenvalue",
            ms.min_eigenvalue().map_err(usage)?,
            -VERIFY_TOL,
        ),
    ];
    eigen_checks(&rho, &mut checks)?;
    let w = bell_operator(&f, &ms).map_err(usage)?;
    let direct = w.dot(rho.matrix());
    let via_behavior = evaluate_behavior(&f, &behavior(rho.matrix(), &ms).map_err(usage)?).map_err(usage)?;
    checks.push(Check::at_most(
        "reported vs trace gap",
        doc.value - direct,
        VERIFY_TOL,
    ));
    checks.push(Check::at_most(
        "behavior vs trace gap",
        via_behavior - direct,
        VERIFY_TOL,
    ));
    checks.push(Check::info("value", direct));
    Ok(checks)
}

/// Checks a parameter, optimization-result or seesaw file.
pub fn cmd_verify(path: &Path, out: &mut dyn Write) -> Outcome {
    let text = fs::read_to_string(path).map_err(io_err)?;
    let input: ParamsInput = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("cannot parse {}: {e}", path.display())))?;
    let checks = match &input {
        ParamsInput::Params(p) => family_checks(p)?,
        ParamsInput::Result(r) => family_checks(&r.params)?,
        ParamsInput::Seesaw(s) => seesaw_checks(s)?,
    };
    let mut bad = Vec::new();
    for c in &checks {
        let tag = match (c.info, c.ok) {
            (true, _) => "",
            (false, true) => "ok",
            (false, false) => "FAIL",
        };
        writeln!(out, "{:<38} {:>20} {tag}", c.name, fmt_value(c.value).trim_end()).map_err(io_err)?;
        if !c.ok {
            bad.push(c.name.clone());
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(bad.join(", ")))
    }
}

pub struct SeesawArgs<'a> {
    pub d: usize,
    pub state_dim: Option<usize>,
    pub cfg: SeesawConfig,
    pub out: Option<&'a Path>,
}

/// Threshold below which a restricted search reports no violation.
pub const NO_VIOLATION_TOL: f64 = 1e-9;

/// Seesaw over general PPT states, optionally of a smaller local dimension.
pub fn cmd_seesaw(a: &SeesawArgs<'_>, out: &mut dyn Write) -> Outcome {
    let state_dim = a.state_dim.unwrap_or(a.d);
    let r = match a.state_dim {
        Some(k) => restricted_dimension_search(a.d, k, &a.cfg),
        None => seesaw(a.d, &a.cfg),
    }
    .map_err(|e| match e {
        ppt_bell_core::Error::Domain(_) | ppt_bell_core::Error::Dimension { .. } => usage(e),
        e => Failure::Optimizer(e.to_string()),
    })?;
    if r.converged_restarts == 0 {
        return Err(Failure::Optimizer(format!(
            "none of the {} restarts converged within {} cycles",
            a.cfg.restarts, a.cfg.max_cycles
        )));
    }
    writeln!(out, "value: {}", fmt_value(r.value)).map_err(io_err)?;
    writeln!(
        out,
        "restarts converged: {} of {}",
        r.converged_restarts, a.cfg.restarts
    )
    .map_err(io_err)?;
    let restart_values: Vec<String> = r.restart_values.iter().map(|v| fmt_value(*v)).collect();
    writeln!(out, "restart values: {}", restart_values.join(" ")).map_err(io_err)?;
    writeln!(
        out,
        "state: {state_dim}x{state_dim}, rank {}, min eigenvalue of partial transpose {}",
        r.rho.rank(RANK_TOL).map_err(usage)?,
        fmt_value(r.rho.min_eigenvalue_pt().map_err(usage)?)
    )
    .map_err(io_err)?;
    if a.state_dim.is_some() && r.value <= NO_VIOLATION_TOL {
        writeln!(
            out,
            "no violation above {NO_VIOLATION_TOL:e} by {state_dim}x{state_dim} PPT states"
        )
        .map_err(io_err)?;
    }
    if let Some(path) = a.out {
        let (alice, bob) = measurement_docs(&r.measurements);
        let doc = SeesawDoc {
            d: a.d,
            state_dim,
            value: r.value,
            restart_values: r.restart_values.clone(),
            history: r.history.clone(),
            diagnostics: r.diagnostics.into(),
            seed: a.cfg.seed,
            config: SeesawConfigDoc::from(a.cfg),
            rho: matrix_doc(r.rho.matrix()),
            alice,
            bob,
        };
        write_json(path, &doc)?;
    }
    Ok(())
}
