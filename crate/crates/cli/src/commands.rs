use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use ctq_core::analytic::{pmax_analytic_with_tol, OptimumReport};
use ctq_core::error::Error as CoreError;
use ctq_core::numeric::{pmax_numeric, OptimizerConfig};
use ctq_core::objective::{objective_f, MeasurementBasis};
use ctq_core::protocol::{run_protocol, MessageQubit, ProtocolTrace};
use ctq_core::state::{CanonicalState, MuClass, StateRecord, Tolerances, DEFAULT_NORM_TOL};

use crate::args::{Cli, Command, Format, GlobalOpts, MethodArg};
use crate::family::Family;
use crate::input::{parse_basis, parse_message, parse_state};
use crate::verify::{run_verify, VerifyConfig};
use crate::CliError;

/// What the process prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, stderr: String::new(), code: 0 }
    }

    fn from_error(e: &CliError) -> Self {
        let hint = match e {
            CliError::Unsupported(_) => "\nhint: rerun with --method numeric",
            CliError::Validation(_) => "",
        };
        Self { stdout: String::new(), stderr: format!("error: {e}{hint}\n"), code: e.exit_code() }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn optimizer(g: &GlobalOpts) -> Result<OptimizerConfig, CliError> {
    let cfg = OptimizerConfig { grid_theta: g.grid_theta, grid_phi: g.grid_phi, ..Default::default() };
    cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(cfg)
}

fn check_tolerances(g: &GlobalOpts) -> Result<(), CliError> {
    if !(g.zero_tol >= 0.0 && g.zero_tol.is_finite()) {
        return Err(CliError::Validation(format!("--zero-tol must be a nonnegative number, got {:e}", g.zero_tol)));
    }
    if !(g.cross_tol >= 0.0 && g.cross_tol.is_finite()) {
        return Err(CliError::Validation(format!("--cross-tol must be a nonnegative number, got {:e}", g.cross_tol)));
    }
    Ok(())
}

/// Runs one command, using the optimizer's thread pool when `--threads` is
/// given.
pub fn execute(cli: &Cli) -> Outcome {
    let run = || match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome::from_error(&e),
    };
    if cli.global.threads > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Outcome::from_error(&CliError::Validation(format!("cannot start thread pool: {e}"))),
        }
    } else {
        run()
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    check_tolerances(g)?;
    let format = g.format;
    let json_only = |cmd: &str| {
        if format == Some(Format::Csv) {
            Err(CliError::Validation(format!("`{cmd}` has JSON output only")))
        } else {
            Ok(())
        }
    };
    match &cli.command {
        Command::Classify { state } => {
            json_only("classify")?;
            cmd_classify(g, state)
        }
        Command::Pmax { state, method } => cmd_pmax(g, state, *method, format.unwrap_or(Format::Json)),
        Command::Sweep { family, method } => cmd_sweep(g, family, *method, format.unwrap_or(Format::Csv)),
        Command::Simulate { state, basis, message } => {
            json_only("simulate")?;
            cmd_simulate(g, state, basis.as_deref(), message.as_deref())
        }
        Command::Verify { samples, states_per_case, inject_fault } => {
            json_only("verify")?;
            let summary = run_verify(&VerifyConfig {
                seed: g.seed,
                samples: *samples,
                states_per_case: *states_per_case,
                optimizer: optimizer(g)?,
                cross_tol: g.cross_tol,
                fault: *inject_fault,
            });
            let mut out = Outcome::ok(json(&summary));
            if !summary.passed {
                out.code = 1;
                let names: Vec<&str> = summary.suites.iter().filter(|s| !s.passed()).map(|s| s.name).collect();
                out.stderr = format!("verification failed: {}\n", names.join(", "));
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct ClassifyOutput {
    case: ctq_core::CaseLabel,
    zero_pattern: Vec<&'static str>,
    mu_class: MuClass,
}

fn cmd_classify(g: &GlobalOpts, state: &str) -> Result<Outcome, CliError> {
    let s = parse_state(state, g.normalize, g.zero_tol)?;
    let c = s.classify(g.zero_tol);
    Ok(Outcome::ok(json(&ClassifyOutput { case: c.case, zero_pattern: c.zero_names(), mu_class: c.mu_class })))
}

/// Analytic and/or numeric optimum for one state.
struct Optima {
    analytic: Option<OptimumReport>,
    numeric: Option<OptimumReport>,
}

impl Optima {
    fn delta(&self) -> Option<f64> {
        match (&self.analytic, &self.numeric) {
            (Some(a), Some(n)) => Some((a.pmax - n.pmax).abs()),
            _ => None,
        }
    }

    /// The numeric optimum if present, otherwise the first analytic best
    /// point.
    fn best_point(&self) -> Option<(f64, f64)> {
        self.numeric.as_ref().or(self.analytic.as_ref()).and_then(|r| r.best_points.first()).map(|p| (p.theta, p.phi))
    }
}

/// `Ok(None)` for the analytic half marks the general case in a sweep.
fn optima(s: &CanonicalState, g: &GlobalOpts, method: MethodArg, strict: bool) -> Result<Optima, CliError> {
    let analytic = if method == MethodArg::Numeric {
        None
    } else {
        match pmax_analytic_with_tol(s, g.zero_tol) {
            Ok(r) => Some(r),
            Err(CoreError::UnsupportedGeneralCase) if !strict => None,
            Err(CoreError::UnsupportedGeneralCase) => {
                return Err(CliError::Unsupported(CoreError::UnsupportedGeneralCase.to_string()))
            }
            Err(e) => return Err(CliError::Validation(e.to_string())),
        }
    };
    let numeric = if method == MethodArg::Analytic {
        None
    } else {
        Some(pmax_numeric(s, &optimizer(g)?).map_err(|e| CliError::Validation(e.to_string()))?)
    };
    Ok(Optima { analytic, numeric })
}

#[derive(Serialize)]
struct PmaxOutput {
    state: StateRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<OptimumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    numeric: Option<OptimumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
}

pub const CSV_HEADER: [&str; 7] = ["params", "case", "pmax_analytic", "pmax_numeric", "delta", "theta_opt", "phi_opt"];

fn csv_row(params: &str, s: &CanonicalState, o: &Optima, zero_tol: f64) -> [String; 7] {
    let num = |v: Option<f64>| v.map(fmt_number).unwrap_or_default();
    let best = o.best_point();
    [
        params.to_string(),
        s.case(zero_tol).to_string(),
        num(o.analytic.as_ref().map(|r| r.pmax)),
        num(o.numeric.as_ref().map(|r| r.pmax)),
        num(o.delta()),
        num(best.map(|b| b.0)),
        num(best.map(|b| b.1)),
    ]
}

/// Shortest round-trip text for `x`, identical to the JSON rendering.
pub fn fmt_number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite numbers serialize")
}

fn write_csv(rows: &[[String; 7]]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Validation(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn state_label(s: &CanonicalState) -> String {
    let a = s.amplitudes();
    let parts: Vec<String> = (0..5).map(|i| format!("a{i}={}", fmt_number(a[i]))).collect();
    format!("{};mu={}", parts.join(";"), fmt_number(s.mu()))
}

fn cmd_pmax(g: &GlobalOpts, state: &str, method: MethodArg, format: Format) -> Result<Outcome, CliError> {
    let s = parse_state(state, g.normalize, g.zero_tol)?;
    let o = optima(&s, g, method, true)?;
    let delta = o.delta();
    let agree = delta.map(|d| d <= g.cross_tol);
    let stdout = match format {
        Format::Csv => write_csv(&[csv_row(&state_label(&s), &s, &o, g.zero_tol)])?,
        Format::Json => json(&PmaxOutput {
            state: s.to_record(),
            analytic: o.analytic.clone(),
            numeric: o.numeric.clone(),
            delta,
            cross_tol: delta.map(|_| g.cross_tol),
            agree,
        }),
    };
    let mut out = Outcome::ok(stdout);
    if agree == Some(false) {
        out.code = 4;
        out.stderr = format!(
            "error: analytic and numeric optima differ by {:e} (cross tolerance {:e})\n",
            delta.unwrap_or(f64::NAN),
            g.cross_tol
        );
    }
    Ok(out)
}

#[derive(Serialize)]
struct SweepRow {
    params: String,
    case: ctq_core::CaseLabel,
    pmax_analytic: Option<f64>,
    pmax_numeric: Option<f64>,
    delta: Option<f64>,
    theta_opt: Option<f64>,
    phi_opt: Option<f64>,
}

fn cmd_sweep(g: &GlobalOpts, family: &str, method: MethodArg, format: Format) -> Result<Outcome, CliError> {
    let fam: Family = family.parse()?;
    let tol = Tolerances { norm_tol: DEFAULT_NORM_TOL, zero_tol: g.zero_tol };
    let members = fam.members(&tol)?;
    let mut rows = Vec::with_capacity(members.len());
    let mut worst: Option<f64> = None;
    let mut json_rows = Vec::with_capacity(members.len());
    for m in &members {
        let o = optima(&m.state, g, method, false)?;
        if let Some(d) = o.delta() {
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
        let best = o.best_point();
        json_rows.push(SweepRow {
            params: m.label.clone(),
            case: m.state.case(g.zero_tol),
            pmax_analytic: o.analytic.as_ref().map(|r| r.pmax),
            pmax_numeric: o.numeric.as_ref().map(|r| r.pmax),
            delta: o.delta(),
            theta_opt: best.map(|b| b.0),
            phi_opt: best.map(|b| b.1),
        });
        rows.push(csv_row(&m.label, &m.state, &o, g.zero_tol));
    }
    let stdout = match format {
        Format::Csv => write_csv(&rows)?,
        Format::Json => json(&json_rows),
    };
    let mut out = Outcome::ok(stdout);
    if let Some(w) = worst.filter(|&w| w > g.cross_tol) {
        out.code = 4;
        out.stderr =
            format!("error: analytic and numeric optima differ by up to {w:e} (cross tolerance {:e})\n", g.cross_tol);
    }
    Ok(out)
}

#[derive(Serialize)]
struct SimulateOutput {
    state: StateRecord,
    basis: MeasurementBasis,
    message: MessageQubit,
    trace: ProtocolTrace,
    /// `1 - (sqrt(P) + sqrt(Q))` at the same basis.
    expected_success_probability: f64,
    delta: f64,
    identity_holds: bool,
}

fn cmd_simulate(g: &GlobalOpts, state: &str, basis: Option<&str>, message: Option<&str>) -> Result<Outcome, CliError> {
    let s = parse_state(state, g.normalize, g.zero_tol)?;
    let b = match basis {
        Some(text) => parse_basis(text)?,
        None => {
            let o = optima(&s, g, MethodArg::Analytic, false)?;
            let o = if o.analytic.is_some() { o } else { optima(&s, g, MethodArg::Numeric, false)? };
            let (theta, phi) = o.best_point().expect("optimizer reports a point");
            MeasurementBasis { theta, phi }
        }
    };
    let m = match message {
        Some(text) => parse_message(text)?,
        None => MessageQubit::new(Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0))
            .expect("|+> is normalized"),
    };
    let trace = run_protocol(&s, &b, &m).map_err(|e| CliError::Validation(e.to_string()))?;
    let expected = 1.0 - objective_f(&s, &b);
    let delta = (trace.total_success_probability - expected).abs();
    Ok(Outcome::ok(json(&SimulateOutput {
        state: s.to_record(),
        basis: b,
        message: m,
        expected_success_probability: expected,
        delta,
        identity_holds: delta <= 1e-10,
        trace,
    })))
}
