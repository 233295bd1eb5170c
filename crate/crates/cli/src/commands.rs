use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use dirac_hartree::diagnostics::{
    extrapolated_envelope_check, fit_growth, record, DiagnosticsRecord, EnvelopeVerdict, GrowthFit, GrowthModel,
};
use dirac_hartree::dirac::FreePropagator;
use dirac_hartree::evolution::{evolve, EvolutionConfig, Method};
use dirac_hartree::exec::map_ordered;
use dirac_hartree::hartree::CouplingSign;
use dirac_hartree::spectral::lp_norm;
use dirac_hartree::verify::{run_suite, VerifyReport};
use dirac_hartree::{Error, Execution, Exponent, SpinorField};
use serde::Serialize;

use crate::config::{RunConfig, VerifyConfig};
use crate::snapshot;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum Failure {
    /// A verifier check failed; the report was still written.
    Verify,
    /// Unreadable or invalid input.
    Config(anyhow::Error),
    /// Blow-up or Picard non-convergence; partial outputs are kept.
    Numerical(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Verify | Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Verify => write!(f, "one or more verifier checks failed"),
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e:#}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

fn classify(e: Error) -> Failure {
    match e {
        Error::NumericalAbort { .. } | Error::PicardDiverged { .. } | Error::NonFinite => {
            Failure::Numerical(e.into())
        }
        other => Failure::Config(other.into()),
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_header(orders: &[f64]) -> String {
    let mut cols = vec!["t".to_string(), "mass".into(), "energy".into(), "kinetic".into(), "h_half".into()];
    cols.extend(orders.iter().map(|s| format!("h_s={s}")));
    cols.push("potential_term".into());
    cols.join(",")
}

fn csv_row(r: &DiagnosticsRecord) -> String {
    let mut vals = vec![r.t, r.mass, r.energy, r.kinetic, r.h_half];
    vals.extend(&r.h_s);
    vals.push(r.potential_term);
    vals.into_iter().map(format_number).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Serialize)]
pub struct Drift {
    pub initial: f64,
    pub max_abs: f64,
    pub max_relative: f64,
}

fn drift(values: impl Iterator<Item = f64> + Clone) -> Drift {
    let mut it = values.clone();
    let initial = it.next().unwrap_or(0.0);
    let max_abs = values.map(|v| (v - initial).abs()).fold(0.0, f64::max);
    let max_relative = if initial != 0.0 { max_abs / initial.abs() } else { max_abs };
    Drift { initial, max_abs, max_relative }
}

#[derive(Debug, Serialize)]
pub struct GrowthSummary {
    /// Fit over every sample.
    pub fit: Option<GrowthFit>,
    /// Fit on the first half, tested on the second half with slack 2.
    pub envelope: Option<EnvelopeVerdict>,
    pub note: Option<String>,
}

const ENVELOPE_SLACK: f64 = 2.0;

fn growth(series: &[(f64, f64)], model: GrowthModel) -> GrowthSummary {
    let fit = fit_growth(series, model);
    let envelope = extrapolated_envelope_check(series, model, ENVELOPE_SLACK);
    let note = match (&fit, &envelope) {
        (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
        _ => None,
    };
    GrowthSummary { fit: fit.ok(), envelope: envelope.ok(), note }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    pub error: Option<String>,
    pub config: RunConfig,
    pub samples: usize,
    pub final_time: f64,
    pub mass_drift: Drift,
    pub energy_drift: Drift,
    pub kinetic_growth: GrowthSummary,
    pub h_half_growth: GrowthSummary,
    /// Relative L2 distance to the exact free flow; present when the coupling is off.
    pub linear_vs_exact_error: Option<f64>,
    pub picard_iterations: Vec<usize>,
}

pub struct RunOutput {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

fn relative_distance(a: &SpinorField, b: &SpinorField) -> f64 {
    let norm = lp_norm(b, Exponent::TWO);
    let d = a.distance(b).unwrap_or(f64::NAN);
    if norm > 0.0 { d / norm } else { d }
}

/// `dhl run`. `base_dir` resolves relative paths inside the config.
pub fn cmd_run(config: &RunConfig, base_dir: &Path, out: Option<&Path>) -> Result<RunOutput, Failure> {
    config.validate().map_err(Failure::Config)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| base_dir.join(&config.output_dir));
    let psi0 = config.initial_field(base_dir).map_err(Failure::Config)?;
    let evo: EvolutionConfig = config.evolution_config().map_err(Failure::Config)?;
    let model = evo.model;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())).map_err(io)?;
    if config.diagnostics.snapshots {
        fs::create_dir_all(dir.join("snapshots")).map_err(io)?;
    }

    let csv_path = dir.join("diagnostics.csv");
    let mut csv = BufWriter::new(File::create(&csv_path).map_err(io)?);
    writeln!(csv, "{}", csv_header(&config.diagnostics.s)).map_err(io)?;
    csv.flush().map_err(io)?;

    let mut write_error: Option<anyhow::Error> = None;
    let mut sample_index = 0usize;
    let mut records = Vec::new();
    let result = evolve(&psi0, &evo, |t, psi| {
        let r = record(psi, t, &model, &config.diagnostics.s);
        if write_error.is_none() {
            let written = writeln!(csv, "{}", csv_row(&r)).and_then(|_| csv.flush()).map_err(anyhow::Error::from);
            let snap = if config.diagnostics.snapshots {
                let path = dir.join("snapshots").join(format!("state_{sample_index:06}.bin"));
                snapshot::write_file(&path, psi, model.dirac.mass(), model.hartree.b())
            } else {
                Ok(())
            };
            write_error = written.and(snap).err();
        }
        sample_index += 1;
        records.push(r.clone());
        r
    });
    drop(csv);
    if let Some(e) = write_error {
        return Err(Failure::Io(e));
    }

    let (status, error, final_state, picard_iterations) = match &result {
        Ok(traj) => ("completed", None, Some(&traj.final_state), traj.picard_iterations.clone()),
        Err(e) => ("aborted", Some(e.to_string()), None, Vec::new()),
    };
    let series = |f: fn(&DiagnosticsRecord) -> f64| records.iter().map(move |r| (r.t, f(r))).collect::<Vec<_>>();
    let linear_vs_exact_error = match (final_state, model.hartree.coupling()) {
        (Some(psi), CouplingSign::Off) => {
            let exact = FreePropagator::new(psi0.grid().clone(), config.evolution.t_final, model.dirac).apply(&psi0);
            Some(relative_distance(psi, &exact))
        }
        _ => None,
    };
    let summary = RunSummary {
        status,
        error,
        config: config.clone(),
        samples: records.len(),
        final_time: records.last().map_or(0.0, |r| r.t),
        mass_drift: drift(records.iter().map(|r| r.mass)),
        energy_drift: drift(records.iter().map(|r| r.energy)),
        kinetic_growth: growth(&series(|r| r.kinetic), GrowthModel::SingleExponential),
        h_half_growth: growth(&series(|r| r.h_half), GrowthModel::DoubleExponential),
        linear_vs_exact_error,
        picard_iterations,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    if let Ok(traj) = &result {
        if config.diagnostics.snapshots {
            snapshot::write_file(&dir.join("final_state.bin"), &traj.final_state, model.dirac.mass(), model.hartree.b())
                .map_err(io)?;
        }
    }
    match result {
        Ok(_) => Ok(RunOutput { dir, summary }),
        Err(e) => Err(classify(e)),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(io)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(io)
}

/// `dhl verify`. Writes `verify_report.json` even when a check fails.
pub fn cmd_verify(config: &VerifyConfig, base_dir: &Path, out: Option<&Path>) -> Result<VerifyReport, Failure> {
    config.suite.validate().map_err(|e| Failure::Config(e.into()))?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| base_dir.join(&config.output_dir));
    let report = run_suite(&config.suite).map_err(classify)?;
    fs::create_dir_all(&dir).map_err(io)?;
    write_json(&dir.join("verify_report.json"), &report)?;
    if report.passed {
        Ok(report)
    } else {
        Err(Failure::Verify)
    }
}

/// Relative errors at or below this count as exact.
pub const EXACT_THRESHOLD: f64 = 1e-12;
/// The reference run uses the finest rung divided by this.
pub const REFERENCE_REFINEMENT: f64 = 8.0;

#[derive(Debug, Serialize)]
pub struct ConvergenceReport {
    pub config: RunConfig,
    pub reference_dt: f64,
    /// `(dt, relative L2 error at t_final)`, coarsest first.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of log error against log dt; absent when the flow is exact.
    pub order: Option<f64>,
    pub exact: bool,
}

fn log_log_slope(rows: &[(f64, f64)]) -> f64 {
    let n = rows.len() as f64;
    let pts: Vec<(f64, f64)> = rows.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `dhl convergence`: self-convergence of the time integrator along `dt_ladder`.
pub fn cmd_convergence(config: &RunConfig, base_dir: &Path, out: Option<&Path>) -> Result<ConvergenceReport, Failure> {
    config.validate().map_err(Failure::Config)?;
    let ladder = &config.evolution.dt_ladder;
    let mut ladder = ladder.clone();
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup();
    if ladder.len() < 4 {
        return Err(Failure::Config(anyhow!(
            "dt_ladder needs at least 4 distinct rungs, got {}",
            ladder.len()
        )));
    }
    let psi0 = config.initial_field(base_dir).map_err(Failure::Config)?;
    let base = config.evolution_config().map_err(Failure::Config)?;
    let reference_dt = ladder[ladder.len() - 1] / REFERENCE_REFINEMENT;

    let march = |dt: &f64| {
        let method = match base.method {
            Method::Picard(settings) => Method::Picard(dirac_hartree::evolution::PicardSettings { window: *dt, ..settings }),
            Method::Strang => Method::Strang,
        };
        let cfg = EvolutionConfig { dt: *dt, method, sample_every: usize::MAX, ..base };
        evolve(&psi0, &cfg, |_, _| ()).map(|t| t.final_state)
    };
    let mut runs = map_ordered(Execution::Parallel, &ladder, march);
    let reference = march(&reference_dt).map_err(classify)?;
    let rows = ladder
        .iter()
        .zip(runs.drain(..))
        .map(|(&dt, psi)| psi.map(|p| (dt, relative_distance(&p, &reference))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify)?;
    let exact = rows.iter().all(|r| r.1 <= EXACT_THRESHOLD);
    let order = if exact { None } else { Some(log_log_slope(&rows)) };
    let report = ConvergenceReport { config: config.clone(), reference_dt, rows, order, exact };
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| base_dir.join(&config.output_dir));
    fs::create_dir_all(&dir).map_err(io)?;
    write_json(&dir.join("convergence.json"), &report)?;
    Ok(report)
}
