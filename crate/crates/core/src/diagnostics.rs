//! Observables along a trajectory: mass, energy, kinetic form and Sobolev
//! norms, plus growth-envelope fitting and the potential-term estimate.

use serde::{Deserialize, Serialize};

use crate::dirac::{kinetic_form, sobolev_norm};
use crate::error::{Error, Result};
use crate::evolution::PicardSolution;
use crate::hartree::{bessel_multiply, young_exponent, HartreeParams};
use crate::model::Model;
use crate::spectral::{density, inner_product, lp_norm, DensityForm, Exponent, SpinorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub h_half: f64,
    /// `|psi|_{H^s}` for each configured `s`, in order.
    pub h_s: Vec<f64>,
    pub potential_term: f64,
}

/// `|(b - Delta)^{-1/2} rho|_{L2}^2` with the model's density form and `b`.
pub fn potential_term(psi: &SpinorField, hartree: &HartreeParams) -> f64 {
    let rho = density(psi, hartree.density_form());
    let smoothed = bessel_multiply(&rho, -0.5, hartree.b()).expect("b validated by HartreeParams");
    lp_norm(&smoothed, Exponent::TWO).powi(2)
}

/// `E = kinetic / 2 - potential_term / 4`.
pub fn energy(psi: &SpinorField, model: &Model) -> f64 {
    0.5 * kinetic_form(psi, model.dirac) - 0.25 * potential_term(psi, &model.hartree)
}

pub fn record(psi: &SpinorField, t: f64, model: &Model, sobolev_orders: &[f64]) -> DiagnosticsRecord {
    let kinetic = kinetic_form(psi, model.dirac);
    let potential = potential_term(psi, &model.hartree);
    DiagnosticsRecord {
        t,
        mass: inner_product(psi, psi).map(|z| z.re).unwrap_or(f64::NAN),
        energy: 0.5 * kinetic - 0.25 * potential,
        kinetic,
        h_half: sobolev_norm(psi, 0.5),
        h_s: sobolev_orders.iter().map(|&s| sobolev_norm(psi, s)).collect(),
        potential_term: potential,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialTermReport {
    pub epsilon: f64,
    pub p: f64,
    /// `|psi|_{H^{1/2}}` after normalizing to unit mass.
    pub h_half: f64,
    /// `|(1 - Delta)^{-1/2} |psi|^2|_{L2}`.
    pub lhs: f64,
    /// `(2^eps / eps)^{1/p} |psi|_{H^{1/2}}^{4 eps / (1 + eps)}`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of the potential-term estimate for the unit-mass rescaling of `psi`.
pub fn potential_term_bound_check(psi: &SpinorField, epsilon: f64) -> Result<PotentialTermReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0, 1)"));
    }
    let norm = lp_norm(psi, Exponent::TWO);
    if norm == 0.0 {
        return Err(Error::ZeroInput("potential-term estimate"));
    }
    let unit = psi.scaled((1.0 / norm).into());
    let rho = density(&unit, DensityForm::Modulus);
    let lhs = lp_norm(&bessel_multiply(&rho, -0.5, 1.0)?, Exponent::TWO);
    let p = young_exponent(epsilon);
    let h_half = sobolev_norm(&unit, 0.5);
    let rhs = (2f64.powf(epsilon) / epsilon).powf(1.0 / p)
        * h_half.powf(4.0 * epsilon / (1.0 + epsilon));
    Ok(PotentialTermReport {
        epsilon,
        p,
        h_half,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `e^{a + c t}`
    SingleExponential,
    /// `exp(C1 e^{C2 t})`, fitted on samples with value >= 2.
    DoubleExponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// `[a, c]` or `[C1, C2]`.
    pub params: [f64; 2],
    /// RMS residual of the linearized least-squares problem.
    pub residual: f64,
    pub samples_used: usize,
}

impl GrowthFit {
    pub fn envelope(&self, t: f64) -> f64 {
        let [p0, p1] = self.params;
        match self.model {
            GrowthModel::SingleExponential => (p0 + p1 * t).exp(),
            GrowthModel::DoubleExponential => (p0 * (p1 * t).exp()).exp(),
        }
    }
}

pub const MIN_FIT_SAMPLES: usize = 8;

fn least_squares_line(points: &[(f64, f64)]) -> ([f64; 2], f64) {
    let n = points.len() as f64;
    let (mt, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / n, b + y / n));
    let (stt, sty) = points.iter().fold((0.0, 0.0), |(a, b), &(t, y)| {
        (a + (t - mt) * (t - mt), b + (t - mt) * (y - my))
    });
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = my - slope * mt;
    let rss: f64 = points
        .iter()
        .map(|&(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    ([intercept, slope], (rss / n).sqrt())
}

/// Least-squares fit of a growth law in log (single) or log-log (double) coordinates.
pub fn fit_growth(series: &[(f64, f64)], model: GrowthModel) -> Result<GrowthFit> {
    if series.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least {MIN_FIT_SAMPLES}",
            series.len()
        )));
    }
    if series.iter().any(|&(t, v)| !(v > 0.0 && v.is_finite() && t.is_finite())) {
        return Err(Error::InsufficientData("values must be positive and finite".into()));
    }
    if series.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InsufficientData("sample times must increase strictly".into()));
    }
    let points: Vec<(f64, f64)> = match model {
        GrowthModel::SingleExponential => series.iter().map(|&(t, v)| (t, v.ln())).collect(),
        GrowthModel::DoubleExponential => series
            .iter()
            .filter(|&&(_, v)| v >= 2.0)
            .map(|&(t, v)| (t, v.ln().ln()))
            .collect(),
    };
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} samples at or above 2 for the double-exponential fit",
            points.len()
        )));
    }
    let ([intercept, slope], residual) = least_squares_line(&points);
    let params = match model {
        GrowthModel::SingleExponential => [intercept, slope],
        GrowthModel::DoubleExponential => [intercept.exp(), slope],
    };
    Ok(GrowthFit {
        model,
        params,
        residual,
        samples_used: points.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeVerdict {
    pub fit: GrowthFit,
    pub slack: f64,
    /// `(t, value / envelope(t), passed)` for every tested sample.
    pub samples: Vec<(f64, f64, bool)>,
    pub passed: bool,
}

/// Tests every sample in `series` against `slack * fit.envelope(t)`.
///
/// For the double-exponential law, samples below 2 pass unconditionally.
pub fn envelope_check(series: &[(f64, f64)], fit: &GrowthFit, slack: f64) -> EnvelopeVerdict {
    let samples: Vec<(f64, f64, bool)> = series
        .iter()
        .map(|&(t, v)| {
            let ratio = v / fit.envelope(t);
            let trivial = fit.model == GrowthModel::DoubleExponential && v < 2.0;
            (t, ratio, trivial || ratio <= slack)
        })
        .collect();
    EnvelopeVerdict {
        fit: *fit,
        slack,
        passed: samples.iter().all(|s| s.2),
        samples,
    }
}

/// Fits on the first half of `series` and checks the second half.
pub fn extrapolated_envelope_check(
    series: &[(f64, f64)],
    model: GrowthModel,
    slack: f64,
) -> Result<EnvelopeVerdict> {
    let mid = series.len() / 2;
    let fit = fit_growth(&series[..mid], model)?;
    Ok(envelope_check(&series[mid..], &fit, slack))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixIdentityReport {
    /// `|I|^2` with `I = int_0^T U(-s) N(psi(s)) ds`.
    pub duhamel_norm_sq: f64,
    /// `2 Im <psi0, I>`
    pub cross_term: f64,
    /// `|I|^2 - 2 Im <psi0, I>`, which vanishes for an exact solution by mass conservation.
    pub balance: f64,
    pub quadrature_error: f64,
    pub iteration_error: f64,
    pub roundoff: f64,
    pub error_estimate: f64,
}

impl AppendixIdentityReport {
    pub fn within(&self, factor: f64) -> bool {
        self.balance.abs() <= factor * self.error_estimate
    }
}

fn balance_terms(psi0: &SpinorField, duhamel: &SpinorField) -> Result<(f64, f64)> {
    let norm_sq = inner_product(duhamel, duhamel)?.re;
    let cross = 2.0 * inner_product(psi0, duhamel)?.im;
    Ok((norm_sq, cross))
}

/// Expands `|psi(T)|^2 = |psi0|^2 + |I|^2 - 2 Im <psi0, I>` for a Picard window and
/// estimates the error of the balance from the coarse-node Richardson difference.
pub fn appendix_identity_check(psi0: &SpinorField, solution: &PicardSolution) -> Result<AppendixIdentityReport> {
    let (norm_sq, cross) = balance_terms(psi0, &solution.duhamel)?;
    let balance = norm_sq - cross;
    let coarse = solution.duhamel_coarse.as_ref().ok_or_else(|| {
        Error::InsufficientData("coarse quadrature needs an odd node count >= 3".into())
    })?;
    let (coarse_sq, coarse_cross) = balance_terms(psi0, coarse)?;
    let quadrature_error = ((coarse_sq - coarse_cross) - balance).abs() / 3.0;
    let n0 = lp_norm(psi0, Exponent::TWO);
    let ni = norm_sq.sqrt();
    let iteration_error = 2.0 * (n0 + ni) * solution.tol;
    let roundoff = 1e-14 * (n0 * n0).max(f64::MIN_POSITIVE);
    Ok(AppendixIdentityReport {
        duhamel_norm_sq: norm_sq,
        cross_term: cross,
        balance,
        quadrature_error,
        iteration_error,
        roundoff,
        error_estimate: quadrature_error + iteration_error + roundoff,
    })
}
