//! Sweep drivers for the functional inequalities, with frozen regression baselines.
//!
//! Each check evaluates a ratio `lhs / rhs` (constants omitted) over a fixed
//! family and reports its maximum. A check passes when its structural
//! conditions hold (bounded spread across scales, step ratios, positivity)
//! and, for the default sweep, when the maximum stays within
//! [`BASELINE_SLACK`] times the frozen value.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::potential_term_bound_check;
use crate::error::{Error, Result};
use crate::exec::map_ordered;
use crate::hartree::{bessel_kernel_samples, kernel_bound_check, kernel_lp_from_samples};
use crate::littlewood_paley::{
    bernstein_ratio, brezis_gallouet_table, dyadic_multiplier_ratio, product_estimate_ratio,
    DyadicProfile,
};
use crate::spectral::{inverse_transform, Exponent, ScalarField, SpectralGrid, SpinorField, SpinorSpectrum};
use crate::Execution;

pub const BASELINE_SLACK: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Bernstein,
    DyadicMultiplier,
    ProductEstimate,
    BrezisGallouet,
    KernelBound,
    KernelLp,
    PotentialTerm,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Bernstein,
        Check::DyadicMultiplier,
        Check::ProductEstimate,
        Check::BrezisGallouet,
        Check::KernelBound,
        Check::KernelLp,
        Check::PotentialTerm,
    ];

    /// Frozen maximum ratio of the default sweep.
    pub fn baseline(self) -> f64 {
        match self {
            Check::Bernstein => 8.449_207_761_584_353e-2,
            Check::DyadicMultiplier => 1.210_350_278_030_38,
            Check::ProductEstimate => 2.162_642_920_553_047,
            Check::BrezisGallouet => 4.311_421_208_119_329e-1,
            Check::KernelBound => 1.444_572_469_444_204e-1,
            Check::KernelLp => 2.170_105_062_430_314e-1,
            Check::PotentialTerm => 1.001_092_741_894_217e-1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<SpectralGrid>> {
        SpectralGrid::new(self.n, self.length)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepParams {
    /// Grid for the dyadic-block and potential-term sweeps.
    pub lp_grid: GridSpec,
    /// Grid for the scale family of the logarithmic estimate.
    pub bg_grid: GridSpec,
    pub kernel_grid: GridSpec,
    pub s_grid: Vec<f64>,
    pub b_grid: Vec<f64>,
    /// Exponents `k` of the scale parameter `lambda = 2^k`.
    pub octaves: Vec<u32>,
    pub epsilon_grid: Vec<f64>,
    pub kernel_epsilon_grid: Vec<f64>,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            lp_grid: GridSpec { n: 256, length: 16.0 * PI },
            bg_grid: GridSpec { n: 1024, length: 2.0 * PI },
            kernel_grid: GridSpec { n: 1024, length: 32.0 * PI },
            s_grid: vec![0.25, 0.5, 0.75],
            b_grid: vec![0.5, 1.0, 2.0],
            octaves: (0..=8).collect(),
            epsilon_grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
            kernel_epsilon_grid: vec![0.5, 0.25, 0.125, 0.0625],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySuiteConfig {
    pub which: Vec<Check>,
    #[serde(default)]
    pub sweep: SweepParams,
    #[serde(default)]
    pub seed: u64,
}

impl VerifySuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.which.is_empty() {
            return Err(Error::InsufficientData("no checks selected".into()));
        }
        let s = &self.sweep;
        if s.s_grid.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::param("s_grid", f64::NAN, "entries must lie in (0, 1]"));
        }
        if s.b_grid.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::param("b_grid", f64::NAN, "entries must be positive"));
        }
        for eps in s.epsilon_grid.iter().chain(&s.kernel_epsilon_grid) {
            if !(*eps > 0.0 && *eps < 1.0) {
                return Err(Error::param("epsilon", *eps, "must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub label: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Condition {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Condition { name: name.into(), value, limit, passed: value <= limit }
    }

    fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Condition { name: name.into(), value, limit, passed: value > limit }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub points: Vec<SweepPoint>,
    pub max_ratio: f64,
    /// Frozen value the maximum is compared with; absent for non-default sweeps.
    pub baseline: Option<f64>,
    pub conditions: Vec<Condition>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub sweep: SweepParams,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

pub fn run_suite(config: &VerifySuiteConfig) -> Result<VerifyReport> {
    config.validate()?;
    let mut which = config.which.clone();
    which.sort();
    which.dedup();
    let checks = which
        .iter()
        .map(|&c| run_check(c, &config.sweep, config.seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        seed: config.seed,
        sweep: config.sweep.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn run_check(check: Check, sweep: &SweepParams, seed: u64) -> Result<CheckReport> {
    let (points, mut conditions) = match check {
        Check::Bernstein => bernstein_sweep(sweep)?,
        Check::DyadicMultiplier => dyadic_multiplier_sweep(sweep)?,
        Check::ProductEstimate => product_sweep(sweep, seed)?,
        Check::BrezisGallouet => brezis_gallouet_sweep(sweep)?,
        Check::KernelBound => kernel_bound_sweep(sweep)?,
        Check::KernelLp => kernel_lp_sweep(sweep)?,
        Check::PotentialTerm => potential_term_sweep(sweep)?,
    };
    let max_ratio = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    conditions.push(Condition {
        name: "all ratios finite".into(),
        value: points.iter().filter(|p| !p.ratio.is_finite()).count() as f64,
        limit: 0.0,
        passed: points.iter().all(|p| p.ratio.is_finite()),
    });
    let baseline = (*sweep == SweepParams::default()).then(|| check.baseline());
    if let Some(base) = baseline {
        conditions.push(Condition::at_most("max ratio vs frozen baseline", max_ratio, BASELINE_SLACK * base));
    }
    Ok(CheckReport {
        check,
        passed: conditions.iter().all(|c| c.passed),
        points,
        max_ratio,
        baseline,
        conditions,
    })
}

type SweepOutput = (Vec<SweepPoint>, Vec<Condition>);

/// Modulated Gaussian centred at `|xi| = 1.5 * 2^j` with width scaled by `2^-j`.
pub fn shell_probe(grid: &Arc<SpectralGrid>, j: usize) -> Result<SpinorField> {
    let scale = f64::powi(2.0, j as i32);
    let xi0 = 1.5 * scale;
    let width = 3.0 * PI / scale;
    SpinorField::from_fn(grid.clone(), |x, y| {
        let e = (-(x * x + y * y) / (width * width)).exp();
        let w = Complex64::from_polar(e, xi0 * x);
        [w, 0.5 * w]
    })
}

/// `f_lambda` with `hat f_lambda(xi) = exp(-w^2 |xi|^2 / (4 lambda^2))`: the periodization of
/// `lambda^2 g(lambda x)` for the unit-mass Gaussian `g` of width `w`.
pub fn scale_family_member(grid: &Arc<SpectralGrid>, width: f64, lambda: f64) -> Result<ScalarField> {
    if !(width > 0.0 && lambda > 0.0) {
        return Err(Error::param("lambda", lambda, "width and scale must be positive"));
    }
    let mut spec = SpinorSpectrum::zeros(grid.clone());
    let c = width * width / (4.0 * lambda * lambda);
    for (idx, z) in spec.u.iter_mut().enumerate() {
        *z = Complex64::new((-c * grid.k_squared()[idx]).exp(), 0.0);
    }
    let field = inverse_transform(&spec);
    ScalarField::new(grid.clone(), field.u().iter().map(|z| z.re).collect())
}

fn spread(ratios: &[f64]) -> f64 {
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn exponent_label(p: Exponent) -> String {
    match p {
        Exponent::Infinity => "inf".into(),
        Exponent::Finite(v) => format!("{v}"),
    }
}

const MAX_SPREAD: f64 = 10.0;

fn bernstein_sweep(sweep: &SweepParams) -> Result<SweepOutput> {
    let grid = sweep.lp_grid.build()?;
    let profile = DyadicProfile;
    let shells: Vec<usize> = (1..=profile.resolved_shells(&grid)).collect();
    let probes = map_ordered(Execution::Parallel, &shells, |&j| shell_probe(&grid, j))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let pairs = [
        (Exponent::ONE, Exponent::TWO),
        (Exponent::TWO, Exponent::INF),
        (Exponent::ONE, Exponent::INF),
    ];
    let mut points = Vec::new();
    let mut conditions = Vec::new();
    for (q, r) in pairs {
        let mut ratios = Vec::new();
        for (&j, probe) in shells.iter().zip(&probes) {
            if let Some(ratio) = bernstein_ratio(probe, j, q, r, &profile)? {
                ratios.push(ratio);
                points.push(SweepPoint {
                    label: format!("q={} r={} j={j}", exponent_label(q), exponent_label(r)),
                    ratio,
                });
            }
        }
        conditions.push(Condition::at_most(
            format!("spread over j, q={} r={}", exponent_label(q), exponent_label(r)),
            spread(&ratios),
            MAX_SPREAD,
        ));
    }
    Ok((points, conditions))
}

fn dyadic_multiplier_sweep(sweep: &SweepParams) -> Result<SweepOutput> {
    let grid = sweep.lp_grid.build()?;
    let profile = DyadicProfile;
    let shells: Vec<usize> = (1..=profile.resolved_shells(&grid)).collect();
    let probes = shells
        .iter()
        .map(|&j| shell_probe(&grid, j))
        .collect::<Result<Vec<_>>>()?;
    let mut sigmas = vec![-2.0, -1.0];
    sigmas.extend(sweep.s_grid.iter().map(|s| s / 2.0));
    let mut cases = Vec::new();
    for &sigma in &sigmas {
        for &b in &sweep.b_grid {
            for p in [Exponent::ONE, Exponent::TWO, Exponent::INF] {
                cases.push((sigma, b, p));
            }
        }
    }
    let results = map_ordered(Execution::Parallel, &cases, |&(sigma, b, p)| {
        shells
            .iter()
            .zip(&probes)
            .map(|(&j, probe)| Ok((j, dyadic_multiplier_ratio(probe, j, sigma, b, p, &profile)?)))
            .collect::<Result<Vec<_>>>()
    });
    let mut points = Vec::new();
    let mut conditions = Vec::new();
    for (&(sigma, b, p), result) in cases.iter().zip(results) {
        let tag = format!("sigma={sigma} b={b} p={}", exponent_label(p));
        let mut ratios = Vec::new();
        for (j, ratio) in result? {
            if let Some(ratio) = ratio {
                ratios.push(ratio);
                points.push(SweepPoint { label: format!("{tag} j={j}"), ratio });
            }
        }
        conditions.push(Condition::at_most(format!("spread over j, {tag}"), spread(&ratios), MAX_SPREAD));
    }
    Ok((points, conditions))
}

fn random_band_limited(grid: &Arc<SpectralGrid>, kmax: f64, rng: &mut ChaCha8Rng) -> SpinorField {
    let mut spec = SpinorSpectrum::zeros(grid.clone());
    for idx in 0..grid.len() {
        if grid.k_squared()[idx] < kmax * kmax {
            for z in [&mut spec.u[idx], &mut spec.v[idx]] {
                *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    inverse_transform(&spec)
}

fn product_sweep(sweep: &SweepParams, seed: u64) -> Result<SweepOutput> {
    let grid = sweep.lp_grid.build()?;
    let profile = DyadicProfile;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = SpinorField::from_fn(grid.clone(), |x, y| {
        let e = (-(x * x + y * y) / 4.0).exp();
        [Complex64::new(e, 0.0), Complex64::new(0.0, 0.5 * e)]
    })?;
    let constant = SpinorField::from_fn(grid.clone(), |_, _| [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])?;
    let mut pairs = vec![
        ("gaussian".to_string(), gaussian.clone(), gaussian),
        ("constant-random".to_string(), constant, random_band_limited(&grid, 6.0, &mut rng)),
    ];
    for i in 0..4 {
        let a = random_band_limited(&grid, 6.0, &mut rng);
        let b = random_band_limited(&grid, 6.0, &mut rng);
        pairs.push((format!("random-{i}"), a, b));
    }
    let mut cases = Vec::new();
    for (k, _) in pairs.iter().enumerate() {
        for &s in &sweep.s_grid {
            cases.push((k, s));
        }
    }
    let ratios = map_ordered(Execution::Parallel, &cases, |&(k, s)| {
        product_estimate_ratio(&pairs[k].1, &pairs[k].2, s, &profile)
    });
    let points = cases
        .iter()
        .zip(ratios)
        .map(|(&(k, s), r)| Ok(SweepPoint { label: format!("{} s={s}", pairs[k].0), ratio: r? }))
        .collect::<Result<Vec<_>>>()?;
    Ok((points, Vec::new()))
}

/// Gaussian width of the unit scale-family member; a full box length.
pub const SCALE_FAMILY_WIDTH: f64 = 2.0 * PI;
/// Step ratios are only required to settle from this octave on.
pub const SETTLED_OCTAVE: u32 = 5;
pub const MAX_STEP_RATIO: f64 = 1.05;

fn brezis_gallouet_sweep(sweep: &SweepParams) -> Result<SweepOutput> {
    let grid = sweep.bg_grid.build()?;
    let width = SCALE_FAMILY_WIDTH * sweep.bg_grid.length / (2.0 * PI);
    let profile = DyadicProfile;
    let tables = map_ordered(Execution::Parallel, &sweep.octaves, |&k| {
        let f = scale_family_member(&grid, width, f64::powi(2.0, k as i32))?;
        brezis_gallouet_table(&f, &sweep.s_grid, &sweep.b_grid, &profile)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    let mut conditions = Vec::new();
    let mut column = 0;
    for &s in &sweep.s_grid {
        for &b in &sweep.b_grid {
            let ratios: Vec<f64> = tables.iter().map(|t| t[column].ratio).collect();
            column += 1;
            for (&k, &ratio) in sweep.octaves.iter().zip(&ratios) {
                points.push(SweepPoint { label: format!("s={s} b={b} k={k}"), ratio });
            }
            let worst = sweep
                .octaves
                .windows(2)
                .zip(ratios.windows(2))
                .filter(|(ks, _)| ks[0] >= SETTLED_OCTAVE && ks[1] == ks[0] + 1)
                .map(|(_, r)| r[1] / r[0])
                .fold(f64::NEG_INFINITY, f64::max);
            if worst.is_finite() {
                conditions.push(Condition::at_most(
                    format!("step ratio k>={SETTLED_OCTAVE}, s={s} b={b}"),
                    worst,
                    MAX_STEP_RATIO,
                ));
            }
        }
    }
    Ok((points, conditions))
}

pub const KERNEL_R_MIN: f64 = 0.1;
pub const KERNEL_R_MAX: f64 = 8.0;
pub const KERNEL_POSITIVITY_R_MAX: f64 = 5.0;

fn kernel_bound_sweep(sweep: &SweepParams) -> Result<SweepOutput> {
    let grid = sweep.kernel_grid.build()?;
    let kernel = bessel_kernel_samples(&grid, -0.5)?;
    let report = kernel_bound_check(&kernel, KERNEL_R_MIN, KERNEL_R_MAX, KERNEL_POSITIVITY_R_MAX)?;
    let points = vec![SweepPoint {
        label: format!("fitted constant on {KERNEL_R_MIN} <= r <= {KERNEL_R_MAX}"),
        ratio: report.constant,
    }];
    let conditions = vec![Condition::above(
        format!("kernel minimum on {KERNEL_R_MIN} <= r <= {KERNEL_POSITIVITY_R_MAX}"),
        report.min_on_positivity_annulus,
        0.0,
    )];
    Ok((points, conditions))
}

fn kernel_lp_sweep(sweep: &SweepParams) -> Result<SweepOutput> {
    let grid = sweep.kernel_grid.build()?;
    let kernel = bessel_kernel_samples(&grid, -0.5)?;
    let points: Vec<SweepPoint> = sweep
        .kernel_epsilon_grid
        .iter()
        .map(|&eps| SweepPoint {
            label: format!("eps={eps}"),
            ratio: kernel_lp_from_samples(&kernel, eps).ratio,
        })
        .collect();
    Ok((points, Vec::new()))
}

pub const POTENTIAL_WIDTHS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const POTENTIAL_MODULATIONS: [f64; 4] = [2.0, 4.0, 8.0, 12.0];
pub const SLOPE_TOLERANCE: f64 = 0.1;

fn unit_gaussian(grid: &Arc<SpectralGrid>, width: f64, xi0: f64) -> Result<SpinorField> {
    let field = SpinorField::from_fn(grid.clone(), |x, y| {
        let e = (-(x * x + y * y) / (width * width)).exp();
        [Complex64::from_polar(e, xi0 * x), Complex64::new(0.0, 0.0)]
    })?;
    let norm = crate::spectral::lp_norm(&field, Exponent::TWO);
    Ok(field.scaled(Complex64::new(1.0 / norm, 0.0)))
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln() / n, b + y.ln() / n));
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * dx, b + dx * (y.ln() - my))
    });
    sxy / sxx
}

fn potential_term_sweep(sweep: &SweepParams) -> Result<SweepOutput> {
    let grid = sweep.lp_grid.build()?;
    let widths = POTENTIAL_WIDTHS
        .iter()
        .map(|&w| unit_gaussian(&grid, w, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let modulated = POTENTIAL_MODULATIONS
        .iter()
        .map(|&xi| unit_gaussian(&grid, 2.0, xi))
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    let mut conditions = Vec::new();
    for &eps in &sweep.epsilon_grid {
        for (w, psi) in POTENTIAL_WIDTHS.iter().zip(&widths) {
            let r = potential_term_bound_check(psi, eps)?;
            points.push(SweepPoint { label: format!("eps={eps} width={w}"), ratio: r.ratio });
        }
        let reports = modulated
            .iter()
            .map(|psi| potential_term_bound_check(psi, eps))
            .collect::<Result<Vec<_>>>()?;
        let slope = loglog_slope(&reports.iter().map(|r| (r.h_half, r.rhs)).collect::<Vec<_>>());
        let expected = 4.0 * eps / (1.0 + eps);
        conditions.push(Condition::at_most(
            format!("relative slope error of rhs vs H^1/2, eps={eps}"),
            (slope / expected - 1.0).abs(),
            SLOPE_TOLERANCE,
        ));
    }
    Ok((points, conditions))
}
