//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Pass criterion numbers as arguments to run a subset.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use dirac_hartree::diagnostics::{
    appendix_identity_check, energy, extrapolated_envelope_check, record, GrowthModel,
};
use dirac_hartree::dirac::{propagator_symbol, DiracParams};
use dirac_hartree::evolution::{
    contraction_factor, evolve, picard_solve, strang_step, EvolutionConfig, PicardSettings,
};
use dirac_hartree::hartree::{CouplingSign, HartreeParams};
use dirac_hartree::initial::{InitialData, Normalization};
use dirac_hartree::littlewood_paley::{decompose, DyadicProfile};
use dirac_hartree::spectral::{forward_transform, inverse_transform, lp_norm, SpinorSpectrum};
use dirac_hartree::verify::{run_check, Check, CheckReport, SweepParams};
use dirac_hartree::{Complex64, DensityForm, Exponent, Model, SpectralGrid, SpinorField};
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn desk_grid() -> Arc<SpectralGrid> {
    SpectralGrid::new(128, 16.0 * PI).unwrap()
}

fn model(coupling: CouplingSign) -> Model {
    Model::new(
        DiracParams::new(1.0).unwrap(),
        HartreeParams::new(1.0, DensityForm::Gamma0, coupling).unwrap(),
    )
}

fn gaussian(grid: &Arc<SpectralGrid>, amplitude: f64, normalization: Normalization) -> SpinorField {
    InitialData::gaussian(2.0, amplitude, normalization)
        .build(grid, DiracParams::new(1.0).unwrap())
        .unwrap()
}

fn march(psi: &SpinorField, dt: f64, t_final: f64, model: &Model) -> SpinorField {
    let cfg = EvolutionConfig { sample_every: usize::MAX, ..EvolutionConfig::strang(*model, dt, t_final) };
    evolve(psi, &cfg, |_, _| ()).unwrap().final_state
}

fn rel_distance(a: &SpinorField, b: &SpinorField) -> f64 {
    a.distance(b).unwrap() / lp_norm(b, Exponent::TWO)
}

fn mass_conservation() -> Outcome {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, 4.0, Normalization::L2);
    let m = model(CouplingSign::Minus);
    let cfg = EvolutionConfig { sample_every: 500, ..EvolutionConfig::strang(m, 1e-3, 10.0) };
    let traj = evolve(&psi0, &cfg, |t, psi| record(psi, t, &m, &[])).unwrap();
    let mass0 = traj.records[0].mass;
    let drift = traj
        .records
        .iter()
        .map(|r| (r.mass - mass0).abs() / mass0)
        .fold(0.0, f64::max);
    outcome(drift <= 1e-10, format!("mass0 = {mass0:.6}, max relative drift = {drift:.3e} (limit 1e-10)"))
}

/// Hermitian symbol assembled from the Dirac matrices, independent of the library.
fn oracle_symbol(xi: (f64, f64), m: f64) -> Matrix2<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let alpha1 = Matrix2::new(zero, i, -i, zero);
    let alpha2 = Matrix2::new(zero, one, one, zero);
    let gamma0 = Matrix2::new(one, zero, zero, -one);
    alpha1 * Complex64::from(xi.0) + alpha2 * Complex64::from(xi.1) + gamma0 * Complex64::from(m)
}

fn oracle_propagator(xi: (f64, f64), t: f64, m: f64) -> Matrix2<Complex64> {
    let eig = oracle_symbol(xi, m).symmetric_eigen();
    let phases = Matrix2::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -t * l)));
    eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

fn propagator_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let xi = (rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0));
        let t = rng.gen_range(-10.0..10.0);
        let m = rng.gen_range(0.1..5.0);
        let closed = propagator_symbol(xi, t, DiracParams::new(m).unwrap());
        let oracle = oracle_propagator(xi, t, m);
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((closed[r][c] - oracle[(r, c)]).norm());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max entry error over 1000 samples = {worst:.3e} (limit 1e-12)"))
}

fn linear_exactness() -> Outcome {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, 1.0, Normalization::L2);
    let m = model(CouplingSign::Off);
    let evolved = march(&psi0, 0.01, 5.0, &m);
    let mut spec = forward_transform(&psi0);
    for idx in 0..grid.len() {
        let u = oracle_propagator(grid.wavevector(idx), 5.0, 1.0);
        let (a, b) = (spec.u[idx], spec.v[idx]);
        spec.u[idx] = u[(0, 0)] * a + u[(0, 1)] * b;
        spec.v[idx] = u[(1, 0)] * a + u[(1, 1)] * b;
    }
    let exact = inverse_transform(&spec);
    let err = rel_distance(&evolved, &exact);
    outcome(err <= 1e-11, format!("relative L2 error at T=5 = {err:.3e} (limit 1e-11)"))
}

fn fitted_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln() / n, b + y.ln() / n));
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x.ln() - mx).powi(2), b + (x.ln() - mx) * (y.ln() - my))
    });
    sxy / sxx
}

fn strang_order() -> Outcome {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, 4.0, Normalization::L2);
    let m = model(CouplingSign::Minus);
    let h = 0.01;
    let reference = march(&psi0, h / 16.0, 1.0, &m);
    let ladder: Vec<(f64, f64)> = [4.0 * h, 2.0 * h, h, h / 2.0]
        .iter()
        .map(|&dt| (dt, rel_distance(&march(&psi0, dt, 1.0, &m), &reference)))
        .collect();
    let order = fitted_slope(&ladder);
    let table: Vec<String> = ladder.iter().map(|(dt, e)| format!("{dt}:{e:.2e}")).collect();
    outcome((order - 2.0).abs() <= 0.2, format!("fitted order = {order:.3} (2.0 +/- 0.2), errors {}", table.join(" ")))
}

fn energy_drift(psi0: &SpinorField, dt: f64, m: &Model) -> f64 {
    let cfg = EvolutionConfig::strang(*m, dt, 5.0);
    let traj = evolve(psi0, &cfg, |_, psi| energy(psi, m)).unwrap();
    let e0 = traj.records[0];
    traj.records.iter().map(|e| (e - e0).abs() / e0.abs()).fold(0.0, f64::max)
}

fn energy_conservation() -> Outcome {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, 4.0, Normalization::L2);
    let m = model(CouplingSign::Minus);
    let coarse = energy_drift(&psi0, 0.02, &m);
    let fine = energy_drift(&psi0, 0.01, &m);
    let factor = coarse / fine;
    outcome(
        (factor - 4.0).abs() <= 1.0,
        format!("drift dt=0.02: {coarse:.3e}, dt=0.01: {fine:.3e}, reduction {factor:.3} (4 +/- 1)"),
    )
}

fn picard_settings(window: f64) -> PicardSettings {
    PicardSettings { window, tol: 1e-13, max_iter: 60, quad_nodes: 17 }
}

fn picard_factor(amplitude: f64, window: f64) -> Option<f64> {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, amplitude, Normalization::HHalf);
    let floor = 1e-12 * lp_norm(&psi0, Exponent::TWO);
    let errors = match picard_solve(&psi0, window, &picard_settings(window), &model(CouplingSign::Minus)) {
        Ok(sol) => sol.iterate_errors,
        Err(dirac_hartree::Error::PicardDiverged { errors }) => errors,
        Err(e) => panic!("{e}"),
    };
    contraction_factor(&errors, floor)
}

fn picard_contraction() -> Outcome {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, 0.1, Normalization::HHalf);
    let m = model(CouplingSign::Minus);
    let sol = picard_solve(&psi0, 0.1, &picard_settings(0.1), &m).unwrap();
    let errs = &sol.iterate_errors;
    let late_ratios: Vec<f64> = errs.windows(2).skip(1).map(|w| w[1] / w[0]).collect();
    let geometric = !late_ratios.is_empty() && late_ratios.iter().all(|&r| r <= 0.5);
    let mut reference = psi0.clone();
    for _ in 0..1000 {
        reference = strang_step(&reference, 1e-4, &m);
    }
    let gap = sol.state.distance(&reference).unwrap();
    let by_window: Vec<Option<f64>> = [0.1, 0.2, 0.4].iter().map(|&w| picard_factor(0.1, w)).collect();
    let by_amplitude: Vec<Option<f64>> = [0.1, 1.0, 4.0].iter().map(|&a| picard_factor(a, 0.1)).collect();
    let increasing = |v: &[Option<f64>]| v.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if a < b));
    let passed = geometric && gap <= 1e-6 && increasing(&by_window) && increasing(&by_amplitude);
    let fmt = |v: &[Option<f64>]| {
        v.iter()
            .map(|f| f.map_or("n/a".to_string(), |f| format!("{f:.2e}")))
            .collect::<Vec<_>>()
            .join(" < ")
    };
    outcome(
        passed,
        format!(
            "errors {:?}, ratios after the second iterate {:?} (<= 0.5: {geometric}), |picard - strang| = {gap:.2e}; factor by window {}; by amplitude {}",
            errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(),
            late_ratios.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
            fmt(&by_window),
            fmt(&by_amplitude)
        ),
    )
}

fn partition() -> Outcome {
    let grid = SpectralGrid::new(256, 16.0 * PI).unwrap();
    let profile = DyadicProfile;
    let kmax = f64::powi(2.0, profile.resolved_shells(&grid) as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_rec = 0.0_f64;
    let mut worst_leak = 0.0_f64;
    for _ in 0..3 {
        let mut spec = SpinorSpectrum::zeros(grid.clone());
        for idx in 0..grid.len() {
            if grid.k_squared()[idx].sqrt() < kmax {
                spec.u[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                spec.v[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let peak = spec.u.iter().chain(&spec.v).map(|z| z.norm()).fold(0.0, f64::max);
        let field = inverse_transform(&spec);
        let dec = decompose(&field, &profile);
        worst_rec = worst_rec.max(rel_distance(&dec.reconstruct(), &field));
        for (i, block) in dec.blocks.iter().enumerate() {
            let (lo, hi) = profile.shell_support(i + 1);
            let bs = forward_transform(block);
            for idx in 0..grid.len() {
                let r = grid.k_squared()[idx].sqrt();
                if r < lo || r > hi {
                    let leak = bs.u[idx].norm().max(bs.v[idx].norm()) / peak;
                    worst_leak = worst_leak.max(leak);
                }
            }
        }
    }
    outcome(
        worst_rec <= 1e-10 && worst_leak <= 1e-14,
        format!("reconstruction error {worst_rec:.2e} (limit 1e-10), support leakage {worst_leak:.2e} (limit 1e-14)"),
    )
}

fn summarize(report: &CheckReport) -> String {
    let failed: Vec<String> = report
        .conditions
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:.4} > {}", c.name, c.value, c.limit))
        .collect();
    let mut s = format!(
        "max ratio {:.4e} (baseline {:.4e})",
        report.max_ratio,
        report.baseline.unwrap_or(f64::NAN)
    );
    if !failed.is_empty() {
        s.push_str("; failing: ");
        s.push_str(&failed.join("; "));
    }
    s
}

fn verifier(check: Check) -> Outcome {
    let report = run_check(check, &SweepParams::default(), 0).unwrap();
    outcome(report.passed, summarize(&report))
}

fn kernel() -> Outcome {
    let bound = run_check(Check::KernelBound, &SweepParams::default(), 0).unwrap();
    let lp = run_check(Check::KernelLp, &SweepParams::default(), 0).unwrap();
    outcome(
        bound.passed && lp.passed,
        format!("pointwise: {}; L^p: {}", summarize(&bound), summarize(&lp)),
    )
}

fn kinetic_envelope() -> Outcome {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, 4.0, Normalization::L2);
    let m = model(CouplingSign::Minus);
    let cfg = EvolutionConfig { sample_every: 50, ..EvolutionConfig::strang(m, 0.01, 20.0) };
    let traj = evolve(&psi0, &cfg, |t, psi| record(psi, t, &m, &[])).unwrap();
    let kinetic: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.t, r.kinetic)).collect();
    let h_half: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.t, r.h_half)).collect();
    let single = extrapolated_envelope_check(&kinetic, GrowthModel::SingleExponential, 2.0);
    let double = extrapolated_envelope_check(&h_half, GrowthModel::DoubleExponential, 2.0);
    match (single, double) {
        (Ok(s), Ok(d)) => {
            let worst = |v: &dirac_hartree::diagnostics::EnvelopeVerdict| {
                v.samples.iter().map(|x| x.1).fold(0.0, f64::max)
            };
            outcome(
                s.passed && d.passed,
                format!(
                    "{} samples; kinetic vs e^(a+ct), c = {:.3e}: worst ratio {:.3} ({}); H^1/2 vs exp(C1 e^(C2 t)), C2 = {:.3e}: worst ratio {:.3} ({})",
                    traj.records.len(),
                    s.fit.params[1],
                    worst(&s),
                    s.passed,
                    d.fit.params[1],
                    worst(&d),
                    d.passed
                ),
            )
        }
        (s, d) => outcome(false, format!("fit failed: {:?} / {:?}", s.err(), d.err())),
    }
}

fn appendix_identity() -> Outcome {
    let grid = desk_grid();
    let psi0 = gaussian(&grid, 1.0, Normalization::HHalf);
    let m = model(CouplingSign::Minus);
    let sol = picard_solve(&psi0, 0.1, &picard_settings(0.1), &m).unwrap();
    let report = appendix_identity_check(&psi0, &sol).unwrap();
    outcome(
        report.within(10.0),
        format!(
            "|I|^2 = {:.6e}, 2 Im<psi0,I> = {:.6e}, balance = {:.2e}, estimated error = {:.2e} (quadrature {:.2e})",
            report.duhamel_norm_sq, report.cross_term, report.balance, report.error_estimate, report.quadrature_error
        ),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("mass conservation", Box::new(mass_conservation)),
        ("propagator vs eigendecomposition", Box::new(propagator_correctness)),
        ("linear exactness", Box::new(linear_exactness)),
        ("Strang order", Box::new(strang_order)),
        ("energy conservation order", Box::new(energy_conservation)),
        ("Picard contraction", Box::new(picard_contraction)),
        ("Littlewood-Paley partition", Box::new(partition)),
        ("Bernstein sweep", Box::new(|| verifier(Check::Bernstein))),
        ("logarithmic estimate sweep", Box::new(|| verifier(Check::BrezisGallouet))),
        ("Bessel kernel bounds", Box::new(kernel)),
        ("potential-term estimate", Box::new(|| verifier(Check::PotentialTerm))),
        ("kinetic and H^1/2 envelopes", Box::new(kinetic_envelope)),
        ("Duhamel square expansion", Box::new(appendix_identity)),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        if !result.passed {
            failures += 1;
        }
        println!(
            "criterion {number:2} {verdict} {name} [{:.1}s]: {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
