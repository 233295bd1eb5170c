//! Time integration: Strang splitting with exact substeps and Picard iteration
//! of the Duhamel map
//!
//! ```text
//! psi(t) = U(t) [ psi0 - i int_0^t U(-s) N(psi(s)) ds ],   U(t) = exp(-i t D_m),
//! ```
//!
//! where `N(psi) = sign * V gamma0 psi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::{propagator_symbol, DiracParams, FreePropagator};
use crate::error::{Error, Result};
use crate::exec::map_ordered;
use crate::hartree::{hartree_potential, nonlinear_term, CouplingSign, HartreeParams};
use crate::model::Model;
use crate::spectral::{SpectralField, SpinorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardSettings {
    /// Length of each restart window.
    pub window: f64,
    /// Stop once the sup-over-nodes L2 distance between iterates is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Quadrature nodes per window, endpoints included.
    pub quad_nodes: usize,
}

impl Default for PicardSettings {
    fn default() -> Self {
        PicardSettings {
            window: 0.1,
            tol: 1e-12,
            max_iter: 60,
            quad_nodes: 17,
        }
    }
}

impl PicardSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::param("window", self.window, "must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::param("picard_tol", self.tol, "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("picard_max_iter", 0.0, "must be at least 1"));
        }
        if self.quad_nodes < 2 {
            return Err(Error::param("quad_nodes", self.quad_nodes as f64, "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Strang,
    Picard(PicardSettings),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub method: Method,
    pub model: Model,
    /// Diagnostics every this many steps (Strang) or windows (Picard).
    #[serde(default = "one")]
    pub sample_every: usize,
    /// Keep a copy of the state at every sample.
    #[serde(default)]
    pub store_states: bool,
}

fn one() -> usize {
    1
}

impl EvolutionConfig {
    pub fn strang(model: Model, dt: f64, t_final: f64) -> Self {
        EvolutionConfig {
            dt,
            t_final,
            method: Method::Strang,
            model,
            sample_every: 1,
            store_states: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", self.dt, "must be positive"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::param("t_final", self.t_final, "must be finite and nonnegative"));
        }
        if self.sample_every == 0 {
            return Err(Error::param("sample_every", 0.0, "must be at least 1"));
        }
        if let Method::Picard(settings) = &self.method {
            settings.validate()?;
        }
        Ok(())
    }
}

/// Splits `[0, t_final]` into steps of `h`, shortening the last one.
fn step_sizes(h: f64, t_final: f64) -> Vec<f64> {
    if t_final == 0.0 {
        return Vec::new();
    }
    let count = ((t_final / h) - 1e-9).ceil().max(1.0) as usize;
    let mut steps = vec![h; count];
    steps[count - 1] = t_final - h * (count - 1) as f64;
    steps
}

/// Exact flow of `i d_t psi = sign V gamma0 psi` with `V` frozen.
pub fn nonlinear_substep(psi: &SpinorField, dt: f64, hartree: &HartreeParams) -> SpinorField {
    if hartree.coupling() == CouplingSign::Off {
        return psi.clone();
    }
    let potential = hartree_potential(psi, hartree);
    let sign = hartree.coupling().value();
    let rotate = |z: &Complex64, phase: f64| z * Complex64::from_polar(1.0, phase);
    let (u, v): (Vec<_>, Vec<_>) = psi
        .u()
        .iter()
        .zip(psi.v())
        .zip(potential.values())
        .map(|((a, b), &pot)| {
            let theta = sign * dt * pot;
            (rotate(a, -theta), rotate(b, theta))
        })
        .unzip();
    SpinorField::from_channels(psi.grid().clone(), vec![u, v])
}

/// One Strang step: free half step, exact nonlinear step, free half step.
pub fn strang_step(psi: &SpinorField, dt: f64, model: &Model) -> SpinorField {
    StrangStepper::new(psi, dt, model).step(psi)
}

/// Strang stepping with the free half-step cached.
struct StrangStepper {
    half: FreePropagator,
    dt: f64,
    hartree: HartreeParams,
}

impl StrangStepper {
    fn new(psi: &SpinorField, dt: f64, model: &Model) -> Self {
        StrangStepper {
            half: FreePropagator::new(psi.grid().clone(), 0.5 * dt, model.dirac),
            dt,
            hartree: model.hartree,
        }
    }

    fn step(&self, psi: &SpinorField) -> SpinorField {
        let kicked = nonlinear_substep(&self.half.apply(psi), self.dt, &self.hartree);
        self.half.apply(&kicked)
    }
}

fn propagate_raw(psi: &SpinorField, u: &mut [Complex64], v: &mut [Complex64], t: f64, dirac: DiracParams) {
    let grid = psi.grid();
    for (idx, (a, b)) in u.iter_mut().zip(v.iter_mut()).enumerate() {
        let mat = propagator_symbol(grid.wavevector(idx), t, dirac);
        let (x, y) = (*a, *b);
        *a = mat[0][0] * x + mat[0][1] * y;
        *b = mat[1][0] * x + mat[1][1] * y;
    }
}

/// Raw DFT coefficients of a spinor.
#[derive(Clone)]
struct RawSpinor {
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl RawSpinor {
    fn of(psi: &SpinorField) -> Self {
        let (mut u, mut v) = psi.clone().into_components();
        psi.grid().fft2(&mut u);
        psi.grid().fft2(&mut v);
        RawSpinor { u, v }
    }

    fn to_field(&self, template: &SpinorField) -> SpinorField {
        let grid = template.grid();
        let (mut u, mut v) = (self.u.clone(), self.v.clone());
        grid.ifft2(&mut u);
        grid.ifft2(&mut v);
        SpinorField::from_channels(grid.clone(), vec![u, v])
    }

    /// L2 distance in the physical normalization (Plancherel).
    fn distance(&self, other: &RawSpinor, template: &SpinorField) -> f64 {
        let grid = template.grid();
        let sum: f64 = self
            .u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (sum * grid.cell_area() / grid.len() as f64).sqrt()
    }
}

/// Result of one Picard window.
#[derive(Clone, Debug)]
pub struct PicardSolution {
    pub state: SpinorField,
    /// `max_i |psi^(k+1)(t_i) - psi^(k)(t_i)|_{L2}` for each iteration.
    pub iterate_errors: Vec<f64>,
    pub node_times: Vec<f64>,
    /// `I(T) = int_0^T U(-s) N(psi(s)) ds`, composite trapezoid on all nodes.
    pub duhamel: SpinorField,
    /// The same integral on every other node, when the node count allows it.
    pub duhamel_coarse: Option<SpinorField>,
    pub tol: f64,
}

impl PicardSolution {
    pub fn iterations(&self) -> usize {
        self.iterate_errors.len()
    }

    pub fn contraction_factor(&self, noise_floor: f64) -> Option<f64> {
        contraction_factor(&self.iterate_errors, noise_floor)
    }
}

/// Geometric mean of `e_{k+1} / e_k` over pairs with both errors above `noise_floor`.
pub fn contraction_factor(errors: &[f64], noise_floor: f64) -> Option<f64> {
    let logs: Vec<f64> = errors
        .windows(2)
        .filter(|w| w[0] > noise_floor && w[1] > noise_floor)
        .map(|w| (w[1] / w[0]).ln())
        .collect();
    if logs.is_empty() {
        None
    } else {
        Some((logs.iter().sum::<f64>() / logs.len() as f64).exp())
    }
}

const DIVERGENCE_LIMIT: f64 = 1e6;

fn trapezoid_cumulative(g: &[RawSpinor], h: f64) -> Vec<RawSpinor> {
    let len = g[0].u.len();
    let zero = RawSpinor {
        u: vec![Complex64::new(0.0, 0.0); len],
        v: vec![Complex64::new(0.0, 0.0); len],
    };
    let mut out = Vec::with_capacity(g.len());
    out.push(zero);
    for k in 1..g.len() {
        let prev = &out[k - 1];
        let u = (0..len).map(|i| prev.u[i] + 0.5 * h * (g[k - 1].u[i] + g[k].u[i])).collect();
        let v = (0..len).map(|i| prev.v[i] + 0.5 * h * (g[k - 1].v[i] + g[k].v[i])).collect();
        out.push(RawSpinor { u, v });
    }
    out
}

/// Fixed-point iteration of the Duhamel map on `[0, window]`, starting from the free flow.
pub fn picard_solve(
    psi0: &SpinorField,
    window: f64,
    settings: &PicardSettings,
    model: &Model,
) -> Result<PicardSolution> {
    settings.validate()?;
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::param("window", window, "must be positive"));
    }
    let exec = psi0.grid().execution();
    let nodes = settings.quad_nodes;
    let h = window / (nodes - 1) as f64;
    let times: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
    let initial = RawSpinor::of(psi0);

    let forward = |coeffs: &RawSpinor, t: f64| {
        let mut out = coeffs.clone();
        propagate_raw(psi0, &mut out.u, &mut out.v, t, model.dirac);
        out
    };
    let integrand = |state: &RawSpinor, t: f64| {
        let field = state.to_field(psi0);
        let mut g = RawSpinor::of(&nonlinear_term(&field, &model.hartree));
        propagate_raw(psi0, &mut g.u, &mut g.v, -t, model.dirac);
        g
    };

    let indexed: Vec<(usize, f64)> = times.iter().copied().enumerate().collect();
    let mut states: Vec<RawSpinor> = map_ordered(exec, &indexed, |&(_, t)| forward(&initial, t));
    let mut errors = Vec::new();
    let mut integrals;
    loop {
        let g = map_ordered(exec, &indexed, |&(i, t)| integrand(&states[i], t));
        integrals = trapezoid_cumulative(&g, h);
        let next: Vec<RawSpinor> = map_ordered(exec, &indexed, |&(i, t)| {
            let mut phi = initial.clone();
            for (a, b) in phi.u.iter_mut().zip(&integrals[i].u) {
                *a -= Complex64::i() * b;
            }
            for (a, b) in phi.v.iter_mut().zip(&integrals[i].v) {
                *a -= Complex64::i() * b;
            }
            forward(&phi, t)
        });
        let err = states
            .iter()
            .zip(&next)
            .map(|(a, b)| a.distance(b, psi0))
            .fold(0.0, f64::max);
        errors.push(err);
        states = next;
        if err <= settings.tol {
            break;
        }
        if !err.is_finite() || err > DIVERGENCE_LIMIT || errors.len() >= settings.max_iter {
            return Err(Error::PicardDiverged { errors });
        }
    }

    let g = map_ordered(exec, &indexed, |&(i, t)| integrand(&states[i], t));
    let duhamel_coarse = if nodes >= 3 && (nodes - 1).is_multiple_of(2) {
        let coarse: Vec<RawSpinor> = g.iter().step_by(2).cloned().collect();
        trapezoid_cumulative(&coarse, 2.0 * h).last().map(|r| r.to_field(psi0))
    } else {
        None
    };
    let state = states[nodes - 1].to_field(psi0);
    if !state.is_finite() {
        return Err(Error::NumericalAbort { last_valid_time: 0.0 });
    }
    Ok(PicardSolution {
        state,
        iterate_errors: errors,
        node_times: times,
        duhamel: integrals[nodes - 1].to_field(psi0),
        duhamel_coarse,
        tol: settings.tol,
    })
}

#[derive(Clone, Debug)]
pub struct Trajectory<R> {
    pub times: Vec<f64>,
    /// Present only when `store_states` is set.
    pub states: Vec<SpinorField>,
    pub records: Vec<R>,
    /// Picard iteration count per window (empty for Strang).
    pub picard_iterations: Vec<usize>,
    pub final_state: SpinorField,
}

/// Marches `psi0` to `t_final`, calling `hook` at every sample time.
pub fn evolve<R>(
    psi0: &SpinorField,
    config: &EvolutionConfig,
    mut hook: impl FnMut(f64, &SpinorField) -> R,
) -> Result<Trajectory<R>> {
    config.validate()?;
    if !psi0.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        records: Vec::new(),
        picard_iterations: Vec::new(),
        final_state: psi0.clone(),
    };
    let mut sample = |traj: &mut Trajectory<R>, t: f64, psi: &SpinorField| {
        traj.times.push(t);
        traj.records.push(hook(t, psi));
        if config.store_states {
            traj.states.push(psi.clone());
        }
    };
    sample(&mut traj, 0.0, psi0);

    let h = match config.method {
        Method::Strang => config.dt,
        Method::Picard(settings) => settings.window,
    };
    let steps = step_sizes(h, config.t_final);
    let regular = StrangStepper::new(psi0, h, &config.model);
    // Between samples the trailing half step of one Strang step and the leading
    // half step of the next are fused into a single free step of length h.
    let fused = FreePropagator::new(psi0.grid().clone(), h, config.model.dirac);
    let mut mid_step = false;
    let mut psi = psi0.clone();
    let mut t = 0.0;
    for (k, &dt) in steps.iter().enumerate() {
        let last = k + 1 == steps.len();
        let sample_now = (k + 1) % config.sample_every == 0 || last;
        let next = match config.method {
            Method::Strang => {
                let short;
                let stepper = if dt == h {
                    &regular
                } else {
                    short = StrangStepper::new(&psi, dt, &config.model);
                    &short
                };
                let entered = if mid_step { psi } else { stepper.half.apply(&psi) };
                let kicked = nonlinear_substep(&entered, dt, &stepper.hartree);
                mid_step = !sample_now && steps[k + 1] == h && dt == h;
                if mid_step {
                    fused.apply(&kicked)
                } else {
                    stepper.half.apply(&kicked)
                }
            }
            Method::Picard(settings) => {
                let solution = picard_solve(&psi, dt, &settings, &config.model)?;
                traj.picard_iterations.push(solution.iterations());
                solution.state
            }
        };
        if !next.is_finite() {
            return Err(Error::NumericalAbort { last_valid_time: t });
        }
        psi = next;
        t = if last { config.t_final } else { t + dt };
        if sample_now {
            sample(&mut traj, t, &psi);
        }
    }
    traj.final_state = psi;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::propagator_step;
    use crate::hartree::HartreeParams;
    use crate::initial::{InitialData, Normalization};
    use crate::spectral::{lp_norm, DensityForm, Exponent, SpectralGrid};
    use std::f64::consts::PI;

    fn model(coupling: CouplingSign, form: DensityForm) -> Model {
        Model::new(
            DiracParams::new(1.0).unwrap(),
            HartreeParams::new(1.0, form, coupling).unwrap(),
        )
    }

    fn gaussian(n: usize, amplitude: f64) -> SpinorField {
        let g = SpectralGrid::new(n, 16.0 * PI).unwrap();
        InitialData::gaussian(2.0, amplitude, Normalization::L2)
            .build(&g, DiracParams::new(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn step_sizes_shorten_the_last_step() {
        assert!(step_sizes(0.1, 0.0).is_empty());
        let s = step_sizes(0.3, 1.0);
        assert_eq!(s.len(), 4);
        assert!((s[3] - 0.1).abs() < 1e-15);
        assert_eq!(step_sizes(0.25, 1.0), vec![0.25; 4]);
    }

    #[test]
    fn linear_strang_is_the_free_flow() {
        let psi = gaussian(64, 1.0);
        let m = model(CouplingSign::Off, DensityForm::Gamma0);
        let a = strang_step(&psi, 0.05, &m);
        let b = propagator_step(&psi, 0.05, m.dirac);
        assert!(a.distance(&b).unwrap() < 1e-13);
    }

    #[test]
    fn strang_step_preserves_mass_and_reverses() {
        let psi = gaussian(64, 3.0);
        for form in [DensityForm::Gamma0, DensityForm::Modulus] {
            let m = model(CouplingSign::Minus, form);
            let mass0 = lp_norm(&psi, Exponent::TWO).powi(2);
            let fwd = strang_step(&psi, 0.05, &m);
            let mass1 = lp_norm(&fwd, Exponent::TWO).powi(2);
            assert!((mass1 - mass0).abs() < 1e-13 * mass0);
            let back = strang_step(&fwd, -0.05, &m);
            assert!(back.distance(&psi).unwrap() < 1e-12);
        }
    }

    #[test]
    fn nonlinear_substep_phase_convention() {
        // printed sign: u picks up exp(+i dt V)
        let g = SpectralGrid::new(16, 2.0 * PI).unwrap();
        let psi = SpinorField::from_fn(g, |_, _| [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let m = model(CouplingSign::Minus, DensityForm::Gamma0);
        let out = nonlinear_substep(&psi, 0.3, &m.hartree);
        // rho = 1 constant, V = 1 / b = 1
        let expected = Complex64::from_polar(1.0, 0.3);
        assert!((out.u()[5] - expected).norm() < 1e-14);
    }

    #[test]
    fn picard_linear_converges_at_once() {
        let psi = gaussian(32, 1.0);
        let m = model(CouplingSign::Off, DensityForm::Gamma0);
        let sol = picard_solve(&psi, 0.5, &PicardSettings::default(), &m).unwrap();
        assert_eq!(sol.iterations(), 1);
        let exact = propagator_step(&psi, 0.5, m.dirac);
        assert!(sol.state.distance(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn picard_reports_divergence() {
        let psi = gaussian(32, 30.0);
        let m = model(CouplingSign::Minus, DensityForm::Gamma0);
        let settings = PicardSettings { max_iter: 3, ..PicardSettings::default() };
        match picard_solve(&psi, 2.0, &settings, &m) {
            Err(Error::PicardDiverged { errors }) => assert!((1..=3).contains(&errors.len())),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn picard_matches_strang() {
        let psi = gaussian(32, 0.5);
        let m = model(CouplingSign::Minus, DensityForm::Gamma0);
        let sol = picard_solve(&psi, 0.1, &PicardSettings::default(), &m).unwrap();
        let mut s = psi.clone();
        for _ in 0..100 {
            s = strang_step(&s, 1e-3, &m);
        }
        assert!(sol.state.distance(&s).unwrap() < 1e-6);
    }

    #[test]
    fn contraction_factor_is_geometric_mean() {
        let errs = [1.0, 0.1, 0.01, 0.001, 1e-20];
        let f = contraction_factor(&errs, 1e-15).unwrap();
        assert!((f - 0.1).abs() < 1e-12);
        assert_eq!(contraction_factor(&[1.0], 0.0), None);
    }

    #[test]
    fn evolve_samples_and_validates() {
        let psi = gaussian(32, 1.0);
        let m = model(CouplingSign::Minus, DensityForm::Gamma0);
        let cfg = EvolutionConfig { sample_every: 3, ..EvolutionConfig::strang(m, 0.1, 1.0) };
        let traj = evolve(&psi, &cfg, |t, _| t).unwrap();
        assert_eq!(traj.times, traj.records);
        let mut stepped = psi.clone();
        for _ in 0..10 {
            stepped = strang_step(&stepped, 0.1, &m);
        }
        assert!(traj.final_state.distance(&stepped).unwrap() < 1e-12);
        assert_eq!(traj.times.len(), 5);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));

        let empty = evolve(&psi, &EvolutionConfig::strang(m, 0.1, 0.0), |t, _| t).unwrap();
        assert_eq!(empty.times, vec![0.0]);
        assert!(evolve(&psi, &EvolutionConfig::strang(m, 0.0, 1.0), |t, _| t).is_err());
        let bad = EvolutionConfig {
            method: Method::Picard(PicardSettings { quad_nodes: 1, ..Default::default() }),
            ..EvolutionConfig::strang(m, 0.1, 1.0)
        };
        assert!(evolve(&psi, &bad, |t, _| t).is_err());
    }

    #[test]
    fn evolve_detects_blow_up() {
        let psi = gaussian(32, 1.0);
        let m = model(CouplingSign::Minus, DensityForm::Gamma0);
        let (mut u, v) = psi.clone().into_components();
        u[3] = Complex64::new(f64::NAN, 0.0);
        let bad = SpinorField::from_channels(psi.grid().clone(), vec![u, v]);
        let err = evolve(&bad, &EvolutionConfig::strang(m, 0.1, 1.0), |t, _| t).unwrap_err();
        assert_eq!(err, Error::NonFinite);
    }
}
