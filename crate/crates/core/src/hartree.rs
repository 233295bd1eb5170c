//! Bessel potentials `(b - Delta)^sigma`, the Hartree potential and the cubic
//! nonlinearity, plus checks on the kernel of `(1 - Delta)^{-1/2}`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    apply_multiplier, density, inverse_transform, DensityForm, ScalarField, SpectralField,
    SpectralGrid, SpinorField, SpinorSpectrum,
};

/// Sign in front of the interaction term; `Minus` reproduces
/// `i d_t psi = D_m psi - V gamma0 psi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "i8", into = "i8")]
pub enum CouplingSign {
    #[default]
    Minus,
    Plus,
    Off,
}

impl CouplingSign {
    pub fn value(self) -> f64 {
        match self {
            CouplingSign::Minus => -1.0,
            CouplingSign::Plus => 1.0,
            CouplingSign::Off => 0.0,
        }
    }
}

impl TryFrom<i8> for CouplingSign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(CouplingSign::Minus),
            1 => Ok(CouplingSign::Plus),
            0 => Ok(CouplingSign::Off),
            other => Err(format!("coupling_sign must be -1, 0 or 1, got {other}")),
        }
    }
}

impl From<CouplingSign> for i8 {
    fn from(c: CouplingSign) -> i8 {
        c.value() as i8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HartreeRepr", into = "HartreeRepr")]
pub struct HartreeParams {
    b: f64,
    density_form: DensityForm,
    coupling: CouplingSign,
}

#[derive(Serialize, Deserialize)]
struct HartreeRepr {
    b: f64,
    #[serde(default)]
    density_form: DensityForm,
    #[serde(default)]
    coupling_sign: CouplingSign,
}

impl TryFrom<HartreeRepr> for HartreeParams {
    type Error = Error;
    fn try_from(r: HartreeRepr) -> Result<Self> {
        HartreeParams::new(r.b, r.density_form, r.coupling_sign)
    }
}

impl From<HartreeParams> for HartreeRepr {
    fn from(p: HartreeParams) -> Self {
        HartreeRepr {
            b: p.b,
            density_form: p.density_form,
            coupling_sign: p.coupling,
        }
    }
}

impl HartreeParams {
    pub fn new(b: f64, density_form: DensityForm, coupling: CouplingSign) -> Result<Self> {
        check_b(b)?;
        Ok(HartreeParams {
            b,
            density_form,
            coupling,
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn density_form(&self) -> DensityForm {
        self.density_form
    }

    pub fn coupling(&self) -> CouplingSign {
        self.coupling
    }

    pub fn with_coupling(self, coupling: CouplingSign) -> Self {
        HartreeParams { coupling, ..self }
    }
}

fn check_b(b: f64) -> Result<()> {
    if b.is_finite() && b > 0.0 {
        Ok(())
    } else {
        Err(Error::param("b", b, "must be positive"))
    }
}

/// Multiplies by `(b + |xi|^2)^sigma`.
pub fn bessel_multiply<F: SpectralField>(field: &F, sigma: f64, b: f64) -> Result<F> {
    check_b(b)?;
    if !sigma.is_finite() {
        return Err(Error::param("sigma", sigma, "must be finite"));
    }
    let k2 = field.grid().k_squared();
    Ok(apply_multiplier(field, |idx| (b + k2[idx]).powf(sigma)))
}

/// `V = (b - Delta)^{-1} rho(psi)`.
pub fn hartree_potential(psi: &SpinorField, params: &HartreeParams) -> ScalarField {
    let rho = density(psi, params.density_form);
    let k2 = psi.grid().k_squared();
    let b = params.b;
    apply_multiplier(&rho, |idx| 1.0 / (b + k2[idx]))
}

/// `sign * V gamma0 psi`, i.e. components `sign * (V u, -V v)`.
pub fn nonlinear_term(psi: &SpinorField, params: &HartreeParams) -> SpinorField {
    let potential = hartree_potential(psi, params);
    apply_gamma0_potential(psi, &potential, params.coupling.value())
}

pub(crate) fn apply_gamma0_potential(psi: &SpinorField, potential: &ScalarField, sign: f64) -> SpinorField {
    let vals = potential.values();
    let u = psi
        .u()
        .iter()
        .zip(vals)
        .map(|(z, &p)| z * (sign * p))
        .collect();
    let v = psi
        .v()
        .iter()
        .zip(vals)
        .map(|(z, &p)| z * (-sign * p))
        .collect();
    SpinorField::from_channels(psi.grid().clone(), vec![u, v])
}

/// Samples of the periodized kernel of `(1 - Delta)^sigma`, `sigma < 0`, centred at the origin.
pub fn bessel_kernel_samples(grid: &Arc<SpectralGrid>, sigma: f64) -> Result<ScalarField> {
    if !(sigma < 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", sigma, "kernel requires sigma < 0"));
    }
    let mut spectrum = SpinorSpectrum::zeros(grid.clone());
    for (idx, c) in spectrum.u.iter_mut().enumerate() {
        *c = Complex64::new((1.0 + grid.k_squared()[idx]).powf(sigma), 0.0);
    }
    let field = inverse_transform(&spectrum);
    let values = field.u().iter().map(|z| z.re).collect();
    ScalarField::new(grid.clone(), values)
}

/// Two-regime envelope `e^{-r/2}` for `r >= 2`, `1/r` for `r < 2`.
pub fn kernel_envelope(r: f64) -> f64 {
    if r >= 2.0 {
        (-0.5 * r).exp()
    } else {
        1.0 / r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub r_min: f64,
    pub r_max: f64,
    /// Smallest `C` with `G <= C * envelope` on the annulus.
    pub constant: f64,
    /// Radius where the constant is attained.
    pub constant_at: f64,
    /// Minimum of `G` on `r_min <= |x| <= positivity_r_max`.
    pub positivity_r_max: f64,
    pub min_on_positivity_annulus: f64,
    pub samples: usize,
}

/// Fits the single constant of the pointwise kernel bound on `r_min <= |x| <= r_max`.
pub fn kernel_bound_check(
    kernel: &ScalarField,
    r_min: f64,
    r_max: f64,
    positivity_r_max: f64,
) -> Result<KernelBoundReport> {
    let grid = kernel.grid();
    if !(r_min >= grid.dx() && r_min < r_max) {
        return Err(Error::param("r_min", r_min, "annulus must start at or beyond dx"));
    }
    let mut constant = 0.0_f64;
    let mut constant_at = r_min;
    let mut min_pos = f64::INFINITY;
    let mut samples = 0;
    for (idx, &g) in kernel.values().iter().enumerate() {
        let (x, y) = grid.position(idx);
        let r = x.hypot(y);
        if r < r_min || r > r_max {
            continue;
        }
        samples += 1;
        let ratio = g / kernel_envelope(r);
        if ratio > constant {
            constant = ratio;
            constant_at = r;
        }
        if r <= positivity_r_max {
            min_pos = min_pos.min(g);
        }
    }
    Ok(KernelBoundReport {
        r_min,
        r_max,
        constant,
        constant_at,
        positivity_r_max,
        min_on_positivity_annulus: min_pos,
        samples,
    })
}

/// `p = (2 + 2 eps) / (1 + 3 eps)`.
pub fn young_exponent(epsilon: f64) -> f64 {
    (2.0 + 2.0 * epsilon) / (1.0 + 3.0 * epsilon)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::param("epsilon", epsilon, "must lie in (0, 1)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelLpReport {
    pub epsilon: f64,
    pub p: f64,
    /// `|G|_{L^p}^p` over `|x| >= dx`.
    pub lhs: f64,
    /// `2^eps / eps`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Compares `|G|_{L^p}^p` for the kernel of `(1 - Delta)^{-1/2}` with `2^eps / eps`.
pub fn kernel_lp_bound_check(grid: &Arc<SpectralGrid>, epsilon: f64) -> Result<KernelLpReport> {
    check_epsilon(epsilon)?;
    let kernel = bessel_kernel_samples(grid, -0.5)?;
    Ok(kernel_lp_from_samples(&kernel, epsilon))
}

pub(crate) fn kernel_lp_from_samples(kernel: &ScalarField, epsilon: f64) -> KernelLpReport {
    let grid = kernel.grid();
    let p = young_exponent(epsilon);
    let sum: f64 = kernel
        .values()
        .iter()
        .enumerate()
        .filter(|(idx, _)| {
            let (x, y) = grid.position(*idx);
            x.hypot(y) >= grid.dx()
        })
        .map(|(_, g)| g.abs().powf(p))
        .sum();
    let lhs = sum * grid.cell_area();
    let rhs = 2.0_f64.powf(epsilon) / epsilon;
    KernelLpReport {
        epsilon,
        p,
        lhs,
        rhs,
        ratio: lhs / rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, inner_product, lp_norm, Exponent};
    use std::f64::consts::PI;

    fn gaussian(grid: &Arc<SpectralGrid>) -> SpinorField {
        SpinorField::from_fn(grid.clone(), |x, y| {
            let e = (-(x * x + y * y) / 4.0).exp();
            [Complex64::new(e, 0.2 * e), Complex64::new(0.4 * e * x.tanh(), 0.0)]
        })
        .unwrap()
    }

    #[test]
    fn coupling_sign_serde() {
        assert_eq!(serde_json_like(CouplingSign::Minus), -1);
        assert!(CouplingSign::try_from(2).is_err());
        fn serde_json_like(c: CouplingSign) -> i8 {
            c.into()
        }
    }

    #[test]
    fn rejects_nonpositive_b() {
        assert!(HartreeParams::new(0.0, DensityForm::Gamma0, CouplingSign::Minus).is_err());
        let g = SpectralGrid::new(8, 1.0).unwrap();
        assert!(bessel_multiply(&ScalarField::constant(g, 1.0), -1.0, -2.0).is_err());
    }

    #[test]
    fn multiplier_on_constants_and_identity() {
        let g = SpectralGrid::new(16, 5.0).unwrap();
        let f = ScalarField::constant(g.clone(), 2.5);
        let out = bessel_multiply(&f, -0.75, 3.0).unwrap();
        let expected = 3.0_f64.powf(-0.75) * 2.5;
        assert!(out.values().iter().all(|x| (x - expected).abs() < 1e-14));
        let psi = gaussian(&SpectralGrid::new(32, 20.0).unwrap());
        let same = bessel_multiply(&psi, 0.0, 1.7).unwrap();
        assert!(same.distance(&psi).unwrap() < 1e-14);
    }

    #[test]
    fn multiplier_round_trip_and_composition() {
        let g = SpectralGrid::new(64, 20.0).unwrap();
        let psi = gaussian(&g);
        let norm = lp_norm(&psi, Exponent::TWO);
        let there = bessel_multiply(&psi, -1.0, 0.6).unwrap();
        let back = bessel_multiply(&there, 1.0, 0.6).unwrap();
        assert!(back.distance(&psi).unwrap() < 1e-12 * norm);
        let two = bessel_multiply(&bessel_multiply(&psi, 0.3, 2.0).unwrap(), -0.8, 2.0).unwrap();
        let one = bessel_multiply(&psi, -0.5, 2.0).unwrap();
        assert!(two.distance(&one).unwrap() < 1e-12 * norm);
    }

    #[test]
    fn potential_of_zero_and_constant_density() {
        let g = SpectralGrid::new(16, 5.0).unwrap();
        let params = HartreeParams::new(2.0, DensityForm::Modulus, CouplingSign::Minus).unwrap();
        let zero = hartree_potential(&SpinorField::zeros(g.clone()), &params);
        assert!(zero.values().iter().all(|&x| x == 0.0));
        let c = Complex64::new(0.6, 0.8);
        let psi = SpinorField::from_fn(g, |_, _| [c, Complex64::new(0.0, 0.0)]).unwrap();
        let v = hartree_potential(&psi, &params);
        assert!(v.values().iter().all(|x| (x - 0.5).abs() < 1e-14));
    }

    #[test]
    fn potential_matches_per_mode_division() {
        let g = SpectralGrid::new(64, 16.0).unwrap();
        let psi = gaussian(&g);
        for form in [DensityForm::Modulus, DensityForm::Gamma0] {
            let params = HartreeParams::new(1.4, form, CouplingSign::Minus).unwrap();
            let v = hartree_potential(&psi, &params);
            let as_spinor = |s: &ScalarField| {
                SpinorField::new(
                    g.clone(),
                    s.values().iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                    vec![Complex64::new(0.0, 0.0); g.len()],
                )
                .unwrap()
            };
            let rho_hat = forward_transform(&as_spinor(&density(&psi, form)));
            let v_hat = forward_transform(&as_spinor(&v));
            let scale = rho_hat.u.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for idx in 0..g.len() {
                let expected = rho_hat.u[idx] / (1.4 + g.k_squared()[idx]);
                assert!((v_hat.u[idx] - expected).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn nonlinear_term_structure() {
        let g = SpectralGrid::new(32, 16.0).unwrap();
        let params = HartreeParams::new(1.0, DensityForm::Gamma0, CouplingSign::Minus).unwrap();
        let zero = nonlinear_term(&SpinorField::zeros(g.clone()), &params);
        assert_eq!(lp_norm(&zero, Exponent::INF), 0.0);

        let upper = SpinorField::from_fn(g.clone(), |x, y| {
            [Complex64::new((-(x * x + y * y) / 5.0).exp(), 0.0), Complex64::new(0.0, 0.0)]
        })
        .unwrap();
        assert!(nonlinear_term(&upper, &params).v().iter().all(|z| z.norm() == 0.0));

        let psi = gaussian(&g);
        let pairing = inner_product(&nonlinear_term(&psi, &params), &psi).unwrap();
        assert!(pairing.im.abs() <= 1e-10 * pairing.re.abs());
    }

    #[test]
    fn kernel_rejects_nonnegative_sigma() {
        let g = SpectralGrid::new(16, 10.0).unwrap();
        assert!(bessel_kernel_samples(&g, 0.0).is_err());
        assert!(kernel_lp_bound_check(&g, 1.0).is_err());
        assert!(kernel_lp_bound_check(&g, 0.0).is_err());
    }

    #[test]
    fn kernel_integrates_to_one_and_tracks_closed_form() {
        // The kernel of (1 - Delta)^{-1/2} on R^2 is e^{-r} / (2 pi r).
        let g = SpectralGrid::new(1024, 32.0 * PI).unwrap();
        let kernel = bessel_kernel_samples(&g, -0.5).unwrap();
        let integral: f64 = kernel.values().iter().sum::<f64>() * g.cell_area();
        assert!((integral - 1.0).abs() < 1e-10);
        for idx in 0..g.len() {
            let (x, y) = g.position(idx);
            let r = x.hypot(y);
            if (1.0..=3.0).contains(&r) {
                let exact = (-r).exp() / (2.0 * PI * r);
                let err = (kernel.values()[idx] - exact).abs();
                assert!(err < 0.05 * exact + 5e-4, "r = {r}: {} vs {exact}", kernel.values()[idx]);
            }
        }
    }

    #[test]
    fn young_exponent_arithmetic() {
        assert!((young_exponent(0.5) - 1.2).abs() < 1e-15);
        assert!((young_exponent(1.0) - 1.0).abs() < 1e-15);
        for eps in [0.01, 0.1, 0.5, 0.99] {
            let p = young_exponent(eps);
            assert!(p > 2.0 / 3.0 && p < 2.0);
        }
    }
}
