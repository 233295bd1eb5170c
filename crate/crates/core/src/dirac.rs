//! Free massive Dirac operator `D_m = -i alpha^j d_j + m gamma0` as a Fourier multiplier.
//!
//! With `alpha1 = [[0, i], [-i, 0]]`, `alpha2 = [[0, 1], [1, 0]]` and
//! `gamma0 = diag(1, -1)` the symbol is
//!
//! ```text
//! D(xi) = [[ m,              xi2 + i xi1 ],
//!          [ xi2 - i xi1,   -m           ]]
//! ```
//!
//! which satisfies `D(xi)^2 = (m^2 + |xi|^2) I`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{RawSpectrum, SpectralField, SpectralGrid, SpinorField};

pub type Matrix2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiracParamsRepr", into = "DiracParamsRepr")]
pub struct DiracParams {
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct DiracParamsRepr {
    mass: f64,
}

impl TryFrom<DiracParamsRepr> for DiracParams {
    type Error = Error;
    fn try_from(r: DiracParamsRepr) -> Result<Self> {
        DiracParams::new(r.mass)
    }
}

impl From<DiracParams> for DiracParamsRepr {
    fn from(p: DiracParams) -> Self {
        DiracParamsRepr { mass: p.mass }
    }
}

impl DiracParams {
    /// The massless case is rejected: the propagator divides by `lambda >= m`.
    pub fn new(mass: f64) -> Result<Self> {
        if mass.is_finite() && mass > 0.0 {
            Ok(DiracParams { mass })
        } else {
            Err(Error::param("mass", mass, "must be positive"))
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// `lambda(xi) = sqrt(m^2 + |xi|^2)`, the modulus of both eigenvalues of `D(xi)`.
pub fn dispersion(k_squared: f64, params: DiracParams) -> f64 {
    (params.mass * params.mass + k_squared).sqrt()
}

/// Off-diagonal entry `xi2 + i xi1` of the symbol.
fn coupling(xi: (f64, f64)) -> Complex64 {
    Complex64::new(xi.1, xi.0)
}

pub fn dirac_symbol(xi: (f64, f64), params: DiracParams) -> Matrix2 {
    let m = Complex64::new(params.mass, 0.0);
    let beta = coupling(xi);
    [[m, beta], [beta.conj(), -m]]
}

/// `exp(-i t D(xi)) = cos(t lambda) I - i sin(t lambda)/lambda D(xi)`.
pub fn propagator_symbol(xi: (f64, f64), t: f64, params: DiracParams) -> Matrix2 {
    let lambda = dispersion(xi.0 * xi.0 + xi.1 * xi.1, params);
    let (sin, cos) = (t * lambda).sin_cos();
    let c = Complex64::new(cos, 0.0);
    let s = -I * (sin / lambda);
    let d = dirac_symbol(xi, params);
    [
        [c + s * d[0][0], s * d[0][1]],
        [s * d[1][0], c + s * d[1][1]],
    ]
}

/// Unit eigenvector of `D(xi)` for the eigenvalue `+lambda` or `-lambda`.
pub fn spinor_eigenvector(xi: (f64, f64), params: DiracParams, branch: EnergyBranch) -> [Complex64; 2] {
    let m = params.mass;
    let lambda = dispersion(xi.0 * xi.0 + xi.1 * xi.1, params);
    let beta = coupling(xi);
    let norm = ((m + lambda).powi(2) + beta.norm_sqr()).sqrt();
    match branch {
        EnergyBranch::Positive => [Complex64::new((m + lambda) / norm, 0.0), beta.conj() / norm],
        EnergyBranch::Negative => [-beta / norm, Complex64::new((m + lambda) / norm, 0.0)],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnergyBranch {
    #[default]
    Positive,
    Negative,
}

fn apply_matrix_field(
    field: &SpinorField,
    matrix: impl Fn(usize) -> Matrix2,
) -> SpinorField {
    let grid = field.grid().clone();
    let raw = RawSpectrum::of(field);
    let (su, sv) = (&raw.channels()[0], &raw.channels()[1]);
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let mat = matrix(idx);
        u.push(mat[0][0] * su[idx] + mat[0][1] * sv[idx]);
        v.push(mat[1][0] * su[idx] + mat[1][1] * sv[idx]);
    }
    grid.ifft2(&mut u);
    grid.ifft2(&mut v);
    SpinorField::from_channels(grid, vec![u, v])
}

pub fn apply_dirac(field: &SpinorField, params: DiracParams) -> SpinorField {
    let grid = field.grid().clone();
    apply_matrix_field(field, |idx| dirac_symbol(grid.wavevector(idx), params))
}

/// Exact free flow `exp(-i t D_m) psi`.
pub fn propagator_step(field: &SpinorField, t: f64, params: DiracParams) -> SpinorField {
    let grid = field.grid().clone();
    apply_matrix_field(field, |idx| {
        propagator_symbol(grid.wavevector(idx), t, params)
    })
}

/// `<D_m psi, psi>_{L2}`, evaluated mode by mode in Fourier space.
///
/// Each mode contributes `m (|u|^2 - |v|^2) + 2 Re(conj(u) (xi2 + i xi1) v)`,
/// which is real by construction. The form is indefinite.
pub fn kinetic_form(field: &SpinorField, params: DiracParams) -> f64 {
    let grid = field.grid();
    let raw = RawSpectrum::of(field);
    let (su, sv) = (&raw.channels()[0], &raw.channels()[1]);
    let sum: f64 = (0..grid.len())
        .map(|idx| {
            let beta = coupling(grid.wavevector(idx));
            params.mass * (su[idx].norm_sqr() - sv[idx].norm_sqr())
                + 2.0 * (su[idx].conj() * beta * sv[idx]).re
        })
        .sum();
    sum * grid.cell_area() / grid.len() as f64
}

/// `|(1 + |xi|^2)^{s/2} psi_hat|` in the Plancherel normalization; any real `s`.
pub fn sobolev_norm<F: SpectralField>(field: &F, s: f64) -> f64 {
    let k2 = field.grid().k_squared();
    RawSpectrum::of(field)
        .weighted_energy(|idx| (1.0 + k2[idx]).powf(s))
        .sqrt()
}

/// Per-mode propagator matrices for a fixed step, cached for repeated use.
#[derive(Clone, Debug)]
pub struct FreePropagator {
    grid: Arc<SpectralGrid>,
    matrices: Vec<Matrix2>,
}

impl FreePropagator {
    pub fn new(grid: Arc<SpectralGrid>, t: f64, params: DiracParams) -> Self {
        let matrices = (0..grid.len())
            .map(|idx| propagator_symbol(grid.wavevector(idx), t, params))
            .collect();
        FreePropagator { grid, matrices }
    }

    /// Applies the cached flow to raw (unnormalized DFT) spinor coefficients.
    pub fn apply_spectral(&self, u: &mut [Complex64], v: &mut [Complex64]) {
        for ((a, b), mat) in u.iter_mut().zip(v.iter_mut()).zip(&self.matrices) {
            let (x, y) = (*a, *b);
            *a = mat[0][0] * x + mat[0][1] * y;
            *b = mat[1][0] * x + mat[1][1] * y;
        }
    }

    pub fn apply(&self, field: &SpinorField) -> SpinorField {
        let (mut u, mut v) = field.clone().into_components();
        self.grid.fft2(&mut u);
        self.grid.fft2(&mut v);
        self.apply_spectral(&mut u, &mut v);
        self.grid.ifft2(&mut u);
        self.grid.ifft2(&mut v);
        SpinorField::from_channels(self.grid.clone(), vec![u, v])
    }
}
