//! Periodic grid geometry, discrete Fourier transforms and quadrature norms.
//!
//! Sample `(i1, i2)` of an `n x n` field lives at `x = (-L/2 + i1 dx, -L/2 + i2 dx)`
//! and is stored at flat index `i1 * n + i2`. Spectral arrays use the same layout
//! in FFT ordering: index `k` along an axis stands for the signed wavenumber
//! `k` when `k < n/2` and `k - n` otherwise, so `xi = 2 pi k_signed / L`.
//!
//! The public transform pair follows
//! `psi_hat(xi) = sum_x psi(x) e^{-i x.xi} dx^2` and
//! `psi(x) = L^{-2} sum_xi psi_hat(xi) e^{i x.xi}`, which makes the quadrature
//! L2 norm equal to `L^{-1} |psi_hat|_{l2}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square periodic box sampled on an `n x n` lattice.
pub struct SpectralGrid {
    n: usize,
    length: f64,
    dx: f64,
    wavenumbers: Vec<f64>,
    k_squared: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    execution: Execution,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("execution", &self.execution)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(n: usize, length: f64) -> Result<Arc<Self>> {
        Self::with_execution(n, length, Execution::default())
    }

    pub fn with_execution(n: usize, length: f64, execution: Execution) -> Result<Arc<Self>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length {length} must be positive"
            )));
        }
        let dx = length / n as f64;
        let wavenumbers: Vec<f64> = (0..n)
            .map(|k| 2.0 * PI * signed_index(k, n) as f64 / length)
            .collect();
        let mut k_squared = Vec::with_capacity(n * n);
        for &k1 in &wavenumbers {
            for &k2 in &wavenumbers {
                k_squared.push(k1 * k1 + k2 * k2);
            }
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Arc::new(SpectralGrid {
            n,
            length,
            dx,
            wavenumbers,
            k_squared,
            forward,
            inverse,
            execution,
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Quadrature weight `dx^2`.
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dx
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    /// Physical coordinate of sample `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.dx
    }

    pub fn position(&self, idx: usize) -> (f64, f64) {
        (self.coordinate(idx / self.n), self.coordinate(idx % self.n))
    }

    /// Flat index of the sample at the origin.
    pub fn origin_index(&self) -> usize {
        let h = self.n / 2;
        h * self.n + h
    }

    /// Wavenumbers along one axis in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn signed_index(&self, k: usize) -> i64 {
        signed_index(k, self.n)
    }

    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        (
            self.wavenumbers[idx / self.n],
            self.wavenumbers[idx % self.n],
        )
    }

    /// `|xi|^2` for every lattice point, flat FFT-ordered layout.
    pub fn k_squared(&self) -> &[f64] {
        &self.k_squared
    }

    /// Flat spectral index of the lattice point with signed integer coordinates `(k1, k2)`.
    pub fn lattice_index(&self, k1: i64, k2: i64) -> usize {
        let n = self.n as i64;
        (k1.rem_euclid(n) * n + k2.rem_euclid(n)) as usize
    }

    /// Axis Nyquist wavenumber `pi n / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Largest `|xi|` present on the lattice (the corner mode).
    pub fn max_wavenumber(&self) -> f64 {
        self.nyquist() * std::f64::consts::SQRT_2
    }

    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.n == other.n && self.length == other.length
    }

    /// Unnormalized forward 2D DFT in place.
    pub fn fft2(&self, data: &mut [Complex64]) {
        self.transform2(data, &self.forward);
    }

    /// Inverse 2D DFT in place, normalized so that `ifft2(fft2(x)) = x`.
    pub fn ifft2(&self, data: &mut [Complex64]) {
        self.transform2(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn transform2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        let n = self.n;
        let scratch_len = plan.get_inplace_scratch_len();
        let rows = |buf: &mut [Complex64]| {
            exec::for_each_chunk_with_scratch(
                self.execution,
                buf,
                n,
                || vec![ZERO; scratch_len],
                |scratch, _, row| plan.process_with_scratch(row, scratch),
            );
        };
        rows(data);
        let mut transposed = vec![ZERO; n * n];
        self.transpose_into(data, &mut transposed);
        rows(&mut transposed);
        self.transpose_into(&transposed, data);
    }

    fn transpose_into(&self, src: &[Complex64], dst: &mut [Complex64]) {
        let n = self.n;
        exec::for_each_chunk_with_scratch(
            self.execution,
            dst,
            n,
            || (),
            |_, r, row| {
                for (c, out) in row.iter_mut().enumerate() {
                    *out = src[c * n + r];
                }
            },
        );
    }

    /// Sign `(-1)^{k1 + k2}` that accounts for the box starting at `-L/2`.
    fn shift_sign(&self, idx: usize) -> f64 {
        if (idx / self.n + idx % self.n).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn check_finite(values: impl IntoIterator<Item = Complex64>) -> Result<()> {
    if values.into_iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_len(grid: &SpectralGrid, len: usize) -> Result<()> {
    if len == grid.len() {
        Ok(())
    } else {
        Err(Error::InvalidGrid(format!(
            "expected {} samples, got {len}",
            grid.len()
        )))
    }
}

/// Two-component spinor `psi = (u, v)` sampled on a grid.
#[derive(Clone, Debug)]
pub struct SpinorField {
    grid: Arc<SpectralGrid>,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl SpinorField {
    pub fn new(grid: Arc<SpectralGrid>, u: Vec<Complex64>, v: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, u.len())?;
        check_len(&grid, v.len())?;
        check_finite(u.iter().chain(v.iter()).copied())?;
        Ok(SpinorField { grid, u, v })
    }

    pub fn zeros(grid: Arc<SpectralGrid>) -> Self {
        let len = grid.len();
        SpinorField {
            grid,
            u: vec![ZERO; len],
            v: vec![ZERO; len],
        }
    }

    /// Samples `f(x1, x2)` at every grid point.
    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64, f64) -> [Complex64; 2]) -> Result<Self> {
        let (u, v) = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.position(idx);
                let [a, b] = f(x1, x2);
                (a, b)
            })
            .unzip();
        Self::new(grid, u, v)
    }

    pub(crate) fn from_parts_unchecked(
        grid: Arc<SpectralGrid>,
        u: Vec<Complex64>,
        v: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(u.len(), grid.len());
        debug_assert_eq!(v.len(), grid.len());
        SpinorField { grid, u, v }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    pub fn v(&self) -> &[Complex64] {
        &self.v
    }

    pub fn into_components(self) -> (Vec<Complex64>, Vec<Complex64>) {
        (self.u, self.v)
    }

    pub fn is_finite(&self) -> bool {
        check_finite(self.u.iter().chain(self.v.iter()).copied()).is_ok()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        SpinorField {
            grid: self.grid.clone(),
            u: self.u.iter().map(|z| z * c).collect(),
            v: self.v.iter().map(|z| z * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: Complex64, other: &SpinorField) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let comb = |a: &[Complex64], b: &[Complex64]| {
            a.iter().zip(b).map(|(x, y)| x + c * y).collect::<Vec<_>>()
        };
        Ok(SpinorField {
            grid: self.grid.clone(),
            u: comb(&self.u, &other.u),
            v: comb(&self.v, &other.v),
        })
    }

    /// Quadrature L2 distance `|self - other|_{L2}`.
    pub fn distance(&self, other: &SpinorField) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let sum: f64 = self
            .u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * self.grid.cell_area()).sqrt())
    }
}

/// Real-valued field; used for densities, potentials and kernels.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<SpectralGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SpectralGrid>, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.position(idx);
                f(x1, x2)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<SpectralGrid>, c: f64) -> Self {
        let len = grid.len();
        ScalarField {
            grid,
            values: vec![c; len],
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Single complex channel; the natural home of pointwise products of spinors.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Arc<SpectralGrid>, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        check_finite(values.iter().copied())?;
        Ok(ComplexField { grid, values })
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Pointwise `C^2` pairing `<phi(x), psi(x)> = conj(phi_u) psi_u + conj(phi_v) psi_v`.
pub fn pointwise_pairing(phi: &SpinorField, psi: &SpinorField) -> Result<ComplexField> {
    ensure_same_grid(&phi.grid, &psi.grid)?;
    let values = phi
        .u
        .iter()
        .zip(&phi.v)
        .zip(psi.u.iter().zip(&psi.v))
        .map(|((a, b), (c, d))| a.conj() * c + b.conj() * d)
        .collect();
    Ok(ComplexField {
        grid: phi.grid.clone(),
        values,
    })
}

pub(crate) fn ensure_same_grid(a: &Arc<SpectralGrid>, b: &Arc<SpectralGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Fields that can be pushed through the DFT channel by channel.
pub trait SpectralField: Clone + Send + Sync {
    fn grid(&self) -> &Arc<SpectralGrid>;

    /// Complex samples of each channel.
    fn channels(&self) -> Vec<Vec<Complex64>>;

    /// Rebuilds the field from complex channels; real fields keep the real part.
    fn from_channels(grid: Arc<SpectralGrid>, channels: Vec<Vec<Complex64>>) -> Self;

    /// Pointwise magnitude `|f(x)|` (Euclidean over channels).
    fn pointwise_modulus(&self) -> Vec<f64>;

    fn scaled_real(&self, c: f64) -> Self;
}

impl SpectralField for SpinorField {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn channels(&self) -> Vec<Vec<Complex64>> {
        vec![self.u.clone(), self.v.clone()]
    }

    fn from_channels(grid: Arc<SpectralGrid>, channels: Vec<Vec<Complex64>>) -> Self {
        let mut it = channels.into_iter();
        let u = it.next().expect("spinor needs two channels");
        let v = it.next().expect("spinor needs two channels");
        SpinorField::from_parts_unchecked(grid, u, v)
    }

    fn pointwise_modulus(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .collect()
    }

    fn scaled_real(&self, c: f64) -> Self {
        self.scaled(Complex64::new(c, 0.0))
    }
}

impl SpectralField for ScalarField {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn channels(&self) -> Vec<Vec<Complex64>> {
        vec![self.values.iter().map(|&x| Complex64::new(x, 0.0)).collect()]
    }

    fn from_channels(grid: Arc<SpectralGrid>, channels: Vec<Vec<Complex64>>) -> Self {
        let values = channels[0].iter().map(|z| z.re).collect();
        ScalarField { grid, values }
    }

    fn pointwise_modulus(&self) -> Vec<f64> {
        self.values.iter().map(|x| x.abs()).collect()
    }

    fn scaled_real(&self, c: f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|x| x * c).collect(),
        }
    }
}

impl SpectralField for ComplexField {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn channels(&self) -> Vec<Vec<Complex64>> {
        vec![self.values.clone()]
    }

    fn from_channels(grid: Arc<SpectralGrid>, mut channels: Vec<Vec<Complex64>>) -> Self {
        ComplexField {
            grid,
            values: channels.swap_remove(0),
        }
    }

    fn pointwise_modulus(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    fn scaled_real(&self, c: f64) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }
}

/// Unnormalized DFT coefficients of every channel of a field.
#[derive(Clone, Debug)]
pub struct RawSpectrum {
    grid: Arc<SpectralGrid>,
    channels: Vec<Vec<Complex64>>,
}

impl RawSpectrum {
    pub fn of<F: SpectralField>(field: &F) -> Self {
        let grid = field.grid().clone();
        let mut channels = field.channels();
        for c in channels.iter_mut() {
            grid.fft2(c);
        }
        RawSpectrum { grid, channels }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    /// Applies the real multiplier `weight(idx)` and transforms back.
    pub fn synthesize<F: SpectralField>(&self, weight: impl Fn(usize) -> f64) -> F {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let mut out: Vec<Complex64> =
                    c.iter().enumerate().map(|(i, z)| z * weight(i)).collect();
                self.grid.ifft2(&mut out);
                out
            })
            .collect();
        F::from_channels(self.grid.clone(), channels)
    }

    /// `sum_idx w(idx) |c(idx)|^2` over all channels, scaled to match the quadrature L2 norm.
    pub fn weighted_energy(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let sum: f64 = self
            .channels
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(i, z)| weight(i) * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        sum * self.grid.cell_area() / self.grid.len() as f64
    }
}

/// Multiplies a field by the real Fourier multiplier `weight(idx)`.
pub fn apply_multiplier<F: SpectralField>(field: &F, weight: impl Fn(usize) -> f64) -> F {
    RawSpectrum::of(field).synthesize(weight)
}

/// Fourier coefficients of a spinor in the physical normalization.
#[derive(Clone, Debug)]
pub struct SpinorSpectrum {
    grid: Arc<SpectralGrid>,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl SpinorSpectrum {
    pub fn zeros(grid: Arc<SpectralGrid>) -> Self {
        let len = grid.len();
        SpinorSpectrum {
            grid,
            u: vec![ZERO; len],
            v: vec![ZERO; len],
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// Coefficients at the lattice point with signed integer coordinates `(k1, k2)`.
    pub fn coefficient(&self, k1: i64, k2: i64) -> [Complex64; 2] {
        let idx = self.grid.lattice_index(k1, k2);
        [self.u[idx], self.v[idx]]
    }

    pub fn set_coefficient(&mut self, k1: i64, k2: i64, value: [Complex64; 2]) {
        let idx = self.grid.lattice_index(k1, k2);
        self.u[idx] = value[0];
        self.v[idx] = value[1];
    }
}

pub fn forward_transform(field: &SpinorField) -> SpinorSpectrum {
    let grid = field.grid.clone();
    let area = grid.cell_area();
    let go = |data: &[Complex64]| {
        let mut out = data.to_vec();
        grid.fft2(&mut out);
        for (idx, z) in out.iter_mut().enumerate() {
            *z *= area * grid.shift_sign(idx);
        }
        out
    };
    let u = go(&field.u);
    let v = go(&field.v);
    SpinorSpectrum { grid, u, v }
}

pub fn inverse_transform(spectrum: &SpinorSpectrum) -> SpinorField {
    let grid = spectrum.grid.clone();
    let inv_area = 1.0 / grid.cell_area();
    let go = |data: &[Complex64]| {
        let mut out: Vec<Complex64> = data
            .iter()
            .enumerate()
            .map(|(idx, z)| z * inv_area * grid.shift_sign(idx))
            .collect();
        grid.ifft2(&mut out);
        out
    };
    let u = go(&spectrum.u);
    let v = go(&spectrum.v);
    SpinorField::from_parts_unchecked(grid, u, v)
}

/// Which quadratic density of the spinor drives the potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensityForm {
    /// `|u|^2 + |v|^2`
    Modulus,
    /// `<gamma0 psi, psi> = |u|^2 - |v|^2`
    #[default]
    Gamma0,
}

pub fn density(field: &SpinorField, form: DensityForm) -> ScalarField {
    let values = field
        .u
        .iter()
        .zip(&field.v)
        .map(|(a, b)| match form {
            DensityForm::Modulus => a.norm_sqr() + b.norm_sqr(),
            DensityForm::Gamma0 => a.norm_sqr() - b.norm_sqr(),
        })
        .collect();
    ScalarField {
        grid: field.grid.clone(),
        values,
    }
}

/// Lebesgue exponent `p` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);
    pub const INF: Exponent = Exponent::Infinity;

    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }
}

/// JSON has no infinity literal; `p = inf` is written as the string `"inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = String;
    fn try_from(repr: ExponentRepr) -> std::result::Result<Self, String> {
        match repr {
            ExponentRepr::Number(p) => Exponent::new(p).map_err(|e| e.to_string()),
            ExponentRepr::Text(t) if matches!(t.as_str(), "inf" | "infinity") => {
                Ok(Exponent::Infinity)
            }
            ExponentRepr::Text(t) => Err(format!("unrecognized exponent `{t}`")),
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(p: Exponent) -> Self {
        match p {
            Exponent::Finite(p) => ExponentRepr::Number(p),
            Exponent::Infinity => ExponentRepr::Text("inf".into()),
        }
    }
}

/// Quadrature `L^p` norm of pointwise magnitudes.
pub fn lp_norm_of_modulus(modulus: &[f64], cell_area: f64, p: Exponent) -> f64 {
    let max = modulus.iter().fold(0.0_f64, |m, &x| m.max(x));
    match p {
        Exponent::Infinity => max,
        _ if max == 0.0 => 0.0,
        Exponent::Finite(p) => {
            let sum: f64 = modulus.iter().map(|&x| (x / max).powf(p)).sum();
            max * (sum * cell_area).powf(1.0 / p)
        }
    }
}

pub fn lp_norm<F: SpectralField>(field: &F, p: Exponent) -> f64 {
    lp_norm_of_modulus(&field.pointwise_modulus(), field.grid().cell_area(), p)
}

/// `sum_x <f(x), g(x)>_{C^2} dx^2`, linear in `f` and conjugate-linear in `g`.
pub fn inner_product(f: &SpinorField, g: &SpinorField) -> Result<Complex64> {
    ensure_same_grid(&f.grid, &g.grid)?;
    let sum: Complex64 = f
        .u
        .iter()
        .zip(&g.u)
        .chain(f.v.iter().zip(&g.v))
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(sum * f.grid.cell_area())
}
