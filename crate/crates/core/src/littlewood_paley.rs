//! Littlewood–Paley decomposition, Besov norms and the dyadic-block inequalities
//! (Bernstein, Bessel multipliers on blocks, the bilinear product estimate and
//! the logarithmic endpoint estimate for `(b - Delta)^{-1}`).
//!
//! The profile is built by telescoping a smooth cutoff `chi` (equal to 1 on
//! `[0, 1]`, 0 beyond `8/7`):
//!
//! ```text
//! rho(r)   = chi(r/2) - chi(r)            supported in [1, 16/7]
//! rho_0(r) = sum_{j<=0} rho(2^-j r) = chi(r/2)
//! rho_0 + sum_{j=1}^{J} rho(2^-j r) = chi(2^-(J+1) r)
//! ```
//!
//! so the partition of unity holds exactly on `|xi| <= 2^{J+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    lp_norm, lp_norm_of_modulus, pointwise_pairing, Exponent, RawSpectrum, ScalarField,
    SpectralField, SpectralGrid, SpinorField,
};

const TRANSITION: f64 = 1.0 / 7.0;

fn smooth_step(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// The radial dyadic profile; stateless, all members are closed-form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicProfile;

impl DyadicProfile {
    /// Smooth cutoff: 1 on `r <= 1`, 0 on `r >= 8/7`, `C^infinity` in between.
    pub fn chi(&self, r: f64) -> f64 {
        let outer = smooth_step((1.0 + TRANSITION - r) / TRANSITION);
        let inner = smooth_step((r - 1.0) / TRANSITION);
        outer / (outer + inner)
    }

    pub fn rho_hat(&self, r: f64) -> f64 {
        self.chi(0.5 * r) - self.chi(r)
    }

    pub fn rho0_hat(&self, r: f64) -> f64 {
        self.chi(0.5 * r)
    }

    /// Window of block `j` at frequency magnitude `r`; `j = 0` is the low-frequency block.
    pub fn shell_weight(&self, j: usize, r: f64) -> f64 {
        if j == 0 {
            self.rho0_hat(r)
        } else {
            self.rho_hat(r / f64::powi(2.0, j as i32))
        }
    }

    /// Frequency interval outside which block `j >= 1` vanishes identically.
    pub fn shell_support(&self, j: usize) -> (f64, f64) {
        let scale = f64::powi(2.0, j as i32);
        (scale, scale * 2.0 * (1.0 + TRANSITION))
    }

    /// Number of blocks (beyond the base block) needed to cover every lattice frequency.
    pub fn covering_shells(&self, grid: &SpectralGrid) -> usize {
        let kmax = grid.max_wavenumber();
        let mut j = 1;
        while f64::powi(2.0, j as i32 + 1) < kmax {
            j += 1;
        }
        j
    }

    /// `floor(log2(nyquist)) - 1`: the shells a sweep should use.
    pub fn resolved_shells(&self, grid: &SpectralGrid) -> usize {
        let j = grid.nyquist().log2().floor() as i64 - 1;
        j.max(0) as usize
    }
}

#[derive(Clone, Debug)]
pub struct DyadicDecomposition<F> {
    pub base: F,
    /// `blocks[j - 1]` is the block of index `j`.
    pub blocks: Vec<F>,
    pub resolved_shells: usize,
}

impl<F: SpectralField> DyadicDecomposition<F> {
    pub fn block(&self, j: usize) -> Option<&F> {
        if j == 0 {
            Some(&self.base)
        } else {
            self.blocks.get(j - 1)
        }
    }

    /// Sum of all blocks.
    pub fn reconstruct(&self) -> F {
        let grid = self.base.grid().clone();
        let mut acc = self.base.channels();
        for block in &self.blocks {
            for (a, c) in acc.iter_mut().zip(block.channels()) {
                for (x, y) in a.iter_mut().zip(c) {
                    *x += y;
                }
            }
        }
        F::from_channels(grid, acc)
    }
}

fn frequency_moduli(grid: &SpectralGrid) -> Vec<f64> {
    grid.k_squared().iter().map(|k2| k2.sqrt()).collect()
}

/// Splits a field into `psi_(0)` and the blocks `psi_(j)`, `j = 1..J`, with `J`
/// large enough to cover the whole lattice.
pub fn decompose<F: SpectralField>(field: &F, profile: &DyadicProfile) -> DyadicDecomposition<F> {
    let grid = field.grid().clone();
    let raw = RawSpectrum::of(field);
    let moduli = frequency_moduli(&grid);
    let synth = |j: usize| raw.synthesize::<F>(|idx| profile.shell_weight(j, moduli[idx]));
    let blocks = (1..=profile.covering_shells(&grid)).map(synth).collect();
    DyadicDecomposition {
        base: synth(0),
        blocks,
        resolved_shells: profile.resolved_shells(&grid),
    }
}

/// `L^p` norms of the base block and of every block `j >= 1`.
pub fn block_norms<F: SpectralField>(field: &F, p: Exponent, profile: &DyadicProfile) -> (f64, Vec<f64>) {
    let grid = field.grid().clone();
    let raw = RawSpectrum::of(field);
    let moduli = frequency_moduli(&grid);
    let norm_of = |j: usize| {
        let block: F = raw.synthesize(|idx| profile.shell_weight(j, moduli[idx]));
        lp_norm(&block, p)
    };
    let base = norm_of(0);
    let shells = (1..=profile.covering_shells(&grid)).map(norm_of).collect();
    (base, shells)
}

/// `|psi_(0)|_{L^p} + (sum_{j>=1} (2^{js} |psi_(j)|_{L^p})^q)^{1/q}`.
pub fn besov_norm<F: SpectralField>(
    field: &F,
    s: f64,
    p: Exponent,
    q: Exponent,
    profile: &DyadicProfile,
) -> f64 {
    let (base, shells) = block_norms(field, p, profile);
    base + besov_tail(&shells, s, q)
}

fn besov_tail(shells: &[f64], s: f64, q: Exponent) -> f64 {
    let weighted = shells
        .iter()
        .enumerate()
        .map(|(i, &norm)| f64::powf(2.0, (i + 1) as f64 * s) * norm);
    match q {
        Exponent::Infinity => weighted.fold(0.0, f64::max),
        Exponent::Finite(q) => weighted.map(|w| w.powf(q)).sum::<f64>().powf(1.0 / q),
    }
}

/// A block counts as empty when its share of the spectral energy is at roundoff level.
fn block_vanishes(raw: &RawSpectrum, weight: impl Fn(usize) -> f64) -> bool {
    let total = raw.weighted_energy(|_| 1.0);
    raw.weighted_energy(|idx| weight(idx).powi(2)) <= 1e-26 * total
}

/// `|psi_(j)|_{L^r} / (2^{2j(1/q - 1/r)} |psi_(j)|_{L^q})`; `None` if the block vanishes.
pub fn bernstein_ratio<F: SpectralField>(
    field: &F,
    j: usize,
    q: Exponent,
    r: Exponent,
    profile: &DyadicProfile,
) -> Result<Option<f64>> {
    if q.value() >= r.value() {
        return Err(Error::param("q", q.value(), "Bernstein ratio requires q < r"));
    }
    let raw = RawSpectrum::of(field);
    let moduli = frequency_moduli(field.grid());
    if block_vanishes(&raw, |idx| profile.shell_weight(j, moduli[idx])) {
        return Ok(None);
    }
    let block: F = raw.synthesize(|idx| profile.shell_weight(j, moduli[idx]));
    let low = lp_norm(&block, q);
    let gain = f64::powf(2.0, 2.0 * j as f64 * (q.reciprocal() - r.reciprocal()));
    Ok(Some(lp_norm(&block, r) / (gain * low)))
}

/// `|(b - Delta)^{sigma/2} psi_(j)|_{L^p} / (2^{sigma j} |psi_(j)|_{L^p})`.
pub fn dyadic_multiplier_ratio<F: SpectralField>(
    field: &F,
    j: usize,
    sigma: f64,
    b: f64,
    p: Exponent,
    profile: &DyadicProfile,
) -> Result<Option<f64>> {
    if j == 0 {
        return Err(Error::param("j", 0.0, "dyadic multiplier ratio needs j >= 1"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::param("b", b, "must be positive"));
    }
    let raw = RawSpectrum::of(field);
    let k2 = field.grid().k_squared();
    if block_vanishes(&raw, |idx| profile.shell_weight(j, k2[idx].sqrt())) {
        return Ok(None);
    }
    let block: F = raw.synthesize(|idx| profile.shell_weight(j, k2[idx].sqrt()));
    let denom = lp_norm(&block, p);
    let multiplied: F = raw.synthesize(|idx| {
        profile.shell_weight(j, k2[idx].sqrt()) * (b + k2[idx]).powf(0.5 * sigma)
    });
    let scale = f64::powf(2.0, sigma * j as f64);
    Ok(Some(lp_norm(&multiplied, p) / (scale * denom)))
}

/// `|<phi, psi>|_{B^s_{1,inf}} / (|phi|_{B^s_{2,2}} |psi|_{B^s_{2,2}})` with the pointwise `C^2` pairing.
pub fn product_estimate_ratio(
    phi: &SpinorField,
    psi: &SpinorField,
    s: f64,
    profile: &DyadicProfile,
) -> Result<f64> {
    let pair = pointwise_pairing(phi, psi)?;
    let denom = besov_norm(phi, s, Exponent::TWO, Exponent::TWO, profile)
        * besov_norm(psi, s, Exponent::TWO, Exponent::TWO, profile);
    if denom == 0.0 {
        return Err(Error::ZeroInput("product estimate"));
    }
    Ok(besov_norm(&pair, s, Exponent::ONE, Exponent::INF, profile) / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrezisGallouetReport {
    /// `|(b - Delta)^{-1} f|_{L^inf}`
    pub lhs_inf: f64,
    /// `|(b - Delta)^{-1} (1 - Delta)^{s/2} f|_{L^{2/s}}`
    pub lhs_2s: f64,
    pub l1: f64,
    pub besov: f64,
    /// `|f|_{L^1} ln(2 + |f|_{B^s_{1,inf}} / |f|_{L^1})`
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of the logarithmic endpoint estimate for `(b - Delta)^{-1}`, without the constant.
pub fn brezis_gallouet_ratio(
    f: &ScalarField,
    b: f64,
    s: f64,
    profile: &DyadicProfile,
) -> Result<BrezisGallouetReport> {
    Ok(brezis_gallouet_table(f, &[s], &[b], profile)?.remove(0))
}

/// [`brezis_gallouet_ratio`] for every `(s, b)` pair, `s`-major, sharing the
/// transforms that depend on only one of the two parameters.
pub fn brezis_gallouet_table(
    f: &ScalarField,
    s_values: &[f64],
    b_values: &[f64],
    profile: &DyadicProfile,
) -> Result<Vec<BrezisGallouetReport>> {
    if let Some(&s) = s_values.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
        return Err(Error::param("s", s, "must lie in (0, 1]"));
    }
    if let Some(&b) = b_values.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::param("b", b, "must be positive"));
    }
    let grid = f.grid().clone();
    let l1 = lp_norm(f, Exponent::ONE);
    if l1 == 0.0 {
        return Err(Error::ZeroInput("Brezis-Gallouet estimate"));
    }
    let raw = RawSpectrum::of(f);
    let k2 = grid.k_squared();
    let moduli = frequency_moduli(&grid);
    let area = grid.cell_area();

    let block_l1 = |j: usize| {
        let block: ScalarField = raw.synthesize(|idx| profile.shell_weight(j, moduli[idx]));
        lp_norm_of_modulus(&block.pointwise_modulus(), area, Exponent::ONE)
    };
    let base = block_l1(0);
    let shells: Vec<f64> = (1..=profile.covering_shells(&grid)).map(block_l1).collect();
    let lhs_inf: Vec<f64> = b_values
        .iter()
        .map(|&b| {
            let screened: ScalarField = raw.synthesize(|idx| 1.0 / (b + k2[idx]));
            lp_norm(&screened, Exponent::INF)
        })
        .collect();

    let mut out = Vec::with_capacity(s_values.len() * b_values.len());
    for &s in s_values {
        let besov = base + besov_tail(&shells, s, Exponent::INF);
        let rhs = l1 * (2.0 + besov / l1).ln();
        let exponent = Exponent::new(2.0 / s)?;
        for (&b, &lhs_inf) in b_values.iter().zip(&lhs_inf) {
            let smoothed: ScalarField =
                raw.synthesize(|idx| (1.0 + k2[idx]).powf(0.5 * s) / (b + k2[idx]));
            let lhs_2s = lp_norm(&smoothed, exponent);
            out.push(BrezisGallouetReport {
                lhs_inf,
                lhs_2s,
                l1,
                besov,
                rhs,
                ratio: (lhs_inf + lhs_2s) / rhs,
            });
        }
    }
    Ok(out)
}
