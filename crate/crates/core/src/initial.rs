//! Initial-data families: Gaussians, modulated Gaussians and plane waves
//! projected onto one branch of the free Dirac operator.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::{sobolev_norm, spinor_eigenvector, DiracParams, EnergyBranch};
use crate::error::{Error, Result};
use crate::spectral::{lp_norm, Exponent, SpectralGrid, SpinorField};

fn default_polarization() -> [Complex64; 2] {
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialKind {
    /// `exp(-|x - x0|^2 / w^2) (c1, c2)` with the distance taken on the torus.
    Gaussian {
        #[serde(default)]
        center: [f64; 2],
        width: f64,
        #[serde(default = "default_polarization")]
        polarization: [Complex64; 2],
    },
    /// The Gaussian times `e^{i x . xi0}`.
    ModulatedGaussian {
        #[serde(default)]
        center: [f64; 2],
        width: f64,
        #[serde(default = "default_polarization")]
        polarization: [Complex64; 2],
        xi0: [f64; 2],
    },
    /// `P_branch(xi0) c e^{i x . xi0}` on the lattice mode `mode`.
    EigenProjectedPlaneWave {
        mode: [i64; 2],
        #[serde(default)]
        branch: EnergyBranch,
        #[serde(default = "default_polarization")]
        polarization: [Complex64; 2],
    },
}

/// How `amplitude` is interpreted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `amplitude` multiplies the profile directly.
    #[default]
    Peak,
    /// The field is rescaled so that `|psi|_{L2} = amplitude`.
    L2,
    /// The field is rescaled so that `|psi|_{H^{1/2}} = amplitude`.
    HHalf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(flatten)]
    pub kind: InitialKind,
    pub amplitude: f64,
    #[serde(default)]
    pub normalization: Normalization,
}

impl InitialData {
    pub fn gaussian(width: f64, amplitude: f64, normalization: Normalization) -> Self {
        InitialData {
            kind: InitialKind::Gaussian {
                center: [0.0, 0.0],
                width,
                polarization: default_polarization(),
            },
            amplitude,
            normalization,
        }
    }

    pub fn build(&self, grid: &Arc<SpectralGrid>, dirac: DiracParams) -> Result<SpinorField> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::param("amplitude", self.amplitude, "must be finite and nonnegative"));
        }
        let profile = match &self.kind {
            InitialKind::Gaussian { center, width, polarization } => {
                gaussian(grid, *center, *width, *polarization, [0.0, 0.0])?
            }
            InitialKind::ModulatedGaussian { center, width, polarization, xi0 } => {
                gaussian(grid, *center, *width, *polarization, *xi0)?
            }
            InitialKind::EigenProjectedPlaneWave { mode, branch, polarization } => {
                projected_plane_wave(grid, *mode, *branch, *polarization, dirac)?
            }
        };
        let scale = match self.normalization {
            Normalization::Peak => self.amplitude,
            Normalization::L2 => self.amplitude / nonzero(lp_norm(&profile, Exponent::TWO))?,
            Normalization::HHalf => self.amplitude / nonzero(sobolev_norm(&profile, 0.5))?,
        };
        Ok(profile.scaled(Complex64::new(scale, 0.0)))
    }
}

fn nonzero(norm: f64) -> Result<f64> {
    if norm > 0.0 {
        Ok(norm)
    } else {
        Err(Error::ZeroInput("initial data profile"))
    }
}

fn torus_offset(x: f64, x0: f64, length: f64) -> f64 {
    let d = x - x0;
    d - length * (d / length).round()
}

fn gaussian(
    grid: &Arc<SpectralGrid>,
    center: [f64; 2],
    width: f64,
    polarization: [Complex64; 2],
    xi0: [f64; 2],
) -> Result<SpinorField> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::param("width", width, "must be positive"));
    }
    let length = grid.length();
    SpinorField::from_fn(grid.clone(), |x, y| {
        let dx = torus_offset(x, center[0], length);
        let dy = torus_offset(y, center[1], length);
        let envelope = (-(dx * dx + dy * dy) / (width * width)).exp();
        let phase = Complex64::from_polar(envelope, xi0[0] * x + xi0[1] * y);
        [polarization[0] * phase, polarization[1] * phase]
    })
}

fn projected_plane_wave(
    grid: &Arc<SpectralGrid>,
    mode: [i64; 2],
    branch: EnergyBranch,
    polarization: [Complex64; 2],
    dirac: DiracParams,
) -> Result<SpinorField> {
    let half = grid.n() as i64 / 2;
    if mode.iter().any(|&k| k < -half || k >= half) {
        return Err(Error::InvalidGrid(format!(
            "mode {mode:?} outside the lattice of an n = {} grid",
            grid.n()
        )));
    }
    let xi = grid.wavevector(grid.lattice_index(mode[0], mode[1]));
    let e = spinor_eigenvector(xi, dirac, branch);
    let weight = e[0].conj() * polarization[0] + e[1].conj() * polarization[1];
    let coeff = [e[0] * weight, e[1] * weight];
    SpinorField::from_fn(grid.clone(), |x, y| {
        let phase = Complex64::from_polar(1.0, xi.0 * x + xi.1 * y);
        [coeff[0] * phase, coeff[1] * phase]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::apply_dirac;
    use crate::dirac::dispersion;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_l2_norm_closed_form() {
        let g = SpectralGrid::new(128, 16.0 * PI).unwrap();
        let psi = InitialData::gaussian(2.0, 1.5, Normalization::Peak)
            .build(&g, DiracParams::new(1.0).unwrap())
            .unwrap();
        // |A exp(-r^2/w^2)|_2^2 = A^2 pi w^2 / 2
        let exact = (1.5f64.powi(2) * PI * 4.0 / 2.0).sqrt();
        assert!((lp_norm(&psi, Exponent::TWO) - exact).abs() < 1e-10);
    }

    #[test]
    fn normalizations_hit_their_targets() {
        let g = SpectralGrid::new(64, 8.0 * PI).unwrap();
        let p = DiracParams::new(1.0).unwrap();
        let base = InitialData::gaussian(1.5, 4.0, Normalization::L2);
        let psi = base.build(&g, p).unwrap();
        assert!((lp_norm(&psi, Exponent::TWO) - 4.0).abs() < 1e-12);
        let psi = InitialData { normalization: Normalization::HHalf, ..base }.build(&g, p).unwrap();
        assert!((sobolev_norm(&psi, 0.5) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn centre_wraps_around_the_torus() {
        let g = SpectralGrid::new(64, 20.0).unwrap();
        let p = DiracParams::new(1.0).unwrap();
        let make = |c: [f64; 2]| InitialData {
            kind: InitialKind::Gaussian { center: c, width: 1.0, polarization: default_polarization() },
            amplitude: 1.0,
            normalization: Normalization::Peak,
        }
        .build(&g, p)
        .unwrap();
        let a = make([9.0, 0.0]);
        let b = make([-11.0, 0.0]);
        assert!(a.distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn projected_plane_wave_is_an_eigenstate() {
        let g = SpectralGrid::new(32, 2.0 * PI).unwrap();
        let p = DiracParams::new(0.7).unwrap();
        for branch in [EnergyBranch::Positive, EnergyBranch::Negative] {
            let data = InitialData {
                kind: InitialKind::EigenProjectedPlaneWave {
                    mode: [3, -2],
                    branch,
                    polarization: [Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.8)],
                },
                amplitude: 1.0,
                normalization: Normalization::L2,
            };
            let psi = data.build(&g, p).unwrap();
            let lambda = dispersion(13.0, p);
            let sign = if branch == EnergyBranch::Positive { 1.0 } else { -1.0 };
            let expected = psi.scaled(Complex64::new(sign * lambda, 0.0));
            assert!(apply_dirac(&psi, p).distance(&expected).unwrap() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = SpectralGrid::new(16, 4.0).unwrap();
        let p = DiracParams::new(1.0).unwrap();
        assert!(InitialData::gaussian(0.0, 1.0, Normalization::Peak).build(&g, p).is_err());
        assert!(InitialData::gaussian(1.0, -1.0, Normalization::Peak).build(&g, p).is_err());
        let wave = InitialData {
            kind: InitialKind::EigenProjectedPlaneWave {
                mode: [8, 0],
                branch: EnergyBranch::Positive,
                polarization: default_polarization(),
            },
            amplitude: 1.0,
            normalization: Normalization::Peak,
        };
        assert!(wave.build(&g, p).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let data = InitialData {
            kind: InitialKind::ModulatedGaussian {
                center: [1.0, -2.0],
                width: 0.5,
                polarization: [Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)],
                xi0: [3.0, 0.0],
            },
            amplitude: 0.25,
            normalization: Normalization::HHalf,
        };
        let text = serde_json::to_string(&data).unwrap();
        let back: InitialData = serde_json::from_str(&text).unwrap();
        assert_eq!(back, data);
    }
}
