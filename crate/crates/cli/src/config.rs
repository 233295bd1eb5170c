//! JSON configuration documents for `dhl run`, `dhl convergence` and `dhl verify`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context};
use dirac_hartree::dirac::DiracParams;
use dirac_hartree::evolution::{EvolutionConfig, Method, PicardSettings};
use dirac_hartree::hartree::{CouplingSign, HartreeParams};
use dirac_hartree::initial::{InitialData, Normalization};
use dirac_hartree::spectral::{inverse_transform, SpinorSpectrum};
use dirac_hartree::{Complex64, DensityForm, Model, SpectralGrid, SpinorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::snapshot;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 128, length: 16.0 * PI }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub m: f64,
    pub b: f64,
    #[serde(default)]
    pub density_form: DensityForm,
    /// -1, 0 or 1.
    #[serde(default)]
    pub coupling_sign: CouplingSign,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { m: 1.0, b: 1.0, density_form: DensityForm::default(), coupling_sign: CouplingSign::default() }
    }
}

impl ModelSection {
    pub fn build(&self) -> anyhow::Result<Model> {
        Ok(Model::new(
            DiracParams::new(self.m)?,
            HartreeParams::new(self.b, self.density_form, self.coupling_sign)?,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    #[default]
    Strang,
    Picard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default)]
    pub method: MethodKind,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub picard: PicardSettings,
    /// Step sizes for `dhl convergence`.
    #[serde(default)]
    pub dt_ladder: Vec<f64>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            method: MethodKind::Strang,
            dt: 0.01,
            t_final: 1.0,
            picard: PicardSettings::default(),
            dt_ladder: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Extra Sobolev orders reported as `h_s` columns.
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default = "one")]
    pub sample_every: usize,
    /// Write a binary snapshot at every sample.
    #[serde(default)]
    pub snapshots: bool,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection { s: Vec::new(), sample_every: 1, snapshots: false }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileInitial {
    pub path: PathBuf,
}

/// Random coefficients on all modes with `|k| < band`, drawn from the run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInitial {
    pub band: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub normalization: Normalization,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Library(InitialData),
    File(FileInitial),
    RandomBandLimited(RandomInitial),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Library(InitialData::gaussian(2.0, 4.0, Normalization::L2))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TaggedExtra {
    File(FileInitial),
    RandomBandLimited(RandomInitial),
}

impl Serialize for InitialSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            InitialSpec::Library(data) => data.serialize(s),
            InitialSpec::File(f) => TaggedExtra::File(f.clone()).serialize(s),
            InitialSpec::RandomBandLimited(r) => TaggedExtra::RandomBandLimited(r.clone()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for InitialSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(d)?;
        let kind = value.get("kind").and_then(|k| k.as_str()).map(str::to_owned);
        match kind.as_deref() {
            Some("file") | Some("random_band_limited") => match serde_json::from_value(value) {
                Ok(TaggedExtra::File(f)) => Ok(InitialSpec::File(f)),
                Ok(TaggedExtra::RandomBandLimited(r)) => Ok(InitialSpec::RandomBandLimited(r)),
                Err(e) => Err(D::Error::custom(e)),
            },
            Some(_) => serde_json::from_value(value).map(InitialSpec::Library).map_err(D::Error::custom),
            None => Err(D::Error::custom("initial_data needs a `kind`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub initial_data: InitialSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSection::default(),
            model: ModelSection::default(),
            evolution: EvolutionSection::default(),
            initial_data: InitialSpec::default(),
            diagnostics: DiagnosticsSection::default(),
            seed: 0,
            output_dir: default_output_dir(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks everything that can be checked without building fields.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.grid()?;
        self.model()?;
        self.evolution_config()?.validate()?;
        for &s in &self.diagnostics.s {
            ensure!(s.is_finite(), "diagnostics.s entries must be finite");
        }
        for &dt in &self.evolution.dt_ladder {
            ensure!(dt > 0.0 && dt.is_finite(), "dt_ladder entries must be positive");
        }
        if let InitialSpec::RandomBandLimited(r) = &self.initial_data {
            ensure!(r.band > 0.0 && r.band.is_finite(), "band must be positive");
            ensure!(r.amplitude >= 0.0 && r.amplitude.is_finite(), "amplitude must be nonnegative");
        }
        Ok(())
    }

    pub fn grid(&self) -> anyhow::Result<Arc<SpectralGrid>> {
        Ok(SpectralGrid::new(self.grid.n, self.grid.length)?)
    }

    pub fn model(&self) -> anyhow::Result<Model> {
        self.model.build()
    }

    pub fn evolution_config(&self) -> anyhow::Result<EvolutionConfig> {
        let method = match self.evolution.method {
            MethodKind::Strang => Method::Strang,
            MethodKind::Picard => Method::Picard(self.evolution.picard),
        };
        Ok(EvolutionConfig {
            dt: self.evolution.dt,
            t_final: self.evolution.t_final,
            method,
            model: self.model()?,
            sample_every: self.diagnostics.sample_every,
            store_states: false,
        })
    }

    /// Builds the initial field. Relative file paths resolve against `base_dir`.
    pub fn initial_field(&self, base_dir: &Path) -> anyhow::Result<SpinorField> {
        let grid = self.grid()?;
        match &self.initial_data {
            InitialSpec::Library(data) => Ok(data.build(&grid, DiracParams::new(self.model.m)?)?),
            InitialSpec::File(f) => {
                let path = base_dir.join(&f.path);
                let (header, field) = snapshot::read_file(&path)?;
                if header.n != self.grid.n || header.length != self.grid.length {
                    bail!(
                        "snapshot {} is on an n = {}, L = {} grid; config asks for n = {}, L = {}",
                        path.display(),
                        header.n,
                        header.length,
                        self.grid.n,
                        self.grid.length
                    );
                }
                Ok(SpinorField::new(grid, field.u().to_vec(), field.v().to_vec())?)
            }
            InitialSpec::RandomBandLimited(r) => random_band_limited(&grid, r, self.seed),
        }
    }
}

fn random_band_limited(grid: &Arc<SpectralGrid>, spec: &RandomInitial, seed: u64) -> anyhow::Result<SpinorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectrum = SpinorSpectrum::zeros(grid.clone());
    let modes = grid.k_squared().iter().zip(spectrum.u.iter_mut().zip(spectrum.v.iter_mut()));
    for (k2, (u, v)) in modes {
        if k2.sqrt() < spec.band {
            let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            *u = draw();
            *v = draw();
        }
    }
    let field = inverse_transform(&spectrum);
    let norm = match spec.normalization {
        Normalization::Peak => 1.0,
        Normalization::L2 => dirac_hartree::spectral::lp_norm(&field, dirac_hartree::Exponent::TWO),
        Normalization::HHalf => dirac_hartree::dirac::sobolev_norm(&field, 0.5),
    };
    ensure!(norm > 0.0, "band {} contains no lattice modes", spec.band);
    Ok(field.scaled(Complex64::new(spec.amplitude / norm, 0.0)))
}

/// Verify-suite document: the core suite config plus an optional output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    #[serde(flatten)]
    pub suite: dirac_hartree::verify::VerifySuiteConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl VerifyConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: VerifyConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.suite.validate()?;
        Ok(config)
    }
}
