//! JSON run configuration.
//!
//! Every section is optional and falls back to the reference lithium niobate
//! design: 30 mm crystal, 1603.8 nm pump of 2.5 nm FWHM, degenerate output at
//! 3207.6 nm and a ten-tooth comb target. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::biphoton::{PumpSpec, SpectralGrid};
use crate::dispersion::{solve_poling_period, DispersionModel, DEFAULT_TEMPERATURE_K, LN_MODEL_NAME};
use crate::pair_rate::{QuadratureSettings, RateParams};
use crate::target::TargetSpec;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub model: String,
    pub temperature_k: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            model: LN_MODEL_NAME.into(),
            temperature_k: DEFAULT_TEMPERATURE_K,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub center_nm: f64,
    /// Intensity FWHM.
    pub fwhm_nm: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            center_nm: 1603.8,
            fwhm_nm: 2.5,
        }
    }
}

/// Target PMF selection. Omitted widths and spacings take the crystal-length
/// based defaults of [`TargetSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Comb {
        #[serde(default = "default_teeth")]
        teeth: u32,
        #[serde(default)]
        spacing_rad_per_nm: Option<f64>,
        #[serde(default)]
        tooth_width_nm: Option<f64>,
    },
    HermiteGauss {
        #[serde(default = "default_order")]
        order: u32,
        #[serde(default)]
        width_nm: Option<f64>,
    },
    /// Two-column CSV of k (rad/nm) and amplitude, relative to the config file.
    Tabulated {
        csv: PathBuf,
        #[serde(default)]
        scale: Option<f64>,
    },
}

fn default_teeth() -> u32 {
    10
}

fn default_order() -> u32 {
    2
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig::Comb {
            teeth: default_teeth(),
            spacing_rad_per_nm: None,
            tooth_width_nm: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub size: usize,
    /// Defaults to the degenerate wavelength.
    pub center_nm: Option<f64>,
    /// Defaults to 120 nm for Hermite-Gaussian targets and 600 nm otherwise.
    pub span_nm: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            size: 512,
            center_nm: None,
            span_nm: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub resolutions_nm: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            resolutions_nm: vec![0.0, 50.0, 100.0, 200.0, 400.0],
            reps: 100,
            seed: 20_240_101,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomConfig {
    /// Delays run symmetrically over [−tau_max, tau_max].
    pub tau_max_fs: f64,
    pub points: usize,
}

impl Default for HomConfig {
    fn default() -> Self {
        Self {
            tau_max_fs: 15_000.0,
            points: 3001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dispersion: DispersionConfig,
    pub pump: PumpConfig,
    pub crystal_length_nm: f64,
    pub degenerate_nm: f64,
    /// Solved from the dispersion model when absent.
    pub poling_period_nm: Option<f64>,
    pub target: TargetConfig,
    pub grid: GridConfig,
    /// Half-width of the PMF sign window (rad/nm). Hermite-Gaussian targets
    /// default to 1.457e-7; other targets use none unless set.
    pub omega_rad_per_nm: Option<f64>,
    pub rate: RateParams,
    pub quadrature: QuadratureSettings,
    pub tolerance: ToleranceConfig,
    pub hom: HomConfig,
    pub output_dir: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub const HG_SIGN_WINDOW: f64 = 1.457e-7;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dispersion: DispersionConfig::default(),
            pump: PumpConfig::default(),
            crystal_length_nm: 30e6,
            degenerate_nm: 3207.6,
            poling_period_nm: None,
            target: TargetConfig::default(),
            grid: GridConfig::default(),
            omega_rad_per_nm: None,
            rate: RateParams::default(),
            quadrature: QuadratureSettings::default(),
            tolerance: ToleranceConfig::default(),
            hom: HomConfig::default(),
            output_dir: PathBuf::from("out"),
            base_dir: PathBuf::from("."),
        }
    }
}

/// Everything derived from a configuration that the analyses need.
#[derive(Clone, Debug)]
pub struct Run {
    pub model: DispersionModel,
    pub period_nm: f64,
    /// k₀ = 2π/Λ.
    pub carrier: f64,
    pub domain_width: f64,
    pub n_domains: usize,
    pub target: TargetSpec,
    pub omega: Option<f64>,
    pub pump: PumpSpec,
    pub grid: SpectralGrid,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Parse JSON text. Errors name the offending field and line.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let field = if path == "." { "(root)".to_string() } else { path };
            Error::config(field, format!("{inner}"))
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn is_hermite_gauss(&self) -> bool {
        matches!(self.target, TargetConfig::HermiteGauss { .. })
    }

    /// Resolve a path from the config against its directory.
    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        DispersionModel::by_name(&self.dispersion.model, Some(self.dispersion.temperature_k))
            .map_err(|e| Error::config("dispersion", e.to_string()))?;
        positive("dispersion.temperature_k", self.dispersion.temperature_k)?;
        positive("pump.center_nm", self.pump.center_nm)?;
        positive("pump.fwhm_nm", self.pump.fwhm_nm)?;
        positive("crystal_length_nm", self.crystal_length_nm)?;
        positive("degenerate_nm", self.degenerate_nm)?;
        if let Some(p) = self.poling_period_nm {
            positive("poling_period_nm", p)?;
        }
        if let Some(o) = self.omega_rad_per_nm {
            positive("omega_rad_per_nm", o)?;
        }
        match &self.target {
            TargetConfig::Comb {
                teeth,
                spacing_rad_per_nm,
                tooth_width_nm,
            } => {
                if *teeth == 0 {
                    return Err(Error::config("target.teeth", "need at least one tooth"));
                }
                if let Some(s) = spacing_rad_per_nm {
                    positive("target.spacing_rad_per_nm", *s)?;
                }
                if let Some(w) = tooth_width_nm {
                    positive("target.tooth_width_nm", *w)?;
                }
            }
            TargetConfig::HermiteGauss { width_nm, .. } => {
                if let Some(w) = width_nm {
                    positive("target.width_nm", *w)?;
                }
            }
            TargetConfig::Tabulated { csv, scale } => {
                let p = self.resolve_path(csv);
                if !p.is_file() {
                    return Err(Error::config("target.csv", format!("file not found: {}", p.display())));
                }
                if let Some(s) = scale {
                    positive("target.scale", *s)?;
                }
            }
        }
        if let Some(c) = self.grid.center_nm {
            positive("grid.center_nm", c)?;
        }
        if let Some(s) = self.grid.span_nm {
            positive("grid.span_nm", s)?;
        }
        SpectralGrid::new(self.grid.size, 1.0e3, 1.0).map_err(|e| Error::config("grid.size", e.to_string()))?;
        self.rate.validate().map_err(|e| Error::config("rate", e.to_string()))?;
        let q = &self.quadrature;
        if q.scan_points < 3 || q.initial_intervals < 2 || !(q.rel_tol > 0.0) || !(q.threshold > 0.0 && q.threshold < 1.0) {
            return Err(Error::config("quadrature", "scan_points >= 3, initial_intervals >= 2, rel_tol > 0 and 0 < threshold < 1 required"));
        }
        let t = &self.tolerance;
        if t.reps < 2 {
            return Err(Error::config("tolerance.reps", "need at least 2 repetitions"));
        }
        if let Some(r) = t.resolutions_nm.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::config("tolerance.resolutions_nm", format!("resolution {r} must be non-negative")));
        }
        positive("hom.tau_max_fs", self.hom.tau_max_fs)?;
        if self.hom.points < 2 {
            return Err(Error::config("hom.points", "need at least 2 delays"));
        }
        Ok(())
    }

    /// Derive the model, period, domain layout, target, pump and grid.
    pub fn resolve(&self) -> Result<Run> {
        let model = DispersionModel::by_name(&self.dispersion.model, Some(self.dispersion.temperature_k))?;
        let deg = self.degenerate_nm;
        let period_nm = match self.poling_period_nm {
            Some(p) => p,
            None => solve_poling_period(&model, self.pump.center_nm, deg, deg)?,
        };
        let carrier = 2.0 * PI / period_nm;
        let domain_width = period_nm / 2.0;
        let length = self.crystal_length_nm;
        let n_domains = (length / domain_width).round() as usize;
        if n_domains == 0 {
            return Err(Error::config("crystal_length_nm", "crystal shorter than one domain"));
        }
        let target = match &self.target {
            TargetConfig::Comb {
                teeth,
                spacing_rad_per_nm,
                tooth_width_nm,
            } => {
                let mut t = TargetSpec::comb(*teeth, carrier, length);
                if let crate::target::TargetShape::Comb {
                    spacing_rad_per_nm: s,
                    tooth_width_nm: w,
                    ..
                } = &mut t.shape
                {
                    *s = spacing_rad_per_nm.unwrap_or(*s);
                    *w = tooth_width_nm.unwrap_or(*w);
                }
                t
            }
            TargetConfig::HermiteGauss { order, width_nm } => {
                let mut t = TargetSpec::hermite_gauss(*order, carrier, length);
                if let (crate::target::TargetShape::HermiteGauss { width_nm: w, .. }, Some(v)) = (&mut t.shape, width_nm) {
                    *w = *v;
                }
                t
            }
            TargetConfig::Tabulated { csv, scale } => {
                let (k, a) = TargetSpec::read_table(&self.resolve_path(csv))?;
                TargetSpec::tabulated(k, a, *scale, carrier, length)?
            }
        };
        target.validate()?;
        let omega = match (self.omega_rad_per_nm, &self.target) {
            (Some(o), _) => Some(o),
            (None, TargetConfig::HermiteGauss { .. }) => Some(HG_SIGN_WINDOW),
            (None, _) => None,
        };
        let span = self.grid.span_nm.unwrap_or(if self.is_hermite_gauss() { 120.0 } else { 600.0 });
        let grid = SpectralGrid::new(self.grid.size, self.grid.center_nm.unwrap_or(deg), span)?;
        let pump = PumpSpec::new(self.pump.center_nm, self.pump.fwhm_nm)?;
        Ok(Run {
            model,
            period_nm,
            carrier,
            domain_width,
            n_domains,
            target,
            omega,
            pump,
            grid,
        })
    }
}
