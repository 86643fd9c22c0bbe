//! Joint spectral amplitude assembly and the analyses built on it.
//!
//! The JSA lives on a square grid uniform in wavelength, rows indexed by the
//! signal wavelength and columns by the idler wavelength. Frequencies are
//! exact (ω = 2πc/λ per sample) while the integration measure uses the nominal
//! spacing Δω = 2πcΔλ/λ_c², i.e. the wavelength-to-frequency Jacobian is
//! omitted as in wavelength-axis plots.

mod hom;
mod jta;
mod schmidt;

pub use hom::{fringe_count, hom_scan};
pub use jta::{jta_from_jsa, JtaGrid};
pub use schmidt::{schmidt_decomposition, SchmidtReport};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{lambda_nm, omega_rad_per_fs, C_NM_PER_FS};
use crate::dispersion::DispersionModel;
use crate::numeric::linspace;
use crate::poling::AchievedPmf;
use crate::target::TargetSpec;
use crate::{Error, Result};

/// Square wavelength grid shared by signal and idler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub size: usize,
    pub center_nm: f64,
    pub span_nm: f64,
}

impl SpectralGrid {
    pub fn new(size: usize, center_nm: f64, span_nm: f64) -> Result<Self> {
        let g = Self {
            size,
            center_nm,
            span_nm,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.size.is_power_of_two() || self.size < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 4, got {}",
                self.size
            )));
        }
        if !(self.span_nm > 0.0 && self.center_nm > 0.0 && self.span_nm < self.center_nm) {
            return Err(Error::InvalidParameter(format!(
                "grid span {} nm must be positive and below the centre {} nm",
                self.span_nm, self.center_nm
            )));
        }
        Ok(())
    }

    /// Wavelength samples, ends included.
    pub fn wavelengths(&self) -> Vec<f64> {
        linspace(
            self.center_nm - self.span_nm / 2.0,
            self.center_nm + self.span_nm / 2.0,
            self.size,
        )
    }

    /// Exact angular frequencies (rad/fs) of the wavelength samples.
    pub fn omegas(&self) -> Vec<f64> {
        self.wavelengths().into_iter().map(omega_rad_per_fs).collect()
    }

    pub fn d_lambda(&self) -> f64 {
        self.span_nm / (self.size - 1) as f64
    }

    /// Nominal frequency step in rad/fs.
    pub fn d_omega(&self) -> f64 {
        2.0 * PI * C_NM_PER_FS * self.d_lambda() / (self.center_nm * self.center_nm)
    }
}

/// Gaussian pump described by its spectral intensity FWHM.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub center_nm: f64,
    pub fwhm_nm: f64,
}

impl PumpSpec {
    pub fn new(center_nm: f64, fwhm_nm: f64) -> Result<Self> {
        if !(fwhm_nm > 0.0 && center_nm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pump needs positive centre and FWHM, got {center_nm} nm / {fwhm_nm} nm"
            )));
        }
        Ok(Self { center_nm, fwhm_nm })
    }

    pub fn omega0(&self) -> f64 {
        omega_rad_per_fs(self.center_nm)
    }

    /// RMS width of the amplitude envelope in rad/fs. The intensity |α|² has
    /// the configured FWHM, so the amplitude is √2 wider than the intensity.
    pub fn sigma_amplitude(&self) -> f64 {
        let fwhm_omega = 2.0 * PI * C_NM_PER_FS * self.fwhm_nm / (self.center_nm * self.center_nm);
        let sigma_intensity = fwhm_omega / (2.0 * (2.0 * 2f64.ln()).sqrt());
        2f64.sqrt() * sigma_intensity
    }

    /// Intensity FWHM in fs of the transform-limited pulse.
    pub fn transform_limited_fwhm_fs(&self) -> f64 {
        2.0 * 2f64.ln().sqrt() / self.sigma_amplitude()
    }
}

/// Pump envelope α(ω_s + ω_i), peak 1 at the pump centre.
pub fn pump_envelope(pump: &PumpSpec, omega_sum: f64) -> f64 {
    let d = omega_sum - pump.omega0();
    let s = pump.sigma_amplitude();
    (-(d * d) / (2.0 * s * s)).exp()
}

/// Anything that can report a real phase-matching value at a wavevector mismatch.
pub trait PmfSource: Sync {
    fn phi(&self, k: f64) -> Result<f64>;
}

impl PmfSource for AchievedPmf {
    fn phi(&self, k: f64) -> Result<f64> {
        self.value(k)
    }
}

impl PmfSource for TargetSpec {
    fn phi(&self, k: f64) -> Result<f64> {
        Ok(self.pmf(k))
    }
}

/// Joint spectral amplitude sampled on a [`SpectralGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct JsaGrid {
    pub grid: SpectralGrid,
    /// Row = signal sample, column = idler sample.
    pub amplitude: DMatrix<Complex64>,
    pub normalized: bool,
    /// Σ|f|²Δω² before normalization.
    pub raw_norm_sq: f64,
}

impl JsaGrid {
    /// Sample `f(λ_s, λ_i)` on the grid (not normalized).
    pub fn from_fn<F>(grid: SpectralGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let l = grid.wavelengths();
        let amplitude = DMatrix::from_fn(grid.size, grid.size, |i, j| f(l[i], l[j]));
        let mut j = Self {
            grid,
            amplitude,
            normalized: false,
            raw_norm_sq: 0.0,
        };
        j.raw_norm_sq = j.norm_sq();
        j
    }

    /// Σ|f|²·Δω_s·Δω_i.
    pub fn norm_sq(&self) -> f64 {
        let dw = self.grid.d_omega();
        self.amplitude.iter().map(|c| c.norm_sqr()).sum::<f64>() * dw * dw
    }

    /// Scale to unit Σ|f|²Δω².
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Numeric(format!("cannot normalize a JSA with norm {n}")));
        }
        self.raw_norm_sq = n;
        let s = 1.0 / n.sqrt();
        self.amplitude.iter_mut().for_each(|c| *c *= s);
        self.normalized = true;
        Ok(())
    }

    pub fn intensity(&self) -> DMatrix<f64> {
        self.amplitude.map(|c| c.norm_sqr())
    }

    pub fn modulus(&self) -> DMatrix<f64> {
        self.amplitude.map(|c| c.norm())
    }

    pub fn real(&self) -> DMatrix<f64> {
        self.amplitude.map(|c| c.re)
    }

    /// |f|²-weighted mean signal and idler wavelengths in nm.
    pub fn centroid(&self) -> (f64, f64) {
        let l = self.grid.wavelengths();
        let w = self.intensity();
        let total: f64 = w.iter().sum();
        let mut s = 0.0;
        let mut i = 0.0;
        for r in 0..w.nrows() {
            for c in 0..w.ncols() {
                s += w[(r, c)] * l[r];
                i += w[(r, c)] * l[c];
            }
        }
        (s / total, i / total)
    }
}

/// Material wavevector mismatch k_p − k_s − k_i at every grid cell, with
/// λ_p fixed by energy conservation. Returned row-major (signal, idler).
pub fn mismatch_matrix(model: &DispersionModel, grid: &SpectralGrid) -> Result<DMatrix<f64>> {
    use crate::dispersion::{IDLER, PUMP, SIGNAL};
    let l = grid.wavelengths();
    let w = grid.omegas();
    let ks: Vec<f64> = l.iter().map(|&x| model.wavenumber(SIGNAL, x)).collect::<Result<_>>()?;
    let ki: Vec<f64> = l.iter().map(|&x| model.wavenumber(IDLER, x)).collect::<Result<_>>()?;
    let m = grid.size;
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|r| {
            (0..m)
                .map(|c| {
                    let lp = lambda_nm(w[r] + w[c]);
                    Ok(model.wavenumber(PUMP, lp)? - ks[r] - ki[c])
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(m, m, |r, c| rows[r][c]))
}

/// f = φ(k(λ_s, λ_i))·α(ω_s + ω_i), L2-normalized.
pub fn assemble_jsa(
    pmf: &dyn PmfSource,
    pump: &PumpSpec,
    grid: &SpectralGrid,
    model: &DispersionModel,
) -> Result<JsaGrid> {
    let k = mismatch_matrix(model, grid)?;
    assemble_with_mismatch(pmf, pump, grid, &k)
}

/// As [`assemble_jsa`] with a precomputed [`mismatch_matrix`].
pub fn assemble_with_mismatch(
    pmf: &dyn PmfSource,
    pump: &PumpSpec,
    grid: &SpectralGrid,
    k: &DMatrix<f64>,
) -> Result<JsaGrid> {
    grid.validate()?;
    let w = grid.omegas();
    let m = grid.size;
    let rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|r| {
            (0..m)
                .map(|c| {
                    let a = pump_envelope(pump, w[r] + w[c]);
                    Ok(Complex64::new(pmf.phi(k[(r, c)])? * a, 0.0))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut jsa = JsaGrid {
        grid: *grid,
        amplitude: DMatrix::from_fn(m, m, |r, c| rows[r][c]),
        normalized: false,
        raw_norm_sq: 0.0,
    };
    jsa.normalize()?;
    Ok(jsa)
}

/// Samples along the anti-diagonal i + j = M − 1 + offset, ordered by signal
/// index. Offset 0 is the cut through the grid centre.
pub fn antidiagonal_profile(data: &DMatrix<f64>, offset: isize) -> Result<Vec<f64>> {
    let m = data.nrows();
    if data.ncols() != m {
        return Err(Error::InvalidParameter("anti-diagonal cut needs a square grid".into()));
    }
    let s = m as isize - 1 + offset;
    if s < 0 || s > 2 * (m as isize - 1) {
        return Err(Error::OutOfRange {
            what: "anti-diagonal offset",
            value: offset as f64,
            lo: -(m as f64 - 1.0),
            hi: m as f64 - 1.0,
        });
    }
    let lo = (s - (m as isize - 1)).max(0) as usize;
    let hi = s.min(m as isize - 1) as usize;
    Ok((lo..=hi).map(|i| data[(i, s as usize - i)]).collect())
}
