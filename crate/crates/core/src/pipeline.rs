//! Design and analysis chain shared by the command line and the test suites.

use nalgebra::DMatrix;

use crate::biphoton::{assemble_with_mismatch, mismatch_matrix, schmidt_decomposition, JsaGrid, PumpSpec, SchmidtReport, SpectralGrid};
use crate::config::Run;
use crate::dispersion::DispersionModel;
use crate::numeric::linspace;
use crate::poling::{achieved_pmf, track_domains, AchievedPmf, DomainSequence, KGrid};
use crate::target::TargetSpec;
use crate::{Error, Result};

/// Samples of the PMF lookup table spanning the JSA mismatch range.
pub const PMF_SAMPLES: usize = 8192;

/// Greedy poling design for `target` with `n_domains` domains of width `domain_width`.
pub fn design(target: &TargetSpec, domain_width: f64, n_domains: usize) -> Result<DomainSequence> {
    let table = target.amplitude_table(domain_width, n_domains)?;
    Ok(track_domains(&table, target.carrier))
}

/// Precomputed grid data for repeated JSA evaluation of different sequences.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub model: DispersionModel,
    pub pump: PumpSpec,
    pub grid: SpectralGrid,
    pub omega: Option<f64>,
    /// Material mismatch at every grid cell.
    pub mismatch: DMatrix<f64>,
    pub kgrid: KGrid,
}

impl Analysis {
    pub fn new(model: DispersionModel, pump: PumpSpec, grid: SpectralGrid, omega: Option<f64>) -> Result<Self> {
        let mismatch = mismatch_matrix(&model, &grid)?;
        let lo = mismatch.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = mismatch.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let kgrid = KGrid::new(lo, hi, PMF_SAMPLES)?;
        Ok(Self {
            model,
            pump,
            grid,
            omega,
            mismatch,
            kgrid,
        })
    }

    pub fn from_run(run: &Run) -> Result<Self> {
        Self::new(run.model.clone(), run.pump, run.grid, run.omega)
    }

    pub fn pmf(&self, seq: &DomainSequence) -> Result<AchievedPmf> {
        achieved_pmf(seq, self.kgrid, self.omega)
    }

    /// Normalized JSA of a sequence.
    pub fn jsa(&self, seq: &DomainSequence) -> Result<JsaGrid> {
        let pmf = self.pmf(seq)?;
        assemble_with_mismatch(&pmf, &self.pump, &self.grid, &self.mismatch)
    }

    /// Normalized JSA of an analytic target, without poling.
    pub fn target_jsa(&self, target: &TargetSpec) -> Result<JsaGrid> {
        assemble_with_mismatch(target, &self.pump, &self.grid, &self.mismatch)
    }

    pub fn schmidt(&self, seq: &DomainSequence) -> Result<SchmidtReport> {
        schmidt_decomposition(&self.jsa(seq)?)
    }

    pub fn schmidt_number(&self, seq: &DomainSequence) -> Result<f64> {
        Ok(self.schmidt(seq)?.k)
    }
}

/// Symmetric delay axis `[−tau_max, tau_max]` with `points` samples.
pub fn delays(tau_max_fs: f64, points: usize) -> Result<Vec<f64>> {
    if !(tau_max_fs > 0.0) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "delay scan needs tau_max > 0 and at least 2 points, got {tau_max_fs} fs and {points}"
        )));
    }
    Ok(linspace(-tau_max_fs, tau_max_fs, points))
}
