//! Refractive and group indices of congruent lithium niobate, phase mismatch,
//! group-velocity matching and poling period for the type-II
//! o → o + e interaction.
//!
//! The Sellmeier form is the generalized single-oscillator model of
//! Schlarb and Betzler,
//!
//! ```text
//! n²(λ, T) = A0 / (λ0(T)⁻² − λ⁻²) − A_IR·λ² + A_UV
//! λ0(T)    = λ0 + μ0·(F(T) − F(T0)),  F(T) = T² + 4.0238e5·(coth(261.6/T) − 1)
//! ```
//!
//! with λ in nm and T in kelvin. The coefficients embedded here are fitted to
//! the mid-infrared design point of the toolkit (GVM at 3207.6 nm, 14998.9 nm
//! poling period); see the README for how they compare with tabulated indices.

use serde::{Deserialize, Serialize};

use crate::constants::C_NM_PER_FS;
use crate::numeric::bracketed_root;
use crate::{Error, Result};

use std::f64::consts::PI;

/// Name under which the embedded lithium niobate model is registered.
pub const LN_MODEL_NAME: &str = "ln_schlarb_1994";
/// Default crystal temperature, K.
pub const DEFAULT_TEMPERATURE_K: f64 = 298.15;
/// Reference temperature of the Sellmeier parameterization, K.
pub const REFERENCE_TEMPERATURE_K: f64 = 297.65;
/// Validity window of the lithium niobate model, nm.
pub const LN_WINDOW_NM: (f64, f64) = (400.0, 5500.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Ordinary ray.
    O,
    /// Extraordinary ray.
    E,
}

/// Coefficients of one polarization. `a0` and `a_ir` in nm⁻², `lambda0` in nm,
/// `mu0` in nm/K².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SellmeierTerms {
    pub a0: f64,
    pub lambda0: f64,
    pub mu0: f64,
    pub a_ir: f64,
    pub a_uv: f64,
}

impl SellmeierTerms {
    fn pole(&self, temperature_k: f64) -> f64 {
        self.lambda0 + self.mu0 * (temp_function(temperature_k) - temp_function(REFERENCE_TEMPERATURE_K))
    }

    fn n_squared(&self, lambda0_t: f64, lambda: f64) -> f64 {
        self.a0 / (lambda0_t.powi(-2) - lambda.powi(-2)) - self.a_ir * lambda * lambda + self.a_uv
    }

    fn dn_squared(&self, lambda0_t: f64, lambda: f64) -> f64 {
        let den = lambda0_t.powi(-2) - lambda.powi(-2);
        -2.0 * self.a0 * lambda.powi(-3) / (den * den) - 2.0 * self.a_ir * lambda
    }
}

fn temp_function(t: f64) -> f64 {
    let x = 261.6 / t;
    t * t + 4.0238e5 * (1.0 / x.tanh() - 1.0)
}

const LN_ORDINARY: SellmeierTerms = SellmeierTerms {
    a0: 5.459_602_621_755_36e-5,
    lambda0: 218.103_288_544_620_74,
    mu0: 1.1082e-6,
    a_ir: 3.842_580_728_740_411e-8,
    a_uv: 2.323_175_352_026_681_6,
};

const LN_EXTRAORDINARY: SellmeierTerms = SellmeierTerms {
    a0: 3.941_043_453_098_838e-5,
    lambda0: 141.327_003_854_556_3,
    mu0: 6.4047e-6,
    a_ir: 3.149_924_355_354_353e-8,
    a_uv: 3.819_898_716_711_043_6,
};

/// Refractive-index provider for the two polarizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionModel {
    /// Temperature-dependent Sellmeier model.
    Sellmeier {
        ordinary: SellmeierTerms,
        extraordinary: SellmeierTerms,
        temperature_k: f64,
        window_nm: (f64, f64),
    },
    /// Dispersion-free medium, useful as a test double.
    Constant { n_o: f64, n_e: f64 },
}

impl Default for DispersionModel {
    fn default() -> Self {
        Self::lithium_niobate(DEFAULT_TEMPERATURE_K)
    }
}

impl DispersionModel {
    /// Congruent lithium niobate at the given temperature.
    pub fn lithium_niobate(temperature_k: f64) -> Self {
        DispersionModel::Sellmeier {
            ordinary: LN_ORDINARY,
            extraordinary: LN_EXTRAORDINARY,
            temperature_k,
            window_nm: LN_WINDOW_NM,
        }
    }

    /// Look up a registered model by name.
    pub fn by_name(name: &str, temperature_k: Option<f64>) -> Result<Self> {
        let t = temperature_k.unwrap_or(DEFAULT_TEMPERATURE_K);
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature {t} K")));
        }
        match name {
            LN_MODEL_NAME => Ok(Self::lithium_niobate(t)),
            other => Err(Error::InvalidParameter(format!(
                "unknown dispersion model {other:?} (known: {LN_MODEL_NAME})"
            ))),
        }
    }

    /// Validity window in nm.
    pub fn window(&self) -> (f64, f64) {
        match self {
            DispersionModel::Sellmeier { window_nm, .. } => *window_nm,
            DispersionModel::Constant { .. } => (1.0, 1.0e6),
        }
    }

    fn check(&self, lambda: f64) -> Result<()> {
        let (lo, hi) = self.window();
        if lambda >= lo && lambda <= hi {
            Ok(())
        } else {
            Err(Error::OutOfWindow {
                wavelength_nm: lambda,
                min_nm: lo,
                max_nm: hi,
            })
        }
    }

    /// Phase index n(λ).
    pub fn refractive_index(&self, pol: Polarization, lambda_nm: f64) -> Result<f64> {
        self.check(lambda_nm)?;
        Ok(match self {
            DispersionModel::Sellmeier {
                ordinary,
                extraordinary,
                temperature_k,
                ..
            } => {
                let terms = pick(pol, ordinary, extraordinary);
                terms.n_squared(terms.pole(*temperature_k), lambda_nm).sqrt()
            }
            DispersionModel::Constant { n_o, n_e } => match pol {
                Polarization::O => *n_o,
                Polarization::E => *n_e,
            },
        })
    }

    /// Group index n − λ·dn/dλ.
    pub fn group_index(&self, pol: Polarization, lambda_nm: f64) -> Result<f64> {
        self.check(lambda_nm)?;
        Ok(match self {
            DispersionModel::Sellmeier {
                ordinary,
                extraordinary,
                temperature_k,
                ..
            } => {
                let terms = pick(pol, ordinary, extraordinary);
                let pole = terms.pole(*temperature_k);
                let n = terms.n_squared(pole, lambda_nm).sqrt();
                let dn = terms.dn_squared(pole, lambda_nm) / (2.0 * n);
                n - lambda_nm * dn
            }
            DispersionModel::Constant { .. } => self.refractive_index(pol, lambda_nm)?,
        })
    }

    /// Wavenumber 2πn/λ in rad/nm.
    pub fn wavenumber(&self, pol: Polarization, lambda_nm: f64) -> Result<f64> {
        Ok(2.0 * PI * self.refractive_index(pol, lambda_nm)? / lambda_nm)
    }

    /// Phase mismatch k_p − k_s − k_i (no grating term) for the o → o + e process.
    pub fn material_mismatch(&self, lambda_p: f64, lambda_s: f64, lambda_i: f64) -> Result<f64> {
        Ok(self.wavenumber(PUMP, lambda_p)?
            - self.wavenumber(SIGNAL, lambda_s)?
            - self.wavenumber(IDLER, lambda_i)?)
    }
}

fn pick<'a>(pol: Polarization, o: &'a SellmeierTerms, e: &'a SellmeierTerms) -> &'a SellmeierTerms {
    match pol {
        Polarization::O => o,
        Polarization::E => e,
    }
}

/// Pump polarization of the type-II process.
pub const PUMP: Polarization = Polarization::O;
/// Signal polarization of the type-II process.
pub const SIGNAL: Polarization = Polarization::O;
/// Idler polarization of the type-II process.
pub const IDLER: Polarization = Polarization::E;

/// Wavelengths (nm) of one three-wave interaction and an optional grating period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchConfig {
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub period: Option<f64>,
}

impl PhaseMatchConfig {
    pub fn new(lambda_p: f64, lambda_s: f64, lambda_i: f64) -> Self {
        Self {
            lambda_p,
            lambda_s,
            lambda_i,
            period: None,
        }
    }

    /// Frequency-degenerate pair at `lambda_deg`, pumped at half that wavelength.
    pub fn degenerate(lambda_deg: f64) -> Self {
        Self::new(lambda_deg / 2.0, lambda_deg, lambda_deg)
    }

    pub fn with_period(mut self, period_nm: f64) -> Self {
        self.period = Some(period_nm);
        self
    }

    /// 1/λ_p − 1/λ_s − 1/λ_i in nm⁻¹.
    pub fn energy_mismatch(&self) -> f64 {
        1.0 / self.lambda_p - 1.0 / self.lambda_s - 1.0 / self.lambda_i
    }
}

/// Δk = 2π(n_p/λ_p − n_s/λ_s − n_i/λ_i − 1/Λ) in rad/nm. The grating term is
/// dropped when no period is set.
pub fn delta_k(model: &DispersionModel, cfg: &PhaseMatchConfig) -> Result<f64> {
    let grating = match cfg.period {
        None => 0.0,
        Some(p) if p > 0.0 => 2.0 * PI / p,
        Some(p) => return Err(Error::InvalidPeriod(p)),
    };
    Ok(model.material_mismatch(cfg.lambda_p, cfg.lambda_s, cfg.lambda_i)? - grating)
}

/// Group-velocity mismatch 2/V_p − 1/V_s − 1/V_i in fs/nm for the degenerate
/// process at `lambda_deg` (pump at `lambda_deg / 2`).
pub fn gvm_mismatch(model: &DispersionModel, lambda_deg: f64) -> Result<f64> {
    let ng_p = model.group_index(PUMP, lambda_deg / 2.0)?;
    let ng_s = model.group_index(SIGNAL, lambda_deg)?;
    let ng_i = model.group_index(IDLER, lambda_deg)?;
    Ok((2.0 * ng_p - ng_s - ng_i) / C_NM_PER_FS)
}

/// Degenerate wavelength where the GVM mismatch vanishes, searched in `bracket`.
pub fn solve_gvm_wavelength(model: &DispersionModel, bracket: (f64, f64)) -> Result<f64> {
    let (lo, hi) = bracket;
    bracketed_root(|l| gvm_mismatch(model, l), lo, hi, 1e-4)?.ok_or(Error::NoRoot { lo, hi })
}

/// Poling period Λ (nm) that quasi-phase-matches the given wavelengths.
pub fn solve_poling_period(
    model: &DispersionModel,
    lambda_p: f64,
    lambda_s: f64,
    lambda_i: f64,
) -> Result<f64> {
    let dk = model.material_mismatch(lambda_p, lambda_s, lambda_i)?;
    if dk > 0.0 {
        Ok(2.0 * PI / dk)
    } else {
        Err(Error::PhaseMatchingImpossible(dk))
    }
}

/// Scan of the six tabulated design-point indices against temperature.
#[derive(Clone, Debug, Serialize)]
pub struct IndexSample {
    pub temperature_k: f64,
    pub n_p: f64,
    pub n_s: f64,
    pub n_i: f64,
    pub ng_s: f64,
    pub ng_i: f64,
}

/// Indices at the degenerate design point for each temperature.
pub fn index_scan(temperatures_k: &[f64], lambda_deg: f64) -> Result<Vec<IndexSample>> {
    temperatures_k
        .iter()
        .map(|&t| {
            let m = DispersionModel::lithium_niobate(t);
            Ok(IndexSample {
                temperature_k: t,
                n_p: m.refractive_index(PUMP, lambda_deg / 2.0)?,
                n_s: m.refractive_index(SIGNAL, lambda_deg)?,
                n_i: m.refractive_index(IDLER, lambda_deg)?,
                ng_s: m.group_index(SIGNAL, lambda_deg)?,
                ng_i: m.group_index(IDLER, lambda_deg)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ln() -> DispersionModel {
        DispersionModel::default()
    }

    #[test]
    fn design_point_indices_are_close_to_tabulated() {
        let m = ln();
        // Loose sanity band; the tighter gate lives in the acceptance suite.
        assert!((m.refractive_index(Polarization::O, 1603.8).unwrap() - 2.2026).abs() < 1e-2);
        assert!((m.refractive_index(Polarization::O, 3207.6).unwrap() - 2.1302).abs() < 1e-2);
        assert!((m.refractive_index(Polarization::E, 3207.6).unwrap() - 2.0612).abs() < 1e-2);
        assert!((m.group_index(Polarization::O, 3207.6).unwrap() - 2.3276).abs() < 1e-2);
        assert!((m.group_index(Polarization::E, 3207.6).unwrap() - 2.2335).abs() < 1e-2);
    }

    #[test]
    fn out_of_window_is_rejected() {
        let err = ln().refractive_index(Polarization::O, 6000.0).unwrap_err();
        assert!(err.to_string().contains("[400, 5500]"));
        assert!(gvm_mismatch(&ln(), 700.0).is_err());
    }

    #[test]
    fn constant_model_has_no_dispersion() {
        let m = DispersionModel::Constant { n_o: 2.2, n_e: 2.1 };
        assert_eq!(m.group_index(Polarization::E, 3000.0).unwrap(), 2.1);
        // Only the birefringence survives: (2n_o − n_o − n_e)/c.
        for l in [1000.0, 3207.6, 4500.0] {
            assert_relative_eq!(gvm_mismatch(&m, l).unwrap(), 0.1 / C_NM_PER_FS, max_relative = 1e-12);
        }
    }

    #[test]
    fn period_closes_the_mismatch() {
        let m = ln();
        let cfg = PhaseMatchConfig::degenerate(3207.6);
        assert_eq!(cfg.energy_mismatch(), 0.0);
        let p = solve_poling_period(&m, 1603.8, 3207.6, 3207.6).unwrap();
        assert!((p - 14998.9).abs() < 1.0);
        let dk = delta_k(&m, &cfg.with_period(p)).unwrap();
        assert!(dk.abs() < 1e-12);
        let bare = delta_k(&m, &cfg).unwrap();
        assert_relative_eq!(bare, 2.0 * PI / p, max_relative = 1e-12);
        let far = delta_k(&m, &cfg.with_period(f64::INFINITY)).unwrap();
        assert_eq!(far, bare);
        assert!(matches!(
            delta_k(&m, &cfg.with_period(0.0)),
            Err(Error::InvalidPeriod(_))
        ));
    }

    #[test]
    fn period_moves_monotonically_with_pump() {
        let m = ln();
        let periods: Vec<f64> = (0..6)
            .map(|i| {
                let lp = 1603.8 + i as f64;
                let ls = 3207.6;
                let li = 1.0 / (1.0 / lp - 1.0 / ls);
                solve_poling_period(&m, lp, ls, li).unwrap()
            })
            .collect();
        let dirs: Vec<bool> = periods.windows(2).map(|w| w[1] > w[0]).collect();
        assert!(dirs.iter().all(|&d| d == dirs[0]));
    }

    #[test]
    fn impossible_phase_matching_is_an_error() {
        let m = DispersionModel::Constant { n_o: 1.5, n_e: 2.5 };
        assert!(matches!(
            solve_poling_period(&m, 1603.8, 3207.6, 3207.6),
            Err(Error::PhaseMatchingImpossible(_))
        ));
    }

    #[test]
    fn gvm_root_is_bracket_independent() {
        let m = ln();
        let roots: Vec<f64> = [(2500.0, 4000.0), (3000.0, 3400.0), (3200.0, 5000.0)]
            .iter()
            .map(|&b| solve_gvm_wavelength(&m, b).unwrap())
            .collect();
        for r in &roots {
            assert!((r - roots[0]).abs() < 1e-3);
            assert!((r - 3207.6).abs() < 0.5);
        }
        assert!(matches!(
            solve_gvm_wavelength(&m, (3300.0, 4000.0)),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn gvm_sign_change_on_one_nm_grid() {
        let m = ln();
        let mut changes = Vec::new();
        let mut prev = gvm_mismatch(&m, 3100.0).unwrap();
        for i in 1..=200 {
            let l = 3100.0 + i as f64;
            let v = gvm_mismatch(&m, l).unwrap();
            if v.signum() != prev.signum() {
                changes.push(l);
            }
            prev = v;
        }
        assert_eq!(changes.len(), 1);
        assert!((changes[0] - 3208.0).abs() <= 1.0);
        let root = solve_gvm_wavelength(&m, (2500.0, 4000.0)).unwrap();
        assert!(
            gvm_mismatch(&m, root).unwrap().abs() <= gvm_mismatch(&m, 3206.0).unwrap().abs()
        );
    }

    #[test]
    fn temperature_only_moves_the_uv_pole() {
        let cold = DispersionModel::lithium_niobate(290.0);
        let hot = DispersionModel::lithium_niobate(320.0);
        let a = cold.refractive_index(Polarization::E, 1000.0).unwrap();
        let b = hot.refractive_index(Polarization::E, 1000.0).unwrap();
        assert!(b > a);
        assert!(b - a < 1e-3);
        // At the reference temperature the pole is unshifted.
        let r = DispersionModel::lithium_niobate(REFERENCE_TEMPERATURE_K);
        if let DispersionModel::Sellmeier { ordinary, .. } = &r {
            assert_eq!(ordinary.pole(REFERENCE_TEMPERATURE_K), ordinary.lambda0);
        }
    }

    #[test]
    fn registry() {
        assert_eq!(
            DispersionModel::by_name(LN_MODEL_NAME, None).unwrap(),
            DispersionModel::default()
        );
        assert!(DispersionModel::by_name("ktp", None).is_err());
        assert!(DispersionModel::by_name(LN_MODEL_NAME, Some(-3.0)).is_err());
    }

    proptest! {
        #[test]
        fn group_index_matches_finite_difference(l in 450.0f64..5400.0, e in any::<bool>()) {
            let m = ln();
            let pol = if e { Polarization::E } else { Polarization::O };
            let h = 0.01;
            let n = m.refractive_index(pol, l).unwrap();
            let dn = (m.refractive_index(pol, l + h).unwrap()
                - m.refractive_index(pol, l - h).unwrap()) / (2.0 * h);
            let fd = n - l * dn;
            let ng = m.group_index(pol, l).unwrap();
            prop_assert!(((ng - fd) / ng).abs() < 1e-6);
        }

        #[test]
        fn physical_indices_over_window(l in 400.0f64..5500.0, e in any::<bool>()) {
            let m = ln();
            let pol = if e { Polarization::E } else { Polarization::O };
            let n = m.refractive_index(pol, l).unwrap();
            let ng = m.group_index(pol, l).unwrap();
            prop_assert!(n > 1.0);
            // Normal dispersion throughout the window.
            prop_assert!(ng >= n);
        }

        #[test]
        fn solved_period_zeroes_mismatch(lp in 1200.0f64..2200.0, frac in 0.3f64..0.7) {
            let m = ln();
            let ls = lp / frac;
            let li = 1.0 / (1.0 / lp - 1.0 / ls);
            prop_assume!(ls <= 5500.0 && li <= 5500.0);
            if let Ok(p) = solve_poling_period(&m, lp, ls, li) {
                let dk = delta_k(&m, &PhaseMatchConfig::new(lp, ls, li).with_period(p)).unwrap();
                prop_assert!(dk.abs() < 1e-12);
            }
        }
    }
}
