//! Absolute single-mode pair generation rate of a poled crystal.
//!
//! ```text
//! R = P/(8ε₀π²c³) · n_g1·n_g2/(n_1²n_2²n_p) · |σ_p/(σ_1² + 2σ_p²)|² · (4d_eff)²
//!     · ∫ ω_s(ω_p − ω_s) |∫χ̄(z)e^{−ikz}dz|² dω_s
//! ```
//!
//! evaluated in SI units, with k(ω_s) the material mismatch of the o → o + e
//! process at fixed pump wavelength.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{C_SI, EPS0};
use crate::dispersion::{DispersionModel, IDLER, PUMP, SIGNAL};
use crate::poling::{DomainSequence, TransferEvaluator};
use crate::{Error, Result};

/// Physical inputs of the rate formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateParams {
    pub power_w: f64,
    pub pump_waist_um: f64,
    pub biphoton_waist_um: f64,
    pub d_eff_pm_per_v: f64,
    pub n_signal: f64,
    pub n_idler: f64,
    pub n_pump: f64,
    pub ng_signal: f64,
    pub ng_idler: f64,
    pub pump_nm: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        Self {
            power_w: 1e-3,
            pump_waist_um: 50.0,
            biphoton_waist_um: 50.0,
            d_eff_pm_per_v: -3.26,
            n_signal: 2.1302,
            n_idler: 2.0612,
            n_pump: 2.2026,
            ng_signal: 2.3276,
            ng_idler: 2.2335,
            pump_nm: 1603.8,
        }
    }
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("power_w", self.power_w),
            ("pump_waist_um", self.pump_waist_um),
            ("biphoton_waist_um", self.biphoton_waist_um),
            ("n_signal", self.n_signal),
            ("n_idler", self.n_idler),
            ("n_pump", self.n_pump),
            ("ng_signal", self.ng_signal),
            ("ng_idler", self.ng_idler),
            ("pump_nm", self.pump_nm),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.d_eff_pm_per_v.is_finite() {
            return Err(Error::InvalidParameter("d_eff_pm_per_v must be finite".into()));
        }
        Ok(())
    }

    /// Everything in front of the frequency integral, SI.
    pub fn prefactor(&self) -> f64 {
        let sp = self.pump_waist_um * 1e-6;
        let s1 = self.biphoton_waist_um * 1e-6;
        let d = self.d_eff_pm_per_v * 1e-12;
        let geom = sp / (s1 * s1 + 2.0 * sp * sp);
        self.power_w / (8.0 * EPS0 * PI * PI * C_SI.powi(3)) * self.ng_signal * self.ng_idler
            / (self.n_signal.powi(2) * self.n_idler.powi(2) * self.n_pump)
            * geom
            * geom
            * (4.0 * d).powi(2)
    }

    /// Peak pump field |E_p⁰| in V/m from P = cε₀n_pπσ_p²|E_p⁰|².
    pub fn pump_field(&self) -> f64 {
        let sp = self.pump_waist_um * 1e-6;
        (self.power_w / (C_SI * EPS0 * self.n_pump * PI * sp * sp)).sqrt()
    }
}

/// Miller's-rule scaling of d_eff from one wavelength triple (pump, signal,
/// idler in nm) to another, with o, o, e polarizations.
pub fn miller_scaled_deff(
    d_ref_pm_per_v: f64,
    reference: (f64, f64, f64),
    target: (f64, f64, f64),
    model: &DispersionModel,
) -> Result<f64> {
    let chi = |t: (f64, f64, f64)| -> Result<f64> {
        let x = |pol, l| model.refractive_index(pol, l).map(|n| n * n - 1.0);
        Ok(x(PUMP, t.0)? * x(SIGNAL, t.1)? * x(IDLER, t.2)?)
    };
    Ok(d_ref_pm_per_v * chi(target)? / chi(reference)?)
}

/// Material mismatch k(ω_s) in rad/nm at fixed pump wavelength; ω_s in rad/s.
pub fn mismatch_at(model: &DispersionModel, omega_s: f64, pump_nm: f64) -> Result<f64> {
    let wp = 2.0 * PI * C_SI / (pump_nm * 1e-9);
    if !(omega_s > 0.0 && omega_s < wp) {
        return Err(Error::OutOfRange {
            what: "omega_s",
            value: omega_s,
            lo: 0.0,
            hi: wp,
        });
    }
    let ls = 2.0 * PI * C_SI / omega_s * 1e9;
    let li = 2.0 * PI * C_SI / (wp - omega_s) * 1e9;
    model.material_mismatch(pump_nm, ls, li)
}

/// ∫χ̄(z)e^{−ikz}dz in metres at signal frequency ω_s (rad/s).
pub fn transfer_integral(
    seq: &DomainSequence,
    omega_s: f64,
    pump_nm: f64,
    model: &DispersionModel,
) -> Result<Complex64> {
    let k = mismatch_at(model, omega_s, pump_nm)?;
    Ok(TransferEvaluator::new(seq).at(k).conj() * 1e-9)
}

/// Numerical settings of the frequency quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSettings {
    /// Samples of the scan that locates the band.
    pub scan_points: usize,
    /// Trapezoid intervals before the first doubling.
    pub initial_intervals: usize,
    pub max_doublings: usize,
    /// Relative change between doublings accepted as converged.
    pub rel_tol: f64,
    /// Band edge: integrand below this fraction of its peak is dropped.
    pub threshold: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            scan_points: 4097,
            initial_intervals: 2048,
            max_doublings: 4,
            rel_tol: 0.01,
            threshold: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    #[serde(rename = "rate_per_s_per_mW")]
    pub rate_per_s_per_mw: f64,
    /// Signal-wavelength band integrated over, nm.
    pub band_nm: [f64; 2],
    pub quadrature_points: usize,
    pub converged: bool,
    /// Absolute rate at the configured power, pairs/s.
    pub rate_per_s: f64,
}

/// Pair generation rate of `seq` with the given parameters.
pub fn pair_rate(
    seq: &DomainSequence,
    params: &RateParams,
    model: &DispersionModel,
    settings: &QuadratureSettings,
) -> Result<RateReport> {
    params.validate()?;
    if seq.is_empty() {
        return Err(Error::InvalidParameter("empty domain sequence".into()));
    }
    let eval = TransferEvaluator::new(seq);
    let wp = 2.0 * PI * C_SI / (params.pump_nm * 1e-9);
    let (lo_nm, hi_nm) = model.window();
    let w_of = |l_nm: f64| 2.0 * PI * C_SI / (l_nm * 1e-9);
    // Both photons inside the index window; beyond it the integrand is
    // negligible and the band is clipped.
    // Pulled in by a few ulp so round-off in λ = 2πc/ω stays inside.
    let w_lo = w_of(hi_nm).max(wp - w_of(lo_nm)) * (1.0 + 1e-12);
    let w_hi = w_of(lo_nm).min(wp - w_of(hi_nm)) * (1.0 - 1e-12);
    if !(w_hi > w_lo) {
        return Err(Error::InvalidParameter(format!(
            "pump at {} nm leaves no signal band inside the index window",
            params.pump_nm
        )));
    }
    let integrand = |w: f64| -> Result<f64> {
        let k = mismatch_at(model, w, params.pump_nm)?;
        let t = eval.at(k).norm() * 1e-9;
        Ok(w * (wp - w) * t * t)
    };
    let sample = |ws: &[f64]| -> Result<Vec<f64>> { ws.par_iter().map(|&w| integrand(w)).collect() };

    // Locate the band on a scan of the admissible range.
    let n_scan = settings.scan_points.max(3);
    let hs = (w_hi - w_lo) / (n_scan - 1) as f64;
    let scan_w: Vec<f64> = (0..n_scan).map(|i| w_lo + hs * i as f64).collect();
    let scan = sample(&scan_w)?;
    let peak = scan.iter().cloned().fold(0.0, f64::max);
    let (a, b) = if peak > 0.0 {
        let thr = settings.threshold * peak;
        let first = scan.iter().position(|&v| v > thr).unwrap_or(0);
        let last = scan.iter().rposition(|&v| v > thr).unwrap_or(n_scan - 1);
        (
            scan_w[first.saturating_sub(1)],
            scan_w[(last + 1).min(n_scan - 1)],
        )
    } else {
        (w_lo, w_hi)
    };

    // Trapezoid rule refined by interval doubling, reusing earlier samples.
    let mut n = settings.initial_intervals.max(2);
    let mut h = (b - a) / n as f64;
    let grid0: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
    let f0 = sample(&grid0)?;
    let mut sum = 0.5 * (f0[0] + f0[n]) + f0[1..n].iter().sum::<f64>();
    let mut estimate = sum * h;
    let mut converged = false;
    let mut previous = estimate;
    for _ in 0..settings.max_doublings {
        let mids: Vec<f64> = (0..n).map(|i| a + h * (i as f64 + 0.5)).collect();
        sum += sample(&mids)?.iter().sum::<f64>();
        n *= 2;
        h /= 2.0;
        previous = estimate;
        estimate = sum * h;
        if (estimate - previous).abs() <= settings.rel_tol * estimate.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            doublings: settings.max_doublings,
            previous,
            last: estimate,
        });
    }
    let rate = params.prefactor() * estimate;
    let to_nm = |w: f64| 2.0 * PI * C_SI / w * 1e9;
    Ok(RateReport {
        rate_per_s_per_mw: rate / (params.power_w * 1e3),
        band_nm: [to_nm(b), to_nm(a)],
        quadrature_points: n + 1,
        converged,
        rate_per_s: rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poling::{transfer, Sign};
    use approx::assert_relative_eq;

    const L: f64 = 30.0e6;
    const PERIOD: f64 = 14998.9;

    fn model() -> DispersionModel {
        DispersionModel::default()
    }

    #[test]
    fn pump_field_matches_quoted_value() {
        let p = RateParams::default();
        assert!((p.pump_field() / 4666.6 - 1.0).abs() < 0.01);
    }

    #[test]
    fn miller_identity_and_sign() {
        let m = model();
        let t = (1603.8, 3207.6, 3207.6);
        assert_eq!(miller_scaled_deff(-4.6, t, t, &m).unwrap(), -4.6);
        let d = miller_scaled_deff(-4.6, (532.0, 1064.0, 1064.0), t, &m).unwrap();
        assert!(d < 0.0 && d > -4.6);
        assert!(miller_scaled_deff(2.0, (532.0, 1064.0, 1064.0), t, &m).unwrap() > 0.0);
        assert!(miller_scaled_deff(2.0, (300.0, 1064.0, 1064.0), t, &m).is_err());
    }

    #[test]
    fn unpoled_crystal_cancels_on_full_periods() {
        let seq = DomainSequence::from_signs(std::iter::repeat_n(Sign::Up, 4000), PERIOD / 2.0, 2.0 * PI / PERIOD);
        let total = seq.total_length();
        let k = 2.0 * PI * 1000.0 / total;
        assert!(transfer(&seq, k).norm() < 1e-6 * total);
    }

    #[test]
    fn transfer_integral_is_conjugate_symmetric_and_in_metres() {
        let seq = DomainSequence::periodic(L, PERIOD).unwrap();
        let m = model();
        let wp = 2.0 * PI * C_SI / (1603.8e-9);
        let t = transfer_integral(&seq, wp / 2.0, 1603.8, &m).unwrap();
        let k = mismatch_at(&m, wp / 2.0, 1603.8).unwrap();
        let direct = transfer(&seq, k);
        assert_relative_eq!(t.re, direct.re * 1e-9, max_relative = 1e-12);
        assert_relative_eq!(t.im, -direct.im * 1e-9, max_relative = 1e-12);
        // First-order QPM amplitude 2L/π at the degenerate point.
        assert!((t.norm() / (2.0 * seq.total_length() * 1e-9 / PI) - 1.0).abs() < 0.05);
        let e = TransferEvaluator::new(&seq);
        assert!((e.at(-k) - e.at(k).conj()).norm() < 1e-9 * e.at(k).norm());
        assert!(transfer_integral(&seq, 2.0 * wp, 1603.8, &m).is_err());
    }

    #[test]
    fn rate_scaling_laws() {
        let seq = DomainSequence::periodic(L, PERIOD).unwrap();
        let m = model();
        let s = QuadratureSettings::default();
        let p = RateParams::default();
        let r1 = pair_rate(&seq, &p, &m, &s).unwrap();
        assert!(r1.converged);
        assert!(r1.band_nm[0] < 3207.6 && r1.band_nm[1] > 3207.6);
        let p2 = RateParams {
            power_w: 2.0 * p.power_w,
            ..p.clone()
        };
        let r2 = pair_rate(&seq, &p2, &m, &s).unwrap();
        assert_relative_eq!(r2.rate_per_s, 2.0 * r1.rate_per_s, max_relative = 1e-12);
        let pd = RateParams {
            d_eff_pm_per_v: 2.0 * p.d_eff_pm_per_v,
            ..p.clone()
        };
        let rd = pair_rate(&seq, &pd, &m, &s).unwrap();
        assert_relative_eq!(rd.rate_per_s, 4.0 * r1.rate_per_s, max_relative = 1e-12);
        let rf = pair_rate(&seq.flipped(), &p, &m, &s).unwrap();
        assert_relative_eq!(rf.rate_per_s, r1.rate_per_s, max_relative = 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        let m = model();
        let seq = DomainSequence::periodic(L, PERIOD).unwrap();
        let bad = RateParams {
            power_w: 0.0,
            ..RateParams::default()
        };
        assert!(pair_rate(&seq, &bad, &m, &QuadratureSettings::default()).is_err());
        let empty = DomainSequence::from_signs(Vec::new(), 1.0, 1.0);
        assert!(pair_rate(&empty, &RateParams::default(), &m, &QuadratureSettings::default()).is_err());
        let strict = QuadratureSettings {
            initial_intervals: 4,
            max_doublings: 1,
            rel_tol: 1e-12,
            ..QuadratureSettings::default()
        };
        assert!(matches!(
            pair_rate(&seq, &RateParams::default(), &m, &strict),
            Err(Error::Convergence { .. })
        ));
    }
}
