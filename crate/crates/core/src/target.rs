//! Target phase-matching functions.
//!
//! A target is described in k-space. Its inverse Fourier transform
//! `Φ(z) = (1/2π)∫φ(k)e^{ikz}dk` is a carrier `e^{ik₀z}` times a real envelope;
//! re-centring the envelope on the crystal middle and integrating it along the
//! crystal gives the field-amplitude curve A(z) that the poling tracker follows.

use std::collections::HashMap;
use std::f64::consts::{E, PI, SQRT_2};
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::numeric::{adaptive_simpson, linspace};
use crate::{Error, Result};

/// Shape of a target PMF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetShape {
    /// Order-n Hermite-Gaussian `cₙ·Hₙ(σ(k−k₀))·exp(−σ²(k−k₀)²/2)`.
    HermiteGauss { order: u32, width_nm: f64 },
    /// Sum of Gaussian teeth of width 1/ξ spaced by σ̃ and symmetric about k₀.
    /// An even tooth count puts teeth at half-integer multiples of σ̃ (no tooth
    /// on the carrier); an odd count uses integer multiples including k₀.
    Comb {
        teeth: u32,
        spacing_rad_per_nm: f64,
        tooth_width_nm: f64,
    },
    /// Sampled PMF, linearly interpolated and zero outside the samples.
    Tabulated {
        k: Vec<f64>,
        amplitude: Vec<f64>,
        scale: f64,
    },
}

/// A target PMF around carrier `carrier` (rad/nm) for a crystal of `length` nm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub shape: TargetShape,
    pub carrier: f64,
    pub length: f64,
}

/// Scale of the tracked amplitude for Hermite-Gaussian targets relative to σ.
fn hg_coefficient(width: f64) -> f64 {
    2.0 * E.sqrt() * width / PI
}

/// Scale of the tracked amplitude for comb targets.
fn comb_coefficient(length: f64, spacing: f64) -> f64 {
    5.0e4 * length * spacing / PI
}

/// Physicists' Hermite polynomial Hₙ(x).
pub fn hermite(n: u32, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    match n {
        0 => h0,
        _ => {
            for m in 1..n {
                let h2 = 2.0 * x * h1 - 2.0 * m as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// Largest |Hₙ(x)e^{−x²/2}| found on a dense scan.
fn hermite_function_peak(n: u32) -> f64 {
    let reach = (2.0 * n as f64 + 1.0).sqrt() + 2.0;
    linspace(-reach, reach, 200_001)
        .into_iter()
        .map(|x| (hermite(n, x) * (-0.5 * x * x).exp()).abs())
        .fold(0.0, f64::max)
}

/// Prefactor cₙ of the order-n target. Order 2 uses 1/(2√2); other orders are
/// scaled to the same peak modulus.
pub fn hermite_prefactor(order: u32) -> f64 {
    let c2 = 1.0 / (2.0 * SQRT_2);
    if order == 2 {
        return c2;
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().map(|m| m.get(&order).copied()).ok().flatten() {
        return c;
    }
    // Peak of the order-2 function, 8e^{-5/4}, reached at x² = 5/2.
    let c = c2 * 8.0 * (-1.25f64).exp() / hermite_function_peak(order);
    if let Ok(mut m) = cache.lock() {
        m.insert(order, c);
    }
    c
}

impl TargetSpec {
    /// Hermite-Gaussian target with the default width σ = L/6.
    pub fn hermite_gauss(order: u32, carrier: f64, length: f64) -> Self {
        Self {
            shape: TargetShape::HermiteGauss {
                order,
                width_nm: length / 6.0,
            },
            carrier,
            length,
        }
    }

    /// Comb target with the default spacing σ̃ = k₀/400 and tooth width ξ = L/4.5.
    pub fn comb(teeth: u32, carrier: f64, length: f64) -> Self {
        Self {
            shape: TargetShape::Comb {
                teeth,
                spacing_rad_per_nm: carrier / 400.0,
                tooth_width_nm: length / 4.5,
            },
            carrier,
            length,
        }
    }

    /// Tabulated target. `scale = None` picks the amplitude scale that puts the
    /// steepest part of A(z) at half the slope a single-domain step can follow.
    pub fn tabulated(k: Vec<f64>, amplitude: Vec<f64>, scale: Option<f64>, carrier: f64, length: f64) -> Result<Self> {
        let mut spec = Self {
            shape: TargetShape::Tabulated {
                k,
                amplitude,
                scale: 1.0,
            },
            carrier,
            length,
        };
        spec.validate()?;
        let s = match scale {
            Some(s) => s,
            None => {
                let peak = linspace(-length / 2.0, length / 2.0, 2001)
                    .into_iter()
                    .map(|u| spec.envelope(u).abs())
                    .fold(0.0, f64::max);
                if peak == 0.0 {
                    return Err(Error::InvalidParameter("tabulated target is identically zero".into()));
                }
                1.0 / (PI * peak)
            }
        };
        if let TargetShape::Tabulated { scale, .. } = &mut spec.shape {
            *scale = s;
        }
        Ok(spec)
    }

    /// Read a two-column CSV (k in rad/nm, amplitude). A header row is allowed.
    pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::Format {
                    path: path.into(),
                    line: 0,
                    message: format!("{other:?}"),
                },
            })?;
        let (mut ks, mut amps) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 1;
            if rec.len() != 2 {
                return Err(Error::Format {
                    path: path.into(),
                    line,
                    message: format!("expected 2 columns, found {}", rec.len()),
                });
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(k), Ok(a)) => {
                    ks.push(k);
                    amps.push(a);
                }
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Format {
                        path: path.into(),
                        line,
                        message: "expected two numbers".into(),
                    })
                }
            }
        }
        Ok((ks, amps))
    }

    /// Check the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("carrier", self.carrier)?;
        positive("length", self.length)?;
        match &self.shape {
            TargetShape::HermiteGauss { width_nm, .. } => positive("width_nm", *width_nm),
            TargetShape::Comb {
                teeth,
                spacing_rad_per_nm,
                tooth_width_nm,
            } => {
                if *teeth == 0 {
                    return Err(Error::InvalidParameter("comb needs at least one tooth".into()));
                }
                positive("spacing_rad_per_nm", *spacing_rad_per_nm)?;
                positive("tooth_width_nm", *tooth_width_nm)
            }
            TargetShape::Tabulated { k, amplitude, scale } => {
                if k.len() < 2 || k.len() != amplitude.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated target needs at least two (k, amplitude) samples".into(),
                    ));
                }
                if k.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParameter("tabulated k must be strictly increasing".into()));
                }
                if k.iter().chain(amplitude).any(|v| !v.is_finite()) || !scale.is_finite() {
                    return Err(Error::InvalidParameter("tabulated target has non-finite values".into()));
                }
                Ok(())
            }
        }
    }

    /// Tooth offsets from the carrier in rad/nm.
    pub fn tooth_offsets(&self) -> Vec<f64> {
        match &self.shape {
            TargetShape::Comb {
                teeth,
                spacing_rad_per_nm,
                ..
            } => {
                let mid = (*teeth as f64 - 1.0) / 2.0;
                (0..*teeth)
                    .map(|m| (m as f64 - mid) * spacing_rad_per_nm)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Target PMF value φ_target(k).
    pub fn pmf(&self, k: f64) -> f64 {
        let dk = k - self.carrier;
        match &self.shape {
            TargetShape::HermiteGauss { order, width_nm } => {
                let x = width_nm * dk;
                hermite_prefactor(*order) * hermite(*order, x) * (-0.5 * x * x).exp()
            }
            TargetShape::Comb { tooth_width_nm, .. } => self
                .tooth_offsets()
                .iter()
                .map(|o| {
                    let x = tooth_width_nm * (dk - o);
                    (-0.5 * x * x).exp()
                })
                .sum(),
            TargetShape::Tabulated { k: ks, amplitude, .. } => {
                if k < ks[0] || k > ks[ks.len() - 1] {
                    return 0.0;
                }
                let i = ks.partition_point(|&x| x <= k).clamp(1, ks.len() - 1);
                let w = (k - ks[i - 1]) / (ks[i] - ks[i - 1]);
                amplitude[i - 1] * (1.0 - w) + amplitude[i] * w
            }
        }
    }

    /// Real spatial envelope at position `u` relative to the centre of the
    /// profile, carrier removed.
    ///
    /// For Hermite-Gaussian order 2 this is `(σ² − 2u²)e^{−u²/2σ²}/(2√π σ³)`;
    /// odd orders drop the constant factor i of the transform. The comb uses
    /// `(2/ξ)·e^{−u²/2ξ²}·Σcos((n+½)σ̃u)` over tooth pairs, i.e. √(2π) times the
    /// 1/(2π)-normalized transform of the tooth sum.
    pub fn envelope(&self, u: f64) -> f64 {
        match &self.shape {
            TargetShape::HermiteGauss { order, width_nm } => {
                let x = u / width_nm;
                let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign * hermite_prefactor(*order) * hermite(*order, x) * (-0.5 * x * x).exp()
                    / (width_nm * (2.0 * PI).sqrt())
            }
            TargetShape::Comb { tooth_width_nm, .. } => {
                let xi = tooth_width_nm;
                let sum: f64 = self.tooth_offsets().iter().map(|o| (o * u).cos()).sum();
                (-(u * u) / (2.0 * xi * xi)).exp() * sum / xi
            }
            TargetShape::Tabulated { k, amplitude, .. } => {
                // Trapezoid transform over the samples; real part only.
                let mut acc = 0.0;
                for i in 1..k.len() {
                    let a = amplitude[i - 1] * ((k[i - 1] - self.carrier) * u).cos();
                    let b = amplitude[i] * ((k[i] - self.carrier) * u).cos();
                    acc += 0.5 * (a + b) * (k[i] - k[i - 1]);
                }
                acc / (2.0 * PI)
            }
        }
    }

    /// Complex spatial profile Φ_target(z) with the carrier e^{ik₀z}.
    pub fn spatial(&self, z: f64) -> Complex64 {
        let phase = match &self.shape {
            TargetShape::HermiteGauss { order, .. } if order % 2 == 1 => Complex64::i(),
            _ => Complex64::new(1.0, 0.0),
        };
        phase * self.envelope(z) * Complex64::from_polar(1.0, self.carrier * z)
    }

    /// Coefficient multiplying the integrated envelope (C, C̃ or the table scale).
    pub fn amplitude_coefficient(&self) -> f64 {
        match &self.shape {
            TargetShape::HermiteGauss { width_nm, .. } => hg_coefficient(*width_nm),
            TargetShape::Comb {
                spacing_rad_per_nm, ..
            } => comb_coefficient(self.length, *spacing_rad_per_nm),
            TargetShape::Tabulated { scale, .. } => *scale,
        }
    }

    fn integrand(&self, z: f64) -> f64 {
        self.amplitude_coefficient() * self.envelope(z - 0.5 * self.length)
    }

    fn quadrature_tol(&self, span: f64) -> f64 {
        let peak = linspace(0.0, self.length, 257)
            .into_iter()
            .map(|z| self.integrand(z).abs())
            .fold(0.0, f64::max);
        1e-14 * peak * span.max(1.0)
    }

    fn closed_form_hg2(&self, z: f64) -> Option<f64> {
        match &self.shape {
            TargetShape::HermiteGauss { order: 2, width_nm } => {
                let (l, s) = (self.length, *width_nm);
                let c = hg_coefficient(s);
                let w = l - 2.0 * z;
                let r = 2.0 * SQRT_2 * s;
                Some(
                    c / (4.0 * PI.sqrt() * s)
                        * (2.0 * l * (-(l * l) / (8.0 * s * s)).exp()
                            + (-(w * w) / (8.0 * s * s)).exp() * (4.0 * z - 2.0 * l)
                            + (2.0 * PI).sqrt() * s * (erf(w / r) - erf(l / r))),
                )
            }
            _ => None,
        }
    }

    /// Target field amplitude A_target(z) for 0 ≤ z ≤ L: the envelope re-centred at
    /// L/2, integrated from 0 to z and scaled by the amplitude coefficient.
    pub fn amplitude(&self, z: f64) -> Result<f64> {
        if !(0.0..=self.length).contains(&z) {
            return Err(Error::OutOfRange {
                what: "z",
                value: z,
                lo: 0.0,
                hi: self.length,
            });
        }
        if let Some(v) = self.closed_form_hg2(z) {
            return Ok(v);
        }
        let f = |x: f64| self.integrand(x);
        Ok(adaptive_simpson(&f, 0.0, z, self.quadrature_tol(z)))
    }

    /// A_target at every domain boundary j·L_c, j = 0..=n_domains.
    pub fn amplitude_table(&self, domain_width: f64, n_domains: usize) -> Result<AmplitudeTable> {
        let end = domain_width * n_domains as f64;
        if !(domain_width > 0.0) || end > self.length * (1.0 + 1e-12) {
            return Err(Error::OutOfRange {
                what: "domain boundary",
                value: end,
                lo: 0.0,
                hi: self.length,
            });
        }
        let mut values = Vec::with_capacity(n_domains + 1);
        values.push(0.0);
        if self.closed_form_hg2(0.0).is_some() {
            for j in 1..=n_domains {
                let z = (domain_width * j as f64).min(self.length);
                values.push(self.closed_form_hg2(z).unwrap_or_default());
            }
        } else {
            let f = |x: f64| self.integrand(x);
            let tol = self.quadrature_tol(domain_width);
            let mut acc = 0.0;
            for j in 1..=n_domains {
                let a = domain_width * (j - 1) as f64;
                let b = (domain_width * j as f64).min(self.length);
                acc += adaptive_simpson(&f, a, b, tol);
                values.push(acc);
            }
        }
        Ok(AmplitudeTable {
            domain_width,
            values,
        })
    }
}

/// Target amplitude sampled at every domain boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTable {
    pub domain_width: f64,
    /// `values[j]` is A_target(j·L_c); `values[0] = 0`.
    pub values: Vec<f64>,
}

impl AmplitudeTable {
    pub fn n_domains(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn at(&self, j: usize) -> f64 {
        self.values[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{significant_peaks, simpson};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const L: f64 = 30.0e6;
    const K0: f64 = 2.0 * PI / 14998.9;

    fn hg() -> TargetSpec {
        TargetSpec::hermite_gauss(2, K0, L)
    }

    fn comb() -> TargetSpec {
        TargetSpec::comb(10, K0, L)
    }

    fn sigma() -> f64 {
        L / 6.0
    }

    #[test]
    fn hermite_polynomials() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(1, 0.3), 0.6);
        assert_relative_eq!(hermite(2, 0.3), 4.0 * 0.09 - 2.0);
        assert_relative_eq!(hermite(3, 0.3), 8.0 * 0.027 - 12.0 * 0.3);
    }

    #[test]
    fn hg2_pmf_values() {
        let t = hg();
        assert_relative_eq!(t.pmf(K0), -1.0 / SQRT_2, epsilon = 1e-15);
        let z = 1.0 / (SQRT_2 * sigma());
        assert!(t.pmf(K0 + z).abs() < 1e-10);
        assert!(t.pmf(K0 - z).abs() < 1e-10);
        for i in 1..50 {
            let d = i as f64 * 2e-8;
            assert_relative_eq!(t.pmf(K0 + d), t.pmf(K0 - d), epsilon = 1e-15);
        }
    }

    #[test]
    fn other_orders_share_the_peak_modulus() {
        let peak = |o: u32| {
            let t = TargetSpec::hermite_gauss(o, K0, L);
            linspace(K0 - 8.0 / sigma(), K0 + 8.0 / sigma(), 40_001)
                .into_iter()
                .map(|k| t.pmf(k).abs())
                .fold(0.0, f64::max)
        };
        let p2 = peak(2);
        for o in [0, 1, 3, 4] {
            assert_relative_eq!(peak(o), p2, max_relative = 1e-6);
        }
    }

    #[test]
    fn hg2_spatial_values() {
        let t = hg();
        let s = sigma();
        assert_relative_eq!(t.spatial(0.0).norm(), 1.0 / (2.0 * PI.sqrt() * s), max_relative = 1e-14);
        assert!(t.envelope(s / SQRT_2).abs() < 1e-22);
        let z = 1234.5;
        let expected = (-(z * z) / (2.0 * s * s)).exp() * (s * s - 2.0 * z * z) / (2.0 * PI.sqrt() * s.powi(3));
        assert_relative_eq!(t.envelope(z), expected, max_relative = 1e-12);
        let ph = t.spatial(z) / expected;
        assert_relative_eq!(ph.arg(), (K0 * z + PI).rem_euclid(2.0 * PI) - PI, epsilon = 1e-9);
    }

    /// Direct 1/(2π) inverse transform of a sampled PMF, carrier removed.
    fn numeric_ift(t: &TargetSpec, half: f64, n: usize, u: f64) -> f64 {
        let f = |k: f64| t.pmf(k) * ((k - t.carrier) * u).cos();
        simpson(f, t.carrier - half, t.carrier + half, n) / (2.0 * PI)
    }

    #[test]
    fn hg2_spatial_matches_numeric_transform() {
        let t = hg();
        let half = 14.0 / sigma();
        for u in [0.0, 1e6, 2.5e6, 4e6, 6e6, 9e6] {
            let num = numeric_ift(&t, half, 20_000, u);
            let env = t.envelope(u);
            assert!((num - env).abs() <= 1e-6 * t.envelope(0.0).abs(), "u={u}");
        }
    }

    #[test]
    fn comb_spatial_matches_numeric_transform_up_to_root_two_pi() {
        let t = comb();
        let TargetShape::Comb { tooth_width_nm, .. } = t.shape else { unreachable!() };
        let half = 6.0 * 1.047e-6 + 12.0 / tooth_width_nm;
        for u in [0.0, 7e5, 2e6, 3.3e6, 5e6, 1e7] {
            let num = numeric_ift(&t, half, 40_000, u) * (2.0 * PI).sqrt();
            let env = t.envelope(u);
            assert!((num - env).abs() <= 1e-6 * t.envelope(0.0).abs(), "u={u}");
        }
    }

    #[test]
    fn comb_pmf_layout() {
        let t = comb();
        let st = K0 / 400.0;
        let ks = linspace(K0 - 6.0 * st, K0 + 6.0 * st, 120_001);
        let vals: Vec<f64> = ks.iter().map(|&k| t.pmf(k)).collect();
        let peaks = significant_peaks(&vals, 0.0);
        assert_eq!(peaks.len(), 10);
        let dk = ks[1] - ks[0];
        let mut offs: Vec<f64> = peaks.iter().map(|&i| (ks[i] - K0) / st).collect();
        offs.sort_by(f64::total_cmp);
        let expected = [-4.5, -3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5, 4.5];
        for (o, e) in offs.iter().zip(expected) {
            assert!((o - e).abs() <= 2.0 * dk / st, "{o} vs {e}");
        }
        // Local minimum on the carrier.
        assert!(t.pmf(K0) < t.pmf(K0 + 0.5 * st));
        assert!(t.pmf(K0) <= t.pmf(K0 + dk) && t.pmf(K0) <= t.pmf(K0 - dk));
    }

    #[test]
    fn comb_teeth_counts_and_odd_layout() {
        for teeth in [4u32, 5, 10, 16] {
            let t = TargetSpec::comb(teeth, K0, L);
            let st = K0 / 400.0;
            let reach = (teeth as f64 / 2.0 + 1.0) * st;
            let ks = linspace(K0 - reach, K0 + reach, 60_001);
            let vals: Vec<f64> = ks.iter().map(|&k| t.pmf(k)).collect();
            assert_eq!(significant_peaks(&vals, 0.0).len(), teeth as usize);
        }
        let five = TargetSpec::comb(5, K0, L);
        let offs: Vec<f64> = five.tooth_offsets().iter().map(|o| o / (K0 / 400.0)).collect();
        for (o, e) in offs.iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
            assert_relative_eq!(*o, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn comb_spatial_values() {
        let t = comb();
        let xi = L / 4.5;
        assert_relative_eq!(t.spatial(0.0).norm(), 2.0 / xi * 5.0, max_relative = 1e-14);
        // The cosine sum Σ cos((2n+1)σ̃u/2) has period 4π/σ̃ and 2N zeros per half period.
        let st = K0 / 400.0;
        let period = 4.0 * PI / st;
        let us = linspace(1.0, period / 2.0 - 1.0, 200_001);
        let sums: Vec<f64> = us
            .iter()
            .map(|u| (0..5).map(|n| ((2 * n + 1) as f64 * st * u / 2.0).cos()).sum())
            .collect();
        let crossings = sums.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        assert_eq!(crossings, 9);
        let first = us[sums.iter().position(|&s| s < 0.0).unwrap()];
        // The sum equals sin(5θ)/(2 sin(θ/2)) with θ = σ̃u, first node at θ = π/5.
        assert_relative_eq!(first, PI / (5.0 * st), max_relative = 1e-3);
    }

    #[test]
    fn amplitude_range_and_origin() {
        for t in [hg(), comb()] {
            assert_eq!(t.amplitude(0.0).unwrap(), 0.0);
            assert!(matches!(t.amplitude(-1.0), Err(Error::OutOfRange { .. })));
            assert!(matches!(t.amplitude(L + 1.0), Err(Error::OutOfRange { .. })));
        }
    }

    #[test]
    fn hg2_closed_form_matches_trapezoid() {
        let t = hg();
        let n = 400_000;
        let zs = linspace(0.0, L, n + 1);
        let f: Vec<f64> = zs.iter().map(|&z| t.integrand(z)).collect();
        let h = L / n as f64;
        let mut cum = vec![0.0; n + 1];
        for i in 1..=n {
            cum[i] = cum[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
        }
        let scale = cum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for s in 0..64 {
            let i = (s * n) / 63;
            let a = t.amplitude(zs[i]).unwrap();
            assert!((a - cum[i]).abs() <= 1e-8 * scale, "z={} {a} {}", zs[i], cum[i]);
        }
    }

    #[test]
    fn comb_amplitude_matches_fixed_simpson() {
        let t = comb();
        let scale = linspace(0.0, L, 101)
            .into_iter()
            .map(|z| t.amplitude(z).unwrap().abs())
            .fold(0.0, f64::max);
        for z in linspace(0.0, L, 17) {
            let a = t.amplitude(z).unwrap();
            let s = simpson(|x| t.integrand(x), 0.0, z, 20_000);
            assert!((a - s).abs() <= 1e-7 * scale, "z={z}");
        }
    }

    #[test]
    fn amplitude_is_symmetric_about_the_centre() {
        for t in [hg(), comb(), TargetSpec::hermite_gauss(3, K0, L)] {
            let mid = t.amplitude(L / 2.0).unwrap();
            let scale = t.amplitude(L).unwrap().abs().max(mid.abs()).max(1.0);
            for d in linspace(0.0, L / 2.0, 13) {
                let a = t.amplitude(L / 2.0 + d).unwrap();
                let b = t.amplitude(L / 2.0 - d).unwrap();
                // Even envelopes give an odd pattern about the centre; order 3 is odd
                // so its integral is even.
                let odd = matches!(t.shape, TargetShape::HermiteGauss { order: 3, .. });
                let r = if odd { a - b } else { a + b - 2.0 * mid };
                assert!(r.abs() < 1e-9 * scale, "{r}");
            }
        }
    }

    #[test]
    fn amplitude_derivative_reproduces_envelope() {
        for t in [hg(), comb(), TargetSpec::hermite_gauss(3, K0, L)] {
            let h = L / 1e5;
            let c = t.amplitude_coefficient();
            let peak = linspace(0.0, L, 1001)
                .into_iter()
                .map(|z| (c * t.envelope(z - L / 2.0)).abs())
                .fold(0.0, f64::max);
            for z in linspace(0.05 * L, 0.95 * L, 19) {
                let d = (t.amplitude(z + h).unwrap() - t.amplitude(z - h).unwrap()) / (2.0 * h);
                let e = c * t.envelope(z - L / 2.0);
                assert!((d - e).abs() < 1e-4 * peak, "z={z} {d} {e}");
            }
        }
    }

    #[test]
    fn table_agrees_with_pointwise_amplitude() {
        let lc = 14998.9 / 2.0;
        for t in [hg(), comb()] {
            let table = t.amplitude_table(lc, 4000).unwrap();
            assert_eq!(table.n_domains(), 4000);
            let scale = table.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for j in [0, 1, 17, 1999, 2000, 3333, 4000] {
                let a = t.amplitude(lc * j as f64).unwrap();
                assert!((table.at(j) - a).abs() < 1e-9 * scale);
            }
        }
        assert!(hg().amplitude_table(7499.45, 5000).is_err());
    }

    #[test]
    fn hg2_squared_norm_matches_analytic_moment() {
        // ∫(4x²−2)²e^{−x²}dx = 8√π, so ∫|φ|²dk = 8√π/(8σ) = √π/σ.
        let t = hg();
        let s = sigma();
        let num = simpson(|k| t.pmf(k).powi(2), K0 - 12.0 / s, K0 + 12.0 / s, 20_000);
        assert_relative_eq!(num, PI.sqrt() / s, max_relative = 1e-6);
    }

    #[test]
    fn transform_round_trip() {
        // PMF → spatial envelope → PMF on a few k points.
        let t = hg();
        let s = sigma();
        for dk in [0.0, 0.3 / s, 1.0 / s, 2.2 / s] {
            let f = |u: f64| t.envelope(u) * (dk * u).cos();
            let back = simpson(f, -10.0 * s, 10.0 * s, 20_000);
            assert!((back - t.pmf(K0 + dk)).abs() < 1e-6 * t.pmf(K0).abs());
        }
    }

    #[test]
    fn tabulated_target_follows_its_samples() {
        let h = hg();
        let ks = linspace(K0 - 6e-6, K0 + 6e-6, 2001);
        let amps: Vec<f64> = ks.iter().map(|&k| h.pmf(k)).collect();
        let t = TargetSpec::tabulated(ks.clone(), amps, None, K0, L).unwrap();
        assert_relative_eq!(t.pmf(K0), h.pmf(K0), max_relative = 1e-6);
        assert_eq!(t.pmf(K0 + 1e-5), 0.0);
        for u in [0.0, 2e6, 5e6] {
            assert!((t.envelope(u) - h.envelope(u)).abs() < 1e-5 * h.envelope(0.0).abs());
        }
        assert!(TargetSpec::tabulated(vec![1.0, 0.5], vec![0.0, 1.0], None, K0, L).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut t = comb();
        t.shape = TargetShape::Comb {
            teeth: 0,
            spacing_rad_per_nm: 1e-6,
            tooth_width_nm: 1.0,
        };
        assert!(t.validate().is_err());
        let mut h = hg();
        h.length = -1.0;
        assert!(h.validate().is_err());
        assert!(hg().validate().is_ok());
    }

    proptest! {
        #[test]
        fn comb_pmf_is_symmetric(d in 0.0f64..1e-5, teeth in 1u32..12) {
            let t = TargetSpec::comb(teeth, K0, L);
            let a = t.pmf(K0 + d);
            let b = t.pmf(K0 - d);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }

        #[test]
        fn envelopes_are_even(u in 0.0f64..1.5e7, order in 0u32..5) {
            let t = TargetSpec::hermite_gauss(order, K0, L);
            prop_assert_eq!(t.envelope(u), t.envelope(-u) * if order % 2 == 1 { -1.0 } else { 1.0 });
        }
    }
}
