//! Domain sequences: greedy synthesis against a target amplitude curve and
//! reconstruction of the phase-matching function they produce.
//!
//! The transfer integral of a sequence is `T(k) = ∫χ̄(z)e^{ikz}dz` with χ̄ = ±1 per
//! domain; the phase-matching function is |T(k)|, optionally sign-flipped in a
//! window around the carrier.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::interp_uniform;
use crate::target::AmplitudeTable;
use crate::{Error, Result};

/// Orientation of one ferroelectric domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Up,
    Down,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Up => 1.0,
            Sign::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Up => Sign::Down,
            Sign::Down => Sign::Up,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Up => "+1",
            Sign::Down => "-1",
        })
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "+1" | "1" => Ok(Sign::Up),
            "-1" => Ok(Sign::Down),
            other => Err(format!("invalid domain sign {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub sign: Sign,
    /// Width in nm.
    pub width: f64,
}

/// Ordered list of domains along the crystal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSequence {
    pub domains: Vec<Domain>,
    /// Nominal domain width L_c in nm.
    pub nominal_width: f64,
    /// Carrier wavevector k₀ in rad/nm.
    pub carrier: f64,
}

impl DomainSequence {
    /// Build from signs, every domain at the nominal width.
    pub fn from_signs(signs: impl IntoIterator<Item = Sign>, nominal_width: f64, carrier: f64) -> Self {
        Self {
            domains: signs
                .into_iter()
                .map(|sign| Domain {
                    sign,
                    width: nominal_width,
                })
                .collect(),
            nominal_width,
            carrier,
        }
    }

    /// Periodically poled crystal: alternating domains of width Λ/2, starting with +1.
    pub fn periodic(length: f64, period: f64) -> Result<Self> {
        let (lc, n) = Self::layout(length, period)?;
        let signs = (0..n).map(|j| if j % 2 == 0 { Sign::Up } else { Sign::Down });
        Ok(Self::from_signs(signs, lc, 2.0 * std::f64::consts::PI / period))
    }

    /// Unpoled crystal cut into the same domain grid, all +1.
    pub fn unpoled(length: f64, period: f64) -> Result<Self> {
        let (lc, n) = Self::layout(length, period)?;
        Ok(Self::from_signs(
            std::iter::repeat_n(Sign::Up, n),
            lc,
            2.0 * std::f64::consts::PI / period,
        ))
    }

    fn layout(length: f64, period: f64) -> Result<(f64, usize)> {
        if !(period > 0.0 && length > period && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need crystal length > period > 0, got L = {length} nm, period = {period} nm"
            )));
        }
        let lc = period / 2.0;
        Ok((lc, (length / lc).floor() as usize))
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.domains.iter().map(|d| d.width).sum()
    }

    pub fn signs(&self) -> impl Iterator<Item = Sign> + '_ {
        self.domains.iter().map(|d| d.sign)
    }

    /// Domain boundary positions z₀ = 0, z₁, …, z_N in nm.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.domains.len() + 1);
        let mut acc = 0.0;
        z.push(acc);
        for d in &self.domains {
            acc += d.width;
            z.push(acc);
        }
        z
    }

    /// Every sign reversed.
    pub fn flipped(&self) -> Self {
        let mut s = self.clone();
        for d in &mut s.domains {
            d.sign = d.sign.flipped();
        }
        s
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.domains.extend_from_slice(&other.domains);
        s
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((j, d)) = self
            .domains
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.width > 0.0 && d.width.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "domain {} has width {} nm",
                j + 1,
                d.width
            )));
        }
        if !(self.nominal_width > 0.0 && self.carrier > 0.0) {
            return Err(Error::InvalidParameter(
                "nominal width and carrier must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Plain-text form: two header lines, then `<sign> <width_nm>` per domain.
    /// Floats are written in shortest round-trip form so reloading is bit-exact.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(24 * self.domains.len() + 64);
        s.push_str(&format!("# L_c_nm={}\n", self.nominal_width));
        s.push_str(&format!("# k0_rad_per_nm={}\n", self.carrier));
        for d in &self.domains {
            s.push_str(&format!("{} {}\n", d.sign, d.width));
        }
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Format {
            path: path.into(),
            line,
            message,
        };
        let mut lc = None;
        let mut k0 = None;
        let mut domains = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(h) = t.strip_prefix('#') {
                if let Some((key, val)) = h.trim().split_once('=') {
                    let v: f64 = val
                        .trim()
                        .parse()
                        .map_err(|_| bad(line, format!("bad header value {val:?}")))?;
                    match key.trim() {
                        "L_c_nm" => lc = Some(v),
                        "k0_rad_per_nm" => k0 = Some(v),
                        _ => {}
                    }
                }
                continue;
            }
            let mut parts = t.split_whitespace();
            let (Some(sg), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(line, "expected `<sign> <width_nm>`".into()));
            };
            let sign: Sign = sg.parse().map_err(|e| bad(line, e))?;
            let width: f64 = w
                .parse()
                .map_err(|_| bad(line, format!("bad width {w:?}")))?;
            domains.push(Domain { sign, width });
        }
        let seq = DomainSequence {
            domains,
            nominal_width: lc.ok_or_else(|| bad(0, "missing `# L_c_nm=` header".into()))?,
            carrier: k0.ok_or_else(|| bad(0, "missing `# k0_rad_per_nm=` header".into()))?,
        };
        seq.validate().map_err(|e| bad(0, e.to_string()))?;
        Ok(seq)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

/// ∫ sign·e^{ikz} dz over domain j (1-based) of width `l_c`.
///
/// Equals `sign·e^{ijkL_c}(1 − e^{−ikL_c})/(ik)`; the removable singularity at
/// k = 0 is handled by its series, giving `sign·L_c` in the limit.
pub fn domain_step_contribution(j: usize, sign: Sign, k: f64, l_c: f64) -> Complex64 {
    let x = k * l_c;
    let centre = Complex64::from_polar(1.0, k * l_c * (j as f64 - 0.5));
    let sinc = if x.abs() < 1e-8 {
        1.0 - x * x / 24.0
    } else {
        (x / 2.0).sin() / (x / 2.0)
    };
    sign.value() * l_c * sinc * centre
}

/// Amplitude increment of domain j used by the tracker: −i times the domain
/// integral, which is real (−1)^j·(−2)/k₀ when k₀L_c = π.
pub fn tracking_step(j: usize, k0: f64, l_c: f64) -> Complex64 {
    -Complex64::i() * domain_step_contribution(j, Sign::Up, k0, l_c)
}

/// Greedy synthesis: for each domain choose the sign that brings the
/// accumulated amplitude closest to the target at the domain's far boundary.
/// `targets[j - 1]` is the target at z = j·L_c. Ties go to the sign opposite
/// the previous domain, with a virtual −1 before the first.
pub fn track_values(targets: &[Complex64], k0: f64, l_c: f64) -> DomainSequence {
    let mut a = Complex64::new(0.0, 0.0);
    let mut prev = Sign::Down;
    let mut signs = Vec::with_capacity(targets.len());
    for (idx, t) in targets.iter().enumerate() {
        let step = tracking_step(idx + 1, k0, l_c);
        let up = (a + step - t).norm();
        let down = (a - step - t).norm();
        let sign = if up < down {
            Sign::Up
        } else if down < up {
            Sign::Down
        } else {
            prev.flipped()
        };
        a += sign.value() * step;
        signs.push(sign);
        prev = sign;
    }
    DomainSequence::from_signs(signs, l_c, k0)
}

/// Greedy synthesis against a tabulated real target amplitude.
pub fn track_domains(table: &AmplitudeTable, k0: f64) -> DomainSequence {
    let targets: Vec<Complex64> = table.values[1..]
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    track_values(&targets, k0, table.domain_width)
}

/// Amplitude A(j·L_c) accumulated by a sequence of nominal-width domains, j = 1..=N.
pub fn accumulated_amplitude(seq: &DomainSequence) -> Vec<Complex64> {
    let mut a = Complex64::new(0.0, 0.0);
    seq.signs()
        .enumerate()
        .map(|(i, s)| {
            a += s.value() * tracking_step(i + 1, seq.carrier, seq.nominal_width);
            a
        })
        .collect()
}

/// Transfer integral ∫χ̄(z)e^{ikz}dz of a sequence at one k (rad/nm), in nm.
pub fn transfer(seq: &DomainSequence, k: f64) -> Complex64 {
    TransferEvaluator::new(seq).at(k)
}

/// Precomputed boundary terms for repeated transfer-integral evaluation.
#[derive(Clone, Debug)]
pub struct TransferEvaluator {
    terms: Vec<(f64, f64)>,
    domains: Vec<(f64, f64, f64)>,
    nominal_width: f64,
}

impl TransferEvaluator {
    pub fn new(seq: &DomainSequence) -> Self {
        let z = seq.boundaries();
        let terms = boundary_weights(seq)
            .into_iter()
            .zip(z.iter().copied())
            .filter(|(w, _)| *w != 0.0)
            .collect();
        let domains = seq
            .domains
            .iter()
            .zip(&z)
            .map(|(d, &z0)| (d.sign.value(), z0, d.width))
            .collect();
        Self {
            terms,
            domains,
            nominal_width: seq.nominal_width,
        }
    }

    /// ∫χ̄(z)e^{ikz}dz in nm.
    pub fn at(&self, k: f64) -> Complex64 {
        if (k * self.nominal_width).abs() < 1e-8 {
            // Direct per-domain form avoids the 1/k cancellation near k = 0.
            return self
                .domains
                .iter()
                .map(|&(g, z0, w)| g * w * Complex64::from_polar(1.0, k * (z0 + w / 2.0)))
                .sum();
        }
        let s: Complex64 = self
            .terms
            .iter()
            .map(|&(w, zb)| {
                let (sn, cs) = (k * zb).sin_cos();
                Complex64::new(w * cs, w * sn)
            })
            .sum();
        s / Complex64::new(0.0, k)
    }
}

/// Coefficient of e^{ikz_b} at each boundary: g_b − g_{b+1} with zero outside.
fn boundary_weights(seq: &DomainSequence) -> Vec<f64> {
    let g: Vec<f64> = seq.signs().map(Sign::value).collect();
    let n = g.len();
    (0..=n)
        .map(|b| {
            let left = if b == 0 { 0.0 } else { g[b - 1] };
            let right = if b == n { 0.0 } else { g[b] };
            // ∫ over domain b is (E_b − E_{b−1})/(ik), so E_b collects g_b − g_{b+1}.
            left - right
        })
        .collect()
}

/// Uniform grid of wavevectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl KGrid {
    /// `len` points from `lo` to `hi` inclusive.
    pub fn new(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if len < 2 || !(hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "k grid needs hi > lo and at least 2 points, got [{lo}, {hi}] with {len}"
            )));
        }
        Ok(Self {
            start: lo,
            step: (hi - lo) / (len - 1) as f64,
            len,
        })
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }
}

/// Phase-matching function of a sequence sampled on a uniform k grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AchievedPmf {
    pub grid: KGrid,
    /// Transfer integral at every grid point, nm.
    pub transfer: Vec<Complex64>,
    /// Half-width of the sign window around the carrier, rad/nm.
    pub omega: Option<f64>,
    pub carrier: f64,
    profile: Vec<f64>,
}

impl AchievedPmf {
    /// Real PMF samples: |T(k)|, negated inside the sign window.
    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    /// Linear interpolation of the real PMF.
    pub fn value(&self, k: f64) -> Result<f64> {
        interp_uniform(&self.profile, self.grid.start, self.grid.step, k)
    }
}

const CHUNK: usize = 256;

/// Evaluate the phase-matching function of `seq` on a uniform k grid.
///
/// Runs in O(M·N) with a phasor recurrence along k per domain boundary,
/// parallelised over blocks of k.
pub fn achieved_pmf(seq: &DomainSequence, grid: KGrid, omega: Option<f64>) -> Result<AchievedPmf> {
    if grid.start <= 0.0 && grid.end() >= 0.0 {
        return Err(Error::ExcludedPoint);
    }
    let k0 = seq.carrier;
    let (lo, hi) = (0.9 * k0, 1.1 * k0);
    for k in [grid.start, grid.end()] {
        if !(k >= lo && k <= hi) {
            return Err(Error::OutOfRange {
                what: "k",
                value: k,
                lo,
                hi,
            });
        }
    }
    let z = seq.boundaries();
    let w = boundary_weights(seq);
    let terms: Vec<(f64, f64)> = w
        .into_iter()
        .zip(z)
        .filter(|(w, _)| *w != 0.0)
        .collect();

    let mut transfer = vec![Complex64::new(0.0, 0.0); grid.len];
    transfer
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, out)| {
            let m0 = c * CHUNK;
            let k_first = grid.at(m0);
            for &(wb, zb) in &terms {
                let mut p = Complex64::from_polar(wb, k_first * zb);
                let r = Complex64::from_polar(1.0, grid.step * zb);
                for o in out.iter_mut() {
                    *o += p;
                    p *= r;
                }
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o /= Complex64::new(0.0, grid.at(m0 + i));
            }
        });

    let profile = transfer
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let k = grid.at(i);
            match omega {
                Some(om) if (k - k0).abs() < om => -t.norm(),
                _ => t.norm(),
            }
        })
        .collect();
    Ok(AchievedPmf {
        grid,
        transfer,
        omega,
        carrier: k0,
        profile,
    })
}
