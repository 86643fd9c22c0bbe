use rayon::prelude::*;

use super::JsaGrid;
use crate::numeric::significant_extrema;

/// Two-photon coincidence probability `p(τ) = ½ − ½∬|f|²cos((ω_s − ω_i)τ)dω_s dω_i`
/// for each delay in `taus_fs`.
///
/// Evaluated exactly as `½ − ½(cᵀWc + sᵀWs)` with `W = |f|²/Σ|f|²`,
/// `c = cos(ωτ)` and `s = sin(ωτ)` on the exact sample frequencies.
pub fn hom_scan(jsa: &JsaGrid, taus_fs: &[f64]) -> Vec<f64> {
    let w = jsa.intensity();
    let total: f64 = w.iter().sum();
    let w = w / total;
    let omega = jsa.grid.omegas();
    let m = omega.len();
    taus_fs
        .par_iter()
        .map(|&tau| {
            let (s, c): (Vec<f64>, Vec<f64>) = omega.iter().map(|o| (o * tau).sin_cos()).unzip();
            let mut acc = 0.0;
            for col in 0..m {
                let column = w.column(col);
                let (mut wc, mut ws) = (0.0, 0.0);
                for row in 0..m {
                    let v = column[row];
                    wc += v * c[row];
                    ws += v * s[row];
                }
                acc += wc * c[col] + ws * s[col];
            }
            0.5 - 0.5 * acc
        })
        .collect()
}

/// Number of local extrema of `p − ½` deeper than `rel` of the largest excursion.
pub fn fringe_count(p: &[f64], rel: f64) -> usize {
    let d: Vec<f64> = p.iter().map(|v| v - 0.5).collect();
    significant_extrema(&d, rel).len()
}
