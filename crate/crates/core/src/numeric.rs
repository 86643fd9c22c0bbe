//! Small numerical building blocks shared by the physics modules.

use crate::{Error, Result};

/// `n` evenly spaced points from `a` to `b`, both ends included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| a + h * i as f64).collect()
        }
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below this the difference is round-off and further splitting cannot help.
    let noise = 64.0 * f64::EPSILON * (b - a) * (fa.abs() + flm.abs() + fm.abs() + frm.abs() + fb.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(noise) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Root of `f` in `[lo, hi]` by bisection refined with secant steps.
///
/// Requires a sign change across the bracket. Returns `None` otherwise.
pub fn bracketed_root<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fb == 0.0 {
        return Ok(Some(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        // Secant proposal, fall back to the midpoint when it leaves the
        // inner part of the bracket.
        let mut x = b - fb * (b - a) / (fb - fa);
        let margin = 0.1 * (b - a);
        if !(x > a + margin && x < b - margin) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(Some(x));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    // Final secant step inside the converged bracket.
    let x = b - fb * (b - a) / (fb - fa);
    Ok(Some(if x.is_finite() && x >= a && x <= b {
        x
    } else {
        0.5 * (a + b)
    }))
}

/// Linear interpolation on a uniform grid starting at `x0` with step `dx`.
pub fn interp_uniform(values: &[f64], x0: f64, dx: f64, x: f64) -> Result<f64> {
    let n = values.len();
    let hi = x0 + dx * (n.saturating_sub(1)) as f64;
    let t = (x - x0) / dx;
    // A little slack for round-off at the ends.
    if n < 2 || !(t >= -1e-9 && t <= (n - 1) as f64 + 1e-9) {
        return Err(Error::Coverage { k: x, lo: x0, hi });
    }
    let t = t.clamp(0.0, (n - 1) as f64);
    let i = (t.floor() as usize).min(n - 2);
    let w = t - i as f64;
    Ok(values[i] * (1.0 - w) + values[i + 1] * w)
}

/// Indices of local extrema (maxima and minima) whose absolute value
/// exceeds `rel` times the largest absolute sample.
pub fn significant_extrema(values: &[f64], rel: f64) -> Vec<usize> {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let thr = rel * peak;
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (p, c, n) = (values[i - 1], values[i], values[i + 1]);
        let is_max = c > p && c >= n;
        let is_min = c < p && c <= n;
        if (is_max || is_min) && c.abs() > thr {
            out.push(i);
        }
    }
    out
}

/// Indices of local maxima above `rel` times the global maximum.
pub fn significant_peaks(values: &[f64], rel: f64) -> Vec<usize> {
    let peak = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let thr = rel * peak;
    (1..values.len().saturating_sub(1))
        .filter(|&i| {
            values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > thr
        })
        .collect()
}

/// Sample standard deviation (n − 1 denominator). Exactly zero for fewer than
/// two values or identical values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 || values.iter().all(|v| *v == values[0]) {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_rules_integrate_sine() {
        let exact = 2.0;
        assert_relative_eq!(
            adaptive_simpson(&f64::sin, 0.0, std::f64::consts::PI, 1e-12),
            exact,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            simpson(f64::sin, 0.0, std::f64::consts::PI, 1000),
            exact,
            epsilon = 1e-10
        );
    }

    #[test]
    fn root_of_cubic() {
        let r = bracketed_root(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-13)
            .unwrap()
            .unwrap();
        assert_relative_eq!(r, 2f64.cbrt(), epsilon = 1e-12);
        assert!(bracketed_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-9)
            .unwrap()
            .is_none());
    }

    #[test]
    fn interpolation_and_coverage() {
        let v = [0.0, 1.0, 4.0];
        assert_relative_eq!(interp_uniform(&v, 0.0, 1.0, 1.5).unwrap(), 2.5);
        assert!(matches!(
            interp_uniform(&v, 0.0, 1.0, 2.5),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn extrema_counting() {
        let xs = linspace(-3.0, 3.0, 601);
        let h2: Vec<f64> = xs
            .iter()
            .map(|x| (4.0 * x * x - 2.0) * (-x * x / 2.0).exp())
            .collect();
        assert_eq!(significant_extrema(&h2, 0.05).len(), 3);
        assert_eq!(significant_peaks(&h2, 0.05).len(), 2);
    }

    #[test]
    fn sd_matches_hand_value() {
        assert_relative_eq!(sample_sd(&[1.0, 2.0, 3.0, 4.0]), (5.0f64 / 3.0).sqrt());
        assert_eq!(sample_sd(&[7.0; 5]), 0.0);
    }
}
