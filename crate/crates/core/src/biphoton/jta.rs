use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::JsaGrid;

/// Joint temporal amplitude on a centred time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct JtaGrid {
    /// Time samples in fs, shared by both axes.
    pub times_fs: Vec<f64>,
    pub dt_fs: f64,
    /// Row = signal time, column = idler time.
    pub amplitude: DMatrix<Complex64>,
}

impl JtaGrid {
    /// Σ|g|²·Δt².
    pub fn norm_sq(&self) -> f64 {
        self.amplitude.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dt_fs * self.dt_fs
    }

    pub fn modulus(&self) -> DMatrix<f64> {
        self.amplitude.map(|c| c.norm())
    }
}

/// 2-D inverse Fourier transform `g(t_s, t_i) = (1/2π)∬f e^{i(ω_s t_s + ω_i t_i)}dω_s dω_i`
/// with both frequency origins at the grid centre.
///
/// The input is reordered so frequency increases along each axis; the carrier
/// phase of the centre frequency is dropped. Time samples are
/// `(n − M/2)·Δt` with Δt = 2π/(M·Δω), and Σ|g|²Δt² = Σ|f|²Δω².
pub fn jta_from_jsa(jsa: &JsaGrid) -> JtaGrid {
    let m = jsa.grid.size;
    let dw = jsa.grid.d_omega();
    let dt = 2.0 * PI / (m as f64 * dw);
    let checker = |a: usize, b: usize| if (a + b).is_multiple_of(2) { 1.0 } else { -1.0 };

    // Row-major working buffer with ω increasing (wavelength index reversed).
    let mut buf: Vec<Complex64> = (0..m * m)
        .map(|idx| {
            let (r, c) = (idx / m, idx % m);
            jsa.amplitude[(m - 1 - r, m - 1 - c)] * checker(r, c)
        })
        .collect();

    let fft = FftPlanner::new().plan_fft_inverse(m);
    for row in buf.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for c in 0..m {
        for r in 0..m {
            col[r] = buf[r * m + c];
        }
        fft.process(&mut col);
        for r in 0..m {
            buf[r * m + c] = col[r];
        }
    }

    let scale = dw * dw / (2.0 * PI);
    let amplitude = DMatrix::from_fn(m, m, |r, c| buf[r * m + c] * scale * checker(r, c));
    let times_fs = (0..m).map(|n| (n as f64 - (m / 2) as f64) * dt).collect();
    JtaGrid {
        times_fs,
        dt_fs: dt,
        amplitude,
    }
}
