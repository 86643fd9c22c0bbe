//! Binary PPM (P6) rendering of real matrices.
//!
//! Values are scaled linearly from the matrix minimum (t = 0) to its maximum
//! (t = 1) and mapped through a black → red → yellow → white ramp:
//!
//! ```text
//! r = clamp(3t), g = clamp(3t − 1), b = clamp(3t − 2), each × 255 and rounded
//! ```
//!
//! Row 0 is the top image row. A constant matrix renders as t = 0.

use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Colour of a normalized value t ∈ [0, 1].
pub fn colormap(t: f64) -> [u8; 3] {
    let ch = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
    let t = t.clamp(0.0, 1.0);
    [ch(3.0 * t), ch(3.0 * t - 1.0), ch(3.0 * t - 2.0)]
}

/// PPM bytes for `data`.
pub fn render_ppm(data: &DMatrix<f64>) -> Result<Vec<u8>> {
    let bad: Vec<(usize, usize)> = (0..data.nrows())
        .flat_map(|r| (0..data.ncols()).map(move |c| (r, c)))
        .filter(|&(r, c)| !data[(r, c)].is_finite())
        .collect();
    if !bad.is_empty() {
        return Err(Error::NonFinite(bad));
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P6\n{} {}\n255\n", data.ncols(), data.nrows()).into_bytes();
    out.reserve(3 * data.len());
    for r in 0..data.nrows() {
        for c in 0..data.ncols() {
            let t = if span > 0.0 { (data[(r, c)] - lo) / span } else { 0.0 };
            out.extend_from_slice(&colormap(t));
        }
    }
    Ok(out)
}

/// Write `data` as a P6 image.
pub fn emit_heatmap(data: &DMatrix<f64>, path: &Path) -> Result<()> {
    let bytes = render_ppm(data)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_renders_to_reference_bytes() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let mut expected = b"P6\n2 2\n255\n".to_vec();
        expected.extend_from_slice(&[255, 255, 255, 0, 0, 0, 0, 0, 0, 255, 255, 255]);
        assert_eq!(render_ppm(&m).unwrap(), expected);
    }

    #[test]
    fn ramp_stops() {
        assert_eq!(colormap(0.0), [0, 0, 0]);
        assert_eq!(colormap(1.0 / 3.0), [255, 0, 0]);
        assert_eq!(colormap(0.5), [255, 128, 0]);
        assert_eq!(colormap(2.0 / 3.0), [255, 255, 0]);
        assert_eq!(colormap(1.0), [255, 255, 255]);
    }

    #[test]
    fn constant_matrix_is_uniform() {
        let bytes = render_ppm(&DMatrix::from_element(3, 5, 4.2)).unwrap();
        let header = b"P6\n5 3\n255\n".len();
        assert!(bytes[header..].iter().all(|&b| b == 0));
        assert_eq!(bytes.len(), header + 45);
    }

    #[test]
    fn rows_run_top_to_bottom() {
        let m = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let bytes = render_ppm(&m).unwrap();
        let body = &bytes[bytes.len() - 6..];
        assert_eq!(body, &[255, 255, 255, 0, 0, 0]);
    }

    #[test]
    fn non_finite_values_are_listed() {
        let mut m = DMatrix::from_element(3, 3, 1.0);
        m[(0, 2)] = f64::NAN;
        m[(2, 1)] = f64::INFINITY;
        let err = render_ppm(&m).unwrap_err();
        assert!(matches!(&err, Error::NonFinite(v) if v == &vec![(0, 2), (2, 1)]));
        assert!(err.to_string().contains("(0, 2), (2, 1)"));
    }
}
