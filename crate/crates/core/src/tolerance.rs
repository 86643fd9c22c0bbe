//! Fabrication-resolution studies on a designed domain sequence.
//!
//! Perturbations act on the fabricated widths of an existing design; the sign
//! sequence is never re-optimized. Random widths are `L_c + γR` with
//! γ ~ U(−0.5, 0.5) drawn from ChaCha8. Run `r` uses the generator seeded with
//! the base seed on stream `r`, so every resolution sees the same γ draws and
//! shorter studies reproduce prefixes of longer ones.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::sample_sd;
use crate::poling::DomainSequence;
use crate::{Error, Result};

/// Every domain width set to `width + Δ`. Results within a few ulp of the
/// nominal width snap back to it, so opposite offsets restore a nominal-width
/// sequence exactly.
pub fn offset_sequence(seq: &DomainSequence, delta: f64) -> Result<DomainSequence> {
    let mut out = seq.clone();
    let lc = seq.nominal_width;
    for (j, d) in out.domains.iter_mut().enumerate() {
        let w = d.width + delta;
        if !(w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "offset {delta} nm gives non-positive width {w} nm for domain {}",
                j + 1
            )));
        }
        d.width = if (w - lc).abs() <= 4.0 * f64::EPSILON * lc { lc } else { w };
    }
    Ok(out)
}

/// Random widths `L_c + γR` for run `run` of a study seeded with `base_seed`.
pub fn perturb_sequence(seq: &DomainSequence, resolution_nm: f64, base_seed: u64, run: u64) -> Result<DomainSequence> {
    let lc = seq.nominal_width;
    if !(resolution_nm >= 0.0 && resolution_nm < 2.0 * lc) {
        return Err(Error::OutOfRange {
            what: "resolution R",
            value: resolution_nm,
            lo: 0.0,
            hi: 2.0 * lc,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(run);
    let mut out = seq.clone();
    for d in &mut out.domains {
        let gamma: f64 = rng.random::<f64>() - 0.5;
        d.width = lc + gamma * resolution_nm;
    }
    Ok(out)
}

/// Schmidt-number statistics at one resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub resolution_nm: f64,
    pub repetitions: usize,
    pub mean_k: f64,
    pub sd_k: f64,
    pub k_values: Vec<f64>,
    pub seed: u64,
}

/// For each resolution, evaluate `schmidt` on `reps` perturbed copies of `seq`.
///
/// Runs are evaluated in parallel and merged by run index. R = 0 has no
/// randomness, so it is evaluated once and repeated.
pub fn schmidt_statistics<F>(
    schmidt: F,
    seq: &DomainSequence,
    resolutions_nm: &[f64],
    reps: usize,
    base_seed: u64,
) -> Result<Vec<ToleranceReport>>
where
    F: Fn(&DomainSequence) -> Result<f64> + Sync,
{
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 repetitions, got {reps}")));
    }
    resolutions_nm
        .iter()
        .map(|&r| {
            let k_values: Vec<f64> = if r == 0.0 {
                let k = schmidt(&perturb_sequence(seq, 0.0, base_seed, 0)?)?;
                vec![k; reps]
            } else {
                (0..reps as u64)
                    .into_par_iter()
                    .map(|run| schmidt(&perturb_sequence(seq, r, base_seed, run)?))
                    .collect::<Result<_>>()
                    .map_err(|e| Error::Numeric(format!("tolerance run at R = {r} nm failed: {e}")))?
            };
            Ok(ToleranceReport {
                resolution_nm: r,
                repetitions: reps,
                mean_k: k_values.iter().sum::<f64>() / reps as f64,
                sd_k: sample_sd(&k_values),
                k_values,
                seed: base_seed,
            })
        })
        .collect()
}

/// Per-run CSV with columns `R_nm,rep,K`.
pub fn write_runs_csv(reports: &[ToleranceReport], path: &Path) -> Result<()> {
    let mut out = String::from("R_nm,rep,K\n");
    for r in reports {
        for (i, k) in r.k_values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", r.resolution_nm, i, k));
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poling::Sign;
    use proptest::prelude::*;

    fn seq() -> DomainSequence {
        DomainSequence::from_signs(
            (0..200).map(|j| if j % 3 == 0 { Sign::Up } else { Sign::Down }),
            7499.45,
            2.0 * std::f64::consts::PI / 14998.9,
        )
    }

    #[test]
    fn offsets() {
        let s = seq();
        assert_eq!(offset_sequence(&s, 0.0).unwrap(), s);
        let up = offset_sequence(&s, 100.0).unwrap();
        assert!(up.domains.iter().all(|d| d.width == 7599.45));
        assert_eq!(up.signs().collect::<Vec<_>>(), s.signs().collect::<Vec<_>>());
        assert!(offset_sequence(&s, -8000.0).is_err());
    }

    #[test]
    fn perturbation_contract() {
        let s = seq();
        assert_eq!(perturb_sequence(&s, 0.0, 7, 3).unwrap(), s);
        let a = perturb_sequence(&s, 400.0, 7, 3).unwrap();
        let b = perturb_sequence(&s, 400.0, 7, 3).unwrap();
        let c = perturb_sequence(&s, 400.0, 8, 3).unwrap();
        let d = perturb_sequence(&s, 400.0, 7, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert!(a.domains.iter().all(|d| (d.width - 7499.45).abs() <= 200.0));
        assert!(perturb_sequence(&s, 2.0 * 7499.45, 7, 0).is_err());
        assert!(perturb_sequence(&s, -1.0, 7, 0).is_err());
    }

    #[test]
    fn statistics_are_deterministic_and_prefix_stable() {
        let s = seq();
        let metric = |q: &DomainSequence| Ok(q.total_length() / q.len() as f64);
        let long = schmidt_statistics(metric, &s, &[0.0, 50.0, 400.0], 20, 11).unwrap();
        let again = schmidt_statistics(metric, &s, &[0.0, 50.0, 400.0], 20, 11).unwrap();
        assert_eq!(long, again);
        let short = schmidt_statistics(metric, &s, &[0.0, 50.0, 400.0], 10, 11).unwrap();
        for (l, sh) in long.iter().zip(&short) {
            assert_eq!(&l.k_values[..10], &sh.k_values[..]);
        }
        assert_eq!(long[0].sd_k, 0.0);
        assert!(long[2].sd_k > long[1].sd_k);
        assert!(schmidt_statistics(metric, &s, &[0.0], 1, 11).is_err());
    }

    #[test]
    fn failures_name_the_resolution() {
        let s = seq();
        let fail = |q: &DomainSequence| {
            if q.domains[0].width == q.nominal_width {
                Ok(1.0)
            } else {
                Err(Error::Numeric("boom".into()))
            }
        };
        let err = schmidt_statistics(fail, &s, &[0.0, 100.0], 4, 1).unwrap_err();
        assert!(err.to_string().contains("R = 100 nm"));
    }

    #[test]
    fn runs_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("runs.csv");
        let r = ToleranceReport {
            resolution_nm: 50.0,
            repetitions: 2,
            mean_k: 1.5,
            sd_k: 0.7,
            k_values: vec![1.0, 2.0],
            seed: 1,
        };
        write_runs_csv(&[r], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "R_nm,rep,K\n50,0,1\n50,1,2\n");
    }

    proptest! {
        #[test]
        fn opposite_offsets_restore_widths(delta in -7000.0f64..7000.0) {
            let s = seq();
            let back = offset_sequence(&offset_sequence(&s, delta).unwrap(), -delta).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn widths_stay_in_support(r in 0.0f64..1000.0, seed in any::<u64>(), run in 0u64..1000) {
            let q = perturb_sequence(&seq(), r, seed, run).unwrap();
            for d in &q.domains {
                prop_assert!(d.width >= 7499.45 - r / 2.0 && d.width <= 7499.45 + r / 2.0);
            }
        }
    }
}
