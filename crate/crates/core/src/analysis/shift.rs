use crate::interaction::interpolated_shift;
use crate::wiener::{metric_d, SamplePath, GRID_TOL};
use crate::{Error, Result};

/// `D(θ_t ω, θ̄ʰ_t ω)` truncated at `n_terms`, for each `h` in `h_list`.
pub fn shift_convergence_test(
    omega: &SamplePath,
    t: f64,
    h_list: &[f64],
    n_terms: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(t >= 0.0) {
        return Err(Error::config(format!("shift time must be nonnegative, got {t}")));
    }
    let needed = t + n_terms as f64 + 1.0;
    if omega.horizon() < needed * (1.0 - GRID_TOL) {
        return Err(Error::OutOfDomain {
            t: needed,
            horizon: omega.horizon(),
        });
    }
    let exact = omega.shift(t)?;
    h_list
        .iter()
        .map(|&h| {
            let approx = interpolated_shift(omega, h, t)?;
            Ok((h, metric_d(&exact, &approx, n_terms)?))
        })
        .collect()
}

/// Values never increase along the list, up to `slack`.
pub fn is_nonincreasing(values: &[(f64, f64)], slack: f64) -> bool {
    values.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiener::{brownian_path, NoiseSpec};

    #[test]
    fn linear_ramp_is_reproduced() {
        let step = 2f64.powi(-6);
        let n = 16 * 64;
        let omega = SamplePath::from_increments(step, 1, vec![step; n]).unwrap();
        let h_list: Vec<f64> = (1..=6).map(|k| 2f64.powi(-k)).collect();
        for t in [0.0, 0.5, 1.25, 3.0] {
            for (h, d) in shift_convergence_test(&omega, t, &h_list, 10).unwrap() {
                assert!(d < 1e-12, "t={t} h={h} d={d}");
            }
        }
    }

    #[test]
    fn brownian_shift_decays() {
        let spec = NoiseSpec::new(7, 1, 2f64.powi(-10), 14.0, 1.0).unwrap();
        let omega = brownian_path(&spec, 0).unwrap();
        let h_list: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).collect();
        let values = shift_convergence_test(&omega, 1.0, &h_list, 10).unwrap();
        assert_eq!(values.last().unwrap().1, 0.0);
        let values = shift_convergence_test(&omega, 0.3, &h_list, 10).unwrap();
        assert!(values.last().unwrap().1 < 0.25 * values[0].1, "{values:?}");
    }

    #[test]
    fn short_path_is_rejected() {
        let omega = SamplePath::from_increments(0.5, 1, vec![0.1; 20]).unwrap();
        assert!(matches!(
            shift_convergence_test(&omega, 1.0, &[0.5], 10),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn nonincreasing_check() {
        assert!(is_nonincreasing(&[(1.0, 3.0), (0.5, 3.0), (0.25, 1.0)], 0.0));
        assert!(!is_nonincreasing(&[(1.0, 3.0), (0.5, 3.1)], 1e-12));
    }
}
