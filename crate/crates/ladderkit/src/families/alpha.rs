//! Closed form of the shift constants.
//!
//! The chain constants obey `alpha_{k+1} = alpha_k + (alpha_1 - alpha_0)
//! + k (alpha_2 - 2 alpha_1 + alpha_0)`, so three anchor values determine
//! the whole sequence:
//! `alpha_k = alpha_0 + k (alpha_1 - alpha_0) + k(k-1)/2 (alpha_2 - 2 alpha_1 + alpha_0)`.

/// Evaluates the closed form at a (possibly negative) level index.
pub fn alpha_closed_form(alpha: [f64; 3], k: i64) -> f64 {
    let kf = k as f64;
    let slope = alpha[1] - alpha[0];
    let curvature = alpha[2] - 2.0 * alpha[1] + alpha[0];
    alpha[0] + kf * slope + kf * (kf - 1.0) / 2.0 * curvature
}

/// Table `alpha_0..=alpha_top`.
pub fn alpha_table(alpha: [f64; 3], top: usize) -> Vec<f64> {
    (0..=top).map(|k| alpha_closed_form(alpha, k as i64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_curvature_is_linear() {
        for k in -5..=20 {
            assert_eq!(alpha_closed_form([0.0, 1.0, 2.0], k), k as f64);
        }
    }

    #[test]
    fn anchor_is_returned_at_zero() {
        assert_eq!(alpha_closed_form([3.25, -1.0, 7.0], 0), 3.25);
    }

    #[test]
    fn descending_linear_case() {
        assert_eq!(alpha_closed_form([0.0, -1.0, -2.0], 5), -5.0);
    }

    #[test]
    fn closed_form_satisfies_the_recurrence() {
        let a = [0.5, 0.25, 2.0];
        let slope = a[1] - a[0];
        let curv = a[2] - 2.0 * a[1] + a[0];
        let mut current = a[0];
        for k in 0..50usize {
            assert!(
                (alpha_closed_form(a, k as i64) - current).abs() <= 1e-12,
                "level {k}"
            );
            current += slope + k as f64 * curv;
        }
    }
}
