//! Closed-form Gaussian width of the descent set of the weighted `l1`
//! problem with the support on the last `k` coordinates.

use crate::roots::bisect;

/// What a coordinate contributes to the width problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    /// Off the support and penalized: enters through `max(h - nu, 0)`.
    Head,
    /// On the support and penalized: enters through `h + nu`.
    Unknown,
    /// Unpenalized: enters as `h^2` whatever `nu` is.
    Free,
}

/// Roles for the partial model: `n - k` head, `k - known` unknown, `known` free.
pub(crate) fn partial_roles(n: usize, k: usize, known: usize) -> Vec<Role> {
    let mut roles = vec![Role::Head; n - k];
    roles.extend(std::iter::repeat_n(Role::Unknown, k - known));
    roles.extend(std::iter::repeat_n(Role::Free, known));
    roles
}

/// Roles for the hidden model: the `k - known` wrong indices of the side
/// information sit just below the support and are free.
pub(crate) fn hidden_roles(n: usize, k: usize, known: usize) -> Vec<Role> {
    let wrong = k - known;
    let mut roles = vec![Role::Head; n - k - wrong];
    roles.extend(std::iter::repeat_n(Role::Free, wrong));
    roles.extend(std::iter::repeat_n(Role::Unknown, k - known));
    roles.extend(std::iter::repeat_n(Role::Free, known));
    roles
}

/// `h` with absolute values off the support and negated on it.
pub(crate) fn signed_h(h: &[f64], k: usize) -> Vec<f64> {
    let split = h.len() - k;
    h.iter()
        .enumerate()
        .map(|(i, v)| if i < split { v.abs() } else { -v })
        .collect()
}

pub(crate) fn width_for_roles(hbar: &[f64], roles: &[Role]) -> f64 {
    debug_assert_eq!(hbar.len(), roles.len());
    let value = |nu: f64| -> f64 {
        hbar.iter()
            .zip(roles)
            .map(|(h, r)| match r {
                Role::Head => (h - nu).max(0.0).powi(2),
                Role::Unknown => (h + nu).powi(2),
                Role::Free => h * h,
            })
            .sum()
    };
    // Half the derivative in nu; non-decreasing.
    let slope = |nu: f64| -> f64 {
        hbar.iter()
            .zip(roles)
            .map(|(h, r)| match r {
                Role::Head => -(h - nu).max(0.0),
                Role::Unknown => h + nu,
                Role::Free => 0.0,
            })
            .sum()
    };
    if slope(0.0) >= 0.0 {
        return value(0.0).sqrt();
    }
    let head_max = hbar
        .iter()
        .zip(roles)
        .filter(|(_, r)| **r == Role::Head)
        .fold(0.0_f64, |acc, (h, _)| acc.max(*h));
    if !roles.contains(&Role::Unknown) {
        // Slope stays negative until every head term has vanished.
        return value(head_max).sqrt();
    }
    let mut hi = head_max.max(1.0);
    while slope(hi) < 0.0 {
        hi *= 2.0;
    }
    let nu = bisect("width multiplier", slope, 0.0, hi, 1e-15 * hi).unwrap_or(hi);
    value(nu).sqrt()
}

/// Gaussian width of the partial model's descent set for one Gaussian
/// vector `h`, with `k` support coordinates of which `eta_count` are known.
pub fn gaussian_width_closed_form(h: &[f64], k: usize, eta_count: usize) -> f64 {
    let n = h.len();
    assert!(n >= k && k >= eta_count, "need n >= k >= eta_count");
    width_for_roles(&signed_h(h, k), &partial_roles(n, k, eta_count))
}

/// Hidden-model counterpart: `known` is the number of correct indices in
/// the side information, and the `k - known` wrong ones are unpenalized.
pub fn gaussian_width_hidden(h: &[f64], k: usize, known: usize) -> f64 {
    let n = h.len();
    assert!(k >= known && n >= 2 * k - known, "need k >= known and n >= 2k - known");
    width_for_roles(&signed_h(h, k), &hidden_roles(n, k, known))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vector() {
        assert_eq!(gaussian_width_closed_form(&[0.0; 10], 3, 1), 0.0);
        assert_eq!(gaussian_width_hidden(&[0.0; 10], 3, 1), 0.0);
    }

    #[test]
    fn bounded_by_norm() {
        let h: Vec<f64> = (0..20).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..=10 {
            for known in 0..=k {
                assert!(gaussian_width_closed_form(&h, k, known) <= norm + 1e-12);
            }
        }
    }

    #[test]
    fn hand_example() {
        // head |h| = (3, 1), unknown -h = (1), no free part.
        // F(nu) = (3-nu)^2 + (1-nu)_+^2 + (1+nu)^2, minimized at nu = 1.
        let w = gaussian_width_closed_form(&[3.0, -1.0, -1.0], 1, 0);
        assert!((w - 8.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn roles_layout() {
        use Role::*;
        assert_eq!(partial_roles(5, 3, 1), vec![Head, Head, Unknown, Unknown, Free]);
        assert_eq!(hidden_roles(7, 3, 1), vec![Head, Head, Free, Free, Unknown, Unknown, Free]);
    }

    #[test]
    fn fully_known_support() {
        // All support free: only nu >= max head removes the head.
        let h = [2.0, -0.5, 0.3, 0.4];
        let w = gaussian_width_closed_form(&h, 2, 2);
        assert!((w - 0.25_f64.sqrt()).abs() < 1e-12);
    }
}
