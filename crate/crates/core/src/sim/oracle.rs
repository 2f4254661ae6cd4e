//! Slow, generic cross-checks for the closed-form width and for the
//! LP-based failure decision.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::width::{gaussian_width_closed_form, gaussian_width_hidden, hidden_roles, partial_roles, signed_h, Role};
use crate::model::Model;

/// Euclidean projection onto the cone
/// `{y : y_head >= 0, sum_unknown y - sum_head y >= 0}` by Dykstra's
/// alternating projections between the orthant and the half-space.
fn project_cone(x: &[f64], roles: &[Role]) -> Vec<f64> {
    let a: Vec<f64> = roles
        .iter()
        .map(|r| match r {
            Role::Head => -1.0,
            Role::Unknown => 1.0,
            Role::Free => 0.0,
        })
        .collect();
    let a_sq: f64 = a.iter().map(|v| v * v).sum();
    let n = x.len();
    let mut y = x.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut prev = vec![f64::INFINITY; n];
    for _ in 0..200_000 {
        // Orthant on the head.
        let mut z: Vec<f64> = y.iter().zip(&p).map(|(a, b)| a + b).collect();
        for (zi, r) in z.iter_mut().zip(roles) {
            if *r == Role::Head {
                *zi = zi.max(0.0);
            }
        }
        for i in 0..n {
            p[i] = y[i] + p[i] - z[i];
        }
        // Half-space a^T y >= 0.
        let mut yn: Vec<f64> = z.iter().zip(&q).map(|(a, b)| a + b).collect();
        if a_sq > 0.0 {
            let dot: f64 = yn.iter().zip(&a).map(|(u, v)| u * v).sum();
            if dot < 0.0 {
                for (v, ai) in yn.iter_mut().zip(&a) {
                    *v -= dot / a_sq * ai;
                }
            }
        }
        for i in 0..n {
            q[i] = z[i] + q[i] - yn[i];
        }
        y = yn;
        let change = y.iter().zip(&prev).fold(0.0_f64, |acc, (u, v)| acc.max((u - v).abs()));
        if change <= 1e-15 {
            break;
        }
        prev.clone_from(&y);
    }
    y
}

fn project_cone_ball(x: &[f64], roles: &[Role]) -> Vec<f64> {
    let mut y = project_cone(x, roles);
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1.0 {
        for v in &mut y {
            *v /= norm;
        }
    }
    y
}

/// Width by projected-gradient ascent of `hbar^T y` over the cone
/// intersected with the unit ball, best of `restarts` random starts.
fn width_by_ascent(hbar: &[f64], roles: &[Role], restarts: usize, seed: u64) -> f64 {
    let n = hbar.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for _ in 0..restarts.max(1) {
        let start: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut y = project_cone_ball(&start, roles);
        for _ in 0..10_000 {
            let step: Vec<f64> = y.iter().zip(hbar).map(|(a, b)| a + b).collect();
            let next = project_cone_ball(&step, roles);
            let change = next.iter().zip(&y).fold(0.0_f64, |acc, (u, v)| acc.max((u - v).abs()));
            y = next;
            if change <= 1e-13 {
                break;
            }
        }
        let value: f64 = y.iter().zip(hbar).map(|(a, b)| a * b).sum();
        best = best.max(value);
    }
    best
}

/// Oracle for `gaussian_width_closed_form` (partial) or
/// `gaussian_width_hidden` (hidden; `known` correct side-information indices).
pub fn width_oracle(h: &[f64], k: usize, known: usize, model: Model, restarts: usize, seed: u64) -> f64 {
    let n = h.len();
    let roles = match model {
        Model::Partial => partial_roles(n, k, known),
        Model::HiddenPartial => hidden_roles(n, k, known),
    };
    width_by_ascent(&signed_h(h, k), &roles, restarts, seed)
}

/// One random comparison of the closed-form width with the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthCase {
    pub n: usize,
    pub k: usize,
    pub known: usize,
    pub closed_form: f64,
    pub oracle: f64,
}

impl WidthCase {
    pub fn gap(&self) -> f64 {
        (self.closed_form - self.oracle).abs()
    }
}

/// `cases` random instances of dimension `n`: a Gaussian `h`, a support
/// size in `1..=n/2` and a known count in `0..=k`, each checked against the
/// 10-restart oracle.
pub fn width_cases(model: Model, n: usize, cases: usize, seed: u64) -> Vec<WidthCase> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|case| {
            let k = rng.random_range(1..=(n / 2).max(1));
            let known = rng.random_range(0..=k);
            let h: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let closed_form = match model {
                Model::Partial => gaussian_width_closed_form(&h, k, known),
                Model::HiddenPartial => gaussian_width_hidden(&h, k, known),
            };
            let oracle = width_oracle(&h, k, known, model, 10, seed.wrapping_add(case as u64));
            WidthCase { n, k, known, closed_form, oracle }
        })
        .collect()
}

/// Outcome of the null-space test for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullSpaceCheck {
    /// `max -sum_unknown w - sum_head |w|` over the null space of `A`
    /// intersected with the unit ball. Zero when recovery succeeds.
    pub margin: f64,
    pub iterations: usize,
}

/// Evaluates the null-space condition for a planted positive support.
///
/// The maximum is computed through its dual
/// `min_{|u|_inf <= 1} || P_N (c + E u) ||`, where `P_N` projects onto the
/// null space, `c` indicates the unknown support and `E` embeds the head.
/// The dual is a box-constrained least-squares problem, solved by
/// accelerated projected gradient with restarts.
pub fn null_space_margin(a: &DMatrix<f64>, support: &[usize], unpenalized: &[usize]) -> NullSpaceCheck {
    let (_m, n) = a.shape();
    let mut role = vec![Role::Head; n];
    for &j in support {
        role[j] = Role::Unknown;
    }
    for &j in unpenalized {
        role[j] = Role::Free;
    }
    // Orthonormal basis of the row space.
    let q = a.transpose().qr().q();
    let project = |v: &DVector<f64>| -> DVector<f64> { v - &q * (q.transpose() * v) };

    let head: Vec<usize> = (0..n).filter(|j| role[*j] == Role::Head).collect();
    let c = DVector::from_fn(n, |j, _| if role[j] == Role::Unknown { 1.0 } else { 0.0 });
    let b = project(&c);
    let mut mmat = DMatrix::<f64>::zeros(n, head.len());
    for (col, &j) in head.iter().enumerate() {
        let mut e = DVector::<f64>::zeros(n);
        e[j] = 1.0;
        mmat.set_column(col, &project(&e));
    }
    let gram = mmat.transpose() * &mmat;
    let lin = mmat.transpose() * &b;
    // Evaluated on the residual itself; the expanded quadratic would lose
    // everything below ~1e-16 to cancellation.
    let objective = |u: &DVector<f64>| -> f64 { 0.5 * (&b + &mmat * u).norm_squared() };

    let clamp = |v: DVector<f64>| v.map(|x| x.clamp(-1.0, 1.0));
    let lip = gram.diagonal().sum().max(1e-300).min(1.0);
    let step = 1.0 / lip;
    let mut u = DVector::<f64>::zeros(head.len());
    let mut z = u.clone();
    let mut t = 1.0_f64;
    let mut f_u = objective(&u);
    let mut iterations = 0;
    let mut checkpoint = f_u;
    for it in 0..200_000 {
        iterations = it + 1;
        let grad = &gram * &z + &lin;
        let next = clamp(&z - step * grad);
        let f_next = objective(&next);
        if f_next > f_u {
            if t == 1.0 {
                // A plain projected-gradient step from u failed to descend:
                // u is a minimizer up to rounding.
                break;
            }
            // Function-value restart.
            t = 1.0;
            z = u.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &next + ((t - 1.0) / t_next) * (&next - &u);
        u = next;
        t = t_next;
        f_u = f_next;
        if f_u <= 1e-26 {
            break;
        }
        if it % 500 == 499 {
            // Stalled: the last 500 steps changed the value by a relative
            // 1e-12 or less.
            if checkpoint - f_u <= 1e-12 * checkpoint {
                break;
            }
            checkpoint = f_u;
        }
    }
    NullSpaceCheck {
        margin: (2.0 * f_u.max(0.0)).sqrt(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_projection_is_feasible_and_idempotent() {
        let roles = partial_roles(6, 3, 1);
        let x = [-1.0, 2.0, 0.5, -3.0, 0.1, 4.0];
        let y = project_cone(&x, &roles);
        assert!(y[..3].iter().all(|v| *v >= -1e-14));
        let slack: f64 = y[3..5].iter().sum::<f64>() - y[..3].iter().sum::<f64>();
        assert!(slack >= -1e-12);
        let y2 = project_cone(&y, &roles);
        for (a, b) in y.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn width_oracle_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in 0..10 {
            let h: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
            let closed = gaussian_width_closed_form(&h, 15, 7);
            let oracle = width_oracle(&h, 15, 7, Model::Partial, 10, case);
            assert!((closed - oracle).abs() <= 1e-6, "case {case}: {closed} vs {oracle}");
            let closed = gaussian_width_hidden(&h, 15, 10);
            let oracle = width_oracle(&h, 15, 10, Model::HiddenPartial, 10, case);
            assert!((closed - oracle).abs() <= 1e-6, "hidden case {case}: {closed} vs {oracle}");
        }
    }

    #[test]
    fn null_space_margin_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 30;
        // Plenty of rows and a tiny support: recovery holds, margin zero.
        let a = DMatrix::from_fn(25, n, |_, _| StandardNormal.sample(&mut rng));
        let check = null_space_margin(&a, &[28, 29], &[]);
        assert!(check.margin < 1e-9, "{check:?}");
        // Few rows and a large support: recovery fails, margin positive.
        let a = DMatrix::from_fn(5, n, |_, _| StandardNormal.sample(&mut rng));
        let support: Vec<usize> = (15..30).collect();
        let check = null_space_margin(&a, &support, &[]);
        assert!(check.margin > 1e-3, "{check:?}");
    }
}
