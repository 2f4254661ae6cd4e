//! Dense two-phase primal simplex for
//! `min sum_j w_j (u_j + v_j)  s.t.  A (u - v) = y,  u, v >= 0`
//! with `w_j` in `{0, 1}`.
//!
//! The columns of `u_j` and `v_j` are negatives of each other, so only the
//! `u` half of the tableau `B^-1 A` is stored. Artificial columns are never
//! stored either: once an artificial leaves the basis it cannot come back.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots after which pricing switches to the
/// least-index rule, which cannot cycle.
const DEGENERATE_SWITCH: usize = 50;

/// Result of one weighted `l1` solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x_hat: Vec<f64>,
    /// Pivots over both phases.
    pub iterations: usize,
    pub objective: f64,
    /// `max_i |(A x_hat - y)_i|`.
    pub residual: f64,
    /// Dual feasibility of the final basis was checked and holds.
    pub certified: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Var {
    U(usize),
    V(usize),
    Art(usize),
}

impl Var {
    /// Position in the least-index order: all `u`, then all `v`, then artificials.
    fn rank(self, n: usize) -> usize {
        match self {
            Var::U(j) => j,
            Var::V(j) => n + j,
            Var::Art(r) => 2 * n + r,
        }
    }
}

struct Tableau {
    m: usize,
    n: usize,
    /// Row-major `m x n`, the `u` columns of `B^-1 A` after row sign flips.
    t: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<Var>,
    /// +1 if `u_j` is basic, -1 if `v_j` is, 0 if neither.
    basic_side: Vec<i8>,
    /// Reduced cost of each `u_j` under the current phase's costs.
    d: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn row(&self, r: usize) -> &[f64] {
        &self.t[r * self.n..(r + 1) * self.n]
    }

    /// Brings column `j` (side `s`: +1 for `u_j`, -1 for `v_j`) into the
    /// basis at row `p`.
    fn pivot(&mut self, p: usize, j: usize, s: f64, d_enter: f64) {
        let n = self.n;
        let piv = s * self.t[p * n + j];
        let inv = 1.0 / piv;
        for v in &mut self.t[p * n..(p + 1) * n] {
            *v *= inv;
        }
        self.rhs[p] *= inv;
        let (before, rest) = self.t.split_at_mut(p * n);
        let (prow, after) = rest.split_at_mut(n);
        let prhs = self.rhs[p];
        for (r, row) in before.chunks_exact_mut(n).enumerate() {
            eliminate(row, prow, j, s, &mut self.rhs[r], prhs);
        }
        for (i, row) in after.chunks_exact_mut(n).enumerate() {
            let r = p + 1 + i;
            eliminate(row, prow, j, s, &mut self.rhs[r], prhs);
        }
        if d_enter != 0.0 {
            for (dk, pk) in self.d.iter_mut().zip(prow.iter()) {
                *dk -= d_enter * pk;
            }
        }
        match self.basis[p] {
            Var::U(l) | Var::V(l) => self.basic_side[l] = 0,
            Var::Art(_) => {}
        }
        self.basis[p] = if s > 0.0 { Var::U(j) } else { Var::V(j) };
        self.basic_side[j] = if s > 0.0 { 1 } else { -1 };
        self.iterations += 1;
    }

    /// Runs simplex iterations with cost weights `w` until optimal.
    /// In phase one `w` is all zeros and `d` carries the artificial costs.
    fn optimize(&mut self, w: &[f64]) -> Result<()> {
        let n = self.n;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::NoConvergence {
                    what: "simplex",
                    iterations: self.iterations,
                    best: "iteration cap".into(),
                    value: f64::NAN,
                });
            }
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let Some((j, s, dq)) = self.price(w, bland) else {
                return Ok(());
            };
            let Some(p) = self.ratio_test(j, s, bland) else {
                return Err(Error::Infeasible(format!("unbounded direction at column {j}")));
            };
            let step = self.rhs[p].max(0.0) / (s * self.t[p * n + j]);
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(p, j, s, dq);
        }
    }

    /// Entering column: most negative reduced cost (Dantzig), or the first
    /// negative one in least-index order (Bland).
    fn price(&self, w: &[f64], bland: bool) -> Option<(usize, f64, f64)> {
        let n = self.n;
        let mut best: Option<(usize, f64, f64)> = None;
        if bland {
            // u columns precede v columns in the index order.
            for j in 0..n {
                if self.basic_side[j] == 0 && self.d[j] < -COST_TOL {
                    return Some((j, 1.0, self.d[j]));
                }
            }
            for j in 0..n {
                let dv = 2.0 * w[j] - self.d[j];
                if self.basic_side[j] == 0 && dv < -COST_TOL {
                    return Some((j, -1.0, dv));
                }
            }
            return None;
        }
        for j in 0..n {
            if self.basic_side[j] != 0 {
                continue;
            }
            let du = self.d[j];
            let dv = 2.0 * w[j] - du;
            let (s, dq) = if du <= dv { (1.0, du) } else { (-1.0, dv) };
            if dq < -COST_TOL && best.is_none_or(|b| dq < b.2) {
                best = Some((j, s, dq));
            }
        }
        best
    }

    fn ratio_test(&self, j: usize, s: f64, bland: bool) -> Option<usize> {
        let n = self.n;
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..self.m {
            let a = s * self.t[r * n + j];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs[r].max(0.0) / a;
            best = match best {
                None => Some((r, ratio, a)),
                Some((br, bratio, ba)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    let better = if tie {
                        if bland {
                            self.basis[r].rank(n) < self.basis[br].rank(n)
                        } else {
                            a > ba
                        }
                    } else {
                        ratio < bratio
                    };
                    if better {
                        Some((r, ratio, a))
                    } else {
                        Some((br, bratio, ba))
                    }
                }
            };
        }
        best.map(|b| b.0)
    }
}

#[inline]
fn eliminate(row: &mut [f64], prow: &[f64], j: usize, s: f64, rhs: &mut f64, prhs: f64) {
    let f = s * row[j];
    if f == 0.0 {
        return;
    }
    for (v, pv) in row.iter_mut().zip(prow) {
        *v -= f * pv;
    }
    row[j] = 0.0;
    *rhs -= f * prhs;
}

/// Minimizes `sum_{j not in zero_weight} |x_j|` subject to `A x = y`.
pub fn solve_weighted_l1(a: &DMatrix<f64>, y: &[f64], zero_weight: &[usize]) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(Error::Domain(format!("y has length {}, A has {m} rows", y.len())));
    }
    if m == 0 || n == 0 {
        return Err(Error::Domain("empty system".into()));
    }
    let mut w = vec![1.0; n];
    for &j in zero_weight {
        if j >= n {
            return Err(Error::Domain(format!("zero-weight index {j} out of range for n = {n}")));
        }
        w[j] = 0.0;
    }

    // Row signs make the right-hand side non-negative.
    let signs: Vec<f64> = y.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut t = vec![0.0; m * n];
    for r in 0..m {
        for j in 0..n {
            t[r * n + j] = signs[r] * a[(r, j)];
        }
    }
    let rhs: Vec<f64> = y.iter().zip(&signs).map(|(v, s)| v * s).collect();
    // Phase one costs: one per artificial, so d_u = -sum of the rows.
    let mut d = vec![0.0; n];
    for r in 0..m {
        for j in 0..n {
            d[j] -= t[r * n + j];
        }
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        rhs,
        basis: (0..m).map(Var::Art).collect(),
        basic_side: vec![0; n],
        d,
        iterations: 0,
        max_iterations: 50 * (m + 2 * n),
    };

    let zeros = vec![0.0; n];
    tab.optimize(&zeros)?;
    let y_scale = 1.0 + y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let infeasibility: f64 = (0..m)
        .filter(|r| matches!(tab.basis[*r], Var::Art(_)))
        .map(|r| tab.rhs[r].abs())
        .sum();
    if infeasibility > 1e-8 * y_scale {
        return Err(Error::Infeasible(format!("phase one ended with artificial mass {infeasibility:e}")));
    }
    // Drive artificials still in the basis out with degenerate pivots.
    for p in 0..m {
        if !matches!(tab.basis[p], Var::Art(_)) {
            continue;
        }
        let row = tab.row(p);
        let mut pick: Option<(usize, f64)> = None;
        for (j, v) in row.iter().enumerate() {
            if tab.basic_side[j] == 0 && v.abs() > PIVOT_TOL && pick.is_none_or(|(_, b)| v.abs() > b) {
                pick = Some((j, v.abs()));
            }
        }
        if let Some((j, _)) = pick {
            let s = tab.t[p * n + j].signum();
            tab.pivot(p, j, s, 0.0);
        }
        // Otherwise the row is redundant; its artificial stays at zero.
    }

    // Phase two reduced costs: d_u = w - c_B^T T.
    tab.d.copy_from_slice(&w);
    for r in 0..m {
        let cb = match tab.basis[r] {
            Var::U(l) | Var::V(l) => w[l],
            Var::Art(_) => 0.0,
        };
        if cb != 0.0 {
            for j in 0..n {
                tab.d[j] -= cb * tab.t[r * n + j];
            }
        }
    }
    tab.optimize(&w)?;

    finish(a, y, &w, &signs, &tab)
}

/// Reads the solution off the basis, refines it with a direct solve of
/// `B x_B = y`, and checks dual feasibility.
fn finish(a: &DMatrix<f64>, y: &[f64], w: &[f64], signs: &[f64], tab: &Tableau) -> Result<LpSolution> {
    let (m, n) = a.shape();
    let mut bmat = DMatrix::<f64>::zeros(m, m);
    let mut cb = DVector::<f64>::zeros(m);
    for (r, var) in tab.basis.iter().enumerate() {
        match *var {
            Var::U(l) => {
                bmat.set_column(r, &a.column(l));
                cb[r] = w[l];
            }
            Var::V(l) => {
                bmat.set_column(r, &(-a.column(l)));
                cb[r] = w[l];
            }
            Var::Art(i) => bmat[(i, r)] = signs[i],
        }
    }
    let lu = bmat.clone().lu();
    let refined = lu.solve(&DVector::from_column_slice(y));
    let values: Vec<f64> = match &refined {
        Some(v) if v.iter().all(|x| x.is_finite()) => v.iter().map(|x| x.max(0.0)).collect(),
        _ => tab.rhs.iter().map(|x| x.max(0.0)).collect(),
    };

    let mut x_hat = vec![0.0; n];
    for (r, var) in tab.basis.iter().enumerate() {
        match *var {
            Var::U(l) => x_hat[l] = values[r],
            Var::V(l) => x_hat[l] = -values[r],
            Var::Art(_) => {}
        }
    }
    let xv = DVector::from_column_slice(&x_hat);
    let ax = a * &xv;
    let residual = ax.iter().zip(y).fold(0.0_f64, |acc, (u, v)| acc.max((u - v).abs()));
    let objective = x_hat.iter().zip(w).map(|(x, wj)| wj * x.abs()).sum();

    // Duals from B^T pi = c_B; optimality needs |a_j^T pi| <= w_j.
    let certified = match bmat.transpose().lu().solve(&cb) {
        Some(pi) => {
            let reduced = a.transpose() * pi;
            reduced.iter().zip(w).all(|(r, wj)| r.abs() <= wj + 1e-7)
        }
        None => false,
    };

    Ok(LpSolution {
        x_hat,
        iterations: tab.iterations,
        objective,
        residual,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng))
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = combinations(n - 1, k);
        for mut c in combinations(n - 1, k - 1) {
            c.push(n - 1);
            out.push(c);
        }
        out
    }

    /// Best objective over all basic feasible solutions of the split LP.
    /// Columns 0..n are u, n..2n are v.
    fn brute_force(a: &DMatrix<f64>, y: &[f64], w: &[f64]) -> f64 {
        let (m, n) = a.shape();
        let mut best = f64::INFINITY;
        for cols in combinations(2 * n, m) {
            let b = DMatrix::from_fn(m, m, |i, r| {
                let c = cols[r];
                if c < n {
                    a[(i, c)]
                } else {
                    -a[(i, c - n)]
                }
            });
            if b.determinant().abs() < 1e-10 {
                continue;
            }
            let Some(xb) = b.lu().solve(&DVector::from_column_slice(y)) else {
                continue;
            };
            if xb.iter().any(|v| *v < -1e-10) {
                continue;
            }
            let obj: f64 = cols.iter().zip(xb.iter()).map(|(c, v)| w[c % n] * v).sum();
            best = best.min(obj);
        }
        best
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..60 {
            let n = 3 + case % 4;
            let m = 1 + case % (n - 1);
            let a = gaussian(m, n, 1000 + case as u64);
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (a.clone() * DVector::from_vec(x)).iter().copied().collect();
            let zero: Vec<usize> = if case % 3 == 0 { vec![n - 1] } else { vec![] };
            let mut w = vec![1.0; n];
            for &j in &zero {
                w[j] = 0.0;
            }
            let sol = solve_weighted_l1(&a, &y, &zero).unwrap();
            let want = brute_force(&a, &y, &w);
            assert!((sol.objective - want).abs() <= 1e-9, "case {case}: {} vs {want}", sol.objective);
            assert!(sol.certified);
        }
    }

    #[test]
    fn square_system_recovers_exactly() {
        for seed in 0..20 {
            let n = 8;
            let a = gaussian(n, n, seed);
            let x: Vec<f64> = (0..n).map(|i| i as f64 - 3.5).collect();
            let y: Vec<f64> = (a.clone() * DVector::from_vec(x.clone())).iter().copied().collect();
            let sol = solve_weighted_l1(&a, &y, &[]).unwrap();
            for (u, v) in sol.x_hat.iter().zip(&x) {
                assert!((u - v).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn plain_l1_objective_is_the_norm() {
        let a = gaussian(10, 30, 5);
        let y: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let sol = solve_weighted_l1(&a, &y, &[]).unwrap();
        let norm: f64 = sol.x_hat.iter().map(|v| v.abs()).sum();
        assert!((sol.objective - norm).abs() <= 1e-12);
        let scale = 1.0 + y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        assert!(sol.residual <= 1e-8 * scale);
        assert!(sol.certified);
    }

    #[test]
    fn recovers_sparse_vector_with_enough_rows() {
        let (m, n, k) = (60, 100, 8);
        let a = gaussian(m, n, 11);
        let mut x = vec![0.0; n];
        for v in &mut x[n - k..] {
            *v = 1.0;
        }
        let y: Vec<f64> = (a.clone() * DVector::from_vec(x.clone())).iter().copied().collect();
        let sol = solve_weighted_l1(&a, &y, &[]).unwrap();
        let err = sol.x_hat.iter().zip(&x).fold(0.0_f64, |acc, (u, v)| acc.max((u - v).abs()));
        assert!(err < 1e-9);
    }

    #[test]
    fn zero_weight_indices_are_free() {
        // One row, two unknowns; x_0 is free, so the optimum puts all mass there.
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let sol = solve_weighted_l1(&a, &[3.0], &[0]).unwrap();
        assert!((sol.x_hat[0] - 3.0).abs() < 1e-12);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn bad_inputs() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(solve_weighted_l1(&a, &[1.0, 2.0], &[]).is_err());
        assert!(solve_weighted_l1(&a, &[1.0], &[5]).is_err());
        // 0 x = 1 has no solution.
        let z = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        assert!(matches!(solve_weighted_l1(&z, &[1.0], &[]), Err(Error::Infeasible(_))));
    }
}
