use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SimConfig;

/// A random system `y = A x` with a planted solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: DMatrix<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Indices excluded from the objective.
    pub pi_set: Vec<usize>,
}

/// Draws trial `trial_index` of the experiment. The generator is ChaCha20
/// seeded from `master_seed` with the trial index as its stream, so the
/// instance does not depend on which thread draws it or in what order.
pub fn sample_instance(cfg: &SimConfig, trial_index: u64) -> Instance {
    let SimConfig { n, m, k, .. } = *cfg;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(trial_index);
    // Row-major fill so the draw order does not depend on storage order.
    let mut a = DMatrix::<f64>::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let mut x = vec![0.0; n];
    for v in &mut x[n - k..] {
        *v = 1.0;
    }
    let y = (0..m).map(|i| (n - k..n).map(|j| a[(i, j)]).sum()).collect();
    Instance { a, x, y, pi_set: cfg.unpenalized_set() }
}
