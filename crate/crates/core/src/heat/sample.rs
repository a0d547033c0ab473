use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::HeatError;

/// A right-continuous step path: `states[k]` is occupied on
/// `[jump_times[k], jump_times[k+1])`, and `jump_times[0] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSample {
    pub path_id: usize,
    pub seed: u64,
    pub t_max: f64,
    pub jump_times: Vec<f64>,
    pub states: Vec<usize>,
}

impl PathSample {
    pub fn state_at(&self, t: f64) -> usize {
        let k = self.jump_times.partition_point(|&s| s <= t);
        self.states[k.saturating_sub(1)]
    }
}

fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// Exact simulation up to `t_max`: exponential holding with rate `−Q_aa`,
/// then a jump to `b` with probability `Q_ab / (−Q_aa)`.
pub fn sample_paths(
    q: &DMatrix<f64>,
    start: usize,
    n_paths: usize,
    t_max: f64,
    seed: u64,
) -> Result<Vec<PathSample>, HeatError> {
    let n = q.nrows();
    if n_paths == 0 || start >= n || !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(HeatError::BadInput(format!("n_paths={n_paths}, start={start}, t_max={t_max}")));
    }
    let jumps: Vec<(f64, Vec<(usize, f64)>)> = (0..n)
        .map(|a| {
            let rate = -q[(a, a)];
            let mut acc = 0.0;
            let cdf = (0..n)
                .filter(|&b| b != a && q[(a, b)] > 0.0)
                .map(|b| {
                    acc += q[(a, b)] / rate;
                    (b, acc)
                })
                .collect();
            (rate, cdf)
        })
        .collect();
    Ok((0..n_paths)
        .into_par_iter()
        .map(|id| {
            let mut rng = replica_rng(seed, id);
            let mut t = 0.0;
            let mut a = start;
            let mut path = PathSample { path_id: id, seed, t_max, jump_times: vec![0.0], states: vec![a] };
            loop {
                let (rate, cdf) = &jumps[a];
                if *rate <= 0.0 || cdf.is_empty() {
                    break;
                }
                let u: f64 = 1.0 - rng.gen::<f64>();
                t += -u.ln() / rate;
                if t > t_max {
                    break;
                }
                let v: f64 = rng.gen::<f64>() * cdf.last().map_or(1.0, |x| x.1);
                a = cdf.iter().find(|(_, c)| v < *c).unwrap_or(cdf.last().expect("nonempty")).0;
                path.jump_times.push(t);
                path.states.push(a);
            }
            path
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckpointRow {
    pub t: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub max_abs_z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub n_paths: usize,
    pub sigma_threshold: f64,
    pub rows: Vec<CheckpointRow>,
    pub pass: bool,
}

/// Compares the empirical law at each checkpoint with `expected[k]`.
/// A checkpoint passes when every state count is within `sigma` binomial
/// standard deviations of its expectation.
pub fn empirical_validation(
    paths: &[PathSample],
    checkpoints: &[f64],
    expected: &[Vec<f64>],
    sigma: f64,
) -> ValidationReport {
    let n = paths.len() as f64;
    let rows: Vec<CheckpointRow> = checkpoints
        .iter()
        .zip(expected)
        .map(|(&t, probs)| {
            let mut counts = vec![0usize; probs.len()];
            for p in paths {
                counts[p.state_at(t)] += 1;
            }
            let mut chi = 0.0;
            let mut dof = 0usize;
            let mut zmax: f64 = 0.0;
            for (c, &pr) in counts.iter().zip(probs) {
                let e = n * pr;
                let var = n * pr * (1.0 - pr);
                let diff = *c as f64 - e;
                if var > 1e-12 {
                    zmax = zmax.max(diff.abs() / var.sqrt());
                    chi += diff * diff / e;
                    dof += 1;
                } else if *c > 0 {
                    zmax = f64::INFINITY;
                }
            }
            CheckpointRow { t, chi_square: chi, degrees_of_freedom: dof.saturating_sub(1), max_abs_z: zmax, pass: zmax <= sigma }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    ValidationReport { n_paths: paths.len(), sigma_threshold: sigma, rows, pass }
}

/// Fraction of `[0, t_max]` spent in each state.
pub fn occupation_fractions(path: &PathSample, n_states: usize) -> Vec<f64> {
    let mut occ = vec![0.0; n_states];
    for (k, &s) in path.states.iter().enumerate() {
        let end = path.jump_times.get(k + 1).copied().unwrap_or(path.t_max);
        occ[s] += end - path.jump_times[k];
    }
    if path.t_max > 0.0 {
        occ.iter_mut().for_each(|x| *x /= path.t_max);
    }
    occ
}
