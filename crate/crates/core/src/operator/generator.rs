use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{OperatorConfig, OperatorError, PowerAccumulator};
use crate::exact::{int, Cyclo, PowerSum, Rat};
use crate::padic::{Disc, Qp};
use crate::wavelets::{LevelFunction, StateSpace};

/// Rate matrix of the operator restricted to level-`m` functions:
/// `(Qu)_a = Σ_b Q_{ab}(u_b − u_a) = 𝓗u(c_a)`.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    pub qp: Qp,
    pub level: u32,
    pub states: Vec<Disc>,
    /// Pieces of `F` and the piece index of every state.
    pub pieces: Vec<Disc>,
    pub piece_of: Vec<usize>,
    pub weights: Vec<Rat>,
    /// Exact entries; the diagonal is the negative off-diagonal row sum.
    pub entries: Vec<Vec<PowerSum>>,
    /// Bound on the omitted `ℓ > L` part of every row's off-diagonal sum.
    pub row_tail_bound: f64,
    pub cutoff_len: usize,
}

/// `Q_{ab} = μ(F)^{-1} |ω|(b) Σ_γ p^{-α_g ℓ(γ)} |c_a − γ c_b|^{-α}` over
/// `(γ, b) ≠ (1, a)`.
pub fn generator_matrix(cfg: &OperatorConfig, level: u32) -> Result<GeneratorMatrix, OperatorError> {
    let qp = cfg.qp();
    let space = StateSpace::new(cfg.profile(), level);
    let n = space.len();
    let images: Vec<Vec<Rat>> = space
        .states()
        .par_iter()
        .map(|s| cfg.elements().map(|(_, e)| e.map.apply(s.center())).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let lens: Vec<usize> = cfg.elements().map(|(l, _)| l).collect();
    let rows: Result<Vec<Vec<PowerSum>>, OperatorError> = (0..n)
        .into_par_iter()
        .map(|a| {
            let ca = space.states()[a].center();
            let mut row = vec![PowerSum::zero(qp.p()); n];
            let mut diag = PowerSum::zero(qp.p());
            for b in 0..n {
                let mut acc = PowerAccumulator::new(qp.p());
                for (k, y) in images[b].iter().enumerate() {
                    if k == 0 && a == b {
                        continue;
                    }
                    let d = qp.abs_exp(&(ca - y)).ok_or(OperatorError::CoincidentPoints)?;
                    acc.add(cfg.weight_exponent(lens[k], d), int(1));
                }
                let q = acc.finish().scale(&(space.weight(b) * cfg.mu_inv()));
                diag = &diag - &q;
                row[b] = &row[b] + &q;
            }
            row[a] = &row[a] + &diag;
            Ok(row)
        })
        .collect();
    Ok(GeneratorMatrix {
        qp,
        level,
        states: space.states().to_vec(),
        pieces: cfg.profile().pieces().iter().map(|p| p.disc.clone()).collect(),
        piece_of: (0..n).map(|i| space.piece_of(i)).collect(),
        weights: space.weights().to_vec(),
        entries: rows?,
        row_tail_bound: cfg.tail_bound(0.5, cfg.cutoff_len()).value,
        cutoff_len: cfg.cutoff_len(),
    })
}

impl GeneratorMatrix {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, k| self.entries[i][k].to_f64())
    }

    pub fn off_diagonal_nonnegative(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(k, q)| i == k || q.has_nonneg_coefficients()))
    }

    /// Exact row sums, recomputed independently of the diagonal construction.
    pub fn row_sums(&self) -> Vec<PowerSum> {
        self.entries
            .iter()
            .map(|row| row.iter().fold(PowerSum::zero(row[0].p()), |acc, q| &acc + q))
            .collect()
    }

    /// `Qu` on exact level functions.
    pub fn apply(&self, u: &LevelFunction) -> LevelFunction {
        let values = self
            .entries
            .iter()
            .map(|row| {
                let mut acc = Cyclo::zero(row[0].p());
                for (q, v) in row.iter().zip(&u.values) {
                    if !q.is_zero() && !v.is_zero() {
                        acc += &v.scale(q);
                    }
                }
                acc
            })
            .collect();
        LevelFunction { level: u.level, values }
    }
}

/// `𝓔(u, v) = Σ_a |ω|(a) Σ_b Q_{ab} (u_b − u_a) conj(v_b − v_a)` and a bound
/// on the omitted group-sum tail.
pub fn dirichlet_form(q: &GeneratorMatrix, u: &LevelFunction, v: &LevelFunction) -> (Cyclo, f64) {
    let p = q.entries.first().map_or(2, |r| r[0].p());
    let mut acc = Cyclo::zero(p);
    for (a, row) in q.entries.iter().enumerate() {
        let mut inner = Cyclo::zero(p);
        for (b, qab) in row.iter().enumerate() {
            if a == b {
                continue;
            }
            let du = &u.values[b] - &u.values[a];
            let dv = &v.values[b] - &v.values[a];
            if du.is_zero() || dv.is_zero() {
                continue;
            }
            inner += &(&du * &dv.conj()).scale(qab);
        }
        acc += &inner.scale_rat(&q.weights[a]);
    }
    let sup = |f: &LevelFunction| f.to_complex().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mass: f64 = q.weights.iter().map(crate::exact::rat_to_f64).sum();
    (acc, 4.0 * sup(u) * sup(v) * mass * q.row_tail_bound)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::tate_cfg;
    use super::super::{lambda_exact, Cutoff, Mode};
    use super::*;
    use crate::exact::rat;
    use crate::exact::PowerSum;
    use crate::wavelets::{admissible_wavelets, Normalization};
    use rand::{Rng, SeedableRng};

    #[test]
    fn tate_generator_properties() {
        let cfg = tate_cfg(Mode::Transport, Cutoff::Tolerance(1e-12));
        let q = generator_matrix(&cfg, 2).unwrap();
        assert_eq!(q.len(), 8);
        assert!(q.off_diagonal_nonnegative());
        assert!(q.row_sums().iter().all(PowerSum::is_zero));
        let space = StateSpace::new(cfg.profile(), 2);
        let c = LevelFunction::constant(&space, Cyclo::from_rat(3, rat(3, 7)));
        assert!(q.apply(&c).is_zero());
        for w in admissible_wavelets(cfg.profile(), 2, Normalization::Omega) {
            let u = w.on_states(&space);
            let lam = lambda_exact(&cfg, &w.support, w.j).unwrap();
            let qu = q.apply(&u);
            assert_eq!(qu, u.scale(&Cyclo::from_power_sum(-&lam.value)));
        }
    }

    #[test]
    fn dirichlet_properties() {
        let cfg = tate_cfg(Mode::Transport, Cutoff::Length(8));
        let q = generator_matrix(&cfg, 2).unwrap();
        let space = StateSpace::new(cfg.profile(), 2);
        let c = LevelFunction::constant(&space, Cyclo::from_rat(3, int(1)));
        assert!(dirichlet_form(&q, &c, &c).0.is_zero());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rand_fn = |rng: &mut rand_chacha::ChaCha8Rng| LevelFunction {
            level: 2,
            values: (0..space.len())
                .map(|_| Cyclo::term(PowerSum::from_rat(3, rat(rng.gen_range(-9..10), 4)), &rat(rng.gen_range(0..9), 9)))
                .collect(),
        };
        for _ in 0..100 {
            let u = rand_fn(&mut rng);
            let v = rand_fn(&mut rng);
            let (e, _) = dirichlet_form(&q, &u, &u);
            // real in Q(ζ) but not necessarily rational
            assert_eq!(e, e.conj());
            assert!(e.to_complex().re >= 0.0);
            let (uv, _) = dirichlet_form(&q, &u, &v);
            let (vu, _) = dirichlet_form(&q, &v, &u);
            assert_eq!(uv, vu.conj());
        }
    }
}
