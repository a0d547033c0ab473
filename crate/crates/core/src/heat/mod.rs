//! Heat semigroup of the finite level-`m` chain: transition matrices,
//! the Cauchy problem, the resolvent, the stationary law and path sampling.
//!
//! `exp(tQ)` is assembled in the known eigenbasis. Differences of child
//! indicators inside an admissible disc are eigenvectors of `Q`, and piece
//! indicators span an invariant subspace on which `Q` acts by a small
//! matrix `G`. A dense scaling-and-squaring exponential is the fallback and
//! the cross-check.

mod sample;

pub use sample::{
    empirical_validation, occupation_fractions, sample_paths, CheckpointRow, PathSample, ValidationReport,
};

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::operator::GeneratorMatrix;
use crate::padic::Disc;

/// Allowed row-sum drift of `P_t` before reporting a breakdown.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
/// Residual `‖QS − SM‖` above which the dense exponential is used instead.
pub const BASIS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeatError {
    #[error("row sums drift by {drift:e} from 1")]
    NumericalBreakdown { drift: f64 },
    #[error("chain is reducible: state {from} cannot reach state {to}")]
    Reducible { from: usize, to: usize },
    #[error("singular linear system")]
    SingularSystem,
    #[error("invalid input: {0}")]
    BadInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Eigendecomposition,
    ScalingAndSquaring,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Eigendecomposition => "eigendecomposition",
            Self::ScalingAndSquaring => "scaling_and_squaring",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub t: f64,
    pub p: DMatrix<f64>,
    pub provenance: Provenance,
    /// Largest row-sum drift plus the largest clamped negative entry.
    pub error_estimate: f64,
}

impl TransitionMatrix {
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.p.row(i).iter().copied().collect()
    }
}

/// `Q = S M S⁻¹` with `M = diag(−λ_1, …, −λ_k, G)`.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    pub supports: Vec<Disc>,
    /// Decay rate of each wavelet column, `p − 1` per support.
    pub rates: Vec<f64>,
    /// Action of `Q` on piece indicators, `Q E = E G`.
    pub gap_block: DMatrix<f64>,
    pub residual: f64,
    s: DMatrix<f64>,
    s_inv: DMatrix<f64>,
}

/// Proper ancestors of states that lie inside their piece.
fn supports(q: &GeneratorMatrix) -> Vec<Disc> {
    let qp = q.qp;
    let mut out = BTreeSet::new();
    for (i, st) in q.states.iter().enumerate() {
        let piece = &q.pieces[q.piece_of[i]];
        let mut d = st.clone();
        while d.radius_exp() < piece.radius_exp() {
            d = d.parent(qp);
            out.insert(d.clone());
        }
    }
    out.into_iter().collect()
}

impl SpectralBasis {
    pub fn new(q: &GeneratorMatrix, qm: &DMatrix<f64>) -> Result<Self, HeatError> {
        let qp = q.qp;
        let n = q.len();
        let supports = supports(q);
        let mut cols: Vec<DVector<f64>> = Vec::new();
        let mut rates = Vec::new();
        for b in &supports {
            let kids = b.children(qp);
            let member = |d: &Disc| DVector::from_fn(n, |i, _| f64::from(u8::from(q.states[i].is_subset_of(qp, d))));
            let base = member(&kids[0]);
            for k in &kids[1..] {
                let v = member(k) - &base;
                let a = (0..n).find(|&i| v[i] > 0.5).ok_or_else(|| HeatError::BadInput(format!("empty child {k}")))?;
                rates.push(-(qm * &v)[a]);
                cols.push(v);
            }
        }
        let np = q.pieces.len();
        let indicators: Vec<DVector<f64>> =
            (0..np).map(|j| DVector::from_fn(n, |i, _| f64::from(u8::from(q.piece_of[i] == j)))).collect();
        let rep: Vec<usize> = (0..np)
            .map(|j| q.piece_of.iter().position(|&k| k == j).ok_or(HeatError::BadInput(format!("piece {j} has no states"))))
            .collect::<Result<_, _>>()?;
        let mut g = DMatrix::zeros(np, np);
        for (i, e) in indicators.iter().enumerate() {
            let qe = qm * e;
            for j in 0..np {
                g[(j, i)] = qe[rep[j]];
            }
        }
        cols.extend(indicators);
        if cols.len() != n {
            return Err(HeatError::BadInput(format!("basis has {} columns for {n} states", cols.len())));
        }
        let s = DMatrix::from_columns(&cols);
        let s_inv = s.clone().try_inverse().ok_or(HeatError::SingularSystem)?;
        let k = rates.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, r) in rates.iter().enumerate() {
            m[(i, i)] = -r;
        }
        m.view_mut((k, k), (np, np)).copy_from(&g);
        let residual = (qm * &s - &s * &m).amax();
        Ok(Self { supports, rates, gap_block: g, residual, s, s_inv })
    }

    pub fn exp(&self, t: f64) -> DMatrix<f64> {
        let k = self.rates.len();
        let np = self.gap_block.nrows();
        let mut e = DMatrix::zeros(k + np, k + np);
        for (i, r) in self.rates.iter().enumerate() {
            e[(i, i)] = (-r * t).exp();
        }
        e.view_mut((k, k), (np, np)).copy_from(&(&self.gap_block * t).exp());
        &self.s * e * &self.s_inv
    }

    /// Eigenvalues of the gap block, sorted by real part, descending.
    pub fn gap_eigenvalues(&self) -> Vec<num_complex::Complex64> {
        let mut ev: Vec<_> = self.gap_block.complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.re.total_cmp(&a.re));
        ev
    }
}

/// `Q` in floating point together with its spectral basis.
#[derive(Clone, Debug)]
pub struct HeatKernel {
    pub q: DMatrix<f64>,
    pub basis: Option<SpectralBasis>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenLine {
    pub rate: f64,
    pub imag: f64,
    pub multiplicity: usize,
    pub kind: &'static str,
}

impl HeatKernel {
    pub fn new(q: &GeneratorMatrix) -> Self {
        let qm = q.to_f64();
        let scale = qm.amax().max(1.0);
        let basis = SpectralBasis::new(q, &qm).ok().filter(|b| b.residual <= BASIS_TOLERANCE * scale);
        Self { q: qm, basis }
    }

    /// Dense-only kernel, skipping the eigenbasis.
    pub fn dense(q: DMatrix<f64>) -> Self {
        Self { q, basis: None }
    }

    pub fn len(&self) -> usize {
        self.q.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.q.nrows() == 0
    }

    pub fn transition(&self, t: f64) -> Result<TransitionMatrix, HeatError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(HeatError::BadInput(format!("time {t} must be finite and nonnegative")));
        }
        let n = self.len();
        let (raw, provenance) = if t == 0.0 {
            (DMatrix::identity(n, n), Provenance::Eigendecomposition)
        } else {
            match &self.basis {
                Some(b) => (b.exp(t), Provenance::Eigendecomposition),
                None => ((&self.q * t).exp(), Provenance::ScalingAndSquaring),
            }
        };
        finish(t, raw, provenance)
    }

    /// Dense exponential regardless of the basis.
    pub fn transition_dense(&self, t: f64) -> Result<TransitionMatrix, HeatError> {
        finish(t, (&self.q * t).exp(), Provenance::ScalingAndSquaring)
    }

    /// Largest entrywise gap between the eigenbasis and the dense exponential.
    pub fn cross_check(&self, t: f64) -> Option<f64> {
        let b = self.basis.as_ref()?;
        Some((b.exp(t) - (&self.q * t).exp()).amax())
    }

    /// Decay rates with multiplicities: wavelet rates, then the gap block.
    pub fn eigen_lines(&self) -> Vec<EigenLine> {
        let Some(b) = &self.basis else {
            return dense_lines(&self.q);
        };
        let mut lines: Vec<EigenLine> = Vec::new();
        let mut push = |rate: f64, imag: f64, kind: &'static str| {
            let tol = 1e-9 * rate.abs().max(1.0);
            match lines.iter_mut().find(|l| l.kind == kind && (l.rate - rate).abs() <= tol && (l.imag - imag).abs() <= tol) {
                Some(l) => l.multiplicity += 1,
                None => lines.push(EigenLine { rate, imag, multiplicity: 1, kind }),
            }
        };
        for r in &b.rates {
            push(*r, 0.0, "wavelet");
        }
        for z in b.gap_eigenvalues() {
            let kind = if z.norm() < 1e-9 * self.q.amax().max(1.0) { "constant" } else { "gap" };
            push(-z.re, -z.im, kind);
        }
        lines
    }

    /// Smallest nonzero decay rate.
    pub fn spectral_gap(&self) -> f64 {
        self.eigen_lines().iter().filter(|l| l.kind != "constant").map(|l| l.rate).fold(f64::INFINITY, f64::min)
    }
}

fn dense_lines(q: &DMatrix<f64>) -> Vec<EigenLine> {
    let mut lines: Vec<EigenLine> = Vec::new();
    let tol0 = 1e-9 * q.amax().max(1.0);
    for z in q.complex_eigenvalues().iter() {
        let kind = if z.norm() < tol0 { "constant" } else { "dense" };
        match lines.iter_mut().find(|l| (l.rate + z.re).abs() <= tol0 && (l.imag + z.im).abs() <= tol0) {
            Some(l) => l.multiplicity += 1,
            None => lines.push(EigenLine { rate: -z.re, imag: -z.im, multiplicity: 1, kind }),
        }
    }
    lines.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    lines
}

fn finish(t: f64, mut p: DMatrix<f64>, provenance: Provenance) -> Result<TransitionMatrix, HeatError> {
    let drift = p.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    if drift.is_nan() || drift > ROW_SUM_TOLERANCE {
        return Err(HeatError::NumericalBreakdown { drift });
    }
    let mut clamped: f64 = 0.0;
    p.iter_mut().for_each(|x| {
        if *x < 0.0 {
            clamped = clamped.max(-*x);
            *x = 0.0;
        }
    });
    Ok(TransitionMatrix { t, p, provenance, error_estimate: drift + clamped })
}

pub fn transition_matrix(q: &GeneratorMatrix, t: f64) -> Result<TransitionMatrix, HeatError> {
    HeatKernel::new(q).transition(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatSolution {
    pub initial: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[k][i] = h(times[k], state i)`.
    pub values: Vec<Vec<f64>>,
}

impl HeatSolution {
    pub fn sup_norms(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))).collect()
    }
}

/// `h(t) = P_t h₀` on each grid time.
pub fn solve_cauchy(kernel: &HeatKernel, h0: &[f64], times: &[f64]) -> Result<HeatSolution, HeatError> {
    if h0.len() != kernel.len() {
        return Err(HeatError::BadInput(format!("initial data has {} values for {} states", h0.len(), kernel.len())));
    }
    let h = DVector::from_column_slice(h0);
    let values = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(h0.to_vec());
            }
            let p = kernel.transition(t)?;
            Ok((&p.p * &h).iter().copied().collect())
        })
        .collect::<Result<_, HeatError>>()?;
    Ok(HeatSolution { initial: h0.to_vec(), times: times.to_vec(), values })
}

/// Solves `(ηI − Q)u = h`.
pub fn resolvent_solve(kernel: &HeatKernel, eta: f64, h: &[f64]) -> Result<Vec<f64>, HeatError> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(HeatError::BadInput(format!("resolvent parameter {eta} must be positive")));
    }
    if h.len() != kernel.len() {
        return Err(HeatError::BadInput(format!("right-hand side has {} values for {} states", h.len(), kernel.len())));
    }
    let n = kernel.len();
    let a = DMatrix::identity(n, n) * eta - &kernel.q;
    let u = a.lu().solve(&DVector::from_column_slice(h)).ok_or(HeatError::SingularSystem)?;
    Ok(u.iter().copied().collect())
}

/// Strong connectivity of the positive off-diagonal graph.
pub fn check_irreducible(q: &DMatrix<f64>) -> Result<(), HeatError> {
    let n = q.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..n {
                let rate = if forward { q[(a, b)] } else { q[(b, a)] };
                if a != b && rate > 0.0 && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen
    };
    if n == 0 {
        return Ok(());
    }
    if let Some(to) = reach(true).iter().position(|s| !s) {
        return Err(HeatError::Reducible { from: 0, to });
    }
    if let Some(from) = reach(false).iter().position(|s| !s) {
        return Err(HeatError::Reducible { from, to: 0 });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryReport {
    pub pi: Vec<f64>,
    /// `‖πQ‖_∞`.
    pub residual: f64,
    /// Total variation between `π` and the normalised state masses.
    pub tv_to_mass: f64,
}

/// Unique `π > 0` with `πQ = 0` and `Σπ = 1`; `mass` is the comparison vector.
pub fn stationary_distribution(kernel: &HeatKernel, mass: &[f64]) -> Result<StationaryReport, HeatError> {
    check_irreducible(&kernel.q)?;
    let n = kernel.len();
    let mut a = kernel.q.transpose();
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a.lu().solve(&rhs).ok_or(HeatError::SingularSystem)?;
    let residual = (pi.transpose() * &kernel.q).amax();
    let total: f64 = mass.iter().sum();
    let tv_to_mass = 0.5 * pi.iter().zip(mass).map(|(x, m)| (x - m / total).abs()).sum::<f64>();
    Ok(StationaryReport { pi: pi.iter().copied().collect(), residual, tv_to_mass })
}
