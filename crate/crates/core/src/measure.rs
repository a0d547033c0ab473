//! Locally constant density profiles `|ω| = C_B |dx|` on the fundamental
//! domain, built from a rational function `f` or supplied explicitly.

use serde::{Deserialize, Serialize};

use crate::exact::{fmt_rat, is_positive, ratstr, Rat};
use crate::padic::{ball_moment, Disc, Qp};
use crate::schottky::{FundamentalDomain, SchottkyGroup};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("root {root} of the datum lies inside {disc}")]
    RootInsideDisc { root: String, disc: Disc },
    #[error("zeros must be rational points: {0}")]
    AssumptionViolated(String),
    #[error("pole {0} of the datum lies in the fundamental domain")]
    PoleInDomain(String),
    #[error("zero-core {0} contains more than one root; increase the resolution")]
    CoreNotIsolated(Disc),
    #[error("{0} is not aligned with the piece partition")]
    UnalignedDisc(Disc),
    #[error("density {density} on {disc} must be a positive power of p")]
    BadDensity { disc: Disc, density: String },
    #[error("explicit pieces do not partition the fundamental domain: {0}")]
    NotAPartition(String),
    #[error("datum scale must be nonzero")]
    ZeroScale,
}

/// One factor `(z - root)^multiplicity`; negative multiplicities are poles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootFactor {
    #[serde(with = "ratstr")]
    pub root: Rat,
    pub multiplicity: i32,
}

/// `f(z) = c · Π (z - a_i)^{n_i}`.
///
/// `irreducible_factors` holds coefficient lists (constant term first) of
/// factors of degree at least 2; their zeros are not rational points, so any
/// such factor makes profile construction fail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalFunctionDatum {
    #[serde(with = "ratstr")]
    pub scale: Rat,
    #[serde(default)]
    pub roots: Vec<RootFactor>,
    #[serde(default)]
    pub irreducible_factors: Vec<Vec<String>>,
}

impl RationalFunctionDatum {
    pub fn constant(scale: Rat) -> Self {
        Self { scale, roots: Vec::new(), irreducible_factors: Vec::new() }
    }

    pub fn with_roots(scale: Rat, roots: impl IntoIterator<Item = (Rat, i32)>) -> Self {
        Self {
            scale,
            roots: roots.into_iter().map(|(root, multiplicity)| RootFactor { root, multiplicity }).collect(),
            irreducible_factors: Vec::new(),
        }
    }

    /// `|f(x)|`, or `None` at a root or pole.
    pub fn abs_at(&self, qp: Qp, x: &Rat) -> Option<Rat> {
        let mut acc = qp.abs(&self.scale);
        for r in &self.roots {
            let v = qp.valuation(&(x - &r.root))?;
            acc *= qp.pow(-v * r.multiplicity as i64);
        }
        Some(acc)
    }
}

/// `|f|` on a disc free of roots and poles, where it is constant.
pub fn local_abs(qp: Qp, datum: &RationalFunctionDatum, d: &Disc) -> Result<Rat, MeasureError> {
    if let Some(r) = datum.roots.iter().find(|r| d.contains(qp, &r.root)) {
        return Err(MeasureError::RootInsideDisc { root: fmt_rat(&r.root), disc: d.clone() });
    }
    Ok(datum.abs_at(qp, d.center()).expect("no root in disc"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(flatten)]
    pub disc: Disc,
    #[serde(with = "ratstr")]
    pub density: Rat,
}

/// Small disc around a zero of `f`, excluded from the state space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCore {
    #[serde(flatten)]
    pub disc: Disc,
    #[serde(with = "ratstr")]
    pub root: Rat,
    /// `∫_core |f| dx`, exact.
    #[serde(with = "ratstr")]
    pub mass: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureProfile {
    #[serde(rename = "p")]
    qp: Qp,
    pieces: Vec<Piece>,
    #[serde(default)]
    zero_cores: Vec<ZeroCore>,
    #[serde(with = "ratstr")]
    total_mass: Rat,
}

fn check_density(qp: Qp, disc: &Disc, density: &Rat) -> Result<(), MeasureError> {
    if !is_positive(density) || qp.log_exact(density).is_none() {
        return Err(MeasureError::BadDensity { disc: disc.clone(), density: fmt_rat(density) });
    }
    Ok(())
}

impl MeasureProfile {
    /// Densities `|f|` on the pieces of `F`, subdividing around zeros down to
    /// radius `p^{-resolution}`, where the remaining disc becomes a zero-core.
    pub fn build(
        qp: Qp,
        datum: &RationalFunctionDatum,
        f: &FundamentalDomain,
        resolution: u32,
    ) -> Result<Self, MeasureError> {
        if datum.scale == Rat::from_integer(0.into()) {
            return Err(MeasureError::ZeroScale);
        }
        if let Some(fac) = datum.irreducible_factors.iter().find(|c| c.len() >= 3) {
            return Err(MeasureError::AssumptionViolated(format!(
                "factor with coefficients [{}] has non-rational zeros",
                fac.join(", ")
            )));
        }
        if let Some(r) = datum.roots.iter().find(|r| r.multiplicity < 0 && f.contains(qp, &r.root)) {
            return Err(MeasureError::PoleInDomain(fmt_rat(&r.root)));
        }
        let mut pieces = Vec::new();
        let mut cores = Vec::new();
        for p in f.pieces() {
            refine(qp, datum, p, -(resolution as i64), &mut pieces, &mut cores)?;
        }
        pieces.sort_by(|a: &Piece, b| a.disc.cmp(&b.disc));
        let total_mass = pieces.iter().map(|p| &p.density * p.disc.haar(qp)).sum();
        Ok(Self { qp, pieces, zero_cores: cores, total_mass })
    }

    /// Explicit pieces; they must partition `F` and carry power-of-`p` densities.
    pub fn explicit(qp: Qp, f: &FundamentalDomain, mut pieces: Vec<Piece>) -> Result<Self, MeasureError> {
        for (i, a) in pieces.iter().enumerate() {
            check_density(qp, &a.disc, &a.density)?;
            if !a.disc.is_subset_of(qp, f.outer()) || f.holes().iter().any(|h| h.intersects(qp, &a.disc)) {
                return Err(MeasureError::NotAPartition(format!("{} is not inside F", a.disc)));
            }
            if let Some(b) = pieces[i + 1..].iter().find(|b| b.disc.intersects(qp, &a.disc)) {
                return Err(MeasureError::NotAPartition(format!("{} meets {}", a.disc, b.disc)));
            }
        }
        let covered: Rat = pieces.iter().map(|p| p.disc.haar(qp)).sum();
        if covered != *f.haar() {
            return Err(MeasureError::NotAPartition(format!(
                "pieces cover measure {} of {}",
                fmt_rat(&covered),
                fmt_rat(f.haar())
            )));
        }
        pieces.sort_by(|a, b| a.disc.cmp(&b.disc));
        let total_mass = pieces.iter().map(|p| &p.density * p.disc.haar(qp)).sum();
        Ok(Self { qp, pieces, zero_cores: Vec::new(), total_mass })
    }

    pub fn qp(&self) -> Qp {
        self.qp
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn zero_cores(&self) -> &[ZeroCore] {
        &self.zero_cores
    }

    pub fn total_mass(&self) -> &Rat {
        &self.total_mass
    }

    pub fn zero_core_mass(&self) -> Rat {
        self.zero_cores.iter().map(|c| c.mass.clone()).sum()
    }

    pub fn piece_containing(&self, x: &Rat) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.disc.contains(self.qp, x))
    }

    /// Density on a disc lying inside one piece.
    pub fn density_on(&self, d: &Disc) -> Option<&Rat> {
        self.pieces.iter().find(|p| d.is_subset_of(self.qp, &p.disc)).map(|p| &p.density)
    }

    /// `|ω|(D)`: `C·haar(D)` inside a piece, or the sum over pieces inside `D`.
    /// Zero-cores do not contribute.
    pub fn mass(&self, d: &Disc) -> Result<Rat, MeasureError> {
        let qp = self.qp;
        if let Some(c) = self.density_on(d) {
            return Ok(c * d.haar(qp));
        }
        if self.zero_cores.iter().any(|c| c.disc.intersects(qp, d) && !c.disc.is_subset_of(qp, d)) {
            return Err(MeasureError::UnalignedDisc(d.clone()));
        }
        Ok(self
            .pieces
            .iter()
            .filter(|p| p.disc.is_subset_of(qp, d))
            .map(|p| &p.density * p.disc.haar(qp))
            .sum())
    }

    /// `true` when the pieces and zero-cores are disjoint and their Haar
    /// measures add up to `μ(F)`.
    pub fn partitions(&self, f: &FundamentalDomain) -> bool {
        let qp = self.qp;
        let discs: Vec<&Disc> = self.pieces.iter().map(|p| &p.disc).chain(self.zero_cores.iter().map(|c| &c.disc)).collect();
        for (i, a) in discs.iter().enumerate() {
            if discs[i + 1..].iter().any(|b| a.intersects(qp, b)) {
                return false;
            }
        }
        let total: Rat = discs.iter().map(|d| d.haar(qp)).sum();
        total == *f.haar()
    }
}

fn refine(
    qp: Qp,
    datum: &RationalFunctionDatum,
    d: &Disc,
    min_exp: i64,
    pieces: &mut Vec<Piece>,
    cores: &mut Vec<ZeroCore>,
) -> Result<(), MeasureError> {
    let inside: Vec<&RootFactor> = datum.roots.iter().filter(|r| d.contains(qp, &r.root)).collect();
    if inside.is_empty() {
        pieces.push(Piece { disc: d.clone(), density: local_abs(qp, datum, d)? });
        return Ok(());
    }
    if d.radius_exp() <= min_exp {
        if inside.len() > 1 {
            return Err(MeasureError::CoreNotIsolated(d.clone()));
        }
        let root = inside[0];
        // |f| = K·|z - a|^n on the core, K from the other factors at the center
        let mut k = qp.abs(&datum.scale);
        for r in datum.roots.iter().filter(|r| r.root != root.root) {
            k *= qp.abs(&(d.center() - &r.root)).pow(r.multiplicity);
        }
        let mass = k * ball_moment(qp, -d.radius_exp(), root.multiplicity as u32);
        cores.push(ZeroCore { disc: d.clone(), root: root.root.clone(), mass });
        return Ok(());
    }
    for c in d.children(qp) {
        refine(qp, datum, &c, min_exp, pieces, cores)?;
    }
    Ok(())
}

/// One row of the invariance audit for a piece `P` and generator letter.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceRow {
    pub piece: Disc,
    pub letter: i32,
    /// `|f(γy)|·|γ'(y)| = |f(y)|` at the piece center.
    pub form_invariant: bool,
    /// `C_P = C_{γP}` with `C_{γP}` the ambient density of the image disc.
    pub density_preserved: bool,
    /// `|γ'| = 1` on `P`.
    pub isometric: bool,
    #[serde(with = "ratstr")]
    pub density: Rat,
    #[serde(with = "ratstr")]
    pub image_density: Rat,
    #[serde(with = "ratstr")]
    pub derivative_abs: Rat,
}

/// Checks form invariance and the two stronger equalities on every piece for
/// every generator and inverse. Rows where the image meets a root or the
/// pole lies in the piece are skipped.
pub fn invariance_audit(profile: &MeasureProfile, datum: &RationalFunctionDatum, g: &SchottkyGroup) -> Vec<InvarianceRow> {
    let qp = profile.qp();
    let mut rows = Vec::new();
    for piece in profile.pieces() {
        for s in crate::schottky::alphabet(g.genus()) {
            let gamma = g.letter_map(s);
            let Ok(img) = crate::schottky::disc_image(qp, &gamma, &piece.disc) else { continue };
            let Ok(image_density) = local_abs(qp, datum, &img) else { continue };
            let y = piece.disc.center();
            let dv = gamma.derivative_abs(qp, y).expect("pole outside piece");
            rows.push(InvarianceRow {
                piece: piece.disc.clone(),
                letter: s,
                form_invariant: &image_density * &dv == piece.density,
                density_preserved: image_density == piece.density,
                isometric: dv == Rat::from_integer(1.into()),
                density: piece.density.clone(),
                image_density,
                derivative_abs: dv,
            });
        }
    }
    rows
}
