//! Schottky groups over `Q_p`: Möbius generators, reduced words, disc
//! images and fundamental-domain checks.

mod group;
mod moebius;
mod region;
mod word;

pub use group::{DomainReport, Element, FundamentalDomain, SchottkyGroup};
pub use moebius::{moebius_distance_identity_check, MoebiusMap};
pub use region::{disc_image, region_image, Region};
pub use word::{alphabet, enumerate_words, word_count, GroupWord, WordEnumerator};

use crate::exact::Rat;
use crate::padic::{Disc, DiscError, Qp};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchottkyError {
    #[error("point {0} is the pole of the map")]
    PoleHit(Rat),
    #[error("pole of the map lies inside {0}")]
    PoleInsideDisc(Disc),
    #[error("matrix is singular")]
    DegenerateMatrix,
    #[error("matrix entry {0:?} is not an integer")]
    BadEntry(String),
    #[error("generator {0} is not hyperbolic")]
    NotHyperbolic(usize),
    #[error("{generators} generators but {pairs} hole pairs")]
    HoleCount { generators: usize, pairs: usize },
    #[error("expected exactly one co-disc hole (or none with an explicit outer disc for genus 0), found {0}")]
    OuterDisc(usize),
    #[error("fundamental domain invalid, clause ({clause}): {detail}")]
    DomainInvalid { clause: u8, detail: String },
    #[error("reduction of {0} did not reach the fundamental domain")]
    ReductionDiverged(Rat),
    #[error(transparent)]
    Disc(#[from] DiscError),
}

/// `dist(D1, D2)` for disjoint discs.
pub fn disc_distance(qp: Qp, d1: &Disc, d2: &Disc) -> Result<Rat, SchottkyError> {
    Ok(d1.distance(qp, d2)?)
}
