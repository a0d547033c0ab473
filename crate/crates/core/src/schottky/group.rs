use serde::{Deserialize, Serialize};

use super::region::region_image;
use super::{GroupWord, MoebiusMap, Region, SchottkyError, WordEnumerator};
use crate::exact::{int, Rat};
use crate::padic::{Disc, Qp};

/// Free group on hyperbolic generators with paired holes.
///
/// `holes[i] = (D_i, D'_i)` with `γ_i(P¹ \ D_i) ⊆ D'_i`. For `g ≥ 1` exactly
/// one hole is a co-disc (it contains `∞`); the outer disc of the fundamental
/// domain is its complement. For `g = 0` an explicit outer disc is required.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchottkyGroup {
    qp: Qp,
    generators: Vec<MoebiusMap>,
    holes: Vec<(Region, Region)>,
    outer: Disc,
}

/// One word together with the map it defines.
#[derive(Clone, Debug)]
pub struct Element {
    pub word: GroupWord,
    pub map: MoebiusMap,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainReport {
    pub holes_disjoint: bool,
    pub pairing: bool,
    pub tiling: bool,
    pub depth: usize,
    pub words_checked: u64,
}

impl SchottkyGroup {
    pub fn new(
        qp: Qp,
        generators: Vec<MoebiusMap>,
        holes: Vec<(Region, Region)>,
        outer: Option<Disc>,
    ) -> Result<Self, SchottkyError> {
        if holes.len() != generators.len() {
            return Err(SchottkyError::HoleCount { generators: generators.len(), pairs: holes.len() });
        }
        for (i, g) in generators.iter().enumerate() {
            if !g.is_hyperbolic(qp) {
                return Err(SchottkyError::NotHyperbolic(i + 1));
            }
        }
        let co: Vec<&Disc> = holes
            .iter()
            .flat_map(|(a, b)| [a, b])
            .filter_map(|r| match r {
                Region::CoDisc(d) => Some(d),
                Region::Disc(_) => None,
            })
            .collect();
        let outer = match (co.as_slice(), outer) {
            ([d], None) => (*d).clone(),
            ([d], Some(o)) if **d == o => o,
            ([], Some(o)) if generators.is_empty() => o,
            _ => return Err(SchottkyError::OuterDisc(co.len())),
        };
        Ok(Self { qp, generators, holes, outer })
    }

    pub fn qp(&self) -> Qp {
        self.qp
    }

    pub fn genus(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[MoebiusMap] {
        &self.generators
    }

    pub fn hole_pairs(&self) -> &[(Region, Region)] {
        &self.holes
    }

    pub fn all_holes(&self) -> impl Iterator<Item = &Region> {
        self.holes.iter().flat_map(|(a, b)| [a, b])
    }

    pub fn outer(&self) -> &Disc {
        &self.outer
    }

    /// Affine holes, i.e. the discs removed from the outer disc.
    pub fn inner_holes(&self) -> Vec<Disc> {
        self.all_holes().filter_map(|r| r.as_disc().cloned()).collect()
    }

    pub fn letter_map(&self, s: i32) -> MoebiusMap {
        let g = &self.generators[s.unsigned_abs() as usize - 1];
        if s > 0 {
            g.clone()
        } else {
            g.inverse()
        }
    }

    pub fn word_map(&self, w: &GroupWord) -> MoebiusMap {
        w.letters().iter().fold(MoebiusMap::identity(), |acc, &s| acc.compose(&self.letter_map(s)))
    }

    /// Elements with `ℓ ≤ max_len`, grouped by length.
    pub fn elements(&self, max_len: usize) -> Vec<Vec<Element>> {
        let mut blocks: Vec<Vec<Element>> = vec![vec![Element { word: GroupWord::identity(), map: MoebiusMap::identity() }]];
        let letters = super::alphabet(self.genus());
        let letter_maps: Vec<MoebiusMap> = letters.iter().map(|&s| self.letter_map(s)).collect();
        for _ in 0..max_len {
            let prev = blocks.last().unwrap();
            let mut next = Vec::new();
            for e in prev {
                for (s, m) in letters.iter().zip(&letter_maps) {
                    if e.word.last() != Some(-s) {
                        next.push(Element { word: e.word.push(*s), map: e.map.compose(m) });
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            blocks.push(next);
        }
        blocks
    }

    pub fn fundamental_domain(&self) -> FundamentalDomain {
        FundamentalDomain::new(self.qp, self.outer.clone(), self.inner_holes())
    }

    /// Checks hole disjointness, pairing and the tiling condition
    /// `γF ∩ F = ∅` for every word with `1 ≤ ℓ ≤ depth`.
    pub fn verify_fundamental_domain(&self, depth: usize) -> Result<DomainReport, SchottkyError> {
        let qp = self.qp;
        let holes: Vec<&Region> = self.all_holes().collect();
        for (i, a) in holes.iter().enumerate() {
            if a.as_disc().is_some_and(|h| !h.is_subset_of(qp, &self.outer)) {
                return Err(SchottkyError::DomainInvalid { clause: 1, detail: format!("{a} not inside {}", self.outer) });
            }
            for b in &holes[i + 1..] {
                if !a.is_disjoint_from(qp, b) {
                    return Err(SchottkyError::DomainInvalid { clause: 1, detail: format!("{a} meets {b}") });
                }
            }
        }
        for (i, (g, (d, dp))) in self.generators.iter().zip(&self.holes).enumerate() {
            let img = region_image(qp, g, &d.complement());
            if !img.is_subset_of(qp, dp) {
                return Err(SchottkyError::DomainInvalid {
                    clause: 2,
                    detail: format!("generator {} maps complement of {d} to {img}, not inside {dp}", i + 1),
                });
            }
        }
        let f = self.fundamental_domain();
        let mut words_checked = 0u64;
        let word_holes: Vec<Region> = holes.iter().map(|r| (*r).clone()).collect();
        for w in WordEnumerator::new(self.genus(), depth).skip(1) {
            let m = self.word_map(&w);
            let images: Vec<Region> = word_holes.iter().map(|h| region_image(qp, &m, h)).collect();
            for piece in f.pieces() {
                if !covered(qp, piece, &images, 0) {
                    return Err(SchottkyError::DomainInvalid {
                        clause: 3,
                        detail: format!("tile of word {w} meets the fundamental domain near {piece}"),
                    });
                }
            }
            words_checked += 1;
        }
        Ok(DomainReport { holes_disjoint: true, pairing: true, tiling: true, depth, words_checked })
    }

    /// Maps `z` into `F`, returning `(x, w)` with `w(x) = z`.
    pub fn reduce_to_domain(&self, z: &Rat, max_steps: usize) -> Result<(Rat, GroupWord), SchottkyError> {
        let qp = self.qp;
        let f = self.fundamental_domain();
        let mut x = z.clone();
        let mut w = GroupWord::identity();
        for _ in 0..=max_steps {
            if f.contains(qp, &x) {
                return Ok((x, w));
            }
            let mut moved = false;
            for (i, (d, dp)) in self.holes.iter().enumerate() {
                let s = i as i32 + 1;
                let (letter, map) = if dp.contains(qp, &x) {
                    (s, self.generators[i].inverse())
                } else if d.contains(qp, &x) {
                    (-s, self.generators[i].clone())
                } else {
                    continue;
                };
                x = map.apply(&x).map_err(|_| SchottkyError::ReductionDiverged(z.clone()))?;
                w = w.push(letter);
                moved = true;
                break;
            }
            if !moved {
                return Err(SchottkyError::ReductionDiverged(z.clone()));
            }
        }
        Err(SchottkyError::ReductionDiverged(z.clone()))
    }

    /// `1` for the identity, otherwise `dist(B, γB)`.
    pub fn delta(&self, b: &Disc, w: &GroupWord) -> Result<Rat, SchottkyError> {
        if w.is_identity() {
            return Ok(int(1));
        }
        let img = super::disc_image(self.qp, &self.word_map(w), b)?;
        Ok(b.distance(self.qp, &img)?)
    }
}

/// `true` if `piece` lies in the union of `regions`, splitting into children
/// where a region boundary cuts through it.
fn covered(qp: Qp, piece: &Disc, regions: &[Region], depth: u32) -> bool {
    if regions.iter().any(|r| r.contains_disc(qp, piece)) {
        return true;
    }
    if regions.iter().all(|r| r.is_disjoint_from_disc(qp, piece)) || depth > 64 {
        return false;
    }
    piece.children(qp).iter().all(|c| covered(qp, c, regions, depth + 1))
}

/// `F = outer \ ∪ holes`, with the holes pairwise disjoint discs inside `outer`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FundamentalDomain {
    outer: Disc,
    holes: Vec<Disc>,
    pieces: Vec<Disc>,
    #[serde(with = "crate::exact::ratstr")]
    haar: Rat,
}

impl FundamentalDomain {
    pub fn new(qp: Qp, outer: Disc, holes: Vec<Disc>) -> Self {
        let mut pieces = Vec::new();
        split_into_pieces(qp, &outer, &holes, &mut pieces);
        pieces.sort();
        let haar = holes.iter().fold(outer.haar(qp), |acc, h| acc - h.haar(qp));
        Self { outer, holes, pieces, haar }
    }

    pub fn outer(&self) -> &Disc {
        &self.outer
    }

    pub fn holes(&self) -> &[Disc] {
        &self.holes
    }

    /// Maximal discs contained in `F`; they partition `F`.
    pub fn pieces(&self) -> &[Disc] {
        &self.pieces
    }

    /// `μ(F) = haar(outer) - Σ haar(holes)`.
    pub fn haar(&self) -> &Rat {
        &self.haar
    }

    pub fn contains(&self, qp: Qp, x: &Rat) -> bool {
        self.outer.contains(qp, x) && !self.holes.iter().any(|h| h.contains(qp, x))
    }

    pub fn piece_containing(&self, qp: Qp, x: &Rat) -> Option<&Disc> {
        self.pieces.iter().find(|d| d.contains(qp, x))
    }

    /// `min_k p^{t_k + 1}` over holes `D(c_k, t_k)`: the smallest distance a
    /// point of `F` can have from a hole center.
    pub fn min_hole_distance(&self, qp: Qp) -> Rat {
        self.holes.iter().map(|h| qp.pow(h.radius_exp() + 1)).min().unwrap_or_else(|| qp.pow(self.outer.radius_exp() + 1))
    }
}

fn split_into_pieces(qp: Qp, d: &Disc, holes: &[Disc], out: &mut Vec<Disc>) {
    if holes.iter().any(|h| d.is_subset_of(qp, h)) {
        return;
    }
    if holes.iter().all(|h| !d.intersects(qp, h)) {
        out.push(d.clone());
        return;
    }
    for c in d.children(qp) {
        split_into_pieces(qp, &c, holes, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn q3() -> Qp {
        Qp::new(3).unwrap()
    }

    fn tate() -> SchottkyGroup {
        let q = q3();
        SchottkyGroup::new(
            q,
            vec![MoebiusMap::from_i64(9, 0, 0, 1).unwrap()],
            vec![(Region::CoDisc(Disc::new(q, &int(0), 0)), Region::Disc(Disc::new(q, &int(0), -2)))],
            None,
        )
        .unwrap()
    }

    fn genus_two() -> SchottkyGroup {
        let q = q3();
        SchottkyGroup::new(
            q,
            vec![MoebiusMap::from_i64(3, 0, 0, 1).unwrap(), MoebiusMap::from_i64(-53, 52, -26, 25).unwrap()],
            vec![
                (Region::CoDisc(Disc::new(q, &int(0), 0)), Region::Disc(Disc::new(q, &int(0), -1))),
                (Region::Disc(Disc::new(q, &int(2), -2)), Region::Disc(Disc::new(q, &int(1), -2))),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn tate_domain() {
        let q = q3();
        let g = tate();
        let f = g.fundamental_domain();
        assert_eq!(*f.haar(), rat(8, 9));
        let expected: Vec<Disc> = [(1, -1), (2, -1), (3, -2), (6, -2)].iter().map(|&(c, t)| Disc::new(q, &int(c), t)).collect();
        let mut e = expected.clone();
        e.sort();
        assert_eq!(f.pieces(), e.as_slice());
        assert_eq!(f.min_hole_distance(q), rat(1, 3));
        let rep = g.verify_fundamental_domain(6).unwrap();
        assert_eq!(rep.words_checked, 12);
    }

    #[test]
    fn genus_two_domain() {
        let g = genus_two();
        assert_eq!(*g.fundamental_domain().haar(), rat(4, 9));
        g.verify_fundamental_domain(4).unwrap();
    }

    #[test]
    fn swapped_pairing_fails_clause_two() {
        let q = q3();
        let g = SchottkyGroup::new(
            q,
            vec![MoebiusMap::from_i64(9, 0, 0, 1).unwrap()],
            vec![(Region::Disc(Disc::new(q, &int(0), -2)), Region::CoDisc(Disc::new(q, &int(0), 0)))],
            None,
        )
        .unwrap();
        assert!(matches!(g.verify_fundamental_domain(3), Err(SchottkyError::DomainInvalid { clause: 2, .. })));
    }

    #[test]
    fn overlapping_holes_fail_clause_one() {
        let q = q3();
        let g = SchottkyGroup::new(
            q,
            vec![MoebiusMap::from_i64(3, 0, 0, 1).unwrap(), MoebiusMap::from_i64(-53, 52, -26, 25).unwrap()],
            vec![
                (Region::CoDisc(Disc::new(q, &int(0), 0)), Region::Disc(Disc::new(q, &int(0), -1))),
                (Region::Disc(Disc::new(q, &int(3), -2)), Region::Disc(Disc::new(q, &int(1), -2))),
            ],
            None,
        )
        .unwrap();
        assert!(matches!(g.verify_fundamental_domain(3), Err(SchottkyError::DomainInvalid { clause: 1, .. })));
    }

    #[test]
    fn reduction_examples() {
        let g = tate();
        assert_eq!(g.reduce_to_domain(&int(27), 50).unwrap(), (int(3), GroupWord::new([1])));
        assert_eq!(g.reduce_to_domain(&int(1), 50).unwrap(), (int(1), GroupWord::identity()));
        assert_eq!(g.reduce_to_domain(&rat(1, 3), 50).unwrap(), (int(3), GroupWord::new([-1])));
        assert!(matches!(g.reduce_to_domain(&int(0), 50), Err(SchottkyError::ReductionDiverged(_))));
    }

    #[test]
    fn reduction_round_trip_genus_two() {
        let g = genus_two();
        for n in -200i64..200 {
            for d in [1i64, 2, 4, 5, 7, 9, 27] {
                let z = rat(n, d);
                if let Ok((x, w)) = g.reduce_to_domain(&z, 200) {
                    assert!(g.fundamental_domain().contains(g.qp(), &x));
                    assert_eq!(g.word_map(&w).apply(&x).unwrap(), z);
                }
            }
        }
    }

    #[test]
    fn delta_examples() {
        let q = q3();
        let g = tate();
        let b = Disc::new(q, &int(1), -1);
        assert_eq!(g.delta(&b, &GroupWord::identity()).unwrap(), int(1));
        assert_eq!(g.delta(&b, &GroupWord::new([1])).unwrap(), int(1));
        assert_eq!(g.delta(&b, &GroupWord::new([-1])).unwrap(), int(9));
    }

    #[test]
    fn element_maps_match_words() {
        let g = genus_two();
        let blocks = g.elements(4);
        for (len, block) in blocks.iter().enumerate() {
            assert_eq!(block.len() as u128, super::super::word_count(2, len));
            for e in block {
                assert_eq!(e.map, g.word_map(&e.word));
            }
        }
    }
}
