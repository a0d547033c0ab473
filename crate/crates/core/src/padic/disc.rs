use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::Qp;
use crate::exact::{fmt_rat, int, ratstr, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiscError {
    #[error("discs {0} and {1} intersect")]
    DiscsIntersect(Disc, Disc),
    #[error("{inner} is not contained in {outer}")]
    NotNested { outer: Disc, inner: Disc },
}

/// Closed ball `{x : |x - center| ≤ p^radius_exp}`.
///
/// The center is stored in canonical form (see [`Qp::canonical_center`]),
/// so structural equality is set equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Disc {
    #[serde(with = "ratstr")]
    center: Rat,
    radius_exp: i64,
}

impl fmt::Display for Disc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D({}, {})", fmt_rat(&self.center), self.radius_exp)
    }
}

impl Disc {
    pub fn new(qp: Qp, center: &Rat, radius_exp: i64) -> Self {
        Self { center: qp.canonical_center(center, radius_exp), radius_exp }
    }

    pub fn center(&self) -> &Rat {
        &self.center
    }

    /// `t` with radius `p^t`. In the `|π|^{-d}` convention, `d = t` (f = 1).
    pub fn radius_exp(&self) -> i64 {
        self.radius_exp
    }

    pub fn radius(&self, qp: Qp) -> Rat {
        qp.pow(self.radius_exp)
    }

    pub fn contains(&self, qp: Qp, x: &Rat) -> bool {
        match qp.valuation(&(x - &self.center)) {
            None => true,
            Some(v) => -v <= self.radius_exp,
        }
    }

    /// Haar measure `p^t`, normalised so the unit ball has measure 1.
    pub fn haar(&self, qp: Qp) -> Rat {
        qp.pow(self.radius_exp)
    }

    pub fn is_subset_of(&self, qp: Qp, other: &Disc) -> bool {
        self.radius_exp <= other.radius_exp && other.contains(qp, &self.center)
    }

    pub fn intersects(&self, qp: Qp, other: &Disc) -> bool {
        if self.radius_exp <= other.radius_exp {
            other.contains(qp, &self.center)
        } else {
            self.contains(qp, &other.center)
        }
    }

    /// The `p` sub-discs one level down.
    pub fn children(&self, qp: Qp) -> Vec<Disc> {
        let step = qp.pow(-self.radius_exp);
        (0..qp.p() as i64)
            .map(|i| Disc::new(qp, &(&self.center + &step * int(i)), self.radius_exp - 1))
            .collect()
    }

    pub fn parent(&self, qp: Qp) -> Disc {
        Disc::new(qp, &self.center, self.radius_exp + 1)
    }

    /// The child sub-disc containing `x`, if `x` lies in this disc.
    pub fn child_containing(&self, qp: Qp, x: &Rat) -> Option<Disc> {
        self.contains(qp, x).then(|| Disc::new(qp, x, self.radius_exp - 1))
    }

    /// All sub-discs of radius `p^level_exp` (`level_exp ≤ t`).
    pub fn descendants_at(&self, qp: Qp, level_exp: i64) -> Vec<Disc> {
        let mut cur = vec![self.clone()];
        for _ in level_exp..self.radius_exp {
            cur = cur.iter().flat_map(|d| d.children(qp)).collect();
        }
        cur
    }

    /// Distance between disjoint discs, `|c1 - c2|`; constant over all
    /// point pairs by the ultrametric inequality.
    pub fn distance(&self, qp: Qp, other: &Disc) -> Result<Rat, DiscError> {
        if self.intersects(qp, other) {
            return Err(DiscError::DiscsIntersect(self.clone(), other.clone()));
        }
        Ok(qp.abs(&(&self.center - &other.center)))
    }
}

/// `outer \ inner` for nested discs, e.g. a sphere `D(0,t) \ D(0,t-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscDifference {
    pub outer: Disc,
    pub inner: Disc,
}

impl DiscDifference {
    pub fn new(qp: Qp, outer: Disc, inner: Disc) -> Result<Self, DiscError> {
        if !inner.is_subset_of(qp, &outer) {
            return Err(DiscError::NotNested { outer, inner });
        }
        Ok(Self { outer, inner })
    }

    /// The sphere `{|x - c| = p^t}`.
    pub fn sphere(qp: Qp, center: &Rat, radius_exp: i64) -> Self {
        Self {
            outer: Disc::new(qp, center, radius_exp),
            inner: Disc::new(qp, center, radius_exp - 1),
        }
    }

    pub fn haar(&self, qp: Qp) -> Rat {
        self.outer.haar(qp) - self.inner.haar(qp)
    }

    pub fn contains(&self, qp: Qp, x: &Rat) -> bool {
        self.outer.contains(qp, x) && !self.inner.contains(qp, x)
    }
}

impl Default for Disc {
    fn default() -> Self {
        Self { center: Rat::zero(), radius_exp: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn q3() -> Qp {
        Qp::new(3).unwrap()
    }

    #[test]
    fn haar_examples() {
        let q = q3();
        assert_eq!(Disc::new(q, &int(0), -2).haar(q), rat(1, 9));
        assert_eq!(Disc::new(q, &int(1), 0).haar(q), int(1));
        assert_eq!(DiscDifference::sphere(q, &int(0), 0).haar(q), rat(2, 3));
    }

    #[test]
    fn canonical_equality() {
        let q = q3();
        assert_eq!(Disc::new(q, &int(1), -1), Disc::new(q, &int(4), -1));
        assert_ne!(Disc::new(q, &int(1), -1), Disc::new(q, &int(2), -1));
        assert_eq!(Disc::new(q, &int(1), 0), Disc::new(q, &int(0), 0));
    }

    #[test]
    fn distance_examples() {
        let q = q3();
        let d = |c: i64, t: i64| Disc::new(q, &int(c), t);
        assert_eq!(d(1, -1).distance(q, &d(9, -3)).unwrap(), int(1));
        assert_eq!(d(1, -1).distance(q, &d(2, -1)).unwrap(), int(1));
        assert_eq!(d(3, -2).distance(q, &d(6, -2)).unwrap(), rat(1, 3));
        assert!(d(0, 0).distance(q, &d(1, -1)).is_err());
    }

    #[test]
    fn children_partition() {
        let q = q3();
        let d = Disc::new(q, &int(1), -1);
        let ch = d.children(q);
        assert_eq!(ch.len(), 3);
        for c in &ch {
            assert!(c.is_subset_of(q, &d));
            assert_eq!(c.parent(q), d);
        }
        assert!(ch.contains(&Disc::new(q, &int(7), -2)));
        assert_eq!(d.descendants_at(q, -3).len(), 9);
    }

    proptest! {
        #[test]
        fn nested_or_disjoint(c1 in -200i64..200, c2 in -200i64..200, d1 in 1i64..30,
                              t1 in -4i64..2, t2 in -4i64..2, pi in 0usize..3) {
            let q = Qp::new([2, 3, 5][pi]).unwrap();
            let a = Disc::new(q, &rat(c1, d1), t1);
            let b = Disc::new(q, &rat(c2, 1), t2);
            if a.intersects(q, &b) {
                prop_assert!(a.is_subset_of(q, &b) || b.is_subset_of(q, &a));
            }
        }

        #[test]
        fn haar_additive_over_children(c in -500i64..500, t in -5i64..3, pi in 0usize..3) {
            let q = Qp::new([2, 3, 5][pi]).unwrap();
            let d = Disc::new(q, &int(c), t);
            let total: Rat = d.children(q).iter().map(|ch| ch.haar(q)).sum();
            prop_assert_eq!(total, d.haar(q));
        }
    }
}
