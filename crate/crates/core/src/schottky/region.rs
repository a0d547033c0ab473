use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MoebiusMap, SchottkyError};
use crate::padic::{Disc, Qp};
use crate::exact::Rat;

/// A closed disc of `K`, or the complement of one in `P¹(K)` (which contains `∞`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "disc", rename_all = "snake_case")]
pub enum Region {
    Disc(Disc),
    CoDisc(Disc),
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Disc(d) => write!(f, "{d}"),
            Region::CoDisc(d) => write!(f, "P1 \\ {d}"),
        }
    }
}

impl Region {
    pub fn complement(&self) -> Region {
        match self {
            Region::Disc(d) => Region::CoDisc(d.clone()),
            Region::CoDisc(d) => Region::Disc(d.clone()),
        }
    }

    pub fn boundary_disc(&self) -> &Disc {
        match self {
            Region::Disc(d) | Region::CoDisc(d) => d,
        }
    }

    pub fn as_disc(&self) -> Option<&Disc> {
        match self {
            Region::Disc(d) => Some(d),
            Region::CoDisc(_) => None,
        }
    }

    pub fn contains_infinity(&self) -> bool {
        matches!(self, Region::CoDisc(_))
    }

    pub fn contains(&self, qp: Qp, x: &Rat) -> bool {
        match self {
            Region::Disc(d) => d.contains(qp, x),
            Region::CoDisc(d) => !d.contains(qp, x),
        }
    }

    pub fn contains_disc(&self, qp: Qp, e: &Disc) -> bool {
        match self {
            Region::Disc(d) => e.is_subset_of(qp, d),
            Region::CoDisc(d) => !e.intersects(qp, d),
        }
    }

    pub fn is_disjoint_from_disc(&self, qp: Qp, e: &Disc) -> bool {
        match self {
            Region::Disc(d) => !e.intersects(qp, d),
            Region::CoDisc(d) => e.is_subset_of(qp, d),
        }
    }

    pub fn is_subset_of(&self, qp: Qp, other: &Region) -> bool {
        match (self, other) {
            (Region::Disc(a), _) => other.contains_disc(qp, a),
            (Region::CoDisc(_), Region::Disc(_)) => false,
            (Region::CoDisc(a), Region::CoDisc(b)) => b.is_subset_of(qp, a),
        }
    }

    pub fn is_disjoint_from(&self, qp: Qp, other: &Region) -> bool {
        match (self, other) {
            (Region::Disc(a), _) => other.is_disjoint_from_disc(qp, a),
            (Region::CoDisc(_), Region::Disc(b)) => self.is_disjoint_from_disc(qp, b),
            (Region::CoDisc(_), Region::CoDisc(_)) => false,
        }
    }
}

/// Image of a disc whose closure avoids the pole: `D(γ(c), |γ'(c)|·r)`.
pub fn disc_image(qp: Qp, gamma: &MoebiusMap, d: &Disc) -> Result<Disc, SchottkyError> {
    if let Some(z0) = gamma.pole() {
        if d.contains(qp, &z0) {
            return Err(SchottkyError::PoleInsideDisc(d.clone()));
        }
    }
    let c = d.center();
    let center = gamma.apply(c)?;
    let scale = qp.log_exact(&gamma.derivative_abs(qp, c)?).unwrap();
    Ok(Disc::new(qp, &center, d.radius_exp() + scale))
}

/// Image of a region. A disc containing the pole maps onto the complement of
/// `D(a/c, s-1)` where `p^s = |det|/|c|² · r^{-1}`.
pub fn region_image(qp: Qp, gamma: &MoebiusMap, r: &Region) -> Region {
    let d = r.boundary_disc();
    let img = match gamma.pole() {
        Some(z0) if d.contains(qp, &z0) => {
            let [_, _, c, _] = gamma.entries();
            let c = Rat::from(c.clone());
            let det = Rat::from(gamma.det());
            let s = qp.abs_exp(&det).unwrap() - 2 * qp.abs_exp(&c).unwrap() - d.radius_exp();
            Region::CoDisc(Disc::new(qp, &gamma.at_infinity().unwrap(), s - 1))
        }
        _ => Region::Disc(disc_image(qp, gamma, d).expect("pole outside disc")),
    };
    match r {
        Region::Disc(_) => img,
        Region::CoDisc(_) => img.complement(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use proptest::prelude::*;

    fn q3() -> Qp {
        Qp::new(3).unwrap()
    }

    #[test]
    fn disc_image_examples() {
        let q = q3();
        let g = MoebiusMap::from_i64(9, 0, 0, 1).unwrap();
        let b = Disc::new(q, &int(1), -1);
        let img = disc_image(q, &g, &b).unwrap();
        assert_eq!(img, Disc::new(q, &int(9), -3));
        assert_eq!(disc_image(q, &MoebiusMap::identity(), &b).unwrap(), b);
        assert_eq!(disc_image(q, &g.inverse(), &img).unwrap(), b);
    }

    #[test]
    fn pole_inside_maps_to_codisc() {
        let q = q3();
        let g2 = MoebiusMap::from_i64(-53, 52, -26, 25).unwrap();
        let d2 = Disc::new(q, &int(2), -2);
        assert!(matches!(disc_image(q, &g2, &d2), Err(SchottkyError::PoleInsideDisc(_))));
        let img = region_image(q, &g2, &Region::Disc(d2.clone()));
        assert_eq!(img, Region::CoDisc(Disc::new(q, &int(1), -2)));
        assert_eq!(region_image(q, &g2, &Region::CoDisc(d2)), Region::Disc(Disc::new(q, &int(1), -2)));
        let s = MoebiusMap::from_i64(0, 1, 1, 0).unwrap();
        assert_eq!(
            region_image(q, &s, &Region::Disc(Disc::new(q, &int(0), 0))),
            Region::CoDisc(Disc::new(q, &int(0), -1))
        );
    }

    #[test]
    fn region_relations() {
        let q = q3();
        let big = Disc::new(q, &int(0), 0);
        let small = Disc::new(q, &int(0), -2);
        let other = Disc::new(q, &int(1), -1);
        assert!(Region::CoDisc(big.clone()).is_subset_of(q, &Region::CoDisc(small.clone())));
        assert!(!Region::CoDisc(small.clone()).is_subset_of(q, &Region::CoDisc(big.clone())));
        assert!(Region::Disc(other.clone()).is_subset_of(q, &Region::CoDisc(small.clone())));
        assert!(Region::Disc(small.clone()).is_disjoint_from(q, &Region::CoDisc(big.clone())));
        assert!(!Region::CoDisc(small).is_disjoint_from(q, &Region::CoDisc(other)));
        assert!(Region::CoDisc(big).contains(q, &rat(1, 3)));
    }

    proptest! {
        #[test]
        fn image_contains_point_images(
            (a, b, c, d) in (-20i64..20, -20i64..20, -20i64..20, -20i64..20).prop_filter("inv", |(a, b, c, d)| a * d != b * c),
            cn in -50i64..50, t in -3i64..2, off in 0i64..200,
        ) {
            let q = q3();
            let g = MoebiusMap::from_i64(a, b, c, d).unwrap();
            let disc = Disc::new(q, &int(cn), t);
            let x = disc.center() + q.pow(t) * int(off);
            prop_assume!(disc.contains(q, &x));
            let img = region_image(q, &g, &Region::Disc(disc.clone()));
            match g.apply(&x) {
                Ok(y) => prop_assert!(img.contains(q, &y)),
                Err(_) => prop_assert!(img.contains_infinity()),
            }
            if let Ok(e) = disc_image(q, &g, &disc) {
                let dv = g.derivative_abs(q, disc.center()).unwrap();
                prop_assert_eq!(e.haar(q), dv * disc.haar(q));
            }
        }
    }
}
