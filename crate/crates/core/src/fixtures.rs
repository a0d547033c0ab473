//! Built-in example groups and data used by tests, docs and the CLI.

use crate::exact::int;
use crate::measure::RationalFunctionDatum;
use crate::padic::{Disc, Qp};
use crate::schottky::{MoebiusMap, Region, SchottkyGroup};

/// Tate curve over `Q_3` with `q = 9`: `F = D(0,0) \ D(0,-2)`.
pub fn tate_group() -> SchottkyGroup {
    let q = Qp::new(3).unwrap();
    SchottkyGroup::new(
        q,
        vec![MoebiusMap::from_i64(9, 0, 0, 1).unwrap()],
        vec![(Region::CoDisc(Disc::new(q, &int(0), 0)), Region::Disc(Disc::new(q, &int(0), -2)))],
        None,
    )
    .unwrap()
}

/// `f(z) = 1/z`, the invariant form `dz/z` on the Tate curve.
pub fn tate_datum() -> RationalFunctionDatum {
    RationalFunctionDatum::with_roots(int(1), [(int(0), -1)])
}

/// Genus 2 over `Q_3`: `γ1 = diag(3,1)` and a second generator with
/// attracting fixed point 1, repelling fixed point 2 and multiplier 27.
pub fn genus_two_group() -> SchottkyGroup {
    let q = Qp::new(3).unwrap();
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

/// Genus 0: the unit ball with no holes.
pub fn unit_ball(q: Qp) -> SchottkyGroup {
    SchottkyGroup::new(q, Vec::new(), Vec::new(), Some(Disc::new(q, &int(0), 0))).unwrap()
}
