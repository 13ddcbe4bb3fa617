//! Quasi-stable direction sets.
//!
//! Starting from the stable set of a critical family with finitely many
//! stable directions, rational directions are inserted between consecutive
//! elements until every consecutive pair `(u, v)` admits an update rule
//! contained in the closed cone `H̄_u ∩ H̄_v`. The result is then reflected
//! at the reference direction `u0` and closed under quarter turns, giving a
//! cyclically ordered set of `4k` directions that serves as the normal fan
//! of every droplet polygon.

use thiserror::Error;

use crate::family::UpdateFamily;
use crate::lattice::{Direction, Vec2};
use crate::stable::{classify_from_stable_set, stable_set, UniversalityClass};

/// The `4k` droplet normals: cyclically ordered clockwise from `u0`,
/// invariant under quarter turns and under reflection at `u0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuasiStableSet {
    dirs: Vec<Direction>,
    k: usize,
    u0: Direction,
    s_prime: Vec<Direction>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum QuasiStableError {
    #[error("family is not critical with a finite stable set")]
    NotFiniteCritical,
    #[error(
        "no quasi-stable completion found inserting directions of denominator <= {bound} \
         between {a} and {b}"
    )]
    InsertionBoundExceeded { a: Direction, b: Direction, bound: i64 },
}

impl QuasiStableSet {
    /// Directions in clockwise order starting at `u0`.
    pub fn directions(&self) -> &[Direction] {
        &self.dirs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn u0(&self) -> Direction {
        self.u0
    }

    pub fn s_prime(&self) -> &[Direction] {
        &self.s_prime
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Direction `u_i`, index taken modulo `4k` (negative indices wrap).
    pub fn dir(&self, i: i64) -> Direction {
        let n = self.dirs.len() as i64;
        self.dirs[i.rem_euclid(n) as usize]
    }

    /// Primitive vector of `u_i`.
    pub fn vec(&self, i: i64) -> Vec2 {
        self.dir(i).vec()
    }

    /// The directions of the half-circle centred at `u0`:
    /// `u_{-k+1}, ..., u_{k-1}`.
    pub fn central_half(&self) -> Vec<Direction> {
        let k = self.k as i64;
        ((-k + 1)..=(k - 1)).map(|i| self.dir(i)).collect()
    }
}

/// Does some rule fit inside the closed cone `H̄_u ∩ H̄_v`?
fn pair_has_rule(fam: &UpdateFamily, u: Direction, v: Direction) -> bool {
    fam.rules().iter().any(|r| {
        r.sites()
            .iter()
            .all(|&y| y.dot(u.vec()) <= 0 && y.dot(v.vec()) <= 0)
    })
}

/// Smallest-denominator direction strictly inside the clockwise gap from
/// `a` to `b` (i.e. the counterclockwise arc from `b` to `a`), enumerated
/// Stern-Brocot style through mediants.
fn insert_candidate(a: Direction, b: Direction, bound: i64) -> Option<Direction> {
    // mediant descent: repeatedly take mediants, keeping the candidate with
    // the smallest norm; enumerate by increasing coefficient sum
    let mut best: Option<Direction> = None;
    for m in 1..=bound {
        for i in 1..m {
            let j = m - i;
            let w = b.vec() * i + a.vec() * j;
            if w.is_zero() {
                continue;
            }
            let d = Direction::new(w);
            if d.strictly_inside_ccw(b, a) {
                best = Some(d);
                break;
            }
        }
        if best.is_some() {
            break;
        }
    }
    best
}

/// Builds the quasi-stable set for a critical family with finite stable set
/// around the reference direction `u0`.
///
/// `u0` is taken as given (callers usually pass the midpoint of an optimal
/// open semicircle reported by the family analysis) and joined into the
/// seed set, so it always appears among the output directions.
pub fn quasi_stable_set(
    fam: &UpdateFamily,
    u0: Direction,
) -> Result<QuasiStableSet, QuasiStableError> {
    quasi_stable_set_bounded(fam, u0, 64)
}

pub fn quasi_stable_set_bounded(
    fam: &UpdateFamily,
    u0: Direction,
    denominator_bound: i64,
) -> Result<QuasiStableSet, QuasiStableError> {
    let s = stable_set(fam);
    let class = classify_from_stable_set(&s);
    if class.kind != UniversalityClass::Critical || !s.is_finite() {
        return Err(QuasiStableError::NotFiniteCritical);
    }

    // seed: stable directions plus u0, in counterclockwise order
    let mut sp: Vec<Direction> = s.isolated.clone();
    sp.push(u0);
    crate::lattice::sort_ccw(&mut sp);

    // insertion loop over consecutive pairs in clockwise order: the pair
    // (u, v) with v the clockwise successor of u needs a rule inside
    // H̄_u ∩ H̄_v; inserting a direction between them only ever helps
    loop {
        let n = sp.len();
        let mut failing: Option<(Direction, Direction)> = None;
        for i in 0..n {
            let u = sp[i];
            let v = sp[(i + n - 1) % n]; // clockwise successor in ccw-sorted order
            if !pair_has_rule(fam, u, v) {
                failing = Some((u, v));
                break;
            }
        }
        let Some((u, v)) = failing else { break };
        let w = insert_candidate(u, v, denominator_bound).ok_or(
            QuasiStableError::InsertionBoundExceeded {
                a: u,
                b: v,
                bound: denominator_bound,
            },
        )?;
        sp.push(w);
        crate::lattice::sort_ccw(&mut sp);
        if sp.len() == n {
            // candidate already present: cannot make progress
            return Err(QuasiStableError::InsertionBoundExceeded {
                a: u,
                b: v,
                bound: denominator_bound,
            });
        }
    }

    // symmetrise: reflections at u0, then quarter-turn closure
    let mut dirs: Vec<Direction> = Vec::new();
    for &u in &sp {
        for base in [u, u.reflect_across(u0)] {
            let mut d = base;
            for _ in 0..4 {
                dirs.push(d);
                d = d.rot_ccw();
            }
        }
    }
    crate::lattice::sort_ccw(&mut dirs);
    debug_assert_eq!(dirs.len() % 4, 0);

    // rotate the cyclic order to start at u0 and flip to clockwise
    let pos = dirs
        .iter()
        .position(|&d| d == u0)
        .expect("u0 is in its own orbit");
    let mut ordered = Vec::with_capacity(dirs.len());
    ordered.push(dirs[pos]);
    let n = dirs.len();
    for step in 1..n {
        ordered.push(dirs[(pos + n - step) % n]);
    }

    Ok(QuasiStableSet {
        k: ordered.len() / 4,
        u0,
        s_prime: sp,
        dirs: ordered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::zoo;
    use crate::lattice::v2;

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(v2(x, y))
    }

    #[test]
    fn two_neighbour_axes_with_west_reference() {
        let qs = quasi_stable_set(&zoo::two_neighbour(), d(-1, 0)).unwrap();
        assert_eq!(qs.k(), 1);
        assert_eq!(
            qs.directions(),
            &[d(-1, 0), d(0, 1), d(1, 0), d(0, -1)],
            "clockwise from west"
        );
        assert_eq!(qs.s_prime(), &[d(1, 0), d(0, 1), d(-1, 0), d(0, -1)]);
    }

    #[test]
    fn east_heavy_axes_with_west_reference() {
        let qs = quasi_stable_set(&zoo::east_heavy(), d(-1, 0)).unwrap();
        assert_eq!(qs.k(), 1);
        assert_eq!(qs.directions(), &[d(-1, 0), d(0, 1), d(1, 0), d(0, -1)]);
    }

    #[test]
    fn duarte_is_rejected() {
        assert_eq!(
            quasi_stable_set(&zoo::duarte(), d(-1, 0)),
            Err(QuasiStableError::NotFiniteCritical)
        );
    }

    #[test]
    fn symmetry_invariants() {
        for u0 in [d(-1, 0), d(1, 0), d(0, 1)] {
            let qs = quasi_stable_set(&zoo::two_neighbour(), u0).unwrap();
            let n = qs.len() as i64;
            assert_eq!(n % 4, 0);
            let k = qs.k() as i64;
            for i in 0..n {
                // quarter-turn: u_{i+k} is u_i rotated clockwise
                assert_eq!(qs.dir(i + k), qs.dir(i).rot_cw(), "index {i}");
                // antipodal pairing
                assert_eq!(qs.dir(i + 2 * k), qs.dir(i).neg());
                // reflection closure at u0
                assert!(qs
                    .directions()
                    .contains(&qs.dir(i).reflect_across(qs.u0())));
            }
            // contains all stable directions
            let s = crate::stable::stable_set(&zoo::two_neighbour());
            for p in &s.isolated {
                assert!(qs.directions().contains(p));
            }
        }
    }

    #[test]
    fn consecutive_pairs_have_rules() {
        for fam in [zoo::two_neighbour(), zoo::east_heavy()] {
            let qs = quasi_stable_set(&fam, d(-1, 0)).unwrap();
            let sp = qs.s_prime();
            let n = sp.len();
            for i in 0..n {
                let u = sp[i];
                let v = sp[(i + 1) % n];
                assert!(pair_has_rule(&fam, u, v), "{} pair {u:?} {v:?}", fam.name());
            }
        }
    }

    #[test]
    fn insertion_is_needed_for_sparse_families() {
        // the family whose sole rule sits deep in the third quadrant makes
        // axis pairs fail the cone condition unless diagonals are inserted
        let fam = crate::family::parse_family("-1 -1", "needs-diagonals").unwrap();
        // stable set of this family: rule fits in H_u for u in the open
        // quadrant around (1,1); the stable set is a closed 3/4 arc, so the
        // family is supercritical, not finite critical
        assert_eq!(
            quasi_stable_set(&fam, d(-1, 0)),
            Err(QuasiStableError::NotFiniteCritical)
        );
    }

    #[test]
    fn central_half_for_square_fan() {
        let qs = quasi_stable_set(&zoo::two_neighbour(), d(-1, 0)).unwrap();
        assert_eq!(qs.central_half(), vec![d(-1, 0)]);
    }
}
