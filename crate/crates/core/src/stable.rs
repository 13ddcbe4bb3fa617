//! Stable directions of an update family and the coarse classification.
//!
//! A direction `u` is stable when no rule fits inside the open half-plane
//! `H_u = {x : <x,u> < 0}`. Per rule, the set of directions it destabilises
//! is an open arc with rational endpoints, so the full stable set is computed
//! exactly: it is the closed complement of a finite union of open arcs.

use crate::family::UpdateFamily;
use crate::lattice::{Direction, GapSize, Vec2};

/// Closed arc of directions swept counterclockwise from `start` to `end`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ClosedArc {
    pub start: Direction,
    pub end: Direction,
}

impl ClosedArc {
    pub fn contains(&self, u: Direction) -> bool {
        u.inside_ccw_closed(self.start, self.end)
    }

    /// Strict interior membership (endpoints excluded).
    pub fn contains_interior(&self, u: Direction) -> bool {
        u != self.start && u != self.end && u.strictly_inside_ccw(self.start, self.end)
    }
}

/// The set of stable directions, decomposed into maximal closed arcs and
/// isolated points. `full_circle` covers the subcritical families whose
/// stable set is all of the circle.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StableSet {
    pub full_circle: bool,
    pub arcs: Vec<ClosedArc>,
    pub isolated: Vec<Direction>,
}

impl StableSet {
    pub fn is_empty(&self) -> bool {
        !self.full_circle && self.arcs.is_empty() && self.isolated.is_empty()
    }

    /// Finitely many stable directions?
    pub fn is_finite(&self) -> bool {
        !self.full_circle && self.arcs.is_empty()
    }

    pub fn contains(&self, u: Direction) -> bool {
        self.full_circle
            || self.isolated.contains(&u)
            || self.arcs.iter().any(|a| a.contains(u))
    }

    /// Membership in the closed arc part (these are exactly the
    /// non-isolated stable directions).
    pub fn in_arc_part(&self, u: Direction) -> bool {
        self.full_circle || self.arcs.iter().any(|a| a.contains(u))
    }
}

/// Direct stability test: `u` is stable iff every rule has a site `y` with
/// `<y, v(u)> >= 0`.
pub fn is_stable(u: Direction, fam: &UpdateFamily) -> bool {
    let v = u.vec();
    !fam.rules()
        .iter()
        .any(|r| r.sites().iter().all(|y| y.dot(v) < 0))
}

/// Open arc of directions destabilised by one rule, or `None` when the rule
/// stabilises every direction (it contains two opposite-cone sites).
///
/// The arc is `{u : X subset H_u}`: the intersection of the open
/// half-circles `{u : <y,u> < 0}` over the rule sites `y`. When the sites
/// span a cone of angle `s < pi`, the result is the open arc of length
/// `pi - s` swept counterclockwise from `rot_ccw(most-ccw site)` to
/// `rot_cw(most-cw site)`.
fn unstable_arc(sites: &[Vec2]) -> Option<(Direction, Direction)> {
    let dirs: Vec<Direction> = {
        let mut d: Vec<Direction> = sites.iter().map(|&s| Direction::new(s)).collect();
        crate::lattice::sort_ccw(&mut d);
        d
    };
    if dirs.len() == 1 {
        let d = dirs[0];
        return Some((d.rot_ccw(), d.rot_cw()));
    }
    // find the largest ccw gap between consecutive site directions; the
    // sites span an open half-plane iff that gap exceeds pi
    let mut best: Option<(usize, GapSize)> = None;
    for i in 0..dirs.len() {
        let j = (i + 1) % dirs.len();
        let gap = dirs[i].ccw_gap_vs_pi(dirs[j]);
        match gap {
            GapSize::MoreThanPi => {
                best = Some((i, gap));
                break;
            }
            _ => {
                if best.is_none() {
                    best = Some((i, gap));
                }
            }
        }
    }
    let (i, _) = best.unwrap();
    let j = (i + 1) % dirs.len();
    match dirs[i].ccw_gap_vs_pi(dirs[j]) {
        GapSize::MoreThanPi => {
            // dirs[j] is the most-clockwise site, dirs[i] the most-ccw one;
            // every site is a nonnegative combination of these two
            let e_cw = dirs[j];
            let e_ccw = dirs[i];
            debug_assert!(matches!(
                e_cw.ccw_gap_vs_pi(e_ccw),
                GapSize::LessThanPi | GapSize::Zero
            ));
            let start = e_ccw.rot_ccw();
            let end = e_cw.rot_cw();
            if start == end {
                None
            } else {
                Some((start, end))
            }
        }
        _ => None,
    }
}

/// Computes the stable set exactly.
pub fn stable_set(fam: &UpdateFamily) -> StableSet {
    let arcs: Vec<(Direction, Direction)> = fam
        .rules()
        .iter()
        .filter_map(|r| unstable_arc(r.sites()))
        .collect();
    if arcs.is_empty() {
        return StableSet {
            full_circle: true,
            arcs: vec![],
            isolated: vec![],
        };
    }

    // partition the circle at every arc endpoint, then decide stability of
    // each elementary point and each elementary open interval
    let mut points: Vec<Direction> = arcs.iter().flat_map(|&(s, e)| [s, e]).collect();
    crate::lattice::sort_ccw(&mut points);
    let n = points.len();
    let in_union = |u: Direction| arcs.iter().any(|&(s, e)| u.strictly_inside_ccw(s, e));

    let point_stable: Vec<bool> = points.iter().map(|&p| !in_union(p)).collect();
    let interval_stable: Vec<bool> = (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            let sample = if n == 1 {
                a.neg()
            } else {
                Direction::sample_strictly_between_ccw(a, b)
            };
            !in_union(sample)
        })
        .collect();

    if point_stable.iter().all(|&s| s) && interval_stable.iter().all(|&s| s) {
        return StableSet {
            full_circle: true,
            arcs: vec![],
            isolated: vec![],
        };
    }

    // walk maximal stable runs; a stable interval always has stable
    // endpoints, so each run is a closed arc (point..point) or an isolated
    // point
    let mut out_arcs = Vec::new();
    let mut out_isolated = Vec::new();
    let mut visited = vec![false; n];
    for i in 0..n {
        if visited[i] || !point_stable[i] {
            continue;
        }
        // extend backwards only at run beginnings: skip any point whose
        // preceding interval is stable, it belongs to an earlier run
        let prev = (i + n - 1) % n;
        if interval_stable[prev] {
            continue;
        }
        let start = i;
        let mut endp = i;
        visited[i] = true;
        let mut has_interval = false;
        while interval_stable[endp] {
            has_interval = true;
            endp = (endp + 1) % n;
            debug_assert!(point_stable[endp]);
            if endp == start {
                break;
            }
            visited[endp] = true;
        }
        if has_interval {
            out_arcs.push(ClosedArc {
                start: points[start],
                end: points[endp],
            });
        } else {
            out_isolated.push(points[start]);
        }
    }
    StableSet {
        full_circle: false,
        arcs: out_arcs,
        isolated: out_isolated,
    }
}

/// Universality class of an update family.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UniversalityClass {
    Supercritical,
    Critical,
    Subcritical,
}

impl std::fmt::Display for UniversalityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            UniversalityClass::Supercritical => "supercritical",
            UniversalityClass::Critical => "critical",
            UniversalityClass::Subcritical => "subcritical",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Classification {
    pub kind: UniversalityClass,
    pub stable_set_finite: bool,
    /// Midpoint of a witnessing open semicircle: disjoint from the stable
    /// set for supercritical families, meeting it finitely for critical
    /// ones. `None` for subcritical families.
    pub witness_semicircle: Option<Direction>,
}

/// All stable "features" (arc endpoints and isolated points) in
/// counterclockwise order.
fn feature_points(s: &StableSet) -> Vec<Direction> {
    let mut pts: Vec<Direction> = s.isolated.clone();
    for a in &s.arcs {
        pts.push(a.start);
        pts.push(a.end);
    }
    crate::lattice::sort_ccw(&mut pts);
    pts
}

/// Candidate open semicircles: for each stable feature `p` (and its
/// antipode), the open semicircle starting at `p` counterclockwise. Every
/// combinatorially distinct position of an open semicircle relative to the
/// stable set occurs among these.
pub(crate) fn candidate_semicircles(s: &StableSet) -> Vec<Direction> {
    let mut starts = Vec::new();
    for p in feature_points(s) {
        starts.push(p);
        starts.push(p.neg());
    }
    crate::lattice::sort_ccw(&mut starts);
    starts
}

/// Does the open semicircle starting counterclockwise at `start` avoid the
/// stable set entirely?
fn semicircle_avoids(s: &StableSet, start: Direction) -> bool {
    let end = start.neg();
    if s.full_circle {
        return false;
    }
    for p in &s.isolated {
        if p.strictly_inside_ccw(start, end) {
            return false;
        }
    }
    for a in &s.arcs {
        // an open semicircle meets a closed arc iff it contains one of the
        // arc endpoints or lies inside the arc entirely
        if a.start.strictly_inside_ccw(start, end)
            || a.end.strictly_inside_ccw(start, end)
            || a.contains(Direction::sample_strictly_between_ccw(start, end))
        {
            return false;
        }
    }
    true
}

/// Does the open semicircle starting at `start` meet the arc part of the
/// stable set (equivalently, meet it in infinitely many directions)?
fn semicircle_meets_arcs(s: &StableSet, start: Direction) -> bool {
    if s.full_circle {
        return true;
    }
    let end = start.neg();
    s.arcs.iter().any(|a| {
        a.start.strictly_inside_ccw(start, end)
            || a.end.strictly_inside_ccw(start, end)
            || a.contains(Direction::sample_strictly_between_ccw(start, end))
    })
}

/// Classifies the family from the exact arc structure of its stable set.
pub fn classify(fam: &UpdateFamily) -> Classification {
    let s = stable_set(fam);
    classify_from_stable_set(&s)
}

pub fn classify_from_stable_set(s: &StableSet) -> Classification {
    let finite = s.is_finite();
    if s.is_empty() {
        // every semicircle avoids the empty stable set
        return Classification {
            kind: UniversalityClass::Supercritical,
            stable_set_finite: true,
            witness_semicircle: Some(Direction::new(crate::lattice::E1)),
        };
    }

    let candidates = candidate_semicircles(s);
    for &start in &candidates {
        if semicircle_avoids(s, start) {
            return Classification {
                kind: UniversalityClass::Supercritical,
                stable_set_finite: finite,
                witness_semicircle: Some(start.rot_ccw()),
            };
        }
    }
    // not supercritical; critical iff some open semicircle meets S only
    // finitely often, i.e. misses the arc part
    for &start in &candidates {
        if !semicircle_meets_arcs(s, start) {
            return Classification {
                kind: UniversalityClass::Critical,
                stable_set_finite: finite,
                witness_semicircle: Some(start.rot_ccw()),
            };
        }
    }
    Classification {
        kind: UniversalityClass::Subcritical,
        stable_set_finite: false,
        witness_semicircle: None,
    }
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
    fn is_stable_spec_cases() {
        assert!(is_stable(d(0, 1), &zoo::east_heavy()));
        assert!(!is_stable(d(1, 1), &zoo::two_neighbour()));
        let single = crate::family::parse_family("1 0", "single").unwrap();
        assert!(is_stable(d(1, 0), &single));
    }

    #[test]
    fn two_neighbour_stable_set_is_four_axes() {
        let s = stable_set(&zoo::two_neighbour());
        assert!(s.arcs.is_empty());
        assert!(!s.full_circle);
        let mut iso = s.isolated.clone();
        crate::lattice::sort_ccw(&mut iso);
        assert_eq!(iso, vec![d(1, 0), d(0, 1), d(-1, 0), d(0, -1)]);
    }

    #[test]
    fn east_heavy_stable_set_is_four_axes() {
        let s = stable_set(&zoo::east_heavy());
        assert!(s.is_finite());
        assert_eq!(s.isolated.len(), 4);
        for u in [d(1, 0), d(0, 1), d(-1, 0), d(0, -1)] {
            assert!(s.isolated.contains(&u));
        }
    }

    #[test]
    fn duarte_stable_set_is_left_semicircle_plus_east() {
        let s = stable_set(&zoo::duarte());
        assert_eq!(s.arcs.len(), 1);
        assert_eq!(s.arcs[0], ClosedArc { start: d(0, 1), end: d(0, -1) });
        assert_eq!(s.isolated, vec![d(1, 0)]);
        assert!(s.contains(d(-1, 0)));
        assert!(s.contains(d(-2, 3)));
        assert!(!s.contains(d(1, 1)));
    }

    #[test]
    fn opposite_pair_family_is_whole_circle() {
        let s = stable_set(&zoo::opposite_pair());
        assert!(s.full_circle);
    }

    #[test]
    fn classify_spec_cases() {
        assert_eq!(
            classify(&zoo::east_one()).kind,
            UniversalityClass::Supercritical
        );
        let c = classify(&zoo::east_heavy());
        assert_eq!(c.kind, UniversalityClass::Critical);
        assert!(c.stable_set_finite);
        assert_eq!(
            classify(&zoo::two_neighbour()).kind,
            UniversalityClass::Critical
        );
        assert_eq!(
            classify(&zoo::opposite_pair()).kind,
            UniversalityClass::Subcritical
        );
        let duarte = classify(&zoo::duarte());
        assert_eq!(duarte.kind, UniversalityClass::Critical);
        assert!(!duarte.stable_set_finite);
    }

    #[test]
    fn stable_set_matches_direct_test_on_axes_and_diagonals() {
        for fam in [
            zoo::two_neighbour(),
            zoo::east_heavy(),
            zoo::duarte(),
            zoo::east_one(),
            zoo::opposite_pair(),
        ] {
            let s = stable_set(&fam);
            for x in -3i64..=3 {
                for y in -3i64..=3 {
                    if x == 0 && y == 0 {
                        continue;
                    }
                    let u = d(x, y);
                    assert_eq!(
                        s.contains(u),
                        is_stable(u, &fam),
                        "family {} direction {u:?}",
                        fam.name()
                    );
                }
            }
        }
    }
}
