//! Finite lattice regions: boxes, tori, convex rational polygons and
//! explicit site sets.
//!
//! Polygon membership is decided by exact integer comparisons
//! `den * <x, v> <= num`. Rasterization enumerates the integer points of a
//! bounding box derived from the rational vertices of the constraint system.

use std::collections::HashMap;

use thiserror::Error;

use crate::lattice::{v2, Vec2};

/// Closed rational half-plane `{x : <x, v> <= num / den}`, `den > 0`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HalfPlane {
    pub v: Vec2,
    pub num: i64,
    pub den: i64,
}

impl HalfPlane {
    pub fn new(v: Vec2, num: i64) -> HalfPlane {
        HalfPlane { v, num, den: 1 }
    }

    pub fn new_rat(v: Vec2, num: i64, den: i64) -> HalfPlane {
        assert!(den > 0, "half-plane denominator must be positive");
        assert!(!v.is_zero(), "half-plane normal must be nonzero");
        HalfPlane { v, num, den }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.den
            .checked_mul(x.dot(self.v))
            .map(|lhs| lhs <= self.num)
            .unwrap_or_else(|| (self.den as i128) * (x.dot(self.v) as i128) <= self.num as i128)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RegionError {
    #[error("polygon is unbounded (constraint normals do not span the plane)")]
    Unbounded,
    #[error("box or torus dimensions must be positive, got {w} x {h}")]
    BadDimensions { w: i64, h: i64 },
}

/// A finite region of the lattice.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Region {
    /// Axis-aligned box `[x0, x0+w) x [y0, y0+h)`.
    Box { x0: i64, y0: i64, w: i64, h: i64 },
    /// Torus `[0, w) x [0, h)` with wrapping rule offsets.
    Torus { w: i64, h: i64 },
    /// Intersection of closed rational half-planes.
    Polygon { constraints: Vec<HalfPlane> },
    /// Explicit finite site set (sorted, deduplicated). Used for the
    /// non-convex droplet regions of the proof geometry.
    Sites { sites: Vec<Vec2> },
}

impl Region {
    pub fn centered_box(side: i64) -> Region {
        Region::Box {
            x0: -(side / 2),
            y0: -(side / 2),
            w: side,
            h: side,
        }
    }

    pub fn from_sites(mut sites: Vec<Vec2>) -> Region {
        sites.sort();
        sites.dedup();
        Region::Sites { sites }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Region::Torus { .. })
    }

    /// Exact membership test.
    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Region::Box { x0, y0, w, h } => {
                p.x >= *x0 && p.x < x0 + w && p.y >= *y0 && p.y < y0 + h
            }
            Region::Torus { w, h } => p.x >= 0 && p.x < *w && p.y >= 0 && p.y < *h,
            Region::Polygon { constraints } => constraints.iter().all(|c| c.contains(p)),
            Region::Sites { sites } => sites.binary_search(&p).is_ok(),
        }
    }

    /// Canonical representative of a site (wraps on the torus).
    pub fn canonical(&self, p: Vec2) -> Vec2 {
        match self {
            Region::Torus { w, h } => v2(p.x.rem_euclid(*w), p.y.rem_euclid(*h)),
            _ => p,
        }
    }

    /// Row-major site enumeration from the lexicographically least corner.
    pub fn sites(&self) -> Result<Vec<Vec2>, RegionError> {
        match self {
            Region::Box { x0, y0, w, h } => {
                if *w <= 0 || *h <= 0 {
                    return Err(RegionError::BadDimensions { w: *w, h: *h });
                }
                let mut out = Vec::with_capacity((w * h) as usize);
                for y in *y0..y0 + h {
                    for x in *x0..x0 + w {
                        out.push(v2(x, y));
                    }
                }
                Ok(out)
            }
            Region::Torus { w, h } => {
                if *w <= 0 || *h <= 0 {
                    return Err(RegionError::BadDimensions { w: *w, h: *h });
                }
                let mut out = Vec::with_capacity((w * h) as usize);
                for y in 0..*h {
                    for x in 0..*w {
                        out.push(v2(x, y));
                    }
                }
                Ok(out)
            }
            Region::Polygon { constraints } => {
                let (lo, hi) = match polygon_bbox(constraints)? {
                    Some(b) => b,
                    None => return Ok(vec![]),
                };
                let mut out = Vec::new();
                for y in lo.y..=hi.y {
                    for x in lo.x..=hi.x {
                        let p = v2(x, y);
                        if constraints.iter().all(|c| c.contains(p)) {
                            out.push(p);
                        }
                    }
                }
                Ok(out)
            }
            Region::Sites { sites } => {
                let mut s = sites.clone();
                s.sort_by_key(|p| (p.y, p.x));
                Ok(s)
            }
        }
    }
}

/// Rational bounding box of a bounded half-plane intersection, or `None`
/// when the system is infeasible.
///
/// Boundedness requires the outward normals to positively span the plane:
/// sorted by angle, no counterclockwise gap between consecutive normals may
/// reach a half turn.
fn polygon_bbox(constraints: &[HalfPlane]) -> Result<Option<(Vec2, Vec2)>, RegionError> {
    use crate::lattice::{Direction, GapSize};
    if constraints.is_empty() {
        return Err(RegionError::Unbounded);
    }
    let mut normals: Vec<Direction> = constraints.iter().map(|c| Direction::new(c.v)).collect();
    crate::lattice::sort_ccw(&mut normals);
    if normals.len() < 3 {
        // two normals can bound only a degenerate region; opposite normals
        // leave the perpendicular direction free
        return Err(RegionError::Unbounded);
    }
    for i in 0..normals.len() {
        let j = (i + 1) % normals.len();
        match normals[i].ccw_gap_vs_pi(normals[j]) {
            GapSize::MoreThanPi | GapSize::ExactlyPi => return Err(RegionError::Unbounded),
            _ => {}
        }
    }

    // enumerate rational intersection points of constraint boundary lines
    // and keep the feasible ones; the polygon (if nonempty) is their hull
    let mut found = false;
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    let n = constraints.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = constraints[i];
            let b = constraints[j];
            // lines <x, a.v> = a.num/a.den and <x, b.v> = b.num/b.den
            let det = a.v.cross(b.v) as i128;
            if det == 0 {
                continue;
            }
            // exact rational vertex via i128, converted once to f64 for the
            // bbox only; membership stays exact
            let ac_num = a.num as i128;
            let ac_den = a.den as i128;
            let bc_num = b.num as i128;
            let bc_den = b.den as i128;
            // solve [a.v; b.v] x = [ac; bc]
            let x_num = ac_num * bc_den * b.v.y as i128 - bc_num * ac_den * a.v.y as i128;
            let y_num = bc_num * ac_den * a.v.x as i128 - ac_num * bc_den * b.v.x as i128;
            let den = det * ac_den * bc_den;
            let (x_num, y_num, den) = if den < 0 {
                (-x_num, -y_num, -den)
            } else {
                (x_num, y_num, den)
            };
            // feasibility of the vertex against every constraint, exact
            let feasible = constraints.iter().all(|c| {
                let lhs = c.v.x as i128 * x_num + c.v.y as i128 * y_num;
                lhs * c.den as i128 <= c.num as i128 * den
            });
            if feasible {
                found = true;
                let fx = x_num as f64 / den as f64;
                let fy = y_num as f64 / den as f64;
                min_x = min_x.min(fx);
                max_x = max_x.max(fx);
                min_y = min_y.min(fy);
                max_y = max_y.max(fy);
            }
        }
    }
    if !found {
        return Ok(None);
    }
    // widen by one to be safe against the f64 conversion
    Ok(Some((
        v2(min_x.floor() as i64 - 1, min_y.floor() as i64 - 1),
        v2(max_x.ceil() as i64 + 1, max_y.ceil() as i64 + 1),
    )))
}

/// Immutable site index for a region: maps sites to dense indices.
#[derive(Clone, Debug)]
pub struct SiteIndex {
    region: Region,
    sites: Vec<Vec2>,
    /// Fast path for boxes and tori; fallback map otherwise.
    lookup: Lookup,
}

#[derive(Clone, Debug)]
enum Lookup {
    Grid { x0: i64, y0: i64, w: i64, h: i64 },
    Map(HashMap<Vec2, u32>),
}

impl SiteIndex {
    pub fn new(region: Region) -> Result<SiteIndex, RegionError> {
        let sites = region.sites()?;
        let lookup = match &region {
            Region::Box { x0, y0, w, h } => Lookup::Grid {
                x0: *x0,
                y0: *y0,
                w: *w,
                h: *h,
            },
            Region::Torus { w, h } => Lookup::Grid {
                x0: 0,
                y0: 0,
                w: *w,
                h: *h,
            },
            _ => Lookup::Map(
                sites
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (p, i as u32))
                    .collect(),
            ),
        };
        Ok(SiteIndex {
            region,
            sites,
            lookup,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Vec2] {
        &self.sites
    }

    pub fn site(&self, idx: u32) -> Vec2 {
        self.sites[idx as usize]
    }

    /// Dense index of a site, after canonicalization (torus wrap). `None`
    /// when the site is outside the region.
    pub fn index_of(&self, p: Vec2) -> Option<u32> {
        let p = self.region.canonical(p);
        match &self.lookup {
            Lookup::Grid { x0, y0, w, h } => {
                if p.x < *x0 || p.x >= x0 + w || p.y < *y0 || p.y >= y0 + h {
                    None
                } else {
                    Some(((p.y - y0) * w + (p.x - x0)) as u32)
                }
            }
            Lookup::Map(m) => m.get(&p).copied(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_enumeration_is_row_major() {
        let r = Region::Box { x0: -1, y0: 0, w: 2, h: 2 };
        assert_eq!(
            r.sites().unwrap(),
            vec![v2(-1, 0), v2(0, 0), v2(-1, 1), v2(0, 1)]
        );
    }

    #[test]
    fn torus_canonicalizes() {
        let r = Region::Torus { w: 4, h: 3 };
        assert_eq!(r.canonical(v2(-1, 5)), v2(3, 2));
        assert!(r.contains(v2(3, 2)));
        assert!(!r.contains(v2(4, 0)));
    }

    #[test]
    fn polygon_square() {
        let r = Region::Polygon {
            constraints: vec![
                HalfPlane::new(v2(1, 0), 2),
                HalfPlane::new(v2(-1, 0), 2),
                HalfPlane::new(v2(0, 1), 1),
                HalfPlane::new(v2(0, -1), 1),
            ],
        };
        let sites = r.sites().unwrap();
        assert_eq!(sites.len(), 15); // 5 x 3
        assert!(r.contains(v2(2, 1)));
        assert!(!r.contains(v2(3, 0)));
    }

    #[test]
    fn polygon_diamond_with_rational_offset() {
        // |x| + |y| <= 5/2  -> diamond with 13 sites
        let r = Region::Polygon {
            constraints: vec![
                HalfPlane::new_rat(v2(1, 1), 5, 2),
                HalfPlane::new_rat(v2(1, -1), 5, 2),
                HalfPlane::new_rat(v2(-1, 1), 5, 2),
                HalfPlane::new_rat(v2(-1, -1), 5, 2),
            ],
        };
        assert_eq!(r.sites().unwrap().len(), 13);
    }

    #[test]
    fn unbounded_polygon_is_an_error() {
        let r = Region::Polygon {
            constraints: vec![HalfPlane::new(v2(1, 0), 0), HalfPlane::new(v2(-1, 0), 0)],
        };
        assert_eq!(r.sites(), Err(RegionError::Unbounded));
    }

    #[test]
    fn infeasible_polygon_is_empty() {
        let r = Region::Polygon {
            constraints: vec![
                HalfPlane::new(v2(1, 0), -1),
                HalfPlane::new(v2(-1, 0), -1),
                HalfPlane::new(v2(0, 1), 5),
                HalfPlane::new(v2(0, -1), 5),
            ],
        };
        assert_eq!(r.sites().unwrap(), vec![]);
    }

    #[test]
    fn site_index_round_trip() {
        let idx = SiteIndex::new(Region::Torus { w: 3, h: 3 }).unwrap();
        for i in 0..idx.len() as u32 {
            assert_eq!(idx.index_of(idx.site(i)), Some(i));
        }
        assert_eq!(idx.index_of(v2(-1, 0)), Some(2));
    }
}
