//! Exact lattice and direction arithmetic.
//!
//! Everything in this module is integer-only. Directions on the unit circle
//! are represented by primitive integer vectors and compared by quadrant
//! splits and cross products, never by floating-point angles.

use std::fmt;

use num_integer::Integer;

/// A point or vector of the square lattice.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec2 {
    pub x: i64,
    pub y: i64,
}

/// Shorthand constructor.
pub const fn v2(x: i64, y: i64) -> Vec2 {
    Vec2 { x, y }
}

impl fmt::Debug for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        v2(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        v2(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        v2(-self.x, -self.y)
    }
}

impl std::ops::Mul<i64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: i64) -> Vec2 {
        v2(self.x * s, self.y * s)
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = v2(0, 0);

    pub fn dot(self, other: Vec2) -> i64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product; positive when `other` is
    /// counterclockwise of `self` by less than a half turn.
    pub fn cross(self, other: Vec2) -> i64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm2(self) -> i64 {
        self.dot(self)
    }

    pub fn linf(self) -> i64 {
        self.x.abs().max(self.y.abs())
    }

    /// Rotation by +90 degrees (counterclockwise).
    pub fn rot_ccw(self) -> Vec2 {
        v2(-self.y, self.x)
    }

    /// Rotation by -90 degrees (clockwise).
    pub fn rot_cw(self) -> Vec2 {
        v2(self.y, -self.x)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }
}

/// A rational direction of the circle, stored as a primitive integer vector
/// (`gcd(|x|, |y|) = 1`). Two directions are equal iff their primitive
/// vectors are.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction(Vec2);

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dir({}, {})", self.0.x, self.0.y)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0.x, self.0.y)
    }
}

impl Direction {
    /// Reduces an arbitrary nonzero vector to its primitive representative.
    ///
    /// Panics on the zero vector; use [`Direction::try_new`] for fallible
    /// construction.
    pub fn new(v: Vec2) -> Direction {
        Direction::try_new(v).expect("zero vector has no direction")
    }

    pub fn try_new(v: Vec2) -> Option<Direction> {
        if v.is_zero() {
            return None;
        }
        let g = v.x.abs().gcd(&v.y.abs());
        Some(Direction(v2(v.x / g, v.y / g)))
    }

    pub fn vec(self) -> Vec2 {
        self.0
    }

    pub fn norm2(self) -> i64 {
        self.0.norm2()
    }

    pub fn neg(self) -> Direction {
        Direction(-self.0)
    }

    pub fn rot_ccw(self) -> Direction {
        Direction(self.0.rot_ccw())
    }

    pub fn rot_cw(self) -> Direction {
        Direction(self.0.rot_cw())
    }

    /// Reflection across the line spanned by `axis` (exact: the reflected
    /// vector `2<u,a>a - |a|^2 u` is reduced back to a primitive vector).
    pub fn reflect_across(self, axis: Direction) -> Direction {
        let a = axis.0;
        let u = self.0;
        let s = 2 * u.dot(a);
        Direction::new(v2(s * a.x - a.norm2() * u.x, s * a.y - a.norm2() * u.y))
    }

    /// Index of the half of the circle this direction lies in: 0 for angles
    /// in `[0, pi)` (counterclockwise from east, east inclusive), 1 for
    /// `[pi, 2pi)`.
    fn half(self) -> u8 {
        let Vec2 { x, y } = self.0;
        if y > 0 || (y == 0 && x > 0) {
            0
        } else {
            1
        }
    }

    /// Total order by angle in `[0, 2pi)` measured counterclockwise from
    /// east. Exact: quadrant split plus one cross product.
    pub fn cmp_ccw_from_east(self, other: Direction) -> std::cmp::Ordering {
        self.half()
            .cmp(&other.half())
            .then_with(|| 0.cmp(&self.0.cross(other.0)))
    }

    /// `true` when this direction lies strictly inside the open arc swept
    /// counterclockwise from `start` to `end` (`start != end`).
    pub fn strictly_inside_ccw(self, start: Direction, end: Direction) -> bool {
        use std::cmp::Ordering::*;
        debug_assert!(start != end);
        if self == start || self == end {
            return false;
        }
        match start.cmp_ccw_from_east(end) {
            Less => {
                start.cmp_ccw_from_east(self) == Less && self.cmp_ccw_from_east(end) == Less
            }
            Greater => {
                start.cmp_ccw_from_east(self) == Less || self.cmp_ccw_from_east(end) == Less
            }
            Equal => unreachable!(),
        }
    }

    /// `true` when this direction lies in the closed arc swept
    /// counterclockwise from `start` to `end`. `start == end` denotes the
    /// degenerate single-point arc.
    pub fn inside_ccw_closed(self, start: Direction, end: Direction) -> bool {
        if self == start || self == end {
            return true;
        }
        if start == end {
            return false;
        }
        self.strictly_inside_ccw(start, end)
    }

    /// Length of the counterclockwise arc from `self` to `other`, classified
    /// exactly against a half turn.
    pub fn ccw_gap_vs_pi(self, other: Direction) -> GapSize {
        if other == self {
            return GapSize::Zero;
        }
        if other == self.neg() {
            return GapSize::ExactlyPi;
        }
        if self.neg().strictly_inside_ccw(self, other) {
            GapSize::MoreThanPi
        } else {
            GapSize::LessThanPi
        }
    }

    /// A direction strictly inside the open counterclockwise arc from `a`
    /// to `b`. Exists whenever the arc contains a rational direction, which
    /// is always the case for `a != b`.
    pub fn sample_strictly_between_ccw(a: Direction, b: Direction) -> Direction {
        match a.ccw_gap_vs_pi(b) {
            GapSize::Zero => {
                // full-circle gap: anything other than a works
                a.neg()
            }
            GapSize::LessThanPi => Direction::new(a.0 + b.0),
            GapSize::ExactlyPi => a.rot_ccw(),
            GapSize::MoreThanPi => {
                // the mediant lies in the short (clockwise) gap; its
                // antipode lies in the long one
                Direction::new(-(a.0 + b.0))
            }
        }
    }
}

/// Exact comparison of a counterclockwise gap against a half turn.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GapSize {
    Zero,
    LessThanPi,
    ExactlyPi,
    MoreThanPi,
}

/// Sorts directions counterclockwise starting from east and removes
/// duplicates.
pub fn sort_ccw(dirs: &mut Vec<Direction>) {
    dirs.sort_by(|a, b| a.cmp_ccw_from_east(*b));
    dirs.dedup();
}

pub const E1: Vec2 = v2(1, 0);
pub const E2: Vec2 = v2(0, 1);

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(v2(x, y))
    }

    #[test]
    fn primitive_reduction() {
        assert_eq!(d(4, -6), d(2, -3));
        assert_eq!(d(0, 5), d(0, 1));
        assert!(Direction::try_new(Vec2::ZERO).is_none());
    }

    #[test]
    fn angular_order_is_ccw_from_east() {
        let mut dirs = vec![d(0, -1), d(1, 1), d(-1, 0), d(1, 0), d(0, 1), d(-2, -1)];
        sort_ccw(&mut dirs);
        assert_eq!(
            dirs,
            vec![d(1, 0), d(1, 1), d(0, 1), d(-1, 0), d(-2, -1), d(0, -1)]
        );
    }

    #[test]
    fn arc_membership() {
        // open upper-right quadrant
        assert!(d(1, 1).strictly_inside_ccw(d(1, 0), d(0, 1)));
        assert!(!d(1, 0).strictly_inside_ccw(d(1, 0), d(0, 1)));
        assert!(!d(-1, 1).strictly_inside_ccw(d(1, 0), d(0, 1)));
        // wrap-around arc from north to east the long way
        assert!(d(-1, -1).strictly_inside_ccw(d(0, 1), d(1, 0)));
        assert!(!d(1, 1).strictly_inside_ccw(d(0, 1), d(1, 0)));
    }

    #[test]
    fn gap_classification() {
        assert_eq!(d(1, 0).ccw_gap_vs_pi(d(0, 1)), GapSize::LessThanPi);
        assert_eq!(d(1, 0).ccw_gap_vs_pi(d(-1, 0)), GapSize::ExactlyPi);
        assert_eq!(d(1, 0).ccw_gap_vs_pi(d(0, -1)), GapSize::MoreThanPi);
        assert_eq!(d(2, 1).ccw_gap_vs_pi(d(2, 1)), GapSize::Zero);
    }

    #[test]
    fn between_sampling() {
        for (a, b) in [
            (d(1, 0), d(0, 1)),
            (d(0, 1), d(1, 0)),
            (d(1, 0), d(-1, 0)),
            (d(2, 1), d(-3, 5)),
        ] {
            let s = Direction::sample_strictly_between_ccw(a, b);
            assert!(s.strictly_inside_ccw(a, b), "{s:?} not in ({a:?},{b:?})");
        }
    }

    #[test]
    fn reflection_is_exact_involution() {
        let axis = d(-1, 0);
        assert_eq!(d(0, 1).reflect_across(axis), d(0, -1));
        assert_eq!(d(1, 2).reflect_across(axis), d(1, -2));
        for u in [d(3, 5), d(-2, 7), d(1, 0), d(0, -1)] {
            assert_eq!(u.reflect_across(axis).reflect_across(axis), u);
        }
    }

    #[test]
    fn quarter_turns() {
        assert_eq!(d(1, 0).rot_ccw(), d(0, 1));
        assert_eq!(d(1, 0).rot_cw(), d(0, -1));
        assert_eq!(d(2, 1).rot_ccw().rot_cw(), d(2, 1));
    }
}
