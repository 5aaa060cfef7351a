//! Exact integer geometry on the infinite grid `Z²`.
//!
//! Everything here is integer arithmetic on `i64` coordinates. Callers are
//! expected to stay within radius `2^30` of the origin, which keeps spiral
//! indices (at most `(2r + 1)²`) comfortably inside `u64`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest radius for which spiral indices and ball sizes are guaranteed not
/// to overflow.
pub const MAX_RADIUS: u64 = 1 << 30;

/// A node of the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    /// The source node every agent starts from.
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub const fn offset(self, dx: i64, dy: i64) -> Self {
        Point { x: self.x + dx, y: self.y + dy }
    }

    /// Manhattan norm, i.e. the distance to the origin.
    pub fn norm(self) -> u64 {
        manhattan(self, Point::ORIGIN)
    }

    /// Chebyshev (max-coordinate) distance between two points.
    pub fn chebyshev(self, other: Point) -> u64 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i64, i64)> for Point {
    fn from((x, y): (i64, i64)) -> Self {
        Point { x, y }
    }
}

/// Manhattan distance `|a.x - b.x| + |a.y - b.y|`.
pub fn manhattan(a: Point, b: Point) -> u64 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}

/// Number of nodes within Manhattan distance `r` of a point: `2r² + 2r + 1`.
pub const fn ball_size(radius: u64) -> u64 {
    2 * radius * radius + 2 * radius + 1
}

/// All nodes within Manhattan distance `radius` of `center`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: u64,
}

impl Ball {
    pub const fn new(center: Point, radius: u64) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, p: Point) -> bool {
        manhattan(p, self.center) <= self.radius
    }

    pub const fn size(&self) -> u64 {
        ball_size(self.radius)
    }

    /// The `index`-th node in diamond order: center first, then each
    /// Manhattan sphere of growing radius.
    ///
    /// Returns `None` when `index >= self.size()`.
    pub fn node(&self, index: u64) -> Option<Point> {
        if index >= self.size() {
            return None;
        }
        Some(diamond_point(self.center, index))
    }

    /// Iterates all nodes of the ball in diamond order.
    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.size()).map(move |i| diamond_point(self.center, i))
    }
}

/// Nodes `p` with `inner < manhattan(p, center) <= outer`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ring {
    center: Point,
    inner: u64,
    outer: u64,
}

impl Ring {
    pub fn new(center: Point, inner_radius: u64, outer_radius: u64) -> Result<Self> {
        if inner_radius >= outer_radius {
            return Err(Error::Domain(format!(
                "ring needs inner radius < outer radius, got {inner_radius} >= {outer_radius}"
            )));
        }
        Ok(Ring { center, inner: inner_radius, outer: outer_radius })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn inner_radius(&self) -> u64 {
        self.inner
    }

    pub fn outer_radius(&self) -> u64 {
        self.outer
    }

    pub fn contains(&self, p: Point) -> bool {
        let d = manhattan(p, self.center);
        self.inner < d && d <= self.outer
    }

    pub fn size(&self) -> u64 {
        ball_size(self.outer) - ball_size(self.inner)
    }
}

/// Point at Manhattan distance `radius` from `center`, indexed by
/// `j in 0..4 * radius`, going counterclockwise from the East axis.
pub fn sphere_point(center: Point, radius: u64, j: u64) -> Point {
    debug_assert!(radius > 0 && j < 4 * radius);
    let d = radius as i64;
    let quadrant = j / radius;
    let off = (j % radius) as i64;
    let (dx, dy) = match quadrant {
        0 => (d - off, off),
        1 => (-off, d - off),
        2 => (off - d, -off),
        _ => (off, off - d),
    };
    center.offset(dx, dy)
}

/// Maps `index` to a node by enumerating the center, then the sphere of
/// radius 1, then radius 2, and so on. Bijective onto `Z²`.
pub fn diamond_point(center: Point, index: u64) -> Point {
    if index == 0 {
        return center;
    }
    // Smallest d with 2d² + 2d + 1 > index. The float guess is corrected below.
    let mut d = ((((2 * index - 1) as f64).sqrt() - 1.0) / 2.0).max(0.0) as u64;
    while ball_size(d) <= index {
        d += 1;
    }
    while d > 1 && ball_size(d - 1) > index {
        d -= 1;
    }
    sphere_point(center, d, index - ball_size(d - 1))
}

/// Draws a node uniformly from `ball` by sampling its diamond index.
pub fn sample_ball_uniform<R: Rng + ?Sized>(ball: &Ball, rng: &mut R) -> Point {
    let index = rng.gen_range(0..ball.size());
    diamond_point(ball.center, index)
}

// Square spiral: counterclockwise, first step East.
//
//   4  3  2
//   5  0  1
//   6  7  8  9
//
// Chebyshev ring r >= 1 occupies indices (2r-1)² .. (2r+1)² - 1 and is
// traversed in four legs of length 2r: up the east side starting at
// (r, 1-r), west along the top, down the west side, east along the bottom.

/// Chebyshev ring containing spiral index `index`.
pub fn spiral_ring(index: u64) -> u64 {
    (index.isqrt() + 1) / 2
}

/// First spiral index on Chebyshev ring `r`.
pub const fn spiral_ring_start(r: u64) -> u64 {
    if r == 0 {
        0
    } else {
        (2 * r - 1) * (2 * r - 1)
    }
}

/// Node visited at step `index` of the canonical spiral around `center`.
pub fn spiral_point(center: Point, index: u64) -> Point {
    if index == 0 {
        return center;
    }
    let r = spiral_ring(index);
    let side = 2 * r;
    let pos = index - spiral_ring_start(r);
    let leg = pos / side;
    let e = (pos % side) as i64;
    let r = r as i64;
    let (dx, dy) = match leg {
        0 => (r, 1 - r + e),
        1 => (r - 1 - e, r),
        2 => (-r, r - 1 - e),
        _ => (1 - r + e, -r),
    };
    center.offset(dx, dy)
}

/// Step at which the canonical spiral around `center` visits `p`.
pub fn spiral_index(center: Point, p: Point) -> u64 {
    let dx = p.x - center.x;
    let dy = p.y - center.y;
    let r = dx.unsigned_abs().max(dy.unsigned_abs());
    if r == 0 {
        return 0;
    }
    let base = spiral_ring_start(r);
    let side = 2 * r;
    let ri = r as i64;
    let along = if dx == ri && dy > -ri {
        (dy + ri - 1) as u64
    } else if dy == ri {
        side + (ri - 1 - dx) as u64
    } else if dx == -ri {
        2 * side + (ri - 1 - dy) as u64
    } else {
        3 * side + (dx + ri - 1) as u64
    };
    base + along
}

/// Largest Manhattan radius fully covered by the spiral prefix `0..=steps`.
///
/// The last node of the sphere of radius `r` to be visited is `(0, -r)`, at
/// index `4r² + 3r`.
pub fn spiral_covered_radius(steps: u64) -> u64 {
    let disc = (16 * steps as u128 + 9).isqrt();
    ((disc - 3) / 8) as u64
}

/// Node reached after `offset` steps of the staircase walk from `from` to
/// `to` (x-displacement first, then y). Offsets past the end clamp to `to`.
pub fn walk_point(from: Point, to: Point, offset: u64) -> Point {
    let run_x = from.x.abs_diff(to.x);
    if offset <= run_x {
        let step = offset as i64 * (to.x - from.x).signum();
        return Point::new(from.x + step, from.y);
    }
    let rise = (offset - run_x).min(from.y.abs_diff(to.y)) as i64;
    Point::new(to.x, from.y + rise * (to.y - from.y).signum())
}

/// Offset at which the staircase walk from `from` to `to` visits `p`.
pub fn walk_offset(from: Point, to: Point, p: Point) -> Option<u64> {
    let between = |v: i64, a: i64, b: i64| a.min(b) <= v && v <= a.max(b);
    if p.y == from.y && between(p.x, from.x, to.x) {
        return Some(p.x.abs_diff(from.x));
    }
    if p.x == to.x && between(p.y, from.y, to.y) {
        return Some(from.x.abs_diff(to.x) + p.y.abs_diff(from.y));
    }
    None
}

/// The full staircase walk, `manhattan(from, to) + 1` nodes long.
pub fn walk_path(from: Point, to: Point) -> impl Iterator<Item = Point> {
    (0..=manhattan(from, to)).map(move |t| walk_point(from, to, t))
}
