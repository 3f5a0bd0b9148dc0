//! Exact planar vectors and orientation predicates.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::field::Scalar;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Vec2 {
    pub x: Scalar,
    pub y: Scalar,
}

impl Vec2 {
    pub fn new(x: Scalar, y: Scalar) -> Vec2 {
        Vec2 { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Vec2 {
        Vec2::new(Scalar::int(x), Scalar::int(y))
    }

    pub fn zero() -> Vec2 {
        Vec2::default()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn cross(&self, o: &Vec2) -> Scalar {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn dot(&self, o: &Vec2) -> Scalar {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn norm_sq(&self) -> Scalar {
        self.dot(self)
    }

    pub fn scale(&self, k: &Scalar) -> Vec2 {
        Vec2::new(&self.x * k, &self.y * k)
    }

    /// Same direction: parallel and pointing the same way.
    pub fn same_direction(&self, o: &Vec2) -> bool {
        self.cross(o).is_zero() && self.dot(o).is_positive()
    }

    pub fn is_parallel(&self, o: &Vec2) -> bool {
        self.cross(o).is_zero()
    }

    pub fn field(&self) -> u64 {
        self.x.field().max(self.y.field())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl Add<&Vec2> for &Vec2 {
    type Output = Vec2;
    fn add(self, o: &Vec2) -> Vec2 {
        Vec2::new(&self.x + &o.x, &self.y + &o.y)
    }
}

impl Sub<&Vec2> for &Vec2 {
    type Output = Vec2;
    fn sub(self, o: &Vec2) -> Vec2 {
        Vec2::new(&self.x - &o.x, &self.y - &o.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        &self + &o
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        &self - &o
    }
}

impl Neg for &Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-&self.x, -&self.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        -&self
    }
}

impl fmt::Debug for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// 0 if the counterclockwise angle from `base` to `v` lies in `[0, pi)`, else 1.
fn half(base: &Vec2, v: &Vec2) -> u8 {
    let c = base.cross(v);
    if c.is_positive() || (c.is_zero() && base.dot(v).is_positive()) {
        0
    } else {
        1
    }
}

/// Compares the counterclockwise angles (in `[0, 2pi)`) from `base` to `a` and to `b`.
pub fn ccw_cmp(base: &Vec2, a: &Vec2, b: &Vec2) -> Ordering {
    let (ha, hb) = (half(base, a), half(base, b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    // same half-plane: a comes first iff b is counterclockwise of a
    match a.cross(b).signum() {
        Ordering::Greater => Ordering::Less,
        Ordering::Less => Ordering::Greater,
        Ordering::Equal => Ordering::Equal,
    }
}

/// `v` lies in the half-open counterclockwise sector `[from, to)`.
/// `from` and `to` must be nonzero; a sector with `to` in the same direction
/// as `from` is read as the full turn.
pub fn in_sector(from: &Vec2, to: &Vec2, v: &Vec2) -> bool {
    if from.same_direction(to) {
        return true;
    }
    ccw_cmp(from, v, to) == Ordering::Less
}

/// `v` lies in the open counterclockwise sector `(from, to)`.
pub fn in_open_sector(from: &Vec2, to: &Vec2, v: &Vec2) -> bool {
    !v.same_direction(from) && in_sector(from, to, v)
}

/// Number of axis directions `(1,0)`, `(-1,0)` met by a ray sweeping
/// counterclockwise from `from` (exclusive) to `to` (inclusive). Summed around a
/// closed sweep this counts half-turns.
pub fn half_turn_crossings(from: &Vec2, to: &Vec2) -> u64 {
    let axes = [Vec2::ints(1, 0), Vec2::ints(-1, 0)];
    axes.iter()
        .filter(|r| {
            if r.same_direction(from) {
                // reached again only after a full turn
                from.same_direction(to)
            } else if from.same_direction(to) {
                true
            } else {
                ccw_cmp(from, r, to) != Ordering::Greater
            }
        })
        .count() as u64
}

/// Twice the signed area of a polygon.
pub fn signed_area2(vertices: &[Vec2]) -> Scalar {
    let n = vertices.len();
    let mut acc = Scalar::zero();
    for i in 0..n {
        acc = acc + vertices[i].cross(&vertices[(i + 1) % n]);
    }
    acc
}

/// Point `p` lies on the closed segment `[a, b]`.
pub fn on_segment(a: &Vec2, b: &Vec2, p: &Vec2) -> bool {
    let ab = b - a;
    let ap = p - a;
    if !ab.cross(&ap).is_zero() {
        return false;
    }
    let t = ab.dot(&ap);
    !t.is_negative() && t <= ab.norm_sq()
}

/// Closed segments `[a, b]` and `[c, d]` share a point.
pub fn segments_touch(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let o1 = (b - a).cross(&(c - a)).signum();
    let o2 = (b - a).cross(&(d - a)).signum();
    let o3 = (d - c).cross(&(a - c)).signum();
    let o4 = (d - c).cross(&(b - c)).signum();
    if o1 != o2 && o3 != o4 && o1 != Ordering::Equal && o2 != Ordering::Equal && o3 != Ordering::Equal && o4 != Ordering::Equal {
        return true;
    }
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}
