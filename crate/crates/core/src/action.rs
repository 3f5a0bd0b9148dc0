//! Determinant-one matrices acting on surfaces, the horocycle and geodesic
//! flows at field-valued parameters, and direction bookkeeping.

use std::fmt;
use std::ops::Mul;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::geom::Vec2;
use crate::surface::{Gluing, MarkedPoint, Polygon, Surface};

/// Row-major 2x2 matrix `[[m11, m12], [m21, m22]]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub m11: Scalar,
    pub m12: Scalar,
    pub m21: Scalar,
    pub m22: Scalar,
}

impl Mat2 {
    pub fn new(m11: Scalar, m12: Scalar, m21: Scalar, m22: Scalar) -> Mat2 {
        Mat2 { m11, m12, m21, m22 }
    }

    pub fn ints(a: i64, b: i64, c: i64, d: i64) -> Mat2 {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Mat2 {
        Mat2::ints(1, 0, 0, 1)
    }

    pub fn det(&self) -> Scalar {
        &self.m11 * &self.m22 - &self.m12 * &self.m21
    }

    pub fn field(&self) -> u64 {
        [&self.m11, &self.m12, &self.m21, &self.m22].iter().map(|x| x.field()).max().unwrap_or(0)
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2::new(&self.m11 * &v.x + &self.m12 * &v.y, &self.m21 * &v.x + &self.m22 * &v.y)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.m11.clone(), self.m21.clone(), self.m12.clone(), self.m22.clone())
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        let k = det.recip()?;
        Ok(Mat2::new(&self.m22 * &k, -(&self.m12 * &k), -(&self.m21 * &k), &self.m11 * &k))
    }

    pub fn pow(&self, n: i64) -> Result<Mat2> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut out = Mat2::identity();
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2::identity()
    }
}

impl Mul<&Mat2> for &Mat2 {
    type Output = Mat2;
    fn mul(self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.m11 * &o.m11 + &self.m12 * &o.m21,
            &self.m11 * &o.m12 + &self.m12 * &o.m22,
            &self.m21 * &o.m11 + &self.m22 * &o.m21,
            &self.m21 * &o.m12 + &self.m22 * &o.m22,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        &self * &o
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m11, self.m12, self.m21, self.m22)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Unoriented direction, stored as its canonical vector: `y > 0`, or `y = 0`
/// and `x > 0`; rational vectors are primitive integer vectors, otherwise the
/// first nonzero coordinate is scaled to `+-1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Direction {
    vector: Vec2,
}

impl Direction {
    pub fn new(v: &Vec2) -> Result<Direction> {
        if v.is_zero() {
            return Err(Error::ZeroInput);
        }
        let mut w = if let (Some(x), Some(y)) = (v.x.as_rational(), v.y.as_rational()) {
            let den = x.denom().lcm(y.denom());
            let xi = (x * num_rational::BigRational::from_integer(den.clone())).to_integer();
            let yi = (y * num_rational::BigRational::from_integer(den)).to_integer();
            let g = xi.gcd(&yi);
            Vec2::new(Scalar::from_bigint(&xi / &g), Scalar::from_bigint(&yi / &g))
        } else {
            let lead = if v.x.is_zero() { v.y.abs() } else { v.x.abs() };
            let k = lead.recip()?;
            v.scale(&k)
        };
        if w.y.is_negative() || (w.y.is_zero() && w.x.is_negative()) {
            w = -w;
        }
        Ok(Direction { vector: w })
    }

    pub fn from_ints(x: i64, y: i64) -> Result<Direction> {
        Direction::new(&Vec2::ints(x, y))
    }

    pub fn vertical() -> Direction {
        Direction { vector: Vec2::ints(0, 1) }
    }

    pub fn horizontal() -> Direction {
        Direction { vector: Vec2::ints(1, 0) }
    }

    pub fn vector(&self) -> &Vec2 {
        &self.vector
    }

    /// `y / x`, or `None` for the vertical direction.
    pub fn slope(&self) -> Option<Scalar> {
        self.vector.y.try_div(&self.vector.x).ok()
    }

    pub fn is_vertical(&self) -> bool {
        self.vector.x.is_zero()
    }

    pub fn is_horizontal(&self) -> bool {
        self.vector.y.is_zero()
    }

    /// Image direction under a matrix.
    pub fn transform(&self, m: &Mat2) -> Result<Direction> {
        Direction::new(&m.apply(&self.vector))
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.vector.x, self.vector.y)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Direction> {
        Direction::new(&parse_vec2(s)?)
    }
}

/// Parses `"x,y"` with exact scalar components.
pub fn parse_vec2(s: &str) -> Result<Vec2> {
    let (x, y) = s.split_once(',').ok_or_else(|| Error::Parse(format!("expected 'x,y', got '{s}'")))?;
    Ok(Vec2::new(x.parse()?, y.parse()?))
}

/// Parses four comma-separated scalars, row-major.
pub fn parse_mat2(s: &str) -> Result<Mat2> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!("expected four entries, got '{s}'")));
    }
    Ok(Mat2::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?, parts[3].parse()?))
}

/// Point on the boundary of the upper half-plane attached to a direction:
/// the reciprocal of its slope.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryPoint {
    Finite(Scalar),
    Infinity,
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Finite(x) => write!(f, "{x}"),
            BoundaryPoint::Infinity => write!(f, "inf"),
        }
    }
}

pub fn boundary_point(dir: &Direction) -> BoundaryPoint {
    let v = dir.vector();
    if v.y.is_zero() {
        BoundaryPoint::Infinity
    } else {
        BoundaryPoint::Finite(&v.x / &v.y)
    }
}

/// `[[1, 0], [s, 1]]`; fixes the vertical direction.
pub fn horocycle_matrix(s: &Scalar) -> Mat2 {
    Mat2::new(Scalar::one(), Scalar::zero(), s.clone(), Scalar::one())
}

/// `diag(u, 1/u)` for `u > 0`.
pub fn geodesic_matrix(u: &Scalar) -> Result<Mat2> {
    if !u.is_positive() {
        return Err(Error::NonPositive);
    }
    Ok(Mat2::new(u.clone(), Scalar::zero(), Scalar::zero(), u.recip()?))
}

/// Determinant-one matrix taking the oriented vector `v` to a positive
/// multiple of `(0, 1)`: `[[q, -p], [0, 1/q]]` for `v = (p, q)` with `q != 0`,
/// and a quarter turn when `q = 0`.
pub fn normalize_vector(v: &Vec2) -> Result<Mat2> {
    if v.is_zero() {
        return Err(Error::ZeroInput);
    }
    let (p, q) = (&v.x, &v.y);
    if q.is_zero() {
        if p.is_positive() {
            Ok(Mat2::ints(0, -1, 1, 0))
        } else {
            Ok(Mat2::ints(0, 1, -1, 0))
        }
    } else {
        Ok(Mat2::new(q.clone(), -p, Scalar::zero(), q.recip()?))
    }
}

pub fn normalize_to_vertical(dir: &Direction) -> Mat2 {
    normalize_vector(dir.vector()).expect("directions are nonzero")
}

/// Applies a determinant-one matrix to every vertex, gluing translation and marked point.
pub fn apply_matrix(s: &Surface, a: &Mat2) -> Result<Surface> {
    let field = match (s.field(), a.field()) {
        (0, f) | (f, 0) => f,
        (x, y) if x == y => x,
        (x, y) => return Err(Error::FieldMismatch(x, y)),
    };
    if a.det() != Scalar::one() {
        return Err(Error::InvalidParams(format!("determinant of {a} is not 1")));
    }
    let polygons = s
        .polygons()
        .iter()
        .map(|p| Polygon::new(p.vertices.iter().map(|v| a.apply(v)).collect()))
        .collect();
    let gluings = s
        .gluings()
        .iter()
        .map(|g| Gluing { a: g.a, b: g.b, translation: a.apply(&g.translation) })
        .collect();
    let marks = s
        .marked_points()
        .iter()
        .map(|m| MarkedPoint { polygon: m.polygon, position: a.apply(&m.position), label: m.label.clone() })
        .collect();
    Ok(Surface::from_parts(field, polygons, gluings, marks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{cross, square_torus};

    #[test]
    fn identity_and_inverse_round_trip() {
        let s = cross(&Scalar::one(), &Scalar::one()).unwrap();
        assert_eq!(apply_matrix(&s, &Mat2::identity()).unwrap(), s);
        let a = Mat2::ints(2, 1, 1, 1);
        let back = apply_matrix(&apply_matrix(&s, &a).unwrap(), &a.inverse().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn horocycle_keeps_structure() {
        let s = square_torus();
        let t = apply_matrix(&s, &horocycle_matrix(&Scalar::one())).unwrap();
        assert!(t.validate().is_empty());
        assert_eq!(t.area(), Scalar::one());
        assert_eq!(t.singularities().unwrap().singular_angles(), s.singularities().unwrap().singular_angles());
    }

    #[test]
    fn horocycle_group_law() {
        assert!(horocycle_matrix(&Scalar::zero()).is_identity());
        let v = horocycle_matrix(&Scalar::int(7)).apply(&Vec2::ints(0, 1));
        assert_eq!(v, Vec2::ints(0, 1));
        assert_eq!(
            &horocycle_matrix(&Scalar::one()) * &horocycle_matrix(&Scalar::int(2)),
            horocycle_matrix(&Scalar::int(3))
        );
    }

    #[test]
    fn geodesic_matrix_laws() {
        assert!(geodesic_matrix(&Scalar::one()).unwrap().is_identity());
        assert_eq!(geodesic_matrix(&Scalar::zero()), Err(Error::NonPositive));
        let (u, v) = (Scalar::int(2), Scalar::golden());
        assert_eq!(&geodesic_matrix(&u).unwrap() * &geodesic_matrix(&v).unwrap(), geodesic_matrix(&(&u * &v)).unwrap());
    }

    #[test]
    fn normalization_examples() {
        assert!(normalize_to_vertical(&Direction::vertical()).is_identity());
        let m = normalize_to_vertical(&Direction::horizontal());
        assert_eq!(m, Mat2::ints(0, -1, 1, 0));
        assert_eq!(m.apply(&Vec2::ints(1, 0)), Vec2::ints(0, 1));
        let m = normalize_to_vertical(&Direction::from_ints(1, 2).unwrap());
        assert_eq!(m, Mat2::new(Scalar::int(2), Scalar::int(-1), Scalar::zero(), Scalar::ratio(1, 2)));
        assert_eq!(m.apply(&Vec2::ints(1, 2)), Vec2::ints(0, 1));
        // oriented negative vectors still land on the positive vertical
        let m = normalize_vector(&Vec2::ints(-3, 0)).unwrap();
        assert!(m.apply(&Vec2::ints(-3, 0)).y.is_positive());
    }

    #[test]
    fn boundary_points() {
        assert_eq!(boundary_point(&Direction::from_ints(1, 2).unwrap()), BoundaryPoint::Finite(Scalar::ratio(1, 2)));
        assert_eq!(boundary_point(&Direction::vertical()), BoundaryPoint::Finite(Scalar::zero()));
        assert_eq!(boundary_point(&Direction::horizontal()), BoundaryPoint::Infinity);
    }

    #[test]
    fn direction_canonical_form() {
        assert_eq!(Direction::from_ints(-2, -4).unwrap(), Direction::from_ints(1, 2).unwrap());
        assert_eq!(Direction::from_ints(-5, 0).unwrap(), Direction::horizontal());
        let v = Vec2::new(Scalar::golden(), Scalar::int(-2));
        let d = Direction::new(&v).unwrap();
        assert!(d.vector().y.is_positive());
        assert_eq!(d, Direction::new(&v.scale(&Scalar::int(-3))).unwrap());
        assert_eq!("1/2,1".parse::<Direction>().unwrap(), Direction::from_ints(1, 2).unwrap());
    }

    #[test]
    fn mismatched_field_is_rejected() {
        let s = cross(&Scalar::golden(), &Scalar::one()).unwrap();
        let r2 = Scalar::sqrt_of(2).unwrap();
        let m = Mat2::new(r2.clone(), Scalar::zero(), Scalar::zero(), r2.recip().unwrap());
        assert_eq!(apply_matrix(&s, &m), Err(Error::FieldMismatch(5, 2)));
    }
}
