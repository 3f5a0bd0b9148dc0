//! Exact arithmetic in `Q` and real quadratic fields `Q(sqrt d)`.
//!
//! A [`Scalar`] is `a + b*sqrt(d)` with big-rational coefficients. Rationals
//! carry the tag `d = 0`; a scalar is tagged with its field only while `b != 0`,
//! so a rational produced inside `Q(sqrt 5)` compares equal to the same rational
//! built directly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact element `a + b*sqrt(d)` of `Q(sqrt d)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    d: u64,
    a: BigRational,
    b: BigRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn is_squarefree(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Combines two field tags; zero is the rational tag.
fn join_fields(d1: u64, d2: u64) -> Result<u64> {
    match (d1, d2) {
        (0, d) | (d, 0) => Ok(d),
        (x, y) if x == y => Ok(x),
        (x, y) => Err(Error::FieldMismatch(x, y)),
    }
}

impl Scalar {
    fn canonical(d: u64, a: BigRational, b: BigRational) -> Scalar {
        if b.is_zero() || d == 0 {
            Scalar { d: 0, a, b: BigRational::zero() }
        } else {
            Scalar { d, a, b }
        }
    }

    pub fn zero() -> Scalar {
        Scalar::rational(BigRational::zero())
    }

    pub fn one() -> Scalar {
        Scalar::rational(BigRational::one())
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::rational(rat(n))
    }

    pub fn ratio(p: i64, q: i64) -> Scalar {
        assert!(q != 0, "zero denominator");
        Scalar::rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn rational(a: BigRational) -> Scalar {
        Scalar { d: 0, a, b: BigRational::zero() }
    }

    pub fn from_bigint(n: BigInt) -> Scalar {
        Scalar::rational(BigRational::from_integer(n))
    }

    /// `a + b*sqrt(d)`. `d` must be squarefree and at least 2 unless `b = 0`.
    pub fn new(d: u64, a: BigRational, b: BigRational) -> Result<Scalar> {
        if !b.is_zero() && !is_squarefree(d) {
            return Err(Error::InvalidParams(format!("{d} is not a squarefree integer >= 2")));
        }
        Ok(Scalar::canonical(d, a, b))
    }

    /// `sqrt(d)` for squarefree `d`.
    pub fn sqrt_of(d: u64) -> Result<Scalar> {
        Scalar::new(d, BigRational::zero(), BigRational::one())
    }

    /// `(1 + sqrt 5) / 2`.
    pub fn golden() -> Scalar {
        Scalar::canonical(5, BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 2.into()))
    }

    /// `(sqrt 5 - 1) / 2`, the reciprocal of the golden ratio.
    pub fn golden_conjugate() -> Scalar {
        Scalar::canonical(5, BigRational::new((-1).into(), 2.into()), BigRational::new(1.into(), 2.into()))
    }

    /// Field tag: the squarefree `d`, or 0 when the value is rational.
    pub fn field(&self) -> u64 {
        self.d
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.a.is_integer()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    /// Exact sign by case analysis on the signs of `a`, `b` and `a^2 - d*b^2`.
    pub fn signum(&self) -> Ordering {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        match (sa, sb) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (x, y) if x == y => x,
            (sa, sb) => {
                let lhs = &self.a * &self.a;
                let rhs = &self.b * &self.b * rat(self.d as i64);
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    // a^2 = d b^2 is impossible for squarefree d and b != 0
                    Ordering::Equal => unreachable!("sqrt({}) is irrational", self.d),
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Galois conjugate `a - b*sqrt(d)`.
    pub fn conj(&self) -> Scalar {
        Scalar::canonical(self.d, self.a.clone(), -&self.b)
    }

    /// Field norm `a^2 - d*b^2`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * rat(self.d as i64)
    }

    pub fn try_add(&self, o: &Scalar) -> Result<Scalar> {
        let d = join_fields(self.d, o.d)?;
        Ok(Scalar::canonical(d, &self.a + &o.a, &self.b + &o.b))
    }

    pub fn try_sub(&self, o: &Scalar) -> Result<Scalar> {
        let d = join_fields(self.d, o.d)?;
        Ok(Scalar::canonical(d, &self.a - &o.a, &self.b - &o.b))
    }

    pub fn try_mul(&self, o: &Scalar) -> Result<Scalar> {
        let d = join_fields(self.d, o.d)?;
        let dd = rat(d as i64);
        let a = &self.a * &o.a + &self.b * &o.b * dd;
        let b = &self.a * &o.b + &self.b * &o.a;
        Ok(Scalar::canonical(d, a, b))
    }

    pub fn recip(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(Scalar::canonical(self.d, &self.a / &n, -&self.b / &n))
    }

    pub fn try_div(&self, o: &Scalar) -> Result<Scalar> {
        join_fields(self.d, o.d)?;
        self.try_mul(&o.recip()?)
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut out = Scalar::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor().to_integer();
        }
        // floor(|b| sqrt d) = floor(isqrt(p q) / q) with b^2 d = p/q
        let s = &self.b * &self.b * rat(self.d as i64);
        let (p, q) = (s.numer().clone(), s.denom().clone());
        let root = (&p * &q).sqrt();
        let f = root.div_floor(&q);
        let mut n = self.a.floor().to_integer() + if self.b.is_positive() { f } else { -f - 1 };
        loop {
            let diff = self - &Scalar::from_bigint(n.clone());
            if diff.is_negative() {
                n -= 1;
            } else if (diff - Scalar::one()).signum() != Ordering::Less {
                n += 1;
            } else {
                return n;
            }
        }
    }

    /// `(floor(x), {x})` with `0 <= {x} < 1`.
    pub fn floor_frac(&self) -> (BigInt, Scalar) {
        let n = self.floor();
        let frac = self - &Scalar::from_bigint(n.clone());
        (n, frac)
    }

    /// Square root inside the field tagged `d` (or `Q` when `d = 0`), if it exists.
    pub fn sqrt_in_field(&self, d: u64) -> Option<Scalar> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        if self.is_rational() {
            if let Some(r) = rational_sqrt(&self.a) {
                return Some(Scalar::rational(r));
            }
            if d >= 2 {
                // a = d s^2 gives s sqrt d
                if let Some(s) = rational_sqrt(&(&self.a / rat(d as i64))) {
                    return Some(Scalar::canonical(d, BigRational::zero(), s));
                }
            }
            return None;
        }
        if d != 0 && d != self.d {
            return None;
        }
        // (x + y sqrt d)^2 = a + b sqrt d  =>  x^2 + d y^2 = a, 2xy = b
        let n = rational_sqrt(&self.norm())?;
        let two = rat(2);
        for cand in [(&self.a + &n) / &two, (&self.a - &n) / &two] {
            if let Some(x) = rational_sqrt(&cand) {
                if x.is_zero() {
                    continue;
                }
                let y = &self.b / (&x * &two);
                let r = Scalar::canonical(self.d, x, y);
                let r = r.abs();
                if &(&r * &r) == self {
                    return Some(r);
                }
            }
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }

    pub fn min(self, o: Scalar) -> Scalar {
        if o < self {
            o
        } else {
            self
        }
    }

    pub fn max(self, o: Scalar) -> Scalar {
        if o > self {
            o
        } else {
            self
        }
    }
}

fn sign_of(r: &BigRational) -> Ordering {
    r.cmp(&BigRational::zero())
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (p, q) = (r.numer(), r.denom());
    let sp = p.sqrt();
    let sq = q.sqrt();
    (&sp * &sp == *p && &sq * &sq == *q).then(|| BigRational::new(sp, sq))
}

/// `field_arith` from the exact-field contract.
pub fn field_arith(x: &Scalar, y: &Scalar, op: ArithOp) -> Result<Scalar> {
    match op {
        ArithOp::Add => x.try_add(y),
        ArithOp::Sub => x.try_sub(y),
        ArithOp::Mul => x.try_mul(y),
        ArithOp::Div => x.try_div(y),
    }
}

/// True iff `x / y` is rational.
pub fn commensurable(x: &Scalar, y: &Scalar) -> Result<bool> {
    if x.is_zero() || y.is_zero() {
        return Err(Error::ZeroInput);
    }
    Ok(x.try_div(y)?.is_rational())
}

/// Partition of indices into commensurability classes, ordered by smallest member.
pub fn commensurability_classes(values: &[Scalar]) -> Result<Vec<Vec<usize>>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if v.is_zero() {
            return Err(Error::ZeroInput);
        }
        let mut placed = false;
        for class in classes.iter_mut() {
            if commensurable(&values[class[0]], v)? {
                class.push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![i]);
        }
    }
    Ok(classes)
}

/// Smallest `r > 0` that is a positive integer multiple of every value.
pub fn least_common_integer_multiple(values: &[Scalar]) -> Result<Scalar> {
    let first = values.first().ok_or(Error::ZeroInput)?;
    let mut num_lcm = BigInt::one();
    let mut den_gcd = BigInt::zero();
    for v in values {
        if v.is_zero() {
            return Err(Error::ZeroInput);
        }
        if !v.is_positive() {
            return Err(Error::NonPositive);
        }
        let r = v.try_div(first)?;
        let r = r.as_rational().ok_or(Error::NotCommensurable)?;
        num_lcm = num_lcm.lcm(r.numer());
        den_gcd = den_gcd.gcd(r.denom());
    }
    let factor = Scalar::rational(BigRational::new(num_lcm, den_gcd));
    Ok(&factor * first)
}

/// Simple continued fraction `[a0; a1, a2, ...]` with convergents `p_n / q_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub quotients: Vec<BigInt>,
    /// `(p_n, q_n)` for each produced quotient, starting with `(a0, 1)`.
    pub convergents: Vec<(BigInt, BigInt)>,
    /// `(preperiod, period)` when state repetition was found within the cap.
    pub periodic: Option<(usize, usize)>,
    /// The expansion ended because the value is rational.
    pub terminated: bool,
}

pub const PERIOD_STATE_CAP: usize = 64;

impl ContinuedFraction {
    pub fn convergent(&self, n: usize) -> Option<BigRational> {
        self.convergents.get(n).map(|(p, q)| BigRational::new(p.clone(), q.clone()))
    }
}

/// First `n` partial quotients of `x >= 0`, with periodicity detection.
pub fn continued_fraction(x: &Scalar, n: usize) -> Result<ContinuedFraction> {
    if x.is_negative() {
        return Err(Error::NonPositive);
    }
    if n == 0 {
        return Err(Error::InvalidParams("need at least one quotient".into()));
    }
    let mut quotients = Vec::new();
    let mut states: Vec<Scalar> = Vec::new();
    let mut periodic = None;
    let mut terminated = false;
    let mut state = x.clone();
    let limit = n.max(PERIOD_STATE_CAP);
    for _ in 0..limit {
        if periodic.is_none() && states.len() < PERIOD_STATE_CAP {
            if let Some(j) = states.iter().position(|s| s == &state) {
                periodic = Some((j, states.len() - j));
            } else {
                states.push(state.clone());
            }
        }
        if quotients.len() >= n && (periodic.is_some() || states.len() >= PERIOD_STATE_CAP) {
            break;
        }
        let (a, frac) = state.floor_frac();
        if quotients.len() < n {
            quotients.push(a);
        }
        if frac.is_zero() {
            terminated = true;
            break;
        }
        state = frac.recip()?;
    }
    let mut convergents = Vec::with_capacity(quotients.len());
    let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    for a in &quotients {
        let p = a * &p1 + &p2;
        let q = a * &q1 + &q2;
        convergents.push((p.clone(), q.clone()));
        p2 = std::mem::replace(&mut p1, p);
        q2 = std::mem::replace(&mut q1, q);
    }
    Ok(ContinuedFraction { quotients, convergents, periodic, terminated })
}

// Operator impls panic on field mismatch; use `try_*` where mixing is possible.

macro_rules! binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$try(rhs).expect("scalar arithmetic across different fields")
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::canonical(self.d, -&self.a, -&self.b)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Scalar) -> Ordering {
        (self - other).signum()
    }
}

impl Default for Scalar {
    fn default() -> Scalar {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Scalar {
        Scalar::rational(r)
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Human-readable form, e.g. `3+2*sqrt(5)` or `-1/2+1/2*sqrt(5)`.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rat(&self.a));
        }
        let surd = if self.b.is_one() {
            format!("sqrt({})", self.d)
        } else if (-&self.b).is_one() {
            format!("-sqrt({})", self.d)
        } else {
            format!("{}*sqrt({})", fmt_rat(&self.b), self.d)
        };
        if self.a.is_zero() {
            write!(f, "{surd}")
        } else if surd.starts_with('-') {
            write!(f, "{}{}", fmt_rat(&self.a), surd)
        } else {
            write!(f, "{}+{}", fmt_rat(&self.a), surd)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses a rational `p`, `p/q` or decimal-free integer string.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Accepted forms: `r`, `sqrt(d)`, `r*sqrt(d)`, `r+r*sqrt(d)`, `r-sqrt(d)`,
/// where `r` is `p` or `p/q`. This is the form produced by `Display`.
impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scalar> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(pos) = s.find("sqrt(") else {
            return Ok(Scalar::rational(parse_rational(&s)?));
        };
        let bad = || Error::Parse(format!("bad scalar '{s}'"));
        let close = s[pos..].find(')').ok_or_else(bad)? + pos;
        if close + 1 != s.len() {
            return Err(bad());
        }
        let d: u64 = s[pos + 5..close].parse().map_err(|_| bad())?;
        let head = &s[..pos];
        let (rat_part, coef) = if let Some(h) = head.strip_suffix('*') {
            // split "a+b" / "a-b" at the last sign not in leading position
            let split = h.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').map(|(i, _)| i).last();
            match split {
                Some(i) => (Some(&h[..i]), h[i..].trim_start_matches('+').to_string()),
                None => (None, h.to_string()),
            }
        } else {
            match head.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').map(|(i, _)| i).last() {
                Some(i) if i + 1 == head.len() => (Some(&head[..i]), format!("{}1", &head[i..]).trim_start_matches('+').to_string()),
                None if head.is_empty() => (None, "1".to_string()),
                None if head == "-" => (None, "-1".to_string()),
                None if head == "+" => (None, "1".to_string()),
                _ => return Err(bad()),
            }
        };
        let a = match rat_part {
            Some(r) => parse_rational(r)?,
            None => BigRational::zero(),
        };
        let b = parse_rational(&coef)?;
        Scalar::new(d, a, b)
    }
}

/// JSON form `{"d": 5, "a": "p/q", "b": "r/s"}`.
pub mod json {
    use super::*;
    use serde_json::{json, Value};

    pub fn rational_string(r: &BigRational) -> String {
        format!("{}/{}", r.numer(), r.denom())
    }

    pub fn to_value(x: &Scalar) -> Value {
        json!({"d": x.d, "a": rational_string(&x.a), "b": rational_string(&x.b)})
    }

    pub fn from_value(v: &Value) -> Result<Scalar> {
        match v {
            Value::Object(m) => {
                let d = m.get("d").and_then(Value::as_u64).unwrap_or(0);
                let get = |k: &str| -> Result<BigRational> {
                    match m.get(k) {
                        None => Ok(BigRational::zero()),
                        Some(Value::String(s)) => parse_rational(s),
                        Some(Value::Number(n)) => n
                            .as_i64()
                            .map(rat)
                            .ok_or_else(|| Error::Parse(format!("non-integer number {n}"))),
                        Some(other) => Err(Error::Parse(format!("bad rational {other}"))),
                    }
                };
                Scalar::new(d, get("a")?, get("b")?)
            }
            Value::String(s) => s.parse(),
            Value::Number(n) => n.as_i64().map(Scalar::int).ok_or_else(|| Error::Parse(format!("non-integer number {n}"))),
            other => Err(Error::Parse(format!("bad scalar {other}"))),
        }
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    #[test]
    fn golden_product_is_one() {
        let x = Scalar::golden();
        let y = Scalar::golden_conjugate();
        assert_eq!(field_arith(&x, &y, ArithOp::Mul).unwrap(), Scalar::one());
    }

    #[test]
    fn identity_and_inverse() {
        let x = s("2+3*sqrt(5)");
        assert_eq!(field_arith(&x, &Scalar::zero(), ArithOp::Add).unwrap(), x);
        let z = field_arith(&x, &x, ArithOp::Sub).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.field(), 0);
    }

    #[test]
    fn division_errors() {
        assert_eq!(field_arith(&Scalar::one(), &Scalar::zero(), ArithOp::Div), Err(Error::DivisionByZero));
        let a = Scalar::sqrt_of(5).unwrap();
        let b = Scalar::sqrt_of(2).unwrap();
        assert_eq!(field_arith(&a, &b, ArithOp::Add), Err(Error::FieldMismatch(5, 2)));
        // rational operands mix with anything
        assert!(field_arith(&a, &Scalar::ratio(1, 2), ArithOp::Mul).is_ok());
    }

    #[test]
    fn rationality() {
        assert!(Scalar::ratio(3, 7).is_rational());
        let r5 = Scalar::sqrt_of(5).unwrap();
        assert!(!r5.is_rational());
        assert!((&r5 * &r5 / Scalar::int(5)).is_rational());
        assert_eq!(&r5 * &r5 / Scalar::int(5), Scalar::one());
    }

    #[test]
    fn signs() {
        assert!(s("3-sqrt(5)").is_positive());
        assert!(s("2-sqrt(5)").is_negative());
        assert!(s("-3+2*sqrt(2)").is_negative()); // 2.828 < 3
        assert!(s("-2+sqrt(5)").is_positive());
        assert!(s("0").signum() == Ordering::Equal);
    }

    #[test]
    fn commensurability_examples() {
        assert!(commensurable(&Scalar::int(3), &Scalar::ratio(1, 2)).unwrap());
        assert!(!commensurable(&Scalar::one(), &s("sqrt(5)")).unwrap());
        assert!(commensurable(&s("sqrt(5)"), &s("2*sqrt(5)")).unwrap());
        assert_eq!(commensurable(&Scalar::zero(), &Scalar::one()), Err(Error::ZeroInput));
    }

    #[test]
    fn class_partition() {
        let v = [Scalar::int(3), Scalar::one(), Scalar::one()];
        assert_eq!(commensurability_classes(&v).unwrap(), vec![vec![0, 1, 2]]);
        let v = [Scalar::int(3), Scalar::one(), s("sqrt(5)"), s("2*sqrt(5)")];
        assert_eq!(commensurability_classes(&v).unwrap(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(commensurability_classes(&[s("sqrt(5)")]).unwrap(), vec![vec![0]]);
        assert_eq!(commensurability_classes(&[Scalar::zero()]), Err(Error::ZeroInput));
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(least_common_integer_multiple(&[Scalar::int(3), Scalar::one()]).unwrap(), Scalar::int(3));
        assert_eq!(
            least_common_integer_multiple(&[Scalar::ratio(1, 2), Scalar::ratio(1, 3)]).unwrap(),
            Scalar::one()
        );
        assert_eq!(
            least_common_integer_multiple(&[s("sqrt(5)"), s("2*sqrt(5)")]).unwrap(),
            s("2*sqrt(5)")
        );
        assert_eq!(
            least_common_integer_multiple(&[Scalar::one(), s("sqrt(5)")]),
            Err(Error::NotCommensurable)
        );
    }

    #[test]
    fn floor_frac_examples() {
        assert_eq!(s("sqrt(5)").floor_frac(), (BigInt::from(2), s("-2+sqrt(5)")));
        assert_eq!(Scalar::ratio(-1, 2).floor_frac(), (BigInt::from(-1), Scalar::ratio(1, 2)));
        assert_eq!(Scalar::int(3).floor_frac(), (BigInt::from(3), Scalar::zero()));
        assert_eq!(s("-sqrt(5)").floor(), BigInt::from(-3));
        assert_eq!(s("1000-1/1000*sqrt(2)").floor(), BigInt::from(999));
    }

    #[test]
    fn continued_fraction_examples() {
        let cf = continued_fraction(&Scalar::golden_conjugate(), 5).unwrap();
        let q: Vec<i64> = cf.quotients.iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(q, vec![0, 1, 1, 1, 1]);
        let conv: Vec<(i64, i64)> =
            cf.convergents.iter().map(|(p, q)| (p.to_i64().unwrap(), q.to_i64().unwrap())).collect();
        assert_eq!(&conv[1..], &[(1, 1), (1, 2), (2, 3), (3, 5)]);
        assert_eq!(cf.periodic, Some((1, 1)));

        let cf = continued_fraction(&s("sqrt(5)"), 4).unwrap();
        let q: Vec<i64> = cf.quotients.iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(q, vec![2, 4, 4, 4]);
        assert_eq!(cf.periodic, Some((1, 1)));

        let cf = continued_fraction(&Scalar::ratio(7, 3), 10).unwrap();
        let q: Vec<i64> = cf.quotients.iter().map(|a| a.to_i64().unwrap()).collect();
        assert_eq!(q, vec![2, 3]);
        assert!(cf.terminated);
        assert_eq!(cf.periodic, None);
    }

    #[test]
    fn sqrt_in_field() {
        assert_eq!(Scalar::int(5).sqrt_in_field(5), Some(s("sqrt(5)")));
        assert_eq!(Scalar::int(2).sqrt_in_field(5), None);
        assert_eq!(Scalar::ratio(9, 4).sqrt_in_field(0), Some(Scalar::ratio(3, 2)));
        assert_eq!(s("6+2*sqrt(5)").sqrt_in_field(5), Some(s("1+sqrt(5)")));
        assert_eq!(s("3-sqrt(5)").sqrt_in_field(5), None);
    }

    #[test]
    fn parse_display_round_trip() {
        for text in ["3", "-1/2", "sqrt(5)", "-sqrt(5)", "1/2+1/2*sqrt(5)", "-1/2+1/2*sqrt(5)", "2-3*sqrt(5)", "3/4*sqrt(2)"] {
            let x = s(text);
            assert_eq!(x.to_string(), text);
        }
        assert_eq!(s("1+sqrt(5)"), s("1+1*sqrt(5)"));
        assert!("sqrt(4)".parse::<Scalar>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let x = s("-1/2+1/2*sqrt(5)");
        let v = json::to_value(&x);
        assert_eq!(v.to_string(), r#"{"a":"-1/2","b":"1/2","d":5}"#);
        assert_eq!(json::from_value(&v).unwrap(), x);
    }
}
