//! Exact rational scalar used for every valuation, payment and budget.
//!
//! Values whose numerator and denominator fit in an `i64` are kept inline and
//! combined with `i128` intermediates; anything larger is promoted to an
//! arbitrary-precision [`BigRational`]. The representation is canonical
//! (lowest terms, positive denominator, inline whenever it fits), so equality
//! and hashing can work on the representation directly.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
enum Repr {
    // den > 0, gcd(num, den) == 1, num != i64::MIN
    Small { num: i64, den: i64 },
    // never representable as Small
    Big(BigRational),
}

/// An exact rational number in canonical form.
#[derive(Clone)]
pub struct Value(Repr);

impl Value {
    pub const ZERO: Value = Value(Repr::Small { num: 0, den: 1 });
    pub const ONE: Value = Value(Repr::Small { num: 1, den: 1 });

    pub fn zero() -> Self {
        Self::ZERO
    }

    pub fn one() -> Self {
        Self::ONE
    }

    pub fn from_integer(n: i64) -> Self {
        if n == i64::MIN {
            Self::from_big(BigRational::from_integer(BigInt::from(n)))
        } else {
            Value(Repr::Small { num: n, den: 1 })
        }
    }

    /// `num / den`, reduced. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    pub fn from_big(r: BigRational) -> Self {
        if let (Some(num), Some(den)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if num != i64::MIN {
                return Value(Repr::Small { num, den });
            }
        }
        Value(Repr::Big(r))
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        if num > i64::MIN as i128 && num <= i64::MAX as i128 && den <= i64::MAX as i128 {
            Value(Repr::Small {
                num: num as i64,
                den: den as i64,
            })
        } else {
            Value(Repr::Big(BigRational::new(BigInt::from(num), BigInt::from(den))))
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => BigRational::new_raw(BigInt::from(*num), BigInt::from(*den)),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => BigInt::from(*den),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    /// The value as an `i64` if it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small { num, den: 1 } => Some(*num),
            _ => None,
        }
    }

    /// Lossy conversion for display and summary statistics only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn abs(&self) -> Value {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn checked_div(&self, rhs: &Value) -> Option<Value> {
        if rhs.is_zero() {
            return None;
        }
        Some(match (&self.0, &rhs.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                Self::from_i128(*a as i128 * *d as i128, *b as i128 * *c as i128)
            }
            _ => Self::from_big(self.to_big() / rhs.to_big()),
        })
    }

    pub fn min_of<'a>(items: impl IntoIterator<Item = &'a Value>) -> Option<Value> {
        items.into_iter().min().cloned()
    }

    pub fn max_of<'a>(items: impl IntoIterator<Item = &'a Value>) -> Option<Value> {
        items.into_iter().max().cloned()
    }
}

impl Default for Value {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::from_integer(n)
    }
}

impl From<i32> for Value {
    fn from(n: i32) -> Self {
        Value::from_integer(n as i64)
    }
}

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Self {
        Value::from_big(r)
    }
}

impl From<BigInt> for Value {
    fn from(n: BigInt) -> Self {
        Value::from_big(BigRational::from_integer(n))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { num, den } => {
                0u8.hash(state);
                num.hash(state);
                den.hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                if b == d {
                    a.cmp(c)
                } else {
                    (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
                }
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_values(x: &Value, y: &Value) -> Value {
    match (&x.0, &y.0) {
        (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
            if *b == 1 && *d == 1 {
                match a.checked_add(*c) {
                    Some(s) if s != i64::MIN => Value(Repr::Small { num: s, den: 1 }),
                    _ => Value::from_i128(*a as i128 + *c as i128, 1),
                }
            } else {
                Value::from_i128(
                    *a as i128 * *d as i128 + *c as i128 * *b as i128,
                    *b as i128 * *d as i128,
                )
            }
        }
        _ => Value::from_big(x.to_big() + y.to_big()),
    }
}

fn mul_values(x: &Value, y: &Value) -> Value {
    match (&x.0, &y.0) {
        (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
            Value::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
        }
        _ => Value::from_big(x.to_big() * y.to_big()),
    }
}

impl Neg for &Value {
    type Output = Value;
    fn neg(self) -> Value {
        match &self.0 {
            // num != i64::MIN, so negation cannot overflow
            Repr::Small { num, den } => Value(Repr::Small { num: -num, den: *den }),
            Repr::Big(r) => Value::from_big(-r),
        }
    }
}

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        -&self
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Value> for &Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                $body(self, rhs)
            }
        }
        impl $trait<Value> for Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Value> for Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                $body(&self, rhs)
            }
        }
        impl $trait<Value> for &Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_values);
forward_binop!(Sub, sub, |x: &Value, y: &Value| add_values(x, &-y));
forward_binop!(Mul, mul, mul_values);
forward_binop!(Div, div, |x: &Value, y: &Value| x
    .checked_div(y)
    .expect("division by zero"));

impl AddAssign<&Value> for Value {
    fn add_assign(&mut self, rhs: &Value) {
        *self = add_values(self, rhs);
    }
}

impl AddAssign<Value> for Value {
    fn add_assign(&mut self, rhs: Value) {
        *self = add_values(self, &rhs);
    }
}

impl SubAssign<&Value> for Value {
    fn sub_assign(&mut self, rhs: &Value) {
        *self = add_values(self, &-rhs);
    }
}

impl SubAssign<Value> for Value {
    fn sub_assign(&mut self, rhs: Value) {
        *self = add_values(self, &-rhs);
    }
}

impl Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Value> for Value {
    fn sum<I: Iterator<Item = &'a Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseValueError(pub String);

impl FromStr for Value {
    type Err = ParseValueError;

    /// Accepts `p`, `p/q` and finite decimals such as `-1.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseValueError(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Value::from_big(BigRational::new(p, q)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let negative = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let digits = format!("{int_digits}{frac}");
            let mut num: BigInt = digits.parse().map_err(|_| err())?;
            if negative {
                num = -num;
            }
            let den = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Value::from_big(BigRational::new(num, den)));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Value::from(n))
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.to_i64() {
            Some(n) => serializer.serialize_i64(n),
            None => serializer.serialize_str(&self.to_string()),
        }
    }
}

struct ValueVisitor;

impl Visitor<'_> for ValueVisitor {
    type Value = Value;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer or a rational string such as \"-3/4\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
        Ok(Value::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
        Ok(Value::from(BigInt::from(v)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Value, E> {
        Err(E::custom(format!(
            "floating-point literal {v} is not exact; encode it as a \"p/q\" string"
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Value, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ValueVisitor)
    }
}

/// Shorthand for building values in tests and examples: `val(3)`, `val((1, 2))`.
pub fn val(x: impl Into<ValueLiteral>) -> Value {
    x.into().0
}

#[doc(hidden)]
pub struct ValueLiteral(Value);

impl From<i64> for ValueLiteral {
    fn from(n: i64) -> Self {
        ValueLiteral(Value::from_integer(n))
    }
}

impl From<i32> for ValueLiteral {
    fn from(n: i32) -> Self {
        ValueLiteral(Value::from_integer(n as i64))
    }
}

impl From<(i64, i64)> for ValueLiteral {
    fn from((p, q): (i64, i64)) -> Self {
        ValueLiteral(Value::new(p, q))
    }
}

impl From<(i32, i32)> for ValueLiteral {
    fn from((p, q): (i32, i32)) -> Self {
        ValueLiteral(Value::new(p as i64, q as i64))
    }
}
