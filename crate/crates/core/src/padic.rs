//! p-adic valuations, absolute values and balls over exact rationals.
//!
//! Absolute values are never materialized as floats. A size `|x|_p` is
//! carried as the valuation `v_p(x)`, with `|x|_p = p^(-v_p(x))`, and a radius
//! `r = p^e` is carried as its exponent `e`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact arbitrary-precision fraction, always in lowest terms.
pub type Rational = BigRational;

/// Shorthand for building small rationals.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"a"` or `"a/b"` in decimal.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// p-adic valuation: an integer, or +∞ for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinity)
    }

    /// Absolute-value exponent `-v`, `None` for zero.
    pub fn abs_exponent(self) -> Option<i64> {
        self.finite().map(|v| -v)
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinity,
        }
    }
}

impl Add<i64> for Valuation {
    type Output = Valuation;

    fn add(self, rhs: i64) -> Valuation {
        match self {
            Valuation::Finite(a) => Valuation::Finite(a + rhs),
            Valuation::Infinity => Valuation::Infinity,
        }
    }
}

impl PartialEq<i64> for Valuation {
    fn eq(&self, other: &i64) -> bool {
        *self == Valuation::Finite(*other)
    }
}

impl PartialOrd<i64> for Valuation {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Valuation::Finite(*other)))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Valuation::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Valuation::Infinity),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad valuation `{s}`"))),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k.saturating_mul(k) <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// The prime, its derived constant `d`, and the truncation orders.
///
/// `d = 2` for `p = 2` and `d = 1` otherwise; the exponential series
/// converges exactly on the ball of radius `p^(-d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    p: u64,
    d: u32,
    order: u32,
    t_order: u32,
    prime: BigInt,
}

impl Context {
    pub fn new(p: u64, order: u32, t_order: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if order < 2 {
            return Err(Error::InvalidOrder(format!("space order {order} < 2")));
        }
        if t_order < 1 {
            return Err(Error::InvalidOrder(format!("time order {t_order} < 1")));
        }
        Ok(Context {
            p,
            d: if p == 2 { 2 } else { 1 },
            order,
            t_order,
            prime: BigInt::from(p),
        })
    }

    /// Context with default orders, for callers that only need valuations.
    pub fn with_prime(p: u64) -> Result<Self> {
        Self::new(p, 8, 4)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn t_order(&self) -> u32 {
        self.t_order
    }

    pub fn prime(&self) -> &BigInt {
        &self.prime
    }

    /// `p^e` as a rational, for any integer `e`.
    pub fn power(&self, e: i64) -> Rational {
        let m = num_traits::pow(self.prime.clone(), e.unsigned_abs() as usize);
        if e >= 0 {
            Rational::from_integer(m)
        } else {
            Rational::new(BigInt::one(), m)
        }
    }

    pub fn int_valuation(&self, n: &BigInt) -> Valuation {
        if n.is_zero() {
            return Valuation::Infinity;
        }
        let mut n = n.abs();
        let mut k = 0;
        loop {
            let (q, r) = n.div_rem(&self.prime);
            if !r.is_zero() {
                return Valuation::Finite(k);
            }
            n = q;
            k += 1;
        }
    }

    /// Exact `v_p(x)`; for `m/n` in lowest terms this is `v_p(m) - v_p(n)`.
    pub fn valuation(&self, x: &Rational) -> Valuation {
        match self.int_valuation(x.numer()) {
            Valuation::Infinity => Valuation::Infinity,
            Valuation::Finite(a) => {
                let b = self.int_valuation(x.denom()).finite().unwrap_or(0);
                Valuation::Finite(a - b)
            }
        }
    }

    /// Valuation of the sup norm: the minimum component valuation.
    pub fn norm_valuation(&self, v: &[Rational]) -> Valuation {
        v.iter()
            .map(|x| self.valuation(x))
            .min()
            .unwrap_or(Valuation::Infinity)
    }

    /// Whether `‖y - center‖_p ≤ p^radius_exponent`.
    pub fn in_ball(&self, y: &[Rational], center: &[Rational], radius_exponent: i64) -> Result<bool> {
        if y.len() != center.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                found: y.len(),
            });
        }
        let diff: Vec<Rational> = y.iter().zip(center).map(|(a, b)| a - b).collect();
        Ok(self.norm_valuation(&diff) >= Valuation::Finite(-radius_exponent))
    }

    /// `v_p(j!)` by Legendre's formula.
    pub fn factorial_valuation(&self, j: u64) -> i64 {
        let mut total = 0u64;
        let mut q = j;
        while q > 0 {
            q /= self.p;
            total += q;
        }
        total as i64
    }
}
