//! Numeric types shared by valuations: plain `f64` for simulation and the
//! numeric kernel, exact rationals for region representatives.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;

pub type Rational = Ratio<i64>;

/// Operations the region and guard code needs from a clock value.
pub trait ClockScalar: Copy + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn from_nat(n: u32) -> Self;
    fn add(self, other: Self) -> Self;
    /// Integral part, saturating at `u32::MAX`.
    fn int_part(self) -> u32;
    fn is_integer(self) -> bool;
    fn frac_cmp(self, other: Self) -> Ordering;
    fn to_f64(self) -> f64;
}

impl ClockScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_nat(n: u32) -> Self {
        n as f64
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn int_part(self) -> u32 {
        let f = self.floor();
        if f >= u32::MAX as f64 {
            u32::MAX
        } else {
            f as u32
        }
    }
    fn is_integer(self) -> bool {
        self.fract() == 0.0
    }
    fn frac_cmp(self, other: Self) -> Ordering {
        self.fract().total_cmp(&other.fract())
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl ClockScalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_nat(n: u32) -> Self {
        Ratio::from_integer(n as i64)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn int_part(self) -> u32 {
        let f = self.floor().to_integer();
        f.clamp(0, u32::MAX as i64) as u32
    }
    fn is_integer(self) -> bool {
        Ratio::is_integer(&self)
    }
    fn frac_cmp(self, other: Self) -> Ordering {
        self.fract().cmp(&other.fract())
    }
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

/// Parses `"3"`, `"1/2"` or a finite decimal such as `"0.25"` into a rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: i64 = num.trim().parse().ok()?;
        let d: i64 = den.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Ratio::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 15 {
        return None;
    }
    let int_v: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let frac_v: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().ok()?
    };
    let v = Ratio::new(int_v.checked_mul(scale)?.checked_add(frac_v)?, scale);
    Some(if neg { -v } else { v })
}

/// Rational approximation of a float, exact for dyadic values of moderate size.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Ratio::approximate_float(x)
}
