use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{PeError, Result};

pub type Rational = BigRational;

/// Coefficient ring used by trigonometric fields: exact rationals or `f64`.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(n: i64) -> Self;

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n) / Self::from_i64(d)
    }

    fn to_f64(&self) -> f64;

    fn from_f64_lossy(x: f64) -> Self;

    fn abs_val(&self) -> Self;

    fn is_exact() -> bool;

    /// Text form used in JSON records.
    fn to_repr(&self) -> String;

    fn parse_repr(s: &str) -> Result<Self>;
}

impl Coeff for Rational {
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        // Ratio of BigInts may overflow f64 individually; scale through bit lengths.
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let nb = self.numer().bits() as i64;
                let db = self.denom().bits() as i64;
                let shift = (nb - db).clamp(-1000, 1000);
                let scaled = if shift > 0 {
                    self / Rational::from_integer(BigInt::from(2).pow(shift as u32))
                } else {
                    self * Rational::from_integer(BigInt::from(2).pow((-shift) as u32))
                };
                let n = scaled.numer().to_f64().unwrap_or(f64::NAN);
                let d = scaled.denom().to_f64().unwrap_or(f64::NAN);
                (n / d) * 2f64.powi(shift as i32)
            }
        }
    }

    fn from_f64_lossy(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_else(Rational::zero)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_exact() -> bool {
        true
    }

    fn to_repr(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn parse_repr(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || PeError::Parse(format!("invalid rational '{s}'"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        } else if let Ok(n) = s.parse::<BigInt>() {
            Ok(Rational::from_integer(n))
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            Rational::from_float(x).ok_or_else(bad)
        }
    }
}

impl Coeff for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_exact() -> bool {
        false
    }

    fn to_repr(&self) -> String {
        format!("{:?}", self)
    }

    fn parse_repr(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| PeError::Parse(s.to_string()))?;
            let d: f64 = d.trim().parse().map_err(|_| PeError::Parse(s.to_string()))?;
            return Ok(n / d);
        }
        s.parse().map_err(|_| PeError::Parse(format!("invalid float '{s}'")))
    }
}

/// Shorthand for an exact rational `n/d`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}
