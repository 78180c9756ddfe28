//! Scalar abstraction for weights and objective values.
//!
//! All weight computations are generic over [`Scalar`] so the same code path
//! serves three numeric regimes:
//!
//! * `f64` for bulk computation,
//! * exact rationals ([`Rat128`] for small graphs, [`BigRat`] everywhere
//!   else) for oracle equivalence and exact edge-sum checks,
//! * [`Quad21`], the field Q(sqrt 21), in which the critical degree ratio
//!   (7 - sqrt 21)/14 is representable exactly.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational on `i128`. Safe for graphs with few vertices, where every
/// intermediate denominator is a product of extension counts small enough
/// that cross-multiplied additions stay far below the `i128` range.
pub type Rat128 = Ratio<i128>;

/// Arbitrary-precision rational; the exact mode for arbitrary inputs.
pub type BigRat = num_rational::BigRational;

/// Field operations plus the small embeddings the weighting formulas need.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (no rounding); reports use this to pick
    /// between decimal and fraction serialization.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;

    /// Embedding of a non-negative integer count.
    fn from_count(c: u64) -> Self;

    /// `1 / c` for a positive count; the only division the weighting needs.
    fn recip_count(c: u64) -> Self {
        Self::one() / Self::from_count(c)
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    /// The ramp `max(self, 0)`.
    fn ramp(self) -> Self {
        if self.is_negative() {
            Self::zero()
        } else {
            self
        }
    }

    fn abs(self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self
        }
    }

    /// Nearest `f64`, for summaries and tolerance checks.
    fn to_f64(&self) -> f64;

    /// Exact embedding of a finite float. Every finite `f64` is a dyadic
    /// rational `m * 2^e`, so the embedding is lossless; `None` when the
    /// value is not finite or does not fit this scalar type.
    fn from_f64_exact(x: f64) -> Option<Self>;

    /// Lossless textual form for exact scalars (`"p/q"`), `None` for floats.
    fn exact_string(&self) -> Option<String> {
        None
    }
}

/// Decomposes a finite float as `m * 2^e` with integer mantissa.
fn dyadic_parts(x: f64) -> Option<(i128, i32)> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some((0, 0));
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), biased - 1075)
    };
    Some((sign * m as i128, e))
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_count(c: u64) -> Self {
        c as f64
    }

    fn recip_count(c: u64) -> Self {
        1.0 / c as f64
    }

    fn is_negative(&self) -> bool {
        *self < 0.0
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64_exact(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
}

impl Scalar for Rat128 {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rat128 as Zero>::zero()
    }

    fn one() -> Self {
        <Rat128 as One>::one()
    }

    fn from_count(c: u64) -> Self {
        Ratio::from_integer(c as i128)
    }

    fn is_negative(&self) -> bool {
        <Self as Signed>::is_negative(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64_exact(x: f64) -> Option<Self> {
        let (m, e) = dyadic_parts(x)?;
        if e >= 0 {
            let num = m.checked_shl(e as u32)?;
            Some(Ratio::from_integer(num))
        } else if -e <= 126 {
            Some(Ratio::new(m, 1i128 << (-e)))
        } else {
            None
        }
    }

    fn exact_string(&self) -> Option<String> {
        Some(format!("{}/{}", self.numer(), self.denom()))
    }
}

impl Scalar for BigRat {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRat as Zero>::zero()
    }

    fn one() -> Self {
        <BigRat as One>::one()
    }

    fn from_count(c: u64) -> Self {
        Ratio::from_integer(BigInt::from(c))
    }

    fn is_negative(&self) -> bool {
        <Self as Signed>::is_negative(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64_exact(x: f64) -> Option<Self> {
        let (m, e) = dyadic_parts(x)?;
        let mantissa = BigInt::from(m);
        if e >= 0 {
            Some(Ratio::from_integer(mantissa << e))
        } else {
            Some(Ratio::new(mantissa, BigInt::from(1) << (-e)))
        }
    }

    fn exact_string(&self) -> Option<String> {
        Some(format!("{}/{}", self.numer(), self.denom()))
    }
}

/// Element `r + s*sqrt(21)` of the real quadratic field Q(sqrt 21), with
/// exact rational coordinates.
///
/// Ordering compares real values: the sign of `r + s*sqrt(21)` is decided by
/// the signs of `r` and `s`, falling back to comparing `r^2` against `21 s^2`
/// when they disagree. This is exact because `sqrt(21)` is irrational, so the
/// value is zero only when both coordinates are.
#[derive(Clone, PartialEq, Debug)]
pub struct Quad21 {
    /// Rational part.
    pub r: BigRat,
    /// Coefficient of `sqrt(21)`.
    pub s: BigRat,
}

impl Quad21 {
    pub fn new(r: BigRat, s: BigRat) -> Self {
        Quad21 { r, s }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Quad21 {
            r: BigRat::new(BigInt::from(num), BigInt::from(den)),
            s: <BigRat as Zero>::zero(),
        }
    }

    /// `sqrt(21)` itself.
    pub fn sqrt21() -> Self {
        Quad21 {
            r: <BigRat as Zero>::zero(),
            s: <BigRat as One>::one(),
        }
    }

    /// The critical degree ratio `(7 - sqrt 21) / 14 = 1/2 - (1/14) sqrt 21`.
    pub fn threshold() -> Self {
        Quad21 {
            r: BigRat::new(BigInt::from(1), BigInt::from(2)),
            s: BigRat::new(BigInt::from(-1), BigInt::from(14)),
        }
    }

    /// Sign of the real value `r + s*sqrt(21)`.
    pub fn sign(&self) -> Ordering {
        let zero = <BigRat as Zero>::zero();
        let sr = self.r.cmp(&zero);
        let ss = self.s.cmp(&zero);
        match (sr, ss) {
            (Ordering::Equal, Ordering::Equal) => Ordering::Equal,
            (Ordering::Less | Ordering::Equal, Ordering::Less | Ordering::Equal) => Ordering::Less,
            (Ordering::Greater | Ordering::Equal, Ordering::Greater | Ordering::Equal) => {
                Ordering::Greater
            }
            // Signs disagree: |r| versus |s|*sqrt(21), squared.
            _ => {
                let r2 = &self.r * &self.r;
                let s2_21 = &self.s * &self.s * BigRat::from_integer(BigInt::from(21));
                match (sr, r2.cmp(&s2_21)) {
                    (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
                    (Ordering::Greater, _) => Ordering::Less,
                    (_, Ordering::Greater) => Ordering::Less,
                    _ => Ordering::Greater,
                }
            }
        }
    }
}

impl Display for Quad21 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s.is_zero() {
            write!(f, "{}", self.r)
        } else {
            write!(f, "{} + ({})*sqrt(21)", self.r, self.s)
        }
    }
}

impl Add for Quad21 {
    type Output = Quad21;
    fn add(self, o: Quad21) -> Quad21 {
        Quad21 {
            r: self.r + o.r,
            s: self.s + o.s,
        }
    }
}

impl Sub for Quad21 {
    type Output = Quad21;
    fn sub(self, o: Quad21) -> Quad21 {
        Quad21 {
            r: self.r - o.r,
            s: self.s - o.s,
        }
    }
}

impl Neg for Quad21 {
    type Output = Quad21;
    fn neg(self) -> Quad21 {
        Quad21 {
            r: -self.r,
            s: -self.s,
        }
    }
}

impl Mul for Quad21 {
    type Output = Quad21;
    fn mul(self, o: Quad21) -> Quad21 {
        let twenty_one = BigRat::from_integer(BigInt::from(21));
        Quad21 {
            r: &self.r * &o.r + (&self.s * &o.s) * &twenty_one,
            s: &self.r * &o.s + &self.s * &o.r,
        }
    }
}

impl Div for Quad21 {
    type Output = Quad21;
    fn div(self, o: Quad21) -> Quad21 {
        // 1/(r + s*sqrt21) = (r - s*sqrt21) / (r^2 - 21 s^2); the norm is
        // nonzero for any nonzero element since sqrt(21) is irrational.
        let twenty_one = BigRat::from_integer(BigInt::from(21));
        let norm = &o.r * &o.r - (&o.s * &o.s) * &twenty_one;
        assert!(!norm.is_zero(), "division by zero in Q(sqrt 21)");
        let inv = Quad21 {
            r: &o.r / &norm,
            s: -(&o.s / &norm),
        };
        self * inv
    }
}

impl PartialOrd for Quad21 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = Quad21 {
            r: &self.r - &other.r,
            s: &self.s - &other.s,
        };
        Some(diff.sign())
    }
}

impl Scalar for Quad21 {
    const EXACT: bool = true;

    fn zero() -> Self {
        Quad21::from_ratio(0, 1)
    }

    fn one() -> Self {
        Quad21::from_ratio(1, 1)
    }

    fn from_count(c: u64) -> Self {
        Quad21 {
            r: BigRat::from_integer(BigInt::from(c)),
            s: <BigRat as Zero>::zero(),
        }
    }

    fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(&self.r).unwrap_or(f64::NAN)
            + ToPrimitive::to_f64(&self.s).unwrap_or(f64::NAN) * 21f64.sqrt()
    }

    fn from_f64_exact(x: f64) -> Option<Self> {
        Some(Quad21 {
            r: BigRat::from_f64_exact(x)?,
            s: <BigRat as Zero>::zero(),
        })
    }

    fn exact_string(&self) -> Option<String> {
        Some(format!("{}", self))
    }
}
