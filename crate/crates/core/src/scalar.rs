//! Coefficient rings.
//!
//! Exact computations use [`CRational`], complex numbers with
//! arbitrary-precision rational parts. Floating computations use
//! [`Complex64`]. Polynomial coefficients live in [`crate::poly`]. All three
//! implement [`Coeff`], so the exterior algebra is written once.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Exact complex rational number.
pub type CRational = Complex<BigRational>;

/// A coefficient ring for forms.
///
/// The ring must contain the Gaussian rationals, carry a conjugation, and be
/// cheap enough to clone.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Complex conjugation.
    fn conj(&self) -> Self;

    /// Embeds an exact complex rational.
    fn from_crational(c: &CRational) -> Self;

    /// `i^e`.
    fn i_pow(e: u8) -> Self {
        let one = Rational::one();
        let zero = Rational::zero();
        let c = match e % 4 {
            0 => CRational::new(one, zero),
            1 => CRational::new(zero, one),
            2 => CRational::new(-one, zero),
            _ => CRational::new(zero, -one),
        };
        Self::from_crational(&c)
    }

    /// Multiplication by an exact rational.
    fn scale_rational(&self, r: &Rational) -> Self {
        self.clone() * Self::from_crational(&CRational::new(r.clone(), Rational::zero()))
    }
}

impl Coeff for CRational {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn from_crational(c: &CRational) -> Self {
        c.clone()
    }

    fn scale_rational(&self, r: &Rational) -> Self {
        CRational::new(&self.re * r, &self.im * r)
    }
}

impl Coeff for Complex64 {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn from_crational(c: &CRational) -> Self {
        Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im))
    }
}

/// Scalars with a real/imaginary split: the exact and floating rings.
pub trait Scalar: Coeff + std::ops::Div<Output = Self> {
    type Real: crate::linalg::Field + PartialOrd;

    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn real_to_f64(r: &Self::Real) -> f64;
    fn to_c64(&self) -> Complex64 {
        Complex64::new(Self::real_to_f64(&self.re()), Self::real_to_f64(&self.im()))
    }
    /// Squared modulus as a float, used for pivoting.
    fn norm_sqr_f64(&self) -> f64 {
        self.to_c64().norm_sqr()
    }
    /// Whether the value should be treated as zero during elimination.
    fn negligible(&self) -> bool;
}

impl Scalar for CRational {
    type Real = Rational;

    fn re(&self) -> Rational {
        self.re.clone()
    }
    fn im(&self) -> Rational {
        self.im.clone()
    }
    fn from_parts(re: Rational, im: Rational) -> Self {
        CRational::new(re, im)
    }
    fn real_to_f64(r: &Rational) -> f64 {
        rational_to_f64(r)
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for Complex64 {
    type Real = f64;

    fn re(&self) -> f64 {
        self.re
    }
    fn im(&self) -> f64 {
        self.im
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn real_to_f64(r: &f64) -> f64 {
        *r
    }
    fn negligible(&self) -> bool {
        self.norm() < 1e-12
    }
}

/// `p/q` as an exact rational.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as an exact rational.
pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Exact complex rational `re + i·im` from integers.
pub fn cint(re: i64, im: i64) -> CRational {
    CRational::new(int(re), int(im))
}

/// Exact complex rational from rational parts.
pub fn crat(re: Rational, im: Rational) -> CRational {
    CRational::new(re, im)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Nearest rational with denominator `den`.
pub fn rational_from_f64(x: f64, den: i64) -> Rational {
    let num = (x * den as f64).round() as i64;
    rat(num, den)
}

/// Binomial coefficient as an exact integer rational.
pub fn binomial(n: usize, k: usize) -> Rational {
    if k > n {
        return Rational::zero();
    }
    Rational::from_integer(num_integer::binomial(BigInt::from(n), BigInt::from(k)))
}

/// Binomial coefficient as `u64`.
pub fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    num_integer::binomial(n as u64, k as u64)
}

/// Parses `"p/q"`, `"p"`, or a decimal string like `"-1.25"` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(p));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(r)
}

/// Formats an exact rational as `p/q` (or `p` when integral).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats an exact complex rational compactly, e.g. `3/2`, `-i`, `1 + 2i`.
pub fn format_crational(c: &CRational) -> String {
    let re = &c.re;
    let im = &c.im;
    let im_part = |v: &Rational| -> String {
        if v.is_one() {
            "i".to_string()
        } else if *v == -Rational::one() {
            "-i".to_string()
        } else {
            format!("{}i", format_rational(v))
        }
    };
    match (re.is_zero(), im.is_zero()) {
        (_, true) => format_rational(re),
        (true, false) => im_part(im),
        (false, false) => {
            if im.is_negative() {
                format!("{} - {}", format_rational(re), im_part(&-im.clone()))
            } else {
                format!("{} + {}", format_rational(re), im_part(im))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rational("-7"), Some(int(-7)));
        assert_eq!(parse_rational("1.25"), Some(rat(5, 4)));
        assert_eq!(parse_rational("-0.5e1"), Some(int(-5)));
        assert_eq!(parse_rational("2e-2"), Some(rat(1, 50)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn i_powers_cycle() {
        let i = <CRational as Coeff>::i_pow(1);
        assert_eq!(i.clone() * i, <CRational as Coeff>::i_pow(2));
        assert_eq!(<CRational as Coeff>::i_pow(4), CRational::one());
    }

    #[test]
    fn formats_compactly() {
        assert_eq!(format_crational(&cint(0, -1)), "-i");
        assert_eq!(format_crational(&crat(rat(3, 2), int(2))), "3/2 + 2i");
        assert_eq!(format_crational(&cint(1, -3)), "1 - 3i");
    }
}
