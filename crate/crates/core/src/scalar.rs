//! Scalar traits shared by the exact and numerical code paths.
//!
//! The Verma-module action and the Gaudin operators are written once, generic
//! over a [`Field`]. Three fields are used: exact rationals for the identity
//! checks, `Complex64` for transport, and [`Dual`] numbers for exact
//! directional derivatives of connection matrices.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Commutative ring with identity, used as the entry type of [`crate::linalg::Matrix`].
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Sub<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_int(n: i64) -> Self;
}

pub trait Field: Ring + Div<Output = Self> {
    /// Magnitude used for pivot selection in numeric modes; exact fields
    /// return 0 or 1.
    fn magnitude(&self) -> f64;

    /// Project to a complex number (the value part for dual numbers).
    fn to_complex(&self) -> Complex64;
}

impl Ring for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl Field for BigRational {
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }

    fn to_complex(&self) -> Complex64 {
        use num_traits::ToPrimitive;
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl Ring for Complex64 {
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
}

impl Field for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// First-order dual number `value + eps·ε` with `ε² = 0`.
///
/// Evaluating a rational expression on duals seeded with a tangent vector
/// returns the directional derivative exactly (up to rounding of the value
/// arithmetic itself), with no step-size error.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    pub value: Complex64,
    pub eps: Complex64,
}

impl Dual {
    pub fn new(value: Complex64, eps: Complex64) -> Self {
        Self { value, eps }
    }

    pub fn constant(value: Complex64) -> Self {
        Self {
            value,
            eps: Complex64::zero(),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.value + o.value, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.value - o.value, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.value * o.value, self.eps * o.value + self.value * o.eps)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = o.value.inv();
        Dual::new(
            self.value * inv,
            (self.eps * o.value - self.value * o.eps) * inv * inv,
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.eps)
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::constant(Complex64::zero())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.eps.is_zero()
    }
}

impl One for Dual {
    fn one() -> Self {
        Dual::constant(Complex64::one())
    }
}

impl Ring for Dual {
    fn from_int(n: i64) -> Self {
        Dual::constant(Complex64::new(n as f64, 0.0))
    }
}

impl Field for Dual {
    fn magnitude(&self) -> f64 {
        self.value.norm()
    }

    fn to_complex(&self) -> Complex64 {
        self.value
    }
}

/// Parse an exact rational from `"p"`, `"p/q"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part: BigInt = frac.parse().ok()?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let num = if negative { -magnitude } else { magnitude };
        return Some(BigRational::new(num, scale));
    }
    text.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Parse a complex number: real rationals (`"7/2"`, `"0.3"`), `"a+bi"`,
/// `"a-bi"`, `"bi"`, `"i"`, or `"-i"`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    use num_traits::ToPrimitive;
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return None;
    }
    let real = |s: &str| -> Option<f64> {
        if let Some(r) = parse_rational(s) {
            return r.to_f64();
        }
        s.parse::<f64>().ok().filter(|v| v.is_finite())
    };
    let Some(body) = text.strip_suffix('i') else {
        return real(&text).map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not part of an exponent or leading
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        if (bytes[idx] == b'+' || bytes[idx] == b'-')
            && !matches!(bytes[idx - 1], b'e' | b'E')
        {
            split = Some(idx);
            break;
        }
    }
    let imag_of = |s: &str| -> Option<f64> {
        match s {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            other => real(other),
        }
    };
    match split {
        Some(idx) => {
            let re = real(&body[..idx])?;
            let im = imag_of(&body[idx..])?;
            Some(Complex64::new(re, im))
        }
        None => imag_of(body).map(|im| Complex64::new(0.0, im)),
    }
}
