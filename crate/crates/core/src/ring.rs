//! Exact arithmetic over `Z[q^{±1}, t^{±1}]` and its fraction field.
//!
//! [`LaurentPoly2`] stores a sparse map from exponent pairs `(e_q, e_t)` to
//! nonzero big-integer coefficients, ordered lexicographically. [`RationalQT`]
//! is a reduced fraction of two such polynomials; reduction uses a bivariate
//! primitive-PRS gcd over `Z[q, t]` after shifting away negative exponents.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Ring;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RingError {
    #[error("binomial index {i} exceeds {k}")]
    BinomialDomain { k: u32, i: u32 },
    #[error("zero base raised to negative exponent")]
    ZeroBase,
    #[error("denominator vanishes at the evaluation point")]
    DenominatorVanishes,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed polynomial: {0}")]
    Malformed(String),
}

/// Exponent pair `(e_q, e_t)`; lexicographic order is the crate-wide monomial order.
pub type Exponent = (i64, i64);

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly2 {
    terms: BTreeMap<Exponent, BigInt>,
}

impl LaurentPoly2 {
    pub fn monomial(coeff: impl Into<BigInt>, e_q: i64, e_t: i64) -> Self {
        let coeff = coeff.into();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((e_q, e_t), coeff);
        }
        Self { terms }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn q() -> Self {
        Self::monomial(1, 1, 0)
    }

    pub fn t() -> Self {
        Self::monomial(1, 0, 1)
    }

    /// `q^e`, any sign.
    pub fn q_pow(e: i64) -> Self {
        Self::monomial(1, e, 0)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, BigInt)>) -> Self {
        let mut out = Self::default();
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: Exponent, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e_q: i64, e_t: i64) -> BigInt {
        self.terms.get(&(e_q, e_t)).cloned().unwrap_or_default()
    }

    /// Leading term under the lexicographic order.
    pub fn leading(&self) -> Option<(&Exponent, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// `(min e_q, min e_t, max e_q, max e_t)`; `None` for zero.
    pub fn exponent_box(&self) -> Option<(i64, i64, i64, i64)> {
        if self.terms.is_empty() {
            return None;
        }
        let mut b = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for &(eq, et) in self.terms.keys() {
            b.0 = b.0.min(eq);
            b.1 = b.1.min(et);
            b.2 = b.2.max(eq);
            b.3 = b.3.max(et);
        }
        Some(b)
    }

    /// True when no exponent of `t` is nonzero.
    pub fn is_t_free(&self) -> bool {
        self.terms.keys().all(|&(_, et)| et == 0)
    }

    /// Units of the Laurent ring are `±q^a t^b`.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().all(|c| c.abs().is_one())
    }

    pub fn shift(&self, dq: i64, dt: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(eq, et), c)| ((eq + dq, et + dt), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::default();
        }
        Self {
            terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Gcd of the integer coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Exact quotient `self / divisor` in the Laurent ring, or `None` when the
    /// division does not come out exact.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::default());
        }
        let (a0q, a0t, a1q, a1t) = self.exponent_box()?;
        let (b0q, b0t, b1q, b1t) = divisor.exponent_box()?;
        // an exact quotient has its exponents inside this box
        let (lo_q, lo_t, hi_q, hi_t) = (a0q - b0q, a0t - b0t, a1q - b1q, a1t - b1t);
        if lo_q > hi_q || lo_t > hi_t {
            return None;
        }
        let (&lead_b, lead_cb) = divisor.leading()?;
        let mut rem = self.clone();
        let mut quot = Self::default();
        while let Some((&lead_r, lead_cr)) = rem.leading() {
            let e = (lead_r.0 - lead_b.0, lead_r.1 - lead_b.1);
            if e.0 < lo_q || e.0 > hi_q || e.1 < lo_t || e.1 > hi_t {
                return None;
            }
            let (c, r) = lead_cr.div_rem(lead_cb);
            if !r.is_zero() {
                return None;
            }
            let step = Self::monomial(c.clone(), e.0, e.1);
            rem = &rem - &(&step * divisor);
            quot.add_term(e, c);
        }
        Some(quot)
    }

    /// Evaluate at `(q, t)`. Zero bases are only allowed with nonnegative exponents.
    pub fn eval(&self, q: Complex64, t: Complex64) -> Result<Complex64, RingError> {
        let mut acc = Complex64::zero();
        for (&(eq, et), c) in &self.terms {
            let c = c.to_f64().unwrap_or(f64::NAN);
            acc += c * int_pow(q, eq)? * int_pow(t, et)?;
        }
        Ok(acc)
    }

    /// Substitute a value for `t`, leaving a polynomial in `q` with complex coefficients
    /// (indexed by `q` exponent).
    pub fn eval_t(&self, t: Complex64) -> Result<BTreeMap<i64, Complex64>, RingError> {
        let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&(eq, et), c) in &self.terms {
            *out.entry(eq).or_default() += c.to_f64().unwrap_or(f64::NAN) * int_pow(t, et)?;
        }
        Ok(out)
    }

    /// Shift to a polynomial with nonnegative exponents and minimum exponent
    /// zero in each variable; returns the shift and the dense coefficient
    /// array `[e_q][e_t]`.
    fn to_dense(&self) -> ((i64, i64), BPoly) {
        let (mq, mt, hq, ht) = self.exponent_box().expect("nonzero polynomial");
        let mut dense: BPoly = vec![vec![BigInt::zero(); (ht - mt + 1) as usize]; (hq - mq + 1) as usize];
        for (&(eq, et), c) in &self.terms {
            dense[(eq - mq) as usize][(et - mt) as usize] = c.clone();
        }
        for row in dense.iter_mut() {
            u_trim(row);
        }
        ((mq, mt), dense)
    }

    fn from_dense(dense: &BPoly, shift: (i64, i64)) -> Self {
        let mut out = Self::default();
        for (eq, row) in dense.iter().enumerate() {
            for (et, c) in row.iter().enumerate() {
                out.add_term((eq as i64 + shift.0, et as i64 + shift.1), c.clone());
            }
        }
        out
    }
}

fn int_pow(base: Complex64, e: i64) -> Result<Complex64, RingError> {
    if e == 0 {
        return Ok(Complex64::one());
    }
    if base.is_zero() {
        return if e > 0 {
            Ok(Complex64::zero())
        } else {
            Err(RingError::ZeroBase)
        };
    }
    let e32 = i32::try_from(e).map_err(|_| RingError::Malformed(format!("exponent {e} too large")))?;
    Ok(base.powi(e32))
}

impl Zero for LaurentPoly2 {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for LaurentPoly2 {
    fn one() -> Self {
        Self::constant(1)
    }
}

impl Ring for LaurentPoly2 {
    fn from_int(n: i64) -> Self {
        Self::constant(n)
    }
}

impl Add<&LaurentPoly2> for &LaurentPoly2 {
    type Output = LaurentPoly2;
    fn add(self, rhs: &LaurentPoly2) -> LaurentPoly2 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub<&LaurentPoly2> for &LaurentPoly2 {
    type Output = LaurentPoly2;
    fn sub(self, rhs: &LaurentPoly2) -> LaurentPoly2 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Mul<&LaurentPoly2> for &LaurentPoly2 {
    type Output = LaurentPoly2;
    fn mul(self, rhs: &LaurentPoly2) -> LaurentPoly2 {
        let mut out = LaurentPoly2::default();
        for (&(aq, at), ac) in &self.terms {
            for (&(bq, bt), bc) in &rhs.terms {
                out.add_term((aq + bq, at + bt), ac * bc);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly2 {
    type Output = LaurentPoly2;
    fn neg(self) -> LaurentPoly2 {
        LaurentPoly2 {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

macro_rules! forward_value_ops {
    ($ty:ty) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                &self + &rhs
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                &self - &rhs
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                &self * &rhs
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                -&self
            }
        }
    };
}

forward_value_ops!(LaurentPoly2);

impl fmt::Display for LaurentPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (&(eq, et), c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            for (name, e) in [("q", eq), ("t", et)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly2({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<(i64, i64, String)>,
}

impl Serialize for LaurentPoly2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(&(eq, et), c)| (eq, et, c.to_string()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        let mut out = LaurentPoly2::default();
        for (eq, et, c) in raw.terms {
            let c: BigInt = c
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad coefficient {c:?}")))?;
            out.add_term((eq, et), c);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// dense univariate / bivariate integer polynomials for gcd computations

type UPoly = Vec<BigInt>;
type BPoly = Vec<UPoly>;

fn u_trim(a: &mut UPoly) {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
}

fn u_content(a: &UPoly) -> BigInt {
    a.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

fn u_mul(a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    u_trim(&mut out);
    out
}

fn u_sub(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    u_trim(&mut out);
    out
}

fn u_scale(a: &UPoly, c: &BigInt) -> UPoly {
    let mut out: UPoly = a.iter().map(|x| x * c).collect();
    u_trim(&mut out);
    out
}

fn u_shift(a: &UPoly, d: usize) -> UPoly {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); d];
    out.extend(a.iter().cloned());
    out
}

fn u_div_exact(a: &UPoly, b: &UPoly) -> Option<UPoly> {
    if b.is_empty() {
        return None;
    }
    if a.is_empty() {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let mut rem = a.clone();
    let mut quot = vec![BigInt::zero(); a.len() - b.len() + 1];
    let lb = b.last().unwrap();
    while rem.len() >= b.len() {
        let d = rem.len() - b.len();
        let (c, r) = rem.last().unwrap().div_rem(lb);
        if !r.is_zero() {
            return None;
        }
        rem = u_sub(&rem, &u_shift(&u_scale(b, &c), d));
        quot[d] = c;
    }
    if rem.is_empty() {
        u_trim(&mut quot);
        Some(quot)
    } else {
        None
    }
}

fn u_prem(a: &UPoly, b: &UPoly) -> UPoly {
    let mut rem = a.clone();
    let lb = b.last().unwrap().clone();
    while rem.len() >= b.len() && !rem.is_empty() {
        let d = rem.len() - b.len();
        let lr = rem.last().unwrap().clone();
        rem = u_sub(&u_scale(&rem, &lb), &u_shift(&u_scale(b, &lr), d));
    }
    rem
}

fn u_normalize(mut a: UPoly) -> UPoly {
    u_trim(&mut a);
    if a.is_empty() {
        return a;
    }
    let c = u_content(&a);
    let c = if a.last().unwrap().is_negative() { -c } else { c };
    a.iter().map(|x| x / &c).collect()
}

/// Gcd in `Z[t]`, primitive with positive leading coefficient (times the
/// integer gcd of contents).
fn u_gcd(a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() {
        return u_normalize_keep_content(b);
    }
    if b.is_empty() {
        return u_normalize_keep_content(a);
    }
    let c = u_content(a).gcd(&u_content(b));
    let (mut x, mut y) = (u_normalize(a.clone()), u_normalize(b.clone()));
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    while !y.is_empty() {
        let r = u_prem(&x, &y);
        x = y;
        y = u_normalize(r);
    }
    u_scale(&u_normalize(x), &c)
}

fn u_normalize_keep_content(a: &UPoly) -> UPoly {
    let mut a = a.clone();
    u_trim(&mut a);
    if a.last().is_some_and(Signed::is_negative) {
        a = a.iter().map(|x| -x).collect();
    }
    a
}

fn b_trim(a: &mut BPoly) {
    for row in a.iter_mut() {
        u_trim(row);
    }
    while a.last().is_some_and(Vec::is_empty) {
        a.pop();
    }
}

fn b_content(a: &BPoly) -> UPoly {
    a.iter().fold(Vec::new(), |acc, c| u_gcd(&acc, c))
}

fn b_div_u(a: &BPoly, c: &UPoly) -> BPoly {
    a.iter()
        .map(|x| u_div_exact(x, c).expect("content divides every coefficient"))
        .collect()
}

fn b_primitive(a: &BPoly) -> BPoly {
    let c = b_content(a);
    let mut p = b_div_u(a, &c);
    b_trim(&mut p);
    p
}

fn b_sub(a: &BPoly, b: &BPoly) -> BPoly {
    let mut out = vec![Vec::new(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] = x.clone();
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = u_sub(&out[i], y);
    }
    b_trim(&mut out);
    out
}

fn b_mul_u(a: &BPoly, c: &UPoly) -> BPoly {
    let mut out: BPoly = a.iter().map(|x| u_mul(x, c)).collect();
    b_trim(&mut out);
    out
}

fn b_shift(a: &BPoly, d: usize) -> BPoly {
    let mut out = vec![Vec::new(); d];
    out.extend(a.iter().cloned());
    out
}

/// `lc(b)^(deg a - deg b + 1) · a mod b`, the exact pseudo-remainder.
fn b_prem_exact(a: &BPoly, b: &BPoly) -> BPoly {
    let lb = b.last().unwrap().clone();
    let mut steps = (a.len() + 1).saturating_sub(b.len());
    let mut rem = a.clone();
    while rem.len() >= b.len() && !rem.is_empty() {
        let d = rem.len() - b.len();
        let lr = rem.last().unwrap().clone();
        rem = b_sub(&b_mul_u(&rem, &lb), &b_shift(&b_mul_u(b, &lr), d));
        steps -= 1;
    }
    for _ in 0..steps {
        rem = b_mul_u(&rem, &lb);
    }
    rem
}

fn u_pow(a: &UPoly, e: usize) -> UPoly {
    (0..e).fold(vec![BigInt::one()], |acc, _| u_mul(&acc, a))
}

fn b_transpose(a: &BPoly) -> BPoly {
    let inner = a.iter().map(Vec::len).max().unwrap_or(0);
    let mut out: BPoly = vec![vec![BigInt::zero(); a.len()]; inner];
    for (i, row) in a.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            out[j][i] = c.clone();
        }
    }
    b_trim(&mut out);
    out
}

/// Gcd in `Z[q, t]` by the subresultant PRS, with the lower-degree variable
/// as the main one.
fn b_gcd(a: &BPoly, b: &BPoly) -> BPoly {
    let inner = |p: &BPoly| p.iter().map(Vec::len).max().unwrap_or(0);
    let swap = inner(a).max(inner(b)) < a.len().max(b.len());
    let (a, b) = if swap {
        (b_transpose(a), b_transpose(b))
    } else {
        (a.clone(), b.clone())
    };
    let c = u_gcd(&b_content(&a), &b_content(&b));
    let (mut x, mut y) = (b_primitive(&a), b_primitive(&b));
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    let mut g: UPoly = vec![BigInt::one()];
    let mut h: UPoly = vec![BigInt::one()];
    while !y.is_empty() && y.len() > 1 {
        let delta = x.len() - y.len();
        let r = b_prem_exact(&x, &y);
        if r.is_empty() {
            break;
        }
        let divisor = u_mul(&g, &u_pow(&h, delta));
        x = y;
        y = b_div_u(&r, &divisor);
        b_trim(&mut y);
        g = x.last().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            let num = u_pow(&g, delta);
            let den = u_pow(&h, delta - 1);
            u_div_exact(&num, &den).expect("subresultant recurrence divides exactly")
        };
    }
    // a constant (in the main variable) remainder means the primitive gcd is 1
    let last = if y.len() == 1 { vec![vec![BigInt::one()]] } else { b_primitive(&y) };
    let mut g = b_mul_u(&last, &c);
    if swap {
        g = b_transpose(&g);
    }
    if g
        .last()
        .and_then(|row| row.last())
        .is_some_and(Signed::is_negative)
    {
        g = g.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
    }
    g
}

fn b_div_exact(a: &BPoly, b: &BPoly) -> Option<BPoly> {
    if b.is_empty() {
        return None;
    }
    let mut rem = a.clone();
    b_trim(&mut rem);
    if rem.is_empty() {
        return Some(Vec::new());
    }
    if rem.len() < b.len() {
        return None;
    }
    let mut quot = vec![Vec::new(); rem.len() - b.len() + 1];
    let lb = b.last().unwrap();
    while rem.len() >= b.len() {
        let d = rem.len() - b.len();
        let c = u_div_exact(rem.last().unwrap(), lb)?;
        rem = b_sub(&rem, &b_shift(&b_mul_u(b, &c), d));
        quot[d] = c;
    }
    if rem.is_empty() {
        b_trim(&mut quot);
        Some(quot)
    } else {
        None
    }
}

/// Greatest common divisor of two Laurent polynomials, returned as an honest
/// polynomial (no negative exponents, no monomial factor) with positive
/// leading coefficient. Only defined up to units of the Laurent ring.
pub fn gcd(a: &LaurentPoly2, b: &LaurentPoly2) -> LaurentPoly2 {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => LaurentPoly2::zero(),
        (true, false) => normalize_poly(b),
        (false, true) => normalize_poly(a),
        (false, false) => {
            let (_, da) = a.to_dense();
            let (_, db) = b.to_dense();
            LaurentPoly2::from_dense(&b_gcd(&da, &db), (0, 0))
        }
    }
}

fn normalize_poly(a: &LaurentPoly2) -> LaurentPoly2 {
    let (_, d) = a.to_dense();
    let p = LaurentPoly2::from_dense(&d, (0, 0));
    match p.leading() {
        Some((_, c)) if c.is_negative() => -p,
        _ => p,
    }
}

// ---------------------------------------------------------------------------

/// Element of `Q(q, t)` as a reduced fraction.
///
/// Canonical form: the denominator is a polynomial (no negative exponents)
/// with no monomial factor and positive leading coefficient; numerator and
/// denominator share no nonunit factor and no common integer content.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct RationalQT {
    numerator: LaurentPoly2,
    denominator: LaurentPoly2,
}

impl RationalQT {
    pub fn new(numerator: LaurentPoly2, denominator: LaurentPoly2) -> Result<Self, RingError> {
        if denominator.is_zero() {
            return Err(RingError::ZeroDenominator);
        }
        if numerator.is_zero() {
            return Ok(Self::from_poly(LaurentPoly2::zero()));
        }
        let (sn, n) = numerator.to_dense();
        let (sd, d) = denominator.to_dense();
        let g = b_gcd(&n, &d);
        let n = b_div_exact(&n, &g).expect("gcd divides numerator");
        let d = b_div_exact(&d, &g).expect("gcd divides denominator");
        let mut num = LaurentPoly2::from_dense(&n, (sn.0 - sd.0, sn.1 - sd.1));
        let mut den = LaurentPoly2::from_dense(&d, (0, 0));
        // move any monomial factor of the denominator into the numerator
        let (mq, mt, _, _) = den.exponent_box().expect("nonzero");
        if mq != 0 || mt != 0 {
            den = den.shift(-mq, -mt);
            num = num.shift(-mq, -mt);
        }
        let content = num.content().gcd(&den.content());
        if !content.is_one() {
            num = LaurentPoly2::from_terms(num.terms().map(|(e, c)| (*e, c / &content)));
            den = LaurentPoly2::from_terms(den.terms().map(|(e, c)| (*e, c / &content)));
        }
        if den.leading().is_some_and(|(_, c)| c.is_negative()) {
            num = -num;
            den = -den;
        }
        Ok(Self {
            numerator: num,
            denominator: den,
        })
    }

    pub fn from_poly(p: LaurentPoly2) -> Self {
        Self {
            numerator: p,
            denominator: LaurentPoly2::one(),
        }
    }

    pub fn numerator(&self) -> &LaurentPoly2 {
        &self.numerator
    }

    pub fn denominator(&self) -> &LaurentPoly2 {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// The polynomial this fraction equals, when the denominator is a unit.
    pub fn as_poly(&self) -> Option<LaurentPoly2> {
        if self.denominator.is_unit() {
            self.numerator.div_exact(&self.denominator)
        } else {
            None
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            &self.numerator * &other.numerator,
            &self.denominator * &other.denominator,
        )
        .expect("product of nonzero denominators")
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            &(&self.numerator * &other.denominator) + &(&other.numerator * &self.denominator),
            &self.denominator * &other.denominator,
        )
        .expect("product of nonzero denominators")
    }

    pub fn neg(&self) -> Self {
        Self {
            numerator: -&self.numerator,
            denominator: self.denominator.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn div(&self, other: &Self) -> Result<Self, RingError> {
        if other.is_zero() {
            return Err(RingError::ZeroDenominator);
        }
        Self::new(
            &self.numerator * &other.denominator,
            &self.denominator * &other.numerator,
        )
    }

    pub fn eval(&self, q: Complex64, t: Complex64) -> Result<Complex64, RingError> {
        let den = self.denominator.eval(q, t)?;
        if den.norm() <= 1e-300 {
            return Err(RingError::DenominatorVanishes);
        }
        Ok(self.numerator.eval(q, t)? / den)
    }
}

impl fmt::Display for RationalQT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator.is_one() {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "({}) / ({})", self.numerator, self.denominator)
        }
    }
}

// ---------------------------------------------------------------------------

/// `[n]_{-t} = ((-t)^n - 1)/((-t) - 1) = 1 + (-t) + ... + (-t)^{n-1}`.
pub fn quantum_integer(n: u32) -> LaurentPoly2 {
    LaurentPoly2::from_terms((0..n as i64).map(|j| ((0, j), if j % 2 == 0 { 1.into() } else { (-1).into() })))
}

/// `[n]_{-t}!`
pub fn quantum_factorial(n: u32) -> LaurentPoly2 {
    (1..=n).fold(LaurentPoly2::one(), |acc, k| &acc * &quantum_integer(k))
}

/// The `(-t)`-binomial coefficient `[k]! / ([k-i]! [i]!)`, divided exactly.
pub fn qt_binomial(k: u32, i: u32) -> Result<LaurentPoly2, RingError> {
    if i > k {
        return Err(RingError::BinomialDomain { k, i });
    }
    let num = quantum_factorial(k);
    let den = &quantum_factorial(k - i) * &quantum_factorial(i);
    Ok(num
        .div_exact(&den)
        .expect("(-t)-binomial coefficients are polynomials"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(terms: &[(i64, i64, i64)]) -> LaurentPoly2 {
        LaurentPoly2::from_terms(terms.iter().map(|&(a, b, c)| ((a, b), BigInt::from(c))))
    }

    #[test]
    fn difference_of_squares() {
        let a = poly(&[(0, 0, 1), (1, 0, 1)]);
        let b = poly(&[(0, 0, 1), (1, 0, -1)]);
        assert_eq!(&a * &b, poly(&[(0, 0, 1), (2, 0, -1)]));
    }

    #[test]
    fn annihilator_and_cancellation() {
        let p = poly(&[(3, -2, 5), (-1, 4, -7)]);
        assert!((&p * &LaurentPoly2::zero()).is_zero());
        let a = poly(&[(1, 0, 1), (0, 1, 1)]);
        let b = poly(&[(-1, 0, 1), (0, 1, -1)]);
        assert_eq!(&a + &b, poly(&[(1, 0, 1), (-1, 0, 1)]));
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(qt_binomial(5, 0).unwrap(), LaurentPoly2::one());
        assert_eq!(qt_binomial(2, 1).unwrap(), poly(&[(0, 0, 1), (0, 1, -1)]));
        assert_eq!(
            qt_binomial(3, 1).unwrap(),
            poly(&[(0, 0, 1), (0, 1, -1), (0, 2, 1)])
        );
        assert_eq!(
            qt_binomial(2, 3),
            Err(RingError::BinomialDomain { k: 2, i: 3 })
        );
    }

    /// q-Pascal recurrence with x = -t, independent of the factorial quotient:
    /// [k, i] = [k-1, i-1] + x^i [k-1, i].
    fn pascal_oracle(k: u32, i: u32) -> LaurentPoly2 {
        let mut rows = vec![vec![LaurentPoly2::one()]];
        for kk in 1..=k as usize {
            let prev = &rows[kk - 1];
            let mut row = Vec::with_capacity(kk + 1);
            for ii in 0..=kk {
                let left = if ii > 0 { prev[ii - 1].clone() } else { LaurentPoly2::zero() };
                let right = if ii < kk {
                    let sign = if ii % 2 == 0 { 1 } else { -1 };
                    &LaurentPoly2::monomial(sign, 0, ii as i64) * &prev[ii]
                } else {
                    LaurentPoly2::zero()
                };
                row.push(&left + &right);
            }
            rows.push(row);
        }
        rows[k as usize][i as usize].clone()
    }

    #[test]
    fn binomial_matches_pascal_and_is_symmetric() {
        for k in 0..=12 {
            for i in 0..=k {
                let b = qt_binomial(k, i).unwrap();
                assert_eq!(b, pascal_oracle(k, i), "k={k} i={i}");
                assert_eq!(b, qt_binomial(k, k - i).unwrap());
            }
        }
    }

    #[test]
    fn evaluation_examples() {
        let one_minus_q = poly(&[(0, 0, 1), (1, 0, -1)]);
        let z = one_minus_q
            .eval(Complex64::new(1.0, 0.0), Complex64::new(3.7, -1.0))
            .unwrap();
        assert_eq!(z, Complex64::zero());
        let v = poly(&[(1, -1, 1)])
            .eval(Complex64::new(2.0, 0.0), Complex64::new(4.0, 0.0))
            .unwrap();
        assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let b = qt_binomial(2, 1)
            .unwrap()
            .eval(Complex64::one(), Complex64::new(-1.0, 0.0))
            .unwrap();
        assert!((b - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(
            poly(&[(-1, 0, 1)]).eval(Complex64::zero(), Complex64::one()),
            Err(RingError::ZeroBase)
        );
    }

    #[test]
    fn rational_reduction() {
        // (q^2 - 1)/(q - 1) = q + 1
        let r = RationalQT::new(poly(&[(2, 0, 1), (0, 0, -1)]), poly(&[(1, 0, 1), (0, 0, -1)])).unwrap();
        assert_eq!(r.as_poly().unwrap(), poly(&[(1, 0, 1), (0, 0, 1)]));
        // (q t - q)/(q^2 t^2 - q^2) = q^-1/(t + 1)
        let r = RationalQT::new(
            poly(&[(1, 1, 1), (1, 0, -1)]),
            poly(&[(2, 2, 1), (2, 0, -1)]),
        )
        .unwrap();
        assert_eq!(r.numerator(), &poly(&[(-1, 0, 1)]));
        assert_eq!(r.denominator(), &poly(&[(0, 1, 1), (0, 0, 1)]));
        // sign and content normalisation
        let r = RationalQT::new(poly(&[(0, 0, 4)]), poly(&[(0, 0, -6), (1, 0, -2)])).unwrap();
        assert_eq!(r.numerator(), &poly(&[(0, 0, -2)]));
        assert_eq!(r.denominator(), &poly(&[(0, 0, 3), (1, 0, 1)]));
        assert_eq!(
            RationalQT::new(LaurentPoly2::one(), LaurentPoly2::zero()),
            Err(RingError::ZeroDenominator)
        );
    }

    #[test]
    fn bivariate_gcd_finds_shared_factor() {
        let f = poly(&[(1, 0, 1), (0, 1, 1), (0, 0, 2)]); // q + t + 2
        let g = poly(&[(1, 1, 3), (0, 0, -1)]); // 3qt - 1
        let h = poly(&[(2, 0, 1), (0, 3, -5)]); // q^2 - 5t^3
        let a = &f * &g;
        let b = &(&f * &h).shift(-3, 2) * &LaurentPoly2::constant(6);
        assert_eq!(gcd(&a, &b), f);
    }

    #[test]
    fn serde_roundtrip_and_order() {
        let p = poly(&[(1, 0, -3), (-1, 2, 7), (0, 0, 1)]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"terms":[[-1,2,"7"],[0,0,"1"],[1,0,"-3"]]}"#);
        let back: LaurentPoly2 = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.to_string(), "7*q^-1*t^2 + 1 - 3*q");
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly2> {
        prop::collection::vec((-4i64..=4, -4i64..=4, -9i64..=9), 0..6).prop_map(|ts| poly(&ts))
    }

    fn arb_wide_poly() -> impl Strategy<Value = LaurentPoly2> {
        prop::collection::vec((-8i64..=8, -8i64..=8, -9i64..=9), 0..6).prop_map(|ts| poly(&ts))
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn exact_division_inverts_multiplication(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).div_exact(&b), Some(a));
        }

        #[test]
        fn eval_is_multiplicative(a in arb_wide_poly(), b in arb_wide_poly(),
                                  qr in 0.5f64..1.5, qi in -0.5f64..0.5,
                                  tr in 0.5f64..1.5, ti in -0.5f64..0.5) {
            let (q, t) = (Complex64::new(qr, qi), Complex64::new(tr, ti));
            let lhs = (&a * &b).eval(q, t).unwrap();
            let rhs = a.eval(q, t).unwrap() * b.eval(q, t).unwrap();
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
        }

        #[test]
        fn rational_canonical_under_rescaling(a in arb_poly(), b in arb_poly(), u in arb_poly()) {
            prop_assume!(!b.is_zero() && !u.is_zero());
            let r1 = RationalQT::new(a.clone(), b.clone()).unwrap();
            let r2 = RationalQT::new(&a * &u, &b * &u).unwrap();
            prop_assert_eq!(r1, r2);
        }
    }
}
