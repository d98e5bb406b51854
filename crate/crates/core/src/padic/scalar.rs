use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::valuation::{qi, Q};
use crate::error::{Error, Result};

thread_local! {
    static POWERS: RefCell<HashMap<(u64, u64), BigUint>> = RefCell::new(HashMap::new());
}

/// `p^k` as a big integer, memoized per thread for small exponents.
pub fn ppow(p: u64, k: u64) -> BigUint {
    if k > 4096 {
        return BigUint::from(p).pow(k as u32);
    }
    POWERS.with(|c| {
        c.borrow_mut()
            .entry((p, k))
            .or_insert_with(|| BigUint::from(p).pow(k as u32))
            .clone()
    })
}

/// Strips factors of `p`, returning the count.
fn strip_p(p: u64, x: &mut BigUint) -> i64 {
    let mut t = 0;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&*x, &BigUint::from(p));
        if !r.is_zero() {
            return t;
        }
        *x = q;
        t += 1;
    }
}

pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_odd_prime(p) {
        Ok(())
    } else {
        Err(Error::UnsupportedPrime(p))
    }
}

/// Stand-in precision for exactly known constants.
pub const EXACT_PREC: i64 = 1 << 40;

/// An element of `Q_p` known modulo `p^prec`.
///
/// The value is `p^val * unit` with `unit` a `p`-adic unit reduced modulo
/// `p^(prec - val)`. A value indistinguishable from zero carries no
/// valuation and only its precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u64,
    val: Option<i64>,
    unit: BigUint,
    prec: i64,
}

/// The four operations exposed through [`scalar_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked scalar arithmetic: rejects mixed primes, division by elements
/// that vanish to precision, and results without any certified digits.
pub fn scalar_arith(a: &PadicScalar, b: &PadicScalar, op: ArithOp) -> Result<PadicScalar> {
    if a.p != b.p {
        return Err(Error::PrimeMismatch(a.p, b.p));
    }
    let r = match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    };
    if r.prec <= 0 {
        return Err(Error::PrecisionExhausted(r.prec));
    }
    Ok(r)
}

impl PadicScalar {
    pub fn zero(p: u64, prec: i64) -> Self {
        PadicScalar { p, val: None, unit: BigUint::zero(), prec }
    }

    /// The integer 1 with unbounded precision; a neutral start for products.
    pub fn exact_one(p: u64) -> Self {
        PadicScalar { p, val: Some(0), unit: BigUint::one(), prec: EXACT_PREC }
    }

    pub fn one(p: u64, prec: i64) -> Self {
        Self::from_i64(p, 1, prec)
    }

    pub fn from_i64(p: u64, x: i64, prec: i64) -> Self {
        Self::from_bigint(p, &BigInt::from(x), prec)
    }

    pub fn from_bigint(p: u64, x: &BigInt, prec: i64) -> Self {
        Self::normalize(p, x, 0, prec)
    }

    pub fn from_biguint(p: u64, x: &BigUint, prec: i64) -> Self {
        Self::normalize(p, &BigInt::from_biguint(Sign::Plus, x.clone()), 0, prec)
    }

    /// `p^val * unit`; `unit` need not be coprime to `p`.
    pub fn from_parts(p: u64, val: i64, unit: &BigInt, prec: i64) -> Self {
        Self::normalize(p, unit, val, prec)
    }

    pub fn from_rational(p: u64, x: &BigRational, prec: i64) -> Result<Self> {
        if x.is_zero() {
            return Ok(Self::zero(p, prec));
        }
        let nv = vp_bigint(p, x.numer());
        let dv = vp_bigint(p, x.denom());
        let rel = prec - (nv - dv);
        if rel <= 0 {
            return Ok(Self::zero(p, prec));
        }
        let n = Self::from_bigint(p, x.numer(), nv + rel);
        let d = Self::from_bigint(p, x.denom(), dv + rel);
        n.checked_div(&d)
    }

    /// `p^k` exactly, to absolute precision `prec`.
    pub fn p_power(p: u64, k: i64, prec: i64) -> Self {
        Self::from_parts(p, k, &BigInt::one(), prec)
    }

    /// Value `p^shift * r`, reduced to precision `prec`.
    fn normalize(p: u64, r: &BigInt, shift: i64, prec: i64) -> Self {
        let rel = prec - shift;
        if rel <= 0 || r.is_zero() {
            return Self::zero(p, prec);
        }
        let m = ppow(p, rel as u64);
        let mut u = mod_floor(r, &m);
        if u.is_zero() {
            return Self::zero(p, prec);
        }
        let t = strip_p(p, &mut u);
        PadicScalar { p, val: Some(shift + t), unit: u, prec }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Valuation, or `None` when zero to precision.
    pub fn valuation(&self) -> Option<i64> {
        self.val
    }

    pub fn valuation_q(&self) -> Option<Q> {
        self.val.map(qi)
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    /// Absolute precision: the value is exact modulo `p^precision`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn relative_precision(&self) -> i64 {
        match self.val {
            Some(v) => self.prec - v,
            None => 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }

    pub fn is_unit(&self) -> bool {
        self.val == Some(0)
    }

    /// Lowers the precision to `min(self.prec, prec)`.
    pub fn with_precision(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        match self.val {
            None => Self::zero(self.p, prec),
            Some(v) => {
                if prec <= v {
                    return Self::zero(self.p, prec);
                }
                let m = ppow(self.p, (prec - v) as u64);
                PadicScalar { p: self.p, val: Some(v), unit: &self.unit % m, prec }
            }
        }
    }

    /// Raises the stated precision, treating the representative as exact.
    /// Only for values known to be exact integers or rationals.
    pub fn lift_precision(&self, prec: i64) -> Self {
        if prec <= self.prec {
            return self.with_precision(prec);
        }
        PadicScalar { p: self.p, val: self.val, unit: self.unit.clone(), prec }
    }

    /// The representative as a rational number `p^val * unit`.
    pub fn to_rational(&self) -> BigRational {
        match self.val {
            None => BigRational::zero(),
            Some(v) => {
                let u = BigInt::from_biguint(Sign::Plus, self.unit.clone());
                let pk = BigInt::from_biguint(Sign::Plus, ppow(self.p, v.unsigned_abs()));
                if v >= 0 {
                    BigRational::from_integer(u * pk)
                } else {
                    BigRational::new(u, pk)
                }
            }
        }
    }

    /// Least nonnegative residue modulo `p^prec`; `None` for non-integral values.
    pub fn residue(&self) -> Option<BigUint> {
        match self.val {
            None => Some(BigUint::zero()),
            Some(v) if v < 0 => None,
            Some(v) => Some(&self.unit * ppow(self.p, v as u64)),
        }
    }

    /// Residue as a signed representative in `(-p^prec/2, p^prec/2]`.
    pub fn signed_residue(&self) -> Option<BigInt> {
        let r = self.residue()?;
        if self.prec <= 0 {
            return Some(BigInt::zero());
        }
        let m = ppow(self.p, self.prec as u64);
        let r = BigInt::from_biguint(Sign::Plus, r);
        let m = BigInt::from_biguint(Sign::Plus, m);
        if &r * 2 > m {
            Some(r - m)
        } else {
            Some(r)
        }
    }

    pub fn checked_div(&self, rhs: &PadicScalar) -> Result<PadicScalar> {
        assert_eq!(self.p, rhs.p, "prime mismatch");
        let vb = match rhs.val {
            None => return Err(Error::DivisionByZeroToPrecision(rhs.prec)),
            Some(v) => v,
        };
        let va = match self.val {
            None => return Ok(Self::zero(self.p, self.prec - vb)),
            Some(v) => v,
        };
        let rel = (self.prec - va).min(rhs.prec - vb);
        let m = ppow(self.p, rel as u64);
        let inv = rhs.unit.modinv(&m).expect("unit is invertible");
        Ok(PadicScalar { p: self.p, val: Some(va - vb), unit: (&self.unit * inv) % m, prec: va - vb + rel })
    }

    pub fn inverse(&self) -> Result<PadicScalar> {
        let one = PadicScalar::one(self.p, self.relative_precision() + 1);
        one.checked_div(self)
    }

    /// Multiplication by `p^k`, exact.
    pub fn shift(&self, k: i64) -> PadicScalar {
        PadicScalar { p: self.p, val: self.val.map(|v| v + k), unit: self.unit.clone(), prec: self.prec + k }
    }

    pub fn pow(&self, e: u64) -> PadicScalar {
        let mut acc = PadicScalar::exact_one(self.p);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `self^e` for a big exponent; units use modular exponentiation.
    pub fn pow_big(&self, e: &BigUint) -> PadicScalar {
        if self.val == Some(0) && self.prec < EXACT_PREC {
            let m = ppow(self.p, self.prec as u64);
            return PadicScalar { p: self.p, val: Some(0), unit: self.unit.modpow(e, &m), prec: self.prec };
        }
        let mut acc = PadicScalar::exact_one(self.p);
        for i in (0..e.bits()).rev() {
            acc = &acc * &acc;
            if e.bit(i) {
                acc = &acc * self;
            }
        }
        acc
    }

    pub fn mul_i64(&self, k: i64) -> PadicScalar {
        let hint = if self.prec >= EXACT_PREC / 2 { 64 } else { self.prec.max(0) + 64 };
        self * &PadicScalar::from_i64(self.p, k, hint)
    }

    /// Agreement to the smaller of the two precisions.
    pub fn eq_to_precision(&self, other: &PadicScalar) -> bool {
        (self - other).is_zero()
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.signed_residue().and_then(|r| r.to_i64())
    }
}

/// `v_p` of a nonzero big integer.
pub fn vp_bigint(p: u64, x: &BigInt) -> i64 {
    let mut m = x.magnitude().clone();
    if m.is_zero() {
        return 0;
    }
    strip_p(p, &mut m)
}

fn mod_floor(r: &BigInt, m: &BigUint) -> BigUint {
    let mm = BigInt::from_biguint(Sign::Plus, m.clone());
    let x = r % &mm;
    let x = if x.is_negative() { x + mm } else { x };
    x.to_biguint().expect("nonnegative")
}

impl<'a> Neg for &'a PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        match self.val {
            None => self.clone(),
            Some(v) => {
                let m = ppow(self.p, (self.prec - v) as u64);
                PadicScalar { p: self.p, val: Some(v), unit: m - &self.unit, prec: self.prec }
            }
        }
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        -&self
    }
}

impl<'a> Add<&'a PadicScalar> for &'a PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        assert_eq!(self.p, rhs.p, "prime mismatch");
        let prec = self.prec.min(rhs.prec);
        let (va, vb) = match (self.val, rhs.val) {
            (None, _) => return rhs.with_precision(prec),
            (_, None) => return self.with_precision(prec),
            (Some(a), Some(b)) => (a, b),
        };
        let v = va.min(vb);
        if prec <= v {
            return PadicScalar::zero(self.p, prec);
        }
        let rel = (prec - v) as u64;
        let m = ppow(self.p, rel);
        let term = |u: &BigUint, w: i64| -> BigUint {
            let d = (w - v) as u64;
            if d >= rel {
                BigUint::zero()
            } else if d == 0 {
                u.clone()
            } else {
                u * ppow(self.p, d)
            }
        };
        let mut s = (term(&self.unit, va) + term(&rhs.unit, vb)) % &m;
        if s.is_zero() {
            return PadicScalar::zero(self.p, prec);
        }
        let t = if va == vb { strip_p(self.p, &mut s) } else { 0 };
        PadicScalar { p: self.p, val: Some(v + t), unit: s, prec }
    }
}

impl<'a> Sub<&'a PadicScalar> for &'a PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        let prec = self.prec.min(rhs.prec);
        self + &(-&rhs.with_precision(prec))
    }
}

impl<'a> Mul<&'a PadicScalar> for &'a PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        assert_eq!(self.p, rhs.p, "prime mismatch");
        match (self.val, rhs.val) {
            (None, None) => PadicScalar::zero(self.p, self.prec.saturating_add(rhs.prec)),
            (None, Some(vb)) => PadicScalar::zero(self.p, self.prec + vb),
            (Some(va), None) => PadicScalar::zero(self.p, rhs.prec + va),
            (Some(va), Some(vb)) => {
                let v = va + vb;
                let prec = (self.prec + vb).min(rhs.prec + va);
                let m = ppow(self.p, (prec - v) as u64);
                PadicScalar { p: self.p, val: Some(v), unit: (&self.unit * &rhs.unit) % m, prec }
            }
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<PadicScalar> for PadicScalar {
            type Output = PadicScalar;
            fn $f(self, rhs: PadicScalar) -> PadicScalar {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a PadicScalar> for PadicScalar {
            type Output = PadicScalar;
            fn $f(self, rhs: &PadicScalar) -> PadicScalar {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None => write!(f, "O({}^{})", self.p, self.prec),
            Some(v) => write!(f, "{}^{}*{} + O({}^{})", self.p, v, self.unit, self.p, self.prec),
        }
    }
}

/// Wire form `{v, unit, prec}` with the unit as a decimal string; `v` is
/// `null` for zero to precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarRecord {
    pub v: Option<i64>,
    pub unit: String,
    pub prec: i64,
}

impl PadicScalar {
    pub fn to_record(&self) -> ScalarRecord {
        ScalarRecord { v: self.val, unit: self.unit.to_string(), prec: self.prec }
    }

    pub fn from_record(p: u64, r: &ScalarRecord) -> Result<Self> {
        let unit: BigInt = r
            .unit
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad unit {:?}", r.unit)))?;
        Ok(match r.v {
            None => PadicScalar::zero(p, r.prec),
            Some(v) => PadicScalar::from_parts(p, v, &unit, r.prec),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: u64, x: i64, n: i64) -> PadicScalar {
        PadicScalar::from_i64(p, x, n)
    }

    #[test]
    fn three_plus_six_is_nine() {
        let r = scalar_arith(&s(3, 3, 20), &s(3, 6, 20), ArithOp::Add).unwrap();
        assert_eq!(r.valuation(), Some(2));
        assert_eq!(r.unit(), &BigUint::from(1u32));
    }

    #[test]
    fn inverse_of_one_minus_three() {
        let x = scalar_arith(&s(3, 1, 20), &s(3, -2, 20), ArithOp::Div).unwrap();
        let back = &x * &s(3, -2, 20);
        assert!((&back - &s(3, 1, 20)).is_zero());
        assert_eq!(back.precision(), 20);
    }

    #[test]
    fn valuations_add_under_multiplication() {
        let a = PadicScalar::from_parts(5, 3, &BigInt::from(2), 10);
        let b = PadicScalar::from_parts(5, -1, &BigInt::from(3), 10);
        let r = scalar_arith(&a, &b, ArithOp::Mul).unwrap();
        assert_eq!(r.valuation(), Some(2));
        assert_eq!(r.unit(), &BigUint::from(6u32));
        // relative precisions 7 and 11 -> absolute 2 + 7
        assert_eq!(r.precision(), 9);
    }

    #[test]
    fn division_by_zero_to_precision() {
        let z = PadicScalar::from_i64(3, 81, 4);
        assert!(z.is_zero());
        assert_eq!(scalar_arith(&s(3, 1, 10), &z, ArithOp::Div), Err(Error::DivisionByZeroToPrecision(4)));
    }

    #[test]
    fn precision_exhausted() {
        let a = PadicScalar::from_parts(3, 1, &BigInt::from(1), 2);
        let b = PadicScalar::from_parts(3, 3, &BigInt::from(1), 10);
        assert_eq!(scalar_arith(&a, &b, ArithOp::Div), Err(Error::PrecisionExhausted(-1)));
    }

    #[test]
    fn precision_propagation() {
        let a = s(3, 3, 10);
        let b = s(3, 9, 5);
        assert_eq!((&a + &b).precision(), 5);
        assert_eq!((&a * &b).precision(), 6);
        assert_eq!(a.checked_div(&b).unwrap().precision(), 2);
    }

    #[test]
    fn negative_values_reduce_properly() {
        let x = s(5, -1, 4);
        assert_eq!(x.residue().unwrap(), BigUint::from(624u32));
        assert_eq!(x.signed_residue().unwrap(), BigInt::from(-1));
        assert_eq!((&x + &s(5, 1, 4)).valuation(), None);
    }

    #[test]
    fn rational_embedding() {
        let half = PadicScalar::from_rational(3, &BigRational::new(1.into(), 2.into()), 12).unwrap();
        assert!((&half.mul_i64(2) - &s(3, 1, 12)).is_zero());
        let third = PadicScalar::from_rational(3, &BigRational::new(1.into(), 3.into()), 12).unwrap();
        assert_eq!(third.valuation(), Some(-1));
        assert_eq!(third.to_rational(), BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn odd_primes_only() {
        assert!(check_prime(2).is_err());
        assert!(check_prime(9).is_err());
        assert!(check_prime(7).is_ok());
    }
}
