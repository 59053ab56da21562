//! Dyadic arbitrary-precision floating point: `mantissa * 2^exponent` with an
//! explicit working precision per operation.
//!
//! Every value is an exact dyadic rational. Arithmetic truncates the result
//! mantissa toward zero at the requested precision, so each operation has
//! relative error below `2^(1-prec)`. Callers that need a guaranteed final
//! accuracy work at `prec + guard` bits. The exponent is unbounded (i64), so
//! quantities like `2^(-5000)` survive even at modest mantissa precision.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({} * 2^{} ~ {:e})", self.mant, self.exp, self.to_f64())
    }
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        BigFloat { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        BigFloat { mant: v, exp: 0 }.canonical()
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_bigint(BigInt::from(v))
    }

    /// Exact dyadic value `mant * 2^exp`.
    pub fn from_parts(mant: BigInt, exp: i64) -> Self {
        BigFloat { mant, exp }.canonical()
    }

    /// `num / den` truncated toward zero at `prec` bits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "division by zero");
        if num.is_zero() {
            return Self::zero();
        }
        let nb = num.magnitude().bits() as i64;
        let db = den.magnitude().bits() as i64;
        // Shift the numerator so the quotient carries prec+2 significant bits.
        let shift = (prec as i64 + 2) - (nb - db);
        let (q, e) = if shift >= 0 {
            ((num << shift as u64) / den, -shift)
        } else {
            (num / (den << (-shift) as u64), 0)
        };
        BigFloat { mant: q, exp: e }.truncated(prec)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        Self::from_ratio(r.numer(), r.denom(), prec)
    }

    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "cannot represent {v}");
        if v == 0.0 {
            return Self::zero();
        }
        let bits = v.to_bits();
        let sign = if v < 0.0 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        BigFloat { mant: BigInt::from(sign * m as i64), exp: e }.canonical()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Exact value as a rational number.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    fn canonical(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
        }
        self
    }

    /// Drop trailing zero bits of the mantissa (value unchanged).
    pub fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            return Self::zero();
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant = shr_to_zero(&self.mant, tz);
            self.exp += tz as i64;
        }
        self
    }

    /// Truncate the mantissa toward zero to at most `prec` bits.
    pub fn truncated(mut self, prec: u32) -> Self {
        let bits = self.mant.magnitude().bits();
        if bits > prec as u64 {
            let drop = bits - prec as u64;
            self.mant = shr_to_zero(&self.mant, drop);
            self.exp += drop as i64;
        }
        self.canonical()
    }

    /// floor(log2 |x|); panics on zero.
    pub fn log2_floor(&self) -> i64 {
        assert!(!self.is_zero(), "log2 of zero");
        self.mant.magnitude().bits() as i64 - 1 + self.exp
    }

    /// log2 |x| as f64, accurate to double precision; panics on zero.
    pub fn log2_f64(&self) -> f64 {
        assert!(!self.is_zero());
        let bits = self.mant.magnitude().bits();
        let top = if bits > 64 {
            shr_to_zero(&self.mant, bits - 64).magnitude().to_f64().unwrap()
        } else {
            self.mant.magnitude().to_f64().unwrap()
        };
        let top_bits = bits.min(64);
        top.log2() + (bits - top_bits) as f64 + self.exp as f64
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.magnitude().bits();
        let (m, e) = if bits > 64 {
            (shr_to_zero(&self.mant, bits - 64), self.exp + (bits - 64) as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        m.to_f64().unwrap() * (e as f64).exp2()
    }

    pub fn neg(&self) -> Self {
        BigFloat { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        BigFloat { mant: self.mant.abs(), exp: self.exp }
    }

    /// Multiply by `2^k` (exact).
    pub fn scale2(&self, k: i64) -> Self {
        if self.is_zero() {
            Self::zero()
        } else {
            BigFloat { mant: self.mant.clone(), exp: self.exp + k }
        }
    }

    pub fn add(&self, rhs: &Self, prec: u32) -> Self {
        self.add_exact(rhs).truncated(prec)
    }

    pub fn sub(&self, rhs: &Self, prec: u32) -> Self {
        self.add_exact(&rhs.neg()).truncated(prec)
    }

    /// Exact sum; mantissa may grow with the exponent gap.
    pub fn add_exact(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.exp <= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = (hi.exp - lo.exp) as u64;
        BigFloat { mant: (&hi.mant << shift) + &lo.mant, exp: lo.exp }.canonical()
    }

    pub fn mul(&self, rhs: &Self, prec: u32) -> Self {
        BigFloat { mant: &self.mant * &rhs.mant, exp: self.exp + rhs.exp }.truncated(prec)
    }

    pub fn div(&self, rhs: &Self, prec: u32) -> Self {
        assert!(!rhs.is_zero(), "division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        let nb = self.mant.magnitude().bits() as i64;
        let db = rhs.mant.magnitude().bits() as i64;
        let shift = (prec as i64 + 2) - (nb - db);
        let (q, e) = if shift >= 0 {
            ((&self.mant << shift as u64) / &rhs.mant, self.exp - rhs.exp - shift)
        } else {
            (&self.mant / (&rhs.mant << (-shift) as u64), self.exp - rhs.exp)
        };
        BigFloat { mant: q, exp: e }.truncated(prec)
    }

    /// Square root, truncated at `prec` bits; panics on negative input.
    pub fn sqrt(&self, prec: u32) -> Self {
        assert!(!self.is_negative(), "sqrt of negative value");
        if self.is_zero() {
            return Self::zero();
        }
        let bits = self.mant.magnitude().bits();
        let want = 2 * (prec as u64 + 2);
        let mut shift = want.saturating_sub(bits);
        // keep exponent parity so exp/2 stays integral
        if (self.exp - shift as i64) % 2 != 0 {
            shift += 1;
        }
        let m = self.mant.magnitude() << shift;
        let root = m.sqrt();
        BigFloat {
            mant: BigInt::from_biguint(Sign::Plus, root),
            exp: (self.exp - shift as i64) / 2,
        }
        .truncated(prec)
    }

    /// Integer part, rounded toward negative infinity.
    pub fn floor_bigint(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            &self.mant >> (-self.exp) as u64 // BigInt shr is floor division
        }
    }

    pub fn cmp_value(&self, rhs: &Self) -> Ordering {
        let ls = self.signum();
        let rs = rhs.signum();
        if ls != rs {
            return ls.cmp(&rs);
        }
        if ls == 0 {
            return Ordering::Equal;
        }
        let la = self.log2_floor();
        let lb = rhs.log2_floor();
        if la != lb {
            let mag = la.cmp(&lb);
            return if ls > 0 { mag } else { mag.reverse() };
        }
        // Same leading bit position: aligning shifts by at most the bit-length
        // difference plus one, so this stays cheap.
        let d = self.exp - rhs.exp;
        if d >= 0 {
            (&self.mant << d as u64).cmp(&rhs.mant)
        } else {
            self.mant.cmp(&(&rhs.mant << (-d) as u64))
        }
    }

    /// Bit-exact textual form: `[-]0x<hex mantissa>p<exponent>` with an odd
    /// (trailing-zero-free) mantissa, so equal values serialize identically.
    pub fn to_hex_string(&self) -> String {
        if self.is_zero() {
            return "0x0p0".to_string();
        }
        let n = self.clone().normalized();
        let sign = if n.mant.is_negative() { "-" } else { "" };
        format!("{}0x{}p{}", sign, n.mant.magnitude().to_str_radix(16), n.exp)
    }

    pub fn from_hex_string(s: &str) -> Option<Self> {
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (Sign::Minus, r),
            None => (Sign::Plus, s),
        };
        let rest = rest.strip_prefix("0x")?;
        let (mant_s, exp_s) = rest.split_once('p')?;
        let mag = BigUint::parse_bytes(mant_s.as_bytes(), 16)?;
        let exp: i64 = exp_s.parse().ok()?;
        if mag.is_zero() {
            return Some(Self::zero());
        }
        Some(BigFloat { mant: BigInt::from_biguint(sign, mag), exp })
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

/// Shift right truncating toward zero (shifts the magnitude).
fn shr_to_zero(v: &BigInt, k: u64) -> BigInt {
    let (sign, mag) = (v.sign(), v.magnitude());
    BigInt::from_biguint(sign, mag >> k)
}

/// Parse a real parameter: `a/b`, a decimal like `1.25`, or `sqrt(r)` where
/// `r` is itself rational/decimal. Returns the value at `prec` bits.
pub fn parse_real(s: &str, prec: u32) -> Option<BigFloat> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
        let r = parse_rational(inner)?;
        if r.is_negative() {
            return None;
        }
        return Some(BigFloat::from_rational(&r, prec + 8).sqrt(prec));
    }
    Some(BigFloat::from_rational(&parse_rational(s)?, prec))
}

/// Parse `a/b`, an integer, or a decimal string into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().ok()?;
        let den: BigInt = d.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().ok()? };
        let digits = frac.len() as u32;
        let frac_mag: BigInt = if frac.is_empty() { BigInt::zero() } else { frac.parse().ok()? };
        if frac_mag.is_negative() {
            return None;
        }
        let den = BigInt::from(10u32).pow(digits);
        let mag = int_part.abs() * &den + frac_mag;
        let signed = if neg { -mag } else { mag };
        return Some(BigRational::new(signed, den));
    }
    let v: BigInt = s.parse().ok()?;
    Some(BigRational::from(v))
}
