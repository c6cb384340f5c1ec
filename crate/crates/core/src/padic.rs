//! Truncated arithmetic in `Q_p`.
//!
//! A nonzero value is `p^v * (d_0 + d_1 p + ... + d_{N-1} p^{N-1})` with
//! `d_0 != 0`; it is known modulo `p^{v+N}`. Zero carries no valuation, only
//! the absolute precision to which it is known to vanish.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: usize = 32;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{p} is not prime")))
    }
}

fn pow_big(p: u32, e: usize) -> BigUint {
    num_traits::pow(BigUint::from(p), e)
}

/// `p`-adic valuation of a nonzero integer.
fn int_valuation(x: &BigInt, p: u32) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = x.clone();
    while (&m % &pb).is_zero() {
        m /= &pb;
        v += 1;
    }
    (v, m)
}

/// Inverse of `a` modulo `m` (both positive, coprime).
pub(crate) fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let x = e.x.mod_floor(&m);
    x.to_biguint()
}

#[derive(Clone, Debug)]
pub struct PAdic {
    prime: u32,
    valuation: Option<i64>,
    digits: Vec<u32>,
    abs_prec: i64,
}

impl PAdic {
    /// Zero known modulo `p^abs_prec`.
    pub fn zero(prime: u32, abs_prec: i64) -> PAdic {
        PAdic {
            prime,
            valuation: None,
            digits: Vec::new(),
            abs_prec,
        }
    }

    pub fn one(prime: u32, precision: usize) -> PAdic {
        PAdic::from_unit(prime, 0, BigUint::one(), precision)
    }

    /// `p^k` to the given relative precision.
    pub fn prime_power(prime: u32, k: i64, precision: usize) -> PAdic {
        PAdic::from_unit(prime, k, BigUint::one(), precision)
    }

    pub fn from_digits(prime: u32, valuation: i64, digits: Vec<u32>) -> Result<PAdic> {
        check_prime(prime)?;
        if digits.is_empty() {
            return Err(Error::Domain("empty digit vector".into()));
        }
        if let Some(d) = digits.iter().find(|&&d| d >= prime) {
            return Err(Error::Domain(format!("digit {d} out of range for p = {prime}")));
        }
        if digits[0] == 0 {
            return Err(Error::Domain("leading digit must be nonzero".into()));
        }
        Ok(PAdic {
            prime,
            valuation: Some(valuation),
            abs_prec: valuation + digits.len() as i64,
            digits,
        })
    }

    /// Builds `p^v * unit` where `unit` may still be divisible by `p`; reduced mod
    /// `p^precision` before normalizing.
    fn from_unit(prime: u32, v: i64, unit: BigUint, precision: usize) -> PAdic {
        let abs_prec = v + precision as i64;
        let modulus = pow_big(prime, precision);
        let mut u = unit % &modulus;
        if u.is_zero() {
            return PAdic::zero(prime, abs_prec);
        }
        let pb = BigUint::from(prime);
        let mut shift = 0i64;
        while (&u % &pb).is_zero() {
            u /= &pb;
            shift += 1;
        }
        let len = (precision as i64 - shift) as usize;
        let mut digits = Vec::with_capacity(len);
        for _ in 0..len {
            let d = (&u % &pb).to_u32().unwrap_or(0);
            digits.push(d);
            u /= &pb;
        }
        PAdic {
            prime,
            valuation: Some(v + shift),
            digits,
            abs_prec,
        }
    }

    /// `num/den` expanded to `precision` significant digits.
    pub fn from_rational(num: i64, den: i64, prime: u32, precision: usize) -> Result<PAdic> {
        PAdic::from_big_rational(
            &BigRational::new_raw(BigInt::from(num), BigInt::from(den)),
            prime,
            precision,
        )
    }

    pub fn from_big_rational(x: &BigRational, prime: u32, precision: usize) -> Result<PAdic> {
        check_prime(prime)?;
        if x.denom().is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        if precision == 0 {
            return Err(Error::Domain("precision must be positive".into()));
        }
        if x.numer().is_zero() {
            return Ok(PAdic::zero(prime, precision as i64));
        }
        let (vn, n) = int_valuation(x.numer(), prime);
        let (vd, d) = int_valuation(x.denom(), prime);
        let modulus = BigInt::from(pow_big(prime, precision));
        let n = n.mod_floor(&modulus).to_biguint().unwrap();
        let d = d.mod_floor(&modulus).to_biguint().unwrap();
        let modulus = modulus.to_biguint().unwrap();
        let dinv = mod_inverse(&d, &modulus)
            .ok_or_else(|| Error::Domain("denominator not invertible".into()))?;
        Ok(PAdic::from_unit(prime, vn - vd, (n * dinv) % &modulus, precision))
    }

    pub fn from_int(x: i64, prime: u32, precision: usize) -> Result<PAdic> {
        PAdic::from_rational(x, 1, prime, precision)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    /// `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Number of significant digits (0 for zero).
    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    /// The value is known modulo `p^abs_precision`.
    pub fn abs_precision(&self) -> i64 {
        self.abs_prec
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    /// `|x|_p` as a float; 0 for zero.
    pub fn abs(&self) -> f64 {
        match self.valuation {
            None => 0.0,
            Some(v) => (self.prime as f64).powi(-(v as i32)),
        }
    }

    /// Digit at absolute position `i` (coefficient of `p^i`), if known.
    pub fn digit_at(&self, i: i64) -> Option<u32> {
        if i >= self.abs_prec {
            return None;
        }
        match self.valuation {
            None => Some(0),
            Some(v) if i < v => Some(0),
            Some(v) => Some(self.digits[(i - v) as usize]),
        }
    }

    fn unit_big(&self) -> BigUint {
        let pb = BigUint::from(self.prime);
        self.digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &pb + BigUint::from(d))
    }

    fn check_same_prime(&self, other: &PAdic) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::Domain(format!(
                "mixed primes {} and {}",
                self.prime, other.prime
            )));
        }
        Ok(())
    }

    pub fn neg(&self) -> PAdic {
        match self.valuation {
            None => self.clone(),
            Some(v) => {
                let m = pow_big(self.prime, self.digits.len());
                let u = &m - self.unit_big();
                PAdic::from_unit(self.prime, v, u, self.digits.len())
            }
        }
    }

    pub fn add(&self, other: &PAdic) -> Result<PAdic> {
        self.check_same_prime(other)?;
        let abs = self.abs_prec.min(other.abs_prec);
        let vmin = match (self.valuation, other.valuation) {
            (None, None) => return Ok(PAdic::zero(self.prime, abs)),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        if abs <= vmin {
            return Ok(PAdic::zero(self.prime, abs));
        }
        let width = (abs - vmin) as usize;
        let modulus = pow_big(self.prime, width);
        let lift = |x: &PAdic| -> BigUint {
            match x.valuation {
                None => BigUint::zero(),
                Some(v) => x.unit_big() * pow_big(x.prime, (v - vmin) as usize),
            }
        };
        let sum = (lift(self) + lift(other)) % &modulus;
        Ok(PAdic::from_unit(self.prime, vmin, sum, width))
    }

    pub fn sub(&self, other: &PAdic) -> Result<PAdic> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PAdic) -> Result<PAdic> {
        self.check_same_prime(other)?;
        match (self.valuation, other.valuation) {
            (None, None) => Ok(PAdic::zero(self.prime, self.abs_prec + other.abs_prec)),
            (None, Some(v)) => Ok(PAdic::zero(self.prime, self.abs_prec + v)),
            (Some(v), None) => Ok(PAdic::zero(self.prime, other.abs_prec + v)),
            (Some(a), Some(b)) => {
                let prec = self.digits.len().min(other.digits.len());
                let u = self.unit_big() * other.unit_big();
                Ok(PAdic::from_unit(self.prime, a + b, u, prec))
            }
        }
    }

    pub fn invert(&self) -> Result<PAdic> {
        let v = self
            .valuation
            .ok_or_else(|| Error::DivisionByZero("inverse of p-adic zero".into()))?;
        let prec = self.digits.len();
        let m = pow_big(self.prime, prec);
        let inv = mod_inverse(&self.unit_big(), &m)
            .ok_or_else(|| Error::DivisionByZero("unit part not invertible".into()))?;
        Ok(PAdic::from_unit(self.prime, -v, inv, prec))
    }

    /// Multiplication by `p^k`.
    pub fn shift(&self, k: i64) -> PAdic {
        let mut out = self.clone();
        out.valuation = out.valuation.map(|v| v + k);
        out.abs_prec += k;
        out
    }

    /// Treats the stored digits as an exact finite expansion and pads with zeros
    /// (or truncates) to `precision` significant digits.
    pub fn with_precision(&self, precision: usize) -> PAdic {
        match self.valuation {
            None => PAdic::zero(self.prime, precision as i64),
            Some(v) => {
                let mut digits = self.digits.clone();
                digits.resize(precision.max(1), 0);
                PAdic {
                    prime: self.prime,
                    valuation: Some(v),
                    abs_prec: v + digits.len() as i64,
                    digits,
                }
            }
        }
    }

    /// Canonical representative of the coset `x + p^r Z_p`: digits at positions
    /// `>= r` dropped, value known exactly modulo `p^r`.
    pub fn reduce_mod(&self, r: i64) -> Result<PAdic> {
        if self.abs_prec < r {
            return Err(Error::Precision(format!(
                "value known mod p^{} cannot be reduced mod p^{}",
                self.abs_prec, r
            )));
        }
        match self.valuation {
            Some(v) if v < r => {
                let digits = self.digits[..(r - v) as usize].to_vec();
                Ok(PAdic {
                    prime: self.prime,
                    valuation: Some(v),
                    digits,
                    abs_prec: r,
                })
            }
            _ => Ok(PAdic::zero(self.prime, r)),
        }
    }

    /// The stored finite expansion as an exact rational.
    pub fn to_rational(&self) -> BigRational {
        match self.valuation {
            None => BigRational::zero(),
            Some(v) => {
                let u = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, self.unit_big()));
                let p = BigRational::from_integer(BigInt::from(self.prime));
                u * p.pow(v as i32)
            }
        }
    }

    /// `p`-adic fractional part `{x}_p` of the stored expansion, in `[0, 1)`.
    pub fn fractional_part(&self) -> BigRational {
        let r = self.to_rational();
        let den = r.denom().clone();
        let num = r.numer().mod_floor(&den);
        BigRational::new(num, den)
    }

    /// Structural identity (same valuation, digits and absolute precision).
    pub fn same_repr(&self, other: &PAdic) -> bool {
        self.prime == other.prime
            && self.valuation == other.valuation
            && self.digits == other.digits
            && self.abs_prec == other.abs_prec
    }

    pub(crate) fn repr_key(&self) -> (Option<i64>, Vec<u32>, i64) {
        (self.valuation, self.digits.clone(), self.abs_prec)
    }
}

/// Equal valuation and equal digits over the common precision window.
impl PartialEq for PAdic {
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime {
            return false;
        }
        match (self.valuation, other.valuation) {
            (None, None) => true,
            (Some(a), Some(b)) if a == b => {
                let w = self.digits.len().min(other.digits.len());
                self.digits[..w] == other.digits[..w]
            }
            _ => false,
        }
    }
}

/// `d_0 d_1 ... * p^v (mod p^{v+N})`; zero renders as `0 (mod p^k)`.
impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prime;
        match self.valuation {
            None => write!(f, "0 (mod {p}^{})", self.abs_prec),
            Some(v) => {
                let ds: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
                write!(f, "{} * {p}^{v} (mod {p}^{})", ds.join(" "), self.abs_prec)
            }
        }
    }
}

fn parse_power(s: &str) -> Result<(u32, i64)> {
    let (b, e) = s
        .trim()
        .split_once('^')
        .ok_or_else(|| Error::Parse(format!("expected p^k, got {s:?}")))?;
    let b = b.trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?;
    let e = e.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string()))?;
    Ok((b, e))
}

impl FromStr for PAdic {
    type Err = Error;

    fn from_str(s: &str) -> Result<PAdic> {
        let (head, modpart) = s
            .split_once("(mod")
            .ok_or_else(|| Error::Parse(format!("missing modulus in {s:?}")))?;
        let modpart = modpart
            .trim()
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse("unclosed modulus".into()))?;
        let (p, abs) = parse_power(modpart)?;
        check_prime(p)?;
        let head = head.trim();
        if head == "0" {
            return Ok(PAdic::zero(p, abs));
        }
        let (ds, pw) = head
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("missing '*' in {s:?}")))?;
        let (p2, v) = parse_power(pw)?;
        if p2 != p {
            return Err(Error::Parse("prime mismatch".into()));
        }
        let digits = ds
            .split_whitespace()
            .map(|d| d.parse::<u32>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let x = PAdic::from_digits(p, v, digits)?;
        if x.abs_prec != abs {
            return Err(Error::Parse(format!(
                "modulus p^{abs} inconsistent with {} digits at valuation {v}",
                x.digits.len()
            )));
        }
        Ok(x)
    }
}

/// Exponent `e` with `max_j |x_j| = p^e`, or `None` when every coordinate is
/// zero at its precision.
pub fn max_norm_exp(v: &[PAdic]) -> Option<i64> {
    v.iter().filter_map(|x| x.valuation().map(|a| -a)).max()
}

/// Result of comparing `‖x − a‖` against a threshold radius `p^floor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    /// `‖x − a‖ ≤ p^floor`.
    Within,
    /// `‖x − a‖ = p^e` with `e > floor`.
    Exactly(i64),
}

/// Classifies `‖x − a‖` relative to `p^floor`, failing only when the known
/// digits cannot decide.
pub fn distance_exp(x: &[PAdic], a: &[PAdic], floor: i64) -> Result<Distance> {
    if x.len() != a.len() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let mut worst: Option<i64> = None;
    for (xi, ai) in x.iter().zip(a) {
        let d = xi.sub(ai)?;
        match d.valuation() {
            Some(v) => {
                let e = -v;
                if e > floor {
                    worst = Some(worst.map_or(e, |w: i64| w.max(e)));
                }
            }
            None => {
                if -d.abs_precision() > floor {
                    return Err(Error::Precision(format!(
                        "difference known only mod p^{}, need p^{}",
                        d.abs_precision(),
                        -floor
                    )));
                }
            }
        }
    }
    Ok(match worst {
        Some(e) => Distance::Exactly(e),
        None => Distance::Within,
    })
}

/// Sum of `|x|` signed rational digits helper used by tests and the oracle.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().abs().bits() as i64;
        let d = x.denom().bits() as i64;
        if n - d > 1000 {
            f64::INFINITY
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(num: i64, den: i64, p: u32, n: usize) -> PAdic {
        PAdic::from_rational(num, den, p, n).unwrap()
    }

    #[test]
    fn from_rational_examples() {
        let one = pa(1, 1, 3, 4);
        assert_eq!(one.valuation(), Some(0));
        assert_eq!(one.digits(), &[1, 0, 0, 0]);
        let nine = pa(9, 1, 3, 4);
        assert_eq!(nine.valuation(), Some(2));
        assert_eq!(nine.digits(), &[1, 0, 0, 0]);
        let m1 = pa(-1, 1, 2, 5);
        assert_eq!(m1.valuation(), Some(0));
        assert_eq!(m1.digits(), &[1, 1, 1, 1, 1]);
        // adding 1 carries through every digit
        let z = m1.add(&pa(1, 1, 2, 5)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.abs_precision(), 5);
    }

    #[test]
    fn from_rational_errors() {
        assert!(matches!(PAdic::from_rational(1, 0, 3, 4), Err(Error::Domain(_))));
        assert!(matches!(PAdic::from_rational(1, 1, 4, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn periodic_expansion_of_one_third_in_q2() {
        // 1/3 = 1 + 2^2 + 2^4 + ... in Z_2 (since -1/3 * ... ) ; check by multiplying back
        let x = pa(1, 3, 2, 10);
        let three = pa(3, 1, 2, 10);
        let prod = x.mul(&three).unwrap();
        assert_eq!(prod, pa(1, 1, 2, 10));
        assert_eq!(x.digits(), &[1, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn add_examples() {
        let s = pa(1, 1, 2, 8).add(&pa(1, 1, 2, 8)).unwrap();
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.digits()[0], 1);
        let a = pa(3, 1, 3, 8);
        let b = pa(9 * 2, 1, 3, 8);
        assert_eq!(a.add(&b).unwrap().valuation(), Some(1));
        let mixed = pa(1, 1, 2, 4).add(&pa(1, 1, 3, 4));
        assert!(matches!(mixed, Err(Error::Domain(_))));
    }

    #[test]
    fn mul_examples() {
        let x = pa(3, 1, 3, 8).mul(&pa(9, 1, 3, 8)).unwrap();
        assert_eq!(x, pa(27, 1, 3, 8));
        assert_eq!(x.valuation(), Some(3));
        let y = pa(3, 1, 3, 8).mul(&pa(1, 9, 3, 8)).unwrap();
        assert_eq!(y.valuation(), Some(-1));
        let m = pa(-1, 1, 2, 5).mul(&pa(-1, 1, 2, 5)).unwrap();
        assert_eq!(m, pa(1, 1, 2, 5));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(pa(1, 1, 5, 6).invert().unwrap(), pa(1, 1, 5, 6));
        let i3 = pa(3, 1, 3, 6).invert().unwrap();
        assert_eq!(i3.valuation(), Some(-1));
        assert_eq!(i3.digits(), &[1, 0, 0, 0, 0, 0]);
        let im1 = pa(-1, 1, 2, 5).invert().unwrap();
        assert_eq!(im1.digits(), &[1, 1, 1, 1, 1]);
        assert_eq!(im1.mul(&pa(-1, 1, 2, 5)).unwrap(), pa(1, 1, 2, 5));
        assert!(matches!(
            PAdic::zero(3, 5).invert(),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let x = pa(-7, 9, 3, 6);
        let s = x.to_string();
        assert_eq!(s, "2 0 2 2 2 2 * 3^-2 (mod 3^4)");
        let y: PAdic = s.parse().unwrap();
        assert!(x.same_repr(&y));
        let z: PAdic = "0 (mod 2^7)".parse().unwrap();
        assert!(z.is_zero());
        assert_eq!(z.abs_precision(), 7);
        assert!("1 2 * 2^0 (mod 2^2)".parse::<PAdic>().is_err());
    }

    #[test]
    fn reduce_and_rational() {
        let x = pa(-1, 1, 3, 6).shift(-1); // -1/3
        let r = x.reduce_mod(2).unwrap();
        // -1/3 = 2/3 + 2 + 2*3 + ... ; mod 9 keeps 2/3 + 2 + 6
        assert_eq!(r.to_rational(), BigRational::new(26.into(), 3.into()));
        assert_eq!(r.fractional_part(), BigRational::new(2.into(), 3.into()));
        assert!(pa(9, 1, 3, 4).reduce_mod(2).unwrap().is_zero());
    }

    #[test]
    fn distance_classification() {
        let p = 3;
        let x = vec![pa(1, 1, p, 8), pa(9, 1, p, 8)];
        let a = vec![pa(1, 1, p, 8), PAdic::zero(p, 8)];
        assert_eq!(distance_exp(&x, &a, -2).unwrap(), Distance::Within);
        assert_eq!(distance_exp(&x, &a, -3).unwrap(), Distance::Exactly(-2));
        let coarse = vec![PAdic::zero(p, 2), PAdic::zero(p, 2)];
        assert!(matches!(
            distance_exp(&coarse, &a, -5),
            Err(Error::Precision(_))
        ));
    }
}
