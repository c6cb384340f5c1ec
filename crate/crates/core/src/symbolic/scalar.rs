use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::Poly;
use crate::error::{Error, Result};

/// Element of `Q(s)` with `s = p^{−α}`: `num/den`, `den` monic, `gcd(num, den) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolicScalar {
    num: Poly,
    den: Poly,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `p^k` as an exact rational.
pub fn rat_pow(p: u32, k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p)).pow(k as i32)
}

impl SymbolicScalar {
    pub fn zero() -> SymbolicScalar {
        SymbolicScalar { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> SymbolicScalar {
        SymbolicScalar::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> SymbolicScalar {
        SymbolicScalar { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn int(c: i64) -> SymbolicScalar {
        SymbolicScalar::constant(BigRational::from_integer(c.into()))
    }

    /// The indeterminate `s`.
    pub fn s() -> SymbolicScalar {
        SymbolicScalar::monomial(BigRational::one(), 1)
    }

    /// `c * s^k` for any integer `k`.
    pub fn monomial(c: BigRational, k: i64) -> SymbolicScalar {
        if c.is_zero() {
            return SymbolicScalar::zero();
        }
        if k >= 0 {
            SymbolicScalar { num: Poly::monomial(c, k as usize), den: Poly::one() }
        } else {
            SymbolicScalar { num: Poly::constant(c), den: Poly::monomial(BigRational::one(), (-k) as usize) }
        }
    }

    /// `p^{e} s^{k}`, the usual shape of norms raised to `α`-dependent powers.
    pub fn p_power_monomial(p: u32, e: i64, k: i64) -> SymbolicScalar {
        SymbolicScalar::monomial(rat_pow(p, e), k)
    }

    pub fn from_parts(num: Poly, den: Poly) -> Result<SymbolicScalar> {
        if den.is_zero() {
            return Err(Error::DivisionByZero("rational function with zero denominator".into()));
        }
        Ok(SymbolicScalar::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> SymbolicScalar {
        if num.is_zero() {
            return SymbolicScalar::zero();
        }
        let g = num.gcd(&den);
        let (mut n, rn) = num.divrem(&g);
        let (mut d, rd) = den.divrem(&g);
        debug_assert!(rn.is_zero() && rd.is_zero());
        let lead = d.lead();
        if !lead.is_one() {
            let inv = lead.recip();
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        SymbolicScalar { num: n, den: d }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &SymbolicScalar) -> SymbolicScalar {
        if self.den == o.den {
            return SymbolicScalar::normalize(self.num.add(&o.num), self.den.clone());
        }
        SymbolicScalar::normalize(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> SymbolicScalar {
        SymbolicScalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &SymbolicScalar) -> SymbolicScalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &SymbolicScalar) -> SymbolicScalar {
        if self.is_zero() || o.is_zero() {
            return SymbolicScalar::zero();
        }
        SymbolicScalar::normalize(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, c: &BigRational) -> SymbolicScalar {
        if c.is_zero() {
            return SymbolicScalar::zero();
        }
        SymbolicScalar { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<SymbolicScalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("inverse of the zero rational function".into()));
        }
        Ok(SymbolicScalar::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &SymbolicScalar) -> Result<SymbolicScalar> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<SymbolicScalar> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = SymbolicScalar::one();
        let mut b = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = SymbolicScalar::mul(&acc, &b);
            }
            b = SymbolicScalar::mul(&b, &b);
            e >>= 1;
        }
        Ok(acc)
    }

    /// `(κ, e)` when the value is `κ s^e`.
    pub fn as_monomial(&self) -> Option<(BigRational, i64)> {
        if self.is_zero() {
            return Some((BigRational::zero(), 0));
        }
        let nz: Vec<_> = self.num.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        let dz: Vec<_> = self.den.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        if nz.len() != 1 || dz.len() != 1 {
            return None;
        }
        let (i, a) = nz[0];
        let (j, b) = dz[0];
        Some((a / b, i as i64 - j as i64))
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.as_monomial() {
            Some((c, 0)) => Some(c),
            _ => None,
        }
    }

    /// Value at a numeric `s`; fails at a pole.
    pub fn eval_s(&self, s: f64) -> Result<f64> {
        let d = self.den.eval_f64(s);
        let scale = self.den.abs_eval_f64(s);
        if d == 0.0 || d.abs() <= 1e-13 * scale {
            return Err(Error::Pole(format!("denominator {} vanishes at s = {s}", self.den)));
        }
        Ok(self.num.eval_f64(s) / d)
    }

    /// Value at `s = p^{−α}`.
    pub fn eval_at(&self, alpha: f64, p: u32) -> Result<f64> {
        self.eval_s((p as f64).powf(-alpha))
    }

    pub fn eval_rational(&self, s: &BigRational) -> Result<BigRational> {
        let d = self.den.eval_rational(s);
        if d.is_zero() {
            return Err(Error::Pole(format!("denominator {} vanishes at s = {s}", self.den)));
        }
        Ok(self.num.eval_rational(s) / d)
    }
}

impl Default for SymbolicScalar {
    fn default() -> Self {
        SymbolicScalar::zero()
    }
}

/// Canonical text: `0`, a bare polynomial when the denominator is 1, or
/// `(num)/(den)` with both expanded in descending powers of `s`.
impl fmt::Display for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl std::iter::Sum for SymbolicScalar {
    fn sum<I: Iterator<Item = SymbolicScalar>>(iter: I) -> Self {
        iter.fold(SymbolicScalar::zero(), |a, b| SymbolicScalar::add(&a, &b))
    }
}
