//! Exact scalars in `Q(s)`, `s = q^{−α}` with `q = p`.
//!
//! Every operator value, normalizing constant and Kelvin weight is a rational
//! function of `s`, so identities between them are decided exactly. Numeric
//! meaning only enters through [`SymbolicScalar::eval_at`], guarded by the
//! `α`-region in which the underlying shell sums converge.

mod parse;
mod poly;
mod scalar;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub use poly::Poly;
pub use scalar::{rat, rat_pow, SymbolicScalar};

use crate::error::{Error, Result};
use crate::padic::rational_to_f64;

/// Open interval of admissible `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaRegion {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaRegion {
    pub const POSITIVE: AlphaRegion = AlphaRegion { lo: 0.0, hi: f64::INFINITY };
    pub const EMPTY: AlphaRegion = AlphaRegion { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> AlphaRegion {
        AlphaRegion { lo, hi }
    }

    pub fn intersect(&self, o: &AlphaRegion) -> AlphaRegion {
        AlphaRegion { lo: self.lo.max(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn contains(&self, alpha: f64) -> bool {
        alpha > self.lo && alpha < self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }
}

/// A closed form together with the `α`-region where the sum it replaces converges.
#[derive(Clone, Debug, PartialEq)]
pub struct Convergent {
    pub value: SymbolicScalar,
    pub region: AlphaRegion,
}

impl Convergent {
    pub fn exact(value: SymbolicScalar) -> Convergent {
        Convergent { value, region: AlphaRegion::POSITIVE }
    }

    pub fn zero() -> Convergent {
        Convergent::exact(SymbolicScalar::zero())
    }

    pub fn add(&self, o: &Convergent) -> Convergent {
        Convergent { value: self.value.add(&o.value), region: self.region.intersect(&o.region) }
    }

    pub fn sub(&self, o: &Convergent) -> Convergent {
        Convergent { value: self.value.sub(&o.value), region: self.region.intersect(&o.region) }
    }

    pub fn mul(&self, o: &Convergent) -> Convergent {
        Convergent { value: self.value.mul(&o.value), region: self.region.intersect(&o.region) }
    }

    pub fn scale(&self, c: &SymbolicScalar) -> Convergent {
        Convergent { value: self.value.mul(c), region: self.region }
    }

    pub fn restrict(&self, r: &AlphaRegion) -> Convergent {
        Convergent { value: self.value.clone(), region: self.region.intersect(r) }
    }

    /// Numeric value, refusing `α` outside the convergence region.
    pub fn eval_at(&self, alpha: f64, p: u32) -> Result<f64> {
        if !self.region.contains(alpha) {
            return Err(Error::Convergence(format!(
                "alpha = {alpha} outside ({}, {})",
                self.region.lo, self.region.hi
            )));
        }
        self.value.eval_at(alpha, p)
    }
}

/// `α`-region on which `|κ s^e| < 1` for `s = p^{−α}`.
pub fn monomial_region(kappa: &BigRational, e: i64, p: u32) -> AlphaRegion {
    let k = rational_to_f64(&kappa.abs());
    if k == 0.0 {
        return AlphaRegion::POSITIVE;
    }
    let l = k.ln() / (p as f64).ln();
    // κ p^{−eα} < 1  ⇔  e α > log_p κ
    match e.signum() {
        0 => {
            if k < 1.0 {
                AlphaRegion::POSITIVE
            } else {
                AlphaRegion::EMPTY
            }
        }
        1 => AlphaRegion::new((l / e as f64).max(0.0), f64::INFINITY),
        _ => AlphaRegion::new(0.0, l / e as f64),
    }
}

/// `Σ_{k ≥ k0} r^k = r^{k0}/(1 − r)` for a monomial ratio `r = κ s^e`.
pub fn geometric_tail(first_exponent: i64, ratio: &SymbolicScalar, p: u32) -> Result<Convergent> {
    let (kappa, e) = ratio
        .as_monomial()
        .ok_or_else(|| Error::Domain(format!("ratio {ratio} is not a monomial")))?;
    if kappa.is_zero() {
        return match first_exponent.cmp(&0) {
            std::cmp::Ordering::Less => Err(Error::DivisionByZero("0^k with k < 0".into())),
            std::cmp::Ordering::Equal => Ok(Convergent::exact(SymbolicScalar::one())),
            std::cmp::Ordering::Greater => Ok(Convergent::zero()),
        };
    }
    if e == 0 && kappa.is_one() {
        return Err(Error::Divergence("geometric series with ratio 1".into()));
    }
    let region = monomial_region(&kappa, e, p);
    let value = ratio.pow(first_exponent)?.div(&SymbolicScalar::one().sub(ratio))?;
    Ok(Convergent { value, region })
}

/// `Σ_{k ≤ k1} r^k = Σ_{m ≥ −k1} (1/r)^m`.
pub fn geometric_head(last_exponent: i64, ratio: &SymbolicScalar, p: u32) -> Result<Convergent> {
    geometric_tail(-last_exponent, &ratio.inv()?, p)
}

/// `c_{n,α} = (q^α − 1)/(1 − q^{−α−n})`, written in `s` as `(1 − s)/(s (1 − p^{−n} s))`.
///
/// This is the constant for which the integral form of the operator equals
/// the Fourier multiplier `‖ξ‖^α`; it coincides with the constant of the
/// one-dimensional operator over the degree-`n` unramified extension.
pub fn scalar_c(n: usize, p: u32) -> SymbolicScalar {
    let s = SymbolicScalar::s();
    let one = SymbolicScalar::one();
    let denom = s.mul(&one.sub(&s.scale(&rat_pow(p, -(n as i64)))));
    (one.sub(&s)).div(&denom).expect("nonzero denominator")
}

/// `(q − 1)/(1 − q^{−α−n})` read literally. It agrees with [`scalar_c`] only at
/// `q^α = q`, i.e. `α = 1`; kept for the normalization report.
pub fn scalar_c_as_printed(n: usize, p: u32) -> SymbolicScalar {
    let s = SymbolicScalar::s();
    let one = SymbolicScalar::one();
    SymbolicScalar::int(p as i64 - 1)
        .div(&one.sub(&s.scale(&rat_pow(p, -(n as i64)))))
        .expect("nonzero denominator")
}

/// `d_{n,γ} = (1 − q^{−nγ})/(1 − q^{n(γ−1)})` with `q^{−nγ} = s`:
/// `(1 − s)/(1 − p^{−n} s^{−1})`. Pole at `s = p^{−n}` (`γ = 1`).
pub fn scalar_d(n: usize, p: u32) -> SymbolicScalar {
    let s = SymbolicScalar::s();
    let one = SymbolicScalar::one();
    let sinv = SymbolicScalar::monomial(rat_pow(p, -(n as i64)), -1);
    (one.sub(&s)).div(&one.sub(&sinv)).expect("nonzero denominator")
}

/// `‖x‖^α` for `‖x‖ = p^m`: `s^{−m}`.
pub fn norm_pow_alpha(m: i64) -> SymbolicScalar {
    SymbolicScalar::monomial(BigRational::one(), -m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> SymbolicScalar {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_text_round_trip() {
        let x = parse("(3*s)/((1-s)*(4-s))");
        assert_eq!(x.to_string(), "(3*s)/(s^2-5*s+4)");
        assert_eq!(parse(&x.to_string()), x);
        assert_eq!(parse("s/4 - 1/2").to_string(), "1/4*s-1/2");
        assert_eq!(parse("s^-2*s^2").to_string(), "1");
        assert_eq!(SymbolicScalar::zero().to_string(), "0");
        assert!("3*".parse::<SymbolicScalar>().is_err());
        assert!("1/(s-s)".parse::<SymbolicScalar>().is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(scalar_c_as_printed(2, 2), parse("1/(1-s/4)"));
        assert_eq!(scalar_c_as_printed(2, 3), parse("2/(1-s/9)"));
        assert_eq!(scalar_c_as_printed(2, 5).eval_s(0.0).unwrap(), 4.0);
        assert_eq!(scalar_c(2, 2), parse("(1-s)/(s*(1-s/4))"));
        // the two readings agree at alpha = 1 only
        let a = scalar_c(2, 2).eval_at(1.0, 2).unwrap();
        let b = scalar_c_as_printed(2, 2).eval_at(1.0, 2).unwrap();
        assert!((a - b).abs() < 1e-14);
        let a = scalar_c(2, 2).eval_at(0.5, 2).unwrap();
        let b = scalar_c_as_printed(2, 2).eval_at(0.5, 2).unwrap();
        assert!((a - b).abs() > 0.1);
    }

    #[test]
    fn scalar_d_pole_at_alpha_equal_n() {
        let d = scalar_d(2, 2);
        assert!(matches!(d.eval_at(2.0, 2), Err(Error::Pole(_))));
        assert!(d.eval_at(1.0, 2).unwrap().is_finite());
        // denominator of d vanishes at s = 1/4
        assert!(d.eval_rational(&rat(1, 4)).is_err());
    }

    #[test]
    fn geometric_tail_examples() {
        let s = SymbolicScalar::s();
        let g = geometric_tail(1, &s, 2).unwrap();
        assert_eq!(g.value, parse("s/(1-s)"));
        assert_eq!(g.region, AlphaRegion::POSITIVE);
        let r = SymbolicScalar::monomial(rat(1, 4), -1);
        let g = geometric_tail(0, &r, 2).unwrap();
        assert_eq!(g.value, parse("1/(1-1/(4*s))"));
        assert!((g.region.hi - 2.0).abs() < 1e-12);
        let partial: f64 = (0..400).map(|k| 0.25f64.powi(k) * 2f64.powi(k)).sum();
        assert!((g.eval_at(1.0, 2).unwrap() - partial).abs() < 1e-12);
        assert!(matches!(g.eval_at(2.5, 2), Err(Error::Convergence(_))));
        let z = geometric_tail(0, &SymbolicScalar::zero(), 2).unwrap();
        assert_eq!(z.value, SymbolicScalar::one());
        assert!(matches!(geometric_tail(0, &SymbolicScalar::one(), 2), Err(Error::Divergence(_))));
    }

    #[test]
    fn closed_forms_match_partial_sums() {
        // Σ_{k≥1} s^k and Σ_{k≤0} (p^{-n} s^{-1})^{-k}... checked numerically
        for &alpha in &[0.5, 1.0, 1.5] {
            let p = 3u32;
            let s = (p as f64).powf(-alpha);
            let closed = geometric_tail(1, &SymbolicScalar::s(), p).unwrap().eval_at(alpha, p).unwrap();
            let mut sum = 0.0;
            let mut term = s;
            while term > 1e-18 {
                sum += term;
                term *= s;
            }
            assert!((closed - sum).abs() < 1e-12);
            let r = SymbolicScalar::monomial(rat(1, 9), -1);
            let head = geometric_head(0, &r.inv().unwrap(), p).unwrap();
            let mut sum = 0.0;
            let ratio = 1.0 / (9.0 * s);
            let mut term = 1.0;
            while term > 1e-18 {
                sum += term;
                term *= ratio;
            }
            assert!((head.eval_at(alpha, p).unwrap() - sum).abs() < 1e-12);
        }
    }

    fn small_poly() -> impl Strategy<Value = SymbolicScalar> {
        (prop::collection::vec(-5i64..6, 1..4), prop::collection::vec(-5i64..6, 1..3)).prop_filter_map(
            "nonzero denominator",
            |(n, d)| {
                let np = Poly::from_coeffs(n.iter().map(|&c| rat(c, 1)).collect());
                let dp = Poly::from_coeffs(d.iter().map(|&c| rat(c, 1)).collect());
                SymbolicScalar::from_parts(np, dp).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn field_axioms(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert!(a.sub(&a).is_zero());
            if !a.is_zero() {
                prop_assert_eq!(a.mul(&a.inv().unwrap()), SymbolicScalar::one());
            }
            let parsed: SymbolicScalar = a.to_string().parse().unwrap();
            prop_assert_eq!(parsed, a);
        }

        #[test]
        fn eval_matches_direct_float(a in small_poly(), alpha in 0.1f64..1.9) {
            let s = 2f64.powf(-alpha);
            let n: f64 = a.numerator().coeffs().iter().enumerate()
                .map(|(i, c)| rational_to_f64(c) * s.powi(i as i32)).sum();
            let d: f64 = a.denominator().coeffs().iter().enumerate()
                .map(|(i, c)| rational_to_f64(c) * s.powi(i as i32)).sum();
            if d.abs() > 1e-3 {
                let v = a.eval_at(alpha, 2).unwrap();
                prop_assert!((v - n / d).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
    }
}
