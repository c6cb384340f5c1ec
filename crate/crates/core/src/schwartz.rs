//! Locally constant compactly supported functions on `Q_p^n`, stored as finite
//! combinations of max-norm ball indicators.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::extension::ExtensionContext;
use crate::padic::{distance_exp, rational_to_f64, Distance, PAdic};
use crate::symbolic::{rat_pow, SymbolicScalar};

/// Refinement guard for canonicalization and transform expansion.
pub const MAX_SUB_BALLS: u128 = 1_000_000;

/// Coefficient ring of a test function: exact `Q(s)` or complex doubles.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl Coefficient for SymbolicScalar {
    fn zero() -> Self {
        SymbolicScalar::zero()
    }
    fn is_zero(&self) -> bool {
        SymbolicScalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        SymbolicScalar::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        SymbolicScalar::mul(self, o)
    }
    fn from_rational(r: &BigRational) -> Self {
        SymbolicScalar::constant(r.clone())
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn from_json(v: &Value) -> Result<Self> {
        v.as_str()
            .ok_or_else(|| Error::Parse("symbolic coefficient must be a string".into()))?
            .parse()
    }
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }
    fn from_json(v: &Value) -> Result<Self> {
        let a = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Parse("complex coefficient must be [re, im]".into()))?;
        let re = a[0].as_f64().ok_or_else(|| Error::Parse("re".into()))?;
        let im = a[1].as_f64().ok_or_else(|| Error::Parse("im".into()))?;
        Ok(Complex64::new(re, im))
    }
}

/// Exact `p`-adic expansion of a rational known at least modulo `p^abs`.
pub fn exact_padic(x: &BigRational, p: u32, abs: i64) -> Result<PAdic> {
    if x.is_zero() {
        return Ok(PAdic::zero(p, abs));
    }
    let probe = PAdic::from_big_rational(x, p, 1)?;
    let v = probe.valuation().unwrap_or(0);
    let prec = (abs - v).max(1) as usize;
    PAdic::from_big_rational(x, p, prec)
}

/// Closed ball `{x : ‖x − a‖ ≤ p^{−r}}`; the center is the canonical coset
/// representative (digits at positions `≥ r` removed).
#[derive(Clone, Debug)]
pub struct Ball {
    center: Vec<PAdic>,
    radius_exp: i64,
}

type BallKey = (i64, Vec<(Option<i64>, Vec<u32>, i64)>);

impl Ball {
    pub fn new(center: &[PAdic], radius_exp: i64) -> Result<Ball> {
        if center.is_empty() {
            return Err(Error::Domain("ball in dimension 0".into()));
        }
        let p = center[0].prime();
        if center.iter().any(|c| c.prime() != p) {
            return Err(Error::Domain("mixed primes in ball center".into()));
        }
        let center = center
            .iter()
            .map(|c| c.reduce_mod(radius_exp))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ball { center, radius_exp })
    }

    /// Ball from exact rational center coordinates.
    pub fn from_rationals(p: u32, center: &[BigRational], radius_exp: i64) -> Result<Ball> {
        let c = center
            .iter()
            .map(|x| exact_padic(x, p, radius_exp))
            .collect::<Result<Vec<_>>>()?;
        Ball::new(&c, radius_exp)
    }

    pub fn from_ints(p: u32, center: &[i64], radius_exp: i64) -> Result<Ball> {
        let c: Vec<BigRational> = center.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        Ball::from_rationals(p, &c, radius_exp)
    }

    /// The closed ball `‖x‖ ≤ p^{−r}` around the origin.
    pub fn centered(p: u32, n: usize, radius_exp: i64) -> Ball {
        Ball { center: vec![PAdic::zero(p, radius_exp); n], radius_exp }
    }

    pub fn prime(&self) -> u32 {
        self.center[0].prime()
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[PAdic] {
        &self.center
    }

    pub fn radius_exp(&self) -> i64 {
        self.radius_exp
    }

    pub fn center_rationals(&self) -> Vec<BigRational> {
        self.center.iter().map(PAdic::to_rational).collect()
    }

    /// Center coordinates as exact expansions with `precision` significant digits.
    pub fn center_exact(&self, precision: usize) -> Vec<PAdic> {
        self.center.iter().map(|c| c.with_precision(precision)).collect()
    }

    /// Haar measure `p^{−rn}`.
    pub fn measure(&self) -> BigRational {
        rat_pow(self.prime(), -self.radius_exp * self.dim() as i64)
    }

    pub fn contains_origin(&self) -> bool {
        self.center.iter().all(PAdic::is_zero)
    }

    /// `‖center‖ = p^e`, `None` when the ball contains the origin.
    pub fn center_norm_exp(&self) -> Option<i64> {
        crate::padic::max_norm_exp(&self.center)
    }

    pub fn contains(&self, x: &[PAdic]) -> Result<bool> {
        Ok(distance_exp(x, &self.center, -self.radius_exp)? == Distance::Within)
    }

    /// Whether `other ⊆ self`.
    pub fn contains_ball(&self, other: &Ball) -> Result<bool> {
        Ok(other.radius_exp >= self.radius_exp && self.contains(&other.center)?)
    }

    pub fn intersects(&self, other: &Ball) -> Result<bool> {
        Ok(self.contains_ball(other)? || other.contains_ball(self)?)
    }

    /// The `p^{n(r2−r)}` sub-balls of radius `p^{−r2}`.
    pub fn sub_balls(&self, r2: i64) -> Result<Vec<Ball>> {
        if r2 < self.radius_exp {
            return Err(Error::Domain("refinement radius must be finer".into()));
        }
        let p = self.prime();
        let n = self.dim();
        let depth = (r2 - self.radius_exp) as u32;
        let per_coord = (p as u128).pow(depth);
        let count = per_coord
            .checked_pow(n as u32)
            .filter(|&c| c <= MAX_SUB_BALLS)
            .ok_or_else(|| Error::Resource(format!("refinement into more than {MAX_SUB_BALLS} balls")))?;
        let base = self.center_rationals();
        let step = rat_pow(p, self.radius_exp);
        let mut out = Vec::with_capacity(count as usize);
        for idx in 0..count {
            let mut m = idx;
            let mut c = Vec::with_capacity(n);
            for b in &base {
                let k = (m % per_coord) as u64;
                m /= per_coord;
                c.push(b + &step * BigRational::from_integer(BigInt::from(k)));
            }
            out.push(Ball::from_rationals(p, &c, r2)?);
        }
        Ok(out)
    }

    /// Image under `y ↦ y + a`.
    pub fn translate(&self, a: &[BigRational]) -> Result<Ball> {
        let c: Vec<BigRational> = self.center_rationals().iter().zip(a).map(|(x, y)| x + y).collect();
        Ball::from_rationals(self.prime(), &c, self.radius_exp)
    }

    fn key(&self) -> BallKey {
        (self.radius_exp, self.center.iter().map(PAdic::repr_key).collect())
    }

    pub fn center_strings(&self) -> Vec<String> {
        self.center.iter().map(|c| c.to_string()).collect()
    }
}

impl PartialEq for Ball {
    fn eq(&self, o: &Self) -> bool {
        self.key() == o.key()
    }
}

impl Eq for Ball {}

impl PartialOrd for Ball {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Ball {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key().cmp(&o.key())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<C> {
    prime: u32,
    dim: usize,
    terms: Vec<(Ball, C)>,
}

impl<C: Coefficient> TestFunction<C> {
    pub fn zero(prime: u32, dim: usize) -> Self {
        TestFunction { prime, dim, terms: Vec::new() }
    }

    pub fn indicator(ball: Ball) -> Self {
        let one = C::from_rational(&BigRational::one());
        TestFunction { prime: ball.prime(), dim: ball.dim(), terms: vec![(ball, one)] }
    }

    pub fn from_terms(prime: u32, dim: usize, terms: Vec<(Ball, C)>) -> Result<Self> {
        if terms.iter().any(|(b, _)| b.prime() != prime || b.dim() != dim) {
            return Err(Error::Domain("term does not live on Q_p^n".into()));
        }
        Ok(TestFunction { prime, dim, terms })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Ball, C)] {
        &self.terms
    }

    pub fn push(&mut self, ball: Ball, c: C) -> Result<()> {
        if ball.prime() != self.prime || ball.dim() != self.dim {
            return Err(Error::Domain("term does not live on Q_p^n".into()));
        }
        self.terms.push((ball, c));
        Ok(())
    }

    pub fn plus(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.push(b.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: &C) -> Self {
        TestFunction {
            prime: self.prime,
            dim: self.dim,
            terms: self.terms.iter().map(|(b, c)| (b.clone(), c.mul(k))).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&C::from_rational(&-BigRational::one()))
    }

    /// Finest radius exponent present.
    pub fn finest_radius(&self) -> Option<i64> {
        self.terms.iter().map(|(b, _)| b.radius_exp()).max()
    }

    /// Refines every ball to the finest radius, merges coincident balls and
    /// drops zero coefficients.
    pub fn canonicalize(&self) -> Result<Self> {
        match self.finest_radius() {
            Some(r) => self.refine_to(r),
            None => Ok(self.clone()),
        }
    }

    /// Canonical form at a prescribed radius exponent `r` (at least the finest present).
    pub fn refine_to(&self, r: i64) -> Result<Self> {
        if self.finest_radius().is_some_and(|f| f > r) {
            return Err(Error::Domain("refinement radius coarser than a stored ball".into()));
        }
        let mut total: u128 = 0;
        for (b, _) in &self.terms {
            let d = (r - b.radius_exp()) as u32;
            let k = (self.prime as u128)
                .checked_pow(d * self.dim as u32)
                .ok_or_else(|| Error::Resource("refinement overflow".into()))?;
            total = total.saturating_add(k);
        }
        if total > MAX_SUB_BALLS {
            return Err(Error::Resource(format!("refinement into {total} balls exceeds {MAX_SUB_BALLS}")));
        }
        let mut acc: BTreeMap<Ball, C> = BTreeMap::new();
        for (b, c) in &self.terms {
            for sb in b.sub_balls(r)? {
                let e = acc.entry(sb).or_insert_with(C::zero);
                *e = e.add(c);
            }
        }
        Ok(TestFunction {
            prime: self.prime,
            dim: self.dim,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Pairwise disjoint balls with a common radius.
    pub fn is_canonical(&self) -> bool {
        let r = self.finest_radius();
        self.terms.iter().all(|(b, c)| Some(b.radius_exp()) == r && !c.is_zero())
            && self.terms.windows(2).all(|w| w[0].0 < w[1].0)
    }

    pub fn evaluate(&self, x: &[PAdic]) -> Result<C> {
        if x.len() != self.dim {
            return Err(Error::Domain("point has wrong dimension".into()));
        }
        let mut acc = C::zero();
        for (b, c) in &self.terms {
            if b.contains(x)? {
                acc = acc.add(c);
            }
        }
        Ok(acc)
    }

    pub fn integrate(&self) -> C {
        self.terms
            .iter()
            .fold(C::zero(), |acc, (b, c)| acc.add(&c.mul(&C::from_rational(&b.measure()))))
    }

    /// `y ↦ f(y − a)`.
    pub fn translate(&self, a: &[BigRational]) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(b, c)| Ok((b.translate(a)?, c.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(TestFunction { prime: self.prime, dim: self.dim, terms })
    }

    pub fn to_json(&self, ctx: Option<&ExtensionContext>) -> Value {
        json!({
            "context": ctx.map(|c| c.to_string()),
            "prime": self.prime,
            "dimension": self.dim,
            "terms": self.terms.iter().map(|(b, c)| json!({
                "center_digits": b.center_strings(),
                "radius_exp": b.radius_exp(),
                "coeff": c.to_json(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("test function json: {m}"));
        let prime = v["prime"].as_u64().ok_or_else(|| bad("prime"))? as u32;
        let dim = v["dimension"].as_u64().ok_or_else(|| bad("dimension"))? as usize;
        let mut f = TestFunction::zero(prime, dim);
        for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let r = t["radius_exp"].as_i64().ok_or_else(|| bad("radius_exp"))?;
            let center = t["center_digits"]
                .as_array()
                .ok_or_else(|| bad("center_digits"))?
                .iter()
                .map(|s| s.as_str().ok_or_else(|| bad("center digit string"))?.parse::<PAdic>())
                .collect::<Result<Vec<_>>>()?;
            f.push(Ball::new(&center, r)?, C::from_json(&t["coeff"])?)?;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type F = TestFunction<SymbolicScalar>;

    fn random_point(rng: &mut ChaCha8Rng, p: u32, n: usize, lo: i64) -> Vec<PAdic> {
        (0..n)
            .map(|_| {
                let digits: Vec<u32> = (0..12).map(|_| rng.gen_range(0..p)).collect();
                let mut x = PAdic::zero(p, lo + 12);
                for (i, d) in digits.iter().enumerate() {
                    if *d != 0 {
                        let t = PAdic::from_int(*d as i64, p, 40).unwrap().shift(lo + i as i64);
                        x = x.add(&t).unwrap();
                    }
                }
                x.with_precision(40.max(x.precision()))
            })
            .collect()
    }

    #[test]
    fn unit_ball_refines_into_p_to_the_n_pieces() {
        let f = F::indicator(Ball::centered(2, 2, 0));
        let g = F::from_terms(2, 2, vec![(Ball::centered(2, 2, 0), SymbolicScalar::one()),
                                          (Ball::centered(2, 2, 1), SymbolicScalar::zero())]).unwrap();
        let c = g.canonicalize().unwrap();
        assert_eq!(c.terms().len(), 4);
        assert!(c.terms().iter().all(|(b, k)| b.radius_exp() == 1 && *k == SymbolicScalar::one()));
        assert!(c.is_canonical());
        assert_eq!(c.canonicalize().unwrap(), c);
        assert!(f.plus(&f.neg()).unwrap().canonicalize().unwrap().terms().is_empty());
    }

    #[test]
    fn overlapping_representations_agree() {
        let p = 3;
        let big = F::indicator(Ball::centered(p, 2, 0));
        let mut pieces = F::zero(p, 2);
        for b in Ball::centered(p, 2, 0).sub_balls(1).unwrap() {
            pieces.push(b, SymbolicScalar::one()).unwrap();
        }
        assert_eq!(big.refine_to(1).unwrap(), pieces.canonicalize().unwrap());
        assert!(big.plus(&pieces.neg()).unwrap().canonicalize().unwrap().terms().is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = random_point(&mut rng, p, 2, -1);
            assert_eq!(big.evaluate(&x).unwrap(), pieces.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn evaluate_examples() {
        let p = 5;
        let f = F::indicator(Ball::centered(p, 2, 0));
        let zero = vec![PAdic::zero(p, 20); 2];
        assert_eq!(f.evaluate(&zero).unwrap(), SymbolicScalar::one());
        let far = vec![PAdic::from_rational(1, 5, p, 20).unwrap(), PAdic::zero(p, 20)];
        assert!(f.evaluate(&far).unwrap().is_zero());
        let coarse = vec![PAdic::zero(p, -1), PAdic::zero(p, -1)];
        assert!(matches!(f.evaluate(&coarse), Err(Error::Precision(_))));
    }

    #[test]
    fn local_constancy_and_canonical_invariance() {
        let p = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = F::from_terms(p, 2, vec![
            (Ball::from_ints(p, &[1, 0], 2).unwrap(), SymbolicScalar::int(3)),
            (Ball::centered(p, 2, 0), SymbolicScalar::s()),
            (Ball::from_rationals(p, &[rat(1, 2), rat(0, 1)], 1).unwrap(), SymbolicScalar::int(-1)),
        ]).unwrap();
        let c = f.canonicalize().unwrap();
        for _ in 0..100 {
            let x = random_point(&mut rng, p, 2, -2);
            let h = random_point(&mut rng, p, 2, 2);
            let xh: Vec<PAdic> = x.iter().zip(&h).map(|(a, b)| a.add(b).unwrap()).collect();
            let v = f.evaluate(&x).unwrap();
            assert_eq!(v, f.evaluate(&xh).unwrap());
            assert_eq!(v, c.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn integration() {
        let p = 3;
        assert_eq!(F::indicator(Ball::centered(p, 2, 0)).integrate(), SymbolicScalar::one());
        let b = Ball::from_ints(p, &[1, 2], 2).unwrap();
        assert_eq!(F::indicator(b.clone()).integrate(), SymbolicScalar::constant(rat(1, 81)));
        let f = F::indicator(b).scale(&SymbolicScalar::s());
        let g = F::indicator(Ball::centered(p, 2, -1));
        let lhs = f.plus(&g).unwrap().integrate();
        assert_eq!(lhs, f.integrate().add(&g.integrate()));
        let shift = vec![rat(1, 3), rat(7, 1)];
        assert_eq!(f.translate(&shift).unwrap().integrate(), f.integrate());
        assert_eq!(f.canonicalize().unwrap().integrate(), f.integrate());
    }

    #[test]
    fn refinement_guard() {
        let f = F::from_terms(5, 3, vec![
            (Ball::centered(5, 3, -2), SymbolicScalar::one()),
            (Ball::centered(5, 3, 3), SymbolicScalar::one()),
        ]).unwrap();
        assert!(matches!(f.canonicalize(), Err(Error::Resource(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = 2;
        let ctx = ExtensionContext::shared(p, 2).unwrap();
        let f = F::from_terms(p, 2, vec![
            (Ball::from_rationals(p, &[rat(3, 2), rat(1, 1)], 2).unwrap(), "(3*s)/(4-s)".parse().unwrap()),
        ]).unwrap();
        let v = f.to_json(Some(&ctx));
        assert_eq!(v["context"], "p=2;n=2;modulus=t^2+t+1");
        assert_eq!(F::from_json(&v).unwrap(), f);
        let g: TestFunction<Complex64> = TestFunction::from_terms(p, 2, vec![
            (Ball::centered(p, 2, 0), Complex64::new(0.5, -1.0)),
        ]).unwrap();
        assert_eq!(TestFunction::<Complex64>::from_json(&g.to_json(None)).unwrap(), g);
    }
}
