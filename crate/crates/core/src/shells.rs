//! Exact shell sums for functions radial about a point.
//!
//! A [`RadialProfile`] about a center `a` takes `inner_value` on
//! `‖y − a‖ ≤ p^{inner_exp}` and `h_k` on the sphere `‖y − a‖ = p^k`,
//! `k > inner_exp`. With `Q = p^n`, the sphere of radius `p^k` has measure
//! `Q^k (1 − 1/Q)`, and a radial kernel with value `σ^k` on it contributes
//! `(1 − 1/Q) τ^k` per unit of the integrand, where `τ = Qσ`:
//! `τ = s` for `‖z‖^{−(n+α)}` and `τ = s^{−1}` for `‖z‖^{α−n}`.

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::symbolic::{geometric_head, geometric_tail, rat_pow, Convergent, SymbolicScalar};

/// `coeff · ratio^k` on the sphere of index `k ≥ start`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tail {
    pub start: i64,
    pub coeff: SymbolicScalar,
    pub ratio: SymbolicScalar,
}

impl Tail {
    pub fn at(&self, k: i64) -> Result<SymbolicScalar> {
        if k < self.start {
            return Ok(SymbolicScalar::zero());
        }
        Ok(self.coeff.mul(&self.ratio.pow(k)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub inner_exp: i64,
    pub inner_value: SymbolicScalar,
    /// Values on the spheres `inner_exp + 1, inner_exp + 2, …`.
    pub shells: Vec<SymbolicScalar>,
    pub tail: Option<Tail>,
}

/// Where the evaluation point sits relative to the profile's center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    /// Inside the inner ball.
    Central,
    /// On the sphere `‖x − a‖ = p^j`, `j > inner_exp`.
    Shell(i64),
}

/// Which radial kernel is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `‖z‖^{−(n+α)}`, integrand `u(x) − u(y)`.
    Vt,
    /// `‖z‖^{α−n}`, integrand `f(y)`.
    Riesz,
}

impl Kernel {
    fn tau(self) -> SymbolicScalar {
        match self {
            Kernel::Vt => SymbolicScalar::s(),
            Kernel::Riesz => SymbolicScalar::monomial(BigRational::one(), -1),
        }
    }
}

/// Shell bookkeeping for residue cardinality `Q = p^n`.
#[derive(Clone, Debug)]
pub struct ShellGeometry {
    p: u32,
    q: BigRational,
}

impl ShellGeometry {
    pub fn new(p: u32, n: usize) -> ShellGeometry {
        ShellGeometry { p, q: rat_pow(p, n as i64) }
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    fn q_pow(&self, k: i64) -> BigRational {
        self.q.pow(k as i32)
    }

    /// `1 − 1/Q`
    fn shell_frac(&self) -> BigRational {
        BigRational::one() - self.q.recip()
    }

    /// Kernel value `σ^j = τ^j Q^{−j}` on the sphere of index `j`.
    fn sigma_pow(&self, kernel: Kernel, j: i64) -> Result<SymbolicScalar> {
        Ok(kernel.tau().pow(j)?.scale(&self.q_pow(-j)))
    }

    /// `Σ_{k > j} μ_k σ^k`.
    fn kernel_upper(&self, kernel: Kernel, j: i64) -> Result<Convergent> {
        Ok(geometric_tail(j + 1, &kernel.tau(), self.p)?.scale(&SymbolicScalar::constant(self.shell_frac())))
    }

    /// `Σ_{k ≤ j} μ_k σ^k`.
    fn kernel_lower(&self, kernel: Kernel, j: i64) -> Result<Convergent> {
        Ok(geometric_head(j, &kernel.tau(), self.p)?.scale(&SymbolicScalar::constant(self.shell_frac())))
    }
}

impl RadialProfile {
    /// `1` on `‖y − a‖ ≤ p^{−r}`, zero outside.
    pub fn indicator(r: i64) -> RadialProfile {
        RadialProfile { inner_exp: -r, inner_value: SymbolicScalar::one(), shells: Vec::new(), tail: None }
    }

    /// Zero on `‖y‖ < p^{start}`, `coeff · ratio^k` beyond.
    pub fn pure_tail(tail: Tail) -> RadialProfile {
        RadialProfile { inner_exp: tail.start - 1, inner_value: SymbolicScalar::zero(), shells: Vec::new(), tail: Some(tail) }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.tail {
            Some(t) if t.start <= self.inner_exp => {
                Err(Error::Domain("tail must start outside the inner ball".into()))
            }
            Some(t) if t.ratio.as_monomial().is_none() => {
                Err(Error::Domain(format!("tail ratio {} is not a monomial", t.ratio)))
            }
            _ => Ok(()),
        }
    }

    /// Value on the sphere of index `k` (the inner value for `k ≤ inner_exp`).
    pub fn value(&self, k: i64) -> Result<SymbolicScalar> {
        if k <= self.inner_exp {
            return Ok(self.inner_value.clone());
        }
        let idx = (k - self.inner_exp - 1) as usize;
        let explicit = self.shells.get(idx).cloned().unwrap_or_else(SymbolicScalar::zero);
        match &self.tail {
            Some(t) => Ok(explicit.add(&t.at(k)?)),
            None => Ok(explicit),
        }
    }

    pub fn value_at(&self, pos: Position) -> Result<SymbolicScalar> {
        match pos {
            Position::Central => Ok(self.inner_value.clone()),
            Position::Shell(j) => self.value(j),
        }
    }

    /// `Σ_{k > j} h_k μ_k σ^k`.
    fn upper_sum(&self, geo: &ShellGeometry, kernel: Kernel, j: i64) -> Result<Convergent> {
        let tau = kernel.tau();
        let mut acc = SymbolicScalar::zero();
        for (idx, h) in self.shells.iter().enumerate() {
            let k = self.inner_exp + 1 + idx as i64;
            if k > j && !h.is_zero() {
                acc = acc.add(&h.mul(&tau.pow(k)?));
            }
        }
        let mut out = Convergent::exact(acc);
        if let Some(t) = &self.tail {
            if !t.coeff.is_zero() {
                let series = geometric_tail((j + 1).max(t.start), &t.ratio.mul(&tau), geo.p)?;
                out = out.add(&series.scale(&t.coeff));
            }
        }
        Ok(out.scale(&SymbolicScalar::constant(geo.shell_frac())))
    }

    /// `∫_{‖y − a‖ ≤ p^j} h`, for `j ≥ inner_exp`.
    fn ball_integral(&self, geo: &ShellGeometry, j: i64) -> Result<SymbolicScalar> {
        let mut acc = self.inner_value.scale(&geo.q_pow(self.inner_exp));
        let frac = geo.shell_frac();
        for k in self.inner_exp + 1..=j {
            let h = self.value(k)?;
            if !h.is_zero() {
                acc = acc.add(&h.scale(&(geo.q_pow(k) * &frac)));
            }
        }
        Ok(acc)
    }

    /// `∫ (h(x) − h(y)) ‖x − y‖^{−(n+α)} dy`, without normalizing constant.
    pub fn vt_at(&self, geo: &ShellGeometry, pos: Position) -> Result<Convergent> {
        let k = Kernel::Vt;
        match pos {
            Position::Central => {
                let mut out = self.upper_sum(geo, k, self.inner_exp)?.scale(&SymbolicScalar::int(-1));
                if !self.inner_value.is_zero() {
                    out = out.add(&geo.kernel_upper(k, self.inner_exp)?.scale(&self.inner_value));
                }
                Ok(out)
            }
            Position::Shell(j) => {
                if j <= self.inner_exp {
                    return self.vt_at(geo, Position::Central);
                }
                let h = self.value(j)?;
                let mut out = self.upper_sum(geo, k, j)?.scale(&SymbolicScalar::int(-1));
                if !h.is_zero() {
                    out = out.add(&geo.kernel_upper(k, j)?.scale(&h));
                }
                let inner = h.scale(&geo.q_pow(j - 1)).sub(&self.ball_integral(geo, j - 1)?);
                Ok(out.add(&Convergent::exact(inner.mul(&geo.sigma_pow(k, j)?))))
            }
        }
    }

    /// `∫ h(y) ‖x − y‖^{α−n} dy`, without normalizing constant.
    pub fn riesz_at(&self, geo: &ShellGeometry, pos: Position) -> Result<Convergent> {
        let k = Kernel::Riesz;
        match pos {
            Position::Central => {
                let mut out = self.upper_sum(geo, k, self.inner_exp)?;
                if !self.inner_value.is_zero() {
                    out = out.add(&geo.kernel_lower(k, self.inner_exp)?.scale(&self.inner_value));
                }
                Ok(out)
            }
            Position::Shell(j) => {
                if j <= self.inner_exp {
                    return self.riesz_at(geo, Position::Central);
                }
                let h = self.value(j)?;
                let sig = geo.sigma_pow(k, j)?;
                let mut out = self.upper_sum(geo, k, j)?;
                if !h.is_zero() {
                    // part of the own sphere: inner ball around x, then the rest at distance p^j
                    let rest = BigRational::one() - rat_pow(2, 1) * geo.q.recip();
                    let own = geo
                        .kernel_lower(k, j - 1)?
                        .add(&Convergent::exact(sig.scale(&(geo.q_pow(j) * rest))));
                    out = out.add(&own.scale(&h));
                }
                Ok(out.add(&Convergent::exact(sig.mul(&self.ball_integral(geo, j - 1)?))))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat;

    fn parse(s: &str) -> SymbolicScalar {
        s.parse().unwrap()
    }

    #[test]
    fn unit_ball_inside() {
        let geo = ShellGeometry::new(2, 2);
        let v = RadialProfile::indicator(0).vt_at(&geo, Position::Central).unwrap();
        // with the constant (1 − s)/(s(1 − s/4)) this becomes 3/(4 − s)
        assert_eq!(v.value, parse("3/4*s/(1-s)"));
    }

    #[test]
    fn single_exterior_shell() {
        let geo = ShellGeometry::new(3, 2);
        let v = RadialProfile::indicator(1).vt_at(&geo, Position::Shell(2)).unwrap();
        // −p^{−rn} p^{−d(n+α)} with r = 1, d = 2
        assert_eq!(v.value, SymbolicScalar::monomial(-rat(1, 9) * rat(1, 81), 2));
    }

    #[test]
    fn riesz_unit_ball_inside() {
        let geo = ShellGeometry::new(2, 3);
        let v = RadialProfile::indicator(0).riesz_at(&geo, Position::Central).unwrap();
        assert_eq!(v.value, parse("7/8/(1-s)"));
    }

    #[test]
    fn constant_profile_has_zero_vt() {
        let geo = ShellGeometry::new(5, 2);
        let mut p = RadialProfile::indicator(0);
        p.shells = vec![SymbolicScalar::one(); 3];
        p.tail = Some(Tail { start: 4, coeff: SymbolicScalar::one(), ratio: SymbolicScalar::one() });
        for pos in [Position::Central, Position::Shell(2), Position::Shell(7)] {
            assert!(p.vt_at(&geo, pos).unwrap().value.is_zero());
        }
        assert!(p.riesz_at(&geo, Position::Central).unwrap().region.is_empty());
    }

    #[test]
    fn tail_values() {
        let t = Tail { start: -1, coeff: SymbolicScalar::int(2), ratio: parse("s/4") };
        let p = RadialProfile::pure_tail(t);
        assert!(p.value(-2).unwrap().is_zero());
        assert_eq!(p.value(-1).unwrap(), parse("8/s"));
        assert_eq!(p.value(2).unwrap(), parse("s^2/8"));
        assert!(RadialProfile { inner_exp: 3, ..p }.validate().is_err());
    }
}
