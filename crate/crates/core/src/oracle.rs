//! Brute-force numeric shell sums around the evaluation point.
//!
//! Independent of the closed forms: spheres `‖y − x‖ = p^k` are enumerated one
//! by one, the integrand is averaged over each sphere from ultrametric ball
//! intersections, and summation stops once the geometric remainder is below
//! the target.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::padic::{distance_exp, Distance, PAdic};
use crate::schwartz::Ball;

/// Shells allowed beyond what the nominal decay rate needs.
pub const MAX_SHELLS: usize = 200;

/// `MAX_SHELLS` plus the shells a ratio `p^{−rate}` needs to shrink by 1e-17.
fn shell_budget(p: u32, rate: f64) -> usize {
    MAX_SHELLS + (40.0 / (rate * (p as f64).ln())).ceil().min(1e5) as usize
}

pub type ShellFn = Arc<dyn Fn(i64) -> Result<f64> + Send + Sync>;

/// `coeff · h(‖y − center‖)`: `inner_value` on `‖y − center‖ ≤ p^{inner_exp}`,
/// `shell(k)` on `‖y − center‖ = p^k` beyond.
#[derive(Clone)]
pub struct OraclePiece {
    pub center: Vec<PAdic>,
    pub inner_exp: i64,
    pub inner_value: f64,
    pub shell: ShellFn,
    pub coeff: f64,
}

impl OraclePiece {
    pub fn ball(b: &Ball, coeff: f64) -> OraclePiece {
        OraclePiece {
            center: b.center().to_vec(),
            inner_exp: -b.radius_exp(),
            inner_value: 1.0,
            shell: Arc::new(|_| Ok(0.0)),
            coeff,
        }
    }

    fn h(&self, k: i64) -> Result<f64> {
        if k <= self.inner_exp {
            Ok(self.inner_value)
        } else {
            (self.shell)(k)
        }
    }

    fn locate(&self, x: &[PAdic]) -> Result<Option<i64>> {
        Ok(match distance_exp(x, &self.center, self.inner_exp)? {
            Distance::Within => None,
            Distance::Exactly(d) => Some(d),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKernel {
    /// `c ∫ (g(x) − g(y)) ‖x − y‖^{−(n+α)} dy`
    Vt,
    /// `d ∫ g(y) ‖x − y‖^{α−n} dy`
    Riesz,
}

/// `(p^α − 1)/(1 − p^{−α−n})`
pub fn vt_constant(p: u32, n: usize, alpha: f64) -> f64 {
    let p = p as f64;
    (p.powf(alpha) - 1.0) / (1.0 - p.powf(-alpha - n as f64))
}

/// `(1 − p^{−α})/(1 − p^{α−n})`
pub fn riesz_constant(p: u32, n: usize, alpha: f64) -> f64 {
    let p = p as f64;
    (1.0 - p.powf(-alpha)) / (1.0 - p.powf(alpha - n as f64))
}

#[derive(Clone, Copy, Debug)]
pub struct OracleValue {
    pub value: f64,
    pub shells: usize,
    pub remainder_bound: f64,
}

struct Located<'a> {
    piece: &'a OraclePiece,
    dist: Option<i64>,
}

impl Located<'_> {
    fn at_x(&self) -> Result<f64> {
        match self.dist {
            None => Ok(self.piece.inner_value),
            Some(d) => self.piece.h(d),
        }
    }

    /// Mean of the piece over the sphere `‖y − x‖ = p^k`.
    fn sphere_mean(&self, k: i64, q: f64) -> Result<f64> {
        let pc = self.piece;
        match self.dist {
            None => pc.h(k),
            Some(d) if k != d => pc.h(k.max(d)),
            Some(d) => {
                // B(center, p^{d−1}) lies entirely in the sphere, the rest of it
                // is the part of {‖y − center‖ = p^d} outside B(x, p^{d−1})
                let frac = 1.0 - 1.0 / q;
                let mut acc = pc.inner_value * q.powi((pc.inner_exp - d) as i32);
                for m in pc.inner_exp + 1..d {
                    acc += pc.h(m)? * frac * q.powi((m - d) as i32);
                }
                Ok(acc / frac + pc.h(d)? * (1.0 - 2.0 / q) / frac)
            }
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
pub(crate) struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub(crate) fn get(&self) -> f64 {
        self.s + self.c
    }
}

/// Sums shells until the estimated remainder is below
/// `target · max(1, |partial sum|)`.
pub fn shell_sum_oracle(
    pieces: &[OraclePiece],
    p: u32,
    n: usize,
    x: &[PAdic],
    alpha: f64,
    kernel: OracleKernel,
    target: f64,
) -> Result<OracleValue> {
    if alpha <= 0.0 {
        return Err(Error::Domain("oracle needs alpha > 0".into()));
    }
    let q = (p as f64).powi(n as i32);
    let pa = (p as f64).powf(alpha);
    let frac = 1.0 - 1.0 / q;
    let located = pieces
        .iter()
        .map(|piece| Ok(Located { piece, dist: piece.locate(x)? }))
        .collect::<Result<Vec<_>>>()?;
    if located.is_empty() {
        return Ok(OracleValue { value: 0.0, shells: 0, remainder_bound: 0.0 });
    }
    // every piece is constant on B(x, p^lo); the geometry is settled beyond hi
    let lo = located.iter().map(|l| l.dist.map_or(l.piece.inner_exp, |d| d - 1)).min().unwrap();
    let hi = located.iter().map(|l| l.dist.unwrap_or(l.piece.inner_exp)).max().unwrap() + 1;
    let gx = located.iter().try_fold(0.0, |acc, l| Ok::<f64, Error>(acc + l.piece.coeff * l.at_x()?))?;
    let mean = |k: i64| -> Result<f64> {
        located.iter().try_fold(0.0, |acc, l| Ok(acc + l.piece.coeff * l.sphere_mean(k, q)?))
    };
    // μ_k times the kernel on the k-th sphere
    let weight = |k: i64| match kernel {
        OracleKernel::Vt => frac * pa.powi(-k as i32),
        OracleKernel::Riesz => frac * pa.powi(k as i32),
    };
    let term = |k: i64| -> Result<f64> {
        Ok(match kernel {
            OracleKernel::Vt => weight(k) * (gx - mean(k)?),
            OracleKernel::Riesz => weight(k) * mean(k)?,
        })
    };

    let budget = match kernel {
        OracleKernel::Vt => shell_budget(p, alpha),
        OracleKernel::Riesz => shell_budget(p, alpha.min(n as f64 - alpha).max(1e-3)),
    };
    let mut sum = Sum::default();
    let mut shells = 0usize;
    let mut remainder = 0.0;

    if kernel == OracleKernel::Riesz && gx != 0.0 {
        // inside B(x, p^lo) the integrand is g(x): ratio p^{−α} per step inward
        let r = 1.0 / pa;
        let mut k = lo;
        loop {
            let t = weight(k) * gx;
            sum.add(t);
            shells += 1;
            let bound = t.abs() * r / (1.0 - r);
            if bound < target * sum.get().abs().max(1.0) {
                remainder += bound;
                break;
            }
            if shells > budget {
                return Err(Error::Divergence("inner shells do not decay".into()));
            }
            k -= 1;
        }
    }

    let mut prev: [f64; 2] = [f64::NAN, f64::NAN];
    let mut k = lo + 1;
    let mut outward = 0usize;
    loop {
        let t = term(k)?;
        sum.add(t);
        shells += 1;
        outward += 1;
        if k > hi + 1 {
            if t == 0.0 && prev[1] == 0.0 {
                break;
            }
            let r1 = (t / prev[1]).abs();
            let r0 = (prev[1] / prev[0]).abs();
            let rho = r0.max(r1);
            if rho.is_finite() && rho < 1.0 {
                let bound = 2.0 * t.abs() * rho / (1.0 - rho);
                if bound < target * sum.get().abs().max(1.0) {
                    remainder += bound;
                    break;
                }
            }
        }
        if outward > budget {
            return Err(Error::Divergence(format!(
                "no geometric decay within {budget} shells at alpha = {alpha}"
            )));
        }
        prev = [prev[1], t];
        k += 1;
    }
    let c = match kernel {
        OracleKernel::Vt => vt_constant(p, n, alpha),
        OracleKernel::Riesz => riesz_constant(p, n, alpha),
    };
    Ok(OracleValue { value: c * sum.get(), shells, remainder_bound: c.abs() * remainder })
}

/// `|a − b| ≤ tol · max(1, |b|)`.
pub fn agrees(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::SymbolicScalar;

    fn pt(p: u32, xs: &[(i64, i64)]) -> Vec<PAdic> {
        xs.iter().map(|&(a, b)| PAdic::from_rational(a, b, p, 24).unwrap()).collect()
    }

    #[test]
    fn unit_ball_inside_at_alpha_one() {
        let b = Ball::centered(2, 2, 0);
        let v = shell_sum_oracle(&[OraclePiece::ball(&b, 1.0)], 2, 2, &pt(2, &[(1, 1), (0, 1)]), 1.0, OracleKernel::Vt, 1e-15)
            .unwrap();
        assert!(agrees(v.value, 6.0 / 7.0, 1e-12), "{}", v.value);
        let s: SymbolicScalar = "3/(4-s)".parse().unwrap();
        for alpha in [0.5, 1.0, 1.5] {
            let v = shell_sum_oracle(&[OraclePiece::ball(&b, 1.0)], 2, 2, &pt(2, &[(3, 1), (1, 1)]), alpha, OracleKernel::Vt, 1e-15)
                .unwrap();
            assert!(agrees(v.value, s.eval_at(alpha, 2).unwrap(), 1e-12));
        }
    }

    #[test]
    fn zero_integrand() {
        let x = pt(3, &[(1, 1), (1, 1)]);
        let v = shell_sum_oracle(&[], 3, 2, &x, 1.0, OracleKernel::Vt, 1e-15).unwrap();
        assert_eq!(v.value, 0.0);
        let b = Ball::centered(3, 2, 0);
        let v = shell_sum_oracle(&[OraclePiece::ball(&b, 0.0)], 3, 2, &x, 1.0, OracleKernel::Riesz, 1e-15).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn kernel_tail_integral() {
        // ∫_{‖z‖ ≥ p} ‖z‖^{−(n+α)} dz, read off the unit ball at the origin
        for (p, n, alpha) in [(2u32, 2usize, 0.5), (3, 2, 1.0), (5, 3, 1.5)] {
            let b = Ball::centered(p, n, 0);
            let x = vec![PAdic::zero(p, 30); n];
            let v = shell_sum_oracle(&[OraclePiece::ball(&b, 1.0)], p, n, &x, alpha, OracleKernel::Vt, 1e-15).unwrap();
            let pf = p as f64;
            let closed = (1.0 - pf.powi(-(n as i32))) * pf.powf(-alpha) / (1.0 - pf.powf(-alpha));
            assert!(agrees(v.value / vt_constant(p, n, alpha), closed, 1e-12));
        }
    }

    #[test]
    fn riesz_unit_ball() {
        let p = 2;
        let n = 2;
        let b = Ball::centered(p, n, 0);
        let alpha = 1.0;
        let v = shell_sum_oracle(&[OraclePiece::ball(&b, 1.0)], p, n, &pt(p, &[(1, 1), (1, 1)]), alpha, OracleKernel::Riesz, 1e-15)
            .unwrap();
        let s = 0.5f64;
        let want = riesz_constant(p, n, alpha) * 0.75 / (1.0 - s);
        assert!(agrees(v.value, want, 1e-12));
    }

    #[test]
    fn no_decay_is_reported() {
        let b = Ball::centered(2, 2, 0);
        let growing = OraclePiece {
            center: b.center().to_vec(),
            inner_exp: 0,
            inner_value: 0.0,
            shell: Arc::new(|k| Ok(4f64.powi(k as i32))),
            coeff: 1.0,
        };
        let r = shell_sum_oracle(&[growing], 2, 2, &pt(2, &[(1, 1), (0, 1)]), 1.0, OracleKernel::Vt, 1e-15);
        assert!(matches!(r, Err(Error::Divergence(_))));
    }
}
