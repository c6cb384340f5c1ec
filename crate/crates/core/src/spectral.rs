//! Fourier analysis on `Q_p^n` in complex double precision.
//!
//! Character `χ(x) = exp(2πi {x}_p)`, pairing `x·ξ = Σ x_j ξ_j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::padic::{max_norm_exp, rational_to_f64, PAdic};
use crate::oracle::Sum;
use crate::schwartz::{Ball, Coefficient, TestFunction, MAX_SUB_BALLS};
use crate::symbolic::SymbolicScalar;

/// Rank-zero additive character of `Q_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Character {
    pub prime: u32,
}

impl Character {
    pub fn new(prime: u32) -> Character {
        Character { prime }
    }

    /// `{x}_p`: the part of the expansion at negative positions, in `[0, 1)`.
    pub fn fractional_part(&self, x: &BigRational) -> Result<BigRational> {
        if x.is_zero() {
            return Ok(BigRational::zero());
        }
        // denominator p^k times a unit u: split x = a/p^k + b/u with b/u ∈ Z_p
        let p = BigInt::from(self.prime);
        let mut den = x.denom().clone();
        let mut pk = BigInt::from(1);
        while (&den % &p).is_zero() {
            den /= &p;
            pk *= &p;
        }
        if pk == BigInt::from(1) {
            return Ok(BigRational::zero());
        }
        // a ≡ num · u^{−1} (mod p^k)
        let u_inv = mod_inv(&den, &pk)
            .ok_or_else(|| Error::Domain("unit part not invertible".into()))?;
        let a = (x.numer() * u_inv).mod_floor(&pk);
        Ok(BigRational::new(a, pk))
    }

    pub fn eval(&self, x: &BigRational) -> Result<Complex64> {
        let f = self.fractional_part(x)?;
        if f.is_zero() {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok(Complex64::from_polar(1.0, 2.0 * PI * rational_to_f64(&f)))
    }

    /// `χ(x·ξ)` for finite expansions.
    pub fn pair(&self, x: &[PAdic], xi: &[PAdic]) -> Result<Complex64> {
        self.eval(&dot(x, xi))
    }
}

fn mod_inv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let (mut r0, mut r1) = (((a % m) + m) % m, m.clone());
    let (mut s0, mut s1) = (BigInt::from(1), BigInt::from(0));
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s2);
    }
    (r0 == BigInt::from(1)).then(|| ((s0 % m) + m) % m)
}

fn dot(x: &[PAdic], xi: &[PAdic]) -> BigRational {
    x.iter().zip(xi).map(|(a, b)| a.to_rational() * b.to_rational()).sum()
}

fn dot_rat(x: &[BigRational], xi: &[BigRational]) -> BigRational {
    x.iter().zip(xi).map(|(a, b)| a * b).sum()
}

/// Transform with `χ(sign · x·ξ)`; `sign = 1` forward, `−1` inverse.
fn transform(f: &TestFunction<Complex64>, sign: i64) -> Result<TestFunction<Complex64>> {
    let (p, n) = (f.prime(), f.dim());
    let chi = Character::new(p);
    let mut out = TestFunction::zero(p, n);
    for (b, c) in f.terms() {
        let r = b.radius_exp();
        let a = b.center_rationals();
        // χ(a·ξ) is constant on balls of radius p^{−t}, t = max(−r, −v(a))
        let t = match b.center_norm_exp() {
            None => -r,
            Some(e) => (-r).max(e),
        };
        let depth = (t + r) as u32;
        let count = (p as u128).checked_pow(depth * n as u32);
        if count.is_none_or(|c| c > MAX_SUB_BALLS) {
            return Err(Error::Resource("Fourier expansion exceeds the sub-ball guard".into()));
        }
        let scale = c * rational_to_f64(&b.measure());
        for sb in Ball::centered(p, n, -r).sub_balls(t)? {
            let mut phase = dot_rat(&a, &sb.center_rationals());
            if sign < 0 {
                phase = -phase;
            }
            out.push(sb, scale * chi.eval(&phase)?)?;
        }
    }
    Ok(out)
}

/// `(Fφ)(ξ) = ∫ χ(x·ξ) φ(x) dx`, as a test function.
pub fn fourier_transform(f: &TestFunction<Complex64>) -> Result<TestFunction<Complex64>> {
    transform(f, 1)
}

/// `(F^{−1}g)(x) = ∫ χ(−x·ξ) g(ξ) dξ`.
pub fn inverse_fourier_transform(g: &TestFunction<Complex64>) -> Result<TestFunction<Complex64>> {
    transform(g, -1)
}

/// `∫_{B(0,p^K)} χ(−x·ξ) ‖ξ‖^α dξ` for `‖x‖ = p^m` (or `x = 0`).
fn centered_ball_term(p: f64, n: f64, k_max: i64, m: Option<i64>, alpha: f64) -> f64 {
    let full = |k0: i64| (1.0 - p.powf(-n)) * p.powf(k0 as f64 * (alpha + n)) / (1.0 - p.powf(-(alpha + n)));
    match m {
        None => full(k_max),
        Some(m) => {
            // full spheres while ‖ξ‖ ≤ ‖x‖^{−1}, a partial one just beyond
            let mut v = full(k_max.min(-m));
            if 1 - m <= k_max {
                v -= p.powf(-(m as f64) * n) * p.powf((1 - m) as f64 * alpha);
            }
            v
        }
    }
}

/// `D^{α,n}φ(x) = F^{−1}(‖ξ‖^α Fφ)(x)`, integrated sphere by sphere.
pub fn vt_spectral_at(phi: &TestFunction<Complex64>, x: &[PAdic], alpha: f64) -> Result<Complex64> {
    if alpha <= 0.0 {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    vt_spectral_from_transform(&fourier_transform(phi)?, x, alpha)
}

/// [`vt_spectral_at`] given `φ̂`, for repeated evaluation.
pub fn vt_spectral_from_transform(hat: &TestFunction<Complex64>, x: &[PAdic], alpha: f64) -> Result<Complex64> {
    if alpha <= 0.0 {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    let (p, n) = (hat.prime(), hat.dim());
    let chi = Character::new(p);
    let m = max_norm_exp(x);
    let (pf, nf) = (p as f64, n as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, c) in hat.terms() {
        let t = b.radius_exp();
        match b.center_norm_exp() {
            None => acc += c * centered_ball_term(pf, nf, -t, m, alpha),
            Some(e) => {
                // ‖ξ‖ = p^e on the whole ball; ∫_B χ(−x·ξ) = χ(−x·b) p^{−tn} 1[‖x‖ ≤ p^t]
                if m.is_none_or(|m| m <= t) {
                    let phase = -dot(x, b.center());
                    acc += c * pf.powf(e as f64 * alpha) * chi.eval(&phase)? * pf.powf(-(t as f64) * nf);
                }
            }
        }
    }
    Ok(acc)
}

/// `∫ max(1, ‖ξ‖)^ℓ φ̂(ξ) conj(ψ̂(ξ)) dξ`.
pub fn sobolev_inner(phi: &TestFunction<Complex64>, psi: &TestFunction<Complex64>, ell: u32) -> Result<Complex64> {
    let a = fourier_transform(phi)?;
    let b = fourier_transform(psi)?;
    let r = match (a.finest_radius(), b.finest_radius()) {
        (Some(x), Some(y)) => x.max(y),
        _ => return Ok(Complex64::new(0.0, 0.0)),
    };
    let a = a.refine_to(r)?;
    let b: BTreeMap<Ball, Complex64> = b.refine_to(r)?.terms().iter().cloned().collect();
    let (p, n) = (phi.prime() as f64, phi.dim() as f64);
    let (mut re, mut im) = (Sum::default(), Sum::default());
    for (ball, ca) in a.terms() {
        let Some(cb) = b.get(ball) else { continue };
        let w = match ball.center_norm_exp() {
            Some(e) => p.powi(e.max(0) as i32 * ell as i32) * p.powf(-(r as f64) * n),
            None => {
                // B(0, p^K): unit ball mass 1 plus the spheres 1..=K
                let k_max = -r;
                if k_max <= 0 {
                    p.powf(k_max as f64 * n)
                } else {
                    1.0 + (1..=k_max).map(|k| p.powf(k as f64 * (ell as f64 + n)) * (1.0 - p.powf(-n))).sum::<f64>()
                }
            }
        };
        let t = ca * cb.conj() * w;
        re.add(t.re);
        im.add(t.im);
    }
    Ok(Complex64::new(re.get(), im.get()))
}

/// `∫ |φ|²`.
pub fn l2_norm_sq(phi: &TestFunction<Complex64>) -> Result<f64> {
    let mut acc = Sum::default();
    for (b, c) in phi.canonicalize()?.terms() {
        acc.add(c.norm_sqr() * rational_to_f64(&b.measure()));
    }
    Ok(acc.get())
}

/// `χ(u0·x) 1_{Z_p^n}(x)` over the depth-one cosets, with eigenvalue `p^α = s^{−1}`.
pub fn make_eigenfunction(u0: &[PAdic]) -> Result<(TestFunction<Complex64>, SymbolicScalar)> {
    if max_norm_exp(u0) != Some(1) {
        return Err(Error::Domain("eigenfunction needs ‖u0‖ = p".into()));
    }
    let p = u0[0].prime();
    let n = u0.len();
    let chi = Character::new(p);
    let mut f = TestFunction::zero(p, n);
    for b in Ball::centered(p, n, 0).sub_balls(1)? {
        let v = chi.pair(u0, b.center())?;
        f.push(b, v)?;
    }
    Ok((f, SymbolicScalar::monomial(BigRational::from_integer(1.into()), -1)))
}

/// Lifts an exact-coefficient test function to complex coefficients at a fixed `α`.
pub fn to_numeric(f: &TestFunction<SymbolicScalar>, alpha: f64) -> Result<TestFunction<Complex64>> {
    let terms = f
        .terms()
        .iter()
        .map(|(b, c)| Ok((b.clone(), Complex64::new(c.eval_at(alpha, f.prime())?, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    TestFunction::from_terms(f.prime(), f.dim(), terms)
}

/// Largest coefficientwise gap between two numeric test functions after
/// refinement to a common radius.
pub fn max_coeff_diff(a: &TestFunction<Complex64>, b: &TestFunction<Complex64>) -> Result<f64> {
    let d = a.plus(&b.neg())?;
    let Some(r) = d.finest_radius() else { return Ok(0.0) };
    let mut acc: BTreeMap<Ball, Complex64> = BTreeMap::new();
    for (ball, c) in d.terms() {
        for sb in ball.sub_balls(r)? {
            let e = acc.entry(sb).or_insert_with(<Complex64 as Coefficient>::zero);
            *e += c;
        }
    }
    Ok(acc.values().map(|c| c.norm()).fold(0.0, f64::max))
}
