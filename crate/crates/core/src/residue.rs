//! Polynomials over `F_p` and the residue field `F_{p^n}` of the unramified
//! extension.

use crate::error::{Error, Result};
use crate::padic::check_prime;

/// Dense polynomial over `F_p`, coefficients low degree first, no trailing zeros.
pub type FpPoly = Vec<u32>;

fn trim(mut a: FpPoly) -> FpPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is prime, Fermat
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

pub fn poly_sub(a: &[u32], b: &[u32], p: u32) -> FpPoly {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

pub fn poly_mul(a: &[u32], b: &[u32], p: u32) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

/// `(quotient, remainder)`; `b` must be nonzero.
pub fn poly_divrem(a: &[u32], b: &[u32], p: u32) -> (FpPoly, FpPoly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead_inv = inv_mod_p(*b.last().unwrap(), p) as u64;
    let mut q = vec![0u32; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = (*r.last().unwrap() as u64 * lead_inv % p as u64) as u32;
        q[shift] = c;
        for (i, &bi) in b.iter().enumerate() {
            let sub = (c as u64 * bi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> FpPoly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = poly_divrem(&x, &y, p);
        x = y;
        y = r;
    }
    if let Some(&lead) = x.last() {
        let inv = inv_mod_p(lead, p) as u64;
        x = x.into_iter().map(|c| (c as u64 * inv % p as u64) as u32).collect();
    }
    x
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> FpPoly {
    poly_divrem(&poly_mul(a, b, p), m, p).1
}

/// `base^(p^k) mod m` by repeated `p`-th powering.
fn frobenius_power(m: &[u32], p: u32, k: usize) -> FpPoly {
    let mut x: FpPoly = poly_divrem(&[0, 1], m, p).1;
    for _ in 0..k {
        let mut acc: FpPoly = vec![1];
        let mut base = x.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, m, p);
            }
            base = poly_mulmod(&base, &base, m, p);
            e >>= 1;
        }
        x = acc;
    }
    x
}

/// Rabin-style test: a degree-`n` polynomial is irreducible over `F_p` iff it
/// shares no factor with `t^(p^i) − t` for `1 ≤ i ≤ n/2`.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let f = trim(f.to_vec());
    let n = f.len().saturating_sub(1);
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    for i in 1..=n / 2 {
        let h = poly_sub(&frobenius_power(&f, p, i), &[0, 1], p);
        if poly_gcd(&f, &h, p).len() > 1 {
            return false;
        }
    }
    true
}

/// Lexicographically first monic irreducible `t^n + c_{n−1} t^{n−1} + ... + c_0`,
/// ordering by `(c_{n−1}, ..., c_0)`.
pub fn find_irreducible(p: u32, n: usize) -> Result<FpPoly> {
    check_prime(p)?;
    if n < 2 {
        return Err(Error::Domain("extension degree must be at least 2".into()));
    }
    let total = (p as u128).pow(n as u32);
    for idx in 0..total {
        let mut f = vec![0u32; n + 1];
        f[n] = 1;
        let mut m = idx;
        for c in f.iter_mut().take(n) {
            *c = (m % p as u128) as u32;
            m /= p as u128;
        }
        if f[0] != 0 && is_irreducible(&f, p) {
            return Ok(f);
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

/// Element of `F_{p^n} = F_p[t]/(modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResidueElement {
    p: u32,
    coeffs: Vec<u32>,
}

impl ResidueElement {
    pub fn new(p: u32, n: usize, coeffs: &[u32]) -> Result<ResidueElement> {
        if coeffs.len() > n {
            return Err(Error::Domain("too many residue coefficients".into()));
        }
        let mut c: Vec<u32> = coeffs.iter().map(|&x| x % p).collect();
        c.resize(n, 0);
        Ok(ResidueElement { p, coeffs: c })
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn mul(&self, other: &ResidueElement, modulus: &[u32]) -> ResidueElement {
        let n = self.coeffs.len();
        let mut c = poly_mulmod(&self.coeffs, &other.coeffs, modulus, self.p);
        c.resize(n, 0);
        ResidueElement { p: self.p, coeffs: c }
    }

    /// Inverse modulo `modulus` by the extended Euclidean algorithm.
    pub fn invert(&self, modulus: &[u32]) -> Result<ResidueElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("inverse of residue zero".into()));
        }
        let p = self.p;
        let (mut r0, mut r1) = (trim(modulus.to_vec()), trim(self.coeffs.clone()));
        let (mut s0, mut s1): (FpPoly, FpPoly) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1, p);
            let s = poly_sub(&s0, &poly_mul(&q, &s1, p), p);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        if r0.len() != 1 {
            return Err(Error::Domain("modulus is not irreducible".into()));
        }
        let inv = inv_mod_p(r0[0], p) as u64;
        let mut c: Vec<u32> = s0.iter().map(|&x| (x as u64 * inv % p as u64) as u32).collect();
        c = poly_divrem(&c, modulus, p).1;
        c.resize(self.coeffs.len(), 0);
        Ok(ResidueElement { p, coeffs: c })
    }
}
