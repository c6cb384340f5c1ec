//! The unramified extension `L = Q_p[t]/(f)` of degree `n`, with `f` monic and
//! irreducible mod `p`. Elements are coordinate vectors over the power basis
//! `1, t, ..., t^{n−1}`, which is the identification `U: K^n -> L`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::padic::{check_prime, max_norm_exp, PAdic};
use crate::residue::{find_irreducible, is_irreducible, ResidueElement};

/// Precision used for the exact integer constants entering products.
const EXACT_DIGITS: usize = 256;

#[derive(Debug, PartialEq, Eq)]
pub struct ExtensionContext {
    p: u32,
    n: usize,
    /// Length `n + 1`, low degree first, monic.
    modulus: Vec<u32>,
}

impl ExtensionContext {
    pub fn new(p: u32, n: usize) -> Result<ExtensionContext> {
        let modulus = find_irreducible(p, n)?;
        Ok(ExtensionContext { p, n, modulus })
    }

    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<ExtensionContext> {
        check_prime(p)?;
        let n = modulus.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::Domain("extension degree must be at least 2".into()));
        }
        if modulus[n] != 1 {
            return Err(Error::Domain("modulus must be monic".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::Domain("modulus coefficients must lie in [0, p)".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::Domain("modulus is reducible mod p".into()));
        }
        Ok(ExtensionContext { p, n, modulus })
    }

    /// Process-wide cached context for `(p, n)`.
    pub fn shared(p: u32, n: usize) -> Result<Arc<ExtensionContext>> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<ExtensionContext>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(ctx) = guard.get(&(p, n)) {
            return Ok(ctx.clone());
        }
        let ctx = Arc::new(ExtensionContext::new(p, n)?);
        guard.insert((p, n), ctx.clone());
        Ok(ctx)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn residue_invert(&self, a: &ResidueElement) -> Result<ResidueElement> {
        a.invert(&self.modulus)
    }
}

pub fn format_poly(coeffs: &[u32], var: &str) -> String {
    let mut terms = Vec::new();
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{k}"),
        };
        terms.push(match (c, k) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}*{mono}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

fn parse_poly(s: &str, var: &str) -> Result<Vec<u32>> {
    let mut coeffs: Vec<u32> = Vec::new();
    for term in s.split('+') {
        let term = term.trim();
        let (c, k) = if let Some((c, mono)) = term.split_once('*') {
            (c.trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?, mono.trim())
        } else if term.starts_with(var) {
            (1, term)
        } else {
            (term.parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?, "")
        };
        let k = if k.is_empty() {
            0
        } else if k == var {
            1
        } else {
            k.strip_prefix(&format!("{var}^"))
                .ok_or_else(|| Error::Parse(format!("bad monomial {k:?}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(e.to_string()))?
        };
        if coeffs.len() <= k {
            coeffs.resize(k + 1, 0);
        }
        coeffs[k] += c;
    }
    Ok(coeffs)
}

/// `p=2;n=2;modulus=t^2+t+1`
impl fmt::Display for ExtensionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={};n={};modulus={}",
            self.p,
            self.n,
            format_poly(&self.modulus, "t")
        )
    }
}

impl FromStr for ExtensionContext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = None;
        let mut n = None;
        let mut modulus = None;
        for part in s.split(';') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad field {part:?}")))?;
            match k.trim() {
                "p" => p = Some(v.trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?),
                "n" => n = Some(v.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "modulus" => modulus = Some(parse_poly(v, "t")?),
                other => return Err(Error::Parse(format!("unknown field {other:?}"))),
            }
        }
        let (p, n, m) = match (p, n, modulus) {
            (Some(p), Some(n), Some(m)) => (p, n, m),
            _ => return Err(Error::Parse("missing p, n or modulus".into())),
        };
        let ctx = ExtensionContext::with_modulus(p, m)?;
        if ctx.n != n {
            return Err(Error::Parse("degree does not match modulus".into()));
        }
        Ok(ctx)
    }
}

/// A power of `p` (`exp = None` encodes the value 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowerOfP {
    pub prime: u32,
    pub exp: Option<i64>,
}

impl PowerOfP {
    pub fn value(&self) -> f64 {
        match self.exp {
            None => 0.0,
            Some(e) => (self.prime as f64).powi(e as i32),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtAbs {
    /// `|x|_L = ‖x‖^n`
    pub normalized: PowerOfP,
    /// `‖x‖_L = max_j |x_j|`
    pub max_norm: PowerOfP,
}

#[derive(Clone, Debug)]
pub struct ExtElement {
    ctx: Arc<ExtensionContext>,
    coords: Vec<PAdic>,
}

fn exact_int(m: i64, p: u32) -> PAdic {
    PAdic::from_int(m, p, EXACT_DIGITS).expect("prime checked by context")
}

fn acc_add(acc: &mut Option<PAdic>, x: PAdic) -> Result<()> {
    *acc = Some(match acc.take() {
        None => x,
        Some(a) => a.add(&x)?,
    });
    Ok(())
}

impl ExtElement {
    pub fn new(ctx: Arc<ExtensionContext>, coords: Vec<PAdic>) -> Result<ExtElement> {
        if coords.len() != ctx.n {
            return Err(Error::Domain(format!(
                "expected {} coordinates, got {}",
                ctx.n,
                coords.len()
            )));
        }
        if coords.iter().any(|c| c.prime() != ctx.p) {
            return Err(Error::Domain("coordinate over the wrong prime".into()));
        }
        Ok(ExtElement { ctx, coords })
    }

    pub fn from_ints(ctx: Arc<ExtensionContext>, ints: &[i64], precision: usize) -> Result<ExtElement> {
        let p = ctx.p;
        let coords = ints
            .iter()
            .map(|&m| PAdic::from_int(m, p, precision))
            .collect::<Result<Vec<_>>>()?;
        ExtElement::new(ctx, coords)
    }

    pub fn one(ctx: Arc<ExtensionContext>, precision: usize) -> ExtElement {
        let mut ints = vec![0i64; ctx.n];
        ints[0] = 1;
        ExtElement::from_ints(ctx, &ints, precision).expect("valid context")
    }

    pub fn context(&self) -> &Arc<ExtensionContext> {
        &self.ctx
    }

    pub fn coords(&self) -> &[PAdic] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<PAdic> {
        self.coords
    }

    fn check_ctx(&self, other: &ExtElement) -> Result<()> {
        if !Arc::ptr_eq(&self.ctx, &other.ctx) && *self.ctx != *other.ctx {
            return Err(Error::Domain("elements of different extensions".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &ExtElement) -> Result<ExtElement> {
        self.check_ctx(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExtElement { ctx: self.ctx.clone(), coords })
    }

    pub fn sub(&self, other: &ExtElement) -> Result<ExtElement> {
        self.check_ctx(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExtElement { ctx: self.ctx.clone(), coords })
    }

    /// Multiplication by a scalar of `K`.
    pub fn scale(&self, k: &PAdic) -> Result<ExtElement> {
        let coords = self.coords.iter().map(|c| c.mul(k)).collect::<Result<Vec<_>>>()?;
        Ok(ExtElement { ctx: self.ctx.clone(), coords })
    }

    /// Product of the coordinate polynomials reduced modulo the context modulus.
    pub fn mul(&self, other: &ExtElement) -> Result<ExtElement> {
        self.check_ctx(other)?;
        let n = self.ctx.n;
        let p = self.ctx.p;
        let mut prod: Vec<Option<PAdic>> = vec![None; 2 * n - 1];
        for (i, a) in self.coords.iter().enumerate() {
            for (j, b) in other.coords.iter().enumerate() {
                acc_add(&mut prod[i + j], a.mul(b)?)?;
            }
        }
        // t^n = −(m_0 + m_1 t + ... + m_{n−1} t^{n−1})
        for k in (n..2 * n - 1).rev() {
            let Some(ck) = prod[k].take() else { continue };
            for (i, &m) in self.ctx.modulus[..n].iter().enumerate() {
                if m != 0 {
                    acc_add(&mut prod[k - n + i], ck.mul(&exact_int(-(m as i64), p))?)?;
                }
            }
        }
        let coords = prod
            .into_iter()
            .take(n)
            .map(|c| c.unwrap_or_else(|| PAdic::zero(p, i64::MAX / 4)))
            .collect();
        Ok(ExtElement { ctx: self.ctx.clone(), coords })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(PAdic::is_zero)
    }

    /// Smallest coordinate valuation, i.e. `‖x‖_L = p^{−v}`.
    pub fn valuation(&self) -> Option<i64> {
        max_norm_exp(&self.coords).map(|e| -e)
    }

    pub fn abs(&self) -> ExtAbs {
        let e = max_norm_exp(&self.coords);
        let p = self.ctx.p;
        ExtAbs {
            normalized: PowerOfP { prime: p, exp: e.map(|e| e * self.ctx.n as i64) },
            max_norm: PowerOfP { prime: p, exp: e },
        }
    }

    /// Residue of a unit (`‖x‖ = 1`) in `F_{p^n}`.
    fn residue(&self) -> Result<ResidueElement> {
        let digits: Vec<u32> = self
            .coords
            .iter()
            .map(|c| c.digit_at(0).ok_or_else(|| Error::Precision("unit digit unknown".into())))
            .collect::<Result<_>>()?;
        ResidueElement::new(self.ctx.p, self.ctx.n, &digits)
    }

    /// `1/x`: factor `x = p^m u` with `‖u‖ = 1`, seed with the residue inverse of
    /// `u` and refine by Newton steps `y ← y(2 − u y)`.
    pub fn invert(&self) -> Result<ExtElement> {
        let m = self
            .valuation()
            .ok_or_else(|| Error::DivisionByZero("inverse of zero in L".into()))?;
        let unit = ExtElement {
            ctx: self.ctx.clone(),
            coords: self.coords.iter().map(|c| c.shift(-m)).collect(),
        };
        let working = unit
            .coords
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| (c.abs_precision()).max(1) as usize)
            .min()
            .unwrap_or(1);
        let seed = self.ctx.residue_invert(&unit.residue()?)?;
        let seed_ints: Vec<i64> = seed.coeffs().iter().map(|&c| c as i64).collect();
        let mut y = ExtElement::from_ints(self.ctx.clone(), &seed_ints, EXACT_DIGITS)?;
        let two = ExtElement::from_ints(self.ctx.clone(), &two_vec(self.ctx.n), EXACT_DIGITS)?;
        let mut correct = 1usize;
        while correct < working {
            let uy = unit.mul(&y)?;
            y = y.mul(&two.sub(&uy)?)?;
            correct *= 2;
        }
        // a final step absorbs precision lost to carries in the modulus reduction
        let uy = unit.mul(&y)?;
        y = y.mul(&two.sub(&uy)?)?;
        let coords = y.coords.iter().map(|c| c.shift(-m)).collect();
        Ok(ExtElement { ctx: self.ctx.clone(), coords })
    }

    /// Every coordinate agrees with `other` on digits below `p^abs`.
    pub fn agrees_to(&self, other: &ExtElement, abs: i64) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| match a.sub(b) {
            Ok(d) => match d.valuation() {
                None => d.abs_precision() >= abs,
                Some(v) => v >= abs,
            },
            Err(_) => false,
        })
    }
}

fn two_vec(n: usize) -> Vec<i64> {
    let mut v = vec![0i64; n];
    v[0] = 2;
    v
}

/// `U`: coordinates over the canonical basis to the element of `L`.
pub fn iso_u(ctx: &Arc<ExtensionContext>, v: Vec<PAdic>) -> Result<ExtElement> {
    ExtElement::new(ctx.clone(), v)
}

/// `U^{−1}`.
pub fn iso_u_inv(a: &ExtElement) -> Vec<PAdic> {
    a.coords.clone()
}
