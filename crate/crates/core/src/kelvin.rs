//! The inversion `J = U^{−1} ∘ (x ↦ 1/x) ∘ U` on `Q_p^n` and the Kelvin
//! transform `(Ku)(x) = ‖x‖^{α−n} u(J x)`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{iso_u, iso_u_inv, ExtensionContext, PowerOfP};
use crate::padic::{max_norm_exp, PAdic};
use crate::schwartz::{Ball, TestFunction};
use crate::symbolic::{AlphaRegion, Convergent, SymbolicScalar};
use crate::vt::{riesz_apply_at, riesz_region, vt_apply_at, PiecewiseRadialFunction, RadialSum, RadialTail};

/// Extra digits carried when inverting a finite-expansion center.
const GUARD_DIGITS: usize = 8;

pub fn invert_point(ctx: &Arc<ExtensionContext>, x: &[PAdic]) -> Result<Vec<PAdic>> {
    let e = iso_u(ctx, x.to_vec())?;
    if e.is_zero() {
        return Err(Error::Domain("inversion is undefined at the origin".into()));
    }
    Ok(iso_u_inv(&e.invert()?))
}

/// `‖x‖^{α−n}` on `‖x‖ = p^m`: `s^{−m} p^{−mn}`.
pub fn kelvin_weight(p: u32, n: usize, m: i64) -> SymbolicScalar {
    SymbolicScalar::p_power_monomial(p, -m * n as i64, -m)
}

/// `‖x‖^{α+n}` on `‖x‖ = p^m`: `s^{−m} p^{mn}`.
pub fn identity_weight(p: u32, n: usize, m: i64) -> SymbolicScalar {
    SymbolicScalar::p_power_monomial(p, m * n as i64, -m)
}

fn exact_center(b: &Ball, precision: usize) -> Vec<PAdic> {
    b.center()
        .iter()
        .map(|c| if c.is_zero() { PAdic::zero(c.prime(), 1 << 30) } else { c.with_precision(precision) })
        .collect()
}

/// `J(b)` for a ball with `‖center‖ = p^{−v} > p^{−r}`: the ball about `J(center)`
/// of radius `p^{−r} p^{2v}`, on which `‖x‖ = p^{v}`.
pub fn image_ball(ctx: &Arc<ExtensionContext>, b: &Ball) -> Result<(Ball, PowerOfP)> {
    let v = match b.center_norm_exp() {
        Some(e) => -e,
        None => return Err(Error::Domain("ball contains the origin; its image is not a ball".into())),
    };
    let r = b.radius_exp();
    let precision = (r - v).max(1) as usize + GUARD_DIGITS;
    let jc = invert_point(ctx, &exact_center(b, precision))?;
    let image = Ball::new(&jc, r - 2 * v)?;
    Ok((image, PowerOfP { prime: b.prime(), exp: Some(v) }))
}

/// `Ku` for `u` a test function. Balls containing the origin become tails on
/// `‖x‖ ≥ p^r`; the others become weighted image balls. `(Ku)(0) = 0`.
pub fn kelvin_transform(ctx: &Arc<ExtensionContext>, u: &TestFunction<SymbolicScalar>) -> Result<PiecewiseRadialFunction> {
    let (p, n) = (u.prime(), u.dim());
    check_context(ctx, p, n)?;
    let mut compact = TestFunction::zero(p, n);
    let mut tails = Vec::new();
    for (b, c) in u.terms() {
        if b.contains_origin() {
            tails.push(RadialTail {
                start_shell: b.radius_exp(),
                coeff: c.clone(),
                ratio: kelvin_weight(p, n, 1),
            });
        } else {
            let (image, norm) = image_ball(ctx, b)?;
            let m = norm.exp.expect("image avoids the origin");
            compact.push(image, c.mul(&kelvin_weight(p, n, m)))?;
        }
    }
    Ok(PiecewiseRadialFunction { compact, tails })
}

fn check_context(ctx: &ExtensionContext, p: u32, n: usize) -> Result<()> {
    if ctx.prime() != p || ctx.degree() != n {
        return Err(Error::Domain(format!(
            "extension p={}, n={} does not match Q_{p}^{n}",
            ctx.prime(),
            ctx.degree()
        )));
    }
    Ok(())
}

fn nonzero_norm(x: &[PAdic]) -> Result<i64> {
    max_norm_exp(x).ok_or_else(|| Error::Domain("point must be nonzero".into()))
}

#[derive(Clone, Debug)]
pub struct KelvinCheck {
    /// `D u (J x)`
    pub lhs: Convergent,
    /// `‖x‖^{α+n} D(Ku)(x)`
    pub rhs: Convergent,
    pub residual: SymbolicScalar,
    /// `D u (x) − ‖x‖^{α+n} D(Ku)(x)`, the identity with both sides at `x`.
    pub literal_residual: SymbolicScalar,
    pub norm_exp: i64,
}

impl KelvinCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

/// `(D u)(J x) = ‖x‖^{α+n} D(Ku)(x)` for `x ≠ 0`, exactly in `Q(s)` on `0 < α < n`.
pub fn verify_kelvin_identity(ctx: &Arc<ExtensionContext>, u: &TestFunction<SymbolicScalar>, x: &[PAdic]) -> Result<KelvinCheck> {
    let (p, n) = (u.prime(), u.dim());
    let m = nonzero_norm(x)?;
    let jx = invert_point(ctx, x)?;
    let direct = RadialSum::from_test_function(u);
    let policy = riesz_region(n);
    let lhs = vt_apply_at(&direct, &jx)?.restrict(&policy);
    let ku = kelvin_transform(ctx, u)?.to_radial_sum()?;
    let rhs = vt_apply_at(&ku, x)?.scale(&identity_weight(p, n, m)).restrict(&policy);
    let at_x = vt_apply_at(&direct, x)?;
    Ok(KelvinCheck {
        residual: lhs.value.sub(&rhs.value),
        literal_residual: at_x.value.sub(&rhs.value),
        lhs,
        rhs,
        norm_exp: m,
    })
}

#[derive(Clone, Debug)]
pub struct ChainCheck {
    /// `D^{−γ}(f ∘ J)(J x)`
    pub lhs: Convergent,
    /// `|x|_L^{1−γ} D^{−γ}(|·|_L^{−γ−1} f)(x)`
    pub rhs: Convergent,
    pub residual: SymbolicScalar,
}

/// The change of variables `y ↦ 1/y` inside the Riesz potential, for `f`
/// vanishing near the origin.
pub fn verify_riesz_inversion_chain(ctx: &Arc<ExtensionContext>, f: &TestFunction<SymbolicScalar>, x: &[PAdic]) -> Result<ChainCheck> {
    let (p, n) = (f.prime(), f.dim());
    check_context(ctx, p, n)?;
    let m = nonzero_norm(x)?;
    let mut pulled = TestFunction::zero(p, n);
    let mut weighted = TestFunction::zero(p, n);
    for (b, c) in f.terms() {
        if b.contains_origin() {
            return Err(Error::Precondition("f must vanish on a neighborhood of 0".into()));
        }
        let (image, norm) = image_ball(ctx, b)?;
        pulled.push(image, c.clone())?;
        // |z|_L^{−γ−1} on ‖z‖ = p^{−v}
        let v = -b.center_norm_exp().expect("checked above");
        weighted.push(b.clone(), c.mul(&identity_weight(p, n, v)))?;
        debug_assert_eq!(norm.exp, Some(v));
    }
    let jx = invert_point(ctx, x)?;
    let lhs = riesz_apply_at(&RadialSum::from_test_function(&pulled), &jx)?;
    // |x|_L^{1−γ} = s^m p^{mn}
    let outer = SymbolicScalar::p_power_monomial(p, m * n as i64, m);
    let rhs = riesz_apply_at(&RadialSum::from_test_function(&weighted), x)?.scale(&outer);
    Ok(ChainCheck { residual: lhs.value.sub(&rhs.value), lhs, rhs })
}

/// `{x ≠ 0 : p^{min} ≤ ‖x‖ ≤ p^{max}}`, either bound optional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RadialRegion {
    pub min_exp: Option<i64>,
    pub max_exp: Option<i64>,
}

impl RadialRegion {
    pub fn contains_exp(&self, m: i64) -> bool {
        self.min_exp.is_none_or(|lo| m >= lo) && self.max_exp.is_none_or(|hi| m <= hi)
    }

    pub fn contains(&self, x: &[PAdic]) -> bool {
        max_norm_exp(x).is_some_and(|m| self.contains_exp(m))
    }

    /// Image under `J`: `‖J x‖ = ‖x‖^{−1}`.
    pub fn inverted(&self) -> RadialRegion {
        RadialRegion { min_exp: self.max_exp.map(|e| -e), max_exp: self.min_exp.map(|e| -e) }
    }
}

/// Numeric `D^{α,n}(K u)(x)` for complex coefficients.
pub fn vt_of_kelvin_numeric(ctx: &Arc<ExtensionContext>, u: &TestFunction<Complex64>, x: &[PAdic], alpha: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, c) in u.terms() {
        let k = kelvin_transform(ctx, &TestFunction::indicator(b.clone()))?.to_radial_sum()?;
        let v = vt_apply_at(&k, x)?.restrict(&riesz_region(u.dim()));
        acc += c * v.eval_at(alpha, u.prime())?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicityProbe {
    pub norm_exp: i64,
    pub inside: bool,
    pub abs_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicityReport {
    /// `max |D u|` over the `J`-images of the points, which lie in `G`.
    pub max_on_region: f64,
    /// `max |D(Ku)|` over the points.
    pub max_abs: f64,
    pub points: usize,
}

/// Checks `D(Ku) = 0` on `J(G)` given `D u = 0` on `G`. Every point must lie
/// in `J(G)`.
pub fn verify_harmonicity(
    ctx: &Arc<ExtensionContext>,
    u: &TestFunction<Complex64>,
    g: &RadialRegion,
    points: &[Vec<PAdic>],
    alpha: f64,
) -> Result<HarmonicityReport> {
    let jg = g.inverted();
    let mut max_on_region: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for x in points {
        if !jg.contains(x) {
            return Err(Error::Precondition(format!(
                "point with ‖x‖ = p^{:?} lies outside J(G)",
                max_norm_exp(x)
            )));
        }
        let jx = invert_point(ctx, x)?;
        max_on_region = max_on_region.max(crate::vt::vt_apply_numeric(u, &jx, alpha)?.norm());
        max_abs = max_abs.max(vt_of_kelvin_numeric(ctx, u, x, alpha)?.norm());
    }
    Ok(HarmonicityReport { max_on_region, max_abs, points: points.len() })
}

/// `|D(Ku)(x)|` at arbitrary nonzero points, each flagged by membership in `J(G)`.
pub fn probe_harmonicity(
    ctx: &Arc<ExtensionContext>,
    u: &TestFunction<Complex64>,
    g: &RadialRegion,
    points: &[Vec<PAdic>],
    alpha: f64,
) -> Result<Vec<HarmonicityProbe>> {
    let jg = g.inverted();
    points
        .iter()
        .map(|x| {
            Ok(HarmonicityProbe {
                norm_exp: nonzero_norm(x)?,
                inside: jg.contains(x),
                abs_value: vt_of_kelvin_numeric(ctx, u, x, alpha)?.norm(),
            })
        })
        .collect()
}

/// Region where the Kelvin machinery is used: `0 < α < n`.
pub fn kelvin_region(n: usize) -> AlphaRegion {
    riesz_region(n)
}
