//! Test-function families, evaluation points and oracle adapters shared by the
//! verification suites.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use rand::Rng;

use crate::error::Result;
use crate::extension::ExtensionContext;
use crate::kelvin::{image_ball, invert_point};
use crate::oracle::{shell_sum_oracle, OracleKernel, OraclePiece};
use crate::padic::PAdic;
use crate::sample::{random_point, random_point_in_ball};
use crate::schwartz::{exact_padic, Ball, TestFunction};
use crate::symbolic::{rat, rat_pow, SymbolicScalar};
use crate::vt::origin;

pub type Family = Vec<(String, TestFunction<SymbolicScalar>)>;

/// Target handed to nested and outer oracle sums.
pub const ORACLE_TARGET: f64 = 1e-15;

fn unit_vec(p: u32, n: usize, terms: &[(usize, BigRational)]) -> Vec<BigRational> {
    let _ = p;
    let mut v = vec![rat(0, 1); n];
    for (j, x) in terms {
        v[*j] = x.clone();
    }
    v
}

fn ball(p: u32, n: usize, center: &[(usize, BigRational)], r: i64) -> Result<Ball> {
    Ball::from_rationals(p, &unit_vec(p, n, center), r)
}

/// Unit ball, shifted balls with `‖center‖ ∈ {1, p}`, a wide ball about 0 and
/// a three-term combination; radii from `p^{−2}` to `p`.
pub fn kelvin_family(p: u32, n: usize) -> Result<Family> {
    let one = rat(1, 1);
    let inv_p = rat_pow(p, -1);
    let inv_p2 = rat_pow(p, -2);
    let f = |b: Ball| TestFunction::indicator(b);
    let mut combo = TestFunction::zero(p, n);
    combo.push(Ball::centered(p, n, 1), SymbolicScalar::int(2))?;
    combo.push(ball(p, n, &[(0, one.clone()), (1, one.clone())], 2)?, SymbolicScalar::int(-1))?;
    combo.push(ball(p, n, &[(0, inv_p2)], -1)?, SymbolicScalar::constant(rat(1, 2)))?;
    Ok(vec![
        ("unit_ball".into(), f(Ball::centered(p, n, 0))),
        ("ball_e1_r2".into(), f(ball(p, n, &[(0, one.clone())], 2)?)),
        ("ball_pe2_r1".into(), f(ball(p, n, &[(1, inv_p.clone())], 1)?)),
        ("wide_ball".into(), f(Ball::centered(p, n, -1))),
        ("combination".into(), combo),
    ])
}

/// Functions vanishing near the origin.
pub fn off_origin_family(p: u32, n: usize) -> Result<Family> {
    let one = rat(1, 1);
    let inv_p = rat_pow(p, -1);
    let mut pair = TestFunction::zero(p, n);
    pair.push(ball(p, n, &[(0, one.clone())], 1)?, SymbolicScalar::one())?;
    pair.push(ball(p, n, &[(0, inv_p.clone()), (1, one.clone())], 0)?, SymbolicScalar::s().scale(&rat(-3, 1)))?;
    Ok(vec![
        ("ball_e1_r1".into(), TestFunction::indicator(ball(p, n, &[(0, one.clone())], 1)?)),
        ("ball_pe2_r1".into(), TestFunction::indicator(ball(p, n, &[(1, inv_p)], 1)?)),
        ("pair".into(), pair),
    ])
}

/// `count` points: mostly random across `‖x‖ ∈ {p^{−3}, …, p^{3}}`, every
/// fifth one the `J`-image of a point of an off-origin ball of `u`, so both
/// sides of the identities see the interior of the balls.
pub fn kelvin_points<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: &Arc<ExtensionContext>,
    u: &TestFunction<SymbolicScalar>,
    count: usize,
    precision: usize,
) -> Result<Vec<Vec<PAdic>>> {
    let (p, n) = (u.prime(), u.dim());
    let off: Vec<&Ball> = u.terms().iter().map(|(b, _)| b).filter(|b| !b.contains_origin()).collect();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i % 5 == 4 && !off.is_empty() {
            let b = off[(i / 5) % off.len()];
            let y = random_point_in_ball(rng, b, precision);
            out.push(invert_point(ctx, &y)?);
        } else {
            let m = -3 + (i % 7) as i64;
            out.push(random_point(rng, p, n, m, precision));
        }
    }
    Ok(out)
}

/// Points for the round trip: random shells, points inside each ball, and the origin.
pub fn inverse_points<R: Rng + ?Sized>(rng: &mut R, u: &TestFunction<SymbolicScalar>, count: usize, precision: usize) -> Vec<Vec<PAdic>> {
    let (p, n) = (u.prime(), u.dim());
    let mut out = vec![vec![PAdic::zero(p, precision as i64); n]];
    for i in 1..count {
        if i % 4 == 3 {
            let (b, _) = &u.terms()[(i / 4) % u.terms().len()];
            out.push(random_point_in_ball(rng, b, precision));
        } else {
            out.push(random_point(rng, p, n, -3 + (i % 7) as i64, precision));
        }
    }
    out
}

pub fn ball_pieces(u: &TestFunction<SymbolicScalar>, alpha: f64) -> Result<Vec<OraclePiece>> {
    u.terms()
        .iter()
        .map(|(b, c)| Ok(OraclePiece::ball(b, c.eval_at(alpha, u.prime())?)))
        .collect()
}

/// `(Ku)(y) = ‖y‖^{α−n} u(J y)` built from its definition: balls about 0 give
/// weighted spheres `‖y‖ ≥ p^r`, the others the weighted image ball.
pub fn kelvin_pieces(ctx: &Arc<ExtensionContext>, u: &TestFunction<SymbolicScalar>, alpha: f64) -> Result<Vec<OraclePiece>> {
    let (p, n) = (u.prime(), u.dim());
    let pf = p as f64;
    let weight = move |m: i64| pf.powf(m as f64 * (alpha - n as f64));
    let mut out = Vec::new();
    for (b, c) in u.terms() {
        let c = c.eval_at(alpha, p)?;
        if b.contains_origin() {
            let r = b.radius_exp();
            out.push(OraclePiece {
                center: origin(p, n),
                inner_exp: r - 1,
                inner_value: 0.0,
                shell: Arc::new(move |k| Ok(weight(k))),
                coeff: c,
            });
        } else {
            let (img, norm) = image_ball(ctx, b)?;
            out.push(OraclePiece::ball(&img, c * weight(norm.exp.unwrap_or(0))));
        }
    }
    Ok(out)
}

/// Pieces for `D^{α,n} u` computed by nested oracle sums: the value on each
/// sphere about a ball's center is itself an oracle sum at a point of that sphere.
pub fn vt_image_pieces(u: &TestFunction<SymbolicScalar>, alpha: f64) -> Result<Vec<OraclePiece>> {
    let (p, n) = (u.prime(), u.dim());
    let mut out = Vec::new();
    for (b, c) in u.terms() {
        let unit = vec![OraclePiece::ball(b, 1.0)];
        let center: Vec<BigRational> = b.center_rationals();
        let r = b.radius_exp();
        let point_at = move |k: Option<i64>| -> Result<Vec<PAdic>> {
            let abs = r.max(k.map_or(r, |k| 1 - k)) + 30;
            center
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    let x = match (j, k) {
                        (0, Some(k)) => a + rat_pow(p, -k),
                        _ => a.clone(),
                    };
                    exact_padic(&x, p, abs)
                })
                .collect()
        };
        let inner = shell_sum_oracle(&unit, p, n, &point_at(None)?, alpha, OracleKernel::Vt, ORACLE_TARGET)?.value;
        let cache: Arc<Mutex<HashMap<i64, f64>>> = Arc::default();
        let shell = Arc::new(move |k: i64| -> Result<f64> {
            if let Some(v) = cache.lock().expect("cache lock").get(&k) {
                return Ok(*v);
            }
            let v = shell_sum_oracle(&unit, p, n, &point_at(Some(k))?, alpha, OracleKernel::Vt, ORACLE_TARGET)?.value;
            cache.lock().expect("cache lock").insert(k, v);
            Ok(v)
        });
        out.push(OraclePiece {
            center: b.center().to_vec(),
            inner_exp: -r,
            inner_value: inner,
            shell,
            coeff: c.eval_at(alpha, p)?,
        });
    }
    Ok(out)
}

/// Three `α` samples strictly inside `(0, n)`.
pub fn interior_alphas(n: usize) -> Vec<f64> {
    let n = n as f64;
    vec![n / 4.0, n / 2.0, 3.0 * n / 4.0]
}
