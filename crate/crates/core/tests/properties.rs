use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kelvin_core::extension::{iso_u, ExtElement, ExtensionContext};
use kelvin_core::kelvin::{invert_point, verify_kelvin_identity};
use kelvin_core::oracle::{agrees, shell_sum_oracle, OracleKernel, OraclePiece};
use kelvin_core::padic::{max_norm_exp, PAdic};
use kelvin_core::sample::{random_padic, random_point};
use kelvin_core::schwartz::{exact_padic, Ball, TestFunction};
use kelvin_core::spectral::{fourier_transform, inverse_fourier_transform, max_coeff_diff};
use kelvin_core::symbolic::{rat, rat_pow, SymbolicScalar};
use kelvin_core::vt::{riesz_apply_at, vt_apply_at, vt_image, RadialSum};

const PREC: usize = 20;

fn space() -> impl Strategy<Value = (u32, usize)> {
    (prop::sample::select(vec![2u32, 3, 5]), 2usize..=3)
}

fn random_rationals(rng: &mut ChaCha8Rng, p: u32, n: usize, lo: i64) -> Vec<BigRational> {
    (0..n).map(|_| random_padic(rng, p, lo, 3, false).to_rational()).collect()
}

fn random_ball(rng: &mut ChaCha8Rng, p: u32, n: usize) -> Ball {
    let r = rng.gen_range(-1..=2);
    Ball::from_rationals(p, &random_rationals(rng, p, n, -1), r).unwrap()
}

fn vt(u: &TestFunction<SymbolicScalar>, x: &[PAdic]) -> SymbolicScalar {
    vt_apply_at(&RadialSum::from_test_function(u), x).unwrap().value
}

fn shift_point(x: &[PAdic], h: &[BigRational]) -> Vec<PAdic> {
    x.iter()
        .zip(h)
        .map(|(a, b)| a.add(&exact_padic(b, a.prime(), a.abs_precision()).unwrap()).unwrap())
        .collect()
}

fn ctx(p: u32, n: usize) -> Arc<ExtensionContext> {
    ExtensionContext::shared(p, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vt_is_linear((p, n) in space(), seed in any::<u64>(), a in -5i64..5, b in -5i64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = TestFunction::indicator(random_ball(&mut rng, p, n));
        let v = TestFunction::indicator(random_ball(&mut rng, p, n));
        let m = rng.gen_range(-3..=3);
        let x = random_point(&mut rng, p, n, m, PREC);
        let (ca, cb) = (SymbolicScalar::int(a), SymbolicScalar::s().scale(&rat(b, 1)));
        let combo = u.scale(&ca).plus(&v.scale(&cb)).unwrap();
        prop_assert_eq!(vt(&combo, &x), ca.mul(&vt(&u, &x)).add(&cb.mul(&vt(&v, &x))));
    }

    #[test]
    fn vt_commutes_with_translation((p, n) in space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = TestFunction::indicator(random_ball(&mut rng, p, n));
        let h = random_rationals(&mut rng, p, n, -2);
        let m = rng.gen_range(-3..=3);
        let x = random_point(&mut rng, p, n, m, PREC);
        prop_assert_eq!(vt(&u.translate(&h).unwrap(), &shift_point(&x, &h)), vt(&u, &x));
    }

    #[test]
    fn vt_is_homogeneous_of_degree_alpha((p, n) in space(), seed in any::<u64>(), k in -2i64..=2) {
        // v(x) = u(p^k x)  =>  D v(x) = p^{−kα} (D u)(p^k x) = s^k (D u)(p^k x)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_ball(&mut rng, p, n);
        let u = TestFunction::indicator(b.clone());
        let scaled: Vec<BigRational> = b.center_rationals().iter().map(|c| c * rat_pow(p, -k)).collect();
        let v = TestFunction::indicator(Ball::from_rationals(p, &scaled, b.radius_exp() - k).unwrap());
        let m = rng.gen_range(-3..=3);
        let x = random_point(&mut rng, p, n, m, PREC);
        let px: Vec<PAdic> = x.iter().map(|c| c.shift(k)).collect();
        let want = SymbolicScalar::monomial(rat(1, 1), k).mul(&vt(&u, &px));
        prop_assert_eq!(vt(&v, &x), want);
    }

    #[test]
    fn riesz_inverts_vt_on_random_balls((p, n) in space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = TestFunction::indicator(random_ball(&mut rng, p, n))
            .plus(&TestFunction::indicator(random_ball(&mut rng, p, n)).scale(&SymbolicScalar::int(-2)))
            .unwrap();
        let img = vt_image(&u).unwrap();
        let m = rng.gen_range(-3..=3);
        let x = random_point(&mut rng, p, n, m, PREC);
        prop_assert_eq!(riesz_apply_at(&img, &x).unwrap().value, u.evaluate(&x).unwrap());
    }

    #[test]
    fn closed_form_matches_oracle((p, n) in space(), seed in any::<u64>(), t in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_ball(&mut rng, p, n);
        let alpha = t * n as f64;
        let m = rng.gen_range(-3..=3);
        let x = random_point(&mut rng, p, n, m, PREC);
        let u = TestFunction::indicator(b.clone());
        let closed = vt_apply_at(&RadialSum::from_test_function(&u), &x).unwrap().eval_at(alpha, p).unwrap();
        let pieces = [OraclePiece::ball(&b, 1.0)];
        let oracle = shell_sum_oracle(&pieces, p, n, &x, alpha, OracleKernel::Vt, 1e-15).unwrap().value;
        prop_assert!(agrees(closed, oracle, 1e-12), "{} vs {}", closed, oracle);
        let riesz = riesz_apply_at(&RadialSum::from_test_function(&u), &x).unwrap().eval_at(alpha, p).unwrap();
        let oracle = shell_sum_oracle(&pieces, p, n, &x, alpha, OracleKernel::Riesz, 1e-15).unwrap().value;
        prop_assert!(agrees(riesz, oracle, 1e-12), "{} vs {}", riesz, oracle);
    }

    #[test]
    fn kelvin_identity_on_random_balls((p, n) in space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = TestFunction::indicator(random_ball(&mut rng, p, n));
        let m = rng.gen_range(-3..=3);
        let x = random_point(&mut rng, p, n, m, PREC);
        let chk = verify_kelvin_identity(&ctx(p, n), &u, &x).unwrap();
        prop_assert!(chk.holds(), "residual {}", chk.residual);
    }

    #[test]
    fn extension_field_laws((p, n) in space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = ctx(p, n);
        let mut draw = |rng: &mut ChaCha8Rng| {
            let m = rng.gen_range(-2..=2);
            (m, iso_u(&c, random_point(rng, p, n, m, PREC)).unwrap())
        };
        let ((mx, x), (my, y), (_, z)) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let agree = |a: &ExtElement, b: &ExtElement, v: i64| a.agrees_to(b, v + PREC as i64 - 4);
        let xy = x.mul(&y).unwrap();
        prop_assert!(agree(&xy, &y.mul(&x).unwrap(), -(mx + my)));
        prop_assert!(agree(&xy.mul(&z).unwrap(), &x.mul(&y.mul(&z).unwrap()).unwrap(), -(mx + my) - 2));
        let one = ExtElement::one(c.clone(), PREC);
        prop_assert!(agree(&x.mul(&x.invert().unwrap()).unwrap(), &one, 0));
        let e = |a: &ExtElement| a.abs().normalized.exp.unwrap();
        prop_assert_eq!(e(&xy), e(&x) + e(&y));
        prop_assert_eq!(e(&x), n as i64 * mx);
    }

    #[test]
    fn inversion_is_an_isometric_involution((p, n) in space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = ctx(p, n);
        let m = rng.gen_range(-3..=3);
        let x = random_point(&mut rng, p, n, m, PREC);
        let jx = invert_point(&c, &x).unwrap();
        prop_assert_eq!(max_norm_exp(&jx), Some(-m));
        let back = iso_u(&c, invert_point(&c, &jx).unwrap()).unwrap();
        prop_assert!(back.agrees_to(&iso_u(&c, x).unwrap(), -m + PREC as i64 - 2));
    }

    #[test]
    fn padic_ring_laws(p in prop::sample::select(vec![2u32, 3, 5, 7]), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo_a = rng.gen_range(-3..=3);
        let lo_b = rng.gen_range(-3..=3);
        let a = random_padic(&mut rng, p, lo_a, PREC, true);
        let b = random_padic(&mut rng, p, lo_b, PREC, true);
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.valuation(), Some(lo_a + lo_b));
        let back = a.add(&b).unwrap().sub(&b).unwrap().sub(&a).unwrap();
        prop_assert!(back.valuation().is_none_or(|v| v >= lo_a.min(lo_b) + PREC as i64 - 1));
        let q = ab.mul(&b.invert().unwrap()).unwrap().sub(&a).unwrap();
        prop_assert!(q.valuation().is_none_or(|v| v >= lo_a + PREC as i64 - 1));
    }

    #[test]
    fn fourier_inversion_on_random_functions(p in prop::sample::select(vec![2u32, 3]), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = TestFunction::zero(p, 2);
        for _ in 0..3 {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            // kept small: the round trip expands a ball into up to p^{2n} cells twice
            let r = rng.gen_range(-1..=1);
            let b = Ball::from_rationals(p, &random_rationals(&mut rng, p, 2, 0), r).unwrap();
            f.push(b, c).unwrap();
        }
        let back = inverse_fourier_transform(&fourier_transform(&f).unwrap()).unwrap();
        prop_assert!(max_coeff_diff(&back, &f).unwrap() <= 1e-12);
    }
}
