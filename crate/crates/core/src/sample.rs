//! Seeded random points with finite expansions.

use num_rational::BigRational;
use rand::Rng;

use crate::padic::PAdic;
use crate::schwartz::{exact_padic, Ball};

/// Random digits at positions `lo, …, lo + len − 1`; the digit at `lo` is
/// nonzero when `lead_nonzero`.
pub fn random_padic<R: Rng + ?Sized>(rng: &mut R, p: u32, lo: i64, len: usize, lead_nonzero: bool) -> PAdic {
    let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..p)).collect();
    if lead_nonzero {
        digits[0] = rng.gen_range(1..p);
    }
    match digits.iter().position(|&d| d != 0) {
        None => PAdic::zero(p, lo + len as i64),
        Some(i) => PAdic::from_digits(p, lo + i as i64, digits[i..].to_vec()).expect("valid digits"),
    }
}

/// Uniform-ish point with `‖x‖ = p^{norm_exp}`, known modulo `p^{len − norm_exp}`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, p: u32, n: usize, norm_exp: i64, len: usize) -> Vec<PAdic> {
    let lead = rng.gen_range(0..n);
    (0..n).map(|j| random_padic(rng, p, -norm_exp, len, j == lead)).collect()
}

/// Point of `ball`, known modulo `p^{r + len}`.
pub fn random_point_in_ball<R: Rng + ?Sized>(rng: &mut R, ball: &Ball, len: usize) -> Vec<PAdic> {
    let p = ball.prime();
    let r = ball.radius_exp();
    let abs = r + len as i64;
    ball.center_rationals()
        .iter()
        .map(|c| {
            let h = random_padic(rng, p, r, len, false).to_rational();
            let x: BigRational = c + h;
            exact_padic(&x, p, abs).expect("prime checked by ball")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::max_norm_exp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norms_and_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in -3..=3 {
            let x = random_point(&mut rng, 3, 2, m, 10);
            assert_eq!(max_norm_exp(&x), Some(m));
        }
        let b = Ball::from_ints(2, &[1, 3], 2).unwrap();
        for _ in 0..20 {
            assert!(b.contains(&random_point_in_ball(&mut rng, &b, 12)).unwrap());
        }
    }
}
