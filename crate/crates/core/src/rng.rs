//! Seeded test-function generators. Everything is deterministic in the seed
//! so that sweep CSVs reproduce bit-for-bit.

use crate::quant::SkewHermitianMatrix;
use crate::sphere::BandlimitedFunction;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random real band-limited function with mean zero and coefficient
/// magnitudes ∝ 1/(l(l+1)), so all the Sobolev norms used in the estimates
/// stay modest.
pub fn random_real_bandlimited(seed: u64, l_max: usize) -> BandlimitedFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = BandlimitedFunction::zeros(l_max);
    for l in 1..=l_max {
        let scale = 1.0 / ((l * (l + 1)) as f64);
        let c0: f64 = rng.gen_range(-1.0..1.0);
        *f.at_mut(l, 0) = Complex64::new(scale * c0, 0.0);
        for m in 1..=(l as i64) {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            let c = Complex64::new(scale * re, scale * im);
            *f.at_mut(l, m) = c;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *f.at_mut(l, -m) = c.conj() * sign;
        }
    }
    f
}

/// Random element of su(N) with entries O(1).
pub fn random_su_matrix(seed: u64, n: usize) -> SkewHermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5u64.rotate_left(32));
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            mat[(r, c)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    SkewHermitianMatrix::skew_part(mat).traceless()
}
