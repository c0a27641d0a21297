//! Property checks for the bracket algebra, the Wigner symbols, and the
//! interchangeable bracket backends.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use zeitlin_core::rng::random_real_bandlimited;
use zeitlin_core::sphere::{
    bracket_backend, grad_perp, inner, laplacian, norm, poisson_bracket, BandlimitedFunction,
    SobolevKind,
};
use zeitlin_core::wigner::{six_j, three_j, HalfInt, SqrtRational};

fn rand_f(seed: u64, l_max: usize) -> BandlimitedFunction {
    random_real_bandlimited(seed, l_max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_is_bilinear_antisymmetric(seed in 0u64..1_000_000) {
        let f = rand_f(seed, 4);
        let g = rand_f(seed ^ 0xabcd, 4);
        let h = rand_f(seed ^ 0x1234, 4);

        // antisymmetry
        let fg = poisson_bracket(&f, &g);
        let gf = poisson_bracket(&g, &f);
        let anti = &fg + &gf;
        prop_assert!(norm(&anti, SobolevKind::L2).unwrap() < 1e-11);

        // linearity in the first slot
        let lin = &poisson_bracket(&(&f + &(&h * 0.7)), &g) - &(&fg + &(&poisson_bracket(&h, &g) * 0.7));
        prop_assert!(norm(&lin, SobolevKind::L2).unwrap() < 1e-11);

        // Jacobi identity
        let mut cyc = poisson_bracket(&f, &poisson_bracket(&g, &h));
        cyc = &cyc + &poisson_bracket(&g, &poisson_bracket(&h, &f));
        cyc = &cyc + &poisson_bracket(&h, &poisson_bracket(&f, &g));
        prop_assert!(norm(&cyc, SobolevKind::L2).unwrap() < 1e-10);
    }

    #[test]
    fn bracket_biinvariance_and_h1_estimate(seed in 0u64..1_000_000) {
        let f = rand_f(seed, 4);
        let g = rand_f(seed ^ 0x77, 4);
        let h = rand_f(seed ^ 0x3333, 4);

        // ⟨{f,g}, h⟩_{L²} = ⟨f, {g,h}⟩_{L²}
        let lhs = inner(&poisson_bracket(&f, &g), &h, SobolevKind::L2).unwrap();
        let rhs = inner(&f, &poisson_bracket(&g, &h), SobolevKind::L2).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));

        // ‖{f,g}‖_{L²} ≤ ‖f‖_{H¹}‖g‖_{H¹}
        let b = norm(&poisson_bracket(&f, &g), SobolevKind::L2).unwrap();
        let bound = norm(&f, SobolevKind::H1).unwrap() * norm(&g, SobolevKind::H1).unwrap();
        prop_assert!(b <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn laplacian_leibniz_identity(seed in 0u64..1_000_000) {
        // Δ{f,g} = {Δf,g} + {f,Δg} + 2 Σ_i {∇^{⊥,i}f, ∇^{⊥,i}g}
        let f = rand_f(seed, 3);
        let g = rand_f(seed ^ 0x9e3779b9, 3);
        let lhs = laplacian(&poisson_bracket(&f, &g));
        let mut rhs = &poisson_bracket(&laplacian(&f), &g) + &poisson_bracket(&f, &laplacian(&g));
        for i in 1..=3 {
            rhs = &rhs + &(&poisson_bracket(&grad_perp(i, &f), &grad_perp(i, &g)) * 2.0);
        }
        let diff = &lhs - &rhs;
        let scale = 1.0 + norm(&lhs, SobolevKind::L2).unwrap();
        prop_assert!(norm(&diff, SobolevKind::L2).unwrap() < 1e-10 * scale);
    }

    #[test]
    fn backends_agree(seed in 0u64..1_000_000) {
        let f = rand_f(seed, 3);
        let g = rand_f(seed ^ 0x5555, 3);
        let quad = bracket_backend("quadrature").unwrap().bracket(&f, &g).unwrap();
        let structural = bracket_backend("structure-constants").unwrap().bracket(&f, &g).unwrap();
        let diff = &quad - &structural;
        prop_assert!(norm(&diff, SobolevKind::L2).unwrap() < 1e-10);
    }

    #[test]
    fn sobolev_inner_symmetry(seed in 0u64..1_000_000) {
        let f = rand_f(seed, 4);
        let g = rand_f(seed ^ 0xeeee, 4);
        for kind in [SobolevKind::L2, SobolevKind::H1, SobolevKind::Hm1] {
            let a = inner(&f, &g, kind).unwrap();
            let b = inner(&g, &f, kind).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }
}

// ---------------------------------------------------------------------------
// exact Wigner properties
// ---------------------------------------------------------------------------

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

/// Admissible random 3j arguments in doubled units.
fn admissible_3j(seed: u64, max_tj: i32) -> ([i32; 3], [i32; 3]) {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut next = |bound: i32| -> i32 {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) as i32).rem_euclid(bound)
    };
    loop {
        let tj1 = next(max_tj);
        let tj2 = next(max_tj);
        let lo = (tj1 - tj2).abs();
        let hi = tj1 + tj2;
        if lo > hi {
            continue;
        }
        let tj3 = lo + 2 * next((hi - lo) / 2 + 1);
        let tm1 = -tj1 + 2 * next(tj1 + 1);
        let tm2 = -tj2 + 2 * next(tj2 + 1);
        let tm3 = -(tm1 + tm2);
        if tm3.abs() <= tj3 && (tj3 - tm3) % 2 == 0 {
            return ([tj1, tj2, tj3], [tm1, tm2, tm3]);
        }
    }
}

fn exact_3j(tj: [i32; 3], tm: [i32; 3]) -> SqrtRational {
    three_j(h(tj[0]), h(tj[1]), h(tj[2]), h(tm[0]), h(tm[1]), h(tm[2])).unwrap()
}

#[test]
fn three_j_permutation_symmetries_exact() {
    for seed in 0..60u64 {
        let (tj, tm) = admissible_3j(seed, 20);
        let base = exact_3j(tj, tm);
        let j_sum = (tj[0] + tj[1] + tj[2]) / 2;
        let parity = if j_sum % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };

        // even (cyclic) permutation leaves the value unchanged, exactly
        let cyc = exact_3j([tj[1], tj[2], tj[0]], [tm[1], tm[2], tm[0]]);
        assert_eq!(base.signed_sq(), cyc.signed_sq());

        // odd permutation multiplies by (−1)^J
        let swapped = exact_3j([tj[1], tj[0], tj[2]], [tm[1], tm[0], tm[2]]);
        assert_eq!(&parity * base.signed_sq(), swapped.signed_sq());

        // negating every m multiplies by (−1)^J
        let negated = exact_3j(tj, [-tm[0], -tm[1], -tm[2]]);
        assert_eq!(parity * base.signed_sq(), negated.signed_sq());
    }
}

#[test]
fn three_j_orthogonality_exact() {
    // Σ_{m1,m2 | m1+m2 = −m3} (2j3+1)·3j(...)² = 1 for each fixed m3,
    // in exact rational arithmetic
    for (tj1, tj2, tj3) in [(4, 4, 6), (3, 5, 4), (2, 2, 4), (5, 5, 2)] {
        for tm3 in (-tj3..=tj3).step_by(2) {
            let mut total = BigRational::zero();
            for tm1 in (-tj1..=tj1).step_by(2) {
                let tm2: i32 = -tm3 - tm1;
                if tm2.abs() > tj2 {
                    continue;
                }
                let v = exact_3j([tj1, tj2, tj3], [tm1, tm2, tm3]);
                total += v.signed_sq().abs();
            }
            let weight = BigRational::from_integer(BigInt::from(tj3 + 1));
            assert_eq!(
                weight * total,
                BigRational::one(),
                "triple ({tj1},{tj2},{tj3}), 2m3 = {tm3}"
            );
        }
    }
}

#[test]
fn six_j_column_permutation_exact() {
    let cases = [
        ([4, 6, 8], [6, 4, 6]),
        ([2, 4, 4], [4, 2, 4]),
        ([6, 6, 6], [6, 6, 6]),
        ([3, 5, 4], [5, 3, 4]),
    ];
    for (top, bottom) in cases {
        let base = six_j(
            h(top[0]),
            h(top[1]),
            h(top[2]),
            h(bottom[0]),
            h(bottom[1]),
            h(bottom[2]),
        )
        .unwrap();
        // swap columns 1 and 2
        let swapped = six_j(
            h(top[1]),
            h(top[0]),
            h(top[2]),
            h(bottom[1]),
            h(bottom[0]),
            h(bottom[2]),
        )
        .unwrap();
        assert_eq!(base.signed_sq(), swapped.signed_sq());
        // cyclic
        let cyc = six_j(
            h(top[1]),
            h(top[2]),
            h(top[0]),
            h(bottom[1]),
            h(bottom[2]),
            h(bottom[0]),
        )
        .unwrap();
        assert_eq!(base.signed_sq(), cyc.signed_sq());
        // exchange upper/lower in two columns
        let flipped = six_j(
            h(bottom[0]),
            h(bottom[1]),
            h(top[2]),
            h(top[0]),
            h(top[1]),
            h(bottom[2]),
        )
        .unwrap();
        assert_eq!(base.signed_sq(), flipped.signed_sq());
    }
}

#[test]
fn float_view_matches_high_precision_at_large_j() {
    // spins up to 2j = 256 (the N = 128 basis band entries live here)
    let mut checked = 0;
    for seed in 0..40u64 {
        let (tj, tm) = admissible_3j(seed * 7 + 1, 256);
        let v = exact_3j(tj, tm);
        let fast = v.to_f64();
        let precise = v.to_f64_prec(256);
        let scale = precise.abs().max(1e-30);
        assert!(
            (fast - precise).abs() <= 1e-13 * scale.max(1.0),
            "({tj:?};{tm:?}): {fast:e} vs {precise:e}"
        );
        if precise.abs() > 0.0 {
            checked += 1;
        }
    }
    assert!(checked > 20);
}
