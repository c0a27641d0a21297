//! Desk-scale convergence checks of the quantization layer: the norm lemma,
//! the two-sided spectral-norm bound, the approximation axioms, and the
//! short-time agreement of the two flows. The full-size sweeps live in the
//! harness acceptance suite.

use std::sync::Arc;
use zeitlin_core::dynamics::{continuous_step, ContinuousState, ZeitlinIntegrator, ZeitlinState};
use zeitlin_core::quant::{bracket_scaled, MatrixNormKind, QuantizedBasis};
use zeitlin_core::report::fit_convergence_rate;
use zeitlin_core::rng::random_real_bandlimited;
use zeitlin_core::sphere::{
    inner, norm, poisson_bracket, sup_norm_grid, truncate_high, truncate_low, BandlimitedFunction,
    SobolevKind,
};
use zeitlin_core::{hbar, sphere};

/// A function with a controlled high-l tail: modes up to l_max with
/// coefficients ∝ 1/(l(l+1))^decay.
fn tail_function(seed: u64, l_max: usize, decay: f64) -> BandlimitedFunction {
    let base = random_real_bandlimited(seed, l_max);
    base.scaled_by_degree(|l| {
        if l == 0 {
            0.0
        } else {
            ((l * (l + 1)) as f64).powf(1.0 - decay) // base already carries 1/(l(l+1))
        }
    })
}

#[test]
fn norm_convergence_is_exact_below_the_cutoff() {
    let f = random_real_bandlimited(201, 3);
    let g = random_real_bandlimited(202, 3);
    for n in [8usize, 16] {
        let basis = QuantizedBasis::new(n).unwrap();
        let pf = basis.project(&f).unwrap();
        let pg = basis.project(&g).unwrap();
        for (mk, sk) in [
            (MatrixNormKind::L2N, SobolevKind::L2),
            (MatrixNormKind::H1N, SobolevKind::H1),
            (MatrixNormKind::Hm1N, SobolevKind::Hm1),
        ] {
            let lhs = basis.inner(&pf, &pg, mk).unwrap();
            let rhs = inner(&f, &g, sk).unwrap();
            assert!(
                (lhs - rhs).abs() < 1e-12,
                "N={n} {mk:?}: |{lhs} - {rhs}| not exact"
            );
        }
    }
}

#[test]
fn norm_convergence_tail_obeys_the_sobolev_bound() {
    // s = 2: |⟨p_Nf,p_Ng⟩_kind_N − ⟨f,g⟩_kind| ≤ 2 ħ^{s+q} ‖f‖_{H²}‖g‖_{H²}
    let l_max = 24;
    let f = tail_function(31, l_max, 1.6);
    let g = tail_function(32, l_max, 1.6);
    let hf = norm(&f, SobolevKind::Hs(2.0)).unwrap();
    let hg = norm(&g, SobolevKind::Hs(2.0)).unwrap();
    for n in [8usize, 12, 16] {
        let basis = QuantizedBasis::new(n).unwrap();
        let pf = basis.project(&f).unwrap();
        let pg = basis.project(&g).unwrap();
        let h = hbar(n);
        for (mk, sk, extra) in [
            (MatrixNormKind::L2N, SobolevKind::L2, 0i32),
            (MatrixNormKind::Hm1N, SobolevKind::Hm1, 1),
            (MatrixNormKind::H1N, SobolevKind::H1, -1),
        ] {
            let lhs = basis.inner(&pf, &pg, mk).unwrap();
            let rhs = inner(&f, &g, sk).unwrap();
            let bound = 2.0 * h.powi(2 + extra) * hf * hg;
            assert!(
                (lhs - rhs).abs() <= bound,
                "N={n} {mk:?}: diff {:.3e} > bound {bound:.3e}",
                (lhs - rhs).abs()
            );
        }
    }
}

#[test]
fn two_sided_spectral_norm_bound() {
    let f = random_real_bandlimited(41, 3);
    let sup = sup_norm_grid(&f, 400, 400);
    let ns = [8usize, 16, 32];
    let mut cs = Vec::new();
    for &n in &ns {
        let basis = QuantizedBasis::new(n).unwrap();
        let pf = basis.project(&f).unwrap();
        let op = basis.norm(&pf, MatrixNormKind::LinfN).unwrap();
        // upper half: ‖p_N f‖_{L∞_N} ≤ ‖f‖_{L∞} (grid sup is a lower
        // estimate of the true sup, so allow its resolution error)
        assert!(op <= sup * (1.0 + 1e-4), "N={n}: {op} > {sup}");
        cs.push((sup - op) / hbar(n));
    }
    // lower half: a single fitted c keeps ‖f‖_∞ − c·ħ_N below the norm
    let c = cs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    for (&n, _) in ns.iter().zip(cs.iter()) {
        let basis = QuantizedBasis::new(n).unwrap();
        let pf = basis.project(&f).unwrap();
        let op = basis.norm(&pf, MatrixNormKind::LinfN).unwrap();
        assert!(op >= sup - c * hbar(n) - 1e-12);
    }
}

#[test]
fn bracket_convergence_rate_midscale() {
    // Two views of ‖[p_Nf,p_Ng]_N − p_N{f,g}‖_{L∞_N}. With ħ_N = 2/(N−1)
    // the residual is O(ħ) and err/ħ_N stays within a narrow band (the sharp
    // bound); with the representation scale ħ̃ the band-limited residual is
    // pure quantization error and decays at a full power more.
    let f = random_real_bandlimited(51, 3);
    let g = random_real_bandlimited(52, 3);
    let br = poisson_bracket(&f, &g);
    let ns = [8usize, 16, 32, 48];
    let mut xs = Vec::new();
    let mut errs = Vec::new();
    let mut errs_rep = Vec::new();
    for &n in &ns {
        let basis = QuantizedBasis::with_limit(n, f.l_max() + g.l_max()).unwrap();
        let pf = basis.project(&f).unwrap();
        let pg = basis.project(&g).unwrap();
        let rhs = basis.project(&br).unwrap();
        let lhs = bracket_scaled(&pf, &pg, basis.hbar()).unwrap();
        errs.push(basis.norm(&lhs.sub(&rhs), MatrixNormKind::LinfN).unwrap());
        let lhs_rep = bracket_scaled(&pf, &pg, zeitlin_core::hbar_rep(n)).unwrap();
        errs_rep.push(
            basis
                .norm(&lhs_rep.sub(&rhs), MatrixNormKind::LinfN)
                .unwrap(),
        );
        xs.push(hbar(n));
    }
    // sharp bound: err/ħ_N bounded by a single constant across the sweep
    let ratios: Vec<f64> = xs.iter().zip(&errs).map(|(x, e)| e / x).collect();
    let spread = ratios.iter().cloned().fold(0.0f64, f64::max)
        / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread <= 3.0, "ratio spread {spread:.2}");
    // rate: at least first order, cleanly visible at the representation scale
    let fit = fit_convergence_rate(&xs, &errs_rep).unwrap();
    assert!(
        fit.slope >= 0.9,
        "bracket convergence slope {:.3}",
        fit.slope
    );
    let fit_paper = fit_convergence_rate(&xs, &errs).unwrap();
    assert!(
        fit_paper.slope >= 0.6,
        "paper-scale slope collapsed: {:.3}",
        fit_paper.slope
    );
}

#[test]
fn l_alpha_axiom_distances() {
    // axiom (1): vanishing distance of projections forces equality, tested
    // through the exactness of the embedding on band-limited pairs
    let f = random_real_bandlimited(61, 3);
    let g = random_real_bandlimited(62, 3);
    let target = {
        let d = &f - &g;
        norm(&d, SobolevKind::L2).unwrap()
    };
    for n in [8usize, 16, 32] {
        let basis = QuantizedBasis::new(n).unwrap();
        let pf = basis.project(&f).unwrap();
        let pg = basis.project(&g).unwrap();
        let dn = basis.norm(&pf.sub(&pg), MatrixNormKind::L2N).unwrap();
        assert!(
            (dn - target).abs() < 1e-12,
            "d_N should equal ‖f−g‖ exactly below the cutoff"
        );
    }
    // so d_N → 0 over the sweep implies ‖f−g‖_{L²} = 0 for band-limited pairs
}

#[test]
fn truncation_tail_bound() {
    // ‖Π_N f‖²_{L²} ≤ (2ħ_N)^s ‖f‖²_{Hs}-type control, specialized to g = f
    let f = tail_function(71, 32, 1.5);
    let s = 2.0;
    let hs = norm(&f, SobolevKind::Hs(s)).unwrap();
    for n in [8usize, 16] {
        let tail = truncate_high(&f, n);
        let t = inner(&tail, &tail, SobolevKind::L2).unwrap();
        let bound = 2.0 * hbar(n).powf(s) * hs * hs;
        assert!(t <= bound, "N={n}: tail {t:.3e} > bound {bound:.3e}");
        // split identity
        let lo = truncate_low(&f, n);
        let back = &lo + &tail;
        let diff = &back - &f;
        assert!(norm(&diff, SobolevKind::L2).unwrap() == 0.0);
    }
}

#[test]
fn curvature_terms_converge_individually() {
    // each of the four terms of C_N tracks its continuous counterpart at
    // first order, independent of cancellations in the total
    use zeitlin_core::curvature::curvature_convergence_sweep;
    let f = random_real_bandlimited(42, 3);
    let g = random_real_bandlimited(43, 3);
    let rows = curvature_convergence_sweep(&f, &g, &[8, 16, 32, 64]).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r.hbar).collect();
    for term in 1..=4 {
        let errs: Vec<f64> = rows.iter().map(|r| r.errors[term]).collect();
        let fit = fit_convergence_rate(&xs, &errs).unwrap();
        assert!(
            fit.slope >= 0.9,
            "term {term} slope {:.3} below 0.9 ({errs:?})",
            fit.slope
        );
    }
}

#[test]
fn jacobi_generator_consistency_residual_is_order_hbar() {
    // ‖Λ_N p_N ξ − p_N L ξ‖_{L²_N} ≤ α·ħ_N with a single fitted α across
    // the sweep, for a fixed band-limited pair and stationary base flow
    use zeitlin_core::jacobi::{
        ContJacobiGenerator, ContJacobiState, QuantJacobiGenerator, QuantJacobiState,
        STATIONARITY_TOL,
    };
    use zeitlin_core::sphere::{real_harmonic, RealHarmonicKind};

    let omega0 = real_harmonic(2, 0, RealHarmonicKind::Zonal);
    let xi = ContJacobiState::new(
        random_real_bandlimited(91, 3),
        random_real_bandlimited(92, 3),
    )
    .unwrap();
    // l_ref large enough that L ξ is computed without truncation
    let gen = ContJacobiGenerator::new(&omega0, 8, STATIONARITY_TOL).unwrap();
    let l_xi = gen.apply(&ContJacobiState {
        upsilon: xi.upsilon.with_l_max(8),
        zeta: xi.zeta.with_l_max(8),
    });

    let mut alphas = Vec::new();
    for n in [9usize, 17, 33, 65] {
        let basis = std::sync::Arc::new(QuantizedBasis::new(n).unwrap());
        let gen_n = QuantJacobiGenerator::new(
            basis.clone(),
            basis.project(&omega0).unwrap(),
            STATIONARITY_TOL,
        )
        .unwrap();
        let q = QuantJacobiState {
            y: basis.project(&xi.upsilon).unwrap(),
            z: basis.project(&xi.zeta).unwrap(),
        };
        let applied = gen_n.apply(&q).unwrap();
        let dy = applied.y.sub(&basis.project(&l_xi.upsilon).unwrap());
        let dz = applied.z.sub(&basis.project(&l_xi.zeta).unwrap());
        let residual = (basis.inner(&dy, &dy, MatrixNormKind::L2N).unwrap()
            + basis.inner(&dz, &dz, MatrixNormKind::L2N).unwrap())
        .sqrt();
        alphas.push(residual / hbar(n));
    }
    let spread = alphas.iter().cloned().fold(0.0f64, f64::max)
        / alphas.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        spread <= 3.0,
        "consistency ratio spread {spread:.2} ({alphas:?})"
    );
}

#[test]
fn short_time_flows_agree_as_n_grows() {
    // ‖ι_N W(t) − ω_gal(t)‖_{L²} decreases with N at fixed t
    let omega0 = random_real_bandlimited(81, 3);
    let t_final = 0.5;
    let dt = 0.01;
    let steps = (t_final / dt) as usize;
    let l_gal = 16;
    let mut cont = ContinuousState::new(omega0.clone(), 0.0).unwrap();
    for _ in 0..steps {
        cont = continuous_step(&cont, dt, l_gal).unwrap();
    }
    let mut errors = Vec::new();
    for n in [8usize, 16, 32] {
        let basis = Arc::new(QuantizedBasis::new(n).unwrap());
        let integrator = ZeitlinIntegrator::new(basis.clone());
        let mut state = ZeitlinState::new(&basis, basis.project(&omega0).unwrap(), 0.0).unwrap();
        for _ in 0..steps {
            state = integrator.step(&state, dt).unwrap();
        }
        let embedded = basis.embed(&state.w).unwrap();
        let l = embedded.l_max().max(cont.omega.l_max());
        let diff = &embedded.with_l_max(l) - &cont.omega.with_l_max(l);
        errors.push(sphere::norm(&diff, SobolevKind::L2).unwrap());
    }
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "errors not decreasing: {errors:?}"
    );
}
