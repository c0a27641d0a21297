//! The `verify` subcommand: the lemma-level property battery at one N.
//! Each check prints a PASS/FAIL line; the command exits nonzero if any
//! check fails.

use crate::config::VerifyConfig;
use crate::sweeps::{LabError, LabResult};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;
use zeitlin_core::curvature::{
    sectional_curvature_cont, sectional_curvature_cont_l2, sectional_curvature_milnor_cont,
    sectional_curvature_milnor_quant, sectional_curvature_quant, RealBasisIndex,
};
use zeitlin_core::dynamics::{hamiltonian_n, ZeitlinIntegrator, ZeitlinState};
use zeitlin_core::jacobi::{
    growth_constant, is_stationary_cont, is_stationary_quant, jacobi_scheme, resolvent_residual,
    ContJacobiGenerator, ContJacobiState, QuantJacobiGenerator, QuantJacobiState, STATIONARITY_TOL,
};
use zeitlin_core::quant::{
    bracket_scaled, grad_perp_n, laplacian_commutator, laplacian_path, MatrixNormKind,
    QuantizedBasis, SkewHermitianMatrix,
};
use zeitlin_core::rng::{random_real_bandlimited, random_su_matrix};
use zeitlin_core::sphere::{
    bracket_backend, coordinate_function, grad_perp, inner, laplacian, norm, poisson_bracket,
    real_harmonic, sup_norm_grid, RealHarmonicKind, SobolevKind,
};
use zeitlin_core::wigner::{three_j, HalfInt};
use zeitlin_core::{hbar, hbar_rep};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

fn bound_check(name: &'static str, value: f64, bound: f64) -> Check {
    check(
        name,
        value <= bound,
        format!("{value:.3e} (tolerance {bound:.1e})"),
    )
}

/// Run the battery; returns all checks (the caller prints and aggregates).
pub fn run_battery(cfg: &VerifyConfig) -> LabResult<Vec<Check>> {
    let n = cfg.n;
    if n < 8 {
        return Err(LabError::Config("verify needs N >= 8".into()));
    }
    let seed = cfg.seed;
    let mut checks = Vec::new();
    let basis = Arc::new(QuantizedBasis::new(n)?);
    let f = random_real_bandlimited(seed, 3);
    let g = random_real_bandlimited(seed + 1, 3);

    // Wigner selection rules and a symmetry spot check
    {
        let z1 = three_j(
            HalfInt::from_int(1),
            HalfInt::from_int(1),
            HalfInt::from_int(1),
            HalfInt::from_int(0),
            HalfInt::from_int(0),
            HalfInt::from_int(0),
        )?;
        let z2 = three_j(
            HalfInt::from_int(2),
            HalfInt::from_int(1),
            HalfInt::from_int(1),
            HalfInt::from_int(1),
            HalfInt::from_int(0),
            HalfInt::from_int(0),
        )?;
        checks.push(check(
            "wigner selection-rule zeros",
            z1.is_zero() && z2.is_zero(),
            "odd perimeter and m-sum violations give exact zeros".into(),
        ));
    }

    // basis orthonormality and reality pairing
    {
        let probe = [(1usize, 0i64), (2, 1), (3, -2), (3, 3)];
        let mut ortho: f64 = 0.0;
        for &(l1, m1) in &probe {
            for &(l2, m2) in &probe {
                let t1 = basis.t_matrix(l1, m1);
                let t2 = basis.t_matrix(l2, m2);
                let ip = 4.0 * std::f64::consts::PI / n as f64 * (t1.adjoint() * &t2).trace();
                let expect = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                ortho = ortho.max((ip - Complex64::new(expect, 0.0)).norm());
            }
        }
        checks.push(bound_check("quantized basis orthonormality", ortho, 1e-12));

        let mut pairing: f64 = 0.0;
        for &(l, m) in &[(2usize, 1i64), (3, 2)] {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            pairing = pairing.max(
                (basis.t_matrix(l, m).adjoint()
                    - basis.t_matrix(l, -m) * Complex64::new(sign, 0.0))
                .norm(),
            );
        }
        checks.push(bound_check(
            "reality pairing (T_lm)† = (−1)^m T_{l,−m}",
            pairing,
            1e-12,
        ));
    }

    // projection/embedding
    {
        let w = basis.project(&f)?;
        let back = basis.embed(&w)?;
        let diff = &back - &f.with_l_max(back.l_max());
        checks.push(bound_check(
            "embed ∘ project = low truncation",
            norm(&diff, SobolevKind::L2)?,
            1e-12,
        ));
        let iso = (basis.norm(&w, MatrixNormKind::L2N)? - norm(&f, SobolevKind::L2)?).abs();
        checks.push(bound_check("embedding isometry (L²)", iso, 1e-12));
    }

    // generator algebra
    {
        let x = basis.generators();
        let hb = hbar_rep(n);
        let mut worst: f64 = 0.0;
        for (a, b, c) in [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)] {
            let br = x[a].commutator(&x[b])?.scale(1.0 / hb);
            worst = worst.max(br.sub(&x[c]).mat().norm());
        }
        checks.push(bound_check("so(3) generator brackets", worst, 1e-11));

        let mut sq = DMatrix::<Complex64>::zeros(n, n);
        for xi in x {
            sq += xi.mat() * xi.mat();
        }
        let defect = (sq + DMatrix::<Complex64>::identity(n, n)).norm();
        checks.push(bound_check("Σ (X^i)² = −I", defect, 1e-11));
    }

    // p_N-relatedness
    {
        let mut worst: f64 = 0.0;
        for i in 1..=3 {
            let lhs = basis.project(&grad_perp(i, &f).symmetrized_real())?;
            let rhs = grad_perp_n(&basis, i, &basis.project(&f)?)?;
            worst = worst.max(lhs.sub(&rhs).mat().norm() / rhs.mat().norm().max(1e-30));
        }
        checks.push(bound_check("p_N-relatedness of ∇^⊥", worst, 1e-10));
    }

    // the two Laplacian paths
    {
        let a = random_su_matrix(seed + 11, n);
        let eig = laplacian_path("eigenbasis")?.apply(&basis, &a)?;
        let com = laplacian_path("commutator")?.apply(&basis, &a)?;
        let rel = eig.sub(&com).mat().norm() / eig.mat().norm();
        checks.push(bound_check(
            "Δ_N eigenbasis vs double-commutator",
            rel,
            1e-10,
        ));
        let back = basis.inv_laplacian(&eig)?;
        checks.push(bound_check(
            "Δ_N⁻¹ inverts Δ_N on su(N)",
            back.sub(&a).mat().norm() / a.mat().norm(),
            1e-11,
        ));
    }

    // Leibniz identities on both sides
    {
        let fa = random_su_matrix(seed + 21, n);
        let fb = random_su_matrix(seed + 22, n);
        let lhs = basis.laplacian(&fa.commutator(&fb)?)?;
        let mut rhs = basis
            .laplacian(&fa)?
            .commutator(&fb)?
            .add(&fa.commutator(&basis.laplacian(&fb)?)?);
        for i in 1..=3 {
            rhs = rhs.add(
                &grad_perp_n(&basis, i, &fa)?
                    .commutator(&grad_perp_n(&basis, i, &fb)?)?
                    .scale(2.0),
            );
        }
        checks.push(bound_check(
            "Δ_N commutator Leibniz identity",
            lhs.sub(&rhs).mat().norm() / lhs.mat().norm(),
            1e-10,
        ));

        let lhs = laplacian(&poisson_bracket(&f, &g));
        let mut rhs = &poisson_bracket(&laplacian(&f), &g) + &poisson_bracket(&f, &laplacian(&g));
        for i in 1..=3 {
            rhs = &rhs + &(&poisson_bracket(&grad_perp(i, &f), &grad_perp(i, &g)) * 2.0);
        }
        let rel = norm(&(&lhs - &rhs), SobolevKind::L2)? / norm(&lhs, SobolevKind::L2)?;
        checks.push(bound_check(
            "Δ bracket Leibniz identity (sphere)",
            rel,
            1e-10,
        ));
    }

    // five-norm lemma on seeded random matrices
    {
        let sqrt4pi = (4.0 * std::f64::consts::PI).sqrt();
        let mut violations = 0usize;
        for k in 0..100u64 {
            let a = random_su_matrix(seed + 1000 + k, n);
            let b = random_su_matrix(seed + 2000 + k, n);
            let l2 = basis.norm(&a, MatrixNormKind::L2N)?;
            let tol = 1e-12 * (1.0 + l2);
            if basis.norm(&a, MatrixNormKind::Hm1N)? > l2 / 2f64.sqrt() + tol {
                violations += 1;
            }
            if basis.norm(&basis.inv_laplacian(&a)?, MatrixNormKind::L2N)? > l2 / 2.0 + tol {
                violations += 1;
            }
            if basis.norm(&basis.laplacian(&a)?, MatrixNormKind::L2N)?
                > (n * (n + 1)) as f64 * l2 + tol
            {
                violations += 1;
            }
            let l1 = basis.norm(&a, MatrixNormKind::L1N)?;
            let linf = basis.norm(&a, MatrixNormKind::LinfN)?;
            if l1 > sqrt4pi * l2 + tol || sqrt4pi * l2 > sqrt4pi * sqrt4pi * linf + tol {
                violations += 1;
            }
            let ip = basis.inner(&a, &b, MatrixNormKind::L2N)?;
            if ip.abs() > linf * basis.norm(&b, MatrixNormKind::L1N)? + tol {
                violations += 1;
            }
        }
        checks.push(check(
            "five-norm lemma (100 seeded matrices)",
            violations == 0,
            format!("{violations} violations"),
        ));
    }

    // bracket backends agree
    {
        let quad = bracket_backend("quadrature")?.bracket(&f, &g)?;
        let structural = bracket_backend("structure-constants")?.bracket(&f, &g)?;
        checks.push(bound_check(
            "bracket backends agree",
            norm(&(&quad - &structural), SobolevKind::L2)?,
            1e-10,
        ));
    }

    // continuous bracket algebra
    {
        let h = random_real_bandlimited(seed + 2, 3);
        let mut cyc = poisson_bracket(&f, &poisson_bracket(&g, &h));
        cyc = &cyc + &poisson_bracket(&g, &poisson_bracket(&h, &f));
        cyc = &cyc + &poisson_bracket(&h, &poisson_bracket(&f, &g));
        checks.push(bound_check(
            "Jacobi identity",
            norm(&cyc, SobolevKind::L2)?,
            1e-10,
        ));
        let bi = (inner(&poisson_bracket(&f, &g), &h, SobolevKind::L2)?
            - inner(&f, &poisson_bracket(&g, &h), SobolevKind::L2)?)
        .abs();
        checks.push(bound_check("L² bi-invariance", bi, 1e-11));
        let so3 = {
            let x = [
                coordinate_function(1),
                coordinate_function(2),
                coordinate_function(3),
            ];
            let mut worst: f64 = 0.0;
            for (a, b, c) in [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)] {
                let d = &poisson_bracket(&x[a], &x[b]) - &x[c];
                worst = worst.max(norm(&d, SobolevKind::L2)?);
            }
            worst
        };
        checks.push(bound_check("{x^i, x^j} = ε_ijk x^k", so3, 1e-12));
    }

    // norm convergence is exact below the cutoff
    {
        let pf = basis.project(&f)?;
        let pg = basis.project(&g)?;
        let mut worst: f64 = 0.0;
        for (mk, sk) in [
            (MatrixNormKind::L2N, SobolevKind::L2),
            (MatrixNormKind::H1N, SobolevKind::H1),
            (MatrixNormKind::Hm1N, SobolevKind::Hm1),
        ] {
            worst = worst.max((basis.inner(&pf, &pg, mk)? - inner(&f, &g, sk)?).abs());
        }
        checks.push(bound_check(
            "inner products exact below cutoff",
            worst,
            1e-12,
        ));
    }

    // two-sided spectral-norm bound (upper half)
    {
        let sup = sup_norm_grid(&f, 300, 300);
        let op = basis.norm(&basis.project(&f)?, MatrixNormKind::LinfN)?;
        checks.push(check(
            "‖p_N f‖_{L∞_N} ≤ ‖f‖_{L∞}",
            op <= sup * (1.0 + 1e-4),
            format!("{op:.6} vs sup {sup:.6}"),
        ));
    }

    // bracket consistency at this N
    {
        let pf = basis.project(&f)?;
        let pg = basis.project(&g)?;
        let lhs = bracket_scaled(&pf, &pg, hbar(n))?;
        let rhs = basis.project(&poisson_bracket(&f, &g))?;
        let err = basis.norm(&lhs.sub(&rhs), MatrixNormKind::LinfN)?;
        checks.push(check(
            "bracket error is O(ħ_N)",
            err <= hbar(n),
            format!("{err:.3e} at ħ = {:.3e}", hbar(n)),
        ));
        let com = laplacian_commutator(&basis, &pf)?;
        let eig = basis.laplacian(&pf)?;
        checks.push(bound_check(
            "Hoppe–Yau form matches on projected data",
            com.sub(&eig).mat().norm() / eig.mat().norm(),
            1e-11,
        ));
    }

    // stationary families and conservation
    {
        let zonal = real_harmonic(2, 0, RealHarmonicKind::Zonal);
        let (ok_c, res_c) = is_stationary_cont(&zonal, STATIONARITY_TOL)?;
        let w = basis.project(&zonal)?;
        let (ok_q, res_q) = is_stationary_quant(&basis, &w, STATIONARITY_TOL)?;
        checks.push(check(
            "zonal stationarity on both sides",
            ok_c && ok_q,
            format!("residuals {res_c:.1e} / {res_q:.1e}"),
        ));

        let integrator = ZeitlinIntegrator::new(basis.clone());
        let state = ZeitlinState::new(&basis, basis.project(&f)?, 0.0)?;
        let spec0 = state.w.spectrum();
        let h0 = hamiltonian_n(&basis, &state.w)?;
        let end = integrator.run(&state, 1e-2, 100)?;
        let drift = end
            .w
            .spectrum()
            .iter()
            .zip(spec0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        checks.push(bound_check("isospectrality over 100 steps", drift, 1e-10));
        checks.push(bound_check(
            "energy conservation over 100 steps",
            (hamiltonian_n(&basis, &end.w)? - h0).abs(),
            1e-8,
        ));
    }

    // Jacobi structure
    {
        let zonal = real_harmonic(2, 0, RealHarmonicKind::Zonal);
        let gen =
            QuantJacobiGenerator::new(basis.clone(), basis.project(&zonal)?, STATIONARITY_TOL)?;
        let state = QuantJacobiState {
            y: basis.project(&f)?,
            z: SkewHermitianMatrix::zeros(n),
        };
        let traj = jacobi_scheme("strang")?.evolve_quant(&gen, &state, 0.05, 20)?;
        let iso = (traj[0].l2_norm(&basis) - traj.last().unwrap().l2_norm(&basis)).abs();
        checks.push(bound_check(
            "exact-transport isometry (coupling off)",
            iso,
            1e-12,
        ));

        let cont_gen = ContJacobiGenerator::new(&zonal, 12, STATIONARITY_TOL)?;
        let xi = ContJacobiState::new(f.clone(), g.clone())?;
        let c = growth_constant(&zonal)?;
        let dt = 0.01;
        let traj = jacobi_scheme("rk4")?.evolve_cont(&cont_gen, &xi, dt, 100)?;
        let n0 = traj[0].l2_norm();
        let ok = traj
            .iter()
            .enumerate()
            .all(|(k, s)| s.l2_norm() <= (c * (k as f64 * dt)).exp() * (1.0 + 10.0 * dt * dt) * n0);
        checks.push(check(
            "semigroup growth bound",
            ok,
            format!("c = {c:.3}, 100 steps"),
        ));

        if n >= 16 {
            let r_half = resolvent_residual(&zonal, &xi, 2.0 * c, n / 2, 16)?;
            let r_full = resolvent_residual(&zonal, &xi, 2.0 * c, n, 16)?;
            checks.push(check(
                "resolvent consistency improves N/2 → N",
                r_full < r_half,
                format!("{r_half:.3e} → {r_full:.3e}"),
            ));
        }
    }

    // curvature routes
    {
        let c_ff = sectional_curvature_cont(&f, &f)?;
        checks.push(bound_check("C(f,f) = 0", c_ff.abs(), 1e-11));
        let a = sectional_curvature_cont(&f, &g)?;
        let b = sectional_curvature_cont_l2(&f, &g)?;
        checks.push(bound_check(
            "H¹ and L² curvature routes agree",
            (a - b).abs() / (1.0 + a.abs()),
            1e-9,
        ));
        let ia = RealBasisIndex {
            l: 1,
            m: 1,
            kind: RealHarmonicKind::Cos,
        };
        let ib = RealBasisIndex {
            l: 2,
            m: 1,
            kind: RealHarmonicKind::Sin,
        };
        let milnor = sectional_curvature_milnor_cont(ia, ib)?;
        let direct = sectional_curvature_cont(&ia.function(), &ib.function())?;
        checks.push(bound_check(
            "Milnor route agrees (continuous)",
            (milnor - direct).abs(),
            1e-8,
        ));
        let pf = basis.project(&ia.function())?;
        let pg = basis.project(&ib.function())?;
        let milnor_n = sectional_curvature_milnor_quant(&basis, ia, ib)?;
        let direct_n = sectional_curvature_quant(&basis, &pf, &pg)?;
        checks.push(bound_check(
            "Milnor route agrees (quantized)",
            (milnor_n - direct_n).abs(),
            1e-8,
        ));
    }

    Ok(checks)
}
