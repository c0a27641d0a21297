//! Time integration of the isospectral matrix flow Ẇ = (1/ħ_N)[P,W],
//! Δ_N P = W, of the truncated continuous vorticity equation
//! ω̇ = {Δ⁻¹ω, ω}, and of the SU(N) reconstruction Ġ = P G, with the
//! conserved-quantity diagnostics.
//!
//! The matrix integrator is a conjugation midpoint rule: a fixed-point solve
//! for the midpoint stream matrix coupled with W ← Q W Q†, Q the Cayley
//! transform of (dt/2ħ)P̃. Conjugation by the exactly-unitary Q preserves the
//! spectrum of W to solver tolerance, so every spectral invariant is carried
//! along exactly.

use crate::error::{CoreError, Result};
use crate::quant::{unitary_exp, MatrixNormKind, QuantizedBasis, SkewHermitianMatrix};
use crate::sphere::{
    self, inv_laplacian, poisson_bracket, truncate_low, BandlimitedFunction, SobolevKind,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// Matrix vorticity W with its cached stream matrix P = Δ_N⁻¹W.
#[derive(Clone)]
pub struct ZeitlinState {
    pub w: SkewHermitianMatrix,
    pub p: SkewHermitianMatrix,
    pub t: f64,
}

impl ZeitlinState {
    pub fn new(basis: &QuantizedBasis, w: SkewHermitianMatrix, t: f64) -> Result<Self> {
        let w = w.traceless();
        let p = basis.inv_laplacian(&w)?;
        Ok(ZeitlinState { w, p, t })
    }
}

/// Conjugation-midpoint integrator for the matrix flow.
pub struct ZeitlinIntegrator {
    basis: Arc<QuantizedBasis>,
    pub fixed_point_tol: f64,
    pub max_iters: usize,
}

impl ZeitlinIntegrator {
    pub fn new(basis: Arc<QuantizedBasis>) -> Self {
        ZeitlinIntegrator {
            basis,
            fixed_point_tol: 1e-12,
            max_iters: 100,
        }
    }

    /// One step of size dt; spectrum preserved to the fixed-point tolerance,
    /// second-order accurate.
    pub fn step(&self, state: &ZeitlinState, dt: f64) -> Result<ZeitlinState> {
        if dt <= 0.0 {
            return Err(CoreError::Input("dt must be positive".into()));
        }
        let scale = state.w.mat().norm().max(1e-30);
        let mut w_next = state.w.clone();
        let mut residual = f64::INFINITY;
        for _ in 0..self.max_iters {
            let w_mid = state.w.add(&w_next).scale(0.5);
            let p_mid = self.basis.inv_laplacian(&w_mid)?;
            let q = cayley(&p_mid, dt / (2.0 * self.basis.hbar()));
            let updated = &q * state.w.mat() * q.adjoint();
            let updated = SkewHermitianMatrix::skew_part(updated).traceless();
            residual = updated.sub(&w_next).mat().norm() / scale;
            w_next = updated;
            if residual <= self.fixed_point_tol {
                let p = self.basis.inv_laplacian(&w_next)?;
                return Ok(ZeitlinState {
                    w: w_next,
                    p,
                    t: state.t + dt,
                });
            }
        }
        Err(CoreError::SolverDiverged {
            iters: self.max_iters,
            residual,
        })
    }

    /// Integrate n_steps of size dt, returning the final state.
    pub fn run(&self, state: &ZeitlinState, dt: f64, n_steps: usize) -> Result<ZeitlinState> {
        let mut s = state.clone();
        for _ in 0..n_steps {
            s = self.step(&s, dt)?;
        }
        Ok(s)
    }
}

/// Cayley transform (I − εP)⁻¹(I + εP), exactly unitary for skew-Hermitian P.
fn cayley(p: &SkewHermitianMatrix, eps: f64) -> DMatrix<Complex64> {
    let n = p.n();
    let a = p.mat() * Complex64::new(eps, 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let minus = &id - &a;
    let plus = id + a;
    minus
        .lu()
        .solve(&plus)
        .expect("I − εP is invertible for skew-Hermitian P")
}

// ---------------------------------------------------------------------------
// continuous (Galerkin) reference flow
// ---------------------------------------------------------------------------

/// Vorticity ω with its cached stream function ψ = Δ⁻¹ω.
#[derive(Clone)]
pub struct ContinuousState {
    pub omega: BandlimitedFunction,
    pub psi: BandlimitedFunction,
    pub t: f64,
}

impl ContinuousState {
    pub fn new(omega: BandlimitedFunction, t: f64) -> Result<Self> {
        let psi = inv_laplacian(&omega)?;
        Ok(ContinuousState { omega, psi, t })
    }
}

fn vorticity_rhs(omega: &BandlimitedFunction, l_gal: usize) -> Result<BandlimitedFunction> {
    let psi = inv_laplacian(omega)?;
    Ok(truncate_low(&poisson_bracket(&psi, omega), l_gal + 1).with_l_max(l_gal))
}

/// One classical RK4 step of the Galerkin-truncated vorticity equation with
/// cutoff degree l_gal.
pub fn continuous_step(state: &ContinuousState, dt: f64, l_gal: usize) -> Result<ContinuousState> {
    if l_gal < state.omega.trimmed(0.0).l_max() {
        return Err(CoreError::Input(
            "Galerkin cutoff below the band limit of the state".into(),
        ));
    }
    let w0 = state.omega.with_l_max(l_gal);
    let k1 = vorticity_rhs(&w0, l_gal)?;
    let k2 = vorticity_rhs(&(&w0 + &(&k1 * (dt / 2.0))), l_gal)?;
    let k3 = vorticity_rhs(&(&w0 + &(&k2 * (dt / 2.0))), l_gal)?;
    let k4 = vorticity_rhs(&(&w0 + &(&k3 * dt)), l_gal)?;
    let sum = &(&k1 + &(&k2 * 2.0)) + &(&(&k3 * 2.0) + &k4);
    let omega = &w0 + &(&sum * (dt / 6.0));
    ContinuousState::new(omega, state.t + dt)
}

// ---------------------------------------------------------------------------
// conserved quantities
// ---------------------------------------------------------------------------

/// H_N(W) = ½⟨W, −Δ_N⁻¹W⟩_{L²_N}.
pub fn hamiltonian_n(basis: &QuantizedBasis, w: &SkewHermitianMatrix) -> Result<f64> {
    Ok(0.5 * basis.inner(w, w, MatrixNormKind::Hm1N)?)
}

/// k-th spectral Casimir (4π/N)·Σ_j μ_j^k over the spectrum {iμ_j} of W;
/// conserved exactly along isospectral trajectories.
pub fn casimir_n(w: &SkewHermitianMatrix, k: u32) -> f64 {
    let pref = 4.0 * std::f64::consts::PI / w.n() as f64;
    pref * w.spectrum().iter().map(|mu| mu.powi(k as i32)).sum::<f64>()
}

/// H(ω) = −½∫ ω Δ⁻¹ω = ½‖ω‖²_{H⁻¹}.
pub fn hamiltonian_cont(omega: &BandlimitedFunction) -> Result<f64> {
    Ok(0.5 * sphere::inner(omega, omega, SobolevKind::Hm1)?)
}

/// ∫ ω^k by exact quadrature.
pub fn casimir_cont(omega: &BandlimitedFunction, k: u32) -> Result<f64> {
    if !omega.is_real() {
        return Err(CoreError::Domain(
            "Casimirs are defined for real vorticities".into(),
        ));
    }
    let degree = omega.l_max() * k as usize;
    let t = sphere::transform::transform_for(degree.max(1));
    let vals = t.eval_grid(&omega.with_l_max(t.l_max));
    let powed: Vec<Complex64> = vals
        .iter()
        .map(|v| Complex64::new(v.re.powi(k as i32), 0.0))
        .collect();
    Ok(t.integrate(&powed).re)
}

// ---------------------------------------------------------------------------
// SU(N) reconstruction
// ---------------------------------------------------------------------------

/// Flow map G(t) on SU(N) with Ġ = P(t)G.
#[derive(Clone)]
pub struct UnitaryFlow {
    pub g: DMatrix<Complex64>,
    pub t: f64,
}

impl UnitaryFlow {
    pub fn identity(n: usize) -> Self {
        UnitaryFlow {
            g: DMatrix::identity(n, n),
            t: 0.0,
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.g.nrows();
        (self.g.adjoint() * &self.g - DMatrix::<Complex64>::identity(n, n)).norm()
    }

    pub fn det_defect(&self) -> f64 {
        (self.g.determinant() - Complex64::new(1.0, 0.0)).norm()
    }
}

/// Advance G through the sampled stream matrices by the exactly-unitary
/// exponential midpoint update G ← exp(dt·(P_k+P_{k+1})/2)·G; det G stays 1
/// because the stream matrices are traceless.
pub fn reconstruct_flow(p_samples: &[SkewHermitianMatrix], dt: f64) -> Result<UnitaryFlow> {
    let first = p_samples
        .first()
        .ok_or_else(|| CoreError::Input("need at least one stream sample".into()))?;
    let mut flow = UnitaryFlow::identity(first.n());
    for pair in p_samples.windows(2) {
        let p_mid = pair[0].add(&pair[1]).scale(0.5);
        flow.g = unitary_exp(&p_mid, dt) * flow.g;
        flow.t += dt;
    }
    Ok(flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{real_harmonic, RealHarmonicKind};
    use approx::assert_abs_diff_eq;

    fn basis(n: usize) -> Arc<QuantizedBasis> {
        Arc::new(QuantizedBasis::new(n).unwrap())
    }

    fn random_state(basis: &QuantizedBasis, seed: u64, l_max: usize) -> ZeitlinState {
        let f = crate::rng::random_real_bandlimited(seed, l_max);
        let w = basis.project(&f).unwrap();
        ZeitlinState::new(basis, w, 0.0).unwrap()
    }

    #[test]
    fn zonal_and_single_band_states_are_fixed_points() {
        let b = basis(12);
        let integrator = ZeitlinIntegrator::new(b.clone());

        // zonal: p_N of an m = 0 profile is diagonal
        let zonal = &real_harmonic(2, 0, RealHarmonicKind::Zonal)
            + &(&real_harmonic(3, 0, RealHarmonicKind::Zonal) * 0.4);
        let s0 = ZeitlinState::new(&b, b.project(&zonal).unwrap(), 0.0).unwrap();
        let s1 = integrator.run(&s0, 0.05, 40).unwrap();
        assert!(s1.w.sub(&s0.w).mat().norm() < 1e-11);

        // single-l band: P = −W/(l(l+1)) commutes with W
        let mut band = real_harmonic(2, 1, RealHarmonicKind::Cos);
        band = &band + &(&real_harmonic(2, 2, RealHarmonicKind::Sin) * 0.7);
        let s0 = ZeitlinState::new(&b, b.project(&band).unwrap(), 0.0).unwrap();
        let s1 = integrator.run(&s0, 0.05, 40).unwrap();
        assert!(s1.w.sub(&s0.w).mat().norm() < 1e-11);
    }

    #[test]
    fn spectrum_and_energy_are_conserved() {
        let b = basis(16);
        let integrator = ZeitlinIntegrator::new(b.clone());
        let s0 = random_state(&b, 5, 4);
        let spec0 = s0.w.spectrum();
        let h0 = hamiltonian_n(&b, &s0.w).unwrap();
        let c3 = casimir_n(&s0.w, 3);

        let s1 = integrator.run(&s0, 0.01, 200).unwrap();
        let spec1 = s1.w.spectrum();
        let drift = spec0
            .iter()
            .zip(spec1.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(drift < 1e-10, "eigenvalue drift {drift:.3e}");
        assert!((casimir_n(&s1.w, 3) - c3).abs() < 1e-10);
        let h1 = hamiltonian_n(&b, &s1.w).unwrap();
        assert!((h1 - h0).abs() < 1e-9, "energy drift {:.3e}", h1 - h0);
    }

    #[test]
    fn zeitlin_step_is_second_order() {
        let b = basis(12);
        let integrator = ZeitlinIntegrator::new(b.clone());
        let s0 = random_state(&b, 9, 3);
        let t_final = 0.5;
        let err = |dt: f64| {
            let coarse = integrator.run(&s0, dt, (t_final / dt) as usize).unwrap();
            let fine = integrator
                .run(&s0, dt / 2.0, (2.0 * t_final / dt) as usize)
                .unwrap();
            coarse.w.sub(&fine.w).mat().norm()
        };
        let e1 = err(0.05);
        let e2 = err(0.025);
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "observed order {order:.2}");
    }

    #[test]
    fn continuous_rk4_is_fourth_order_and_conservative() {
        let omega = crate::rng::random_real_bandlimited(11, 3);
        let s0 = ContinuousState::new(omega, 0.0).unwrap();
        let l_gal = 8;
        let run = |dt: f64, steps: usize| {
            let mut s = s0.clone();
            for _ in 0..steps {
                s = continuous_step(&s, dt, l_gal).unwrap();
            }
            s
        };
        let e1 = sphere::norm(
            &(&run(0.1, 5).omega - &run(0.05, 10).omega),
            SobolevKind::L2,
        )
        .unwrap();
        let e2 = sphere::norm(
            &(&run(0.05, 10).omega - &run(0.025, 20).omega),
            SobolevKind::L2,
        )
        .unwrap();
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "observed order {order:.2}");

        // conservation over a short window
        let h0 = hamiltonian_cont(&s0.omega).unwrap();
        let c2 = casimir_cont(&s0.omega, 2).unwrap();
        let s_end = run(0.01, 100);
        assert!((hamiltonian_cont(&s_end.omega).unwrap() - h0).abs() < 1e-10);
        assert!((casimir_cont(&s_end.omega, 2).unwrap() - c2).abs() < 1e-9);

        // zonal initial data is stationary
        let zonal = real_harmonic(2, 0, RealHarmonicKind::Zonal);
        let sz = ContinuousState::new(zonal.clone(), 0.0).unwrap();
        let sz_end = {
            let mut s = sz;
            for _ in 0..20 {
                s = continuous_step(&s, 0.05, 6).unwrap();
            }
            s
        };
        let diff = &sz_end.omega - &zonal.with_l_max(sz_end.omega.l_max());
        assert!(sphere::norm(&diff, SobolevKind::L2).unwrap() < 1e-13);
    }

    #[test]
    fn single_band_is_stationary_for_the_continuous_flow() {
        let mut band = real_harmonic(3, 1, RealHarmonicKind::Cos);
        band = &band + &(&real_harmonic(3, 3, RealHarmonicKind::Sin) * 0.6);
        let s0 = ContinuousState::new(band.clone(), 0.0).unwrap();
        let mut s = s0;
        for _ in 0..20 {
            s = continuous_step(&s, 0.05, 7).unwrap();
        }
        let diff = &s.omega - &band.with_l_max(s.omega.l_max());
        assert!(sphere::norm(&diff, SobolevKind::L2).unwrap() < 1e-12);
    }

    #[test]
    fn diagnostics_reference_values() {
        let b = basis(10);
        // unit-norm single 𝒴_{2,0} mode: H_N = ½·1/6
        let w = b
            .project(&real_harmonic(2, 0, RealHarmonicKind::Zonal))
            .unwrap();
        let nrm = b.norm(&w, MatrixNormKind::L2N).unwrap();
        assert_abs_diff_eq!(nrm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hamiltonian_n(&b, &w).unwrap(), 1.0 / 12.0, epsilon = 1e-12);

        // |C_{N,2}| = ‖W‖²_{L²_N}
        let w = random_state(&b, 23, 3).w;
        let c2 = casimir_n(&w, 2);
        let l2 = b.norm(&w, MatrixNormKind::L2N).unwrap();
        assert_abs_diff_eq!(c2.abs(), l2 * l2, epsilon = 1e-10);

        // mean-zero vorticity: C_1 = 0
        let omega = crate::rng::random_real_bandlimited(3, 3);
        assert!(casimir_cont(&omega, 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reconstruction_flows() {
        let b = basis(8);
        // P ≡ 0 keeps G = I
        let zeros: Vec<_> = (0..5).map(|_| SkewHermitianMatrix::zeros(8)).collect();
        let flow = reconstruct_flow(&zeros, 0.1).unwrap();
        assert!(flow.unitarity_defect() < 1e-14);
        assert!((flow.g.clone() - DMatrix::<Complex64>::identity(8, 8)).norm() < 1e-14);

        // constant P: G(1) = exp(P), compared against a Taylor oracle
        let p = b
            .inv_laplacian(&crate::rng::random_su_matrix(4, 8))
            .unwrap();
        let n_steps = 10;
        let dt = 1.0 / n_steps as f64;
        let samples: Vec<_> = (0..=n_steps).map(|_| p.clone()).collect();
        let flow = reconstruct_flow(&samples, dt).unwrap();
        let oracle = expm_taylor(p.mat());
        assert!((flow.g.clone() - oracle).norm() < 1e-11);
        assert!(flow.unitarity_defect() < 1e-12);
        assert!(flow.det_defect() < 1e-11);
    }

    /// Scaling-and-squaring Taylor exponential, independent of the spectral
    /// path used by the implementation.
    fn expm_taylor(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = a.nrows();
        let norm = a.norm();
        let squarings = norm.log2().ceil().max(0.0) as u32 + 3;
        let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
        let mut term = DMatrix::<Complex64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / Complex64::new(k as f64, 0.0);
            sum += &term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        let mut out = sum;
        for _ in 0..squarings {
            out = &out * &out;
        }
        out
    }
}
