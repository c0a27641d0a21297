//! Quantization layer: banded basis matrices T^N_lm built from exact 3j
//! symbols, the projection p_N and embedding ι_N, the quantized Laplacian
//! (eigenbasis action and double-commutator form), rescaled matrix norms,
//! and structure constants.
//!
//! Conventions. With j = (N−1)/2 and spin labels s_r = j − r down the rows,
//!
//!   (T^N_lm)_{rc} = √(N(2l+1)/4π) · (−1)^c · (j  l  j; −s_c  m  s_r),
//!
//! nonzero only on the single matrix diagonal r − c = m. This fixes the
//! orientation so that the generators X^i = p_N x^i satisfy
//! [X¹,X²] = ħ̃ X³ (cyclic) with ħ̃ = 2/√(N²−1), matching {x¹,x²} = x³ on the
//! sphere, and gives the reality pairing (T_lm)† = (−1)^m T_{l,−m} so p_N of
//! real functions is skew-Hermitian.

pub mod structure;

use crate::error::{CoreError, Result};
use crate::sphere::BandlimitedFunction;
use crate::wigner::{HalfInt, WignerTable};
use crate::{hbar, hbar_rep};
use nalgebra::DMatrix;
use num_complex::Complex64;
use once_cell::sync::OnceCell;

const SKEW_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;

/// Anti-Hermitian N×N complex matrix; traceless members live in su(N),
/// the rest in u(N).
#[derive(Clone, Debug, PartialEq)]
pub struct SkewHermitianMatrix {
    mat: DMatrix<Complex64>,
}

impl SkewHermitianMatrix {
    /// Validate skewness (entrywise, tolerance 1e−12 relative) and project
    /// exactly onto the skew-Hermitian part.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(CoreError::Input("matrix must be square".into()));
        }
        let scale = mat.norm().max(1.0);
        let defect = (&mat + mat.adjoint()).norm();
        if defect > SKEW_TOL * scale {
            return Err(CoreError::Domain(format!(
                "matrix is not skew-Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self::skew_part(mat))
    }

    /// (A − A†)/2, no validation.
    pub fn skew_part(mat: DMatrix<Complex64>) -> Self {
        let skew = (&mat - mat.adjoint()) * Complex64::new(0.5, 0.0);
        SkewHermitianMatrix { mat: skew }
    }

    pub fn zeros(n: usize) -> Self {
        SkewHermitianMatrix {
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_mat(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn is_traceless(&self) -> bool {
        self.trace().norm() <= TRACE_TOL * (1.0 + self.mat.norm())
    }

    /// Remove the trace part (projection u(N) → su(N)).
    pub fn traceless(&self) -> Self {
        let n = self.n();
        let shift = self.trace() / n as f64;
        let mut mat = self.mat.clone();
        for i in 0..n {
            mat[(i, i)] -= shift;
        }
        SkewHermitianMatrix { mat }
    }

    pub fn scale(&self, s: f64) -> Self {
        SkewHermitianMatrix {
            mat: &self.mat * Complex64::new(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        SkewHermitianMatrix {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SkewHermitianMatrix {
            mat: &self.mat - &other.mat,
        }
    }

    /// Plain commutator AB − BA (stays skew-Hermitian).
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(CoreError::Dimension {
                expected: self.n(),
                got: other.n(),
            });
        }
        let mat = &self.mat * &other.mat - &other.mat * &self.mat;
        Ok(SkewHermitianMatrix { mat })
    }

    /// Spectrum as the real vector μ with eigenvalues iμ, sorted ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let herm = &self.mat * Complex64::new(0.0, -1.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        let mut mu: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
        mu
    }
}

/// exp(t·A) for skew-Hermitian A, exactly unitary (spectral decomposition);
/// det = 1 exactly when A is traceless.
pub fn unitary_exp(a: &SkewHermitianMatrix, t: f64) -> DMatrix<Complex64> {
    let herm = a.mat() * Complex64::new(0.0, -1.0); // A = iH
    let eig = nalgebra::SymmetricEigen::new(herm);
    let n = a.n();
    let mut core = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        core[(k, k)] = Complex64::from_polar(1.0, t * eig.eigenvalues[k]);
    }
    &eig.eigenvectors * core * eig.eigenvectors.adjoint()
}

/// Largest singular value. Fast path through the spectrum for normal
/// (skew-Hermitian) input, SVD otherwise.
pub fn spectral_norm(mat: &DMatrix<Complex64>) -> f64 {
    let scale = mat.norm();
    if scale == 0.0 {
        return 0.0;
    }
    let defect = (mat + mat.adjoint()).norm();
    if defect <= 1e-13 * scale {
        let herm = mat * Complex64::new(0.0, -1.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        return eig
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    }
    mat.clone().svd(false, false).singular_values[0]
}

/// Norm selector on u(N); L²_N/H¹_N/H⁻¹_N are the rescaled trace forms,
/// L∞_N the operator norm, L¹_N the rescaled eigenvalue-modulus sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixNormKind {
    L2N,
    H1N,
    Hm1N,
    L1N,
    LinfN,
}

/// Precomputed quantized harmonics for one N, stored as real diagonal bands.
///
/// A full basis covers l ≤ N−1; sweeps that only touch low degrees build a
/// partial basis (`with_limit`) and skip the O(N³) construction cost.
pub struct QuantizedBasis {
    n: usize,
    l_limit: usize,
    hbar: f64,
    /// band of T_lm, indexed like the sphere coefficients: l² + l + m
    bands: Vec<Vec<f64>>,
    generators: OnceCell<[SkewHermitianMatrix; 3]>,
}

impl QuantizedBasis {
    /// Full basis (all l ≤ N−1) from exact 3j values.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_limit(n, n - 1)
    }

    /// Partial basis covering l ≤ l_limit only.
    pub fn with_limit(n: usize, l_limit: usize) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::Input("quantization needs N >= 2".into()));
        }
        let l_limit = l_limit.min(n - 1);
        let table = WignerTable::new();
        let tj = (n - 1) as i32; // 2j
        let scale0 = (n as f64 / (4.0 * std::f64::consts::PI)).sqrt();
        let mut bands = Vec::with_capacity((l_limit + 1) * (l_limit + 1));
        for l in 0..=l_limit {
            let scale = scale0 * ((2 * l + 1) as f64).sqrt();
            for m in -(l as i64)..=(l as i64) {
                let len = n - m.unsigned_abs() as usize;
                let mut band = vec![0.0; len];
                for (k, slot) in band.iter_mut().enumerate() {
                    let r = k + m.max(0) as usize;
                    let c = k + (-m).max(0) as usize;
                    let ts_r = tj - 2 * r as i32;
                    let ts_c = tj - 2 * c as i32;
                    let w = table.three_j(
                        HalfInt::from_twice(tj),
                        HalfInt::from_int(l as i32),
                        HalfInt::from_twice(tj),
                        HalfInt::from_twice(-ts_c),
                        HalfInt::from_int(m as i32),
                        HalfInt::from_twice(ts_r),
                    )?;
                    let sign = if c.is_multiple_of(2) { 1.0 } else { -1.0 };
                    *slot = scale * sign * w;
                }
                bands.push(band);
            }
        }
        Ok(QuantizedBasis {
            n,
            l_limit,
            hbar: hbar(n),
            bands,
            generators: OnceCell::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_limit(&self) -> usize {
        self.l_limit
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn band(&self, l: usize, m: i64) -> &[f64] {
        &self.bands[(l * l) + (l as i64 + m) as usize]
    }

    /// Dense T^N_lm (real entries on the r − c = m diagonal).
    pub fn t_matrix(&self, l: usize, m: i64) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (k, &v) in self.band(l, m).iter().enumerate() {
            let r = k + m.max(0) as usize;
            let c = k + (-m).max(0) as usize;
            out[(r, c)] = Complex64::new(v, 0.0);
        }
        out
    }

    /// Coefficients a^{lm} = ⟨iT_lm, A⟩_{L²_N} for l ≤ l_limit, packed like
    /// sphere coefficients.
    pub fn analyze(&self, a: &DMatrix<Complex64>) -> Vec<Complex64> {
        let pref = Complex64::new(0.0, -4.0 * std::f64::consts::PI / self.n as f64);
        let mut out = vec![Complex64::new(0.0, 0.0); (self.l_limit + 1) * (self.l_limit + 1)];
        for l in 0..=self.l_limit {
            for m in -(l as i64)..=(l as i64) {
                let band = self.band(l, m);
                let mut s = Complex64::new(0.0, 0.0);
                for (k, &v) in band.iter().enumerate() {
                    let r = k + m.max(0) as usize;
                    let c = k + (-m).max(0) as usize;
                    s += a[(r, c)] * v;
                }
                out[(l * l) + (l as i64 + m) as usize] = pref * s;
            }
        }
        out
    }

    /// Σ a^{lm} iT_lm.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> DMatrix<Complex64> {
        assert_eq!(coeffs.len(), (self.l_limit + 1) * (self.l_limit + 1));
        let mut out = DMatrix::<Complex64>::zeros(self.n, self.n);
        for l in 0..=self.l_limit {
            for m in -(l as i64)..=(l as i64) {
                let c = coeffs[(l * l) + (l as i64 + m) as usize];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ic = Complex64::new(0.0, 1.0) * c;
                let band = self.band(l, m);
                for (k, &v) in band.iter().enumerate() {
                    let r = k + m.max(0) as usize;
                    let cc = k + (-m).max(0) as usize;
                    out[(r, cc)] += ic * v;
                }
            }
        }
        out
    }

    /// ‖A − Σ⟨iT,A⟩iT‖ relative to ‖A‖: zero when A lies in the span of the
    /// built bands (always, for a full basis and skew-Hermitian A).
    pub fn span_residual(&self, a: &DMatrix<Complex64>) -> f64 {
        let scale = a.norm();
        // numerically-zero matrices (round-off smeared over all bands)
        // count as in-span
        if scale <= 1e-13 {
            return 0.0;
        }
        let back = self.synthesize(&self.analyze(a));
        (a - back).norm() / scale
    }

    /// p_N: discard modes l ≥ N, map 𝒴_lm ↦ iT_lm. Real input required;
    /// lands in u(N), in su(N) iff the input is mean-zero.
    pub fn project(&self, f: &BandlimitedFunction) -> Result<SkewHermitianMatrix> {
        if !f.is_real() {
            return Err(CoreError::Domain(
                "projection is defined for real-valued functions".into(),
            ));
        }
        if f.l_max() > self.l_limit
            && (self.l_limit + 1..=f.l_max().min(self.n - 1))
                .any(|l| (-(l as i64)..=(l as i64)).any(|m| f.at(l, m) != Complex64::new(0.0, 0.0)))
        {
            return Err(CoreError::Input(format!(
                "basis built only to l <= {}, input has modes beyond it",
                self.l_limit
            )));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (self.l_limit + 1) * (self.l_limit + 1)];
        for (l, m, c) in f.iter() {
            if l <= self.l_limit {
                coeffs[(l * l) + (l as i64 + m) as usize] = c;
            }
        }
        let mat = self.synthesize(&coeffs);
        SkewHermitianMatrix::new(mat)
    }

    /// ι_N: recover coefficients through ⟨iT_lm, A⟩_{L²_N}; an isometry for
    /// every matched (Hˢ_N, Hˢ) pair, with ι_N ∘ p_N = truncation below N.
    pub fn embed(&self, a: &SkewHermitianMatrix) -> Result<BandlimitedFunction> {
        if a.n() != self.n {
            return Err(CoreError::Dimension {
                expected: self.n,
                got: a.n(),
            });
        }
        let coeffs = self.analyze(a.mat());
        BandlimitedFunction::from_coeffs(self.l_limit, coeffs)
    }

    /// Quantized coordinate matrices X^i_N = p_N x^i.
    pub fn generators(&self) -> &[SkewHermitianMatrix; 3] {
        self.generators.get_or_init(|| {
            let gens: Vec<SkewHermitianMatrix> = (1..=3)
                .map(|i| {
                    self.project(&crate::sphere::coordinate_function(i))
                        .expect("coordinate functions are real l=1 data")
                })
                .collect();
            gens.try_into().unwrap()
        })
    }

    /// Δ_N through the eigenbasis: mode (l,m) scaled by −l(l+1).
    pub fn laplacian(&self, a: &SkewHermitianMatrix) -> Result<SkewHermitianMatrix> {
        self.scaled_by_degree(a, |l| -((l * (l + 1)) as f64))
    }

    /// Δ_N⁻¹ on su(N) (trace-free input required; spectrum {−l(l+1), l ≥ 1}).
    pub fn inv_laplacian(&self, a: &SkewHermitianMatrix) -> Result<SkewHermitianMatrix> {
        if !a.is_traceless() {
            return Err(CoreError::Domain(
                "inverse quantized Laplacian needs a trace-free matrix".into(),
            ));
        }
        self.scaled_by_degree(a, |l| {
            if l == 0 {
                0.0
            } else {
                -1.0 / ((l * (l + 1)) as f64)
            }
        })
    }

    fn scaled_by_degree(
        &self,
        a: &SkewHermitianMatrix,
        weight: impl Fn(usize) -> f64,
    ) -> Result<SkewHermitianMatrix> {
        if a.n() != self.n {
            return Err(CoreError::Dimension {
                expected: self.n,
                got: a.n(),
            });
        }
        if self.l_limit < self.n - 1 {
            let res = self.span_residual(a.mat());
            if res > 1e-10 {
                return Err(CoreError::Domain(format!(
                    "matrix has components beyond the built bands (residual {res:.3e})"
                )));
            }
        }
        let mut coeffs = self.analyze(a.mat());
        for l in 0..=self.l_limit {
            let w = weight(l);
            for m in -(l as i64)..=(l as i64) {
                coeffs[(l * l) + (l as i64 + m) as usize] *= w;
            }
        }
        Ok(SkewHermitianMatrix::skew_part(self.synthesize(&coeffs)))
    }

    /// ⟨A,B⟩ under the chosen rescaled form (conjugate-linear in A).
    pub fn inner(
        &self,
        a: &SkewHermitianMatrix,
        b: &SkewHermitianMatrix,
        kind: MatrixNormKind,
    ) -> Result<f64> {
        let pref = 4.0 * std::f64::consts::PI / self.n as f64;
        match kind {
            MatrixNormKind::L2N => Ok(pref * (a.mat().adjoint() * b.mat()).trace().re),
            MatrixNormKind::H1N => {
                self.check_h_domain(a, b)?;
                let lb = self.laplacian(b)?;
                Ok(-pref * (a.mat().adjoint() * lb.mat()).trace().re)
            }
            MatrixNormKind::Hm1N => {
                self.check_h_domain(a, b)?;
                let lb = self.inv_laplacian(b)?;
                Ok(-pref * (a.mat().adjoint() * lb.mat()).trace().re)
            }
            MatrixNormKind::L1N => Err(CoreError::Input(
                "L¹_N is a norm, not an inner product".into(),
            )),
            MatrixNormKind::LinfN => Err(CoreError::Input(
                "L∞_N is a norm, not an inner product".into(),
            )),
        }
    }

    pub fn norm(&self, a: &SkewHermitianMatrix, kind: MatrixNormKind) -> Result<f64> {
        match kind {
            MatrixNormKind::LinfN => Ok(spectral_norm(a.mat())),
            MatrixNormKind::L1N => {
                let pref = 4.0 * std::f64::consts::PI / self.n as f64;
                Ok(pref * a.spectrum().iter().map(|mu| mu.abs()).sum::<f64>())
            }
            kind => Ok(self.inner(a, a, kind)?.max(0.0).sqrt()),
        }
    }

    fn check_h_domain(&self, a: &SkewHermitianMatrix, b: &SkewHermitianMatrix) -> Result<()> {
        if !a.is_traceless() || !b.is_traceless() {
            return Err(CoreError::Domain(
                "H-type forms need trace-free matrices".into(),
            ));
        }
        Ok(())
    }
}

/// Rescaled bracket [A,B]_N = (AB − BA)/ħ.
pub fn bracket_scaled(
    a: &SkewHermitianMatrix,
    b: &SkewHermitianMatrix,
    hbar: f64,
) -> Result<SkewHermitianMatrix> {
    Ok(a.commutator(b)?.scale(1.0 / hbar))
}

/// ∇^{⊥,i}_N A = [X^i_N, A]/ħ̃ with the representation scale ħ̃ = 2/√(N²−1),
/// for which p_N ∘ ∇^{⊥,i} = ∇^{⊥,i}_N ∘ p_N holds exactly.
pub fn grad_perp_n(
    basis: &QuantizedBasis,
    i: usize,
    a: &SkewHermitianMatrix,
) -> Result<SkewHermitianMatrix> {
    assert!((1..=3).contains(&i));
    bracket_scaled(&basis.generators()[i - 1], a, hbar_rep(basis.n()))
}

/// Δ_N by the double-commutator form (1/ħ̃²) Σ_i [X^i,[X^i,A]]; agrees with
/// the eigenbasis action to round-off.
pub fn laplacian_commutator(
    basis: &QuantizedBasis,
    a: &SkewHermitianMatrix,
) -> Result<SkewHermitianMatrix> {
    let n = basis.n();
    if a.n() != n {
        return Err(CoreError::Dimension {
            expected: n,
            got: a.n(),
        });
    }
    let scale = ((n * n - 1) as f64) / 4.0; // 1/ħ̃²
    let mut total = SkewHermitianMatrix::zeros(n);
    for x in basis.generators() {
        let inner = x.commutator(a)?;
        total = total.add(&x.commutator(&inner)?);
    }
    Ok(total.scale(scale))
}

/// Strategy interface for the two Δ_N paths, selected by name.
pub trait MatrixLaplacianPath: Send + Sync {
    fn name(&self) -> &'static str;
    fn apply(&self, basis: &QuantizedBasis, a: &SkewHermitianMatrix)
        -> Result<SkewHermitianMatrix>;
    fn apply_inv(
        &self,
        basis: &QuantizedBasis,
        a: &SkewHermitianMatrix,
    ) -> Result<SkewHermitianMatrix>;
}

pub struct EigenbasisLaplacian;

impl MatrixLaplacianPath for EigenbasisLaplacian {
    fn name(&self) -> &'static str {
        "eigenbasis"
    }
    fn apply(
        &self,
        basis: &QuantizedBasis,
        a: &SkewHermitianMatrix,
    ) -> Result<SkewHermitianMatrix> {
        basis.laplacian(a)
    }
    fn apply_inv(
        &self,
        basis: &QuantizedBasis,
        a: &SkewHermitianMatrix,
    ) -> Result<SkewHermitianMatrix> {
        basis.inv_laplacian(a)
    }
}

pub struct CommutatorLaplacian;

impl MatrixLaplacianPath for CommutatorLaplacian {
    fn name(&self) -> &'static str {
        "commutator"
    }
    fn apply(
        &self,
        basis: &QuantizedBasis,
        a: &SkewHermitianMatrix,
    ) -> Result<SkewHermitianMatrix> {
        laplacian_commutator(basis, a)
    }
    fn apply_inv(
        &self,
        _basis: &QuantizedBasis,
        _a: &SkewHermitianMatrix,
    ) -> Result<SkewHermitianMatrix> {
        Err(CoreError::Input(
            "the commutator path has no closed inverse; use the eigenbasis path".into(),
        ))
    }
}

pub fn laplacian_path(name: &str) -> Result<Box<dyn MatrixLaplacianPath>> {
    match name {
        "eigenbasis" => Ok(Box::new(EigenbasisLaplacian)),
        "commutator" => Ok(Box::new(CommutatorLaplacian)),
        other => Err(CoreError::Input(format!(
            "unknown laplacian path '{other}' (available: {})",
            laplacian_path_names().join(", ")
        ))),
    }
}

pub fn laplacian_path_names() -> Vec<&'static str> {
    vec!["eigenbasis", "commutator"]
}
