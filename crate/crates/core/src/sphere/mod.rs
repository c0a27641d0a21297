//! Band-limited real functions on S² and their spectral calculus.
//!
//! Functions are stored as spherical-harmonic coefficients f^{lm} in the
//! orthonormal basis 𝒴_lm (Condon–Shortley). The Laplacian acts diagonally,
//! the Poisson bracket {f,g} = (∂θf ∂φg − ∂φf ∂θg)/sinθ is computed either by
//! exact quadrature (default) or by structure-constant contraction, and the
//! Sobolev inner products weight mode (l,m) by (l(l+1))^s.

pub mod structure;
pub mod transform;

use crate::error::{CoreError, Result};
use num_complex::Complex64;
use std::sync::Arc;
use transform::transform_for;

const MEAN_TOL: f64 = 1e-12;
const REAL_TOL: f64 = 1e-12;

/// Function on S² with finitely many spherical-harmonic modes l ≤ L_max.
#[derive(Clone, Debug, PartialEq)]
pub struct BandlimitedFunction {
    l_max: usize,
    /// packed by idx = l² + l + m
    coeffs: Vec<Complex64>,
}

impl BandlimitedFunction {
    pub fn zeros(l_max: usize) -> Self {
        BandlimitedFunction {
            l_max,
            coeffs: vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)],
        }
    }

    /// Single mode c·𝒴_lm.
    pub fn mode(l: usize, m: i64, c: Complex64) -> Self {
        let mut f = Self::zeros(l);
        *f.at_mut(l, m) = c;
        f
    }

    pub fn from_coeffs(l_max: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != (l_max + 1) * (l_max + 1) {
            return Err(CoreError::Input(format!(
                "coefficient vector length {} does not match L_max {}",
                coeffs.len(),
                l_max
            )));
        }
        Ok(BandlimitedFunction { l_max, coeffs })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn idx(l: usize, m: i64) -> usize {
        (l * l) + (l as i64 + m) as usize
    }

    pub fn at(&self, l: usize, m: i64) -> Complex64 {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[Self::idx(l, m)]
        }
    }

    pub fn at_mut(&mut self, l: usize, m: i64) -> &mut Complex64 {
        assert!(
            l <= self.l_max && m.unsigned_abs() as usize <= l,
            "mode ({l},{m}) out of range"
        );
        &mut self.coeffs[Self::idx(l, m)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        (0..=self.l_max).flat_map(move |l| {
            (-(l as i64)..=(l as i64)).map(move |m| (l, m, self.coeffs[Self::idx(l, m)]))
        })
    }

    /// Copy into a (possibly larger) band limit.
    pub fn with_l_max(&self, l_max: usize) -> Self {
        let mut out = Self::zeros(l_max);
        for (l, m, c) in self.iter() {
            if l <= l_max {
                *out.at_mut(l, m) = c;
            }
        }
        out
    }

    /// Smallest band limit that keeps all non-negligible modes.
    pub fn trimmed(&self, tol: f64) -> Self {
        let mut top = 0;
        for (l, _, c) in self.iter() {
            if c.norm() > tol {
                top = top.max(l);
            }
        }
        self.with_l_max(top)
    }

    /// Multiply each mode by a per-degree factor.
    pub fn scaled_by_degree(&self, weight: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for l in 0..=out.l_max {
            let w = weight(l);
            for m in -(l as i64)..=(l as i64) {
                out.coeffs[Self::idx(l, m)] *= w;
            }
        }
        out
    }

    pub fn mean_coefficient(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[0].norm() <= MEAN_TOL * (1.0 + self.l2_scale())
    }

    /// coeffs[l,−m] = (−1)^m conj(coeffs[l,m]) up to tolerance.
    pub fn is_real(&self) -> bool {
        self.real_defect() <= REAL_TOL * (1.0 + self.l2_scale())
    }

    pub fn real_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..=self.l_max {
            for m in 0..=(l as i64) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let d = self.at(l, -m) - self.at(l, m).conj() * sign;
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Project onto the real-valued subspace.
    pub fn symmetrized_real(&self) -> Self {
        let mut out = self.clone();
        for l in 0..=self.l_max {
            for m in 0..=(l as i64) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let a = self.at(l, m);
                let b = self.at(l, -m).conj() * sign;
                let avg = (a + b) / 2.0;
                *out.at_mut(l, m) = avg;
                *out.at_mut(l, -m) = avg.conj() * sign;
            }
        }
        out
    }

    fn l2_scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

macro_rules! pointwise_op {
    ($trait:ident, $fn:ident, $op:tt) => {
        impl std::ops::$trait<&BandlimitedFunction> for &BandlimitedFunction {
            type Output = BandlimitedFunction;
            fn $fn(self, rhs: &BandlimitedFunction) -> BandlimitedFunction {
                let l_max = self.l_max.max(rhs.l_max);
                let mut out = BandlimitedFunction::zeros(l_max);
                for (l, m, c) in self.iter() {
                    *out.at_mut(l, m) = c;
                }
                for (l, m, c) in rhs.iter() {
                    let cur = *out.at_mut(l, m);
                    *out.at_mut(l, m) = cur $op c;
                }
                out
            }
        }
    };
}

pointwise_op!(Add, add, +);
pointwise_op!(Sub, sub, -);

impl std::ops::Mul<f64> for &BandlimitedFunction {
    type Output = BandlimitedFunction;
    fn mul(self, rhs: f64) -> BandlimitedFunction {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= rhs;
        }
        out
    }
}

impl std::ops::Mul<Complex64> for &BandlimitedFunction {
    type Output = BandlimitedFunction;
    fn mul(self, rhs: Complex64) -> BandlimitedFunction {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= rhs;
        }
        out
    }
}

/// Sobolev inner-product selector; Hˢ weighs mode (l,m) by (l(l+1))^s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SobolevKind {
    L2,
    H1,
    Hm1,
    Hs(f64),
}

impl SobolevKind {
    pub fn weight(self, l: usize) -> f64 {
        let ev = (l * (l + 1)) as f64;
        match self {
            SobolevKind::L2 => 1.0,
            SobolevKind::H1 => ev,
            SobolevKind::Hm1 => {
                if l == 0 {
                    0.0
                } else {
                    1.0 / ev
                }
            }
            SobolevKind::Hs(s) => {
                if l == 0 {
                    if s == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ev.powf(s)
                }
            }
        }
    }

    fn needs_mean_zero(self) -> bool {
        !matches!(self, SobolevKind::L2)
    }
}

// ---------------------------------------------------------------------------
// spectral operators
// ---------------------------------------------------------------------------

/// Δf: multiplies mode (l,m) by −l(l+1).
pub fn laplacian(f: &BandlimitedFunction) -> BandlimitedFunction {
    f.scaled_by_degree(|l| -((l * (l + 1)) as f64))
}

/// Δ⁻¹f on mean-zero functions: multiplies mode (l,m) by −1/(l(l+1)).
pub fn inv_laplacian(f: &BandlimitedFunction) -> Result<BandlimitedFunction> {
    if !f.is_mean_zero() {
        return Err(CoreError::Domain(
            "inverse Laplacian needs a mean-zero function".into(),
        ));
    }
    let mut out = f.scaled_by_degree(|l| {
        if l == 0 {
            0.0
        } else {
            -1.0 / ((l * (l + 1)) as f64)
        }
    });
    *out.at_mut(0, 0) = Complex64::new(0.0, 0.0);
    Ok(out)
}

/// Modes with l ≤ n−1 (the band kept by the projection p_n).
pub fn truncate_low(f: &BandlimitedFunction, n: usize) -> BandlimitedFunction {
    let mut out = BandlimitedFunction::zeros(f.l_max());
    for (l, m, c) in f.iter() {
        if l < n {
            *out.at_mut(l, m) = c;
        }
    }
    out
}

/// Modes with l ≥ n (the tail projection Π_n); truncate_low + truncate_high = id.
pub fn truncate_high(f: &BandlimitedFunction, n: usize) -> BandlimitedFunction {
    let mut out = BandlimitedFunction::zeros(f.l_max());
    for (l, m, c) in f.iter() {
        if l >= n {
            *out.at_mut(l, m) = c;
        }
    }
    out
}

/// ⟨f,g⟩ under the chosen Sobolev weight (conjugate-linear in f); real for
/// real-valued inputs.
pub fn inner(f: &BandlimitedFunction, g: &BandlimitedFunction, kind: SobolevKind) -> Result<f64> {
    Ok(inner_c(f, g, kind)?.re)
}

pub fn inner_c(
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    kind: SobolevKind,
) -> Result<Complex64> {
    if kind.needs_mean_zero() && (!f.is_mean_zero() || !g.is_mean_zero()) {
        return Err(CoreError::Domain(format!(
            "{kind:?} inner product needs mean-zero inputs"
        )));
    }
    let l_top = f.l_max().min(g.l_max());
    let mut total = Complex64::new(0.0, 0.0);
    for l in 0..=l_top {
        let w = kind.weight(l);
        if w == 0.0 {
            continue;
        }
        for m in -(l as i64)..=(l as i64) {
            total += f.at(l, m).conj() * g.at(l, m) * w;
        }
    }
    Ok(total)
}

pub fn norm(f: &BandlimitedFunction, kind: SobolevKind) -> Result<f64> {
    Ok(inner(f, f, kind)?.max(0.0).sqrt())
}

/// Pointwise value Σ f^{lm} 𝒴_lm(θ,φ); real part (imaginary residue is
/// ≤ 1e−12 for real-valued inputs).
pub fn sph_eval(f: &BandlimitedFunction, theta: f64, phi: f64) -> f64 {
    sph_eval_c(f, theta, phi).re
}

pub fn sph_eval_c(f: &BandlimitedFunction, theta: f64, phi: f64) -> Complex64 {
    let plm = transform::normalized_plm(f.l_max(), theta.cos());
    let mut total = Complex64::new(0.0, 0.0);
    for (l, m, c) in f.iter() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let ma = m.unsigned_abs() as usize;
        let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
        let p = plm[l * (l + 1) / 2 + ma];
        total += c * sign * p * Complex64::from_polar(1.0, m as f64 * phi);
    }
    total
}

/// Dense-grid estimate of ‖f‖_{L∞} (a lower bound that converges from below).
pub fn sup_norm_grid(f: &BandlimitedFunction, n_theta: usize, n_phi: usize) -> f64 {
    let mut sup: f64 = 0.0;
    for k in 0..n_theta {
        let theta = std::f64::consts::PI * (k as f64 + 0.5) / n_theta as f64;
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            sup = sup.max(sph_eval_c(f, theta, phi).norm());
        }
    }
    sup
}

/// Euclidean coordinate functions x¹, x², x³ restricted to the unit sphere,
/// as exact l = 1 combinations.
pub fn coordinate_function(i: usize) -> BandlimitedFunction {
    let mut f = BandlimitedFunction::zeros(1);
    let c = (2.0 * std::f64::consts::PI / 3.0).sqrt();
    match i {
        1 => {
            *f.at_mut(1, -1) = Complex64::new(c, 0.0);
            *f.at_mut(1, 1) = Complex64::new(-c, 0.0);
        }
        2 => {
            *f.at_mut(1, -1) = Complex64::new(0.0, c);
            *f.at_mut(1, 1) = Complex64::new(0.0, c);
        }
        3 => {
            *f.at_mut(1, 0) = Complex64::new((4.0 * std::f64::consts::PI / 3.0).sqrt(), 0.0);
        }
        _ => panic!("coordinate index must be 1, 2 or 3"),
    }
    f
}

/// ∇^{⊥,i} f = {x^i, f}.
pub fn grad_perp(i: usize, f: &BandlimitedFunction) -> BandlimitedFunction {
    poisson_bracket(&coordinate_function(i), f)
}

// ---------------------------------------------------------------------------
// Poisson bracket
// ---------------------------------------------------------------------------

/// {f,g} by the default (quadrature) backend; exact for band-limited inputs.
pub fn poisson_bracket(f: &BandlimitedFunction, g: &BandlimitedFunction) -> BandlimitedFunction {
    quadrature_bracket(f, g)
}

fn quadrature_bracket(f: &BandlimitedFunction, g: &BandlimitedFunction) -> BandlimitedFunction {
    let degree = f.l_max() + g.l_max();
    let t = transform_for(degree);
    let (ft, fp) = t.eval_grad_grid(&f.with_l_max(degree));
    let (gt, gp) = t.eval_grad_grid(&g.with_l_max(degree));
    let mut values = vec![Complex64::new(0.0, 0.0); ft.len()];
    let n_phi = t.n_phi;
    for k in 0..t.n_theta {
        let inv_sin = 1.0 / t.sin_theta()[k];
        for j in 0..n_phi {
            let idx = k * n_phi + j;
            values[idx] = (ft[idx] * gp[idx] - fp[idx] * gt[idx]) * inv_sin;
        }
    }
    t.forward(&values, degree)
}

/// A Poisson bracket with one argument frozen: the fixed side's gradients are
/// precomputed on the grid, so repeated applications (e.g. inside linear
/// generators) cost a single field evaluation plus a forward transform.
pub struct FrozenBracket {
    transform: Arc<transform::SphericalTransform>,
    fixed_dtheta: Vec<Complex64>,
    fixed_dphi: Vec<Complex64>,
    degree: usize,
}

impl FrozenBracket {
    /// Bracket {fixed, ·} able to take arguments up to degree `arg_l_max`.
    pub fn new(fixed: &BandlimitedFunction, arg_l_max: usize) -> Self {
        let degree = fixed.l_max() + arg_l_max;
        let t = transform_for(degree);
        let (fixed_dtheta, fixed_dphi) = t.eval_grad_grid(&fixed.with_l_max(degree));
        FrozenBracket {
            transform: t,
            fixed_dtheta,
            fixed_dphi,
            degree,
        }
    }

    /// {fixed, g}, truncated to `l_out`.
    pub fn apply(&self, g: &BandlimitedFunction, l_out: usize) -> BandlimitedFunction {
        let t = &self.transform;
        let (gt, gp) = t.eval_grad_grid(&g.with_l_max(self.degree.min(t.l_max)));
        let mut values = vec![Complex64::new(0.0, 0.0); gt.len()];
        for k in 0..t.n_theta {
            let inv_sin = 1.0 / t.sin_theta()[k];
            for j in 0..t.n_phi {
                let idx = k * t.n_phi + j;
                values[idx] =
                    (self.fixed_dtheta[idx] * gp[idx] - self.fixed_dphi[idx] * gt[idx]) * inv_sin;
            }
        }
        t.forward(&values, l_out.min(t.l_max))
    }
}

/// Strategy interface for the bracket backends (selected by name at runtime).
pub trait BracketBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn bracket(
        &self,
        f: &BandlimitedFunction,
        g: &BandlimitedFunction,
    ) -> Result<BandlimitedFunction>;
}

/// Default backend: pointwise x·(∇f×∇g) on an exact quadrature grid followed
/// by a forward transform. Convention-independent, serves as the sign oracle.
pub struct QuadratureBracket;

impl BracketBackend for QuadratureBracket {
    fn name(&self) -> &'static str {
        "quadrature"
    }

    fn bracket(
        &self,
        f: &BandlimitedFunction,
        g: &BandlimitedFunction,
    ) -> Result<BandlimitedFunction> {
        Ok(quadrature_bracket(f, g))
    }
}

/// Cross-validation backend: contraction against the closed-form structure
/// constants of the harmonic basis.
pub struct StructureConstantBracket {
    table: structure::ContStructureTable,
}

impl StructureConstantBracket {
    pub fn new() -> Self {
        StructureConstantBracket {
            table: structure::ContStructureTable::new(),
        }
    }
}

impl Default for StructureConstantBracket {
    fn default() -> Self {
        Self::new()
    }
}

impl BracketBackend for StructureConstantBracket {
    fn name(&self) -> &'static str {
        "structure-constants"
    }

    fn bracket(
        &self,
        f: &BandlimitedFunction,
        g: &BandlimitedFunction,
    ) -> Result<BandlimitedFunction> {
        let degree = f.l_max() + g.l_max();
        let mut out = BandlimitedFunction::zeros(degree);
        for (la, ma, ca) in f.iter() {
            if la == 0 || ca == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (lb, mb, cb) in g.iter() {
                if lb == 0 || cb == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mc = ma + mb;
                let lo = la.abs_diff(lb).max(mc.unsigned_abs() as usize).max(1);
                for lc in lo..=(la + lb) {
                    let k = self.table.bracket_coefficient(la, ma, lb, mb, lc)?;
                    if k != Complex64::new(0.0, 0.0) {
                        *out.at_mut(lc, mc) += k * ca * cb;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Look up a bracket backend by registered name.
pub fn bracket_backend(name: &str) -> Result<Box<dyn BracketBackend>> {
    match name {
        "quadrature" => Ok(Box::new(QuadratureBracket)),
        "structure-constants" => Ok(Box::new(StructureConstantBracket::new())),
        other => Err(CoreError::Input(format!(
            "unknown bracket backend '{other}' (available: {})",
            bracket_backend_names().join(", ")
        ))),
    }
}

pub fn bracket_backend_names() -> Vec<&'static str> {
    vec!["quadrature", "structure-constants"]
}

// ---------------------------------------------------------------------------
// real harmonic combinations
// ---------------------------------------------------------------------------

/// Real L²-orthonormal combinations of 𝒴_{l,±m}; the building blocks for
/// real-valued test planes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RealHarmonicKind {
    Zonal,
    Cos,
    Sin,
}

/// √2·Re 𝒴_lm (Cos), √2·Im 𝒴_lm (Sin), or 𝒴_l0 (Zonal); unit L² norm.
pub fn real_harmonic(l: usize, m: usize, kind: RealHarmonicKind) -> BandlimitedFunction {
    let mut f = BandlimitedFunction::zeros(l);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let inv = 1.0 / 2f64.sqrt();
    match kind {
        RealHarmonicKind::Zonal => {
            assert!(m == 0, "zonal means m = 0");
            *f.at_mut(l, 0) = Complex64::new(1.0, 0.0);
        }
        RealHarmonicKind::Cos => {
            assert!(m >= 1 && m <= l);
            *f.at_mut(l, m as i64) = Complex64::new(inv, 0.0);
            *f.at_mut(l, -(m as i64)) = Complex64::new(sign * inv, 0.0);
        }
        RealHarmonicKind::Sin => {
            assert!(m >= 1 && m <= l);
            *f.at_mut(l, m as i64) = Complex64::new(0.0, -inv);
            *f.at_mut(l, -(m as i64)) = Complex64::new(0.0, sign * inv);
        }
    }
    f
}
