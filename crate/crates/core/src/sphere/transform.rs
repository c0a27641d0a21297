//! Gauss–Legendre × uniform-φ product grids and the naive (table-driven)
//! spherical-harmonic transform.
//!
//! Grids are sized so that every integral taken here is *exact* for the
//! polynomial degrees that arise from band-limited operands: a transform
//! built for degree L integrates products of total degree ≤ 2L exactly.
//! That makes the quadrature path an oracle rather than an approximation.

use super::BandlimitedFunction;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Gauss–Legendre nodes and weights on [−1, 1] (Newton on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pn(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pn(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_pn(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn tri_len(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 2) / 2
}

fn tri_idx(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Orthonormal associated Legendre column P̄_lm(x) for 0 ≤ m ≤ l ≤ l_max,
/// Condon–Shortley phase included, normalized so 𝒴_lm = P̄_lm e^{imφ} has
/// unit L² norm on the sphere.
pub fn normalized_plm(l_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; tri_len(l_max)];
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin;
        }
        out[tri_idx(m, m)] = pmm;
        if m < l_max {
            out[tri_idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * pmm;
        }
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            out[tri_idx(l, m)] = a * (x * out[tri_idx(l - 1, m)] - b * out[tri_idx(l - 2, m)]);
        }
    }
    out
}

/// θ-derivatives of the normalized column at interior x = cos θ.
fn normalized_dplm(l_max: usize, x: f64, plm: &[f64]) -> Vec<f64> {
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let mut out = vec![0.0; tri_len(l_max)];
    for m in 0..=l_max {
        for l in m..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let below = if l >= 1 && l > m {
                plm[tri_idx(l - 1, m)]
            } else {
                0.0
            };
            let beta = ((lf * lf - mf * mf) * (2.0 * lf + 1.0) / (2.0 * lf - 1.0).max(1.0)).sqrt();
            out[tri_idx(l, m)] = (lf * x * plm[tri_idx(l, m)] - beta * below) / sin;
        }
    }
    out
}

/// Table-driven transform on a Gauss–Legendre × uniform-φ grid.
pub struct SphericalTransform {
    pub l_max: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
    sin_theta: Vec<f64>,
    /// P̄ tables, `[k * tri + tri_idx(l, m)]`.
    plm: Vec<f64>,
    dplm: Vec<f64>,
    /// e^{i m φ_j}, `[j * (l_max + 1) + m]`.
    exp_phi: Vec<Complex64>,
}

impl SphericalTransform {
    /// Build a transform exact for operands band-limited to degree `l_max`.
    pub fn new(l_max: usize) -> Self {
        let n_theta = l_max + 2;
        let n_phi = 2 * l_max + 4;
        let (nodes, weights) = gauss_legendre(n_theta);
        let tri = tri_len(l_max);
        let mut plm = vec![0.0; n_theta * tri];
        let mut dplm = vec![0.0; n_theta * tri];
        let mut sin_theta = vec![0.0; n_theta];
        for (k, &x) in nodes.iter().enumerate() {
            let col = normalized_plm(l_max, x);
            let dcol = normalized_dplm(l_max, x, &col);
            plm[k * tri..(k + 1) * tri].copy_from_slice(&col);
            dplm[k * tri..(k + 1) * tri].copy_from_slice(&dcol);
            sin_theta[k] = (1.0 - x * x).max(0.0).sqrt();
        }
        let mut exp_phi = vec![Complex64::new(0.0, 0.0); n_phi * (l_max + 1)];
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            for m in 0..=l_max {
                exp_phi[j * (l_max + 1) + m] = Complex64::from_polar(1.0, m as f64 * phi);
            }
        }
        SphericalTransform {
            l_max,
            n_theta,
            n_phi,
            nodes,
            weights,
            sin_theta,
            plm,
            dplm,
            exp_phi,
        }
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    fn exp_m(&self, j: usize, m: i64) -> Complex64 {
        let e = self.exp_phi[j * (self.l_max + 1) + m.unsigned_abs() as usize];
        if m >= 0 {
            e
        } else {
            e.conj()
        }
    }

    /// θ-profiles S_m(k) = Σ_l c_{lm} P̄-factor, for m ∈ −L..=L packed as
    /// `[k * (2 l_max + 1) + (m + l_max)]`, from either the P̄ or ∂θP̄ table.
    fn theta_profiles(&self, f: &BandlimitedFunction, derivative: bool) -> Vec<Complex64> {
        assert!(
            f.l_max() <= self.l_max,
            "function degree exceeds transform tables"
        );
        let tri = tri_len(self.l_max);
        let width = 2 * self.l_max + 1;
        let table = if derivative { &self.dplm } else { &self.plm };
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_theta * width];
        for k in 0..self.n_theta {
            let col = &table[k * tri..(k + 1) * tri];
            for (l, m, c) in f.iter() {
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ma = m.unsigned_abs() as usize;
                // 𝒴_{l,−|m|} = (−1)^{|m|} P̄_{l,|m|} e^{−i|m|φ}
                let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
                out[k * width + (m + self.l_max as i64) as usize] += c * sign * col[tri_idx(l, ma)];
            }
        }
        out
    }

    fn profiles_to_grid(&self, profiles: &[Complex64], phi_factor: PhiFactor) -> Vec<Complex64> {
        let width = 2 * self.l_max + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_theta * self.n_phi];
        for k in 0..self.n_theta {
            for j in 0..self.n_phi {
                let mut v = Complex64::new(0.0, 0.0);
                for mi in 0..width {
                    let m = mi as i64 - self.l_max as i64;
                    let p = profiles[k * width + mi];
                    if p == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let factor = match phi_factor {
                        PhiFactor::One => Complex64::new(1.0, 0.0),
                        PhiFactor::Im => Complex64::new(0.0, m as f64),
                    };
                    v += p * factor * self.exp_m(j, m);
                }
                out[k * self.n_phi + j] = v;
            }
        }
        out
    }

    /// Pointwise values on the grid, row-major `k * n_phi + j`.
    pub fn eval_grid(&self, f: &BandlimitedFunction) -> Vec<Complex64> {
        self.profiles_to_grid(&self.theta_profiles(f, false), PhiFactor::One)
    }

    /// (∂θ f, ∂φ f) on the grid.
    pub fn eval_grad_grid(&self, f: &BandlimitedFunction) -> (Vec<Complex64>, Vec<Complex64>) {
        let dtheta = self.profiles_to_grid(&self.theta_profiles(f, true), PhiFactor::One);
        let dphi = self.profiles_to_grid(&self.theta_profiles(f, false), PhiFactor::Im);
        (dtheta, dphi)
    }

    /// Forward transform of grid values onto modes l ≤ l_out.
    pub fn forward(&self, values: &[Complex64], l_out: usize) -> BandlimitedFunction {
        assert!(l_out <= self.l_max);
        assert_eq!(values.len(), self.n_theta * self.n_phi);
        let width = 2 * self.l_max + 1;
        let dphi = 2.0 * std::f64::consts::PI / self.n_phi as f64;
        // F_m(k) = Σ_j V e^{−imφ_j} Δφ
        let mut fm = vec![Complex64::new(0.0, 0.0); self.n_theta * width];
        for k in 0..self.n_theta {
            for j in 0..self.n_phi {
                let v = values[k * self.n_phi + j];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for m in -(l_out as i64)..=(l_out as i64) {
                    fm[k * width + (m + self.l_max as i64) as usize] +=
                        v * self.exp_m(j, -m) * dphi;
                }
            }
        }
        let tri = tri_len(self.l_max);
        let mut out = BandlimitedFunction::zeros(l_out);
        for k in 0..self.n_theta {
            let col = &self.plm[k * tri..(k + 1) * tri];
            let w = self.weights[k];
            for l in 0..=l_out {
                for m in -(l as i64)..=(l as i64) {
                    let ma = m.unsigned_abs() as usize;
                    let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
                    let contrib = fm[k * width + (m + self.l_max as i64) as usize]
                        * (w * sign * col[tri_idx(l, ma)]);
                    *out.at_mut(l, m) += contrib;
                }
            }
        }
        out
    }

    /// ∫_{S²} V dΩ by the product rule.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        let dphi = 2.0 * std::f64::consts::PI / self.n_phi as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..self.n_theta {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..self.n_phi {
                row += values[k * self.n_phi + j];
            }
            total += row * self.weights[k] * dphi;
        }
        total
    }
}

#[derive(Clone, Copy)]
enum PhiFactor {
    One,
    Im,
}

static TRANSFORMS: Lazy<RwLock<HashMap<usize, Arc<SphericalTransform>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// Shared transform covering band limit `degree` (rounded up to bound churn).
pub fn transform_for(degree: usize) -> Arc<SphericalTransform> {
    let key = degree.div_ceil(8) * 8;
    {
        let cache = TRANSFORMS.read().unwrap();
        if let Some(t) = cache.get(&key) {
            return t.clone();
        }
    }
    let t = Arc::new(SphericalTransform::new(key));
    TRANSFORMS.write().unwrap().insert(key, t.clone());
    t
}
