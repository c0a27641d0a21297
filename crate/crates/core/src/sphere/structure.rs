//! Closed-form structure constants of the Poisson algebra of spherical
//! harmonics, in the H¹-orthonormal basis 𝒴̃_lm = 𝒴_lm/√(l(l+1)):
//!
//!   {𝒴̃_a, 𝒴̃_b} = Σ_c f̃_{abc} 𝒴̃_c ,   f̃_{abc} = ⟨𝒴̃_c, {𝒴̃_a,𝒴̃_b}⟩_{H¹}.
//!
//! The closed form couples a half-integer 3j with a projection 3j; its
//! overall orientation is pinned against the quadrature bracket (see the
//! tests in `sphere`).

use crate::error::Result;
use crate::wigner::{HalfInt, WignerTable};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::RwLock;

/// Cached closed-form table of f̃ values.
type TripleKey = (usize, i64, usize, i64, usize);

pub struct ContStructureTable {
    wigner: WignerTable,
    cache: RwLock<HashMap<TripleKey, Complex64>>,
}

impl ContStructureTable {
    pub fn new() -> Self {
        ContStructureTable {
            wigner: WignerTable::new(),
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// f̃_{lm, l'm', l''m''} with m'' = m + m'' forced by the φ selection rule
    /// (pass the full index set; mismatched m'' returns exact zero).
    pub fn value(
        &self,
        la: usize,
        ma: i64,
        lb: usize,
        mb: i64,
        lc: usize,
        mc: i64,
    ) -> Result<Complex64> {
        if mc != ma + mb {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if la == 0 || lb == 0 || lc == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if (la + lb + lc).is_multiple_of(2) || lc > la + lb || lc < la.abs_diff(lb) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let key = (la, ma, lb, mb, lc);
        {
            let cache = self.cache.read().unwrap();
            if let Some(v) = cache.get(&key) {
                return Ok(*v);
            }
        }
        let v = self.compute(la, ma, lb, mb, lc, mc)?;
        self.cache.write().unwrap().insert(key, v);
        Ok(v)
    }

    fn compute(
        &self,
        la: usize,
        ma: i64,
        lb: usize,
        mb: i64,
        lc: usize,
        mc: i64,
    ) -> Result<Complex64> {
        let (laf, lbf, lcf) = (la as f64, lb as f64, lc as f64);
        let amp = (lcf
            * (lcf + 1.0)
            * (2.0 * laf + 1.0)
            * (2.0 * lbf + 1.0)
            * (2.0 * lcf + 1.0)
            * (laf + lbf - lcf)
            * (laf + lbf + lcf + 1.0)
            / ((laf + 1.0) * (lbf + 1.0)))
            .sqrt();
        let half = self.wigner.three_j(
            HalfInt::from_twice(2 * la as i32 - 1),
            HalfInt::from_twice(2 * lb as i32 - 1),
            HalfInt::from_int(lc as i32),
            HalfInt::from_twice(1),
            HalfInt::from_twice(-1),
            HalfInt::from_int(0),
        )?;
        let proj = self.wigner.three_j(
            HalfInt::from_int(la as i32),
            HalfInt::from_int(lb as i32),
            HalfInt::from_int(lc as i32),
            HalfInt::from_int(ma as i32),
            HalfInt::from_int(mb as i32),
            HalfInt::from_int(-mc as i32),
        )?;
        // orientation pinned by the quadrature oracle ({x¹,x²} = x³)
        let m_sign = if mc.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let scale = m_sign * amp / (4.0 * std::f64::consts::PI).sqrt();
        Ok(Complex64::new(0.0, scale * half * proj))
    }

    /// Expansion coefficient of {𝒴_a, 𝒴_b} on 𝒴_c in the *plain* basis:
    /// ⟨𝒴_c, {𝒴_a,𝒴_b}⟩_{L²} = f̃_{abc} · √(l_a(l_a+1) l_b(l_b+1) / (l_c(l_c+1))).
    pub fn bracket_coefficient(
        &self,
        la: usize,
        ma: i64,
        lb: usize,
        mb: i64,
        lc: usize,
    ) -> Result<Complex64> {
        let mc = ma + mb;
        let v = self.value(la, ma, lb, mb, lc, mc)?;
        if v == Complex64::new(0.0, 0.0) {
            return Ok(v);
        }
        let num = (la * (la + 1) * lb * (lb + 1)) as f64;
        let den = (lc * (lc + 1)) as f64;
        Ok(v * (num / den).sqrt())
    }
}

impl Default for ContStructureTable {
    fn default() -> Self {
        Self::new()
    }
}
