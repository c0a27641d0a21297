//! Exact angular-momentum coupling coefficients and Legendre functions.
//!
//! 3j and 6j symbols are evaluated by the Racah single-sum formulas in exact
//! big-integer arithmetic (see [`exact`]); selection-rule failures return an
//! exact zero. Phases follow the Condon–Shortley convention throughout.

pub mod exact;

use crate::error::{CoreError, Result};
pub use exact::SqrtRational;
use exact::{racah_sum_3j, racah_sum_6j, FactorialProduct};
use num_rational::BigRational;
use num_traits::One;
use std::collections::HashMap;
use std::sync::RwLock;

/// Half-integer stored as twice its value, so spins like (N−1)/2 are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt {
    pub twice: i32,
}

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: Self) -> Self {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: Self) -> Self {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> Self {
        HalfInt { twice: -self.twice }
    }
}

/// |j1−j2| ≤ j3 ≤ j1+j2 with integral perimeter.
pub fn triangle_ok(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    (j1.twice + j2.twice + j3.twice) % 2 == 0
        && j3.twice <= j1.twice + j2.twice
        && j3.twice >= (j1.twice - j2.twice).abs()
}

fn check_column(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice < 0 {
        return Err(CoreError::Input(format!(
            "negative angular momentum 2j={}",
            j.twice
        )));
    }
    if (j.twice - m.twice).rem_euclid(2) != 0 {
        return Err(CoreError::Input(format!(
            "j−m not integral: 2j={}, 2m={}",
            j.twice, m.twice
        )));
    }
    Ok(())
}

fn phase(exponent: i64) -> BigRational {
    if exponent.rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// Wigner 3j symbol, exact.
///
/// Returns exact zero when a selection rule fails (m1+m2+m3 ≠ 0, triangle
/// violation, |m| > j); rejects non-integral (j, m) pairs.
pub fn three_j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<SqrtRational> {
    check_column(j1, m1)?;
    check_column(j2, m2)?;
    check_column(j3, m3)?;
    if m1.twice + m2.twice + m3.twice != 0 || !triangle_ok(j1, j2, j3) {
        return Ok(SqrtRational::zero());
    }
    if m1.twice.abs() > j1.twice || m2.twice.abs() > j2.twice || m3.twice.abs() > j3.twice {
        return Ok(SqrtRational::zero());
    }

    // all integers once the selection rules hold
    let a2 = ((j1.twice + j2.twice - j3.twice) / 2) as i64;
    let a3 = ((j1.twice - m1.twice) / 2) as i64;
    let a4 = ((j2.twice + m2.twice) / 2) as i64;
    let b5 = ((j3.twice - j2.twice + m1.twice) / 2) as i64;
    let b6 = ((j3.twice - j1.twice - m2.twice) / 2) as i64;

    let sum = racah_sum_3j(a2, a3, a4, b5, b6);
    if sum == BigRational::from_integer(0.into()) {
        return Ok(SqrtRational::zero());
    }

    let jj = |x: i32| (x / 2) as usize;
    let mut pref = FactorialProduct::new();
    // triangle coefficient Δ(j1 j2 j3)
    pref.push(jj(j1.twice + j2.twice - j3.twice), 1)
        .push(jj(j1.twice - j2.twice + j3.twice), 1)
        .push(jj(-j1.twice + j2.twice + j3.twice), 1)
        .push(jj(j1.twice + j2.twice + j3.twice) + 1, -1)
        // Π (j_i ± m_i)!
        .push(jj(j1.twice + m1.twice), 1)
        .push(jj(j1.twice - m1.twice), 1)
        .push(jj(j2.twice + m2.twice), 1)
        .push(jj(j2.twice - m2.twice), 1)
        .push(jj(j3.twice + m3.twice), 1)
        .push(jj(j3.twice - m3.twice), 1);
    let root = pref.sqrt();

    let ph = phase(((j1.twice - j2.twice - m3.twice) / 2) as i64);
    Ok(SqrtRational {
        q: ph * sum * root.q,
        s: root.s,
    })
}

/// Wigner 6j symbol, exact. Zero when any of the four triads violates the
/// triangle condition.
pub fn six_j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> Result<SqrtRational> {
    for j in [j1, j2, j3, j4, j5, j6] {
        if j.twice < 0 {
            return Err(CoreError::Input(format!(
                "negative angular momentum 2j={}",
                j.twice
            )));
        }
    }
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if triads.iter().any(|&(a, b, c)| !triangle_ok(a, b, c)) {
        return Ok(SqrtRational::zero());
    }

    let s = |a: HalfInt, b: HalfInt, c: HalfInt| ((a.twice + b.twice + c.twice) / 2) as i64;
    let sums = [s(j1, j2, j3), s(j1, j5, j6), s(j4, j2, j6), s(j4, j5, j3)];
    let quads = [
        ((j1.twice + j2.twice + j4.twice + j5.twice) / 2) as i64,
        ((j2.twice + j3.twice + j5.twice + j6.twice) / 2) as i64,
        ((j1.twice + j3.twice + j4.twice + j6.twice) / 2) as i64,
    ];
    let sum = racah_sum_6j(sums, quads);
    if sum == BigRational::from_integer(0.into()) {
        return Ok(SqrtRational::zero());
    }

    let mut pref = FactorialProduct::new();
    for &(a, b, c) in &triads {
        pref.push(((a.twice + b.twice - c.twice) / 2) as usize, 1)
            .push(((a.twice - b.twice + c.twice) / 2) as usize, 1)
            .push(((-a.twice + b.twice + c.twice) / 2) as usize, 1)
            .push(((a.twice + b.twice + c.twice) / 2) as usize + 1, -1);
    }
    let root = pref.sqrt();
    Ok(SqrtRational {
        q: sum * root.q,
        s: root.s,
    })
}

// ---------------------------------------------------------------------------
// cached lookups
// ---------------------------------------------------------------------------

/// Symbol cache keyed by canonicalized arguments.
///
/// Tables fill lazily behind an RwLock; once a sweep has touched all its
/// symbols the table is effectively read-only and cheap to share.
#[derive(Default)]
pub struct WignerTable {
    three: RwLock<HashMap<[i32; 6], SqrtRational>>,
    six: RwLock<HashMap<[i32; 6], SqrtRational>>,
}

impl WignerTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn three_j(
        &self,
        j1: HalfInt,
        j2: HalfInt,
        j3: HalfInt,
        m1: HalfInt,
        m2: HalfInt,
        m3: HalfInt,
    ) -> Result<f64> {
        check_column(j1, m1)?;
        check_column(j2, m2)?;
        check_column(j3, m3)?;
        if m1.twice + m2.twice + m3.twice != 0 || !triangle_ok(j1, j2, j3) {
            return Ok(0.0);
        }
        if m1.twice.abs() > j1.twice || m2.twice.abs() > j2.twice || m3.twice.abs() > j3.twice {
            return Ok(0.0);
        }
        let (key, ph) = canonical_3j(
            [j1.twice, j2.twice, j3.twice],
            [m1.twice, m2.twice, m3.twice],
        );
        {
            let cache = self.three.read().unwrap();
            if let Some(v) = cache.get(&key) {
                return Ok(ph * v.to_f64());
            }
        }
        let v = three_j(
            HalfInt::from_twice(key[0]),
            HalfInt::from_twice(key[1]),
            HalfInt::from_twice(key[2]),
            HalfInt::from_twice(key[3]),
            HalfInt::from_twice(key[4]),
            HalfInt::from_twice(key[5]),
        )?;
        let out = ph * v.to_f64();
        self.three.write().unwrap().insert(key, v);
        Ok(out)
    }

    pub fn six_j(
        &self,
        j1: HalfInt,
        j2: HalfInt,
        j3: HalfInt,
        j4: HalfInt,
        j5: HalfInt,
        j6: HalfInt,
    ) -> Result<f64> {
        let key = canonical_6j([j1.twice, j2.twice, j3.twice, j4.twice, j5.twice, j6.twice]);
        {
            let cache = self.six.read().unwrap();
            if let Some(v) = cache.get(&key) {
                return Ok(v.to_f64());
            }
        }
        let v = six_j(
            HalfInt::from_twice(key[0]),
            HalfInt::from_twice(key[1]),
            HalfInt::from_twice(key[2]),
            HalfInt::from_twice(key[3]),
            HalfInt::from_twice(key[4]),
            HalfInt::from_twice(key[5]),
        )?;
        let out = v.to_f64();
        self.six.write().unwrap().insert(key, v);
        Ok(out)
    }
}

/// Canonical key over the 12 classical 3j symmetries (column permutations
/// and simultaneous m negation), plus the relating phase (−1)^J.
fn canonical_3j(tj: [i32; 3], tm: [i32; 3]) -> ([i32; 6], f64) {
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 2, 0],
        [2, 0, 1],
        [0, 2, 1],
        [1, 0, 2],
        [2, 1, 0],
    ];
    let odd = [false, false, false, true, true, true];
    let j_sum_odd = ((tj[0] + tj[1] + tj[2]) / 2).rem_euclid(2) == 1;
    let mut best: Option<([i32; 6], f64)> = None;
    for (p, &is_odd) in perms.iter().zip(odd.iter()) {
        for negate in [false, true] {
            let sgn = if negate { -1 } else { 1 };
            let key = [
                tj[p[0]],
                tj[p[1]],
                tj[p[2]],
                sgn * tm[p[0]],
                sgn * tm[p[1]],
                sgn * tm[p[2]],
            ];
            let mut ph = 1.0;
            if (is_odd || negate) && j_sum_odd {
                ph = -1.0;
            }
            if is_odd && negate && j_sum_odd {
                ph = 1.0;
            }
            if best.as_ref().map(|(b, _)| key < *b).unwrap_or(true) {
                best = Some((key, ph));
            }
        }
    }
    best.unwrap()
}

/// Canonical key over the 24 classical 6j symmetries (column permutations
/// and upper/lower exchange in any two columns). All are phase-free.
fn canonical_6j(t: [i32; 6]) -> [i32; 6] {
    let cols = [(t[0], t[3]), (t[1], t[4]), (t[2], t[5])];
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 2, 0],
        [2, 0, 1],
        [0, 2, 1],
        [1, 0, 2],
        [2, 1, 0],
    ];
    // flip the (upper, lower) pair in exactly two columns, or none
    let flips: [[bool; 3]; 4] = [
        [false, false, false],
        [true, true, false],
        [true, false, true],
        [false, true, true],
    ];
    let mut best = [i32::MAX; 6];
    for p in perms {
        for f in flips {
            let mut key = [0; 6];
            for c in 0..3 {
                let (u, l) = cols[p[c]];
                let (u, l) = if f[c] { (l, u) } else { (u, l) };
                key[c] = u;
                key[c + 3] = l;
            }
            if key < best {
                best = key;
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// associated Legendre
// ---------------------------------------------------------------------------

/// Associated Legendre P_lm(x) with the Condon–Shortley phase, for 0 ≤ m ≤ l.
/// Negative m and m > l are the caller's responsibility (the sphere module
/// keeps the one phase convention).
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> Result<f64> {
    if m > l {
        return Err(CoreError::Input(format!(
            "assoc_legendre needs m <= l, got l={l} m={m}"
        )));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(CoreError::Input(format!(
            "assoc_legendre needs |x| <= 1, got {x}"
        )));
    }
    // ascending-l recurrence from the diagonal seed
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * sin;
    }
    if l == m {
        return Ok(pmm);
    }
    let mut p_prev = pmm;
    let mut p_curr = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let next =
            (x * (2 * ll - 1) as f64 * p_curr - (ll + m - 1) as f64 * p_prev) / (ll - m) as f64;
        p_prev = p_curr;
        p_curr = next;
    }
    Ok(p_curr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(n: i32) -> HalfInt {
        HalfInt::from_int(n)
    }

    fn ht(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn three_j_110_000() {
        // (1 1 0; 0 0 0) = −1/√3
        let v = three_j(h(1), h(1), h(0), h(0), h(0), h(0)).unwrap();
        assert_abs_diff_eq!(v.to_f64(), -(1f64 / 3.0).sqrt(), epsilon = 1e-15);
        // exact form: q = −1/3, s = 3
        assert_eq!(v.signed_sq(), BigRational::new((-1).into(), 3.into()));
    }

    #[test]
    fn three_j_odd_perimeter_zero() {
        let v = three_j(h(1), h(1), h(1), h(0), h(0), h(0)).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn three_j_projection_rule_zero() {
        let v = three_j(h(2), h(1), h(1), h(1), h(0), h(0)).unwrap();
        assert!(v.is_zero());
        // |m| > j is an exact zero, not an error
        let v = three_j(h(2), h(2), h(4), h(3), h(-1), h(-2)).unwrap();
        assert!(v.is_zero());
        // negative angular momentum is rejected
        assert!(three_j(ht(-2), h(1), h(1), h(0), h(0), h(0)).is_err());
    }

    #[test]
    fn three_j_rejects_non_integral_pair() {
        assert!(three_j(h(1), h(1), h(0), ht(1), ht(-1), h(0)).is_err());
    }

    #[test]
    fn three_j_known_half_integer_value() {
        // (1/2 1/2 1; 1/2 1/2 −1) = −1/√3
        let v = three_j(ht(1), ht(1), h(1), ht(1), ht(1), h(-1)).unwrap();
        assert_abs_diff_eq!(v.to_f64(), -(1f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn six_j_regression_111111() {
        let v = six_j(h(1), h(1), h(1), h(1), h(1), h(1)).unwrap();
        // {1 1 1; 1 1 1} = 1/6
        assert_eq!(v.signed_sq(), BigRational::new(1.into(), 36.into()));
        assert_abs_diff_eq!(v.to_f64(), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn six_j_triangle_violation_zero() {
        let v = six_j(h(1), h(1), h(5), h(1), h(1), h(1)).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn six_j_special_case_zero_column() {
        // {a b c; 0 c b} = (−1)^{a+b+c} / √((2b+1)(2c+1)) at (a,b,c) = (2,1,1)
        let v = six_j(h(2), h(1), h(1), h(0), h(1), h(1)).unwrap();
        let expect = 1.0 / (3f64 * 3.0).sqrt();
        assert_abs_diff_eq!(v.to_f64(), expect, epsilon = 1e-15);
    }

    #[test]
    fn table_and_direct_agree() {
        let table = WignerTable::new();
        let a = table.three_j(h(2), h(3), h(4), h(1), h(-2), h(1)).unwrap();
        let b = three_j(h(2), h(3), h(4), h(1), h(-2), h(1))
            .unwrap()
            .to_f64();
        assert_abs_diff_eq!(a, b, epsilon = 1e-16);
        // a second call hits the cache
        let c = table.three_j(h(2), h(3), h(4), h(1), h(-2), h(1)).unwrap();
        assert_eq!(a, c);
        // a symmetric variant resolves through the same canonical entry
        let d = table.three_j(h(3), h(2), h(4), h(-2), h(1), h(1)).unwrap();
        assert_abs_diff_eq!(d, -b, epsilon = 1e-16); // odd permutation, J = 9 odd
    }

    #[test]
    fn legendre_values() {
        assert_abs_diff_eq!(assoc_legendre(0, 0, 0.77).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(assoc_legendre(1, 0, 0.3).unwrap(), 0.3, epsilon = 1e-15);
        // P_21(x) = −3x√(1−x²)
        let x: f64 = 0.5;
        assert_abs_diff_eq!(
            assoc_legendre(2, 1, x).unwrap(),
            -3.0 * x * (1.0 - x * x).sqrt(),
            epsilon = 1e-14
        );
        assert!(assoc_legendre(2, 1, 1.5).is_err());
        assert!(assoc_legendre(2, 3, 0.0).is_err());
    }
}
