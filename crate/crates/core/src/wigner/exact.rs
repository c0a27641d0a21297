//! Exact arithmetic backing the Racah formulas.
//!
//! Wigner symbols are square roots of rationals times a rational sum. At
//! j ~ N/2 the alternating Racah sum cancels catastrophically in floating
//! point, so everything here is exact: the sum is accumulated over a common
//! factorial denominator in big integers, and the square-root prefactor is
//! handled through prime-exponent vectors of factorials so the square part
//! can be split off exactly.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use std::sync::RwLock;

/// Exact value of the form `q · √s` with `q` rational and `s` a square-free
/// nonnegative integer. The float view is [`SqrtRational::to_f64`]; an
/// arbitrary-precision view is [`SqrtRational::to_f64_prec`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtRational {
    pub q: BigRational,
    pub s: BigUint,
}

impl SqrtRational {
    pub fn zero() -> Self {
        SqrtRational {
            q: BigRational::zero(),
            s: BigUint::one(),
        }
    }

    pub fn from_rational(q: BigRational) -> Self {
        SqrtRational {
            q,
            s: BigUint::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    /// Signed square `q²·s` (keeps the sign of `q`), exact.
    pub fn signed_sq(&self) -> BigRational {
        let sq = &self.q * &self.q * BigRational::from_integer(BigInt::from(self.s.clone()));
        if self.q.is_negative() {
            -sq
        } else {
            sq
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.q) * biguint_to_f64(&self.s).sqrt()
    }

    /// Evaluate with `bits` of working precision via integer square roots.
    /// Used as the independent high-precision oracle for the float view.
    pub fn to_f64_prec(&self, bits: u32) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // q·√s = sign · (n/d)·√s; compute √(n²·s·4^bits / d²) / 2^bits exactly
        // rounded down, which carries ~bits of relative precision.
        let n = self.q.numer().magnitude();
        let d = self.q.denom().magnitude();
        let scaled = (n * n * &self.s) << (2 * bits as usize);
        let root = scaled.sqrt() / d;
        let v = biguint_to_f64(&root) / 2f64.powi(bits as i32);
        if self.q.is_negative() {
            -v
        } else {
            v
        }
    }
}

impl std::ops::Mul<&SqrtRational> for &SqrtRational {
    type Output = SqrtRational;
    fn mul(self, rhs: &SqrtRational) -> SqrtRational {
        // √s·√s' = g·√(s/g · s'/g) with g = gcd(s, s'): keeps s square-free.
        let g = self.s.gcd(&rhs.s);
        let s = (&self.s / &g) * (&rhs.s / &g);
        let q = &self.q * &rhs.q * BigRational::from_integer(BigInt::from(g));
        SqrtRational { q, s }
    }
}

/// f64 of a BigRational that may have astronomically large numerator and
/// denominator but a modest ratio. Shifts by bit lengths first so neither
/// side overflows on its own.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    let shift_n = n.bits() as i64 - 64;
    let shift_d = d.bits() as i64 - 64;
    let nn = if shift_n > 0 {
        n >> shift_n as usize
    } else {
        n.clone()
    };
    let dd = if shift_d > 0 {
        d >> shift_d as usize
    } else {
        d.clone()
    };
    let mut v = biguint_to_f64(&nn) / biguint_to_f64(&dd);
    v *= 2f64.powi((shift_n.max(0) - shift_d.max(0)) as i32);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

fn biguint_to_f64(u: &BigUint) -> f64 {
    u.to_f64().unwrap_or(f64::INFINITY)
}

// ---------------------------------------------------------------------------
// factorial tables
// ---------------------------------------------------------------------------

static FACTORIALS: Lazy<RwLock<Vec<BigUint>>> = Lazy::new(|| RwLock::new(vec![BigUint::one()]));

/// n! from a grow-on-demand shared table.
pub fn factorial(n: usize) -> BigUint {
    {
        let table = FACTORIALS.read().unwrap();
        if n < table.len() {
            return table[n].clone();
        }
    }
    let mut table = FACTORIALS.write().unwrap();
    while table.len() <= n {
        let next = table.last().unwrap() * BigUint::from(table.len());
        table.push(next);
    }
    table[n].clone()
}

/// Product of the integer range `lo..=hi` (1 when empty).
pub fn range_product(lo: usize, hi: usize) -> BigUint {
    let mut p = BigUint::one();
    for i in lo..=hi {
        p *= BigUint::from(i);
    }
    p
}

// ---------------------------------------------------------------------------
// prime-exponent vectors
// ---------------------------------------------------------------------------

static PRIMES: Lazy<RwLock<Vec<usize>>> = Lazy::new(|| RwLock::new(vec![2, 3, 5, 7]));

fn primes_up_to(n: usize) -> Vec<usize> {
    {
        let primes = PRIMES.read().unwrap();
        if *primes.last().unwrap() >= n {
            return primes.iter().copied().take_while(|&p| p <= n).collect();
        }
    }
    let mut primes = PRIMES.write().unwrap();
    if *primes.last().unwrap() < n {
        let limit = (n + 1).max(2 * primes.last().unwrap());
        let mut sieve = vec![true; limit + 1];
        sieve[0] = false;
        if limit >= 1 {
            sieve[1] = false;
        }
        let mut p = 2;
        while p * p <= limit {
            if sieve[p] {
                let mut q = p * p;
                while q <= limit {
                    sieve[q] = false;
                    q += p;
                }
            }
            p += 1;
        }
        *primes = sieve
            .iter()
            .enumerate()
            .filter_map(|(i, &is_p)| if is_p { Some(i) } else { None })
            .collect();
    }
    primes.iter().copied().take_while(|&p| p <= n).collect()
}

/// Π of factorials with signed multiplicities, as a prime-exponent vector.
/// `terms` is a list of (n, multiplicity) meaning (n!)^multiplicity.
pub struct FactorialProduct {
    terms: Vec<(usize, i64)>,
}

impl Default for FactorialProduct {
    fn default() -> Self {
        Self::new()
    }
}

impl FactorialProduct {
    pub fn new() -> Self {
        FactorialProduct { terms: Vec::new() }
    }

    pub fn push(&mut self, n: usize, mult: i64) -> &mut Self {
        self.terms.push((n, mult));
        self
    }

    /// Exponent of p in n! by Legendre's formula.
    fn legendre(n: usize, p: usize) -> i64 {
        let mut e = 0i64;
        let mut q = p;
        while q <= n {
            e += (n / q) as i64;
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
        }
        e
    }

    /// Split into `q·√s`: q rational (from even parts of each prime
    /// exponent), s a square-free integer (odd parts).
    pub fn sqrt(&self) -> SqrtRational {
        let max_n = self.terms.iter().map(|&(n, _)| n).max().unwrap_or(0);
        let mut q = BigRational::one();
        let mut s = BigUint::one();
        for p in primes_up_to(max_n) {
            let e: i64 = self
                .terms
                .iter()
                .map(|&(n, mult)| Self::legendre(n, p) * mult)
                .sum();
            let half = e.div_euclid(2);
            let rem = e.rem_euclid(2);
            if half != 0 {
                let pw = BigUint::from(p).pow(half.unsigned_abs() as u32);
                let pw = BigRational::from_integer(BigInt::from(pw));
                if half > 0 {
                    q *= pw;
                } else {
                    q /= pw;
                }
            }
            if rem == 1 {
                s *= BigUint::from(p);
            }
        }
        SqrtRational { q, s }
    }
}

// ---------------------------------------------------------------------------
// Racah sums over a common factorial denominator
// ---------------------------------------------------------------------------

/// Σ_k (−1)^k / [k!·(a2−k)!·(a3−k)!·(a4−k)!·(b5+k)!·(b6+k)!] for the 3j
/// single-sum formula, exact. Arguments are the k-independent offsets.
pub fn racah_sum_3j(a2: i64, a3: i64, a4: i64, b5: i64, b6: i64) -> BigRational {
    let k_min = 0i64.max(-b5).max(-b6);
    let k_max = a2.min(a3).min(a4);
    if k_min > k_max {
        return BigRational::zero();
    }
    let (k_min, k_max) = (k_min as usize, k_max as usize);
    let mut total = BigInt::zero();
    for k in k_min..=k_max {
        // integer numerator relative to the common denominator
        // k_max!·(a2−k_min)!·(a3−k_min)!·(a4−k_min)!·(b5+k_max)!·(b6+k_max)!
        let mut num = range_product(k + 1, k_max);
        num *= range_product((a2 as usize) - k + 1, (a2 as usize) - k_min);
        num *= range_product((a3 as usize) - k + 1, (a3 as usize) - k_min);
        num *= range_product((a4 as usize) - k + 1, (a4 as usize) - k_min);
        num *= range_product((b5 + k as i64 + 1) as usize, (b5 + k_max as i64) as usize);
        num *= range_product((b6 + k as i64 + 1) as usize, (b6 + k_max as i64) as usize);
        let signed = BigInt::from(num);
        if k % 2 == 0 {
            total += signed;
        } else {
            total -= signed;
        }
    }
    let mut denom = factorial(k_max);
    denom *= factorial((a2 as usize) - k_min);
    denom *= factorial((a3 as usize) - k_min);
    denom *= factorial((a4 as usize) - k_min);
    denom *= factorial((b5 + k_max as i64) as usize);
    denom *= factorial((b6 + k_max as i64) as usize);
    BigRational::new(total, BigInt::from(denom))
}

/// Σ_k (−1)^k (k+1)! / [Π_i (k−s_i)! · Π_j (q_j−k)!] for the 6j sum, exact.
pub fn racah_sum_6j(s: [i64; 4], q: [i64; 3]) -> BigRational {
    let k_min = *s.iter().max().unwrap();
    let k_max = *q.iter().min().unwrap();
    if k_min > k_max {
        return BigRational::zero();
    }
    let (k_min, k_max) = (k_min as usize, k_max as usize);
    let mut total = BigInt::zero();
    for k in k_min..=k_max {
        let mut num = factorial(k + 1);
        for si in s {
            // (k_max − s_i)! / (k − s_i)!
            num *= range_product(k - si as usize + 1, k_max - si as usize);
        }
        for qj in q {
            // (q_j − k_min)! / (q_j − k)!
            num *= range_product(qj as usize - k + 1, qj as usize - k_min);
        }
        let signed = BigInt::from(num);
        if k % 2 == 0 {
            total += signed;
        } else {
            total -= signed;
        }
    }
    let mut denom = BigUint::one();
    for si in s {
        denom *= factorial(k_max - si as usize);
    }
    for qj in q {
        denom *= factorial(qj as usize - k_min);
    }
    BigRational::new(total, BigInt::from(denom))
}
