//! Binomial(m, 1/2) and Rademacher-sum distributions, exactly where it
//! matters.
//!
//! The divisibility inequality `P(X = 0 mod m) <= 1/m + 2/sqrt(n)` for
//! `X ~ Binomial(n, 1/2)` is an exact statement, so its verification
//! never goes through floating point: tables up to `n = 2000` keep the
//! binomial coefficients as big integers with an implicit `2^n`
//! denominator, and the verdict compares integers. Larger tables switch
//! to a floating backend (central mass from an asymptotic series, then
//! the ratio recurrence outward, then normalization) that is good to
//! roughly 12-15 significant digits — plenty for reporting, never used
//! for verdicts.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Largest `m` for any pmf table.
pub const PMF_GUARD_M: u64 = 1_000_000;

/// Largest `m` kept in exact dyadic form.
pub const EXACT_PMF_LIMIT: u64 = 2000;

/// Cap on `n_max * m_max` for the Lemma verification grid.
pub const LEMMA_GRID_GUARD: u64 = 1_000_000;

/// Probability mass function of Binomial(m, 1/2).
///
/// `mass(k) = C(m, k) / 2^m`. Tables with `m <= EXACT_PMF_LIMIT` carry
/// the exact coefficient row alongside the floating view.
#[derive(Debug)]
pub struct PmfTable {
    m: u64,
    /// `C(m, k)` for `k = 0..=m`; present iff the table is exact.
    coefficients: Option<Vec<BigUint>>,
    /// Floating view of the masses, always populated, normalized.
    masses: Vec<f64>,
}

impl PmfTable {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn is_exact(&self) -> bool {
        self.coefficients.is_some()
    }

    /// `P(X = k)`; zero outside `[0, m]`.
    pub fn mass(&self, k: u64) -> f64 {
        self.masses.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Exact numerator `C(m, k)` of `mass(k)` over `2^m`, when available.
    pub fn coefficient(&self, k: u64) -> Option<&BigUint> {
        self.coefficients
            .as_ref()
            .and_then(|row| row.get(k as usize))
    }

    fn build(m: u64) -> PmfTable {
        if m <= EXACT_PMF_LIMIT {
            let row = binomial_row(m);
            let masses = row.iter().map(|c| dyadic_to_f64(c, m)).collect();
            PmfTable {
                m,
                coefficients: Some(row),
                masses,
            }
        } else {
            PmfTable {
                m,
                coefficients: None,
                masses: float_masses(m),
            }
        }
    }
}

/// `C(m, k)` for `k = 0..=m` by the multiplicative recurrence.
fn binomial_row(m: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(m as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..m {
        c = c * (m - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

/// Floating masses for `m > EXACT_PMF_LIMIT`: seed the mode from the
/// central-binomial asymptotic series, run the ratio recurrence outward,
/// and normalize so the Kahan total is 1.
fn float_masses(m: u64) -> Vec<f64> {
    let mode = (m / 2) as usize;
    let mut masses = vec![0.0f64; m as usize + 1];
    masses[mode] = central_mass(m);
    let mf = m as f64;
    for k in (1..=mode).rev() {
        masses[k - 1] = masses[k] * (k as f64) / (mf - (k as f64) + 1.0);
    }
    for k in mode..(m as usize) {
        masses[k + 1] = masses[k] * (mf - k as f64) / (k as f64 + 1.0);
    }
    let total: f64 = masses.iter().copied().collect::<KahanSum>().value();
    for mass in &mut masses {
        *mass /= total;
    }
    masses
}

/// `C(m, floor(m/2)) / 2^m` from the asymptotic expansion
/// `C(2c, c)/4^c = (pi c)^{-1/2} (1 - 1/(8c) + 1/(128c^2) + 5/(1024c^3)
/// - 21/(32768c^4) + O(c^-5))`, full f64 accuracy for `c >= 1000`.
fn central_mass(m: u64) -> f64 {
    let c = (m / 2) as f64;
    let series = 1.0 - 1.0 / (8.0 * c) + 1.0 / (128.0 * c * c) + 5.0 / (1024.0 * c * c * c)
        - 21.0 / (32768.0 * c * c * c * c);
    let even = series / (std::f64::consts::PI * c).sqrt();
    if m.is_multiple_of(2) {
        even
    } else {
        // C(2c+1, c) / 2^(2c+1) = [C(2c, c)/4^c] * (2c+1) / (2(c+1))
        even * (2.0 * c + 1.0) / (2.0 * (c + 1.0))
    }
}

/// `num / 2^pow` in double precision: take the top 64 bits of `num` and
/// scale by the remaining power of two, so the result is correct to
/// about one part in 2^63.
pub(crate) fn dyadic_to_f64(num: &BigUint, pow: u64) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let bits = num.bits();
    if bits <= 64 {
        let v = num.to_u64().expect("fits by bit count") as f64;
        return mul_pow2(v, -(pow as i64));
    }
    let shift = bits - 64;
    let top = (num >> shift).to_u64().expect("exactly 64 bits") as f64;
    mul_pow2(top, shift as i64 - pow as i64)
}

/// `x * 2^e`, stepping through the exponent range so intermediate
/// factors stay representable (an ldexp without libm).
fn mul_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

fn pmf_cache() -> &'static RwLock<HashMap<u64, Arc<PmfTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<PmfTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The Binomial(m, 1/2) pmf `f(m, .)`, cached per `m` for the life of
/// the process (concurrent reads, exclusive insert).
pub fn binomial_pmf(m: u64) -> Result<Arc<PmfTable>> {
    if m == 0 {
        return Err(Error::Domain("pmf parameter m must be >= 1".into()));
    }
    if m > PMF_GUARD_M {
        return Err(Error::Guard {
            what: "binomial_pmf parameter m",
            limit: PMF_GUARD_M,
            actual: m,
        });
    }
    if let Some(table) = pmf_cache().read().expect("pmf cache poisoned").get(&m) {
        return Ok(Arc::clone(table));
    }
    let table = Arc::new(PmfTable::build(m));
    let mut cache = pmf_cache().write().expect("pmf cache poisoned");
    Ok(Arc::clone(cache.entry(m).or_insert(table)))
}

/// Pmf `g(m, .)` of a sum of `m` i.i.d. Rademacher (+-1) variables,
/// indexed by the sum `s` with `|s| <= m`, `s = m (mod 2)`.
#[derive(Debug, Clone)]
pub struct RademacherPmf {
    table: Arc<PmfTable>,
}

impl RademacherPmf {
    pub fn m(&self) -> u64 {
        self.table.m()
    }

    /// `g(m, s) = f(m, (s + m)/2)` on the lattice, zero elsewhere.
    pub fn mass(&self, s: i64) -> f64 {
        let m = self.table.m() as i64;
        if s.abs() > m || (s - m) % 2 != 0 {
            return 0.0;
        }
        self.table.mass(((s + m) / 2) as u64)
    }

    /// The underlying binomial table (`s = 2k - m`).
    pub fn binomial(&self) -> &PmfTable {
        &self.table
    }
}

pub fn rademacher_sum_pmf(m: u64) -> Result<RademacherPmf> {
    Ok(RademacherPmf {
        table: binomial_pmf(m)?,
    })
}

/// `P(X = 0 mod m)` for `X ~ Binomial(n, 1/2)`: exact dyadic summation
/// for `n <= EXACT_PMF_LIMIT`, compensated floating summation above.
pub fn prob_divisible(n: u64, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("modulus m must be >= 1".into()));
    }
    let table = binomial_pmf(n)?;
    if let Some(row) = &table.coefficients {
        let total: BigUint = row.iter().step_by(m as usize).sum();
        Ok(dyadic_to_f64(&total, n))
    } else {
        Ok(table
            .masses
            .iter()
            .step_by(m as usize)
            .copied()
            .collect::<KahanSum>()
            .value())
    }
}

/// One cell of the Lemma verification grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub n: u64,
    pub m: u64,
    pub probability: f64,
    pub bound: f64,
    pub ok: bool,
}

impl LemmaRow {
    pub const CSV_HEADER: &'static str = "n,m,probability,bound,ok";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.m, self.probability, self.bound, self.ok
        )
    }
}

/// Exhaustively verify `P(X = 0 mod m) <= 1/m + 2/sqrt(n)` over the grid
/// `1 <= n <= n_max`, `1 <= m <= m_max`.
///
/// Verdicts are integer-exact. With `A = sum_{k = 0 mod m} C(n, k)`, the
/// inequality `A/2^n - 1/m <= 2/sqrt(n)` holds iff `mA <= 2^n` (left side
/// nonpositive) or `n (mA - 2^n)^2 <= 4 m^2 2^{2n}` (both sides squared).
/// The reported probability and bound are floating renderings only.
pub fn lemma_bound_check(n_max: u64, m_max: u64) -> Result<Vec<LemmaRow>> {
    if n_max == 0 || m_max == 0 {
        return Err(Error::Domain(
            "lemma grid needs n_max >= 1 and m_max >= 1".into(),
        ));
    }
    let cells = n_max.saturating_mul(m_max);
    if cells > LEMMA_GRID_GUARD {
        return Err(Error::Guard {
            what: "lemma grid cells n_max * m_max",
            limit: LEMMA_GRID_GUARD,
            actual: cells,
        });
    }
    if n_max > EXACT_PMF_LIMIT {
        return Err(Error::Guard {
            what: "lemma grid n_max (exact mode only)",
            limit: EXACT_PMF_LIMIT,
            actual: n_max,
        });
    }

    let mut rows = Vec::with_capacity(cells as usize);
    for n in 1..=n_max {
        let table = binomial_pmf(n)?;
        let row = table.coefficients.as_ref().expect("n <= exact limit");
        let pow_n = BigUint::one() << n;
        for m in 1..=m_max {
            let a: BigUint = row.iter().step_by(m as usize).sum();
            let ma = &a * m;
            let ok = if ma <= pow_n {
                true
            } else {
                let d = &ma - &pow_n;
                BigUint::from(n) * &d * &d <= (BigUint::from(4 * m * m) << (2 * n))
            };
            rows.push(LemmaRow {
                n,
                m,
                probability: dyadic_to_f64(&a, n),
                bound: 1.0 / m as f64 + 2.0 / (n as f64).sqrt(),
                ok,
            });
        }
    }
    Ok(rows)
}
