//! Additive energy of partial-sum sets.
//!
//! For a finite set `P` of integers the additive energy is
//!
//! ```text
//! E(P) = |{(x, y, z, w) in P^4 | x - y = z - w}| = sum_t r_P(t)^2
//! ```
//!
//! where `r_P(t)` counts representations of `t` as a difference. Since
//! `P` here is sorted and duplicate-free, every positive difference
//! `p_j - p_i` (i < j) appears once per index pair, so the whole energy
//! folds into run-lengths over the multiset of positive differences:
//! `E = 2 * sum_t m_t^2 + |P|^2`. The support of the difference set
//! `P - P` is `2 * (#distinct positive differences) + 1`, which ties the
//! energy report back to consecutive-sum counting through
//! `|S(a)| = (|P - P| - 1) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::PartialSumSet;

/// Default guard on `k = |P| - 1`: the difference multiset holds
/// `k(k+1)/2` 64-bit values, about 0.6 GiB at the limit (plus sort
/// scratch).
pub const DEFAULT_ENERGY_GUARD_K: u64 = 12000;

/// Guard on `|P|` for the brute-force decomposition check.
pub const DECOMPOSITION_GUARD: u64 = 400;

/// Energy and difference-set statistics of a set `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `|P|`.
    pub set_size: u64,
    /// `E(P)`.
    pub energy: u64,
    /// `|P - P|`, always odd.
    pub diff_support: u64,
    /// `floor(|P|^4 / |P - P|)`; Cauchy-Schwarz forces `energy` at least
    /// this large.
    pub cs_lower_bound: u64,
    /// `(|P - P| - 1) / 2`, which equals `|S(a)|` when `P = P(a)`.
    pub distinct_sums: u64,
}

/// Energy report for a partial-sum set, with the default size guard.
pub fn additive_energy(p: &PartialSumSet) -> Result<EnergyReport> {
    additive_energy_guarded(p, DEFAULT_ENERGY_GUARD_K)
}

/// [`additive_energy`] with an explicit guard on `k = |P| - 1`.
pub fn additive_energy_guarded(p: &PartialSumSet, k_cap: u64) -> Result<EnergyReport> {
    energy_of_set(p.sums(), k_cap)
}

/// Energy of an arbitrary strictly increasing set of integers.
///
/// [`additive_energy`] delegates here; the separate entry point exists
/// because translated and dilated copies of a partial-sum set no longer
/// start at zero, and the invariance laws `E(P + c) = E(c - P) =
/// E(lambda P) = E(P)` are stated for such copies.
pub fn energy_of_set(values: &[u64], k_cap: u64) -> Result<EnergyReport> {
    if values.is_empty() {
        return Err(Error::Precondition("energy requires a nonempty set".into()));
    }
    if !values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Precondition(
            "energy requires strictly increasing values".into(),
        ));
    }
    let m = values.len() as u64;
    let k = m - 1;
    if k > k_cap {
        return Err(Error::Guard {
            what: "additive_energy set size k",
            limit: k_cap,
            actual: k,
        });
    }

    let mut diffs = Vec::with_capacity((k * (k + 1) / 2) as usize);
    for j in 1..values.len() {
        let pj = values[j];
        for &pi in &values[..j] {
            diffs.push(pj - pi);
        }
    }
    diffs.sort_unstable();

    // Run-lengths m_t over the sorted multiset of positive differences.
    let mut pos_square_sum: u64 = 0;
    let mut distinct_pos: u64 = 0;
    let mut i = 0;
    while i < diffs.len() {
        let mut j = i + 1;
        while j < diffs.len() && diffs[j] == diffs[i] {
            j += 1;
        }
        let run = (j - i) as u64;
        pos_square_sum += run * run;
        distinct_pos += 1;
        i = j;
    }

    let energy = 2 * pos_square_sum + m * m;
    let diff_support = 2 * distinct_pos + 1;
    let cs_lower_bound = ((m as u128).pow(4) / diff_support as u128) as u64;
    Ok(EnergyReport {
        set_size: m,
        energy,
        diff_support,
        cs_lower_bound,
        distinct_sums: distinct_pos,
    })
}

/// Certified lower bound on `|S(a)|` from the energy alone:
/// `floor((|P|^4 / E - 1) / 2)`.
///
/// Cauchy-Schwarz gives `|P - P| >= |P|^4 / E`, and
/// `|S(a)| = (|P - P| - 1)/2`. Panics if `report.energy` is zero, which
/// no report produced by this module can be.
pub fn distinct_sums_from_energy(report: &EnergyReport) -> u64 {
    assert!(report.energy >= 1, "energy is at least |P|^2 >= 1");
    let m4 = (report.set_size as u128).pow(4);
    let e = report.energy as u128;
    ((m4 - e) / (2 * e)) as u64
}

/// Verify `E(P) = 2 * N + |P|^2` where `N` counts coincidences
/// `p_j - p_i = p_l - p_k` over index pairs `i < j`, `k < l`, by direct
/// enumeration — an independent route to the energy than the sorted
/// run-length fold.
pub fn energy_decomposition_check(p: &PartialSumSet) -> Result<bool> {
    let m = p.set_size();
    if m > DECOMPOSITION_GUARD {
        return Err(Error::Guard {
            what: "energy_decomposition_check set size |P|",
            limit: DECOMPOSITION_GUARD,
            actual: m,
        });
    }
    let sums = p.sums();
    let mut diffs = Vec::new();
    for j in 1..sums.len() {
        for i in 0..j {
            diffs.push(sums[j] - sums[i]);
        }
    }
    let mut coincidences: u64 = 0;
    for x in &diffs {
        for y in &diffs {
            if x == y {
                coincidences += 1;
            }
        }
    }
    let energy = additive_energy_guarded(p, DECOMPOSITION_GUARD)?.energy;
    Ok(energy == 2 * coincidences + m * m)
}
