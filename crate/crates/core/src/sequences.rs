//! Sequence families and consecutive-sum counting.
//!
//! A [`Sequence`] is a finite list of positive integers `a_1, ..., a_k`
//! together with the metadata needed to reproduce it. The set of its
//! consecutive sums is
//!
//! ```text
//! S(a) = { a_u + a_{u+1} + ... + a_v | 1 <= u <= v <= k }
//! ```
//!
//! which equals the set of positive differences of the partial sums
//! `p_0 = 0, p_i = a_1 + ... + a_i`. Two counters are provided:
//! [`count_distinct_sums`] marks every difference `p_j - p_i` in a bit
//! sieve of length `p_k + 1`, and [`brute_distinct_sums`] re-enumerates
//! every interval sum into a hash set. They implement the same
//! definition by different routes and must always agree.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Default memory cap for the distinct-sum bit sieve, in MiB.
pub const DEFAULT_SIEVE_CAP_MIB: u64 = 512;

/// Length guard for the brute-force counter.
pub const BRUTE_GUARD_K: u64 = 2000;

/// The sequence families under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    /// `a_i = i`.
    Identity,
    /// `a_i = 3i + e_i` with independent random signs `e_i`.
    Rademacher,
    /// `a_i = 2i` when `b | i`, else `2i - 1`.
    Block,
    /// A uniform random permutation of `1..=n`.
    Permutation,
    /// Each element of `1..=n` kept independently with probability `p`.
    Prandom,
    /// User-supplied values.
    Explicit,
}

impl SequenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceKind::Identity => "identity",
            SequenceKind::Rademacher => "rademacher",
            SequenceKind::Block => "block",
            SequenceKind::Permutation => "permutation",
            SequenceKind::Prandom => "prandom",
            SequenceKind::Explicit => "explicit",
        }
    }
}

/// Family parameters; only the members relevant to the kind are set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceParams {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
}

/// A finite positive-integer sequence with construction metadata.
///
/// `values` is always materialized, so serialized sequences can be
/// consumed without access to the generator. Identical
/// `(kind, n, params, seed)` always reproduce identical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub kind: SequenceKind,
    pub n: u64,
    #[serde(default)]
    pub params: SequenceParams,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub values: Vec<u64>,
}

impl Sequence {
    /// The identity sequence `1, 2, ..., n`.
    pub fn identity(n: u64) -> Sequence {
        Sequence {
            kind: SequenceKind::Identity,
            n,
            params: SequenceParams::default(),
            seed: None,
            values: (1..=n).collect(),
        }
    }

    /// `a_i = 3i + e_i` with signs drawn from the seeded generator.
    pub fn rademacher(n: u64, seed: u64) -> Sequence {
        let mut gen = rng::seeded(seed);
        let signs: Vec<i64> = (0..n)
            .map(|_| if gen.random::<bool>() { 1 } else { -1 })
            .collect();
        Sequence {
            kind: SequenceKind::Rademacher,
            n,
            params: SequenceParams::default(),
            seed: Some(seed),
            values: rademacher_values(&signs),
        }
    }

    /// `a_i = 2i` when `b | i`, else `2i - 1`.
    ///
    /// Total for every `b >= 1`; use [`block_param_in_range`] to see
    /// whether `b` lies in the range where the quadratic lower bound on
    /// `|S(a)|` is claimed.
    pub fn block(n: u64, b: u64) -> Result<Sequence> {
        if b == 0 {
            return Err(Error::Domain("block parameter b must be >= 1".into()));
        }
        let values = (1..=n)
            .map(|i| if i % b == 0 { 2 * i } else { 2 * i - 1 })
            .collect();
        Ok(Sequence {
            kind: SequenceKind::Block,
            n,
            params: SequenceParams {
                b: Some(b),
                p: None,
            },
            seed: None,
            values,
        })
    }

    /// A uniform random permutation of `1..=n` (unbiased shuffle).
    pub fn permutation(n: u64, seed: u64) -> Sequence {
        let mut values: Vec<u64> = (1..=n).collect();
        values.shuffle(&mut rng::seeded(seed));
        Sequence {
            kind: SequenceKind::Permutation,
            n,
            params: SequenceParams::default(),
            seed: Some(seed),
            values,
        }
    }

    /// Sorted subset of `1..=n`, each element kept with probability `p`.
    ///
    /// The result may be empty; every downstream operation accepts `k = 0`.
    pub fn prandom(n: u64, p: f64, seed: u64) -> Result<Sequence> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability p = {p} outside [0, 1]")));
        }
        let mut gen = rng::seeded(seed);
        let values = (1..=n).filter(|_| gen.random::<f64>() < p).collect();
        Ok(Sequence {
            kind: SequenceKind::Prandom,
            n,
            params: SequenceParams {
                b: None,
                p: Some(p),
            },
            seed: Some(seed),
            values,
        })
    }

    /// Wrap user-supplied values. All values must be positive; `n` is
    /// taken to be the largest value.
    pub fn explicit(values: Vec<u64>) -> Result<Sequence> {
        if values.contains(&0) {
            return Err(Error::Precondition(
                "explicit sequence values must be >= 1".into(),
            ));
        }
        let n = values.iter().copied().max().unwrap_or(0);
        Ok(Sequence {
            kind: SequenceKind::Explicit,
            n,
            params: SequenceParams::default(),
            seed: None,
            values,
        })
    }

    /// Number of terms `k`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Partial sums `0, a_1, a_1 + a_2, ...` of this sequence.
    pub fn partial_sums(&self) -> Result<PartialSumSet> {
        PartialSumSet::from_sequence(self)
    }

    /// Check the per-kind shape invariants. Intended for sequences read
    /// back from JSON, where the values may not match the metadata.
    pub fn validate(&self) -> Result<()> {
        if self.values.contains(&0) {
            return Err(Error::Precondition("sequence has a value < 1".into()));
        }
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        match self.kind {
            SequenceKind::Identity => {
                if self.values.len() as u64 != self.n
                    || self
                        .values
                        .iter()
                        .enumerate()
                        .any(|(i, &v)| v != i as u64 + 1)
                {
                    return Err(Error::Precondition(
                        "identity sequence must be 1..=n".into(),
                    ));
                }
            }
            SequenceKind::Rademacher => {
                if self.values.len() as u64 != self.n {
                    return Err(Error::Precondition(
                        "rademacher sequence must have n terms".into(),
                    ));
                }
                for (i, &v) in self.values.iter().enumerate() {
                    let base = 3 * (i as u64 + 1);
                    if v != base - 1 && v != base + 1 {
                        return Err(Error::Precondition(format!(
                            "rademacher term {} is {v}, expected {} or {}",
                            i + 1,
                            base - 1,
                            base + 1
                        )));
                    }
                }
            }
            SequenceKind::Block => {
                let b = self.params.b.ok_or_else(|| {
                    Error::Precondition("block sequence lacks parameter b".into())
                })?;
                if self.values.len() as u64 != self.n {
                    return Err(Error::Precondition(
                        "block sequence must have n terms".into(),
                    ));
                }
                for (i, &v) in self.values.iter().enumerate() {
                    let i1 = i as u64 + 1;
                    let expect = if i1.is_multiple_of(b) {
                        2 * i1
                    } else {
                        2 * i1 - 1
                    };
                    if v != expect {
                        return Err(Error::Precondition(format!(
                            "block term {i1} is {v}, expected {expect}"
                        )));
                    }
                }
            }
            SequenceKind::Permutation => {
                let mut sorted = self.values.clone();
                sorted.sort_unstable();
                if sorted.len() as u64 != self.n
                    || sorted.iter().enumerate().any(|(i, &v)| v != i as u64 + 1)
                {
                    return Err(Error::Precondition(
                        "permutation values must be a permutation of 1..=n".into(),
                    ));
                }
            }
            SequenceKind::Prandom => {
                if !increasing || self.values.last().is_some_and(|&v| v > self.n) {
                    return Err(Error::Precondition(
                        "prandom values must be strictly increasing within 1..=n".into(),
                    ));
                }
            }
            SequenceKind::Explicit => {}
        }
        Ok(())
    }

    /// Canonical JSON form; byte-identical for identical inputs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sequence serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Sequence> {
        serde_json::from_str(text)
            .map_err(|e| Error::Precondition(format!("bad sequence JSON: {e}")))
    }
}

/// Build a sequence of the given kind from scan/CLI-style inputs.
///
/// `seed` is ignored by the deterministic kinds; `params` must carry `b`
/// for block and `p` for prandom. Explicit sequences come from literal
/// values, not a generator, so they are rejected here.
pub fn construct(
    kind: SequenceKind,
    n: u64,
    params: SequenceParams,
    seed: u64,
) -> Result<Sequence> {
    if n == 0 {
        return Err(Error::Domain("sequence parameter n must be >= 1".into()));
    }
    match kind {
        SequenceKind::Identity => Ok(Sequence::identity(n)),
        SequenceKind::Rademacher => Ok(Sequence::rademacher(n, seed)),
        SequenceKind::Block => {
            let b = params
                .b
                .ok_or_else(|| Error::Domain("kind block requires parameter b".into()))?;
            Sequence::block(n, b)
        }
        SequenceKind::Permutation => Ok(Sequence::permutation(n, seed)),
        SequenceKind::Prandom => {
            let p = params
                .p
                .ok_or_else(|| Error::Domain("kind prandom requires parameter p".into()))?;
            Sequence::prandom(n, p, seed)
        }
        SequenceKind::Explicit => Err(Error::Domain(
            "explicit sequences are supplied as values, not generated".into(),
        )),
    }
}

/// `a_i = 3i + signs[i-1]`; factored out so tests can force sign patterns.
pub(crate) fn rademacher_values(signs: &[i64]) -> Vec<u64> {
    signs
        .iter()
        .enumerate()
        .map(|(idx, &e)| {
            debug_assert!(e == 1 || e == -1);
            (3 * (idx as i64 + 1) + e) as u64
        })
        .collect()
}

/// Whether `b` lies in `[log n, n / (log n)^2]`, the range for which the
/// block construction's quadratic lower bound applies.
pub fn block_param_in_range(n: u64, b: u64) -> bool {
    let ln = (n as f64).ln();
    let b = b as f64;
    b >= ln && b <= n as f64 / (ln * ln)
}

/// The set `P(a) = {p_0, ..., p_k}` of partial sums; `p_0 = 0` and the
/// sums are strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSumSet {
    sums: Vec<u64>,
}

impl PartialSumSet {
    pub fn from_sequence(a: &Sequence) -> Result<PartialSumSet> {
        let mut sums = Vec::with_capacity(a.values.len() + 1);
        let mut acc: u64 = 0;
        sums.push(0);
        for &v in &a.values {
            acc = acc.checked_add(v).ok_or(Error::Overflow("partial sums"))?;
            sums.push(acc);
        }
        Ok(PartialSumSet { sums })
    }

    /// Wrap an explicit sorted set starting at 0 (test fixtures, external P).
    pub fn from_sorted(sums: Vec<u64>) -> Result<PartialSumSet> {
        if sums.first() != Some(&0) {
            return Err(Error::Precondition("partial sums must start at 0".into()));
        }
        if !sums.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Precondition(
                "partial sums must be strictly increasing".into(),
            ));
        }
        Ok(PartialSumSet { sums })
    }

    pub fn sums(&self) -> &[u64] {
        &self.sums
    }

    /// `|P| = k + 1`.
    pub fn set_size(&self) -> u64 {
        self.sums.len() as u64
    }

    /// `p_k`, the full sum of the sequence.
    pub fn total(&self) -> u64 {
        *self.sums.last().expect("never empty")
    }
}

/// `|S(a)|` by bit-sieve marking of all differences `p_j - p_i`, `i < j`.
///
/// Needs one bit per integer in `[0, p_k]`; refuses above the memory cap.
pub fn count_distinct_sums(a: &Sequence) -> Result<u64> {
    count_distinct_sums_capped(a, DEFAULT_SIEVE_CAP_MIB)
}

/// [`count_distinct_sums`] with an explicit sieve cap in MiB.
pub fn count_distinct_sums_capped(a: &Sequence, cap_mib: u64) -> Result<u64> {
    if a.values.is_empty() {
        return Ok(0);
    }
    let p = a.partial_sums()?;
    let total = p.total();
    let required_bytes = total / 8 + 1;
    let cap_bytes = cap_mib.saturating_mul(1024 * 1024);
    if required_bytes > cap_bytes {
        return Err(Error::SieveTooLarge {
            required_bytes,
            cap_bytes,
        });
    }

    let words = (total as usize) / 64 + 1;
    let mut bits = vec![0u64; words];
    let sums = p.sums();
    for j in 1..sums.len() {
        let pj = sums[j];
        for &pi in &sums[..j] {
            let d = pj - pi;
            bits[(d >> 6) as usize] |= 1u64 << (d & 63);
        }
    }
    // Bit 0 is never set, so the popcount is exactly |S(a)|.
    Ok(bits.iter().map(|w| u64::from(w.count_ones())).sum())
}

/// Brute-force oracle for [`count_distinct_sums`]: re-enumerates every
/// interval sum `a_u + ... + a_v` into a hash set. Guarded at
/// `k <= BRUTE_GUARD_K`.
pub fn brute_distinct_sums(a: &Sequence) -> Result<u64> {
    let k = a.values.len() as u64;
    if k > BRUTE_GUARD_K {
        return Err(Error::Guard {
            what: "brute_distinct_sums length",
            limit: BRUTE_GUARD_K,
            actual: k,
        });
    }
    let mut seen = HashSet::with_capacity((k * (k + 1) / 2) as usize);
    for u in 0..a.values.len() {
        let mut s: u64 = 0;
        for &v in &a.values[u..] {
            s = s.checked_add(v).ok_or(Error::Overflow("interval sums"))?;
            seen.insert(s);
        }
    }
    Ok(seen.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_shapes() {
        assert_eq!(Sequence::identity(1).values, vec![1]);
        assert_eq!(Sequence::identity(4).values, vec![1, 2, 3, 4]);
        let s = Sequence::identity(10);
        assert_eq!(s.len(), 10);
        assert_eq!(*s.values.last().unwrap(), 10);
        s.validate().unwrap();
    }

    #[test]
    fn rademacher_forced_signs() {
        assert_eq!(rademacher_values(&[1, 1, 1]), vec![4, 7, 10]);
        assert_eq!(rademacher_values(&[-1, -1, -1]), vec![2, 5, 8]);
    }

    #[test]
    fn rademacher_gaps_stay_in_range() {
        // 3(i+1) + e' - (3i + e) = 3 + e' - e lies in [1, 5]; check all
        // four sign pairs exhaustively, then random draws.
        for &e in &[-1i64, 1] {
            for &e2 in &[-1i64, 1] {
                let v = rademacher_values(&[e, e2]);
                let gap = v[1] - v[0];
                assert!((1..=5).contains(&gap));
            }
        }
        for seed in 0..50u64 {
            let s = Sequence::rademacher(64, seed);
            s.validate().unwrap();
            for w in s.values.windows(2) {
                let gap = w[1] - w[0];
                assert!((1..=5).contains(&gap), "gap {gap} out of range");
            }
        }
    }

    #[test]
    fn block_small_cases() {
        assert_eq!(Sequence::block(5, 2).unwrap().values, vec![1, 4, 5, 8, 9]);
        assert_eq!(Sequence::block(4, 10).unwrap().values, vec![1, 3, 5, 7]);
        Sequence::block(5, 2).unwrap().validate().unwrap();
        assert!(Sequence::block(5, 0).is_err());
    }

    #[test]
    fn block_interval_sum_closed_form() {
        // Every interval sum equals v^2 - u^2 + floor((v-u)/b) + eps with
        // eps in {0, 1}; checked exhaustively at n = 500, b = 13.
        let n = 500u64;
        let b = 13u64;
        let a = Sequence::block(n, b).unwrap();
        let p = a.partial_sums().unwrap();
        let sums = p.sums();
        for u in 0..n {
            for v in (u + 1)..=n {
                let interval = sums[v as usize] - sums[u as usize];
                let base = (v * v - u * u + (v - u) / b) as i128;
                let eps = interval as i128 - base;
                assert!(
                    eps == 0 || eps == 1,
                    "u={u} v={v}: interval {interval}, closed form {base}"
                );
            }
        }
    }

    #[test]
    fn permutation_is_permutation() {
        let s = Sequence::permutation(1, 9);
        assert_eq!(s.values, vec![1]);
        for seed in 0..20u64 {
            let s = Sequence::permutation(30, seed);
            s.validate().unwrap();
        }
    }

    #[test]
    fn permutation_all_orders_reachable() {
        // Chi-square over 6000 draws of S_3; df = 5, so a statistic above
        // 25 would be a > 6-sigma surprise.
        let mut counts = std::collections::HashMap::new();
        for i in 0..6000u64 {
            let s = Sequence::permutation(3, crate::rng::substream_seed(99, i));
            *counts.entry(s.values.clone()).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6, "all 6 permutations must appear");
        let expected = 1000.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 25.0, "chi-square {chi2} too large");
    }

    #[test]
    fn prandom_extremes_and_concentration() {
        let all = Sequence::prandom(7, 1.0, 3).unwrap();
        assert_eq!(all.values, vec![1, 2, 3, 4, 5, 6, 7]);
        let none = Sequence::prandom(7, 0.0, 3).unwrap();
        assert!(none.values.is_empty());
        assert!(Sequence::prandom(5, 1.5, 0).is_err());

        // Binomial(1000, 1/2): 5 sigma is about 79.
        let s = Sequence::prandom(1000, 0.5, 123).unwrap();
        let k = s.len() as i64;
        assert!((k - 500).abs() <= 80, "length {k} outside 500 +/- 80");
        s.validate().unwrap();
    }

    #[test]
    fn partial_sums_small() {
        let a = Sequence::explicit(vec![1, 2, 3, 4]).unwrap();
        assert_eq!(a.partial_sums().unwrap().sums(), &[0, 1, 3, 6, 10]);
        let empty = Sequence::prandom(5, 0.0, 0).unwrap();
        assert_eq!(empty.partial_sums().unwrap().sums(), &[0]);
        let id = Sequence::identity(10);
        assert_eq!(id.partial_sums().unwrap().total(), 55);
    }

    #[test]
    fn partial_sums_overflow_is_an_error() {
        let a = Sequence::explicit(vec![u64::MAX - 1, 2]).unwrap();
        assert_eq!(a.partial_sums(), Err(Error::Overflow("partial sums")));
    }

    #[test]
    fn count_small_cases() {
        let a = Sequence::explicit(vec![1, 2, 3, 4]).unwrap();
        // S = {1,2,3,4,5,6,7,9,10}
        assert_eq!(count_distinct_sums(&a).unwrap(), 9);
        assert_eq!(brute_distinct_sums(&a).unwrap(), 9);
        let one = Sequence::explicit(vec![1]).unwrap();
        assert_eq!(count_distinct_sums(&one).unwrap(), 1);
        let empty = Sequence::prandom(4, 0.0, 0).unwrap();
        assert_eq!(count_distinct_sums(&empty).unwrap(), 0);
        assert_eq!(brute_distinct_sums(&empty).unwrap(), 0);
    }

    #[test]
    fn distinct_sum_sequence_attains_triangular_count() {
        // Powers of two: all interval sums distinct, so k(k+1)/2 of them.
        let k = 10u64;
        let a = Sequence::explicit((0..k).map(|i| 1u64 << i).collect()).unwrap();
        assert_eq!(count_distinct_sums(&a).unwrap(), k * (k + 1) / 2);
        assert_eq!(brute_distinct_sums(&a).unwrap(), k * (k + 1) / 2);
    }

    #[test]
    fn sieve_cap_is_enforced() {
        let a = Sequence::explicit(vec![1 << 40]).unwrap();
        match count_distinct_sums_capped(&a, 16) {
            Err(Error::SieveTooLarge { .. }) => {}
            other => panic!("expected SieveTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn brute_guard_is_enforced() {
        let a = Sequence::identity(BRUTE_GUARD_K + 1);
        assert!(matches!(brute_distinct_sums(&a), Err(Error::Guard { .. })));
    }

    #[test]
    fn serialization_is_deterministic_and_round_trips() {
        let a = Sequence::rademacher(16, 77);
        let b = Sequence::rademacher(16, 77);
        assert_eq!(a.to_json(), b.to_json());
        let back = Sequence::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
        back.validate().unwrap();

        // Kind-specific params serialize; absent ones are omitted.
        let blk = Sequence::block(3, 2).unwrap();
        assert!(blk.to_json().contains("\"b\":2"));
        assert!(!blk.to_json().contains("\"p\""));
        assert!(!blk.to_json().contains("\"seed\""));
    }

    #[test]
    fn block_range_warning_boundary() {
        // n = 1000: log n ~ 6.9, n / (log n)^2 ~ 21.0
        assert!(!block_param_in_range(1000, 5));
        assert!(block_param_in_range(1000, 7));
        assert!(block_param_in_range(1000, 20));
        assert!(!block_param_in_range(1000, 22));
    }
}
