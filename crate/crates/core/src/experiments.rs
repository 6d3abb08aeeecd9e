//! Experiment orchestration: Monte Carlo energy estimation, exact
//! small-n expectation, distinct-sum scans, and the serialized record
//! format every command emits.
//!
//! Randomized experiments draw trial `t` of master seed `s` from the
//! substream generator seeded with `substream_seed(s, index)`, so the
//! trial set is reproducible no matter how the worker pool schedules it;
//! results are collected in trial-index order before aggregation so the
//! reductions are deterministic too.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::additive_energy;
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::rng::substream_seed;
use crate::sequences::{
    construct, count_distinct_sums_capped, rademacher_values, Sequence, SequenceKind,
    SequenceParams,
};

/// Exhaustive sign-pattern enumeration caps at `2^16` cases.
pub const EXACT_ENERGY_GUARD_N: u64 = 16;

/// One emitted result row.
///
/// `stderr` is present exactly when `trials` is present and greater
/// than 1; `wall_ms` is informative only and excluded from any
/// determinism comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub statistic: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub wall_ms: u64,
}

impl ExperimentRecord {
    /// The record contract: finite value, and stderr tied to trials > 1.
    pub fn check(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::Precondition(format!(
                "record {}/{} has non-finite value",
                self.command, self.statistic
            )));
        }
        let expect_stderr = self.trials.is_some_and(|t| t > 1);
        if expect_stderr != self.stderr.is_some() {
            return Err(Error::Precondition(format!(
                "record {}/{}: stderr must be present iff trials > 1",
                self.command, self.statistic
            )));
        }
        Ok(())
    }
}

/// Render records as CSV: fixed leading columns, then every parameter
/// key that occurs anywhere (sorted), then `wall_ms` last. Absent
/// entries are empty cells.
pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let keys: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.params.keys().map(String::as_str))
        .collect();
    let mut out = String::from("command,statistic,value,stderr,trials,seed");
    for key in &keys {
        out.push(',');
        out.push_str(key);
    }
    out.push_str(",wall_ms\n");
    for r in records {
        out.push_str(&r.command);
        out.push(',');
        out.push_str(&r.statistic);
        out.push(',');
        out.push_str(&r.value.to_string());
        out.push(',');
        if let Some(s) = r.stderr {
            out.push_str(&s.to_string());
        }
        out.push(',');
        if let Some(t) = r.trials {
            out.push_str(&t.to_string());
        }
        out.push(',');
        if let Some(s) = r.seed {
            out.push_str(&s.to_string());
        }
        for key in &keys {
            out.push(',');
            if let Some(v) = r.params.get(*key) {
                out.push_str(v);
            }
        }
        out.push(',');
        out.push_str(&r.wall_ms.to_string());
        out.push('\n');
    }
    out
}

/// Render records as a JSON array.
pub fn records_to_json(records: &[ExperimentRecord]) -> String {
    serde_json::to_string(records).expect("record serialization cannot fail")
}

/// Sample mean and standard error (`None` for fewer than two samples).
fn mean_and_stderr(samples: &[f64]) -> (f64, Option<f64>) {
    let n = samples.len() as f64;
    let mean = samples.iter().copied().collect::<KahanSum>().value() / n;
    if samples.len() < 2 {
        return (mean, None);
    }
    let ss = samples
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<KahanSum>()
        .value();
    let variance = ss / (n - 1.0);
    (mean, Some((variance / n).sqrt()))
}

fn fmt_f64(x: f64) -> String {
    x.to_string()
}

/// Monte Carlo estimate of `E[E(P(a))]` over rademacher sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEnergyEstimate {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    /// Mean of `E(P(a))` over the trials.
    pub mean: f64,
    /// Standard error of the mean; absent for a single trial.
    pub stderr: Option<f64>,
    /// `mean / n^2`, the quantity that should stay bounded.
    pub ratio: f64,
}

impl McEnergyEstimate {
    pub fn records(&self) -> Vec<ExperimentRecord> {
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), self.n.to_string());
        params.insert("kind".to_string(), "rademacher".to_string());
        params.insert("substreams".to_string(), format!("0..{}", self.trials));
        let base = ExperimentRecord {
            command: "mc-energy".to_string(),
            params,
            statistic: "mean_energy".to_string(),
            value: self.mean,
            stderr: self.stderr,
            trials: Some(self.trials),
            seed: Some(self.seed),
            wall_ms: 0,
        };
        let mut ratio = base.clone();
        ratio.statistic = "energy_over_n2".to_string();
        ratio.value = self.ratio;
        ratio.stderr = self.stderr.map(|s| s / (self.n as f64 * self.n as f64));
        vec![base, ratio]
    }
}

/// Average `E(P(a))` over `trials` independent rademacher draws of
/// length `n`; trial `t` uses substream `t` of the master seed.
pub fn mc_expected_energy(n: u64, trials: u64, seed: u64) -> Result<McEnergyEstimate> {
    if n == 0 || trials == 0 {
        return Err(Error::Domain(
            "mc_expected_energy needs n >= 1 and trials >= 1".into(),
        ));
    }
    let energies: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let a = Sequence::rademacher(n, substream_seed(seed, t));
            let p = a.partial_sums()?;
            Ok(additive_energy(&p)?.energy as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_and_stderr(&energies);
    Ok(McEnergyEstimate {
        n,
        trials,
        seed,
        mean,
        stderr,
        ratio: mean / (n as f64 * n as f64),
    })
}

/// Exact `E[E(P(a))]` for rademacher sequences of length `n <= 16`, by
/// enumerating all `2^n` sign patterns. The result is the rational
/// (total energy) / 2^n, which is exactly representable here.
pub fn exact_expected_energy(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("exact_expected_energy needs n >= 1".into()));
    }
    if n > EXACT_ENERGY_GUARD_N {
        return Err(Error::Guard {
            what: "exact_expected_energy n",
            limit: EXACT_ENERGY_GUARD_N,
            actual: n,
        });
    }
    let patterns = 1u64 << n;
    let total: u128 = (0..patterns)
        .into_par_iter()
        .map(|mask| -> Result<u128> {
            let signs: Vec<i64> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect();
            let a = Sequence::explicit(rademacher_values(&signs))?;
            let p = a.partial_sums()?;
            Ok(additive_energy(&p)?.energy as u128)
        })
        .try_reduce(|| 0u128, |a, b| Ok(a + b))?;
    Ok(total as f64 / patterns as f64)
}

/// Mean `|S(a)| / n^2` over uniform random permutations of `[n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationEstimate {
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub per_rep: Vec<f64>,
}

impl PermutationEstimate {
    pub fn records(&self) -> Vec<ExperimentRecord> {
        let mut records = Vec::with_capacity(self.per_rep.len() + 1);
        for (rep, &ratio) in self.per_rep.iter().enumerate() {
            let mut params = BTreeMap::new();
            params.insert("n".to_string(), self.n.to_string());
            params.insert("kind".to_string(), "permutation".to_string());
            params.insert("rep".to_string(), rep.to_string());
            params.insert("substream".to_string(), rep.to_string());
            records.push(ExperimentRecord {
                command: "permutation".to_string(),
                params,
                statistic: "distinct_ratio".to_string(),
                value: ratio,
                stderr: None,
                trials: None,
                seed: Some(self.seed),
                wall_ms: 0,
            });
        }
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), self.n.to_string());
        params.insert("kind".to_string(), "permutation".to_string());
        params.insert("substreams".to_string(), format!("0..{}", self.reps));
        records.push(ExperimentRecord {
            command: "permutation".to_string(),
            params,
            statistic: "mean_distinct_ratio".to_string(),
            value: self.mean,
            stderr: self.stderr,
            trials: Some(self.reps),
            seed: Some(self.seed),
            wall_ms: 0,
        });
        records
    }
}

/// Estimate the permutation consecutive-sum density `|S(a)|/n^2`.
pub fn permutation_ratio(
    n: u64,
    reps: u64,
    seed: u64,
    cap_mib: u64,
) -> Result<PermutationEstimate> {
    if n == 0 || reps == 0 {
        return Err(Error::Domain(
            "permutation_ratio needs n >= 1 and reps >= 1".into(),
        ));
    }
    let per_rep: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let a = Sequence::permutation(n, substream_seed(seed, rep));
            let count = count_distinct_sums_capped(&a, cap_mib)?;
            Ok(count as f64 / (n as f64 * n as f64))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_and_stderr(&per_rep);
    Ok(PermutationEstimate {
        n,
        reps,
        seed,
        mean,
        stderr,
        per_rep,
    })
}

fn kind_params_strings(kind: SequenceKind, params: SequenceParams) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    map.insert("kind".to_string(), kind.as_str().to_string());
    if let Some(b) = params.b {
        map.insert("b".to_string(), b.to_string());
    }
    if let Some(p) = params.p {
        map.insert("p".to_string(), fmt_f64(p));
    }
    map
}

fn seeded_kind(kind: SequenceKind) -> bool {
    matches!(
        kind,
        SequenceKind::Rademacher | SequenceKind::Permutation | SequenceKind::Prandom
    )
}

/// Scan `|S(a)|/n^2` across `n_list`, with `reps` repetitions per `n`.
///
/// Emits one `distinct_ratio` record per repetition (substream index
/// `ni * reps + rep`) and one `mean_distinct_ratio` aggregate per `n`.
pub fn scan_distinct(
    kind: SequenceKind,
    n_list: &[u64],
    params: SequenceParams,
    seed: u64,
    reps: u64,
    cap_mib: u64,
) -> Result<Vec<ExperimentRecord>> {
    if n_list.is_empty() || reps == 0 {
        return Err(Error::Domain(
            "scan needs at least one n and reps >= 1".into(),
        ));
    }
    let jobs: Vec<(usize, u64)> = n_list
        .iter()
        .enumerate()
        .flat_map(|(ni, _)| (0..reps).map(move |rep| (ni, rep)))
        .collect();
    let ratios: Vec<f64> = jobs
        .par_iter()
        .map(|&(ni, rep)| -> Result<f64> {
            let n = n_list[ni];
            let sub = substream_seed(seed, ni as u64 * reps + rep);
            let a = construct(kind, n, params, sub)?;
            let count = count_distinct_sums_capped(&a, cap_mib)?;
            Ok(count as f64 / (n as f64 * n as f64))
        })
        .collect::<Result<Vec<f64>>>()?;

    let randomized = seeded_kind(kind);
    let mut records = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let slice = &ratios[ni * reps as usize..(ni + 1) * reps as usize];
        for (rep, &ratio) in slice.iter().enumerate() {
            let mut row_params = kind_params_strings(kind, params);
            row_params.insert("n".to_string(), n.to_string());
            row_params.insert("rep".to_string(), rep.to_string());
            if randomized {
                row_params.insert(
                    "substream".to_string(),
                    (ni as u64 * reps + rep as u64).to_string(),
                );
            }
            records.push(ExperimentRecord {
                command: "scan".to_string(),
                params: row_params,
                statistic: "distinct_ratio".to_string(),
                value: ratio,
                stderr: None,
                trials: None,
                seed: randomized.then_some(seed),
                wall_ms: 0,
            });
        }
        let (mean, stderr) = mean_and_stderr(slice);
        let mut agg_params = kind_params_strings(kind, params);
        agg_params.insert("n".to_string(), n.to_string());
        if randomized {
            agg_params.insert(
                "substreams".to_string(),
                format!("{}..{}", ni as u64 * reps, (ni as u64 + 1) * reps),
            );
        }
        records.push(ExperimentRecord {
            command: "scan".to_string(),
            params: agg_params,
            statistic: "mean_distinct_ratio".to_string(),
            value: mean,
            stderr,
            trials: Some(reps),
            seed: randomized.then_some(seed),
            wall_ms: 0,
        });
    }
    Ok(records)
}

/// Scan `|S(a)|/n^2` for p-random subsets of `[n]` across `p_list`.
pub fn prandom_scan(
    n: u64,
    p_list: &[f64],
    reps: u64,
    seed: u64,
    cap_mib: u64,
) -> Result<Vec<ExperimentRecord>> {
    if n == 0 || p_list.is_empty() || reps == 0 {
        return Err(Error::Domain(
            "prandom scan needs n >= 1, at least one p, and reps >= 1".into(),
        ));
    }
    let jobs: Vec<(usize, u64)> = p_list
        .iter()
        .enumerate()
        .flat_map(|(pi, _)| (0..reps).map(move |rep| (pi, rep)))
        .collect();
    let ratios: Vec<f64> = jobs
        .par_iter()
        .map(|&(pi, rep)| -> Result<f64> {
            let p = p_list[pi];
            let sub = substream_seed(seed, pi as u64 * reps + rep);
            let a = Sequence::prandom(n, p, sub)?;
            let count = count_distinct_sums_capped(&a, cap_mib)?;
            Ok(count as f64 / (n as f64 * n as f64))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut records = Vec::new();
    for (pi, &p) in p_list.iter().enumerate() {
        let slice = &ratios[pi * reps as usize..(pi + 1) * reps as usize];
        for (rep, &ratio) in slice.iter().enumerate() {
            let mut row_params = BTreeMap::new();
            row_params.insert("kind".to_string(), "prandom".to_string());
            row_params.insert("n".to_string(), n.to_string());
            row_params.insert("p".to_string(), fmt_f64(p));
            row_params.insert("rep".to_string(), rep.to_string());
            row_params.insert(
                "substream".to_string(),
                (pi as u64 * reps + rep as u64).to_string(),
            );
            records.push(ExperimentRecord {
                command: "prandom".to_string(),
                params: row_params,
                statistic: "distinct_ratio".to_string(),
                value: ratio,
                stderr: None,
                trials: None,
                seed: Some(seed),
                wall_ms: 0,
            });
        }
        let (mean, stderr) = mean_and_stderr(slice);
        let mut agg_params = BTreeMap::new();
        agg_params.insert("kind".to_string(), "prandom".to_string());
        agg_params.insert("n".to_string(), n.to_string());
        agg_params.insert("p".to_string(), fmt_f64(p));
        agg_params.insert(
            "substreams".to_string(),
            format!("{}..{}", pi as u64 * reps, (pi as u64 + 1) * reps),
        );
        records.push(ExperimentRecord {
            command: "prandom".to_string(),
            params: agg_params,
            statistic: "mean_distinct_ratio".to_string(),
            value: mean,
            stderr,
            trials: Some(reps),
            seed: Some(seed),
            wall_ms: 0,
        });
    }
    Ok(records)
}
