//! consum: drive the consecutive-sum laboratory from the shell.
//!
//! Every command writes CSV (default) or JSON to stdout or `--out`, and
//! reruns with identical flags and seed reproduce identical bytes except
//! for the informational `wall_ms` column. Exit codes: 0 on success, 1
//! on usage errors, 2 when a size guard or the sieve memory cap refuses
//! the computation.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use consum::bounds::{
    gcd_sum, gcd_sum_direct, lattice_count, upper_bound_check_capped, MathConstants,
};
use consum::energy::additive_energy;
use consum::experiments::{
    exact_expected_energy, mc_expected_energy, permutation_ratio, prandom_scan, records_to_csv,
    records_to_json, scan_distinct, ExperimentRecord,
};
use consum::probability::lemma_bound_check;
use consum::sequences::{
    block_param_in_range, construct, count_distinct_sums_capped, Sequence, SequenceKind,
    SequenceParams,
};
use consum::{EnergyReport, LatticeCount, LemmaRow};

#[derive(Parser)]
#[command(
    name = "consum",
    version,
    about = "Consecutive-sum statistics of integer sequences: constructions, counts, additive energy, and bound verification"
)]
struct Cli {
    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write output to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Memory cap for the distinct-sum bit sieve, in MiB.
    #[arg(long, global = true, default_value_t = 512)]
    mem_cap_mib: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Identity,
    Rademacher,
    Block,
    Permutation,
    Prandom,
    Explicit,
}

impl From<KindArg> for SequenceKind {
    fn from(kind: KindArg) -> SequenceKind {
        match kind {
            KindArg::Identity => SequenceKind::Identity,
            KindArg::Rademacher => SequenceKind::Rademacher,
            KindArg::Block => SequenceKind::Block,
            KindArg::Permutation => SequenceKind::Permutation,
            KindArg::Prandom => SequenceKind::Prandom,
            KindArg::Explicit => SequenceKind::Explicit,
        }
    }
}

/// Flags that describe one sequence.
#[derive(Args)]
struct SequenceArgs {
    /// Sequence family.
    #[arg(long, value_enum)]
    kind: KindArg,

    /// Bound/length parameter n (all kinds except explicit).
    #[arg(long)]
    n: Option<u64>,

    /// Block parameter b (kind=block).
    #[arg(long)]
    b: Option<u64>,

    /// Inclusion probability p (kind=prandom).
    #[arg(long)]
    p: Option<f64>,

    /// Comma-separated values (kind=explicit).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<u64>>,
}

impl SequenceArgs {
    fn build(&self, seed: u64) -> anyhow::Result<Sequence> {
        if let KindArg::Explicit = self.kind {
            let values = self
                .values
                .clone()
                .context("kind=explicit requires --values")?;
            return Ok(Sequence::explicit(values)?);
        }
        let n = self.n.context("this kind requires --n")?;
        if let (KindArg::Block, Some(b)) = (self.kind, self.b) {
            warn_block_range(n, b);
        }
        let params = SequenceParams {
            b: self.b,
            p: self.p,
        };
        Ok(construct(self.kind.into(), n, params, seed)?)
    }
}

/// The block construction is total, but its quadratic lower bound is
/// only claimed for b in [log n, n/(log n)^2]; say so without refusing.
fn warn_block_range(n: u64, b: u64) {
    if !block_param_in_range(n, b) {
        eprintln!(
            "warning: block parameter b={b} is outside [log n, n/(log n)^2] for n={n}; \
             the sequence is well-defined but the quadratic lower bound is not claimed there"
        );
    }
}

#[derive(Subcommand)]
enum Command {
    /// Construct a sequence and print it as canonical JSON.
    Construct {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Count distinct consecutive sums |S(a)| of one sequence.
    Count {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Additive energy report of the partial-sum set of one sequence.
    Energy {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Monte Carlo estimate of E[E(P(a))] over rademacher sequences.
    McEnergy {
        /// Sequence length.
        #[arg(long)]
        n: u64,
        /// Number of independent trials.
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Exact E[E(P(a))] by enumerating all 2^n sign patterns (n <= 16).
    ExactEnergy {
        /// Sequence length.
        #[arg(long)]
        n: u64,
    },
    /// Scan |S(a)|/n^2 across sequence sizes.
    Scan {
        /// Sequence family to scan.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Comma-separated list of n values.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Block parameter b (kind=block).
        #[arg(long)]
        b: Option<u64>,
        /// Inclusion probability p (kind=prandom).
        #[arg(long)]
        p: Option<f64>,
        /// Repetitions per n.
        #[arg(long, default_value_t = 1)]
        reps: u64,
    },
    /// Mean |S(a)|/n^2 over uniform random permutations of [n].
    Permutation {
        #[arg(long)]
        n: u64,
        /// Number of permutations to average.
        #[arg(long, default_value_t = 1)]
        reps: u64,
    },
    /// Scan |S(a)|/n^2 for p-random subsets across p values.
    Prandom {
        #[arg(long)]
        n: u64,
        /// Comma-separated list of inclusion probabilities.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Repetitions per p.
        #[arg(long, default_value_t = 1)]
        reps: u64,
    },
    /// Verify |S(a)| <= ceil(alpha (n+1)^2 / 2) + |L_n(alpha)|.
    UpperBound {
        #[command(flatten)]
        seq: SequenceArgs,
        /// Comma-separated list of alpha values in (0, 1).
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
    },
    /// Count lattice points above the run-sum threshold and compare to
    /// the limiting measure.
    Lattice {
        /// Comma-separated list of n values.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Comma-separated list of alpha values in (0, 1).
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
    },
    /// Gcd-sum diagnostic G(n) and its sqrt(n) log n surrogate.
    Gcdsum {
        /// Comma-separated list of n values.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Evaluation path.
        #[arg(long, value_enum, default_value_t = GcdMethod::Accelerated)]
        method: GcdMethod,
    },
    /// Exhaustively verify P(X = 0 mod m) <= 1/m + 2/sqrt(n) on a grid.
    Lemma {
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        m_max: u64,
    },
    /// Print the named constants and their closed-form values.
    Constants,
}

#[derive(Clone, Copy, ValueEnum)]
enum GcdMethod {
    Direct,
    Accelerated,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// Guard and memory-cap refusals exit 2; everything else is usage (1).
fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<consum::Error>() {
        Some(
            consum::Error::Guard { .. }
            | consum::Error::SieveTooLarge { .. }
            | consum::Error::Overflow(_),
        ) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let started = Instant::now();
    let sink = Sink {
        format: cli.format,
        out: cli.out.clone(),
    };
    match cli.command {
        Command::Construct { seq } => {
            let a = seq.build(cli.seed)?;
            sink.write_text(&format!("{}\n", a.to_json()))
        }
        Command::Count { seq } => {
            let a = seq.build(cli.seed)?;
            let count = count_distinct_sums_capped(&a, cli.mem_cap_mib)?;
            let records = count_records(&a, cli.seed, count);
            sink.write_records(records, started)
        }
        Command::Energy { seq } => {
            let a = seq.build(cli.seed)?;
            let report = additive_energy(&a.partial_sums()?)?;
            sink.write_table(
                "set_size,energy,diff_support,cs_lower_bound,distinct_sums",
                std::slice::from_ref(&report),
                |r: &EnergyReport| {
                    format!(
                        "{},{},{},{},{}",
                        r.set_size, r.energy, r.diff_support, r.cs_lower_bound, r.distinct_sums
                    )
                },
            )
        }
        Command::McEnergy { n, trials } => {
            let estimate = mc_expected_energy(n, trials, cli.seed)?;
            sink.write_records(estimate.records(), started)
        }
        Command::ExactEnergy { n } => {
            let value = exact_expected_energy(n)?;
            let mut params = BTreeMap::new();
            params.insert("kind".to_string(), "rademacher".to_string());
            params.insert("n".to_string(), n.to_string());
            params.insert("patterns".to_string(), (1u64 << n).to_string());
            let record = ExperimentRecord {
                command: "exact-energy".to_string(),
                params,
                statistic: "exact_mean_energy".to_string(),
                value,
                stderr: None,
                trials: None,
                seed: None,
                wall_ms: 0,
            };
            sink.write_records(vec![record], started)
        }
        Command::Scan {
            kind,
            n,
            b,
            p,
            reps,
        } => {
            if let (KindArg::Block, Some(b)) = (kind, b) {
                for &nv in &n {
                    warn_block_range(nv, b);
                }
            }
            let params = SequenceParams { b, p };
            let records = scan_distinct(kind.into(), &n, params, cli.seed, reps, cli.mem_cap_mib)?;
            sink.write_records(records, started)
        }
        Command::Permutation { n, reps } => {
            let estimate = permutation_ratio(n, reps, cli.seed, cli.mem_cap_mib)?;
            sink.write_records(estimate.records(), started)
        }
        Command::Prandom { n, p, reps } => {
            let records = prandom_scan(n, &p, reps, cli.seed, cli.mem_cap_mib)?;
            sink.write_records(records, started)
        }
        Command::UpperBound { seq, alpha } => {
            let a = seq.build(cli.seed)?;
            let mut rows = Vec::with_capacity(alpha.len());
            for &al in &alpha {
                rows.push(upper_bound_check_capped(&a, al, cli.mem_cap_mib)?);
            }
            sink.write_table("n,alpha,lhs,rhs,ok", &rows, |r| {
                format!("{},{},{},{},{}", r.n, r.alpha, r.lhs, r.rhs, r.ok)
            })
        }
        Command::Lattice { n, alpha } => {
            let mut rows = Vec::with_capacity(n.len() * alpha.len());
            for &nv in &n {
                for &al in &alpha {
                    rows.push(LatticeJson::from(lattice_count(nv, al)?));
                }
            }
            sink.write_table(LatticeCount::CSV_HEADER, &rows, LatticeJson::csv_row)
        }
        Command::Gcdsum { n, method } => {
            let mut rows = Vec::with_capacity(n.len());
            for &nv in &n {
                rows.push(match method {
                    GcdMethod::Direct => gcd_sum_direct(nv)?,
                    GcdMethod::Accelerated => gcd_sum(nv)?,
                });
            }
            sink.write_table(consum::GcdSumRow::CSV_HEADER, &rows, |r| r.csv_row())
        }
        Command::Lemma { n_max, m_max } => {
            let rows = lemma_bound_check(n_max, m_max)?;
            sink.write_table(LemmaRow::CSV_HEADER, &rows, LemmaRow::csv_row)
        }
        Command::Constants => {
            let c = MathConstants::new();
            match sink.format {
                Format::Json => sink.write_text(&format!(
                    "{}\n",
                    serde_json::to_string(&c).expect("constants serialize")
                )),
                Format::Csv => {
                    let body = format!(
                        "name,value\nc4,{}\nalpha_star,{}\nh_min,{}\nkonieczny,{}\neft_delta,{}\nc2_rough,{}\nc3_rough,{}\n",
                        c.c4, c.alpha_star, c.h_min, c.konieczny, c.eft_delta, c.c2_rough, c.c3_rough
                    );
                    sink.write_text(&body)
                }
            }
        }
    }
}

/// Records for the single-sequence `count` command.
fn count_records(a: &Sequence, seed: u64, count: u64) -> Vec<ExperimentRecord> {
    let mut params = BTreeMap::new();
    params.insert("kind".to_string(), a.kind.as_str().to_string());
    params.insert("n".to_string(), a.n.to_string());
    params.insert("k".to_string(), a.len().to_string());
    if let Some(b) = a.params.b {
        params.insert("b".to_string(), b.to_string());
    }
    if let Some(p) = a.params.p {
        params.insert("p".to_string(), p.to_string());
    }
    let seeded = a.seed.is_some();
    let base = ExperimentRecord {
        command: "count".to_string(),
        params,
        statistic: "distinct_sums".to_string(),
        value: count as f64,
        stderr: None,
        trials: None,
        seed: seeded.then_some(seed),
        wall_ms: 0,
    };
    let mut ratio = base.clone();
    ratio.statistic = "distinct_ratio".to_string();
    ratio.value = count as f64 / (a.n as f64 * a.n as f64);
    vec![base, ratio]
}

/// Lattice row with the derived error column, for JSON parity with CSV.
#[derive(Serialize)]
struct LatticeJson {
    n: u64,
    alpha: f64,
    count: u64,
    ratio: f64,
    measure: f64,
    abs_err: f64,
}

impl From<LatticeCount> for LatticeJson {
    fn from(c: LatticeCount) -> LatticeJson {
        LatticeJson {
            n: c.n,
            alpha: c.alpha,
            count: c.count,
            ratio: c.ratio,
            measure: c.measure,
            abs_err: c.abs_err(),
        }
    }
}

impl LatticeJson {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n, self.alpha, self.count, self.ratio, self.measure, self.abs_err
        )
    }
}

/// Where and how results leave the process.
struct Sink {
    format: Format,
    out: Option<PathBuf>,
}

impl Sink {
    fn write_text(&self, body: &str) -> anyhow::Result<()> {
        match &self.out {
            None => {
                std::io::stdout()
                    .write_all(body.as_bytes())
                    .context("writing to stdout")?;
            }
            Some(path) => {
                std::fs::write(path, body)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Ok(())
    }

    /// Experiment records: stamp the elapsed wall time, then render.
    fn write_records(
        &self,
        mut records: Vec<ExperimentRecord>,
        started: Instant,
    ) -> anyhow::Result<()> {
        let wall_ms = started.elapsed().as_millis() as u64;
        for r in &mut records {
            r.wall_ms = wall_ms;
        }
        let body = match self.format {
            Format::Csv => records_to_csv(&records),
            Format::Json => format!("{}\n", records_to_json(&records)),
        };
        self.write_text(&body)
    }

    /// Typed row tables: serde rows for JSON, a pinned header for CSV.
    fn write_table<T: Serialize>(
        &self,
        header: &str,
        rows: &[T],
        to_csv: impl Fn(&T) -> String,
    ) -> anyhow::Result<()> {
        let body = match self.format {
            Format::Json => {
                let json = if rows.len() == 1 {
                    serde_json::to_string(&rows[0]).expect("row serialization")
                } else {
                    serde_json::to_string(rows).expect("row serialization")
                };
                format!("{json}\n")
            }
            Format::Csv => {
                let mut body = String::from(header);
                body.push('\n');
                for row in rows {
                    body.push_str(&to_csv(row));
                    body.push('\n');
                }
                body
            }
        };
        self.write_text(&body)
    }
}
