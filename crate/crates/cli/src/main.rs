//! `shc`: generate SBM suites, solve instances, run benchmarks and
//! summarise ledgers.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use shc_core::dimacs::{self, InstanceMeta};
use shc_core::happiness::exhaustive_optimum;
use shc_core::harness::{
    self, Algo, GroupBy, RunOptions, SolverConfig, SuiteEntry, SuiteInstance, SuiteSpec,
};
use shc_core::sbm::{self, SbmParams};
use shc_core::{ce, heuristics};

#[derive(Parser)]
#[command(
    name = "shc",
    version,
    about = "Soft happy colouring solvers and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate SBM instances (.col + .gt) and a manifest.jsonl.
    Gen(GenArgs),
    /// Solve one instance and print a JSON record.
    Solve(SolveArgs),
    /// Run algorithms over a generated suite, appending to a ledger.
    Bench(BenchArgs),
    /// Aggregate a ledger into CSV summaries and Welch p-values.
    Stats(StatsArgs),
    /// Exhaustive optimum of a small instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    n_min: usize,
    #[arg(long, default_value_t = 3000)]
    n_max: usize,
    #[arg(long, default_value_t = 1)]
    n_step: usize,
    #[arg(long, default_value_t = 10)]
    per_n: usize,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 20)]
    k_max: usize,
    #[arg(long, default_value_t = sbm::DEFAULT_PRECOLOUR_FRACTION)]
    precolour_fraction: f64,
    #[arg(long, default_value_t = sbm::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Single instance mode: vertex count (needs --k, --p, --q, --rho).
    #[arg(long, requires_all = ["k", "p", "q", "rho"])]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// File stem in single instance mode.
    #[arg(long, default_value = "instance")]
    stem: String,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Wall-clock budget in seconds per run.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = ce::DEFAULT_POPULATION)]
    pop: usize,
    #[arg(long, default_value_t = ce::DEFAULT_ELITE_FRACTION)]
    elite_frac: f64,
    #[arg(long, default_value_t = ce::DEFAULT_BETA)]
    beta: f64,
    #[arg(long)]
    max_gens: Option<u64>,
    /// Sampling threads per CE run.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Pass cap for rls.
    #[arg(long, default_value_t = heuristics::DEFAULT_MAX_PASSES)]
    max_passes: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        if !(self.time_limit >= 0.0 && self.time_limit.is_finite()) {
            bail!("--time-limit must be a non-negative number of seconds");
        }
        let config = SolverConfig {
            ce: ce::CeParams {
                population_size: self.pop,
                elite_fraction: self.elite_frac,
                beta: self.beta,
                time_limit: Duration::from_secs_f64(self.time_limit),
                max_generations: self.max_gens,
                threads: self.threads,
                ..ce::CeParams::default()
            },
            max_passes: self.max_passes,
        };
        config.ce.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "cels")]
    algo: Algo,
    /// Defaults to the instance's `c rho` header.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ground-truth sidecar; defaults to `<instance>.gt` with the
    /// extension replaced, when present.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Include wall time (makes output run-dependent).
    #[arg(long)]
    with_timing: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory written by `gen`.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "ce,cels")]
    algos: Vec<Algo>,
    /// Per-run budget in seconds.
    #[arg(long, default_value_t = 600.0)]
    budget: f64,
    #[arg(long, default_value = "ledger.jsonl")]
    out: PathBuf,
    /// Keep the existing ledger and skip finished (instance, algo) pairs.
    #[arg(long)]
    resume: bool,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    max_gens: Option<u64>,
    #[arg(long, default_value_t = ce::DEFAULT_POPULATION)]
    pop: usize,
    #[arg(long, default_value_t = ce::DEFAULT_ELITE_FRACTION)]
    elite_frac: f64,
    #[arg(long, default_value_t = ce::DEFAULT_BETA)]
    beta: f64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    ledger: PathBuf,
    /// algo, regime, n, rho or k.
    #[arg(long, default_value = "algo")]
    group_by: GroupBy,
    /// Append hist_0..hist_99 columns.
    #[arg(long)]
    hist: bool,
    /// Summary CSV; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Pairwise Welch p-values over per-instance α.
    #[arg(long)]
    welch: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long)]
    rho: Option<f64>,
    /// Largest number of extensions to enumerate.
    #[arg(long, default_value_t = 10_000_000)]
    budget_limit: u128,
}

/// One manifest.jsonl line.
#[derive(Serialize, Deserialize)]
struct ManifestLine {
    id: String,
    file: String,
    gt: String,
    params: SbmParams,
    rho: f64,
}

fn write_entry(dir: &Path, entry: &SuiteEntry) -> Result<ManifestLine> {
    let inst = sbm::generate(&entry.params)?;
    let meta = InstanceMeta {
        k: Some(entry.params.k),
        rho: Some(entry.rho),
        p: Some(entry.params.p),
        q: Some(entry.params.q),
        seed: Some(entry.params.seed),
        n_communities: Some(entry.params.k),
    };
    let file = format!("{}.col", entry.id);
    let gt = format!("{}.gt", entry.id);
    fs::write(
        dir.join(&file),
        dimacs::write_instance(&inst.graph, &inst.precolouring, &meta),
    )?;
    fs::write(dir.join(&gt), dimacs::write_ground_truth(&inst.communities))?;
    Ok(ManifestLine {
        id: entry.id.clone(),
        file,
        gt,
        params: entry.params.clone(),
        rho: entry.rho,
    })
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    fs::create_dir_all(&a.out_dir)?;
    let entries = if let Some(n) = a.n {
        let params = SbmParams {
            n,
            k: a.k.unwrap(),
            p: a.p.unwrap(),
            q: a.q.unwrap(),
            precolour_fraction: a.precolour_fraction,
            seed: a.seed,
            epsilon: a.epsilon,
        };
        params.validate()?;
        vec![SuiteEntry {
            id: a.stem.clone(),
            params,
            rho: a.rho.unwrap(),
        }]
    } else {
        SuiteSpec {
            n_min: a.n_min,
            n_max: a.n_max,
            n_step: a.n_step,
            instances_per_n: a.per_n,
            k_min: a.k_min,
            k_max: a.k_max,
            master_seed: a.seed,
            precolour_fraction: a.precolour_fraction,
            epsilon: a.epsilon,
        }
        .entries()?
    };
    let mut manifest = String::new();
    for entry in &entries {
        let line = write_entry(&a.out_dir, entry)?;
        manifest.push_str(&serde_json::to_string(&line)?);
        manifest.push('\n');
    }
    fs::write(a.out_dir.join("manifest.jsonl"), manifest)?;
    eprintln!(
        "wrote {} instance(s) to {}",
        entries.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn read_instance(path: &Path) -> Result<dimacs::Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst =
        dimacs::parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
    if inst.graph.duplicate_edges() > 0 {
        eprintln!(
            "warning: {} duplicate edge line(s) collapsed",
            inst.graph.duplicate_edges()
        );
    }
    Ok(inst)
}

fn resolve_rho(flag: Option<f64>, meta: &InstanceMeta) -> Result<f64> {
    let rho = flag
        .or(meta.rho)
        .context("no --rho given and the instance has no `c rho` header")?;
    if !(0.0..=1.0).contains(&rho) {
        bail!("rho {rho} outside [0, 1]");
    }
    Ok(rho)
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let rho = resolve_rho(a.rho, &inst.meta)?;
    let config = a.solver.config()?;
    let result = harness::solve(
        a.algo,
        &inst.graph,
        &inst.precolouring,
        rho,
        &config,
        a.seed,
    )?;

    let gt_path = a.gt.clone().or_else(|| {
        let p = a.instance.with_extension("gt");
        p.exists().then_some(p)
    });
    let acd = match gt_path {
        Some(p) => {
            let text =
                fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let k = inst.precolouring.k();
            let gt = dimacs::parse_ground_truth(&text, inst.graph.n(), k)?;
            Some(harness::acd(&gt, &result.best, k))
        }
        None => None,
    };

    let mut record = json!({
        "instance": a.instance.file_name().map(|f| f.to_string_lossy().into_owned()),
        "algo": a.algo.as_str(),
        "seed": a.seed,
        "rho": rho,
        "n": inst.graph.n(),
        "m": inst.graph.m(),
        "k": inst.precolouring.k(),
        "happy": result.happy,
        "alpha": result.alpha,
        "acd": acd,
        "generations": result.generations,
        "samples_evaluated": result.samples_evaluated,
        "converged": result.converged,
        "colouring": result.best.labels(),
    });
    if a.with_timing {
        record["wall_time"] = json!(result.wall_time.as_secs_f64());
    }
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, &record)?;
    writeln!(out)?;
    Ok(())
}

fn load_suite(dir: &Path) -> Result<Vec<SuiteInstance>> {
    let manifest = dir.join("manifest.jsonl");
    let text =
        fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let mut out = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let entry: ManifestLine =
            serde_json::from_str(line).with_context(|| format!("manifest line {}", i + 1))?;
        let inst = read_instance(&dir.join(&entry.file))?;
        let gt_text = fs::read_to_string(dir.join(&entry.gt))?;
        let communities = dimacs::parse_ground_truth(&gt_text, inst.graph.n(), entry.params.k)?;
        out.push(SuiteInstance {
            id: entry.id,
            graph: inst.graph,
            precolouring: inst.precolouring,
            communities,
            params: entry.params,
            rho: entry.rho,
        });
    }
    Ok(out)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let instances = load_suite(&a.suite)?;
    let solver = SolverArgs {
        time_limit: a.budget,
        pop: a.pop,
        elite_frac: a.elite_frac,
        beta: a.beta,
        max_gens: a.max_gens,
        threads: 1,
        max_passes: heuristics::DEFAULT_MAX_PASSES,
    };
    let options = RunOptions {
        config: solver.config()?,
        resume: a.resume,
        jobs: a.jobs,
    };
    let records = harness::run_suite(&instances, &a.algos, &a.out, &options)?;
    eprintln!("{} record(s) in {}", records.len(), a.out.display());
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let records = harness::read_ledger(&a.ledger)?;
    let rows = harness::aggregate(&records, a.group_by)?;
    match &a.csv {
        Some(path) => {
            harness::write_summary_csv(fs::File::create(path)?, &rows, a.group_by, a.hist)?
        }
        None => harness::write_summary_csv(io::stdout().lock(), &rows, a.group_by, a.hist)?,
    }
    if let Some(path) = &a.welch {
        let mut algos: Vec<String> = records.iter().map(|r| r.algo.clone()).collect();
        algos.sort();
        algos.dedup();
        let samples: Vec<(String, Vec<f64>)> = algos
            .into_iter()
            .map(|algo| {
                let mut rs: Vec<_> = records.iter().filter(|r| r.algo == algo).collect();
                rs.sort_by(|x, y| x.instance.cmp(&y.instance));
                let alphas = rs.iter().map(|r| r.alpha).collect();
                (algo, alphas)
            })
            .collect();
        let mut w = String::from("algo_a,algo_b,t_statistic,degrees_of_freedom,p_value\n");
        for (x, y, res) in harness::welch_matrix(&samples) {
            match res {
                Some(r) => w.push_str(&format!(
                    "{x},{y},{},{},{}\n",
                    r.t_statistic, r.degrees_of_freedom, r.p_value
                )),
                None => w.push_str(&format!("{x},{y},NA,NA,NA\n")),
            }
        }
        fs::write(path, w)?;
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let rho = resolve_rho(a.rho, &inst.meta)?;
    let (best, happy) = exhaustive_optimum(&inst.graph, &inst.precolouring, rho, a.budget_limit)?;
    let record = json!({
        "rho": rho,
        "n": inst.graph.n(),
        "happy": happy,
        "alpha": happy as f64 / inst.graph.n() as f64,
        "colouring": best.labels(),
    });
    println!("{record}");
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}
