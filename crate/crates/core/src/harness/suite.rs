//! Benchmark suites: random instance grids, solver dispatch, and a
//! resumable JSON-lines ledger of results.

use std::collections::HashSet;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::acd::acd;
use crate::ce::{self, CeError, CeParams, SolveResult};
use crate::colouring::{Colouring, PartialColouring};
use crate::graph::Graph;
use crate::happiness::{happy_count, Thresholds};
use crate::heuristics::{lmc, LocalSearch, DEFAULT_MAX_PASSES};
use crate::rng;
use crate::sbm::{self, Regime, SbmError, SbmParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Ce,
    Cels,
    Lmc,
    Ls,
    Rls,
}

impl Algo {
    pub const ALL: [Algo; 5] = [Algo::Ce, Algo::Cels, Algo::Lmc, Algo::Ls, Algo::Rls];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Ce => "ce",
            Algo::Cels => "cels",
            Algo::Lmc => "lmc",
            Algo::Ls => "ls",
            Algo::Rls => "rls",
        }
    }

    fn stream_id(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected ce, cels, lmc, ls or rls)"))
    }
}

/// Settings shared by every solver call in a run. `ce.seed` and
/// `ce.use_ls` are overridden per call.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub ce: CeParams,
    pub max_passes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ce: CeParams::default(),
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

/// Run one algorithm. The heuristics run once from a fresh colouring: LMC
/// from the precolouring, LS and RLS from a uniformly random completion.
pub fn solve(
    algo: Algo,
    g: &Graph,
    pc: &PartialColouring,
    rho: f64,
    config: &SolverConfig,
    seed: u64,
) -> Result<SolveResult, CeError> {
    let start = Instant::now();
    let heuristic = |best: Colouring, passes: u64| {
        let t = Thresholds::new(g, rho);
        let happy = happy_count(g, &best, &t);
        SolveResult {
            alpha: happy as f64 / g.n() as f64,
            converged: happy == g.n(),
            best,
            happy,
            generations: passes,
            samples_evaluated: 1,
            wall_time: start.elapsed(),
        }
    };
    let mut r = rng::stream(seed, &[]);
    match algo {
        Algo::Ce | Algo::Cels => {
            let params = CeParams {
                seed,
                use_ls: algo == Algo::Cels,
                ..config.ce.clone()
            };
            ce::run(g, pc, rho, &params)
        }
        Algo::Lmc => Ok(heuristic(lmc(g, pc, &mut r), 1)),
        Algo::Ls => {
            let mut sigma = pc.complete_random(&mut r);
            let mut scratch = crate::colouring::PluralityScratch::new(pc.k());
            LocalSearch::new(g, pc, rho).pass(&mut sigma, &mut r, &mut scratch);
            Ok(heuristic(sigma, 1))
        }
        Algo::Rls => {
            let sigma = pc.complete_random(&mut r);
            let out = LocalSearch::new(g, pc, rho).repeat(sigma, &mut r, config.max_passes);
            Ok(heuristic(out.colouring, out.passes as u64))
        }
    }
}

/// Parameter grid for a random suite. `n` takes the values
/// `n_min, n_min + n_step, …` below `n_max`, each with `instances_per_n`
/// instances; `k`, `p`, `q ≤ p/2` and `ρ` are drawn uniformly per instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub n_step: usize,
    pub instances_per_n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub master_seed: u64,
    pub precolour_fraction: f64,
    pub epsilon: f64,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            n_min: 200,
            n_max: 3000,
            n_step: 1,
            instances_per_n: 10,
            k_min: 2,
            k_max: 20,
            master_seed: 0,
            precolour_fraction: sbm::DEFAULT_PRECOLOUR_FRACTION,
            epsilon: sbm::DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("invalid suite: {0}")]
    Spec(String),
    #[error(transparent)]
    Sbm(#[from] SbmError),
    #[error(transparent)]
    Solver(#[from] CeError),
    #[error("ledger I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("ledger line {line}: {source}")]
    Ledger {
        line: usize,
        source: serde_json::Error,
    },
}

impl SuiteSpec {
    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.n_step == 0 || self.n_min >= self.n_max {
            return Err(SuiteError::Spec("need n_min < n_max and n_step > 0".into()));
        }
        if self.k_min < 2 || self.k_min > self.k_max || self.k_max > self.n_min {
            return Err(SuiteError::Spec("need 2 <= k_min <= k_max <= n_min".into()));
        }
        Ok(())
    }

    pub fn n_values(&self) -> impl Iterator<Item = usize> + '_ {
        (self.n_min..self.n_max).step_by(self.n_step)
    }

    pub fn len(&self) -> usize {
        self.n_values().count() * self.instances_per_n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters of every instance, in suite order.
    pub fn entries(&self) -> Result<Vec<SuiteEntry>, SuiteError> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.len());
        for n in self.n_values() {
            for _ in 0..self.instances_per_n {
                let index = out.len();
                let mut r = rng::stream(self.master_seed, &[2, index as u64]);
                let k = r.random_range(self.k_min..=self.k_max);
                let p = 1.0 - r.random::<f64>();
                let q = 0.5 * p * (1.0 - r.random::<f64>());
                let rho = 1.0 - r.random::<f64>();
                let params = SbmParams {
                    n,
                    k,
                    p,
                    q,
                    precolour_fraction: self.precolour_fraction,
                    seed: rng::derive(self.master_seed, &[3, index as u64]),
                    epsilon: self.epsilon,
                };
                out.push(SuiteEntry {
                    id: format!("i{index:05}-n{n}-k{k}"),
                    params,
                    rho,
                });
            }
        }
        Ok(out)
    }

    pub fn instances(&self) -> Result<Vec<SuiteInstance>, SuiteError> {
        self.entries()?
            .into_iter()
            .map(SuiteEntry::generate)
            .collect()
    }
}

/// One manifest line: everything needed to regenerate an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub id: String,
    pub params: SbmParams,
    pub rho: f64,
}

impl SuiteEntry {
    pub fn generate(self) -> Result<SuiteInstance, SuiteError> {
        let inst = sbm::generate(&self.params)?;
        Ok(SuiteInstance {
            id: self.id,
            graph: inst.graph,
            precolouring: inst.precolouring,
            communities: inst.communities,
            params: self.params,
            rho: self.rho,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteInstance {
    pub id: String,
    pub graph: Graph,
    pub precolouring: PartialColouring,
    pub communities: Colouring,
    pub params: SbmParams,
    pub rho: f64,
}

impl SuiteInstance {
    pub fn regime(&self) -> Regime {
        self.params.thresholds().classify(self.rho)
    }
}

/// One ledger row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub instance: String,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub rho: f64,
    pub seed: u64,
    pub mu: f64,
    pub xi_tilde: f64,
    pub regime: Regime,
    pub algo: String,
    pub alpha: f64,
    pub happy: usize,
    pub acd: f64,
    pub wall_time: f64,
    pub generations: u64,
    pub converged: bool,
}

impl ExperimentRecord {
    pub fn new(inst: &SuiteInstance, algo: Algo, result: &SolveResult) -> Self {
        let t = inst.params.thresholds();
        Self {
            instance: inst.id.clone(),
            n: inst.params.n,
            k: inst.params.k,
            p: inst.params.p,
            q: inst.params.q,
            rho: inst.rho,
            seed: inst.params.seed,
            mu: t.mu,
            xi_tilde: t.xi_tilde,
            regime: t.classify(inst.rho),
            algo: algo.as_str().to_string(),
            alpha: result.alpha,
            happy: result.happy,
            acd: acd(&inst.communities, &result.best, inst.params.k),
            wall_time: result.wall_time.as_secs_f64(),
            generations: result.generations,
            converged: result.converged,
        }
    }
}

pub fn read_ledger(path: &Path) -> Result<Vec<ExperimentRecord>, SuiteError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| SuiteError::Ledger {
                line: idx + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub config: SolverConfig,
    /// Keep existing ledger rows and skip their (instance, algo) pairs.
    pub resume: bool,
    /// Concurrent (instance, algo) runs.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            config: SolverConfig::default(),
            resume: true,
            jobs: 1,
        }
    }
}

/// Run every algorithm on every instance, appending one ledger line per
/// pair as it finishes. Returns all records in the ledger afterwards.
pub fn run_suite(
    instances: &[SuiteInstance],
    algos: &[Algo],
    ledger: &Path,
    options: &RunOptions,
) -> Result<Vec<ExperimentRecord>, SuiteError> {
    let mut records = if options.resume {
        read_ledger(ledger)?
    } else {
        Vec::new()
    };
    let done: HashSet<(String, String)> = records
        .iter()
        .map(|r| (r.instance.clone(), r.algo.clone()))
        .collect();
    let pending: Vec<(&SuiteInstance, Algo)> = instances
        .iter()
        .flat_map(|inst| algos.iter().map(move |&a| (inst, a)))
        .filter(|(inst, a)| !done.contains(&(inst.id.clone(), a.as_str().to_string())))
        .collect();

    let file = OpenOptions::new()
        .create(true)
        .append(options.resume)
        .write(true)
        .truncate(!options.resume)
        .open(ledger)?;
    let writer = Mutex::new(file);

    let run_one = |(inst, algo): (&SuiteInstance, Algo)| -> Result<ExperimentRecord, SuiteError> {
        let seed = rng::derive(inst.params.seed, &[4, algo.stream_id()]);
        let result = solve(
            algo,
            &inst.graph,
            &inst.precolouring,
            inst.rho,
            &options.config,
            seed,
        )?;
        let record = ExperimentRecord::new(inst, algo, &result);
        let line = serde_json::to_string(&record).expect("records serialise");
        let mut f = writer.lock().unwrap();
        writeln!(f, "{line}")?;
        f.flush()?;
        Ok(record)
    };

    let fresh: Vec<ExperimentRecord> = if options.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            pending
                .into_par_iter()
                .map(run_one)
                .collect::<Result<_, _>>()
        })?
    } else {
        pending.into_iter().map(run_one).collect::<Result<_, _>>()?
    };
    records.extend(fresh);
    Ok(records)
}
