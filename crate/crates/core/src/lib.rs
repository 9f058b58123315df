//! Soft happy colouring on partially precoloured graphs.
//!
//! A vertex is ρ-happy when at least `⌈ρ·deg(v)⌉` of its neighbours share
//! its colour. Given a graph with some vertices precoloured using `k`
//! colours, the task is to colour the remaining (free) vertices so that as
//! many vertices as possible are ρ-happy.
//!
//! The crate provides:
//!
//! - [`graph`], [`colouring`], [`dimacs`]: the instance model and file format;
//! - [`sbm`]: Stochastic Block Model instances and regime thresholds;
//! - [`happiness`]: the objective and an exhaustive oracle for tiny cases;
//! - [`heuristics`]: LMC, LS and RLS;
//! - [`ce`]: the cross-entropy solver and its LS hybrid;
//! - [`harness`]: suites, ledgers, ACD, Welch tests and summaries.

pub mod ce;
pub mod colouring;
pub mod dimacs;
pub mod graph;
pub mod happiness;
pub mod harness;
pub mod heuristics;
pub mod rng;
pub mod sbm;

pub use ce::{CeParams, IncumbentRule, ProbModel, SolveResult};
pub use colouring::{plurality_colour, Colour, Colouring, PartialColouring};
pub use dimacs::{parse_instance, write_instance, Instance, InstanceMeta};
pub use graph::{Graph, Vertex};
pub use happiness::{evaluate, exhaustive_optimum, is_happy, HappinessReport};
pub use heuristics::{lmc, ls, rls, HeuristicOutcome};
pub use sbm::{classify_regime, generate, Regime, RegimeThresholds, SbmInstance, SbmParams};
