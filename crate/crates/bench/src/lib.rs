//! Benchmark harness around `sapgm-core`: seeded multi-start runs, summary
//! tables, Pareto-front CSV/SVG output, merit-decay experiments and the
//! `bench verify` self-checks.

pub mod config;
pub mod error;
pub mod rate;
pub mod run;
pub mod svg;
pub mod verify;

pub use config::{BenchConfig, Solver, SolverChoice};
pub use error::{BenchError, Result};
pub use rate::{run_rate_experiment, RateOutcome, SlopeRow};
pub use run::{run_benchmark, BenchOutcome, RunRecord, SummaryRow, TaggedPoint};
pub use svg::{emit_svg_scatter, render_svg_scatter};
pub use verify::{run_verify, VerifyOutcome};
