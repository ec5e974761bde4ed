use std::path::PathBuf;

use sapgm_core::problems::{find, registry, Problem};
use sapgm_core::SolverConfig;
use serde::Serialize;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Sapgm,
    Baseline,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Sapgm => "sapgm",
            Solver::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Sapgm,
    Baseline,
    Both,
}

impl SolverChoice {
    pub fn solvers(self) -> Vec<Solver> {
        match self {
            SolverChoice::Sapgm => vec![Solver::Sapgm],
            SolverChoice::Baseline => vec![Solver::Baseline],
            SolverChoice::Both => vec![Solver::Sapgm, Solver::Baseline],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    /// Names or 1-based indices; `"all"` selects the whole registry.
    pub problems: Vec<String>,
    pub runs: usize,
    pub base_seed: u64,
    pub solver: SolverChoice,
    pub sigma: f64,
    pub mu0: f64,
    pub l0: f64,
    pub eta: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub parallel: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            problems: vec!["all".into()],
            runs: 200,
            base_seed: 42,
            solver: SolverChoice::Both,
            sigma: s.sigma,
            mu0: s.mu0,
            l0: s.l0,
            eta: s.eta,
            eps: s.eps,
            max_iter: s.max_iter,
            out_dir: PathBuf::from("results"),
            parallel: 0,
        }
    }
}

impl BenchConfig {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            mu0: self.mu0,
            l0: self.l0,
            eta: self.eta,
            sigma: self.sigma,
            eps: self.eps,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        if self.problems.is_empty() {
            return Err(BenchError::Config("no problems selected".into()));
        }
        self.solver_config().validate()?;
        Ok(())
    }

    /// Resolves the problem list, in registry order and without duplicates.
    pub fn resolve_problems(&self) -> Result<Vec<Problem>> {
        if self.problems.iter().any(|p| p.eq_ignore_ascii_case("all")) {
            return Ok(registry());
        }
        let mut out: Vec<Problem> = Vec::new();
        for key in &self.problems {
            let p = find(key.trim())?;
            if !out.iter().any(|q| q.index() == p.index()) {
                out.push(p);
            }
        }
        out.sort_by_key(Problem::index);
        Ok(out)
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.runs as u64).map(move |i| self.base_seed.wrapping_add(i))
    }
}
