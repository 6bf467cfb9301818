use serde::Serialize;

/// How each subproblem was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    /// Cholesky factorization of the materialized `(m+1)×(m+1)` matrix.
    Dense,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Both progress measures fell below their thresholds.
    Converged,
    /// The outer iteration cap was reached first.
    MaxOuter,
}

/// Telemetry for one iterate. Record `k = 0` describes the starting point,
/// which has no progress measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f_rho: f64,
    pub f: f64,
    pub p: f64,
    pub f_prog: Option<f64>,
    pub p_prog: Option<f64>,
    /// CG iterations spent on the subproblem that produced this iterate.
    pub cg_iters: usize,
    pub solve_residual: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    /// Penalty parameter at exit.
    pub rho: f64,
    pub solver: SolverPath,
    pub termination: Termination,
    pub outer_iters: usize,
    pub total_cg: usize,
    pub wall_time_s: f64,
    pub history: Vec<IterationRecord>,
    /// Fixed-point residual of the method at the returned point.
    pub stationarity_residual: f64,
    /// Norm of the right-hand side used in the stationarity check.
    pub rhs_norm: f64,
    /// The set of zeroed margin entries was the same at the last two iterates.
    pub support_stable_at_exit: bool,
    /// The projection at the returned point had to break a tie.
    pub projection_tie_at_exit: bool,
    /// Iterations where the penalized objective rose by more than the
    /// relative slack allowed for inexact solves.
    pub descent_violations: usize,
    /// Subproblems where CG stopped at its iteration cap.
    pub cg_unconverged_solves: usize,
    /// Subproblems re-solved from the current iterate because the solve from
    /// zero did not lower the surrogate.
    pub cg_restarts: usize,
}

impl TrainReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn last(&self) -> &IterationRecord {
        self.history.last().expect("history always holds the start point")
    }

    pub fn f_rho_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.f_rho).collect()
    }
}
