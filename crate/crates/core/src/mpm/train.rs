use std::time::Instant;

use super::{
    f_prog, objective_components, p_prog, rhs_with_projection, IterationRecord, MpmConfig,
    SolverPath, Termination, TrainReport,
};
use crate::data::SparseDataset;
use crate::error::{Error, Result};
use crate::geometry::IndexPartition;
use crate::linalg::{
    cg_solve_from, residual_norm, CholeskyFactor, RegularizedNormalOperator, SolveOutcome,
};
use crate::model::ModelTheta;
use crate::scalar::{dot, norm, Scalar};

/// Relative slack on `F_ρ` increases attributed to inexact subproblem solves.
const DESCENT_SLACK: f64 = 1e-10;

pub fn mpm_train<T: Scalar>(
    ds: &SparseDataset<T>,
    cfg: &MpmConfig<T>,
) -> Result<(ModelTheta<T>, TrainReport)> {
    mpm_train_observed(ds, cfg, |_, _| {})
}

/// Like [`mpm_train`], calling `observe(k, θ^k)` for every iterate
/// including the starting point `k = 0`.
pub fn mpm_train_observed<T, F>(
    ds: &SparseDataset<T>,
    cfg: &MpmConfig<T>,
    mut observe: F,
) -> Result<(ModelTheta<T>, TrainReport)>
where
    T: Scalar,
    F: FnMut(usize, &[T]),
{
    cfg.validate()?;
    let (n, m) = (ds.n(), ds.m());
    if n == 0 {
        return Err(Error::Empty);
    }
    let s = cfg.sparsity.resolve(n)?;
    let solver = if m < cfg.dense_threshold {
        SolverPath::Dense
    } else {
        SolverPath::ConjugateGradient
    };
    let f_tol = T::from_usize_lossy(n).sqrt() * cfg.f_tol_factor;
    let start = Instant::now();

    let mut rho = cfg.rho;
    let mut theta = vec![T::zero(); m + 1];
    let mut obj = objective_components(&theta, ds, s, rho)?;
    let mut history = vec![record(0, &obj, None, None, 0, T::zero(), rho)];
    observe(0, &theta);

    // the factorization only depends on ρ, so it is reused while ρ is fixed
    let mut factor: Option<(T, CholeskyFactor<T>)> = None;
    let mut zeroed = Vec::new();
    let mut termination = Termination::MaxOuter;
    let mut total_cg = 0;
    let mut descent_violations = 0;
    let mut cg_unconverged_solves = 0;
    let mut cg_restarts = 0;

    for k in 1..=cfg.max_outer {
        let op = RegularizedNormalOperator::new(ds.features(), rho)?;
        let (rhs, proj) = rhs_with_projection(&theta, ds, s, rho)?;
        zeroed = zeroed_set(&proj.partition);

        let outcome = match solver {
            SolverPath::Dense => {
                if factor.as_ref().is_none_or(|(r, _)| *r != rho) {
                    factor = Some((rho, CholeskyFactor::factor(&op.materialize())?));
                }
                let (_, chol) = factor.as_ref().expect("factor was just set");
                let x = chol.solve(&rhs)?;
                let final_residual = residual_norm(&op, &x, &rhs);
                SolveOutcome {
                    theta: x,
                    iterations: 0,
                    final_residual,
                    converged: true,
                }
            }
            SolverPath::ConjugateGradient => {
                let x0 = cfg.warm_start.then_some(theta.as_slice());
                let first = cg_solve_from(&op, &rhs, x0, &cfg.cg, |_, _| {})?;
                if cfg.warm_start || model_value(&op, &first.theta, &rhs)? <= model_value(&op, &theta, &rhs)? {
                    first
                } else {
                    // A loose solve from zero can land above the current point on the
                    // surrogate. CG started at θᵏ only ever lowers it, which restores descent.
                    cg_restarts += 1;
                    let mut again = cg_solve_from(&op, &rhs, Some(&theta), &cfg.cg, |_, _| {})?;
                    again.iterations += first.iterations;
                    again
                }
            }
        };
        if !outcome.converged {
            cg_unconverged_solves += 1;
            log::debug!(
                "outer step {k}: CG hit its cap with residual {:e}",
                outcome.final_residual
            );
        }
        total_cg += outcome.iterations;

        let next = objective_components(&outcome.theta, ds, s, rho)?;
        if !next.f_rho.is_finite() {
            return Err(Error::NonFinite("penalized objective"));
        }
        // compare against the previous point under the current ρ
        let prev_f_rho = obj.f + rho * obj.p;
        let slack = T::from_f64_lossy(DESCENT_SLACK) * (T::one() + prev_f_rho.abs());
        if next.f_rho > prev_f_rho + slack {
            descent_violations += 1;
            log::warn!(
                "outer step {k}: penalized objective rose from {prev_f_rho:e} to {:e}",
                next.f_rho
            );
        }

        let fp = f_prog(obj.f, next.f, rho);
        let pp = p_prog(&outcome.theta, next.p);
        history.push(record(
            k,
            &next,
            Some(fp),
            Some(pp),
            outcome.iterations,
            outcome.final_residual,
            rho,
        ));
        log::trace!(
            "k={k} F={:e} f={:e} p={:e} f_prog={fp:e} p_prog={pp:e} cg={}",
            next.f_rho,
            next.f,
            next.p,
            outcome.iterations
        );
        theta = outcome.theta;
        obj = next;
        observe(k, &theta);

        if fp <= f_tol && pp <= cfg.p_tol {
            termination = Termination::Converged;
            break;
        }
        if let Some(growth) = cfg.rho_growth {
            rho = rho * growth;
        }
    }
    let wall_time_s = start.elapsed().as_secs_f64();

    let op = RegularizedNormalOperator::new(ds.features(), rho)?;
    let (rhs, proj) = rhs_with_projection(&theta, ds, s, rho)?;
    let stationarity_residual = residual_norm(&op, &theta, &rhs);
    let final_zeroed = zeroed_set(&proj.partition);
    let support_stable_at_exit = final_zeroed == zeroed;
    let projection_tie_at_exit = proj.partition.has_boundary_tie();
    if projection_tie_at_exit {
        log::warn!(
            "projection at the returned point breaks a tie among {} equal margins",
            proj.partition.beta.len()
        );
    }

    let outer_iters = history.len() - 1;
    let report = TrainReport {
        n,
        m,
        s,
        rho: rho.to_f64_lossy(),
        solver,
        termination,
        outer_iters,
        total_cg,
        wall_time_s,
        history,
        stationarity_residual: stationarity_residual.to_f64_lossy(),
        rhs_norm: norm(&rhs).to_f64_lossy(),
        support_stable_at_exit,
        projection_tie_at_exit,
        descent_violations,
        cg_unconverged_solves,
        cg_restarts,
    };
    Ok((ModelTheta::from_stacked(theta)?, report))
}

/// `½θᵀAθ − bᵀθ`, the surrogate up to a constant.
fn model_value<T: Scalar>(op: &RegularizedNormalOperator<'_, T>, theta: &[T], rhs: &[T]) -> Result<T> {
    let a_theta = op.apply(theta)?;
    Ok(dot(theta, &a_theta) * T::from_f64_lossy(0.5) - dot(rhs, theta))
}

/// Indices whose positive margin the projection sets to zero.
fn zeroed_set(p: &IndexPartition) -> Vec<usize> {
    let mut z: Vec<usize> = p
        .gamma
        .iter()
        .chain(&p.beta[p.beta1.len()..])
        .copied()
        .collect();
    z.sort_unstable();
    z
}

fn record<T: Scalar>(
    k: usize,
    obj: &super::Objective<T>,
    f_prog: Option<T>,
    p_prog: Option<T>,
    cg_iters: usize,
    residual: T,
    rho: T,
) -> IterationRecord {
    IterationRecord {
        k,
        f_rho: obj.f_rho.to_f64_lossy(),
        f: obj.f.to_f64_lossy(),
        p: obj.p.to_f64_lossy(),
        f_prog: f_prog.map(|v| v.to_f64_lossy()),
        p_prog: p_prog.map(|v| v.to_f64_lossy()),
        cg_iters,
        solve_residual: residual.to_f64_lossy(),
        rho: rho.to_f64_lossy(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::two_clusters;
    use crate::mpm::Sparsity;

    #[test]
    fn growing_penalty_meets_the_stopping_rule() {
        let ds = two_clusters::<f64>(60, 2.5, 0.4, 5);
        let cfg = MpmConfig {
            rho_growth: Some(2.0),
            ..MpmConfig::default()
        }
        .with_sparsity(Sparsity::Count(3));
        let (model, report) = mpm_train(&ds, &cfg).unwrap();
        assert!(report.converged());
        assert!(report.outer_iters < 100);
        assert_eq!(report.solver, SolverPath::Dense);
        assert_eq!(report.total_cg, 0);
        assert!(report.last().p_prog.unwrap() <= 1e-3);
        assert_eq!(crate::eval::accuracy(&model, &ds).unwrap(), 100.0);
    }

    #[test]
    fn fixed_penalty_on_tiny_data_runs_to_the_cap() {
        // the regularizer outweighs the penalty at this size, so 2p/‖θ‖² stays large
        let ds = two_clusters::<f64>(60, 2.5, 0.4, 5);
        let cfg = MpmConfig {
            max_outer: 50,
            ..MpmConfig::default()
        }
        .with_sparsity(Sparsity::Count(3));
        let (_, report) = mpm_train(&ds, &cfg).unwrap();
        assert_eq!(report.termination, Termination::MaxOuter);
        assert!(report.last().p_prog.unwrap() > 1e-3);
    }

    #[test]
    fn zero_budget_separates_but_penalty_stays_positive() {
        // with s = 0 the penalty is the squared hinge loss, whose minimizer
        // for a finite rho always leaves a few margins slightly violated
        let ds = two_clusters::<f64>(60, 2.5, 0.4, 5);
        let cfg = MpmConfig {
            max_outer: 200,
            ..MpmConfig::default()
        }
        .with_sparsity(Sparsity::Count(0));
        let (model, report) = mpm_train(&ds, &cfg).unwrap();
        assert_eq!(crate::eval::accuracy(&model, &ds).unwrap(), 100.0);
        assert_eq!(report.descent_violations, 0);
        assert!(report.last().p > 0.0);
    }

    #[test]
    fn full_budget_stops_quickly() {
        let ds = crate::data::synthetic::gaussian_overlap::<f64>(80, 4, 0.3, 0.1, 3);
        let cfg = MpmConfig::default().with_sparsity(Sparsity::Ratio(1.0));
        let (model, report) = mpm_train(&ds, &cfg).unwrap();
        assert!(report.converged());
        assert!(report.outer_iters <= 3);
        assert!(report.history[1..].iter().all(|r| r.p == 0.0));
        // Π is the identity, so the subproblem has the zero solution
        assert!(model.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn history_is_monotone_and_observer_sees_every_iterate() {
        let ds = crate::data::synthetic::gaussian_overlap::<f64>(120, 5, 0.4, 0.1, 9);
        let mut seen = Vec::new();
        let (_, report) =
            mpm_train_observed(&ds, &MpmConfig::default(), |k, _| seen.push(k)).unwrap();
        assert_eq!(seen, (0..=report.outer_iters).collect::<Vec<_>>());
        assert_eq!(report.descent_violations, 0);
        for w in report.history.windows(2) {
            assert!(w[1].f_rho <= w[0].f_rho * (1.0 + 1e-10) + 1e-10);
        }
    }

    #[test]
    fn cg_path_for_wide_data() {
        let ds = crate::data::synthetic::sparse_binary::<f64>(200, 120, 10, 0.3, 4);
        let (_, report) = mpm_train(&ds, &MpmConfig::default()).unwrap();
        assert_eq!(report.solver, SolverPath::ConjugateGradient);
        assert!(report.total_cg > 0);
        let per_step: usize = report.history.iter().map(|r| r.cg_iters).sum();
        assert_eq!(per_step, report.total_cg);
    }

    #[test]
    fn max_outer_is_reported_not_an_error() {
        let ds = crate::data::synthetic::gaussian_overlap::<f64>(100, 3, 0.2, 0.2, 1);
        let cfg = MpmConfig {
            max_outer: 1,
            p_tol: 1e-300,
            ..MpmConfig::default()
        };
        let (_, report) = mpm_train(&ds, &cfg).unwrap();
        assert_eq!(report.termination, Termination::MaxOuter);
        assert_eq!(report.outer_iters, 1);
    }

    #[test]
    fn f32_training_runs() {
        let ds = two_clusters::<f32>(40, 2.5, 0.4, 8);
        let cfg = MpmConfig::<f32> {
            rho_growth: Some(2.0),
            ..MpmConfig::default()
        }
        .with_sparsity(Sparsity::Count(2));
        let (model, report) = mpm_train(&ds, &cfg).unwrap();
        assert!(report.converged());
        assert_eq!(crate::eval::accuracy(&model, &ds).unwrap(), 100.0);
    }
}
