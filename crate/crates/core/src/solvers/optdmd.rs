use log::debug;

use super::config::{Method, SolverConfig};
use super::global::detect_global_modes;
use super::init::{check_nonzero, init_from_basis};
use super::{EXACT_FIT, TINY_STEP};
use crate::error::{Error, Result};
use crate::levmarq::{project_eigenvalues, ratio_damping, KronJacobian, VarproEval};
use crate::linalg::leading_left_singular_vectors;
use crate::model::{eigenvalue_order, CMatrix, CVector, DmdModel, FitReport, SnapshotSet};

/// Variable-projection fit of `X ~ Phi_b T(omega)` with Levenberg-Marquardt
/// eigenvalue updates.
pub fn fit_optimized_dmd(snapshots: &SnapshotSet, config: &SolverConfig) -> Result<(DmdModel, FitReport)> {
    if config.method != Method::OptDmd {
        return Err(Error::InvalidArgument("configuration is not for optimized DMD".into()));
    }
    let x = snapshots.data();
    let times = snapshots.times();
    let (n, m) = x.shape();
    config.validate(n, m)?;
    let r = config.rank;
    let p = config
        .compression_rank
        .unwrap_or_else(|| SolverConfig::default_compression_rank(n, m, r));
    let compress = p < n;

    // one POD serves both the initializer and the compression
    let basis = if compress || config.init_omega.is_none() {
        check_nonzero(x)?;
        Some(leading_left_singular_vectors(x, if compress { p } else { r })?)
    } else {
        None
    };
    let omega0 = match &config.init_omega {
        Some(w) => w.clone(),
        None => {
            let b = basis.as_ref().expect("basis computed when no initial guess is given");
            init_from_basis(x, times, &b.columns(0, r).into_owned(), r)?
        }
    };
    let work: CMatrix = match (&basis, compress) {
        (Some(b), true) => b.columns(0, p).adjoint() * x,
        _ => x.clone(),
    };
    let scale = work.norm_squared();

    let mut omega = project_eigenvalues(&omega0, &config.constraint);
    let mut eval = VarproEval::new(&omega, &work, times, config.pinv_rtol)?;
    let mut objective = eval.objective();
    let mut nu = config.initial_damping;
    let mut history = vec![objective];
    let mut accepted = 0usize;
    let mut converged = objective <= EXACT_FIT * scale;

    while !converged && accepted < config.outer_max_iter {
        let jac = KronJacobian::new(&omega, &eval.phi_b, times, Some(&eval.svd))?;
        let mut rejections = 0usize;
        let step = loop {
            let attempt = jac.step(&eval.residual, nu);
            let (delta, denom) = match attempt {
                Ok(s) => s,
                Err(Error::RankDeficient) => {
                    nu *= 2.0;
                    rejections += 1;
                    if rejections >= config.max_rejections {
                        return Err(Error::Stagnation { rejections, objective });
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            let candidate = project_eigenvalues(&(&omega + &delta), &config.constraint);
            match VarproEval::new(&candidate, &work, times, config.pinv_rtol) {
                Ok(next) if next.objective() < objective => break Some((candidate, next, denom)),
                Ok(_) | Err(Error::NonFiniteResult(_)) => {}
                Err(e) => return Err(e),
            }
            nu *= 2.0;
            rejections += 1;
            if delta.norm() <= TINY_STEP * (1.0 + omega.norm()) {
                break None;
            }
            if rejections >= config.max_rejections {
                return Err(Error::Stagnation { rejections, objective });
            }
        };
        let Some((candidate, next, denom)) = step else {
            debug!("optdmd: step below resolution, stopping at objective {objective:e}");
            converged = true;
            break;
        };
        let new_objective = next.objective();
        nu = ratio_damping(nu, objective, new_objective, denom).unwrap_or(nu * 2.0);
        let rel = (objective - new_objective) / objective;
        omega = candidate;
        eval = next;
        objective = new_objective;
        history.push(objective);
        accepted += 1;
        debug!("optdmd: iteration {accepted} objective {objective:e} damping {nu:e}");
        if rel < config.outer_tol || objective <= EXACT_FIT * scale {
            converged = true;
        }
    }

    let phi_b = if compress {
        VarproEval::new(&omega, x, times, config.pinv_rtol)?.phi_b
    } else {
        eval.phi_b
    };
    let t = crate::linalg::build_time_matrix(&omega, times)?;
    let final_objective = (x - &phi_b * t.values()).norm_squared();

    let order = eigenvalue_order(&omega);
    let omega = CVector::from_iterator(r, order.iter().map(|&i| omega[i]));
    let phi_b = phi_b.select_columns(order.iter());
    let mask = detect_global_modes(&phi_b, config.tau_active, config.tau_global);
    let model = DmdModel::from_phi_b(omega, &phi_b)?;
    let report = FitReport {
        outer_iterations: accepted,
        avg_inner_iterations: 0.0,
        final_objective,
        converged,
        global_mask: mask.is_global,
        objective_history: history,
        mask_epochs: vec![0],
        inner_cap_hits: 0,
    };
    Ok((model, report))
}
