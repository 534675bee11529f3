use log::debug;
use nalgebra::DVector;

use super::config::{Method, SolverConfig};
use super::fista::fista;
use super::global::detect_global_modes;
use super::init::{check_nonzero, init_from_basis};
use super::sr3::sr3;
use super::{ModeUpdate, EXACT_FIT, TINY_STEP};
use crate::error::{Error, Result};
use crate::levmarq::{fixed_modes_residual_matrix, project_eigenvalues, KronJacobian, VarproEval};
use crate::linalg::{build_time_matrix, leading_left_singular_vectors, TimeSvd};
use crate::model::{eigenvalue_order, CMatrix, CVector, DmdModel, FitReport, SnapshotSet};
use crate::prox::{masked_penalty, GlobalLocalMask};

struct Problem<'a> {
    x: &'a CMatrix,
    times: &'a DVector<f64>,
    config: &'a SolverConfig,
    inner_iterations: usize,
    inner_calls: usize,
    cap_hits: usize,
}

impl Problem<'_> {
    fn mode_update(&mut self, phi0: &CMatrix, omega: &CVector, mask: &GlobalLocalMask) -> Result<ModeUpdate> {
        let c = self.config;
        let out = match c.method {
            Method::SparseFista => fista(phi0, omega, self.x, self.times, &c.regularizer, mask, c.inner_tol, c.inner_max_iter)?,
            Method::SparseSr3 => sr3(
                phi0,
                omega,
                self.x,
                self.times,
                &c.regularizer,
                mask,
                c.eta,
                c.inner_tol,
                c.inner_max_iter,
                c.pinv_rtol,
            )?,
            Method::OptDmd => unreachable!("checked by the caller"),
        };
        self.inner_calls += 1;
        self.inner_iterations += out.iterations;
        if !out.converged {
            self.cap_hits += 1;
        }
        Ok(out)
    }

    /// `||X - Phi T(omega)||^2 + psi_GL(Phi)`.
    fn objective(&self, omega: &CVector, phi: &CMatrix, mask: &GlobalLocalMask) -> Result<f64> {
        let r = fixed_modes_residual_matrix(omega, phi, self.x, self.times)?;
        Ok(r.norm_squared() + masked_penalty(&self.config.regularizer, phi, mask)?)
    }

    fn mask_for(&self, phi: &CMatrix) -> GlobalLocalMask {
        if self.config.global_local_enabled {
            detect_global_modes(phi, self.config.tau_active, self.config.tau_global)
        } else {
            GlobalLocalMask::all_local(phi.ncols())
        }
    }

    /// Candidate eigenvalues and modes after one damped step; `None` when the
    /// step cannot be evaluated.
    fn try_candidate(
        &mut self,
        omega: &CVector,
        delta: &CVector,
        phi: &CMatrix,
        mask: &GlobalLocalMask,
    ) -> Result<Option<(CVector, CMatrix, f64)>> {
        let candidate = project_eigenvalues(&(omega + delta), &self.config.constraint);
        let update = match self.mode_update(phi, &candidate, mask) {
            Ok(u) => u,
            Err(Error::NonFiniteResult(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        match self.objective(&candidate, &update.phi_b, mask) {
            Ok(f) if f.is_finite() => Ok(Some((candidate, update.phi_b, f))),
            Ok(_) | Err(Error::NonFiniteResult(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Sparse-mode DMD: Levenberg-Marquardt eigenvalue steps for fixed modes
/// alternated with regularized mode updates (FISTA or SR3).
pub fn fit_sparse_mode_dmd(snapshots: &SnapshotSet, config: &SolverConfig) -> Result<(DmdModel, FitReport)> {
    if !matches!(config.method, Method::SparseFista | Method::SparseSr3) {
        return Err(Error::InvalidArgument("configuration is not for sparse-mode DMD".into()));
    }
    let x = snapshots.data();
    let times = snapshots.times();
    let (n, m) = x.shape();
    config.validate(n, m)?;
    let r = config.rank;
    check_nonzero(x)?;
    let omega0 = match &config.init_omega {
        Some(w) => w.clone(),
        None => init_from_basis(x, times, &leading_left_singular_vectors(x, r)?, r)?,
    };
    let scale = x.norm_squared();
    let use_projector = config.method == Method::SparseSr3 && config.debiased_jacobian;

    let mut prob = Problem {
        x,
        times,
        config,
        inner_iterations: 0,
        inner_calls: 0,
        cap_hits: 0,
    };

    let mut omega = project_eigenvalues(&omega0, &config.constraint);
    let ls = VarproEval::new(&omega, x, times, config.pinv_rtol)?.phi_b;
    let mut mask = prob.mask_for(&ls);
    let mut phi = prob.mode_update(&ls, &omega, &mask)?.phi_b;
    let mut objective = prob.objective(&omega, &phi, &mask)?;
    let mut history = vec![objective];
    let mut epochs = vec![0usize];
    let mut nu = config.initial_damping;
    let mut accepted = 0usize;
    let mut converged = objective <= EXACT_FIT * scale;

    while !converged && accepted < config.outer_max_iter {
        let next_mask = prob.mask_for(&phi);
        if next_mask != mask {
            mask = next_mask;
            objective = prob.objective(&omega, &phi, &mask)?;
            epochs.push(history.len());
            history.push(objective);
            debug!("sparse: mask changed to {:?}, objective {objective:e}", mask.is_global);
        }

        let residual = fixed_modes_residual_matrix(&omega, &phi, x, times)?;
        let svd = if use_projector {
            Some(TimeSvd::new(build_time_matrix(&omega, times)?.values(), config.pinv_rtol)?)
        } else {
            None
        };
        let jac = KronJacobian::new(&omega, &phi, times, svd.as_ref())?;

        let mut rejections = 0usize;
        let step = loop {
            let delta = match jac.step(&residual, nu) {
                Ok((d, _)) => Some(d),
                Err(Error::RankDeficient) => None,
                Err(e) => return Err(e),
            };
            if let Some(delta) = &delta {
                if let Some((cand, cand_phi, f)) = prob.try_candidate(&omega, delta, &phi, &mask)? {
                    if f < objective {
                        break Some((cand, cand_phi, f));
                    }
                }
            }
            nu *= 2.0;
            rejections += 1;
            if delta.is_some_and(|d| d.norm() <= TINY_STEP * (1.0 + omega.norm())) {
                break None;
            }
            if rejections >= config.max_rejections {
                return Err(Error::Stagnation { rejections, objective });
            }
        };
        let Some((cand, cand_phi, f)) = step else {
            debug!("sparse: step below resolution, stopping at objective {objective:e}");
            converged = true;
            break;
        };
        nu /= 3.0;
        let rel = (objective - f) / objective;
        omega = cand;
        phi = cand_phi;
        objective = f;
        history.push(objective);
        accepted += 1;
        debug!("sparse: iteration {accepted} objective {objective:e} damping {nu:e} omega {:?}", omega.as_slice());
        if rel < config.outer_tol || objective <= EXACT_FIT * scale {
            converged = true;
        }
    }

    let order = eigenvalue_order(&omega);
    let omega = CVector::from_iterator(r, order.iter().map(|&i| omega[i]));
    let phi = phi.select_columns(order.iter());
    let global_mask: Vec<bool> = order.iter().map(|&i| mask.is_global[i]).collect();
    let model = DmdModel::from_phi_b(omega, &phi)?;
    let report = FitReport {
        outer_iterations: accepted,
        avg_inner_iterations: if prob.inner_calls > 0 {
            prob.inner_iterations as f64 / prob.inner_calls as f64
        } else {
            0.0
        },
        final_objective: objective,
        converged,
        global_mask,
        objective_history: history,
        mask_epochs: epochs,
        inner_cap_hits: prob.cap_hits,
    };
    Ok((model, report))
}
