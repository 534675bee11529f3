use crate::error::{Error, Result};
use crate::levmarq::ConstraintSet;
use crate::linalg::DEFAULT_PINV_RTOL;
use crate::model::CVector;
use crate::prox::RegularizerSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OptDmd,
    SparseFista,
    SparseSr3,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optdmd" => Ok(Self::OptDmd),
            "fista" | "sparse_fista" => Ok(Self::SparseFista),
            "sr3" | "sparse_sr3" => Ok(Self::SparseSr3),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub rank: usize,
    pub regularizer: RegularizerSpec,
    /// SR3 relaxation parameter.
    pub eta: f64,
    pub constraint: ConstraintSet,
    /// POD rank for the optimized-DMD eigenvalue loop; `None` picks
    /// `min(n, m, max(2r, 10))`.
    pub compression_rank: Option<usize>,
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub tau_active: f64,
    pub tau_global: f64,
    pub global_local_enabled: bool,
    /// Use the projected Jacobian for SR3 eigenvalue steps.
    pub debiased_jacobian: bool,
    pub init_omega: Option<CVector>,
    pub seed: u64,
    pub initial_damping: f64,
    pub pinv_rtol: f64,
    /// Consecutive rejected steps tolerated before giving up.
    pub max_rejections: usize,
}

impl SolverConfig {
    pub fn new(method: Method, rank: usize) -> Self {
        Self {
            method,
            rank,
            regularizer: RegularizerSpec::none(),
            eta: 1.0,
            constraint: ConstraintSet::Unconstrained,
            compression_rank: None,
            outer_tol: 1e-6,
            outer_max_iter: 200,
            inner_tol: 1e-6,
            inner_max_iter: 1000,
            tau_active: 0.1,
            tau_global: 0.5,
            global_local_enabled: true,
            debiased_jacobian: true,
            init_omega: None,
            seed: 0,
            initial_damping: 1.0,
            pinv_rtol: DEFAULT_PINV_RTOL,
            max_rejections: 50,
        }
    }

    pub fn default_compression_rank(n: usize, m: usize, r: usize) -> usize {
        n.min(m).min((2 * r).max(10))
    }

    /// Checks the configuration against an `n x m` data set.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let r = self.rank;
        if r == 0 {
            return bad("rank must be at least 1".into());
        }
        if r > n.min(m) {
            return bad(format!("rank {r} exceeds min(n, m) = {}", n.min(m)));
        }
        match &self.init_omega {
            Some(w) if w.len() != r => {
                return bad(format!("initial eigenvalues have length {} but rank is {r}", w.len()));
            }
            Some(w) if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) => {
                return bad("initial eigenvalues must be finite".into());
            }
            None if r > n.min(m.saturating_sub(1)) => {
                return bad(format!(
                    "rank {r} too large for the initializer (needs r <= min(n, m - 1) = {})",
                    n.min(m.saturating_sub(1))
                ));
            }
            _ => {}
        }
        for (name, v) in [("outer_tol", self.outer_tol), ("inner_tol", self.inner_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("tau_active", self.tau_active), ("tau_global", self.tau_global)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.initial_damping > 0.0 && self.initial_damping.is_finite()) {
            return bad(format!("initial damping must be positive, got {}", self.initial_damping));
        }
        if !(self.pinv_rtol > 0.0) {
            return bad(format!("pinv_rtol must be positive, got {}", self.pinv_rtol));
        }
        if self.outer_max_iter == 0 || self.inner_max_iter == 0 || self.max_rejections == 0 {
            return bad("iteration caps must be at least 1".into());
        }
        if let Some(p) = self.compression_rank {
            if p < r || p > n.min(m) {
                return bad(format!("compression rank {p} outside {r}..={}", n.min(m)));
            }
        }
        if let ConstraintSet::Disc { radius, center } = self.constraint {
            if !(radius > 0.0 && radius.is_finite()) || !center.re.is_finite() || !center.im.is_finite() {
                return bad(format!("disc constraint needs a positive radius, got {radius}"));
            }
        }
        let reg = &self.regularizer;
        if !(reg.lambda1 >= 0.0 && reg.lambda1.is_finite()) || !(reg.lambda2 >= 0.0 && reg.lambda2.is_finite()) {
            return bad("regularizer strengths must be finite and nonnegative".into());
        }
        Ok(())
    }
}
