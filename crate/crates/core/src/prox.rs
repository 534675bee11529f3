//! Sparsity-promoting regularizers and their proximal operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    L0,
    L1,
    L0PlusL2sq,
    L1PlusL2sq,
    None,
}

impl std::str::FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l0" => Ok(Self::L0),
            "l1" => Ok(Self::L1),
            "l0l2" | "l0_plus_l2sq" | "l0+l2sq" => Ok(Self::L0PlusL2sq),
            "l1l2" | "l1_plus_l2sq" | "l1+l2sq" => Ok(Self::L1PlusL2sq),
            "none" => Ok(Self::None),
            other => Err(Error::InvalidArgument(format!("unknown regularizer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl RegularizerSpec {
    pub fn new(kind: RegularizerKind, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 >= 0.0 && lambda1.is_finite()) || !(lambda2 >= 0.0 && lambda2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "regularizer strengths must be finite and nonnegative (got {lambda1}, {lambda2})"
            )));
        }
        Ok(Self { kind, lambda1, lambda2 })
    }

    pub fn none() -> Self {
        Self {
            kind: RegularizerKind::None,
            lambda1: 0.0,
            lambda2: 0.0,
        }
    }

    pub fn l1(lambda: f64) -> Self {
        Self {
            kind: RegularizerKind::L1,
            lambda1: lambda,
            lambda2: 0.0,
        }
    }

    pub fn l0(lambda: f64) -> Self {
        Self {
            kind: RegularizerKind::L0,
            lambda1: lambda,
            lambda2: 0.0,
        }
    }

    /// psi(x) for a single entry.
    pub fn penalty(&self, x: Complex64) -> f64 {
        let a = x.norm();
        match self.kind {
            RegularizerKind::None => 0.0,
            RegularizerKind::L1 => self.lambda1 * a,
            RegularizerKind::L0 => {
                if a != 0.0 {
                    self.lambda1
                } else {
                    0.0
                }
            }
            RegularizerKind::L1PlusL2sq => self.lambda1 * a + self.lambda2 * a * a,
            RegularizerKind::L0PlusL2sq => {
                let count = if a != 0.0 { self.lambda1 } else { 0.0 };
                count + self.lambda2 * a * a
            }
        }
    }
}

/// Which modes are treated as global (unpenalized).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalLocalMask {
    pub is_global: Vec<bool>,
}

impl GlobalLocalMask {
    pub fn all_local(r: usize) -> Self {
        Self {
            is_global: vec![false; r],
        }
    }

    pub fn all_global(r: usize) -> Self {
        Self {
            is_global: vec![true; r],
        }
    }

    pub fn len(&self) -> usize {
        self.is_global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_global.is_empty()
    }

    pub fn n_global(&self) -> usize {
        self.is_global.iter().filter(|&&g| g).count()
    }

    fn check(&self, cols: usize) -> Result<()> {
        if self.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} entries but the matrix has {cols} columns",
                self.len()
            )));
        }
        Ok(())
    }
}

fn phase(y: Complex64) -> Complex64 {
    let a = y.norm();
    if a == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        y / a
    }
}

pub fn prox_scalar(spec: &RegularizerSpec, step: f64, y: Complex64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let l1 = step * spec.lambda1;
    let l2 = step * spec.lambda2;
    match spec.kind {
        RegularizerKind::None => y,
        RegularizerKind::L1 => {
            let a = y.norm();
            if a > l1 {
                phase(y) * (a - l1)
            } else {
                zero
            }
        }
        RegularizerKind::L0 => {
            if y.norm_sqr() > 2.0 * l1 {
                y
            } else {
                zero
            }
        }
        RegularizerKind::L0PlusL2sq => {
            let scale = 1.0 + 2.0 * l2;
            if y.norm_sqr() > 2.0 * l1 * scale {
                y / scale
            } else {
                zero
            }
        }
        RegularizerKind::L1PlusL2sq => {
            let a = y.norm();
            if a > l1 {
                phase(y) * ((a - l1) / (1.0 + 2.0 * l2))
            } else {
                zero
            }
        }
    }
}

/// Applies the prox entrywise to local columns; global columns pass through.
pub fn prox_matrix(spec: &RegularizerSpec, step: f64, y: &CMatrix, mask: &GlobalLocalMask) -> Result<CMatrix> {
    mask.check(y.ncols())?;
    let mut out = y.clone();
    for (j, &global) in mask.is_global.iter().enumerate() {
        if global {
            continue;
        }
        for z in out.column_mut(j).iter_mut() {
            *z = prox_scalar(spec, step, *z);
        }
    }
    Ok(out)
}

/// `(1/(2 step)) |x - y|^2 + psi(x)`.
pub fn prox_objective(spec: &RegularizerSpec, step: f64, y: Complex64, x: Complex64) -> f64 {
    (x - y).norm_sqr() / (2.0 * step) + spec.penalty(x)
}

/// psi_GL(Phi): the penalty summed over local columns only.
pub fn masked_penalty(spec: &RegularizerSpec, phi: &CMatrix, mask: &GlobalLocalMask) -> Result<f64> {
    mask.check(phi.ncols())?;
    if spec.kind == RegularizerKind::None {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (j, &global) in mask.is_global.iter().enumerate() {
        if !global {
            total += phi.column(j).iter().map(|&z| spec.penalty(z)).sum::<f64>();
        }
    }
    Ok(total)
}
