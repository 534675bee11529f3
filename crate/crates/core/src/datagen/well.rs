use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;

use super::noise::add_noise;
use crate::error::{Error, Result};
use crate::model::{validate_snapshots, CMatrix, CVector, SnapshotSet};

/// Finite square well of depth `v0` on `|x| < a`, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WellSpec {
    pub v0: f64,
    pub a: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub t_count: usize,
    pub dt_snapshot: f64,
}

impl Default for WellSpec {
    fn default() -> Self {
        Self {
            v0: 1.0,
            a: 5.0,
            x_min: -25.0,
            x_max: 25.0,
            dx: 0.1,
            t_count: 200,
            dt_snapshot: 1.0,
        }
    }
}

impl WellSpec {
    fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0 && self.a > 0.0 && self.dx > 0.0 && self.dt_snapshot > 0.0) {
            return Err(Error::InvalidArgument(
                "well depth, half-width, dx and dt must be positive".into(),
            ));
        }
        if !(self.x_min < -self.a && self.a < self.x_max) {
            return Err(Error::InvalidArgument(format!(
                "domain [{}, {}] must contain the well [-{a}, {a}]",
                self.x_min,
                self.x_max,
                a = self.a
            )));
        }
        Ok(())
    }
}

/// `x_i = x_min + i dx` for `i < round((x_max - x_min) / dx)`.
pub fn well_grid(spec: &WellSpec) -> DVector<f64> {
    let count = ((spec.x_max - spec.x_min) / spec.dx).round() as usize;
    DVector::from_fn(count, |i, _| spec.x_min + i as f64 * spec.dx)
}

/// Composite trapezoid rule on a (possibly nonuniform) sorted grid.
pub fn trapezoid(grid: &DVector<f64>, f: &[f64]) -> f64 {
    (1..grid.len())
        .map(|i| 0.5 * (grid[i] - grid[i - 1]) * (f[i] + f[i - 1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    pub parity: Parity,
    pub xi: f64,
    pub eta_well: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol || mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bound states of the well, sorted by energy (parities alternate, starting
/// even). Roots are bracketed between the tangent/cotangent singularities and
/// refined by bisection until the bracket is narrower than `tol`.
pub fn solve_bound_states(v0: f64, a: f64, tol: f64) -> Result<Vec<BoundState>> {
    if !(v0 > 0.0 && a > 0.0 && v0.is_finite() && a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "well depth and half-width must be positive (got {v0}, {a})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let r2 = 2.0 * v0 * a * a;
    let radius = r2.sqrt();
    let eta_of = |xi: f64| (r2 - xi * xi).max(0.0).sqrt();
    const GUARD: f64 = 1e-12;

    let mut xis: Vec<(f64, Parity)> = Vec::new();
    let mut k = 0usize;
    loop {
        let base = k as f64 * PI;
        if base >= radius {
            break;
        }
        let hi = (base + FRAC_PI_2 - GUARD).min(radius);
        let even = |xi: f64| xi * xi.tan() - eta_of(xi);
        xis.push((bisect(even, base, hi, tol), Parity::Even));

        let lo = base + FRAC_PI_2 + GUARD;
        if lo < radius {
            let hi = ((k + 1) as f64 * PI - GUARD).min(radius);
            let odd = |xi: f64| xi / xi.tan() + eta_of(xi);
            xis.push((bisect(odd, lo, hi, tol), Parity::Odd));
        }
        k += 1;
    }

    let states = xis
        .into_iter()
        .map(|(xi, parity)| {
            let eta = eta_of(xi);
            BoundState {
                energy: xi * xi / (2.0 * a * a) - v0,
                parity,
                xi,
                eta_well: eta,
                alpha: xi / a,
                beta: eta / a,
            }
        })
        .collect();
    Ok(states)
}

/// Closed-form bound eigenfunction with its grid normalization applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundProfile {
    pub state: BoundState,
    pub a: f64,
    /// Overall factor (normalization times sign).
    pub scale: f64,
}

impl BoundProfile {
    /// Inside formula (`|x| < a`), valid for any `x`.
    pub fn inside(&self, x: f64) -> f64 {
        let s = &self.state;
        self.scale
            * match s.parity {
                Parity::Even => (s.alpha * x).cos(),
                Parity::Odd => (s.alpha * x).sin(),
            }
    }

    /// Outside formula for the side of the well containing `x`.
    pub fn outside(&self, x: f64) -> f64 {
        let s = &self.state;
        let a = self.a;
        let v = match s.parity {
            Parity::Even => {
                let b = (s.alpha * a).cos() * (s.beta * a).exp();
                b * (-s.beta * x.abs()).exp()
            }
            Parity::Odd => {
                let amp = (s.alpha * a).sin() * (s.beta * a).exp();
                if x > 0.0 {
                    amp * (-s.beta * x).exp()
                } else {
                    -amp * (s.beta * x).exp()
                }
            }
        };
        self.scale * v
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= self.a {
            self.inside(x)
        } else {
            self.outside(x)
        }
    }
}

pub fn bound_state_profile(state: &BoundState, a: f64, grid: &DVector<f64>) -> Result<BoundProfile> {
    if grid.is_empty() || grid[0] > -a || grid[grid.len() - 1] < a {
        return Err(Error::InvalidArgument(format!("grid must span [-{a}, {a}]")));
    }
    let raw = BoundProfile {
        state: *state,
        a,
        scale: 1.0,
    };
    let sq: Vec<f64> = grid.iter().map(|&x| raw.eval(x).powi(2)).collect();
    let norm = trapezoid(grid, &sq).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NumericalFailure("eigenfunction has zero norm on the grid".into()));
    }
    let sign = if raw.inside(a) < 0.0 { -1.0 } else { 1.0 };
    Ok(BoundProfile {
        scale: sign / norm,
        ..raw
    })
}

/// Bound eigenfunction sampled on `grid`, unit trapezoid norm, positive just
/// inside `x = a`.
pub fn bound_state_eigenfunction(state: &BoundState, a: f64, grid: &DVector<f64>) -> Result<DVector<f64>> {
    let p = bound_state_profile(state, a, grid)?;
    Ok(grid.map(|x| p.eval(x)))
}

/// Scattering state at energy `energy > 0` with a purely transmitted wave for
/// `x > a`, normalized to unit trapezoid norm on `grid`.
pub fn scattering_state(energy: f64, v0: f64, a: f64, grid: &DVector<f64>) -> Result<CVector> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::InvalidArgument(format!("scattering energy must be positive, got {energy}")));
    }
    if !(v0 > 0.0 && a > 0.0) {
        return Err(Error::InvalidArgument("well depth and half-width must be positive".into()));
    }
    let values = scattering_values(energy, v0, a, grid);
    let sq: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
    let norm = trapezoid(grid, &sq).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NumericalFailure("scattering state has zero norm on the grid".into()));
    }
    Ok(values.unscale(norm))
}

/// Piecewise constants `(A, B, C, D)` for `E = 1`.
pub(crate) fn scattering_constants(energy: f64, v0: f64, a: f64) -> (Complex64, Complex64, Complex64, Complex64, Complex64, f64) {
    let alpha = (2.0 * (v0 + energy)).sqrt();
    let beta = Complex64::new(0.0, (2.0 * energy).sqrt());
    let one = Complex64::new(1.0, 0.0);
    let (s1, c1) = (alpha * a).sin_cos();
    let (s2, c2) = (2.0 * alpha * a).sin_cos();
    let ab = beta * alpha * 2.0;
    let cap_a = (one * c2 + (alpha * alpha - beta * beta) / ab * s2) * (beta * 2.0 * a).exp();
    let cap_b = -(alpha * alpha + beta * beta) / ab * s2;
    let cap_c = (one * s1 + beta / alpha * c1) * (beta * a).exp();
    let cap_d = (one * c1 - beta / alpha * s1) * (beta * a).exp();
    (cap_a, cap_b, cap_c, cap_d, beta, alpha)
}

fn scattering_values(energy: f64, v0: f64, a: f64, grid: &DVector<f64>) -> CVector {
    let (cap_a, cap_b, cap_c, cap_d, beta, alpha) = scattering_constants(energy, v0, a);
    grid.map(|x| {
        if x < -a {
            cap_a * (beta * x).exp() + cap_b * (-beta * x).exp()
        } else if x <= a {
            cap_c * (alpha * x).sin() + cap_d * (alpha * x).cos()
        } else {
            (beta * x).exp()
        }
    })
}

/// Amplitudes of the bound and scattering components of a superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub bound_amplitudes: DVector<f64>,
    pub scattering_energies: DVector<f64>,
    pub scattering_amplitudes: DVector<f64>,
}

impl SpectrumSample {
    /// Every bound state at amplitude 0.5 and scattering energies
    /// 0.1, 0.2, ..., 50 with amplitudes `0.2 / energy`.
    pub fn standard(n_bound: usize) -> Self {
        let energies = DVector::from_fn(500, |k, _| (k + 1) as f64 / 10.0);
        Self {
            bound_amplitudes: DVector::from_element(n_bound, 0.5),
            scattering_amplitudes: energies.map(|e| 0.2 / e),
            scattering_energies: energies,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellDataset {
    pub clean: SnapshotSet,
    pub noisy: SnapshotSet,
    /// `(energy, mode)` for each component, bound states first. Mode `j`
    /// evolves as `exp(-i energy t)`.
    pub truth: Vec<(f64, CVector)>,
    pub bound_states: Vec<BoundState>,
}

/// Superposition of bound and scattering states with time factors
/// `exp(-i lambda t)`.
pub fn gen_square_well_dataset(well: &WellSpec, sample: &SpectrumSample, noise_sigma: f64, seed: u64) -> Result<WellDataset> {
    well.validate()?;
    if well.t_count < 2 {
        return Err(Error::TooFewSnapshots(well.t_count));
    }
    let bound = solve_bound_states(well.v0, well.a, 1e-14)?;
    if sample.bound_amplitudes.len() != bound.len() {
        return Err(Error::InvalidArgument(format!(
            "{} bound amplitudes for {} bound states",
            sample.bound_amplitudes.len(),
            bound.len()
        )));
    }
    if sample.scattering_energies.len() != sample.scattering_amplitudes.len() {
        return Err(Error::InvalidArgument("scattering energies and amplitudes differ in length".into()));
    }
    let all_amps = sample.bound_amplitudes.iter().chain(sample.scattering_amplitudes.iter());
    if all_amps.into_iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidArgument("amplitudes must be finite".into()));
    }

    let grid = well_grid(well);
    let mut truth = Vec::with_capacity(bound.len() + sample.scattering_energies.len());
    for (state, &b) in bound.iter().zip(sample.bound_amplitudes.iter()) {
        let v = bound_state_eigenfunction(state, well.a, &grid)?;
        truth.push((state.energy, v.map(|x| Complex64::new(b * x, 0.0))));
    }
    for (&e, &b) in sample.scattering_energies.iter().zip(sample.scattering_amplitudes.iter()) {
        let v = scattering_state(e, well.v0, well.a, &grid)?;
        truth.push((e, v * Complex64::new(b, 0.0)));
    }

    let times = DVector::from_fn(well.t_count, |k, _| k as f64 * well.dt_snapshot);
    let modes = CMatrix::from_fn(grid.len(), truth.len(), |i, j| truth[j].1[i]);
    let dynamics = CMatrix::from_fn(truth.len(), times.len(), |j, k| {
        Complex64::new(0.0, -truth[j].0 * times[k]).exp()
    });
    let clean = &modes * &dynamics;
    let noisy = add_noise(&clean, noise_sigma, seed)?;
    Ok(WellDataset {
        clean: validate_snapshots(clean, times.clone())?,
        noisy: validate_snapshots(noisy, times)?,
        truth,
        bound_states: bound,
    })
}
