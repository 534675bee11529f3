//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sparsemode::datagen::{
    bound_state_profile, gen_square_well_dataset, gen_synthetic_video, solve_bound_states, trapezoid, well_grid,
    BoundState, Parity, SpectrumSample, VideoSpec, WellSpec,
};
use sparsemode::io::{read_sweep_table, write_matrix, write_model, write_times};
use sparsemode::linalg::build_time_matrix;
use sparsemode::model::{reconstruct, relative_error, validate_snapshots, CMatrix, CVector, DmdModel, FitReport, SnapshotSet};
use sparsemode::prox::{prox_objective, prox_scalar, RegularizerKind, RegularizerSpec};
use sparsemode::solvers::{fit, Method, SolverConfig};

// criterion 1
const ROOT_RESIDUAL_TOL: f64 = 1e-10;
const ENERGY_ORACLE_TOL: f64 = 1e-8;
const SCAN_STEP: f64 = 1e-4;
// criterion 2
const CONTINUITY_TOL: f64 = 1e-6;
const NORMALIZATION_TOL: f64 = 1e-6;
const SCHRODINGER_REL_TOL: f64 = 1e-2;
const SCHRODINGER_MIN_ORDER: f64 = 1.8;
// criterion 3
const CLEAN_FREQ_TOL: f64 = 1e-3;
const CLEAN_RECON_TOL: f64 = 1e-6;
// criterion 4
const SR3_VIDEO_ERR: f64 = 0.12;
const FISTA_VIDEO_ERR: f64 = 0.14;
// criterion 6
const SWEEP_SMALL_LAMBDA_REL: f64 = 0.01;
// criterion 7
const WELL_ERR: f64 = 0.35;
const WELL_ENERGY_TOL: f64 = 0.02;
// criterion 8
const CROSS_TOL: f64 = 1e-6;
// criterion 9
const PROX_MARGIN: f64 = 1e-9;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed <= Duration::from_secs(limit_secs), || {
        format!("runtime {:.1}s exceeds {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn clean_error(model: &DmdModel, clean: &SnapshotSet) -> f64 {
    relative_error(&reconstruct(model, clean.times()).unwrap(), clean.data()).unwrap()
}

/// Accepted objectives never increase inside a mask epoch.
fn monotone(report: &FitReport) -> bool {
    let h = &report.objective_history;
    let mut bounds = report.mask_epochs.clone();
    bounds.push(h.len());
    bounds.windows(2).all(|w| h[w[0]..w[1]].windows(2).all(|p| p[1] <= p[0]))
}

// ---- criterion 1 ----

/// Pole-free forms of the even and odd matching conditions.
fn even_form(xi: f64, r: f64) -> f64 {
    xi * xi.sin() - (r * r - xi * xi).max(0.0).sqrt() * xi.cos()
}

fn odd_form(xi: f64, r: f64) -> f64 {
    xi * xi.cos() + (r * r - xi * xi).max(0.0).sqrt() * xi.sin()
}

/// Energies from a fixed-step sign scan refined by bisection.
fn scan_oracle(v0: f64, a: f64) -> Vec<f64> {
    let r = a * (2.0 * v0).sqrt();
    let mut roots = Vec::new();
    for f in [even_form as fn(f64, f64) -> f64, odd_form] {
        let mut lo = SCAN_STEP;
        while lo < r {
            let hi = (lo + SCAN_STEP).min(r);
            let (flo, fhi) = (f(lo, r), f(hi, r));
            if flo != 0.0 && fhi != 0.0 && flo.signum() != fhi.signum() {
                let (mut l, mut h) = (lo, hi);
                for _ in 0..200 {
                    let m = 0.5 * (l + h);
                    if f(m, r).signum() == flo.signum() {
                        l = m;
                    } else {
                        h = m;
                    }
                }
                roots.push(0.5 * (l + h));
            }
            lo = hi;
        }
    }
    let mut e: Vec<f64> = roots.iter().map(|xi| xi * xi / (2.0 * a * a) - v0).collect();
    e.sort_by(f64::total_cmp);
    e
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let states = solve_bound_states(1.0, 5.0, 1e-14).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(states.len() == 5, || format!("{} states, expected 5", states.len()))?;
    let mut worst = 0.0f64;
    for s in &states {
        let circle = (s.xi * s.xi + s.eta_well * s.eta_well - 50.0).abs();
        let cond = match s.parity {
            Parity::Even => s.xi * s.xi.tan() - s.eta_well,
            Parity::Odd => s.xi / s.xi.tan() + s.eta_well,
        }
        .abs();
        worst = worst.max(circle).max(cond);
    }
    check(worst < ROOT_RESIDUAL_TOL, || format!("root residual {worst:e}"))?;
    let oracle = scan_oracle(1.0, 5.0);
    check(oracle.len() == 5, || format!("oracle found {} roots", oracle.len()))?;
    let gap = states
        .iter()
        .zip(&oracle)
        .map(|(s, e)| (s.energy - e).abs())
        .fold(0.0, f64::max);
    check(gap < ENERGY_ORACLE_TOL, || format!("energy mismatch {gap:e}"))?;
    within(elapsed, 1)?;
    Ok(format!("5 states, residual {worst:.1e}, oracle gap {gap:.1e}"))
}

// ---- criterion 2 ----

fn schrodinger_residual(state: &BoundState, well: &WellSpec) -> f64 {
    let grid = well_grid(well);
    let p = bound_state_profile(state, well.a, &grid).unwrap();
    let v: Vec<f64> = grid.iter().map(|&x| p.eval(x)).collect();
    let dx = well.dx;
    let (mut res, mut norm) = (0.0, 0.0);
    for i in 1..grid.len() - 1 {
        let straddles = [-well.a, well.a].iter().any(|s| (grid[i - 1] - s) * (grid[i + 1] - s) < 0.0);
        if straddles {
            continue;
        }
        let n0 = if grid[i].abs() < well.a { -well.v0 } else { 0.0 };
        let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
        res += (-0.5 * lap + n0 * v[i] - state.energy * v[i]).powi(2);
        norm += v[i] * v[i];
    }
    (res / norm).sqrt()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let well = WellSpec::default();
    let grid = well_grid(&well);
    let states = solve_bound_states(well.v0, well.a, 1e-14).map_err(|e| e.to_string())?;
    let (mut jump, mut norm_err, mut res_max, mut order_min) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for s in &states {
        let p = bound_state_profile(s, well.a, &grid).map_err(|e| e.to_string())?;
        for x in [-well.a, well.a] {
            jump = jump.max((p.inside(x) - p.outside(x)).abs());
            // limits from either side through the piecewise evaluator
            jump = jump.max((p.eval(x * (1.0 - 1e-12)) - p.eval(x * (1.0 + 1e-12))).abs());
        }
        let sq: Vec<f64> = grid.iter().map(|&x| p.eval(x).powi(2)).collect();
        norm_err = norm_err.max((trapezoid(&grid, &sq) - 1.0).abs());
        let coarse = schrodinger_residual(s, &well);
        let fine = schrodinger_residual(s, &WellSpec { dx: well.dx / 2.0, ..well.clone() });
        res_max = res_max.max(coarse);
        order_min = order_min.min((coarse / fine).log2());
    }
    check(jump < CONTINUITY_TOL, || format!("continuity jump {jump:e}"))?;
    check(norm_err < NORMALIZATION_TOL, || format!("normalization error {norm_err:e}"))?;
    check(res_max < SCHRODINGER_REL_TOL, || format!("Schrodinger residual {res_max:e}"))?;
    check(order_min >= SCHRODINGER_MIN_ORDER, || format!("convergence order {order_min:.3}"))?;
    within(start.elapsed(), 5)?;
    Ok(format!(
        "jump {jump:.1e}, norm err {norm_err:.1e}, residual {res_max:.2e}, order {order_min:.2}"
    ))
}

// ---- criterion 3 ----

fn criterion_3(reports: &mut Vec<FitReport>) -> Outcome {
    let spec = VideoSpec { noise_sigma: 0.0, ..VideoSpec::default() };
    let (clean, _, _) = gen_synthetic_video(&spec).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (model, report) = fit(&clean, &SolverConfig::new(Method::OptDmd, 3)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let freq_err = model
        .omega()
        .iter()
        .zip([PI, 2.0 * PI, 3.0 * PI])
        .map(|(w, t)| (w.im - t).abs())
        .fold(0.0, f64::max);
    let err = clean_error(&model, &clean);
    reports.push(report);
    check(freq_err < CLEAN_FREQ_TOL, || format!("frequency error {freq_err:e}"))?;
    check(err < CLEAN_RECON_TOL, || format!("reconstruction error {err:e}"))?;
    within(elapsed, 60)?;
    Ok(format!("frequency error {freq_err:.1e}, reconstruction error {err:.1e}, {:.1}s", elapsed.as_secs_f64()))
}

// ---- criteria 4 and 5 ----

struct VideoFits {
    clean: SnapshotSet,
    noisy: SnapshotSet,
    sr3: (DmdModel, FitReport),
    sr3_config: SolverConfig,
    fista: (DmdModel, FitReport),
    optdmd: (DmdModel, FitReport),
    elapsed: Duration,
}

fn sr3_video_config() -> SolverConfig {
    let mut c = SolverConfig::new(Method::SparseSr3, 3);
    c.regularizer = RegularizerSpec::l1(0.1);
    c.eta = 1.0;
    c.tau_active = 0.1;
    c.tau_global = 0.5;
    c
}

fn video_fits() -> Result<VideoFits, String> {
    let (clean, noisy, _) = gen_synthetic_video(&VideoSpec::default()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let sr3_config = sr3_video_config();
    let sr3 = fit(&noisy, &sr3_config).map_err(|e| format!("sr3: {e}"))?;
    let mut fc = SolverConfig::new(Method::SparseFista, 3);
    fc.regularizer = RegularizerSpec::l0(10.0);
    let fista = fit(&noisy, &fc).map_err(|e| format!("fista: {e}"))?;
    let optdmd = fit(&noisy, &SolverConfig::new(Method::OptDmd, 3)).map_err(|e| format!("optdmd: {e}"))?;
    Ok(VideoFits { clean, noisy, sr3, sr3_config, fista, optdmd, elapsed: start.elapsed() })
}

fn criterion_4(v: &VideoFits) -> Outcome {
    let e_sr3 = clean_error(&v.sr3.0, &v.clean);
    let e_fista = clean_error(&v.fista.0, &v.clean);
    let e_opt = clean_error(&v.optdmd.0, &v.clean);
    let detail = format!("SR3 {e_sr3:.4}, FISTA {e_fista:.4}, optdmd {e_opt:.4}");
    check(e_sr3 <= SR3_VIDEO_ERR, || format!("SR3 error too large: {detail}"))?;
    check(e_fista <= FISTA_VIDEO_ERR, || format!("FISTA error too large: {detail}"))?;
    check(e_sr3 < e_opt, || format!("SR3 does not beat optdmd: {detail}"))?;
    within(v.elapsed, 600)?;
    Ok(format!("{detail}, {:.1}s", v.elapsed.as_secs_f64()))
}

fn nearest(omega: &CVector, target: f64) -> usize {
    (0..omega.len())
        .min_by(|&i, &j| (omega[i].im - target).abs().total_cmp(&(omega[j].im - target).abs()))
        .unwrap()
}

fn criterion_5(v: &VideoFits) -> Outcome {
    let (model, report) = &v.sr3;
    let gradient = nearest(model.omega(), PI);
    let square = nearest(model.omega(), 3.0 * PI);
    check(gradient != square, || "gradient and square map to one eigenvalue".into())?;
    let mask = &report.global_mask;
    check(mask[gradient], || format!("gradient mode local, mask {mask:?}"))?;
    check(!mask[square], || format!("square mode global, mask {mask:?}"))?;
    Ok(format!("mask {mask:?}"))
}

// ---- criterion 6 ----

fn criterion_6(v: &VideoFits, dir: &Path) -> Outcome {
    let data = dir.join("noisy.cmx");
    let clean = dir.join("clean.cmx");
    let times = dir.join("times.rmx");
    let table = dir.join("sweep.csv");
    write_matrix(&data, v.noisy.data()).map_err(|e| e.to_string())?;
    write_matrix(&clean, v.clean.data()).map_err(|e| e.to_string())?;
    write_times(&times, v.noisy.times()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let code = sparsemode::cli::run([
        "sparsemode", "sweep", "--data", data.to_str().unwrap(), "--times", times.to_str().unwrap(), "--rank", "4",
        "--method", "sr3", "--reg", "l1", "--lambdas", "logspace:-4:1:20", "--reference", clean.to_str().unwrap(),
        "--out", table.to_str().unwrap(),
    ]);
    check(code == 0, || format!("sweep exited with {code}"))?;
    let baseline = fit(&v.noisy, &SolverConfig::new(Method::OptDmd, 4)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let e_unreg = clean_error(&baseline.0, &v.clean);
    let rows = read_sweep_table(&table).map_err(|e| e.to_string())?;
    check(rows.len() == 20, || format!("{} sweep rows", rows.len()))?;
    let errs: Vec<f64> = rows.iter().map(|r| r.rel_error).collect();
    let first = errs[0];
    let last = errs[19];
    let (k_min, e_min) = errs
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let rel = (first - e_unreg).abs() / e_unreg;
    let detail = format!(
        "unregularized {e_unreg:.4}, smallest-lambda {first:.4}, min {e_min:.4} at lambda {:.3e} (index {k_min}), largest-lambda {last:.4}",
        rows[k_min].lambda
    );
    check(rel <= SWEEP_SMALL_LAMBDA_REL, || format!("small-lambda mismatch {rel:.4}: {detail}"))?;
    check(k_min > 0 && k_min < 19 && e_min < first && e_min < last, || format!("no interior minimum: {detail}"))?;
    within(elapsed, 1800)?;
    Ok(detail)
}

// ---- criterion 7 ----

fn criterion_7(reports: &mut Vec<FitReport>) -> Outcome {
    let well = WellSpec::default();
    let n_bound = solve_bound_states(well.v0, well.a, 1e-14).map_err(|e| e.to_string())?.len();
    let d = gen_square_well_dataset(&well, &SpectrumSample::standard(n_bound), 0.15, 0).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut c = SolverConfig::new(Method::SparseSr3, 20);
    c.regularizer = RegularizerSpec::l1(0.02125);
    let (model, report) = fit(&d.noisy, &c).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    reports.push(report);
    let err = clean_error(&model, &d.clean);
    let mut used = vec![false; model.rank()];
    let mut worst = 0.0f64;
    for s in &d.bound_states {
        let target = -s.energy;
        let best = (0..model.rank())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| (model.omega()[i].im - target).abs().total_cmp(&(model.omega()[j].im - target).abs()));
        let Some(i) = best else {
            return Err("fewer eigenvalues than bound states".into());
        };
        used[i] = true;
        worst = worst.max((model.omega()[i].im - target).abs());
    }
    let detail = format!("error {err:.4}, worst bound-energy gap {worst:.2e}, {:.1}s", elapsed.as_secs_f64());
    check(err <= WELL_ERR, || format!("reconstruction: {detail}"))?;
    check(worst <= WELL_ENERGY_TOL, || format!("bound energies: {detail}"))?;
    within(elapsed, 900)?;
    Ok(detail)
}

// ---- criterion 8 ----

fn criterion_8(reports: &mut Vec<FitReport>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    let phi = CMatrix::from_fn(20, 2, |_, _| Complex64::new(u(), u()));
    let omega = CVector::from_vec(vec![Complex64::new(-0.05, -1.3), Complex64::new(0.02, 2.1)]);
    let times = DVector::from_fn(50, |k, _| 0.1 * k as f64);
    let x = &phi * build_time_matrix(&omega, &times).unwrap().values();
    let s = validate_snapshots(x, times).unwrap();

    // a shared, deliberately perturbed start so both solvers have to iterate
    let start_omega = omega.map(|w| w + Complex64::new(0.03, -0.05));
    let mut oc = SolverConfig::new(Method::OptDmd, 2);
    oc.init_omega = Some(start_omega.clone());
    let (opt, r1) = fit(&s, &oc).map_err(|e| e.to_string())?;
    let mut c = SolverConfig::new(Method::SparseSr3, 2);
    c.regularizer = RegularizerSpec::none();
    c.init_omega = Some(start_omega);
    check(r1.outer_iterations > 0, || "optimized DMD did not iterate".into())?;
    let (sr3, r2) = fit(&s, &c).map_err(|e| e.to_string())?;
    check(r2.outer_iterations > 0, || "SR3 did not iterate".into())?;
    let truth_gap = (opt.omega() - &omega).iter().map(|z| z.norm()).fold(0.0, f64::max);
    reports.push(r1);
    reports.push(r2);
    let eig = (opt.omega() - sr3.omega()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rec = relative_error(
        &reconstruct(&sr3, s.times()).unwrap(),
        &reconstruct(&opt, s.times()).unwrap(),
    )
    .unwrap();
    check(eig < CROSS_TOL, || format!("eigenvalue gap {eig:e}"))?;
    check(rec < CROSS_TOL, || format!("reconstruction gap {rec:e}"))?;
    within(start.elapsed(), 10)?;
    Ok(format!("eigenvalue gap {eig:.1e}, reconstruction gap {rec:.1e}, distance to truth {truth_gap:.1e}"))
}

// ---- criterion 9 ----

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut u = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let kinds = [
        RegularizerKind::L1,
        RegularizerKind::L0,
        RegularizerKind::L1PlusL2sq,
        RegularizerKind::L0PlusL2sq,
        RegularizerKind::None,
    ];
    let mut worst = f64::NEG_INFINITY;
    for case in 0..1000 {
        let kind = kinds[case % kinds.len()];
        let spec = RegularizerSpec::new(kind, 2.0 * u(), u()).unwrap();
        let step = 0.05 + 2.0 * u();
        let y = Complex64::from_polar(3.0 * u(), 2.0 * PI * u());
        let x = prox_scalar(&spec, step, y);
        let fx = prox_objective(&spec, step, y, x);

        let mut candidates = vec![Complex64::new(0.0, 0.0), y];
        match kind {
            RegularizerKind::L0 | RegularizerKind::L0PlusL2sq => {
                // two-point oracle: zero or the ridge-shrunk input
                candidates.push(y / (1.0 + 2.0 * step * spec.lambda2));
            }
            _ => {
                // grid along the phase of y, plus a coarse 2D grid
                let dir = if y.norm() > 0.0 { y / y.norm() } else { Complex64::new(1.0, 0.0) };
                candidates.extend((0..=2000).map(|k| dir * (y.norm() * k as f64 / 2000.0)));
                for i in -20..=20 {
                    for j in -20..=20 {
                        candidates.push(y + Complex64::new(i as f64, j as f64) * (0.05 * (1.0 + y.norm())));
                    }
                }
            }
        }
        let best = candidates
            .iter()
            .map(|c| prox_objective(&spec, step, y, *c))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(fx - best);
        check(fx <= best + PROX_MARGIN, || {
            format!("case {case} ({kind:?}): prox objective {fx} exceeds oracle {best}")
        })?;
    }
    within(start.elapsed(), 10)?;
    Ok(format!("1000 cases, worst excess {worst:.1e}"))
}

// ---- criterion 10 ----

fn criterion_10(v: &VideoFits, reports: &[FitReport], dir: &Path) -> Outcome {
    let all: Vec<&FitReport> = reports.iter().chain([&v.sr3.1, &v.fista.1, &v.optdmd.1]).collect();
    let bad = all.iter().filter(|r| !monotone(r)).count();
    check(bad == 0, || format!("{bad} of {} fits have an increasing accepted objective", all.len()))?;

    let rerun = fit(&v.noisy, &v.sr3_config).map_err(|e| e.to_string())?;
    let (a, b) = (dir.join("first.model"), dir.join("second.model"));
    write_model(&a, &v.sr3.0, Some(&v.sr3.1)).map_err(|e| e.to_string())?;
    write_model(&b, &rerun.0, Some(&rerun.1)).map_err(|e| e.to_string())?;
    let same = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    check(same, || "repeated SR3 fit wrote a different model file".into())?;
    Ok(format!("{} fits monotone, repeated model files identical", all.len()))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn report(n: usize, name: &str, outcome: &Outcome) -> bool {
    match outcome {
        Ok(detail) => {
            println!("criterion {n:>2} PASS  {name}: {detail}");
            true
        }
        Err(reason) => {
            println!("criterion {n:>2} FAIL  {name}: {reason}");
            false
        }
    }
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut reports = Vec::new();
    let mut ok = true;

    ok &= report(1, "bound-state count and energies", &guarded(criterion_1));
    ok &= report(2, "eigenfunction fidelity", &guarded(criterion_2));
    ok &= report(3, "noise-free recovery", &guarded(|| criterion_3(&mut reports)));

    let video = catch_unwind(video_fits).unwrap_or_else(|_| Err("video fits panicked".into()));
    match &video {
        Ok(v) => {
            ok &= report(4, "noisy video reconstruction accuracy", &guarded(|| criterion_4(v)));
            ok &= report(5, "global-local classification", &guarded(|| criterion_5(v)));
            ok &= report(6, "sparsity sweep shape", &guarded(|| criterion_6(v, dir.path())));
        }
        Err(e) => {
            for (n, name) in [(4, "noisy video reconstruction accuracy"), (5, "global-local classification"), (6, "sparsity sweep shape")] {
                ok &= report(n, name, &Err(e.clone()));
            }
        }
    }
    ok &= report(7, "square-well fit", &guarded(|| criterion_7(&mut reports)));
    ok &= report(8, "SR3 and optimized DMD agree without regularization", &guarded(|| criterion_8(&mut reports)));
    ok &= report(9, "scalar prox optimality", &guarded(criterion_9));
    match &video {
        Ok(v) => ok &= report(10, "monotonicity and determinism", &guarded(|| criterion_10(v, &reports, dir.path()))),
        Err(e) => ok &= report(10, "monotonicity and determinism", &Err(e.clone())),
    }

    if !ok {
        std::process::exit(1);
    }
}
