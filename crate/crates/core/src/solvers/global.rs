use crate::linalg::max_abs;
use crate::model::CMatrix;
use crate::prox::GlobalLocalMask;

/// Mode `j` is global when more than `tau_global * n` of its entries exceed
/// `tau_active` times the largest magnitude in the whole matrix.
pub fn detect_global_modes(phi_b: &CMatrix, tau_active: f64, tau_global: f64) -> GlobalLocalMask {
    let (n, r) = phi_b.shape();
    let top = max_abs(phi_b);
    if top == 0.0 || !top.is_finite() {
        return GlobalLocalMask::all_local(r);
    }
    let cut = tau_active * top;
    let is_global = (0..r)
        .map(|j| {
            let active = phi_b.column(j).iter().filter(|z| z.norm() > cut).count();
            active as f64 > tau_global * n as f64
        })
        .collect();
    GlobalLocalMask { is_global }
}
