//! Ground-truth data: the oscillating synthetic video and the square-well
//! waveguide superposition.

mod noise;
mod video;
mod well;

pub use noise::add_noise;
pub use video::{gen_synthetic_video, VideoSpec};
pub use well::{
    bound_state_eigenfunction, bound_state_profile, gen_square_well_dataset, scattering_state, solve_bound_states,
    trapezoid, well_grid, BoundProfile, BoundState, Parity, SpectrumSample, WellDataset, WellSpec,
};
