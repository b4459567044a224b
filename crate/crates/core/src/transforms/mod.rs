//! k-plane geometry, phantoms, backprojection and inversion sweeps.

mod backproject;
mod geometry;
mod nievergelt;
mod phantom;
mod sweep;

pub use backproject::{backproject_mc, backproject_reduced, convolve_oracle, McEstimate, OracleValue};
pub use geometry::{haar_frame, haar_frame_from_rng, point_flat_distance, FlatParam, Frame};
pub use nievergelt::nievergelt_ga;
pub use phantom::{kplane_numeric, phantom_hat, Phantom, PhantomKind};
pub use sweep::{invert_sweep, Engine, Schedule, SweepResult};
