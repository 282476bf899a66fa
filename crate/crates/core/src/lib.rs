//! Fixed-energy inverse scattering for piecewise-constant radial potentials.
//!
//! * [`special_functions`]: Riccati-Bessel tables and zero-energy solutions.
//! * [`forward`]: transfer of solution coefficients across layers, phase shifts, noise.
//! * [`objective`]: configurations, the best-fit functional and potential distances.
//! * [`local_min`]: golden-section line search, Powell-type descent, layer reduction.
//! * [`global_min`]: iterated reduced random search with the stability-index stop.

pub mod error;
pub mod forward;
pub mod global_min;
pub mod local_min;
pub mod objective;
pub mod rng;
pub mod special_functions;

pub use error::{Error, Result};
pub use forward::{add_noise, phase_shifts, LayeredPotential, PhaseShiftSet};
pub use global_min::{irrs, IrrsParams, MinimizerRecord, StabilityReport, Verdict};
pub use objective::{config_to_potential, phi, potential_distance, AdmissibleBox, Configuration};
