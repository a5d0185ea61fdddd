//! Exact and numeric machinery for hyperbolic lattice-point counting over
//! the modular group: binary quadratic forms and their class groups,
//! Heegner points, theta-series coefficients, spectral transforms of
//! radial kernels, and the combinatorial toolkit of the moment method.

pub mod arith;
pub mod count;
pub mod heegner;
pub mod kernel;
pub mod momentkit;
pub mod qforms;
pub mod theta;
pub mod verify;

pub use count::{count_general, count_heegner_exact, CountReport};
pub use heegner::{heegner_points, u, HeegnerPoint, PlanePoint};
pub use qforms::{ClassCharacter, ClassGroup, QuadForm};
