//! Spectral stability of periodic wave trains of the KdV-KS equation
//!
//!   u_t + u u_x + u_xxx + delta (u_xx + u_xxxx) = 0,  0 < delta << 1,
//!
//! in the KdV limit delta -> 0.
//!
//! The library provides the elliptic-function machinery for the cnoidal
//! waves of KdV, the wave-selection principle picking the one-parameter
//! family that persists for delta > 0, the O(delta) profile correctors, the
//! characteristic velocities of the associated Whitham modulation systems
//! with the subcharacteristic conditions (S1)-(S3), the O(delta) spectral
//! corrector lambda_1 over the full Bloch spectrum together with the
//! stability index Ind(X) and the stability band in the period X, and two
//! independent spectral oracles (a periodic Evans function via the monodromy
//! of the linearized KdV system, and a Fourier-Galerkin Hill eigensolver for
//! the full fourth-order operator at delta > 0).

pub mod cnoidal;
pub mod elliptic;
pub mod error;
pub mod evans;
pub mod grid;
pub mod linalg;
pub mod perturbed;
pub mod quad;
pub mod selection;
pub mod series;
pub mod spectral;
pub mod whitham;

pub use error::{Error, Result};
