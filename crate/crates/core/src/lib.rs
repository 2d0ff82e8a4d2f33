//! Linear-response toolkit for a driven optical cavity coupled to a
//! spin-orbit-coupled two-component condensate.
//!
//! The crate builds the 6×6 fluctuation drift matrix, certifies stability,
//! evaluates closed-form output power spectra over (k, ω) grids and turns those
//! spectra into a Chern-marker and Berry-curvature readout. Exceptional points
//! of the non-Hermitian spectrum can be located along momentum.
//!
//! ```
//! use soc_cavity::{derive, DriftMatrix, PhysicalParams};
//!
//! let params = PhysicalParams::default();
//! let derived = derive(&params);
//! let drift = DriftMatrix::build(&derived, &params, 0.0);
//! let report = drift.stability_report(1e-9).unwrap();
//! assert_eq!(report.rh_stable, report.eigen_stable);
//! ```

pub mod drift;
pub mod error;
pub mod io;
pub mod params;
pub mod spectra;
pub mod sweep;
pub mod topology;

pub use drift::{
    ep::{scan_exceptional_points, EpCandidate},
    CharPoly, DriftMatrix, DriftRates, NoiseSpec, StabilityReport,
};
pub use error::{Error, InvalidParam, Result};
pub use params::{coupling_from_power, derive, steady_state_field, DerivedParams, PhysicalParams};
pub use spectra::{Flag, SpectralMap, SpectralPoint};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/marker.md")]
    mod marker {}
    #[doc = include_str!("../../../book/src/exceptional.md")]
    mod exceptional {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
