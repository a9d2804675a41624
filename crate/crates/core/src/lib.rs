//! Space-frequency localized frames built from the spectrum of a Laplace-type
//! operator on the circle, the 2-sphere and a windowed real line.
//!
//! Functions are eigen-coefficient vectors over a [`SpectralModel`]; frames,
//! cubature rules and Besov norms are all computed in that representation.

pub mod besov;
pub mod circle;
pub mod cubature;
pub mod error;
pub mod filters;
pub mod frame;
pub mod kernel;
pub mod lattice;
pub mod line;
pub mod linalg;
pub mod numeric;
pub mod spectral;
pub mod sphere;

pub use besov::{besov_norm, equivalence_report, BesovContext, BesovMode, BesovParams, EquivalenceReport};
pub use circle::{circle_model, CircleConfig};
pub use cubature::{calibrate, discrete_fourier_coeffs, solve_weights, Calibration, CubatureRule};
pub use error::{Error, Result};
pub use filters::{make_filter_bank, partition_residual, FilterBank};
pub use frame::{
    build_almost_parseval, build_parseval, build_pw_sampling_frame, dual_frame, frame_bounds, product_bandwidth,
    Atom, Frame, FrameKind, Functional, SamplingParams,
};
pub use kernel::{kernel_decay_profile, kernel_eval, kernel_lp_norm, littlewood_paley_residual, KernelProfile};
pub use lattice::{build_cells, build_lattice, CellCover, Lattice};
pub use line::{
    line_model, pw1d_frame_cubature, pw1d_frame_irregular, pw1d_frame_shannon, LineConfig, Pw1dFrame, Pw1dReport,
    SamplingSet1D, PW1D,
};
pub use num_complex::Complex64;
pub use spectral::{
    analyze, apply_multiplier, riesz_boas_residual, synthesize, GridFn, ManifoldKind, Mode, ModelConfig, Point,
    SpectralFn, SpectralModel,
};
pub use sphere::{eval_sph_harm, sphere_model, SphereConfig};
