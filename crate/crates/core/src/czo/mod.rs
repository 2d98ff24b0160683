//! Bilinear Calderón–Zygmund operators on the grid: moduli, kernels,
//! truncations, commutators and the Calderón–Zygmund decomposition.

mod checks;
mod decomposition;
mod engine;
mod kernel;
mod modulus;

pub use checks::{
    check_truncation_oscillation, cotlar_check, cotlar_profile, geometric_grid, lambda_grid, weak_halfinfty_functional,
    weak_halfinfty_sup, LAMBDA_POINTS,
};
pub use decomposition::{cz_decomposition, BadPart, CZDecomposition};
pub(crate) use engine::{localized_from_bins, maximal_from_bins};
pub use engine::{
    admissible_top, apply, cell_diameter_index, commutator, full_commutator, grid_radius, localized_maximal_truncation,
    maximal_truncation, truncated_apply, Bins,
};
pub use kernel::{Kernel, KernelKind};
pub use modulus::{dini_norm, log_dini_norm, ModulusKind, ModulusOfContinuity};
