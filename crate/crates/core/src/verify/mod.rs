//! Numerical checks of the weighted, commutator and weak-type inequalities,
//! and dictionary lower bounds for operator norms.
//!
//! Every check returns a [`VerificationReport`](crate::VerificationReport)
//! whose verdict is `lhs ≤ slack·rhs` with the slack recorded in the report.

mod commutator;
mod dictionary;
mod operator;
mod sparse_bounds;

pub use commutator::{
    ainfty_grid, check_ainfty_stability, check_commutator_bound, check_exp_ap, check_john_nirenberg, check_prodweight, exp_ap_grid,
    prodweight_cap, symmetric_grid, GRID_POINTS,
};
pub use dictionary::{norm_lower_estimate, NormEstimate, NormProblem, TestDictionary};
pub use operator::{check_cz_decomposition, check_pointwise_domination, check_weak_type};
pub use sparse_bounds::{
    check_dyadic_sum, check_maximal_reduction, check_p0_reduction, check_regime, check_sparse_kolmogorov, check_testing_lemma,
    check_theorem, mixed_bound_rhs, MixedBound,
};
