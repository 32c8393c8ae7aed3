//! Work distributions, characteristic functions and fluctuation checks.

pub mod characteristic;
pub mod distribution;
pub mod fluctuation;
pub mod inversion;
pub mod moments;

pub use characteristic::{
    characteristic_function_tmp, default_merge_tol, g_lambda, quasi_distribution, quasi_support,
    tmp_distribution, tmp_support, transition_data, two_time_correlation,
    CharacteristicFunctionSamples, TransitionData, QUASI_IMAG_TOL,
};
pub use distribution::{merge_tol_for, Atom, DistributionKind, WorkDistribution};
pub use fluctuation::{
    crooks_check, crooks_check_sampled, delta_f, jarzynski_check, CrooksPoint, CrooksReport,
    JarzynskiReport,
};
pub use inversion::{
    invert_characteristic, lambda_grid, suggest_lambda_grid, windowed_density, InversionResult,
    Window,
};
pub use moments::{moment_identities_check, work_moments, MomentReport};
