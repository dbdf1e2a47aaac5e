mod certify;
mod simulate;
mod structure;

pub use certify::{certify, EquilibriumCertificate, LevelCertificate, DEFAULT_GRID, DEFAULT_TOL};
pub use simulate::{
    simulate, tie_split_experiment, ProbeResult, SimulationOptions, SimulationReport,
    TieSplitResult,
};
pub use structure::{
    check_monotone_a, check_theorem1_properties, InvariantReport, MonotoneReport,
    MonotoneViolation, PropertyCheck, CHAINING, COMMON_LOWER_BOUND, CONTINUITY, DISJOINT,
    EQUAL_UTILITY, SINGLE_JUMP, THRESHOLD,
};

pub(crate) use certify::{check_profile_shape, left_masses};
