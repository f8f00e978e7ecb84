//! Named lower-bound families and the 3DM-3 reduction.

mod families;
mod threedm;

pub use families::{generate, Family, FamilySpec, DEFAULT_EPSILON};
pub use threedm::{
    matching_profile, normalize, reduce_3dm, solve_3dm_bruteforce, Normalized, OccurrenceMode,
    ThreeDMInstance, BRUTEFORCE_LIMIT,
};
