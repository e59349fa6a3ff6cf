//! Small optimization programs: detection-rate and guessing SDPs, the
//! two-state gain schedule, and retarget searches.

pub mod disturbance;
pub mod guessing;
pub mod inconclusive;
pub mod lmi;
pub mod scalar;
pub mod schedule;

pub use disturbance::{minimize_disturbance_numeric, DisturbanceOptimum, RetargetFamily};
pub use guessing::{min_error_guessing, GuessingSolution};
pub use inconclusive::{min_inconclusive_rate, WeightSolution};
pub use schedule::{optimal_joint_schedule, two_state_least_disturbing, GainSchedule, LeastDisturbing};
