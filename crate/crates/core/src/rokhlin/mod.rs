//! Rokhlin towers: construction, defect measurement and per-stage certificates.

mod cyclic;
mod schedule;
mod tower;

pub use cyclic::{arc_shift, arc_tower, best_cyclic_tower, class_shift, census_trace_defect, class_census, convolve_census};
pub use schedule::{certify_schedule, CertifyOptions, EpsilonRule, StageCertificate, TowerMethod, TowerSchedule};
pub use tower::{group_tower, tensor_tower, tower_defects, RokhlinTower, TowerDefects, TowerMode};
