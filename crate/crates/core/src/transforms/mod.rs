//! Structural transformations between actions and the end-to-end constructions.

mod bump_up;
mod cut_down;
mod extend;
mod pipeline;
mod regroup;
mod report;

pub use bump_up::{bump_up, BumpUp, BumpUpLevel, BumpUpPlan, MAX_TARGET_BLOCK};
pub(crate) use cut_down::cut_down_factor;
pub use cut_down::{cut_down, CutDown};
pub use regroup::{regroup, Regrouping};
pub use extend::{extend_finite_index, Extension};
pub use report::{write_reports_csv, ElementTowerReport, StageTower, TowerRoute};
pub use pipeline::{
    construct_strongly_outer, rokhlin_action_universal, ComponentKind, ConstructOptions, ConstructedElement, Construction,
    UniversalComponent, UniversalOptions, UniversalRokhlin,
};
