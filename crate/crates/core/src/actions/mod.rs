//! Product type actions on UHF algebras, represented by lazily generated factor images.

mod action;
mod constructors;
mod images;

pub use action::{evaluate, stage_diagonal, FlowSlot, ProductAction, StageUnitary};
pub(crate) use action::Source;
pub use constructors::{
    abelian_action, abelian_slots, diagonal_flow, explicit_action, flow_action, identity_action,
    identity_gap_blocks, induced_action, interleave_identity, map_embed_action, pullback, regroup_action, regular_action,
    regular_action_spec, slot_action, tensor_actions, tensor_power,
};
pub(crate) use constructors::levels_action;
pub use images::{table_images, ElementMap, FactorImages};
