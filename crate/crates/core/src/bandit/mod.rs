//! Presentation policies and regret measures.

pub mod dts;
pub mod policy;
pub mod regret;

pub use dts::DtsState;
pub use policy::{Policy, PolicyKind, PolicyOptions, Presented};
pub use regret::{count_unique_presentations, regret_top_n, weak_dueling_regret, RegretTrace};
