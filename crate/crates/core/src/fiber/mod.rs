//! Fibre spans: presets, group delay and split-step propagation.

mod loss_table;
mod spec;
mod ssfm;
mod step;

pub use loss_table::{LossTable, LossTableKind};
pub use spec::{
    beta2_from_dispersion, group_delay, latency_us_per_km, make_preset, FiberKind, FiberSpec,
};
pub use ssfm::{propagate, propagate_logged, StepRecord};
pub use step::{FixedStep, NonlinearPhaseStep, StepControl, StepMode, StepPolicy, MANAKOV_FACTOR};
