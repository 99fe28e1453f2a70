//! Homological neural network unit: Hasse-wired sparse layers with a
//! residual linear readout, hand-written backward pass and training loop.

mod checkpoint;
mod gradcheck;
mod model;
mod topology;
mod train;

pub use checkpoint::{Checkpoint, TargetScale, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use gradcheck::{finite_diff_grad, max_relative_error, min_kink_distance, Loss};
pub use model::{
    init_model, param_count, residual_readout_count, Activation, ForwardCache, Gradients, HnnModel, ParameterBreakdown,
};
pub(crate) use model::mse;
pub use topology::{Architecture, ReadoutScope, Topology};
pub use train::{train, EpochRecord, History, InitScheme, Optimizer, OptimizerKind, Samples, TrainConfig};
