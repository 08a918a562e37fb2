//! The progressive vectorization engine: segmentation-guided initialization,
//! the segmentation-guided and Xing losses, Adam optimization, and the epoch
//! loop.

mod init;
mod loss;
mod optim;
mod pipeline;
mod schedule;

pub use init::{color_bin_components, init_path, select_regions, select_top_regions, SeedRegions};
pub use loss::{
    focused_set, sg_loss, sg_weight, total_loss, udf_weight, xing_loss, LossConfig, LossReport,
};
pub use optim::{AdamConfig, AdamOptimizer};
pub use pipeline::{EpochReport, IterationLog, Pipeline, PipelineConfig};
pub use schedule::{expand_clamp_schedule, schedule_clamp, EpochSchedule};
