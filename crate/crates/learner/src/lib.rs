//! A small convolutional classifier trained from scratch: two conv/pool
//! stages, one hidden layer and a 2-way softmax, with hand-written
//! backpropagation over `f64` and GEMM-based convolutions.
//!
//! Everything runs on one thread and is bit-reproducible from the model
//! and training seeds.

pub mod augment;
pub mod checkpoint;
pub mod config;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod model;
pub mod ops;
pub mod train;

pub use config::{AugmentConfig, ConvSpec, Init, ModelConfig, TrainConfig};
pub use data::{downsample, Dataset};
pub use error::{Error, Result};
pub use gradcheck::{gradient_check, GradCheck};
pub use model::{classify, Model};
pub use train::{assess, evaluate, predict, train, EpochStats, History, Trained};
