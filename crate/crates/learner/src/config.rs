use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub filters: usize,
    pub kernel: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Normal with variance 2 / fan-in; biases zero.
    He,
    /// Every parameter zero.
    Zero,
}

/// Conv layers (each followed by ReLU and 2x2 max-pooling), then one
/// hidden ReLU layer and a 2-way softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_side: usize,
    pub convs: Vec<ConvSpec>,
    /// Zero-pad convolutions to keep the spatial size.
    pub same_padding: bool,
    pub hidden: usize,
    pub init: Init,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_side: 64,
            convs: vec![ConvSpec { filters: 8, kernel: 5 }, ConvSpec { filters: 16, kernel: 5 }],
            same_padding: false,
            hidden: 64,
            init: Init::He,
            seed: 0,
        }
    }
}

/// Channels, height and width of one feature map.
pub type Dims = (usize, usize, usize);

impl ModelConfig {
    /// Small model on 8x8 inputs, cheap enough to finite-difference every
    /// parameter.
    pub fn reduced() -> Self {
        ModelConfig {
            input_side: 8,
            convs: vec![ConvSpec { filters: 2, kernel: 3 }, ConvSpec { filters: 3, kernel: 3 }],
            same_padding: true,
            hidden: 4,
            init: Init::He,
            seed: 0,
        }
    }

    pub fn input_len(&self) -> usize {
        self.input_side * self.input_side
    }

    /// Input dims of every conv layer, then the dims of the final pooled map.
    pub fn feature_dims(&self) -> Result<Vec<Dims>> {
        if self.input_side == 0 || self.hidden == 0 {
            return Err(Error::Config("input side and hidden width must be positive".into()));
        }
        let mut dims = vec![(1, self.input_side, self.input_side)];
        for (i, c) in self.convs.iter().enumerate() {
            let (_, h, w) = *dims.last().unwrap();
            if c.filters == 0 || c.kernel == 0 || (self.same_padding && c.kernel % 2 == 0) {
                return Err(Error::Config(format!("conv {i}: {c:?} is not usable")));
            }
            let (oh, ow) = if self.same_padding {
                (h, w)
            } else if h >= c.kernel && w >= c.kernel {
                (h - c.kernel + 1, w - c.kernel + 1)
            } else {
                (0, 0)
            };
            if oh / 2 == 0 || ow / 2 == 0 {
                return Err(Error::Config(format!(
                    "conv {i} leaves no spatial extent from {h}x{w}"
                )));
            }
            dims.push((c.filters, oh / 2, ow / 2));
        }
        Ok(dims)
    }

    pub fn flat_len(&self) -> Result<usize> {
        let (c, h, w) = *self.feature_dims()?.last().unwrap();
        Ok(c * h * w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub enabled: bool,
    /// Uniform in `[-max, max]` degrees about the image centre.
    pub max_rotation_deg: f64,
    /// Uniform in `[-max, max]` as a fraction of width (height).
    pub max_shift_frac: f64,
    pub horizontal_shift: bool,
    pub hflip: bool,
    pub vflip: bool,
}

impl AugmentConfig {
    pub fn off() -> Self {
        AugmentConfig {
            enabled: false,
            ..AugmentConfig::full()
        }
    }

    /// Rotation up to 5 degrees, shifts up to 2%, random flips.
    pub fn full() -> Self {
        AugmentConfig {
            enabled: true,
            max_rotation_deg: 5.0,
            max_shift_frac: 0.02,
            horizontal_shift: true,
            hflip: true,
            vflip: true,
        }
    }

    /// Label-preserving default for a task. Mirror symmetry about the
    /// vertical mid-line survives flips and vertical shifts but not
    /// rotation or horizontal shifts, so those are off for the symmetry
    /// tasks unless `literal` asks for the full set anyway.
    pub fn for_task(task: gestalt_core::tasks::Task, literal: bool) -> Self {
        use gestalt_core::tasks::Task;
        if task == Task::GlobalSymmetry && !literal {
            AugmentConfig {
                max_rotation_deg: 0.0,
                horizontal_shift: false,
                ..AugmentConfig::full()
            }
        } else {
            AugmentConfig::full()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub augment: AugmentConfig,
    /// Drives shuffling and augmentation.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 70,
            batch_size: 40,
            learning_rate: 0.01,
            momentum: 0.9,
            augment: AugmentConfig::off(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, train_len: usize) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > train_len {
            return Err(Error::Config(format!(
                "batch size {} must be in 1..={train_len}",
                self.batch_size
            )));
        }
        if !(self.learning_rate > 0.0) || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("learning rate must be positive and momentum in [0, 1)".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_feature_dims() {
        let d = ModelConfig::default().feature_dims().unwrap();
        assert_eq!(d, vec![(1, 64, 64), (8, 30, 30), (16, 13, 13)]);
        assert_eq!(ModelConfig::default().flat_len().unwrap(), 2704);
        assert_eq!(ModelConfig::reduced().flat_len().unwrap(), 12);
    }

    #[test]
    fn too_small_input_is_rejected() {
        let c = ModelConfig {
            input_side: 8,
            ..ModelConfig::default()
        };
        assert!(c.feature_dims().is_err());
    }

    #[test]
    fn batch_larger_than_set_is_rejected() {
        assert!(TrainConfig::default().validate(39).is_err());
        assert!(TrainConfig::default().validate(40).is_ok());
    }
}
