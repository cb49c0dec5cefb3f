use gestalt_core::{Label, SeededRng};
use rand_distr::{Distribution, Normal};

use crate::config::{Dims, Init, ModelConfig};
use crate::error::{Error, Result};
use crate::ops::{col2im, cross_entropy, gemm, im2col, max_pool, max_unpool, softmax};

/// Class with the larger probability; an exact tie goes to class 0.
pub fn classify(p: [f64; 2]) -> Label {
    if p[1] > p[0] {
        Label::Violated
    } else {
        Label::Holds
    }
}

/// Parameter arrays in layer order: for each conv `W (f x c*k*k)`, `b (f)`;
/// then hidden `W (hidden x flat)`, `b`; then output `W (2 x hidden)`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    params: Vec<Vec<f64>>,
    dims: Vec<Dims>,
}

pub type Gradients = Vec<Vec<f64>>;

struct ConvTrace {
    col: Vec<f64>,
    z: Vec<f64>,
    arg: Vec<u32>,
    out: Dims,
}

struct Trace {
    convs: Vec<ConvTrace>,
    flat: Vec<f64>,
    hidden: Vec<f64>,
    logits: Vec<f64>,
}

fn param_shapes(config: &ModelConfig, dims: &[Dims]) -> Vec<(usize, usize)> {
    let mut shapes = Vec::new();
    for (c, &(ch, _, _)) in config.convs.iter().zip(dims) {
        shapes.push((c.filters, ch * c.kernel * c.kernel));
        shapes.push((c.filters, 1));
    }
    let (c, h, w) = *dims.last().unwrap();
    shapes.push((config.hidden, c * h * w));
    shapes.push((config.hidden, 1));
    shapes.push((2, config.hidden));
    shapes.push((2, 1));
    shapes
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Model> {
        let dims = config.feature_dims()?;
        let mut rng = SeededRng::new(config.seed);
        let params = param_shapes(&config, &dims)
            .into_iter()
            .enumerate()
            .map(|(i, (rows, cols))| {
                let is_bias = i % 2 == 1;
                match config.init {
                    Init::He if !is_bias => {
                        let n = Normal::new(0.0, (2.0 / cols as f64).sqrt()).expect("finite std");
                        (0..rows * cols).map(|_| n.sample(&mut rng)).collect()
                    }
                    _ => vec![0.0; rows * cols],
                }
            })
            .collect();
        Ok(Model { config, params, dims })
    }

    pub fn from_params(config: ModelConfig, params: Vec<Vec<f64>>) -> Result<Model> {
        let dims = config.feature_dims()?;
        let shapes = param_shapes(&config, &dims);
        if shapes.len() != params.len() || shapes.iter().zip(&params).any(|((r, c), p)| r * c != p.len()) {
            return Err(Error::Checkpoint("parameter arrays do not fit the configuration".into()));
        }
        Ok(Model { config, params, dims })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Vec::len).sum()
    }

    pub fn zero_grads(&self) -> Gradients {
        self.params.iter().map(|p| vec![0.0; p.len()]).collect()
    }

    fn pad(&self, k: usize) -> usize {
        if self.config.same_padding {
            k / 2
        } else {
            0
        }
    }

    fn forward(&self, x: &[f64]) -> Result<Trace> {
        if x.len() != self.config.input_len() {
            return Err(Error::Shape {
                expected: self.config.input_len(),
                found: x.len(),
            });
        }
        let mut cur = x.to_vec();
        let mut convs = Vec::with_capacity(self.config.convs.len());
        for (i, spec) in self.config.convs.iter().enumerate() {
            let (w, b) = (&self.params[2 * i], &self.params[2 * i + 1]);
            let (col, oh, ow) = im2col(&cur, self.dims[i], spec.kernel, self.pad(spec.kernel));
            let (f, kk, p) = (spec.filters, w.len() / spec.filters, oh * ow);
            let mut z = vec![0.0; f * p];
            for (row, &bias) in z.chunks_mut(p).zip(b) {
                row.fill(bias);
            }
            gemm(f, kk, p, w, false, &col, false, 1.0, &mut z);
            let a: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
            let (pooled, arg) = max_pool(&a, (f, oh, ow));
            convs.push(ConvTrace {
                col,
                z,
                arg,
                out: (f, oh, ow),
            });
            cur = pooled;
        }
        let l = 2 * self.config.convs.len();
        let hsize = self.config.hidden;
        let mut hidden = self.params[l + 1].clone();
        gemm(hsize, cur.len(), 1, &self.params[l], false, &cur, false, 1.0, &mut hidden);
        hidden.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut logits = self.params[l + 3].clone();
        gemm(2, hsize, 1, &self.params[l + 2], false, &hidden, false, 1.0, &mut logits);
        Ok(Trace {
            convs,
            flat: cur,
            hidden,
            logits,
        })
    }

    /// Accumulate `scale * d loss / d params` for one sample into `grads`.
    fn backward(&self, t: &Trace, target: usize, scale: f64, grads: &mut Gradients) {
        let l = 2 * self.config.convs.len();
        let hsize = self.config.hidden;
        let mut dz = softmax(&t.logits);
        dz[target] -= 1.0;
        dz.iter_mut().for_each(|v| *v *= scale);

        // Output layer.
        gemm(2, 1, hsize, &dz, false, &t.hidden, false, 1.0, &mut grads[l + 2]);
        grads[l + 3].iter_mut().zip(&dz).for_each(|(g, d)| *g += d);
        let mut dh = vec![0.0; hsize];
        gemm(hsize, 2, 1, &self.params[l + 2], true, &dz, false, 0.0, &mut dh);
        for (d, &h) in dh.iter_mut().zip(&t.hidden) {
            if h <= 0.0 {
                *d = 0.0;
            }
        }

        // Hidden layer.
        let flat = t.flat.len();
        gemm(hsize, 1, flat, &dh, false, &t.flat, false, 1.0, &mut grads[l]);
        grads[l + 1].iter_mut().zip(&dh).for_each(|(g, d)| *g += d);
        let mut dcur = vec![0.0; flat];
        gemm(flat, hsize, 1, &self.params[l], true, &dh, false, 0.0, &mut dcur);

        for (i, spec) in self.config.convs.iter().enumerate().rev() {
            let ct = &t.convs[i];
            let (f, oh, ow) = ct.out;
            let p = oh * ow;
            let mut dzc = max_unpool(&dcur, &ct.arg, f * p);
            for (d, &z) in dzc.iter_mut().zip(&ct.z) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
            let kk = self.params[2 * i].len() / f;
            gemm(f, p, kk, &dzc, false, &ct.col, true, 1.0, &mut grads[2 * i]);
            for (g, row) in grads[2 * i + 1].iter_mut().zip(dzc.chunks(p)) {
                *g += row.iter().sum::<f64>();
            }
            if i > 0 {
                let mut dcol = vec![0.0; kk * p];
                gemm(kk, f, p, &self.params[2 * i], true, &dzc, false, 0.0, &mut dcol);
                dcur = col2im(&dcol, self.dims[i], spec.kernel, self.pad(spec.kernel));
            }
        }
    }

    /// Which side of every non-differentiable point the batch sits on: ReLU
    /// signs and max-pool winners. Equal patterns at `θ ± ε` mean the loss
    /// is smooth between them.
    pub fn kink_pattern(&self, xs: &[&[f64]]) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        for x in xs {
            let t = self.forward(x)?;
            for c in &t.convs {
                out.extend(c.z.iter().map(|v| (*v > 0.0) as u32));
                out.extend_from_slice(&c.arg);
            }
            out.extend(t.hidden.iter().map(|v| (*v > 0.0) as u32));
        }
        Ok(out)
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.logits)
    }

    pub fn probabilities(&self, x: &[f64]) -> Result<[f64; 2]> {
        let p = softmax(&self.logits(x)?);
        Ok([p[0], p[1]])
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(classify(self.probabilities(x)?))
    }

    /// Mean cross-entropy over the batch.
    pub fn loss(&self, xs: &[&[f64]], ys: &[Label]) -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            total += cross_entropy(&self.logits(x)?, y.id() as usize);
        }
        Ok(total / xs.len() as f64)
    }

    /// Mean loss, its gradient, and the number of samples classified
    /// correctly (before any update).
    pub fn loss_and_grad(&self, xs: &[&[f64]], ys: &[Label]) -> Result<(f64, Gradients, usize)> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::Config(format!("{} inputs for {} labels", xs.len(), ys.len())));
        }
        let mut grads = self.zero_grads();
        let scale = 1.0 / xs.len() as f64;
        let (mut total, mut correct) = (0.0, 0);
        for (x, y) in xs.iter().zip(ys) {
            let t = self.forward(x)?;
            let target = y.id() as usize;
            total += cross_entropy(&t.logits, target);
            let p = softmax(&t.logits);
            correct += (classify([p[0], p[1]]) == *y) as usize;
            self.backward(&t, target, scale, &mut grads);
        }
        Ok((total * scale, grads, correct))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(seed: u64, n: usize) -> Vec<f64> {
        let mut r = SeededRng::new(seed);
        (0..n).map(|_| r.float_in(0.0, 1.0)).collect()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = Model::new(ModelConfig::default()).unwrap();
        for s in 0..3 {
            let p = m.probabilities(&input(s, 64 * 64)).unwrap();
            assert!((p[0] + p[1] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = Model::new(ModelConfig {
            init: Init::Zero,
            ..ModelConfig::default()
        })
        .unwrap();
        assert_eq!(m.probabilities(&input(1, 64 * 64)).unwrap(), [0.5, 0.5]);
        assert_eq!(m.predict(&input(1, 64 * 64)).unwrap(), Label::Holds);
    }

    #[test]
    fn wrong_input_size_is_a_shape_error() {
        let m = Model::new(ModelConfig::reduced()).unwrap();
        assert!(matches!(m.logits(&[0.0; 10]), Err(Error::Shape { expected: 64, found: 10 })));
    }

    #[test]
    fn argmax_and_tie_break() {
        assert_eq!(classify([0.9, 0.1]), Label::Holds);
        assert_eq!(classify([0.2, 0.8]), Label::Violated);
        assert_eq!(classify([0.5, 0.5]), Label::Holds);
    }

    #[test]
    fn duplicated_sample_gives_single_sample_gradient() {
        let m = Model::new(ModelConfig::reduced()).unwrap();
        let x = input(4, 64);
        let (_, g1, _) = m.loss_and_grad(&[&x], &[Label::Violated]).unwrap();
        let (_, g2, _) = m.loss_and_grad(&[&x, &x], &[Label::Violated, Label::Violated]).unwrap();
        for (a, b) in g1.iter().flatten().zip(g2.iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn confident_correct_output_has_zero_gradient() {
        // Push the output bias so softmax saturates at exactly [1, 0].
        let mut m = Model::new(ModelConfig::reduced()).unwrap();
        let n = m.params().len();
        m.params_mut()[n - 1] = vec![1000.0, -1000.0];
        let (loss, g, _) = m.loss_and_grad(&[&input(2, 64)], &[Label::Holds]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.iter().flatten().all(|v| *v == 0.0));
    }
}
