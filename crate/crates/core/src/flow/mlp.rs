//! Rectifier MLP velocity field `v(x, t)` with exact backpropagation.
//!
//! The time is appended to the state as one extra input column, so the
//! first layer has `D + 1` inputs. Weights are stored `(out, in)`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{FlowError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetArchitecture {
    /// `D + 1`: state plus time.
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    /// `D`.
    pub output_dim: usize,
}

impl NetArchitecture {
    /// Architecture for a `data_dim`-dimensional state.
    pub fn for_data_dim(data_dim: usize, hidden_dims: Vec<usize>) -> Self {
        Self { input_dim: data_dim + 1, hidden_dims, output_dim: data_dim }
    }

    /// Three weight layers of width 256 around a `data_dim` state.
    pub fn default_for(data_dim: usize) -> Self {
        Self::for_data_dim(data_dim, vec![256, 256])
    }

    pub fn data_dim(&self) -> usize {
        self.output_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_dim == 0 || self.output_dim % 2 != 0 {
            return Err(FlowError::Architecture(format!("state dimension {} must be even and positive", self.output_dim)));
        }
        if self.input_dim != self.output_dim + 1 {
            return Err(FlowError::Architecture(format!(
                "input dimension {} must be state dimension {} plus one",
                self.input_dim, self.output_dim
            )));
        }
        if self.hidden_dims.iter().any(|&h| h == 0) {
            return Err(FlowError::Architecture("hidden widths must be positive".into()));
        }
        Ok(())
    }

    /// `(fan_out, fan_in)` for each weight layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.input_dim];
        dims.extend(&self.hidden_dims);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[1], w[0])).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(o, i)| o * i + o).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Parameters θ, one dense layer per weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Dense>,
}

impl MlpParams {
    pub fn zeros(arch: &NetArchitecture) -> Self {
        let layers = arch
            .layer_shapes()
            .into_iter()
            .map(|(o, i)| Dense { weight: Array2::zeros((o, i)), bias: Array1::zeros(o) })
            .collect();
        Self { layers }
    }

    /// He initialisation: `N(0, 2/fan_in)` weights, zero biases.
    pub fn init<R: Rng + ?Sized>(arch: &NetArchitecture, rng: &mut R) -> Self {
        let layers = arch
            .layer_shapes()
            .into_iter()
            .map(|(o, i)| {
                let std = (2.0 / i as f64).sqrt();
                let weight = Array2::from_shape_simple_fn((o, i), || std * rng.sample::<f64, _>(StandardNormal));
                Dense { weight, bias: Array1::zeros(o) }
            })
            .collect();
        Self { layers }
    }

    pub fn architecture(&self) -> NetArchitecture {
        let input_dim = self.layers.first().map_or(0, |l| l.weight.ncols());
        let output_dim = self.layers.last().map_or(0, |l| l.weight.nrows());
        let hidden_dims = self.layers[..self.layers.len().saturating_sub(1)].iter().map(|l| l.weight.nrows()).collect();
        NetArchitecture { input_dim, hidden_dims, output_dim }
    }

    pub fn matches(&self, arch: &NetArchitecture) -> bool {
        let shapes = arch.layer_shapes();
        shapes.len() == self.layers.len()
            && shapes
                .iter()
                .zip(&self.layers)
                .all(|(&(o, i), l)| l.weight.dim() == (o, i) && l.bias.len() == o)
    }

    /// Flattened parameters in layer order: each layer's weights row-major, then its bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn from_flat(arch: &NetArchitecture, flat: &[f64]) -> Result<Self> {
        if flat.len() != arch.parameter_count() {
            return Err(FlowError::Shape(format!("expected {} parameters, got {}", arch.parameter_count(), flat.len())));
        }
        let mut offset = 0;
        let mut layers = Vec::new();
        for (o, i) in arch.layer_shapes() {
            let weight = Array2::from_shape_vec((o, i), flat[offset..offset + o * i].to_vec()).expect("sized");
            offset += o * i;
            let bias = Array1::from(flat[offset..offset + o].to_vec());
            offset += o;
            layers.push(Dense { weight, bias });
        }
        Ok(Self { layers })
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    fn check_input(&self, d: usize) -> Result<()> {
        let want = self.layers.first().map_or(0, |l| l.weight.ncols());
        if d + 1 != want {
            return Err(FlowError::Shape(format!("state dimension {d} does not match network input {want}")));
        }
        Ok(())
    }

    /// Output of one sample.
    pub fn forward(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let xs = ArrayView2::from_shape((1, x.len()), x).expect("row view");
        Ok(self.forward_batch(xs, ArrayView1::from(&[t][..]))?.into_raw_vec_and_offset().0)
    }

    /// Rows of `xs` are states; `ts` holds one time per row.
    pub fn forward_batch(&self, xs: ArrayView2<f64>, ts: ArrayView1<f64>) -> Result<Array2<f64>> {
        self.check_input(xs.ncols())?;
        if xs.nrows() != ts.len() {
            return Err(FlowError::Shape(format!("{} states but {} times", xs.nrows(), ts.len())));
        }
        let mut a = augment(xs, ts);
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weight.t());
            z += &layer.bias;
            if k < last {
                z.mapv_inplace(relu);
            }
            a = z;
        }
        Ok(a)
    }

    /// Same as [`forward_batch`](Self::forward_batch) with one shared time.
    pub fn forward_batch_at(&self, xs: ArrayView2<f64>, t: f64) -> Result<Array2<f64>> {
        let ts = Array1::from_elem(xs.nrows(), t);
        self.forward_batch(xs, ts.view())
    }
}

fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// `[x | t]`.
fn augment(xs: ArrayView2<f64>, ts: ArrayView1<f64>) -> Array2<f64> {
    let (b, d) = xs.dim();
    let mut a = Array2::zeros((b, d + 1));
    a.slice_mut(s![.., ..d]).assign(&xs);
    a.column_mut(d).assign(&ts);
    a
}

/// One minibatch of `(x₀, x₁, t)` triples, one row per sample.
#[derive(Debug, Clone)]
pub struct FlowBatch {
    pub x0: Array2<f64>,
    pub x1: Array2<f64>,
    pub t: Array1<f64>,
}

impl FlowBatch {
    pub fn new(x0: Array2<f64>, x1: Array2<f64>, t: Array1<f64>) -> Result<Self> {
        if x0.dim() != x1.dim() || x0.nrows() != t.len() {
            return Err(FlowError::Shape("batch components disagree in shape".into()));
        }
        if x0.nrows() == 0 {
            return Err(FlowError::EmptyBatch);
        }
        Ok(Self { x0, x1, t })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `x_t = (1 − t)·x₀ + t·x₁` row-wise.
    pub fn interpolated(&self) -> Array2<f64> {
        let mut xt = self.x0.clone();
        Zip::from(xt.rows_mut()).and(self.x1.rows()).and(&self.t).for_each(|mut row, x1, &t| {
            Zip::from(&mut row).and(&x1).for_each(|a, &b| *a = (1.0 - t) * *a + t * b);
        });
        xt
    }

    /// Regression target `x₁ − x₀`.
    pub fn target(&self) -> Array2<f64> {
        &self.x1 - &self.x0
    }
}

/// `x_t = (1 − t)·x₀ + t·x₁`.
pub fn interpolate(x0: &[f64], x1: &[f64], t: f64) -> Result<Vec<f64>> {
    if x0.len() != x1.len() {
        return Err(FlowError::Shape(format!("interpolation endpoints have lengths {} and {}", x0.len(), x1.len())));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(FlowError::Shape(format!("interpolation time {t} outside [0, 1]")));
    }
    Ok(x0.iter().zip(x1).map(|(&a, &b)| (1.0 - t) * a + t * b).collect())
}

/// Mean over the batch of `‖v(x_t, t) − (x₁ − x₀)‖²`.
pub fn rfm_loss(params: &MlpParams, batch: &FlowBatch) -> Result<f64> {
    if batch.is_empty() {
        return Err(FlowError::EmptyBatch);
    }
    let pred = params.forward_batch(batch.interpolated().view(), batch.t.view())?;
    let diff = pred - batch.target();
    Ok(diff.iter().map(|v| v * v).sum::<f64>() / batch.len() as f64)
}

/// Exact gradient of [`rfm_loss`] by backpropagation; returns `(loss, gradient)`.
/// The rectifier derivative at zero is taken as zero.
pub fn gradients(params: &MlpParams, batch: &FlowBatch) -> Result<(f64, MlpParams)> {
    if batch.is_empty() {
        return Err(FlowError::EmptyBatch);
    }
    let xt = batch.interpolated();
    params.check_input(xt.ncols())?;
    let b = batch.len() as f64;

    // forward pass keeping every layer input and pre-activation
    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut pre = Vec::with_capacity(params.layers.len());
    let mut a = augment(xt.view(), batch.t.view());
    let last = params.layers.len() - 1;
    for (k, layer) in params.layers.iter().enumerate() {
        let mut z = a.dot(&layer.weight.t());
        z += &layer.bias;
        inputs.push(a);
        a = if k < last { z.mapv(relu) } else { z.clone() };
        pre.push(z);
    }

    let diff = a - batch.target();
    let loss = diff.iter().map(|v| v * v).sum::<f64>() / b;

    let mut delta = diff * (2.0 / b);
    let mut grads: Vec<Dense> = Vec::with_capacity(params.layers.len());
    for k in (0..params.layers.len()).rev() {
        let weight = delta.t().dot(&inputs[k]);
        let bias = delta.sum_axis(Axis(0));
        if k > 0 {
            let mut back = delta.dot(&params.layers[k].weight);
            Zip::from(&mut back).and(&pre[k - 1]).for_each(|g, &z| {
                if z <= 0.0 {
                    *g = 0.0;
                }
            });
            delta = back;
        }
        grads.push(Dense { weight, bias });
    }
    grads.reverse();
    Ok((loss, MlpParams { layers: grads }))
}
