use ndarray::Zip;

use super::mlp::{Dense, MlpParams};
use super::{FlowError, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moment accumulators, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: MlpParams,
    pub second_moment: MlpParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(like: &MlpParams) -> Self {
        let zeros = MlpParams {
            layers: like
                .layers
                .iter()
                .map(|l| Dense { weight: l.weight.mapv(|_| 0.0), bias: l.bias.mapv(|_| 0.0) })
                .collect(),
        };
        Self { first_moment: zeros.clone(), second_moment: zeros, step: 0 }
    }
}

fn same_shape(a: &MlpParams, b: &MlpParams) -> bool {
    a.layers.len() == b.layers.len()
        && a.layers.iter().zip(&b.layers).all(|(x, y)| x.weight.dim() == y.weight.dim() && x.bias.len() == y.bias.len())
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut MlpParams, grads: &MlpParams, state: &mut AdamState, lr: f64) -> Result<()> {
    if !same_shape(params, grads) || !same_shape(params, &state.first_moment) {
        return Err(FlowError::Shape("parameter, gradient and optimizer shapes disagree".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    let update = |p: &mut f64, &g: &f64, m: &mut f64, v: &mut f64| {
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
    };
    for (((p, g), m), v) in params
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(state.first_moment.layers.iter_mut())
        .zip(state.second_moment.layers.iter_mut())
    {
        Zip::from(&mut p.weight).and(&g.weight).and(&mut m.weight).and(&mut v.weight).for_each(update);
        Zip::from(&mut p.bias).and(&g.bias).and(&mut m.bias).and(&mut v.bias).for_each(update);
    }
    Ok(())
}
