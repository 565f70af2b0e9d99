use ndarray::Zip;

use super::{Gradients, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam moment estimates for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Gradients,
    pub second_moment: Gradients,
}

impl Adam {
    pub fn new(net: &Mlp) -> Self {
        Self::with_config(net, AdamConfig::default())
    }

    pub fn with_config(net: &Mlp, config: AdamConfig) -> Self {
        Adam {
            config,
            step: 0,
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
        }
    }

    /// One bias-corrected Adam step in the descent direction of `grads`.
    ///
    /// A non-finite gradient aborts the step before anything is modified.
    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients, lr: f64) -> Result<()> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {lr}")));
        }
        if !grads.matches(net) || !self.first_moment.matches(net) {
            return Err(Error::Architecture(format!(
                "gradients do not mirror network {:?}",
                net.layer_sizes()
            )));
        }
        if let Some(layer) = grads.first_non_finite_layer() {
            return Err(Error::NonFinite {
                context: "adam gradient".into(),
                layer: Some(layer),
            });
        }

        self.step += 1;
        let AdamConfig { beta1, beta2, eps } = self.config;
        let t = self.step as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);

        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for (k, layer) in net.layers_mut().iter_mut().enumerate() {
            let g = &grads.layers[k];
            let m = &mut self.first_moment.layers[k];
            let v = &mut self.second_moment.layers[k];
            Zip::from(&mut layer.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .and(&g.weights)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            Zip::from(&mut layer.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .and(&g.bias)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
        Ok(())
    }
}
