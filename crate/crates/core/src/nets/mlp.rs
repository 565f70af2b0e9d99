use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use super::Vector;
use crate::error::{Error, Result};

/// Elementwise nonlinearity applied after a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    /// Odd, bounded in (-1, 1).
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// One affine layer. `weights` has shape `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }
}

/// Parameter gradients, shaped exactly like the owning [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseGrad>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| DenseGrad {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn matches(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.dim() == l.weights.dim() && g.bias.len() == l.bias.len()
            })
    }

    /// Index of the first layer holding a NaN or infinity.
    pub fn first_non_finite_layer(&self) -> Option<usize> {
        self.layers.iter().position(|g| {
            g.weights.iter().any(|x| !x.is_finite()) || g.bias.iter().any(|x| !x.is_finite())
        })
    }

    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.layers {
            g.weights *= factor;
            g.bias *= factor;
        }
    }

    /// All components in layer order, weights (row-major) then bias.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in &self.layers {
            out.extend(g.weights.iter().copied());
            out.extend(g.bias.iter().copied());
        }
        out
    }
}

/// Post-activation outputs of every layer for a batch; `activations[0]` is the input.
#[derive(Debug, Clone)]
pub struct Trace {
    pub activations: Vec<Array2<f64>>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("trace always holds the input")
    }
}

/// Fully connected network with one hidden nonlinearity and an output nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
    hidden: Activation,
    output: Activation,
}

impl Mlp {
    /// Weights and biases drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new_uniform<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        validate_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weights =
                    Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-bound..=bound));
                let bias = Array1::from_shape_simple_fn(fan_out, || rng.random_range(-bound..=bound));
                Dense { weights, bias }
            })
            .collect();
        Ok(Mlp {
            layers,
            hidden,
            output,
        })
    }

    pub fn zeros(sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        validate_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| Dense {
                weights: Array2::zeros((w[1], w[0])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        Ok(Mlp {
            layers,
            hidden,
            output,
        })
    }

    /// Builds a network from explicit layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<Dense>, hidden: Activation, output: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Architecture("network needs at least one layer".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.bias.len() != l.outputs() {
                return Err(Error::Architecture(format!(
                    "layer {k}: bias length {} does not match {} outputs",
                    l.bias.len(),
                    l.outputs()
                )));
            }
            if l.inputs() == 0 || l.outputs() == 0 {
                return Err(Error::Architecture(format!("layer {k} has an empty dimension")));
            }
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::Architecture(format!(
                    "layer {k} emits {} values but layer {} expects {}",
                    pair[0].outputs(),
                    k + 1,
                    pair[1].inputs()
                )));
            }
        }
        Ok(Mlp {
            layers,
            hidden,
            output,
        })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(Dense::outputs));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn same_architecture(&self, other: &Mlp) -> bool {
        self.hidden == other.hidden
            && self.output == other.output
            && self.layer_sizes() == other.layer_sizes()
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    /// Single-input forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vector> {
        if input.len() != self.input_dim() {
            return Err(Error::shape("mlp input", self.input_dim(), input.len()));
        }
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let act = self.activation_of(k);
            next.clear();
            next.reserve(layer.outputs());
            for (row, b) in layer.weights.outer_iter().zip(layer.bias.iter()) {
                let row = row.as_slice().expect("weights are standard layout");
                let z = row.iter().zip(&current).fold(*b, |acc, (w, x)| acc + w * x);
                next.push(act.apply(z));
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(Vector::new(current))
    }

    /// Forward pass over a batch laid out as `(batch, inputs)`.
    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        let trace = self.forward_trace(inputs)?;
        Ok(trace.activations.into_iter().next_back().expect("non-empty trace"))
    }

    /// Forward pass that keeps every layer's output for [`Mlp::backward_batch`].
    pub fn forward_trace(&self, inputs: ArrayView2<f64>) -> Result<Trace> {
        if inputs.ncols() != self.input_dim() {
            return Err(Error::shape("mlp batch input", self.input_dim(), inputs.ncols()));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(inputs.to_owned());
        for (k, layer) in self.layers.iter().enumerate() {
            let act = self.activation_of(k);
            let prev = activations.last().expect("input pushed");
            let mut z = prev.dot(&layer.weights.t());
            z += &layer.bias;
            if act != Activation::Identity {
                z.mapv_inplace(|v| act.apply(v));
            }
            activations.push(z);
        }
        Ok(Trace { activations })
    }

    /// Gradients of `sum_b upstream[b] . output[b]` with respect to the
    /// parameters and to each input row.
    pub fn backward_batch(
        &self,
        trace: &Trace,
        upstream: ArrayView2<f64>,
    ) -> Result<(Gradients, Array2<f64>)> {
        if trace.activations.len() != self.layers.len() + 1 {
            return Err(Error::Architecture("trace does not belong to this network".into()));
        }
        let out = trace.output();
        if upstream.ncols() != self.output_dim() {
            return Err(Error::shape("mlp upstream gradient", self.output_dim(), upstream.ncols()));
        }
        if upstream.nrows() != out.nrows() {
            return Err(Error::shape("mlp upstream batch", out.nrows(), upstream.nrows()));
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.to_owned();
        let last = self.layers.len() - 1;
        apply_derivative(&mut delta, out, self.output);
        for k in (0..=last).rev() {
            let layer = &self.layers[k];
            let input = &trace.activations[k];
            let weights = delta.t().dot(input);
            let bias = delta.sum_axis(Axis(0));
            grads.push(DenseGrad { weights, bias });
            let mut prev = delta.dot(&layer.weights);
            if k > 0 {
                apply_derivative(&mut prev, input, self.hidden);
            }
            delta = prev;
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, delta))
    }

    /// Single-sample backward pass; recomputes the forward internally.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(Gradients, Vector)> {
        if input.len() != self.input_dim() {
            return Err(Error::shape("mlp input", self.input_dim(), input.len()));
        }
        if upstream.len() != self.output_dim() {
            return Err(Error::shape("mlp upstream gradient", self.output_dim(), upstream.len()));
        }
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row view");
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row view");
        let trace = self.forward_trace(x)?;
        let (grads, input_grad) = self.backward_batch(&trace, up)?;
        Ok((grads, input_grad.into_iter().collect()))
    }

    /// Every parameter in checkpoint order: per layer, weights row-major then bias.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    /// Inverse of [`Mlp::flat_params`].
    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::shape("flat parameter vector", self.param_count(), params.len()));
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = it.next().expect("length checked"));
            l.bias.iter_mut().for_each(|b| *b = it.next().expect("length checked"));
        }
        Ok(())
    }
}

fn apply_derivative(delta: &mut Array2<f64>, outputs: &Array2<f64>, act: Activation) {
    if act == Activation::Identity {
        return;
    }
    Zip::from(delta)
        .and(outputs)
        .for_each(|d, &y| *d *= act.derivative_from_output(y));
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::Architecture(
            "layer_sizes needs at least an input and an output size".into(),
        ));
    }
    if let Some(pos) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Architecture(format!("layer size {pos} is zero")));
    }
    Ok(())
}

/// Blends `online` into `target`: `p' <- tau * p + (1 - tau) * p'`.
///
/// Computed as `p' + tau * (p - p')`, which leaves `target` bit-identical
/// when it already equals `online`. `tau == 1` copies exactly.
pub fn polyak_update(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!("tau must lie in [0, 1], got {tau}")));
    }
    if !target.same_architecture(online) {
        return Err(Error::Architecture(format!(
            "polyak target {:?} vs online {:?}",
            target.layer_sizes(),
            online.layer_sizes()
        )));
    }
    if tau == 1.0 {
        target.layers.clone_from(&online.layers);
        return Ok(());
    }
    if tau == 0.0 {
        return Ok(());
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        Zip::from(&mut t.weights)
            .and(&o.weights)
            .for_each(|tp, &op| *tp += tau * (op - *tp));
        Zip::from(&mut t.bias)
            .and(&o.bias)
            .for_each(|tp, &op| *tp += tau * (op - *tp));
    }
    Ok(())
}
