use std::f64::consts::TAU;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Format tag written into serialized models.
pub const MODEL_FORMAT: &str = "qrws-surrogate/1";

/// Inputs are divided by these before entering the network: `(phi, zeta, m)`.
pub const INPUT_SCALE: [f64; 3] = [TAU, TAU, 16.0];

/// The sigmoid head is multiplied by this, bounding predictions to `[0, 0.5]`.
pub const OUTPUT_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
}

/// Dense layer `y = x W + b` with `W` stored `inputs x outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }

    fn affine(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.weights) + &self.bias
    }
}

/// Feed-forward regressor `(phi, zeta, m) -> p`: tanh hidden layers and a
/// sigmoid output scaled by 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    layers: Vec<Dense>,
    activation: Activation,
}

/// Intermediate values of a batched forward pass, kept for backpropagation.
pub(crate) struct Trace {
    /// Input to each layer; `inputs[0]` is the normalized batch.
    pub inputs: Vec<Array2<f64>>,
    /// Final predictions, one per row.
    pub output: Array1<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl SurrogateModel {
    /// Glorot-uniform weights and zero biases drawn from a seeded stream.
    pub fn new_random(hidden_layers: usize, width: usize, seed: u64) -> Result<Self> {
        let sizes = Self::sizes_for(hidden_layers, width)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Dense {
                    weights: Array2::from_shape_simple_fn((w[0], w[1]), || {
                        rng.gen_range(-limit..limit)
                    }),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self {
            layers,
            activation: Activation::Tanh,
        })
    }

    /// All weights and biases zero.
    pub fn zeros(hidden_layers: usize, width: usize) -> Result<Self> {
        let sizes = Self::sizes_for(hidden_layers, width)?;
        let layers = sizes
            .windows(2)
            .map(|w| Dense {
                weights: Array2::zeros((w[0], w[1])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        Ok(Self {
            layers,
            activation: Activation::Tanh,
        })
    }

    fn sizes_for(hidden_layers: usize, width: usize) -> Result<Vec<usize>> {
        if width == 0 {
            return Err(Error::MalformedModel(
                "hidden width must be positive".into(),
            ));
        }
        let mut sizes = vec![3];
        sizes.extend(std::iter::repeat_n(width, hidden_layers));
        sizes.push(1);
        Ok(sizes)
    }

    pub fn from_layers(layers: Vec<Dense>, activation: Activation) -> Result<Self> {
        let model = Self { layers, activation };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let first = self
            .layers
            .first()
            .ok_or_else(|| Error::MalformedModel("no layers".into()))?;
        if first.inputs() != 3 {
            return Err(Error::MalformedModel(format!(
                "input layer takes {} features, expected 3",
                first.inputs()
            )));
        }
        for (k, pair) in self.layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::MalformedModel(format!(
                    "layer {k} has {} outputs but layer {} takes {} inputs",
                    pair[0].outputs(),
                    k + 1,
                    pair[1].inputs()
                )));
            }
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.bias.len() != layer.outputs() {
                return Err(Error::MalformedModel(format!(
                    "layer {k} bias has length {}, expected {}",
                    layer.bias.len(),
                    layer.outputs()
                )));
            }
        }
        if self.layers.last().map(Dense::outputs) != Some(1) {
            return Err(Error::MalformedModel(
                "output layer must have one unit".into(),
            ));
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// `[3, N, ..., N, 1]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(3)
            .chain(self.layers.iter().map(Dense::outputs))
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Normalized network input for one point.
    pub fn features(phi: f64, zeta: f64, m: f64) -> [f64; 3] {
        [
            phi / INPUT_SCALE[0],
            zeta / INPUT_SCALE[1],
            m / INPUT_SCALE[2],
        ]
    }

    pub fn forward(&self, phi: f64, zeta: f64, m: usize) -> f64 {
        let x = Array2::from_shape_vec((1, 3), Self::features(phi, zeta, m as f64).to_vec())
            .expect("shape");
        self.trace(x.view()).output[0]
    }

    /// Predictions for rows of normalized features.
    pub fn forward_features(&self, features: ArrayView2<f64>) -> Array1<f64> {
        self.trace(features).output
    }

    pub(crate) fn trace(&self, features: ArrayView2<f64>) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut current = features.to_owned();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(&current.view());
            inputs.push(current);
            if k == last {
                let output = z.index_axis(Axis(1), 0).mapv(|v| OUTPUT_SCALE * sigmoid(v));
                return Trace { inputs, output };
            }
            current = match self.activation {
                Activation::Tanh => z.mapv(f64::tanh),
            };
        }
        unreachable!("model has at least one layer")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDocument::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        doc.try_into()
    }
}

/// Serialized form: layer sizes, row-major weight arrays (`inputs x
/// outputs`), biases, normalization constants, activation tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    layer_sizes: Vec<usize>,
    activation: Activation,
    input_scale: [f64; 3],
    output_scale: f64,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl From<&SurrogateModel> for ModelDocument {
    fn from(model: &SurrogateModel) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            layer_sizes: model.layer_sizes(),
            activation: model.activation,
            input_scale: INPUT_SCALE,
            output_scale: OUTPUT_SCALE,
            weights: model
                .layers
                .iter()
                .map(|l| l.weights.iter().copied().collect())
                .collect(),
            biases: model.layers.iter().map(|l| l.bias.to_vec()).collect(),
        }
    }
}

impl TryFrom<ModelDocument> for SurrogateModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        if doc.format != MODEL_FORMAT {
            return Err(Error::MalformedModel(format!(
                "unsupported format `{}`, expected `{MODEL_FORMAT}`",
                doc.format
            )));
        }
        if doc.input_scale != INPUT_SCALE || doc.output_scale != OUTPUT_SCALE {
            return Err(Error::MalformedModel(
                "unexpected normalization constants".into(),
            ));
        }
        let sizes = &doc.layer_sizes;
        if sizes.len() < 2
            || doc.weights.len() != sizes.len() - 1
            || doc.biases.len() != sizes.len() - 1
        {
            return Err(Error::MalformedModel(
                "layer count does not match layer_sizes".into(),
            ));
        }
        let layers = sizes
            .windows(2)
            .zip(doc.weights)
            .zip(doc.biases)
            .map(|((w, weights), bias)| {
                let weights = Array2::from_shape_vec((w[0], w[1]), weights).map_err(|_| {
                    Error::MalformedModel(format!("weight array is not {}x{}", w[0], w[1]))
                })?;
                Ok(Dense {
                    weights,
                    bias: Array1::from(bias),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SurrogateModel::from_layers(layers, doc.activation)
    }
}
