use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::SurrogateModel;
use crate::error::{invalid, Error, Result};
use crate::sweep::{angle_grid, SweepRecord};
use crate::walk::Engine;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_layers: usize,
    pub width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    /// The step size follows a cosine from `learning_rate` down to
    /// `learning_rate * final_lr_fraction` over the epochs; 1 keeps it constant.
    pub final_lr_fraction: f64,
    /// Each `m` present in the data must contribute at least this many records.
    pub min_records_per_m: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 4,
            width: 64,
            learning_rate: 1e-3,
            batch_size: 256,
            epochs: 500,
            seed: 0,
            validation_fraction: 0.1,
            final_lr_fraction: 1.0,
            min_records_per_m: 1000,
        }
    }
}

impl TrainConfig {
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.learning_rate;
        }
        let t = epoch as f64 / (self.epochs - 1) as f64;
        let floor = self.learning_rate * self.final_lr_fraction;
        floor + 0.5 * (self.learning_rate - floor) * (1.0 + (std::f64::consts::PI * t).cos())
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.hidden_layers == 0 {
            return Err(invalid(
                "architecture",
                "need at least one hidden layer of width > 0",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate", "must be positive"));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(invalid("batch_size/epochs", "must be positive"));
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return Err(invalid("final_lr_fraction", "must lie in (0, 1]"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(invalid("validation_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: usize,
    pub train_records: usize,
    pub validation_records: usize,
    /// Mean of the minibatch losses over the last epoch.
    pub final_train_loss: f64,
    pub final_validation_loss: f64,
    pub train_history: Vec<f64>,
    pub validation_history: Vec<f64>,
}

/// Parameter gradients, one `(dW, db)` pair per layer.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

fn features_of(records: &[SweepRecord]) -> (Array2<f64>, Array1<f64>) {
    let mut x = Array2::zeros((records.len(), 3));
    for (mut row, r) in x.axis_iter_mut(Axis(0)).zip(records) {
        let f = SurrogateModel::features(r.phi, r.zeta, r.m as f64);
        row.assign(&ArrayView1::from(&f));
    }
    let y = records.iter().map(|r| r.p).collect();
    (x, y)
}

pub fn mse(model: &SurrogateModel, x: ArrayView2<f64>, y: ArrayView1<f64>) -> f64 {
    let pred = model.forward_features(x);
    (&pred - &y).mapv(|d| d * d).mean().unwrap_or(0.0)
}

/// Mean squared error on `records`.
pub fn evaluate(model: &SurrogateModel, records: &[SweepRecord]) -> f64 {
    let (x, y) = features_of(records);
    mse(model, x.view(), y.view())
}

/// Mean squared error over the batch and its gradient by backpropagation.
pub fn loss_and_gradient(
    model: &SurrogateModel,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
) -> (f64, Gradient) {
    let trace = model.trace(x);
    let n = y.len() as f64;
    let diff = &trace.output - &y;
    let loss = diff.mapv(|d| d * d).sum() / n;

    // y = s/2 with s = sigmoid(z), so dy/dz = y (1 - 2y)
    let dz: Array1<f64> = diff
        .iter()
        .zip(&trace.output)
        .map(|(&d, &out)| 2.0 * d / n * out * (1.0 - 2.0 * out))
        .collect();
    let mut delta = dz.insert_axis(Axis(1));

    let layers = model.layers();
    let mut grads = Vec::with_capacity(layers.len());
    for k in (0..layers.len()).rev() {
        let input = &trace.inputs[k];
        grads.push((input.t().dot(&delta), delta.sum_axis(Axis(0))));
        if k > 0 {
            let upstream = delta.dot(&layers[k].weights.t());
            // input is tanh of the previous pre-activation
            delta = upstream * input.mapv(|a| 1.0 - a * a);
        }
    }
    grads.reverse();
    (loss, Gradient { layers: grads })
}

struct Adam {
    lr: f64,
    t: i32,
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(model: &SurrogateModel, lr: f64) -> Self {
        let zeros: Vec<_> = model
            .layers()
            .iter()
            .map(|l| {
                (
                    Array2::zeros(l.weights.raw_dim()),
                    Array1::zeros(l.bias.len()),
                )
            })
            .collect();
        Self {
            lr,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    fn step(&mut self, model: &mut SurrogateModel, grad: &Gradient) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let lr = self.lr;
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        };
        for (((layer, (gw, gb)), (mw, mb)), (vw, vb)) in model
            .layers_mut()
            .iter_mut()
            .zip(&grad.layers)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            ndarray::Zip::from(&mut layer.weights)
                .and(mw)
                .and(vw)
                .and(gw)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut layer.bias)
                .and(mb)
                .and(vb)
                .and(gb)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}

fn check_coverage(records: &[SweepRecord], min_per_m: usize) -> Result<()> {
    let mut counts = std::collections::BTreeMap::new();
    for r in records {
        *counts.entry(r.m).or_insert(0usize) += 1;
    }
    if counts.is_empty() {
        return Err(invalid("records", "training data is empty"));
    }
    for (m, n) in counts {
        if n < min_per_m {
            return Err(invalid(
                "records",
                format!("m={m} has {n} records, need at least {min_per_m}"),
            ));
        }
    }
    Ok(())
}

/// Trains a fresh network on `records` with Adam on minibatch MSE. A seeded
/// shuffle holds out `validation_fraction` of the records.
pub fn train(
    records: &[SweepRecord],
    config: &TrainConfig,
) -> Result<(SurrogateModel, TrainReport)> {
    train_with_progress(records, config, |_, _, _| {})
}

/// As [`train`], calling `progress(epoch, train_loss, validation_loss)` after
/// every epoch.
pub fn train_with_progress(
    records: &[SweepRecord],
    config: &TrainConfig,
    mut progress: impl FnMut(usize, f64, f64),
) -> Result<(SurrogateModel, TrainReport)> {
    config.validate()?;
    check_coverage(records, config.min_records_per_m)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((records.len() as f64 * config.validation_fraction) as usize).max(1);
    if n_val >= records.len() {
        return Err(invalid(
            "records",
            "too few records to hold out a validation set",
        ));
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i]).collect::<Vec<_>>();
    let (xv, yv) = features_of(&pick(&order[..n_val]));
    let (xt, yt) = features_of(&pick(&order[n_val..]));

    let mut model = SurrogateModel::new_random(config.hidden_layers, config.width, config.seed)?;
    let mut adam = Adam::new(&model, config.learning_rate);
    let mut train_history = Vec::with_capacity(config.epochs);
    let mut validation_history = Vec::with_capacity(config.epochs);
    let mut batch: Vec<usize> = (0..xt.nrows()).collect();

    for epoch in 0..config.epochs {
        adam.lr = config.learning_rate_at(epoch);
        batch.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in batch.chunks(config.batch_size) {
            let bx = xt.select(Axis(0), chunk);
            let by = yt.select(Axis(0), chunk);
            let (loss, grad) = loss_and_gradient(&model, bx.view(), by.view());
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            adam.step(&mut model, &grad);
            total += loss * chunk.len() as f64;
        }
        let train_loss = total / xt.nrows() as f64;
        let val_loss = mse(&model, xv.view(), yv.view());
        if !val_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                loss: val_loss,
            });
        }
        train_history.push(train_loss);
        validation_history.push(val_loss);
        progress(epoch, train_loss, val_loss);
    }

    let report = TrainReport {
        epochs: config.epochs,
        train_records: xt.nrows(),
        validation_records: n_val,
        final_train_loss: *train_history.last().expect("epochs > 0"),
        final_validation_loss: *validation_history.last().expect("epochs > 0"),
        train_history,
        validation_history,
    };
    Ok((model, report))
}

/// `per_m` distinct points drawn (seeded) from the `steps x steps` angle grid
/// for every `m` in `ms`, each evaluated with the simulator.
pub fn grid_training_set(
    ms: &[usize],
    steps: usize,
    per_m: usize,
    seed: u64,
    engine: Engine,
) -> Result<Vec<SweepRecord>> {
    if steps < 2 || per_m == 0 || per_m > steps * steps {
        return Err(invalid("per_m", "must lie in 1..=steps^2"));
    }
    let grid = angle_grid(steps);
    let mut points = Vec::with_capacity(ms.len() * per_m);
    for &m in ms {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(m as u64);
        let mut cells: Vec<usize> = (0..steps * steps).collect();
        let (chosen, _) = cells.partial_shuffle(&mut rng, per_m);
        points.extend(
            chosen
                .iter()
                .map(|&c| (m, grid[c / steps], grid[c % steps])),
        );
    }
    points
        .par_iter()
        .map(|&(m, phi, zeta)| {
            Ok(SweepRecord {
                phi: crate::coin::reduce_angle(phi),
                zeta: crate::coin::reduce_angle(zeta),
                m,
                p: engine.success(m, phi, zeta)?,
            })
        })
        .collect()
}
