use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Activation, SurrogateModel, Trace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Fraction of rows used for training; the rest validate.
    pub split: f64,
    /// Rows with low mean log10 Cw appear this many times in the training split.
    pub upsample_factor: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            split: 0.9,
            upsample_factor: 4,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidInput(format!(
                "split must lie in (0, 1), got {}",
                self.split
            )));
        }
        if self.upsample_factor < 1 {
            return Err(Error::InvalidInput(
                "up-sampling factor must be at least 1".into(),
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidInput(
                "batch size and epochs must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0)
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
        {
            return Err(Error::InvalidInput("bad optimizer settings".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose weights were kept (lowest validation MSE), 1-based.
    pub best_epoch: usize,
    pub val_r2: f64,
    pub train_rows: usize,
    pub val_rows: usize,
    /// Extra copies added by up-sampling.
    pub upsampled_copies: usize,
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
}

impl TrainingReport {
    /// `epoch,train_mse,val_mse` table.
    pub fn table(&self) -> String {
        let mut s = String::from("epoch,train_mse,val_mse\n");
        for e in &self.epochs {
            s.push_str(&format!(
                "{},{:.12e},{:.12e}\n",
                e.epoch, e.train_mse, e.val_mse
            ));
        }
        s
    }
}

/// 1 - SS_res / SS_tot pooled over every entry.
pub fn r_squared(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() || targets.len() < 2 {
        return Err(Error::InvalidInput(
            "R^2 needs two equal-length series of at least 2 values".into(),
        ));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Domain("R^2 undefined for constant targets".into()));
    }
    let ss_res: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Row indices that sit more than one standard deviation below the mean of
/// the per-row mean target.
pub fn low_outliers(targets: &Array2<f64>) -> Vec<usize> {
    let means = targets.mean_axis(Axis(1)).expect("non-empty targets");
    let mu = means.mean().unwrap_or(0.0);
    let sd = means.std(0.0);
    means
        .iter()
        .enumerate()
        .filter(|(_, &m)| m < mu - sd)
        .map(|(i, _)| i)
        .collect()
}

struct Adam {
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
    t: i32,
}

impl Adam {
    fn new(model: &SurrogateModel) -> Adam {
        let zeros: Vec<_> = model
            .layers
            .iter()
            .map(|l| (Array2::zeros(l.w.raw_dim()), Array1::zeros(l.b.len())))
            .collect();
        Adam {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(
        &mut self,
        model: &mut SurrogateModel,
        grads: &[(Array2<f64>, Array1<f64>)],
        cfg: &TrainingConfig,
    ) {
        self.t += 1;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let lr = cfg.learning_rate;
        let eps = cfg.epsilon;
        for (k, layer) in model.layers.iter_mut().enumerate() {
            let (gw, gb) = &grads[k];
            let (mw, mb) = &mut self.m[k];
            let (vw, vb) = &mut self.v[k];
            ndarray::Zip::from(&mut layer.w)
                .and(mw)
                .and(vw)
                .and(gw)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
            ndarray::Zip::from(&mut layer.b)
                .and(mb)
                .and(vb)
                .and(gb)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
        }
    }
}

/// Gradients of the batch mean squared error with respect to every weight and bias.
fn backward(
    model: &SurrogateModel,
    t: &Trace,
    targets: &Array2<f64>,
) -> Vec<(Array2<f64>, Array1<f64>)> {
    let n = t.y.nrows() as f64;
    let nh = model.layers.len() - 1;
    let act = model.activation;
    let mut grads = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); nh + 1];
    let dy = (&t.y - targets) * (2.0 / (n * t.y.ncols() as f64));
    grads[nh] = (dy.t().dot(&t.h[nh - 1]), dy.sum_axis(Axis(0)));
    let dh_last = dy.dot(&model.layers[nh].w);
    let mut dh = dh_last.clone();
    for k in (0..nh).rev() {
        if k == 0 && nh > 1 {
            dh += &dh_last;
        }
        let dz = &dh * &t.z[k].mapv(|v| act.slope(v));
        let input = if k == 0 { &t.xn } else { &t.h[k - 1] };
        grads[k] = (dz.t().dot(input), dz.sum_axis(Axis(0)));
        if k > 0 {
            dh = dz.dot(&model.layers[k].w);
        }
    }
    grads
}

fn mse(model: &SurrogateModel, xn: &Array2<f64>, y: &Array2<f64>) -> f64 {
    if xn.nrows() == 0 {
        return f64::NAN;
    }
    let p = model.forward_normalized(xn.clone()).y;
    (&p - y).mapv(|v| v * v).mean().unwrap_or(f64::NAN)
}

fn select(a: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    a.select(Axis(0), rows)
}

/// Trains the standard network on `inputs` (rows of 44 terms) against
/// log10 of `cw` (rows of 32 coefficients).
pub fn train(
    inputs: &Array2<f64>,
    cw: &Array2<f64>,
    cfg: &TrainingConfig,
) -> Result<(SurrogateModel, TrainingReport)> {
    train_with_dims(inputs, cw, cfg, &SurrogateModel::standard_dims())
}

pub fn train_with_dims(
    inputs: &Array2<f64>,
    cw: &Array2<f64>,
    cfg: &TrainingConfig,
    dims: &[usize],
) -> Result<(SurrogateModel, TrainingReport)> {
    cfg.validate()?;
    let n = inputs.nrows();
    if n < 10 {
        return Err(Error::Training(format!("need at least 10 rows, got {n}")));
    }
    if cw.nrows() != n || inputs.ncols() != dims[0] || cw.ncols() != dims[dims.len() - 1] {
        return Err(Error::InvalidInput(
            "training data shape does not match the network".into(),
        ));
    }
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training input".into()));
    }
    if let Some(bad) = cw.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Training(format!(
            "wave drag coefficients must be positive, found {bad}"
        )));
    }
    let y = cw.mapv(f64::log10);
    let first = y[[0, 0]];
    if y.iter().all(|&v| v == first) {
        return Err(Error::Training("targets are constant".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_train = ((n as f64 * cfg.split).round() as usize).clamp(1, n - 1);
    let train_idx = order[..n_train].to_vec();
    let val_idx = order[n_train..].to_vec();

    let low = low_outliers(&y);
    let mut expanded = train_idx.clone();
    let mut copies = 0;
    for &i in &train_idx {
        if low.contains(&i) {
            for _ in 1..cfg.upsample_factor {
                expanded.push(i);
                copies += 1;
            }
        }
    }

    let mut model = SurrogateModel::init(dims, Activation::LeakyRelu, cfg.seed ^ 0x5eed)?;
    let x_train = select(inputs, &train_idx);
    model.input_mean = x_train.mean_axis(Axis(0)).expect("non-empty");
    model.input_std = x_train
        .std_axis(Axis(0), 0.0)
        .mapv(|s| if s > 1e-12 { s } else { 1.0 });
    let last = model.layers.len() - 1;
    model.layers[last].b = select(&y, &train_idx)
        .mean_axis(Axis(0))
        .expect("non-empty");

    let xn_all = model.normalize(inputs.view());
    let xn_train = select(&xn_all, &expanded);
    let y_train = select(&y, &expanded);
    let xn_val = select(&xn_all, &val_idx);
    let y_val = select(&y, &val_idx);

    let mut adam = Adam::new(&model);
    let mut stats = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, 0usize, model.clone());
    let mut perm: Vec<usize> = (0..expanded.len()).collect();
    for epoch in 1..=cfg.epochs {
        perm.shuffle(&mut rng);
        for batch in perm.chunks(cfg.batch_size) {
            let xb = select(&xn_train, batch);
            let yb = select(&y_train, batch);
            let trace = model.forward_normalized(xb);
            let grads = backward(&model, &trace, &yb);
            adam.step(&mut model, &grads, cfg);
        }
        let train_mse = mse(&model, &xn_train, &y_train);
        let val_mse = mse(&model, &xn_val, &y_val);
        if !train_mse.is_finite() {
            return Err(Error::Training(format!(
                "training diverged at epoch {epoch}"
            )));
        }
        if val_mse < best.0 {
            best = (val_mse, epoch, model.clone());
        }
        stats.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
        });
        log::debug!("epoch {epoch}: train {train_mse:.4e} val {val_mse:.4e}");
    }
    let (_, best_epoch, model) = best;
    let pred = model.forward_normalized(xn_val).y;
    let flat = |a: &Array2<f64>| a.iter().copied().collect::<Vec<f64>>();
    let val_r2 = r_squared(&flat(&pred), &flat(&y_val)).unwrap_or(f64::NAN);
    Ok((
        model,
        TrainingReport {
            epochs: stats,
            best_epoch,
            val_r2,
            train_rows: expanded.len(),
            val_rows: val_idx.len(),
            upsampled_copies: copies,
            train_indices: train_idx,
            val_indices: val_idx,
        },
    ))
}
