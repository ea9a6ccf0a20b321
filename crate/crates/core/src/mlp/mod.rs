//! Three-layer perceptron trained on mean squared error by full-batch
//! backpropagation or by Levenberg–Marquardt.

mod linalg;

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use self::linalg::cholesky_solve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Logistic,
    /// Linear units; used to check the optimizers against closed-form least squares.
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(z),
            Activation::Logistic => 1.0 / (1.0 + libm::exp(-z)),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation's output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

/// `[inputs, hidden, outputs]` network. Weight matrices are row-major
/// (`hidden x inputs`, then `outputs x hidden`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: [usize; 3],
    pub weights: [Vec<f64>; 2],
    pub biases: [Vec<f64>; 2],
    pub activations: [Activation; 2],
}

impl MlpModel {
    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn hidden(&self) -> usize {
        self.layer_sizes[1]
    }

    pub fn outputs(&self) -> usize {
        self.layer_sizes[2]
    }

    /// Total number of trainable parameters.
    pub fn parameter_count(&self) -> usize {
        let [i, h, o] = self.layer_sizes;
        h * i + h + o * h + o
    }

    /// Checks shapes and finiteness, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        let [i, h, o] = self.layer_sizes;
        if i == 0 || h == 0 || o == 0 {
            return Err(Error::InvalidConfig("layer sizes must be >= 1".to_string()));
        }
        let expected = [h * i, o * h, h, o];
        let found = [self.weights[0].len(), self.weights[1].len(), self.biases[0].len(), self.biases[1].len()];
        for (e, f) in expected.into_iter().zip(found) {
            if e != f {
                return Err(Error::DimensionMismatch { expected: e, found: f });
            }
        }
        if !self.parameters().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(0));
        }
        Ok(())
    }

    /// Flattened parameters: hidden weights, hidden biases, output weights, output biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.parameter_count());
        p.extend_from_slice(&self.weights[0]);
        p.extend_from_slice(&self.biases[0]);
        p.extend_from_slice(&self.weights[1]);
        p.extend_from_slice(&self.biases[1]);
        p
    }

    pub fn set_parameters(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.parameter_count());
        let mut rest = p;
        let [w1, w2] = &mut self.weights;
        let [b1, b2] = &mut self.biases;
        for buf in [w1, b1, w2, b2] {
            let (head, tail) = rest.split_at(buf.len());
            buf.copy_from_slice(head);
            rest = tail;
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs() {
            return Err(Error::DimensionMismatch { expected: self.inputs(), found: x.len() });
        }
        Ok(())
    }

    /// Hidden and output activations for one input.
    fn activations_for(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let [i, h, o] = self.layer_sizes;
        let hidden: Vec<f64> = (0..h)
            .map(|j| {
                let row = &self.weights[0][j * i..(j + 1) * i];
                let z = self.biases[0][j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                self.activations[0].apply(z)
            })
            .collect();
        let out = (0..o)
            .map(|k| {
                let row = &self.weights[1][k * h..(k + 1) * h];
                let z = self.biases[1][k] + row.iter().zip(&hidden).map(|(w, v)| w * v).sum::<f64>();
                self.activations[1].apply(z)
            })
            .collect();
        (hidden, out)
    }
}

/// Builds a network with weights drawn uniformly from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`
/// and zero biases, using tanh hidden units and logistic outputs.
pub fn init_mlp(layer_sizes: [usize; 3], seed: u64) -> Result<MlpModel> {
    init_mlp_with(layer_sizes, seed, [Activation::Tanh, Activation::Logistic])
}

pub fn init_mlp_with(layer_sizes: [usize; 3], seed: u64, activations: [Activation; 2]) -> Result<MlpModel> {
    let [i, h, o] = layer_sizes;
    if i == 0 || h == 0 || o == 0 {
        return Err(Error::InvalidConfig(format!("layer sizes must be >= 1, got {layer_sizes:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, fan_in: usize| -> Vec<f64> {
        let bound = 1.0 / libm::sqrt(fan_in as f64);
        (0..n).map(|_| rng.gen_range(-bound..=bound)).collect()
    };
    let w1 = draw(h * i, i);
    let w2 = draw(o * h, h);
    Ok(MlpModel { layer_sizes, weights: [w1, w2], biases: [vec![0.0; h], vec![0.0; o]], activations })
}

/// Network output for one input.
pub fn forward(model: &MlpModel, x: &[f64]) -> Result<Vec<f64>> {
    model.check_input(x)?;
    Ok(model.activations_for(x).1)
}

/// Index of the largest output; the lowest index wins ties.
pub fn predict_mlp(model: &MlpModel, x: &[f64]) -> Result<usize> {
    let out = forward(model, x)?;
    Ok(argmax(&out))
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Inputs with real-valued targets, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl TrainingSet {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), found: targets.len() });
        }
        let (di, dt) = (inputs[0].len(), targets[0].len());
        for (x, t) in inputs.iter().zip(&targets) {
            if x.len() != di {
                return Err(Error::DimensionMismatch { expected: di, found: x.len() });
            }
            if t.len() != dt {
                return Err(Error::DimensionMismatch { expected: dt, found: t.len() });
            }
        }
        Ok(Self { inputs, targets })
    }

    /// One-hot targets over `classes` outputs.
    pub fn one_hot(inputs: Vec<Vec<f64>>, labels: &[usize], classes: usize) -> Result<Self> {
        let targets = labels
            .iter()
            .map(|&l| {
                if l >= classes {
                    return Err(Error::LabelOutOfRange { label: l, classes });
                }
                let mut t = vec![0.0; classes];
                t[l] = 1.0;
                Ok(t)
            })
            .collect::<Result<_>>()?;
        Self::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    /// The same samples repeated `times` times.
    pub fn repeated(&self, times: usize) -> Self {
        let mut inputs = Vec::with_capacity(self.len() * times);
        let mut targets = Vec::with_capacity(self.len() * times);
        for _ in 0..times {
            inputs.extend(self.inputs.iter().cloned());
            targets.extend(self.targets.iter().cloned());
        }
        Self { inputs, targets }
    }

    fn check(&self, model: &MlpModel) -> Result<()> {
        model.check_input(&self.inputs[0])?;
        if self.targets[0].len() != model.outputs() {
            return Err(Error::DimensionMismatch { expected: model.outputs(), found: self.targets[0].len() });
        }
        Ok(())
    }
}

fn sum_squared_error(model: &MlpModel, data: &TrainingSet) -> f64 {
    data.inputs
        .iter()
        .zip(&data.targets)
        .map(|(x, t)| {
            let (_, y) = model.activations_for(x);
            y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        })
        .sum()
}

/// Mean over samples and output units of the squared error.
pub fn mse_loss(model: &MlpModel, data: &TrainingSet) -> Result<f64> {
    data.check(model)?;
    Ok(sum_squared_error(model, data) / (data.len() * model.outputs()) as f64)
}

/// Gradient of [`mse_loss`] in the layout of [`MlpModel::parameters`].
pub fn backprop_gradient(model: &MlpModel, data: &TrainingSet) -> Result<Vec<f64>> {
    data.check(model)?;
    let [ni, nh, no] = model.layer_sizes;
    let scale = 2.0 / (data.len() * no) as f64;
    let mut grad = vec![0.0; model.parameter_count()];
    let (gw1, rest) = grad.split_at_mut(nh * ni);
    let (gb1, rest) = rest.split_at_mut(nh);
    let (gw2, gb2) = rest.split_at_mut(no * nh);
    let mut delta_h = vec![0.0; nh];
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        let (h, y) = model.activations_for(x);
        delta_h.iter_mut().for_each(|d| *d = 0.0);
        for k in 0..no {
            let d = scale * (y[k] - t[k]) * model.activations[1].derivative_from_output(y[k]);
            gb2[k] += d;
            let w_row = &model.weights[1][k * nh..(k + 1) * nh];
            for j in 0..nh {
                gw2[k * nh + j] += d * h[j];
                delta_h[j] += d * w_row[j];
            }
        }
        for j in 0..nh {
            let d = delta_h[j] * model.activations[0].derivative_from_output(h[j]);
            gb1[j] += d;
            for (g, v) in gw1[j * ni..(j + 1) * ni].iter_mut().zip(x) {
                *g += d * v;
            }
        }
    }
    Ok(grad)
}

/// Optimizer settings shared by both trainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    /// Gradient-descent step size.
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub max_iterations: usize,
    pub target_mse: f64,
    /// Initial Levenberg–Marquardt damping.
    pub mu0: f64,
    pub mu_factor: f64,
    pub mu_max: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            learning_rate: 0.05,
            max_epochs: 2000,
            max_iterations: 200,
            target_mse: 1e-3,
            mu0: 1e-3,
            mu_factor: 10.0,
            mu_max: 1e10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{what} out of range")));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if self.target_mse.is_nan() || self.target_mse <= 0.0 {
            return bad("target_mse");
        }
        if !(self.mu0 > 0.0 && self.mu0 <= self.mu_max) {
            return bad("mu0");
        }
        if self.mu_factor.is_nan() || self.mu_factor <= 1.0 {
            return bad("mu_factor");
        }
        if !(self.mu_max > 0.0 && self.mu_max.is_finite()) {
            return bad("mu_max");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub mse: f64,
    /// Damping used for this step (Levenberg–Marquardt only).
    pub mu: Option<f64>,
    pub accepted: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    pub fn initial_mse(&self) -> Option<f64> {
        self.records.first().map(|r| r.mse)
    }

    pub fn final_mse(&self) -> Option<f64> {
        self.records.iter().rev().find(|r| r.accepted != Some(false)).map(|r| r.mse)
    }
}

fn ensure_finite(p: &[f64], iteration: usize) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(iteration))
    }
}

/// Full-batch gradient descent with a constant learning rate.
///
/// Record 0 is the starting loss; record `e` the loss after `e` updates.
/// Training stops once the loss reaches `target_mse` or after `max_epochs` updates.
pub fn train_bp(model: &MlpModel, data: &TrainingSet, cfg: &TrainConfig) -> Result<(MlpModel, TrainTrace)> {
    cfg.validate()?;
    data.check(model)?;
    let mut model = model.clone();
    let mut params = model.parameters();
    let mut trace = TrainTrace::default();
    let mut mse = mse_loss(&model, data)?;
    trace.records.push(TraceRecord { iteration: 0, mse, mu: None, accepted: None });
    for epoch in 1..=cfg.max_epochs {
        if mse <= cfg.target_mse {
            break;
        }
        let grad = backprop_gradient(&model, data)?;
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
        ensure_finite(&params, epoch)?;
        model.set_parameters(&params);
        mse = mse_loss(&model, data)?;
        if !mse.is_finite() {
            return Err(Error::NonFinite(epoch));
        }
        trace.records.push(TraceRecord { iteration: epoch, mse, mu: None, accepted: None });
    }
    Ok((model, trace))
}

/// Residuals `output - target` stacked sample by sample, and their Jacobian
/// (row-major, one row per residual, columns in parameter order).
pub fn residuals_and_jacobian(model: &MlpModel, data: &TrainingSet) -> Result<(Vec<f64>, Vec<f64>)> {
    data.check(model)?;
    let [ni, nh, no] = model.layer_sizes;
    let np = model.parameter_count();
    let (ob1, ow2, ob2) = (nh * ni, nh * ni + nh, nh * ni + nh + no * nh);
    let mut r = Vec::with_capacity(data.len() * no);
    let mut jac = vec![0.0; data.len() * no * np];
    for (s, (x, t)) in data.inputs.iter().zip(&data.targets).enumerate() {
        let (h, y) = model.activations_for(x);
        let dh: Vec<f64> = h.iter().map(|&a| model.activations[0].derivative_from_output(a)).collect();
        for k in 0..no {
            r.push(y[k] - t[k]);
            let row = &mut jac[(s * no + k) * np..(s * no + k + 1) * np];
            let d = model.activations[1].derivative_from_output(y[k]);
            row[ob2 + k] = d;
            let w_row = &model.weights[1][k * nh..(k + 1) * nh];
            for j in 0..nh {
                row[ow2 + k * nh + j] = d * h[j];
                let dj = d * w_row[j] * dh[j];
                row[ob1 + j] = dj;
                for (cell, v) in row[j * ni..(j + 1) * ni].iter_mut().zip(x) {
                    *cell = dj * v;
                }
            }
        }
    }
    Ok((r, jac))
}

/// `J^T J` (full symmetric, row-major) and `J^T r`.
pub fn normal_equations(jac: &[f64], r: &[f64], np: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jtj = vec![0.0; np * np];
    let mut jtr = vec![0.0; np];
    let mut nz = Vec::with_capacity(np);
    for (row, &res) in jac.chunks_exact(np).zip(r) {
        nz.clear();
        nz.extend(row.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)));
        for &(i, vi) in &nz {
            jtr[i] += vi * res;
            let dst = &mut jtj[i * np..];
            for &(j, vj) in nz.iter().take_while(|(j, _)| *j <= i) {
                dst[j] += vi * vj;
            }
        }
    }
    for i in 0..np {
        for j in 0..i {
            jtj[j * np + i] = jtj[i * np + j];
        }
    }
    (jtj, jtr)
}

/// Solves `(J^T J + mu I) step = -J^T r`.
pub fn damped_step(jtj: &[f64], jtr: &[f64], mu: f64) -> Option<Vec<f64>> {
    let np = jtr.len();
    let mut a = jtj.to_vec();
    for i in 0..np {
        a[i * np + i] += mu;
    }
    let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
    cholesky_solve(&a, np, &rhs)
}

/// Gradient-norm threshold below which Levenberg–Marquardt stops.
pub const LM_GRADIENT_TOLERANCE: f64 = 1e-8;

/// Levenberg–Marquardt on the sum of squared residuals.
///
/// Every solve attempt is one iteration in the trace. A step is accepted
/// when it strictly lowers the sum of squares, after which the damping is
/// divided by `mu_factor`; otherwise it is multiplied. Training stops at
/// `target_mse`, when the damping would exceed `mu_max`, when `|J^T r|`
/// drops below [`LM_GRADIENT_TOLERANCE`], or after `max_iterations`. If
/// the damped system cannot be factorized even at `mu_max`, the error is
/// [`Error::Singular`].
pub fn train_lm(model: &MlpModel, data: &TrainingSet, cfg: &TrainConfig) -> Result<(MlpModel, TrainTrace)> {
    cfg.validate()?;
    data.check(model)?;
    let denom = (data.len() * model.outputs()) as f64;
    let np = model.parameter_count();
    let mut model = model.clone();
    let mut params = model.parameters();
    let mut sse = sum_squared_error(&model, data);
    let mut mu = cfg.mu0;
    let mut trace = TrainTrace::default();
    trace.records.push(TraceRecord { iteration: 0, mse: sse / denom, mu: Some(mu), accepted: Some(true) });
    let mut iteration = 0;
    'outer: while iteration < cfg.max_iterations && sse / denom > cfg.target_mse {
        let (r, jac) = residuals_and_jacobian(&model, data)?;
        let (jtj, jtr) = normal_equations(&jac, &r, np);
        if libm::sqrt(jtr.iter().map(|v| v * v).sum::<f64>()) < LM_GRADIENT_TOLERANCE {
            break;
        }
        loop {
            iteration += 1;
            let trial = damped_step(&jtj, &jtr, mu).map(|step| {
                let p: Vec<f64> = params.iter().zip(&step).map(|(a, b)| a + b).collect();
                let mut m = model.clone();
                m.set_parameters(&p);
                let s = sum_squared_error(&m, data);
                (p, m, s)
            });
            let factorized = trial.is_some();
            match trial {
                Some((p, m, s)) if s.is_finite() && s < sse => {
                    ensure_finite(&p, iteration)?;
                    params = p;
                    model = m;
                    sse = s;
                    mu = (mu / cfg.mu_factor).max(f64::MIN_POSITIVE);
                    trace.records.push(TraceRecord { iteration, mse: sse / denom, mu: Some(mu), accepted: Some(true) });
                    break;
                }
                _ => {
                    trace.records.push(TraceRecord {
                        iteration,
                        mse: sse / denom,
                        mu: Some(mu),
                        accepted: Some(false),
                    });
                    if mu * cfg.mu_factor > cfg.mu_max {
                        if !factorized {
                            return Err(Error::Singular { mu });
                        }
                        break 'outer;
                    }
                    mu *= cfg.mu_factor;
                }
            }
            if iteration >= cfg.max_iterations {
                break 'outer;
            }
        }
    }
    Ok((model, trace))
}
