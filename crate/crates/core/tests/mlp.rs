use hcr_core::mlp::{
    backprop_gradient, damped_step, forward, init_mlp, init_mlp_with, mse_loss, normal_equations,
    residuals_and_jacobian, train_bp, train_lm, Activation, MlpModel, TrainConfig, TrainingSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng) -> (MlpModel, TrainingSet) {
    let sizes = [rng.gen_range(1..=5), rng.gen_range(1..=8), rng.gen_range(1..=4)];
    let mut model = init_mlp(sizes, rng.gen()).unwrap();
    // nonzero biases so their gradients are exercised too
    let p: Vec<f64> = model.parameters().iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
    model.set_parameters(&p);
    let n = rng.gen_range(1..=10);
    let inputs = (0..n).map(|_| (0..sizes[0]).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..sizes[2])).collect();
    (model, TrainingSet::one_hot(inputs, &labels, sizes[2]).unwrap())
}

/// Largest relative difference between the analytic gradient and central
/// differences with step `h`.
pub fn max_gradient_error(model: &MlpModel, data: &TrainingSet, h: f64) -> f64 {
    let analytic = backprop_gradient(model, data).unwrap();
    let base = model.parameters();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_parameters(&p);
        let up = mse_loss(&probe, data).unwrap();
        p[i] = base[i] - h;
        probe.set_parameters(&p);
        let down = mse_loss(&probe, data).unwrap();
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let (model, data) = random_case(&mut rng);
        let err = max_gradient_error(&model, &data, 1e-5);
        assert!(err < 1e-4, "{:?}: {err}", model.layer_sizes);
    }
}

/// Straight-line forward pass with explicit loops over the flattened parameters.
fn forward_oracle(m: &MlpModel, x: &[f64]) -> Vec<f64> {
    let [ni, nh, no] = m.layer_sizes;
    let p = m.parameters();
    let (w1, rest) = p.split_at(nh * ni);
    let (b1, rest) = rest.split_at(nh);
    let (w2, b2) = rest.split_at(no * nh);
    let mut hidden = vec![0.0; nh];
    for j in 0..nh {
        let mut z = b1[j];
        for i in 0..ni {
            z += w1[j * ni + i] * x[i];
        }
        hidden[j] = z.tanh();
    }
    let mut out = vec![0.0; no];
    for k in 0..no {
        let mut z = b2[k];
        for j in 0..nh {
            z += w2[k * nh + j] * hidden[j];
        }
        out[k] = 1.0 / (1.0 + (-z).exp());
    }
    out
}

#[test]
fn forward_matches_oracle_and_stays_in_open_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (model, data) = random_case(&mut rng);
        let mut sq = 0.0;
        for (x, t) in data.inputs().iter().zip(data.targets()) {
            let y = forward(&model, x).unwrap();
            for (a, b) in y.iter().zip(forward_oracle(&model, x)) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(y.iter().all(|&v| v > 0.0 && v < 1.0));
            sq += y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        let expected = sq / (data.len() * model.outputs()) as f64;
        assert!((mse_loss(&model, &data).unwrap() - expected).abs() < 1e-12);
    }
}

/// Least-squares line through `(x, y)` from the 2x2 normal equations.
fn normal_equations_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx = xs.iter().map(|x| x * x).sum::<f64>();
    let sxy = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>();
    let det = n * sxx - sx * sx;
    ((n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det)
}

#[test]
fn lm_reproduces_the_normal_equations_line() {
    let xs = [-1.0, 0.0, 0.5, 1.0, 2.0];
    let noise = [0.1, -0.05, 0.02, -0.08, 0.04];
    let ys: Vec<f64> = xs.iter().zip(noise).map(|(x, e)| 2.0 * x + 1.0 + e).collect();
    let (slope, intercept) = normal_equations_line(&xs, &ys);

    let model = init_mlp_with([1, 1, 1], 3, [Activation::Identity, Activation::Identity]).unwrap();
    let data = TrainingSet::new(xs.iter().map(|&x| vec![x]).collect(), ys.iter().map(|&y| vec![y]).collect()).unwrap();
    let cfg = TrainConfig { max_iterations: 50, target_mse: 1e-300, ..Default::default() };
    let (fitted, trace) = train_lm(&model, &data, &cfg).unwrap();
    assert!(trace.records.last().unwrap().iteration <= 50);

    let p = fitted.parameters();
    let (w1, b1, w2, b2) = (p[0], p[1], p[2], p[3]);
    assert!((w2 * w1 - slope).abs() < 1e-6, "slope {} vs {slope}", w2 * w1);
    assert!((w2 * b1 + b2 - intercept).abs() < 1e-6, "intercept {} vs {intercept}", w2 * b1 + b2);

    let accepted: Vec<f64> = trace.records.iter().filter(|r| r.accepted == Some(true)).map(|r| r.mse).collect();
    assert!(accepted.windows(2).all(|w| w[1] <= w[0]));
    assert!(trace.records.iter().all(|r| r.mu.unwrap() > 0.0 && r.mu.unwrap() <= cfg.mu_max));
}

#[test]
fn heavy_damping_approaches_scaled_gradient_descent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let (model, data) = random_case(&mut rng);
        let (r, jac) = residuals_and_jacobian(&model, &data).unwrap();
        let (jtj, jtr) = normal_equations(&jac, &r, model.parameter_count());
        let step = damped_step(&jtj, &jtr, 1e8).unwrap();
        let dot: f64 = step.iter().zip(&jtr).map(|(a, b)| -a * b).sum();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cosine = dot / (norm(&step) * norm(&jtr));
        assert!(cosine > 0.999, "{cosine}");
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let (model, data) = random_case(&mut rng);
        let (r, jac) = residuals_and_jacobian(&model, &data).unwrap();
        let np = model.parameter_count();
        let base = model.parameters();
        let mut probe = model.clone();
        let residuals = |m: &MlpModel| -> Vec<f64> {
            data.inputs()
                .iter()
                .zip(data.targets())
                .flat_map(|(x, t)| forward(m, x).unwrap().into_iter().zip(t.clone()).map(|(a, b)| a - b))
                .collect()
        };
        assert_eq!(r, residuals(&model));
        for i in 0..np {
            let mut p = base.clone();
            p[i] += 1e-6;
            probe.set_parameters(&p);
            let up = residuals(&probe);
            p[i] -= 2e-6;
            probe.set_parameters(&p);
            let down = residuals(&probe);
            for row in 0..r.len() {
                let numeric = (up[row] - down[row]) / 2e-6;
                assert!((jac[row * np + i] - numeric).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (model, data) = random_case(&mut rng);
    let cfg = TrainConfig { max_epochs: 50, max_iterations: 10, ..Default::default() };
    assert_eq!(train_bp(&model, &data, &cfg).unwrap(), train_bp(&model, &data, &cfg).unwrap());
    assert_eq!(train_lm(&model, &data, &cfg).unwrap(), train_lm(&model, &data, &cfg).unwrap());
}

#[test]
fn bp_never_ends_above_its_start_at_a_small_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..10 {
        let (model, data) = random_case(&mut rng);
        let cfg = TrainConfig { learning_rate: 0.05, max_epochs: 200, ..Default::default() };
        let (_, trace) = train_bp(&model, &data, &cfg).unwrap();
        assert!(trace.final_mse().unwrap() <= trace.initial_mse().unwrap());
    }
}
