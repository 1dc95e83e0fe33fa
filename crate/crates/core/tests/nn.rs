//! Hand-checked forward passes, gradients and training behaviour.

use finsurr::kinematics::{Architecture, FeatureSchema, Variant};
use finsurr::nn::{
    gradient_check, loss_and_gradient, mse, random_search, train, DenseConfig, DenseNet, History,
    LstmConfig, LstmNet, NetConfig, Network, Range, SearchSpace, Sequence, SurrogateModel,
};
use finsurr::preprocess::NormStats;
use finsurr::seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn random_records(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn random_sequences(rng: &mut ChaCha8Rng, n: usize, len: usize, dim: usize) -> Vec<Sequence> {
    (0..n)
        .map(|_| {
            let inputs = random_records(rng, len, dim);
            let targets = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Sequence::new(inputs, targets).unwrap()
        })
        .collect()
}

fn dense_config(
    input_dim: usize,
    layers: usize,
    nodes: usize,
    lr: f64,
    epochs: usize,
    seed: u64,
) -> NetConfig {
    NetConfig::Dense(DenseConfig {
        input_dim,
        layers,
        nodes_per_layer: nodes,
        dropout_fraction: 0.0,
        learning_rate: lr,
        batch_size: 16,
        epochs,
        seed,
    })
}

#[test]
fn dense_forward_by_hand() {
    let mut net = DenseNet::zeros(2, 1, 2).unwrap();
    // Hidden weights row-major, hidden bias, head weights, head bias.
    net.params = vec![0.5, -1.0, 0.25, 2.0, 0.1, -0.2, 1.5, -0.7, 0.3];
    let x = [0.4, -0.3];
    let h0 = (0.5 * 0.4 + -1.0 * -0.3 + 0.1f64).tanh();
    let h1 = (0.25 * 0.4 + 2.0 * -0.3 - 0.2f64).tanh();
    let expected = 1.5 * h0 - 0.7 * h1 + 0.3;
    assert!((net.forward(&x).unwrap() - expected).abs() < 1e-12);
    // tanh(0.6) = 0.537049566998..., tanh(-0.7) = -0.604367777117...
    assert!(
        (expected - (1.5 * 0.537_049_566_998_035 + 0.7 * 0.604_367_777_117_1 + 0.3)).abs() < 1e-12
    );
}

#[test]
fn lstm_two_steps_by_hand() {
    let mut net = LstmNet::zeros(1, 1).unwrap();
    // Rows i, f, g, o over [x, h]; then four biases; head weight and bias.
    let (wi, ui, wf, uf, wg, ug, wo, uo) = (0.5, -0.3, 0.2, 0.4, -0.6, 0.1, 0.7, 0.2);
    let (bi, bf, bg, bo) = (0.1, 1.0, 0.0, -0.1);
    let (v, c0) = (1.3, -0.2);
    net.params = vec![wi, ui, wf, uf, wg, ug, wo, uo, bi, bf, bg, bo, v, c0];
    let xs = [0.8, -0.5];
    let (mut h, mut c) = (0.0f64, 0.0f64);
    let mut expected = Vec::new();
    for x in xs {
        let i = sigmoid(wi * x + ui * h + bi);
        let f = sigmoid(wf * x + uf * h + bf);
        let g = (wg * x + ug * h + bg).tanh();
        let o = sigmoid(wo * x + uo * h + bo);
        c = f * c + i * g;
        h = o * c.tanh();
        expected.push(v * h + c0);
    }
    let out = net.forward(&[vec![xs[0]], vec![xs[1]]]).unwrap();
    for (a, b) in out.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // First step spelled out: i = s(0.5), g = tanh(-0.48), o = s(0.46).
    let first = 1.3 * sigmoid(0.46) * (sigmoid(0.5) * (-0.48f64).tanh()).tanh() - 0.2;
    assert!((out[0] - first).abs() < 1e-12);
}

#[test]
fn dense_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let net = dense_config(8, 3, 16, 0.01, 1, 4).build().unwrap();
    let data = vec![Sequence::new(
        random_records(&mut rng, 20, 8),
        (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap()];
    let report = gradient_check(&net, &data).unwrap();
    assert_eq!(report.n_params, DenseNet::n_params_for(8, 3, 16));
    assert!(report.max_rel_error < 1e-4, "{report:?}");
}

#[test]
fn lstm_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let config = NetConfig::Recurrent(LstmConfig {
        input_dim: 4,
        hidden_units: 8,
        dropout_fraction: 0.0,
        learning_rate: 0.01,
        batch_size: 2,
        epochs: 1,
        seed: 3,
    });
    let net = config.build().unwrap();
    let data = random_sequences(&mut rng, 3, 5, 4);
    let report = gradient_check(&net, &data).unwrap();
    assert_eq!(report.n_params, LstmNet::n_params_for(4, 8));
    assert!(report.max_rel_error < 1e-4, "{report:?}");
}

#[test]
fn perfect_fit_has_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let dense = dense_config(5, 2, 8, 0.01, 1, 1).build().unwrap();
    let lstm = NetConfig::desk(Architecture::Recurrent, 5).build().unwrap();
    for net in [dense, lstm] {
        let inputs = random_records(&mut rng, 12, 5);
        let targets = net.predict(&inputs).unwrap();
        let data = vec![Sequence::new(inputs, targets).unwrap()];
        let (loss, grad) = loss_and_gradient(&net, &data).unwrap();
        assert!(loss < 1e-28);
        assert!(grad.iter().all(|g| g.abs() < 1e-14));
    }
}

#[test]
fn dense_learns_a_linear_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let make = |rng: &mut ChaCha8Rng, n: usize| {
        let xs = random_records(rng, n, 3);
        let ys = xs
            .iter()
            .map(|x| 0.5 * x[0] - 0.3 * x[1] + 0.2 * x[2] + 0.1)
            .collect();
        vec![Sequence::new(xs, ys).unwrap()]
    };
    let train_set = make(&mut rng, 256);
    let val_set = make(&mut rng, 64);
    let trained = train(&dense_config(3, 1, 16, 0.01, 200, 2), &train_set, &val_set).unwrap();
    let val = mse(&trained.network, &val_set).unwrap();
    assert!(val < 1e-3, "validation mse {val}");
    assert_eq!(trained.history.val_mse.len(), 200);
    assert!((trained.history.final_val().unwrap() - val).abs() < 1e-15);
}

#[test]
fn zero_learning_rate_leaves_weights_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let data = random_sequences(&mut rng, 4, 6, 3);
    let dense = dense_config(3, 2, 8, 0.0, 5, 9);
    let lstm = NetConfig::Recurrent(LstmConfig {
        input_dim: 3,
        hidden_units: 6,
        dropout_fraction: 0.1,
        learning_rate: 0.0,
        batch_size: 2,
        epochs: 5,
        seed: 9,
    });
    for config in [dense, lstm] {
        let initial = config.build().unwrap();
        let trained = train(&config, &data, &data).unwrap();
        assert_eq!(trained.network.params(), initial.params());
    }
}

#[test]
fn training_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let data = random_sequences(&mut rng, 6, 8, 4);
    let mut configs = vec![dense_config(4, 2, 8, 0.01, 5, 21)];
    let mut lstm = LstmConfig::desk(4);
    lstm.hidden_units = 6;
    lstm.epochs = 5;
    lstm.seed = 21;
    configs.push(NetConfig::Recurrent(lstm));
    for config in configs {
        let a = train(&config, &data, &data).unwrap();
        let b = train(&config, &data, &data).unwrap();
        assert_eq!(a.network, b.network);
        assert_eq!(a.history, b.history);
        let mut other = config.clone();
        other.set_seed(22);
        let c = train(&other, &data, &data).unwrap();
        assert_ne!(a.network, c.network);
    }
}

#[test]
fn dropout_is_unbiased_in_expectation() {
    let mut init = ChaCha8Rng::seed_from_u64(16);
    let dense = DenseNet::init(6, 1, 32, &mut init).unwrap();
    // Probe with an input whose output is clearly away from zero.
    let (x, exact) = loop {
        let x: Vec<f64> = (0..6).map(|_| init.gen_range(-1.0..1.0)).collect();
        let y = dense.forward(&x).unwrap();
        if y.abs() > 0.3 {
            break (x, y);
        }
    };
    let mut rng = seed::rng(1);
    let n = 10_000;
    let mean = (0..n)
        .map(|_| dense.forward_dropout(&x, 0.2, &mut rng).unwrap())
        .sum::<f64>()
        / n as f64;
    assert!(
        ((mean - exact) / exact).abs() < 0.02,
        "dense {mean} vs {exact}"
    );

    let mut lstm = LstmNet::init(3, 16, &mut init).unwrap();
    // A head bias keeps the probe outputs away from zero.
    *lstm.params.last_mut().unwrap() = 0.5;
    let seq = random_records(&mut init, 4, 3);
    let exact = lstm.forward(&seq).unwrap();
    let mut sums = vec![0.0; seq.len()];
    for _ in 0..n {
        for (s, y) in sums
            .iter_mut()
            .zip(lstm.forward_dropout(&seq, 0.2, &mut rng).unwrap())
        {
            *s += y;
        }
    }
    for (s, e) in sums.iter().zip(&exact) {
        let mean = s / n as f64;
        assert!(e.abs() > 0.05, "degenerate probe output {e}");
        assert!(((mean - e) / e).abs() < 0.02, "lstm {mean} vs {e}");
    }
}

#[test]
fn search_samples_inside_the_space_and_sorts() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let train_set = random_sequences(&mut rng, 6, 8, 3);
    let val_set = random_sequences(&mut rng, 2, 8, 3);
    let layers = Range::new(1, 2);
    let nodes = Range::new(4, 12);
    let dropout = Range::new(0.0, 0.2);
    let batch = Range::new(4, 16);
    let lr = Range::new(1e-3, 1e-2);
    let space = SearchSpace::Dense {
        layers,
        nodes,
        dropout,
        batch_size: batch,
        learning_rate: lr,
        epochs: 3,
    };
    let trials = random_search(&space, 8, 3, &train_set, &val_set, 99).unwrap();
    assert_eq!(trials.len(), 8);
    let mut indices: Vec<usize> = trials.iter().map(|t| t.index).collect();
    indices.sort_unstable();
    assert_eq!(indices, (0..8).collect::<Vec<_>>());
    for w in trials.windows(2) {
        assert!(w[0].val_mse <= w[1].val_mse);
    }
    for t in &trials {
        let NetConfig::Dense(c) = &t.config else {
            panic!("wrong architecture")
        };
        assert!(layers.contains(c.layers) && nodes.contains(c.nodes_per_layer));
        assert!(dropout.contains(c.dropout_fraction) && batch.contains(c.batch_size));
        assert!(lr.contains(c.learning_rate));
        assert_eq!((c.epochs, c.input_dim), (3, 3));
        assert!(t.failure.is_none());
        assert!((t.history.final_val().unwrap() - t.val_mse).abs() < 1e-15);
    }
    let again = random_search(&space, 8, 3, &train_set, &val_set, 99).unwrap();
    for (a, b) in trials.iter().zip(&again) {
        assert_eq!((a.index, a.val_mse), (b.index, b.val_mse));
    }
}

#[test]
fn model_round_trips_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let schema = FeatureSchema::new(Variant::Baseline, Architecture::Dense, 0);
    let records = random_records(&mut rng, 40, schema.len());
    let coeffs: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..2.0)).collect();
    let norm = NormStats::fit(records.iter().map(Vec::as_slice), &coeffs).unwrap();
    let config = dense_config(schema.len(), 2, 8, 0.01, 1, 5);
    let network: Network = config.build().unwrap();
    let model =
        SurrogateModel::new(schema, config, network, norm, None, History::default()).unwrap();

    let dir = std::env::temp_dir().join(format!("finsurr-nn-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.json");
    model.save(&path).unwrap();
    let loaded = SurrogateModel::load(&path).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(
        loaded.predict_coefficients(&records).unwrap(),
        model.predict_coefficients(&records).unwrap()
    );

    // A checkpoint whose network does not fit its schema is rejected.
    let mut broken = model.clone();
    broken.network = dense_config(schema.len() + 1, 2, 8, 0.01, 1, 5)
        .build()
        .unwrap();
    std::fs::write(&path, serde_json::to_string(&broken).unwrap()).unwrap();
    assert!(SurrogateModel::load(&path).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
