use gaussord_core::datasets::{gen_blobs, gen_linear_order_with_items};
use gaussord_core::eval::triplet_error;
use gaussord_core::gaussian::{wasserstein2_sq, wasserstein2_sq_grad};
use gaussord_core::optim::Adam;
use gaussord_core::trainer::{self, energy, hinge_loss, SIGMA_FLOOR};
use gaussord_core::triplet::{
    budget_from_rule, sample_uniform, sample_with_config, GraphOracle, PointOracle, TRAIN_FRACTION,
};
use gaussord_core::{EncoderGrads, EncoderParams, SamplingConfig, SamplingStrategy, TrainConfig, Triplet};

fn blob_sample(n: usize, budget: usize, noise: f64, seed: u64) -> (Vec<Triplet>, Vec<Triplet>) {
    let ds = gen_blobs(n, seed).unwrap();
    let cfg = SamplingConfig {
        budget_multiplier: 1.0,
        noise_rate: noise,
        strategy: SamplingStrategy::Uniform,
        seed,
    };
    let s = sample_with_config(&cfg, budget, &PointOracle::new(&ds), None).unwrap();
    (s.train, s.test)
}

fn quick_config(seed: u64) -> TrainConfig {
    TrainConfig {
        max_epochs: 15,
        batch_size: 128,
        seed,
        ..TrainConfig::default()
    }
}

fn batch_loss(p: &EncoderParams, batch: &[Triplet]) -> f64 {
    let zs: Vec<_> = (0..p.n).map(|i| p.forward(i).unwrap()).collect();
    batch.iter().map(|t| hinge_loss(t, &zs, 1.0).unwrap()).sum::<f64>() / batch.len() as f64
}

fn batch_grads(p: &EncoderParams, batch: &[Triplet]) -> EncoderGrads {
    let zs: Vec<_> = (0..p.n).map(|i| p.forward(i).unwrap()).collect();
    let mut grads = EncoderGrads::zeros_like(p);
    let m = batch.len() as f64;
    for t in batch {
        if hinge_loss(t, &zs, 1.0).unwrap() <= 0.0 {
            continue;
        }
        let y = f64::from(t.label) / m;
        let gij = wasserstein2_sq_grad(&zs[t.i], &zs[t.j]).unwrap();
        let gik = wasserstein2_sq_grad(&zs[t.i], &zs[t.k]).unwrap();
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, z)| y * (x - z)).collect::<Vec<_>>();
        let sc = |a: &[f64], s: f64| a.iter().map(|x| x * s).collect::<Vec<_>>();
        p.backward_into(t.i, &sub(&gij.mu_x, &gik.mu_x), &sub(&gij.sigma_x, &gik.sigma_x), &mut grads)
            .unwrap();
        p.backward_into(t.j, &sc(&gij.mu_y, y), &sc(&gij.sigma_y, y), &mut grads).unwrap();
        p.backward_into(t.k, &sc(&gik.mu_y, -y), &sc(&gik.sigma_y, -y), &mut grads).unwrap();
    }
    grads
}

#[test]
fn one_adam_step_lowers_the_batch_loss() {
    for seed in 0..20 {
        let (train, _) = blob_sample(30, 200, 0.0, seed);
        let batch = &train[..64];
        let mut p = EncoderParams::init(30, 2, 50, 50, seed).unwrap();
        let before = batch_loss(&p, batch);
        let grads = batch_grads(&p, batch);
        let mut adam = Adam::new(&p, 1e-4, 0.0);
        adam.step(&mut p, &grads);
        let after = batch_loss(&p, batch);
        assert!(after < before, "seed {seed}: {before} -> {after}");
    }
}

#[test]
fn training_is_deterministic_and_keeps_codes_fixed() {
    let (train, test) = blob_sample(60, 2000, 0.0, 3);
    let cfg = quick_config(3);
    let init = EncoderParams::init(60, cfg.dim, cfg.input_dim, cfg.hidden_dim, gaussord_core::rng::derive(3, 10))
        .unwrap();
    let a = trainer::train(&train, &test, 60, &cfg).unwrap();
    let b = trainer::train(&train, &test, 60, &cfg).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.embeddings, b.embeddings);
    assert_eq!(a.report.epoch_loss, b.report.epoch_loss);
    assert_eq!(a.params.codes_checksum(), init.codes_checksum());
    let c = trainer::train(&train, &test, 60, &quick_config(4)).unwrap();
    assert_ne!(a.embeddings, c.embeddings);
}

#[test]
fn variances_stay_inside_the_clamp() {
    let (train, test) = blob_sample(60, 2000, 0.3, 8);
    let cfg = TrainConfig {
        clamp: 0.5,
        learning_rate: 0.05,
        ..quick_config(8)
    };
    let out = trainer::train(&train, &test, 60, &cfg).unwrap();
    for z in &out.embeddings {
        assert!(z.sigma().iter().all(|&s| (SIGMA_FLOOR..=0.5).contains(&s)), "{:?}", z.sigma());
    }
}

#[test]
fn dirac_mode_pins_variances_to_the_floor() {
    let (train, test) = blob_sample(40, 1000, 0.0, 2);
    let cfg = TrainConfig {
        dirac: true,
        ..quick_config(2)
    };
    let out = trainer::train(&train, &test, 40, &cfg).unwrap();
    assert!(out.embeddings.iter().all(|z| z.sigma().iter().all(|&s| s == SIGMA_FLOOR)));
}

#[test]
fn loss_curve_is_recorded_per_epoch() {
    let (train, test) = blob_sample(60, 3000, 0.0, 1);
    let out = trainer::train(&train, &test, 60, &quick_config(1)).unwrap();
    let r = &out.report;
    assert_eq!(r.epoch_loss.len(), r.epochs);
    assert_eq!(r.epoch_train_error.len(), r.epochs);
    assert!(r.final_loss() < r.epoch_loss[0]);
    let recomputed = triplet_error(&test, &out.embeddings, energy).unwrap();
    assert_eq!(r.held_out_error, Some(recomputed));
}

#[test]
fn small_blobs_embed_well() {
    let n = 150;
    let budget = budget_from_rule(n, 2, 4.0).unwrap();
    let (train, test) = blob_sample(n, budget, 0.0, 1);
    let cfg = TrainConfig {
        batch_size: 512,
        learning_rate: 0.005,
        patience: 20,
        max_epochs: 300,
        seed: 1,
        ..TrainConfig::default()
    };
    let out = trainer::train(&train, &test, n, &cfg).unwrap();
    let err = out.report.held_out_error.unwrap();
    assert!(err < 0.1, "held-out error {err}");
}

#[test]
fn rejects_out_of_range_triplets() {
    let t = vec![Triplet::new(0, 1, 5, 1).unwrap()];
    assert!(trainer::train(&t, &[], 3, &quick_config(0)).is_err());
}

#[test]
fn budget_rule_drives_sample_sizes() {
    // ⌈4 · 4 · 500 · ln 500⌉
    assert_eq!(budget_from_rule(500, 2, 4.0).unwrap(), 49_717);
    assert_eq!(budget_from_rule(1000, 2, 4.0).unwrap(), 110_525);
    let ds = gen_blobs(100, 0).unwrap();
    let cfg = SamplingConfig::default();
    let budget = budget_from_rule(100, 2, cfg.budget_multiplier).unwrap();
    let s = sample_with_config(&cfg, budget, &PointOracle::new(&ds), None).unwrap();
    assert_eq!(s.train.len() + s.test.len(), budget);
    assert_eq!(s.train.len(), (TRAIN_FRACTION * budget as f64).ceil() as usize);
}

#[test]
fn noise_flips_about_the_requested_share() {
    let ds = gen_blobs(200, 4).unwrap();
    let oracle = PointOracle::new(&ds);
    let clean_cfg = SamplingConfig {
        noise_rate: 0.0,
        seed: 4,
        ..SamplingConfig::default()
    };
    let noisy_cfg = SamplingConfig {
        noise_rate: 0.2,
        ..clean_cfg.clone()
    };
    let clean = sample_with_config(&clean_cfg, 20_000, &oracle, None).unwrap();
    let noisy = sample_with_config(&noisy_cfg, 20_000, &oracle, None).unwrap();
    let flipped = clean.train.iter().zip(&noisy.train).filter(|(a, b)| a.label != b.label).count();
    let share = flipped as f64 / clean.train.len() as f64;
    assert!((share - 0.2).abs() < 0.015, "{share}");
    assert_eq!(clean.test, noisy.test);
}

#[test]
fn graph_hop_triplets_agree_with_hops() {
    let g = gen_linear_order_with_items(5, 3).unwrap();
    let oracle = GraphOracle::new(&g);
    let cfg = SamplingConfig {
        strategy: SamplingStrategy::GraphHop,
        seed: 2,
        ..SamplingConfig::default()
    };
    let s = sample_with_config(&cfg, 500, &oracle, Some(&oracle)).unwrap();
    for t in s.train.iter().chain(&s.test) {
        assert!(oracle.hops().hop(t.i, t.j).unwrap() < oracle.hops().hop(t.i, t.k).unwrap());
        assert_eq!(t.label, 1);
    }
    let uniform = sample_uniform(g.node_count(), 100, &oracle, 1).unwrap();
    assert_eq!(uniform.len(), 100);
}

#[test]
fn perfect_embedding_has_zero_error() {
    let ds = gen_blobs(50, 6).unwrap();
    let zs: Vec<_> = ds
        .rows()
        .map(|r| gaussord_core::GaussianEmbedding::dirac(r.to_vec()).unwrap())
        .collect();
    let t = sample_uniform(50, 500, &PointOracle::new(&ds), 6).unwrap();
    assert_eq!(triplet_error(&t, &zs, energy).unwrap(), 0.0);
    let w = wasserstein2_sq(&zs[0], &zs[1]).unwrap();
    assert!(w > 0.0);
}
