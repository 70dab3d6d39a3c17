use proptest::prelude::*;

use fedbargain::cost::{self, AccuracyLaw, CostTerms, UeProfile};
use fedbargain::data::{
    encode_idx_images, encode_idx_labels, gen_synthetic, load_idx, parse_idx_images, parse_idx_labels, partition,
    write_idx, Dataset, PartitionMode, PartitionSpec,
};
use fedbargain::fl::{aggregate, local_solve, loss_and_grad, AggregatorKind, ClientUpdate, ModelWeights, SolverConfig};
use fedbargain::game::{best_response, nash_lower_level, GameConfig};
use fedbargain::harness::{default_scenario, parse_config};

fn profile() -> impl Strategy<Value = UeProfile> {
    (
        0.5e9..3.5e9f64,
        2e5..3e6f64,
        10u64..800,
        0.05..=1.0f64,
        0.0..1.0f64,
        0.05..1.0f64,
        0.1..3.0f64,
    )
        .prop_map(|(f, c, d, tau, we, wt, s)| UeProfile {
            id: 0,
            cpu_freq: f,
            eff_capacitance: 1e-28,
            cycles_per_sample: c,
            data_size: d,
            comm_time_norm: tau,
            weight_energy: we,
            weight_time: wt,
            cost_sensitivity: s,
        })
}

fn theta() -> impl Strategy<Value = f64> {
    0.01..0.99f64
}

proptest! {
    #[test]
    fn accuracy_laws_move_in_opposite_directions(a in theta(), b in theta()) {
        let law = AccuracyLaw::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cost::local_iterations(hi, &law).unwrap() <= cost::local_iterations(lo, &law).unwrap());
        prop_assert!(cost::global_rounds(hi, &law).unwrap() >= cost::global_rounds(lo, &law).unwrap());
    }

    #[test]
    fn session_cost_is_linear_in_sensitivity(p in profile(), t in theta(), k in 0.0..50.0f64) {
        let law = AccuracyLaw::default();
        let base = cost::session_cost(&p, t, &law).unwrap();
        let scaled = UeProfile { cost_sensitivity: p.cost_sensitivity * k, ..p.clone() };
        let got = cost::session_cost(&scaled, t, &law).unwrap();
        prop_assert!((got - k * base).abs() <= 1e-12 * (k * base).abs().max(1e-300));
    }

    #[test]
    fn energy_times_time_is_linear_in_frequency(p in profile()) {
        let cd = p.cycles_per_sample * p.data_size as f64;
        let expected = p.eff_capacitance * cd * cd * p.cpu_freq;
        let got = cost::local_iter_energy(&p) * cost::local_iter_time(&p);
        prop_assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn per_round_cost_never_negative(p in profile(), t in theta()) {
        let law = AccuracyLaw::default();
        let terms = CostTerms::of(&p);
        prop_assert!(terms.per_round(t, &law).unwrap() >= 0.0);
        prop_assert!(terms.session(t, &law).unwrap() >= terms.per_round(t, &law).unwrap() * p.cost_sensitivity);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn best_response_non_increasing_in_reward(p in profile(), a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let cfg = GameConfig::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t_lo = best_response(&p, lo, &cfg).unwrap().theta;
        let t_hi = best_response(&p, hi, &cfg).unwrap().theta;
        prop_assert!(t_hi <= t_lo + cfg.follower_tol, "theta({hi}) = {t_hi} > theta({lo}) = {t_lo}");
    }

    #[test]
    fn best_response_non_increasing_in_comm_time(p in profile(), r in 0.0..10.0f64, a in 0.05..=1.0f64, b in 0.05..=1.0f64) {
        let cfg = GameConfig::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let at = |tau: f64| best_response(&UeProfile { comm_time_norm: tau, ..p.clone() }, r, &cfg).unwrap().theta;
        prop_assert!(at(hi) <= at(lo) + cfg.follower_tol);
    }

    #[test]
    fn reward_and_sensitivity_scale_together(p in profile(), r in 0.5..10.0f64, c in 0.2..5.0f64) {
        let cfg = GameConfig { reward_max: 100.0, ..Default::default() };
        let base = best_response(&p, r, &cfg).unwrap();
        let scaled_profile = UeProfile { cost_sensitivity: p.cost_sensitivity * c, ..p.clone() };
        let scaled = best_response(&scaled_profile, r * c, &cfg).unwrap();
        prop_assert!((base.theta - scaled.theta).abs() <= 1e-5, "{} vs {}", base.theta, scaled.theta);
        prop_assert!((scaled.utility - c * base.utility).abs() <= 1e-6 * (1.0 + scaled.utility.abs()));
    }

    #[test]
    fn lower_level_is_deterministic_and_ordered(ps in prop::collection::vec(profile(), 1..6), r in 0.0..10.0f64) {
        let cfg = GameConfig::default();
        let a = nash_lower_level(&ps, r, &cfg).unwrap();
        let b = nash_lower_level(&ps, r, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        for (p, got) in ps.iter().zip(&a) {
            prop_assert_eq!(best_response(p, r, &cfg).unwrap(), *got);
        }
    }

    #[test]
    fn best_response_stays_in_bounds(p in profile(), r in 0.0..10.0f64) {
        let cfg = GameConfig::default();
        let b = best_response(&p, r, &cfg).unwrap();
        prop_assert!(b.theta >= cfg.law.theta_min && b.theta <= cfg.law.theta_max);
    }
}

fn updates() -> impl Strategy<Value = Vec<ClientUpdate>> {
    prop::collection::vec((1usize..500, 0.0..5.0f64, -3.0..3.0f64), 1..8).prop_map(|v| {
        v.into_iter()
            .map(|(size, loss, x)| ClientUpdate {
                weights: ModelWeights::from_values(2, 1, vec![x, -x, 2.0 * x, 1.0]).unwrap(),
                shard_size: size,
                local_loss: loss,
            })
            .collect()
    })
}

fn kind() -> impl Strategy<Value = AggregatorKind> {
    prop_oneof![
        Just(AggregatorKind::FedAvg),
        (0.0..2.0f64).prop_map(|mu| AggregatorKind::FedProx { mu }),
        (0.0..4.0f64).prop_map(|q| AggregatorKind::FairWeighted { q }),
    ]
}

proptest! {
    #[test]
    fn aggregation_weights_form_a_distribution(ups in updates(), kind in kind()) {
        let agg = aggregate(&ups, &kind).unwrap();
        let total: f64 = agg.coefficients.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(agg.coefficients.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn identical_models_aggregate_to_themselves(ups in updates(), kind in kind()) {
        let same: Vec<ClientUpdate> = ups
            .iter()
            .map(|u| ClientUpdate { weights: ups[0].weights.clone(), ..u.clone() })
            .collect();
        let agg = aggregate(&same, &kind).unwrap();
        prop_assert!(agg.weights.max_abs_diff(&ups[0].weights) <= 1e-12);
    }

    #[test]
    fn zero_parameters_reduce_to_fedavg(ups in updates()) {
        let avg = aggregate(&ups, &AggregatorKind::FedAvg).unwrap();
        for kind in [AggregatorKind::FedProx { mu: 0.0 }, AggregatorKind::FairWeighted { q: 0.0 }] {
            prop_assert_eq!(&aggregate(&ups, &kind).unwrap(), &avg);
        }
    }
}

fn small_dataset() -> impl Strategy<Value = Dataset> {
    (2usize..5, 1usize..5, 0u64..1000).prop_flat_map(|(k, d, seed)| {
        (k * 3..60usize).prop_map(move |n| gen_synthetic(k, d, n, 2.0, seed).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ridge_term_is_additive(ds in small_dataset(), l2 in 0.0..1.0f64, seed in 0u64..100) {
        let shard = ds.as_shard();
        let n = ds.num_classes() * (ds.dim() + 1);
        let values: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 17) as f64 / 8.0 - 1.0).collect();
        let w = ModelWeights::from_values(ds.num_classes(), ds.dim(), values).unwrap();
        let (with, _) = loss_and_grad(&w, &shard, l2).unwrap();
        let (without, _) = loss_and_grad(&w, &shard, 0.0).unwrap();
        prop_assert!((with - without - 0.5 * l2 * w.norm_sq()).abs() <= 1e-12 * (1.0 + with.abs()));
    }

    #[test]
    fn local_descent_never_increases_objective(ds in small_dataset(), theta in 0.01..0.99f64, mu in prop::option::of(0.0..1.0f64)) {
        let shard = ds.as_shard();
        let start = ModelWeights::zeros(ds.num_classes(), ds.dim());
        let anchor = start.clone();
        let prox = mu.map(|mu| fedbargain::fl::Prox { mu, anchor: &anchor });
        let out = local_solve(&start, &shard, theta, &SolverConfig::default(), prox).unwrap();
        for w in out.objectives.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "objective rose from {} to {}", w[0], w[1]);
        }
        prop_assert!(out.ratio <= theta || out.capped);
    }

    #[test]
    fn partition_covers_every_sample_once(ds in small_dataset(), m in 1usize..4, seed in 0u64..50, dirichlet in any::<bool>()) {
        let mode = if dirichlet { PartitionMode::Dirichlet { alpha: 1.0 } } else { PartitionMode::Iid };
        let spec = PartitionSpec { mode, num_clients: m, seed };
        let shards = match partition(&ds, &spec) {
            Ok(s) => s,
            Err(_) if dirichlet => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert_eq!(shards.len(), m);
        let mut all: Vec<usize> = shards.iter().flat_map(|s| s.indices.iter().copied()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
        for s in &shards {
            prop_assert!(!s.is_empty());
            for (i, &idx) in s.indices.iter().enumerate() {
                prop_assert_eq!(s.labels()[i], ds.labels()[idx]);
                prop_assert_eq!(s.row(i), ds.row(idx));
            }
        }
        if !dirichlet {
            let sizes: Vec<usize> = shards.iter().map(|s| s.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn partition_is_deterministic(ds in small_dataset(), seed in 0u64..50) {
        let spec = PartitionSpec { mode: PartitionMode::Iid, num_clients: 2, seed };
        prop_assert_eq!(partition(&ds, &spec).unwrap(), partition(&ds, &spec).unwrap());
    }
}

proptest! {
    #[test]
    fn idx_bytes_round_trip(count in 0usize..6, rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let pixels: Vec<u8> = (0..count * rows * cols).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 13) as u8).collect();
        let labels: Vec<u8> = (0..count).map(|i| (seed >> (i % 8)) as u8).collect();
        let img = parse_idx_images(&encode_idx_images(&pixels, count, rows, cols), "img").unwrap();
        prop_assert_eq!((img.count, img.rows, img.cols), (count, rows, cols));
        prop_assert_eq!(img.pixels, pixels);
        prop_assert_eq!(parse_idx_labels(&encode_idx_labels(&labels), "lbl").unwrap(), labels);
    }

    #[test]
    fn idx_files_round_trip_quantized_datasets(n in 2usize..12, seed in any::<u64>()) {
        let features: Vec<f64> = (0..n * 4).map(|i| ((seed.wrapping_add(i as u64 * 31)) % 256) as f64 / 255.0).collect();
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let ds = Dataset::new(features, labels, 2, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&ds, 2, 2, &ip, &lp).unwrap();
        prop_assert_eq!(load_idx(&ip, &lp).unwrap(), ds);
    }

    #[test]
    fn config_survives_json_round_trip(seed in any::<u64>(), beta in 1.0..100.0f64, grid in 2usize..400) {
        let mut cfg = default_scenario();
        cfg.seed = seed;
        cfg.game.beta = beta;
        cfg.game.leader_grid = grid;
        let text = serde_json::to_string(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back, cfg);
    }
}
