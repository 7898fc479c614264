//! Statistical behaviour of the generators and maps at moderate scale.

use orderflow_core::brokerage::{apply_map, correlated_broker_assignment, BrokerProfile, BrokerageMap};
use orderflow_core::decomposition::{autocorrelation, autocorrelation_at, decompose, pair_statistics};
use orderflow_core::event_model::{
    export_to_path, filter_inactive, gini, gini_of_counts, ingest_path, AgentRegistry, EventLog,
};
use orderflow_core::rng::seeded;
use orderflow_core::simulators::frequencies::{azn_like_profile, variance, zipf};
use orderflow_core::simulators::{
    build_preferential_attachment, degree_tail_exponent, simulate_imitation, simulate_public_info, simulate_splitting,
    ImitationParams, PublicInfoParams, SplittingModelParams,
};
use orderflow_core::stats::fit_power_law_points;
use rand::Rng;

mod common;
use common::iid_log;

#[test]
fn public_info_pairs_are_independent() {
    let freqs = zipf(10, 1.0);
    let log = simulate_public_info(&PublicInfoParams {
        frequencies: freqs.clone(),
        run_tail: 1.5,
        n_min: 1,
        events: 200_000,
        seed: 3,
    })
    .unwrap();
    let ps = pair_statistics(&log, 5).unwrap();
    for tau in [1, 5] {
        for i in 0..10 {
            for j in 0..10 {
                // Standard deviation of the pair frequency is below 3e-4 here.
                assert!(ps.p_tilde(tau, i, j).abs() < 2e-3, "tau {tau} ({i},{j})");
            }
        }
    }
}

#[test]
fn uniform_public_info_splits_one_in_m() {
    let log = simulate_public_info(&PublicInfoParams {
        frequencies: vec![0.02; 50],
        run_tail: 1.5,
        n_min: 1,
        events: 200_000,
        seed: 8,
    })
    .unwrap();
    let s = decompose(&log, 50).unwrap().mean_splitting_ratio(1, 50).unwrap();
    assert!((s - 0.02).abs() < 0.01, "{s}");
}

#[test]
fn dynamic_brokerage_factorizes_pairs() {
    let log = simulate_splitting(&SplittingModelParams {
        investors: 200,
        beta: 1.5,
        v_min: 1,
        pool_size: 5,
        events: 300_000,
        seed: 2,
    })
    .unwrap();
    let profile = BrokerProfile::new(zipf(8, 0.8)).unwrap();
    let brokers = apply_map(&log, &BrokerageMap::dynamic(profile.clone(), 11)).unwrap();
    let ps = pair_statistics(&brokers, 1).unwrap();
    let p = profile.frequencies();
    for i in 0..8 {
        assert!((ps.frequency(i) - p[i]).abs() < 3e-3);
        for j in 0..8 {
            assert!((ps.p(1, i, j) - p[i] * p[j]).abs() < 2e-3);
        }
    }
}

#[test]
fn splitting_model_is_all_splitting() {
    let log = simulate_splitting(&SplittingModelParams {
        investors: 10_000,
        beta: 1.5,
        v_min: 1,
        pool_size: 5,
        events: 300_000,
        seed: 6,
    })
    .unwrap();
    let s = decompose(&log, 50).unwrap().mean_splitting_ratio(1, 50).unwrap();
    assert!((s - 1.0).abs() < 0.1, "{s}");
}

#[test]
fn frozen_imitation_has_no_own_memory() {
    let net = build_preferential_attachment(500, 1).unwrap();
    let log = simulate_imitation(
        &net,
        &ImitationParams {
            investors: 500,
            p: 0.0,
            events: 100_000,
            seed: 1,
        },
    )
    .unwrap();
    // Without copying every investor repeats its initial sign, so all same-agent
    // covariances vanish and whatever persistence remains comes from co-activity.
    let d = decompose(&log, 20).unwrap();
    let c = autocorrelation(&log, 20).unwrap();
    for k in 0..20 {
        assert!(d.term1_split[k].abs() < 1e-15);
        assert_eq!(d.c[k], c[k]);
    }
}

#[test]
fn iid_herding_stays_in_noise_band() {
    let n = 100_000;
    let log = iid_log(4, n, 20);
    let band = 5.0 / (n as f64).sqrt();
    let d = decompose(&log, 20).unwrap();
    for k in 0..20 {
        assert!(d.c_herd[k].abs() < band && d.c_split[k].abs() < band);
    }
    let mean: f64 = log.signs().iter().map(|&s| s as f64).sum::<f64>() / n as f64;
    assert!(mean.abs() < band);
}

#[test]
fn filter_matches_histogram() {
    let mut rng = seeded(9);
    let n = 5000;
    let agents: Vec<u32> = (0..n).map(|_| (rng.random::<f64>().powi(3) * 40.0) as u32).collect();
    let signs: Vec<i8> = (0..n).map(|t| if t % 3 == 0 { -1 } else { 1 }).collect();
    let log = EventLog::from_columns(signs.clone(), agents.clone(), None, AgentRegistry::numbered("a", 40)).unwrap();
    let mut hist = [0u64; 40];
    for &a in &agents {
        hist[a as usize] += 1;
    }
    let filtered = filter_inactive(&log, 50).unwrap();
    let kept: Vec<usize> = (0..n).filter(|&t| hist[agents[t] as usize] >= 50).collect();
    assert_eq!(filtered.len(), kept.len());
    assert_eq!(filtered.num_agents(), hist.iter().filter(|&&c| c >= 50).count());
    for (k, &t) in kept.iter().enumerate() {
        assert_eq!(filtered.signs()[k], signs[t]);
        let label = filtered.registry().labels()[filtered.agents()[k] as usize].clone();
        assert_eq!(label, format!("a{}", agents[t]));
    }
}

#[test]
fn gini_of_one_dominant_agent() {
    assert!((gini_of_counts(&[1, 1, 1, 97]) - 0.72).abs() < 1e-12);
    assert_eq!(gini_of_counts(&[5, 5, 5]), 0.0);
}

#[test]
fn million_event_round_trip() {
    let log = simulate_splitting(&SplittingModelParams {
        investors: 1000,
        beta: 1.5,
        v_min: 1,
        pool_size: 5,
        events: 1_000_000,
        seed: 0,
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    export_to_path(&log, &path).unwrap();
    let back = ingest_path(&path).unwrap();
    assert_eq!(back.signs(), log.signs());
    assert_eq!(back.agents(), log.agents());
    assert_eq!(back.registry(), log.registry());
    assert_eq!(back.metadata.get("beta"), Some("1.5"));
}

#[test]
fn attachment_tree_invariants() {
    let net = build_preferential_attachment(3000, 5).unwrap();
    assert_eq!(net.len(), 3000);
    assert_eq!(net.edge_count(), 2999);
    assert!(net.is_connected());
    assert_eq!(net.degrees().iter().sum::<usize>(), 2 * 2999);
    for (v, p) in net.parents().iter().enumerate().skip(1) {
        assert!((p.unwrap() as usize) < v);
    }
    assert!(net.degrees().into_iter().max().unwrap() > 30);
}

#[test]
fn bijective_fixed_map_only_renames() {
    let log = iid_log(12, 20_000, 30);
    let mut perm: Vec<u32> = (0..30).collect();
    perm.reverse();
    let freqs: Vec<f64> = log.agent_counts().iter().map(|&c| c as f64 / 20_000.0).collect();
    // Broker k receives exactly investor 29 − k, so its profile is that investor's share.
    let profile = BrokerProfile::new(freqs.iter().rev().cloned().collect()).unwrap();
    let map = BrokerageMap::fixed(perm, profile).unwrap();
    let brokers = apply_map(&log, &map).unwrap();
    let a = decompose(&log, 40).unwrap();
    let b = decompose(&brokers, 40).unwrap();
    assert_eq!(a.c, b.c);
    for k in 0..40 {
        // Only the order in which agents are summed changes.
        assert!((a.c_split[k] - b.c_split[k]).abs() < 1e-15);
        assert!((a.c_herd[k] - b.c_herd[k]).abs() < 1e-15);
    }
    let identity = BrokerageMap::fixed((0..30).collect(), BrokerProfile::new(freqs).unwrap()).unwrap();
    assert_eq!(decompose(&apply_map(&log, &identity).unwrap(), 40).unwrap(), a);
    assert!(variance(map.profile().frequencies()) > 0.0);
}

#[test]
fn near_unanimous_imitation_decays_with_degree_tail() {
    // The CCDF tail exponent is one less than the density exponent returned by the fit.
    let eta = (0..20u64)
        .map(|seed| degree_tail_exponent(&build_preferential_attachment(10_000, seed).unwrap(), 5).unwrap() - 1.0)
        .sum::<f64>()
        / 20.0;
    assert!((1.4..2.1).contains(&eta), "eta {eta}");

    let mut lags: Vec<usize> = (0..=40).map(|k| 10f64.powf(k as f64 * 3.0 / 40.0).round() as usize).collect();
    lags.dedup();
    let taus: Vec<f64> = lags.iter().map(|&t| t as f64).collect();
    let gammas: Vec<f64> = (0..3u64)
        .map(|seed| {
            let net = build_preferential_attachment(10_000, seed).unwrap();
            let params = ImitationParams {
                investors: 10_000,
                p: 0.99,
                events: 1_000_000,
                seed,
            };
            let log = simulate_imitation(&net, &params).unwrap();
            let c = autocorrelation_at(&log, &lags).unwrap();
            fit_power_law_points(&taus, &c, 10.0, 1000.0).unwrap().gamma
        })
        .collect();
    let gamma = gammas.iter().sum::<f64>() / gammas.len() as f64;
    assert!((gamma - (eta - 1.0)).abs() <= 0.3, "gamma {gamma} vs eta - 1 = {}", eta - 1.0);
}

#[test]
fn frozen_imitation_signs_are_uncorrelated() {
    for seed in 0..3 {
        let net = build_preferential_attachment(10_000, seed).unwrap();
        let params = ImitationParams {
            investors: 10_000,
            p: 0.0,
            events: 1_000_000,
            seed,
        };
        let c = autocorrelation(&simulate_imitation(&net, &params).unwrap(), 1000).unwrap();
        let band = 3.0 / 1000.0;
        let inside = c.iter().filter(|x| x.abs() < band).count();
        assert!(inside >= 990, "seed {seed}: {inside}/1000 lags inside 3/sqrt(N)");
    }
}

#[test]
fn imitation_memory_is_positive_and_power_law() {
    let mut lags: Vec<usize> = (0..=40).map(|k| 10f64.powf(k as f64 * 3.0 / 40.0).round() as usize).collect();
    lags.dedup();
    let taus: Vec<f64> = lags.iter().map(|&t| t as f64).collect();
    for seed in 0..3 {
        let net = build_preferential_attachment(10_000, seed).unwrap();
        let params = ImitationParams {
            investors: 10_000,
            p: 0.9,
            events: 1_000_000,
            seed,
        };
        let log = simulate_imitation(&net, &params).unwrap();
        let c = autocorrelation(&log, 50).unwrap();
        assert!(c.iter().all(|&x| x > 0.0), "seed {seed}");
        // An exponential decay would give a far steeper log-log slope.
        let fit = fit_power_law_points(&taus, &autocorrelation_at(&log, &lags).unwrap(), 10.0, 1000.0).unwrap();
        assert!(fit.gamma > 0.0 && fit.gamma < 1.3, "seed {seed}: gamma {}", fit.gamma);
    }
}

#[test]
fn single_public_info_investor_only_splits() {
    let log = simulate_public_info(&PublicInfoParams {
        frequencies: vec![1.0],
        run_tail: 1.5,
        n_min: 1,
        events: 20_000,
        seed: 1,
    })
    .unwrap();
    let d = decompose(&log, 30).unwrap();
    for k in 0..30 {
        assert_eq!(d.c_herd[k], 0.0);
        assert!((d.c_split[k] - d.c[k]).abs() < 1e-12);
    }
}

#[test]
fn unrebalanced_correlated_map_draws_from_profile() {
    let profile = BrokerProfile::new(azn_like_profile()).unwrap();
    let m = 10_000;
    let investors = vec![1.0 / m as f64; m];
    let mut mean = vec![0.0; 50];
    for seed in 0..20 {
        let net = build_preferential_attachment(m, seed).unwrap();
        let map = correlated_broker_assignment(&net, &profile, 0.0, 100 + seed).unwrap();
        for (acc, f) in mean.iter_mut().zip(map.realized_frequencies(&investors).unwrap()) {
            *acc += f / 20.0;
        }
    }
    for (b, (&got, &want)) in mean.iter().zip(profile.frequencies()).enumerate() {
        let se = (want * (1.0 - want) / (20 * m) as f64).sqrt();
        assert!((got - want).abs() < 4.0 * se, "broker {b}: {got} vs {want}");
    }
}

#[test]
fn broker_correlation_raises_the_splitting_ratio() {
    let m = 2000;
    let profile = BrokerProfile::new(azn_like_profile()).unwrap();
    let phis = [0.0, 0.25, 0.5, 0.75, 1.0];
    let s_bar: Vec<f64> = phis
        .iter()
        .map(|&phi| {
            (0..5u64)
                .map(|seed| {
                    let net = build_preferential_attachment(m, seed).unwrap();
                    let params = ImitationParams {
                        investors: m,
                        p: 0.9,
                        events: 200_000,
                        seed,
                    };
                    let log = simulate_imitation(&net, &params).unwrap();
                    let map = correlated_broker_assignment(&net, &profile, phi, 50 + seed).unwrap();
                    let brokers = apply_map(&log, &map).unwrap();
                    decompose(&brokers, 50).unwrap().mean_splitting_ratio(1, 50).unwrap()
                })
                .sum::<f64>()
                / 5.0
        })
        .collect();
    assert!(s_bar.windows(2).all(|w| w[0] < w[1]), "{s_bar:?}");
    assert!((s_bar[4] - 1.0).abs() < 1e-9);
}

#[test]
fn concentrated_membership_matches_top_five_share() {
    // Tune a Zipf activity profile until the sampled log has G ≈ 0.87, then check that
    // the five most active members carry 40-50% of the trades.
    for members in [1000, 2000] {
        let sample = |s: f64| {
            simulate_public_info(&PublicInfoParams {
                frequencies: zipf(members, s),
                run_tail: 1.5,
                n_min: 1,
                events: 1_000_000,
                seed: 3,
            })
            .unwrap()
        };
        let (mut lo, mut hi) = (0.5, 2.5);
        for _ in 0..14 {
            let mid = 0.5 * (lo + hi);
            if gini(&sample(mid)) < 0.87 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let log = sample(0.5 * (lo + hi));
        assert!((gini(&log) - 0.87).abs() < 0.005);
        let mut counts = log.agent_counts();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let top5 = counts[..5].iter().sum::<u64>() as f64 / log.len() as f64;
        assert!((0.40..=0.50).contains(&top5), "{members} members: top-5 share {top5}");
    }
}
