use super::*;
use crate::geometry::{angle_difference, link_geometry};
use crate::large_scale::{total_path_loss, AttenuationConfig, ShadowingState};
use crate::params::{params_for, ClusterDelayModel, IntraDelayModel};
use crate::types::ChannelCondition::{Los, Nlos};
use approx::assert_relative_eq;
use proptest::prelude::*;

const DRAWS: usize = 100_000;

fn rng() -> RngStream {
    RngStream::from_seed(7)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs.iter().copied());
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn subpath(delay_ns: f64, power_mw: f64, phase: f64) -> Subpath {
    Subpath {
        cluster: 0,
        index: 0,
        intra_delay_ns: 0.0,
        delay_ns,
        power_mw,
        member_power_mw: power_mw,
        merged_count: 1,
        phases: [phase, 0.0, 0.0, 0.0],
        departure: Direction::new(10.0, 80.0),
        arrival: Direction::new(200.0, 100.0),
        aod_lobe: 0,
        aoa_lobe: 0,
        xpd_db: [0.0; 3],
        doppler_hz: 0.0,
    }
}

fn realization(scenario: Scenario, condition: ChannelCondition, f: f64, seed: u64) -> ChannelRealization {
    let params = params_for(scenario, condition, f).unwrap();
    let h = if scenario.is_indoor() { 3.0 } else { 35.0 };
    let geom = link_geometry([0.0, 0.0, h], [60.0, 80.0, 1.5], [1.0, 0.0, 0.0]).unwrap();
    let carrier = CarrierConfig::new(f, 800e6).unwrap();
    let mut r = RngStream::from_seed(seed);
    let mut shadow = ShadowingState::for_params(&params).unwrap();
    let pl = total_path_loss(&params, &geom, &AttenuationConfig::default(), &mut shadow, &mut r).unwrap();
    generate_realization(&params, &geom, &carrier, &pl, &SmallScaleConfig::default(), &mut r).unwrap()
}

#[test]
fn rma_has_one_cluster() {
    let p = params_for(Scenario::RMa, Los, 28.0).unwrap();
    let mut r = rng();
    assert!((0..1000).all(|_| gen_num_time_clusters(&p, &mut r).unwrap() == 1));
}

#[test]
fn umi_cluster_count_mean() {
    let p = params_for(Scenario::UMi, Los, 28.0).unwrap();
    let mut r = rng();
    let m = mean((0..DRAWS).map(|_| gen_num_time_clusters(&p, &mut r).unwrap() as f64));
    assert!((m - 3.5).abs() < 0.05, "{m}");
}

#[test]
fn inh_cluster_count_mean() {
    let p = params_for(Scenario::InH, Los, 140.0).unwrap();
    let mut r = rng();
    let m = mean((0..DRAWS).map(|_| gen_num_time_clusters(&p, &mut r).unwrap() as f64));
    assert!((m - 1.9).abs() < 0.05, "{m}");
}

#[test]
fn subpath_count_supports() {
    let mut r = rng();
    let rma = params_for(Scenario::RMa, Nlos, 28.0).unwrap();
    assert!((0..10_000).all(|_| matches!(gen_num_subpaths(&rma, &mut r).unwrap(), 1 | 2)));

    let umi = params_for(Scenario::UMi, Los, 28.0).unwrap();
    let mut seen = [false; 31];
    for _ in 0..DRAWS {
        let m = gen_num_subpaths(&umi, &mut r).unwrap() as usize;
        assert!((1..=30).contains(&m));
        seen[m] = true;
    }
    assert!(seen[1..].iter().all(|&s| s));
}

#[test]
fn inh_subpath_count_is_pure_discrete_exponential() {
    let p = params_for(Scenario::InH, Los, 140.0).unwrap();
    let mut r = rng();
    let ones = (0..DRAWS).filter(|_| gen_num_subpaths(&p, &mut r).unwrap() == 1).count() as f64 / DRAWS as f64;
    // P(ceil(Exp(1.4)) = 1); a point mass at 1 would push this up
    let expected = 1.0 - (-1.0f64 / 1.4).exp();
    assert!((ones - expected).abs() < 0.01, "{ones} vs {expected}");
}

#[test]
fn high_band_subpath_count_is_discrete_exponential() {
    let p = params_for(Scenario::UMi, Los, 140.0).unwrap();
    assert!(matches!(p.subpath_count_model().unwrap(), crate::params::SubpathCountModel::DiscreteExponential { .. }));
}

#[test]
fn first_intra_delay_is_zero() {
    let mut r = rng();
    for (s, c, f) in [(Scenario::UMi, Los, 28.0), (Scenario::InH, Nlos, 60.0), (Scenario::InF, Los, 140.0)] {
        let p = params_for(s, c, f).unwrap();
        for m in 1..10 {
            let d = gen_intra_cluster_delays(&p, 400e6, m, &mut r).unwrap();
            assert_eq!(d.delays_ns[0], 0.0);
            assert!(d.delays_ns.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn power_law_closed_form() {
    let d = power_law_delays(3, 800e6, 0.2);
    assert_eq!(d[0], 0.0);
    assert_relative_eq!(d[2], 2.5f64.powf(1.2), epsilon = 1e-12);
    assert_relative_eq!(d[1], 1.25f64.powf(1.2), epsilon = 1e-12);
}

#[test]
fn inf_intra_delay_gamma_mean() {
    let p = params_for(Scenario::InF, Los, 140.0).unwrap();
    let IntraDelayModel::Gamma { shape, scale_ns } = p.intra_delay_model().unwrap() else {
        panic!("InF uses the gamma family");
    };
    let mut r = rng();
    let d = draw_intra_delays(p.intra_delay_model().unwrap(), DRAWS, 1e9, &mut r);
    let m = mean(d.raw_ns.iter().copied());
    assert!((m / (shape * scale_ns) - 1.0).abs() < 0.02, "{m}");
    assert_relative_eq!(shape * scale_ns, 1.2 * 16.3, epsilon = 1e-9);
}

#[test]
fn cluster_delays_respect_mti() {
    let p = params_for(Scenario::UMi, Nlos, 28.0).unwrap();
    let mut r = rng();
    let single = gen_cluster_delays(&p, &[5.0], None, &mut r).unwrap();
    assert!(single[0] >= p.mti_ns);
    let last = [3.0, 10.0, 0.0, 7.5];
    for _ in 0..1000 {
        let tau = gen_cluster_delays(&p, &last, None, &mut r).unwrap();
        for n in 1..tau.len() {
            assert!(tau[n] - (tau[n - 1] + last[n - 1]) >= p.mti_ns - 1e-9);
        }
    }
}

#[test]
fn umi_cluster_gap_mean() {
    let p = params_for(Scenario::UMi, Los, 140.0).unwrap();
    let model = p.cluster_delay_model(None).unwrap();
    assert_eq!(model, ClusterDelayModel::Exponential { mean_ns: 80.0 });
    let mut r = rng();
    let m = mean((0..DRAWS).map(|_| draw_cluster_gap(model, &mut r)));
    assert!((m / 80.0 - 1.0).abs() < 0.02, "{m}");
}

#[test]
fn lognormal_gap_has_requested_mean() {
    let mut r = rng();
    let model = ClusterDelayModel::LogNormal {
        mean_ns: 14.6,
        log_sigma: 0.5,
    };
    let m = mean((0..DRAWS).map(|_| draw_cluster_gap(model, &mut r)));
    assert!((m / 14.6 - 1.0).abs() < 0.02, "{m}");
}

#[test]
fn cluster_powers_normalize() {
    let mut p = params_for(Scenario::UMi, Los, 28.0).unwrap();
    let mut r = rng();
    let (one, _) = gen_cluster_powers(&p, &[40.0], 0.25, &mut r).unwrap();
    assert_eq!(one, vec![0.25]);
    let (many, _) = gen_cluster_powers(&p, &[30.0, 90.0, 400.0, 2000.0], 1e-9, &mut r).unwrap();
    assert_relative_eq!(many.iter().sum::<f64>(), 1e-9, max_relative = 1e-12);

    p.cluster_shadow_db = Some(0.0);
    let (pw, _) = gen_cluster_powers(&p, &[30.0, 90.0], 1.0, &mut r).unwrap();
    assert!(pw[1] < pw[0]);
    let gamma = p.cluster_power().unwrap().0;
    assert_relative_eq!(pw[1] / pw[0], (-60.0 / gamma).exp(), epsilon = 1e-12);
}

#[test]
fn subpath_power_decay() {
    let mut p = params_for(Scenario::InH, Los, 140.0).unwrap();
    let mut r = rng();
    let (one, _) = gen_subpath_powers(&p, &[0.0], 3.0, &mut r).unwrap();
    assert_eq!(one, vec![3.0]);
    p.subpath_shadow_db = Some(0.0);
    let (pw, _) = gen_subpath_powers(&p, &[0.0, 2.0, 5.0], 1.0, &mut r).unwrap();
    assert_relative_eq!(pw[1] / pw[0], (-1.0f64).exp(), epsilon = 1e-12);
    assert!(pw[2] < pw[1]);
}

#[test]
fn phases_in_range_and_uncorrelated() {
    let mut r = rng();
    let draws: Vec<[f64; 4]> = (0..DRAWS).map(|_| gen_subpath_phases(&mut r)).collect();
    assert!(draws.iter().flatten().all(|p| (0.0..std::f64::consts::TAU).contains(p)));
    let col = |k: usize| draws.iter().map(|d| d[k]).collect::<Vec<_>>();
    for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        let (x, y) = (col(a), col(b));
        let (mx, my) = (mean(x.iter().copied()), mean(y.iter().copied()));
        let cov = mean(x.iter().zip(&y).map(|(u, v)| (u - mx) * (v - my)));
        let corr = cov / (std_dev(&x) * std_dev(&y));
        assert!(corr.abs() < 0.02, "{corr}");
    }
    let mut again = rng();
    assert_eq!(gen_subpath_phases(&mut again), draws[0]);
}

#[test]
fn rma_lobe_count_mean() {
    let p = params_for(Scenario::RMa, Los, 28.0).unwrap();
    let mut r = rng();
    let m = mean((0..DRAWS).map(|_| gen_spatial_lobes(&p, LobeKind::Departure, &mut r).unwrap().len() as f64));
    assert!((m - 2.0).abs() < 0.05, "{m}");
}

#[test]
fn lobes_lie_in_their_sectors() {
    let p = params_for(Scenario::UMa, Nlos, 28.0).unwrap();
    let mut r = rng();
    for _ in 0..5000 {
        let lobes = gen_spatial_lobes(&p, LobeKind::Arrival, &mut r).unwrap();
        let l = lobes.len() as f64;
        for lobe in &lobes {
            let i = lobe.index as f64;
            assert!(lobe.mean.azimuth_deg >= 360.0 * i / l && lobe.mean.azimuth_deg < 360.0 * (i + 1.0) / l);
        }
    }
}

#[test]
fn lobe_elevation_mean() {
    let p = params_for(Scenario::UMi, Los, 140.0).unwrap();
    let mut r = rng();
    let mut el = Vec::new();
    while el.len() < DRAWS {
        el.extend(gen_spatial_lobes(&p, LobeKind::Departure, &mut r).unwrap().iter().map(|l| l.mean.elevation_deg));
    }
    let m = mean(el.iter().copied());
    assert!((m + 3.2).abs() < 0.1, "{m}");
}

#[test]
fn zero_offsets_sit_on_lobe_means() {
    let mut p = params_for(Scenario::UMi, Nlos, 28.0).unwrap();
    p.aod_offset_std_deg = Some(0.0);
    p.zod_offset_std_deg = Some(0.0);
    p.aoa_offset_std_deg = Some(0.0);
    p.zoa_offset_std_deg = Some(0.0);
    let mut r = rng();
    let aod = gen_spatial_lobes(&p, LobeKind::Departure, &mut r).unwrap();
    let aoa = gen_spatial_lobes(&p, LobeKind::Arrival, &mut r).unwrap();
    for _ in 0..100 {
        let a = assign_subpath_angles(&p, &aod, &aoa, &mut r).unwrap();
        assert_relative_eq!(a.departure.azimuth_deg, aod[a.aod_lobe].mean.azimuth_deg);
        assert_relative_eq!(
            a.arrival.elevation_deg,
            aoa[a.aoa_lobe].mean.elevation_deg.clamp(-ELEVATION_LIMIT_DEG, ELEVATION_LIMIT_DEG)
        );
    }
}

#[test]
fn arrival_azimuth_offset_std() {
    let p = params_for(Scenario::UMi, Nlos, 28.0).unwrap();
    let lobe = SpatialLobe {
        kind: LobeKind::Arrival,
        index: 0,
        mean: NyuAngles::new(180.0, 0.0),
    };
    let mut r = rng();
    let offsets: Vec<f64> = (0..DRAWS)
        .map(|_| assign_subpath_angles(&p, &[lobe], &[lobe], &mut r).unwrap().arrival.azimuth_deg - 180.0)
        .collect();
    let s = std_dev(&offsets);
    assert!((s / 7.5 - 1.0).abs() < 0.02, "{s}");
}

#[test]
fn lobe_ids_in_range() {
    let p = params_for(Scenario::UMa, Nlos, 28.0).unwrap();
    let mut r = rng();
    for _ in 0..1000 {
        let aod = gen_spatial_lobes(&p, LobeKind::Departure, &mut r).unwrap();
        let aoa = gen_spatial_lobes(&p, LobeKind::Arrival, &mut r).unwrap();
        let a = assign_subpath_angles(&p, &aod, &aoa, &mut r).unwrap();
        assert!(a.aod_lobe < aod.len() && a.aoa_lobe < aoa.len());
        assert!(a.departure.elevation_deg.abs() <= ELEVATION_LIMIT_DEG);
    }
}

#[test]
fn absolute_delays() {
    let geom = link_geometry([0.0, 0.0, 0.0], [300.0, 0.0, 0.0], [0.0; 3]).unwrap();
    assert_relative_eq!(propagation_delay_ns(&geom), 1000.692, epsilon = 1e-3);
    let mut sps = vec![subpath(0.0, 1.0, 0.0), subpath(0.0, 1.0, 0.0)];
    sps[1].intra_delay_ns = 4.0;
    absolute_propagation_times(&geom, &mut sps, &[30.0]);
    assert_relative_eq!(sps[0].delay_ns, propagation_delay_ns(&geom) + 30.0);
    assert!(sps[1].delay_ns > sps[0].delay_ns);
}

#[test]
fn bandwidth_merging() {
    let sps = vec![subpath(100.0, 1.0, 0.0), subpath(100.5, 1.0, 0.0), subpath(200.0, 1.0, 0.0)];
    assert_eq!(bandwidth_adjust(&sps, f64::INFINITY), sps);

    let merged = bandwidth_adjust(&sps, 1e9);
    assert_eq!(merged.len(), 2);
    assert_relative_eq!(merged[0].power_mw, 4.0, epsilon = 1e-12);
    assert_relative_eq!(merged[0].member_power_mw, 2.0);
    assert_relative_eq!(merged[0].delay_ns, 100.25);
    assert_eq!(merged[0].merged_count, 2);

    let opposite = vec![subpath(100.0, 1.0, 0.0), subpath(100.5, 1.0, std::f64::consts::PI)];
    let merged = bandwidth_adjust(&opposite, 1e9);
    assert_eq!(merged.len(), 1);
    assert!(merged[0].power_mw < 1e-20);
}

#[test]
fn los_alignment() {
    let geom = link_geometry([0.0, 0.0, 1.5], [50.0, 0.0, 1.5], [0.0; 3]).unwrap();
    let mut sps = vec![subpath(0.0, 1.0, 0.0), subpath(1.0, 1.0, 0.0)];
    sps[1].departure = Direction::new(20.0, 80.0);
    let before = sps.clone();
    align_los(&mut sps, &geom, Los);
    let dep = gcs_to_nyu(sps[0].departure);
    let arr = gcs_to_nyu(sps[0].arrival);
    assert!(angle_difference(dep.azimuth_deg, 90.0).abs() < 1e-9);
    assert!(dep.elevation_deg.abs() < 1e-9);
    assert!(angle_difference(arr.azimuth_deg - dep.azimuth_deg, 180.0).abs() < 1e-9);
    // relative structure is kept
    let rel_before = angle_difference(before[1].departure.azimuth_deg, before[0].departure.azimuth_deg);
    let rel_after = angle_difference(sps[1].departure.azimuth_deg, sps[0].departure.azimuth_deg);
    assert!((rel_before - rel_after).abs() < 1e-9);

    let mut nlos = before.clone();
    align_los(&mut nlos, &geom, Nlos);
    assert_eq!(nlos, before);
}

#[test]
fn pruning() {
    let dbm = |p: f64| 10f64.powf(p / 10.0);
    let sps = vec![subpath(0.0, dbm(0.0), 0.0), subpath(1.0, dbm(-10.0), 0.0), subpath(2.0, dbm(-40.0), 0.0)];
    let kept = prune_dynamic_range(&sps, 30.0, false);
    assert_eq!(kept.len(), 2);
    assert_eq!(prune_dynamic_range(&sps, 0.0, false).len(), 1);
    assert_eq!(prune_dynamic_range(&sps, f64::INFINITY, false).len(), 3);

    let weak_first = vec![subpath(0.0, dbm(-50.0), 0.0), subpath(1.0, dbm(0.0), 0.0)];
    assert_eq!(prune_dynamic_range(&weak_first, 30.0, false).len(), 1);
    assert_eq!(prune_dynamic_range(&weak_first, 30.0, true).len(), 2);
}

#[test]
fn xpd_draws() {
    let mut r = rng();
    let mut sps = vec![subpath(0.0, 1.0, 0.0); 10];
    gen_xpd(&mut sps, &XpdConfig { mean_db: 10.0, std_db: 0.0 }, &mut r);
    for sp in &sps {
        for k in sp.xpd_linear() {
            assert_relative_eq!(k, 10.0, epsilon = 1e-12);
        }
    }
    let mut many = vec![subpath(0.0, 1.0, 0.0); DRAWS / 3];
    let cfg = XpdConfig::default();
    gen_xpd(&mut many, &cfg, &mut r);
    let m = mean(many.iter().flat_map(|sp| sp.xpd_db));
    assert!((m / cfg.mean_db - 1.0).abs() < 0.01, "{m}");
    assert!(many.iter().flat_map(|sp| sp.xpd_linear()).all(|k| k > 0.0));
}

#[test]
fn rma_realization_shape() {
    for seed in 0..200 {
        let r = realization(Scenario::RMa, Los, 28.0, seed);
        assert_eq!(r.clusters.len(), 1);
        assert!(r.clusters[0].subpaths.len() <= 2);
    }
}

#[test]
fn realization_is_deterministic() {
    let a = realization(Scenario::UMi, Nlos, 73.0, 11);
    let b = realization(Scenario::UMi, Nlos, 73.0, 11);
    assert_eq!(a, b);
    let c = realization(Scenario::UMi, Nlos, 73.0, 12);
    assert_ne!(a, c);
}

#[test]
fn umi_nlos_cluster_count() {
    let m = mean((0..1000).map(|s| realization(Scenario::UMi, Nlos, 140.0, s).clusters.len() as f64));
    assert!((m - 2.0).abs() < 0.1, "{m}");
}

#[test]
fn power_is_conserved_before_pruning() {
    for scenario in Scenario::ALL {
        for condition in ChannelCondition::ALL {
            for seed in 0..20 {
                let r = realization(scenario, condition, 28.0 + seed as f64 * 5.0, seed);
                let rel = (r.generated_power_mw() - r.received_power_mw).abs() / r.received_power_mw;
                assert!(rel < 1e-9, "{scenario} {condition}: {rel}");
                let kept: f64 = r.subpaths.iter().map(|sp| sp.member_power_mw).sum();
                assert!(kept <= r.received_power_mw * (1.0 + 1e-12));
                for c in &r.clusters {
                    let s: f64 = c.subpaths.iter().map(|sp| sp.power_mw).sum();
                    assert_relative_eq!(s, c.power_mw, max_relative = 1e-9);
                }
            }
        }
    }
}

#[test]
fn los_first_subpath_is_aligned() {
    for seed in 0..50 {
        let r = realization(Scenario::UMa, Los, 28.0, seed);
        let g = r.geometry;
        let dep = gcs_to_nyu(r.subpaths[0].departure);
        assert!(angle_difference(dep.azimuth_deg, g.bearing_deg).abs() < 1e-6);
        assert!((dep.elevation_deg - g.elevation_deg).abs() < 1e-6);
        let arr = gcs_to_nyu(r.subpaths[0].arrival);
        assert!(angle_difference(arr.azimuth_deg, g.bearing_deg + 180.0).abs() < 1e-6);
        assert!((arr.elevation_deg + g.elevation_deg).abs() < 1e-6);
    }
}

#[test]
fn delay_spread_and_angular_spread_are_sane() {
    let r = realization(Scenario::UMi, Nlos, 28.0, 3);
    assert!(r.rms_delay_spread_ns() >= 0.0);
    let s = r.rms_azimuth_spread_deg(LobeKind::Arrival);
    assert!(s.is_finite() && s >= 0.0);
}

#[test]
fn mismatched_carrier_is_rejected() {
    let params = params_for(Scenario::UMi, Los, 28.0).unwrap();
    let geom = link_geometry([0.0, 0.0, 10.0], [50.0, 0.0, 1.5], [0.0; 3]).unwrap();
    let carrier = CarrierConfig::new(30.0, 100e6).unwrap();
    let pl = PathLossBreakdown {
        total: 100.0,
        ..Default::default()
    };
    let mut r = rng();
    assert!(generate_realization(&params, &geom, &carrier, &pl, &SmallScaleConfig::default(), &mut r).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn realization_invariants(seed in any::<u64>(), s in 0usize..5, los in any::<bool>(), f in 0.5f64..150.0) {
        let scenario = Scenario::ALL[s];
        let condition = if los { Los } else { Nlos };
        let r = realization(scenario, condition, f, seed);
        prop_assert!(!r.subpaths.is_empty());
        for sp in r.subpaths.iter().chain(r.clusters.iter().flat_map(|c| &c.subpaths)) {
            prop_assert!((0.0..=180.0).contains(&sp.departure.zenith_deg));
            prop_assert!((0.0..=180.0).contains(&sp.arrival.zenith_deg));
            prop_assert!((0.0..360.0).contains(&sp.departure.azimuth_deg));
            prop_assert!((0.0..360.0).contains(&sp.arrival.azimuth_deg));
            prop_assert!(sp.phases.iter().all(|p| (0.0..std::f64::consts::TAU).contains(p)));
            prop_assert!(sp.power_mw.is_finite() && sp.power_mw >= 0.0);
        }
        for c in r.clusters.windows(2) {
            prop_assert!(c[1].delay_ns > c[0].delay_ns);
        }
    }
}
