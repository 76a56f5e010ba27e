use super::*;
use crate::channels::{gg_cdf, gg_ccdf, Detection, FtrParams, GammaGammaParams, TruncationPolicy, XI_INF};

fn caption(gbar: f64) -> (GammaGammaParams, FtrParams) {
    let gg = GammaGammaParams::from_mu_r(5.42, 3.8, 5.0263, Detection::Heterodyne, gbar).unwrap();
    let ftr = FtrParams::from_mean_snr(10.0, 2.0, 0.5, gbar).unwrap();
    (gg, ftr)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn fso_part_point_kernel_is_cdf() {
    let (gg, _) = caption(10.0);
    for &g in &[0.3, 3.0, 30.0] {
        let v = eval1(&kernel::fso_part(&gg, &Kernel::point(g), Side::Cdf)).unwrap().value;
        assert!(rel(v, gg_cdf(&gg, g).unwrap()) < 1e-9, "{g}: {v}");
        let c = eval1(&kernel::fso_part(&gg, &Kernel::point(g), Side::Ccdf)).unwrap().value;
        assert!(rel(c, gg_ccdf(&gg, g).unwrap()) < 1e-9);
    }
}

#[test]
fn ftr_part_point_kernel_is_cdf() {
    let (_, ftr) = caption(10.0);
    let mix = FtrMixture::new(&ftr, &TruncationPolicy::default()).unwrap();
    for &g in &[0.5, 5.0, 40.0] {
        let v = eval1(&kernel::ftr_part(&mix, &Kernel::point(g), Side::Cdf)).unwrap().value;
        assert!(rel(v, mix.cdf(g)) < 1e-9, "{g}: {v} vs {}", mix.cdf(g));
    }
}

#[test]
fn af_cdf_matches_oracle() {
    let (gg, ftr) = caption(10.0);
    let relay = RelayConfig::af(1.7).unwrap();
    let t = TruncationPolicy::default();
    for &g in &[1.0, 10.0] {
        let e = af_cdf(&gg, &ftr, &relay, g, &t).unwrap();
        let o = af_cdf_oracle_with(&gg, &ftr, &relay, g, &t).unwrap();
        assert!(rel(e.value, o.value) < 1e-4, "{g}: {} vs {}", e.value, o.value);
    }
}

#[test]
fn df_cdf_matches_oracle_and_dominates() {
    let (gg, ftr) = caption(10.0);
    let t = TruncationPolicy::default();
    for &g in &[0.1, 1.0, 10.0, 100.0] {
        let e = df_cdf(&gg, &ftr, g, &t).unwrap();
        let o = df_cdf_oracle_with(&gg, &ftr, g, &t).unwrap();
        assert!(rel(e.value, o.value) < 1e-6);
        assert!(e.value >= gg_cdf(&gg, g).unwrap() - 1e-15);
    }
}

#[test]
fn cdf_at_origin_is_zero() {
    let (gg, ftr) = caption(10.0);
    let t = TruncationPolicy::default();
    assert_eq!(af_cdf(&gg, &ftr, &RelayConfig::af(1.7).unwrap(), 0.0, &t).unwrap().value, 0.0);
    assert_eq!(df_cdf(&gg, &ftr, 0.0, &t).unwrap().value, 0.0);
}

#[test]
fn af_ber_matches_oracle_and_coherent_wins() {
    let (gg, ftr) = caption(100.0);
    let relay = RelayConfig::af(1.7).unwrap();
    let t = TruncationPolicy::default();
    let d = avg_ber(&gg, &ftr, &relay, &ModulationScheme::dbpsk(), &t).unwrap();
    let o = avg_ber_oracle(&gg, &ftr, &relay, &ModulationScheme::dbpsk(), &t).unwrap();
    assert!(rel(d.value, o.value) < 1e-3, "{} vs {}", d.value, o.value);
    let c = avg_ber(&gg, &ftr, &relay, &ModulationScheme::cbpsk(), &t).unwrap();
    assert!(c.value < d.value);
}

#[test]
fn df_ber_matches_oracle() {
    let (gg, ftr) = caption(100.0);
    let t = TruncationPolicy::default();
    let d = avg_ber(&gg, &ftr, &RelayConfig::Df, &ModulationScheme::dbpsk(), &t).unwrap();
    let o = avg_ber_oracle(&gg, &ftr, &RelayConfig::Df, &ModulationScheme::dbpsk(), &t).unwrap();
    assert!(rel(d.value, o.value) < 1e-3, "{} vs {}", d.value, o.value);
}

#[test]
fn capacity_matches_oracle() {
    let (gg, ftr) = caption(1000.0);
    let t = TruncationPolicy::default();
    let cap = CapacityMode::for_detection(Detection::Heterodyne);
    for relay in [RelayConfig::af(1.7).unwrap(), RelayConfig::Df] {
        let e = ergodic_capacity(&gg, &ftr, &relay, &cap, &t).unwrap();
        let o = ergodic_capacity_oracle(&gg, &ftr, &relay, &cap, &t).unwrap();
        assert!(rel(e.value, o.value) < 1e-3, "{}: {} vs {}", relay.name(), e.value, o.value);
    }
}

#[test]
fn effective_capacity_matches_oracle_and_orders_in_a() {
    let (gg, _) = caption(316.227766);
    let ftr = FtrParams::from_mean_snr(2.0, 2.0, 0.5, 316.227766).unwrap();
    let relay = RelayConfig::af(1.7).unwrap();
    let t = TruncationPolicy::default();
    let e1 = effective_capacity(&gg, &ftr, &relay, &EffectiveCapacityParams::new(1.0).unwrap(), &t).unwrap();
    let o1 = effective_capacity_oracle(&gg, &ftr, &relay, &EffectiveCapacityParams::new(1.0).unwrap(), &t).unwrap();
    assert!(rel(e1.value, o1.value) < 1e-3, "{} vs {}", e1.value, o1.value);
    let e2 = effective_capacity(&gg, &ftr, &relay, &EffectiveCapacityParams::new(2.0).unwrap(), &t).unwrap();
    let e05 = effective_capacity(&gg, &ftr, &relay, &EffectiveCapacityParams::new(0.5).unwrap(), &t).unwrap();
    assert!(e2.value <= e05.value);
}

#[test]
fn effective_capacity_small_a_approaches_ergodic() {
    let (gg, ftr) = caption(100.0);
    let relay = RelayConfig::Df;
    let t = TruncationPolicy::default();
    let ec = effective_capacity(&gg, &ftr, &relay, &EffectiveCapacityParams::new(1e-3).unwrap(), &t).unwrap();
    let c = ergodic_capacity(&gg, &ftr, &relay, &CapacityMode { c: 1.0 }, &t).unwrap();
    assert!(rel(ec.value, c.value) < 0.01, "{} vs {}", ec.value, c.value);
}

#[test]
fn diversity_orders() {
    let (gg, _) = caption(10.0);
    assert_eq!(diversity_order(&gg, &RelayConfig::af(1.0).unwrap()), 2.0);
    assert_eq!(diversity_order(&gg, &RelayConfig::Df), 1.0);
    let strong = GammaGammaParams::from_mu_r(5.42, 3.8, 0.893, Detection::Heterodyne, 10.0).unwrap();
    assert!((diversity_order(&strong, &RelayConfig::af(1.0).unwrap()) - 0.893f64.powi(2)).abs() < 1e-12);
    let no_pe = GammaGammaParams::from_mu_r(3.446, 1.032, XI_INF, Detection::ImDd, 10.0).unwrap();
    assert!((diversity_order(&no_pe, &RelayConfig::af(1.0).unwrap()) - 0.516).abs() < 1e-12);
}

#[test]
fn af_asymptote_is_tangent() {
    let relay = RelayConfig::af(1.7).unwrap();
    let t = TruncationPolicy::default();
    let (gg, ftr) = caption(1e5);
    let e = af_cdf(&gg, &ftr, &relay, 1.0, &t).unwrap();
    let (a, exp) = af_cdf_asymptotic(&gg, &ftr, &relay, 1.0, &t).unwrap();
    assert!(rel(a.value, e.value) < 0.05, "{} vs {}", a.value, e.value);
    assert_eq!(exp.leading_order, 2.0);
}

#[test]
fn df_asymptote_is_tangent() {
    let t = TruncationPolicy::default();
    let (gg, ftr) = caption(1e5);
    let e = df_cdf(&gg, &ftr, 1.0, &t).unwrap();
    let (a, exp) = df_cdf_asymptotic(&gg, &ftr, 1.0, &t).unwrap();
    assert!(rel(a.value, e.value) < 0.05, "{} vs {}", a.value, e.value);
    assert_eq!(exp.leading_order, 1.0);
}

#[test]
fn ber_asymptote_is_tangent() {
    let t = TruncationPolicy::default();
    let (gg, ftr) = caption(1e5);
    for relay in [RelayConfig::af(1.7).unwrap(), RelayConfig::Df] {
        let e = avg_ber(&gg, &ftr, &relay, &ModulationScheme::dbpsk(), &t).unwrap();
        let (a, _) = avg_ber_asymptotic(&gg, &ftr, &relay, &ModulationScheme::dbpsk(), &t).unwrap();
        assert!(rel(a.value, e.value) < 0.05, "{}: {} vs {}", relay.name(), a.value, e.value);
    }
}

#[test]
fn parameter_validation() {
    assert!(RelayConfig::af(0.0).is_err());
    assert!(ModulationScheme::new(1.0, 0.0, vec![1.0]).is_err());
    assert!(EffectiveCapacityParams::new(-1.0).is_err());
    let (gg, ftr) = caption(10.0);
    assert!(af_cdf(&gg, &ftr, &RelayConfig::Df, 1.0, &TruncationPolicy::default()).is_err());
    assert!(df_cdf(&gg, &ftr, -1.0, &TruncationPolicy::default()).is_err());
}

#[test]
fn oracle_survives_heavy_lower_tail() {
    let t = TruncationPolicy::default();
    let gg = GammaGammaParams::from_mu_r(5.42, 3.8, 0.893, Detection::ImDd, 10.0).unwrap();
    let ftr = FtrParams::from_mean_snr(10.0, 2.0, 0.5, 10.0).unwrap();
    let relay = RelayConfig::af(1.7).unwrap();
    let e = af_cdf(&gg, &ftr, &relay, 1.0, &t).unwrap();
    let o = af_cdf_oracle_with(&gg, &ftr, &relay, 1.0, &t).unwrap();
    assert!(rel(e.value, o.value) < 1e-6, "{} vs {}", e.value, o.value);
}
