//! Monte Carlo estimates against the closed forms.

use dualhop::channels::{Detection, FtrParams, GammaGammaParams, TruncationPolicy};
use dualhop::link_metrics::{avg_ber, ergodic_capacity, outage, CapacityMode, ModulationScheme, RelayConfig};
use dualhop::monte_carlo::{estimate_metrics, McConfig, McRequest};

fn main() -> dualhop::Result<()> {
    let trunc = TruncationPolicy::default();
    let cfg = McConfig::new(1_000_000, 7);
    let cap = CapacityMode::for_detection(Detection::Heterodyne);
    let req = McRequest {
        gamma_th: Some(1.0),
        modulations: vec![ModulationScheme::dbpsk()],
        capacity: Some(cap),
        ec_a: vec![],
    };
    for relay in [RelayConfig::af(1.7)?, RelayConfig::Df] {
        for db in [0.0, 10.0, 20.0] {
            let g = 10f64.powf(db / 10.0);
            let gg = GammaGammaParams::from_mu_r(3.446, 1.032, 0.893, Detection::Heterodyne, g)?;
            let ftr = FtrParams::from_mean_snr(10.0, 2.0, 0.5, g)?;
            let mc = estimate_metrics(&cfg, &gg, &ftr, &relay, &req)?;
            let pairs = [
                ("outage", outage(&gg, &ftr, &relay, 1.0, &trunc)?.value, mc.outage.unwrap()),
                ("ber", avg_ber(&gg, &ftr, &relay, &ModulationScheme::dbpsk(), &trunc)?.value, mc.ber[0]),
                ("capacity", ergodic_capacity(&gg, &ftr, &relay, &cap, &trunc)?.value, mc.capacity.unwrap()),
            ];
            for (name, exact, est) in pairs {
                println!(
                    "{} {db:>4} dB {name:<9} exact {exact:.6e}  mc {:.6e} +- {:.1e}  z {:+.2}",
                    relay.name(),
                    est.mean,
                    est.std_error,
                    est.z_score(exact)
                );
            }
        }
    }
    Ok(())
}
