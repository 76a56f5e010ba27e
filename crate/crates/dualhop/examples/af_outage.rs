//! AF outage probability: exact, high-SNR asymptote and integral oracle.
//!
//! Equal average SNRs on both hops, heterodyne detection, C_R = 1.7.

use dualhop::channels::{Detection, FtrParams, GammaGammaParams, TruncationPolicy};
use dualhop::link_metrics::{af_cdf_asymptotic, af_cdf_oracle_with, diversity_order, outage, RelayConfig};

fn main() -> dualhop::Result<()> {
    let relay = RelayConfig::af(1.7)?;
    let trunc = TruncationPolicy::default();
    for (label, a, b, xi) in [("moderate, negligible PE", 5.42, 3.8, 5.0263), ("strong, strong PE", 3.446, 1.032, 0.893)] {
        let gd = diversity_order(&GammaGammaParams::from_mu_r(a, b, xi, Detection::Heterodyne, 1.0)?, &relay);
        println!("{label} (diversity order {gd:.4})");
        println!("{:>6} {:>14} {:>14} {:>14} {:>6}", "dB", "exact", "asymptotic", "oracle", "N");
        for db in (0..=50).step_by(10) {
            let g = 10f64.powf(db as f64 / 10.0);
            let gg = GammaGammaParams::from_mu_r(a, b, xi, Detection::Heterodyne, g)?;
            let ftr = FtrParams::from_mean_snr(10.0, 2.0, 0.5, g)?;
            let e = outage(&gg, &ftr, &relay, 1.0, &trunc)?;
            let (asy, _) = af_cdf_asymptotic(&gg, &ftr, &relay, 1.0, &trunc)?;
            let o = af_cdf_oracle_with(&gg, &ftr, &relay, 1.0, &trunc)?;
            println!("{db:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>6}", e.value, asy.value, o.value, e.series_terms_used);
        }
    }
    Ok(())
}
