//! Ergodic and effective capacity, AF against DF.

use dualhop::channels::{Detection, FtrParams, GammaGammaParams, TruncationPolicy};
use dualhop::link_metrics::{effective_capacity, ergodic_capacity, CapacityMode, EffectiveCapacityParams, RelayConfig};

fn main() -> dualhop::Result<()> {
    let trunc = TruncationPolicy::default();
    let cap = CapacityMode::for_detection(Detection::Heterodyne);
    let relays = [("AF", RelayConfig::af(1.7)?), ("DF", RelayConfig::Df)];
    println!("{:>4} {:>10} {:>10}   effective capacity A = 0.5 / 1 / 5 (AF)", "dB", "C_AF", "C_DF");
    for db in (0..=40).step_by(5) {
        let g = 10f64.powf(db as f64 / 10.0);
        let gg = GammaGammaParams::from_mu_r(5.42, 3.8, 5.0263, Detection::Heterodyne, g)?;
        let ftr = FtrParams::from_mean_snr(10.0, 2.0, 0.5, g)?;
        let c: Vec<f64> =
            relays.iter().map(|(_, r)| ergodic_capacity(&gg, &ftr, r, &cap, &trunc).map(|m| m.value)).collect::<Result<_, _>>()?;
        let mut ec = Vec::new();
        for a in [0.5, 1.0, 5.0] {
            ec.push(effective_capacity(&gg, &ftr, &relays[0].1, &EffectiveCapacityParams::new(a)?, &trunc)?.value);
        }
        println!("{db:>4} {:>10.5} {:>10.5}   {:.5} / {:.5} / {:.5}", c[0], c[1], ec[0], ec[1], ec[2]);
    }
    Ok(())
}
