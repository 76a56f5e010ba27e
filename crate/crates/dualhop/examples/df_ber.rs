//! DF average BER for DBPSK and coherent BPSK, heterodyne vs IM/DD.

use dualhop::channels::{Detection, FtrParams, GammaGammaParams, TruncationPolicy};
use dualhop::link_metrics::{avg_ber, avg_ber_asymptotic, ModulationScheme, RelayConfig};

fn main() -> dualhop::Result<()> {
    let trunc = TruncationPolicy::default();
    let schemes = [("DBPSK", ModulationScheme::dbpsk()), ("CBPSK", ModulationScheme::cbpsk())];
    for det in [Detection::Heterodyne, Detection::ImDd] {
        println!("{det:?}, moderate turbulence, negligible pointing error");
        for db in (0..=40).step_by(10) {
            let g = 10f64.powf(db as f64 / 10.0);
            let gg = GammaGammaParams::from_mu_r(5.42, 3.8, 5.0263, det, g)?;
            let ftr = FtrParams::from_mean_snr(10.0, 2.0, 0.5, g)?;
            let mut line = format!("{db:>4} dB");
            for (name, m) in &schemes {
                let e = avg_ber(&gg, &ftr, &RelayConfig::Df, m, &trunc)?;
                let (a, _) = avg_ber_asymptotic(&gg, &ftr, &RelayConfig::Df, m, &trunc)?;
                line += &format!("  {name} {:.4e} (asym {:.4e})", e.value, a.value);
            }
            println!("{line}");
        }
    }
    Ok(())
}
