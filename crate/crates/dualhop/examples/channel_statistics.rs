//! Per-hop statistics: Gamma-Gamma with pointing errors, FTR mixture.

use dualhop::channels::{
    ftr_cdf, ftr_d_j, ftr_pdf, ftr_required_terms, ftr_weights, gg_cdf, gg_pdf, rytov_to_alpha_beta, Detection,
    FtrParams, GammaGammaParams, RytovInputs, TruncationPolicy,
};

fn main() -> dualhop::Result<()> {
    let (a, b) = rytov_to_alpha_beta(&RytovInputs::Variance(1.0))?;
    println!("Rytov variance 1 -> alpha = {a:.4}, beta = {b:.4}");

    let gbar = 10.0;
    for det in [Detection::Heterodyne, Detection::ImDd] {
        let gg = GammaGammaParams::new(5.42, 3.8, 0.893, det, gbar)?;
        println!("\n{det:?}: mu_r = {:.4}", gg.mu_r);
        for g in [0.1, 1.0, 10.0, 100.0] {
            println!("  gamma {g:>6}: pdf {:.6e}  cdf {:.6e}", gg_pdf(&gg, g)?, gg_cdf(&gg, g)?);
        }
    }

    let ftr = FtrParams::from_mean_snr(10.0, 2.0, 0.5, gbar)?;
    println!("\nFTR (K, m, Delta) = (10, 2, 0.5), 2 sigma^2 = {:.4}", ftr.two_sigma2());
    println!("d_0..d_3 = {:?}", (0..4).map(|j| ftr_d_j(&ftr, j)).collect::<Result<Vec<_>, _>>()?);
    let w = ftr_weights(&ftr, 9)?;
    for (j, x) in w.iter().enumerate() {
        println!("  w_{j} = {x:.6e}");
    }
    for eps in [1e-3, 1e-6] {
        let (n, e) = ftr_required_terms(&ftr, eps)?;
        println!("terms for deficit < {eps:e}: N = {n} (deficit {e:.3e})");
    }
    let t = TruncationPolicy::default();
    for g in [1.0, 10.0, 50.0] {
        println!("  gamma {g:>4}: pdf {:.6e}  cdf {:.6e}", ftr_pdf(&ftr, g, &t)?, ftr_cdf(&ftr, g, &t)?);
    }
    Ok(())
}
