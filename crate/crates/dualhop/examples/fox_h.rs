//! Fox H-functions of one and two variables by contour quadrature.

use dualhop::mellin_barnes::{fox_h, fox_h2, meijer_g, BivariateFoxHSpec, ContourSpec, FoxHSpec};

fn main() -> dualhop::Result<()> {
    // G^{1,0}_{0,1}[z | -; 0] = e^{-z}
    let exp = FoxHSpec::meijer(1, 0, &[], &[0.0])?;
    for z in [0.1, 1.0, 10.0] {
        let r = meijer_g(&exp, z)?;
        println!("G[{z:>4}] = {:.15e}  e^-z = {:.15e}  err {:.1e}", r.value, (-z as f64).exp(), r.err_estimate);
    }

    // H^{1,0}_{0,1}[z | -; (0, 2)] = e^{-sqrt z}/2
    let h = FoxHSpec::new(1, 0, vec![], vec![(0.0, 2.0)])?;
    let r = fox_h(&h, 4.0, &ContourSpec::default())?;
    println!("H[4] = {:.15e}  e^-2/2 = {:.15e}", r.value, (-2.0f64).exp() / 2.0);

    // Product of two exponentials as a separable bivariate function.
    let spec = BivariateFoxHSpec {
        m2: 1,
        x_lower: vec![(0.0, 1.0)],
        m3: 1,
        y_lower: vec![(0.0, 1.0)],
        ..Default::default()
    };
    let r = fox_h2(&spec, 0.5, 2.0, &ContourSpec::bivariate(), &ContourSpec::bivariate())?;
    println!("H2[0.5, 2] = {:.12e}  e^-2.5 = {:.12e}", r.value, (-2.5f64).exp());
    for (k, v) in &r.diagnostics {
        println!("  {k}: {v}");
    }
    Ok(())
}
