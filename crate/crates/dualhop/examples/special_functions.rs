//! Gamma function, Gauss 2F1, Legendre functions and incomplete gamma.

use dualhop::specfun::{gamma, gamma_q, gauss_2f1, legendre_p, ln_gamma};
use num_complex::Complex64;

fn main() -> dualhop::Result<()> {
    println!("Gamma(0.5)^2      = {:.15}  (pi = {:.15})", gamma(0.5).powi(2), std::f64::consts::PI);
    let z = Complex64::new(0.5, 10.0);
    println!("ln Gamma(0.5+10i) = {:.12}", ln_gamma(z));

    // 2F1(1, 1; 2; x) = -ln(1 - x)/x
    for x in [0.25, 0.5, 0.9, -3.0] {
        let v = gauss_2f1(1.0, 1.0, 2.0, x)?;
        println!("2F1(1,1;2;{x:>5}) = {v:.15}  closed form {:.15}", -(1.0 - x).ln() / x);
    }

    for (deg, ord, x) in [(2.0, 0, 1.5), (3.5, 1, 2.0), (10.3, -2, 1.1)] {
        println!("P^{ord}_{deg}({x}) = {:.12e}", legendre_p(deg, ord, x)?);
    }

    println!("Q(0.5, 2) = {:.15}  erfc(sqrt 2) = {:.15}", gamma_q(0.5, 2.0), dualhop::specfun::erfc(2f64.sqrt()));
    Ok(())
}
