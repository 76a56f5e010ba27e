//! Mellin–Barnes integrands of the end-to-end metrics.
//!
//! Every metric is ∫ w(γ) G(γ) dγ where G is a CDF or complementary CDF.
//! The weight enters through its Mellin transform
//! W(τ) = ∫ w(γ) γ^{-τ} dγ, which replaces the γ^{-τ} factor of G.
//!
//! Variables: τ is attached to the FSO hop through E[u^{rτ}], s to the FTR
//! hop through P(j+1, ·) or Q(j+1, ·) with the mixture folded into
//! Σ_j (w_j/j!) Γ(j+1+s).

use crate::channels::{FtrMixture, GammaGammaParams};
use crate::mellin_barnes::{GammaFactor, GammaSeries, Integrand1, Integrand2};
use crate::specfun::ln_gamma_abs;

/// Mellin transform of a metric weight: e^{ln_scale} Π Γ(a + c·w)^{±1} e^{w·ln_base}.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    /// (a, c, numerator)
    pub factors: Vec<(f64, f64, bool)>,
    pub ln_scale: f64,
    pub ln_base: f64,
}

impl Kernel {
    /// Point evaluation at γ₀.
    pub fn point(gamma0: f64) -> Self {
        Kernel { factors: vec![], ln_scale: 0.0, ln_base: -gamma0.ln() }
    }

    /// q^p γ^{p-1} e^{-qγ} / Γ(p).
    pub fn ber(p: f64, q: f64) -> Self {
        Kernel { factors: vec![(p, -1.0, true)], ln_scale: -ln_gamma_abs(p), ln_base: q.ln() }
    }

    /// c / (1 + cγ).
    pub fn capacity(c: f64) -> Self {
        Kernel { factors: vec![(0.0, 1.0, true), (1.0, -1.0, true)], ln_scale: 0.0, ln_base: c.ln() }
    }

    /// A (1+γ)^{-A-1}.
    pub fn effective(a: f64) -> Self {
        Kernel {
            factors: vec![(1.0, -1.0, true), (a, 1.0, true)],
            ln_scale: a.ln() - ln_gamma_abs(a + 1.0),
            ln_base: 0.0,
        }
    }

    fn push(&self, out: &mut Vec<GammaFactor>, cs: f64, ct: f64) {
        for &(a, c, num) in &self.factors {
            out.push(GammaFactor { a, cs: c * cs, ct: c * ct, numerator: num });
        }
    }
}

/// Which side of the distribution a hop contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Cdf,
    Ccdf,
}

fn side_factors(side: Side, cs: f64, ct: f64) -> [GammaFactor; 2] {
    // -1/w = Γ(-w)/Γ(1-w) for the CDF, 1/w = Γ(w)/Γ(1+w) for the complement.
    match side {
        Side::Cdf => [GammaFactor::num2(0.0, -cs, -ct), GammaFactor::den2(1.0, -cs, -ct)],
        Side::Ccdf => [GammaFactor::num2(0.0, cs, ct), GammaFactor::den2(1.0, cs, ct)],
    }
}

fn fso_ln_base(gg: &GammaGammaParams) -> f64 {
    gg.mu_r.ln() - gg.r() * (gg.alpha * gg.beta).ln()
}

fn mixture_series(mix: &FtrMixture) -> GammaSeries {
    GammaSeries {
        a: 1.0,
        cs: 1.0,
        ln_coeffs: mix.ln_weights().iter().enumerate().map(|(j, l)| l - ln_gamma_abs(j as f64 + 1.0)).collect(),
    }
}

/// ∫ w(γ) F_FSO(γ) dγ (or with the complement) as a single integral in τ.
pub fn fso_part(gg: &GammaGammaParams, k: &Kernel, side: Side) -> Integrand1 {
    let r = gg.r();
    let (mut factors, ln_c) = gg.moment_factors(0.0, r, 0.0);
    factors.extend(side_factors(side, r, 0.0));
    k.push(&mut factors, 1.0, 0.0);
    Integrand1 { factors, series: vec![], ln_x: fso_ln_base(gg) + k.ln_base, ln_scale: r.ln() + ln_c + k.ln_scale }
}

/// ∫ w(γ) F_RF(γ) dγ (or with the complement) as a single integral in s.
pub fn ftr_part(mix: &FtrMixture, k: &Kernel, side: Side) -> Integrand1 {
    let mut factors = side_factors(side, 1.0, 0.0).to_vec();
    k.push(&mut factors, 1.0, 0.0);
    Integrand1 {
        factors,
        series: vec![mixture_series(mix)],
        ln_x: mix.params.two_sigma2().ln() + k.ln_base,
        ln_scale: k.ln_scale,
    }
}

/// Fixed-gain AF relaying: the part of ∫ w(γ) F(γ) dγ carried by the RF
/// hop, i.e. with F(γ) replaced by ∫ f_FSO(x+γ) F_RF(C_R γ/x) dx, or the
/// complement ∫ w(γ) F^c(γ) dγ when `side` is [`Side::Ccdf`].
pub fn af_joint(gg: &GammaGammaParams, mix: &FtrMixture, c_r: f64, k: &Kernel, side: Side) -> Integrand2 {
    let r = gg.r();
    let mut factors = side_factors(side, 1.0, 0.0).to_vec();
    factors.push(GammaFactor::num(1.0, 1.0));
    factors.push(GammaFactor::num2(0.0, -1.0, 1.0));
    factors.push(GammaFactor::den2(1.0, 0.0, 1.0));
    let (m, ln_c) = gg.moment_factors(0.0, 0.0, r);
    factors.extend(m);
    k.push(&mut factors, 0.0, 1.0);
    Integrand2 {
        factors,
        s_series: vec![mixture_series(mix)],
        ln_x: mix.params.two_sigma2().ln() - c_r.ln(),
        ln_y: fso_ln_base(gg) + k.ln_base,
        ln_scale: ln_c + k.ln_scale,
    }
}

/// DF relaying: ∫ w(γ) G_FSO(γ) G_RF(γ) dγ for the chosen sides.
pub fn df_joint(gg: &GammaGammaParams, mix: &FtrMixture, k: &Kernel, side: Side) -> Integrand2 {
    let r = gg.r();
    let mut factors = side_factors(side, 1.0, 0.0).to_vec();
    let (m, ln_c) = gg.moment_factors(0.0, 0.0, r);
    factors.extend(m);
    factors.extend(side_factors(side, 0.0, r));
    k.push(&mut factors, 1.0, 1.0);
    Integrand2 {
        factors,
        s_series: vec![mixture_series(mix)],
        ln_x: mix.params.two_sigma2().ln() + k.ln_base,
        ln_y: fso_ln_base(gg) + k.ln_base,
        ln_scale: r.ln() + ln_c + k.ln_scale,
    }
}
