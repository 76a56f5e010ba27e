//! Integral oracles: direct adaptive quadrature, no bivariate contours.
//!
//! The end-to-end CDF is the single integral
//! F(γ) = F₁(γ) + ∫₀^∞ f₁(x+γ) F₂(C_R γ/x) dx (AF) or 1 − F₁^c F₂^c (DF).
//! Metrics use E[g(γ)] = ∫ f₁(y) Ψ(y) dy with Ψ an inner integral over the
//! RF hop, arranged so that every integrand is non-negative.

use super::{af_gain, check_gamma, CapacityMode, EffectiveCapacityParams, ModulationScheme, RelayConfig};
use crate::channels::{gg_ccdf, gg_cdf, gg_cdf_result, gg_pdf, FtrMixture, FtrParams, GammaGammaParams, TruncationPolicy};
use crate::error::{Error, Result};
use crate::metric::{Method, MetricResult};
use crate::quad::{integrate, integrate_log_half_line, QuadOptions};
use crate::specfun::{gamma_q, ln_gamma_abs};
use std::cell::Cell;
use std::f64::consts::LN_2;

const OUTER: QuadOptions = QuadOptions { rel_tol: 1e-9, abs_tol: 1e-300, max_intervals: 4000 };
const INNER: QuadOptions = QuadOptions { rel_tol: 1e-10, abs_tol: 1e-300, max_intervals: 4000 };
/// Log-width of the neglected region near zero in the inner integrals.
const INNER_SPAN: f64 = 80.0;

/// ln y bounds outside which the FSO hop carries negligible mass.
fn fso_support(gg: &GammaGammaParams) -> Result<(f64, f64)> {
    let lm = gg.mu_r.ln();
    // Deep in a heavy tail the contour can stop resolving the probability;
    // by then the neglected mass is far below the quadrature tolerance.
    let mut lo = lm - 5.0;
    let mut last = 1.0;
    loop {
        match gg_cdf(gg, lo.exp()) {
            Ok(v) if v > 1e-17 => last = v,
            Ok(_) => break,
            Err(_) if last < 1e-12 => break,
            Err(e) => return Err(e),
        }
        lo -= 5.0;
        if lo < lm - 700.0 {
            return Err(Error::NonConvergence("FSO lower tail does not decay".into()));
        }
    }
    let mut hi = lm + 1.0;
    let mut last = 1.0;
    loop {
        match gg_ccdf(gg, hi.exp()) {
            Ok(v) if v > 1e-19 => last = v,
            Ok(_) => break,
            Err(_) if last < 1e-12 => break,
            Err(e) => return Err(e),
        }
        hi += 1.0;
        if hi > lm + 80.0 {
            return Err(Error::NonConvergence("FSO upper tail does not decay".into()));
        }
    }
    Ok((lo, hi))
}

/// Map from (z, y) to the argument of the RF distribution.
#[derive(Clone, Copy)]
enum Coupling {
    Af(f64),
    Df,
}

impl Coupling {
    fn of(relay: &RelayConfig) -> Self {
        match *relay {
            RelayConfig::AfFixedGain { c_r } => Coupling::Af(c_r),
            RelayConfig::Df => Coupling::Df,
        }
    }
}

/// ∫₀^y h(z) G₂(κ(z, y)) dz, split at y/2 with logarithmic substitutions
/// toward both ends.
fn inner<H: Fn(f64) -> f64, G: Fn(f64) -> f64>(h: &H, g2: &G, y: f64, coupling: Coupling) -> Result<f64> {
    let kappa = |z: f64, t: f64| match coupling {
        Coupling::Af(c) => c * z / t,
        Coupling::Df => z,
    };
    let half = 0.5 * y;
    let lh = half.ln();
    let lower = integrate(
        |v| {
            let z = v.exp();
            z * h(z) * g2(kappa(z, y - z))
        },
        lh - INNER_SPAN,
        lh,
        &INNER,
    )?;
    let upper = integrate(
        |v| {
            let t = v.exp();
            let z = y - t;
            t * h(z) * g2(kappa(z, t))
        },
        lh - INNER_SPAN,
        lh,
        &INNER,
    )?;
    Ok(lower.value + upper.value)
}

fn outer<F: Fn(f64) -> f64>(gg: &GammaGammaParams, psi: F) -> Result<(f64, f64)> {
    let (lo, hi) = fso_support(gg)?;
    let failed = Cell::new(None);
    let r = integrate_log_half_line(
        |y| match gg_pdf(gg, y) {
            Ok(f) if f > 0.0 => f * psi(y),
            Ok(_) => 0.0,
            Err(e) => {
                failed.set(Some(e));
                0.0
            }
        },
        lo,
        hi,
        &[gg.mu_r.ln()],
        &OUTER,
    )?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok((r.value, r.error))
}

fn oracle_result(value: f64, err: f64, mix: &FtrMixture, trunc_bound: f64) -> MetricResult {
    MetricResult::new(value, err + mix.deficit * trunc_bound, Method::OracleIntegral)
        .with_terms(mix.n_terms + 1)
        .note("truncation_deficit", format!("{:e}", mix.deficit))
}

/// AF end-to-end CDF by the single integral, default truncation.
pub fn af_cdf_oracle(gg: &GammaGammaParams, ftr: &FtrParams, relay: &RelayConfig, gamma: f64) -> Result<MetricResult> {
    af_cdf_oracle_with(gg, ftr, relay, gamma, &TruncationPolicy::default())
}

/// AF end-to-end CDF by the single integral.
pub fn af_cdf_oracle_with(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    gamma: f64,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    let c_r = af_gain(relay)?;
    check_gamma(gamma)?;
    let mix = FtrMixture::new(ftr, trunc)?;
    if gamma == 0.0 {
        return Ok(oracle_result(0.0, 0.0, &mix, 0.0));
    }
    let (f1, e1) = gg_cdf_result(gg, gamma, false)?;
    let (_, hi) = fso_support(gg)?;
    let lg = gamma.ln();
    let breaks = [lg, gg.mu_r.ln(), (c_r * gamma / mix.params.two_sigma2()).ln(), (c_r * gamma / mix.params.gamma_bar_rf()).ln()];
    let failed = Cell::new(None);
    let d = integrate_log_half_line(
        |x| match gg_pdf(gg, x + gamma) {
            Ok(f) => f * mix.cdf(c_r * gamma / x),
            Err(e) => {
                failed.set(Some(e));
                0.0
            }
        },
        lg - 60.0,
        hi.max(lg + 5.0),
        &breaks,
        &OUTER,
    )?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(oracle_result(f1 + d.value, e1 + d.error, &mix, 1.0))
}

/// DF end-to-end CDF as 1 − F₁^c F₂^c, default truncation.
pub fn df_cdf_oracle(gg: &GammaGammaParams, ftr: &FtrParams, gamma: f64) -> Result<MetricResult> {
    df_cdf_oracle_with(gg, ftr, gamma, &TruncationPolicy::default())
}

/// DF end-to-end CDF as 1 − F₁^c F₂^c.
pub fn df_cdf_oracle_with(gg: &GammaGammaParams, ftr: &FtrParams, gamma: f64, trunc: &TruncationPolicy) -> Result<MetricResult> {
    check_gamma(gamma)?;
    let mix = FtrMixture::new(ftr, trunc)?;
    if gamma == 0.0 {
        return Ok(oracle_result(0.0, 0.0, &mix, 0.0));
    }
    let (c1, e1) = gg_cdf_result(gg, gamma, true)?;
    // The truncated complement misses the dropped mass; restore it so the
    // oracle truncates like the exact path.
    let c2 = mix.ccdf(gamma) + mix.deficit;
    Ok(oracle_result(1.0 - c1 * c2, e1, &mix, 1.0))
}

/// End-to-end CDF oracle for either relaying mode.
pub fn end_to_end_cdf_oracle(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    gamma: f64,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    match relay {
        RelayConfig::AfFixedGain { .. } => af_cdf_oracle_with(gg, ftr, relay, gamma, trunc),
        RelayConfig::Df => df_cdf_oracle_with(gg, ftr, gamma, trunc),
    }
}

/// Average BER as E[(δ/2) Σ_k Q(p, q_k γ)].
pub fn avg_ber_oracle(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    modn: &ModulationScheme,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    relay.validate()?;
    modn.validate()?;
    let mix = FtrMixture::new(ftr, trunc)?;
    let coupling = Coupling::of(relay);
    let p = modn.p;
    let lgp = ln_gamma_abs(p);
    let failed = Cell::new(None);
    let psi = |y: f64| {
        let mut acc = 0.0;
        for &q in &modn.q {
            let w = |z: f64| (p * q.ln() + (p - 1.0) * z.ln() - q * z - lgp).exp();
            acc += gamma_q(p, q * y);
            match inner(&w, &|k| mix.cdf(k), y, coupling) {
                Ok(v) => acc += v,
                Err(e) => failed.set(Some(e)),
            }
        }
        0.5 * modn.delta * acc
    };
    let (v, e) = outer(gg, psi)?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(oracle_result(v, e, &mix, 0.5 * modn.delta * modn.n() as f64))
}

/// Ergodic capacity as ∫ c/((1+cz) ln 2) F^c(z) dz.
pub fn ergodic_capacity_oracle(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    cap: &CapacityMode,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    relay.validate()?;
    let mix = FtrMixture::new(ftr, trunc)?;
    let coupling = Coupling::of(relay);
    let c = cap.c;
    let failed = Cell::new(None);
    let w = |z: f64| c / ((1.0 + c * z) * LN_2);
    let psi = |y: f64| match inner(&w, &|k| mix.ccdf(k), y, coupling) {
        Ok(v) => v,
        Err(e) => {
            failed.set(Some(e));
            0.0
        }
    };
    let (v, e) = outer(gg, psi)?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(oracle_result(v, e, &mix, v.abs()))
}

/// Effective capacity with E[(1+γ)^{-A}] = ∫ f₁(y)[(1+y)^{-A} + ∫₀^y A(1+z)^{-A-1} F₂ dz] dy.
pub fn effective_capacity_oracle(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    ec: &EffectiveCapacityParams,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    relay.validate()?;
    let ec = EffectiveCapacityParams::new(ec.a)?;
    let a = ec.a;
    let mix = FtrMixture::new(ftr, trunc)?;
    let coupling = Coupling::of(relay);
    let failed = Cell::new(None);
    let w = |z: f64| a * (-(a + 1.0) * z.ln_1p()).exp();
    let psi = |y: f64| {
        let base = (-a * y.ln_1p()).exp();
        match inner(&w, &|k| mix.cdf(k), y, coupling) {
            Ok(v) => base + v,
            Err(e) => {
                failed.set(Some(e));
                base
            }
        }
    };
    let (e_val, e_err) = outer(gg, psi)?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    let d = 1.0 / (a * LN_2 * e_val);
    Ok(MetricResult::new(-e_val.log2() / a, (e_err + mix.deficit) * d, Method::OracleIntegral)
        .with_terms(mix.n_terms + 1)
        .note("truncation_deficit", format!("{:e}", mix.deficit))
        .note("mgf_value", format!("{e_val:e}")))
}
