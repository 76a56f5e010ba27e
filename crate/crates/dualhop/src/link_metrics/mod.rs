//! End-to-end statistics and performance metrics of the dual-hop link.
//!
//! Each metric has an exact path (Fox H-functions of one or two variables,
//! evaluated by contour quadrature), an independent integral oracle and,
//! for the CDF and BER, a high-SNR asymptotic expansion.
//!
//! Relaying modes:
//!
//! * fixed-gain AF: γ = γ₁γ₂/(γ₂ + C_R),
//! * DF: γ = min(γ₁, γ₂),
//!
//! with γ₁ the FSO SNR and γ₂ the mmWave SNR.

mod asymptotic;
pub mod kernel;
mod oracle;

pub use asymptotic::{
    af_cdf_asymptotic, avg_ber_asymptotic, ber_asymptotic_required_terms, df_cdf_asymptotic, AsymptoticDomain,
    AsymptoticExpansion, AsymptoticTerm, TermFamily,
};
pub use oracle::{
    af_cdf_oracle, af_cdf_oracle_with, avg_ber_oracle, df_cdf_oracle, df_cdf_oracle_with, effective_capacity_oracle,
    end_to_end_cdf_oracle, ergodic_capacity_oracle,
};

use crate::channels::{gg_cdf_result, Detection, FtrMixture, FtrParams, GammaGammaParams, TruncationPolicy};
use crate::error::{Error, Result};
use crate::mellin_barnes::{ContourSpec, Integrand1, Integrand2, MbOutcome};
use crate::metric::{Method, MetricResult};
use kernel::{af_joint, df_joint, fso_part, ftr_part, Kernel, Side};
use std::f64::consts::LN_2;

/// Relaying protocol at the relay node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelayConfig {
    /// Fixed-gain amplify-and-forward with relay gain constant C_R.
    AfFixedGain { c_r: f64 },
    /// Decode-and-forward.
    Df,
}

impl RelayConfig {
    pub fn af(c_r: f64) -> Result<Self> {
        let r = RelayConfig::AfFixedGain { c_r };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RelayConfig::AfFixedGain { c_r } if !(c_r > 0.0 && c_r.is_finite()) => {
                Err(Error::Parameter(format!("relay gain C_R must be finite and > 0, got {c_r}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_af(&self) -> bool {
        matches!(self, RelayConfig::AfFixedGain { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RelayConfig::AfFixedGain { .. } => "AF",
            RelayConfig::Df => "DF",
        }
    }
}

/// Binary modulation family with conditional error
/// (δ/2Γ(p)) Σ_k Γ(p, q_k γ).
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationScheme {
    pub delta: f64,
    pub p: f64,
    pub q: Vec<f64>,
}

impl ModulationScheme {
    pub fn new(delta: f64, p: f64, q: Vec<f64>) -> Result<Self> {
        let m = ModulationScheme { delta, p, q };
        m.validate()?;
        Ok(m)
    }

    pub fn cbpsk() -> Self {
        ModulationScheme { delta: 1.0, p: 0.5, q: vec![1.0] }
    }

    pub fn dbpsk() -> Self {
        ModulationScheme { delta: 1.0, p: 1.0, q: vec![1.0] }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !(self.p > 0.0) || self.q.is_empty() || self.q.iter().any(|&q| !(q > 0.0)) {
            return Err(Error::Parameter(format!("invalid modulation scheme {self:?}")));
        }
        Ok(())
    }

    /// Conditional bit error probability at SNR γ.
    pub fn conditional_ber(&self, gamma: f64) -> f64 {
        let s: f64 = self.q.iter().map(|&q| crate::specfun::gamma_q(self.p, q * gamma)).sum();
        0.5 * self.delta * s
    }
}

/// Ergodic capacity constant: E[log₂(1 + cγ)].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityMode {
    pub c: f64,
}

impl CapacityMode {
    pub fn for_detection(d: Detection) -> Self {
        CapacityMode { c: d.capacity_constant() }
    }
}

/// Effective capacity QoS exponent A = θTB/ln 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCapacityParams {
    pub a: f64,
}

impl EffectiveCapacityParams {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("QoS exponent A must be finite and > 0, got {a}")));
        }
        Ok(EffectiveCapacityParams { a })
    }

    /// From delay exponent θ, block length T and bandwidth B.
    pub fn from_qos(theta: f64, t: f64, b: f64) -> Result<Self> {
        Self::new(theta * t * b / LN_2)
    }
}

pub(crate) fn eval1(ig: &Integrand1) -> Result<MbOutcome> {
    ig.integrate(&ContourSpec::default())
}

pub(crate) fn eval2(ig: &Integrand2) -> Result<MbOutcome> {
    ig.integrate(&ContourSpec::bivariate(), &ContourSpec::bivariate())
}

/// Running sum of contour outcomes.
#[derive(Debug, Default)]
struct Acc {
    value: f64,
    err: f64,
    nodes: usize,
}

impl Acc {
    fn add(&mut self, o: &MbOutcome, sign: f64) {
        self.value += sign * o.value;
        self.err += o.err_estimate;
        self.nodes += o.nodes;
    }

    fn add_scaled(&mut self, o: &MbOutcome, scale: f64) {
        self.value += scale * o.value;
        self.err += scale.abs() * o.err_estimate;
        self.nodes += o.nodes;
    }

    fn finish(self, mix: &FtrMixture, trunc_err: f64) -> MetricResult {
        MetricResult::new(self.value, self.err + trunc_err, Method::ExactFoxH)
            .with_terms(mix.n_terms + 1)
            .note("truncation_deficit", format!("{:e}", mix.deficit))
            .note("contour_nodes", self.nodes)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("SNR threshold must be >= 0, got {gamma}")));
    }
    Ok(())
}

fn af_gain(relay: &RelayConfig) -> Result<f64> {
    relay.validate()?;
    match *relay {
        RelayConfig::AfFixedGain { c_r } => Ok(c_r),
        RelayConfig::Df => Err(Error::Parameter("operation requires an AF relay".into())),
    }
}

/// CDF of the fixed-gain AF end-to-end SNR.
pub fn af_cdf(
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
        return Ok(MetricResult::new(0.0, 0.0, Method::ExactFoxH).with_terms(mix.n_terms + 1));
    }
    let mut acc = Acc::default();
    let (f1, e1) = gg_cdf_result(gg, gamma, false)?;
    acc.value += f1;
    acc.err += e1;
    let d = eval2(&af_joint(gg, &mix, c_r, &Kernel::point(gamma), Side::Cdf))?;
    acc.add(&d, 1.0);
    Ok(acc.finish(&mix, mix.deficit))
}

/// CDF of the DF end-to-end SNR, F₁ + F₂ − F₁F₂.
pub fn df_cdf(gg: &GammaGammaParams, ftr: &FtrParams, gamma: f64, trunc: &TruncationPolicy) -> Result<MetricResult> {
    check_gamma(gamma)?;
    let mix = FtrMixture::new(ftr, trunc)?;
    if gamma == 0.0 {
        return Ok(MetricResult::new(0.0, 0.0, Method::ExactFoxH).with_terms(mix.n_terms + 1));
    }
    let (f1, e1) = gg_cdf_result(gg, gamma, false)?;
    let f2 = mix.cdf(gamma);
    let v = f1 + f2 - f1 * f2;
    Ok(MetricResult::new(v, e1 + mix.deficit, Method::ExactFoxH)
        .with_terms(mix.n_terms + 1)
        .note("truncation_deficit", format!("{:e}", mix.deficit)))
}

/// End-to-end CDF for either relaying mode.
pub fn end_to_end_cdf(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    gamma: f64,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    match relay {
        RelayConfig::AfFixedGain { .. } => af_cdf(gg, ftr, relay, gamma, trunc),
        RelayConfig::Df => df_cdf(gg, ftr, gamma, trunc),
    }
}

/// Outage probability P[γ < γ_th].
pub fn outage(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    gamma_th: f64,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    end_to_end_cdf(gg, ftr, relay, gamma_th, trunc)
}

/// ∫ w(γ) F(γ) dγ for a weight kernel, F the end-to-end CDF.
fn weighted_cdf(
    gg: &GammaGammaParams,
    mix: &FtrMixture,
    relay: &RelayConfig,
    k: &Kernel,
    acc: &mut Acc,
    scale: f64,
) -> Result<()> {
    acc.add_scaled(&eval1(&fso_part(gg, k, Side::Cdf))?, scale);
    match *relay {
        RelayConfig::AfFixedGain { c_r } => {
            acc.add_scaled(&eval2(&af_joint(gg, mix, c_r, k, Side::Cdf))?, scale);
        }
        RelayConfig::Df => {
            acc.add_scaled(&eval1(&ftr_part(mix, k, Side::Cdf))?, scale);
            acc.add_scaled(&eval2(&df_joint(gg, mix, k, Side::Cdf))?, -scale);
        }
    }
    Ok(())
}

/// Average bit error rate.
pub fn avg_ber(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    modn: &ModulationScheme,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    relay.validate()?;
    modn.validate()?;
    let mix = FtrMixture::new(ftr, trunc)?;
    let mut acc = Acc::default();
    for &q in &modn.q {
        weighted_cdf(gg, &mix, relay, &Kernel::ber(modn.p, q), &mut acc, 0.5 * modn.delta)?;
    }
    let bound = 0.5 * modn.delta * modn.n() as f64;
    Ok(acc.finish(&mix, mix.deficit * bound))
}

/// Ergodic capacity in bit/s/Hz; exact for heterodyne detection and a
/// lower bound for IM/DD.
pub fn ergodic_capacity(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    cap: &CapacityMode,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    relay.validate()?;
    if !(cap.c > 0.0) {
        return Err(Error::Parameter(format!("capacity constant must be > 0, got {}", cap.c)));
    }
    let mix = FtrMixture::new(ftr, trunc)?;
    let k = Kernel::capacity(cap.c);
    let o = match *relay {
        RelayConfig::AfFixedGain { c_r } => eval2(&af_joint(gg, &mix, c_r, &k, Side::Ccdf))?,
        RelayConfig::Df => eval2(&df_joint(gg, &mix, &k, Side::Ccdf))?,
    };
    let mut acc = Acc::default();
    acc.add_scaled(&o, 1.0 / LN_2);
    let v = acc.value;
    let bound = if gg.detection == Detection::Heterodyne { "exact" } else { "lower_bound" };
    Ok(acc.finish(&mix, mix.deficit * v.abs()).note("bound", bound))
}

/// Effective capacity −(1/A) log₂ E[(1+γ)^{-A}] in bit/s/Hz, with
/// E[(1+γ)^{-A}] = 1 − A ∫ (1+γ)^{-A-1} F^c(γ) dγ.
pub fn effective_capacity(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    ec: &EffectiveCapacityParams,
    trunc: &TruncationPolicy,
) -> Result<MetricResult> {
    relay.validate()?;
    let ec = EffectiveCapacityParams::new(ec.a)?;
    let mix = FtrMixture::new(ftr, trunc)?;
    let k = Kernel::effective(ec.a);
    let o = match *relay {
        RelayConfig::AfFixedGain { c_r } => eval2(&af_joint(gg, &mix, c_r, &k, Side::Ccdf))?,
        RelayConfig::Df => eval2(&df_joint(gg, &mix, &k, Side::Ccdf))?,
    };
    let x = o.value;
    let (e, e_err, nodes) = if x <= 0.5 {
        (1.0 - x, o.err_estimate + mix.deficit * x, o.nodes)
    } else {
        // E is small: the complement cancels, integrate the CDF side instead.
        let mut acc = Acc::default();
        weighted_cdf(gg, &mix, relay, &k, &mut acc, 1.0)?;
        (acc.value, acc.err + mix.deficit, acc.nodes + o.nodes)
    };
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::NonConvergence(format!("E[(1+γ)^-A] = {e:e} outside (0, 1]")));
    }
    let value = -e.ln() / (ec.a * LN_2);
    let err = e_err / (ec.a * LN_2 * e);
    Ok(MetricResult::new(value, err, Method::ExactFoxH)
        .with_terms(mix.n_terms + 1)
        .note("truncation_deficit", format!("{:e}", mix.deficit))
        .note("contour_nodes", nodes)
        .note("mgf_value", format!("{e:e}")))
}

/// Diversity order of the outage/BER curves.
pub fn diversity_order(gg: &GammaGammaParams, relay: &RelayConfig) -> f64 {
    let cap: f64 = if relay.is_af() { 2.0 } else { 1.0 };
    let r = gg.r();
    let mut g = cap.min(gg.alpha / r).min(gg.beta / r);
    if gg.has_pointing_error() {
        g = g.min(gg.xi2() / r);
    }
    g
}

#[cfg(test)]
mod tests;
