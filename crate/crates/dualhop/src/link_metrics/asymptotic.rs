//! High-SNR expansions of the end-to-end CDF and average BER.
//!
//! Every term is c·γ^a. For the CDF it is evaluated at γ; for the BER the
//! power is integrated against the modulation weight, γ^a ↦ Γ(p+a)/(Γ(p) q^a).
//!
//! Families (u = αβ(γ/μ_r)^{1/r}, L = 1/(Γ(α)Γ(β))):
//!
//! * RF, one per mixture index j: the small-γ₂ behavior, ∝ γ^{j+1};
//! * FSO pole families at ξ², α and β, ∝ u^θ;
//! * AF only, mixed terms: FSO terms corrected by (C_R/2σ²)^{θ/r};
//! * DF CDF only, cross terms of F₁∞·F₂∞.

use super::{af_gain, check_gamma, ModulationScheme, RelayConfig};
use crate::channels::{FtrMixture, FtrParams, GammaGammaParams, TruncationPolicy};
use crate::error::{Error, Result};
use crate::metric::{Method, MetricResult};
use crate::specfun::{gamma_sign, ln_gamma_abs};

const COLLISION_TOL: f64 = 1e-6;
const PERTURBATION: f64 = 1e-4;

/// Which quantity an expansion approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticDomain {
    AfCdf,
    AfBer,
    DfCdf,
    DfBer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermFamily {
    Rf,
    FsoXi,
    FsoAlpha,
    FsoBeta,
    MixedXi,
    MixedAlpha,
    MixedBeta,
    Cross,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticTerm {
    pub family: TermFamily,
    /// Mixture index, for families that carry one.
    pub j: Option<usize>,
    /// Exponent θ of μ_r^{-θ}.
    pub exponent: f64,
    /// Decay order in the common SNR when γ̄_FSO and γ̄_RF grow together.
    pub snr_order: f64,
    /// Power a of γ in c·γ^a.
    pub gamma_power: f64,
    pub ln_abs_coefficient: f64,
    pub sign: f64,
    /// Contribution to the expansion value.
    pub value: f64,
}

impl AsymptoticTerm {
    pub fn coefficient(&self) -> f64 {
        self.sign * self.ln_abs_coefficient.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticExpansion {
    pub domain: AsymptoticDomain,
    pub terms: Vec<AsymptoticTerm>,
    /// Smallest SNR order among the terms, the diversity order.
    pub leading_order: f64,
    /// Description of any parameter shift applied to avoid coinciding poles.
    pub perturbation: Option<String>,
}

impl AsymptoticExpansion {
    pub fn value(&self) -> f64 {
        self.terms.iter().map(|t| t.value).sum()
    }

    /// (exponent, coefficient) pairs.
    pub fn exponents(&self) -> Vec<(f64, f64)> {
        self.terms.iter().map(|t| (t.exponent, t.coefficient())).collect()
    }

    /// Sum of the terms with mixture index ≤ n, plus those without an index.
    pub fn partial_value(&self, n: usize) -> f64 {
        self.terms.iter().filter(|t| t.j.map_or(true, |j| j <= n)).map(|t| t.value).sum()
    }
}

/// Shape parameters after collision handling.
#[derive(Debug, Clone, Copy)]
struct Shape {
    alpha: f64,
    beta: f64,
    /// ξ², infinite without pointing error.
    xi2: f64,
    r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Which {
    Alpha,
    Beta,
    Xi,
}

fn near_pole(x: f64) -> bool {
    let n = x.round();
    n <= 0.0 && (x - n).abs() < COLLISION_TOL
}

fn near_zero(x: f64) -> bool {
    x.abs() < COLLISION_TOL
}

impl Shape {
    fn families(&self) -> Vec<(Which, f64)> {
        let mut f = vec![(Which::Alpha, self.alpha), (Which::Beta, self.beta)];
        if self.xi2.is_finite() {
            f.insert(0, (Which::Xi, self.xi2));
        }
        f
    }

    /// First parameter involved in a pole collision, β preferred, then α, then ξ.
    fn collision(&self, jmax: usize) -> Option<Which> {
        let (a, b, x2, r) = (self.alpha, self.beta, self.xi2, self.r);
        let mut hits = vec![];
        if near_pole(b - a) || near_pole(a - b) {
            hits.push(Which::Beta);
        }
        if x2.is_finite() {
            if near_pole(a - x2) || near_zero(x2 - a) {
                hits.push(Which::Alpha);
            }
            if near_pole(b - x2) || near_zero(x2 - b) {
                hits.push(Which::Beta);
            }
        }
        for j in 0..=jmax {
            let k = r * (j as f64 + 1.0);
            if near_pole(a - k) {
                hits.push(Which::Alpha);
            }
            if near_pole(b - k) {
                hits.push(Which::Beta);
            }
            if x2.is_finite() && near_zero(x2 - k) {
                hits.push(Which::Xi);
            }
            for (w, th) in self.families() {
                if near_pole(j as f64 + 1.0 - th / r) {
                    hits.push(w);
                }
            }
        }
        [Which::Beta, Which::Alpha, Which::Xi].into_iter().find(|w| hits.contains(w))
    }

    fn resolve(gg: &GammaGammaParams, jmax: usize) -> Result<(Shape, Option<String>)> {
        let mut s = Shape { alpha: gg.alpha, beta: gg.beta, xi2: if gg.has_pointing_error() { gg.xi2() } else { f64::INFINITY }, r: gg.r() };
        let mut xi = gg.xi;
        let mut notes = vec![];
        for _ in 0..8 {
            match s.collision(jmax) {
                None => return Ok((s, (!notes.is_empty()).then(|| notes.join("; ")))),
                Some(Which::Beta) => {
                    s.beta += PERTURBATION;
                    notes.push(format!("beta -> {}", s.beta));
                }
                Some(Which::Alpha) => {
                    s.alpha += PERTURBATION;
                    notes.push(format!("alpha -> {}", s.alpha));
                }
                Some(Which::Xi) => {
                    xi += PERTURBATION;
                    s.xi2 = xi * xi;
                    notes.push(format!("xi -> {xi}"));
                }
            }
        }
        Err(Error::Domain(format!("unresolved pole collision in asymptotic expansion: {}", notes.join("; "))))
    }

    fn ln_l(&self) -> f64 {
        -ln_gamma_abs(self.alpha) - ln_gamma_abs(self.beta)
    }

    /// ξ²/(ξ² − x) as (ln|·|, sign); 1 without pointing error.
    fn pe(&self, x: f64) -> (f64, f64) {
        if self.xi2.is_finite() {
            let d = self.xi2 - x;
            (self.xi2.ln() - d.abs().ln(), d.signum())
        } else {
            (0.0, 1.0)
        }
    }

    /// Coefficient of u^θ in F₁ for each pole family, without L.
    fn fso_coefficients(&self) -> Vec<(Which, f64, f64, f64)> {
        let (a, b) = (self.alpha, self.beta);
        let lg = |x: f64| (ln_gamma_abs(x), gamma_sign(x));
        self.families()
            .into_iter()
            .map(|(w, th)| {
                let (ln, sg) = match w {
                    Which::Xi => {
                        let (l1, s1) = lg(a - self.xi2);
                        let (l2, s2) = lg(b - self.xi2);
                        (l1 + l2, s1 * s2)
                    }
                    Which::Alpha => {
                        let (lp, sp) = self.pe(a);
                        let (l1, s1) = lg(b - a);
                        (lp + l1 - a.ln(), sp * s1)
                    }
                    Which::Beta => {
                        let (lp, sp) = self.pe(b);
                        let (l1, s1) = lg(a - b);
                        (lp + l1 - b.ln(), sp * s1)
                    }
                };
                (w, th, ln, sg)
            })
            .collect()
    }
}

fn fso_family(w: Which, mixed: bool) -> TermFamily {
    match (w, mixed) {
        (Which::Xi, false) => TermFamily::FsoXi,
        (Which::Alpha, false) => TermFamily::FsoAlpha,
        (Which::Beta, false) => TermFamily::FsoBeta,
        (Which::Xi, true) => TermFamily::MixedXi,
        (Which::Alpha, true) => TermFamily::MixedAlpha,
        (Which::Beta, true) => TermFamily::MixedBeta,
    }
}

fn term(family: TermFamily, j: Option<usize>, exponent: f64, snr_order: f64, power: f64, ln: f64, sign: f64) -> AsymptoticTerm {
    AsymptoticTerm { family, j, exponent, snr_order, gamma_power: power, ln_abs_coefficient: ln, sign, value: 0.0 }
}

/// AF terms as coefficients of γ^a.
fn af_terms(gg: &GammaGammaParams, mix: &FtrMixture, c_r: f64) -> Result<(Vec<AsymptoticTerm>, Option<String>)> {
    let n = mix.n_terms;
    let (s, pert) = Shape::resolve(gg, n)?;
    let r = s.r;
    let ln_l = s.ln_l();
    let ln_mu1 = gg.mu_r.ln() - r * (s.alpha * s.beta).ln();
    let ln_rho = c_r.ln() - mix.params.two_sigma2().ln();
    let fso = s.fso_coefficients();
    let lw = mix.ln_weights();
    let mut out = Vec::with_capacity((n + 1) * 7);
    for (j, &lwj) in lw.iter().enumerate().take(n + 1) {
        let jf = j as f64;
        let k = r * (jf + 1.0);
        let (lp, sp) = s.pe(k);
        let ln1 = ln_l + lwj - ln_gamma_abs(jf + 2.0) + lp + ln_gamma_abs(s.alpha - k) + ln_gamma_abs(s.beta - k)
            + (jf + 1.0) * (ln_rho - ln_mu1);
        let sg1 = sp * gamma_sign(s.alpha - k) * gamma_sign(s.beta - k);
        out.push(term(TermFamily::Rf, Some(j), jf + 1.0, 2.0 * (jf + 1.0), jf + 1.0, ln1, sg1));
        for &(w, th, lc, sc) in &fso {
            let a = th / r;
            let lpure = ln_l + lwj + lc - a * ln_mu1;
            out.push(term(fso_family(w, false), Some(j), a, a, a, lpure, sc));
            let g = jf + 1.0 - a;
            let lmix = lpure + ln_gamma_abs(g) - ln_gamma_abs(jf + 1.0) + a * ln_rho;
            out.push(term(fso_family(w, true), Some(j), a, 2.0 * a, a, lmix, sc * gamma_sign(g)));
        }
    }
    Ok((out, pert))
}

/// DF terms: F₁∞, F₂∞ and, when `cross`, −F₁∞F₂∞.
fn df_terms(gg: &GammaGammaParams, mix: &FtrMixture, cross: bool) -> Result<(Vec<AsymptoticTerm>, Option<String>)> {
    let n = mix.n_terms;
    let (s, pert) = Shape::resolve(gg, 0)?;
    let r = s.r;
    let ln_l = s.ln_l();
    let ln_mu1 = gg.mu_r.ln() - r * (s.alpha * s.beta).ln();
    let ln_2s2 = mix.params.two_sigma2().ln();
    let mut f1 = vec![];
    for (w, th, lc, sc) in s.fso_coefficients() {
        let a = th / r;
        f1.push(term(fso_family(w, false), None, a, a, a, ln_l + lc - a * ln_mu1, sc));
    }
    let mut f2 = vec![];
    for (j, &lwj) in mix.ln_weights().iter().enumerate().take(n + 1) {
        let p = j as f64 + 1.0;
        f2.push(term(TermFamily::Rf, Some(j), p, p, p, lwj - ln_gamma_abs(p + 1.0) - p * ln_2s2, 1.0));
    }
    let mut out = f1.clone();
    out.extend(f2.iter().cloned());
    if cross {
        for a in &f1 {
            for b in &f2 {
                out.push(term(
                    TermFamily::Cross,
                    b.j,
                    a.exponent + b.exponent,
                    a.snr_order + b.snr_order,
                    a.gamma_power + b.gamma_power,
                    a.ln_abs_coefficient + b.ln_abs_coefficient,
                    -a.sign * b.sign,
                ));
            }
        }
    }
    Ok((out, pert))
}

fn eval_cdf(terms: &mut [AsymptoticTerm], gamma: f64) {
    let lg = gamma.ln();
    for t in terms {
        t.value = t.sign * (t.ln_abs_coefficient + t.gamma_power * lg).exp();
    }
}

fn eval_ber(terms: &mut [AsymptoticTerm], modn: &ModulationScheme) {
    let lgp = ln_gamma_abs(modn.p);
    for t in terms {
        let a = t.gamma_power;
        let base = t.ln_abs_coefficient + ln_gamma_abs(modn.p + a) - lgp;
        let s: f64 = modn.q.iter().map(|&q| (base - a * q.ln()).exp()).sum();
        t.value = 0.5 * modn.delta * t.sign * s;
    }
}

fn finish(
    domain: AsymptoticDomain,
    terms: Vec<AsymptoticTerm>,
    perturbation: Option<String>,
    mix: &FtrMixture,
) -> (MetricResult, AsymptoticExpansion) {
    let leading_order = terms.iter().filter(|t| t.value != 0.0).map(|t| t.snr_order).fold(f64::INFINITY, f64::min);
    let exp = AsymptoticExpansion { domain, terms, leading_order, perturbation };
    let v = exp.value();
    let mut res = MetricResult::new(v, v.abs() * mix.deficit, Method::Asymptotic)
        .with_terms(mix.n_terms + 1)
        .note("truncation_deficit", format!("{:e}", mix.deficit))
        .note("leading_order", exp.leading_order);
    if let Some(p) = &exp.perturbation {
        res = res.note("pole_perturbation", p);
    }
    (res, exp)
}

/// High-SNR expansion of the AF end-to-end CDF.
pub fn af_cdf_asymptotic(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    gamma: f64,
    trunc: &TruncationPolicy,
) -> Result<(MetricResult, AsymptoticExpansion)> {
    let c_r = af_gain(relay)?;
    check_gamma(gamma)?;
    let mix = FtrMixture::new(ftr, trunc)?;
    let (mut terms, pert) = af_terms(gg, &mix, c_r)?;
    if gamma == 0.0 {
        terms.iter_mut().for_each(|t| t.value = 0.0);
    } else {
        eval_cdf(&mut terms, gamma);
    }
    Ok(finish(AsymptoticDomain::AfCdf, terms, pert, &mix))
}

/// High-SNR expansion of the DF end-to-end CDF, F₁∞ + F₂∞ − F₁∞F₂∞.
pub fn df_cdf_asymptotic(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    gamma: f64,
    trunc: &TruncationPolicy,
) -> Result<(MetricResult, AsymptoticExpansion)> {
    check_gamma(gamma)?;
    let mix = FtrMixture::new(ftr, trunc)?;
    let (mut terms, pert) = df_terms(gg, &mix, true)?;
    if gamma == 0.0 {
        terms.iter_mut().for_each(|t| t.value = 0.0);
    } else {
        eval_cdf(&mut terms, gamma);
    }
    Ok(finish(AsymptoticDomain::DfCdf, terms, pert, &mix))
}

/// High-SNR expansion of the average BER.
pub fn avg_ber_asymptotic(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    modn: &ModulationScheme,
    trunc: &TruncationPolicy,
) -> Result<(MetricResult, AsymptoticExpansion)> {
    relay.validate()?;
    modn.validate()?;
    let mix = FtrMixture::new(ftr, trunc)?;
    let (mut terms, pert, domain) = match *relay {
        RelayConfig::AfFixedGain { c_r } => {
            let (t, p) = af_terms(gg, &mix, c_r)?;
            (t, p, AsymptoticDomain::AfBer)
        }
        RelayConfig::Df => {
            let (t, p) = df_terms(gg, &mix, false)?;
            (t, p, AsymptoticDomain::DfBer)
        }
    };
    eval_ber(&mut terms, modn);
    Ok(finish(domain, terms, pert, &mix))
}

/// Smallest N₂ with |P̄ₑ∞ − P̂ₑ∞(N₂)| < ε₂, where P̂ₑ∞(N) keeps mixture
/// indices j ≤ N. The reference sum runs to a 1e-12 mixture deficit.
pub fn ber_asymptotic_required_terms(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    modn: &ModulationScheme,
    epsilon: f64,
) -> Result<(usize, f64)> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    let (_, exp) = avg_ber_asymptotic(gg, ftr, relay, modn, &TruncationPolicy::target(1e-12))?;
    let total = exp.value();
    let jmax = exp.terms.iter().filter_map(|t| t.j).max().unwrap_or(0);
    let mut partial: f64 = exp.terms.iter().filter(|t| t.j.is_none()).map(|t| t.value).sum();
    let mut by_j = vec![0.0; jmax + 1];
    for t in &exp.terms {
        if let Some(j) = t.j {
            by_j[j] += t.value;
        }
    }
    for (n, b) in by_j.iter().enumerate() {
        partial += b;
        let e = total - partial;
        if e.abs() < epsilon {
            return Ok((n, e));
        }
    }
    Err(Error::TruncationCap { cap: jmax, target: epsilon, achieved: (total - partial).abs() })
}
