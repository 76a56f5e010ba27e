//! Hop channel models.
//!
//! The FSO hop is Gamma-Gamma turbulence with zero-boresight pointing errors.
//! Its SNR is written through the normalized variable
//! u = αβ (γ/μ_r)^{1/r}, whose Mellin transform is
//!
//! E[u^s] = ξ²/(ξ²+s) · Γ(α+s)Γ(β+s) / (Γ(α)Γ(β)),
//!
//! i.e. u is the product of two unit-scale gamma variates and U^{1/ξ²}.
//!
//! The mmWave hop is FTR fading, an infinite gamma mixture with weights
//! w_j = (m^m/Γ(m)) K^j d_j / j!.

use crate::error::{Error, Result};
use crate::mellin_barnes::{ContourSpec, FoxHSpec, GammaFactor, Integrand1};
use crate::specfun::{self, gamma_p, gamma_q, ln_gamma_abs, KahanSum};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Detection technique at the FSO receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detection {
    /// r = 1
    Heterodyne,
    /// r = 2
    ImDd,
}

impl Detection {
    pub fn r(&self) -> f64 {
        match self {
            Detection::Heterodyne => 1.0,
            Detection::ImDd => 2.0,
        }
    }

    pub fn from_r(r: u32) -> Result<Self> {
        match r {
            1 => Ok(Detection::Heterodyne),
            2 => Ok(Detection::ImDd),
            _ => Err(Error::Parameter(format!("detection mode r must be 1 or 2, got {r}"))),
        }
    }

    /// Capacity constant c: 1 for heterodyne, e/(2π) for IM/DD.
    pub fn capacity_constant(&self) -> f64 {
        match self {
            Detection::Heterodyne => 1.0,
            Detection::ImDd => std::f64::consts::E / (2.0 * PI),
        }
    }
}

/// Pointing-error ratio that disables pointing errors.
pub const XI_INF: f64 = f64::INFINITY;

/// Gamma-Gamma FSO hop with pointing errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGammaParams {
    pub alpha: f64,
    pub beta: f64,
    /// Pointing-error ratio ξ; [`XI_INF`] means no pointing error.
    pub xi: f64,
    pub detection: Detection,
    pub gamma_bar1: f64,
    pub mu_r: f64,
}

impl GammaGammaParams {
    /// Build from the average SNR γ̄₁, deriving the electrical SNR μ_r.
    pub fn new(alpha: f64, beta: f64, xi: f64, detection: Detection, gamma_bar1: f64) -> Result<Self> {
        check_shape(alpha, beta, xi)?;
        if !(gamma_bar1 > 0.0) || !gamma_bar1.is_finite() {
            return Err(Error::Parameter(format!("gamma_bar1 must be finite and > 0, got {gamma_bar1}")));
        }
        let mu_r = gamma_bar1 * mu_ratio(alpha, beta, xi, detection);
        Ok(GammaGammaParams { alpha, beta, xi, detection, gamma_bar1, mu_r })
    }

    /// Build from the electrical SNR μ_r directly.
    pub fn from_mu_r(alpha: f64, beta: f64, xi: f64, detection: Detection, mu_r: f64) -> Result<Self> {
        check_shape(alpha, beta, xi)?;
        if !(mu_r > 0.0) || !mu_r.is_finite() {
            return Err(Error::Parameter(format!("mu_r must be finite and > 0, got {mu_r}")));
        }
        let gamma_bar1 = mu_r / mu_ratio(alpha, beta, xi, detection);
        Ok(GammaGammaParams { alpha, beta, xi, detection, gamma_bar1, mu_r })
    }

    /// Same channel at a different electrical SNR.
    pub fn with_mu_r(&self, mu_r: f64) -> Result<Self> {
        Self::from_mu_r(self.alpha, self.beta, self.xi, self.detection, mu_r)
    }

    pub fn r(&self) -> f64 {
        self.detection.r()
    }

    pub fn has_pointing_error(&self) -> bool {
        self.xi.is_finite()
    }

    pub fn xi2(&self) -> f64 {
        self.xi * self.xi
    }

    /// Smallest pole distance of the Mellin transform, min(ξ², α, β).
    pub fn theta_min(&self) -> f64 {
        let t = self.alpha.min(self.beta);
        if self.has_pointing_error() {
            t.min(self.xi2())
        } else {
            t
        }
    }

    /// u = αβ (γ/μ_r)^{1/r}.
    pub fn u_of(&self, gamma: f64) -> f64 {
        self.alpha * self.beta * (gamma / self.mu_r).powf(1.0 / self.r())
    }

    /// Inverse of [`Self::u_of`].
    pub fn gamma_of(&self, u: f64) -> f64 {
        self.mu_r * (u / (self.alpha * self.beta)).powf(self.r())
    }

    /// Gamma factors of E[u^w] with w = shift + cs·s + ct·t, and the log of
    /// the constant prefactor.
    pub fn moment_factors(&self, shift: f64, cs: f64, ct: f64) -> (Vec<GammaFactor>, f64) {
        let mut f = vec![
            GammaFactor::num2(self.alpha + shift, cs, ct),
            GammaFactor::num2(self.beta + shift, cs, ct),
        ];
        let mut ln_c = -ln_gamma_abs(self.alpha) - ln_gamma_abs(self.beta);
        if self.has_pointing_error() {
            let x2 = self.xi2();
            f.push(GammaFactor::num2(x2 + shift, cs, ct));
            f.push(GammaFactor::den2(x2 + 1.0 + shift, cs, ct));
            ln_c += x2.ln();
        }
        (f, ln_c)
    }

    fn key(&self) -> [u64; 4] {
        [self.alpha.to_bits(), self.beta.to_bits(), self.xi.to_bits(), self.r().to_bits()]
    }
}

fn check_shape(alpha: f64, beta: f64, xi: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("alpha and beta must be finite and > 0, got ({alpha}, {beta})")));
    }
    if !(xi > 0.0) {
        return Err(Error::Parameter(format!("xi must be > 0 or infinite, got {xi}")));
    }
    Ok(())
}

fn mu_ratio(alpha: f64, beta: f64, xi: f64, detection: Detection) -> f64 {
    match detection {
        Detection::Heterodyne => 1.0,
        Detection::ImDd => {
            let pe = if xi.is_finite() {
                let x2 = xi * xi;
                x2 * (x2 + 2.0) / ((x2 + 1.0) * (x2 + 1.0))
            } else {
                1.0
            };
            alpha * beta / ((alpha + 1.0) * (beta + 1.0)) * pe
        }
    }
}

/// Turbulence strength, physical or as a Rytov variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RytovInputs {
    Physical { cn2: f64, wavelength: f64, distance: f64 },
    Variance(f64),
}

impl RytovInputs {
    /// σ_R² = 1.23 (2π/λ)^{7/6} C_n² L^{11/6} for physical inputs.
    pub fn sigma_r2(&self) -> f64 {
        match *self {
            RytovInputs::Physical { cn2, wavelength, distance } => {
                1.23 * (2.0 * PI / wavelength).powf(7.0 / 6.0) * cn2 * distance.powf(11.0 / 6.0)
            }
            RytovInputs::Variance(v) => v,
        }
    }
}

/// Plane-wave Gamma-Gamma parameters from the Rytov variance.
pub fn rytov_to_alpha_beta(inputs: &RytovInputs) -> Result<(f64, f64)> {
    if let RytovInputs::Physical { cn2, wavelength, distance } = *inputs {
        if !(cn2 > 0.0 && wavelength > 0.0 && distance > 0.0) {
            return Err(Error::Parameter("Cn2, wavelength and distance must be > 0".into()));
        }
    }
    let s2 = inputs.sigma_r2();
    if !(s2 > 0.0) || !s2.is_finite() {
        return Err(Error::Parameter(format!("Rytov variance must be finite and > 0, got {s2}")));
    }
    let s125 = s2.powf(6.0 / 5.0);
    let ea = 0.49 * s2 / (1.0 + 1.11 * s125).powf(7.0 / 6.0);
    let eb = 0.51 * s2 / (1.0 + 0.69 * s125).powf(5.0 / 6.0);
    Ok((1.0 / ea.exp_m1(), 1.0 / eb.exp_m1()))
}

fn gg_cdf_spec(p: &GammaGammaParams, complement: bool) -> FoxHSpec {
    // Variable z = u^r with exponents r on the u-dependent factors.
    let r = p.r();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let (m, n);
    if complement {
        // H^{4,0}_{2,4}: Γ(s) Γ(ξ²+rs) Γ(α+rs) Γ(β+rs) / (Γ(ξ²+1+rs) Γ(1+s))
        lower.push((0.0, 1.0));
        if p.has_pointing_error() {
            lower.push((p.xi2(), r));
        }
        lower.push((p.alpha, r));
        lower.push((p.beta, r));
        m = lower.len();
        n = 0;
        if p.has_pointing_error() {
            upper.push((p.xi2() + 1.0, r));
        }
        upper.push((1.0, 1.0));
    } else {
        // H^{3,1}_{2,4}: Γ(-s) Γ(ξ²+rs) Γ(α+rs) Γ(β+rs) / (Γ(ξ²+1+rs) Γ(1-s))
        if p.has_pointing_error() {
            lower.push((p.xi2(), r));
        }
        lower.push((p.alpha, r));
        lower.push((p.beta, r));
        m = lower.len();
        lower.push((0.0, 1.0));
        upper.push((1.0, 1.0));
        n = 1;
        if p.has_pointing_error() {
            upper.push((p.xi2() + 1.0, r));
        }
    }
    FoxHSpec { m, n, upper, lower }
}

fn gg_prefactor_ln(p: &GammaGammaParams) -> f64 {
    let mut c = -ln_gamma_abs(p.alpha) - ln_gamma_abs(p.beta);
    if p.has_pointing_error() {
        c += p.xi2().ln();
    }
    c
}

/// Gamma-Gamma SNR density, through a Meijer G^{3,0}_{1,3}.
pub fn gg_pdf(p: &GammaGammaParams, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gg_pdf requires gamma > 0, got {gamma}")));
    }
    let u = p.u_of(gamma);
    let spec = if p.has_pointing_error() {
        FoxHSpec::meijer(3, 0, &[p.xi2() + 1.0], &[p.xi2(), p.alpha, p.beta])?
    } else {
        FoxHSpec::meijer(2, 0, &[], &[p.alpha, p.beta])?
    };
    let g = crate::mellin_barnes::meijer_g(&spec, u)?;
    Ok(gg_prefactor_ln(p).exp() / (p.r() * gamma) * g.value)
}

/// Gamma-Gamma SNR CDF.
pub fn gg_cdf(p: &GammaGammaParams, gamma: f64) -> Result<f64> {
    Ok(gg_cdf_result(p, gamma, false)?.0)
}

/// Gamma-Gamma SNR complementary CDF.
pub fn gg_ccdf(p: &GammaGammaParams, gamma: f64) -> Result<f64> {
    Ok(gg_cdf_result(p, gamma, true)?.0)
}

/// CDF (or complement) with its numerical error estimate.
pub fn gg_cdf_result(p: &GammaGammaParams, gamma: f64, complement: bool) -> Result<(f64, f64)> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gg_cdf requires gamma >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(if complement { (1.0, 0.0) } else { (0.0, 0.0) });
    }
    if gamma.is_infinite() {
        return Ok(if complement { (0.0, 0.0) } else { (1.0, 0.0) });
    }
    let z = p.u_of(gamma).powf(p.r());
    let spec = gg_cdf_spec(p, complement);
    let r = crate::mellin_barnes::fox_h(&spec, z, &ContourSpec::default())?;
    let c = gg_prefactor_ln(p).exp();
    Ok((r.value * c, r.err_estimate * c))
}

/// Mellin–Barnes integrand of the FSO CDF (or complement) in the variable
/// u, with kernel u_γ^{-s}.
pub fn gg_cdf_integrand(p: &GammaGammaParams, gamma: f64, complement: bool) -> Integrand1 {
    let (mut factors, ln_c) = p.moment_factors(0.0, 1.0, 0.0);
    if complement {
        factors.push(GammaFactor::num(0.0, 1.0));
        factors.push(GammaFactor::den(1.0, 1.0));
    } else {
        factors.push(GammaFactor::num(0.0, -1.0));
        factors.push(GammaFactor::den(1.0, -1.0));
    }
    Integrand1 { factors, series: vec![], ln_x: -p.u_of(gamma).ln(), ln_scale: ln_c }
}

/// Inverse-CDF table of ln u for the Gamma-Gamma distribution.
#[derive(Debug)]
pub struct GgTable {
    x: Vec<f64>,
    ln_cdf: Vec<f64>,
    ln_ccdf: Vec<f64>,
}

const TABLE_NODES: usize = 2048;

impl GgTable {
    /// Build the table for the shape of `p` (independent of μ_r).
    pub fn build(p: &GammaGammaParams) -> Result<Self> {
        let q = p.with_mu_r(1.0)?;
        let r = q.r();
        let cdf_u = |x: f64, complement: bool| -> Result<f64> {
            let gamma = q.gamma_of(x.exp());
            let v = gg_cdf_integrand(&q, gamma, complement).integrate(&ContourSpec::default())?;
            let _ = r;
            Ok(v.value)
        };
        // Bracket the support where both tails are resolvable.
        let mut lo = -2.0;
        while cdf_u(lo, false)? > 1e-14 {
            lo -= 2.0;
            if lo < -400.0 {
                return Err(Error::NonConvergence("GG table: lower tail does not decay".into()));
            }
        }
        let mut hi = 2.0;
        while cdf_u(hi, true)? > 1e-17 {
            hi += 0.5;
            if hi > 50.0 {
                return Err(Error::NonConvergence("GG table: upper tail does not decay".into()));
            }
        }
        let h = (hi - lo) / (TABLE_NODES - 1) as f64;
        let x: Vec<f64> = (0..TABLE_NODES).map(|i| lo + i as f64 * h).collect();
        use rayon::prelude::*;
        let vals: Vec<Result<(f64, f64)>> = x
            .par_iter()
            .map(|&xi| {
                let f = cdf_u(xi, false)?;
                if f < 0.5 {
                    Ok((f.ln(), (-f).ln_1p()))
                } else {
                    let fc = cdf_u(xi, true)?;
                    Ok(((-fc).ln_1p(), fc.ln()))
                }
            })
            .collect();
        let mut ln_cdf = Vec::with_capacity(TABLE_NODES);
        let mut ln_ccdf = Vec::with_capacity(TABLE_NODES);
        for v in vals {
            let (a, b) = v?;
            ln_cdf.push(a);
            ln_ccdf.push(b);
        }
        for i in 1..TABLE_NODES {
            if !(ln_cdf[i] >= ln_cdf[i - 1]) || !(ln_ccdf[i] <= ln_ccdf[i - 1]) {
                return Err(Error::NonConvergence(format!("GG table not monotone near ln u = {}", x[i])));
            }
        }
        Ok(GgTable { x, ln_cdf, ln_ccdf })
    }

    /// ln u for probability level `v` in (0, 1).
    pub fn quantile_ln_u(&self, v: f64) -> f64 {
        if v < 0.5 {
            interp_increasing(&self.ln_cdf, &self.x, v.ln())
        } else {
            // ln_ccdf decreases; search on its negation.
            interp_decreasing(&self.ln_ccdf, &self.x, (-v).ln_1p())
        }
    }
}

fn interp_increasing(ys: &[f64], xs: &[f64], target: f64) -> f64 {
    let n = ys.len();
    let i = match ys.partition_point(|&y| y < target) {
        0 => 1,
        k if k >= n => n - 1,
        k => k,
    };
    let (y0, y1) = (ys[i - 1], ys[i]);
    let (x0, x1) = (xs[i - 1], xs[i]);
    if y1 == y0 {
        return x0;
    }
    x0 + (target - y0) * (x1 - x0) / (y1 - y0)
}

fn interp_decreasing(ys: &[f64], xs: &[f64], target: f64) -> f64 {
    let n = ys.len();
    let i = match ys.partition_point(|&y| y > target) {
        0 => 1,
        k if k >= n => n - 1,
        k => k,
    };
    let (y0, y1) = (ys[i - 1], ys[i]);
    let (x0, x1) = (xs[i - 1], xs[i]);
    if y1 == y0 {
        return x0;
    }
    x0 + (target - y0) * (x1 - x0) / (y1 - y0)
}

type TableCache = Mutex<HashMap<[u64; 4], Arc<GgTable>>>;

fn table_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached inverse-CDF table for the shape of `p`.
pub fn gg_table(p: &GammaGammaParams) -> Result<Arc<GgTable>> {
    let key = p.key();
    if let Some(t) = table_cache().lock().expect("table cache").get(&key) {
        return Ok(t.clone());
    }
    let t = Arc::new(GgTable::build(p)?);
    table_cache().lock().expect("table cache").insert(key, t.clone());
    Ok(t)
}

/// Gamma-Gamma SNR sampler.
#[derive(Debug, Clone)]
pub enum GgSampler {
    /// Inverse CDF through a monotone interpolation table.
    InverseCdf { params: GammaGammaParams, table: Arc<GgTable> },
    /// Generative product G_α G_β U^{1/ξ²}.
    ProductForm { params: GammaGammaParams, ga: Gamma<f64>, gb: Gamma<f64> },
}

impl GgSampler {
    pub fn inverse_cdf(p: &GammaGammaParams) -> Result<Self> {
        Ok(GgSampler::InverseCdf { params: *p, table: gg_table(p)? })
    }

    pub fn product_form(p: &GammaGammaParams) -> Result<Self> {
        let ga = Gamma::new(p.alpha, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
        let gb = Gamma::new(p.beta, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
        Ok(GgSampler::ProductForm { params: *p, ga, gb })
    }

    pub fn params(&self) -> &GammaGammaParams {
        match self {
            GgSampler::InverseCdf { params, .. } | GgSampler::ProductForm { params, .. } => params,
        }
    }

    /// One SNR draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            GgSampler::InverseCdf { params, table } => {
                let mut v: f64 = rng.gen();
                while v <= 0.0 {
                    v = rng.gen();
                }
                params.gamma_of(table.quantile_ln_u(v).exp())
            }
            GgSampler::ProductForm { params, ga, gb } => {
                let mut u = ga.sample(rng) * gb.sample(rng);
                if params.has_pointing_error() {
                    let v: f64 = 1.0 - rng.gen::<f64>();
                    u *= v.powf(1.0 / params.xi2());
                }
                params.gamma_of(u)
            }
        }
    }
}

/// One draw from the canonical (inverse-CDF) sampler.
pub fn gg_sample<R: Rng + ?Sized>(p: &GammaGammaParams, rng: &mut R) -> Result<f64> {
    Ok(GgSampler::inverse_cdf(p)?.sample(rng))
}

/// FTR fading hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtrParams {
    pub k: f64,
    pub m: f64,
    pub delta: f64,
    /// Per-dimension diffuse variance σ², with E_b/N_0 folded in.
    pub sigma2: f64,
}

impl FtrParams {
    pub fn new(k: f64, m: f64, delta: f64, sigma2: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) || !(m > 0.0 && m.is_finite()) {
            return Err(Error::Parameter(format!("FTR requires K >= 0 and m > 0, got K = {k}, m = {m}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Parameter(format!("FTR Δ must lie in [0, 1], got {delta}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Parameter(format!("FTR σ² must be finite and > 0, got {sigma2}")));
        }
        Ok(FtrParams { k, m, delta, sigma2 })
    }

    /// Parameters giving mean SNR γ̄_RF = 2σ²(1+K).
    pub fn from_mean_snr(k: f64, m: f64, delta: f64, gamma_bar_rf: f64) -> Result<Self> {
        Self::new(k, m, delta, gamma_bar_rf / (2.0 * (1.0 + k)))
    }

    pub fn with_mean_snr(&self, gamma_bar_rf: f64) -> Result<Self> {
        Self::from_mean_snr(self.k, self.m, self.delta, gamma_bar_rf)
    }

    pub fn two_sigma2(&self) -> f64 {
        2.0 * self.sigma2
    }

    pub fn gamma_bar_rf(&self) -> f64 {
        self.two_sigma2() * (1.0 + self.k)
    }

    fn shape_key(&self) -> [u64; 3] {
        [self.k.to_bits(), self.m.to_bits(), self.delta.to_bits()]
    }
}

/// How many mixture terms to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    Fixed(usize),
    TargetError(f64),
}

/// Truncation policy for the FTR mixture index j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    pub hard_cap: usize,
}

/// Default hard cap on the mixture index.
pub const DEFAULT_HARD_CAP: usize = 5000;

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { mode: TruncationMode::TargetError(1e-6), hard_cap: DEFAULT_HARD_CAP }
    }
}

impl TruncationPolicy {
    pub fn fixed(n: usize) -> Self {
        TruncationPolicy { mode: TruncationMode::Fixed(n), hard_cap: DEFAULT_HARD_CAP.max(n) }
    }

    pub fn target(eps: f64) -> Self {
        TruncationPolicy { mode: TruncationMode::TargetError(eps), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            TruncationMode::Fixed(n) if n > self.hard_cap => Err(Error::Parameter(format!(
                "fixed truncation N = {n} exceeds hard cap {}",
                self.hard_cap
            ))),
            TruncationMode::TargetError(e) if !(e > 0.0 && e < 1.0) => {
                Err(Error::Parameter(format!("truncation target must lie in (0, 1), got {e}")))
            }
            _ if self.hard_cap == 0 => Err(Error::Parameter("hard cap must be >= 1".into())),
            _ => Ok(()),
        }
    }
}

/// Which representation produced a d_j value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DjMethod {
    /// Finite double sum of Legendre functions.
    Legendre,
    /// Periodic angular integral (used where the double sum cancels).
    Angular,
}

/// Condition number above which the Legendre double sum is not trusted.
const DJ_MAX_CONDITION: f64 = 1e4;

/// d_j by the Legendre double sum.
///
/// P is taken on the Ferrers continuation to x > 1, e^{-iπμ/2} P^μ(x) in
/// terms of the real function of [`specfun::legendre_p`]. Returns
/// (value, condition number Σ|term| / |Σ term|).
pub fn ftr_d_j_legendre(p: &FtrParams, j: usize) -> Result<(f64, f64)> {
    let (k, m, d) = (p.k, p.m, p.delta);
    let rr = (m + k) * (m + k) - (k * d) * (k * d);
    let x = (m + k) / rr.sqrt();
    let ln_r = -0.5 * (j as f64 + m) * rr.ln();
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    let mut abs_sum = 0.0;
    let kmax = if d == 0.0 { 0 } else { j };
    for kk in 0..=kmax {
        let ln_bjk = ln_binom(j, kk) + if kk > 0 { kk as f64 * (d / 2.0).ln() } else { 0.0 };
        for l in 0..=kk {
            let mu = kk as i32 - 2 * l as i32;
            let deg = j as f64 + m - 1.0;
            let leg = specfun::legendre_p(deg, mu, x)?;
            if leg == 0.0 {
                continue;
            }
            let ga = j as f64 + m + 2.0 * l as f64 - kk as f64;
            let mag = (ln_bjk + ln_binom(kk, l) + ln_gamma_abs(ga) + ln_r).exp() * specfun::gamma_sign(ga) * leg;
            let phase = PI * (2.0 * l as f64 - kk as f64) / 2.0 - PI * mu as f64 / 2.0;
            let t = Complex64::from_polar(mag, phase);
            re.add(t.re);
            im.add(t.im);
            abs_sum += mag.abs();
        }
    }
    let (vr, vi) = (re.value(), im.value());
    if vi.abs() > 1e-8 * vr.abs() + 1e-12 * abs_sum.max(1.0).min(1.0) && vi.abs() > 1e-8 * vr.abs() + 1e-12 {
        return Err(Error::ImaginaryResidual { value: vr, residual: vi });
    }
    Ok((vr, abs_sum / vr.abs()))
}

fn ln_binom(n: usize, k: usize) -> f64 {
    ln_gamma_abs(n as f64 + 1.0) - ln_gamma_abs(k as f64 + 1.0) - ln_gamma_abs((n - k) as f64 + 1.0)
}

/// ln d_j by the angular representation
/// d_j = Γ(j+m) (1/π) ∫₀^π (1+Δcosθ)^j (m+K+KΔcosθ)^{-(j+m)} dθ,
/// integrated with the trapezoidal rule, which converges geometrically for
/// this periodic analytic integrand.
pub fn ftr_ln_d_j_angular(p: &FtrParams, j: usize) -> f64 {
    let (k, m, d) = (p.k, p.m, p.delta);
    let jf = j as f64;
    let g = |th: f64| {
        let c = th.cos();
        let lead = if j == 0 { 0.0 } else { jf * (d * c).ln_1p() };
        lead - (jf + m) * (m + k + k * d * c).ln()
    };
    if d == 0.0 || k == 0.0 {
        return ln_gamma_abs(jf + m) + g(0.0);
    }
    let peak = g(0.0);
    let mean = |n: usize| -> f64 {
        let mut acc = KahanSum::default();
        for i in 0..n {
            acc.add((g(2.0 * PI * i as f64 / n as f64) - peak).exp());
        }
        acc.value() / n as f64
    };
    // Rounding in g limits the attainable relative accuracy to ~|peak| ulp.
    let tol = 1e-15 * (1.0 + peak.abs());
    let mut n = 16;
    let mut prev = mean(n);
    loop {
        n *= 2;
        let cur = mean(n);
        if (cur - prev).abs() <= tol * cur || n > 1 << 20 {
            return ln_gamma_abs(jf + m) + peak + cur.ln();
        }
        prev = cur;
    }
}

/// ln d_j and the representation used.
pub fn ftr_ln_d_j(p: &FtrParams, j: usize) -> Result<(f64, DjMethod)> {
    if j <= 40 {
        if let Ok((v, cond)) = ftr_d_j_legendre(p, j) {
            if v > 0.0 && cond < DJ_MAX_CONDITION {
                return Ok((v.ln(), DjMethod::Legendre));
            }
        }
    }
    Ok((ftr_ln_d_j_angular(p, j), DjMethod::Angular))
}

/// FTR coefficient d_j.
pub fn ftr_d_j(p: &FtrParams, j: usize) -> Result<f64> {
    Ok(ftr_ln_d_j(p, j)?.0.exp())
}

type WeightCache = Mutex<HashMap<[u64; 3], Arc<Vec<f64>>>>;

fn weight_cache() -> &'static WeightCache {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ln w_j = ln(m^m/Γ(m)) + j ln K + ln d_j − ln j! for j = 0..=n, memoized on
/// (K, m, Δ).
pub fn ftr_ln_weights(p: &FtrParams, n: usize) -> Result<Arc<Vec<f64>>> {
    let key = p.shape_key();
    let have = weight_cache().lock().expect("weight cache").get(&key).cloned();
    if let Some(w) = &have {
        if w.len() > n {
            return Ok(w.clone());
        }
    }
    let start = have.as_ref().map_or(0, |w| w.len());
    let target = (n + 1).max(2 * start).max(32);
    let mut out: Vec<f64> = have.map(|w| (*w).clone()).unwrap_or_default();
    let c0 = p.m * p.m.ln() - ln_gamma_abs(p.m);
    use rayon::prelude::*;
    let fresh: Vec<Result<f64>> = (start..target)
        .into_par_iter()
        .map(|j| {
            if p.k == 0.0 {
                return Ok(if j == 0 { c0 + ftr_ln_d_j(p, 0)?.0 } else { f64::NEG_INFINITY });
            }
            let (ld, _) = ftr_ln_d_j(p, j)?;
            Ok(c0 + j as f64 * p.k.ln() + ld - ln_gamma_abs(j as f64 + 1.0))
        })
        .collect();
    for v in fresh {
        out.push(v?);
    }
    let arc = Arc::new(out);
    weight_cache().lock().expect("weight cache").insert(key, arc.clone());
    Ok(arc)
}

/// Mixture weights w_0..=w_n.
pub fn ftr_weights(p: &FtrParams, n: usize) -> Result<Vec<f64>> {
    Ok(ftr_ln_weights(p, n)?[..=n].iter().map(|l| l.exp()).collect())
}

/// Normalization deficit ε(N) = 1 − Σ_{j≤N} w_j.
pub fn ftr_deficit(p: &FtrParams, n: usize) -> Result<f64> {
    let lw = ftr_ln_weights(p, n)?;
    let mut acc = KahanSum::default();
    for l in &lw[..=n] {
        acc.add(l.exp());
    }
    Ok(1.0 - acc.value())
}

/// Smallest N with ε(N) < `epsilon`, searching up to [`DEFAULT_HARD_CAP`].
pub fn ftr_required_terms(p: &FtrParams, epsilon: f64) -> Result<(usize, f64)> {
    ftr_required_terms_capped(p, epsilon, DEFAULT_HARD_CAP)
}

/// [`ftr_required_terms`] with an explicit cap.
pub fn ftr_required_terms_capped(p: &FtrParams, epsilon: f64, cap: usize) -> Result<(usize, f64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let mut acc = KahanSum::default();
    let mut n_have = 64.min(cap);
    let mut lw = ftr_ln_weights(p, n_have)?;
    let mut j = 0;
    loop {
        if j > n_have {
            if n_have >= cap {
                return Err(Error::TruncationCap { cap, target: epsilon, achieved: 1.0 - acc.value() });
            }
            n_have = (2 * n_have).min(cap);
            lw = ftr_ln_weights(p, n_have)?;
        }
        acc.add(lw[j].exp());
        let def = 1.0 - acc.value();
        if def < epsilon {
            return Ok((j, def));
        }
        j += 1;
    }
}

/// Resolve a truncation policy into (N, ε(N)).
pub fn ftr_terms(p: &FtrParams, trunc: &TruncationPolicy) -> Result<(usize, f64)> {
    trunc.validate()?;
    if p.k == 0.0 {
        return Ok((0, 0.0));
    }
    match trunc.mode {
        TruncationMode::Fixed(n) => Ok((n, ftr_deficit(p, n)?)),
        TruncationMode::TargetError(e) => ftr_required_terms_capped(p, e, trunc.hard_cap),
    }
}

/// FTR mixture truncated at N terms, prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct FtrMixture {
    pub params: FtrParams,
    pub n_terms: usize,
    /// ε(N), the probability mass dropped by the truncation.
    pub deficit: f64,
    ln_w: Arc<Vec<f64>>,
    w: Vec<f64>,
    /// ln j for j = 0..=N+1 (entry 0 unused).
    ln_int: Vec<f64>,
}

impl FtrMixture {
    pub fn new(p: &FtrParams, trunc: &TruncationPolicy) -> Result<Self> {
        let (n, deficit) = ftr_terms(p, trunc)?;
        let ln_w = ftr_ln_weights(p, n)?;
        let w = ln_w[..=n].iter().map(|l| l.exp()).collect();
        let ln_int = (0..=n + 1).map(|j| (j as f64).ln()).collect();
        Ok(FtrMixture { params: *p, n_terms: n, deficit, ln_w, w, ln_int })
    }

    /// ln w_j for j = 0..=N.
    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_w[..=self.n_terms]
    }

    pub fn pdf(&self, gamma: f64) -> f64 {
        if !(gamma > 0.0) {
            return 0.0;
        }
        let ts = self.params.two_sigma2();
        let z = gamma / ts;
        let lz = z.ln();
        // ln(z^j e^{-z}/j!) by running sum
        let mut lk = -z;
        let mut acc = KahanSum::default();
        for (j, l) in self.ln_weights().iter().enumerate() {
            if j > 0 {
                lk += lz - self.ln_int[j];
            }
            acc.add((l + lk).exp());
        }
        acc.value() / ts
    }

    /// Σ_j w_j P(j+1, z), with P recurred downward from the top term.
    pub fn cdf(&self, gamma: f64) -> f64 {
        if !(gamma > 0.0) {
            return 0.0;
        }
        let z = gamma / self.params.two_sigma2();
        let lz = z.ln();
        let n = self.n_terms;
        let mut pj = gamma_p(n as f64 + 1.0, z);
        // ln of z^{j+1} e^{-z}/(j+1)! for the current j < n
        let mut lk = n as f64 * lz - z - ln_gamma_abs(n as f64 + 1.0);
        let mut acc = KahanSum::default();
        for j in (0..=n).rev() {
            if j < n {
                pj += lk.exp();
                lk += self.ln_int[j + 1] - lz;
            }
            acc.add(self.w[j] * pj);
        }
        acc.value()
    }

    /// Σ_j w_j Q(j+1, z), with Q recurred upward from e^{-z}.
    pub fn ccdf(&self, gamma: f64) -> f64 {
        if !(gamma > 0.0) {
            return 1.0 - self.deficit;
        }
        let z = gamma / self.params.two_sigma2();
        let lz = z.ln();
        let n = self.n_terms;
        let mut qj = (-z).exp();
        if qj == 0.0 {
            // Every term underflows until j is comparable to z.
            let nf = n as f64;
            if nf < z && nf * lz - z - ln_gamma_abs(nf + 1.0) + (z / (z - nf)).ln() < -745.0 {
                return 0.0;
            }
            let mut acc = KahanSum::default();
            for (j, &w) in self.w.iter().enumerate() {
                acc.add(w * gamma_q(j as f64 + 1.0, z));
            }
            return acc.value();
        }
        let mut lk = -z;
        let mut acc = KahanSum::default();
        for (j, &w) in self.w.iter().enumerate() {
            if j > 0 {
                lk += lz - self.ln_int[j];
                qj += lk.exp();
            }
            acc.add(w * qj.min(1.0));
        }
        acc.value()
    }
}

/// Truncated FTR density.
pub fn ftr_pdf(p: &FtrParams, gamma: f64, trunc: &TruncationPolicy) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("ftr_pdf requires gamma > 0, got {gamma}")));
    }
    Ok(FtrMixture::new(p, trunc)?.pdf(gamma))
}

/// Truncated FTR CDF, Σ_j w_j P(j+1, γ/2σ²).
pub fn ftr_cdf(p: &FtrParams, gamma: f64, trunc: &TruncationPolicy) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("ftr_cdf requires gamma >= 0, got {gamma}")));
    }
    Ok(FtrMixture::new(p, trunc)?.cdf(gamma))
}

/// Truncated FTR complementary CDF, Σ_j w_j Q(j+1, γ/2σ²).
pub fn ftr_ccdf(p: &FtrParams, gamma: f64, trunc: &TruncationPolicy) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("ftr_ccdf requires gamma >= 0, got {gamma}")));
    }
    Ok(FtrMixture::new(p, trunc)?.ccdf(gamma))
}

/// FTR generative sampler.
#[derive(Debug, Clone)]
pub struct FtrSampler {
    params: FtrParams,
    zeta: Option<Gamma<f64>>,
    v1: f64,
    v2: f64,
    sigma: f64,
}

impl FtrSampler {
    pub fn new(p: &FtrParams) -> Result<Self> {
        let zeta = if p.k > 0.0 {
            Some(Gamma::new(p.m, 1.0 / p.m).map_err(|e| Error::Parameter(e.to_string()))?)
        } else {
            None
        };
        // V1² + V2² = 2σ²K and 2V1V2 = 2σ²KΔ.
        let pk = p.two_sigma2() * p.k;
        let sum = (pk * (1.0 + p.delta)).sqrt();
        let diff = (pk * (1.0 - p.delta)).max(0.0).sqrt();
        Ok(FtrSampler { params: *p, zeta, v1: 0.5 * (sum + diff), v2: 0.5 * (sum - diff), sigma: p.sigma2.sqrt() })
    }

    pub fn params(&self) -> &FtrParams {
        &self.params
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let (mut re, mut im) = (self.sigma * x, self.sigma * y);
        if let Some(z) = &self.zeta {
            let a = z.sample(rng).sqrt();
            let p1 = 2.0 * PI * rng.gen::<f64>();
            let p2 = 2.0 * PI * rng.gen::<f64>();
            re += a * (self.v1 * p1.cos() + self.v2 * p2.cos());
            im += a * (self.v1 * p1.sin() + self.v2 * p2.sin());
        }
        re * re + im * im
    }
}

/// One FTR SNR draw.
pub fn ftr_sample<R: Rng + ?Sized>(p: &FtrParams, rng: &mut R) -> Result<f64> {
    Ok(FtrSampler::new(p)?.sample(rng))
}
