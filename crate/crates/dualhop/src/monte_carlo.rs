//! Monte Carlo estimation of the link metrics from the channel samplers.
//!
//! Draws are split into `workers` ChaCha substreams keyed by (seed, stream
//! id). Streams run in parallel and are merged in stream order, so a given
//! (seed, workers) pair reproduces bit-identical estimates on any machine.

use crate::channels::{FtrParams, FtrSampler, GammaGammaParams, GgSampler};
use crate::error::{Error, Result};
use crate::link_metrics::{CapacityMode, EffectiveCapacityParams, ModulationScheme, RelayConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

const Z95: f64 = 1.959_963_984_540_054;

/// Which FSO sampler drives the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FsoSamplerKind {
    #[default]
    InverseCdf,
    ProductForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Number of independent substreams (the unit of parallel work).
    pub workers: usize,
    pub fso_sampler: FsoSamplerKind,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 1_000_000, seed: 1, workers: 8, fso_sampler: FsoSamplerKind::InverseCdf }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed, ..Default::default() }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(Error::Parameter(format!("at least 1000 samples required, got {}", self.samples)));
        }
        if self.workers == 0 {
            return Err(Error::Parameter("workers must be >= 1".into()));
        }
        Ok(())
    }

    /// Sample count of stream `k`.
    fn share(&self, k: usize) -> u64 {
        let w = self.workers as u64;
        self.samples / w + u64::from((k as u64) < self.samples % w)
    }
}

/// Sample mean with its standard error and a normal 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub samples_used: u64,
}

impl Estimate {
    fn new(mean: f64, std_error: f64, n: u64) -> Self {
        Estimate { mean, std_error, ci95_low: mean - Z95 * std_error, ci95_high: mean + Z95 * std_error, samples_used: n }
    }

    /// Floor the standard error at half a count of a functional with values
    /// in [0, range]: n draws cannot resolve a mean below range/(2n), which
    /// matters when the mean is carried by events rarer than 1/n.
    pub fn with_resolution_floor(self, range: f64) -> Estimate {
        let n = self.samples_used as f64;
        let floor = range * 0.5f64.sqrt() / n;
        if self.std_error >= floor {
            self
        } else {
            Estimate::new(self.mean, floor, self.samples_used)
        }
    }

    /// Whether the standard error is set by the resolution floor.
    pub fn resolution_limited(&self, range: f64) -> bool {
        self.std_error <= range * 0.5f64.sqrt() / self.samples_used as f64
    }

    /// Whether `value` lies within k standard errors of the mean.
    pub fn contains(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.std_error
    }

    /// Distance of `value` from the mean in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        if self.std_error > 0.0 {
            (value - self.mean) / self.std_error
        } else if value == self.mean {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Estimate::new(self.mean, (var / self.n as f64).sqrt(), self.n)
    }
}

/// Both hops plus the relay combination rule.
#[derive(Debug, Clone)]
pub struct LinkSampler {
    pub fso: GgSampler,
    pub rf: FtrSampler,
    pub relay: RelayConfig,
}

impl LinkSampler {
    pub fn new(gg: &GammaGammaParams, ftr: &FtrParams, relay: &RelayConfig, kind: FsoSamplerKind) -> Result<Self> {
        relay.validate()?;
        let fso = match kind {
            FsoSamplerKind::InverseCdf => GgSampler::inverse_cdf(gg)?,
            FsoSamplerKind::ProductForm => GgSampler::product_form(gg)?,
        };
        Ok(LinkSampler { fso, rf: FtrSampler::new(ftr)?, relay: *relay })
    }

    /// (γ_FSO, γ_RF, γ_end-to-end).
    pub fn sample_hops<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let g1 = self.fso.sample(rng);
        let g2 = self.rf.sample(rng);
        (g1, g2, combine(&self.relay, g1, g2))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_hops(rng).2
    }
}

/// End-to-end SNR from the two hop SNRs.
pub fn combine(relay: &RelayConfig, g1: f64, g2: f64) -> f64 {
    match *relay {
        RelayConfig::AfFixedGain { c_r } => g1 * g2 / (g2 + c_r),
        RelayConfig::Df => g1.min(g2),
    }
}

/// One end-to-end draw.
pub fn sample_end_to_end<R: Rng + ?Sized>(
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    rng: &mut R,
) -> Result<f64> {
    Ok(LinkSampler::new(gg, ftr, relay, FsoSamplerKind::InverseCdf)?.sample(rng))
}

/// Random stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample means of several functionals of the end-to-end SNR from one set
/// of draws.
pub fn estimate_functionals(
    cfg: &McConfig,
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    fns: &[&(dyn Fn(f64) -> f64 + Sync)],
) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    let link = LinkSampler::new(gg, ftr, relay, cfg.fso_sampler)?;
    let parts: Vec<Vec<Moments>> = (0..cfg.workers)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(cfg.seed, k as u64);
            let mut acc = vec![Moments::default(); fns.len()];
            for _ in 0..cfg.share(k) {
                let g = link.sample(&mut rng);
                for (a, f) in acc.iter_mut().zip(fns) {
                    a.push(f(g));
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); fns.len()];
    for p in &parts {
        for (t, m) in total.iter_mut().zip(p) {
            t.merge(m);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// Outage indicator estimate with binomial standard error. With zero (or
/// all) hits the error uses half a count, so the interval is never empty.
pub fn binomial_estimate(hits: u64, n: u64) -> Estimate {
    let nf = n as f64;
    let p = hits as f64 / nf;
    let pv = p.clamp(0.5 / nf, 1.0 - 0.5 / nf);
    Estimate::new(p, (pv * (1.0 - pv) / nf).sqrt(), n)
}

/// P[γ < γ_th].
pub fn estimate_outage(
    cfg: &McConfig,
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    gamma_th: f64,
) -> Result<Estimate> {
    if !(gamma_th >= 0.0) {
        return Err(Error::Domain(format!("threshold must be >= 0, got {gamma_th}")));
    }
    let ind = |g: f64| if g < gamma_th { 1.0 } else { 0.0 };
    let e = estimate_functionals(cfg, gg, ftr, relay, &[&ind])?[0];
    Ok(binomial_estimate((e.mean * e.samples_used as f64).round() as u64, e.samples_used))
}

/// Average of the conditional bit error probability.
pub fn estimate_ber(
    cfg: &McConfig,
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    modn: &ModulationScheme,
) -> Result<Estimate> {
    modn.validate()?;
    let f = |g: f64| modn.conditional_ber(g);
    let range = 0.5 * modn.delta * modn.n() as f64;
    Ok(estimate_functionals(cfg, gg, ftr, relay, &[&f])?[0].with_resolution_floor(range))
}

/// E[log₂(1 + cγ)].
pub fn estimate_capacity(
    cfg: &McConfig,
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    cap: &CapacityMode,
) -> Result<Estimate> {
    let c = cap.c;
    let f = |g: f64| (c * g).ln_1p() / LN_2;
    Ok(estimate_functionals(cfg, gg, ftr, relay, &[&f])?[0])
}

/// −(1/A) log₂ of the mean of (1+γ)^{−A}; delta-method standard error.
/// Apply [`Estimate::with_resolution_floor`] with range 1 to `mgf` first.
pub fn effective_capacity_from_mgf(mgf: &Estimate, a: f64) -> Estimate {
    let m = mgf.mean;
    let v = -m.log2() / a;
    Estimate::new(v, mgf.std_error / (a * LN_2 * m), mgf.samples_used)
}

pub fn estimate_effective_capacity(
    cfg: &McConfig,
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    ec: &EffectiveCapacityParams,
) -> Result<Estimate> {
    let ec = EffectiveCapacityParams::new(ec.a)?;
    let a = ec.a;
    let f = |g: f64| (-a * g.ln_1p()).exp();
    let m = estimate_functionals(cfg, gg, ftr, relay, &[&f])?[0].with_resolution_floor(1.0);
    Ok(effective_capacity_from_mgf(&m, a))
}

/// Outage estimates below this use [`RARE_OUTAGE_FACTOR`] times more draws.
pub const RARE_OUTAGE_LEVEL: f64 = 1e-4;
pub const RARE_OUTAGE_FACTOR: u64 = 10;

/// Metrics to estimate from one set of draws.
#[derive(Debug, Clone, Default)]
pub struct McRequest {
    pub gamma_th: Option<f64>,
    pub modulations: Vec<ModulationScheme>,
    pub capacity: Option<CapacityMode>,
    pub ec_a: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct McMetrics {
    pub outage: Option<Estimate>,
    pub ber: Vec<Estimate>,
    pub capacity: Option<Estimate>,
    pub effcap: Vec<Estimate>,
}

/// All requested metrics from one pass. An outage estimate below
/// [`RARE_OUTAGE_LEVEL`] is redrawn with [`RARE_OUTAGE_FACTOR`] times the
/// samples on an independent seed.
pub fn estimate_metrics(
    cfg: &McConfig,
    gg: &GammaGammaParams,
    ftr: &FtrParams,
    relay: &RelayConfig,
    req: &McRequest,
) -> Result<McMetrics> {
    for m in &req.modulations {
        m.validate()?;
    }
    for &a in &req.ec_a {
        EffectiveCapacityParams::new(a)?;
    }
    if let Some(t) = req.gamma_th {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("threshold must be >= 0, got {t}")));
        }
    }
    let mut fns: Vec<Box<dyn Fn(f64) -> f64 + Sync + '_>> = Vec::new();
    if let Some(t) = req.gamma_th {
        fns.push(Box::new(move |g| if g < t { 1.0 } else { 0.0 }));
    }
    for m in &req.modulations {
        fns.push(Box::new(move |g| m.conditional_ber(g)));
    }
    if let Some(c) = req.capacity.map(|c| c.c) {
        fns.push(Box::new(move |g| (c * g).ln_1p() / LN_2));
    }
    for &a in &req.ec_a {
        fns.push(Box::new(move |g| (-a * g.ln_1p()).exp()));
    }
    let refs: Vec<&(dyn Fn(f64) -> f64 + Sync)> = fns.iter().map(|f| f.as_ref()).collect();
    let est = estimate_functionals(cfg, gg, ftr, relay, &refs)?;
    let mut it = est.into_iter();
    let mut out = McMetrics::default();
    if let Some(t) = req.gamma_th {
        let e = it.next().unwrap();
        let mut o = binomial_estimate((e.mean * e.samples_used as f64).round() as u64, e.samples_used);
        if o.mean < RARE_OUTAGE_LEVEL {
            let big = McConfig { samples: cfg.samples * RARE_OUTAGE_FACTOR, seed: cfg.seed.wrapping_add(1), ..*cfg };
            o = estimate_outage(&big, gg, ftr, relay, t)?;
        }
        out.outage = Some(o);
    }
    for m in &req.modulations {
        out.ber.push(it.next().unwrap().with_resolution_floor(0.5 * m.delta * m.n() as f64));
    }
    if req.capacity.is_some() {
        out.capacity = it.next();
    }
    for &a in &req.ec_a {
        out.effcap.push(effective_capacity_from_mgf(&it.next().unwrap().with_resolution_floor(1.0), a));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Detection;

    fn scenario() -> (GammaGammaParams, FtrParams) {
        (
            GammaGammaParams::from_mu_r(5.42, 3.8, 5.0263, Detection::Heterodyne, 100.0).unwrap(),
            FtrParams::from_mean_snr(10.0, 2.0, 0.5, 100.0).unwrap(),
        )
    }

    #[test]
    fn relay_rules_bound_the_hops() {
        let (gg, ftr) = scenario();
        for relay in [RelayConfig::Df, RelayConfig::af(1.7).unwrap()] {
            let link = LinkSampler::new(&gg, &ftr, &relay, FsoSamplerKind::InverseCdf).unwrap();
            let mut rng = substream(3, 0);
            for _ in 0..1000 {
                let (g1, g2, g) = link.sample_hops(&mut rng);
                assert!(g <= g1);
                if !relay.is_af() {
                    assert!(g <= g2);
                }
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed_and_workers() {
        let (gg, ftr) = scenario();
        let cfg = McConfig::new(20_000, 42).with_workers(3);
        let a = estimate_capacity(&cfg, &gg, &ftr, &RelayConfig::Df, &CapacityMode { c: 1.0 }).unwrap();
        let b = estimate_capacity(&cfg, &gg, &ftr, &RelayConfig::Df, &CapacityMode { c: 1.0 }).unwrap();
        assert_eq!(a, b);
        let c = estimate_capacity(&cfg.with_workers(5), &gg, &ftr, &RelayConfig::Df, &CapacityMode { c: 1.0 }).unwrap();
        assert_ne!(a.mean, c.mean);
        assert!((a.mean - c.mean).abs() < 5.0 * (a.std_error.hypot(c.std_error)));
    }

    #[test]
    fn outage_limits() {
        let (gg, ftr) = scenario();
        let cfg = McConfig::new(10_000, 1);
        let relay = RelayConfig::af(1.7).unwrap();
        assert_eq!(estimate_outage(&cfg, &gg, &ftr, &relay, 0.0).unwrap().mean, 0.0);
        assert_eq!(estimate_outage(&cfg, &gg, &ftr, &relay, f64::MAX).unwrap().mean, 1.0);
    }

    #[test]
    fn conditional_ber_reductions() {
        assert_eq!(ModulationScheme::cbpsk().conditional_ber(0.0), 0.5);
        let g: f64 = 1.3;
        assert!((ModulationScheme::dbpsk().conditional_ber(g) / (0.5 * (-g).exp()) - 1.0).abs() < 1e-13);
        let e = 0.5 * crate::specfun::erfc(g.sqrt());
        assert!((ModulationScheme::cbpsk().conditional_ber(g) - e).abs() < 1e-14);
    }

    #[test]
    fn effective_not_above_ergodic() {
        let (gg, ftr) = scenario();
        let cfg = McConfig::new(50_000, 9);
        let relay = RelayConfig::af(1.7).unwrap();
        let c = estimate_capacity(&cfg, &gg, &ftr, &relay, &CapacityMode { c: 1.0 }).unwrap();
        let e = estimate_effective_capacity(&cfg, &gg, &ftr, &relay, &EffectiveCapacityParams::new(1.0).unwrap()).unwrap();
        assert!(e.mean <= c.mean);
    }

    #[test]
    fn std_error_scales_with_samples() {
        let (gg, ftr) = scenario();
        let f = |n| {
            estimate_capacity(&McConfig::new(n, 5), &gg, &ftr, &RelayConfig::Df, &CapacityMode { c: 1.0 })
                .unwrap()
                .std_error
        };
        let ratio = f(10_000) / f(40_000);
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..300].iter().for_each(|&x| a.push(x));
        xs[300..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-14);
        assert!((a.m2 - all.m2).abs() < 1e-10);
    }

    #[test]
    fn rejects_tiny_sample_counts() {
        let (gg, ftr) = scenario();
        assert!(estimate_outage(&McConfig::new(10, 1), &gg, &ftr, &RelayConfig::Df, 1.0).is_err());
    }
}
