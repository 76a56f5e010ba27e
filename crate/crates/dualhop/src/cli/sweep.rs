//! SNR sweeps and the CSV row format.

use super::config::ScenarioConfig;
use crate::channels::{FtrParams, GammaGammaParams};
use crate::error::{Error, Result};
use crate::link_metrics::{
    af_cdf_asymptotic, avg_ber, avg_ber_asymptotic, avg_ber_oracle, df_cdf_asymptotic, effective_capacity,
    effective_capacity_oracle, end_to_end_cdf_oracle, ergodic_capacity, ergodic_capacity_oracle, outage,
    EffectiveCapacityParams, RelayConfig,
};
use crate::metric::MetricResult;
use crate::monte_carlo::{estimate_metrics, Estimate, McRequest};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricKind {
    Outage,
    Ber,
    Capacity,
    Effcap,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::Outage, MetricKind::Ber, MetricKind::Capacity, MetricKind::Effcap];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Outage => "outage",
            MetricKind::Ber => "ber",
            MetricKind::Capacity => "capacity",
            MetricKind::Effcap => "effcap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SweepMethod {
    Exact,
    Asymptotic,
    Oracle,
    Mc,
}

impl SweepMethod {
    pub const ALL: [SweepMethod; 4] = [SweepMethod::Exact, SweepMethod::Asymptotic, SweepMethod::Oracle, SweepMethod::Mc];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepMethod::Exact => "exact",
            SweepMethod::Asymptotic => "asymptotic",
            SweepMethod::Oracle => "oracle",
            SweepMethod::Mc => "mc",
        }
    }

    /// Asymptotic expansions exist for outage and BER only.
    pub fn supports(&self, m: MetricKind) -> bool {
        *self != SweepMethod::Asymptotic || matches!(m, MetricKind::Outage | MetricKind::Ber)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    pub metrics: Vec<MetricKind>,
    pub methods: Vec<SweepMethod>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            snr_db_start: 0.0,
            snr_db_stop: 40.0,
            snr_db_step: 5.0,
            metrics: MetricKind::ALL.to_vec(),
            methods: vec![SweepMethod::Exact],
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.snr_db_start.is_finite() && self.snr_db_stop.is_finite() && self.snr_db_start < self.snr_db_stop) {
            return Err(Error::Parameter(format!(
                "need snr_db_start < snr_db_stop, got {} and {}",
                self.snr_db_start, self.snr_db_stop
            )));
        }
        if !(self.snr_db_step > 0.0) {
            return Err(Error::Parameter(format!("snr_db_step must be > 0, got {}", self.snr_db_step)));
        }
        Ok(())
    }

    /// Grid points start, start + step, ..., up to stop inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.snr_db_start + i as f64 * self.snr_db_step).collect()
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRow {
    pub scenario_id: String,
    pub metric: String,
    pub method: String,
    pub snr_db: f64,
    pub value: f64,
    pub err_estimate: f64,
    pub n_terms: usize,
    pub samples: u64,
}

/// A grid point that failed; its row carries NaN value and error.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub snr_db: f64,
    pub metric: String,
    pub method: SweepMethod,
    pub error: Error,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<OutputRow>,
    pub failures: Vec<PointFailure>,
}

/// A concrete metric: kind plus modulation index or QoS exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Item {
    Outage,
    Ber(usize),
    Capacity,
    Effcap(f64),
}

fn items(cfg: &ScenarioConfig, metrics: &[MetricKind]) -> Vec<Item> {
    let mut out = Vec::new();
    for m in MetricKind::ALL {
        if !metrics.contains(&m) {
            continue;
        }
        match m {
            MetricKind::Outage => out.push(Item::Outage),
            MetricKind::Ber => out.extend((0..cfg.modulations.len()).map(Item::Ber)),
            MetricKind::Capacity => out.push(Item::Capacity),
            MetricKind::Effcap => out.extend(cfg.ec_a.iter().map(|&a| Item::Effcap(a))),
        }
    }
    out
}

impl Item {
    fn kind(&self) -> MetricKind {
        match self {
            Item::Outage => MetricKind::Outage,
            Item::Ber(_) => MetricKind::Ber,
            Item::Capacity => MetricKind::Capacity,
            Item::Effcap(_) => MetricKind::Effcap,
        }
    }

    fn label(&self, cfg: &ScenarioConfig) -> String {
        match *self {
            Item::Outage => "outage".into(),
            Item::Ber(i) => format!("ber:{}", cfg.modulations[i].name),
            Item::Capacity => "capacity".into(),
            Item::Effcap(a) => format!("effcap:a={a}"),
        }
    }
}

fn analytic(cfg: &ScenarioConfig, gg: &GammaGammaParams, ftr: &FtrParams, item: Item, method: SweepMethod) -> Result<MetricResult> {
    let t = &cfg.truncation;
    let relay = &cfg.relay;
    match (method, item) {
        (SweepMethod::Exact, Item::Outage) => outage(gg, ftr, relay, cfg.gamma_th, t),
        (SweepMethod::Exact, Item::Ber(i)) => avg_ber(gg, ftr, relay, &cfg.modulations[i].scheme, t),
        (SweepMethod::Exact, Item::Capacity) => ergodic_capacity(gg, ftr, relay, &cfg.capacity_mode(), t),
        (SweepMethod::Exact, Item::Effcap(a)) => effective_capacity(gg, ftr, relay, &EffectiveCapacityParams::new(a)?, t),
        (SweepMethod::Oracle, Item::Outage) => end_to_end_cdf_oracle(gg, ftr, relay, cfg.gamma_th, t),
        (SweepMethod::Oracle, Item::Ber(i)) => avg_ber_oracle(gg, ftr, relay, &cfg.modulations[i].scheme, t),
        (SweepMethod::Oracle, Item::Capacity) => ergodic_capacity_oracle(gg, ftr, relay, &cfg.capacity_mode(), t),
        (SweepMethod::Oracle, Item::Effcap(a)) => {
            effective_capacity_oracle(gg, ftr, relay, &EffectiveCapacityParams::new(a)?, t)
        }
        (SweepMethod::Asymptotic, Item::Outage) => match relay {
            RelayConfig::AfFixedGain { .. } => af_cdf_asymptotic(gg, ftr, relay, cfg.gamma_th, t).map(|r| r.0),
            RelayConfig::Df => df_cdf_asymptotic(gg, ftr, cfg.gamma_th, t).map(|r| r.0),
        },
        (SweepMethod::Asymptotic, Item::Ber(i)) => avg_ber_asymptotic(gg, ftr, relay, &cfg.modulations[i].scheme, t).map(|r| r.0),
        (m, i) => Err(Error::Parameter(format!("method {} does not apply to {:?}", m.as_str(), i.kind()))),
    }
}

fn mc_estimates(cfg: &ScenarioConfig, gg: &GammaGammaParams, ftr: &FtrParams, its: &[Item]) -> Result<Vec<Estimate>> {
    let req = McRequest {
        gamma_th: its.contains(&Item::Outage).then_some(cfg.gamma_th),
        modulations: its
            .iter()
            .filter_map(|i| if let Item::Ber(k) = i { Some(cfg.modulations[*k].scheme.clone()) } else { None })
            .collect(),
        capacity: its.contains(&Item::Capacity).then(|| cfg.capacity_mode()),
        ec_a: its.iter().filter_map(|i| if let Item::Effcap(a) = i { Some(*a) } else { None }).collect(),
    };
    let m = estimate_metrics(&cfg.mc, gg, ftr, &cfg.relay, &req)?;
    let (mut b, mut e) = (m.ber.into_iter(), m.effcap.into_iter());
    Ok(its
        .iter()
        .map(|i| match i {
            Item::Outage => m.outage.unwrap(),
            Item::Ber(_) => b.next().unwrap(),
            Item::Capacity => m.capacity.unwrap(),
            Item::Effcap(_) => e.next().unwrap(),
        })
        .collect())
}

fn row(cfg: &ScenarioConfig, label: String, method: SweepMethod, snr_db: f64) -> OutputRow {
    OutputRow {
        scenario_id: cfg.id.clone(),
        metric: label,
        method: method.as_str().to_string(),
        snr_db,
        value: f64::NAN,
        err_estimate: f64::NAN,
        n_terms: 0,
        samples: 0,
    }
}

/// All rows of one grid point, in item-then-method order.
pub fn evaluate_point(cfg: &ScenarioConfig, snr_db: f64, metrics: &[MetricKind], methods: &[SweepMethod]) -> SweepOutput {
    let its = items(cfg, metrics);
    let mut out = SweepOutput::default();
    let links = cfg.links_at(snr_db);
    let mc = if methods.contains(&SweepMethod::Mc) && !its.is_empty() {
        Some(links.clone().and_then(|(gg, ftr)| mc_estimates(cfg, &gg, &ftr, &its)))
    } else {
        None
    };
    for (k, item) in its.iter().enumerate() {
        for &method in SweepMethod::ALL.iter().filter(|m| methods.contains(m)) {
            if !method.supports(item.kind()) {
                continue;
            }
            let mut r = row(cfg, item.label(cfg), method, snr_db);
            let res = match method {
                SweepMethod::Mc => match mc.as_ref().unwrap() {
                    Ok(est) => {
                        r.value = est[k].mean;
                        r.err_estimate = est[k].std_error;
                        r.samples = est[k].samples_used;
                        Ok(())
                    }
                    Err(e) => Err(e.clone()),
                },
                _ => links.clone().and_then(|(gg, ftr)| analytic(cfg, &gg, &ftr, *item, method)).map(|m| {
                    r.value = m.value;
                    r.err_estimate = m.err_estimate;
                    r.n_terms = m.series_terms_used;
                }),
            };
            if let Err(error) = res {
                out.failures.push(PointFailure { snr_db, metric: r.metric.clone(), method, error });
            }
            out.rows.push(r);
        }
    }
    out
}

/// Evaluate every grid point in parallel; rows come back in grid order.
pub fn run_sweep(cfg: &ScenarioConfig, sweep: &SweepSpec) -> Result<SweepOutput> {
    sweep.validate()?;
    let parts: Vec<SweepOutput> =
        sweep.grid().into_par_iter().map(|s| evaluate_point(cfg, s, &sweep.metrics, &sweep.methods)).collect();
    let mut out = SweepOutput::default();
    for p in parts {
        out.rows.extend(p.rows);
        out.failures.extend(p.failures);
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 8] = ["scenario_id", "metric", "method", "snr_db", "value", "err_estimate", "n_terms", "samples"];

/// Header plus rows; the header is written even when there are no rows.
pub fn write_csv<W: Write>(w: W, rows: &[OutputRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Config { key: "output".into(), msg: e.to_string() };
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        wr.serialize(r).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Config { key: "output".into(), msg: e.to_string() })
}

/// Parse rows written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<OutputRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let bad = |e: csv::Error| Error::Config { key: "csv".into(), msg: e.to_string() };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(bad)?;
        let f = |i: usize| rec.get(i).unwrap_or("").to_string();
        let num = |i: usize| -> Result<f64> {
            rec.get(i).unwrap_or("").parse::<f64>().map_err(|_| Error::Config { key: CSV_HEADER[i].into(), msg: "not a number".into() })
        };
        rows.push(OutputRow {
            scenario_id: f(0),
            metric: f(1),
            method: f(2),
            snr_db: num(3)?,
            value: num(4)?,
            err_estimate: num(5)?,
            n_terms: num(6)? as usize,
            samples: num(7)? as u64,
        });
    }
    Ok(rows)
}
