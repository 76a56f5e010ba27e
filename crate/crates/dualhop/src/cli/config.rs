//! Scenario files.
//!
//! A scenario is a small TOML file: `[section]` headers and `key = value`
//! pairs with numbers and strings only. Lists are comma-separated strings.
//!
//! ```toml
//! id = "af-moderate"
//!
//! [fso]
//! turbulence = "moderate"   # or alpha = .., beta = .., or rytov = ..
//! pointing = "negligible"   # or xi = ..
//! r = 1
//!
//! [rf]
//! k = 10
//! m = 2
//! delta = 0.5
//!
//! [relay]
//! mode = "af"
//! c_r = 1.7
//! ```

use super::sweep::{MetricKind, SweepMethod, SweepSpec};
use crate::channels::{
    rytov_to_alpha_beta, Detection, FtrParams, GammaGammaParams, RytovInputs, TruncationMode, TruncationPolicy,
    DEFAULT_HARD_CAP, XI_INF,
};
use crate::error::{Error, Result};
use crate::link_metrics::{CapacityMode, EffectiveCapacityParams, ModulationScheme, RelayConfig};
use crate::monte_carlo::{FsoSamplerKind, McConfig};
use std::collections::BTreeSet;
use std::path::Path;
use toml::{Table, Value};

/// Turbulence presets: (α, β).
pub const TURBULENCE_PRESETS: [(&str, f64, f64); 2] = [("moderate", 5.42, 3.8), ("strong", 3.446, 1.032)];

/// Pointing-error presets: ξ.
pub const POINTING_PRESETS: [(&str, f64); 3] = [("strong", 0.893), ("negligible", 5.0263), ("none", XI_INF)];

/// Which FSO quantity the sweep SNR sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrReference {
    /// μ_r = γ̄ (equal electrical SNRs of both hops).
    MuR,
    /// γ̄₁ = γ̄, μ_r from the detection-dependent ratio.
    GammaBar1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsoConfig {
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub detection: Detection,
    pub snr_reference: SnrReference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfConfig {
    pub k: f64,
    pub m: f64,
    pub delta: f64,
}

/// A named modulation scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedModulation {
    pub name: String,
    pub scheme: ModulationScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: String,
    pub description: String,
    pub fso: FsoConfig,
    pub rf: RfConfig,
    pub relay: RelayConfig,
    pub gamma_th: f64,
    pub modulations: Vec<NamedModulation>,
    /// None selects the detection default.
    pub capacity_c: Option<f64>,
    pub ec_a: Vec<f64>,
    pub truncation: TruncationPolicy,
    pub mc: McConfig,
    /// Single-point SNR for `eval`.
    pub snr_db: f64,
    pub sweep: SweepSpec,
}

impl ScenarioConfig {
    /// Both hops at average SNR γ̄ = 10^{dB/10}.
    pub fn links_at(&self, snr_db: f64) -> Result<(GammaGammaParams, FtrParams)> {
        let g = 10f64.powf(snr_db / 10.0);
        let f = &self.fso;
        let gg = match f.snr_reference {
            SnrReference::MuR => GammaGammaParams::from_mu_r(f.alpha, f.beta, f.xi, f.detection, g)?,
            SnrReference::GammaBar1 => GammaGammaParams::new(f.alpha, f.beta, f.xi, f.detection, g)?,
        };
        let ftr = FtrParams::from_mean_snr(self.rf.k, self.rf.m, self.rf.delta, g)?;
        Ok((gg, ftr))
    }

    pub fn capacity_mode(&self) -> CapacityMode {
        match self.capacity_c {
            Some(c) => CapacityMode { c },
            None => CapacityMode::for_detection(self.fso.detection),
        }
    }

    /// Every resolved setting, one `key = value` per line.
    pub fn describe(&self) -> Vec<String> {
        let f = &self.fso;
        let relay = match self.relay {
            RelayConfig::AfFixedGain { c_r } => format!("af (c_r = {c_r})"),
            RelayConfig::Df => "df".to_string(),
        };
        let trunc = match self.truncation.mode {
            TruncationMode::Fixed(n) => format!("fixed N = {n}"),
            TruncationMode::TargetError(e) => format!("target {e:e}"),
        };
        let mods: Vec<String> = self
            .modulations
            .iter()
            .map(|m| format!("{} (delta = {}, p = {}, q = {:?})", m.name, m.scheme.delta, m.scheme.p, m.scheme.q))
            .collect();
        vec![
            format!("scenario = {}", self.id),
            format!("fso.alpha = {}", f.alpha),
            format!("fso.beta = {}", f.beta),
            format!("fso.xi = {}", f.xi),
            format!("fso.r = {}", f.detection.r()),
            format!("fso.snr_reference = {}", if f.snr_reference == SnrReference::MuR { "mu_r" } else { "gamma_bar1" }),
            format!("rf.k = {}", self.rf.k),
            format!("rf.m = {}", self.rf.m),
            format!("rf.delta = {}", self.rf.delta),
            format!("relay = {relay}"),
            format!("metrics.gamma_th = {}", self.gamma_th),
            format!("metrics.modulation = {}", mods.join(", ")),
            format!("metrics.capacity_c = {}", self.capacity_mode().c),
            format!("metrics.ec_a = {:?}", self.ec_a),
            format!("truncation = {trunc}, hard cap {}", self.truncation.hard_cap),
            format!(
                "mc = {} samples, seed {}, {} streams, {:?} FSO sampler",
                self.mc.samples, self.mc.seed, self.mc.workers, self.mc.fso_sampler
            ),
            format!("snr_db = {}", self.snr_db),
            format!(
                "sweep = {}..{} dB step {}, metrics [{}], methods [{}]",
                self.sweep.snr_db_start,
                self.sweep.snr_db_stop,
                self.sweep.snr_db_step,
                self.sweep.metrics.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
                self.sweep.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(",")
            ),
        ]
    }
}

fn cfg_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), msg: msg.into() }
}

/// A table with its dotted path; tracks which keys were read.
struct Section<'a> {
    path: String,
    table: Option<&'a Table>,
    seen: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(path: &str, table: Option<&'a Table>) -> Self {
        Section { path: path.to_string(), table, seen: BTreeSet::new() }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn get(&mut self, k: &str) -> Option<&'a Value> {
        self.seen.insert(k.to_string());
        self.table.and_then(|t| t.get(k))
    }

    fn has(&self, k: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(k))
    }

    fn real(&mut self, k: &str) -> Result<Option<f64>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(Value::String(s)) if s == "inf" || s == "infinity" => Ok(Some(f64::INFINITY)),
            Some(v) => Err(cfg_err(&self.key(k), format!("expected a number, found {}", v.type_str()))),
        }
    }

    fn real_or(&mut self, k: &str, default: f64) -> Result<f64> {
        Ok(self.real(k)?.unwrap_or(default))
    }

    fn required(&mut self, k: &str) -> Result<f64> {
        self.real(k)?.ok_or_else(|| cfg_err(&self.key(k), "missing required key"))
    }

    fn positive(&mut self, k: &str) -> Result<Option<f64>> {
        match self.real(k)? {
            Some(x) if !(x > 0.0) => Err(cfg_err(&self.key(k), format!("must be > 0, got {x}"))),
            v => Ok(v),
        }
    }

    fn uint(&mut self, k: &str) -> Result<Option<u64>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::Float(x)) if *x >= 0.0 && x.fract() == 0.0 && *x < 1.8e19 => Ok(Some(*x as u64)),
            Some(v) => Err(cfg_err(&self.key(k), format!("expected a non-negative integer, found {v}"))),
        }
    }

    fn string(&mut self, k: &str) -> Result<Option<&'a str>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(v) => Err(cfg_err(&self.key(k), format!("expected a string, found {}", v.type_str()))),
        }
    }

    /// Comma-separated list; a bare number counts as a one-element list.
    fn list(&mut self, k: &str) -> Result<Option<Vec<String>>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => {
                Ok(Some(s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()))
            }
            Some(Value::Float(x)) => Ok(Some(vec![x.to_string()])),
            Some(Value::Integer(i)) => Ok(Some(vec![i.to_string()])),
            Some(v) => Err(cfg_err(&self.key(k), format!("expected a comma-separated string, found {}", v.type_str()))),
        }
    }

    fn real_list(&mut self, k: &str) -> Result<Option<Vec<f64>>> {
        let key = self.key(k);
        match self.list(k)? {
            None => Ok(None),
            Some(items) => items
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| cfg_err(&key, format!("`{s}` is not a number"))))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.seen.contains(k) {
                    return Err(cfg_err(&self.key(k), "unknown key"));
                }
            }
        }
        Ok(())
    }
}

fn sub<'a>(root: &'a Table, name: &str) -> Result<Option<&'a Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(v) => Err(cfg_err(name, format!("expected a [{name}] section, found {}", v.type_str()))),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn lookup<T: Copy>(table: &[(&str, T)], key: &str, name: &str) -> Result<T> {
    table.iter().find(|(n, _)| *n == name).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
        cfg_err(key, format!("unknown preset `{name}`, expected one of {}", names.join(", ")))
    })
}

fn parse_fso(sec: &mut Section) -> Result<FsoConfig> {
    let turbulence = sec.string("turbulence")?;
    let has_ab = sec.has("alpha") || sec.has("beta");
    let has_rytov = sec.has("rytov") || sec.has("cn2");
    let sources = usize::from(turbulence.is_some()) + usize::from(has_ab) + usize::from(has_rytov);
    if sources > 1 {
        return Err(cfg_err(&sec.key("turbulence"), "give exactly one of turbulence, alpha/beta, rytov or cn2/wavelength/distance"));
    }
    let (alpha, beta) = if let Some(name) = turbulence {
        let (a, b) = lookup(&TURBULENCE_PRESETS.map(|(n, a, b)| (n, (a, b))), &sec.key("turbulence"), name)?;
        (a, b)
    } else if has_rytov {
        let inputs = if sec.has("rytov") {
            RytovInputs::Variance(sec.positive("rytov")?.unwrap())
        } else {
            RytovInputs::Physical {
                cn2: sec.positive("cn2")?.unwrap(),
                wavelength: sec.positive("wavelength")?.ok_or_else(|| cfg_err(&sec.key("wavelength"), "missing required key"))?,
                distance: sec.positive("distance")?.ok_or_else(|| cfg_err(&sec.key("distance"), "missing required key"))?,
            }
        };
        rytov_to_alpha_beta(&inputs).map_err(|e| cfg_err(&sec.key("rytov"), e.to_string()))?
    } else if has_ab {
        (sec.required("alpha")?, sec.required("beta")?)
    } else {
        return Err(cfg_err(&sec.key("alpha"), "missing turbulence: set turbulence, alpha/beta or rytov"));
    };
    for (k, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(cfg_err(&sec.key(k), format!("must be finite and > 0, got {v}")));
        }
    }
    let xi = match (sec.string("pointing")?, sec.has("xi")) {
        (Some(_), true) => return Err(cfg_err(&sec.key("xi"), "give either pointing or xi, not both")),
        (Some(name), false) => lookup(&POINTING_PRESETS, &sec.key("pointing"), name)?,
        (None, _) => sec.positive("xi")?.unwrap_or(XI_INF),
    };
    let detection = match sec.uint("r")? {
        None => Detection::Heterodyne,
        Some(r) => Detection::from_r(r as u32).map_err(|e| cfg_err(&sec.key("r"), e.to_string()))?,
    };
    let snr_reference = match sec.string("snr_reference")? {
        None | Some("mu_r") => SnrReference::MuR,
        Some("gamma_bar1") => SnrReference::GammaBar1,
        Some(o) => return Err(cfg_err(&sec.key("snr_reference"), format!("expected mu_r or gamma_bar1, got `{o}`"))),
    };
    // Consumed above through `has`; mark them read for the unknown-key check.
    for k in ["alpha", "beta", "rytov", "cn2", "wavelength", "distance", "xi"] {
        sec.seen.insert(k.to_string());
    }
    Ok(FsoConfig { alpha, beta, xi, detection, snr_reference })
}

fn parse_rf(sec: &mut Section) -> Result<RfConfig> {
    let k = sec.required("k")?;
    let m = sec.required("m")?;
    let delta = sec.required("delta")?;
    FtrParams::new(k, m, delta, 1.0).map_err(|e| cfg_err(&sec.path, e.to_string()))?;
    Ok(RfConfig { k, m, delta })
}

fn parse_relay(sec: &mut Section) -> Result<RelayConfig> {
    let mode = sec.string("mode")?.ok_or_else(|| cfg_err(&sec.key("mode"), "missing required key (af or df)"))?;
    let c_r = sec.real("c_r")?;
    match (mode, c_r) {
        ("af", Some(c)) => RelayConfig::af(c).map_err(|e| cfg_err(&sec.key("c_r"), e.to_string())),
        ("af", None) => Err(cfg_err(&sec.key("c_r"), "fixed-gain AF requires the relay gain c_r")),
        ("df", None) => Ok(RelayConfig::Df),
        ("df", Some(_)) => Err(cfg_err(&sec.key("c_r"), "c_r is only valid with mode = \"af\"")),
        (o, _) => Err(cfg_err(&sec.key("mode"), format!("expected af or df, got `{o}`"))),
    }
}

fn preset_modulation(name: &str) -> Option<ModulationScheme> {
    match name {
        "dbpsk" => Some(ModulationScheme::dbpsk()),
        "cbpsk" => Some(ModulationScheme::cbpsk()),
        _ => None,
    }
}

fn parse_metrics(sec: &mut Section, modsec: &mut Section) -> Result<(f64, Vec<NamedModulation>, Option<f64>, Vec<f64>)> {
    let gamma_th = sec.positive("gamma_th")?.unwrap_or(1.0);
    let names = sec.list("modulation")?;
    let explicit = modsec.table.is_some();
    if names.is_some() && explicit {
        return Err(cfg_err(&sec.key("modulation"), "give a preset list or a [modulation] section, not both"));
    }
    let modulations = if explicit {
        let delta = modsec.required("delta")?;
        let p = modsec.required("p")?;
        let q = modsec.real_list("q")?.ok_or_else(|| cfg_err(&modsec.key("q"), "missing required key"))?;
        let name = modsec.string("name")?.unwrap_or("custom").to_string();
        let scheme = ModulationScheme::new(delta, p, q).map_err(|e| cfg_err(&modsec.path, e.to_string()))?;
        vec![NamedModulation { name, scheme }]
    } else {
        let names = names.unwrap_or_else(|| vec!["dbpsk".to_string()]);
        names
            .iter()
            .map(|n| {
                preset_modulation(n)
                    .map(|scheme| NamedModulation { name: n.clone(), scheme })
                    .ok_or_else(|| cfg_err(&sec.key("modulation"), format!("unknown modulation `{n}`, expected dbpsk or cbpsk")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    if modulations.is_empty() {
        return Err(cfg_err(&sec.key("modulation"), "empty modulation list"));
    }
    let capacity_c = sec.positive("capacity_c")?;
    let ec_a = sec.real_list("ec_a")?.unwrap_or_else(|| vec![1.0]);
    for &a in &ec_a {
        EffectiveCapacityParams::new(a).map_err(|e| cfg_err(&sec.key("ec_a"), e.to_string()))?;
    }
    Ok((gamma_th, modulations, capacity_c, ec_a))
}

fn parse_truncation(sec: &mut Section) -> Result<TruncationPolicy> {
    let target = sec.real("target")?;
    let terms = sec.uint("terms")?;
    let hard_cap = sec.uint("hard_cap")?.map_or(DEFAULT_HARD_CAP, |c| c as usize);
    let mode = match (target, terms) {
        (Some(_), Some(_)) => return Err(cfg_err(&sec.key("terms"), "give either target or terms, not both")),
        (_, Some(n)) => TruncationMode::Fixed(n as usize),
        (t, None) => TruncationMode::TargetError(t.unwrap_or(1e-6)),
    };
    let policy = TruncationPolicy { mode, hard_cap };
    policy.validate().map_err(|e| cfg_err(&sec.path, e.to_string()))?;
    Ok(policy)
}

fn parse_mc(sec: &mut Section) -> Result<McConfig> {
    let d = McConfig::default();
    let samples = sec.uint("samples")?.unwrap_or(d.samples);
    let seed = sec.uint("seed")?.unwrap_or(d.seed);
    let workers = sec.uint("streams")?.map_or(d.workers, |w| w as usize);
    let fso_sampler = match sec.string("fso_sampler")? {
        None | Some("inverse_cdf") => FsoSamplerKind::InverseCdf,
        Some("product") => FsoSamplerKind::ProductForm,
        Some(o) => return Err(cfg_err(&sec.key("fso_sampler"), format!("expected inverse_cdf or product, got `{o}`"))),
    };
    let mc = McConfig { samples, seed, workers, fso_sampler };
    mc.validate().map_err(|e| cfg_err(&sec.path, e.to_string()))?;
    Ok(mc)
}

fn parse_sweep(sec: &mut Section) -> Result<SweepSpec> {
    let d = SweepSpec::default();
    let metrics = match sec.list("metrics")? {
        None => d.metrics,
        Some(v) => v
            .iter()
            .map(|s| MetricKind::parse(s).ok_or_else(|| cfg_err(&sec.key("metrics"), format!("unknown metric `{s}`"))))
            .collect::<Result<Vec<_>>>()?,
    };
    let methods = match sec.list("methods")? {
        None => d.methods,
        Some(v) => v
            .iter()
            .map(|s| SweepMethod::parse(s).ok_or_else(|| cfg_err(&sec.key("methods"), format!("unknown method `{s}`"))))
            .collect::<Result<Vec<_>>>()?,
    };
    let spec = SweepSpec {
        snr_db_start: sec.real_or("snr_db_start", d.snr_db_start)?,
        snr_db_stop: sec.real_or("snr_db_stop", d.snr_db_stop)?,
        snr_db_step: sec.real_or("snr_db_step", d.snr_db_step)?,
        metrics,
        methods,
    };
    spec.validate().map_err(|e| match e {
        Error::Parameter(m) => cfg_err(&sec.path, m),
        o => o,
    })?;
    Ok(spec)
}

/// Parse scenario text. `default_id` names the scenario when the file does not.
pub fn parse_config_str(text: &str, default_id: &str) -> Result<ScenarioConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        msg: e.message().to_string(),
    })?;
    let sections = ["fso", "rf", "relay", "metrics", "modulation", "truncation", "mc", "sweep"];
    let mut top = Section::new("", Some(&root));
    let id = top.string("id")?.unwrap_or(default_id).to_string();
    let description = top.string("description")?.unwrap_or("").to_string();
    let snr_db = top.real_or("snr_db", 20.0)?;
    for s in sections {
        top.seen.insert(s.to_string());
    }
    top.finish()?;
    if sub(&root, "fso")?.is_none() {
        return Err(cfg_err("fso", "missing [fso] section"));
    }
    if sub(&root, "rf")?.is_none() {
        return Err(cfg_err("rf", "missing [rf] section"));
    }
    if sub(&root, "relay")?.is_none() {
        return Err(cfg_err("relay", "missing [relay] section"));
    }

    let mut s = Section::new("fso", sub(&root, "fso")?);
    let fso = parse_fso(&mut s)?;
    s.finish()?;
    let mut s = Section::new("rf", sub(&root, "rf")?);
    let rf = parse_rf(&mut s)?;
    s.finish()?;
    let mut s = Section::new("relay", sub(&root, "relay")?);
    let relay = parse_relay(&mut s)?;
    s.finish()?;
    let mut s = Section::new("metrics", sub(&root, "metrics")?);
    let mut ms = Section::new("modulation", sub(&root, "modulation")?);
    let (gamma_th, modulations, capacity_c, ec_a) = parse_metrics(&mut s, &mut ms)?;
    s.finish()?;
    ms.finish()?;
    let mut s = Section::new("truncation", sub(&root, "truncation")?);
    let truncation = parse_truncation(&mut s)?;
    s.finish()?;
    let mut s = Section::new("mc", sub(&root, "mc")?);
    let mc = parse_mc(&mut s)?;
    s.finish()?;
    let mut s = Section::new("sweep", sub(&root, "sweep")?);
    let sweep = parse_sweep(&mut s)?;
    s.finish()?;

    Ok(ScenarioConfig {
        id,
        description,
        fso,
        rf,
        relay,
        gamma_th,
        modulations,
        capacity_c,
        ec_a,
        truncation,
        mc,
        snr_db,
        sweep,
    })
}

/// Read and validate a scenario file; the file stem is the default id.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(&path.display().to_string(), e.to_string()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_config_str(&text, stem)
}
