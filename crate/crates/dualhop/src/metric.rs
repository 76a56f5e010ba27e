use std::collections::BTreeMap;
use std::fmt;

/// How a number was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    ExactFoxH,
    OracleIntegral,
    Asymptotic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactFoxH => "exact",
            Method::OracleIntegral => "oracle",
            Method::Asymptotic => "asymptotic",
            Method::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed value with its numerical error estimate and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub value: f64,
    pub err_estimate: f64,
    pub method: Method,
    pub series_terms_used: usize,
    pub diagnostics: BTreeMap<String, String>,
}

impl MetricResult {
    pub fn new(value: f64, err_estimate: f64, method: Method) -> Self {
        MetricResult {
            value,
            err_estimate,
            method,
            series_terms_used: 0,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with_terms(mut self, n: usize) -> Self {
        self.series_terms_used = n;
        self
    }

    pub fn note(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.diagnostics.insert(key.to_string(), value.to_string());
        self
    }
}
