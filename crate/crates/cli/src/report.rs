//! Method-tagged result rows and their CSV/JSON serializations.
//!
//! CSV columns are fixed:
//! `experiment,method,measure,L,l,region,mu_over_t,seed,value,warnings`
//! (warnings semicolon-joined). JSON mirrors the rows and adds a header with
//! the config echo, tool version, and a timestamp; CSV carries no timestamp
//! so identical configs produce identical bodies. Values are written with 17
//! significant digits, which round-trips `f64` exactly.

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Overlap,
    Fock,
    Greens,
    Asymptotic,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Overlap => "overlap",
            Method::Fock => "fock",
            Method::Greens => "greens",
            Method::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Von Neumann entropy.
    S,
    /// Rényi entropy of the given order.
    Sn(u32),
    /// Logarithmic negativity.
    E,
    /// Spectral deviation from a verify-style comparison.
    Dev,
}

impl Measure {
    pub fn name(&self) -> String {
        match self {
            Measure::S => "S".into(),
            Measure::Sn(n) => format!("S{n}"),
            Measure::E => "E".into(),
            Measure::Dev => "dev".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub method: Method,
    pub measure: Measure,
    pub l_big: Option<u64>,
    pub l_sub: Option<u64>,
    pub region: String,
    pub mu_over_t: Option<f64>,
    pub seed: Option<u64>,
    pub value: f64,
    pub warnings: Vec<String>,
}

impl ReportRow {
    pub fn new(method: Method, measure: Measure, region: &str, value: f64) -> Self {
        ReportRow {
            method,
            measure,
            l_big: None,
            l_sub: None,
            region: region.to_string(),
            mu_over_t: None,
            seed: None,
            value,
            warnings: Vec::new(),
        }
    }

    pub fn sizes(mut self, l_big: u64, l_sub: u64) -> Self {
        self.l_big = Some(l_big);
        self.l_sub = Some(l_sub);
        self
    }

    pub fn system(mut self, l_big: u64) -> Self {
        self.l_big = Some(l_big);
        self
    }

    pub fn mu_over_t(mut self, v: f64) -> Self {
        self.mu_over_t = Some(v);
        self
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seed = Some(s);
        self
    }

    pub fn warn(mut self, w: impl Into<String>) -> Self {
        self.warnings.push(w.into());
        self
    }

    pub fn warn_all(mut self, ws: &[String]) -> Self {
        self.warnings.extend(ws.iter().cloned());
        self
    }
}

#[derive(Debug, Clone)]
pub struct EntanglementReport {
    pub experiment: String,
    pub config_echo: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

/// 17 significant digits: enough to reproduce the exact bits on parse.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

impl EntanglementReport {
    pub fn new(experiment: &str, config_echo: Vec<(String, String)>) -> Self {
        EntanglementReport {
            experiment: experiment.to_string(),
            config_echo,
            rows: Vec::new(),
        }
    }

    /// Deterministic CSV body (no timestamp).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,method,measure,L,l,region,mu_over_t,seed,value,warnings\n");
        for row in &self.rows {
            // Region and warning strings stay comma-free by construction.
            debug_assert!(!row.region.contains(','));
            let warnings = row.warnings.join(";");
            debug_assert!(!warnings.contains(','));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                self.experiment,
                row.method.name(),
                row.measure.name(),
                row.l_big.map(|v| v.to_string()).unwrap_or_default(),
                row.l_sub.map(|v| v.to_string()).unwrap_or_default(),
                row.region,
                row.mu_over_t.map(fmt_f64).unwrap_or_default(),
                row.seed.map(|v| v.to_string()).unwrap_or_default(),
                fmt_f64(row.value),
                warnings,
            ));
        }
        out
    }

    /// JSON document mirroring the rows plus a header object.
    pub fn to_json(&self, timestamp_epoch_s: u64) -> String {
        let mut out = String::from("{\n  \"header\": {\n");
        out.push_str(&format!(
            "    \"experiment\": \"{}\",\n",
            json_escape(&self.experiment)
        ));
        out.push_str(&format!(
            "    \"version\": \"{}\",\n",
            env!("CARGO_PKG_VERSION")
        ));
        out.push_str(&format!("    \"timestamp\": {timestamp_epoch_s},\n"));
        out.push_str("    \"config\": {");
        let kv: Vec<String> = self
            .config_echo
            .iter()
            .map(|(k, v)| format!("\"{}\": \"{}\"", json_escape(k), json_escape(v)))
            .collect();
        out.push_str(&kv.join(", "));
        out.push_str("}\n  },\n  \"rows\": [\n");
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                let opt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or("null".into());
                let opt_f = |v: Option<f64>| v.map(fmt_f64).unwrap_or("null".into());
                let warnings: Vec<String> = row
                    .warnings
                    .iter()
                    .map(|w| format!("\"{}\"", json_escape(w)))
                    .collect();
                format!(
                    "    {{\"method\": \"{}\", \"measure\": \"{}\", \"L\": {}, \"l\": {}, \"region\": \"{}\", \"mu_over_t\": {}, \"seed\": {}, \"value\": {}, \"warnings\": [{}]}}",
                    row.method.name(),
                    row.measure.name(),
                    opt_u(row.l_big),
                    opt_u(row.l_sub),
                    json_escape(&row.region),
                    opt_f(row.mu_over_t),
                    opt_u(row.seed),
                    fmt_f64(row.value),
                    warnings.join(", ")
                )
            })
            .collect();
        out.push_str(&rows.join(",\n"));
        out.push_str("\n  ]\n}\n");
        out
    }

    /// Parse the JSON emitted by [`Self::to_json`] back into rows (used by
    /// the round-trip contract and downstream consumers).
    pub fn parse_json(text: &str) -> Result<(String, Vec<ReportRow>)> {
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("bad report JSON: {e}")))?;
        let experiment = v["header"]["experiment"]
            .as_str()
            .ok_or_else(|| CliError::Config("report JSON missing header.experiment".into()))?
            .to_string();
        let mut rows = Vec::new();
        for r in v["rows"]
            .as_array()
            .ok_or_else(|| CliError::Config("report JSON missing rows".into()))?
        {
            let method = match r["method"].as_str() {
                Some("overlap") => Method::Overlap,
                Some("fock") => Method::Fock,
                Some("greens") => Method::Greens,
                Some("asymptotic") => Method::Asymptotic,
                other => {
                    return Err(CliError::Config(format!("bad method {other:?} in report")))
                }
            };
            let measure = match r["measure"].as_str() {
                Some("S") => Measure::S,
                Some("E") => Measure::E,
                Some("dev") => Measure::Dev,
                Some(s) if s.starts_with('S') => Measure::Sn(
                    s[1..]
                        .parse()
                        .map_err(|_| CliError::Config(format!("bad measure `{s}`")))?,
                ),
                other => {
                    return Err(CliError::Config(format!("bad measure {other:?} in report")))
                }
            };
            rows.push(ReportRow {
                method,
                measure,
                l_big: r["L"].as_u64(),
                l_sub: r["l"].as_u64(),
                region: r["region"].as_str().unwrap_or_default().to_string(),
                mu_over_t: r["mu_over_t"].as_f64(),
                seed: r["seed"].as_u64(),
                value: r["value"]
                    .as_f64()
                    .ok_or_else(|| CliError::Config("row without numeric value".into()))?,
                warnings: r["warnings"]
                    .as_array()
                    .map(|a| {
                        a.iter()
                            .filter_map(|w| w.as_str().map(str::to_string))
                            .collect()
                    })
                    .unwrap_or_default(),
            });
        }
        Ok((experiment, rows))
    }
}
