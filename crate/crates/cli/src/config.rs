//! Experiment configuration: CLI flags or a flat key=value file, validated
//! into one config struct whose effective values are echoed into reports.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ChainScan,
    HoneycombScan,
    VerifyPartialTrace,
    VerifyUpt,
    TripartiteAudit,
    AsymptoticCompare,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ChainScan => "chain-scan",
            ExperimentKind::HoneycombScan => "honeycomb-scan",
            ExperimentKind::VerifyPartialTrace => "verify-partial-trace",
            ExperimentKind::VerifyUpt => "verify-upt",
            ExperimentKind::TripartiteAudit => "tripartite-audit",
            ExperimentKind::AsymptoticCompare => "asymptotic-compare",
        }
    }

    fn from_name(s: &str) -> Result<Self> {
        match s {
            "chain-scan" => Ok(ExperimentKind::ChainScan),
            "honeycomb-scan" => Ok(ExperimentKind::HoneycombScan),
            "verify-partial-trace" => Ok(ExperimentKind::VerifyPartialTrace),
            "verify-upt" => Ok(ExperimentKind::VerifyUpt),
            "tripartite-audit" => Ok(ExperimentKind::TripartiteAudit),
            "asymptotic-compare" => Ok(ExperimentKind::AsymptoticCompare),
            other => Err(CliError::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

/// Orbital filling rule: `negative` or a fixed particle count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Filling {
    NegativeEnergy,
    FixedCount(usize),
}

impl Filling {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "negative" {
            return Ok(Filling::NegativeEnergy);
        }
        s.parse::<usize>()
            .map(Filling::FixedCount)
            .map_err(|_| CliError::Config(format!("filling must be `negative` or an integer, got `{s}`")))
    }

    pub fn echo(&self) -> String {
        match self {
            Filling::NegativeEnergy => "negative".into(),
            Filling::FixedCount(m) => m.to_string(),
        }
    }

    pub fn rule(&self) -> ffent_core::spectrum::FillingRule {
        match self {
            Filling::NegativeEnergy => ffent_core::spectrum::FillingRule::NegativeEnergy,
            Filling::FixedCount(m) => ffent_core::spectrum::FillingRule::FixedCount(*m),
        }
    }
}

/// Contiguous site segment `start:len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
}

impl Segment {
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("segment must be start:len, got `{s}`")))?;
        let start = a
            .parse()
            .map_err(|_| CliError::Config(format!("bad segment start `{a}`")))?;
        let len = b
            .parse()
            .map_err(|_| CliError::Config(format!("bad segment length `{b}`")))?;
        if len == 0 {
            return Err(CliError::Config(format!("segment `{s}` has zero length")));
        }
        Ok(Segment { start, len })
    }

    pub fn sites(&self) -> Vec<usize> {
        (self.start..self.start + self.len).collect()
    }

    pub fn echo(&self) -> String {
        format!("{}:{}", self.start, self.len)
    }
}

/// Validated experiment configuration. Fields are populated per experiment;
/// the echo lists only the ones in play.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub l_total: usize,
    pub t: f64,
    pub mu: f64,
    pub pbc: bool,
    pub filling: Filling,
    pub l_min: usize,
    pub l_max: usize,
    pub l_step: usize,
    pub l_sub: usize,
    pub l_values: Vec<usize>,
    pub mu_values: Vec<f64>,
    pub n_sites: usize,
    pub seeds: Vec<u64>,
    pub range: f64,
    pub geometry: String,
    pub a1: Segment,
    pub a2: Segment,
    pub model: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::ChainScan,
            l_total: 1000,
            t: 1.0,
            mu: 1.0,
            pbc: true,
            filling: Filling::NegativeEnergy,
            l_min: 10,
            l_max: 100,
            l_step: 1,
            l_sub: 500,
            l_values: vec![9, 12, 15, 18, 21, 24, 27, 30],
            mu_values: vec![1.0, 0.5],
            n_sites: 12,
            seeds: (0..20).collect(),
            range: 1.0,
            geometry: "both".into(),
            a1: Segment { start: 0, len: 3 },
            a2: Segment { start: 6, len: 3 },
            model: "chain".into(),
        }
    }
}

impl ExperimentConfig {
    /// Effective key/value pairs echoed into report headers; the set depends
    /// on the experiment so the echo stays honest about what was used.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(String, String)> = vec![
            ("experiment".into(), self.experiment.name().into()),
        ];
        let mut push = |k: &str, v: String| kv.push((k.into(), v));
        match self.experiment {
            ExperimentKind::ChainScan => {
                push("model", "chain".into());
                push("L", self.l_total.to_string());
                push("t", self.t.to_string());
                push("mu", self.mu.to_string());
                push("pbc", self.pbc.to_string());
                push("filling", self.filling.echo());
                push("l_min", self.l_min.to_string());
                push("l_max", self.l_max.to_string());
                push("l_step", self.l_step.to_string());
                push("prediction", "finite_ring_plus_correction".into());
            }
            ExperimentKind::HoneycombScan => {
                push("model", "honeycomb".into());
                push("t", self.t.to_string());
                push(
                    "L_values",
                    self.l_values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
                );
                push(
                    "mu_values",
                    self.mu_values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
                );
                push("filling", self.filling.echo());
            }
            ExperimentKind::VerifyPartialTrace => {
                push("model", "chain".into());
                push("N", self.n_sites.to_string());
                push("t", self.t.to_string());
                push("mu", self.mu.to_string());
                push("geometry", self.geometry.clone());
                push("filling", self.filling.echo());
            }
            ExperimentKind::VerifyUpt => {
                push("model", "random".into());
                push("N", self.n_sites.to_string());
                push("range", self.range.to_string());
                push(
                    "seeds",
                    self.seeds.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
                );
                push("filling", self.filling.echo());
            }
            ExperimentKind::TripartiteAudit => {
                push("model", self.model.clone());
                push("N", self.n_sites.to_string());
                push("t", self.t.to_string());
                push("mu", self.mu.to_string());
                if self.model == "random" {
                    push("seed", self.seeds.first().copied().unwrap_or(0).to_string());
                    push("range", self.range.to_string());
                }
                push("a1", self.a1.echo());
                push("a2", self.a2.echo());
                push("filling", self.filling.echo());
            }
            ExperimentKind::AsymptoticCompare => {
                push("model", "chain".into());
                push("L", self.l_total.to_string());
                push("t", self.t.to_string());
                push("mu", self.mu.to_string());
                push("l", self.l_sub.to_string());
                push("filling", self.filling.echo());
            }
        }
        kv
    }

    /// Cross-field validation with experiment context.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        match self.experiment {
            ExperimentKind::ChainScan => {
                if self.l_total < 2 {
                    return fail(format!("chain-scan needs L >= 2, got {}", self.l_total));
                }
                if self.l_min == 0 || self.l_max >= self.l_total || self.l_min > self.l_max {
                    return fail(format!(
                        "chain-scan needs 0 < l_min <= l_max < L, got {}..{} of {}",
                        self.l_min, self.l_max, self.l_total
                    ));
                }
                if self.l_step == 0 {
                    return fail("l_step must be positive".into());
                }
            }
            ExperimentKind::HoneycombScan => {
                if self.l_values.is_empty() || self.mu_values.is_empty() {
                    return fail("honeycomb-scan needs nonempty L_values and mu_values".into());
                }
                for &l in &self.l_values {
                    if l < 3 || l % 3 != 0 {
                        return fail(format!(
                            "honeycomb L values must be multiples of 3 (corner region), got {l}"
                        ));
                    }
                }
            }
            ExperimentKind::VerifyPartialTrace => {
                if self.n_sites < 4 || self.n_sites % 4 != 0 {
                    return fail(format!(
                        "verify-partial-trace needs N divisible by 4 (quarter geometry), got {}",
                        self.n_sites
                    ));
                }
                if !["adjacent", "disjoint", "both"].contains(&self.geometry.as_str()) {
                    return fail(format!(
                        "geometry must be adjacent, disjoint, or both; got `{}`",
                        self.geometry
                    ));
                }
                self.check_cap()?;
            }
            ExperimentKind::VerifyUpt => {
                if self.n_sites < 2 || self.n_sites % 2 != 0 {
                    return fail(format!(
                        "verify-upt needs even N for the even bipartition, got {}",
                        self.n_sites
                    ));
                }
                if self.seeds.is_empty() {
                    return fail("verify-upt needs at least one seed".into());
                }
                if !(self.range > 0.0) {
                    return fail(format!("range must be positive, got {}", self.range));
                }
                self.check_cap()?;
            }
            ExperimentKind::TripartiteAudit => {
                if !["chain", "random"].contains(&self.model.as_str()) {
                    return fail(format!(
                        "tripartite-audit model must be chain or random, got `{}`",
                        self.model
                    ));
                }
                let n = self.n_sites;
                let (a1, a2) = (&self.a1, &self.a2);
                if a1.start + a1.len > n || a2.start + a2.len > n {
                    return fail(format!(
                        "segments a1={} a2={} exceed N={n}",
                        a1.echo(),
                        a2.echo()
                    ));
                }
                let overlap = a1.start < a2.start + a2.len && a2.start < a1.start + a1.len;
                if overlap {
                    return fail(format!(
                        "segments a1={} and a2={} overlap",
                        a1.echo(),
                        a2.echo()
                    ));
                }
                self.check_cap()?;
            }
            ExperimentKind::AsymptoticCompare => {
                if self.l_sub == 0 || self.l_sub >= self.l_total {
                    return fail(format!(
                        "asymptotic-compare needs 0 < l < L, got l={} L={}",
                        self.l_sub, self.l_total
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_cap(&self) -> Result<()> {
        if self.n_sites > ffent_core::fock::SITE_CAP {
            return Err(CliError::Config(format!(
                "N={} exceeds the exact-diagonalization cap of {}",
                self.n_sites,
                ffent_core::fock::SITE_CAP
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ffent",
    version,
    about = "Free-fermion entanglement experiments: overlap matrix, exact Fock oracle, Green's function"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output path ('-' for stdout)
    #[arg(long, default_value = "-")]
    pub output: String,
    /// Report format
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep subsystem sizes of a periodic chain and compare against the
    /// Fisher-Hartwig prediction
    ChainScan {
        #[arg(long = "L", visible_alias = "l-total", default_value_t = 1000)]
        l_total: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Disable periodic boundary conditions
        #[arg(long)]
        open_boundary: bool,
        #[arg(long, default_value_t = 10)]
        l_min: usize,
        #[arg(long, default_value_t = 100)]
        l_max: usize,
        #[arg(long, default_value_t = 1)]
        l_step: usize,
        /// `negative` or a fixed particle count
        #[arg(long, default_value = "negative")]
        filling: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sweep honeycomb lattice sizes with a corner region
    HoneycombScan {
        /// Comma-separated cell counts per side (multiples of 3)
        #[arg(long, value_delimiter = ',', default_values_t = vec![9, 12, 15, 18, 21, 24, 27, 30])]
        l_values: Vec<usize>,
        /// Comma-separated chemical potentials
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.5])]
        mu_values: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the Fock-space reduced density matrix spectrum with the
    /// overlap-matrix prediction
    VerifyPartialTrace {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// adjacent, disjoint, or both
        #[arg(long, default_value = "both")]
        geometry: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the uPT spectrum of random-hopping ground states between the
    /// Fock oracle and the mode-product prediction
    VerifyUpt {
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Comma-separated RNG seeds (one instance each)
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Generate this many consecutive seeds when --seeds is absent
        #[arg(long, default_value_t = 20)]
        seed_count: u64,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long, default_value_t = 1.0)]
        range: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tripartite audit: closed-form overlap value vs Green's-function and
    /// exact negativities, with the bPT bound
    TripartiteAudit {
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// chain or random
        #[arg(long, default_value = "chain")]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        range: f64,
        /// A1 segment start:len
        #[arg(long, default_value = "0:3")]
        a1: String,
        /// A2 segment start:len
        #[arg(long, default_value = "6:3")]
        a2: String,
        /// `negative` or a fixed particle count
        #[arg(long, default_value = "negative")]
        filling: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact chain negativity against the asymptotic prediction at one point
    AsymptoticCompare {
        #[arg(long = "L", visible_alias = "l-total", default_value_t = 1000)]
        l_total: usize,
        #[arg(long, default_value_t = 500)]
        l: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// `negative` or a fixed particle count (default: half filling)
        #[arg(long, default_value = "half")]
        filling: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run an experiment described entirely by a config file
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "-")]
        output: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
}

/// Parse a flat `key=value` config file ('#' comments allowed). Unknown keys
/// are rejected by name.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    const KNOWN: &[&str] = &[
        "experiment", "model", "L", "t", "mu", "pbc", "seed", "seeds", "range", "l_min",
        "l_max", "l_step", "l", "filling", "L_values", "mu_values", "N", "a1", "a2",
        "geometry", "seed_count", "seed_base",
    ];
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1))
        })?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN.contains(&k) {
            return Err(CliError::Config(format!("unknown config key `{k}`")));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!("duplicate config key `{k}`")));
        }
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("bad value `{v}` for key `{key}`"))),
    }
}

fn parse_list<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<Vec<T>>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .split([',', ' '])
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| CliError::Config(format!("bad entry `{s}` in `{key}`")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some),
    }
}

/// Build a config from a parsed key=value map (the `run` subcommand path).
pub fn config_from_map(map: &BTreeMap<String, String>) -> Result<ExperimentConfig> {
    let experiment = ExperimentKind::from_name(
        map.get("experiment")
            .ok_or_else(|| CliError::Config("config file must set `experiment`".into()))?,
    )?;
    let mut cfg = ExperimentConfig {
        experiment,
        ..ExperimentConfig::default()
    };
    if experiment == ExperimentKind::AsymptoticCompare {
        cfg.mu = 0.0;
        cfg.filling = Filling::FixedCount(cfg.l_total / 2);
    }
    if let Some(v) = parse_num::<usize>(map, "L")? {
        cfg.l_total = v;
        if experiment == ExperimentKind::AsymptoticCompare
            && !map.contains_key("filling")
        {
            cfg.filling = Filling::FixedCount(v / 2);
        }
    }
    if let Some(v) = parse_num::<f64>(map, "t")? {
        cfg.t = v;
    }
    if let Some(v) = parse_num::<f64>(map, "mu")? {
        cfg.mu = v;
    }
    if let Some(v) = map.get("pbc") {
        cfg.pbc = match v.as_str() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(CliError::Config(format!("bad pbc value `{other}`"))),
        };
    }
    if let Some(v) = map.get("filling") {
        cfg.filling = if v == "half" {
            Filling::FixedCount(cfg.l_total / 2)
        } else {
            Filling::parse(v)?
        };
    }
    if let Some(v) = parse_num::<usize>(map, "l_min")? {
        cfg.l_min = v;
    }
    if let Some(v) = parse_num::<usize>(map, "l_max")? {
        cfg.l_max = v;
    }
    if let Some(v) = parse_num::<usize>(map, "l_step")? {
        cfg.l_step = v;
    }
    if let Some(v) = parse_num::<usize>(map, "l")? {
        cfg.l_sub = v;
    }
    if let Some(v) = parse_list::<usize>(map, "L_values")? {
        cfg.l_values = v;
    }
    if let Some(v) = parse_list::<f64>(map, "mu_values")? {
        cfg.mu_values = v;
    }
    if let Some(v) = parse_num::<usize>(map, "N")? {
        cfg.n_sites = v;
    }
    if let Some(v) = parse_list::<u64>(map, "seeds")? {
        cfg.seeds = v;
    } else {
        let base = parse_num::<u64>(map, "seed_base")?.unwrap_or(0);
        if let Some(count) = parse_num::<u64>(map, "seed_count")? {
            cfg.seeds = (base..base + count).collect();
        }
    }
    if let Some(v) = parse_num::<u64>(map, "seed")? {
        cfg.seeds = vec![v];
    }
    if let Some(v) = parse_num::<f64>(map, "range")? {
        cfg.range = v;
    }
    if let Some(v) = map.get("geometry") {
        cfg.geometry = v.clone();
    }
    if let Some(v) = map.get("a1") {
        cfg.a1 = Segment::parse(v)?;
    }
    if let Some(v) = map.get("a2") {
        cfg.a2 = Segment::parse(v)?;
    }
    if let Some(v) = map.get("model") {
        cfg.model = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Merge an optional config file under explicit CLI values: the file is
/// loaded first and each flag the user set overrides it.
pub fn load_file_map(path: &std::path::Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    parse_config_file(&text)
}
