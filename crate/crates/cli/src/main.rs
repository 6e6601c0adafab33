use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

use ffent_cli::config::{
    config_from_map, load_file_map, Cli, Command, ExperimentConfig, ExperimentKind, Filling,
    OutputFormat, Segment,
};
use ffent_cli::experiments::run_experiment;
use ffent_cli::{CliError, Result};

fn main() {
    // Sweep-level parallelism lives in rayon; keep the BLAS pool out of its
    // way. Must be set before the first LAPACK call.
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "2");
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests exit 0; real parse errors exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match execute(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (cfg, output, format) = build_config(cli)?;
    let report = run_experiment(&cfg)?;
    let rendered = match format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Json => {
            let ts = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            report.to_json(ts)
        }
    };
    if output == "-" {
        std::io::stdout().write_all(rendered.as_bytes())?;
    } else {
        std::fs::write(&output, rendered).map_err(|e| {
            CliError::Io(std::io::Error::new(
                e.kind(),
                format!("writing report to {output}: {e}"),
            ))
        })?;
    }
    Ok(())
}

fn build_config(cli: Cli) -> Result<(ExperimentConfig, String, OutputFormat)> {
    let mut cfg = ExperimentConfig::default();
    let (output, format) = match cli.command {
        Command::ChainScan { l_total, t, mu, open_boundary, l_min, l_max, l_step, filling, out } => {
            cfg.experiment = ExperimentKind::ChainScan;
            cfg.l_total = l_total;
            cfg.t = t;
            cfg.mu = mu;
            cfg.pbc = !open_boundary;
            cfg.l_min = l_min;
            cfg.l_max = l_max;
            cfg.l_step = l_step;
            cfg.filling = parse_filling(&filling, l_total)?;
            (out.output, out.format)
        }
        Command::HoneycombScan { l_values, mu_values, t, out } => {
            cfg.experiment = ExperimentKind::HoneycombScan;
            cfg.l_values = l_values;
            cfg.mu_values = mu_values;
            cfg.t = t;
            (out.output, out.format)
        }
        Command::VerifyPartialTrace { n, t, mu, geometry, out } => {
            cfg.experiment = ExperimentKind::VerifyPartialTrace;
            cfg.n_sites = n;
            cfg.t = t;
            cfg.mu = mu;
            cfg.geometry = geometry;
            (out.output, out.format)
        }
        Command::VerifyUpt { n, seeds, seed_count, seed_base, range, out } => {
            cfg.experiment = ExperimentKind::VerifyUpt;
            cfg.n_sites = n;
            cfg.range = range;
            cfg.seeds = seeds.unwrap_or_else(|| (seed_base..seed_base + seed_count).collect());
            (out.output, out.format)
        }
        Command::TripartiteAudit { n, model, t, mu, seed, range, a1, a2, filling, out } => {
            cfg.experiment = ExperimentKind::TripartiteAudit;
            cfg.n_sites = n;
            cfg.model = model;
            cfg.t = t;
            cfg.mu = mu;
            cfg.seeds = vec![seed];
            cfg.range = range;
            cfg.a1 = Segment::parse(&a1)?;
            cfg.a2 = Segment::parse(&a2)?;
            cfg.filling = parse_filling(&filling, n)?;
            (out.output, out.format)
        }
        Command::AsymptoticCompare { l_total, l, t, mu, filling, out } => {
            cfg.experiment = ExperimentKind::AsymptoticCompare;
            cfg.l_total = l_total;
            cfg.l_sub = l;
            cfg.t = t;
            cfg.mu = mu;
            cfg.filling = parse_filling(&filling, l_total)?;
            (out.output, out.format)
        }
        Command::Run { config, output, format } => {
            let map = load_file_map(&config)?;
            let parsed = config_from_map(&map)?;
            return Ok((parsed, output, format));
        }
    };
    cfg.validate()?;
    Ok((cfg, output, format))
}

fn parse_filling(s: &str, l_total: usize) -> Result<Filling> {
    if s == "half" {
        return Ok(Filling::FixedCount(l_total / 2));
    }
    Filling::parse(s)
}
