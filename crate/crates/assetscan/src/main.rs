// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use assetscan::report::{render, stats_csv};
use assetscan::{analyze, keyword_stats, load_ground_truth, reports, resolve_config, Error, Format, Result};
use assetscan_core::eval::confusion_table;
use clap::Parser;

/// Identify potential primary security assets in Verilog/SystemVerilog RTL.
#[derive(Debug, Parser)]
#[command(name = "assetscan", version)]
struct Cli {
    /// Directory (or single file) holding the RTL sources.
    #[arg(long)]
    rtl_dir: PathBuf,
    /// Top module; every root of the instantiation forest when omitted.
    #[arg(long)]
    top: Option<String>,
    /// Builtin family (crypto, gpio, peripheral) or a configuration file.
    #[arg(long, default_value = "crypto")]
    family: String,
    /// Configuration file; overrides --family.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write keyword-group occurrence counts as CSV to this path.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Score the result against a `module,signal,is_asset` CSV.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Print diagnostics and stage counts to standard error.
    #[arg(long, short)]
    verbose: bool,
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = resolve_config(&cli.family, cli.config.as_deref())?;
    let truth = cli.ground_truth.as_deref().map(load_ground_truth).transpose()?;
    let analysis = analyze(&cli.rtl_dir, config)?;
    if let Some(path) = &cli.stats {
        write_out(Some(path), &stats_csv(&keyword_stats(&analysis))?)?;
    }
    let reports = reports(&analysis, cli.top.as_deref(), truth.as_ref())?;
    for r in &reports {
        if cli.verbose {
            let k = &r.stage_counts;
            eprintln!(
                "{}: extraction {} > matching {} > classification {} > filtering {} > refinement {}",
                r.top_module, k.extraction, k.matching, k.classification, k.filtering, k.refinement
            );
            for d in &r.diagnostics {
                eprintln!("{}:{}: {:?}: {}", d.file, d.line, d.severity, d.message);
            }
        }
        if let Some(ev) = &r.evaluation {
            eprintln!("evaluation for top {}", r.top_module);
            eprint!("{}", confusion_table(ev));
            if !ev.ignored_truth_entries.is_empty() {
                eprintln!("warning: {} ground-truth entries name no evaluated signal and were ignored", ev.ignored_truth_entries.len());
            }
        }
    }
    write_out(cli.out.as_deref(), &render(&reports, cli.format)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
