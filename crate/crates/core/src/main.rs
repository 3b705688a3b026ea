use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twinbeam::scenario::{parse_config, run_scenario};
use twinbeam::Error;

const OUT_DIR_ENV: &str = "TWINBEAM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "twinbeam-out";

#[derive(Parser)]
#[command(name = "twinbeam", version, about = "Twin-beam amplifier scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory. Defaults to the config's `output_dir`, then
        /// $TWINBEAM_OUT_DIR, then `twinbeam-out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reject unknown config keys even if the file sets `strict = false`.
        #[arg(long)]
        strict: bool,
        /// Worker threads for sweeps (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config_error() {
        2
    } else if e.is_io_error() {
        1
    } else {
        3
    }
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        out,
        strict,
        threads,
    } = Cli::parse().command;

    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    let result = parse_config(&config, strict).and_then(|parsed| {
        for key in &parsed.ignored_keys {
            eprintln!("warning: ignoring unknown key `{key}`");
        }
        let cfg = parsed.config;
        let out_dir = out
            .or_else(|| cfg.output_dir.as_ref().map(|d| cfg.resolve_path(&d.to_string_lossy())))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        run_scenario(&cfg, &out_dir).map(|s| (s, out_dir))
    });

    match result {
        Ok((summary, out_dir)) => {
            println!("{} -> {}", summary.kind.name(), out_dir.display());
            for (key, value) in &summary.headline {
                println!("  {key} = {value}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
