#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Parser, Subcommand};
use spp_enhance::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spp-enhance", version, about = "Wavelet-packet speech enhancement with speech presence probability")]
struct Cli {
    /// Flat `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance a noisy WAV file
    Enhance {
        input: PathBuf,
        output: PathBuf,
        /// Directory for spp/gain/noise/spectrogram CSVs
        #[arg(long)]
        diag: Option<PathBuf>,
    },
    /// Mix clean speech and noise at a given SNR
    Synth {
        clean: PathBuf,
        noise: PathBuf,
        #[arg(allow_negative_numbers = true)]
        snr_db: f64,
        output: PathBuf,
    },
    /// Segmental SNR of a noisy and an enhanced file against the clean one
    Eval {
        #[arg(required_unless_present = "batch")]
        clean: Option<PathBuf>,
        #[arg(required_unless_present = "batch")]
        noisy: Option<PathBuf>,
        #[arg(required_unless_present = "batch")]
        enhanced: Option<PathBuf>,
        /// File listing `clean noisy enhanced` triples, one per line
        #[arg(long, conflicts_with_all = ["clean", "noisy", "enhanced"])]
        batch: Option<PathBuf>,
        /// Worker threads for batch mode
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit per-subband priors to a directory of clean WAV files
    LearnPrior {
        corpus_dir: PathBuf,
        /// Shape parameter, 1 or 2
        #[arg(long, default_value_t = 2)]
        gamma: u32,
        out_table: PathBuf,
    },
    /// Tabulate the speech presence probability against the a posteriori SNR
    SppCurve {
        /// Comma-separated shape values
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 1.0])]
        mu: Vec<f64>,
        #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
        xi_db: f64,
        #[arg(long, default_value_t = -15.0, allow_negative_numbers = true)]
        zeta_from_db: f64,
        #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
        zeta_to_db: f64,
        #[arg(long, default_value_t = 0.5)]
        step_db: f64,
        output: PathBuf,
    },
    /// Quick numerical checks of the transform, special functions and SPP
    SelfTest,
}

/// 1: configuration or unusable input, 2: files, 3: numerics.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Degenerate(_) | Error::Domain(_) | Error::Structural(_) => 1,
        Error::Io(_) | Error::Format(_) => 2,
        Error::Numerical(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = config::RunConfig::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Enhance { input, output, diag } => commands::enhance(&cfg, &input, &output, diag.as_deref()),
        Command::Synth { clean, noise, snr_db, output } => commands::synth(&clean, &noise, snr_db, &output),
        Command::Eval { clean, noisy, enhanced, batch, jobs } => match batch {
            Some(list) => commands::eval_batch(&cfg, &list, jobs),
            None => commands::eval(
                &cfg,
                clean.as_deref().expect("required by clap"),
                noisy.as_deref().expect("required by clap"),
                enhanced.as_deref().expect("required by clap"),
            ),
        },
        Command::LearnPrior { corpus_dir, gamma, out_table } => {
            commands::learn_prior(&cfg, &corpus_dir, gamma, &out_table)
        }
        Command::SppCurve { mu, xi_db, zeta_from_db, zeta_to_db, step_db, output } => {
            commands::spp_curve(&cfg, &mu, xi_db, (zeta_from_db, zeta_to_db, step_db), &output)
        }
        Command::SelfTest => commands::self_test(&cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
