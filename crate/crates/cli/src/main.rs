use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cabin_vlc::analysis::Combiner;
use cabin_vlc::optics::ReceiverKind;
use cabin_vlc_cli::{parse_rows, plot, simulate, CliError, RateChoice, RunSpec};

#[derive(Parser)]
#[command(name = "cabin-vlc", version, about = "Aircraft-cabin VLC channel and link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReceiverArg {
    Adr,
    Imr,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombinerArg {
    Sc,
    Mrc,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the cabin slice and write per-seat link reports.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Half-open, 0-based row span.
        #[arg(long, default_value = "0..4", value_parser = parse_rows)]
        rows: cabin_vlc::scene::RowSpan,
        /// Defaults to `receiver.kind` from the config.
        #[arg(long, value_enum)]
        receiver: Option<ReceiverArg>,
        #[arg(long, value_enum, default_value = "both")]
        combiner: CombinerArg,
        /// Operating bit rate in Gb/s (overrides `link.bit_rate_gbps`).
        #[arg(long, conflicts_with = "find_max_rate")]
        bitrate: Option<f64>,
        /// Search for the largest rate meeting `link.target_ber`.
        #[arg(long)]
        find_max_rate: bool,
        /// Also write per-seat impulse responses.
        #[arg(long)]
        dump_ir: bool,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (results do not depend on it).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Render delay-spread and SINR plots from a link report.
    Plot {
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            rows,
            receiver,
            combiner,
            bitrate,
            find_max_rate,
            dump_ir,
            out,
            threads,
        } => {
            let rate = match (bitrate, find_max_rate) {
                (Some(g), _) => RateChoice::Fixed(g),
                (None, true) => RateChoice::FindMax,
                (None, false) => RateChoice::FromConfig,
            };
            let spec = RunSpec {
                config,
                rows,
                receivers: receiver.map(|r| match r {
                    ReceiverArg::Adr => vec![ReceiverKind::Adr],
                    ReceiverArg::Imr => vec![ReceiverKind::Imr],
                    ReceiverArg::Both => vec![ReceiverKind::Adr, ReceiverKind::Imr],
                }),
                combiners: match combiner {
                    CombinerArg::Sc => vec![Combiner::Sc],
                    CombinerArg::Mrc => vec![Combiner::Mrc],
                    CombinerArg::Both => vec![Combiner::Sc, Combiner::Mrc],
                },
                rate,
                dump_ir,
                out,
                threads,
            };
            simulate(&spec).map(|o| {
                eprintln!("wrote {} seat reports to {}", o.seats.len(), spec.out.display());
            })
        }
        Command::Plot { reports, out } => plot(&reports, &out)
            .map(|paths| {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            })
            .map_err(CliError::Runtime),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code().clamp(0, 255) as u8)
        }
    }
}
