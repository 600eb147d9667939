use clap::{Parser, Subcommand};
use levelgen_cli::commands::{self, report};

/// Learn platformer levels as token sequences and generate new ones:
/// corpus ingestion, path annotation, eight sequence encodings, LSTM
/// training, seeded sampling, expressive-range metrics, and corner plots.
#[derive(Parser)]
#[command(name = "levelgen", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus directory and print its shape.
    Ingest(commands::IngestArgs),
    /// Annotate corpus levels with near-optimal agent paths.
    Annotate(commands::AnnotateArgs),
    /// Encode levels into token-sequence files.
    Encode(commands::EncodeArgs),
    /// Train an LSTM on a corpus under one encoding.
    Train(commands::TrainArgs),
    /// Sample levels from a trained checkpoint.
    Sample(commands::SampleArgs),
    /// Score a directory of levels into a metrics CSV.
    Evaluate(commands::EvaluateArgs),
    /// Render an expressive-range corner plot from a metrics CSV.
    Plot(commands::PlotArgs),
    /// Print the movement model's jump arc table.
    DumpArcs(commands::DumpArcsArgs),
    /// Train all eight encodings, sample, score, and tabulate.
    Report(report::ReportArgs),
    /// Re-run a command from its manifest.
    Replay(commands::ReplayArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Annotate(args) => commands::annotate(args),
        Command::Encode(args) => commands::encode_cmd(args),
        Command::Train(args) => commands::train_cmd(args).map(|_| ()),
        Command::Sample(args) => commands::sample_cmd(args).map(|_| ()),
        Command::Evaluate(args) => commands::evaluate_cmd(args).map(|_| ()),
        Command::Plot(args) => commands::plot_cmd(args),
        Command::DumpArcs(args) => commands::dump_arcs_cmd(args),
        Command::Report(args) => report::report_cmd(args).map(|_| ()),
        Command::Replay(args) => commands::replay(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
