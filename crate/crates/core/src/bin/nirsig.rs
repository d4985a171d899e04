use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use nirsig::binomial::Sidedness;
use nirsig::evaluation::{estimate_priors, BaselineSpec, LabelAlphabet};
use nirsig::input::{
    parse_predictions, parse_training_labels, FileFormat, InputError, PredictionsFile,
    TrainingLabelsFile,
};
use nirsig::report::{render_report, ReportContext, ReportMode};
use nirsig::significance::{run_significance_test, TestMethod, TestSpec, DEFAULT_ALPHA};
use nirsig::StatsError;

const EXIT_SIGNIFICANT: u8 = 0;
const EXIT_NOT_SIGNIFICANT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nirsig",
    version,
    about = "Is a classifier's accuracy significantly better than the NIR or a random baseline?"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact binomial test on a predictions file.
    Test(TestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Normal,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Human,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for FileFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => FileFormat::Csv,
            FormatArg::Jsonl => FileFormat::JsonLines,
        }
    }
}

#[derive(clap::Args)]
#[command(group(
    ArgGroup::new("baseline_source")
        .required(true)
        .args(["train_labels", "p", "baseline"]),
))]
struct TestArgs {
    /// Predictions file (CSV with header, or JSON lines).
    #[arg(long, value_name = "FILE")]
    predictions: PathBuf,

    /// Training labels; selects the NIR baseline.
    #[arg(long, value_name = "FILE")]
    train_labels: Option<PathBuf>,

    /// Explicit baseline success probability.
    #[arg(long, value_name = "FLOAT")]
    p: Option<f64>,

    /// Use the random-classifier baseline 1/C.
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,

    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,

    /// Report the doubled (two-tailed) p-value.
    #[arg(long)]
    two_tailed: bool,

    #[arg(long, value_enum, default_value = "exact")]
    method: MethodArg,

    /// Drop the 0.5 continuity correction from the z statistic.
    #[arg(long)]
    no_continuity_correction: bool,

    /// Report the raw two-tailed doubling even when it exceeds 1.
    #[arg(long)]
    no_clamp: bool,

    #[arg(long, value_enum, default_value = "human")]
    output: OutputArg,

    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    #[arg(long, default_value = nirsig::input::DEFAULT_TRUE_COLUMN)]
    true_col: String,

    #[arg(long, default_value = nirsig::input::DEFAULT_PRED_COLUMN)]
    pred_col: String,

    /// Column holding the training label (CSV with several columns).
    #[arg(long, default_value = nirsig::input::DEFAULT_LABEL_COLUMN)]
    label_col: String,
}

enum Failure {
    Input(InputError),
    Domain(StatsError),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        Failure::Domain(e)
    }
}

fn run_test(args: &TestArgs) -> Result<bool, Failure> {
    let mut alphabet = LabelAlphabet::new();

    // Training labels are read first so that majority ties resolve by
    // first appearance in the training file.
    let training = match &args.train_labels {
        Some(path) => {
            let mut file = TrainingLabelsFile::new(path);
            file.column = args.label_col.clone();
            if let Some(format) = args.format {
                file.format = format.into();
            }
            Some(parse_training_labels(&file, &mut alphabet)?)
        }
        None => None,
    };

    let mut file = PredictionsFile::new(&args.predictions);
    file.true_column = args.true_col.clone();
    file.pred_column = args.pred_col.clone();
    if let Some(format) = args.format {
        file.format = format.into();
    }
    let eval = parse_predictions(&file, alphabet)?;

    let priors = training
        .map(|labels| estimate_priors(&labels, eval.alphabet()))
        .transpose()?;

    let baseline = match (args.p, args.baseline) {
        (Some(p), _) => BaselineSpec::explicit(p)?,
        (None, Some(BaselineArg::Random)) => BaselineSpec::Random,
        (None, None) => BaselineSpec::Nir,
    };
    let spec = TestSpec {
        baseline,
        alpha: args.alpha,
        sidedness: if args.two_tailed {
            Sidedness::TwoTailed
        } else {
            Sidedness::OneTailed
        },
        method: match args.method {
            MethodArg::Exact => TestMethod::Exact,
            MethodArg::Normal => TestMethod::NormalApproximation,
            MethodArg::Auto => TestMethod::Auto,
        },
        clamp_two_tailed: !args.no_clamp,
        continuity_correction: !args.no_continuity_correction,
    };
    let outcome = run_significance_test(&eval, &spec, priors.as_ref())?;

    let context = ReportContext {
        predictions: Some(args.predictions.display().to_string()),
        train_labels: args.train_labels.as_ref().map(|p| p.display().to_string()),
        alphabet: eval.alphabet().names().to_vec(),
    };
    let mode = match args.output {
        OutputArg::Human => ReportMode::Human,
        OutputArg::Machine => ReportMode::Machine,
    };
    print!("{}", render_report(&outcome, &context, mode));
    Ok(outcome.significant)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Test(args) => match run_test(&args) {
            Ok(true) => ExitCode::from(EXIT_SIGNIFICANT),
            Ok(false) => ExitCode::from(EXIT_NOT_SIGNIFICANT),
            Err(Failure::Input(e)) => {
                eprintln!("nirsig: error: {e}");
                ExitCode::from(EXIT_USAGE)
            }
            Err(Failure::Domain(e)) => {
                eprintln!("nirsig: error: {e}");
                ExitCode::from(EXIT_DOMAIN)
            }
        },
    }
}
