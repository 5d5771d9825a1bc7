use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qsdiff::suites::{AlgebraChoice, Suite};
use qsdiff_cli::{run_classify, run_verify, seeded_point, Format, QModeSpec, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleArg {
    #[value(name = "c_t")]
    Ct,
    #[value(name = "c_t_talpha")]
    CtTalpha,
    #[value(name = "c_t_logt")]
    CtLogt,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Axioms,
    HopfMorphism,
    HopfAlgebra,
    QuantumGroups,
    Deformations,
    Lemmas,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QModeArg {
    Symbolic,
    Numeric,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgebraArg {
    Comm,
    Qplane,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

/// Verification runner for q-skew iterative σ-differential structures.
#[derive(Debug, Parser)]
#[command(name = "qsdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[arg(long, global = true, value_enum, default_value = "all")]
    example: ExampleArg,
    /// X-degree truncation D.
    #[arg(long, global = true, default_value_t = 8)]
    xdeg: u32,
    /// Sequence horizon H.
    #[arg(long, global = true, default_value_t = 12)]
    horizon: u32,
    /// W-degree truncation N_W.
    #[arg(long, global = true, default_value_t = 4)]
    wdeg: u32,
    /// Nilpotency order of the test algebras.
    #[arg(long, global = true, default_value_t = 4)]
    nildeg: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "symbolic")]
    qmode: QModeArg,
    /// q₀ for numeric mode, e.g. `3/2` (seed-derived when absent).
    #[arg(long, global = true, allow_hyphen_values = true)]
    q_num: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    s_num: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lam_num: Option<String>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: FormatArg,
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite (the default).
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
    /// Classify deformations over a test algebra.
    Classify {
        #[arg(long, value_enum, default_value = "comm")]
        algebra: AlgebraArg,
    },
}

fn config(cli: &Cli) -> RunConfig {
    let example = match cli.example {
        ExampleArg::Ct => "c_t",
        ExampleArg::CtTalpha => "c_t_talpha",
        ExampleArg::CtLogt => "c_t_logt",
        ExampleArg::All => "all",
    };
    let qmode = match cli.qmode {
        QModeArg::Symbolic => QModeSpec::Symbolic,
        QModeArg::Numeric => {
            let (q, s, lam) = seeded_point(cli.seed);
            QModeSpec::Numeric {
                q: cli.q_num.clone().unwrap_or(q),
                s: cli.s_num.clone().unwrap_or(s),
                lam: cli.lam_num.clone().unwrap_or(lam),
            }
        }
    };
    RunConfig {
        example: example.into(),
        xdeg: cli.xdeg,
        horizon: cli.horizon,
        wdeg: cli.wdeg,
        nildeg: cli.nildeg,
        seed: cli.seed,
        qmode,
        format: match cli.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        },
        command: String::new(),
    }
}

fn suite(s: SuiteArg) -> Suite {
    match s {
        SuiteArg::Axioms => Suite::Axioms,
        SuiteArg::HopfMorphism => Suite::HopfMorphism,
        SuiteArg::HopfAlgebra => Suite::HopfAlgebra,
        SuiteArg::QuantumGroups => Suite::QuantumGroups,
        SuiteArg::Deformations => Suite::Deformations,
        SuiteArg::Lemmas => Suite::Lemmas,
        SuiteArg::All => Suite::All,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = config(&cli);
    let report = match cli.command {
        None => run_verify(&cfg, suite(cli.suite)),
        Some(Command::Verify { suite: s }) => run_verify(&cfg, suite(s)),
        Some(Command::Classify { algebra }) => run_classify(
            &cfg,
            match algebra {
                AlgebraArg::Comm => AlgebraChoice::Comm,
                AlgebraArg::Qplane => AlgebraChoice::QPlane,
            },
        ),
    };
    match report {
        Ok(r) => {
            print!("{}", r.render());
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
