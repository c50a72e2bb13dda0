use clap::{Parser, Subcommand, ValueEnum};
use qcurves::ellcurve::Equation;
use qcurves::report::{self, AnalysisConfig, CliError, Format, Mutation, Render};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qcurves", version, about = "Frey Q-curves for x⁴ + dy² = zᵖ and x² + dy⁶ = zᵖ")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "table")]
    format: OutFormat,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Eq {
    Eq24p,
    Benchen,
}

impl From<Eq> for Equation {
    fn from(e: Eq) -> Equation {
        match e {
            Eq::Eq24p => Equation::Eq24p,
            Eq::Benchen => Equation::Benchen,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Characters, levels, local types and floors for one equation and d.
    Analyze {
        #[arg(long, value_enum)]
        equation: Eq,
        #[arg(long)]
        d: u64,
        /// Also check the character on ideals of norm up to this bound.
        #[arg(long)]
        norm_bound: Option<i128>,
        /// Newform data file (JSON) to run elimination on.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long = "q", value_delimiter = ',')]
        q: Vec<u64>,
    },
    /// Mazur's trick over a newform data file.
    Eliminate {
        #[arg(long, value_enum)]
        equation: Eq,
        #[arg(long)]
        d: u64,
        /// JSON file; relative names are also looked up in the fixtures directory.
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "q", value_delimiter = ',')]
        q: Vec<u64>,
    },
    /// Small solutions in the box 0 <= x, y <= max.
    Search {
        #[arg(long, value_enum)]
        equation: Eq,
        #[arg(long)]
        d: u64,
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 3)]
        p_min: u32,
        #[arg(long)]
        primitive_only: bool,
    },
    /// Check the cocycle, trivialization and 2-adic tables.
    VerifyTables {
        /// Replace c(G,H) by VALUE; G, H among 1, s2, sd, s2sd.
        #[arg(long, value_name = "G,H,VALUE")]
        mutate_cocycle: Vec<String>,
        /// Replace β(σⁱμᵏτʲ) in CASE by ζ₈^Z·√2^S.
        #[arg(long, value_name = "CASE,I,J,K,Z,S")]
        mutate_beta: Vec<String>,
    },
    /// Check the splitting character on all coprime ideals up to a norm bound.
    VerifyCharacter {
        #[arg(long)]
        d: u64,
        /// Defaults to the t of --equation, or 2.
        #[arg(long)]
        t: Option<u64>,
        #[arg(long, value_enum)]
        equation: Option<Eq>,
        #[arg(long, default_value_t = 1000)]
        bound: i128,
    },
}

fn run(cli: Cli) -> Result<String, (String, CliError)> {
    let format = match cli.format {
        OutFormat::Json => Format::Json,
        OutFormat::Table => Format::Table,
    };
    let plain = |e: CliError| (String::new(), e);
    match cli.cmd {
        Cmd::Analyze { equation, d, norm_bound, data, q } => {
            let mut cfg = AnalysisConfig::new(equation.into(), d);
            cfg.norm_bound = norm_bound.unwrap_or(0);
            cfg.newform_data_path = data;
            cfg.q_list = q;
            let doc = report::cmd_analyze(&cfg).map_err(plain)?;
            let out = doc.render(format);
            match &doc.character_check {
                Some(c) if !c.passed => Err((out, CliError::Verification(c.summary()))),
                _ => Ok(out),
            }
        }
        Cmd::Eliminate { equation, d, data, q } => {
            Ok(report::cmd_eliminate(equation.into(), d, &data, &q).map_err(plain)?.render(format))
        }
        Cmd::Search { equation, d, max, p_min, primitive_only } => {
            Ok(report::cmd_search(equation.into(), d, max, p_min, primitive_only).map_err(plain)?.render(format))
        }
        Cmd::VerifyTables { mutate_cocycle, mutate_beta } => {
            let mut ms = vec![];
            for s in &mutate_cocycle {
                ms.push(Mutation::parse_cocycle(s).map_err(plain)?);
            }
            for s in &mutate_beta {
                ms.push(Mutation::parse_beta(s).map_err(plain)?);
            }
            let doc = report::cmd_verify_tables(&ms);
            let out = doc.render(format);
            match &doc.first_failure {
                Some(name) => Err((out, CliError::Verification(format!("table check failed: {}", name)))),
                None => Ok(out),
            }
        }
        Cmd::VerifyCharacter { d, t, equation, bound } => {
            let t = t.unwrap_or_else(|| equation.map_or(2, |e| Equation::from(e).t() as u64));
            let doc = report::cmd_verify_character(d, t, bound).map_err(plain)?;
            let out = doc.render(format);
            if doc.report.passed {
                Ok(out)
            } else {
                Err((out, CliError::Verification(doc.report.summary())))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out);
            ExitCode::SUCCESS
        }
        Err((out, e)) => {
            print!("{}", out);
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
