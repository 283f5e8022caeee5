use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use theoria_core::gallery;
use theoria_core::session::{default_depth, run_script, Options, RunOutcome};
use theoria_core::verify::run_verify;

/// Families of complete theories as closed subsets of Cantor space.
#[derive(Parser)]
#[command(name = "theoria", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Script to run.
    script: Option<PathBuf>,
    /// Emit one JSON object per command.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dsl,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Run property suites over gallery and random instances.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
    },
    /// List gallery cases, or print one case or family as a script.
    Gallery { name: Option<String> },
    /// Export gallery families or DSL expressions.
    Export {
        #[arg(required = true)]
        items: Vec<String>,
        #[arg(long, value_enum, default_value = "dsl")]
        format: Format,
    },
}

fn finish(r: RunOutcome) -> ExitCode {
    print!("{}", r.output);
    ExitCode::from(r.exit_code as u8)
}

fn gallery_listing(name: Option<&str>) -> Result<String, String> {
    let Some(name) = name else {
        let mut s = String::new();
        for c in gallery::cases() {
            let names: Vec<String> = c.families.iter().filter_map(|f| f.name.clone()).collect();
            s.push_str(&format!("{}: {} [{}]\n", c.name, c.summary, names.join(", ")));
        }
        return Ok(s);
    };
    let fams = match gallery::case(name) {
        Some(c) => c.families,
        None => vec![gallery::family(name).ok_or_else(|| format!("no gallery case or family `{name}`"))?],
    };
    Ok(fams
        .iter()
        .map(|f| format!("let {} = {f}\n", f.name.as_deref().unwrap_or("F")))
        .collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        json: cli.json,
        depth: default_depth(),
    };
    match cli.command {
        None => {
            let Some(path) = cli.script else {
                eprintln!("error: expected a script path or a subcommand (see --help)");
                return ExitCode::from(2);
            };
            match std::fs::read_to_string(&path) {
                Ok(text) => finish(run_script(&text, opts)),
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    ExitCode::from(2)
                }
            }
        }
        Some(Command::Verify {
            suite,
            seeds,
            base_seed,
        }) => match run_verify(&suite, seeds, base_seed) {
            Ok(r) => {
                if cli.json {
                    println!("{}", r.to_json());
                } else {
                    println!("{r}");
                }
                ExitCode::from(r.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Some(Command::Gallery { name }) => match gallery_listing(name.as_deref()) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Some(Command::Export { items, format }) => {
            let exprs: Vec<String> = items
                .iter()
                .map(|i| {
                    if gallery::family(i).is_some() {
                        format!("gallery({i})")
                    } else {
                        i.clone()
                    }
                })
                .collect();
            let fmt = match format {
                Format::Dsl => "dsl",
                Format::Json => "json",
                Format::Dot => "dot",
            };
            finish(run_script(&format!("export {} --format {fmt}\n", exprs.join(", ")), opts))
        }
    }
}
