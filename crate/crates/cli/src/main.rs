//! `bridgegen`: lowers FIR files to dialect IR, runs them on the reference
//! interpreter, prints einsum kernels and verifies module dumps.
//!
//! Exit status is 0 on success, 1 when the pipeline or interpreter reports a
//! diagnostic, and 2 for usage errors. Diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use bridgegen_core::codegen::IntrinsicRegistry;
use bridgegen_core::einsum::{generate_einsum, parse_einsum};
use bridgegen_core::fir::{parse_program_with, split_top_level, FrontendType};
use bridgegen_core::interp::{parse_input, Interpreter, LaunchConfig, ThreadOrder, DEFAULT_STEP_LIMIT};
use bridgegen_core::ir::{print_module, verify_module, IrAttribute, IrModule, IrType};
use bridgegen_core::pipeline::{compile, standard_registry, PipelineError};
use clap::{Args, Parser, Subcommand, ValueEnum};

const STEP_LIMIT_VAR: &str = "BRIDGEGEN_STEP_LIMIT";

#[derive(Parser)]
#[command(name = "bridgegen", version, about = "Translate typed SSA functions into dialect IR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a function and print the verified module.
    Gen {
        #[command(flatten)]
        target: Target,
        /// Write the module here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Translate a function and interpret it on the given inputs.
    Run {
        #[command(flatten)]
        target: Target,
        /// Grid and block extents as gx,gy,gz,bx,by,bz.
        #[arg(long)]
        launch: Option<String>,
        /// Run simulated threads in reverse order.
        #[arg(long)]
        reverse: bool,
        #[arg(last = true)]
        inputs: Vec<String>,
    },
    /// Print the module for an einsum such as "(i,k),(k,j)->(i,j)".
    Einsum {
        spec: String,
        #[arg(long, default_value = "f32")]
        elem: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Verify a JSON module dump (as written by `gen --format json`).
    Verify {
        module: PathBuf,
        #[arg(long = "dialect")]
        dialects: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Target {
    /// FIR source file.
    input: PathBuf,
    #[arg(long)]
    entry: String,
    /// Comma-separated argument types, e.g. `f32` or `memref{f32,1},i64`.
    #[arg(long, default_value = "")]
    types: String,
    /// Extra dialect spec files.
    #[arg(long = "dialect")]
    dialects: Vec<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

enum Failure {
    Usage(anyhow::Error),
    Pipeline(anyhow::Error),
}

impl Failure {
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    fn pipeline(e: impl Into<anyhow::Error>) -> Self {
        Failure::Pipeline(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen { target, out, format } => {
            let module = build(&target)?;
            let text = render(&module, format)?;
            match out {
                Some(path) => fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(Failure::pipeline),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Run { target, launch, reverse, inputs } => {
            let launch = launch.as_deref().map(parse_launch).transpose().map_err(Failure::usage)?;
            let module = build(&target)?;
            let params = entry_inputs(&module, &target.entry).map_err(Failure::pipeline)?;
            if params.len() != inputs.len() {
                return Err(Failure::usage(anyhow!(
                    "`{}` expects {} inputs, got {}",
                    target.entry,
                    params.len(),
                    inputs.len()
                )));
            }
            let values = inputs
                .iter()
                .zip(&params)
                .map(|(text, ty)| parse_input(text, ty))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::usage)?;
            let mut interp = Interpreter::new(&module).with_step_limit(step_limit()?);
            let outputs = match launch {
                Some(l) => {
                    let order = if reverse { ThreadOrder::Reverse } else { ThreadOrder::Forward };
                    interp.run_kernel(&target.entry, l, &values, order)
                }
                None => interp.run_function(&target.entry, &values),
            }
            .map_err(Failure::pipeline)?;
            for v in outputs {
                println!("{v}");
            }
            Ok(())
        }
        Command::Einsum { spec, elem, format } => {
            let registry = standard_registry();
            let elem = registry.lattice().parse_type(&elem).map_err(|e| Failure::usage(anyhow!(e)))?;
            let spec = parse_einsum(&spec).map_err(Failure::pipeline)?;
            let module = generate_einsum(&registry, &spec, elem).map_err(Failure::pipeline)?;
            print!("{}", render(&module, format)?);
            Ok(())
        }
        Command::Verify { module, dialects } => {
            let registry = registry_with(&dialects)?;
            let text = read(&module)?;
            let module: IrModule = serde_json::from_str(&text)
                .with_context(|| format!("{} is not a module dump", module.display()))
                .map_err(Failure::pipeline)?;
            let report = verify_module(&module, Some(registry.dialects()));
            if report.is_ok() {
                println!("ok");
                Ok(())
            } else {
                Err(Failure::pipeline(anyhow!("module failed verification:\n{report}")))
            }
        }
    }
}

fn build(target: &Target) -> Result<IrModule, Failure> {
    let registry = registry_with(&target.dialects)?;
    let source = read(&target.input)?;
    let program = parse_program_with(&source, registry.lattice())
        .with_context(|| format!("parsing {}", target.input.display()))
        .map_err(Failure::pipeline)?;
    let types = parse_types(&registry, &target.types)?;
    compile(&registry, &program, &target.entry, &types).map_err(|e| match e {
        PipelineError::Arity { .. } | PipelineError::UnknownEntry(_) => Failure::usage(e),
        e => Failure::pipeline(e),
    })
}

fn registry_with(dialects: &[PathBuf]) -> Result<IntrinsicRegistry, Failure> {
    let mut registry = standard_registry();
    for path in dialects {
        let text = read(path)?;
        registry
            .dialects_mut()
            .load_and_register(&text)
            .with_context(|| format!("loading dialect spec {}", path.display()))
            .map_err(Failure::pipeline)?;
    }
    Ok(registry)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::usage)
}

fn parse_types(registry: &IntrinsicRegistry, text: &str) -> Result<Vec<FrontendType>, Failure> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top_level(text)
        .into_iter()
        .map(|t| registry.lattice().parse_type(t.trim()).map_err(|e| Failure::usage(anyhow!("bad type `{t}`: {e}"))))
        .collect()
}

fn parse_launch(text: &str) -> anyhow::Result<LaunchConfig> {
    let n: Vec<u64> = text
        .split(',')
        .map(|p| p.trim().parse::<u64>().with_context(|| format!("bad launch extent `{p}`")))
        .collect::<anyhow::Result<_>>()?;
    let [gx, gy, gz, bx, by, bz] = n[..] else {
        return Err(anyhow!("--launch takes six extents gx,gy,gz,bx,by,bz, got {}", n.len()));
    };
    let launch = LaunchConfig::new([gx, gy, gz], [bx, by, bz]);
    if !launch.is_valid() {
        return Err(anyhow!("launch extents must be positive"));
    }
    Ok(launch)
}

fn step_limit() -> Result<u64, Failure> {
    match std::env::var(STEP_LIMIT_VAR) {
        Ok(v) => v.parse().map_err(|_| Failure::usage(anyhow!("{STEP_LIMIT_VAR}=`{v}` is not a step count"))),
        Err(_) => Ok(DEFAULT_STEP_LIMIT),
    }
}

/// IR types of the entry function's parameters, one per runtime input.
fn entry_inputs(module: &IrModule, entry: &str) -> anyhow::Result<Vec<IrType>> {
    let op = module.lookup_symbol(entry).ok_or_else(|| anyhow!("no symbol `{entry}` in the generated module"))?;
    match module.op(op).attr("function_type") {
        Some(IrAttribute::Type(IrType::Function { inputs, .. })) => Ok(inputs.clone()),
        _ => Err(anyhow!("`{entry}` has no function type")),
    }
}

fn render(module: &IrModule, format: Format) -> Result<String, Failure> {
    match format {
        Format::Text => Ok(print_module(module)),
        Format::Json => serde_json::to_string_pretty(module).map(|s| s + "\n").map_err(Failure::pipeline),
    }
}
