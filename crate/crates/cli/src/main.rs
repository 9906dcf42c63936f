use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use paracurv::check::CheckConfig;
use paracurv::expr::{Bindings, SampleOptions};
use paracurv::geometry::DerivativeConvention;
use paracurv::harness::{self, builtin_instance, builtin_source, run_all, run_theorem, BUILTINS, THEOREMS};
use paracurv::instance::{load_instance, InstanceFile, LoadError};
use paracurv::paracontact::{classify_structure, identity_suite, nijenhuis_normality, verify_almost_paracontact, StructureKind};
use paracurv::report::{CheckReport, Row, Status};
use paracurv::soliton::SolitonSpec;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LOAD: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "paracurv", version, about = "Verify curvature, paracontact structures and soliton equations on 3-manifold instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Sample points per check.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "deta-convention", value_enum, global = true, default_value_t = Convention::Half)]
    deta_convention: Convention,
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    /// Parameter binding `name=value`; `name=v1,v2,...` sweeps over the values.
    #[arg(long = "bind", global = true, value_name = "NAME=VALUE")]
    bind: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Restrict soliton checks to one named spec.
    #[arg(long, global = true)]
    soliton: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Almost paracontact axioms and normality.
    CheckStructure { instance: String },
    /// Structure classification flags.
    Classify { instance: String },
    /// Curvature identities, invariants and printed-value comparisons.
    Curvature { instance: String },
    /// Identity suite of one structure class.
    Identities {
        #[arg(long = "class", value_enum)]
        class: ClassArg,
        instance: String,
    },
    /// Soliton residuals, solved lambda and trace relations.
    Soliton { instance: String },
    /// One theorem, corollary or lemma check.
    Theorem { id: String, instance: String },
    /// Every check on the instance.
    RunAll { instance: String },
    /// Built-in instance: run every check, or print its source with --emit.
    Example {
        id: String,
        #[arg(long)]
        emit: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Convention {
    Half,
    Plain,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ClassArg {
    Kenmotsu,
    Sasakian,
    Cosymplectic,
}

impl From<ClassArg> for StructureKind {
    fn from(c: ClassArg) -> StructureKind {
        match c {
            ClassArg::Kenmotsu => StructureKind::Kenmotsu,
            ClassArg::Sasakian => StructureKind::Sasakian,
            ClassArg::Cosymplectic => StructureKind::Cosymplectic,
        }
    }
}

enum Failure {
    Usage(String),
    Load(String),
    Io(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Failure {
        Failure::Load(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(failed) => ExitCode::from(if failed { EXIT_FAIL } else { 0 }),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Load(m)) => {
            eprintln!("load error: {m}");
            ExitCode::from(EXIT_LOAD)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if let Command::Example { id, emit: true } = &cli.command {
        let src = builtin_source(id).ok_or_else(|| unknown_builtin(id))?;
        write_output(cli, src)?;
        return Ok(false);
    }
    if let Command::Theorem { id, .. } = &cli.command {
        if !THEOREMS.contains(&id.as_str()) {
            return Err(Failure::Usage(format!("unknown theorem `{id}`; known: {}", THEOREMS.join(", "))));
        }
    }
    let sweep = parse_sweep(&cli.bind)?;
    let mut reports = Vec::with_capacity(sweep.len());
    for overrides in &sweep {
        let file = load(cli, overrides)?;
        reports.push(execute(cli, &file)?);
    }
    let failed = reports.iter().any(CheckReport::has_failures);
    let body = match cli.format {
        Format::Json => reports.iter().map(|r| r.to_json() + "\n").collect::<String>(),
        Format::Text => reports.iter().map(CheckReport::to_text).collect::<Vec<_>>().join("\n"),
    };
    write_output(cli, &body)?;
    Ok(failed)
}

fn unknown_builtin(id: &str) -> Failure {
    Failure::Usage(format!("unknown built-in instance `{id}`; known: {}", BUILTINS.join(", ")))
}

/// Cartesian product of the `--bind` values, last binding varying fastest.
fn parse_sweep(binds: &[String]) -> Result<Vec<Bindings>, Failure> {
    let mut sweep = vec![Bindings::new()];
    for b in binds {
        let (name, values) = b.split_once('=').ok_or_else(|| Failure::Usage(format!("--bind expects NAME=VALUE, got `{b}`")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Failure::Usage(format!("--bind `{b}` has an empty name")));
        }
        let values: Vec<f64> = values
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("--bind {name}: `{v}` is not a number"))))
            .collect::<Result<_, _>>()?;
        sweep = sweep
            .into_iter()
            .flat_map(|base| {
                values.iter().map(move |v| {
                    let mut next = base.clone();
                    next.insert(name.to_string(), *v);
                    next
                })
            })
            .collect();
    }
    Ok(sweep)
}

fn load(cli: &Cli, overrides: &Bindings) -> Result<InstanceFile, Failure> {
    let source = match &cli.command {
        Command::Example { id, .. } => {
            return builtin_instance(id, overrides).map_err(|e| match e {
                harness::HarnessError::UnknownInstance(id) => unknown_builtin(&id),
                other => Failure::Load(other.to_string()),
            })
        }
        Command::CheckStructure { instance }
        | Command::Classify { instance }
        | Command::Curvature { instance }
        | Command::Identities { instance, .. }
        | Command::Soliton { instance }
        | Command::Theorem { instance, .. }
        | Command::RunAll { instance } => instance,
    };
    let path = Path::new(source);
    if !path.exists() && BUILTINS.contains(&source.as_str()) {
        return builtin_instance(source, overrides).map_err(|e| Failure::Load(e.to_string()));
    }
    Ok(load_instance(path, overrides)?)
}

fn config(cli: &Cli, file: &InstanceFile) -> CheckConfig {
    let mut opts = file.check.apply(SampleOptions::default());
    if let Some(p) = cli.points {
        opts.points = p;
    }
    if let Some(t) = cli.tol {
        opts.tol = t;
    }
    if let Some(s) = cli.seed {
        opts.seed = s;
    }
    let deta = match cli.deta_convention {
        Convention::Half => DerivativeConvention::Half,
        Convention::Plain => DerivativeConvention::Plain,
    };
    CheckConfig::new(opts, file.bindings.clone(), deta)
}

fn selected_specs<'a>(cli: &Cli, file: &'a InstanceFile) -> Result<Vec<&'a SolitonSpec>, Failure> {
    match &cli.soliton {
        Some(name) => file
            .soliton(Some(name))
            .map(|s| vec![s])
            .ok_or_else(|| Failure::Usage(format!("instance has no soliton spec `{name}`"))),
        None => Ok(file.solitons.values().collect()),
    }
}

fn execute(cli: &Cli, file: &InstanceFile) -> Result<CheckReport, Failure> {
    let cfg = config(cli, file);
    let inst = &file.instance;
    let mut report = cfg.report(Vec::new());
    match &cli.command {
        Command::CheckStructure { .. } => {
            report.extend(verify_almost_paracontact(inst, &cfg).rows);
            report.extend(nijenhuis_normality(inst, &cfg).1.rows);
        }
        Command::Classify { .. } => report.extend(classify_structure(inst, &cfg).rows),
        Command::Curvature { .. } => {
            report.extend(harness::curvature_rows(inst, &cfg));
            report.extend(harness::claim_rows(inst, &file.claims, &cfg));
        }
        Command::Identities { class, .. } => report.extend(identity_suite(inst, (*class).into(), &cfg).rows),
        Command::Soliton { .. } => {
            let specs = selected_specs(cli, file)?;
            if specs.is_empty() {
                report.push(Row::new("soliton", Status::NotApplicable, "E1.3", "soliton equation").with_detail("no soliton spec"));
            }
            for spec in specs {
                report.extend(harness::soliton_rows(inst, spec, &cfg));
            }
        }
        Command::Theorem { id, .. } => {
            let spec = match &cli.soliton {
                Some(_) => selected_specs(cli, file)?.into_iter().next(),
                None => file.soliton(None),
            };
            let check = run_theorem(id, inst, spec, &cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            report.extend(check.rows(None));
        }
        Command::RunAll { .. } | Command::Example { .. } => {
            let specs = selected_specs(cli, file)?;
            report = run_all(inst, &specs, &file.claims, &cfg);
        }
    }
    Ok(report)
}

fn write_output(cli: &Cli, body: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}
