use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use efgl_core::equivariant::Orientation;
use efgl_core::report::{Report, Status};
use efgl_core::scenario::{bundled, run_scenario, CrtParams, Operation, Scenario, TateExpectations, BUNDLED, SCENARIO_VERSION};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Exact verification of formal group law identities.
#[derive(Parser)]
#[command(name = "efgl", version, arg_required_else_help = true)]
struct Cli {
    /// List the bundled scenarios and exit.
    #[arg(long)]
    list_scenarios: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files or bundled scenarios by name.
    Run {
        /// Paths to scenario JSON files, or names of bundled scenarios.
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Number of scenarios to run in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        output: Output,
    },
    /// List the bundled scenarios.
    ListScenarios,
    /// Print a scenario (bundled or from a file) as normalized JSON.
    Show { scenario: String },
    /// Checks on the multiplicative law over Z.
    Fgl {
        #[arg(long, default_value_t = 8)]
        cap: u32,
        #[arg(long, value_delimiter = ',', default_value = "coefficients,two-series,borel-images")]
        check: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Formal groups and torsion of Weierstrass curves.
    Elliptic {
        #[command(subcommand)]
        command: EllipticCommand,
    },
    /// The split Tate model at level one.
    Tate {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// The units alpha_1, ..., alpha_{p-1}, as expressions in s and q.
        #[arg(long = "alpha", allow_hyphen_values = true, required = true)]
        alphas: Vec<String>,
        #[arg(long, default_value_t = 6)]
        cap: u32,
        #[arg(long, value_delimiter = ',', default_value = "coproduct,axioms,multiplicativity")]
        check: Vec<String>,
        /// Expected coproduct of the coordinate, as an expression.
        #[arg(long)]
        expect_coproduct: Option<String>,
        #[arg(long, value_enum, default_value_t = OrientationArg::Covariant)]
        orientation: OrientationArg,
        #[command(flatten)]
        output: Output,
    },
    /// The deformation over Z[u,w]/(u(u+2)(1-uw)).
    Z2def {
        #[arg(long, default_value_t = 8)]
        cap: u32,
        #[arg(long, value_delimiter = ',', default_value = "q0,correction,z2cob58")]
        verify: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Lubin-Tate deformation of a height h Honda law at p = 2.
    Lt2 {
        #[arg(long, value_delimiter = ',', default_value = "1")]
        h: Vec<u32>,
        #[arg(long, default_value_t = 8)]
        cap: u32,
        #[arg(long, value_delimiter = ',', default_value = "q0,residuals,relations")]
        verify: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum EllipticCommand {
    /// The formal group of the universal curve.
    FormalGroup {
        #[arg(long, default_value_t = 8)]
        cap: u32,
        #[command(flatten)]
        output: Output,
    },
    /// The p-torsion algebra of a rational curve.
    Torsion {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        output: Output,
    },
    /// The localization/completion square of the p-torsion algebra.
    TateSquare {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Images of the Lazard generators for the universal curve.
    Classification {
        #[arg(long, default_value_t = 8)]
        cap: u32,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value = "4", allow_hyphen_values = true)]
    g2: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    g3: String,
    /// Power of x at which to truncate.
    #[arg(long, default_value_t = 30)]
    cap_x: usize,
    /// Power of p at which to truncate.
    #[arg(long, default_value_t = 2)]
    cap_p: u32,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum OrientationArg {
    Literal,
    Covariant,
}

const P2_COORDINATE: &str = "f0*t - 1";
const P2_TRANSLATE: &str = "e0*f0*s*t + e1*f1*s*t/q - 1";
const P2_COPRODUCT: &str = "(x_1+1)*(x_2+1) - 1 + e1_1*e1_2*(x_alpha_1+1)*(x_alpha_2+1)";
const P2_OBSTRUCTION: &str = "e1_1*e1_2*(x_alpha_1+1)*(x_alpha_2+1)";

fn scenario(name: &str, operation: Operation, checks: Vec<String>) -> Scenario {
    Scenario { version: SCENARIO_VERSION, name: name.into(), description: String::new(), operation, checks, output: None }
}

/// Read a scenario from a path, falling back to the bundled name.
fn load(spec: &str) -> anyhow::Result<Scenario> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return Scenario::from_json(&text).with_context(|| format!("in {spec}"));
    }
    if BUNDLED.iter().any(|b| b.name == spec) {
        return Ok(bundled(spec)?);
    }
    bail!("`{spec}` is neither a scenario file nor a bundled scenario (see `efgl list-scenarios`)")
}

/// Run scenarios on up to `jobs` threads, keeping input order.
fn run_all(scenarios: &[Scenario], jobs: usize) -> anyhow::Result<Vec<Report>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<anyhow::Result<Report>>>> = Mutex::new((0..scenarios.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, scenarios.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(s) = scenarios.get(i) else { break };
                let r = run_scenario(s).with_context(|| format!("scenario `{}`", s.name));
                results.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    results.into_inner().expect("workers finished").into_iter().map(|r| r.expect("every index visited")).collect()
}

fn emit(reports: &[Report], out: Option<&Path>, single: bool) -> anyhow::Result<ExitCode> {
    let text = if single { serde_json::to_string_pretty(&reports[0])? } else { serde_json::to_string_pretty(reports)? };
    match out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => print_stdout(&text),
    }
    for r in reports {
        for c in r.body.checks.iter().filter(|c| c.status != Status::Pass) {
            eprintln!("{}: {} {:?}: {}", r.body.scenario["name"].as_str().unwrap_or("?"), c.name, c.status, c.residual);
        }
    }
    let ok = reports.iter().all(|r| r.status() == Status::Pass);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run_one(s: Scenario, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    s.validate()?;
    let report = run_scenario(&s)?;
    emit(&[report], out.as_deref(), true)
}

/// Print a line, treating a closed pipe (e.g. `| head`) as success.
fn print_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{text}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing to stdout: {e}");
        }
    }
}

fn list() {
    let lines: Vec<String> = BUNDLED
        .iter()
        .map(|b| {
            let description = Scenario::from_json(b.json).map(|s| s.description).unwrap_or_default();
            format!("{:<26} {description}", b.name)
        })
        .collect();
    print_stdout(&lines.join("\n"));
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.list_scenarios {
        list();
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        bail!("no command given");
    };
    match command {
        Command::ListScenarios => {
            list();
            Ok(ExitCode::SUCCESS)
        }
        Command::Show { scenario } => {
            print_stdout(&load(&scenario)?.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { scenarios, jobs, output } => {
            let loaded = scenarios.iter().map(|s| load(s)).collect::<anyhow::Result<Vec<_>>>()?;
            let reports = run_all(&loaded, jobs)?;
            let out = output.out.or_else(|| (loaded.len() == 1).then(|| loaded[0].output.clone().map(PathBuf::from)).flatten());
            emit(&reports, out.as_deref(), loaded.len() == 1)
        }
        Command::Fgl { cap, check, output } => run_one(scenario("fgl", Operation::MultiplicativeLaw { cap }, check), output.out),
        Command::Elliptic { command } => match command {
            EllipticCommand::FormalGroup { cap, output } => run_one(
                scenario(
                    "elliptic-formal-group",
                    Operation::EllipticFormalGroup { cap },
                    vec!["u-series".into(), "chart".into(), "axioms".into()],
                ),
                output.out,
            ),
            EllipticCommand::Torsion { curve, output } => run_one(
                scenario(
                    "elliptic-torsion",
                    Operation::TorsionRank { p: curve.p, g2: curve.g2, g3: curve.g3, cap_x: curve.cap_x, cap_p: curve.cap_p },
                    vec!["degree".into(), "rank".into(), "division-vanishes".into()],
                ),
                output.out,
            ),
            EllipticCommand::TateSquare { curve, samples, seed, output } => run_one(
                scenario(
                    "elliptic-tate-square",
                    Operation::TateSquare { p: curve.p, g2: curve.g2, g3: curve.g3, cap_x: curve.cap_x, cap_p: curve.cap_p, samples, seed },
                    vec!["corners".into(), "pairs".into(), "pullback-mod-x".into(), "bijective".into()],
                ),
                output.out,
            ),
            EllipticCommand::Classification { cap, output } => run_one(
                scenario("elliptic-classification", Operation::Classification { cap }, vec!["vanishing".into(), "x4".into(), "x6".into()]),
                output.out,
            ),
        },
        Command::Tate { p, r, alphas, cap, check, expect_coproduct, orientation, output } => {
            // The closed forms are known for p = 2 with alpha = -1.
            let standard = p == 2 && alphas == ["-1"];
            let known = |s: &str| standard.then(|| s.to_string());
            let expect = TateExpectations {
                coordinate: known(P2_COORDINATE),
                translate: known(P2_TRANSLATE),
                coproduct: expect_coproduct.or_else(|| known(P2_COPRODUCT)),
                obstruction: known(P2_OBSTRUCTION),
            };
            let orientation = match orientation {
                OrientationArg::Literal => Orientation::Literal,
                OrientationArg::Covariant => Orientation::Covariant,
            };
            let op = Operation::Tate { p, r, cap, alphas, orientation, expect, crt: CrtParams::default() };
            run_one(scenario("tate", op, check), output.out)
        }
        Command::Z2def { cap, verify, output } => run_one(scenario("z2def", Operation::Z2Deformation { cap }, verify), output.out),
        Command::Lt2 { h, cap, verify, output } => run_one(scenario("lt2", Operation::LubinTate { heights: h, cap }, verify), output.out),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
