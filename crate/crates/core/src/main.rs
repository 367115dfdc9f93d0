use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use arcop::cacti::{frame, Cactus};
use arcop::chain::{check_face_contracts, CellwiseFamily, CONTRACTS};
use arcop::circle::{
    algebra_relations_check, classify_parameters, compose_angles, homology_compose, homology_formula_check,
    presentation_check, CircleOperad, Counterexample, ExtClass, Presented, RelationReport,
};
use arcop::glue::{compose_projective_twisted, compose_weighted_with_report, relaxed_compose};
use arcop::io::{decode, Document};
use arcop::laws::{run_suite, LawReport, Suite};
use arcop::loops::{loop_of, section_of, CircleConfiguration};
use arcop::random::{random_family, Bounds};
use arcop::rational::{format_q, parse_q};
use arcop::render::{render_circle, render_interval, render_planar_loop, Model};
use arcop::twisted::TwistedElement;
use arcop::{Error, WeightedArcFamily, Q};

/// Exact arc families, cacti and circle operads.
#[derive(Parser)]
#[command(name = "arcop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode and validate a document of any kind.
    Validate { file: PathBuf },
    /// Compose B into slot K of A.
    Compose(ComposeArgs),
    /// Run a seeded law suite.
    Laws {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// arc, darc, cyclic, cacti or twisted; all when omitted.
        #[arg(long)]
        suite: Option<Suite>,
    },
    /// The framed family of a cactus.
    Frame { cactus: PathBuf },
    /// The circle configuration of a family.
    Loop { family: PathBuf },
    /// The family recovered from a circle configuration.
    Section { config: PathBuf },
    /// Check the face identities of the chain-level generators.
    BvCheck {
        #[arg(long)]
        identity: Option<String>,
    },
    /// Circle operads and their homology.
    #[command(subcommand)]
    Circles(CirclesCommand),
    /// Draw a family or circle configuration as SVG.
    Render {
        #[arg(long)]
        model: Model,
        #[arg(short = 'o', long)]
        output: PathBuf,
        input: PathBuf,
    },
    /// A seeded random family.
    Random {
        #[arg(long)]
        seed: u64,
        /// Inline JSON object or a path to one.
        #[arg(long)]
        bounds: Option<String>,
    },
}

#[derive(Args)]
struct ComposeArgs {
    #[arg(short = 'i', long = "slot")]
    slot: usize,
    a: PathBuf,
    b: PathBuf,
    /// Rotation of the glued circles, a fraction of a turn.
    #[arg(long, value_parser = parse_fraction)]
    offset: Option<Q>,
    #[arg(long, group = "mode")]
    weighted: bool,
    #[arg(long, group = "mode")]
    projective: bool,
    #[arg(long, group = "mode")]
    relaxed: bool,
}

#[derive(Subcommand)]
enum CirclesCommand {
    /// Compose two angle tuples, given as comma separated fractions.
    Compose {
        #[arg(long, default_value = "bi")]
        operad: CircleOperad,
        #[arg(short = 'i', long = "slot")]
        slot: usize,
        x: String,
        y: String,
    },
    /// Exclude grid parameters by counterexample.
    Classify {
        #[arg(long, default_value_t = 2)]
        grid: i64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the closed composition formula, or compose two basis classes
    /// given as bit strings such as 101.
    Homology {
        #[arg(long, default_value = "bi")]
        operad: CircleOperad,
        #[arg(short = 'i', long = "slot", requires_all = ["x", "y"])]
        slot: Option<usize>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
    },
    /// Check the generators and relations presentations.
    Presentation,
    /// Check the algebra relations for one operad.
    Relations {
        #[arg(long)]
        operad: CircleOperad,
    },
}

fn parse_fraction(s: &str) -> Result<Q, String> {
    parse_q(s)
}

/// Either a report to print or a failure to report.
struct Outcome {
    report: Value,
    ok: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, ok: true }
    }
}

fn read<T: Document>(path: &Path) -> arcop::Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Decode { path: path.display().to_string(), message: e.to_string() })?;
    decode(&text)
}

fn doc<T: Document>(x: &T) -> Value {
    x.to_value()
}

fn q_list(s: &str) -> arcop::Result<Vec<Q>> {
    s.split(',')
        .map(|p| parse_q(p.trim()).map_err(|m| Error::Decode { path: "$".into(), message: m }))
        .collect()
}

fn bits(s: &str) -> arcop::Result<ExtClass> {
    let b: Vec<u8> = s
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Decode { path: "$".into(), message: format!("bad bit string {s:?}") }),
        })
        .collect::<arcop::Result<_>>()?;
    Ok(ExtClass::basis(&b))
}

fn qs(xs: &[Q]) -> Value {
    json!(xs.iter().map(format_q).collect::<Vec<_>>())
}

fn counterexample(c: &Counterexample) -> Value {
    json!({
        "law": c.law,
        "tuples": c.tuples.iter().map(|t| qs(t)).collect::<Vec<_>>(),
        "slots": c.slots,
        "lhs": qs(&c.lhs),
        "rhs": qs(&c.rhs),
    })
}

fn relation_report(r: &RelationReport) -> Value {
    json!({
        "operad": r.operad,
        "passed": r.passed(),
        "checks": r.checks.iter().map(|(n, ok)| json!({"name": n, "passed": ok})).collect::<Vec<_>>(),
    })
}

fn law_report(r: &LawReport) -> Value {
    json!({"suite": r.suite, "trials": r.trials, "checks": r.checks, "passed": r.passed(), "failures": r.failures})
}

/// Tries each document kind by its distinguishing field.
fn validate(path: &Path) -> arcop::Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Decode { path: path.display().to_string(), message: e.to_string() })?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Decode { path: "$".into(), message: e.to_string() })?;
    let has = |k: &str| v.get(k).is_some();
    let (kind, canonical) = if has("lobes") {
        ("cactus", doc(&decode::<Cactus>(&text)?))
    } else if has("circumferences") {
        ("configuration", doc(&decode::<CircleConfiguration>(&text)?))
    } else if has("kind") {
        ("cellwise", doc(&decode::<CellwiseFamily>(&text)?))
    } else if has("angles") {
        ("twisted", doc(&decode::<TwistedElement>(&text)?))
    } else if has("terms") {
        ("class", doc(&decode::<ExtClass>(&text)?))
    } else {
        let f = decode::<WeightedArcFamily>(&text)?;
        let s = f.sig();
        return Ok(json!({
            "kind": "family",
            "valid": true,
            "exhaustive": f.comb.is_exhaustive(),
            "signature": {"genus": s.genus, "punctures": s.punctures, "boundaries": s.boundaries},
            "document": doc(&f),
        }));
    };
    Ok(json!({"kind": kind, "valid": true, "document": canonical}))
}

fn compose(a: &ComposeArgs) -> arcop::Result<Value> {
    let x: WeightedArcFamily = read(&a.a)?;
    let y: WeightedArcFamily = read(&a.b)?;
    let offset = a.offset.clone().unwrap_or_default();
    if a.weighted {
        let (g, rep) = compose_weighted_with_report(&x, a.slot, &y, &offset)?;
        return Ok(json!({
            "result": doc(&g),
            "closed_bands": rep.closed_bands,
            "closed_width": format_q(&rep.closed_width),
            "merged_arcs": rep.merged_arcs,
        }));
    }
    let g = if a.relaxed {
        if a.offset.is_some() {
            return Err(Error::Unsupported("relaxed composition takes no offset".into()));
        }
        relaxed_compose(&x.projective(), a.slot, &y.projective())?
    } else {
        compose_projective_twisted(&x.projective(), a.slot, &y.projective(), &offset)?
    };
    Ok(json!({"result": doc(&g)}))
}

fn circles(c: &CirclesCommand) -> arcop::Result<Outcome> {
    match c {
        CirclesCommand::Compose { operad, slot, x, y } => {
            let z = compose_angles(operad, &q_list(x)?, *slot, &q_list(y)?)?;
            Ok(Outcome::ok(json!({"operad": operad.name(), "result": qs(&z)})))
        }
        CirclesCommand::Classify { grid, trials, seed } => {
            let cl = classify_parameters(*grid, *trials, *seed)?;
            Ok(Outcome::ok(json!({
                "grid": grid,
                "survivors": cl.survivors.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "excluded": cl.excluded.iter().map(|(s, c)| json!({"parameters": s.to_string(), "counterexample": counterexample(c)})).collect::<Vec<_>>(),
            })))
        }
        CirclesCommand::Homology { operad, slot, x, y } => match (slot, x, y) {
            (Some(k), Some(x), Some(y)) => {
                let z = homology_compose(operad, &bits(x)?, *k, &bits(y)?)?;
                Ok(Outcome::ok(json!({"operad": operad.name(), "result": doc(&z), "text": z.to_string()})))
            }
            _ => {
                let r = homology_formula_check(3)?;
                Ok(Outcome { ok: r.passed(), report: relation_report(&r) })
            }
        },
        CirclesCommand::Presentation => {
            let rs = [presentation_check(Presented::D)?, presentation_check(Presented::Bi)?];
            Ok(Outcome {
                ok: rs.iter().all(RelationReport::passed),
                report: json!(rs.iter().map(relation_report).collect::<Vec<_>>()),
            })
        }
        CirclesCommand::Relations { operad } => {
            let r = algebra_relations_check(operad)?;
            Ok(Outcome { ok: r.passed(), report: relation_report(&r) })
        }
    }
}

fn bounds(arg: &Option<String>) -> arcop::Result<Bounds> {
    let Some(s) = arg else { return Ok(Bounds::default()) };
    let text = if s.trim_start().starts_with('{') {
        s.clone()
    } else {
        fs::read_to_string(s).map_err(|e| Error::Decode { path: s.clone(), message: e.to_string() })?
    };
    serde_json::from_str(&text).map_err(|e| Error::Decode { path: "$".into(), message: e.to_string() })
}

fn render(model: Model, output: &Path, input: &Path) -> arcop::Result<Value> {
    let svg = match model {
        Model::Interval => render_interval(&read(input)?),
        Model::Circle => render_circle(&read(input)?),
        Model::PlanarLoop => {
            let text = fs::read_to_string(input)
                .map_err(|e| Error::Decode { path: input.display().to_string(), message: e.to_string() })?;
            let k = match decode::<CircleConfiguration>(&text) {
                Ok(k) => k,
                Err(_) => loop_of(&decode::<WeightedArcFamily>(&text)?)?,
            };
            render_planar_loop(&k)
        }
    };
    fs::write(output, &svg).map_err(|e| Error::Decode { path: output.display().to_string(), message: e.to_string() })?;
    Ok(json!({"written": output.display().to_string(), "bytes": svg.len()}))
}

fn run(cli: Cli) -> arcop::Result<Outcome> {
    Ok(match cli.command {
        Command::Validate { file } => Outcome::ok(validate(&file)?),
        Command::Compose(a) => Outcome::ok(compose(&a)?),
        Command::Laws { trials, seed, suite } => {
            let suites = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let reports = suites.into_iter().map(|s| run_suite(s, trials, seed)).collect::<arcop::Result<Vec<_>>>()?;
            Outcome {
                ok: reports.iter().all(LawReport::passed),
                report: json!({"seed": seed, "suites": reports.iter().map(law_report).collect::<Vec<_>>()}),
            }
        }
        Command::Frame { cactus } => Outcome::ok(doc(&frame(&read::<Cactus>(&cactus)?)?)),
        Command::Loop { family } => Outcome::ok(doc(&loop_of(&read(&family)?)?)),
        Command::Section { config } => Outcome::ok(doc(&section_of(&read(&config)?)?)),
        Command::BvCheck { identity } => {
            if let Some(n) = &identity {
                if !CONTRACTS.contains(&n.as_str()) {
                    return Err(Error::Unsupported(format!("unknown identity {n:?}, expected one of {CONTRACTS:?}")));
                }
            }
            let reps = check_face_contracts(identity.as_deref())?;
            Outcome {
                ok: reps.iter().all(|r| r.passed()),
                report: json!(reps
                    .iter()
                    .map(|r| json!({"identity": r.name, "checks": r.checks, "passed": r.passed(), "failures": r.failures}))
                    .collect::<Vec<_>>()),
            }
        }
        Command::Circles(c) => circles(&c)?,
        Command::Render { model, output, input } => Outcome::ok(render(model, &output, &input)?),
        Command::Random { seed, bounds: b } => Outcome::ok(doc(&random_family(seed, &bounds(&b)?)?)),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            let _ = writeln!(std::io::stdout(), "{}", o.report);
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let _ = writeln!(std::io::stdout(), "{}", json!({"error": e.to_string()}));
            let usage = matches!(e, Error::Unsupported(_));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
