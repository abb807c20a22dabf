//! `troplog`: JSON-in, JSON-out front end for the tropical map library.
//!
//! Every command prints one `CommandResult` document on stdout. Exit codes:
//! 0 ok, 2 parse or usage errors, 3 invalid input, 4 domain errors
//! (nonzero contact sums, two-pointed maps), 5 range errors, 6 fan errors.

mod sample;

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use troplog::moduli::{build_map_moduli_multi, build_moduli_complex, classify_self_map, product_decomposition};
use troplog::pl_function::{extend_from_leg_slopes, ContactOrder, PLFunction};
use troplog::subdivision::fan::Fan;
use troplog::subdivision::subdivide_map_moduli;
use troplog::tropical_curve::{Tree, VertexId};
use troplog::{AffineExpr, Error};

#[derive(Parser)]
#[command(name = "troplog", version, about = "Tropical maps to the logarithmic torus, exactly")]
struct Cli {
    /// Seed for commands that sample random points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Include wall-clock time in the result.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a tree file against every structural invariant.
    Validate {
        /// Tree JSON file, or `-` for stdin.
        tree: PathBuf,
    },
    /// Extend leg slopes to the unique balanced function on a tree.
    Extend {
        tree: PathBuf,
        /// Comma-separated leg slopes, e.g. `2,-1,-1`.
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
        /// Vertex whose value is fixed (default: first listed vertex).
        #[arg(long)]
        basepoint: Option<u32>,
        /// Value at the basepoint: a rational or affine expression.
        #[arg(long, default_value = "c", allow_hyphen_values = true)]
        value: String,
    },
    /// Multidegree of a piecewise-linear function file.
    Multidegree { function: PathBuf },
    /// Moduli cone complex of curves, or of maps when `--sigma` is given.
    Moduli {
        n: usize,
        /// Contact orders, one per target direction.
        #[arg(long, allow_hyphen_values = true)]
        sigma: Vec<String>,
        /// Subdivide by the fan in this file.
        #[arg(long, conflicts_with = "certify_product")]
        subdivide: Option<PathBuf>,
        /// Certify the product decomposition using the value at this leg.
        #[arg(long)]
        certify_product: Option<u32>,
    },
    /// Subdivide the map complex by a complete fan.
    Subdivide {
        n: usize,
        #[arg(long, allow_hyphen_values = true, required = true)]
        sigma: Vec<String>,
        #[arg(long)]
        fan: PathBuf,
        /// Also check the cells against this many random points per cone.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Normal form of the self-map `t -> r t + a`, optionally composed with another.
    Selfmap {
        #[arg(allow_hyphen_values = true)]
        r: i64,
        #[arg(allow_hyphen_values = true)]
        a: String,
        /// Inner map `R A`; the result is `(r, a) ∘ (R, A)`.
        #[arg(long, num_args = 2, value_names = ["R", "A"], allow_hyphen_values = true)]
        compose: Option<Vec<String>>,
    },
}

struct Failure {
    code: &'static str,
    exit: u8,
    message: String,
    detail: Option<Value>,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self { code: "parse", exit: 2, message: message.into(), detail: None }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, exit, detail) = match &e {
            Error::Parse(_) => ("parse", 2, None),
            Error::InvalidTree(r) => ("invalid_tree", 3, serde_json::to_value(r).ok()),
            Error::InvalidFunction(_) => ("invalid_function", 3, None),
            Error::LengthMismatch { expected, found } => {
                ("length_mismatch", 3, Some(json!({ "expected": expected, "found": found })))
            }
            Error::NoSuchEdge(_) => ("no_such_edge", 3, None),
            Error::NoSuchLeg(_) => ("no_such_leg", 3, None),
            Error::NoSuchVertex(_) => ("no_such_vertex", 3, None),
            Error::UndeclaredCoordinate(_) => ("undeclared_coordinate", 3, None),
            Error::NonZeroSum { sum } => ("non_zero_sum", 4, Some(json!({ "sum": sum }))),
            Error::TwoPointed => ("two_pointed", 4, None),
            Error::TargetDimension { .. } => ("target_dimension", 4, None),
            Error::UnstableRange { n } => ("unstable_range", 5, Some(json!({ "n": n }))),
            Error::UnsupportedDimension(_) => ("unsupported_dimension", 5, None),
            Error::IncompleteFan => ("incomplete_fan", 6, None),
            Error::InvalidFan(r) => ("invalid_fan", 6, serde_json::to_value(r).ok()),
        };
        Self { code, exit, message: e.to_string(), detail }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::parse(format!("{e:#}"))
    }
}

type Outcome = Result<Value, Failure>;

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

/// Parses a JSON file, reporting the failing field path and position. A
/// successful `CommandResult` document is accepted in place of its payload,
/// so commands can be chained.
fn parse_file<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_input(path)?;
    if let Ok(Value::Object(doc)) = serde_json::from_str::<Value>(&text) {
        if doc.get("status") == Some(&json!("ok")) {
            if let Some(payload) = doc.get("payload") {
                return serde_path_to_error::deserialize(payload).map_err(|e| Failure {
                    code: "parse",
                    exit: 2,
                    message: format!("{}: payload: {}", path.display(), e.inner()),
                    detail: Some(json!({ "path": format!("payload.{}", e.path()) })),
                });
            }
        }
    }
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Failure {
            code: "parse",
            exit: 2,
            message: format!("{}: {inner}", path.display()),
            detail: Some(json!({
                "path": e.path().to_string(),
                "line": inner.line(),
                "column": inner.column(),
            })),
        }
    })
}

fn parse_sigma(text: &str) -> Result<ContactOrder, Failure> {
    let slopes = text
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|_| Failure::parse(format!("bad slope `{s}` in `{text}`"))))
        .collect::<Result<_, _>>()?;
    Ok(ContactOrder::new(slopes))
}

fn parse_expr(text: &str) -> Result<AffineExpr, Failure> {
    text.parse::<AffineExpr>().map_err(Failure::from)
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn validate(path: &Path) -> Outcome {
    let tree: Tree = parse_file(path)?;
    let report = tree.validate();
    if report.is_valid() {
        Ok(json!({ "valid": true, "violations": [] }))
    } else {
        Err(Error::InvalidTree(report).into())
    }
}

fn extend(path: &Path, sigma: &str, basepoint: Option<u32>, value: &str) -> Outcome {
    let tree: Tree = parse_file(path)?;
    let report = tree.validate();
    if !report.is_valid() {
        return Err(Error::InvalidTree(report).into());
    }
    let sigma = parse_sigma(sigma)?;
    let base = basepoint.map(VertexId).unwrap_or(tree.vertices()[0]);
    let f = extend_from_leg_slopes(&tree, &sigma, base, parse_expr(value)?)?;
    Ok(to_value(&f))
}

fn multidegree(path: &Path) -> Outcome {
    let f: PLFunction = parse_file(path)?;
    let md = f.multidegree();
    Ok(json!({ "degrees": md, "total": md.total(), "balanced": md.is_zero() }))
}

fn contact_orders(sigma: &[String]) -> Result<Vec<ContactOrder>, Failure> {
    sigma.iter().map(|s| parse_sigma(s)).collect()
}

fn moduli(n: usize, sigma: &[String], fan: Option<&Path>, leg: Option<u32>, seed: u64) -> Outcome {
    let contact = contact_orders(sigma)?;
    if let Some(leg) = leg {
        let [sigma] = contact.as_slice() else {
            return Err(Error::TargetDimension { expected: 1, found: contact.len() }.into());
        };
        return Ok(to_value(&product_decomposition(n, sigma, leg)?));
    }
    if let Some(fan) = fan {
        return subdivide(n, &contact, fan, 0, seed);
    }
    if contact.is_empty() {
        return Ok(to_value(&build_moduli_complex(n)?));
    }
    Ok(to_value(&build_map_moduli_multi(n, &contact)?))
}

fn subdivide(n: usize, contact: &[ContactOrder], fan: &Path, samples: usize, seed: u64) -> Outcome {
    let fan: Fan = parse_file(fan)?;
    let result = subdivide_map_moduli(n, contact, &fan)?;
    let mut payload = to_value(&result);
    if samples > 0 {
        payload["sample_check"] = to_value(&sample::check(&result, samples, seed));
    }
    Ok(payload)
}

fn selfmap(r: i64, a: &str, compose: Option<&[String]>) -> Outcome {
    let outer = classify_self_map(r, parse_expr(a)?);
    let result = match compose {
        Some([r2, a2]) => {
            let r2: i64 = r2.parse().map_err(|_| Failure::parse(format!("bad degree `{r2}`")))?;
            outer.compose(&classify_self_map(r2, parse_expr(a2)?))
        }
        Some(_) => return Err(Failure::parse("--compose takes a degree and a translation")),
        None => outer,
    };
    Ok(to_value(&result))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { tree } => validate(tree),
        Command::Extend { tree, sigma, basepoint, value } => extend(tree, sigma, *basepoint, value),
        Command::Multidegree { function } => multidegree(function),
        Command::Moduli { n, sigma, subdivide, certify_product } => {
            moduli(*n, sigma, subdivide.as_deref(), *certify_product, cli.seed)
        }
        Command::Subdivide { n, sigma, fan, samples } => subdivide(*n, &contact_orders(sigma)?, fan, *samples, cli.seed),
        Command::Selfmap { r, a, compose } => selfmap(*r, a, compose.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    let start = Instant::now();
    let outcome = run(&cli);
    let elapsed = start.elapsed().as_millis() as u64;

    let mut doc = BTreeMap::new();
    let exit = match outcome {
        Ok(payload) => {
            doc.insert("status", json!("ok"));
            doc.insert("payload", payload);
            0
        }
        Err(f) => {
            doc.insert("status", json!("error"));
            doc.insert("code", json!(f.code));
            let mut payload = json!({ "message": f.message });
            if let Some(detail) = f.detail {
                payload["detail"] = detail;
            }
            doc.insert("payload", payload);
            f.exit
        }
    };
    if cli.timing {
        doc.insert("timing_ms", json!(elapsed));
    }
    let text = serde_json::to_string_pretty(&doc).expect("json output");
    // A closed stdout (e.g. piping into `head`) is not worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(exit)
}
