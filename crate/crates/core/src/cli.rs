//! The `normforms` command line.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::constituents::{partition_check, SpaceTable, DEFAULT_CAP};
use crate::domain::{Generator, Region};
use crate::error::Result;
use crate::logics::{Instance, InstanceConfig, Kind};
use crate::rewriter::{verify, Normalizer};
use crate::syntax::{Atom, Connective, Formula};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REFUTED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "normforms", version, about = "Normal forms for additive logics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a formula and print its canonical text, depth and vocabulary.
    Parse(FormulaArgs),
    /// List the members of N_k(X,Y;E).
    Enumerate(Common),
    /// Print |N_k(X,Y;E)| exactly.
    Count(Common),
    /// Rewrite a formula into a set of constituents.
    Normalize(FormulaArgs),
    /// Normalize and check the result against the instance's oracle.
    Verify(FormulaArgs),
    /// Check that the members of N_k(X,Y;E) partition every model within
    /// the oracle's bound.
    PartitionCheck(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// prop, modal-k, fo, gf or bao.
    #[arg(long, default_value = "prop")]
    logic: String,
    /// JSON instance configuration.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Degree.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated propositions, or `all`.
    #[arg(long = "X")]
    x: Option<String>,
    /// Comma-separated connectives, or `all`.
    #[arg(long = "Y")]
    y: Option<String>,
    /// Comma-separated points of V, or `all`.
    #[arg(long = "E")]
    e: Option<String>,
    /// Largest space that may be materialized.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Model-size bound of the oracle.
    #[arg(long)]
    bound: Option<usize>,
    /// Include rendered formulas.
    #[arg(long)]
    render: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct FormulaArgs {
    #[command(flatten)]
    common: Common,
    /// Also check the result against the oracle (normalize only).
    #[arg(long)]
    verify: bool,
    /// Formula text; read from stdin when absent or `-`.
    formula: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

struct Output {
    value: Value,
    text: String,
    code: i32,
}

/// Runs the command line and returns the exit status. Normal output goes to
/// `out`, diagnostics to `err`.
pub fn run(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let format = match &cli.command {
        Command::Parse(a) | Command::Normalize(a) | Command::Verify(a) => a.common.format,
        Command::Enumerate(c) | Command::Count(c) | Command::PartitionCheck(c) => c.format,
    };
    match execute(cli.command, stdin) {
        Ok(o) => {
            let written = match format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&o.value).expect("plain data")
                ),
                Format::Text => write!(out, "{}", o.text),
            };
            if written.is_err() {
                return EXIT_ERROR;
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cmd: Command, stdin: &mut dyn Read) -> Result<Output> {
    match cmd {
        Command::Parse(a) => cmd_parse(&a, stdin),
        Command::Enumerate(c) => cmd_enumerate(&c),
        Command::Count(c) => cmd_count(&c),
        Command::Normalize(a) => cmd_normalize(&a, a.verify, stdin),
        Command::Verify(a) => cmd_normalize(&a, true, stdin),
        Command::PartitionCheck(c) => cmd_partition(&c),
    }
}

fn instance(c: &Common) -> Result<Instance> {
    let kind: Kind = c.logic.parse()?;
    let cfg = match &c.config {
        Some(path) => InstanceConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => InstanceConfig::default(),
    };
    Instance::new(kind, &cfg)
}

fn formula_text(a: &FormulaArgs, stdin: &mut dyn Read) -> Result<String> {
    match a.formula.as_deref() {
        Some(t) if t != "-" => Ok(t.to_string()),
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn split(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn props(inst: &Instance, spec: &str) -> Result<Vec<Atom>> {
    if spec == "all" {
        return inst.all_props();
    }
    split(spec).map(|s| inst.logic().parse_atom(s)).collect()
}

fn conns(inst: &Instance, spec: &str) -> Result<Vec<Connective>> {
    if spec == "all" {
        return Ok(inst.all_conns());
    }
    split(spec).map(|s| inst.logic().parse_connective(s)).collect()
}

fn region(inst: &Instance, spec: &str) -> Result<Region> {
    if spec == "all" {
        return Ok(inst.domain().full());
    }
    inst.domain().region(split(spec))
}

/// The generator given by the flags, each unset component taken from
/// `base` or else from the instance's defaults.
fn generator(inst: &Instance, c: &Common, base: Option<Generator>) -> Result<Generator> {
    let k = c.k.or(base.as_ref().map(|g| g.k)).unwrap_or(0);
    let props = match (&c.x, &base) {
        (Some(x), _) => props(inst, x)?.into_iter().collect(),
        (None, Some(g)) => g.props.clone(),
        (None, None) => inst.all_props()?.into_iter().collect(),
    };
    let conns = match (&c.y, &base) {
        (Some(y), _) => conns(inst, y)?.into_iter().collect(),
        (None, Some(g)) => g.conns.clone(),
        (None, None) => inst.all_conns().into_iter().collect(),
    };
    let region = match (&c.e, &base) {
        (Some(e), _) => region(inst, e)?,
        (None, Some(g)) => g.region,
        (None, None) => inst.domain().full(),
    };
    Ok(Generator {
        k,
        props,
        conns,
        region,
    })
}

fn table(inst: &Instance, gen: &Generator, cap: u64) -> SpaceTable {
    SpaceTable::new(
        Arc::new(inst.domain().clone()),
        gen.props.iter().cloned(),
        gen.conns.iter().cloned(),
        cap,
    )
}

fn cmd_parse(a: &FormulaArgs, stdin: &mut dyn Read) -> Result<Output> {
    let inst = instance(&a.common)?;
    let f = inst.parse(&formula_text(a, stdin)?)?;
    let voc = f.vocabulary();
    let text = inst.render(&f);
    let iota = inst.domain().names(inst.domain().iota(&f)?);
    Ok(Output {
        value: json!({
            "formula": text,
            "depth": f.depth(),
            "props": voc.props.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "conns": voc.conns.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "iota": iota,
        }),
        text: format!("{text}\n"),
        code: EXIT_OK,
    })
}

fn cmd_enumerate(c: &Common) -> Result<Output> {
    let inst = instance(c)?;
    let gen = generator(&inst, c, None)?;
    let t = table(&inst, &gen, c.cap);
    let space = t.space(gen.k, gen.region)?;
    let mut members = Vec::new();
    let mut text = String::new();
    for m in space.members() {
        let mut v = m.to_json();
        if c.render {
            let f = inst.render(&space.formula(m.index));
            text.push_str(&format!("{} {f}\n", m.index));
            v["formula"] = json!(f);
        } else {
            text.push_str(&format!("{} {}\n", m.index, v));
        }
        members.push(v);
    }
    Ok(Output {
        value: json!({
            "key": t.key_json(gen.k, gen.region),
            "size": space.size(),
            "members": members,
        }),
        text,
        code: EXIT_OK,
    })
}

fn cmd_count(c: &Common) -> Result<Output> {
    let inst = instance(c)?;
    let gen = generator(&inst, c, None)?;
    let t = table(&inst, &gen, c.cap);
    let n = t.count(gen.k, gen.region)?;
    Ok(Output {
        value: json!({
            "key": t.key_json(gen.k, gen.region),
            "count": n.to_string(),
            "log2": n.log2().to_string(),
        }),
        text: format!("{n}\n"),
        code: EXIT_OK,
    })
}

fn cmd_normalize(a: &FormulaArgs, check: bool, stdin: &mut dyn Read) -> Result<Output> {
    let c = &a.common;
    let inst = instance(c)?;
    let f: Formula = inst.parse(&formula_text(a, stdin)?)?;
    let base = inst.domain().minimal_generator(&f)?;
    let gen = generator(&inst, c, Some(base))?;
    let ds = Arc::new(inst.domain().clone());
    let r = Normalizer::new(gen, ds, c.cap).normalize(&f)?;
    let mut value = r.to_json(inst.domain(), c.render.then_some(&inst.logic().spelling));
    let idx: Vec<String> = r.indices().iter().map(u64::to_string).collect();
    let mut text = format!(
        "sigma: [{}] ({} of {})\n",
        idx.join(" "),
        idx.len(),
        r.space.size()
    );
    if c.render {
        text.push_str(&format!("{}\n", inst.render(&r.disjunction())));
    }
    let mut code = EXIT_OK;
    if check {
        let oracle = inst.oracle(c.bound);
        let v = verify(&f, &r, oracle.as_ref())?;
        text.push_str(&format!(
            "verified: {} ({}{})\n",
            if v.passed { "pass" } else { "FAIL" },
            v.oracle,
            v.bound.map_or(String::new(), |b| format!(", bound {b}"))
        ));
        if !v.passed {
            code = EXIT_REFUTED;
        }
        value["verified"] = serde_json::to_value(&v)?;
    }
    Ok(Output { value, text, code })
}

fn cmd_partition(c: &Common) -> Result<Output> {
    let inst = instance(c)?;
    let gen = generator(&inst, c, None)?;
    let t = table(&inst, &gen, c.cap);
    let space = t.space(gen.k, gen.region)?;
    let oracle = inst.oracle(c.bound);
    let rep = partition_check(&space, oracle.as_ref())?;
    let text = format!(
        "{} ({} members, {}{})\n",
        if rep.passed { "pass" } else { "FAIL" },
        rep.size,
        rep.oracle,
        rep.bound.map_or(String::new(), |b| format!(", bound {b}"))
    );
    let code = if rep.passed { EXIT_OK } else { EXIT_REFUTED };
    let mut value = serde_json::to_value(&rep)?;
    value["key"] = t.key_json(gen.k, gen.region);
    Ok(Output { value, text, code })
}
