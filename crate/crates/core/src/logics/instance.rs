use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use super::{FoOracle, FrameOracle, Oracle, PropOracle};
use crate::domain::DomainSystem;
use crate::error::{Error, Result};
use crate::syntax::{
    Atom, Connective, Formula, LogicDef, PropUniverse, Quantifier, Signature, Spelling,
};

/// Default model-size bound of the bounded oracles.
pub const DEFAULT_BOUND: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Prop,
    ModalK,
    /// First-order logic with `∃v` as a full operator.
    Fo,
    /// The guarded fragment.
    Gf,
    /// Boolean algebras with operators, through terms.
    Bao,
}

impl Kind {
    pub const ALL: [Kind; 5] = [Kind::Prop, Kind::ModalK, Kind::Fo, Kind::Gf, Kind::Bao];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Prop => "prop",
            Kind::ModalK => "modal-k",
            Kind::Fo => "fo",
            Kind::Gf => "gf",
            Kind::Bao => "bao",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown logic `{s}`")))
    }
}

/// Instance configuration, read from JSON. Unset fields take per-logic
/// defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    /// Proposition letters (prop, modal-k). Unset means any identifier.
    pub props: Option<Vec<String>>,
    /// Operator names and ranks (modal-k, bao).
    pub operators: Option<BTreeMap<String, usize>>,
    /// Variables (fo, gf, bao).
    pub variables: Option<Vec<String>>,
    /// Relation symbols and arities (fo, gf).
    pub relations: Option<BTreeMap<String, usize>>,
    /// Constant symbols (bao).
    pub constants: Option<Vec<String>>,
    /// Whether `=` is available (fo, gf).
    pub equality: Option<bool>,
    /// Replaces the instance's domain-representation system.
    pub domain: Option<serde_json::Value>,
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A logic together with its domain-representation system, the finite
/// vocabulary that `all` expands to, and its semantic oracle.
#[derive(Clone, Debug)]
pub struct Instance {
    kind: Kind,
    logic: LogicDef,
    props: Option<Vec<Atom>>,
    conns: Vec<Connective>,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Instance {
    pub fn new(kind: Kind, cfg: &InstanceConfig) -> Result<Instance> {
        let letters = cfg.props.as_ref().map(|ps| {
            let names: BTreeSet<String> = ps.iter().cloned().collect();
            names
        });
        let vars = cfg.variables.clone().unwrap_or_else(|| match kind {
            Kind::Bao => strings(&["x", "y", "z"]),
            _ => strings(&["u", "v", "w"]),
        });
        let rels = cfg
            .relations
            .clone()
            .unwrap_or_else(|| BTreeMap::from([("P".to_string(), 1), ("R".to_string(), 2)]));
        let equality = cfg.equality.unwrap_or(false);
        let ops = |default: &str| {
            cfg.operators
                .clone()
                .unwrap_or_else(|| BTreeMap::from([(default.to_string(), 1)]))
        };
        for (name, &rank) in cfg.operators.iter().flatten() {
            if rank == 0 {
                return Err(Error::Config(format!("operator `{name}` needs a positive rank")));
            }
        }
        let mut signature = Signature::letters();
        if let Some(names) = &letters {
            signature.props = PropUniverse::Listed(names.clone());
        }
        let mut spelling = Spelling::default();
        let (domain, props, conns) = match kind {
            Kind::Prop => {
                let props = letters.map(|n| n.into_iter().map(Atom::letter).collect());
                (DomainSystem::full_operator(), props, Vec::new())
            }
            Kind::ModalK => {
                signature.operators = ops("dia");
                let props = letters.map(|n| n.into_iter().map(Atom::letter).collect());
                let conns = operators(&signature.operators);
                (DomainSystem::full_operator(), props, conns)
            }
            Kind::Fo | Kind::Gf => {
                if vars.len() < 2 {
                    return Err(Error::Config("first-order instances need two variables".into()));
                }
                signature.props = PropUniverse::Relational;
                signature.relations = rels.clone();
                signature.variables = vars.iter().cloned().collect();
                signature.equality = equality;
                let atoms = atoms_over(&vars, &rels, equality);
                if kind == Kind::Fo {
                    signature.quantifier = Some(Quantifier::Plain);
                    let conns = signature
                        .variables
                        .iter()
                        .map(|v| Connective::exists(v.clone()))
                        .collect();
                    (DomainSystem::full_operator(), Some(atoms), conns)
                } else {
                    signature.quantifier = Some(Quantifier::Guarded);
                    let conns = guarded_family(&atoms);
                    (DomainSystem::free_variables(vars.clone())?, Some(atoms), conns)
                }
            }
            Kind::Bao => {
                spelling = Spelling::algebraic();
                signature.operators = ops("f");
                let consts = cfg.constants.clone().unwrap_or_default();
                let names: BTreeSet<String> = vars.iter().chain(&consts).cloned().collect();
                let Some(anchor) = vars.first().or(consts.first()) else {
                    return Err(Error::Config("terms need a variable or a constant".into()));
                };
                signature.units = Some(anchor.clone());
                signature.props = PropUniverse::Listed(names.clone());
                let conns = operators(&signature.operators);
                let props = names.into_iter().map(Atom::letter).collect();
                (DomainSystem::full_operator(), Some(props), conns)
            }
        };
        let domain = match &cfg.domain {
            Some(doc) => DomainSystem::from_json(&doc.to_string())?,
            None => domain,
        };
        Ok(Instance {
            kind,
            logic: LogicDef {
                name: kind.to_string(),
                spelling,
                signature,
                domain,
            },
            props,
            conns,
        })
    }

    /// The instance with default configuration.
    pub fn default_for(kind: Kind) -> Instance {
        Instance::new(kind, &InstanceConfig::default()).expect("defaults are valid")
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn logic(&self) -> &LogicDef {
        &self.logic
    }

    pub fn domain(&self) -> &DomainSystem {
        &self.logic.domain
    }

    pub fn parse(&self, text: &str) -> Result<Formula> {
        self.logic.parse(text)
    }

    pub fn render(&self, f: &Formula) -> String {
        self.logic.render(f)
    }

    /// Every proposition of the instance, when there are finitely many.
    pub fn all_props(&self) -> Result<Vec<Atom>> {
        self.props.clone().ok_or_else(|| {
            Error::Config(format!(
                "logic `{}` has no finite proposition list; list them explicitly or in the config",
                self.kind
            ))
        })
    }

    /// Every non-propositional connective of the instance over its
    /// configured vocabulary.
    pub fn all_conns(&self) -> Vec<Connective> {
        self.conns.clone()
    }

    pub fn oracle(&self, bound: Option<usize>) -> Box<dyn Oracle> {
        let n = bound.unwrap_or(DEFAULT_BOUND);
        match self.kind {
            Kind::Prop => Box::new(PropOracle),
            Kind::ModalK => Box::new(FrameOracle::kripke(n)),
            Kind::Fo | Kind::Gf => Box::new(FoOracle::new(n)),
            Kind::Bao => Box::new(FrameOracle::complex_algebra(n)),
        }
    }
}

fn operators(ops: &BTreeMap<String, usize>) -> Vec<Connective> {
    ops.iter()
        .map(|(n, &r)| Connective::operator(n.clone(), r))
        .collect()
}

/// All atoms over the variables and relation symbols, sorted.
pub fn atoms_over(vars: &[String], rels: &BTreeMap<String, usize>, equality: bool) -> Vec<Atom> {
    let mut out = BTreeSet::new();
    let mut symbols: Vec<(&str, usize)> = rels.iter().map(|(s, &k)| (s.as_str(), k)).collect();
    if equality {
        symbols.push(("=", 2));
    }
    for (s, k) in symbols {
        let mut tuples: Vec<Vec<String>> = vec![Vec::new()];
        for _ in 0..k {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    vars.iter().map(move |v| {
                        let mut t = t.clone();
                        t.push(v.clone());
                        t
                    })
                })
                .collect();
        }
        for t in tuples {
            out.insert(Atom::relational(s, t));
        }
    }
    out.into_iter().collect()
}

/// `∃ū(γ ∧ −)` for every atom `γ` and every `ū ⊆ free(γ)`, the empty block
/// included.
pub fn guarded_family(atoms: &[Atom]) -> Vec<Connective> {
    let mut out = BTreeSet::new();
    for g in atoms {
        let free: Vec<&str> = g.variables().into_iter().collect();
        for mask in 0u32..1 << free.len() {
            let bound = free
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| *v);
            out.insert(Connective::guarded(bound, g.clone()));
        }
    }
    out.into_iter().collect()
}
