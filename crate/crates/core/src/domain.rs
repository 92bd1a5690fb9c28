//! Domain-representation systems `(V, ι, ȷ₁, ȷ₂)` and the largeness,
//! compatibility and suitability predicates built on them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{Atom, Binder, Connective, Formula};

/// A subset of the finite point set `V`, as a bitmask over point indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region(u64);

impl Region {
    pub const EMPTY: Region = Region(0);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn union(self, other: Region) -> Region {
        Region(self.0 | other.0)
    }

    pub fn minus(self, other: Region) -> Region {
        Region(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Region) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// How entries missing from the explicit tables are answered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Only the tables; a missing entry is an error.
    #[default]
    Table,
    /// `ι(φ) = V`, `ȷ₁(□) = ∅`, `ȷ₂(□) = V` for everything.
    FullOperator,
    /// Points are variables: `ι(atom)` is its variables, and a guarded
    /// quantifier `∃ū(γ ∧ −)` has `ȷ₁ = ū`, `ȷ₂ = free(γ)`.
    FreeVariables,
}

/// The quadruple `(V, ι, ȷ₁, ȷ₂)`. `ι` is stored on propositions only and
/// extended to all formulas structurally; membership in a connective's
/// domain is defined by `ι(φₖ) ⊆ ȷ₂(□)` for every argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSystem {
    points: Vec<String>,
    iota: BTreeMap<String, Region>,
    j1: BTreeMap<String, Region>,
    j2: BTreeMap<String, Region>,
    rule: Rule,
}

pub const MAX_POINTS: usize = 64;

impl DomainSystem {
    pub fn new<S: Into<String>>(points: impl IntoIterator<Item = S>, rule: Rule) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut pts = Vec::new();
        for p in points {
            let p = p.into();
            if !seen.insert(p.clone()) {
                return Err(Error::Config(format!("duplicate point `{p}` in V")));
            }
            pts.push(p);
        }
        if pts.is_empty() {
            return Err(Error::Config("V must be non-empty".into()));
        }
        if pts.len() > MAX_POINTS {
            return Err(Error::Config(format!("at most {MAX_POINTS} points supported")));
        }
        Ok(DomainSystem {
            points: pts,
            iota: BTreeMap::new(),
            j1: BTreeMap::new(),
            j2: BTreeMap::new(),
            rule,
        })
    }

    /// The system for logics whose connectives are all full operators,
    /// over the singleton `V = {•}`.
    pub fn full_operator() -> Self {
        Self::new(["•"], Rule::FullOperator).expect("singleton V")
    }

    /// The guarded-fragment system over the given variables.
    pub fn free_variables<S: Into<String>>(vars: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(vars, Rule::FreeVariables)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn full(&self) -> Region {
        if self.points.len() == 64 {
            Region(u64::MAX)
        } else {
            Region((1u64 << self.points.len()) - 1)
        }
    }

    pub fn region<S: AsRef<str>>(&self, names: impl IntoIterator<Item = S>) -> Result<Region> {
        let mut bits = 0u64;
        for n in names {
            let n = n.as_ref();
            let i = self
                .points
                .iter()
                .position(|p| p == n)
                .ok_or_else(|| Error::Unmapped(format!("point `{n}`")))?;
            bits |= 1 << i;
        }
        Ok(Region(bits))
    }

    pub fn names(&self, r: Region) -> Vec<String> {
        self.points
            .iter()
            .enumerate()
            .filter(|(i, _)| r.0 >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect()
    }

    pub fn show(&self, r: Region) -> String {
        format!("{{{}}}", self.names(r).join(","))
    }

    pub fn set_iota(&mut self, atom: &Atom, r: Region) {
        self.iota.insert(atom.to_string(), r);
    }

    pub fn set_connective(&mut self, conn: &Connective, j1: Region, j2: Region) {
        self.j1.insert(conn.to_string(), j1);
        self.j2.insert(conn.to_string(), j2);
    }

    pub fn iota_atom(&self, atom: &Atom) -> Result<Region> {
        if let Some(r) = self.iota.get(&atom.to_string()) {
            return Ok(*r);
        }
        match self.rule {
            Rule::Table => Err(Error::Unmapped(format!("proposition {atom}"))),
            Rule::FullOperator => Ok(self.full()),
            Rule::FreeVariables => self.region(atom.args()),
        }
    }

    pub fn j1(&self, conn: &Connective) -> Result<Region> {
        self.jmaps(conn).map(|(a, _)| a)
    }

    pub fn j2(&self, conn: &Connective) -> Result<Region> {
        self.jmaps(conn).map(|(_, b)| b)
    }

    fn jmaps(&self, conn: &Connective) -> Result<(Region, Region)> {
        let key = conn.to_string();
        if let (Some(a), Some(b)) = (self.j1.get(&key), self.j2.get(&key)) {
            return Ok((*a, *b));
        }
        match (self.rule, conn.binder()) {
            (Rule::FullOperator, _) => Ok((Region::EMPTY, self.full())),
            (Rule::FreeVariables, Binder::Guarded { bound, guard }) => {
                Ok((self.region(bound)?, self.region(guard.args())?))
            }
            _ => Err(Error::Unmapped(format!("connective {conn}"))),
        }
    }

    /// `ι` on arbitrary formulas.
    pub fn iota(&self, f: &Formula) -> Result<Region> {
        match f {
            Formula::Prop(p) => self.iota_atom(p),
            Formula::Not(a) => self.iota(a),
            Formula::And(a, b) | Formula::Or(a, b) => Ok(self.iota(a)?.union(self.iota(b)?)),
            Formula::App(c, _) => {
                let (j1, j2) = self.jmaps(c)?;
                Ok(j2.minus(j1))
            }
        }
    }

    pub fn in_domain(&self, conn: &Connective, args: &[Formula]) -> Result<bool> {
        Ok(self.domain_failure(conn, args)?.is_none())
    }

    /// The first argument whose footprint escapes `ȷ₂(conn)`, described.
    fn domain_failure(&self, conn: &Connective, args: &[Formula]) -> Result<Option<String>> {
        if args.len() != conn.rank() {
            return Ok(Some(format!(
                "{conn} has rank {} but got {} arguments",
                conn.rank(),
                args.len()
            )));
        }
        let j2 = self.j2(conn)?;
        for (i, a) in args.iter().enumerate() {
            let r = self.iota(a)?;
            if !r.is_subset(j2) {
                return Ok(Some(format!(
                    "argument {i} of {conn}: ι = {} ⊄ ȷ₂ = {}",
                    self.show(r),
                    self.show(j2)
                )));
            }
        }
        Ok(None)
    }

    /// Checked application of a connective.
    pub fn apply(&self, conn: &Connective, args: Vec<Formula>) -> Result<Formula> {
        if let Some(msg) = self.domain_failure(conn, &args)? {
            return Err(Error::DomainViolation(msg));
        }
        Ok(Formula::App(conn.clone(), args.into()))
    }

    /// Checks condition (c) at every application node.
    pub fn validate(&self, f: &Formula) -> Result<()> {
        match f {
            Formula::Prop(p) => self.iota_atom(p).map(drop),
            Formula::Not(a) => self.validate(a),
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.validate(a)?;
                self.validate(b)
            }
            Formula::App(c, args) => {
                for a in args.iter() {
                    self.validate(a)?;
                }
                match self.domain_failure(c, args)? {
                    Some(msg) => Err(Error::DomainViolation(msg)),
                    None => Ok(()),
                }
            }
        }
    }

    /// `X̃ = {p ∈ X : ι(p) ⊆ A}` in the order of `props`.
    pub fn tilde<'a>(
        &self,
        props: impl IntoIterator<Item = &'a Atom>,
        region: Region,
    ) -> Result<Vec<Atom>> {
        let mut out = Vec::new();
        for p in props {
            if self.iota_atom(p)?.is_subset(region) {
                out.push(p.clone());
            }
        }
        Ok(out)
    }

    pub fn large_enough<'a>(
        &self,
        props: impl IntoIterator<Item = &'a Atom>,
        region: Region,
    ) -> Result<bool> {
        Ok(!self.tilde(props, region)?.is_empty())
    }

    /// `ȷ₂(□)∖ȷ₁(□) ⊆ A` and `ȷ₂(□)` large enough for `X`.
    pub fn compatible<'a>(
        &self,
        conn: &Connective,
        props: impl IntoIterator<Item = &'a Atom>,
        region: Region,
    ) -> Result<bool> {
        let (j1, j2) = self.jmaps(conn)?;
        Ok(j2.minus(j1).is_subset(region) && self.large_enough(props, j2)?)
    }

    /// Checks every clause of generator suitability and reports all
    /// violations.
    pub fn suitable(&self, gen: &Generator, f: &Formula) -> SuitabilityReport {
        let mut violations = Vec::new();
        let depth = f.depth();
        if gen.k < depth {
            violations.push(Violation::DepthExceedsDegree { depth, k: gen.k });
        }
        let voc = f.vocabulary();
        let missing: Vec<String> = voc
            .props
            .difference(&gen.props)
            .map(|p| p.to_string())
            .collect();
        if !missing.is_empty() {
            violations.push(Violation::MissingPropositions(missing));
        }
        let missing: Vec<String> = voc
            .conns
            .difference(&gen.conns)
            .map(|c| c.to_string())
            .collect();
        if !missing.is_empty() {
            violations.push(Violation::MissingConnectives(missing));
        }
        match self.iota(f) {
            Ok(r) if !r.is_subset(gen.region) => violations.push(Violation::RegionTooSmall {
                missing: self.names(r.minus(gen.region)),
            }),
            Ok(_) => {}
            Err(e) => violations.push(Violation::Domain(e.to_string())),
        }
        match self.large_enough(&gen.props, gen.region) {
            Ok(true) => {}
            Ok(false) => violations.push(Violation::RegionNotLargeEnough),
            Err(e) => violations.push(Violation::Domain(e.to_string())),
        }
        for c in &voc.conns {
            let ok = self
                .j2(c)
                .and_then(|j2| self.large_enough(&gen.props, j2));
            match ok {
                Ok(true) => {}
                Ok(false) => violations.push(Violation::ConnectiveNotLargeEnough(c.to_string())),
                Err(e) => violations.push(Violation::Domain(e.to_string())),
            }
        }
        SuitabilityReport { violations }
    }

    /// Smallest suitable generator: `k = depth`, `X = P(φ)`, `Y = Cn(φ)`,
    /// `E = ι(φ)`, enlarged by the footprint of the cheapest proposition
    /// when `ι(φ)` alone is not large enough for `X`.
    pub fn minimal_generator(&self, f: &Formula) -> Result<Generator> {
        let voc = f.vocabulary();
        let mut region = self.iota(f)?;
        if !self.large_enough(&voc.props, region)? {
            let mut best: Option<(u32, Region)> = None;
            for p in &voc.props {
                let r = self.iota_atom(p)?;
                let extra = r.minus(region).bits().count_ones();
                if best.map_or(true, |(e, _)| extra < e) {
                    best = Some((extra, r));
                }
            }
            if let Some((_, r)) = best {
                region = region.union(r);
            }
        }
        Ok(Generator {
            k: f.depth(),
            props: voc.props,
            conns: voc.conns,
            region,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let regions = |m: &BTreeMap<String, Region>| -> BTreeMap<String, Vec<String>> {
            m.iter().map(|(k, r)| (k.clone(), self.names(*r))).collect()
        };
        serde_json::to_value(SystemDoc {
            points: self.points.clone(),
            iota: regions(&self.iota),
            j1: regions(&self.j1),
            j2: regions(&self.j2),
            rule: self.rule,
        })
        .expect("plain data")
    }

    /// Reads `{"V": [...], "iota": {...}, "j1": {...}, "j2": {...}}`, with an
    /// optional `"rule"` for unlisted entries. Map keys are rendered atoms and
    /// connectives.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SystemDoc = serde_json::from_str(text)?;
        let mut ds = DomainSystem::new(doc.points, doc.rule)?;
        for (k, v) in doc.iota {
            let r = ds.region(&v)?;
            ds.iota.insert(k, r);
        }
        if doc.j1.keys().ne(doc.j2.keys()) {
            return Err(Error::Config("j1 and j2 must list the same connectives".into()));
        }
        for (k, v) in doc.j1 {
            let r = ds.region(&v)?;
            ds.j1.insert(k, r);
        }
        for (k, v) in doc.j2 {
            let r = ds.region(&v)?;
            ds.j2.insert(k, r);
        }
        Ok(ds)
    }
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    #[serde(rename = "V")]
    points: Vec<String>,
    #[serde(default)]
    iota: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    j1: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    j2: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    rule: Rule,
}

/// `(k, X, Y, E)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub k: usize,
    pub props: BTreeSet<Atom>,
    pub conns: BTreeSet<Connective>,
    pub region: Region,
}

impl Generator {
    pub fn to_json(&self, ds: &DomainSystem) -> serde_json::Value {
        serde_json::json!({
            "k": self.k,
            "X": self.props.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "Y": self.conns.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "E": ds.names(self.region),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "kebab-case")]
pub enum Violation {
    DepthExceedsDegree { depth: usize, k: usize },
    MissingPropositions(Vec<String>),
    MissingConnectives(Vec<String>),
    RegionTooSmall { missing: Vec<String> },
    RegionNotLargeEnough,
    ConnectiveNotLargeEnough(String),
    Domain(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DepthExceedsDegree { depth, k } => {
                write!(f, "k = {k} is below the formula depth {depth}")
            }
            Violation::MissingPropositions(ps) => write!(f, "X lacks {}", ps.join(", ")),
            Violation::MissingConnectives(cs) => write!(f, "Y lacks {}", cs.join(", ")),
            Violation::RegionTooSmall { missing } => {
                write!(f, "E does not cover ι(φ); missing {}", missing.join(", "))
            }
            Violation::RegionNotLargeEnough => f.write_str("E is not large enough for X"),
            Violation::ConnectiveNotLargeEnough(c) => {
                write!(f, "ȷ₂({c}) is not large enough for X")
            }
            Violation::Domain(msg) => f.write_str(msg),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuitabilityReport {
    pub violations: Vec<Violation>,
}

impl SuitabilityReport {
    pub fn is_suitable(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SuitabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf() -> DomainSystem {
        DomainSystem::free_variables(["u", "v", "w"]).unwrap()
    }

    fn atom(s: &str, args: &[&str]) -> Atom {
        Atom::relational(s, args.iter().copied())
    }

    fn guard_uv() -> Connective {
        Connective::guarded(["u"], atom("R", &["u", "v"]))
    }

    #[test]
    fn full_operator_iota_is_everything() {
        let ds = DomainSystem::full_operator();
        let dia = Connective::operator("dia", 1);
        let f = Formula::app(dia.clone(), vec![Formula::not(Formula::letter("p"))]);
        assert_eq!(ds.iota(&f).unwrap(), ds.full());
        assert!(ds.in_domain(&dia, &[f.clone()]).unwrap());
        assert!(ds.compatible(&dia, &[Atom::letter("p")], ds.full()).unwrap());
        let x = [Atom::letter("p"), Atom::letter("q")];
        assert_eq!(ds.tilde(&x, ds.full()).unwrap(), x.to_vec());
    }

    #[test]
    fn guarded_iota_is_free_variables() {
        let ds = gf();
        let f = Formula::app(guard_uv(), vec![Formula::prop(atom("S", &["u"]))]);
        assert_eq!(ds.iota(&f).unwrap(), ds.region(["v"]).unwrap());
        assert_eq!(
            ds.iota(&Formula::prop(atom("R", &["u", "w"]))).unwrap(),
            ds.region(["u", "w"]).unwrap()
        );
    }

    #[test]
    fn guarded_domain_membership() {
        let ds = gf();
        let q = guard_uv();
        assert!(!ds.in_domain(&q, &[Formula::prop(atom("S", &["w"]))]).unwrap());
        assert!(ds.in_domain(&q, &[Formula::prop(atom("S", &["v"]))]).unwrap());
        let err = ds
            .apply(&q, vec![Formula::prop(atom("S", &["w"]))])
            .unwrap_err();
        assert!(err.to_string().contains("⊄"), "{err}");
    }

    #[test]
    fn tilde_filters_by_region() {
        let ds = gf();
        let x = [
            atom("R", &["u", "v"]),
            atom("R", &["v", "v"]),
            atom("S", &["v"]),
            atom("S", &["u"]),
        ];
        let v = ds.region(["v"]).unwrap();
        assert_eq!(
            ds.tilde(&x, v).unwrap(),
            vec![atom("R", &["v", "v"]), atom("S", &["v"])]
        );
        assert!(ds.tilde(&x, Region::EMPTY).unwrap().is_empty());
        assert!(!ds.large_enough(&x, Region::EMPTY).unwrap());
    }

    #[test]
    fn guarded_compatibility() {
        let ds = gf();
        let x = [atom("R", &["u", "v"])];
        let q = guard_uv();
        assert!(ds.compatible(&q, &x, ds.region(["v"]).unwrap()).unwrap());
        assert!(!ds.compatible(&q, &x, Region::EMPTY).unwrap());
        // ȷ₂ = {u,v} is not large enough for a set of atoms over w only.
        let xw = [atom("S", &["w"])];
        assert!(!ds.compatible(&q, &xw, ds.region(["v"]).unwrap()).unwrap());
    }

    #[test]
    fn suitability_clauses() {
        let ds = DomainSystem::full_operator();
        let p = Formula::letter("p");
        let q = Formula::letter("q");
        let dia = Connective::operator("dia", 1);
        let gen = Generator {
            k: 0,
            props: [Atom::letter("p"), Atom::letter("q")].into(),
            conns: BTreeSet::new(),
            region: ds.full(),
        };
        assert!(ds.suitable(&gen, &Formula::or(p.clone(), q)).is_suitable());

        let dp = Formula::app(dia.clone(), vec![p]);
        let gen = Generator {
            k: 0,
            props: [Atom::letter("p")].into(),
            conns: [dia].into(),
            region: ds.full(),
        };
        let rep = ds.suitable(&gen, &dp);
        assert_eq!(
            rep.violations,
            vec![Violation::DepthExceedsDegree { depth: 1, k: 0 }]
        );
        let gen = Generator {
            k: 1,
            conns: BTreeSet::new(),
            ..gen
        };
        let rep = ds.suitable(&gen, &dp);
        assert!(matches!(
            rep.violations.as_slice(),
            [Violation::MissingConnectives(_)]
        ));
    }

    #[test]
    fn minimal_generator_enlarges_for_sentences() {
        let ds = gf();
        let q = Connective::guarded(["u", "v"], atom("R", &["u", "v"]));
        let f = Formula::app(q, vec![Formula::prop(atom("S", &["u"]))]);
        assert_eq!(ds.iota(&f).unwrap(), Region::EMPTY);
        let gen = ds.minimal_generator(&f).unwrap();
        assert!(ds.suitable(&gen, &f).is_suitable(), "{}", ds.suitable(&gen, &f));
        assert_eq!(gen.region, ds.region(["u"]).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let mut ds = DomainSystem::new(["a", "b"], Rule::Table).unwrap();
        ds.set_iota(&Atom::letter("p"), ds.region(["a"]).unwrap());
        let c = Connective::operator("box", 1);
        ds.set_connective(&c, Region::EMPTY, ds.full());
        let text = ds.to_json().to_string();
        let back = DomainSystem::from_json(&text).unwrap();
        assert_eq!(back, ds);
        assert!(text.contains("\"V\""));
        assert!(back.iota_atom(&Atom::letter("q")).is_err());
    }
}
