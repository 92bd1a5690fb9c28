//! Formula trees, connective signatures and the s-expression surface syntax.

mod parse;
mod sexpr;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use parse::{LogicDef, PropUniverse, Quantifier, Signature};
pub use sexpr::{SExpr, SExprKind};

/// A proposition. Plain letters have no arguments; first-order atoms carry
/// their relation symbol and variable arguments.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(Arc<AtomData>);

#[derive(PartialEq, Eq, Hash, PartialOrd, Ord)]
struct AtomData {
    symbol: String,
    args: Vec<String>,
}

impl Atom {
    pub fn letter(name: impl Into<String>) -> Self {
        Self::relational(name, Vec::<String>::new())
    }

    pub fn relational<S: Into<String>>(
        symbol: impl Into<String>,
        args: impl IntoIterator<Item = S>,
    ) -> Self {
        Atom(Arc::new(AtomData {
            symbol: symbol.into(),
            args: args.into_iter().map(Into::into).collect(),
        }))
    }

    pub fn symbol(&self) -> &str {
        &self.0.symbol
    }

    pub fn args(&self) -> &[String] {
        &self.0.args
    }

    /// Distinct variables among the arguments, sorted.
    pub fn variables(&self) -> BTreeSet<&str> {
        self.0.args.iter().map(String::as_str).collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.args.is_empty() {
            f.write_str(&self.0.symbol)
        } else {
            write!(f, "({}", self.0.symbol)?;
            for a in &self.0.args {
                write!(f, " {a}")?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Extra structure carried by a non-propositional connective.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Binder {
    /// A plain operator such as a diamond or an algebra operator.
    None,
    /// Unrestricted first-order `∃v`.
    Exists(String),
    /// Guarded quantifier `∃ū(γ ∧ −)`; `bound` is sorted and deduplicated.
    Guarded { bound: Vec<String>, guard: Atom },
}

/// A member of Cn′, the non-propositional connectives. The Boolean
/// connectives are built into [`Formula`] and never appear here.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Connective(Arc<ConnectiveData>);

#[derive(PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ConnectiveData {
    name: String,
    rank: usize,
    binder: Binder,
}

impl Connective {
    /// # Panics
    /// If `rank` is zero.
    pub fn operator(name: impl Into<String>, rank: usize) -> Self {
        assert!(rank >= 1, "connectives have non-zero rank");
        Connective(Arc::new(ConnectiveData {
            name: name.into(),
            rank,
            binder: Binder::None,
        }))
    }

    pub fn exists(var: impl Into<String>) -> Self {
        Connective(Arc::new(ConnectiveData {
            name: QUANTIFIER.to_string(),
            rank: 1,
            binder: Binder::Exists(var.into()),
        }))
    }

    pub fn guarded<S: Into<String>>(bound: impl IntoIterator<Item = S>, guard: Atom) -> Self {
        let bound: BTreeSet<String> = bound.into_iter().map(Into::into).collect();
        Connective(Arc::new(ConnectiveData {
            name: QUANTIFIER.to_string(),
            rank: 1,
            binder: Binder::Guarded {
                bound: bound.into_iter().collect(),
                guard,
            },
        }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    pub fn binder(&self) -> &Binder {
        &self.0.binder
    }

    pub fn guard(&self) -> Option<&Atom> {
        match &self.0.binder {
            Binder::Guarded { guard, .. } => Some(guard),
            _ => None,
        }
    }
}

/// The spelling used for quantifier heads in the surface syntax.
pub const QUANTIFIER: &str = "ex";

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.binder {
            Binder::None => f.write_str(&self.0.name),
            Binder::Exists(v) => write!(f, "{} ({v})", self.0.name),
            Binder::Guarded { bound, guard } => {
                write!(f, "{} ({}) {guard}", self.0.name, bound.join(" "))
            }
        }
    }
}

impl fmt::Debug for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Formula tree. Subtrees are reference counted so rendered normal forms can
/// share their (often repeated) components.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(Atom),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    App(Connective, Arc<[Formula]>),
}

impl Formula {
    pub fn prop(atom: Atom) -> Self {
        Formula::Prop(atom)
    }

    pub fn letter(name: &str) -> Self {
        Formula::Prop(Atom::letter(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    /// Builds an application without checking domains; use
    /// [`crate::domain::DomainSystem::apply`] for a checked construction.
    ///
    /// # Panics
    /// If the argument count differs from the rank.
    pub fn app(conn: Connective, args: Vec<Formula>) -> Self {
        assert_eq!(conn.rank(), args.len(), "arity mismatch for {conn}");
        Formula::App(conn, args.into())
    }

    /// `a → b`, expanded to `¬a ∨ b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    /// `a ↔ b`, expanded to `(a → b) ∧ (b → a)`.
    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    /// Right-nested conjunction in iteration order; `None` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        fold_right(items, Formula::And)
    }

    /// Right-nested disjunction in iteration order; `None` when empty.
    pub fn disjunction(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        fold_right(items, Formula::Or)
    }

    /// Nesting depth of non-propositional connectives.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Prop(_) => 0,
            Formula::Not(a) => a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => a.depth().max(b.depth()),
            Formula::App(_, args) => 1 + args.iter().map(Formula::depth).max().unwrap_or(0),
        }
    }

    /// Propositions and Cn′-connectives occurring in the formula. Guard atoms
    /// of guarded quantifiers count as occurring propositions.
    pub fn vocabulary(&self) -> Vocabulary {
        let mut voc = Vocabulary::default();
        self.collect_vocabulary(&mut voc);
        voc
    }

    fn collect_vocabulary(&self, voc: &mut Vocabulary) {
        match self {
            Formula::Prop(p) => {
                voc.props.insert(p.clone());
            }
            Formula::Not(a) => a.collect_vocabulary(voc),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_vocabulary(voc);
                b.collect_vocabulary(voc);
            }
            Formula::App(c, args) => {
                if let Some(g) = c.guard() {
                    voc.props.insert(g.clone());
                }
                voc.conns.insert(c.clone());
                for a in args.iter() {
                    a.collect_vocabulary(voc);
                }
            }
        }
    }

    pub fn render(&self) -> String {
        self.render_with(&Spelling::default())
    }

    pub fn render_with(&self, spelling: &Spelling) -> String {
        let mut out = String::new();
        self.write_sexpr(spelling, &mut out);
        out
    }

    fn write_sexpr(&self, sp: &Spelling, out: &mut String) {
        use std::fmt::Write;
        match self {
            Formula::Prop(p) => {
                let _ = write!(out, "{p}");
            }
            Formula::Not(a) => {
                out.push('(');
                out.push_str(&sp.not);
                out.push(' ');
                a.write_sexpr(sp, out);
                out.push(')');
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                out.push('(');
                out.push_str(if matches!(self, Formula::And(..)) {
                    &sp.and
                } else {
                    &sp.or
                });
                out.push(' ');
                a.write_sexpr(sp, out);
                out.push(' ');
                b.write_sexpr(sp, out);
                out.push(')');
            }
            Formula::App(c, args) => {
                out.push('(');
                match c.binder() {
                    Binder::None => out.push_str(c.name()),
                    Binder::Exists(v) => {
                        let _ = write!(out, "{} ({v})", c.name());
                    }
                    Binder::Guarded { bound, guard } => {
                        let _ = write!(out, "{} ({}) {guard}", c.name(), bound.join(" "));
                    }
                }
                for a in args.iter() {
                    out.push(' ');
                    a.write_sexpr(sp, out);
                }
                out.push(')');
            }
        }
    }
}

fn fold_right(
    items: impl IntoIterator<Item = Formula>,
    node: fn(Arc<Formula>, Arc<Formula>) -> Formula,
) -> Option<Formula> {
    let items: Vec<Formula> = items.into_iter().collect();
    let mut iter = items.into_iter().rev();
    let last = iter.next()?;
    Some(iter.fold(last, |acc, f| node(Arc::new(f), Arc::new(acc))))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// P(ψ) and Cn(ψ).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub props: BTreeSet<Atom>,
    pub conns: BTreeSet<Connective>,
}

/// Heads used for the Boolean connectives. The algebraic instance spells
/// them `-`, `*`, `+`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spelling {
    pub not: String,
    pub and: String,
    pub or: String,
}

impl Default for Spelling {
    fn default() -> Self {
        Spelling {
            not: "not".into(),
            and: "and".into(),
            or: "or".into(),
        }
    }
}

impl Spelling {
    pub fn algebraic() -> Self {
        Spelling {
            not: "-".into(),
            and: "*".into(),
            or: "+".into(),
        }
    }
}
