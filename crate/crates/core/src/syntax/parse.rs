use std::collections::{BTreeMap, BTreeSet};

use crate::domain::DomainSystem;
use crate::error::{Error, Pos, Result};

use super::sexpr::{SExpr, SExprKind};
use super::{Atom, Connective, Formula, Spelling, QUANTIFIER};

/// Which bare tokens denote propositions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropUniverse {
    /// Any identifier that is not a reserved head.
    Letters,
    /// Only these names.
    Listed(BTreeSet<String>),
    /// Only relational atoms (nullary relations may be written bare).
    Relational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    /// `(ex (v …) body)`, unrestricted; several variables nest.
    Plain,
    /// `(ex (ū) guard body)`.
    Guarded,
}

/// The surface vocabulary of a logic instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub props: PropUniverse,
    /// Plain non-propositional operators and their ranks.
    pub operators: BTreeMap<String, usize>,
    /// Relation symbols and arities, for first-order atoms.
    pub relations: BTreeMap<String, usize>,
    pub variables: BTreeSet<String>,
    pub equality: bool,
    pub quantifier: Option<Quantifier>,
    /// When set, the bare tokens `0` and `1` stand for `a ∧ ¬a` and `a ∨ ¬a`
    /// with this proposition as `a`.
    pub units: Option<String>,
}

impl Signature {
    pub fn letters() -> Self {
        Signature {
            props: PropUniverse::Letters,
            operators: BTreeMap::new(),
            relations: BTreeMap::new(),
            variables: BTreeSet::new(),
            equality: false,
            quantifier: None,
            units: None,
        }
    }
}

/// A logic generated by propositions and connectives: its signature, its
/// Boolean spelling and its domain-representation system.
#[derive(Clone, Debug)]
pub struct LogicDef {
    pub name: String,
    pub spelling: Spelling,
    pub signature: Signature,
    pub domain: DomainSystem,
}

const IMPLIES: &str = "imp";
const IFF: &str = "iff";

impl LogicDef {
    /// Parses one formula. Derived connectives `imp` and `iff` are expanded;
    /// `and`/`or` accept two or more arguments and nest to the right.
    pub fn parse(&self, text: &str) -> Result<Formula> {
        let e = SExpr::parse(text)?;
        self.formula(&e)
    }

    /// Parses a single atom such as `p` or `(R u v)`.
    pub fn parse_atom(&self, text: &str) -> Result<Atom> {
        let e = SExpr::parse(text)?;
        match self.formula(&e)? {
            Formula::Prop(a) => Ok(a),
            _ => Err(Error::Syntax {
                pos: e.pos,
                msg: "expected an atom".into(),
            }),
        }
    }

    /// Parses a connective written as its head, e.g. `dia`, `ex (v)` or
    /// `ex (u) (R u v)`.
    pub fn parse_connective(&self, text: &str) -> Result<Connective> {
        let items = SExpr::parse_many(text)?;
        let pos = items.first().map_or(Pos { line: 1, col: 1 }, |e| e.pos);
        let head = items.first().and_then(SExpr::token).ok_or_else(|| Error::Syntax {
            pos,
            msg: "expected a connective".into(),
        })?;
        if head == QUANTIFIER && self.signature.quantifier.is_some() {
            let conns = self.quantifier_prefix(pos, &items[1..])?;
            return match conns.as_slice() {
                [c] => Ok(c.clone()),
                _ => Err(Error::Syntax {
                    pos,
                    msg: "expected a single-variable quantifier".into(),
                }),
            };
        }
        if items.len() != 1 {
            return Err(Error::Syntax {
                pos,
                msg: "unexpected tokens after connective".into(),
            });
        }
        match self.signature.operators.get(head) {
            Some(&rank) => Ok(Connective::operator(head, rank)),
            None => Err(Error::UnknownConnective {
                pos,
                name: head.into(),
            }),
        }
    }

    pub fn render(&self, f: &Formula) -> String {
        f.render_with(&self.spelling)
    }

    fn is_reserved(&self, tok: &str) -> bool {
        let sp = &self.spelling;
        tok == sp.not
            || tok == sp.and
            || tok == sp.or
            || tok == IMPLIES
            || tok == IFF
            || (self.signature.quantifier.is_some() && tok == QUANTIFIER)
            || self.signature.operators.contains_key(tok)
    }

    fn formula(&self, e: &SExpr) -> Result<Formula> {
        match &e.kind {
            SExprKind::Token(t) => self.bare(e.pos, t),
            SExprKind::List(items) => {
                let Some((head, rest)) = items.split_first() else {
                    return Err(syntax(e.pos, "empty list"));
                };
                let Some(h) = head.token() else {
                    return Err(syntax(head.pos, "list head must be a token"));
                };
                let sp = &self.spelling;
                if h == sp.not {
                    let [a] = rest else {
                        return Err(syntax(e.pos, format!("`{h}` takes one argument")));
                    };
                    return Ok(Formula::not(self.formula(a)?));
                }
                if h == sp.and || h == sp.or {
                    if rest.len() < 2 {
                        return Err(syntax(e.pos, format!("`{h}` takes at least two arguments")));
                    }
                    let args = rest
                        .iter()
                        .map(|a| self.formula(a))
                        .collect::<Result<Vec<_>>>()?;
                    let f = if h == sp.and {
                        Formula::conjunction(args)
                    } else {
                        Formula::disjunction(args)
                    };
                    return Ok(f.expect("non-empty"));
                }
                if h == IMPLIES || h == IFF {
                    let [a, b] = rest else {
                        return Err(syntax(e.pos, format!("`{h}` takes two arguments")));
                    };
                    let (a, b) = (self.formula(a)?, self.formula(b)?);
                    return Ok(if h == IMPLIES {
                        Formula::implies(a, b)
                    } else {
                        Formula::iff(a, b)
                    });
                }
                if h == QUANTIFIER && self.signature.quantifier.is_some() {
                    return self.quantified(e.pos, rest);
                }
                if let Some(&rank) = self.signature.operators.get(h) {
                    if rest.len() != rank {
                        return Err(syntax(
                            e.pos,
                            format!("`{h}` has rank {rank}, got {} arguments", rest.len()),
                        ));
                    }
                    let args = rest
                        .iter()
                        .map(|a| self.formula(a))
                        .collect::<Result<Vec<_>>>()?;
                    return self.domain.apply(&Connective::operator(h, rank), args);
                }
                if self.is_relation(h) {
                    return Ok(Formula::Prop(self.relational_atom(e.pos, h, rest)?));
                }
                Err(Error::UnknownConnective {
                    pos: head.pos,
                    name: h.into(),
                })
            }
        }
    }

    fn is_relation(&self, h: &str) -> bool {
        self.signature.relations.contains_key(h) || (self.signature.equality && h == "=")
    }

    fn bare(&self, pos: Pos, t: &str) -> Result<Formula> {
        if self.is_reserved(t) {
            return Err(syntax(pos, format!("`{t}` cannot stand alone")));
        }
        if let (Some(a), "0" | "1") = (&self.signature.units, t) {
            let a = self.bare(pos, a)?;
            let na = Formula::not(a.clone());
            return Ok(if t == "0" {
                Formula::and(a, na)
            } else {
                Formula::or(a, na)
            });
        }
        let ok = match &self.signature.props {
            PropUniverse::Letters => true,
            PropUniverse::Listed(names) => names.contains(t),
            PropUniverse::Relational => self.signature.relations.get(t) == Some(&0),
        };
        if !ok {
            return Err(Error::UnknownProposition {
                pos,
                name: t.into(),
            });
        }
        let atom = Atom::letter(t);
        self.domain.iota_atom(&atom)?;
        Ok(Formula::Prop(atom))
    }

    fn relational_atom(&self, pos: Pos, rel: &str, args: &[SExpr]) -> Result<Atom> {
        let arity = if rel == "=" {
            2
        } else {
            self.signature.relations[rel]
        };
        if args.len() != arity {
            return Err(syntax(
                pos,
                format!("`{rel}` has arity {arity}, got {} arguments", args.len()),
            ));
        }
        let vars = args
            .iter()
            .map(|a| self.variable(a))
            .collect::<Result<Vec<_>>>()?;
        let atom = Atom::relational(rel, vars);
        self.domain.iota_atom(&atom)?;
        Ok(atom)
    }

    fn variable(&self, e: &SExpr) -> Result<String> {
        match e.token() {
            Some(v) if self.signature.variables.contains(v) => Ok(v.to_string()),
            Some(v) => Err(syntax(e.pos, format!("unknown variable `{v}`"))),
            None => Err(syntax(e.pos, "expected a variable")),
        }
    }

    fn var_list(&self, e: &SExpr) -> Result<Vec<String>> {
        let items = e
            .list()
            .ok_or_else(|| syntax(e.pos, "expected a parenthesised variable list"))?;
        let vars = items
            .iter()
            .map(|v| self.variable(v))
            .collect::<Result<Vec<_>>>()?;
        let distinct: BTreeSet<&String> = vars.iter().collect();
        if distinct.len() != vars.len() {
            return Err(syntax(e.pos, "repeated variable in binder"));
        }
        Ok(vars)
    }

    /// The connective(s) named by the arguments of an `ex` head, excluding
    /// the body.
    fn quantifier_prefix(&self, pos: Pos, parts: &[SExpr]) -> Result<Vec<Connective>> {
        match self.signature.quantifier {
            Some(Quantifier::Plain) => {
                let [vars] = parts else {
                    return Err(syntax(pos, "expected `ex (vars)`"));
                };
                let vars = self.var_list(vars)?;
                if vars.is_empty() {
                    return Err(syntax(pos, "empty variable list"));
                }
                Ok(vars.into_iter().map(Connective::exists).collect())
            }
            Some(Quantifier::Guarded) => {
                let [vars, guard] = parts else {
                    return Err(syntax(pos, "expected `ex (vars) guard`"));
                };
                let vars = self.var_list(vars)?;
                let guard_atom = match self.formula(guard)? {
                    Formula::Prop(a) => a,
                    _ => return Err(syntax(guard.pos, "guard must be an atom")),
                };
                let free = guard_atom.variables();
                if let Some(v) = vars.iter().find(|v| !free.contains(v.as_str())) {
                    return Err(Error::DomainViolation(format!(
                        "bound variable `{v}` does not occur in guard {guard_atom}"
                    )));
                }
                Ok(vec![Connective::guarded(vars, guard_atom)])
            }
            None => Err(Error::UnknownConnective {
                pos,
                name: QUANTIFIER.into(),
            }),
        }
    }

    fn quantified(&self, pos: Pos, rest: &[SExpr]) -> Result<Formula> {
        let Some((body, prefix)) = rest.split_last() else {
            return Err(syntax(pos, "quantifier without body"));
        };
        let conns = self.quantifier_prefix(pos, prefix)?;
        let mut f = self.formula(body)?;
        for c in conns.iter().rev() {
            f = self.domain.apply(c, vec![f])?;
        }
        Ok(f)
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prop_logic() -> LogicDef {
        LogicDef {
            name: "prop".into(),
            spelling: Spelling::default(),
            signature: Signature::letters(),
            domain: DomainSystem::full_operator(),
        }
    }

    fn modal() -> LogicDef {
        let mut sig = Signature::letters();
        sig.operators.insert("dia".into(), 1);
        LogicDef {
            name: "modal-k".into(),
            spelling: Spelling::default(),
            signature: sig,
            domain: DomainSystem::full_operator(),
        }
    }

    fn guarded() -> LogicDef {
        let mut sig = Signature::letters();
        sig.props = PropUniverse::Relational;
        sig.relations = [("R".to_string(), 2), ("S".to_string(), 1)].into();
        sig.variables = ["u", "v", "w"].map(String::from).into();
        sig.quantifier = Some(Quantifier::Guarded);
        LogicDef {
            name: "gf".into(),
            spelling: Spelling::default(),
            signature: sig,
            domain: DomainSystem::free_variables(["u", "v", "w"]).unwrap(),
        }
    }

    #[test]
    fn parses_boolean_forms() {
        let l = prop_logic();
        assert_eq!(
            l.parse("(or p q)").unwrap(),
            Formula::or(Formula::letter("p"), Formula::letter("q"))
        );
        assert_eq!(
            l.parse("(imp p q)").unwrap().render(),
            "(or (not p) q)"
        );
        assert_eq!(
            l.parse("(and p q r)").unwrap().render(),
            "(and p (and q r))"
        );
    }

    #[test]
    fn parses_modal_application() {
        let f = modal().parse("(dia (not p))").unwrap();
        assert_eq!(
            f,
            Formula::app(
                Connective::operator("dia", 1),
                vec![Formula::not(Formula::letter("p"))]
            )
        );
        assert!(matches!(
            modal().parse("(box p)"),
            Err(Error::UnknownConnective { .. })
        ));
        assert!(matches!(modal().parse("(dia p q)"), Err(Error::Syntax { .. })));
        assert!(modal().parse("dia").is_err());
    }

    #[test]
    fn guarded_domain_is_enforced() {
        let l = guarded();
        let f = l.parse("(ex (u) (R u v) (S v))").unwrap();
        assert_eq!(f.render(), "(ex (u) (R u v) (S v))");
        match l.parse("(ex (u) (R u u) (S v))") {
            Err(Error::DomainViolation(msg)) => assert!(msg.contains("ȷ₂"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            l.parse("(ex (w) (R u v) (S v))"),
            Err(Error::DomainViolation(_))
        ));
        assert!(l.parse("(S x)").is_err());
        assert!(matches!(l.parse("p"), Err(Error::UnknownProposition { .. })));
    }

    #[test]
    fn plain_quantifiers_nest() {
        let mut l = guarded();
        l.signature.quantifier = Some(Quantifier::Plain);
        l.domain = DomainSystem::full_operator();
        let f = l.parse("(ex (u v) (R u v))").unwrap();
        assert_eq!(f.render(), "(ex (u) (ex (v) (R u v)))");
        assert_eq!(f.depth(), 2);
    }

    #[test]
    fn connective_and_atom_spellings() {
        let l = guarded();
        let c = l.parse_connective("ex (u) (R u v)").unwrap();
        assert_eq!(c.to_string(), "ex (u) (R u v)");
        assert_eq!(l.parse_atom("(R v v)").unwrap().to_string(), "(R v v)");
        assert_eq!(
            modal().parse_connective("dia").unwrap(),
            Connective::operator("dia", 1)
        );
    }
}
