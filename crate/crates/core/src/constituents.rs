//! The normal-form sets `N_k(X,Y;A)` and their bar sets.
//!
//! A space is never stored member by member. A constituent of degree `k` is
//! identified by its canonical index `(α-code << |bar|) | β-code`, where bit
//! `1` means the corresponding literal or bar entry is negated and the first
//! literal (resp. bar entry) is the most significant bit. Index `0` is the
//! all-positive constituent.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::json;

use crate::domain::{DomainSystem, Region};
use crate::error::{Error, Result};
use crate::logics::{Countermodel, Oracle};
use crate::syntax::{Atom, Connective, Formula, Spelling};

/// Default cap on the number of members of a materialized space.
pub const DEFAULT_CAP: u64 = 1 << 20;

/// Spaces with more than `2^MAX_INDEX_BITS` members are never materialized,
/// whatever the cap.
const MAX_INDEX_BITS: u64 = 32;

/// Exponents above this are not expanded into exact integers.
const MAX_COUNT_BITS: u64 = 1 << 20;

/// The set of constituents selected from one space, by index.
pub type Sigma = FixedBitSet;

/// `|N_k(X,Y;A)|`, always a power of two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cardinality {
    log2: BigUint,
}

impl Cardinality {
    pub fn log2(&self) -> &BigUint {
        &self.log2
    }

    pub fn value(&self) -> BigUint {
        let bits = self.log2.to_u64().expect("bounded when constructed");
        BigUint::one() << bits
    }

    fn fits(&self, cap: u64) -> bool {
        self.log2 <= BigUint::from(MAX_INDEX_BITS) && self.value() <= BigUint::from(cap)
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Memo table of spaces for fixed `X`, `Y` and domain system; the degree and
/// the region vary along the recursion.
pub struct SpaceTable {
    ds: Arc<DomainSystem>,
    props: Vec<Atom>,
    conns: Vec<Connective>,
    cap: u64,
    spaces: RwLock<HashMap<(usize, Region), Arc<Space>>>,
    counts: RwLock<HashMap<(usize, Region), Cardinality>>,
}

impl SpaceTable {
    pub fn new(
        ds: Arc<DomainSystem>,
        props: impl IntoIterator<Item = Atom>,
        conns: impl IntoIterator<Item = Connective>,
        cap: u64,
    ) -> Self {
        let mut props: Vec<Atom> = props.into_iter().collect();
        props.sort();
        props.dedup();
        let mut conns: Vec<Connective> = conns.into_iter().collect();
        conns.sort();
        conns.dedup();
        SpaceTable {
            ds,
            props,
            conns,
            cap,
            spaces: RwLock::default(),
            counts: RwLock::default(),
        }
    }

    pub fn domain(&self) -> &DomainSystem {
        &self.ds
    }

    pub fn props(&self) -> &[Atom] {
        &self.props
    }

    pub fn conns(&self) -> &[Connective] {
        &self.conns
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    fn compatible(&self, region: Region) -> Result<Vec<(Connective, Region)>> {
        let mut out = Vec::new();
        for c in &self.conns {
            if self.ds.compatible(c, &self.props, region)? {
                out.push((c.clone(), self.ds.j2(c)?));
            }
        }
        Ok(out)
    }

    fn literals(&self, region: Region) -> Result<Vec<Atom>> {
        let lits = self.ds.tilde(&self.props, region)?;
        if lits.is_empty() {
            return Err(Error::NotLargeEnough {
                region: self.ds.show(region),
            });
        }
        Ok(lits)
    }

    /// Exact `|N_k(X,Y;A)|` without materializing anything.
    pub fn count(&self, k: usize, region: Region) -> Result<Cardinality> {
        if let Some(c) = self.counts.read().unwrap().get(&(k, region)) {
            return Ok(c.clone());
        }
        let lits = self.literals(region)?.len() as u64;
        let log2 = if k == 0 {
            BigUint::from(lits)
        } else {
            let compat = self.compatible(region)?;
            let mut bar = BigUint::zero();
            if compat.is_empty() {
                bar = self.count(k - 1, region)?.value();
            } else {
                for (c, j2) in &compat {
                    let child = self.count(k - 1, *j2)?;
                    let exp = child
                        .log2
                        .to_u64()
                        .and_then(|b| b.checked_mul(c.rank() as u64))
                        .filter(|&b| b <= MAX_COUNT_BITS)
                        .ok_or(Error::CountOverflow { degree: k })?;
                    bar += BigUint::one() << exp;
                }
            }
            bar + lits
        };
        if log2 > BigUint::from(MAX_COUNT_BITS) {
            return Err(Error::CountOverflow { degree: k });
        }
        let card = Cardinality { log2 };
        self.counts
            .write()
            .unwrap()
            .insert((k, region), card.clone());
        Ok(card)
    }

    /// The memoized space `N_k(X,Y;A)`.
    pub fn space(&self, k: usize, region: Region) -> Result<Arc<Space>> {
        if let Some(s) = self.spaces.read().unwrap().get(&(k, region)) {
            return Ok(s.clone());
        }
        let card = self.count(k, region)?;
        if !card.fits(self.cap) {
            let count = if card.log2 <= BigUint::from(4096u32) {
                card.value().to_string()
            } else {
                format!("2^{}", card.log2)
            };
            return Err(Error::CapExceeded {
                degree: k,
                count,
                cap: self.cap,
            });
        }
        let literals = self.literals(region)?;
        let mut footprint = Region::EMPTY;
        for l in &literals {
            footprint = footprint.union(self.ds.iota_atom(l)?);
        }
        let bar = if k == 0 {
            Bar::Empty
        } else {
            let compat = self.compatible(region)?;
            if compat.is_empty() {
                let child = self.space(k - 1, region)?;
                footprint = footprint.union(child.footprint);
                Bar::Degenerate(child)
            } else {
                let mut groups = Vec::new();
                let mut entries = Vec::new();
                for (g, (conn, j2)) in compat.into_iter().enumerate() {
                    let child = self.space(k - 1, j2)?;
                    if !child.footprint.is_subset(j2) {
                        return Err(Error::DomainViolation(format!(
                            "constituents of N_{}({}) escape ȷ₂({conn})",
                            k - 1,
                            self.ds.show(j2)
                        )));
                    }
                    footprint = footprint.union(j2.minus(self.ds.j1(&conn)?));
                    for args in tuples(child.size(), conn.rank()) {
                        entries.push(BarEntry { group: g, args });
                    }
                    groups.push(BarGroup { conn, child });
                }
                Bar::Pooled { groups, entries }
            }
        };
        let space = Arc::new(Space {
            degree: k,
            region,
            literals,
            bar,
            footprint,
            rendered: OnceLock::new(),
        });
        let mut memo = self.spaces.write().unwrap();
        Ok(memo.entry((k, region)).or_insert(space).clone())
    }

    pub fn key_json(&self, k: usize, region: Region) -> serde_json::Value {
        json!({
            "k": k,
            "X": self.props.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "Y": self.conns.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "A": self.ds.names(region),
        })
    }
}

/// All `rank`-tuples over `0..n` in lexicographic order.
fn tuples(n: u64, rank: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

pub struct BarGroup {
    pub conn: Connective,
    pub child: Arc<Space>,
}

/// `conn(φ₀,…,φ_{h−1})` with the `φⱼ` given by index into the group's child
/// space.
pub struct BarEntry {
    pub group: usize,
    pub args: Vec<u64>,
}

pub enum Bar {
    /// Degree zero.
    Empty,
    /// One group per compatible connective, in connective order; entries are
    /// ordered by (group, lexicographic argument tuple).
    Pooled {
        groups: Vec<BarGroup>,
        entries: Vec<BarEntry>,
    },
    /// No compatible connective: the bar set is `N_{k−1}(X,Y;A)` itself.
    Degenerate(Arc<Space>),
}

pub struct Space {
    degree: usize,
    region: Region,
    literals: Vec<Atom>,
    bar: Bar,
    footprint: Region,
    rendered: OnceLock<Rendered>,
}

struct Rendered {
    pos: Vec<Arc<Formula>>,
    neg: Vec<Arc<Formula>>,
}

/// A constituent in structured form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constituent {
    pub index: u64,
    pub degree: usize,
    pub color: Vec<Atom>,
    pub sub: Sub,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sub {
    /// Degree zero.
    None,
    /// `sub_□` for every compatible `□`: the positively signed argument
    /// tuples.
    Pooled(BTreeMap<Connective, Vec<Vec<u64>>>),
    /// Positively signed members of `N_{k−1}(X,Y;A)`.
    Degenerate(Vec<u64>),
}

impl Constituent {
    pub fn to_json(&self) -> serde_json::Value {
        let color: Vec<String> = self.color.iter().map(|a| a.to_string()).collect();
        match &self.sub {
            Sub::None => json!({"index": self.index, "color": color}),
            Sub::Pooled(m) => {
                let sub: BTreeMap<String, &Vec<Vec<u64>>> =
                    m.iter().map(|(c, t)| (c.to_string(), t)).collect();
                json!({"index": self.index, "color": color, "sub": sub})
            }
            Sub::Degenerate(v) => json!({"index": self.index, "color": color, "prev": v}),
        }
    }
}

impl Space {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// `X̃` for this space's region, sorted.
    pub fn literals(&self) -> &[Atom] {
        &self.literals
    }

    pub fn bar(&self) -> &Bar {
        &self.bar
    }

    /// `ι` of every member.
    pub fn footprint(&self) -> Region {
        self.footprint
    }

    pub fn bar_len(&self) -> usize {
        match &self.bar {
            Bar::Empty => 0,
            Bar::Pooled { entries, .. } => entries.len(),
            Bar::Degenerate(child) => child.size() as usize,
        }
    }

    pub fn index_bits(&self) -> usize {
        self.literals.len() + self.bar_len()
    }

    pub fn size(&self) -> u64 {
        1u64 << self.index_bits()
    }

    pub fn empty_sigma(&self) -> Sigma {
        FixedBitSet::with_capacity(self.size() as usize)
    }

    pub fn alpha(&self, index: u64) -> u64 {
        index >> self.bar_len()
    }

    pub fn beta(&self, index: u64) -> u64 {
        index & ((1u64 << self.bar_len()) - 1)
    }

    /// Whether literal `i` of `X̃` is positive in `index`.
    pub fn literal_positive(&self, index: u64, i: usize) -> bool {
        let n = self.literals.len();
        self.alpha(index) >> (n - 1 - i) & 1 == 0
    }

    /// Whether bar entry `j` is positive in `index`.
    pub fn bar_positive(&self, index: u64, j: usize) -> bool {
        let m = self.bar_len();
        self.beta(index) >> (m - 1 - j) & 1 == 0
    }

    pub fn color(&self, index: u64) -> Vec<Atom> {
        (0..self.literals.len())
            .filter(|&i| self.literal_positive(index, i))
            .map(|i| self.literals[i].clone())
            .collect()
    }

    pub fn constituent(&self, index: u64) -> Constituent {
        assert!(index < self.size(), "index out of range");
        let sub = match &self.bar {
            Bar::Empty => Sub::None,
            Bar::Pooled { groups, entries } => {
                let mut m: BTreeMap<Connective, Vec<Vec<u64>>> = groups
                    .iter()
                    .map(|g| (g.conn.clone(), Vec::new()))
                    .collect();
                for (j, e) in entries.iter().enumerate() {
                    if self.bar_positive(index, j) {
                        m.get_mut(&groups[e.group].conn)
                            .expect("group present")
                            .push(e.args.clone());
                    }
                }
                Sub::Pooled(m)
            }
            Bar::Degenerate(_) => Sub::Degenerate(
                (0..self.bar_len())
                    .filter(|&j| self.bar_positive(index, j))
                    .map(|j| j as u64)
                    .collect(),
            ),
        };
        Constituent {
            index,
            degree: self.degree,
            color: self.color(index),
            sub,
        }
    }

    pub fn members(&self) -> impl Iterator<Item = Constituent> + '_ {
        (0..self.size()).map(|i| self.constituent(i))
    }

    /// Index of the member whose structure is `c`, if any.
    pub fn index_of(&self, color: &[Atom], sub: &Sub) -> Option<u64> {
        let mut alpha = 0u64;
        for l in &self.literals {
            alpha = alpha << 1 | u64::from(!color.contains(l));
        }
        let mut beta = 0u64;
        match (&self.bar, sub) {
            (Bar::Empty, Sub::None) => {}
            (Bar::Pooled { groups, entries }, Sub::Pooled(m)) => {
                for e in entries {
                    let conn = &groups[e.group].conn;
                    let pos = m.get(conn).is_some_and(|ts| ts.contains(&e.args));
                    beta = beta << 1 | u64::from(!pos);
                }
            }
            (Bar::Degenerate(child), Sub::Degenerate(v)) => {
                for j in 0..child.size() {
                    beta = beta << 1 | u64::from(!v.contains(&j));
                }
            }
            _ => return None,
        }
        Some(alpha << self.bar_len() | beta)
    }

    fn rendered(&self) -> &Rendered {
        self.rendered.get_or_init(|| {
            let mut pos: Vec<Arc<Formula>> = self
                .literals
                .iter()
                .map(|a| Arc::new(Formula::Prop(a.clone())))
                .collect();
            match &self.bar {
                Bar::Empty => {}
                Bar::Pooled { groups, entries } => {
                    for e in entries {
                        let g = &groups[e.group];
                        let args: Vec<Formula> =
                            e.args.iter().map(|&i| g.child.formula(i)).collect();
                        pos.push(Arc::new(Formula::App(g.conn.clone(), args.into())));
                    }
                }
                Bar::Degenerate(child) => {
                    for i in 0..child.size() {
                        pos.push(Arc::new(child.formula(i)));
                    }
                }
            }
            let neg = pos.iter().map(|f| Arc::new(Formula::Not(f.clone()))).collect();
            Rendered { pos, neg }
        })
    }

    /// The constituent as a formula: signed `X̃` literals followed by the
    /// signed bar entries, as a right-nested conjunction.
    pub fn formula(&self, index: u64) -> Formula {
        let r = self.rendered();
        let n = self.literals.len();
        let parts = (0..r.pos.len()).map(|i| {
            let positive = if i < n {
                self.literal_positive(index, i)
            } else {
                self.bar_positive(index, i - n)
            };
            if positive {
                r.pos[i].clone()
            } else {
                r.neg[i].clone()
            }
        });
        fold_shared(parts, Formula::And)
    }

    /// `⋁Σ` in index order; the empty disjunction is `q ∧ ¬q` for the least
    /// `q` in `X̃`.
    pub fn disjunction(&self, sigma: &Sigma) -> Formula {
        let members: Vec<Arc<Formula>> = sigma
            .ones()
            .map(|i| Arc::new(self.formula(i as u64)))
            .collect();
        if members.is_empty() {
            let r = self.rendered();
            return Formula::And(r.pos[0].clone(), r.neg[0].clone());
        }
        fold_shared(members, Formula::Or)
    }

    pub fn render(&self, index: u64, spelling: &Spelling) -> String {
        self.formula(index).render_with(spelling)
    }
}

fn fold_shared(
    parts: impl IntoIterator<Item = Arc<Formula>>,
    node: fn(Arc<Formula>, Arc<Formula>) -> Formula,
) -> Formula {
    let parts: Vec<Arc<Formula>> = parts.into_iter().collect();
    let mut iter = parts.into_iter().rev();
    let last = iter.next().expect("constituents have at least one literal");
    let acc = iter.fold(last, |acc, f| Arc::new(node(f, acc)));
    Arc::unwrap_or_clone(acc)
}

/// Outcome of checking that the members of a space are exhaustive and
/// pairwise exclusive under an oracle.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PartitionReport {
    pub size: u64,
    pub oracle: String,
    pub exact: bool,
    pub bound: Option<usize>,
    pub passed: bool,
    /// Indices of members true at the countermodel (none or several).
    pub satisfied: Vec<u64>,
    pub countermodel: Option<serde_json::Value>,
}

/// Every point of every model within the oracle's bound satisfies exactly
/// one member: `⋁N_k` holds and distinct members are jointly unsatisfiable.
pub fn partition_check(space: &Space, oracle: &dyn Oracle) -> Result<PartitionReport> {
    let formulas: Vec<Formula> = (0..space.size()).map(|i| space.formula(i)).collect();
    let found: Option<Countermodel> =
        oracle.search(&formulas, &|vals: &[bool]| vals.iter().filter(|&&v| v).count() == 1)?;
    Ok(PartitionReport {
        size: space.size(),
        oracle: oracle.name().to_string(),
        exact: oracle.is_exact(),
        bound: oracle.bound(),
        passed: found.is_none(),
        satisfied: found.as_ref().map_or_else(Vec::new, |c| {
            c.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v)
                .map(|(i, _)| i as u64)
                .collect()
        }),
        countermodel: found.map(|c| c.model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn modal_table(props: &[&str], cap: u64) -> SpaceTable {
        SpaceTable::new(
            Arc::new(DomainSystem::full_operator()),
            props.iter().map(|p| Atom::letter(*p)),
            [Connective::operator("dia", 1)],
            cap,
        )
    }

    fn prop_table(props: &[&str]) -> SpaceTable {
        SpaceTable::new(
            Arc::new(DomainSystem::full_operator()),
            props.iter().map(|p| Atom::letter(*p)),
            [],
            DEFAULT_CAP,
        )
    }

    #[test]
    fn degree_zero_minterms_in_canonical_order() {
        let t = prop_table(&["q", "p"]);
        let s = t.space(0, t.domain().full()).unwrap();
        let rendered: Vec<String> = (0..s.size()).map(|i| s.formula(i).render()).collect();
        assert_eq!(
            rendered,
            [
                "(and p q)",
                "(and p (not q))",
                "(and (not p) q)",
                "(and (not p) (not q))"
            ]
        );
    }

    #[test]
    fn modal_sizes_follow_the_recurrence() {
        let t = modal_table(&["p", "q"], DEFAULT_CAP);
        let v = t.domain().full();
        assert_eq!(t.space(1, v).unwrap().size(), 64);
        assert_eq!(t.count(1, v).unwrap().value(), BigUint::from(64u32));
        assert_eq!(
            t.count(2, v).unwrap().value(),
            BigUint::from(4u32) << 64usize
        );
        match t.space(2, v) {
            Err(Error::CapExceeded { count, .. }) => {
                assert_eq!(count, (BigUint::from(4u32) << 64usize).to_string())
            }
            Err(e) => panic!("{e}"),
            Ok(_) => panic!("should exceed the cap"),
        }

        let t = modal_table(&["p"], DEFAULT_CAP);
        assert_eq!(t.space(1, v).unwrap().size(), 8);
        assert_eq!(t.space(2, v).unwrap().size(), 512);
        assert!(matches!(t.count(4, v), Err(Error::CountOverflow { .. })));
    }

    #[test]
    fn degree_one_modal_rendering() {
        let t = modal_table(&["p"], DEFAULT_CAP);
        let s = t.space(1, t.domain().full()).unwrap();
        // color {p}, first bar entry ◇p positive, second ◇¬p negative.
        let idx = 0b0_01;
        assert_eq!(
            s.formula(idx).render(),
            "(and p (and (dia p) (not (dia (not p)))))"
        );
        let c = s.constituent(idx);
        assert_eq!(c.color, vec![Atom::letter("p")]);
        let Sub::Pooled(m) = &c.sub else { panic!() };
        assert_eq!(m[&Connective::operator("dia", 1)], vec![vec![0]]);
        assert_eq!(s.index_of(&c.color, &c.sub), Some(idx));
    }

    #[test]
    fn degenerate_branch_without_connectives() {
        let t = prop_table(&["p"]);
        let v = t.domain().full();
        let s = t.space(1, v).unwrap();
        assert!(matches!(s.bar(), Bar::Degenerate(_)));
        assert_eq!(s.size(), 2 * 4);
        assert_eq!(t.space(2, v).unwrap().size(), 2 * (1 << 8));
        let c = s.constituent(0);
        assert_eq!(c.sub, Sub::Degenerate(vec![0, 1]));
        assert_eq!(
            s.formula(0).render(),
            "(and p (and p (not p)))"
        );
    }

    #[test]
    fn members_are_distinct() {
        let t = modal_table(&["p"], DEFAULT_CAP);
        let s = t.space(2, t.domain().full()).unwrap();
        let all: BTreeSet<Formula> = (0..s.size()).map(|i| s.formula(i)).collect();
        assert_eq!(all.len() as u64, s.size());
        let structs: Vec<Constituent> = s.members().collect();
        for c in &structs[..20] {
            assert_eq!(s.index_of(&c.color, &c.sub), Some(c.index));
        }
    }

    #[test]
    fn not_large_enough_is_reported() {
        let ds = Arc::new(DomainSystem::free_variables(["u", "v"]).unwrap());
        let t = SpaceTable::new(ds, [Atom::relational("R", ["u", "v"])], [], DEFAULT_CAP);
        let v = t.domain().region(["v"]).unwrap();
        assert!(matches!(t.space(0, v), Err(Error::NotLargeEnough { .. })));
        assert!(matches!(t.count(0, v), Err(Error::NotLargeEnough { .. })));
    }

    #[test]
    fn empty_disjunction_is_a_contradiction() {
        let t = prop_table(&["q", "p"]);
        let s = t.space(0, t.domain().full()).unwrap();
        assert_eq!(s.disjunction(&s.empty_sigma()).render(), "(and p (not p))");
    }

    #[test]
    fn tuples_are_lexicographic() {
        assert_eq!(
            tuples(2, 2),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(tuples(3, 1).len(), 3);
    }
}
