//! Rewriting a formula into a set of constituents whose disjunction is
//! equivalent to it. The computation is purely structural and never consults
//! an oracle.

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::json;

use crate::constituents::{Bar, Sigma, Space, SpaceTable};
use crate::domain::{DomainSystem, Generator, Region};
use crate::error::{Error, Result};
use crate::logics::{equivalence, Oracle, Verdict};
use crate::syntax::{Formula, Spelling};

#[derive(Clone)]
pub struct NormalizationResult {
    pub generator: Generator,
    pub space: Arc<Space>,
    pub sigma: Sigma,
}

impl NormalizationResult {
    /// `⋁Σ` in index order, or the designated contradiction when `Σ = ∅`.
    pub fn disjunction(&self) -> Formula {
        self.space.disjunction(&self.sigma)
    }

    pub fn indices(&self) -> Vec<u64> {
        self.sigma.ones().map(|i| i as u64).collect()
    }

    pub fn to_json(&self, ds: &DomainSystem, spelling: Option<&Spelling>) -> serde_json::Value {
        let mut out = json!({
            "generator": self.generator.to_json(ds),
            "sigma": self.indices(),
            "size": self.space.size(),
        });
        if let Some(sp) = spelling {
            out["formula"] = json!(self.disjunction().render_with(sp));
        }
        out
    }
}

/// Normalizes formulas against one generator, sharing the space table
/// between calls.
pub struct Normalizer {
    generator: Generator,
    ds: Arc<DomainSystem>,
    table: SpaceTable,
}

type Memo = HashMap<(*const Formula, usize, Region), Sigma>;

impl Normalizer {
    pub fn new(generator: Generator, ds: Arc<DomainSystem>, cap: u64) -> Self {
        let table = SpaceTable::new(
            ds.clone(),
            generator.props.iter().cloned(),
            generator.conns.iter().cloned(),
            cap,
        );
        Normalizer {
            generator,
            ds,
            table,
        }
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn table(&self) -> &SpaceTable {
        &self.table
    }

    /// The space `N_k(X,Y;E)` that results index into.
    pub fn space(&self) -> Result<Arc<Space>> {
        self.table.space(self.generator.k, self.generator.region)
    }

    pub fn normalize(&self, f: &Formula) -> Result<NormalizationResult> {
        let report = self.ds.suitable(&self.generator, f);
        if !report.is_suitable() {
            return Err(Error::Unsuitable(report));
        }
        self.ds.validate(f)?;
        let mut memo = Memo::new();
        let sigma = self.sigma(f, self.generator.k, self.generator.region, &mut memo)?;
        Ok(NormalizationResult {
            generator: self.generator.clone(),
            space: self.space()?,
            sigma,
        })
    }

    fn sigma(&self, f: &Formula, k: usize, region: Region, memo: &mut Memo) -> Result<Sigma> {
        let key = (f as *const Formula, k, region);
        if let Some(s) = memo.get(&key) {
            return Ok(s.clone());
        }
        let space = self.table.space(k, region)?;
        let size = space.size() as usize;
        let s = match f {
            Formula::Prop(p) => {
                let i = space.literals().iter().position(|l| l == p).ok_or_else(|| {
                    Error::DomainViolation(format!(
                        "{p} is not a literal of N_{k}({})",
                        self.ds.show(region)
                    ))
                })?;
                let shift = space.bar_len() + space.literals().len() - 1 - i;
                let mut s = space.empty_sigma();
                for idx in 0..size {
                    if idx >> shift & 1 == 0 {
                        s.insert(idx);
                    }
                }
                s
            }
            Formula::Not(a) => {
                let mut s = self.sigma(a, k, region, memo)?;
                s.toggle_range(..);
                s
            }
            Formula::And(a, b) => {
                let mut s = self.sigma(a, k, region, memo)?;
                s.intersect_with(&self.sigma(b, k, region, memo)?);
                s
            }
            Formula::Or(a, b) => {
                let mut s = self.sigma(a, k, region, memo)?;
                s.union_with(&self.sigma(b, k, region, memo)?);
                s
            }
            Formula::App(conn, args) => {
                let Bar::Pooled { groups, entries } = space.bar() else {
                    return Err(Error::DomainViolation(format!(
                        "{conn} is not compatible at N_{k}({})",
                        self.ds.show(region)
                    )));
                };
                let g = groups
                    .iter()
                    .position(|g| &g.conn == conn)
                    .ok_or_else(|| {
                        Error::DomainViolation(format!(
                            "{conn} is not compatible at N_{k}({})",
                            self.ds.show(region)
                        ))
                    })?;
                let child = groups[g].child.region();
                let parts = args
                    .iter()
                    .map(|a| self.sigma(a, k - 1, child, memo))
                    .collect::<Result<Vec<_>>>()?;
                let m = space.bar_len();
                let mut mask = 0u64;
                for (j, e) in entries.iter().enumerate() {
                    let hit = e.group == g
                        && e.args.iter().zip(&parts).all(|(&i, s)| s.contains(i as usize));
                    if hit {
                        mask |= 1 << (m - 1 - j);
                    }
                }
                let beta = (1u64 << m) - 1;
                let mut s = space.empty_sigma();
                for idx in 0..size {
                    if !(idx as u64) & beta & mask != 0 {
                        s.insert(idx);
                    }
                }
                s
            }
        };
        memo.insert(key, s.clone());
        Ok(s)
    }
}

/// One-shot normalization of `f` at `gen`.
pub fn normalize(
    f: &Formula,
    gen: &Generator,
    ds: Arc<DomainSystem>,
    cap: u64,
) -> Result<NormalizationResult> {
    Normalizer::new(gen.clone(), ds, cap).normalize(f)
}

/// Checks `φ ↔ ⋁Σ` under the oracle.
pub fn verify(f: &Formula, r: &NormalizationResult, oracle: &dyn Oracle) -> Result<Verdict> {
    let found = equivalence(oracle, f, &r.disjunction())?;
    Ok(Verdict::new(oracle, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constituents::DEFAULT_CAP;
    use crate::domain::Violation;
    use crate::logics::{Instance, Kind, PropOracle};

    fn run(kind: Kind, text: &str, k: Option<usize>) -> (Instance, NormalizationResult) {
        let inst = Instance::default_for(kind);
        let f = inst.parse(text).unwrap();
        let mut gen = inst.domain().minimal_generator(&f).unwrap();
        if let Some(k) = k {
            gen.k = k;
        }
        let r = normalize(&f, &gen, Arc::new(inst.domain().clone()), DEFAULT_CAP).unwrap();
        (inst, r)
    }

    #[test]
    fn disjunction_of_two_letters() {
        let (_, r) = run(Kind::Prop, "(or p q)", None);
        assert_eq!(r.indices(), vec![0, 1, 2]);
        assert_eq!(r.space.size(), 4);
    }

    #[test]
    fn diamond_selects_half_of_degree_one() {
        let (_, r) = run(Kind::ModalK, "(dia p)", Some(1));
        assert_eq!(r.space.size(), 8);
        // β's first bar entry is ◇p; it must be positive.
        assert_eq!(r.indices(), vec![0, 1, 4, 5]);
    }

    #[test]
    fn diamond_of_a_tautology() {
        let (_, r) = run(Kind::ModalK, "(dia (or p (not p)))", None);
        assert_eq!(r.sigma.count_ones(..), 6);
        assert!(!r.sigma.contains(0b011) && !r.sigma.contains(0b111));
    }

    #[test]
    fn contradiction_renders_as_designated() {
        let (inst, r) = run(Kind::Prop, "(and p (not p))", None);
        assert_eq!(r.sigma.count_ones(..), 0);
        assert_eq!(inst.render(&r.disjunction()), "(and p (not p))");
        let v = verify(&inst.parse("(and p (not p))").unwrap(), &r, &PropOracle).unwrap();
        assert!(v.passed);
    }

    #[test]
    fn unsuitable_generators_are_refused() {
        let inst = Instance::default_for(Kind::ModalK);
        let f = inst.parse("(dia p)").unwrap();
        let ds = Arc::new(inst.domain().clone());
        let mut gen = inst.domain().minimal_generator(&f).unwrap();
        gen.k = 0;
        match normalize(&f, &gen, ds.clone(), DEFAULT_CAP) {
            Err(Error::Unsuitable(rep)) => assert!(matches!(
                rep.violations[0],
                Violation::DepthExceedsDegree { .. }
            )),
            _ => panic!("expected refusal"),
        }
        gen.k = 1;
        gen.conns.clear();
        assert!(matches!(
            normalize(&f, &gen, ds, DEFAULT_CAP),
            Err(Error::Unsuitable(_))
        ));
    }

    #[test]
    fn guarded_formula_round_trips() {
        let (inst, r) = run(Kind::Gf, "(ex (u) (R u v) (R u v))", None);
        let f = inst.parse("(ex (u) (R u v) (R u v))").unwrap();
        let v = verify(&f, &r, inst.oracle(Some(2)).as_ref()).unwrap();
        assert!(v.passed, "{:?}", v.countermodel);
    }

    #[test]
    fn rendered_constituent_normalizes_to_itself() {
        let (_, r) = run(Kind::ModalK, "(dia p)", Some(1));
        let n = Normalizer::new(
            r.generator.clone(),
            Arc::new(DomainSystem::full_operator()),
            DEFAULT_CAP,
        );
        for i in 0..r.space.size() {
            let c = n.normalize(&r.space.formula(i)).unwrap();
            assert_eq!(c.indices(), vec![i]);
        }
    }
}
