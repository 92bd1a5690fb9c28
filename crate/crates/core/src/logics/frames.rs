use std::collections::BTreeMap;

use serde_json::json;

use super::circuit::{Circuit, Model};
use super::{bit_list, fields, full_mask, Countermodel, Oracle, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::syntax::{Binder, Formula};

/// Exhaustive search over relational frames with at most `max_points`
/// points. An operator of rank `r` is read as the image operator of an
/// `(r+1)`-ary relation, `f(A₀,…) = {w : ∃(w,v₀,…) ∈ R, vᵢ ∈ Aᵢ}`, and every
/// atom (variable or constant) ranges over all subsets. For unary operators
/// this is Kripke semantics with `◇` read existentially; in general it
/// evaluates terms in the complex algebras of the frames.
#[derive(Clone, Debug)]
pub struct FrameOracle {
    name: &'static str,
    max_points: usize,
    budget: u64,
    unary_only: bool,
}

impl FrameOracle {
    pub fn kripke(max_worlds: usize) -> Self {
        FrameOracle {
            name: "kripke",
            max_points: max_worlds,
            budget: DEFAULT_BUDGET,
            unary_only: true,
        }
    }

    pub fn complex_algebra(max_points: usize) -> Self {
        FrameOracle {
            name: "complex-algebra",
            max_points,
            budget: DEFAULT_BUDGET,
            unary_only: false,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

struct Frame<'a> {
    n: usize,
    ranks: &'a [usize],
    rels: Vec<u64>,
    val: Vec<u64>,
}

impl Model for Frame<'_> {
    fn points(&self) -> u64 {
        full_mask(self.n)
    }

    fn atom(&self, i: usize) -> u64 {
        self.val[i]
    }

    fn apply(&self, conn: usize, _: Option<u64>, args: &[u64]) -> u64 {
        let n = self.n;
        let rel = self.rels[conn];
        let mut out = 0;
        if self.ranks[conn] == 1 {
            let m = full_mask(n);
            for w in 0..n {
                if (rel >> (w * n)) & m & args[0] != 0 {
                    out |= 1 << w;
                }
            }
            return out;
        }
        let nr = n.pow(self.ranks[conn] as u32);
        for w in 0..n {
            let hit = (0..nr).any(|t| {
                if rel >> (w * nr + t) & 1 == 0 {
                    return false;
                }
                let mut rest = t;
                args.iter().rev().all(|&a| {
                    let v = rest % n;
                    rest /= n;
                    a >> v & 1 == 1
                })
            });
            if hit {
                out |= 1 << w;
            }
        }
        out
    }
}

impl Frame<'_> {
    /// Tuples of relation `conn`, each as `[w, v₀, …]`.
    fn tuples(&self, conn: usize) -> Vec<Vec<usize>> {
        let r = self.ranks[conn] as u32;
        let width = self.n.pow(r + 1);
        (0..width)
            .filter(|&b| self.rels[conn] >> b & 1 == 1)
            .map(|b| {
                let mut digits = vec![0; r as usize + 1];
                let mut rest = b;
                for d in digits.iter_mut().rev() {
                    *d = rest % self.n;
                    rest /= self.n;
                }
                digits
            })
            .collect()
    }
}

impl Oracle for FrameOracle {
    fn name(&self) -> &str {
        self.name
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn bound(&self) -> Option<usize> {
        Some(self.max_points)
    }

    fn search(
        &self,
        formulas: &[Formula],
        accept: &dyn Fn(&[bool]) -> bool,
    ) -> Result<Option<Countermodel>> {
        let c = Circuit::compile(formulas);
        for conn in &c.conns {
            if *conn.binder() != Binder::None || (self.unary_only && conn.rank() != 1) {
                return Err(Error::Unsupported(format!("connective {conn} in {}", self.name)));
            }
        }
        let ranks: Vec<usize> = c.conns.iter().map(|c| c.rank()).collect();
        let widths = |n: usize| -> Vec<u32> {
            ranks
                .iter()
                .map(|&r| n.pow(r as u32 + 1) as u32)
                .chain(c.atoms.iter().map(|_| n as u32))
                .collect()
        };
        let mut total = 0u64;
        for n in 1..=self.max_points {
            let bits: u32 = widths(n).iter().sum();
            total = total.saturating_add(1u64.checked_shl(bits).unwrap_or(u64::MAX));
            if bits > 62 || total > self.budget {
                return Err(Error::Budget(format!(
                    "frames up to size {n} span 2^{bits} models, over the budget of {}",
                    self.budget
                )));
            }
        }
        let k = ranks.len();
        let models = (1..=self.max_points).flat_map(|n| {
            let w = widths(n);
            let bits: u32 = w.iter().sum();
            let ranks = &ranks;
            (0..1u64 << bits).map(move |code| {
                let f = fields(code, &w);
                Frame {
                    n,
                    ranks,
                    rels: f[..k].to_vec(),
                    val: f[k..].to_vec(),
                }
            })
        });
        Ok(c.scan(models, accept).map(|(m, p, values)| {
            let rels: BTreeMap<String, Vec<Vec<usize>>> = c
                .conns
                .iter()
                .enumerate()
                .map(|(i, conn)| (conn.to_string(), m.tuples(i)))
                .collect();
            let val: BTreeMap<String, Vec<u32>> = c
                .atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.to_string(), bit_list(m.val[i])))
                .collect();
            Countermodel {
                model: json!({
                    "points": m.n,
                    "relations": rels,
                    "valuation": val,
                    "point": p,
                }),
                values,
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logics::{equivalence, validity};
    use crate::syntax::Connective;

    fn dia(f: Formula) -> Formula {
        Formula::app(Connective::operator("dia", 1), vec![f])
    }

    fn p(n: &str) -> Formula {
        Formula::letter(n)
    }

    #[test]
    fn diamond_distributes_over_disjunction() {
        let lhs = dia(Formula::or(p("p"), p("q")));
        let rhs = Formula::or(dia(p("p")), dia(p("q")));
        assert!(equivalence(&FrameOracle::kripke(3), &lhs, &rhs)
            .unwrap()
            .is_none());
    }

    #[test]
    fn diamond_does_not_distribute_over_conjunction() {
        let lhs = Formula::and(dia(p("p")), dia(Formula::not(p("p"))));
        let rhs = dia(Formula::and(p("p"), Formula::not(p("p"))));
        let cm = equivalence(&FrameOracle::kripke(2), &lhs, &rhs)
            .unwrap()
            .unwrap();
        assert_eq!(cm.model["points"], 2);
        assert_eq!(cm.values, vec![true, false]);
    }

    #[test]
    fn binary_operators_are_normal_and_additive() {
        let f = Connective::operator("f", 2);
        let app = |a: Formula, b: Formula| Formula::app(f.clone(), vec![a, b]);
        let zero = Formula::and(p("x"), Formula::not(p("x")));
        let o = FrameOracle::complex_algebra(2);
        assert!(validity(&o, &Formula::not(app(zero, p("y")))).unwrap().is_none());
        let lhs = app(p("z"), Formula::or(p("x"), p("y")));
        let rhs = Formula::or(app(p("z"), p("x")), app(p("z"), p("y")));
        assert!(equivalence(&o, &lhs, &rhs).unwrap().is_none());
        let g = Formula::and(app(p("x"), p("y")), Formula::not(app(p("y"), p("x"))));
        assert!(validity(&o, &Formula::not(g)).unwrap().is_some());
    }

    #[test]
    fn budget_is_enforced() {
        let f = Formula::app(Connective::operator("f", 3), vec![p("x"), p("x"), p("x")]);
        assert!(matches!(
            validity(&FrameOracle::complex_algebra(3), &f),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            validity(&FrameOracle::kripke(2), &f),
            Err(Error::Unsupported(_))
        ));
    }
}
