use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::circuit::{Circuit, Model};
use super::{fields, full_mask, Countermodel, Oracle, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::syntax::{Binder, Formula};

/// Exhaustive search over first-order structures with universes of size
/// `1..=max_size` and every assignment to the variables that occur. `=` is
/// interpreted as identity; every other symbol ranges over all relations of
/// its arity.
#[derive(Clone, Debug)]
pub struct FoOracle {
    max_size: usize,
    budget: u64,
}

impl FoOracle {
    pub fn new(max_size: usize) -> Self {
        FoOracle {
            max_size,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

/// Everything about a universe size that does not depend on the relations.
/// Point `a` is the assignment whose digits in base `n` are the values of
/// the variables, first variable most significant.
struct Geometry {
    n: usize,
    full: u64,
    /// Per atom, per point, the tuple index of its arguments; `None` for
    /// equality atoms, whose masks are fixed.
    tuple: Vec<Option<Vec<usize>>>,
    fixed: Vec<u64>,
    /// Per connective, per point, the points reachable by changing the bound
    /// variables.
    variants: Vec<Vec<u64>>,
    widths: Vec<u32>,
}

struct Structure<'a> {
    g: &'a Geometry,
    rels: Vec<u64>,
    atoms: Vec<u64>,
}

impl Model for Structure<'_> {
    fn points(&self) -> u64 {
        self.g.full
    }

    fn atom(&self, i: usize) -> u64 {
        self.atoms[i]
    }

    fn apply(&self, conn: usize, guard: Option<u64>, args: &[u64]) -> u64 {
        let body = args[0] & guard.unwrap_or(self.g.full);
        let mut out = 0;
        for (a, &v) in self.g.variants[conn].iter().enumerate() {
            if v & body != 0 {
                out |= 1 << a;
            }
        }
        out
    }
}

struct Layout {
    vars: Vec<String>,
    /// Relation symbols with arities, excluding equality.
    rels: Vec<(String, usize)>,
    /// Per atom, its relation index (or `None` for equality) and argument
    /// variable indices.
    atoms: Vec<(Option<usize>, Vec<usize>)>,
    /// Per connective, the bound variable indices.
    bound: Vec<Vec<usize>>,
}

impl Layout {
    fn new(c: &Circuit) -> Result<Layout> {
        let mut vars = BTreeSet::new();
        let mut arity: BTreeMap<String, usize> = BTreeMap::new();
        for a in &c.atoms {
            vars.extend(a.args().iter().cloned());
            if a.symbol() == "=" && a.args().len() == 2 {
                continue;
            }
            match arity.insert(a.symbol().to_string(), a.args().len()) {
                Some(k) if k != a.args().len() => {
                    return Err(Error::Unsupported(format!(
                        "`{}` used with arities {k} and {}",
                        a.symbol(),
                        a.args().len()
                    )))
                }
                _ => {}
            }
        }
        let mut bound_names = Vec::new();
        for conn in &c.conns {
            let b: Vec<String> = match conn.binder() {
                Binder::Exists(v) => vec![v.clone()],
                Binder::Guarded { bound, .. } => bound.clone(),
                Binder::None => {
                    return Err(Error::Unsupported(format!(
                        "connective {conn} in first-order structures"
                    )))
                }
            };
            vars.extend(b.iter().cloned());
            bound_names.push(b);
        }
        let vars: Vec<String> = vars.into_iter().collect();
        let index = |v: &String| vars.iter().position(|x| x == v).expect("collected");
        let rels: Vec<(String, usize)> = arity.into_iter().collect();
        let atoms = c
            .atoms
            .iter()
            .map(|a| {
                let r = rels.iter().position(|(s, k)| s == a.symbol() && *k == a.args().len());
                (r, a.args().iter().map(index).collect())
            })
            .collect();
        let bound = bound_names
            .iter()
            .map(|b| b.iter().map(index).collect())
            .collect();
        Ok(Layout {
            vars,
            rels,
            atoms,
            bound,
        })
    }

    fn points(&self, n: usize) -> Option<usize> {
        n.checked_pow(self.vars.len() as u32).filter(|&p| p <= 64)
    }

    fn geometry(&self, n: usize) -> Geometry {
        let points = self.points(n).expect("checked");
        let nv = self.vars.len();
        let digits = |a: usize| -> Vec<usize> {
            let mut d = vec![0; nv];
            let mut rest = a;
            for x in d.iter_mut().rev() {
                *x = rest % n;
                rest /= n;
            }
            d
        };
        let all: Vec<Vec<usize>> = (0..points).map(digits).collect();
        let mut tuple = Vec::new();
        let mut fixed = Vec::new();
        for (rel, args) in &self.atoms {
            match rel {
                Some(_) => {
                    let t = all
                        .iter()
                        .map(|d| args.iter().fold(0, |acc, &v| acc * n + d[v]))
                        .collect();
                    tuple.push(Some(t));
                    fixed.push(0);
                }
                None => {
                    let mut m = 0u64;
                    for (a, d) in all.iter().enumerate() {
                        if d[args[0]] == d[args[1]] {
                            m |= 1 << a;
                        }
                    }
                    tuple.push(None);
                    fixed.push(m);
                }
            }
        }
        let variants = self
            .bound
            .iter()
            .map(|b| {
                all.iter()
                    .map(|d| {
                        let mut m = 0u64;
                        for (a2, d2) in all.iter().enumerate() {
                            let same = (0..nv).all(|v| b.contains(&v) || d[v] == d2[v]);
                            if same {
                                m |= 1 << a2;
                            }
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        Geometry {
            n,
            full: full_mask(points),
            tuple,
            fixed,
            variants,
            widths: self.rels.iter().map(|(_, k)| n.pow(*k as u32) as u32).collect(),
        }
    }
}

impl<'a> Structure<'a> {
    fn new(g: &'a Geometry, rels: Vec<u64>, layout: &Layout) -> Self {
        let atoms = layout
            .atoms
            .iter()
            .enumerate()
            .map(|(i, (rel, _))| match (rel, &g.tuple[i]) {
                (Some(r), Some(t)) => t
                    .iter()
                    .enumerate()
                    .fold(0u64, |m, (a, &ti)| m | (rels[*r] >> ti & 1) << a),
                _ => g.fixed[i],
            })
            .collect();
        Structure { g, rels, atoms }
    }
}

impl Oracle for FoOracle {
    fn name(&self) -> &str {
        "first-order"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn bound(&self) -> Option<usize> {
        Some(self.max_size)
    }

    fn search(
        &self,
        formulas: &[Formula],
        accept: &dyn Fn(&[bool]) -> bool,
    ) -> Result<Option<Countermodel>> {
        let c = Circuit::compile(formulas);
        let layout = Layout::new(&c)?;
        let mut geoms = Vec::new();
        let mut total = 0u64;
        for n in 1..=self.max_size {
            if layout.points(n).is_none() {
                return Err(Error::Budget(format!(
                    "{} variables over {n} elements exceed 64 assignments",
                    layout.vars.len()
                )));
            }
            let g = layout.geometry(n);
            let bits: u32 = g.widths.iter().sum();
            total = total.saturating_add(1u64.checked_shl(bits).unwrap_or(u64::MAX));
            if bits > 62 || total > self.budget {
                return Err(Error::Budget(format!(
                    "structures up to size {n} span 2^{bits} models, over the budget of {}",
                    self.budget
                )));
            }
            geoms.push(g);
        }
        let layout = &layout;
        let models = geoms.iter().flat_map(|g| {
            let bits: u32 = g.widths.iter().sum();
            (0..1u64 << bits).map(move |code| Structure::new(g, fields(code, &g.widths), layout))
        });
        Ok(c.scan(models, accept).map(|(m, p, values)| {
            let n = m.g.n;
            let rels: BTreeMap<&str, Vec<Vec<usize>>> = layout
                .rels
                .iter()
                .enumerate()
                .map(|(i, (s, k))| {
                    let tuples = (0..n.pow(*k as u32))
                        .filter(|&t| m.rels[i] >> t & 1 == 1)
                        .map(|t| {
                            let mut d = vec![0; *k];
                            let mut rest = t;
                            for x in d.iter_mut().rev() {
                                *x = rest % n;
                                rest /= n;
                            }
                            d
                        })
                        .collect();
                    (s.as_str(), tuples)
                })
                .collect();
            let mut assignment = BTreeMap::new();
            let mut rest = p as usize;
            for v in layout.vars.iter().rev() {
                assignment.insert(v.as_str(), rest % n);
                rest /= n;
            }
            Countermodel {
                model: json!({
                    "size": n,
                    "relations": rels,
                    "assignment": assignment,
                }),
                values,
            }
        }))
    }
}
