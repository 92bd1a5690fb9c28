use std::collections::HashMap;

use crate::syntax::{Atom, Binder, Connective, Formula};

/// A hash-consed DAG of formulas. Rendered normal forms share most of their
/// structure, so oracles evaluate the circuit once per model instead of
/// walking each formula tree.
pub(crate) struct Circuit {
    pub atoms: Vec<Atom>,
    pub conns: Vec<Connective>,
    /// For guarded connectives, the atom index of the guard.
    pub guards: Vec<Option<usize>>,
    pub nodes: Vec<Node>,
    pub roots: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Atom(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    App(usize, Box<[usize]>),
}

/// A structure against which a circuit is evaluated. Each point is one bit
/// of a `u64` mask.
pub(crate) trait Model {
    fn points(&self) -> u64;
    fn atom(&self, atom: usize) -> u64;
    fn apply(&self, conn: usize, guard: Option<u64>, args: &[u64]) -> u64;
}

struct Builder {
    atoms: HashMap<Atom, usize>,
    conns: HashMap<Connective, usize>,
    nodes: HashMap<Node, usize>,
    seen: HashMap<*const Formula, usize>,
    out: Circuit,
}

impl Circuit {
    pub fn compile(formulas: &[Formula]) -> Circuit {
        let mut b = Builder {
            atoms: HashMap::new(),
            conns: HashMap::new(),
            nodes: HashMap::new(),
            seen: HashMap::new(),
            out: Circuit {
                atoms: Vec::new(),
                conns: Vec::new(),
                guards: Vec::new(),
                nodes: Vec::new(),
                roots: Vec::new(),
            },
        };
        for f in formulas {
            let r = b.node(f);
            b.out.roots.push(r);
        }
        b.out
    }

    /// Values of every node; `vals` is reused between calls.
    pub fn eval(&self, m: &impl Model, vals: &mut Vec<u64>) {
        let full = m.points();
        vals.clear();
        vals.reserve(self.nodes.len());
        let atoms: Vec<u64> = (0..self.atoms.len()).map(|i| m.atom(i)).collect();
        let mut args = Vec::new();
        for n in &self.nodes {
            let v = match n {
                Node::Atom(i) => atoms[*i],
                Node::Not(a) => !vals[*a] & full,
                Node::And(a, b) => vals[*a] & vals[*b],
                Node::Or(a, b) => vals[*a] | vals[*b],
                Node::App(c, xs) => {
                    args.clear();
                    args.extend(xs.iter().map(|&x| vals[x]));
                    let guard = self.guards[*c].map(|g| atoms[g]);
                    m.apply(*c, guard, &args)
                }
            };
            vals.push(v);
        }
    }

    /// Runs `accept` on the root values at every point of every model and
    /// returns the first failure.
    pub fn scan<M: Model>(
        &self,
        models: impl Iterator<Item = M>,
        accept: &dyn Fn(&[bool]) -> bool,
    ) -> Option<(M, u32, Vec<bool>)> {
        let mut vals = Vec::new();
        let mut row = vec![false; self.roots.len()];
        for m in models {
            self.eval(&m, &mut vals);
            let full = m.points();
            for p in 0..64 {
                if full >> p & 1 == 0 {
                    continue;
                }
                for (slot, &r) in row.iter_mut().zip(&self.roots) {
                    *slot = vals[r] >> p & 1 == 1;
                }
                if !accept(&row) {
                    return Some((m, p, row));
                }
            }
        }
        None
    }
}

impl Builder {
    fn atom(&mut self, a: &Atom) -> usize {
        if let Some(&i) = self.atoms.get(a) {
            return i;
        }
        let i = self.out.atoms.len();
        self.out.atoms.push(a.clone());
        self.atoms.insert(a.clone(), i);
        i
    }

    fn conn(&mut self, c: &Connective) -> usize {
        if let Some(&i) = self.conns.get(c) {
            return i;
        }
        let guard = match c.binder() {
            Binder::Guarded { guard, .. } => Some(self.atom(guard)),
            _ => None,
        };
        let i = self.out.conns.len();
        self.out.conns.push(c.clone());
        self.out.guards.push(guard);
        self.conns.insert(c.clone(), i);
        i
    }

    fn intern(&mut self, n: Node) -> usize {
        if let Some(&i) = self.nodes.get(&n) {
            return i;
        }
        let i = self.out.nodes.len();
        self.out.nodes.push(n.clone());
        self.nodes.insert(n, i);
        i
    }

    // Addresses are stable: every node is borrowed from the input slice for
    // the whole compilation.
    fn node(&mut self, f: &Formula) -> usize {
        let key = f as *const Formula;
        if let Some(&i) = self.seen.get(&key) {
            return i;
        }
        let n = match f {
            Formula::Prop(a) => Node::Atom(self.atom(a)),
            Formula::Not(a) => Node::Not(self.node(a)),
            Formula::And(a, b) => Node::And(self.node(a), self.node(b)),
            Formula::Or(a, b) => Node::Or(self.node(a), self.node(b)),
            Formula::App(c, args) => {
                let c = self.conn(c);
                let xs: Box<[usize]> = args.iter().map(|a| self.node(a)).collect();
                Node::App(c, xs)
            }
        };
        let i = self.intern(n);
        self.seen.insert(key, i);
        i
    }
}
