//! Formula samplers and reference evaluators shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use normforms::syntax::{Atom, Connective, Formula};
use rand::Rng;
use rand::SeedableRng;

pub type TestRng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

pub fn letter(n: &str) -> Formula {
    Formula::letter(n)
}

pub fn dia(f: Formula) -> Formula {
    Formula::app(Connective::operator("dia", 1), vec![f])
}

/// AST height: a leaf has height 0.
pub fn height(f: &Formula) -> usize {
    match f {
        Formula::Prop(_) => 0,
        Formula::Not(a) => 1 + height(a),
        Formula::And(a, b) | Formula::Or(a, b) => 1 + height(a).max(height(b)),
        Formula::App(_, args) => 1 + args.iter().map(height).max().unwrap_or(0),
    }
}

/// Every propositional formula over `letters` of height at most `h`.
pub fn all_propositional(letters: &[&str], h: usize) -> Vec<Formula> {
    let mut level: Vec<Formula> = letters.iter().map(|n| letter(n)).collect();
    for _ in 0..h {
        let prev = level.clone();
        let mut next: Vec<Formula> = letters.iter().map(|n| letter(n)).collect();
        next.extend(prev.iter().map(|f| Formula::not(f.clone())));
        for a in &prev {
            for b in &prev {
                next.push(Formula::and(a.clone(), b.clone()));
                next.push(Formula::or(a.clone(), b.clone()));
            }
        }
        level = next;
    }
    level
}

/// A random propositional formula of height at most `h`.
pub fn random_propositional(rng: &mut impl Rng, letters: &[&str], h: usize) -> Formula {
    if h == 0 || rng.gen_bool(0.2) {
        return letter(letters[rng.gen_range(0..letters.len())]);
    }
    match rng.gen_range(0..3) {
        0 => Formula::not(random_propositional(rng, letters, h - 1)),
        1 => Formula::and(
            random_propositional(rng, letters, h - 1),
            random_propositional(rng, letters, h - 1),
        ),
        _ => Formula::or(
            random_propositional(rng, letters, h - 1),
            random_propositional(rng, letters, h - 1),
        ),
    }
}

/// A random formula over `letters` and `dia` with modal depth at most `md`
/// and height at most `h`.
pub fn random_modal(rng: &mut impl Rng, letters: &[&str], md: usize, h: usize) -> Formula {
    if h == 0 || rng.gen_bool(0.2) {
        return letter(letters[rng.gen_range(0..letters.len())]);
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(random_modal(rng, letters, md, h - 1)),
        1 => Formula::and(
            random_modal(rng, letters, md, h - 1),
            random_modal(rng, letters, md, h - 1),
        ),
        2 => Formula::or(
            random_modal(rng, letters, md, h - 1),
            random_modal(rng, letters, md, h - 1),
        ),
        _ if md > 0 => dia(random_modal(rng, letters, md - 1, h - 1)),
        _ => Formula::not(random_modal(rng, letters, md, h - 1)),
    }
}

pub const GF_VARS: [&str; 2] = ["u", "v"];

/// Atoms over `vars` with a binary `R` and a unary `P`.
pub fn gf_atoms(vars: &[&str]) -> Vec<Atom> {
    let mut out = Vec::new();
    for a in vars {
        out.push(Atom::relational("P", [*a]));
        for b in vars {
            out.push(Atom::relational("R", [*a, *b]));
        }
    }
    out
}

fn random_over(
    rng: &mut TestRng,
    atoms: &[Atom],
    h: usize,
    leaf: &mut dyn FnMut(&mut TestRng) -> Formula,
) -> Formula {
    if h == 0 || rng.gen_bool(0.3) {
        if rng.gen_bool(0.75) {
            return Formula::prop(atoms[rng.gen_range(0..atoms.len())].clone());
        }
        return leaf(rng);
    }
    match rng.gen_range(0..3) {
        0 => Formula::not(random_over(rng, atoms, h - 1, leaf)),
        1 => Formula::and(
            random_over(rng, atoms, h - 1, leaf),
            random_over(rng, atoms, h - 1, leaf),
        ),
        _ => Formula::or(
            random_over(rng, atoms, h - 1, leaf),
            random_over(rng, atoms, h - 1, leaf),
        ),
    }
}

/// A random guarded formula of quantifier depth at most one with free
/// variables among `u, v`, using a single guarded quantifier.
pub fn random_guarded(rng: &mut TestRng) -> Formula {
    let atoms = gf_atoms(&GF_VARS);
    let guard = loop {
        let g = atoms[rng.gen_range(0..atoms.len())].clone();
        if g.symbol() == "R" || rng.gen_bool(0.3) {
            break g;
        }
    };
    let free: Vec<String> = guard.variables().into_iter().map(String::from).collect();
    let bound: Vec<String> = free.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
    let q = Connective::guarded(bound, guard);
    let inner_vars: Vec<&str> = free.iter().map(String::as_str).collect();
    let inner = gf_atoms(&inner_vars);
    let mut leaf = |r: &mut TestRng| {
        let body = random_over(r, &inner, 2, &mut |r2: &mut TestRng| {
            Formula::prop(inner[r2.gen_range(0..inner.len())].clone())
        });
        Formula::app(q.clone(), vec![body])
    };
    let f = random_over(rng, &atoms, 3, &mut leaf);
    if f.depth() == 0 {
        // Make sure the quantifier occurs.
        return Formula::and(f, leaf(rng));
    }
    f
}

/// Reference semantics for propositional formulas.
pub fn eval(f: &Formula, val: &dyn Fn(&Atom) -> bool) -> bool {
    match f {
        Formula::Prop(a) => val(a),
        Formula::Not(a) => !eval(a, val),
        Formula::And(a, b) => eval(a, val) && eval(b, val),
        Formula::Or(a, b) => eval(a, val) || eval(b, val),
        Formula::App(..) => panic!("not propositional"),
    }
}

/// The minterm indices satisfying `f` over the sorted letters `xs`: the
/// first letter is the most significant bit and a set bit means false.
pub fn satisfying_minterms(f: &Formula, xs: &[Atom]) -> BTreeSet<u64> {
    let n = xs.len();
    let mut out = BTreeSet::new();
    for idx in 0..1u64 << n {
        let val = |a: &Atom| {
            let i = xs.iter().position(|x| x == a).expect("letter in X");
            idx >> (n - 1 - i) & 1 == 0
        };
        if eval(f, &val) {
            out.insert(idx);
        }
    }
    out
}

/// Reference free variables of a first-order formula.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    use normforms::syntax::Binder;
    match f {
        Formula::Prop(a) => a.args().iter().cloned().collect(),
        Formula::Not(a) => free_vars(a),
        Formula::And(a, b) | Formula::Or(a, b) => {
            let mut s = free_vars(a);
            s.extend(free_vars(b));
            s
        }
        Formula::App(c, args) => {
            let mut s: BTreeSet<String> = args.iter().flat_map(free_vars).collect();
            match c.binder() {
                Binder::Exists(v) => {
                    s.remove(v);
                }
                Binder::Guarded { bound, guard } => {
                    s.extend(guard.args().iter().cloned());
                    for v in bound {
                        s.remove(v);
                    }
                }
                Binder::None => {}
            }
            s
        }
    }
}
