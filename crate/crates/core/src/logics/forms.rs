//! The normal forms of each instance family, built directly from their own
//! definitions rather than through [`crate::constituents`]. Lists come out in
//! the canonical order used throughout: atoms and operators sorted, argument
//! tuples lexicographic, and a sign code whose set bits mark negated items,
//! the first item most significant, literals before the closure.

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Atom, Connective, Formula};

/// `items^code` as a list of signed items.
fn signed(items: &[Formula], code: u64) -> Vec<Formula> {
    let n = items.len();
    items
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if code >> (n - 1 - i) & 1 == 1 {
                Formula::not(f.clone())
            } else {
                f.clone()
            }
        })
        .collect()
}

/// `{L^α ∧ C^β}` over all sign choices.
fn products(literals: &[Formula], closure: &[Formula]) -> Vec<Formula> {
    let (n, m) = (literals.len(), closure.len());
    assert!(n + m < 32, "too many forms to list");
    let mut out = Vec::with_capacity(1 << (n + m));
    for a in 0..1u64 << n {
        for b in 0..1u64 << m {
            let mut parts = signed(literals, a);
            parts.extend(signed(closure, b));
            out.push(Formula::conjunction(parts).expect("non-empty"));
        }
    }
    out
}

fn props(atoms: impl IntoIterator<Item = Atom>) -> Vec<Formula> {
    let sorted: BTreeSet<Atom> = atoms.into_iter().collect();
    sorted.into_iter().map(Formula::prop).collect()
}

fn atoms(vars: &[String], rels: &BTreeMap<String, usize>) -> Vec<Atom> {
    let mut out = Vec::new();
    for (s, &k) in rels {
        if k > 0 && vars.is_empty() {
            continue;
        }
        let mut t = vec![0usize; k];
        loop {
            out.push(Atom::relational(s.clone(), t.iter().map(|&i| vars[i].clone())));
            let Some(pos) = (0..k).rev().find(|&i| t[i] + 1 < vars.len()) else {
                break;
            };
            t[pos] += 1;
            t[pos + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    out
}

/// `F(X) = {X^α}`, the minterms over `X`.
pub fn minterms(xs: &[Atom]) -> Vec<Formula> {
    products(&props(xs.iter().cloned()), &[])
}

/// `F_k(X,Y)` for first-order logic: literals over `P(X,Y)` and, at higher
/// degree, `∃v φ` for `v ∈ X` and `φ ∈ F_{k−1}(X,Y)`, or `F_{k−1}` itself
/// when `X` is empty.
pub fn first_order(k: usize, vars: &[String], rels: &BTreeMap<String, usize>) -> Vec<Formula> {
    let mut vars = vars.to_vec();
    vars.sort();
    let lits = props(atoms(&vars, rels));
    let mut forms = products(&lits, &[]);
    for _ in 0..k {
        let closure: Vec<Formula> = if vars.is_empty() {
            forms
        } else {
            vars.iter()
                .flat_map(|v| {
                    forms
                        .iter()
                        .map(move |f| Formula::app(Connective::exists(v.clone()), vec![f.clone()]))
                })
                .collect()
        };
        forms = products(&lits, &closure);
    }
    forms
}

/// `F_k(X,Y;X′)` for the guarded fragment: literals over atoms built from
/// `X′`, and guarded quantifications `∃ū(γ ∧ φ)` with `γ` over `X`,
/// `ū ⊆ free(γ)`, `free(γ)∖ū ⊆ X′` and `φ ∈ F_{k−1}(X,Y;free(γ))`.
pub fn guarded(
    k: usize,
    vars: &[String],
    rels: &BTreeMap<String, usize>,
    free: &[String],
) -> Vec<Formula> {
    let mut sorted_free = free.to_vec();
    sorted_free.sort();
    let lits = props(atoms(&sorted_free, rels));
    if k == 0 {
        return products(&lits, &[]);
    }
    let mut quantifiers = BTreeSet::new();
    for g in atoms(vars, rels) {
        let fv: Vec<String> = g.variables().into_iter().map(String::from).collect();
        for mask in 0u32..1 << fv.len() {
            let bound: Vec<&String> = fv
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| v)
                .collect();
            let unbound_in_free = fv
                .iter()
                .filter(|v| !bound.contains(v))
                .all(|v| free.contains(v));
            if unbound_in_free {
                quantifiers.insert(Connective::guarded(bound.into_iter().cloned(), g.clone()));
            }
        }
    }
    let mut closure = Vec::new();
    for q in quantifiers {
        let g = q.guard().expect("guarded");
        let inner: Vec<String> = g.variables().into_iter().map(String::from).collect();
        for f in guarded(k - 1, vars, rels, &inner) {
            closure.push(Formula::app(q.clone(), vec![f]));
        }
    }
    products(&lits, &closure)
}

/// `F_n(I′,J′,X′)` for Boolean algebras with operators, as formulas (`·` is
/// `∧`, `−` is `¬`): signed members of `D = X′ ∪ {d_j}` and signed members
/// of the one-step closure `{f_i(τ̄)}` of `F_{n−1}`.
pub fn bao(n: usize, ops: &BTreeMap<String, usize>, d: &[String]) -> Vec<Formula> {
    let lits = props(d.iter().map(|x| Atom::letter(x.clone())));
    let mut forms = products(&lits, &[]);
    for _ in 0..n {
        let mut closure = Vec::new();
        for (name, &rank) in ops {
            let f = Connective::operator(name.clone(), rank);
            let mut t = vec![0usize; rank];
            loop {
                closure.push(Formula::app(
                    f.clone(),
                    t.iter().map(|&i| forms[i].clone()).collect(),
                ));
                let Some(pos) = (0..rank).rev().find(|&i| t[i] + 1 < forms.len()) else {
                    break;
                };
                t[pos] += 1;
                t[pos + 1..].iter_mut().for_each(|x| *x = 0);
            }
        }
        forms = products(&lits, &closure);
    }
    forms
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn sizes() {
        let p1 = BTreeMap::from([("P".to_string(), 1)]);
        assert_eq!(minterms(&[Atom::letter("p"), Atom::letter("q")]).len(), 4);
        assert_eq!(first_order(1, &s(&["u", "v"]), &p1).len(), 1024);
        assert_eq!(guarded(1, &s(&["u", "v"]), &p1, &s(&["v"])).len(), 128);
        let f1 = BTreeMap::from([("f".to_string(), 1)]);
        assert_eq!(bao(1, &f1, &s(&["x"])).len(), 8);
        let f2 = BTreeMap::from([("f".to_string(), 2)]);
        assert_eq!(bao(1, &f2, &s(&["x"])).len(), 2 << 4);
    }

    #[test]
    fn empty_variable_set_reuses_the_previous_degree() {
        let z = BTreeMap::from([("Z".to_string(), 0)]);
        assert_eq!(first_order(1, &[], &z).len(), 2 * 4);
    }

    #[test]
    fn first_minterm_is_all_positive() {
        let f = minterms(&[Atom::letter("q"), Atom::letter("p")]);
        assert_eq!(f[0].render(), "(and p q)");
        assert_eq!(f[3].render(), "(and (not p) (not q))");
    }
}
