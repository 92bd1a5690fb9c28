use std::collections::BTreeMap;

use serde_json::json;

use super::circuit::{Circuit, Model};
use super::{full_mask, Countermodel, Oracle};
use crate::error::{Error, Result};
use crate::syntax::Formula;

const MAX_ATOMS: usize = 26;

/// Truth tables. Every atom, relational or not, is an independent
/// proposition; any non-propositional connective is rejected.
#[derive(Clone, Debug, Default)]
pub struct PropOracle;

/// 64 consecutive rows of the truth table. Row `r` gives atom `i` the value
/// of bit `i` of `r`.
struct Rows {
    chunk: u64,
    atoms: usize,
}

impl Model for Rows {
    fn points(&self) -> u64 {
        full_mask(1usize << self.atoms.min(6))
    }

    fn atom(&self, i: usize) -> u64 {
        const PATTERNS: [u64; 6] = [
            0xAAAA_AAAA_AAAA_AAAA,
            0xCCCC_CCCC_CCCC_CCCC,
            0xF0F0_F0F0_F0F0_F0F0,
            0xFF00_FF00_FF00_FF00,
            0xFFFF_0000_FFFF_0000,
            0xFFFF_FFFF_0000_0000,
        ];
        if i < 6 {
            PATTERNS[i] & self.points()
        } else if self.chunk >> (i - 6) & 1 == 1 {
            self.points()
        } else {
            0
        }
    }

    fn apply(&self, _: usize, _: Option<u64>, _: &[u64]) -> u64 {
        unreachable!("rejected before evaluation")
    }
}

impl Oracle for PropOracle {
    fn name(&self) -> &str {
        "truth-table"
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn bound(&self) -> Option<usize> {
        None
    }

    fn search(
        &self,
        formulas: &[Formula],
        accept: &dyn Fn(&[bool]) -> bool,
    ) -> Result<Option<Countermodel>> {
        let c = Circuit::compile(formulas);
        if let Some(conn) = c.conns.first() {
            return Err(Error::Unsupported(format!("connective {conn} in a truth table")));
        }
        let atoms = c.atoms.len();
        if atoms > MAX_ATOMS {
            return Err(Error::Budget(format!("{atoms} propositions")));
        }
        let chunks = 1u64 << atoms.saturating_sub(6);
        let models = (0..chunks).map(|chunk| Rows { chunk, atoms });
        Ok(c.scan(models, accept).map(|(m, p, values)| {
            let row = m.chunk << 6 | u64::from(p);
            let assignment: BTreeMap<String, bool> = c
                .atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.to_string(), row >> i & 1 == 1))
                .collect();
            Countermodel {
                model: json!({ "assignment": assignment }),
                values,
            }
        }))
    }
}
