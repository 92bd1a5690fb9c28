//! Logic instances and the semantic checkers used to verify normal forms.

pub(crate) mod circuit;
mod first_order;
pub mod forms;
mod frames;
pub mod instance;
mod prop;

use serde::Serialize;

use crate::error::Result;
use crate::syntax::Formula;

pub use first_order::FoOracle;
pub use frames::FrameOracle;
pub use instance::{Instance, InstanceConfig, Kind};
pub use prop::PropOracle;

/// Default number of candidate models an oracle may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// A point of a model at which some formulas were evaluated.
#[derive(Clone, Debug, Serialize)]
pub struct Countermodel {
    pub model: serde_json::Value,
    /// Truth values of the searched formulas at that point.
    pub values: Vec<bool>,
}

/// A semantic checker. `search` evaluates all formulas jointly at every point
/// of every model it covers and returns the first point whose row of truth
/// values `accept` rejects.
pub trait Oracle {
    fn name(&self) -> &str;

    /// Whether a clean search proves the property rather than bounding it.
    fn is_exact(&self) -> bool;

    /// The model-size bound, for bounded searches.
    fn bound(&self) -> Option<usize>;

    fn search(
        &self,
        formulas: &[Formula],
        accept: &dyn Fn(&[bool]) -> bool,
    ) -> Result<Option<Countermodel>>;
}

/// A point where `a` and `b` differ.
pub fn equivalence(oracle: &dyn Oracle, a: &Formula, b: &Formula) -> Result<Option<Countermodel>> {
    oracle.search(&[a.clone(), b.clone()], &|v: &[bool]| v[0] == v[1])
}

/// A point where `f` fails.
pub fn validity(oracle: &dyn Oracle, f: &Formula) -> Result<Option<Countermodel>> {
    oracle.search(std::slice::from_ref(f), &|v: &[bool]| v[0])
}

/// Outcome of a verification run, as reported by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub oracle: String,
    pub exact: bool,
    pub bound: Option<usize>,
    pub passed: bool,
    pub countermodel: Option<Countermodel>,
}

impl Verdict {
    pub fn new(oracle: &dyn Oracle, found: Option<Countermodel>) -> Self {
        Verdict {
            oracle: oracle.name().to_string(),
            exact: oracle.is_exact(),
            bound: oracle.bound(),
            passed: found.is_none(),
            countermodel: found,
        }
    }
}

/// Splits `code` into consecutive bit fields of the given widths.
pub(crate) fn fields(mut code: u64, widths: &[u32]) -> Vec<u64> {
    widths
        .iter()
        .map(|&w| {
            let v = if w == 64 { code } else { code & ((1u64 << w) - 1) };
            code = code.checked_shr(w).unwrap_or(0);
            v
        })
        .collect()
}

pub(crate) fn full_mask(points: usize) -> u64 {
    if points == 64 {
        u64::MAX
    } else {
        (1u64 << points) - 1
    }
}

pub(crate) fn bit_list(mask: u64) -> Vec<u32> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}
