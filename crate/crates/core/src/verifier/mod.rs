//! Numeric checks of the constructions behind the minimality of the fractal
//! tree: the length bounds near the small balls, the symmetric
//! decompositions, the contact-point shift argument and the truncated
//! minimality itself.

mod dimension;
mod lemma0;
mod lemma1;
mod lemma2;
mod theorem;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use dimension::estimate_dimension;
pub use lemma0::{check_lemma0, lemma0_crossing, ItemBounds, LemmaZeroBounds, PerturbationCheck};
pub use lemma1::{build_lemma1, check_lemma1_decomposition, LemmaOneConstruction};
pub use lemma2::{check_lemma2_shift, contact_minimizer, ContactMinimizer, LemmaTwoScenario};
pub use theorem::{check_theorem, check_theorem_with, TheoremReport};

/// Uniform serialised form of every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub computed_values: BTreeMap<String, f64>,
    /// Signed; positive means the inequality holds with room to spare.
    pub margins: BTreeMap<String, f64>,
    pub pass: bool,
    pub tolerances: BTreeMap<String, f64>,
}

impl LemmaReport {
    pub(crate) fn new(name: impl Into<String>) -> Self {
        LemmaReport {
            name: name.into(),
            inputs: BTreeMap::new(),
            computed_values: BTreeMap::new(),
            margins: BTreeMap::new(),
            pass: true,
            tolerances: BTreeMap::new(),
        }
    }

    pub(crate) fn input(mut self, key: &str, v: f64) -> Self {
        self.inputs.insert(key.into(), v);
        self
    }

    pub(crate) fn value(&mut self, key: &str, v: f64) {
        self.computed_values.insert(key.into(), v);
    }

    pub(crate) fn margin(&mut self, key: &str, v: f64) {
        self.margins.insert(key.into(), v);
    }

    /// Records `|error| ≤ tol` as a margin `tol - |error|` and folds it into `pass`.
    pub(crate) fn within(&mut self, key: &str, error: f64, tol: f64) {
        let m = tol - error.abs();
        self.margins.insert(key.into(), m);
        self.tolerances.insert(key.into(), tol);
        self.pass &= m >= 0.0;
    }
}

/// All checks for one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub lambda: f64,
    pub reports: Vec<LemmaReport>,
    pub pass: bool,
}

/// Runs every check at `λ`. The construction checks need `λ < 1/4` and the
/// truncated minimality runs to depth `max_depth` (2 to 4).
pub fn verify_all(lambda: f64, max_depth: u32) -> Result<Bundle> {
    let mut reports = vec![check_lemma0(lambda)?.report()];
    reports.push(build_lemma1(lambda)?.report());
    for samples in 1..=3 {
        reports.push(check_lemma1_decomposition(lambda, samples)?);
    }
    for h in [0.0, 0.5 * lambda, -0.5 * lambda, lambda] {
        reports.push(check_lemma2_shift(lambda, h)?.report());
    }
    reports.push(contact_minimizer(lambda)?.report());
    for depth in 2..=max_depth {
        reports.push(check_theorem(lambda, depth)?.report());
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(Bundle {
        lambda,
        reports,
        pass,
    })
}
