//! The counting invariant and its bead-coloring enhancement.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{count_beads_cancellable, enumerate_xcolorings, ColoringError, Engine, XColoring};
use crate::diagram::LinkDiagram;
use crate::forms::BilinearForm;
use crate::quandle::Quandle;

/// `sum c_k u^k`, stored as exponent to multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct InvariantPolynomial {
    terms: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Distinguished,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse polynomial `{text}`: {message}")]
pub struct PolynomialParseError {
    pub text: String,
    pub message: String,
}

impl InvariantPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    /// One term per entry, with repeated exponents merged.
    pub fn from_exponents<I: IntoIterator<Item = u64>>(exponents: I) -> Self {
        let mut p = Self::new();
        for k in exponents {
            p.add_term(k, 1);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (u64, u64)>>(terms: I) -> Self {
        let mut p = Self::new();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    pub fn add_term(&mut self, exponent: u64, multiplicity: u64) {
        if multiplicity > 0 {
            *self.terms.entry(exponent).or_insert(0) += multiplicity;
        }
    }

    pub fn multiplicity(&self, exponent: u64) -> u64 {
        self.terms.get(&exponent).copied().unwrap_or(0)
    }

    /// `(exponent, multiplicity)` pairs, highest exponent first.
    pub fn terms(&self) -> Vec<(u64, u64)> {
        self.terms.iter().rev().map(|(&k, &c)| (k, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate_at_one(&self) -> u64 {
        self.terms.values().sum()
    }

    /// The exponent multiset, ascending.
    pub fn exponent_multiset(&self) -> Vec<u64> {
        self.terms.iter().flat_map(|(&k, &c)| std::iter::repeat_n(k, c as usize)).collect()
    }
}

pub fn compare(p1: &InvariantPolynomial, p2: &InvariantPolynomial) -> Comparison {
    if p1 == p2 {
        Comparison::Equal
    } else {
        Comparison::Distinguished
    }
}

impl fmt::Display for InvariantPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms().into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (k, 1) => write!(f, "u^{k}")?,
                (k, c) => write!(f, "{c}u^{k}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for InvariantPolynomial {
    type Err = PolynomialParseError;

    /// Accepts the canonical rendering and also `u`, `3u`, `2*u^4` and constants.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |message: &str| PolynomialParseError { text: s.to_string(), message: message.to_string() };
        let text = s.trim();
        if text == "0" {
            return Ok(Self::new());
        }
        if text.is_empty() {
            return Err(err("empty"));
        }
        let mut p = Self::new();
        for raw in text.split('+') {
            let term: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            if term.is_empty() {
                return Err(err("empty term"));
            }
            let (coef, exp) = match term.find('u') {
                None => (term.as_str(), "0"),
                Some(i) => {
                    let coef = term[..i].strip_suffix('*').unwrap_or(&term[..i]);
                    let rest = &term[i + 1..];
                    let exp = match rest.strip_prefix('^') {
                        Some(e) => e,
                        None if rest.is_empty() => "1",
                        None => return Err(err("expected `^` after `u`")),
                    };
                    (if coef.is_empty() { "1" } else { coef }, exp)
                }
            };
            let c: u64 = coef.parse().map_err(|_| err(&format!("bad coefficient `{coef}`")))?;
            let k: u64 = exp.parse().map_err(|_| err(&format!("bad exponent `{exp}`")))?;
            if c == 0 {
                return Err(err("zero coefficient"));
            }
            p.add_term(k, c);
        }
        Ok(p)
    }
}

/// Per-coloring bead counts alongside the polynomial they sum to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantComputation {
    pub polynomial: InvariantPolynomial,
    pub colorings: Vec<XColoring>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error("engines disagree on coloring {coloring:?}: oracle {oracle}, propagate {propagate}")]
    EngineMismatch { coloring: Vec<usize>, oracle: u64, propagate: u64 },
}

/// `Phi = sum over colorings f of u^(number of bead colorings of D_f)`.
pub fn compute_invariant(
    d: &LinkDiagram,
    q: &Quandle,
    form: &BilinearForm,
    engine: Engine,
) -> Result<InvariantPolynomial, ColoringError> {
    Ok(compute_counts(d, q, form, engine)?.polynomial)
}

/// Computes per-coloring counts in parallel. The first failing worker stops
/// the rest; results are in coloring order regardless of scheduling.
pub fn compute_counts(
    d: &LinkDiagram,
    q: &Quandle,
    form: &BilinearForm,
    engine: Engine,
) -> Result<InvariantComputation, ColoringError> {
    let colorings = enumerate_xcolorings(d, q);
    let stop = AtomicBool::new(false);
    let counts = colorings
        .par_iter()
        .map(|f| {
            let r = count_beads_cancellable(d, q, form, f, engine, 0, &stop).map(|c| c.count);
            if r.is_err() {
                stop.store(true, Ordering::Relaxed);
            }
            r
        })
        .collect::<Vec<_>>();
    // Report the root cause rather than a knock-on cancellation.
    if let Some(e) = counts.iter().filter_map(|r| r.as_ref().err()).find(|e| **e != ColoringError::Cancelled) {
        return Err(e.clone());
    }
    let counts = counts.into_iter().collect::<Result<Vec<u64>, _>>()?;
    Ok(InvariantComputation {
        polynomial: InvariantPolynomial::from_exponents(counts.iter().copied()),
        colorings,
        counts,
    })
}

/// Runs both engines and fails on the first disagreement.
pub fn compute_both(d: &LinkDiagram, q: &Quandle, form: &BilinearForm) -> Result<InvariantComputation, InvariantError> {
    let oracle = compute_counts(d, q, form, Engine::Oracle)?;
    let propagate = compute_counts(d, q, form, Engine::Propagate)?;
    for ((f, &a), &b) in oracle.colorings.iter().zip(&oracle.counts).zip(&propagate.counts) {
        if a != b {
            return Err(InvariantError::EngineMismatch { coloring: f.colors().to_vec(), oracle: a, propagate: b });
        }
    }
    Ok(propagate)
}

/// The number of quandle colorings.
pub fn counting_invariant(d: &LinkDiagram, q: &Quandle) -> u64 {
    enumerate_xcolorings(d, q).len() as u64
}

/// Machine-readable record of one computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub link: String,
    pub quandle: String,
    pub form: String,
    /// `[exponent, multiplicity]`, highest exponent first.
    pub terms: Vec<[u64; 2]>,
    pub counting_invariant: u64,
    pub engine: String,
    pub elapsed_ms: u64,
}

impl InvariantReport {
    pub fn new(
        link: &str,
        quandle: &str,
        form: &str,
        polynomial: &InvariantPolynomial,
        engine: &str,
        started: Instant,
    ) -> Self {
        Self {
            link: link.to_string(),
            quandle: quandle.to_string(),
            form: form.to_string(),
            terms: polynomial.terms().into_iter().map(|(k, c)| [k, c]).collect(),
            counting_invariant: polynomial.evaluate_at_one(),
            engine: engine.to_string(),
            elapsed_ms: started.elapsed().as_millis() as u64,
        }
    }

    pub fn polynomial(&self) -> InvariantPolynomial {
        InvariantPolynomial::from_terms(self.terms.iter().map(|&[k, c]| (k, c)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
