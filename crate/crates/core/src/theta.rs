//! Lazily evaluated θ-rows.
//!
//! A θ-run takes a finite target vector `f`, a list of rows to avoid, and a
//! list of rows to match (one per entry of `f`), and produces an infinite
//! rational sequence `θ` with
//!
//! * `f(k) = Σ_l θ(l)·matched[k](l)` for every `k`, the sum vanishing past the
//!   milestone `n_k`;
//! * `supp θ ∩ supp r ⊆ [0, n_m]` for the `m`-th avoided or matched row `r`;
//! * `supp θ ∩ x_m ⊆ [0, n_m]` for every column `x_m` of [`crate::adfamily`];
//! * `θ(n_k) = 1` at every milestone.
//!
//! Values are produced one stage at a time on demand and memoized. Stage `s`
//! ends at milestone `n_s`; the values between two milestones are fixed when
//! the later one is reached and never change afterwards.

use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adfamily::{ad_elements_upto, column_of};
use crate::exactnum::Rational;

/// Upper bound on how far a single stage scans past the previous milestone.
///
/// Valid inputs always terminate far below this; hitting it means the argument
/// rows were not almost disjoint.
pub const MAX_SEARCH: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThetaError {
    #[error("target has length {target} but {matched} rows to match were given")]
    LengthMismatch { target: usize, matched: usize },
    #[error("row {row} has a stored prefix of {len} values; index {index} is unavailable")]
    BeyondPrefix { row: String, len: usize, index: usize },
    #[error("stage {stage} of row {row} found no admissible index in [{from}, {to}); argument rows are not almost disjoint")]
    SearchExhausted { row: String, stage: usize, from: usize, to: usize },
    #[error("row {row}: invalid milestone table: {detail}")]
    BadMilestones { row: String, detail: String },
    #[error("{0}")]
    Conclusion(LemmaViolation),
}

/// Which guarantee of a θ-run failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    /// The weighted sum against `matched[k]` equals `f(k)` and vanishes past `n_k`.
    SumIdentity,
    /// Support overlap with matched rows stays below their milestones.
    MatchedOverlap,
    /// Support overlap with avoided rows stays below their milestones.
    AvoidedOverlap,
    /// Support overlap with the disjoint columns stays below their milestones.
    ColumnOverlap,
    /// Milestones are increasing, marked with 1, and numerous enough.
    Milestones,
}

impl Conclusion {
    pub fn number(self) -> u8 {
        match self {
            Conclusion::SumIdentity => 1,
            Conclusion::MatchedOverlap => 2,
            Conclusion::AvoidedOverlap => 3,
            Conclusion::ColumnOverlap => 4,
            Conclusion::Milestones => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub conclusion: Conclusion,
    /// The `k` or `m` the failing statement is about.
    pub index: usize,
    /// Sequence position where it fails, when there is one.
    pub position: Option<usize>,
    pub detail: String,
}

impl fmt::Display for LemmaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conclusion ({}) {:?} fails for index {}", self.conclusion.number(), self.conclusion, self.index)?;
        if let Some(p) = self.position {
            write!(f, " at position {p}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Arguments of a θ-run.
#[derive(Clone)]
pub struct ThetaInputs {
    pub target: Vec<Rational>,
    pub avoid: Vec<Row>,
    pub matched: Vec<Row>,
}

impl ThetaInputs {
    pub fn new(target: Vec<Rational>, avoid: Vec<Row>, matched: Vec<Row>) -> Result<Self, ThetaError> {
        if target.len() != matched.len() {
            return Err(ThetaError::LengthMismatch {
                target: target.len(),
                matched: matched.len(),
            });
        }
        Ok(ThetaInputs { target, avoid, matched })
    }

    /// Whether `p` lies outside `supp avoid[m]`, `supp matched[m]` and `x_m`
    /// for every `m < bound`.
    fn admissible(&self, p: usize, bound: usize) -> Result<bool, ThetaError> {
        if bound > 0 && column_of(p as u64) < bound as u64 {
            return Ok(false);
        }
        for rows in [&self.avoid, &self.matched] {
            for row in rows.iter().take(bound) {
                if row.in_support(p)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

enum Source {
    Theta(ThetaInputs),
    Frozen,
}

struct RowState {
    provenance: String,
    values: Vec<Rational>,
    milestones: Vec<usize>,
    source: Source,
}

impl RowState {
    fn beyond(&self, index: usize) -> ThetaError {
        ThetaError::BeyondPrefix {
            row: self.provenance.clone(),
            len: self.values.len(),
            index,
        }
    }

    /// Runs one stage. Stage `s` avoids the first `s` rows of each list and
    /// the columns `x_0..x_{s-1}`; the first stage avoids nothing.
    fn step(&mut self) -> Result<(), ThetaError> {
        let inputs = match &self.source {
            Source::Theta(inputs) => inputs,
            Source::Frozen => return Err(self.beyond(self.values.len())),
        };
        let stage = self.milestones.len();
        let start = self.values.len();
        let limit = start + MAX_SEARCH;
        let exhausted = |provenance: &str| ThetaError::SearchExhausted {
            row: provenance.to_string(),
            stage,
            from: start,
            to: limit,
        };

        if stage < inputs.target.len() {
            let matched = &inputs.matched[stage];
            let mut p = start;
            loop {
                if p >= limit {
                    return Err(exhausted(&self.provenance));
                }
                if matched.value(p)?.is_one() && inputs.admissible(p, stage)? {
                    break;
                }
                p += 1;
            }
            let mut q = p + 1;
            while !inputs.admissible(q, stage + 1)? {
                q += 1;
                if q >= limit {
                    return Err(exhausted(&self.provenance));
                }
            }
            // θ vanishes on (n_{s-1}, p), so the running sum only needs the cache.
            let mut partial = Rational::zero();
            for (l, theta) in self.values.iter().enumerate() {
                if !theta.is_zero() {
                    partial += &(theta * matched.value(l)?);
                }
            }
            let correction = &inputs.target[stage] - &partial;
            self.values.resize(q + 1, Rational::zero());
            self.values[p] = correction;
            self.values[q] = Rational::one();
            self.milestones.push(q);
        } else {
            let mut p = start;
            while !inputs.admissible(p, stage)? {
                p += 1;
                if p >= limit {
                    return Err(exhausted(&self.provenance));
                }
            }
            self.values.resize(p + 1, Rational::zero());
            self.values[p] = Rational::one();
            self.milestones.push(p);
        }
        Ok(())
    }

    fn ensure_len(&mut self, len: usize) -> Result<(), ThetaError> {
        while self.values.len() < len {
            if matches!(self.source, Source::Frozen) {
                return Err(self.beyond(len - 1));
            }
            self.step()?;
        }
        Ok(())
    }

    fn ensure_milestones(&mut self, count: usize) -> Result<(), ThetaError> {
        while self.milestones.len() < count {
            if matches!(self.source, Source::Frozen) {
                return Err(ThetaError::BadMilestones {
                    row: self.provenance.clone(),
                    detail: format!("{} milestones stored, {count} required", self.milestones.len()),
                });
            }
            self.step()?;
        }
        Ok(())
    }
}

/// Shared handle to a memoized infinite rational sequence.
///
/// Rows are either live θ-runs, which extend themselves on demand, or frozen
/// prefixes loaded from disk, which refuse indices past what was stored.
/// Clones share the cache.
#[derive(Clone)]
pub struct Row(Arc<Mutex<RowState>>);

impl Row {
    fn lock(&self) -> MutexGuard<'_, RowState> {
        // A panic mid-extension leaves a consistent prefix behind: values and
        // milestones are only pushed once a stage is complete.
        self.0.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Starts a θ-run. Nothing is evaluated until a value is requested.
    pub fn theta(inputs: ThetaInputs) -> Row {
        Row(Arc::new(Mutex::new(RowState {
            provenance: "theta".to_string(),
            values: Vec::new(),
            milestones: Vec::new(),
            source: Source::Theta(inputs),
        })))
    }

    /// A fixed prefix with its milestone table.
    pub fn frozen(provenance: impl Into<String>, values: Vec<Rational>, milestones: Vec<usize>) -> Result<Row, ThetaError> {
        let provenance = provenance.into();
        let bad = |detail: String| ThetaError::BadMilestones {
            row: provenance.clone(),
            detail,
        };
        if let Some(w) = milestones.windows(2).find(|w| w[0] >= w[1]) {
            return Err(bad(format!("milestones {} and {} are not increasing", w[0], w[1])));
        }
        for &m in &milestones {
            match values.get(m) {
                None => return Err(bad(format!("milestone {m} lies past the prefix of length {}", values.len()))),
                Some(v) if !v.is_one() => return Err(bad(format!("value at milestone {m} is {v}, not 1"))),
                _ => {}
            }
        }
        Ok(Row(Arc::new(Mutex::new(RowState {
            provenance,
            values,
            milestones,
            source: Source::Frozen,
        }))))
    }

    pub fn with_provenance(self, provenance: impl Into<String>) -> Row {
        self.lock().provenance = provenance.into();
        self
    }

    pub fn provenance(&self) -> String {
        self.lock().provenance.clone()
    }

    pub fn is_frozen(&self) -> bool {
        matches!(self.lock().source, Source::Frozen)
    }

    pub fn inputs(&self) -> Option<ThetaInputs> {
        match &self.lock().source {
            Source::Theta(inputs) => Some(inputs.clone()),
            Source::Frozen => None,
        }
    }

    pub fn same_as(&self, other: &Row) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Advances a live run by exactly one stage.
    pub fn step(&self) -> Result<(), ThetaError> {
        self.lock().step()
    }

    /// `θ(i)`, extending the run as far as needed.
    pub fn value(&self, i: usize) -> Result<Rational, ThetaError> {
        let mut state = self.lock();
        state.ensure_len(i + 1)?;
        Ok(state.values[i].clone())
    }

    pub fn in_support(&self, i: usize) -> Result<bool, ThetaError> {
        let mut state = self.lock();
        state.ensure_len(i + 1)?;
        Ok(!state.values[i].is_zero())
    }

    /// The first `len` values.
    pub fn prefix(&self, len: usize) -> Result<Vec<Rational>, ThetaError> {
        let mut state = self.lock();
        state.ensure_len(len)?;
        Ok(state.values[..len].to_vec())
    }

    /// Number of values currently cached.
    pub fn cached_len(&self) -> usize {
        self.lock().values.len()
    }

    /// Milestones reached so far.
    pub fn milestones(&self) -> Vec<usize> {
        self.lock().milestones.clone()
    }

    /// Milestone `n_k`, running stages until it exists.
    pub fn milestone(&self, k: usize) -> Result<usize, ThetaError> {
        let mut state = self.lock();
        state.ensure_milestones(k + 1)?;
        Ok(state.milestones[k])
    }

    pub fn ensure_milestones(&self, count: usize) -> Result<(), ThetaError> {
        self.lock().ensure_milestones(count)
    }

    pub fn ensure_len(&self, len: usize) -> Result<(), ThetaError> {
        self.lock().ensure_len(len)
    }

    /// Frozen copy of the first `len` values and the milestones inside them.
    pub fn freeze(&self, len: usize) -> Result<Row, ThetaError> {
        let mut state = self.lock();
        state.ensure_len(len)?;
        let values = state.values[..len].to_vec();
        let milestones = state.milestones.iter().copied().filter(|&m| m < len).collect();
        let provenance = state.provenance.clone();
        drop(state);
        Row::frozen(provenance, values, milestones)
    }
}

impl fmt::Debug for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let state = self.lock();
        f.debug_struct("Row")
            .field("provenance", &state.provenance)
            .field("cached", &state.values.len())
            .field("milestones", &state.milestones)
            .finish()
    }
}

/// Sets up the θ-run for `(f, avoid, matched)`; requires `|matched| = |f|`.
pub fn theta_new(target: Vec<Rational>, avoid: Vec<Row>, matched: Vec<Row>) -> Result<Row, ThetaError> {
    Ok(Row::theta(ThetaInputs::new(target, avoid, matched)?))
}

/// What [`check_lemma_conclusions`] established.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub horizon: usize,
    /// Milestones at or below the horizon.
    pub milestones: Vec<usize>,
    /// `(k, n_k, f(k))` for each target entry.
    pub cutoffs: Vec<(usize, usize, Rational)>,
}

/// Checks every guarantee of a live θ-run on `[0, horizon]`, after extending
/// it to at least `min_milestones` milestones.
pub fn check_lemma_conclusions(row: &Row, horizon: usize, min_milestones: usize) -> Result<LemmaReport, ThetaError> {
    let inputs = row.inputs().ok_or_else(|| ThetaError::BadMilestones {
        row: row.provenance(),
        detail: "frozen rows carry no θ inputs; use check_conclusions_against".to_string(),
    })?;
    row.ensure_len(horizon + 1)?;
    row.ensure_milestones(min_milestones)?;
    check_conclusions_against(&inputs, row, horizon, min_milestones)
}

/// As [`check_lemma_conclusions`], but with the inputs given explicitly so
/// that any row, including a tampered copy, can be checked against them.
pub fn check_conclusions_against(
    inputs: &ThetaInputs,
    row: &Row,
    horizon: usize,
    min_milestones: usize,
) -> Result<LemmaReport, ThetaError> {
    let fail = |conclusion, index, position, detail: String| {
        ThetaError::Conclusion(LemmaViolation {
            conclusion,
            index,
            position,
            detail,
        })
    };

    let theta = row.prefix(horizon + 1)?;
    let milestones: Vec<usize> = row.milestones().into_iter().filter(|&m| m <= horizon).collect();

    // (5)
    if let Some(w) = milestones.windows(2).find(|w| w[0] >= w[1]) {
        return Err(fail(Conclusion::Milestones, 0, Some(w[1]), "milestones not strictly increasing".into()));
    }
    for (k, &n) in milestones.iter().enumerate() {
        if !theta[n].is_one() {
            return Err(fail(Conclusion::Milestones, k, Some(n), format!("value {} at milestone", theta[n])));
        }
    }
    if milestones.len() < min_milestones {
        return Err(fail(
            Conclusion::Milestones,
            milestones.len(),
            None,
            format!("{} milestones within horizon, {min_milestones} required", milestones.len()),
        ));
    }
    let bound = |conclusion, m: usize| match milestones.get(m) {
        Some(&n) => Ok(n),
        None => Err(fail(conclusion, m, None, "no milestone within horizon".into())),
    };

    // (1)
    let mut cutoffs = Vec::with_capacity(inputs.target.len());
    for (k, (target, matched)) in inputs.target.iter().zip(&inputs.matched).enumerate() {
        let n_k = bound(Conclusion::SumIdentity, k)?;
        let other = matched.prefix(horizon + 1)?;
        let mut sum = Rational::zero();
        for l in 0..=n_k {
            sum += &(&theta[l] * &other[l]);
        }
        if &sum != target {
            return Err(fail(Conclusion::SumIdentity, k, Some(n_k), format!("sum up to cutoff is {sum}, target {target}")));
        }
        for l in n_k + 1..=horizon {
            if !theta[l].is_zero() && !other[l].is_zero() {
                return Err(fail(Conclusion::SumIdentity, k, Some(l), format!("nonzero term {} * {} past cutoff {n_k}", theta[l], other[l])));
            }
        }
        cutoffs.push((k, n_k, sum));
    }

    // (2), (3)
    for (conclusion, rows) in [(Conclusion::MatchedOverlap, &inputs.matched), (Conclusion::AvoidedOverlap, &inputs.avoid)] {
        for (m, other) in rows.iter().enumerate() {
            let n_m = bound(conclusion, m)?;
            let other = other.prefix(horizon + 1)?;
            if let Some(l) = (n_m + 1..=horizon).find(|&l| !theta[l].is_zero() && !other[l].is_zero()) {
                return Err(fail(conclusion, m, Some(l), format!("shared support past milestone {n_m}")));
            }
        }
    }

    // (4)
    for (m, &n_m) in milestones.iter().enumerate() {
        if let Some(l) = ad_elements_upto(m as u64, horizon as u64)
            .map(|l| l as usize)
            .find(|&l| l > n_m && !theta[l].is_zero())
        {
            return Err(fail(Conclusion::ColumnOverlap, m, Some(l), format!("support meets x_{m} past milestone {n_m}")));
        }
    }

    Ok(LemmaReport {
        horizon,
        milestones,
        cutoffs,
    })
}
