//! `Background(used, q)`: which prior-knowledge propositions, used together
//! with observations, produced the conclusion `q`.
//!
//! Propositions are opaque strings here. The caller attests that `psi`
//! entails `q`; this module only checks the rule's side conditions, using
//! `delta` itself in place of its deductive closure.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundFact {
    pub used_background: BTreeSet<String>,
    pub conclusion: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackgroundError {
    #[error("premise `{0}` is neither background knowledge nor an observation")]
    UnknownPremise(String),
    #[error("no background proposition was used")]
    NoBackgroundUsed,
    #[error("observations add nothing to the background knowledge")]
    NoNovelObservation,
}

/// `delta`: background knowledge; `omega`: observations; `psi`: premises
/// actually used to derive `q`.
pub fn derive_background(
    delta: &BTreeSet<String>,
    omega: &BTreeSet<String>,
    psi: &BTreeSet<String>,
    q: &str,
) -> Result<BackgroundFact, BackgroundError> {
    if let Some(p) = psi.iter().find(|p| !delta.contains(*p) && !omega.contains(*p)) {
        return Err(BackgroundError::UnknownPremise(p.clone()));
    }
    if omega.is_subset(delta) {
        return Err(BackgroundError::NoNovelObservation);
    }
    let used: BTreeSet<String> = delta.intersection(psi).cloned().collect();
    if used.is_empty() {
        return Err(BackgroundError::NoBackgroundUsed);
    }
    Ok(BackgroundFact {
        used_background: used,
        conclusion: q.to_string(),
    })
}
