use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BiteKey, Session};

/// One leave-one-subject-out fold, as indices into the session list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub test_subject: String,
    pub train_sessions: Vec<usize>,
    pub test_sessions: Vec<usize>,
}

/// One fold per distinct subject, ordered by subject id.
pub fn loso_split(sessions: &[Session]) -> Result<Vec<Fold>> {
    let subjects: BTreeSet<&str> = sessions.iter().map(|s| s.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(Error::TooFewSubjects(subjects.len()));
    }
    Ok(subjects
        .into_iter()
        .map(|subject| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..sessions.len()).partition(|&i| sessions[i].subject_id == subject);
            Fold {
                test_subject: subject.to_owned(),
                train_sessions: train,
                test_sessions: test,
            }
        })
        .collect())
}

/// Bites every model could use; all metrics are computed on this set.
pub fn common_subset(usable: &BTreeMap<String, BTreeSet<BiteKey>>) -> Result<BTreeSet<BiteKey>> {
    let mut sets = usable.values();
    let first = sets
        .next()
        .ok_or_else(|| Error::InvalidParams("common subset needs at least one model".into()))?;
    let common: BTreeSet<BiteKey> = sets.fold(first.clone(), |acc, s| acc.intersection(s).cloned().collect());
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(common)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldManifestEntry {
    pub test_subject: String,
    pub train_bites: Vec<BiteKey>,
    pub test_bites: Vec<BiteKey>,
}

/// Train/test bite lists per fold, written next to the metrics so subject
/// separation can be audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldManifest {
    pub model_tag: String,
    pub folds: Vec<FoldManifestEntry>,
}

/// Descriptions of every training bite belonging to its fold's test subject
/// and every test bite that does not.
pub fn audit_fold_manifest(manifest: &FoldManifest) -> Vec<String> {
    let mut violations = Vec::new();
    for fold in &manifest.folds {
        for k in fold.train_bites.iter().filter(|k| k.subject == fold.test_subject) {
            violations.push(format!("fold {}: training bite {k} from test subject", fold.test_subject));
        }
        for k in fold.test_bites.iter().filter(|k| k.subject != fold.test_subject) {
            violations.push(format!("fold {}: test bite {k} from another subject", fold.test_subject));
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(ids: &[&str]) -> BTreeSet<BiteKey> {
        ids.iter().map(|b| BiteKey::new("S", "m", b)).collect()
    }

    #[test]
    fn intersection_cases() {
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), keys(&["A", "B", "C"]));
        m.insert("b".to_string(), keys(&["B", "C", "D"]));
        assert_eq!(common_subset(&m).unwrap(), keys(&["B", "C"]));

        let mut same = BTreeMap::new();
        same.insert("a".to_string(), keys(&["A", "B"]));
        same.insert("b".to_string(), keys(&["A", "B"]));
        assert_eq!(common_subset(&same).unwrap(), keys(&["A", "B"]));

        let mut disjoint = BTreeMap::new();
        disjoint.insert("a".to_string(), keys(&["A"]));
        disjoint.insert("b".to_string(), keys(&["B"]));
        assert!(matches!(common_subset(&disjoint), Err(Error::EmptyIntersection)));
    }

    #[test]
    fn audit_flags_leaks() {
        let m = FoldManifest {
            model_tag: "x".into(),
            folds: vec![FoldManifestEntry {
                test_subject: "S1".into(),
                train_bites: vec![BiteKey::new("S1", "m", "1"), BiteKey::new("S2", "m", "1")],
                test_bites: vec![BiteKey::new("S1", "m", "2")],
            }],
        };
        assert_eq!(audit_fold_manifest(&m).len(), 1);
    }
}
