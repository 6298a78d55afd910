//! Canonical deadline multisets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Caller-visible source identifier: the position of the source in the caller's input.
pub type SourceId = usize;

/// One distinct deadline value and how many sources carry it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DistinctValue {
    pub value: u64,
    pub count: usize,
}

/// AoI deadlines of a set of sources, sorted ascending.
///
/// Sorting is stable with respect to source ids, so `ids()[k]` is the caller id of the
/// k-th smallest deadline and equal deadlines appear in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AoiConstraints {
    deadlines: Vec<u64>,
    ids: Vec<SourceId>,
    summary: Vec<DistinctValue>,
}

impl AoiConstraints {
    /// Deadlines in caller order; source `i` gets id `i`.
    pub fn new<I: IntoIterator<Item = u64>>(deadlines: I) -> Result<Self> {
        Self::from_sources(deadlines.into_iter().enumerate())
    }

    /// Explicit `(id, deadline)` pairs, e.g. a subset of a larger instance.
    pub fn from_sources<I: IntoIterator<Item = (SourceId, u64)>>(sources: I) -> Result<Self> {
        let mut pairs: Vec<(u64, SourceId)> = Vec::new();
        for (id, d) in sources {
            if d == 0 {
                return Err(Error::InvalidDeadline { source_id: id });
            }
            pairs.push((d, id));
        }
        pairs.sort_unstable();
        let mut seen = HashMap::with_capacity(pairs.len());
        for &(_, id) in &pairs {
            if seen.insert(id, ()).is_some() {
                return Err(Error::DuplicateSource(id));
            }
        }

        let mut summary: Vec<DistinctValue> = Vec::new();
        for &(d, _) in &pairs {
            match summary.last_mut() {
                Some(last) if last.value == d => last.count += 1,
                _ => summary.push(DistinctValue { value: d, count: 1 }),
            }
        }
        Ok(AoiConstraints {
            deadlines: pairs.iter().map(|p| p.0).collect(),
            ids: pairs.iter().map(|p| p.1).collect(),
            summary,
        })
    }

    pub fn len(&self) -> usize {
        self.deadlines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deadlines.is_empty()
    }

    /// Deadlines, ascending.
    pub fn deadlines(&self) -> &[u64] {
        &self.deadlines
    }

    /// Source ids aligned with [`deadlines`](Self::deadlines).
    pub fn ids(&self) -> &[SourceId] {
        &self.ids
    }

    /// Distinct values ascending with their occurrence counts.
    pub fn summary(&self) -> &[DistinctValue] {
        &self.summary
    }

    pub fn distinct_values(&self) -> impl Iterator<Item = u64> + '_ {
        self.summary.iter().map(|s| s.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SourceId, u64)> + '_ {
        self.ids.iter().copied().zip(self.deadlines.iter().copied())
    }

    /// Exact `∑ 1/d_n`.
    pub fn load(&self) -> Rational {
        self.summary
            .iter()
            .fold(Rational::from_integer(0), |acc, s| {
                acc + Rational::new(s.count as i128, s.value as i128)
            })
    }

    pub fn deadline_map(&self) -> HashMap<SourceId, u64> {
        self.iter().collect()
    }

    /// The sources with the given ids. Unknown ids are ignored.
    pub fn subset(&self, ids: &[SourceId]) -> Self {
        let map = self.deadline_map();
        let pairs: Vec<(SourceId, u64)> = ids
            .iter()
            .filter_map(|id| map.get(id).map(|&d| (*id, d)))
            .collect();
        // ids are unique and deadlines valid, so this cannot fail.
        Self::from_sources(pairs).expect("subset of valid constraints")
    }

    /// All sources except those in `ids`.
    pub fn without(&self, ids: &[SourceId]) -> Self {
        let drop: std::collections::HashSet<SourceId> = ids.iter().copied().collect();
        Self::from_sources(self.iter().filter(|(id, _)| !drop.contains(id)))
            .expect("subset of valid constraints")
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Empty)
        } else {
            Ok(())
        }
    }
}

/// On-disk constraints format: `{"d": [...], "id": "..."}`. Source `i` is `d[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsFile {
    pub d: Vec<u64>,
    #[serde(default)]
    pub id: String,
}

impl ConstraintsFile {
    pub fn new(id: impl Into<String>, d: &AoiConstraints) -> Self {
        let mut by_id: Vec<(SourceId, u64)> = d.iter().collect();
        by_id.sort_unstable();
        ConstraintsFile {
            d: by_id.into_iter().map(|p| p.1).collect(),
            id: id.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("constraints serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameters(format!("constraints JSON: {e}")))
    }

    pub fn constraints(&self) -> Result<AoiConstraints> {
        if self.d.is_empty() {
            return Err(Error::InvalidParameters("d must not be empty".into()));
        }
        if let Some(i) = self.d.iter().position(|&x| x == 0) {
            return Err(Error::InvalidParameters(format!(
                "d[{i}] must be a positive integer"
            )));
        }
        AoiConstraints::new(self.d.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_summarizes() {
        let d = AoiConstraints::new([6, 3, 5, 6]).unwrap();
        assert_eq!(d.deadlines(), &[3, 5, 6, 6]);
        assert_eq!(d.ids(), &[1, 2, 0, 3]);
        assert_eq!(
            d.summary(),
            &[
                DistinctValue { value: 3, count: 1 },
                DistinctValue { value: 5, count: 1 },
                DistinctValue { value: 6, count: 2 },
            ]
        );
        let total: usize = d.summary().iter().map(|s| s.count).sum();
        assert_eq!(total, d.len());
    }

    #[test]
    fn rejects_zero_and_duplicates() {
        assert_eq!(
            AoiConstraints::new([3, 0]).unwrap_err(),
            Error::InvalidDeadline { source_id: 1 }
        );
        assert_eq!(
            AoiConstraints::from_sources([(4, 2), (4, 3)]).unwrap_err(),
            Error::DuplicateSource(4)
        );
    }

    #[test]
    fn subset_keeps_ids() {
        let d = AoiConstraints::new([3, 5, 5, 7]).unwrap();
        let s = d.subset(&[3, 1]);
        assert_eq!(s.ids(), &[1, 3]);
        assert_eq!(s.deadlines(), &[5, 7]);
        let w = d.without(&[3, 1]);
        assert_eq!(w.ids(), &[0, 2]);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"d":[6,3,5],"id":"x"}"#;
        let file = ConstraintsFile::from_json(text).unwrap();
        let d = file.constraints().unwrap();
        assert_eq!(d.deadlines(), &[3, 5, 6]);
        assert_eq!(ConstraintsFile::new("x", &d).to_json(), text);
        let err = ConstraintsFile::from_json(r#"{"d":[3,0]}"#)
            .unwrap()
            .constraints()
            .unwrap_err();
        assert!(err.to_string().contains("d[1]"));
        let err = ConstraintsFile::from_json(r#"{"deadlines":[3]}"#).unwrap_err();
        assert!(err.to_string().contains("deadlines"));
    }
}
