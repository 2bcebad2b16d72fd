use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonempty, sorted set of subsystem positions selecting a marginal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionLabel(Vec<usize>);

impl PartitionLabel {
    /// Builds a label over a system with `n_parts` subsystems.
    pub fn new(indices: impl IntoIterator<Item = usize>, n_parts: usize) -> Result<Self> {
        let mut idx: Vec<usize> = indices.into_iter().collect();
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return Err(Error::InvalidPartition("empty subsystem set".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= n_parts) {
            return Err(Error::InvalidPartition(format!(
                "subsystem {bad} out of range for {n_parts} parts"
            )));
        }
        Ok(Self(idx))
    }

    pub fn single(index: usize, n_parts: usize) -> Result<Self> {
        Self::new([index], n_parts)
    }

    /// All subsystems `0..n_parts`.
    pub fn all(n_parts: usize) -> Self {
        assert!(n_parts > 0, "a system has at least one part");
        Self((0..n_parts).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        !self.0.iter().any(|&i| other.contains(i))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut idx = self.0.clone();
        idx.extend_from_slice(&other.0);
        idx.sort_unstable();
        idx.dedup();
        Self(idx)
    }

    /// Letter name (`A`, `B`, `AB`, ...) used in tables.
    pub fn letters(&self) -> String {
        self.0
            .iter()
            .map(|&i| {
                if i < 26 {
                    char::from(b'A' + i as u8).to_string()
                } else {
                    format!("[{i}]")
                }
            })
            .collect()
    }
}

impl fmt::Display for PartitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        if self.0.iter().all(|&i| i < 10) {
            write!(f, "{}", parts.concat())
        } else {
            write!(f, "{}", parts.join(","))
        }
    }
}

/// Parses a pipe-separated partition spec such as `0|1|2` or `01|2`.
///
/// Inside a group, digits are individual subsystem indices unless the group
/// contains commas, in which case it is split on them (`0,11|12`).
pub fn parse_partition_spec(spec: &str, n_parts: usize) -> Result<Vec<PartitionLabel>> {
    let mut out = Vec::new();
    for group in spec.split('|') {
        let group = group.trim();
        if group.is_empty() {
            return Err(Error::InvalidPartition(format!("empty group in `{spec}`")));
        }
        let indices: Vec<usize> = if group.contains(',') {
            group
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidPartition(format!("bad index `{s}` in `{spec}`")))
                })
                .collect::<Result<_>>()?
        } else {
            group
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::InvalidPartition(format!("bad index `{c}` in `{spec}`")))
                })
                .collect::<Result<_>>()?
        };
        out.push(PartitionLabel::new(indices, n_parts)?);
    }
    for (i, a) in out.iter().enumerate() {
        for b in &out[i + 1..] {
            if !a.is_disjoint(b) {
                return Err(Error::InvalidPartition(format!("groups {a} and {b} overlap")));
            }
        }
    }
    Ok(out)
}

/// Checks that `parts` are pairwise disjoint and cover `0..n_parts`.
pub fn check_covering(parts: &[PartitionLabel], n_parts: usize) -> Result<()> {
    let mut seen = vec![false; n_parts];
    for p in parts {
        for &i in p.indices() {
            if i >= n_parts {
                return Err(Error::InvalidPartition(format!("subsystem {i} out of range")));
            }
            if seen[i] {
                return Err(Error::InvalidPartition(format!("subsystem {i} appears twice")));
            }
            seen[i] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidPartition(format!("subsystem {missing} not covered")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_out_of_range() {
        assert!(PartitionLabel::new([], 3).is_err());
        assert!(PartitionLabel::new([3], 3).is_err());
        assert_eq!(PartitionLabel::new([2, 0, 2], 3).unwrap().indices(), &[0, 2]);
    }

    #[test]
    fn parses_pipe_groups() {
        let parts = parse_partition_spec("01|2", 3).unwrap();
        assert_eq!(parts[0].indices(), &[0, 1]);
        assert_eq!(parts[1].indices(), &[2]);
        assert_eq!(parts[0].letters(), "AB");
        let parts = parse_partition_spec("0,11|12", 13).unwrap();
        assert_eq!(parts[0].indices(), &[0, 11]);
        assert!(parse_partition_spec("0|0", 2).is_err());
        assert!(parse_partition_spec("0||1", 2).is_err());
        assert!(parse_partition_spec("0|x", 2).is_err());
    }

    #[test]
    fn covering_check() {
        let parts = parse_partition_spec("0|12", 3).unwrap();
        assert!(check_covering(&parts, 3).is_ok());
        let parts = parse_partition_spec("0|1", 3).unwrap();
        assert!(check_covering(&parts, 3).is_err());
    }
}
