//! Row and block index selection.
//!
//! All rules work on the residual vector `F(x_k)`; only squared magnitudes
//! matter, so the sign convention of the residual is irrelevant.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

/// Strictly increasing set of row positions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Wraps a list of rows, sorting and deduplicating it.
    pub fn from_unsorted(mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        Self(rows)
    }

    pub fn singleton(i: usize) -> Self {
        Self(alloc::vec![i])
    }

    pub fn as_slice(&self) -> &[usize] {
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

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// How a method picks its row or block at each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    /// `{i : |r_i|^2 >= theta * max_j |r_j|^2}`.
    GreedyThreshold(f64),
    /// Greedy threshold relaxed toward the mean squared residual.
    Capped(f64),
    /// First index attaining `max |r_i|`.
    MaxResidual,
    /// Uniformly random row.
    UniformRandom,
    /// Greedy threshold set, then a row sampled with probability `∝ r_i^2`.
    GreedyRandomized(f64),
}

impl SelectionRule {
    pub fn theta(&self) -> Option<f64> {
        match *self {
            Self::GreedyThreshold(t) | Self::Capped(t) | Self::GreedyRandomized(t) => Some(t),
            Self::MaxResidual | Self::UniformRandom => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.theta() {
            Some(t) if !(t > 0.0 && t <= 1.0) => Err(Error::InvalidConfig("theta must lie in (0, 1]")),
            _ => Ok(()),
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig("theta must lie in (0, 1]"))
    }
}

fn max_sq(r: &[f64]) -> Result<f64> {
    let max = r.iter().fold(0.0_f64, |acc, v| acc.max(v * v));
    if max > 0.0 {
        Ok(max)
    } else {
        Err(Error::ZeroResidual)
    }
}

/// Greedy index set `J_k = {i : |r_i|^2 >= theta * max_j |r_j|^2}`.
pub fn greedy_threshold_set(r: &[f64], theta: f64) -> Result<IndexSet> {
    check_theta(theta)?;
    let threshold = theta * max_sq(r)?;
    Ok(IndexSet(
        r.iter()
            .enumerate()
            .filter(|(_, v)| *v * *v >= threshold)
            .map(|(i, _)| i)
            .collect(),
    ))
}

/// Capped index set
/// `{i : |r_i|^2 >= theta * max_j |r_j|^2 + (1 - theta) * ||r||^2 / m}`.
pub fn capped_set(r: &[f64], theta: f64) -> Result<IndexSet> {
    check_theta(theta)?;
    let max = max_sq(r)?;
    let mean = r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64;
    // The argmax qualifies in exact arithmetic since max >= mean; the clamp
    // keeps it in the set when the sum rounds above m * max.
    let threshold = f64::min(theta * max + (1.0 - theta) * mean, max);
    Ok(IndexSet(
        r.iter()
            .enumerate()
            .filter(|(_, v)| *v * *v >= threshold)
            .map(|(i, _)| i)
            .collect(),
    ))
}

/// Smallest index attaining `max_i |r_i|`.
pub fn max_residual_index(r: &[f64]) -> Result<usize> {
    let mut best = 0;
    let mut best_val = 0.0_f64;
    for (i, v) in r.iter().enumerate() {
        if v.abs() > best_val {
            best = i;
            best_val = v.abs();
        }
    }
    if best_val > 0.0 {
        Ok(best)
    } else {
        Err(Error::ZeroResidual)
    }
}

/// Picks a single row under `rule`, advancing `rng` for the randomized rules.
///
/// Block rules degrade to their first (smallest) member.
pub fn sample_index<R: Rng + ?Sized>(r: &[f64], rule: SelectionRule, rng: &mut R) -> Result<usize> {
    if r.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroResidual);
    }
    match rule {
        SelectionRule::MaxResidual => max_residual_index(r),
        SelectionRule::UniformRandom => Ok(rng.random_range(0..r.len())),
        SelectionRule::GreedyThreshold(theta) => Ok(greedy_threshold_set(r, theta)?.0[0]),
        SelectionRule::Capped(theta) => Ok(capped_set(r, theta)?.0[0]),
        SelectionRule::GreedyRandomized(theta) => {
            let set = greedy_threshold_set(r, theta)?;
            if set.len() == 1 {
                return Ok(set.0[0]);
            }
            let total: f64 = set.iter().map(|i| r[i] * r[i]).sum();
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            for i in set.iter() {
                acc += r[i] * r[i];
                if target < acc {
                    return Ok(i);
                }
            }
            Ok(*set.0.last().unwrap())
        }
    }
}
