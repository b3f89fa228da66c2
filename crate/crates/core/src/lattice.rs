//! Boolean-lattice combinatorics over the input index set `D = {1, ..., d}`.
//!
//! Every matrix, table and report in the crate is indexed by subsets in one
//! canonical order: cardinality ascending, ties broken by the numeric value of
//! the bit mask. [`SubsetMask`]'s `Ord` implementation is that order, so a
//! `BTreeMap<SubsetMask, _>` iterates canonically.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported number of inputs. All `2^d` subsets are materialized.
pub const MAX_INPUTS: usize = 12;

/// A subset of the input indices, one bit per input (bit `i` is input `i + 1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SubsetMask(u16);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn from_bits(bits: u16) -> Self {
        SubsetMask(bits)
    }

    /// The full index set `D` for `d` inputs.
    pub fn full(d: usize) -> Self {
        debug_assert!(d <= MAX_INPUTS);
        SubsetMask(((1u32 << d) - 1) as u16)
    }

    /// Builds a mask from 0-based input positions.
    pub fn from_positions<I: IntoIterator<Item = usize>>(positions: I) -> Self {
        SubsetMask(positions.into_iter().fold(0u16, |acc, i| acc | (1 << i)))
    }

    /// Builds a mask from 1-based input labels, as they appear in reports.
    pub fn from_labels<I: IntoIterator<Item = usize>>(labels: I) -> Self {
        Self::from_positions(labels.into_iter().map(|i| i - 1))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, position: usize) -> bool {
        self.0 & (1 << position) != 0
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset_of(self, other: SubsetMask) -> bool {
        self != other && self.is_subset_of(other)
    }

    /// True when one of the two subsets contains the other.
    pub fn is_comparable_with(self, other: SubsetMask) -> bool {
        self.is_subset_of(other) || other.is_subset_of(self)
    }

    pub fn intersection(self, other: SubsetMask) -> Self {
        SubsetMask(self.0 & other.0)
    }

    pub fn union(self, other: SubsetMask) -> Self {
        SubsetMask(self.0 | other.0)
    }

    /// `D \ self` for `d` inputs.
    pub fn complement(self, d: usize) -> Self {
        SubsetMask(Self::full(d).0 & !self.0)
    }

    /// 0-based positions of the members, ascending.
    pub fn positions(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..16).filter(move |i| bits & (1 << i) != 0)
    }

    /// 1-based labels of the members, ascending.
    pub fn labels(self) -> Vec<usize> {
        self.positions().map(|i| i + 1).collect()
    }

    /// All subsets of `self` (including `self` and the empty set), in
    /// canonical order.
    pub fn subsets(self) -> Vec<SubsetMask> {
        let mut out = Vec::with_capacity(1 << self.len());
        let mut sub = self.0;
        loop {
            out.push(SubsetMask(sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & self.0;
        }
        out.sort();
        out
    }

    /// All proper subsets of `self`, i.e. `P(A) \ {A}`, in canonical order.
    pub fn proper_subsets(self) -> Vec<SubsetMask> {
        let mut out = self.subsets();
        out.pop();
        out
    }

    /// `(-1)^(|self| - |sub|)` for `sub ⊆ self`.
    pub fn mobius_sign(self, sub: SubsetMask) -> f64 {
        if (self.len() - sub.len()).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then(self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, label) in self.labels().into_iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{label}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.labels())
    }
}

fn check_input_count(d: usize) -> Result<()> {
    if (1..=MAX_INPUTS).contains(&d) {
        Ok(())
    } else {
        Err(Error::InputCountOutOfRange(d))
    }
}

/// All `2^d` subsets of `{1, ..., d}` in canonical order.
pub fn enumerate_subsets(d: usize) -> Result<Vec<SubsetMask>> {
    check_input_count(d)?;
    Ok(SubsetMask::full(d).subsets())
}

/// `Σ_{B ⊆ A} (-1)^{|A|-|B|} values[B]`.
pub fn mobius_alternating_sum(
    values: &BTreeMap<SubsetMask, Vec<f64>>,
    a: SubsetMask,
) -> Result<Vec<f64>> {
    let mut acc: Option<Vec<f64>> = None;
    for b in a.subsets() {
        let v = values.get(&b).ok_or(Error::MissingSubset(b))?;
        let sign = a.mobius_sign(b);
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| sign * x).collect()),
            Some(acc) => {
                if acc.len() != v.len() {
                    return Err(Error::LengthMismatch {
                        expected: acc.len(),
                        found: v.len(),
                    });
                }
                acc.iter_mut().zip(v).for_each(|(s, x)| *s += sign * x);
            }
        }
    }
    // a.subsets() always contains at least `a` itself.
    Ok(acc.unwrap_or_default())
}

/// Subsets ordered with `a`: its down-set together with its up-set.
pub fn comparables(a: SubsetMask, d: usize) -> Vec<SubsetMask> {
    SubsetMask::full(d)
        .subsets()
        .into_iter()
        .filter(|b| a.is_comparable_with(*b))
        .collect()
}

/// Subsets neither contained in nor containing `a`.
pub fn uncomparables(a: SubsetMask, d: usize) -> Vec<SubsetMask> {
    SubsetMask::full(d)
        .subsets()
        .into_iter()
        .filter(|b| !a.is_comparable_with(*b))
        .collect()
}
