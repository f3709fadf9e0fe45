//! Joint-entropy terms and exact linear combinations of them.

use crate::{fmt_ratio, Rational};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// `W_n`, `Z_l` or `X_d` with `d` a demand-table id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RandomVar {
    File(usize),
    Cache(usize),
    Bcast(usize),
}

impl fmt::Display for RandomVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RandomVar::File(n) => write!(f, "W{n}"),
            RandomVar::Cache(l) => write!(f, "Z{l}"),
            RandomVar::Bcast(d) => write!(f, "X{d}"),
        }
    }
}

impl RandomVar {
    pub fn parse(s: &str) -> Option<Self> {
        let (head, idx) = s.split_at(1.min(s.len()));
        let idx: usize = idx.parse().ok()?;
        match head {
            "W" => Some(RandomVar::File(idx)),
            "Z" => Some(RandomVar::Cache(idx)),
            "X" => Some(RandomVar::Bcast(idx)),
            _ => None,
        }
    }
}

/// A set of variables; as a term it stands for their joint entropy.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarSet(BTreeSet<RandomVar>);

pub type EntropyTerm = VarSet;

impl VarSet {
    pub fn new() -> Self {
        VarSet(BTreeSet::new())
    }

    pub fn files(ids: impl IntoIterator<Item = usize>) -> Self {
        VarSet(ids.into_iter().map(RandomVar::File).collect())
    }

    pub fn with_files(mut self, ids: impl IntoIterator<Item = usize>) -> Self {
        self.0.extend(ids.into_iter().map(RandomVar::File));
        self
    }

    pub fn with_cache(mut self, l: usize) -> Self {
        self.0.insert(RandomVar::Cache(l));
        self
    }

    pub fn with_bcasts<'a>(mut self, ids: impl IntoIterator<Item = &'a usize>) -> Self {
        self.0.extend(ids.into_iter().map(|&d| RandomVar::Bcast(d)));
        self
    }

    pub fn with(mut self, v: RandomVar) -> Self {
        self.0.insert(v);
        self
    }

    pub fn contains(&self, v: RandomVar) -> bool {
        self.0.contains(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RandomVar> {
        self.0.iter()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn file_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().filter_map(|v| match v {
            RandomVar::File(n) => Some(*n),
            _ => None,
        })
    }

    pub fn map(&self, f: impl Fn(RandomVar) -> RandomVar) -> VarSet {
        VarSet(self.0.iter().map(|&v| f(v)).collect())
    }
}

impl FromIterator<RandomVar> for VarSet {
    fn from_iter<I: IntoIterator<Item = RandomVar>>(iter: I) -> Self {
        VarSet(iter.into_iter().collect())
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `sum c_S H(S) + m M + r R + c`. Zero coefficients are never stored and
/// `H(empty) = 0` is dropped on insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntropyLinComb {
    terms: BTreeMap<VarSet, Rational>,
    pub const_m: Rational,
    pub const_r: Rational,
    pub const_abs: Rational,
}

impl EntropyLinComb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, set: &VarSet, coeff: Rational) {
        if set.is_empty() || coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(set.clone()).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(set);
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &EntropyLinComb, scale: Rational) {
        for (s, &c) in &other.terms {
            self.add_term(s, c * scale);
        }
        self.const_m += other.const_m * scale;
        self.const_r += other.const_r * scale;
        self.const_abs += other.const_abs * scale;
    }

    pub fn coeff(&self, set: &VarSet) -> Rational {
        self.terms.get(set).copied().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VarSet, &Rational)> {
        self.terms.iter()
    }

    pub fn has_entropy_terms(&self) -> bool {
        !self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.const_m.is_zero() && self.const_r.is_zero() && self.const_abs.is_zero()
    }
}

impl fmt::Display for EntropyLinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> =
            self.terms.iter().map(|(s, c)| format!("{} H{}", fmt_ratio(c), s)).collect();
        for (c, name) in [(self.const_m, " M"), (self.const_r, " R"), (self.const_abs, "")] {
            if !c.is_zero() {
                parts.push(format!("{}{name}", fmt_ratio(&c)));
            }
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}
