//! Axiom instances. Each renders as a linear form that is `>= 0`
//! (inequalities) or `= 0` (equalities) for every symmetric scheme.

use super::entropy::{EntropyLinComb, RandomVar, VarSet};
use super::tables::DemandTable;
use crate::model::Demand;
use crate::{int, Rational};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Axiom {
    /// `H(A) + H(B) - H(A u B) - H(A n B) >= 0`.
    Submodularity { a: VarSet, b: VarSet },
    /// `H(A u B) - H(A) >= 0`.
    Monotonicity { a: VarSet, b: VarSet },
    /// `H(S + W_{d_l}) - H(S) = 0` when `Z_l` and `X_d` are in `S`.
    Decodability { user: usize, demand: usize, set: VarSet },
    /// `H(S) - N = 0` when every file is in `S`.
    Totality { set: VarSet },
    /// `M - H(Z_l) >= 0`.
    CacheBound { user: usize },
    /// `R - H(X_d) >= 0`.
    RateBound { demand: usize },
    /// `H(W_S) - |S| = 0`.
    FileIndependence { files: VarSet },
    /// `H(pi S) - H(S) = 0`; `perm[l-1]` is the image of user `l`.
    PermSymmetry { perm: Vec<usize>, set: VarSet },
    /// `H(W_n, Z_l) - H(W_p, Z_l) = 0`.
    FileSymmetry { n: usize, p: usize, user: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomFault {
    Malformed(String),
    SymmetryOutsideTable(String),
}

fn malformed<T>(msg: impl Into<String>) -> Result<T, AxiomFault> {
    Err(AxiomFault::Malformed(msg.into()))
}

impl Axiom {
    pub fn is_equality(&self) -> bool {
        !matches!(
            self,
            Axiom::Submodularity { .. }
                | Axiom::Monotonicity { .. }
                | Axiom::CacheBound { .. }
                | Axiom::RateBound { .. }
        )
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Axiom::Submodularity { .. } => "SUB",
            Axiom::Monotonicity { .. } => "MONO",
            Axiom::Decodability { .. } => "DEC",
            Axiom::Totality { .. } => "TOT",
            Axiom::CacheBound { .. } => "CACHE",
            Axiom::RateBound { .. } => "RATE",
            Axiom::FileIndependence { .. } => "FIND",
            Axiom::PermSymmetry { .. } => "PSYM",
            Axiom::FileSymmetry { .. } => "FSYM",
        }
    }

    /// Checks side conditions against the table and returns the form.
    /// Forms that vanish identically are rejected as malformed.
    pub fn form(&self, table: &DemandTable) -> Result<EntropyLinComb, AxiomFault> {
        let form = self.raw_form(table)?;
        if form.is_zero() {
            return malformed(format!("{} instance is identically zero", self.keyword()));
        }
        Ok(form)
    }

    /// The form without the vanishing check; used by generators to skip
    /// steps that have nothing to do.
    pub(crate) fn raw_form(&self, table: &DemandTable) -> Result<EntropyLinComb, AxiomFault> {
        let (n, k) = (table.n, table.k);
        let mut f = EntropyLinComb::new();
        match self {
            Axiom::Submodularity { a, b } => {
                check_vars(a, table)?;
                check_vars(b, table)?;
                f.add_term(a, int(1));
                f.add_term(b, int(1));
                f.add_term(&a.union(b), int(-1));
                f.add_term(&a.intersection(b), int(-1));
            }
            Axiom::Monotonicity { a, b } => {
                check_vars(a, table)?;
                check_vars(b, table)?;
                f.add_term(&a.union(b), int(1));
                f.add_term(a, int(-1));
            }
            Axiom::Decodability { user, demand, set } => {
                check_vars(set, table)?;
                check_user(*user, k)?;
                check_demand(*demand, k)?;
                if !set.contains(RandomVar::Cache(*user)) || !set.contains(RandomVar::Bcast(*demand)) {
                    return malformed(format!("DEC needs Z{user} and X{demand} in {set}"));
                }
                let file = table.demand(*demand).file_of(*user);
                f.add_term(&set.clone().with(RandomVar::File(file)), int(1));
                f.add_term(set, int(-1));
            }
            Axiom::Totality { set } => {
                check_vars(set, table)?;
                if !(1..=n).all(|w| set.contains(RandomVar::File(w))) {
                    return malformed(format!("TOT needs every file in {set}"));
                }
                f.add_term(set, int(1));
                f.const_abs = -int(n as i64);
            }
            Axiom::CacheBound { user } => {
                check_user(*user, k)?;
                f.const_m = int(1);
                f.add_term(&VarSet::new().with_cache(*user), int(-1));
            }
            Axiom::RateBound { demand } => {
                check_demand(*demand, k)?;
                f.const_r = int(1);
                f.add_term(&VarSet::new().with_bcasts(&[*demand]), int(-1));
            }
            Axiom::FileIndependence { files } => {
                check_vars(files, table)?;
                if files.is_empty() || files.file_ids().count() != files.len() {
                    return malformed(format!("FIND needs a nonempty set of files, got {files}"));
                }
                f.add_term(files, int(1));
                f.const_abs = -int(files.len() as i64);
            }
            Axiom::PermSymmetry { perm, set } => {
                check_vars(set, table)?;
                check_perm(perm, k)?;
                let image = permute_set(perm, set, table)?;
                f.add_term(&image, int(1));
                f.add_term(set, int(-1));
            }
            Axiom::FileSymmetry { n: a, p, user } => {
                check_file(*a, n)?;
                check_file(*p, n)?;
                check_user(*user, k)?;
                f.add_term(&VarSet::files([*a]).with_cache(*user), int(1));
                f.add_term(&VarSet::files([*p]).with_cache(*user), int(-1));
            }
        }
        Ok(f)
    }
}

fn check_user(l: usize, k: usize) -> Result<(), AxiomFault> {
    if (1..=k).contains(&l) {
        Ok(())
    } else {
        malformed(format!("user {l} outside 1..={k}"))
    }
}

fn check_demand(d: usize, k: usize) -> Result<(), AxiomFault> {
    if (1..=k).contains(&d) {
        Ok(())
    } else {
        malformed(format!("demand id {d} outside the table"))
    }
}

fn check_file(w: usize, n: usize) -> Result<(), AxiomFault> {
    if (1..=n).contains(&w) {
        Ok(())
    } else {
        malformed(format!("file {w} outside 1..={n}"))
    }
}

fn check_vars(set: &VarSet, table: &DemandTable) -> Result<(), AxiomFault> {
    for v in set.iter() {
        match *v {
            RandomVar::File(w) => check_file(w, table.n)?,
            RandomVar::Cache(l) => check_user(l, table.k)?,
            RandomVar::Bcast(d) => check_demand(d, table.demands.len().max(table.k))?,
        }
    }
    Ok(())
}

fn check_perm(perm: &[usize], k: usize) -> Result<(), AxiomFault> {
    let mut seen = vec![false; k + 1];
    if perm.len() != k {
        return malformed(format!("permutation has {} entries, expected {k}", perm.len()));
    }
    for &p in perm {
        if p == 0 || p > k || seen[p] {
            return malformed("not a permutation of the users");
        }
        seen[p] = true;
    }
    Ok(())
}

/// Relabels users: `Z_l -> Z_{pi(l)}`, `X_d -> X_{pi d}`; files are fixed.
pub fn permute_set(perm: &[usize], set: &VarSet, table: &DemandTable) -> Result<VarSet, AxiomFault> {
    let mut out = VarSet::new();
    for &v in set.iter() {
        out = out.with(match v {
            RandomVar::File(_) => v,
            RandomVar::Cache(l) => RandomVar::Cache(perm[l - 1]),
            RandomVar::Bcast(d) => {
                let image: Demand = table.demand(d).permuted(perm);
                let id = table.id_of(&image).ok_or_else(|| {
                    AxiomFault::SymmetryOutsideTable(format!("image of d_{d} is ({image}), not in the table"))
                })?;
                RandomVar::Bcast(id)
            }
        });
    }
    Ok(out)
}

/// The transposition of users `i` and `j` on `K` users.
pub fn swap(i: usize, j: usize, k: usize) -> Vec<usize> {
    (1..=k)
        .map(|l| if l == i { j } else if l == j { i } else { l })
        .collect()
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.keyword())?;
        match self {
            Axiom::Submodularity { a, b } | Axiom::Monotonicity { a, b } => write!(f, " {a} {b}"),
            Axiom::Decodability { user, demand, set } => write!(f, " {user} {demand} {set}"),
            Axiom::Totality { set } => write!(f, " {set}"),
            Axiom::CacheBound { user } => write!(f, " {user}"),
            Axiom::RateBound { demand } => write!(f, " {demand}"),
            Axiom::FileIndependence { files } => write!(f, " {files}"),
            Axiom::PermSymmetry { perm, set } => {
                let p: Vec<String> = perm.iter().map(ToString::to_string).collect();
                write!(f, " {} {set}", p.join(","))
            }
            Axiom::FileSymmetry { n, p, user } => write!(f, " {n} {p} {user}"),
        }
    }
}

/// Multiplier as written in certificates.
pub type Multiplier = Rational;
