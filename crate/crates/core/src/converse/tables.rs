//! Cyclic demand tables and the index sets that the bound proofs walk over.
//!
//! Demand ids are `1..=K`; id `l` is the demand `d_l`, the `(l-1)`-fold
//! cyclic left shift of `d_1`. Index ranges that leave `1..=K` are clipped.

use super::ConverseError;
use crate::model::Demand;
use crate::tradeoff::{in_case1_range, in_case2_range};
use std::collections::BTreeSet;

pub type DemandIds = BTreeSet<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    ManyFiles,
    FewFiles,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::ManyFiles => 1,
            Case::FewFiles => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandTable {
    pub n: usize,
    pub k: usize,
    pub case: Case,
    pub demands: Vec<Demand>,
}

impl DemandTable {
    fn cyclic(n: usize, k: usize, case: Case, first: Vec<usize>) -> Self {
        let demands = (0..k)
            .map(|shift| Demand::from_vec((0..k).map(|u| first[(u + shift) % k]).collect()))
            .collect();
        DemandTable { n, k, case, demands }
    }

    pub fn demand(&self, id: usize) -> &Demand {
        &self.demands[id - 1]
    }

    /// Id of `b_l`: the demand in which user `l` asks for `W_N`.
    pub fn b(&self, l: usize) -> usize {
        if l <= self.n {
            self.n - l + 1
        } else {
            self.k + self.n - l + 1
        }
    }

    pub fn id_of(&self, d: &Demand) -> Option<usize> {
        self.demands.iter().position(|x| x == d).map(|p| p + 1)
    }
}

/// `d_1 = (1, ..., N, 1, ..., K-N)`.
pub fn build_demand_table_case1(n: usize, k: usize) -> Result<DemandTable, ConverseError> {
    if !in_case1_range(n, k) || k < 2 {
        return Err(ConverseError::OutOfCaseRange { n, k, case: 1 });
    }
    let first: Vec<usize> = (1..=n).chain(1..=k - n).collect();
    Ok(DemandTable::cyclic(n, k, Case::ManyFiles, first))
}

/// `d_1 = (1, ..., N, 1, ..., N-1, 1, ..., 1)` with `K-2N+1` trailing ones.
/// Undefined when `K - 2N + 1 < 0`, i.e. at `N = K/2 + 1` for even `K`.
pub fn build_demand_table_case2(n: usize, k: usize) -> Result<DemandTable, ConverseError> {
    if !in_case2_range(n, k) || k < 2 {
        return Err(ConverseError::OutOfCaseRange { n, k, case: 2 });
    }
    if 2 * n > k + 1 {
        return Err(ConverseError::UndefinedDemandTable { n, k });
    }
    let first: Vec<usize> =
        (1..=n).chain(1..n).chain(std::iter::repeat_n(1, k + 1 - 2 * n)).collect();
    Ok(DemandTable::cyclic(n, k, Case::FewFiles, first))
}

/// `{d_lo, ..., d_hi}` clipped to `1..=K`.
pub fn id_range(lo: i64, hi: i64, k: usize) -> DemandIds {
    (lo.max(1)..=hi.min(k as i64)).map(|x| x as usize).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case1Sets {
    pub a: DemandIds,
    pub b: DemandIds,
    pub c: DemandIds,
    pub j: DemandIds,
}

pub fn build_sets_case1(n: usize, k: usize, i: usize) -> Result<Case1Sets, ConverseError> {
    if !in_case1_range(n, k) {
        return Err(ConverseError::OutOfCaseRange { n, k, case: 1 });
    }
    if i == 0 || i > n {
        return Err(ConverseError::IndexOutOfRange { index: i });
    }
    let (n, k, i) = (n as i64, k as i64, i as i64);
    let ku = k as usize;
    Ok(Case1Sets {
        a: id_range(1, n - i, ku),
        b: id_range(k - i + 2, k, ku),
        c: id_range(k - n - i + 2, n - i, ku),
        j: id_range(n + 1, k, ku),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case2Sets {
    pub a: DemandIds,
    pub b: DemandIds,
    pub e: DemandIds,
    pub g: DemandIds,
    pub l: DemandIds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case2TailSets {
    pub p: DemandIds,
    pub q: DemandIds,
    pub t: DemandIds,
}

fn case2_guard(n: usize, k: usize) -> Result<(), ConverseError> {
    if !in_case2_range(n, k) {
        return Err(ConverseError::OutOfCaseRange { n, k, case: 2 });
    }
    if 2 * n > k + 1 {
        return Err(ConverseError::UndefinedDemandTable { n, k });
    }
    Ok(())
}

pub fn build_sets_case2(n: usize, k: usize, i: usize) -> Result<Case2Sets, ConverseError> {
    case2_guard(n, k)?;
    if i == 0 || i > n {
        return Err(ConverseError::IndexOutOfRange { index: i });
    }
    let (n, k, i) = (n as i64, k as i64, i as i64);
    let ku = k as usize;
    let a = id_range(1, n - i, ku);
    let b = id_range(k - i + 2, k, ku);
    let e = id_range(n + 1, 2 * n - i, ku);
    let g = id_range(2 * n - i + 1, k - i + 1, ku);
    let l = a.iter().chain(&b).chain(&e).chain(&g).copied().collect();
    Ok(Case2Sets { a, b, e, g, l })
}

/// `P_j`, `Q_j`, `T_j` for `2N <= j <= K`; the formulas are also evaluated
/// one step past either end, where the proof refers to them.
pub fn build_tail_sets_case2(n: usize, k: usize, j: usize) -> Result<Case2TailSets, ConverseError> {
    case2_guard(n, k)?;
    if j + 1 < 2 * n || j > k + 1 {
        return Err(ConverseError::IndexOutOfRange { index: j });
    }
    let (n, k, j) = (n as i64, k as i64, j as i64);
    let ku = k as usize;
    let p = id_range(k + n - j + 2, k + 2 * n - j, ku);
    let q = id_range(k + 2 * n - j + 1, k, ku);
    let t = p.union(&q).copied().collect();
    Ok(Case2TailSets { p, q, t })
}

/// One evaluated set identity or cardinality claim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub label: String,
    pub holds: bool,
}

fn with(set: &DemandIds, id: usize) -> DemandIds {
    let mut s = set.clone();
    s.insert(id);
    s
}

fn union(a: &DemandIds, b: &DemandIds) -> DemandIds {
    a.union(b).copied().collect()
}

fn files_requested(table: &DemandTable, user: usize, ids: &DemandIds) -> BTreeSet<usize> {
    ids.iter().map(|&d| table.demand(d).file_of(user)).collect()
}

fn push(out: &mut Vec<IdentityCheck>, label: String, holds: bool) {
    out.push(IdentityCheck { label, holds });
}

fn check_b_property(table: &DemandTable, out: &mut Vec<IdentityCheck>) {
    for l in 1..=table.k {
        let b = table.b(l);
        push(out, format!("user {l} asks for W_N in b_{l} = d_{b}"), table.demand(b).file_of(l) == table.n);
    }
}

/// Every identity and cardinality the many-files proof relies on, evaluated
/// wherever all of its indices are defined.
pub fn check_case1_identities(n: usize, k: usize) -> Result<Vec<IdentityCheck>, ConverseError> {
    let table = build_demand_table_case1(n, k)?;
    let sets: Vec<Case1Sets> = (1..=n).map(|i| build_sets_case1(n, k, i)).collect::<Result<_, _>>()?;
    let s = |i: usize| &sets[i - 1];
    let w_prime: BTreeSet<usize> = (1..n).collect();
    let mut out = Vec::new();

    check_b_property(&table, &mut out);
    push(&mut out, "A_N, B_1, C_N empty".into(), s(n).a.is_empty() && s(1).b.is_empty() && s(n).c.is_empty());
    push(&mut out, "|J| = K-N".into(), s(1).j.len() == k - n);
    for i in 1..=n {
        push(&mut out, format!("|A_{i}| = N-i"), s(i).a.len() == n - i);
        push(&mut out, format!("|B_{i}| = i-1"), s(i).b.len() == i - 1);
        if i + n <= k + 1 {
            push(&mut out, format!("|C_{i}| = 2N-K-1"), s(i).c.len() == 2 * n - k - 1);
        }
        push(&mut out, format!("A_{i} meets C_{i} in C_{i}"), s(i).c.is_subset(&s(i).a));
        if i < n {
            push(
                &mut out,
                format!("A_{} + b_{} = A_{i}", i + 1, i + 1),
                with(&s(i + 1).a, table.b(i + 1)) == s(i).a,
            );
        }
        if i + n <= k && i < n {
            push(&mut out, format!("B_{i} + b_{} = B_{}", n + i, i + 1), with(&s(i).b, table.b(n + i)) == s(i + 1).b);
        }
        let meet: DemandIds = s(i).b.intersection(&s(i).j).copied().collect();
        if i + n <= k {
            push(&mut out, format!("B_{i} meets J in B_{i}"), meet == s(i).b);
            push(
                &mut out,
                format!("users {i} and {} agree on B_{i}", n + i),
                s(i).b.iter().all(|&d| table.demand(d).file_of(i) == table.demand(d).file_of(n + i)),
            );
        } else {
            push(&mut out, format!("B_{i} meets J in J"), meet == s(i).j);
        }
        push(&mut out, format!("user {i} asks for W_1..W_(N-1) over A_{i}+B_{i}"), files_requested(&table, i, &union(&s(i).a, &s(i).b)) == w_prime && s(i).a.len() + s(i).b.len() == n - 1);
        if i + n <= k {
            push(
                &mut out,
                format!("user {i} asks for W_1..W_(N-1) over J+C_{i}"),
                files_requested(&table, i, &union(&s(i).j, &s(i).c)) == w_prime && s(i).j.len() + s(i).c.len() == n - 1,
            );
        }
    }
    if k > n {
        push(&mut out, "B_(K-N) + b_K = B_(K-N+1)".into(), with(&s(k - n).b, table.b(k)) == s(k - n + 1).b);
    }
    if k - n < n {
        push(&mut out, "B_(K-N+1) = J".into(), s(k - n + 1).b == s(1).j);
    }
    Ok(out)
}

/// The few-files counterpart of [`check_case1_identities`]. The tail chain is
/// checked as `T_j + b_j = T_(j+1)`.
pub fn check_case2_identities(n: usize, k: usize) -> Result<Vec<IdentityCheck>, ConverseError> {
    let table = build_demand_table_case2(n, k)?;
    let sets: Vec<Case2Sets> = (1..=n).map(|i| build_sets_case2(n, k, i)).collect::<Result<_, _>>()?;
    let s = |i: usize| &sets[i - 1];
    let tail = |j: usize| build_tail_sets_case2(n, k, j);
    let w_prime: BTreeSet<usize> = (1..n).collect();
    let mut out = Vec::new();

    check_b_property(&table, &mut out);
    push(&mut out, "A_N, B_1, E_N empty".into(), s(n).a.is_empty() && s(1).b.is_empty() && s(n).e.is_empty());
    for i in 1..=n {
        push(&mut out, format!("|A_{i}| = N-i"), s(i).a.len() == n - i);
        push(&mut out, format!("|B_{i}| = i-1"), s(i).b.len() == i - 1);
        push(&mut out, format!("|E_{i}| = N-i"), s(i).e.len() == n - i);
        push(&mut out, format!("|G_{i}| = K-2N+1"), s(i).g.len() == k + 1 - 2 * n);
        push(
            &mut out,
            format!("A_{i}, B_{i}, E_{i}, G_{i} disjoint"),
            s(i).l.len() == s(i).a.len() + s(i).b.len() + s(i).e.len() + s(i).g.len(),
        );
        push(
            &mut out,
            format!("user {i} asks for W_1 over G_{i}"),
            s(i).g.iter().all(|&d| table.demand(d).file_of(i) == 1),
        );
        push(
            &mut out,
            format!("user {i} asks for W_1..W_(N-1) over A_{i}+B_{i}"),
            files_requested(&table, i, &union(&s(i).a, &s(i).b)) == w_prime,
        );
        if i < n {
            push(
                &mut out,
                format!("user {i} asks for W_1..W_(N-1) over B_{i}+E_{i}"),
                files_requested(&table, i, &union(&s(i).b, &s(i).e)) == w_prime
                    && s(i).b.len() + s(i).e.len() == n - 1,
            );
            push(
                &mut out,
                format!("L_{} + b_{} = L_{i}", i + 1, i + 1),
                with(&s(i + 1).l, table.b(i + 1)) == s(i).l,
            );
            push(&mut out, format!("B_{i} + b_{} = B_{}", n + i, i + 1), with(&s(i).b, table.b(n + i)) == s(i + 1).b);
            push(
                &mut out,
                format!("users {i} and {} agree on B_{i}", n + i),
                s(i).b.iter().all(|&d| table.demand(d).file_of(i) == table.demand(d).file_of(n + i)),
            );
        }
    }
    if 2 * n <= k {
        push(&mut out, "Q_2N empty".into(), tail(2 * n)?.q.is_empty());
        for j in 2 * n..=k {
            let tj = tail(j)?;
            push(&mut out, format!("|P_{j}| = N-1"), tj.p.len() == n - 1);
            push(&mut out, format!("|Q_{j}| = j-2N"), tj.q.len() == j - 2 * n);
            push(
                &mut out,
                format!("user {j} asks for W_1..W_(N-1) over P_{j}"),
                files_requested(&table, j, &tj.p) == w_prime,
            );
            push(
                &mut out,
                format!("user {j} asks for W_1 over Q_{j}"),
                tj.q.iter().all(|&d| table.demand(d).file_of(j) == 1),
            );
            if j < k {
                push(&mut out, format!("T_{j} + b_{j} = T_{}", j + 1), with(&tj.t, table.b(j)) == tail(j + 1)?.t);
            }
        }
        push(&mut out, "T_K + b_K = L_N".into(), with(&tail(k)?.t, table.b(k)) == s(n).l);
    }
    if n >= 2 {
        push(
            &mut out,
            "B_(N-1) + b_(2N-1) = T_2N".into(),
            with(&s(n - 1).b, table.b(2 * n - 1)) == id_range((k + 2 - n) as i64, k as i64, k),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_demands, NetworkConfig};

    #[test]
    fn case1_tables() {
        let t = build_demand_table_case1(3, 4).unwrap();
        assert_eq!(t.demand(1).as_slice(), &[1, 2, 3, 1]);
        let t = build_demand_table_case1(4, 4).unwrap();
        assert_eq!(t.demand(1).as_slice(), &[1, 2, 3, 4]);
        assert_eq!(t.demand(2).as_slice(), &[2, 3, 4, 1]);
        assert!(matches!(build_demand_table_case1(2, 4), Err(ConverseError::OutOfCaseRange { .. })));
    }

    #[test]
    fn case2_tables() {
        let t = build_demand_table_case2(3, 4);
        assert!(matches!(t, Err(ConverseError::UndefinedDemandTable { .. })));
        let t = build_demand_table_case2(2, 4).unwrap();
        assert_eq!(t.demand(1).as_slice(), &[1, 2, 1, 1]);
        let t = build_demand_table_case2(2, 5).unwrap();
        assert_eq!(t.demand(1).as_slice(), &[1, 2, 1, 1, 1]);
        let t = build_demand_table_case2(1, 3).unwrap();
        assert_eq!(t.demand(1).as_slice(), &[1, 1, 1]);
        assert!(build_demand_table_case2(4, 5).is_err());
    }

    #[test]
    fn tables_lie_in_demand_set() {
        for k in 2..=7 {
            for n in 1..=k {
                let cfg = NetworkConfig::new(n, k, None).unwrap();
                let all = enumerate_demands(&cfg);
                for t in [build_demand_table_case1(n, k), build_demand_table_case2(n, k)].into_iter().flatten() {
                    assert!(t.demands.iter().all(|d| all.contains(d)), "N={n} K={k}");
                }
            }
        }
    }

    #[test]
    fn case1_sets_three_four() {
        let s = build_sets_case1(3, 4, 1).unwrap();
        assert_eq!(s.a, [1, 2].into());
        assert_eq!(s.j, [4].into());
        assert!(build_sets_case1(3, 4, 3).unwrap().a.is_empty());
        assert!(build_sets_case1(3, 4, 4).is_err());
    }

    #[test]
    fn identities_hold_in_range() {
        for k in 2..=10 {
            for n in 1..=k {
                if in_case1_range(n, k) {
                    for c in check_case1_identities(n, k).unwrap() {
                        assert!(c.holds, "N={n} K={k}: {}", c.label);
                    }
                }
                if in_case2_range(n, k) && 2 * n <= k + 1 {
                    for c in check_case2_identities(n, k).unwrap() {
                        assert!(c.holds, "N={n} K={k}: {}", c.label);
                    }
                }
            }
        }
    }

    #[test]
    fn printed_tail_identity_is_reversed() {
        // T_(j+1) + b_(j+1) = T_j fails wherever the chain has two links.
        let (n, k) = (2, 6);
        let t = build_demand_table_case2(n, k).unwrap();
        let t5 = build_tail_sets_case2(n, k, 5).unwrap().t;
        let t4 = build_tail_sets_case2(n, k, 4).unwrap().t;
        assert_ne!(with(&t5, t.b(5)), t4);
        assert_eq!(with(&t4, t.b(4)), t5);
    }
}
