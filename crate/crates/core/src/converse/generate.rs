//! Certificate generators for the two large-cache lower bounds.
//!
//! A [`Prover`] keeps a running lower bound `cur`, starting at the target's
//! `cM M + cR R`. Applying an axiom with multiplier `m` sets
//! `cur -= m * form`, which never increases `cur`. Once `cur` is a constant
//! `c`, the recorded instances prove `cM M + cR R >= c`.

use super::axiom::{swap, Axiom};
use super::entropy::{EntropyLinComb, RandomVar, VarSet};
use super::tables::{
    build_demand_table_case1, build_demand_table_case2, build_sets_case1, build_sets_case2,
    build_tail_sets_case2, DemandIds, DemandTable,
};
use super::{Certificate, ConverseError, Target};
use crate::{int, rat, Rational};

/// `K M + K(N-1) R >= K N - 1`.
pub fn theorem2_target(n: usize, k: usize) -> Target {
    let (n, k) = (n as i64, k as i64);
    Target { cm: int(k), cr: int(k * (n - 1)), c: int(k * n - 1) }
}

/// `K(K+1)/(2N) M + K(K-1)/2 R >= (K^2+K-2)/2`.
pub fn theorem4_target(n: usize, k: usize) -> Target {
    let (n, k) = (n as i64, k as i64);
    Target { cm: rat(k * (k + 1), 2 * n), cr: rat(k * (k - 1), 2), c: rat(k * k + k - 2, 2) }
}

struct Prover<'a> {
    table: &'a DemandTable,
    /// `W_1, ..., W_{N-1}`.
    w_prime: VarSet,
    cur: EntropyLinComb,
    axioms: Vec<(Axiom, Rational)>,
}

impl<'a> Prover<'a> {
    fn new(table: &'a DemandTable, target: &Target) -> Self {
        let mut cur = EntropyLinComb::new();
        cur.const_m = target.cm;
        cur.const_r = target.cr;
        Prover { table, w_prime: VarSet::files(1..table.n), cur, axioms: Vec::new() }
    }

    fn apply(&mut self, ax: Axiom, m: Rational) -> Result<(), ConverseError> {
        let form = ax.raw_form(self.table).map_err(|f| ConverseError::InvalidStep(format!("{ax}: {f:?}")))?;
        if form.is_zero() || m == int(0) {
            return Ok(());
        }
        self.cur.add_scaled(&form, -m);
        self.axioms.push((ax, m));
        Ok(())
    }

    fn with_w(&self, user: Option<usize>, ids: &DemandIds) -> VarSet {
        let s = self.w_prime.clone().with_bcasts(ids);
        match user {
            Some(l) => s.with_cache(l),
            None => s,
        }
    }

    /// `M + |S| R >= H(Z_l) + sum H(X_d) >= H(Z_l, X_S)`, then every file
    /// user `l` decodes from `S` is added.
    fn pay(&mut self, l: usize, ids: &DemandIds, weight: Rational) -> Result<VarSet, ConverseError> {
        self.apply(Axiom::CacheBound { user: l }, weight)?;
        let mut acc = VarSet::new().with_cache(l);
        for &d in ids {
            self.apply(Axiom::RateBound { demand: d }, weight)?;
            let x = VarSet::new().with_bcasts(&[d]);
            self.apply(Axiom::Submodularity { a: acc.clone(), b: x.clone() }, weight)?;
            acc = acc.union(&x);
        }
        for &d in ids {
            acc = self.decode(l, d, acc, weight)?;
        }
        Ok(acc)
    }

    /// Replaces `w H(S)` by `w H(S + W_{d_l})`.
    fn decode(&mut self, l: usize, d: usize, set: VarSet, w: Rational) -> Result<VarSet, ConverseError> {
        let file = self.table.demand(d).file_of(l);
        self.apply(Axiom::Decodability { user: l, demand: d, set: set.clone() }, -w)?;
        Ok(set.with(RandomVar::File(file)))
    }

    /// `H(A) + H(B) >= H(A u B) + H(A n B)`.
    fn submod(&mut self, a: &VarSet, b: &VarSet, w: Rational) -> Result<(VarSet, VarSet), ConverseError> {
        self.apply(Axiom::Submodularity { a: a.clone(), b: b.clone() }, w)?;
        Ok((a.union(b), a.intersection(b)))
    }

    /// `H(big) >= H(small)` for `small` inside `big`.
    fn shrink(&mut self, small: &VarSet, big: &VarSet, w: Rational) -> Result<(), ConverseError> {
        if !small.is_subset(big) {
            return Err(ConverseError::InvalidStep(format!("{small} is not inside {big}")));
        }
        self.apply(Axiom::Monotonicity { a: small.clone(), b: big.clone() }, w)
    }

    /// `H(W', X_{S+b_l}) + H(W', Z_l, X_T) >= H(W', X_{(S+b_l) n T}) + N`.
    fn peel(&mut self, l: usize, s_plus: &DemandIds, t: &DemandIds) -> Result<(), ConverseError> {
        let left = self.with_w(None, s_plus);
        let right = self.with_w(Some(l), t);
        let (union, _) = self.submod(&left, &right, int(1))?;
        let full = self.decode(l, self.table.b(l), union, int(1))?;
        self.apply(Axiom::Totality { set: full }, int(1))
    }

    /// For `T` in which user `l` asks for `W_1`:
    /// `H(W',Z_l,X_S) + sum_T H(X_j) + |T|/N H(Z_l) >= H(W',Z_l,X_{S u T}) + |T|`.
    fn absorb(&mut self, l: usize, s: &DemandIds, t: &DemandIds) -> Result<(), ConverseError> {
        if t.is_empty() {
            return Ok(());
        }
        let n = self.table.n;
        let size = int(t.len() as i64);
        let share = size / int(n as i64);
        let z = VarSet::new().with_cache(l);
        let mut pieces = Vec::new();
        for &j in t {
            let x = VarSet::new().with_bcasts(&[j]);
            let (zx, _) = self.submod(&z, &x, int(1))?;
            pieces.push(self.decode(l, j, zx, int(1))?);
        }
        let mut joined = pieces[0].clone();
        for p in &pieces[1..] {
            joined = self.submod(&joined, p, int(1))?.0;
        }
        let left = self.with_w(Some(l), s);
        self.submod(&left, &joined, int(1))?;
        for w in 2..=n {
            self.apply(Axiom::FileSymmetry { n: w, p: 1, user: l }, -share)?;
        }
        let mut acc = VarSet::files([1]).with_cache(l);
        for w in 2..=n {
            let next = VarSet::files([w]).with_cache(l);
            acc = self.submod(&acc, &next, share)?.0;
        }
        self.apply(Axiom::Totality { set: acc }, share)
    }

    fn finish(mut self, target: Target) -> Result<Certificate, ConverseError> {
        if self.table.n >= 2 {
            let w = self.w_prime.clone();
            self.apply(Axiom::FileIndependence { files: w }, int(1))?;
        }
        Ok(Certificate { table: self.table.clone(), axioms: self.axioms, target })
    }
}

fn union(a: &DemandIds, b: &DemandIds) -> DemandIds {
    a.union(b).copied().collect()
}

fn minus(a: &DemandIds, b: &DemandIds) -> DemandIds {
    a.difference(b).copied().collect()
}

/// Certificate for `K M + K(N-1) R >= K N - 1`, `ceil((K+1)/2) <= N <= K`.
pub fn gen_certificate_theorem2(n: usize, k: usize) -> Result<Certificate, ConverseError> {
    let table = build_demand_table_case1(n, k)?;
    if n < 2 {
        return Err(ConverseError::OutOfCaseRange { n, k, case: 1 });
    }
    let target = theorem2_target(n, k);
    let sets = (1..=n).map(|i| build_sets_case1(n, k, i)).collect::<Result<Vec<_>, _>>()?;
    let s = |i: usize| &sets[i - 1];
    let j_set = s(1).j.clone();
    let mut p = Prover::new(&table, &target);

    for i in 1..=n {
        p.pay(i, &union(&s(i).a, &s(i).b), int(1))?;
    }
    for i in 1..=k - n {
        p.pay(i, &union(&j_set, &s(i).c), int(1))?;
    }
    for i in 1..=k - n {
        let left = p.with_w(Some(i), &union(&s(i).a, &s(i).b));
        let right = p.with_w(Some(i), &union(&j_set, &s(i).c));
        let (_, meet) = p.submod(&left, &right, int(1))?;
        p.shrink(&p.with_w(Some(i), &s(i).b), &meet, int(1))?;
    }
    for i in k - n + 1..=n {
        let big = p.with_w(Some(i), &union(&s(i).a, &s(i).b));
        p.shrink(&p.with_w(Some(i), &union(&s(i).a, &j_set)), &big, int(1))?;
    }
    let first = p.with_w(Some(1), &union(&s(1).a, &j_set));
    p.shrink(&p.with_w(None, &union(&s(1).a, &j_set)), &first, int(1))?;
    for i in 2..=n {
        p.peel(i, &union(&s(i - 1).a, &j_set), &union(&s(i).a, &j_set))?;
    }
    for i in 1..=k - n {
        let set = p.with_w(Some(i), &s(i).b);
        p.apply(Axiom::PermSymmetry { perm: swap(i, n + i, k), set }, int(-1))?;
    }
    // J = B_{K-N+1}; walk B down to B_1 = {}.
    let b_next = |i: usize| if i == k - n + 1 { j_set.clone() } else { s(i).b.clone() };
    for i in (1..=k - n).rev() {
        p.peel(n + i, &b_next(i + 1), &s(i).b)?;
    }
    p.finish(target)
}

/// Certificate for `K(K+1)/(2N) M + K(K-1)/2 R >= (K^2+K-2)/2`,
/// `1 <= N <= ceil((K+1)/2)`.
pub fn gen_certificate_theorem4(n: usize, k: usize) -> Result<Certificate, ConverseError> {
    let table = build_demand_table_case2(n, k)?;
    let target = theorem4_target(n, k);
    let sets = (1..=n).map(|i| build_sets_case2(n, k, i)).collect::<Result<Vec<_>, _>>()?;
    let s = |i: usize| &sets[i - 1];
    let nn = int(n as i64);
    let mut p = Prover::new(&table, &target);

    // First block: users 1..N over A, B, E, G.
    for i in 1..=n {
        let ab = union(&s(i).a, &s(i).b);
        p.pay(i, &ab, int(1))?;
        p.apply(Axiom::CacheBound { user: i }, int(s(i).g.len() as i64) / nn)?;
        for &d in &s(i).g {
            p.apply(Axiom::RateBound { demand: d }, int(1))?;
        }
    }
    for i in 1..n {
        p.pay(i, &union(&s(i).b, &s(i).e), int(1))?;
    }
    for i in 1..=n {
        p.absorb(i, &union(&s(i).a, &s(i).b), &s(i).g)?;
    }
    for i in 1..n {
        let abg = union(&union(&s(i).a, &s(i).b), &s(i).g);
        let left = p.with_w(Some(i), &abg);
        let right = p.with_w(Some(i), &union(&s(i).b, &s(i).e));
        p.submod(&left, &right, int(1))?;
    }
    let first = p.with_w(Some(1), &s(1).l);
    p.shrink(&p.with_w(None, &s(1).l), &first, int(1))?;
    for i in 2..=n {
        p.peel(i, &s(i - 1).l, &s(i).l)?;
    }
    for i in 1..n {
        let set = p.with_w(Some(i), &s(i).b);
        p.apply(Axiom::PermSymmetry { perm: swap(i, n + i, k), set }, int(-1))?;
    }

    // Second block: users 2N..K over P, Q.
    for j in 2 * n..=k {
        let tail = build_tail_sets_case2(n, k, j)?;
        p.pay(j, &tail.p, int(1))?;
        p.apply(Axiom::CacheBound { user: j }, int(tail.q.len() as i64) / nn)?;
        for &d in &tail.q {
            p.apply(Axiom::RateBound { demand: d }, int(1))?;
        }
        p.absorb(j, &tail.p, &tail.q)?;
    }

    // Walk L_N = T_{K+1} down through T_j to T_{2N} = B_N, then B_i to B_1.
    let mut upper = s(n).l.clone();
    for j in (2 * n..=k).rev() {
        let t = build_tail_sets_case2(n, k, j)?.t;
        if minus(&upper, &t).len() != 1 {
            return Err(ConverseError::InvalidStep(format!("T_{j} is not one step below its successor")));
        }
        p.peel(j, &upper, &t)?;
        upper = t;
    }
    for i in (1..n).rev() {
        p.peel(n + i, &upper, &s(i).b)?;
        upper = s(i).b.clone();
    }
    p.finish(target)
}

#[cfg(test)]
mod tests {
    use super::super::check::{check_certificate, Verdict};
    use super::*;
    use crate::tradeoff::{in_case1_range, in_case2_range};

    #[test]
    fn targets() {
        assert_eq!(theorem2_target(3, 4).compact(), "4M+8R >= 11");
        assert_eq!(theorem2_target(4, 4).compact(), "4M+12R >= 15");
        assert_eq!(theorem2_target(2, 2).compact(), "2M+2R >= 3");
        assert_eq!(theorem4_target(2, 4).compact(), "5M+6R >= 9");
        assert_eq!(theorem4_target(2, 5), Target { cm: rat(15, 2), cr: int(10), c: int(14) });
    }

    #[test]
    fn many_files_certificates_pass() {
        for k in 2..=8 {
            for n in (1..=k).filter(|&n| in_case1_range(n, k)) {
                let c = gen_certificate_theorem2(n, k).unwrap();
                let r = check_certificate(&c).unwrap();
                assert!(r.passed(), "N={n} K={k}: {}", r.describe());
            }
        }
    }

    #[test]
    fn few_files_certificates_pass_where_the_bound_holds() {
        for k in 2..=8 {
            for n in (2..=k).filter(|&n| in_case2_range(n, k) && 2 * n <= k + 1) {
                let c = gen_certificate_theorem4(n, k).unwrap();
                let r = check_certificate(&c).unwrap();
                assert!(r.passed(), "N={n} K={k}: {}", r.describe());
            }
        }
    }

    #[test]
    fn single_file_chain_does_not_close() {
        for k in 2..=6 {
            let c = gen_certificate_theorem4(1, k).unwrap();
            let r = check_certificate(&c).unwrap();
            assert!(matches!(r.verdict, Verdict::NonCancelling { .. }), "K={k}");
        }
    }

    #[test]
    fn mutations_fail() {
        let c = gen_certificate_theorem2(3, 4).unwrap();
        for idx in 0..c.axioms.len() {
            let mut m = c.clone();
            m.axioms[idx].1 += int(1);
            assert!(!check_certificate(&m).unwrap().passed(), "axiom {idx}");
        }
    }
}
