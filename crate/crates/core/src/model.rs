//! Network configuration, subfile splitting, demand enumeration and the
//! per-demand request counts shared by placement, delivery and the converse.
//!
//! Users and files are 1-based throughout, as in a demand written `1,1,2,3`.

use crate::field::{default_modulus, FieldCtx, FieldError, Symbol};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("need 1 <= N <= K and K >= 2, got N={n}, K={k}")]
    BadShape { n: usize, k: usize },
    #[error("modulus {p} must exceed K={k}")]
    ModulusTooSmall { p: u64, k: usize },
    #[error("demand has {got} entries, expected {k}")]
    DemandLength { got: usize, k: usize },
    #[error("demand entry {value} for user {user} is outside 1..={n}")]
    DemandEntry { user: usize, value: usize, n: usize },
    #[error("cannot parse demand {0:?}")]
    DemandSyntax(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    n: usize,
    k: usize,
    field: FieldCtx,
}

impl NetworkConfig {
    /// `prime = None` picks [`default_modulus`].
    pub fn new(n: usize, k: usize, prime: Option<u64>) -> Result<Self, ModelError> {
        if n == 0 || n > k || k < 2 {
            return Err(ModelError::BadShape { n, k });
        }
        let p = prime.unwrap_or_else(|| default_modulus(k));
        let field = FieldCtx::new(p)?;
        if p <= k as u64 {
            return Err(ModelError::ModulusTooSmall { p, k });
        }
        Ok(NetworkConfig { n, k, field })
    }

    pub fn files(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    /// Number of ordered user pairs, `K(K-1)`.
    pub fn pair_count(&self) -> usize {
        self.k * (self.k - 1)
    }
}

/// Successor of user `k` on the ring `1..=K`.
pub fn successor(k: usize, users: usize) -> usize {
    debug_assert!((1..=users).contains(&k));
    if k == users {
        1
    } else {
        k + 1
    }
}

/// Position of the ordered pair `(i, j)`, `i != j`, in lexicographic order.
pub fn pair_index(i: usize, j: usize, users: usize) -> usize {
    debug_assert!(i != j && i >= 1 && j >= 1 && i <= users && j <= users);
    (i - 1) * (users - 1) + if j < i { j - 1 } else { j - 2 }
}

/// All ordered pairs `(i, j)` with `i != j`, in canonical order.
pub fn ordered_pairs(users: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=users).flat_map(move |i| (1..=users).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// A file cut into equal-length parts of field symbols.
///
/// For the coded-placement scheme the parts are the `K(K-1)` subfiles
/// `W^{ij}` in [`ordered_pairs`] order; the corner scheme cuts into `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfileGrid {
    parts: Vec<Vec<Symbol>>,
    original_len: usize,
}

impl SubfileGrid {
    /// Splits into `K(K-1)` pair-indexed subfiles.
    pub fn split(bytes: &[u8], cfg: &NetworkConfig) -> Result<Self, ModelError> {
        Self::split_into(bytes, cfg.pair_count(), cfg.field(), 0)
    }

    /// Zero-pads to a multiple of `parts`, with at least `min_part_len`
    /// (and never fewer than one) symbols per part.
    pub fn split_into(
        bytes: &[u8],
        parts: usize,
        field: &FieldCtx,
        min_part_len: usize,
    ) -> Result<Self, ModelError> {
        assert!(parts > 0);
        let part_len = bytes.len().div_ceil(parts).max(min_part_len).max(1);
        let mut symbols = field.encode_bytes(bytes)?;
        symbols.resize(part_len * parts, Symbol::ZERO);
        Ok(SubfileGrid {
            parts: symbols.chunks(part_len).map(<[Symbol]>::to_vec).collect(),
            original_len: bytes.len(),
        })
    }

    pub fn from_parts(parts: Vec<Vec<Symbol>>, original_len: usize) -> Self {
        SubfileGrid { parts, original_len }
    }

    pub fn part(&self, idx: usize) -> &[Symbol] {
        &self.parts[idx]
    }

    /// The subfile `W^{ij}`.
    pub fn pair(&self, i: usize, j: usize, users: usize) -> &[Symbol] {
        &self.parts[pair_index(i, j, users)]
    }

    pub fn parts(&self) -> &[Vec<Symbol>] {
        &self.parts
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn part_len(&self) -> usize {
        self.parts.first().map_or(0, Vec::len)
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    /// Padded size in symbols, the unit that rates and cache sizes are measured in.
    pub fn padded_len(&self) -> usize {
        self.part_len() * self.part_count()
    }

    /// Concatenates the parts and strips padding.
    pub fn join(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.parts.concat();
        out.truncate(self.original_len);
        out
    }
}

/// Splits a whole library so every file shares one part length.
pub fn split_library(
    files: &[Vec<u8>],
    parts: usize,
    field: &FieldCtx,
) -> Result<Vec<SubfileGrid>, ModelError> {
    let longest = files.iter().map(Vec::len).max().unwrap_or(0);
    let part_len = longest.div_ceil(parts).max(1);
    files
        .iter()
        .map(|f| SubfileGrid::split_into(f, parts, field, part_len))
        .collect()
}

/// The file requested by each user, `d[user - 1]` in `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Demand(Vec<usize>);

impl Demand {
    pub fn new(files: Vec<usize>, cfg: &NetworkConfig) -> Result<Self, ModelError> {
        let d = Demand(files);
        d.validate(cfg.files(), cfg.users())?;
        Ok(d)
    }

    /// Builds a demand without range checks; used for tables whose entries
    /// are correct by construction.
    pub fn from_vec(files: Vec<usize>) -> Self {
        Demand(files)
    }

    pub fn validate(&self, n: usize, k: usize) -> Result<(), ModelError> {
        if self.0.len() != k {
            return Err(ModelError::DemandLength { got: self.0.len(), k });
        }
        for (idx, &v) in self.0.iter().enumerate() {
            if v == 0 || v > n {
                return Err(ModelError::DemandEntry { user: idx + 1, value: v, n });
            }
        }
        Ok(())
    }

    /// Parses `"1,1,2,3"`.
    pub fn parse(spec: &str, cfg: &NetworkConfig) -> Result<Self, ModelError> {
        let files = spec
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ModelError::DemandSyntax(spec.to_string()))?;
        Demand::new(files, cfg)
    }

    /// File requested by `user` (1-based).
    pub fn file_of(&self, user: usize) -> usize {
        self.0[user - 1]
    }

    pub fn users(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// True when every file in `1..=n` is requested by somebody.
    pub fn is_surjective(&self, n: usize) -> bool {
        let mut seen = vec![false; n + 1];
        for &f in &self.0 {
            if f <= n {
                seen[f] = true;
            }
        }
        seen[1..].iter().all(|&s| s)
    }

    /// Relabels users by `perm` (1-based images): user `perm(l)` ends up
    /// requesting what user `l` requested.
    pub fn permuted(&self, perm: &[usize]) -> Demand {
        let mut out = vec![0; self.0.len()];
        for (l, &f) in self.0.iter().enumerate() {
            out[perm[l] - 1] = f;
        }
        Demand(out)
    }
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Every demand in which all `N` files are requested, in lexicographic order.
pub fn enumerate_demands(cfg: &NetworkConfig) -> Vec<Demand> {
    let (n, k) = (cfg.files(), cfg.users());
    let mut out = Vec::new();
    let mut cur = vec![1usize; k];
    loop {
        let d = Demand(cur.clone());
        if d.is_surjective(n) {
            out.push(d);
        }
        // odometer increment, last user fastest
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] < n {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 1;
        }
    }
}

/// Number of surjections `[K] -> [N]` by inclusion-exclusion.
pub fn surjection_count(n: usize, k: usize) -> u64 {
    let mut total: i128 = 0;
    for i in 0..=n {
        let term = binomial(n as u64, i as u64) as i128 * ((n - i) as i128).pow(k as u32);
        total += if i % 2 == 0 { term } else { -term };
    }
    total as u64
}

pub fn binomial(a: u64, b: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1u64, |acc, i| acc * (a - i) / (i + 1))
}

/// Request counts for one demand: `counts[k][s]` is the number of users in
/// `S_k = [K] \ {k}` that request the same file as user `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandContext {
    demand: Demand,
    counts: Vec<Vec<usize>>,
}

impl DemandContext {
    pub fn new(demand: &Demand) -> Self {
        let k = demand.users();
        let counts = (1..=k)
            .map(|user| {
                (1..=k)
                    .map(|s| {
                        (1..=k)
                            .filter(|&u| u != user && demand.file_of(u) == demand.file_of(s))
                            .count()
                    })
                    .collect()
            })
            .collect();
        DemandContext { demand: demand.clone(), counts }
    }

    pub fn demand(&self) -> &Demand {
        &self.demand
    }

    /// `N_k^s`.
    pub fn count(&self, k: usize, s: usize) -> usize {
        self.counts[k - 1][s - 1]
    }

    /// `S_k`.
    pub fn others(&self, k: usize) -> impl Iterator<Item = usize> {
        let users = self.demand.users();
        (1..=users).filter(move |&u| u != k)
    }
}

pub fn demand_context(demand: &Demand) -> DemandContext {
    DemandContext::new(demand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: usize, k: usize) -> NetworkConfig {
        NetworkConfig::new(n, k, None).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(NetworkConfig::new(4, 3, None).is_err());
        assert!(NetworkConfig::new(0, 3, None).is_err());
        assert!(NetworkConfig::new(1, 1, None).is_err());
        assert_eq!(
            NetworkConfig::new(2, 4, Some(3)),
            Err(ModelError::ModulusTooSmall { p: 3, k: 4 })
        );
        assert!(NetworkConfig::new(2, 4, Some(5)).is_ok());
    }

    #[test]
    fn split_sizes() {
        let c = cfg(3, 4);
        let g = SubfileGrid::split(&[7u8; 24], &c).unwrap();
        assert_eq!((g.part_count(), g.part_len()), (12, 2));

        let g = SubfileGrid::split(&[], &c).unwrap();
        assert_eq!((g.part_count(), g.part_len(), g.original_len()), (12, 1, 0));
        assert!(g.parts().iter().flatten().all(|s| *s == Symbol::ZERO));

        let g = SubfileGrid::split(&[1u8; 25], &c).unwrap();
        assert_eq!((g.padded_len(), g.part_len()), (36, 3));
    }

    #[test]
    fn pair_order_is_lexicographic() {
        let pairs: Vec<_> = ordered_pairs(3).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)]);
        for (idx, (i, j)) in ordered_pairs(5).enumerate() {
            assert_eq!(pair_index(i, j, 5), idx);
        }
    }

    #[test]
    fn demand_enumeration_small() {
        let ds = enumerate_demands(&cfg(2, 2));
        assert_eq!(ds, vec![Demand(vec![1, 2]), Demand(vec![2, 1])]);
        assert_eq!(enumerate_demands(&cfg(3, 4)).len(), 36);
        assert_eq!(enumerate_demands(&cfg(2, 4)).len(), 14);
    }

    #[test]
    fn enumeration_matches_inclusion_exclusion() {
        for k in 2..=8 {
            for n in 1..=k {
                let ds = enumerate_demands(&cfg(n, k));
                assert_eq!(ds.len() as u64, surjection_count(n, k), "N={n} K={k}");
                assert!(ds.windows(2).all(|w| w[0] < w[1]));
                assert!(ds.iter().all(|d| d.is_surjective(n)));
            }
        }
    }

    #[test]
    fn other_files_have_requesters_outside_k() {
        for k in 2..=6 {
            for n in 1..=k {
                for d in enumerate_demands(&cfg(n, k)) {
                    let ctx = DemandContext::new(&d);
                    for user in 1..=k {
                        for file in (1..=n).filter(|&f| f != d.file_of(user)) {
                            assert!(ctx.others(user).any(|u| d.file_of(u) == file));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn request_counts() {
        let c = cfg(3, 4);
        let ctx = DemandContext::new(&Demand::new(vec![1, 1, 2, 3], &c).unwrap());
        assert_eq!(ctx.count(3, 1), 2);
        assert_eq!(ctx.count(1, 1), 1);
        assert_eq!(ctx.count(1, 3), 1);

        let c = cfg(2, 4);
        let ctx = DemandContext::new(&Demand::new(vec![1, 1, 1, 2], &c).unwrap());
        assert_eq!(ctx.count(1, 2), 2);

        let c = cfg(4, 4);
        let ctx = DemandContext::new(&Demand::new(vec![3, 1, 4, 2], &c).unwrap());
        for k in 1..=4 {
            for s in ctx.others(k).collect::<Vec<_>>() {
                assert_eq!(ctx.count(k, s), 1);
            }
        }
    }

    #[test]
    fn successor_wraps() {
        assert_eq!(successor(4, 4), 1);
        assert_eq!(successor(1, 4), 2);
        assert_eq!(successor(3, 4), 4);
    }

    #[test]
    fn demand_parse_and_permute() {
        let c = cfg(3, 4);
        let d = Demand::parse("1, 1,2,3", &c).unwrap();
        assert_eq!(d.as_slice(), &[1, 1, 2, 3]);
        assert!(Demand::parse("1,1,2", &c).is_err());
        assert!(Demand::parse("1,1,2,4", &c).is_err());
        assert!(Demand::parse("a,b", &c).is_err());
        // swap users 1 and 3
        assert_eq!(d.permuted(&[3, 2, 1, 4]).as_slice(), &[2, 1, 1, 3]);
    }

    proptest! {
        #[test]
        fn split_join_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..300), k in 2usize..6) {
            let c = cfg(1, k);
            let g = SubfileGrid::split(&bytes, &c).unwrap();
            prop_assert_eq!(g.part_count(), k * (k - 1));
            prop_assert_eq!(crate::field::decode_bytes(&g.join()).unwrap(), bytes);
        }
    }
}
