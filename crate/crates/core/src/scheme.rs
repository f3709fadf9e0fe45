//! Two-stage coded placement and single-shot delivery at rate `1/(K-1)`.
//!
//! User `k` caches every subfile `W_n^{ij}` with `i, j != k` (stage 1), the
//! differences `W_n^{k,s(k)} - W_n^{kj}` for `j != k, s(k)`, and one sum
//! `sum_n W_n^{k,s(k)}` (stage 2), where `s` is the ring successor.

use crate::field::{decode_bytes, FieldCtx, FieldError, Symbol};
use crate::model::{
    ordered_pairs, pair_index, successor, Demand, DemandContext, ModelError, NetworkConfig,
    SubfileGrid,
};
use crate::{int, rat, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("library does not match configuration: {0}")]
    ConfigMismatch(String),
    #[error("demand {0} does not request every file")]
    DemandNotInD(Demand),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// An uncoded subfile `W_file^{ij}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage1Packet {
    pub file: usize,
    pub i: usize,
    pub j: usize,
    pub data: Vec<Symbol>,
}

/// `W_file^{k,s(k)} - W_file^{kj}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage2Diff {
    pub file: usize,
    pub j: usize,
    pub data: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContents {
    pub user: usize,
    pub stage1: Vec<Stage1Packet>,
    pub stage2_diffs: Vec<Stage2Diff>,
    pub stage2_sum: Vec<Symbol>,
    /// Unpadded byte length of every file. Metadata, not counted as cache.
    pub file_lengths: Vec<usize>,
}

impl CacheContents {
    pub fn packet_count(&self) -> usize {
        self.stage1.len() + self.stage2_diffs.len() + 1
    }

    pub fn symbol_count(&self) -> usize {
        self.stage1.iter().map(|p| p.data.len()).sum::<usize>()
            + self.stage2_diffs.iter().map(|p| p.data.len()).sum::<usize>()
            + self.stage2_sum.len()
    }

    fn stage1_lookup(&self) -> Stage1Index<'_> {
        Stage1Index::new(&self.stage1)
    }
}

struct Stage1Index<'a> {
    packets: &'a [Stage1Packet],
}

impl<'a> Stage1Index<'a> {
    fn new(packets: &'a [Stage1Packet]) -> Self {
        Stage1Index { packets }
    }

    fn get(&self, file: usize, i: usize, j: usize) -> Result<&'a [Symbol], SchemeError> {
        self.packets
            .iter()
            .find(|p| p.file == file && p.i == i && p.j == j)
            .map(|p| p.data.as_slice())
            .ok_or_else(|| {
                SchemeError::ConfigMismatch(format!("cache lacks W_{file}^({i},{j})"))
            })
    }
}

/// The `K` packets sent for one demand; packet `k-1` is `X^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Broadcast {
    pub demand: Demand,
    pub packets: Vec<Vec<Symbol>>,
}

impl Broadcast {
    pub fn symbol_count(&self) -> usize {
        self.packets.iter().map(Vec::len).sum()
    }

    /// Two bytes per symbol, packets back to back.
    pub fn to_wire(&self, field: &FieldCtx) -> Vec<u8> {
        field.write_coded(&self.packets.concat())
    }

    pub fn from_wire(bytes: &[u8], demand: Demand, field: &FieldCtx) -> Result<Self, SchemeError> {
        let symbols = field.read_coded(bytes)?;
        let k = demand.users();
        if k == 0 || symbols.len() % k != 0 {
            return Err(SchemeError::LengthMismatch(format!(
                "{} symbols cannot split into {k} packets",
                symbols.len()
            )));
        }
        let len = symbols.len() / k;
        Ok(Broadcast {
            demand,
            packets: symbols.chunks(len.max(1)).map(<[Symbol]>::to_vec).collect(),
        })
    }
}

fn check_library(library: &[SubfileGrid], cfg: &NetworkConfig) -> Result<usize, SchemeError> {
    if library.len() != cfg.files() {
        return Err(SchemeError::ConfigMismatch(format!(
            "{} files for N={}",
            library.len(),
            cfg.files()
        )));
    }
    let len = library[0].part_len();
    for g in library {
        if g.part_count() != cfg.pair_count() {
            return Err(SchemeError::ConfigMismatch(format!(
                "{} subfiles, expected {}",
                g.part_count(),
                cfg.pair_count()
            )));
        }
        if g.part_len() != len {
            return Err(SchemeError::ConfigMismatch("subfile lengths differ".into()));
        }
    }
    Ok(len)
}

fn check_demand(demand: &Demand, cfg: &NetworkConfig) -> Result<(), SchemeError> {
    demand.validate(cfg.files(), cfg.users())?;
    if !demand.is_surjective(cfg.files()) {
        return Err(SchemeError::DemandNotInD(demand.clone()));
    }
    Ok(())
}

pub fn place(library: &[SubfileGrid], cfg: &NetworkConfig) -> Result<Vec<CacheContents>, SchemeError> {
    let len = check_library(library, cfg)?;
    let (n, k) = (cfg.files(), cfg.users());
    let f = cfg.field();
    let file_lengths: Vec<usize> = library.iter().map(SubfileGrid::original_len).collect();

    Ok((1..=k)
        .map(|user| {
            let succ = successor(user, k);
            let mut stage1 = Vec::new();
            for file in 1..=n {
                for (i, j) in ordered_pairs(k).filter(|&(i, j)| i != user && j != user) {
                    stage1.push(Stage1Packet {
                        file,
                        i,
                        j,
                        data: library[file - 1].pair(i, j, k).to_vec(),
                    });
                }
            }
            let mut stage2_diffs = Vec::new();
            for file in 1..=n {
                let grid = &library[file - 1];
                for j in (1..=k).filter(|&j| j != user && j != succ) {
                    let mut data = grid.pair(user, succ, k).to_vec();
                    f.sub_assign(&mut data, grid.pair(user, j, k));
                    stage2_diffs.push(Stage2Diff { file, j, data });
                }
            }
            let mut stage2_sum = vec![Symbol::ZERO; len];
            for grid in library {
                f.axpy(&mut stage2_sum, f.symbol(1), grid.pair(user, succ, k));
            }
            CacheContents {
                user,
                stage1,
                stage2_diffs,
                stage2_sum,
                file_lengths: file_lengths.clone(),
            }
        })
        .collect())
}

/// `alpha_k^s / N_k^s` with `alpha = -1` when users `k` and `s` want the same file.
pub fn delivery_coefficient(ctx: &DemandContext, k: usize, s: usize) -> Rational {
    let d = ctx.demand();
    let alpha = if d.file_of(k) == d.file_of(s) { -1 } else { 1 };
    rat(alpha, ctx.count(k, s) as i64)
}

pub fn deliver(
    library: &[SubfileGrid],
    demand: &Demand,
    cfg: &NetworkConfig,
) -> Result<Broadcast, SchemeError> {
    let len = check_library(library, cfg)?;
    check_demand(demand, cfg)?;
    let k = cfg.users();
    let f = cfg.field();
    let ctx = DemandContext::new(demand);
    let packets = (1..=k)
        .map(|user| {
            let mut x = vec![Symbol::ZERO; len];
            for s in ctx.others(user).collect::<Vec<_>>() {
                let c = f.rational(delivery_coefficient(&ctx, user, s))?;
                f.axpy(&mut x, c, library[demand.file_of(s) - 1].pair(user, s, k));
            }
            Ok(x)
        })
        .collect::<Result<_, SchemeError>>()?;
    Ok(Broadcast { demand: demand.clone(), packets })
}

fn check_broadcast(b: &Broadcast, cfg: &NetworkConfig, len: usize) -> Result<(), SchemeError> {
    check_demand(&b.demand, cfg)?;
    if b.packets.len() != cfg.users() || b.packets.iter().any(|p| p.len() != len) {
        return Err(SchemeError::LengthMismatch(format!(
            "broadcast must hold {} packets of {len} symbols",
            cfg.users()
        )));
    }
    Ok(())
}

/// Recovers `W_{d_k}^{jk}` for every `j != k` from `X^j` and the uncoded
/// stage-1 packets alone.
pub fn decode_stage1(
    stage1: &[Stage1Packet],
    broadcast: &Broadcast,
    user: usize,
    field: &FieldCtx,
) -> Result<Vec<(usize, Vec<Symbol>)>, SchemeError> {
    let d = &broadcast.demand;
    let ctx = DemandContext::new(d);
    let cached = Stage1Index::new(stage1);
    ctx.others(user)
        .collect::<Vec<_>>()
        .into_iter()
        .map(|j| {
            let mut acc = broadcast.packets[j - 1].clone();
            for s in ctx.others(j).filter(|&s| s != user).collect::<Vec<_>>() {
                let c = field.rational(delivery_coefficient(&ctx, j, s))?;
                let w = cached.get(d.file_of(s), j, s)?;
                field.axpy(&mut acc, field.neg(c), w);
            }
            let inv = field.rational(delivery_coefficient(&ctx, j, user).recip())?;
            field.scale(&mut acc, inv);
            Ok((j, acc))
        })
        .collect()
}

/// Recovers the full file requested by `cache.user`.
pub fn decode(
    cache: &CacheContents,
    broadcast: &Broadcast,
    cfg: &NetworkConfig,
) -> Result<Vec<u8>, SchemeError> {
    let len = cache.stage2_sum.len();
    check_broadcast(broadcast, cfg, len)?;
    let (k, user) = (cfg.users(), cache.user);
    let f = cfg.field();
    let d = &broadcast.demand;
    let want = d.file_of(user);
    let ctx = DemandContext::new(d);
    let succ = successor(user, k);
    let cached = cache.stage1_lookup();

    let mut parts: Vec<Option<Vec<Symbol>>> = vec![None; cfg.pair_count()];
    for (i, j) in ordered_pairs(k).filter(|&(i, j)| i != user && j != user) {
        parts[pair_index(i, j, k)] = Some(cached.get(want, i, j)?.to_vec());
    }
    for (j, w) in decode_stage1(&cache.stage1, broadcast, user, f)? {
        parts[pair_index(j, user, k)] = Some(w);
    }

    // Undo the differences inside X^k so only W^{k,s(k)} terms remain.
    let diff = |file: usize, j: usize| -> Result<&[Symbol], SchemeError> {
        cache
            .stage2_diffs
            .iter()
            .find(|p| p.file == file && p.j == j)
            .map(|p| p.data.as_slice())
            .ok_or_else(|| SchemeError::ConfigMismatch(format!("cache lacks diff ({file},{j})")))
    };
    let mut y = broadcast.packets[user - 1].clone();
    for s in ctx.others(user).filter(|&s| s != succ).collect::<Vec<_>>() {
        let c = f.rational(delivery_coefficient(&ctx, user, s))?;
        f.axpy(&mut y, c, diff(d.file_of(s), s)?);
    }
    let mut head = cache.stage2_sum.clone();
    f.sub_assign(&mut head, &y);
    let shared = ctx.others(user).any(|s| d.file_of(s) == want);
    if shared {
        f.scale(&mut head, f.rational(rat(1, 2))?);
    }
    for j in (1..=k).filter(|&j| j != user && j != succ) {
        let mut w = head.clone();
        f.sub_assign(&mut w, diff(want, j)?);
        parts[pair_index(user, j, k)] = Some(w);
    }
    parts[pair_index(user, succ, k)] = Some(head);

    let mut symbols: Vec<Symbol> = parts.into_iter().flatten().flatten().collect();
    let original = *cache
        .file_lengths
        .get(want - 1)
        .ok_or_else(|| SchemeError::ConfigMismatch("missing file length".into()))?;
    if symbols.len() < original {
        return Err(SchemeError::LengthMismatch("decoded file is short".into()));
    }
    symbols.truncate(original);
    Ok(decode_bytes(&symbols)?)
}

/// `(M_A, 1/(K-1))` with `M_A = (N/K)(K-2 + (K-2+1/N)/(K-1))`.
pub fn scheme_point(n: usize, k: usize) -> (Rational, Rational) {
    let (n, k) = (n as i64, k as i64);
    let inner = int(k - 2) + (int(k - 2) + rat(1, n)) / int(k - 1);
    (rat(n, k) * inner, rat(1, k - 1))
}

/// Memory and rate measured from actual placements, in file units.
pub fn measured_point(caches: &[CacheContents], broadcast: &Broadcast, file_symbols: usize) -> (Rational, Rational) {
    let most = caches.iter().map(CacheContents::symbol_count).max().unwrap_or(0);
    let fs = file_symbols as i64;
    (rat(most as i64, fs), rat(broadcast.symbol_count() as i64, fs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_demands, split_library};

    fn setup(n: usize, k: usize, len: usize) -> (NetworkConfig, Vec<Vec<u8>>, Vec<SubfileGrid>) {
        let cfg = NetworkConfig::new(n, k, None).unwrap();
        let files: Vec<Vec<u8>> = (0..n)
            .map(|f| (0..len).map(|b| ((b * 31 + f * 97 + 7) % 256) as u8).collect())
            .collect();
        let lib = split_library(&files, cfg.pair_count(), cfg.field()).unwrap();
        (cfg, files, lib)
    }

    #[test]
    fn packet_counts_three_four() {
        let (cfg, _, lib) = setup(3, 4, 24);
        for c in place(&lib, &cfg).unwrap() {
            assert_eq!(c.stage1.len(), 18);
            assert_eq!(c.stage2_diffs.len() + 1, 7);
            assert_eq!(c.packet_count(), 25);
            assert_eq!(rat(c.symbol_count() as i64, 24), rat(25, 12));
        }
    }

    #[test]
    fn cache_one_matches_table() {
        // Z_1: stage 1 over users {2,3,4}; diffs relative to W^{12}.
        let (cfg, _, lib) = setup(3, 4, 24);
        let z1 = &place(&lib, &cfg).unwrap()[0];
        let pairs: Vec<(usize, usize)> =
            z1.stage1.iter().filter(|p| p.file == 1).map(|p| (p.i, p.j)).collect();
        assert_eq!(pairs, vec![(2, 3), (2, 4), (3, 2), (3, 4), (4, 2), (4, 3)]);
        let js: Vec<(usize, usize)> = z1.stage2_diffs.iter().map(|p| (p.file, p.j)).collect();
        assert_eq!(js, vec![(1, 3), (1, 4), (2, 3), (2, 4), (3, 3), (3, 4)]);
        let f = cfg.field();
        let mut want = lib[0].pair(1, 2, 4).to_vec();
        f.sub_assign(&mut want, lib[0].pair(1, 3, 4));
        assert_eq!(z1.stage2_diffs[0].data, want);

        // Z_4 wraps around to W^{41}.
        let z4 = &place(&lib, &cfg).unwrap()[3];
        let mut want = lib[0].pair(4, 1, 4).to_vec();
        f.sub_assign(&mut want, lib[0].pair(4, 2, 4));
        assert_eq!((z4.stage2_diffs[0].j, &z4.stage2_diffs[0].data), (2, &want));
    }

    #[test]
    fn delivery_coefficients_example() {
        let cfg = NetworkConfig::new(3, 4, None).unwrap();
        let d = Demand::new(vec![1, 1, 2, 3], &cfg).unwrap();
        let ctx = DemandContext::new(&d);
        // X^1 = Q^{13} + R^{14} - P^{12}
        assert_eq!(delivery_coefficient(&ctx, 1, 2), int(-1));
        assert_eq!(delivery_coefficient(&ctx, 1, 3), int(1));
        assert_eq!(delivery_coefficient(&ctx, 1, 4), int(1));
        // X^3 = R^{34} + P^{31}/2 + P^{32}/2
        assert_eq!(delivery_coefficient(&ctx, 3, 1), rat(1, 2));
        assert_eq!(delivery_coefficient(&ctx, 3, 2), rat(1, 2));
        assert_eq!(delivery_coefficient(&ctx, 3, 4), int(1));
    }

    #[test]
    fn broadcast_matches_example() {
        let (cfg, _, lib) = setup(3, 4, 24);
        let f = cfg.field();
        let d = Demand::new(vec![1, 1, 2, 3], &cfg).unwrap();
        let b = deliver(&lib, &d, &cfg).unwrap();
        let mut x3 = lib[2].pair(3, 4, 4).to_vec();
        let half = f.rational(rat(1, 2)).unwrap();
        f.axpy(&mut x3, half, lib[0].pair(3, 1, 4));
        f.axpy(&mut x3, half, lib[0].pair(3, 2, 4));
        assert_eq!(b.packets[2], x3);
        assert_eq!(rat(b.symbol_count() as i64, 24), rat(1, 3));
    }

    #[test]
    fn stage_one_recovers_from_one_packet() {
        let (cfg, _, lib) = setup(3, 4, 24);
        let d = Demand::new(vec![1, 1, 2, 3], &cfg).unwrap();
        let b = deliver(&lib, &d, &cfg).unwrap();
        let z1 = &place(&lib, &cfg).unwrap()[0];
        let got = decode_stage1(&z1.stage1, &b, 1, cfg.field()).unwrap();
        for (j, w) in got {
            assert_eq!(w, lib[0].pair(j, 1, 4));
        }
    }

    #[test]
    fn rejects_non_surjective_demand() {
        let (cfg, _, lib) = setup(3, 4, 24);
        let d = Demand::new(vec![1, 1, 1, 1], &cfg).unwrap();
        assert_eq!(deliver(&lib, &d, &cfg), Err(SchemeError::DemandNotInD(d)));
    }

    #[test]
    fn exhaustive_small_grid() {
        for k in 2..=5 {
            for n in 1..=k {
                let (cfg, files, lib) = setup(n, k, 3 * k * (k - 1) + 1);
                let caches = place(&lib, &cfg).unwrap();
                let fs = lib[0].padded_len();
                let (ma, r) = scheme_point(n, k);
                for d in enumerate_demands(&cfg) {
                    let b = deliver(&lib, &d, &cfg).unwrap();
                    assert_eq!(measured_point(&caches, &b, fs), (ma, r), "N={n} K={k}");
                    for c in &caches {
                        let out = decode(c, &b, &cfg).unwrap();
                        assert_eq!(out, files[d.file_of(c.user) - 1], "N={n} K={k} d={d} u={}", c.user);
                    }
                }
            }
        }
    }

    #[test]
    fn packet_count_formula() {
        for k in 2..=6 {
            for n in 1..=k {
                let (cfg, _, lib) = setup(n, k, 1);
                let c = &place(&lib, &cfg).unwrap()[0];
                assert_eq!(c.packet_count(), n * k * (k - 2) + 1);
            }
        }
    }

    #[test]
    fn scheme_points() {
        assert_eq!(scheme_point(3, 4), (rat(25, 12), rat(1, 3)));
        assert_eq!(scheme_point(4, 4), (rat(11, 4), rat(1, 3)));
    }

    #[test]
    fn wire_round_trip() {
        let (cfg, _, lib) = setup(2, 3, 50);
        let d = Demand::new(vec![1, 2, 2], &cfg).unwrap();
        let b = deliver(&lib, &d, &cfg).unwrap();
        let bytes = b.to_wire(cfg.field());
        assert_eq!(bytes.len(), 2 * b.symbol_count());
        assert_eq!(Broadcast::from_wire(&bytes, d, cfg.field()).unwrap(), b);
    }
}
