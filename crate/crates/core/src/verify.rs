//! Exhaustive decode checks and single-file round trips for both schemes.

use crate::baselines::{man_decode, man_deliver, man_place, man_point, BaselineError, ManCache};
use crate::model::{enumerate_demands, split_library, Demand, ModelError, NetworkConfig, SubfileGrid};
use crate::scheme::{decode, deliver, place, scheme_point, CacheContents, SchemeError};
use crate::{fmt_ratio, rat, Rational};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("decoding failed: {0}")]
    Decode(String),
    #[error("user {user} outside 1..={k}")]
    BadUser { user: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    New,
    Man,
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "new" => Ok(SchemeKind::New),
            "man" => Ok(SchemeKind::Man),
            other => Err(format!("unknown scheme {other:?}; expected new or man")),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::New => "new",
            SchemeKind::Man => "man",
        })
    }
}

impl SchemeKind {
    pub fn parts(self, cfg: &NetworkConfig) -> usize {
        match self {
            SchemeKind::New => cfg.pair_count(),
            SchemeKind::Man => cfg.users(),
        }
    }

    pub fn expected_point(self, cfg: &NetworkConfig) -> (Rational, Rational) {
        match self {
            SchemeKind::New => scheme_point(cfg.files(), cfg.users()),
            SchemeKind::Man => man_point(cfg.files(), cfg.users()),
        }
    }
}

/// Deterministic filler bytes.
pub fn pseudorandom_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0u8; len];
    rng.fill_bytes(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub demand: String,
    pub user: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigSummary {
    pub n: usize,
    pub k: usize,
    pub p: u64,
    pub scheme: SchemeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub config: ConfigSummary,
    pub demands_checked: usize,
    pub users_checked: usize,
    pub failures: Vec<Failure>,
    pub measured_m: String,
    pub measured_r: String,
    pub expected_m: String,
    pub expected_r: String,
    pub point_matches: bool,
    pub wall_time_ms: u128,
    pub pass: bool,
}

struct DemandOutcome {
    failures: Vec<Failure>,
    cache_symbols: usize,
    broadcast_symbols: usize,
}

/// Per-user decode results, the largest cache and the broadcast size.
type Served = (Vec<Result<Vec<u8>, String>>, usize, usize);

enum Caches {
    New(Vec<CacheContents>),
    Man(Vec<ManCache>),
}

/// A placed library, ready to serve any demand.
struct Run {
    cfg: NetworkConfig,
    files: Vec<Vec<u8>>,
    lib: Vec<SubfileGrid>,
    caches: Caches,
}

impl Run {
    fn new(kind: SchemeKind, cfg: NetworkConfig, files: Vec<Vec<u8>>) -> Result<Self, VerifyError> {
        let lib = split_library(&files, kind.parts(&cfg), cfg.field())?;
        let caches = match kind {
            SchemeKind::New => Caches::New(place(&lib, &cfg)?),
            SchemeKind::Man => Caches::Man(man_place(&lib, &cfg)?),
        };
        Ok(Run { cfg, files, lib, caches })
    }

    fn file_symbols(&self) -> usize {
        self.lib[0].padded_len()
    }

    fn execute(&self, d: &Demand) -> Result<Served, VerifyError> {
        Ok(match &self.caches {
            Caches::New(caches) => {
                let b = deliver(&self.lib, d, &self.cfg)?;
                let out = caches.iter().map(|c| decode(c, &b, &self.cfg).map_err(|e| e.to_string())).collect();
                let most = caches.iter().map(|c| c.symbol_count()).max().unwrap_or(0);
                (out, most, b.symbol_count())
            }
            Caches::Man(caches) => {
                let pkt = man_deliver(&self.lib, d, &self.cfg)?;
                let out = caches.iter().map(|c| man_decode(c, &pkt, &self.cfg).map_err(|e| e.to_string())).collect();
                let most = caches.iter().map(|c| c.symbol_count()).max().unwrap_or(0);
                (out, most, pkt.data.len())
            }
        })
    }

    fn check(&self, d: &Demand) -> DemandOutcome {
        match self.execute(d) {
            Ok((decoded, cache_symbols, broadcast_symbols)) => {
                let failures = decoded
                    .into_iter()
                    .enumerate()
                    .filter_map(|(idx, got)| {
                        let user = idx + 1;
                        let reason = match got {
                            Ok(bytes) if bytes == self.files[d.file_of(user) - 1] => return None,
                            Ok(_) => "decoded bytes differ from the requested file".to_string(),
                            Err(e) => e,
                        };
                        Some(Failure { demand: d.to_string(), user, reason })
                    })
                    .collect();
                DemandOutcome { failures, cache_symbols, broadcast_symbols }
            }
            Err(e) => DemandOutcome {
                failures: vec![Failure { demand: d.to_string(), user: 0, reason: e.to_string() }],
                cache_symbols: 0,
                broadcast_symbols: 0,
            },
        }
    }
}

/// Library of `N` deterministic files sharing one padded length.
pub fn test_library(cfg: &NetworkConfig, file_len: usize) -> Vec<Vec<u8>> {
    (0..cfg.files()).map(|n| pseudorandom_bytes(file_len, 0x5eed + n as u64)).collect()
}

/// Decodes every user under every demand that requests all files.
pub fn verify_exhaustive(
    cfg: &NetworkConfig,
    kind: SchemeKind,
    jobs: usize,
    file_len: usize,
) -> Result<VerifyReport, VerifyError> {
    let start = Instant::now();
    let run = Run::new(kind, *cfg, test_library(cfg, file_len))?;
    let demands = enumerate_demands(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| VerifyError::Pool(e.to_string()))?;
    let outcomes: Vec<DemandOutcome> = pool.install(|| demands.par_iter().map(|d| run.check(d)).collect());

    let fs = run.file_symbols() as i64;
    let cache = outcomes.iter().map(|o| o.cache_symbols).max().unwrap_or(0);
    let bcast = outcomes.iter().map(|o| o.broadcast_symbols).max().unwrap_or(0);
    let uniform = outcomes.iter().all(|o| o.broadcast_symbols == bcast && o.cache_symbols == cache);
    let (m, r) = (rat(cache as i64, fs), rat(bcast as i64, fs));
    let (em, er) = kind.expected_point(cfg);
    let failures: Vec<Failure> = outcomes.into_iter().flat_map(|o| o.failures).collect();
    let point_matches = uniform && m == em && r == er;
    Ok(VerifyReport {
        config: ConfigSummary { n: cfg.files(), k: cfg.users(), p: cfg.field().modulus(), scheme: kind },
        demands_checked: demands.len(),
        users_checked: demands.len() * cfg.users(),
        pass: failures.is_empty() && point_matches,
        failures,
        measured_m: fmt_ratio(&m),
        measured_r: fmt_ratio(&r),
        expected_m: fmt_ratio(&em),
        expected_r: fmt_ratio(&er),
        point_matches,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrip {
    pub output: Vec<u8>,
    pub m: Rational,
    pub r: Rational,
}

/// Sends `input` to `user` as the file it requests under `demand`; the other
/// files are deterministic filler of the same length.
pub fn roundtrip(
    cfg: &NetworkConfig,
    kind: SchemeKind,
    demand: &Demand,
    user: usize,
    input: &[u8],
) -> Result<RoundTrip, VerifyError> {
    if user == 0 || user > cfg.users() {
        return Err(VerifyError::BadUser { user, k: cfg.users() });
    }
    demand.validate(cfg.files(), cfg.users())?;
    let want = demand.file_of(user);
    let files = (1..=cfg.files())
        .map(|n| if n == want { input.to_vec() } else { pseudorandom_bytes(input.len(), n as u64) })
        .collect();
    let run = Run::new(kind, *cfg, files)?;
    let (mut decoded, cache, bcast) = run.execute(demand)?;
    let output = decoded.swap_remove(user - 1).map_err(VerifyError::Decode)?;
    let fs = run.file_symbols() as i64;
    Ok(RoundTrip { output, m: rat(cache as i64, fs), r: rat(bcast as i64, fs) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_three_four() {
        let cfg = NetworkConfig::new(3, 4, None).unwrap();
        let r = verify_exhaustive(&cfg, SchemeKind::New, 2, 100).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!((r.demands_checked, r.measured_m.as_str(), r.measured_r.as_str()), (36, "25/12", "1/3"));
        let r = verify_exhaustive(&cfg, SchemeKind::Man, 1, 100).unwrap();
        assert!(r.pass);
        assert_eq!(r.measured_r, "1/4");
    }

    #[test]
    fn job_count_does_not_change_results() {
        let cfg = NetworkConfig::new(2, 4, None).unwrap();
        let mut a = verify_exhaustive(&cfg, SchemeKind::New, 1, 40).unwrap();
        let mut b = verify_exhaustive(&cfg, SchemeKind::New, 4, 40).unwrap();
        a.wall_time_ms = 0;
        b.wall_time_ms = 0;
        assert_eq!(a, b);
    }

    #[test]
    fn roundtrip_both_schemes() {
        let cfg = NetworkConfig::new(3, 4, None).unwrap();
        let input = pseudorandom_bytes(1000, 9);
        let d = Demand::parse("1,1,2,3", &cfg).unwrap();
        let rt = roundtrip(&cfg, SchemeKind::New, &d, 3, &input).unwrap();
        assert_eq!((rt.output, rt.m, rt.r), (input.clone(), rat(25, 12), rat(1, 3)));
        let d = Demand::parse("1,1,1,1", &cfg).unwrap();
        let rt = roundtrip(&cfg, SchemeKind::Man, &d, 2, &input).unwrap();
        assert_eq!((rt.output, rt.r), (input.clone(), rat(1, 4)));
        assert!(matches!(
            roundtrip(&cfg, SchemeKind::New, &d, 2, &input),
            Err(VerifyError::Scheme(SchemeError::DemandNotInD(_)))
        ));
    }

    #[test]
    fn filler_is_deterministic() {
        assert_eq!(pseudorandom_bytes(64, 3), pseudorandom_bytes(64, 3));
        assert_ne!(pseudorandom_bytes(64, 3), pseudorandom_bytes(64, 4));
    }
}
