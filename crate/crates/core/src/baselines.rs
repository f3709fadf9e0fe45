//! The corner scheme at `M = N(K-1)/K`, plus closed-form rates of earlier
//! schemes that are used only as curve points.

use crate::field::{decode_bytes, Symbol};
use crate::model::{binomial, Demand, ModelError, NetworkConfig, SubfileGrid};
use crate::{int, rat, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("library does not match configuration: {0}")]
    ConfigMismatch(String),
    #[error("{what} outside its valid range")]
    OutOfRange { what: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// User `k` holds part `m` of every file for each `m != k`; part `m` is the
/// subfile indexed by the `(K-1)`-subset that omits user `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManCache {
    pub user: usize,
    /// `(file, omitted user, symbols)`.
    pub parts: Vec<(usize, usize, Vec<Symbol>)>,
    pub file_lengths: Vec<usize>,
}

impl ManCache {
    pub fn symbol_count(&self) -> usize {
        self.parts.iter().map(|p| p.2.len()).sum()
    }

    fn part(&self, file: usize, omitted: usize) -> Option<&[Symbol]> {
        self.parts
            .iter()
            .find(|p| p.0 == file && p.1 == omitted)
            .map(|p| p.2.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManPacket {
    pub demand: Demand,
    pub data: Vec<Symbol>,
}

fn check_library(library: &[SubfileGrid], cfg: &NetworkConfig) -> Result<usize, BaselineError> {
    let k = cfg.users();
    if library.len() != cfg.files() {
        return Err(BaselineError::ConfigMismatch(format!("{} files for N={}", library.len(), cfg.files())));
    }
    let len = library[0].part_len();
    if library.iter().any(|g| g.part_count() != k || g.part_len() != len) {
        return Err(BaselineError::ConfigMismatch(format!("every file needs {k} equal parts")));
    }
    Ok(len)
}

pub fn man_place(library: &[SubfileGrid], cfg: &NetworkConfig) -> Result<Vec<ManCache>, BaselineError> {
    check_library(library, cfg)?;
    let k = cfg.users();
    let lengths: Vec<usize> = library.iter().map(SubfileGrid::original_len).collect();
    Ok((1..=k)
        .map(|user| ManCache {
            user,
            parts: (1..=cfg.files())
                .flat_map(|file| {
                    (1..=k)
                        .filter(move |&m| m != user)
                        .map(move |m| (file, m, library[file - 1].part(m - 1).to_vec()))
                })
                .collect(),
            file_lengths: lengths.clone(),
        })
        .collect())
}

/// One packet: the sum over users `k` of the part of `W_{d_k}` that `k` lacks.
pub fn man_deliver(
    library: &[SubfileGrid],
    demand: &Demand,
    cfg: &NetworkConfig,
) -> Result<ManPacket, BaselineError> {
    let len = check_library(library, cfg)?;
    demand.validate(cfg.files(), cfg.users())?;
    let f = cfg.field();
    let mut data = vec![Symbol::ZERO; len];
    for k in 1..=cfg.users() {
        f.axpy(&mut data, f.symbol(1), library[demand.file_of(k) - 1].part(k - 1));
    }
    Ok(ManPacket { demand: demand.clone(), data })
}

pub fn man_decode(cache: &ManCache, packet: &ManPacket, cfg: &NetworkConfig) -> Result<Vec<u8>, BaselineError> {
    let f = cfg.field();
    let d = &packet.demand;
    d.validate(cfg.files(), cfg.users())?;
    let user = cache.user;
    let want = d.file_of(user);
    let missing = |file, m| {
        cache
            .part(file, m)
            .ok_or_else(|| BaselineError::ConfigMismatch(format!("cache lacks part {m} of file {file}")))
    };
    let mut own = packet.data.clone();
    for m in (1..=cfg.users()).filter(|&m| m != user) {
        f.sub_assign(&mut own, missing(d.file_of(m), m)?);
    }
    let mut symbols = Vec::with_capacity(own.len() * cfg.users());
    for m in 1..=cfg.users() {
        if m == user {
            symbols.extend_from_slice(&own);
        } else {
            symbols.extend_from_slice(missing(want, m)?);
        }
    }
    symbols.truncate(cache.file_lengths[want - 1]);
    Ok(decode_bytes(&symbols)?)
}

/// `(N(K-1)/K, 1/K)`.
pub fn man_point(n: usize, k: usize) -> (Rational, Rational) {
    (rat((n * (k - 1)) as i64, k as i64), rat(1, k as i64))
}

/// `(C(K, r+1) - C(K-N, r+1)) / C(K, r)`, reached at `M = N r / K`.
pub fn rate_yu(n: usize, k: usize, r: usize) -> Result<Rational, BaselineError> {
    if r > k || n > k || n == 0 {
        return Err(BaselineError::OutOfRange { what: format!("r={r} for N={n}, K={k}") });
    }
    let (n, k, r) = (n as u64, k as u64, r as u64);
    let top = binomial(k, r + 1) as i64 - binomial(k - n, r + 1) as i64;
    Ok(rat(top, binomial(k, r) as i64))
}

pub fn yu_point(n: usize, k: usize, r: usize) -> Result<(Rational, Rational), BaselineError> {
    Ok((rat((n * r) as i64, k as i64), rate_yu(n, k, r)?))
}

/// `N - N M` for `0 <= M <= 1/K`.
pub fn rate_chen(n: usize, k: usize, m: Rational) -> Result<Rational, BaselineError> {
    if n == 0 || n > k || m < int(0) || m > rat(1, k as i64) {
        return Err(BaselineError::OutOfRange { what: format!("M={m} for N={n}, K={k}") });
    }
    Ok(int(n as i64) * (int(1) - m))
}

/// `(N^2-1)/N - (N-1) M` for `K = N >= 2` and `1/N <= M <= 1/(N-1)`.
pub fn rate_gomez(n: usize, m: Rational) -> Result<Rational, BaselineError> {
    let ni = n as i64;
    if n < 2 || m < rat(1, ni) || m > rat(1, ni - 1) {
        return Err(BaselineError::OutOfRange { what: format!("M={m} for N=K={n}") });
    }
    Ok(rat(ni * ni - 1, ni) - int(ni - 1) * m)
}
