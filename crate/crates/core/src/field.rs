//! Prime-field arithmetic over `Z_p` and the byte/symbol codecs.
//!
//! Every scheme coefficient is a small rational (`±1/N`, `1/2`), so the
//! field only has to be odd and larger than the number of users for all
//! denominators to be invertible.

use crate::Rational;
use num_integer::Integer;
use thiserror::Error;

/// Largest modulus whose symbols fit the two-byte coded wire format.
pub const MAX_MODULUS: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is even; division by 2 is required")]
    EvenModulus(u64),
    #[error("modulus {0} exceeds the two-byte symbol format")]
    ModulusTooLarge(u64),
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
    #[error("symbol {0} does not fit in a byte")]
    SymbolOutOfByteRange(u32),
    #[error("modulus {0} is too small to carry one byte per symbol")]
    ModulusTooSmallForBytes(u64),
    #[error("coded stream has odd length {0}")]
    TruncatedSymbol(usize),
    #[error("symbol {symbol} is not reduced modulo {p}")]
    UnreducedSymbol { symbol: u32, p: u64 },
}

/// One element of `Z_p`, always reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Symbol(u32);

impl Symbol {
    pub const ZERO: Symbol = Symbol(0);

    pub fn value(self) -> u32 {
        self.0
    }
}

/// An odd prime modulus. Immutable and `Copy`, so it can be shared freely
/// between verification workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldCtx {
    p: u64,
}

/// Deterministic trial division; moduli here never exceed 2^16.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Default modulus for a `K`-user network: 257 while a byte fits in one
/// symbol, otherwise the smallest odd prime above `K`.
pub fn default_modulus(k: usize) -> u64 {
    if k <= 256 {
        return 257;
    }
    let mut p = k as u64 + 1;
    while !(p % 2 == 1 && is_prime(p)) {
        p += 1;
    }
    p
}

impl FieldCtx {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p == 2 {
            return Err(FieldError::EvenModulus(p));
        }
        if p > MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(p));
        }
        Ok(FieldCtx { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Builds a reduced symbol from any integer.
    pub fn symbol(&self, v: i64) -> Symbol {
        Symbol(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(((a.0 as u64 + b.0 as u64) % self.p) as u32)
    }

    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(((a.0 as u64 + self.p - b.0 as u64) % self.p) as u32)
    }

    pub fn neg(&self, a: Symbol) -> Symbol {
        self.sub(Symbol::ZERO, a)
    }

    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(((a.0 as u64 * b.0 as u64) % self.p) as u32)
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero(self.p));
        }
        let g = (a.0 as i64).extended_gcd(&(self.p as i64));
        debug_assert_eq!(g.gcd, 1);
        Ok(self.symbol(g.x))
    }

    /// Maps `u/v` into the field as `u * v^{-1}`.
    pub fn rational(&self, q: Rational) -> Result<Symbol, FieldError> {
        let den = self.symbol(*q.denom());
        Ok(self.mul(self.symbol(*q.numer()), self.inv(den)?))
    }

    pub fn scale_by_rational(&self, a: Symbol, q: Rational) -> Result<Symbol, FieldError> {
        Ok(self.mul(a, self.rational(q)?))
    }

    /// `acc += coeff * src`, element-wise.
    pub fn axpy(&self, acc: &mut [Symbol], coeff: Symbol, src: &[Symbol]) {
        debug_assert_eq!(acc.len(), src.len());
        for (a, &s) in acc.iter_mut().zip(src) {
            *a = self.add(*a, self.mul(coeff, s));
        }
    }

    pub fn scale(&self, v: &mut [Symbol], coeff: Symbol) {
        for a in v.iter_mut() {
            *a = self.mul(*a, coeff);
        }
    }

    pub fn sub_assign(&self, acc: &mut [Symbol], src: &[Symbol]) {
        for (a, &s) in acc.iter_mut().zip(src) {
            *a = self.sub(*a, s);
        }
    }

    /// One symbol per byte. Needs `p >= 257`.
    pub fn encode_bytes(&self, bytes: &[u8]) -> Result<Vec<Symbol>, FieldError> {
        if self.p < 257 {
            return Err(FieldError::ModulusTooSmallForBytes(self.p));
        }
        Ok(bytes.iter().map(|&b| Symbol(b as u32)).collect())
    }

    /// Serializes coded symbols as two big-endian bytes each.
    pub fn write_coded(&self, symbols: &[Symbol]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * 2);
        for s in symbols {
            out.extend_from_slice(&(s.0 as u16).to_be_bytes());
        }
        out
    }

    pub fn read_coded(&self, bytes: &[u8]) -> Result<Vec<Symbol>, FieldError> {
        if !bytes.len().is_multiple_of(2) {
            return Err(FieldError::TruncatedSymbol(bytes.len()));
        }
        bytes
            .chunks_exact(2)
            .map(|c| {
                let v = u16::from_be_bytes([c[0], c[1]]) as u32;
                if v as u64 >= self.p {
                    Err(FieldError::UnreducedSymbol { symbol: v, p: self.p })
                } else {
                    Ok(Symbol(v))
                }
            })
            .collect()
    }
}

/// Inverse of [`FieldCtx::encode_bytes`]. Fails on any symbol that is not a
/// plain byte, which is what coded (undecoded) content looks like.
pub fn decode_bytes(symbols: &[Symbol]) -> Result<Vec<u8>, FieldError> {
    symbols
        .iter()
        .map(|s| u8::try_from(s.0).map_err(|_| FieldError::SymbolOutOfByteRange(s.0)))
        .collect()
}

/// Plain symbols serialize as a single byte.
pub fn write_plain(symbols: &[Symbol]) -> Result<Vec<u8>, FieldError> {
    decode_bytes(symbols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f257() -> FieldCtx {
        FieldCtx::new(257).unwrap()
    }

    #[test]
    fn make_field_accepts_and_rejects() {
        assert_eq!(FieldCtx::new(257).unwrap().modulus(), 257);
        assert_eq!(FieldCtx::new(4), Err(FieldError::NotPrime(4)));
        assert_eq!(FieldCtx::new(2), Err(FieldError::EvenModulus(2)));
        assert_eq!(FieldCtx::new(9), Err(FieldError::NotPrime(9)));
        assert_eq!(FieldCtx::new(1), Err(FieldError::NotPrime(1)));
        assert!(FieldCtx::new(65537).is_err());
    }

    #[test]
    fn inverse_of_two() {
        let f = f257();
        assert_eq!(f.inv(f.symbol(2)).unwrap().value(), 129);
        assert_eq!(f.inv(Symbol::ZERO), Err(FieldError::DivisionByZero(257)));
    }

    #[test]
    fn rational_scaling() {
        let f = f257();
        let a = f.symbol(77);
        assert_eq!(f.scale_by_rational(a, Rational::from_integer(1)).unwrap(), a);
        let half = f.scale_by_rational(a, Rational::new(1, 2)).unwrap();
        assert_eq!(f.add(half, half), a);
        let neg_third = f.scale_by_rational(a, Rational::new(-1, 3)).unwrap();
        assert_eq!(f.mul(neg_third, f.symbol(-3)), a);
        assert!(f.rational(Rational::new(1, 257)).is_err());
    }

    #[test]
    fn default_modulus_grows_past_k() {
        assert_eq!(default_modulus(4), 257);
        assert_eq!(default_modulus(256), 257);
        assert_eq!(default_modulus(300), 307);
    }

    #[test]
    fn byte_codec_edges() {
        let f = f257();
        assert!(f.encode_bytes(&[]).unwrap().is_empty());
        let s = f.encode_bytes(&[0x00, 0xff]).unwrap();
        assert_eq!(s.iter().map(|x| x.value()).collect::<Vec<_>>(), vec![0, 255]);
        assert_eq!(decode_bytes(&s).unwrap(), vec![0x00, 0xff]);
        assert_eq!(
            decode_bytes(&[f.symbol(256)]),
            Err(FieldError::SymbolOutOfByteRange(256))
        );
        assert!(FieldCtx::new(251).unwrap().encode_bytes(&[1]).is_err());
    }

    #[test]
    fn coded_wire_is_big_endian() {
        let f = f257();
        let bytes = f.write_coded(&[f.symbol(256), f.symbol(1)]);
        assert_eq!(bytes, vec![0x01, 0x00, 0x00, 0x01]);
        assert_eq!(f.read_coded(&bytes).unwrap(), vec![f.symbol(256), f.symbol(1)]);
        assert_eq!(f.read_coded(&[0]), Err(FieldError::TruncatedSymbol(1)));
        assert!(f.read_coded(&[0x01, 0x01]).is_err());
    }

    proptest! {
        #[test]
        fn nonzero_elements_invert(a in 1u32..257) {
            let f = f257();
            let a = f.symbol(a as i64);
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.symbol(1));
        }

        #[test]
        fn small_denominators_are_invertible(a in 0u32..257, u in -8i64..8, v in 1i64..8) {
            let f = f257();
            let a = f.symbol(a as i64);
            let scaled = f.scale_by_rational(a, Rational::new(u, v)).unwrap();
            prop_assert_eq!(f.mul(scaled, f.symbol(v)), f.mul(a, f.symbol(u)));
        }

        #[test]
        fn byte_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let f = f257();
            prop_assert_eq!(decode_bytes(&f.encode_bytes(&bytes).unwrap()).unwrap(), bytes);
        }
    }
}
