//! On-disk share format and byte packing.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//!      0     4  magic "PMRC"
//!      4     2  format version (1)
//!      6     1  regime (0 = MBR, 1 = MSR)
//!      7     1  form (0 = product, 1 = systematic)
//!      8    24  n, k, d, beta, ell, m as u32
//!     32     8  field modulus
//!     40     4  node index (1-based)
//!     44     4  fill-order version (1)
//!     48     8  stripe count (beta = 1 stripes)
//!     56     8  original length (bytes, or symbols when packing = 1)
//!     64     1  packing (0 = bytes, 1 = symbols)
//!     65     7  reserved, zero
//!     72     -  payload: stripes x alpha symbols, u64 each
//! ```

use crate::algebra::{Fe, PrimeField};
use crate::code::{CodeSpec, Regime, Share};
use crate::error::{Error, Result};
use crate::mbr::MbrParams;
use crate::msr::MsrParams;

pub const MAGIC: &[u8; 4] = b"PMRC";
pub const VERSION: u16 = 1;
pub const FILL_ORDER: u32 = 1;
pub const HEADER_LEN: usize = 72;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Packing {
    Bytes,
    Symbols,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareHeader {
    pub regime: Regime,
    pub systematic: bool,
    pub n: u32,
    pub k: u32,
    pub d: u32,
    pub beta: u32,
    pub ell: u32,
    pub m: u32,
    pub modulus: u64,
    pub node: u32,
    pub stripes: u64,
    pub original_len: u64,
    pub packing: Packing,
}

/// Per-stripe sizes implied by a header.
struct Shape {
    alpha: usize,
    message: usize,
    beta: usize,
}

impl ShareHeader {
    /// Code description for rebuilding the code with default points.
    pub fn code_spec(&self) -> CodeSpec {
        let mut spec = CodeSpec::new(self.regime, self.n as usize, self.k as usize, self.d as usize, self.modulus)
            .with_beta(self.beta as usize)
            .secure(self.ell as usize, self.m as usize);
        spec.systematic = self.systematic;
        spec
    }

    fn shape(&self) -> Result<Shape> {
        let (n, k, d, beta, ell, m) = (
            self.n as usize,
            self.k as usize,
            self.d as usize,
            self.beta as usize,
            self.ell as usize,
            self.m as usize,
        );
        let shape = match self.regime {
            Regime::Mbr => {
                let p = MbrParams::derive(n, k, d, beta, ell, m)?;
                Shape {
                    alpha: d,
                    message: p.unit_b_star(),
                    beta,
                }
            }
            Regime::Msr => {
                let p = MsrParams::derive(n, k, d, beta, ell, m)?;
                Shape {
                    alpha: p.unit_alpha(),
                    message: p.b_star / beta,
                    beta,
                }
            }
        };
        Ok(shape)
    }

    fn validate(&self) -> Result<Shape> {
        let shape = self.shape().map_err(|e| Error::Format(e.to_string()))?;
        PrimeField::new(self.modulus).map_err(|e| Error::Format(e.to_string()))?;
        if self.node == 0 || self.node > self.n {
            return Err(Error::Format(format!("node {} outside 1..={}", self.node, self.n)));
        }
        if self.systematic && self.ell > 0 {
            return Err(Error::Format("systematic form with secrecy".into()));
        }
        if self.stripes == 0 || !self.stripes.is_multiple_of(shape.beta as u64) {
            return Err(Error::Format(format!(
                "stripe count {} is not a positive multiple of beta = {}",
                self.stripes, shape.beta
            )));
        }
        let symbols = self.stripes as u128 * shape.message as u128;
        let capacity = match self.packing {
            Packing::Symbols => symbols,
            Packing::Bytes => symbols * bytes_per_symbol(self.modulus).map_err(|e| Error::Format(e.to_string()))? as u128,
        };
        if self.original_len as u128 > capacity {
            return Err(Error::Format(format!(
                "original length {} exceeds capacity {capacity}",
                self.original_len
            )));
        }
        Ok(shape)
    }
}

/// A share together with its header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareFile {
    pub header: ShareHeader,
    pub share: Share,
}

impl ShareFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_LEN + self.share.stripes.len() * 8 * self.share.stripes.first().map_or(0, Vec::len));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(match h.regime {
            Regime::Mbr => 0,
            Regime::Msr => 1,
        });
        out.push(h.systematic as u8);
        for v in [h.n, h.k, h.d, h.beta, h.ell, h.m] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&h.modulus.to_le_bytes());
        out.extend_from_slice(&h.node.to_le_bytes());
        out.extend_from_slice(&FILL_ORDER.to_le_bytes());
        out.extend_from_slice(&h.stripes.to_le_bytes());
        out.extend_from_slice(&h.original_len.to_le_bytes());
        out.push(match h.packing {
            Packing::Bytes => 0,
            Packing::Symbols => 1,
        });
        out.extend_from_slice(&[0; 7]);
        for x in self.share.stripes.iter().flatten() {
            out.extend_from_slice(&(x.value() as u64).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().unwrap());
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u16_at(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let regime = match bytes[6] {
            0 => Regime::Mbr,
            1 => Regime::Msr,
            t => return Err(Error::Format(format!("unknown regime tag {t}"))),
        };
        let systematic = match bytes[7] {
            0 => false,
            1 => true,
            t => return Err(Error::Format(format!("unknown form tag {t}"))),
        };
        let fill = u32_at(44);
        if fill != FILL_ORDER {
            return Err(Error::Format(format!("unsupported fill order {fill}")));
        }
        let packing = match bytes[64] {
            0 => Packing::Bytes,
            1 => Packing::Symbols,
            t => return Err(Error::Format(format!("unknown packing tag {t}"))),
        };
        if bytes[65..72].iter().any(|&b| b != 0) {
            return Err(Error::Format("reserved bytes are not zero".into()));
        }
        let header = ShareHeader {
            regime,
            systematic,
            n: u32_at(8),
            k: u32_at(12),
            d: u32_at(16),
            beta: u32_at(20),
            ell: u32_at(24),
            m: u32_at(28),
            modulus: u64_at(32),
            node: u32_at(40),
            stripes: u64_at(48),
            original_len: u64_at(56),
            packing,
        };
        let shape = header.validate()?;
        let payload = &bytes[HEADER_LEN..];
        let expected = (header.stripes as u128) * (shape.alpha as u128) * 8;
        if payload.len() as u128 != expected {
            return Err(Error::Format(format!(
                "payload is {} bytes, header implies {expected}",
                payload.len()
            )));
        }
        let field = PrimeField::new(header.modulus)?;
        let mut stripes = Vec::with_capacity(header.stripes as usize);
        for chunk in payload.chunks_exact(8 * shape.alpha) {
            let stripe = chunk
                .chunks_exact(8)
                .map(|c| field.try_elem(u64::from_le_bytes(c.try_into().unwrap())))
                .collect::<Result<Vec<Fe>>>()
                .map_err(|e| Error::Format(e.to_string()))?;
            stripes.push(stripe);
        }
        let share = Share::new(header.node as usize, stripes);
        Ok(ShareFile { header, share })
    }
}

/// Whole bytes that fit below the modulus: `floor((bits(q) - 1) / 8)`.
pub fn bytes_per_symbol(q: u64) -> Result<usize> {
    let bits = 64 - q.leading_zeros() as usize;
    let b = bits.saturating_sub(1) / 8;
    if b == 0 {
        return Err(Error::InvalidParams(format!(
            "GF({q}) holds no whole byte per symbol; use symbol mode or a modulus above 256"
        )));
    }
    Ok(b)
}

/// Packs bytes into field symbols, `bytes_per_symbol` little-endian bytes
/// each, and zero-pads to a multiple of `unit` symbols.
pub fn pack_bytes(field: PrimeField, data: &[u8], unit: usize) -> Result<Vec<Fe>> {
    let b = bytes_per_symbol(field.modulus() as u64)?;
    let mut out: Vec<Fe> = data
        .chunks(b)
        .map(|c| {
            let mut buf = [0u8; 8];
            buf[..c.len()].copy_from_slice(c);
            field.elem(u64::from_le_bytes(buf))
        })
        .collect();
    pad(field, &mut out, unit);
    Ok(out)
}

/// Inverse of [`pack_bytes`], truncated to `len` bytes.
pub fn unpack_bytes(symbols: &[Fe], len: usize) -> Result<Vec<u8>> {
    let Some(first) = symbols.first() else {
        return Ok(vec![]);
    };
    let b = bytes_per_symbol(first.field().modulus() as u64)?;
    let mut out = Vec::with_capacity(symbols.len() * b);
    for x in symbols {
        let v = x.value() as u64;
        if v >> (8 * b) != 0 {
            return Err(Error::DecodeFailure(format!("symbol {v} does not fit in {b} bytes")));
        }
        out.extend_from_slice(&v.to_le_bytes()[..b]);
    }
    if out.len() < len {
        return Err(Error::DecodeFailure(format!("recovered {} bytes, expected {len}", out.len())));
    }
    out.truncate(len);
    Ok(out)
}

/// Zero-pads to a positive multiple of `unit`.
pub fn pad(field: PrimeField, symbols: &mut Vec<Fe>, unit: usize) {
    let target = symbols.len().div_ceil(unit).max(1) * unit;
    symbols.resize(target, field.zero());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::RegeneratingCode;
    use proptest::prelude::*;

    fn sample() -> ShareFile {
        let code = CodeSpec::new(Regime::Msr, 7, 3, 4, 65537).build().unwrap();
        let field = code.field();
        let msg = pack_bytes(field, b"hello, share files", code.message_unit()).unwrap();
        let shares = code.encode_with(&msg, &[]).unwrap();
        ShareFile {
            header: ShareHeader {
                regime: Regime::Msr,
                systematic: false,
                n: 7,
                k: 3,
                d: 4,
                beta: 1,
                ell: 0,
                m: 0,
                modulus: 65537,
                node: 3,
                stripes: shares[2].stripes.len() as u64,
                original_len: 18,
                packing: Packing::Bytes,
            },
            share: shares[2].clone(),
        }
    }

    #[test]
    fn bytes_per_symbol_values() {
        assert_eq!(bytes_per_symbol(65537).unwrap(), 2);
        assert_eq!(bytes_per_symbol(257).unwrap(), 1);
        assert_eq!(bytes_per_symbol(2_147_483_647).unwrap(), 3);
        assert!(bytes_per_symbol(13).is_err());
        assert!(bytes_per_symbol(251).is_err());
    }

    #[test]
    fn header_round_trip() {
        let f = sample();
        let bytes = f.to_bytes();
        assert_eq!(&bytes[..4], b"PMRC");
        assert_eq!(bytes.len(), HEADER_LEN + f.share.stripes.len() * 2 * 8);
        assert_eq!(ShareFile::from_bytes(&bytes).unwrap(), f);
        assert_eq!(ShareFile::from_bytes(&bytes).unwrap().to_bytes(), bytes);
    }

    #[test]
    fn rejects_structural_mutations() {
        let bytes = sample().to_bytes();
        let mut cases: Vec<Vec<u8>> = vec![];
        let mut set = |off: usize, vals: &[u8]| {
            let mut b = bytes.clone();
            b[off..off + vals.len()].copy_from_slice(vals);
            cases.push(b);
        };
        set(0, b"PMRX");
        set(4, &2u16.to_le_bytes());
        set(6, &[2]);
        set(7, &[2]);
        set(8, &3u32.to_le_bytes()); // n = 3 < d
        set(32, &65536u64.to_le_bytes());
        set(40, &0u32.to_le_bytes());
        set(40, &8u32.to_le_bytes());
        set(44, &2u32.to_le_bytes());
        set(48, &0u64.to_le_bytes());
        set(56, &u64::MAX.to_le_bytes());
        set(64, &[2]);
        set(70, &[1]);
        set(HEADER_LEN, &70000u64.to_le_bytes());
        cases.push(bytes[..bytes.len() - 1].to_vec());
        cases.push([bytes.clone(), vec![0; 8]].concat());
        cases.push(bytes[..40].to_vec());
        for (i, c) in cases.iter().enumerate() {
            assert!(matches!(ShareFile::from_bytes(c), Err(Error::Format(_))), "case {i}");
        }
    }

    #[test]
    fn packing_round_trip() {
        let field = PrimeField::new(65537).unwrap();
        let data: Vec<u8> = (0..=255u8).chain(0..7).collect();
        let syms = pack_bytes(field, &data, 6).unwrap();
        assert_eq!(syms.len() % 6, 0);
        assert_eq!(unpack_bytes(&syms, data.len()).unwrap(), data);
        let empty = pack_bytes(field, &[], 6).unwrap();
        assert_eq!(empty.len(), 6);
        assert_eq!(unpack_bytes(&empty, 0).unwrap(), Vec::<u8>::new());
    }

    proptest! {
        #[test]
        fn payload_mutation_is_caught_or_changes_share(pos in HEADER_LEN..HEADER_LEN + 64, byte in any::<u8>()) {
            let f = sample();
            let mut bytes = f.to_bytes();
            prop_assume!(pos < bytes.len() && bytes[pos] != byte);
            bytes[pos] = byte;
            match ShareFile::from_bytes(&bytes) {
                Err(Error::Format(_)) => {}
                Ok(g) => prop_assert_ne!(g.share, f.share),
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }

        #[test]
        fn random_headers_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..120)) {
            let _ = ShareFile::from_bytes(&bytes);
        }

        #[test]
        fn packing_is_lossless(data in proptest::collection::vec(any::<u8>(), 0..300)) {
            let field = PrimeField::new(16_777_259).unwrap();
            let syms = pack_bytes(field, &data, 4).unwrap();
            prop_assert_eq!(unpack_bytes(&syms, data.len()).unwrap(), data);
        }
    }
}
