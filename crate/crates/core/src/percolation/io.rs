//! Binary and text serialisation of configurations.
//!
//! Binary layout (all integers little-endian):
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `PMBC` (bond) or `PMSC` (site) |
//! | 4     | format version (1) |
//! | 4     | d |
//! | 4     | n |
//! | 8     | p as IEEE-754 double bits |
//! | 8     | seed |
//! | 8     | number of mask bits |
//! | ...   | mask, `ceil(bits / 8)` bytes, bit `i` at byte `i / 8`, position `i % 8` |
//!
//! The text form lists one open index per line after a `#` header line.

use bitvec::prelude::*;

use super::{BondConfig, SiteConfig};
use crate::error::{Error, Result};
use crate::lattice::BoxSpec;

const BOND_MAGIC: &[u8; 4] = b"PMBC";
const SITE_MAGIC: &[u8; 4] = b"PMSC";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 40;

fn encode(magic: &[u8; 4], spec: BoxSpec, p: f64, seed: u64, bits: &BitSlice<u64, Lsb0>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + bits.len().div_ceil(8));
    out.extend_from_slice(magic);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.d as u32).to_le_bytes());
    out.extend_from_slice(&spec.n.to_le_bytes());
    out.extend_from_slice(&p.to_bits().to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(&(bits.len() as u64).to_le_bytes());
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for i in bits.iter_ones() {
        bytes[i / 8] |= 1 << (i % 8);
    }
    out.extend_from_slice(&bytes);
    out
}

struct Decoded {
    spec: BoxSpec,
    p: f64,
    seed: u64,
    bits: BitVec<u64, Lsb0>,
}

fn decode(magic: &[u8; 4], data: &[u8]) -> Result<Decoded> {
    if data.len() < HEADER_LEN {
        return Err(Error::Format("truncated header".into()));
    }
    if &data[0..4] != magic {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(data[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(data[o..o + 8].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(Error::Format(format!("unsupported version {}", u32_at(4))));
    }
    let spec = BoxSpec::new(u32_at(8) as usize, u32_at(12));
    let p = f64::from_bits(u64_at(16));
    let seed = u64_at(24);
    let len = u64_at(32) as usize;
    let body = &data[HEADER_LEN..];
    if body.len() != len.div_ceil(8) {
        return Err(Error::Format(format!(
            "mask length {} does not match {} bits",
            body.len(),
            len
        )));
    }
    let mut bits = bitvec![u64, Lsb0; 0; len];
    for i in 0..len {
        if body[i / 8] >> (i % 8) & 1 == 1 {
            bits.set(i, true);
        }
    }
    if !len.is_multiple_of(8) && body[len / 8] >> (len % 8) != 0 {
        return Err(Error::Format("padding bits set".into()));
    }
    Ok(Decoded { spec, p, seed, bits })
}

fn encode_text(kind: &str, spec: BoxSpec, p: f64, seed: u64, bits: &BitSlice<u64, Lsb0>) -> String {
    let mut s = format!(
        "# {kind} d={} n={} p={} p_bits={:016x} seed={} len={}\n",
        spec.d,
        spec.n,
        p,
        p.to_bits(),
        seed,
        bits.len()
    );
    for i in bits.iter_ones() {
        s.push_str(&i.to_string());
        s.push('\n');
    }
    s
}

fn decode_text(kind: &str, text: &str) -> Result<Decoded> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(kind) {
        return Err(Error::Format(format!("expected a {kind} configuration")));
    }
    let (mut d, mut n, mut p_bits, mut seed, mut len) = (None, None, None, None, None);
    for f in fields {
        let (k, v) = f
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field {f}")))?;
        let bad = |_| Error::Format(format!("bad value in {f}"));
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(bad)?),
            "n" => n = Some(v.parse::<u32>().map_err(bad)?),
            "p_bits" => p_bits = Some(u64::from_str_radix(v, 16).map_err(bad)?),
            "seed" => seed = Some(v.parse::<u64>().map_err(bad)?),
            "len" => len = Some(v.parse::<usize>().map_err(bad)?),
            _ => {}
        }
    }
    let missing = |k: &str| Error::Format(format!("header lacks {k}"));
    let len = len.ok_or_else(|| missing("len"))?;
    let mut bits = bitvec![u64, Lsb0; 0; len];
    for line in lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let i: usize = line
            .parse()
            .map_err(|_| Error::Format(format!("bad index line {line}")))?;
        if i >= len {
            return Err(Error::Format(format!("index {i} out of range")));
        }
        bits.set(i, true);
    }
    Ok(Decoded {
        spec: BoxSpec::new(d.ok_or_else(|| missing("d"))?, n.ok_or_else(|| missing("n"))?),
        p: f64::from_bits(p_bits.ok_or_else(|| missing("p_bits"))?),
        seed: seed.ok_or_else(|| missing("seed"))?,
        bits,
    })
}

fn check_len(spec: BoxSpec, len: usize, expected: Option<u64>) -> Result<()> {
    if expected != Some(len as u64) {
        return Err(Error::Format(format!("{len} mask bits do not fit {spec}")));
    }
    Ok(())
}

impl BondConfig {
    pub fn to_bytes(&self) -> Vec<u8> {
        encode(BOND_MAGIC, self.spec, self.p, self.seed, &self.open)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let d = decode(BOND_MAGIC, data)?;
        check_len(d.spec, d.bits.len(), d.spec.edge_count())?;
        Ok(BondConfig::from_bits(d.spec, d.p, d.seed, d.bits))
    }

    /// One open [`EdgeId`](crate::lattice::EdgeId) per line.
    pub fn to_text(&self) -> String {
        encode_text("bond", self.spec, self.p, self.seed, &self.open)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let d = decode_text("bond", text)?;
        check_len(d.spec, d.bits.len(), d.spec.edge_count())?;
        Ok(BondConfig::from_bits(d.spec, d.p, d.seed, d.bits))
    }
}

impl SiteConfig {
    pub fn to_bytes(&self) -> Vec<u8> {
        encode(SITE_MAGIC, self.spec, self.p, self.seed, &self.open)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let d = decode(SITE_MAGIC, data)?;
        check_len(d.spec, d.bits.len(), d.spec.vertex_count())?;
        Ok(SiteConfig::from_bits(d.spec, d.p, d.seed, d.bits))
    }

    /// One open [`VertexId`](crate::lattice::VertexId) per line.
    pub fn to_text(&self) -> String {
        encode_text("site", self.spec, self.p, self.seed, &self.open)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let d = decode_text("site", text)?;
        check_len(d.spec, d.bits.len(), d.spec.vertex_count())?;
        Ok(SiteConfig::from_bits(d.spec, d.p, d.seed, d.bits))
    }
}
