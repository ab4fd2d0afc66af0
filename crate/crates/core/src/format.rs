//! Container layout.
//!
//! All integers are little-endian.
//!
//! ```text
//! header (68 bytes)
//!   magic "SZPM" | version u8 | predictor u8 | flags u8 | eb mode u8
//!   eb value f64 | resolved abs bound f64 | intervals u32 | m u32 | n u32
//!   p f64 | theta f64 | value count u64 | min f32 | max f32
//! body: six sections, each `u64 byte length | payload`
//!   table          u32 k | k x (u16 symbol, u8 code length)
//!   codes          u64 code count | u64 bit length | bitstream
//!   predmd         u64 record count | one bit per record (1 = fallback)
//!   offsets        ceil(log2 m) bits per matched record, packed
//!   means          f32 per matched record
//!   unpredictable  u64 count | count x LEB128 position deltas | count x f32
//! ```
//!
//! Bit-packed payloads are MSB first and zero padded to a byte. When flag
//! bit 0 is set the whole body is replaced by its LZ77 token stream.

use crate::bits::{BitReader, BitWriter};
use crate::error::{Result, Section, SzError};
use crate::huffman::HuffmanTable;
use crate::lz77;
use crate::params::{
    offset_bits, validate_params, CompressionParams, ErrorBound, ErrorBoundMode, Predictor,
    ValidatedParams,
};

pub const MAGIC: [u8; 4] = *b"SZPM";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 68;
const FLAG_LZ77: u8 = 1;
/// Byte length prefix in front of every section.
pub const SECTION_PREFIX_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub params: ValidatedParams,
    pub resolved_abs: f64,
    pub len: u64,
    pub min: f32,
    pub max: f32,
}

impl Header {
    fn write(&self, out: &mut Vec<u8>) {
        let p = &self.params;
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(p.predictor.to_byte());
        out.push(if p.final_lz77 { FLAG_LZ77 } else { 0 });
        out.push(match p.error_bound.mode {
            ErrorBoundMode::Absolute => 0,
            ErrorBoundMode::Relative => 1,
        });
        out.extend_from_slice(&p.error_bound.value.to_le_bytes());
        out.extend_from_slice(&self.resolved_abs.to_le_bytes());
        out.extend_from_slice(&p.intervals.to_le_bytes());
        out.extend_from_slice(&(p.m as u32).to_le_bytes());
        out.extend_from_slice(&(p.n as u32).to_le_bytes());
        out.extend_from_slice(&p.p.to_le_bytes());
        out.extend_from_slice(&p.theta.to_le_bytes());
        out.extend_from_slice(&self.len.to_le_bytes());
        out.extend_from_slice(&self.min.to_le_bytes());
        out.extend_from_slice(&self.max.to_le_bytes());
    }

    fn read(bytes: &[u8]) -> Result<Self> {
        let bad = |r: &str| SzError::corrupt(Section::Header, r.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(bad("truncated header"));
        }
        if bytes[0..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(bad(&format!("unsupported version {}", bytes[4])));
        }
        let predictor = Predictor::from_byte(bytes[5]).ok_or_else(|| bad("unknown predictor"))?;
        let flags = bytes[6];
        if flags & !FLAG_LZ77 != 0 {
            return Err(bad("unknown flags"));
        }
        let mode = match bytes[7] {
            0 => ErrorBoundMode::Absolute,
            1 => ErrorBoundMode::Relative,
            _ => return Err(bad("unknown error bound mode")),
        };
        let mut c = Cursor::new(&bytes[8..HEADER_LEN], Section::Header);
        let eb_value = c.f64()?;
        let resolved_abs = c.f64()?;
        let intervals = c.u32()?;
        let m = c.u32()? as usize;
        let n = c.u32()? as usize;
        let p = c.f64()?;
        let theta = c.f64()?;
        let len = c.u64()?;
        let min = c.f32()?;
        let max = c.f32()?;
        if !(resolved_abs.is_finite() && resolved_abs > 0.0) {
            return Err(bad("resolved error bound must be positive"));
        }
        let params = validate_params(&CompressionParams {
            error_bound: ErrorBound {
                mode,
                value: eb_value,
                resolved_abs: Some(resolved_abs),
            },
            intervals,
            predictor,
            m,
            n,
            p,
            theta: Some(theta),
            final_lz77: flags & FLAG_LZ77 != 0,
        })
        .map_err(|e| bad(&e.to_string()))?;
        Ok(Self {
            params,
            resolved_abs,
            len,
            min,
            max,
        })
    }
}

/// A compressed array, held in decoded section form.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedArtifact {
    pub header: Header,
    pub table: HuffmanTable,
    pub code_count: u64,
    pub code_bits: u64,
    pub code_stream: Vec<u8>,
    /// One entry per look-ahead sequence; `true` = fallback (bit 1).
    pub predmd: Vec<bool>,
    pub offsets: Vec<u32>,
    pub means: Vec<f32>,
    pub unpredictable_positions: Vec<u64>,
    pub unpredictable_values: Vec<f32>,
}

/// Serialized section payloads (without length prefixes), in container order.
#[derive(Debug, Clone)]
pub(crate) struct SectionBytes {
    pub table: Vec<u8>,
    pub codes: Vec<u8>,
    pub predmd: Vec<u8>,
    pub offsets: Vec<u8>,
    pub means: Vec<u8>,
    pub unpredictable: Vec<u8>,
}

impl SectionBytes {
    fn in_order(&self) -> [&[u8]; 6] {
        [
            &self.table,
            &self.codes,
            &self.predmd,
            &self.offsets,
            &self.means,
            &self.unpredictable,
        ]
    }

    fn body(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for s in self.in_order() {
            out.extend_from_slice(&(s.len() as u64).to_le_bytes());
            out.extend_from_slice(s);
        }
        out
    }
}

impl CompressedArtifact {
    pub fn params(&self) -> &ValidatedParams {
        &self.header.params
    }

    pub fn len(&self) -> usize {
        self.header.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.header.len == 0
    }

    /// Number of pattern-matched sequences (predmd bit 0).
    pub fn matched_sequences(&self) -> usize {
        self.predmd.iter().filter(|&&b| !b).count()
    }

    pub(crate) fn sections(&self) -> SectionBytes {
        let mut codes = Vec::with_capacity(16 + self.code_stream.len());
        codes.extend_from_slice(&self.code_count.to_le_bytes());
        codes.extend_from_slice(&self.code_bits.to_le_bytes());
        codes.extend_from_slice(&self.code_stream);

        let mut predmd = Vec::with_capacity(8 + self.predmd.len().div_ceil(8));
        predmd.extend_from_slice(&(self.predmd.len() as u64).to_le_bytes());
        let mut w = BitWriter::new();
        for &b in &self.predmd {
            w.write_bit(b);
        }
        predmd.extend_from_slice(&w.into_bytes());

        let ob = offset_bits(self.header.params.m);
        let mut w = BitWriter::new();
        for &o in &self.offsets {
            w.write_bits(u64::from(o), ob);
        }
        let offsets = w.into_bytes();

        let means = self.means.iter().flat_map(|m| m.to_le_bytes()).collect();

        let mut unpredictable = Vec::new();
        unpredictable.extend_from_slice(&(self.unpredictable_values.len() as u64).to_le_bytes());
        let mut prev = 0u64;
        for (i, &pos) in self.unpredictable_positions.iter().enumerate() {
            write_varint(&mut unpredictable, if i == 0 { pos } else { pos - prev });
            prev = pos;
        }
        for v in &self.unpredictable_values {
            unpredictable.extend_from_slice(&v.to_le_bytes());
        }

        SectionBytes {
            table: self.table.to_bytes(),
            codes,
            predmd,
            offsets,
            means,
            unpredictable,
        }
    }

    /// Body bytes as they would appear without the LZ77 wrapper.
    pub(crate) fn raw_body(&self) -> Vec<u8> {
        self.sections().body()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN);
        self.header.write(&mut out);
        let body = self.raw_body();
        if self.header.params.final_lz77 {
            out.extend_from_slice(&lz77::pack(&body));
        } else {
            out.extend_from_slice(&body);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::read(bytes)?;
        let unwrapped;
        let body = if header.params.final_lz77 {
            unwrapped = lz77::unpack(&bytes[HEADER_LEN..])?;
            &unwrapped[..]
        } else {
            &bytes[HEADER_LEN..]
        };
        let mut c = Cursor::new(body, Section::Table);
        let table_bytes = c.section(Section::Table)?;
        let codes_bytes = c.section(Section::Codes)?;
        let predmd_bytes = c.section(Section::Predmd)?;
        let offsets_bytes = c.section(Section::Offsets)?;
        let means_bytes = c.section(Section::Means)?;
        let unpred_bytes = c.section(Section::Unpredictable)?;
        if !c.rest().is_empty() {
            return Err(SzError::corrupt(Section::Unpredictable, "trailing bytes after last section"));
        }

        let table = HuffmanTable::from_bytes(table_bytes)?;

        let mut cc = Cursor::new(codes_bytes, Section::Codes);
        let code_count = cc.u64()?;
        let code_bits = cc.u64()?;
        let code_stream = cc.rest().to_vec();
        if code_bits.div_ceil(8) != code_stream.len() as u64 {
            return Err(SzError::corrupt(Section::Codes, "bit length does not match payload"));
        }

        let mut pc = Cursor::new(predmd_bytes, Section::Predmd);
        let records = pc.u64()?;
        let packed = pc.rest();
        if records.div_ceil(8) != packed.len() as u64 {
            return Err(SzError::corrupt(Section::Predmd, "record count does not match payload"));
        }
        let mut r = BitReader::with_limit(packed, records);
        let predmd: Vec<bool> = std::iter::from_fn(|| r.read_bit()).collect();

        let matched = predmd.iter().filter(|&&b| !b).count();
        let ob = offset_bits(header.params.m);
        if (matched as u64 * u64::from(ob)).div_ceil(8) != offsets_bytes.len() as u64 {
            return Err(SzError::corrupt(Section::Offsets, "offset count does not match predmd bits"));
        }
        let mut r = BitReader::new(offsets_bytes);
        let offsets = (0..matched)
            .map(|_| r.read_bits(ob).map(|v| v as u32))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| SzError::corrupt(Section::Offsets, "truncated offsets"))?;

        if means_bytes.len() != matched * 4 {
            return Err(SzError::corrupt(Section::Means, "mean count does not match predmd bits"));
        }
        let means = means_bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();

        let mut uc = Cursor::new(unpred_bytes, Section::Unpredictable);
        let ucount = uc.u64()? as usize;
        if ucount > unpred_bytes.len() {
            return Err(SzError::corrupt(Section::Unpredictable, "count exceeds payload"));
        }
        let mut unpredictable_positions = Vec::with_capacity(ucount);
        let mut prev = 0u64;
        for i in 0..ucount {
            let delta = uc.varint()?;
            let pos = if i == 0 {
                delta
            } else {
                if delta == 0 {
                    return Err(SzError::corrupt(Section::Unpredictable, "positions not increasing"));
                }
                prev.checked_add(delta)
                    .ok_or_else(|| SzError::corrupt(Section::Unpredictable, "position overflow"))?
            };
            unpredictable_positions.push(pos);
            prev = pos;
        }
        let mut unpredictable_values = Vec::with_capacity(ucount);
        for _ in 0..ucount {
            unpredictable_values.push(uc.f32()?);
        }
        if !uc.rest().is_empty() {
            return Err(SzError::corrupt(Section::Unpredictable, "trailing bytes"));
        }

        let artifact = Self {
            header,
            table,
            code_count,
            code_bits,
            code_stream,
            predmd,
            offsets,
            means,
            unpredictable_positions,
            unpredictable_values,
        };
        artifact.check_consistency()?;
        Ok(artifact)
    }

    /// Cross-section invariants that the per-section parsers cannot see.
    pub fn check_consistency(&self) -> Result<()> {
        let p = &self.header.params;
        let len = self.header.len;
        let expected_records = match p.predictor {
            Predictor::SzPm => len / p.n as u64,
            _ => 0,
        };
        if self.predmd.len() as u64 != expected_records {
            return Err(SzError::corrupt(
                Section::Predmd,
                format!("expected {expected_records} records, found {}", self.predmd.len()),
            ));
        }
        let matched = self.matched_sequences();
        if self.offsets.len() != matched {
            return Err(SzError::corrupt(Section::Offsets, "offset count does not match predmd bits"));
        }
        if self.means.len() != matched {
            return Err(SzError::corrupt(Section::Means, "mean count does not match predmd bits"));
        }
        let max_offset = (p.m - p.n) as u32;
        if self.offsets.iter().any(|&o| o > max_offset) {
            return Err(SzError::corrupt(Section::Offsets, "offset beyond search buffer"));
        }
        if self.means.iter().any(|m| !m.is_finite()) {
            return Err(SzError::corrupt(Section::Means, "non-finite mean"));
        }
        if self.unpredictable_positions.len() != self.unpredictable_values.len() {
            return Err(SzError::corrupt(Section::Unpredictable, "position/value count mismatch"));
        }
        if self.unpredictable_positions.windows(2).any(|w| w[0] >= w[1])
            || self.unpredictable_positions.last().is_some_and(|&l| l >= len)
        {
            return Err(SzError::corrupt(Section::Unpredictable, "position out of range"));
        }
        if self.code_count + self.unpredictable_positions.len() as u64 != len {
            return Err(SzError::corrupt(
                Section::Codes,
                "code count plus unpredictable count differs from value count",
            ));
        }
        if self.code_count > 0 && self.table.is_empty() {
            return Err(SzError::corrupt(Section::Table, "empty table for non-empty code stream"));
        }
        if self.table.entries().iter().any(|&(s, _)| u32::from(s) >= p.intervals) {
            return Err(SzError::corrupt(Section::Table, "symbol outside interval range"));
        }
        Ok(())
    }
}

fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    section: Section,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8], section: Section) -> Self {
        Self {
            bytes,
            pos: 0,
            section,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| SzError::corrupt(self.section, "truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.take(1)?[0];
            v |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(SzError::corrupt(self.section, "varint too long"))
    }

    /// Reads one length-prefixed section.
    fn section(&mut self, section: Section) -> Result<&'a [u8]> {
        self.section = section;
        let len = usize::try_from(self.u64()?)
            .map_err(|_| SzError::corrupt(section, "section length overflow"))?;
        self.take(len)
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varint_encoding() {
        let mut out = Vec::new();
        write_varint(&mut out, 0);
        write_varint(&mut out, 127);
        write_varint(&mut out, 128);
        write_varint(&mut out, 300);
        assert_eq!(out, vec![0, 127, 0x80, 1, 0xac, 2]);
        let mut c = Cursor::new(&out, Section::Unpredictable);
        let got: Vec<u64> = (0..4).map(|_| c.varint().unwrap()).collect();
        assert_eq!(got, vec![0, 127, 128, 300]);
        assert!(c.varint().is_err());
    }

    #[test]
    fn header_roundtrip_and_size() {
        let params = validate_params(&CompressionParams::default()).unwrap();
        let h = Header {
            params,
            resolved_abs: 0.25,
            len: 12345,
            min: -1.0,
            max: 2.0,
        };
        let mut out = Vec::new();
        h.write(&mut out);
        assert_eq!(out.len(), HEADER_LEN);
        let back = Header::read(&out).unwrap();
        assert_eq!(back.len, 12345);
        assert_eq!(back.resolved_abs, 0.25);
        assert_eq!(back.params.theta, 512.0);
        assert_eq!(back.params.predictor, Predictor::SzPm);

        let mut bad = out.clone();
        bad[0] = b'X';
        assert!(Header::read(&bad).unwrap_err().to_string().contains("bad magic"));
        let mut bad = out.clone();
        bad[4] = 9;
        assert!(Header::read(&bad).unwrap_err().to_string().contains("version"));
        assert!(Header::read(&out[..HEADER_LEN - 1]).is_err());
    }
}
