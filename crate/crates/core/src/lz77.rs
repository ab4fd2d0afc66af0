//! Byte-level LZ77 with `(offset, length, next)` triples.
//!
//! At every step the longest prefix of the look-ahead buffer that occurs in
//! the search buffer is emitted together with the byte that follows it, and
//! the window slides by `length + 1`. Matches may run into the look-ahead
//! buffer (self-overlapping copies). Among equally long matches the one with
//! the smallest offset wins.
//!
//! Match search uses hash chains over 3-byte prefixes plus last-occurrence
//! tables for 1- and 2-byte prefixes; the result is identical to an
//! exhaustive scan of the window.

use crate::bits::{BitReader, BitWriter};
use crate::error::{Result, Section, SzError};

/// Search buffer size used by the container's final-stage pass.
pub const DEFAULT_SEARCH_CAP: usize = 4095;
/// Look-ahead size used by the container's final-stage pass.
pub const DEFAULT_LOOKAHEAD_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lz77Token {
    /// Distance back from the current position; 0 for a literal.
    pub offset: usize,
    /// Match length; 0 for a literal.
    pub length: usize,
    pub next: u8,
}

impl Lz77Token {
    pub fn literal(byte: u8) -> Self {
        Self {
            offset: 0,
            length: 0,
            next: byte,
        }
    }
}

const HASH_BITS: u32 = 16;
const NIL: usize = usize::MAX;

fn hash3(b: &[u8]) -> usize {
    let v = u32::from(b[0]) << 16 | u32::from(b[1]) << 8 | u32::from(b[2]);
    (v.wrapping_mul(0x9E37_79B1) >> (32 - HASH_BITS)) as usize
}

struct MatchFinder<'a> {
    input: &'a [u8],
    head3: Vec<usize>,
    prev3: Vec<usize>,
    last2: Vec<usize>,
    last1: [usize; 256],
    inserted: usize,
}

impl<'a> MatchFinder<'a> {
    fn new(input: &'a [u8]) -> Self {
        Self {
            input,
            head3: vec![NIL; 1 << HASH_BITS],
            prev3: vec![NIL; input.len()],
            last2: vec![NIL; 1 << 16],
            last1: [NIL; 256],
            inserted: 0,
        }
    }

    /// Registers every position below `upto` as a match candidate.
    fn insert_until(&mut self, upto: usize) {
        let input = self.input;
        while self.inserted < upto {
            let j = self.inserted;
            self.last1[input[j] as usize] = j;
            if j + 1 < input.len() {
                self.last2[(input[j] as usize) << 8 | input[j + 1] as usize] = j;
            }
            if j + 2 < input.len() {
                let h = hash3(&input[j..]);
                self.prev3[j] = self.head3[h];
                self.head3[h] = j;
            }
            self.inserted += 1;
        }
    }

    fn match_len(&self, cand: usize, pos: usize, max_len: usize) -> usize {
        let input = self.input;
        let mut l = 0;
        while l < max_len && input[cand + l] == input[pos + l] {
            l += 1;
        }
        l
    }

    /// Longest match at `pos` (smallest offset on ties) as `(length, offset)`.
    fn longest(&self, pos: usize, search_cap: usize, max_len: usize) -> (usize, usize) {
        let input = self.input;
        let lowest = pos.saturating_sub(search_cap);
        let mut best = (0usize, 0usize);
        let consider = |len: usize, cand: usize, best: &mut (usize, usize)| {
            let off = pos - cand;
            if len > best.0 || (len == best.0 && len > 0 && off < best.1) {
                *best = (len, off);
            }
        };
        if max_len >= 3 && pos + 2 < input.len() {
            let mut cand = self.head3[hash3(&input[pos..])];
            while cand != NIL && cand >= lowest {
                let len = self.match_len(cand, pos, max_len);
                consider(len, cand, &mut best);
                if len == max_len {
                    break;
                }
                cand = self.prev3[cand];
            }
        }
        if best.0 < 3 && max_len >= 2 {
            let cand = self.last2[(input[pos] as usize) << 8 | input[pos + 1] as usize];
            if cand != NIL && cand >= lowest {
                consider(self.match_len(cand, pos, max_len.min(2)), cand, &mut best);
            }
        }
        if best.0 < 2 && max_len >= 1 {
            let cand = self.last1[input[pos] as usize];
            if cand != NIL && cand >= lowest {
                consider(1, cand, &mut best);
            }
        }
        best
    }
}

/// Compresses `input` into LZ77 triples. The longest match is capped at
/// `lookahead_cap - 1` so the following byte still lies in the look-ahead buffer.
pub fn lz77_compress(input: &[u8], search_cap: usize, lookahead_cap: usize) -> Vec<Lz77Token> {
    let search_cap = search_cap.max(1);
    let lookahead_cap = lookahead_cap.max(1);
    let mut finder = MatchFinder::new(input);
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < input.len() {
        finder.insert_until(pos);
        let max_len = (lookahead_cap - 1).min(input.len() - pos - 1);
        let (length, offset) = finder.longest(pos, search_cap, max_len);
        tokens.push(Lz77Token {
            offset,
            length,
            next: input[pos + length],
        });
        pos += length + 1;
    }
    tokens
}

pub fn lz77_decompress(tokens: &[Lz77Token]) -> Result<Vec<u8>> {
    let mut out: Vec<u8> = Vec::new();
    for t in tokens {
        if (t.offset == 0) != (t.length == 0) {
            return Err(SzError::corrupt(Section::Lz77, "offset and length disagree on literal"));
        }
        if t.offset > out.len() {
            return Err(SzError::corrupt(Section::Lz77, "offset reaches before stream start"));
        }
        let start = out.len() - t.offset;
        // Byte at a time: the copy may overlap what it is producing.
        for k in 0..t.length {
            let b = out[start + k];
            out.push(b);
        }
        out.push(t.next);
    }
    Ok(out)
}

fn width(cap: usize) -> u32 {
    usize::BITS - cap.leading_zeros()
}

/// Packs tokens with fixed-width fields:
/// `u32 search_cap | u32 lookahead_cap | u64 token count | packed tokens`,
/// where each token is `offset` (bits to hold `search_cap`), `length`
/// (bits to hold `lookahead_cap`) and an 8-bit `next`, MSB first.
pub fn serialize_tokens(tokens: &[Lz77Token], search_cap: usize, lookahead_cap: usize) -> Vec<u8> {
    let (ow, lw) = (width(search_cap), width(lookahead_cap));
    let mut w = BitWriter::new();
    for t in tokens {
        w.write_bits(t.offset as u64, ow);
        w.write_bits(t.length as u64, lw);
        w.write_bits(u64::from(t.next), 8);
    }
    let mut out = Vec::new();
    out.extend_from_slice(&(search_cap as u32).to_le_bytes());
    out.extend_from_slice(&(lookahead_cap as u32).to_le_bytes());
    out.extend_from_slice(&(tokens.len() as u64).to_le_bytes());
    out.extend_from_slice(&w.into_bytes());
    out
}

pub fn deserialize_tokens(bytes: &[u8]) -> Result<Vec<Lz77Token>> {
    let corrupt = |r: &str| SzError::corrupt(Section::Lz77, r.to_string());
    if bytes.len() < 16 {
        return Err(corrupt("truncated token header"));
    }
    let search_cap = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let lookahead_cap = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let (ow, lw) = (width(search_cap), width(lookahead_cap));
    let per_token = u64::from(ow + lw + 8);
    let payload = &bytes[16..];
    if count
        .checked_mul(per_token)
        .map_or(true, |bits| bits > payload.len() as u64 * 8)
    {
        return Err(corrupt("token count exceeds payload"));
    }
    let mut r = BitReader::new(payload);
    let mut tokens = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let offset = r.read_bits(ow).ok_or_else(|| corrupt("truncated token"))? as usize;
        let length = r.read_bits(lw).ok_or_else(|| corrupt("truncated token"))? as usize;
        let next = r.read_bits(8).ok_or_else(|| corrupt("truncated token"))? as u8;
        if offset > search_cap || length > lookahead_cap {
            return Err(corrupt("token exceeds window capacities"));
        }
        tokens.push(Lz77Token { offset, length, next });
    }
    Ok(tokens)
}

/// Compresses and serializes `input` with the default capacities.
pub fn pack(input: &[u8]) -> Vec<u8> {
    let tokens = lz77_compress(input, DEFAULT_SEARCH_CAP, DEFAULT_LOOKAHEAD_CAP);
    serialize_tokens(&tokens, DEFAULT_SEARCH_CAP, DEFAULT_LOOKAHEAD_CAP)
}

pub fn unpack(bytes: &[u8]) -> Result<Vec<u8>> {
    lz77_decompress(&deserialize_tokens(bytes)?)
}
