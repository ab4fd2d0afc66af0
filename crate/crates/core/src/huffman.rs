//! Canonical Huffman coding over 16-bit quantization codes.
//!
//! Tables are built from empirical frequencies with ties broken by symbol
//! value, so the same input always yields the same table. Only the code
//! lengths are serialized; codewords are reassigned canonically (shorter
//! first, then by symbol) on both sides.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::bits::{BitReader, BitWriter};
use crate::error::{Result, Section, SzError};

/// Longest codeword the encoder will produce. Reaching it needs
/// Fibonacci-like frequencies summing to ~2^45, far beyond any in-memory array.
pub const MAX_CODE_LEN: u8 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    /// `(symbol, length)` sorted by symbol.
    entries: Vec<(u16, u8)>,
    /// Canonical codeword per entry, same order as `entries`.
    codewords: Vec<u64>,
    /// Symbols sorted canonically (by length, then symbol).
    canonical: Vec<u16>,
    /// Number of codewords of each length, index = length.
    length_counts: Vec<u64>,
}

impl HuffmanTable {
    /// Builds the canonical table from explicit `(symbol, length)` pairs.
    pub fn from_lengths(mut entries: Vec<(u16, u8)>) -> Result<Self> {
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SzError::corrupt(Section::Table, "duplicate symbol"));
        }
        if entries.iter().any(|&(_, l)| l == 0 || l > MAX_CODE_LEN) {
            return Err(SzError::corrupt(Section::Table, "code length out of range"));
        }
        // Kraft sum scaled by 2^MAX_CODE_LEN, in u128 to avoid overflow.
        let kraft: u128 = entries
            .iter()
            .map(|&(_, l)| 1u128 << (MAX_CODE_LEN - l))
            .sum();
        if kraft > 1u128 << MAX_CODE_LEN {
            return Err(SzError::corrupt(Section::Table, "lengths violate Kraft inequality"));
        }

        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by_key(|&i| (entries[i].1, entries[i].0));

        let mut codewords = vec![0u64; entries.len()];
        let mut length_counts = vec![0u64; MAX_CODE_LEN as usize + 1];
        let mut code: u64 = 0;
        let mut prev_len = 0u8;
        for (rank, &i) in order.iter().enumerate() {
            let len = entries[i].1;
            if rank > 0 {
                code += 1;
            }
            code <<= len - prev_len;
            prev_len = len;
            codewords[i] = code;
            length_counts[len as usize] += 1;
        }
        let canonical = order.iter().map(|&i| entries[i].0).collect();
        Ok(Self {
            entries,
            codewords,
            canonical,
            length_counts,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `(symbol, length)` pairs sorted by symbol.
    pub fn entries(&self) -> &[(u16, u8)] {
        &self.entries
    }

    pub fn length_of(&self, symbol: u16) -> Option<u8> {
        self.lookup(symbol).map(|i| self.entries[i].1)
    }

    /// `(codeword, length)` for `symbol`.
    pub fn codeword(&self, symbol: u16) -> Option<(u64, u8)> {
        self.lookup(symbol)
            .map(|i| (self.codewords[i], self.entries[i].1))
    }

    fn lookup(&self, symbol: u16) -> Option<usize> {
        self.entries.binary_search_by_key(&symbol, |e| e.0).ok()
    }

    /// Sum over symbols of 2^-len.
    pub fn kraft_sum(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, l)| 2f64.powi(-i32::from(l)))
            .sum()
    }

    /// Serialized form: `u32` entry count, then `(u16 symbol, u8 length)` per entry, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 3 * self.entries.len());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for &(s, l) in &self.entries {
            out.extend_from_slice(&s.to_le_bytes());
            out.push(l);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |r: &str| SzError::corrupt(Section::Table, r.to_string());
        let count_bytes: [u8; 4] = bytes
            .get(..4)
            .ok_or_else(|| corrupt("truncated entry count"))?
            .try_into()
            .unwrap();
        let count = u32::from_le_bytes(count_bytes) as usize;
        let body = &bytes[4..];
        if body.len() != count.checked_mul(3).ok_or_else(|| corrupt("entry count overflow"))? {
            return Err(corrupt("entry count does not match section length"));
        }
        let entries = body
            .chunks_exact(3)
            .map(|c| (u16::from_le_bytes([c[0], c[1]]), c[2]))
            .collect();
        Self::from_lengths(entries)
    }
}

/// Builds an optimal table for the symbol frequencies of `codes`.
pub fn build_table(codes: &[u16]) -> Result<HuffmanTable> {
    if codes.is_empty() {
        return Err(SzError::EmptyInput);
    }
    let mut freq: BTreeMap<u16, u64> = BTreeMap::new();
    for &c in codes {
        *freq.entry(c).or_default() += 1;
    }
    table_from_frequencies(&freq.into_iter().collect::<Vec<_>>())
}

/// Builds an optimal table from `(symbol, count)` pairs with non-zero counts.
pub fn table_from_frequencies(freq: &[(u16, u64)]) -> Result<HuffmanTable> {
    let mut freq: Vec<(u16, u64)> = freq.iter().copied().filter(|&(_, c)| c > 0).collect();
    freq.sort_unstable();
    if freq.is_empty() {
        return Err(SzError::EmptyInput);
    }
    if freq.len() == 1 {
        return HuffmanTable::from_lengths(vec![(freq[0].0, 1)]);
    }

    // Node ids: leaves 0..k in symbol order, internal nodes after. The heap
    // orders by (weight, id), which breaks ties toward smaller symbols and
    // older nodes.
    let k = freq.len();
    let mut parent = vec![usize::MAX; 2 * k - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = freq
        .iter()
        .enumerate()
        .map(|(i, &(_, w))| Reverse((w, i)))
        .collect();
    let mut next = k;
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().unwrap();
        let Reverse((wb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((wa + wb, next)));
        next += 1;
    }

    // Parents always have larger ids, so one reverse sweep yields depths.
    let mut depth = vec![0u32; 2 * k - 1];
    for id in (0..2 * k - 2).rev() {
        depth[id] = depth[parent[id]] + 1;
    }
    let mut entries = Vec::with_capacity(k);
    for (i, &(sym, _)) in freq.iter().enumerate() {
        let len = u8::try_from(depth[i])
            .ok()
            .filter(|&l| l <= MAX_CODE_LEN)
            .ok_or_else(|| SzError::invalid("huffman code length exceeds 64 bits"))?;
        entries.push((sym, len));
    }
    HuffmanTable::from_lengths(entries)
}

/// Encoded bitstream plus its exact length in bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedBits {
    pub bytes: Vec<u8>,
    pub bit_len: u64,
}

pub fn encode(codes: &[u16], table: &HuffmanTable) -> Result<EncodedBits> {
    let mut w = BitWriter::new();
    for &c in codes {
        let (word, len) = table.codeword(c).ok_or(SzError::UnknownSymbol(c))?;
        w.write_bits(word, u32::from(len));
    }
    let bit_len = w.bit_len();
    Ok(EncodedBits {
        bytes: w.into_bytes(),
        bit_len,
    })
}

/// Decodes exactly `count` symbols from the first `bit_len` bits of `bytes`.
pub fn decode(bytes: &[u8], bit_len: u64, table: &HuffmanTable, count: usize) -> Result<Vec<u16>> {
    let truncated = || SzError::corrupt(Section::Codes, "truncated bitstream");
    if count > 0 && table.is_empty() {
        return Err(SzError::corrupt(Section::Codes, "codes present but table is empty"));
    }
    let mut r = BitReader::with_limit(bytes, bit_len);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        // Canonical decode: walk lengths, comparing against the first code of each length.
        let mut code: u64 = 0;
        let mut first: u64 = 0;
        let mut index: u64 = 0;
        let mut len = 0usize;
        loop {
            len += 1;
            if len > MAX_CODE_LEN as usize {
                return Err(SzError::corrupt(Section::Codes, "invalid codeword"));
            }
            code |= u64::from(r.read_bit().ok_or_else(truncated)?);
            let n = table.length_counts[len];
            if code.wrapping_sub(first) < n {
                out.push(table.canonical[(index + code - first) as usize]);
                break;
            }
            index += n;
            first = (first + n) << 1;
            code <<= 1;
        }
    }
    Ok(out)
}

/// Empirical Shannon entropy of `codes` in bits per symbol.
pub fn empirical_entropy(codes: &[u16]) -> f64 {
    if codes.is_empty() {
        return 0.0;
    }
    let mut freq: BTreeMap<u16, u64> = BTreeMap::new();
    for &c in codes {
        *freq.entry(c).or_default() += 1;
    }
    let n = codes.len() as f64;
    freq.values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_symbol_gets_one_bit() {
        let t = build_table(&[7, 7, 7, 7]).unwrap();
        assert_eq!(t.entries(), &[(7, 1)]);
        let enc = encode(&[7, 7, 7], &t).unwrap();
        assert_eq!(enc.bit_len, 3);
        assert_eq!(decode(&enc.bytes, enc.bit_len, &t, 3).unwrap(), vec![7, 7, 7]);
    }

    #[test]
    fn two_symbols_one_bit_each() {
        let t = build_table(&[1, 1, 1, 2]).unwrap();
        assert_eq!(t.entries(), &[(1, 1), (2, 1)]);
    }

    #[test]
    fn skewed_lengths() {
        // weights 8,4,2,1,1 -> lengths 1,2,3,4,4
        let freq = [(10, 8), (11, 4), (12, 2), (13, 1), (14, 1)];
        let t = table_from_frequencies(&freq).unwrap();
        assert_eq!(t.entries(), &[(10, 1), (11, 2), (12, 3), (13, 4), (14, 4)]);
        assert_eq!(t.kraft_sum(), 1.0);
        assert_eq!(t.codeword(10), Some((0b0, 1)));
        assert_eq!(t.codeword(11), Some((0b10, 2)));
        assert_eq!(t.codeword(14), Some((0b1111, 4)));
    }

    #[test]
    fn empty_inputs() {
        assert!(build_table(&[]).is_err());
        let t = build_table(&[3]).unwrap();
        let enc = encode(&[], &t).unwrap();
        assert_eq!(enc.bit_len, 0);
        assert!(decode(&enc.bytes, 0, &t, 0).unwrap().is_empty());
    }

    #[test]
    fn unknown_symbol_and_truncation() {
        let t = build_table(&[1, 2, 3]).unwrap();
        assert!(matches!(encode(&[9], &t), Err(SzError::UnknownSymbol(9))));
        let enc = encode(&[1, 2, 3, 3], &t).unwrap();
        let err = decode(&enc.bytes, enc.bit_len - 1, &t, 4).unwrap_err();
        assert!(err.to_string().contains("corrupt stream"));
    }

    #[test]
    fn table_serialization_roundtrip() {
        let t = build_table(&[0, 0, 5, 255, 255, 255, 65535]).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(bytes.len(), 4 + 3 * 4);
        assert_eq!(HuffmanTable::from_bytes(&bytes).unwrap(), t);
        assert!(HuffmanTable::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(HuffmanTable::from_lengths(vec![(1, 1), (2, 1), (3, 1)]).is_err());
        assert!(HuffmanTable::from_lengths(vec![(1, 0)]).is_err());
        assert!(HuffmanTable::from_lengths(vec![(1, 2), (1, 2)]).is_err());
    }

    #[test]
    fn codewords_are_prefix_free() {
        let codes: Vec<u16> = (0..2000u32).map(|i| ((i * i) % 37) as u16).collect();
        let t = build_table(&codes).unwrap();
        let words: Vec<(u64, u8)> = t.entries().iter().map(|&(s, _)| t.codeword(s).unwrap()).collect();
        for (i, &(a, la)) in words.iter().enumerate() {
            for (j, &(b, lb)) in words.iter().enumerate() {
                if i != j && la <= lb {
                    assert_ne!(b >> (lb - la), a, "codeword {i} prefixes {j}");
                }
            }
        }
        assert!(t.kraft_sum() <= 1.0);
    }

    #[test]
    fn entropy_of_uniform_pair() {
        assert!((empirical_entropy(&[0, 1, 0, 1]) - 1.0).abs() < 1e-12);
        assert_eq!(empirical_entropy(&[4, 4, 4]), 0.0);
    }
}
