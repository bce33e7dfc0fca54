//! Symbol statistics and canonical Huffman coding.
//!
//! Codes are built with a deterministic priority queue: among equal counts
//! the subtree holding the smallest symbol is merged first, then the older
//! node. The resulting lengths are re-emitted in canonical form (ordered by
//! length, then symbol), so only `(symbol, length)` pairs need to be stored.
//! Codewords are written MSB-first.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::error::CodingError;

/// Longest codeword the container can carry.
pub const MAX_CODE_LEN: u8 = 32;

/// Exact symbol counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolHistogram {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl SymbolHistogram {
    pub fn from_symbols(symbols: &[i64]) -> Result<Self, CodingError> {
        if symbols.is_empty() {
            return Err(CodingError::InvalidInput("empty symbol sequence".into()));
        }
        let mut counts = BTreeMap::new();
        for &s in symbols {
            *counts.entry(s).or_insert(0u64) += 1;
        }
        Ok(SymbolHistogram {
            counts,
            total: symbols.len() as u64,
        })
    }

    /// Builds a histogram from `(symbol, count)` pairs. Zero counts are
    /// dropped; repeated symbols accumulate.
    pub fn from_counts(pairs: impl IntoIterator<Item = (i64, u64)>) -> Result<Self, CodingError> {
        let mut counts = BTreeMap::new();
        for (s, c) in pairs {
            if c > 0 {
                *counts.entry(s).or_insert(0u64) += c;
            }
        }
        let total = counts.values().sum();
        if total == 0 {
            return Err(CodingError::InvalidInput("histogram has no symbols".into()));
        }
        Ok(SymbolHistogram { counts, total })
    }

    pub fn counts(&self) -> &BTreeMap<i64, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn probability(&self, symbol: i64) -> f64 {
        self.counts.get(&symbol).copied().unwrap_or(0) as f64 / self.total as f64
    }
}

/// Shorthand for [`SymbolHistogram::from_symbols`].
pub fn histogram(symbols: &[i64]) -> Result<SymbolHistogram, CodingError> {
    SymbolHistogram::from_symbols(symbols)
}

/// Shannon entropy in bits per symbol.
pub fn entropy(h: &SymbolHistogram) -> f64 {
    let total = h.total as f64;
    h.counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// A canonical prefix code.
#[derive(Debug, Clone)]
pub struct HuffmanCode {
    /// `(symbol, length)` in canonical order.
    entries: Vec<(i64, u8)>,
    codewords: HashMap<i64, (u32, u8)>,
    // Indexed by length.
    count: [u32; MAX_CODE_LEN as usize + 1],
    first_code: [u64; MAX_CODE_LEN as usize + 1],
    first_index: [usize; MAX_CODE_LEN as usize + 1],
}

impl PartialEq for HuffmanCode {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for HuffmanCode {}

impl HuffmanCode {
    /// Builds the canonical code for the given `(symbol, length)` pairs.
    ///
    /// Lengths must lie in `1..=32`, symbols must be distinct, and for two or
    /// more symbols the lengths must satisfy the Kraft equality. A lone symbol
    /// must have length 1.
    pub fn from_lengths(mut entries: Vec<(i64, u8)>) -> Result<Self, CodingError> {
        if entries.is_empty() {
            return Err(CodingError::InvalidInput("empty code".into()));
        }
        if let Some(&(s, l)) = entries.iter().find(|(_, l)| *l == 0 || *l > MAX_CODE_LEN) {
            return Err(CodingError::InvalidInput(format!(
                "symbol {s} has invalid length {l}"
            )));
        }
        entries.sort_unstable_by_key(|&(s, l)| (l, s));
        let mut seen = HashMap::with_capacity(entries.len());
        for &(s, _) in &entries {
            if seen.insert(s, ()).is_some() {
                return Err(CodingError::InvalidInput(format!("duplicate symbol {s}")));
            }
        }
        if entries.len() == 1 {
            if entries[0].1 != 1 {
                return Err(CodingError::KraftViolation);
            }
        } else {
            // Sum of 2^(32 - l) must equal 2^32.
            let kraft: u128 = entries
                .iter()
                .map(|&(_, l)| 1u128 << (MAX_CODE_LEN - l))
                .sum();
            if kraft != 1u128 << MAX_CODE_LEN {
                return Err(CodingError::KraftViolation);
            }
        }

        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        for &(_, l) in &entries {
            count[l as usize] += 1;
        }
        let mut first_code = [0u64; MAX_CODE_LEN as usize + 1];
        let mut first_index = [0usize; MAX_CODE_LEN as usize + 1];
        let mut code = 0u64;
        let mut index = 0usize;
        for len in 1..=MAX_CODE_LEN as usize {
            code = (code + count[len - 1] as u64) << 1;
            first_code[len] = code;
            first_index[len] = index;
            index += count[len] as usize;
        }
        let mut codewords = HashMap::with_capacity(entries.len());
        let mut next = first_code;
        for &(s, l) in &entries {
            codewords.insert(s, (next[l as usize] as u32, l));
            next[l as usize] += 1;
        }
        Ok(HuffmanCode {
            entries,
            codewords,
            count,
            first_code,
            first_index,
        })
    }

    /// `(symbol, length)` pairs in canonical order.
    pub fn entries(&self) -> &[(i64, u8)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn length_of(&self, symbol: i64) -> Option<u8> {
        self.codewords.get(&symbol).map(|&(_, l)| l)
    }

    /// Codeword and its length in bits.
    pub fn codeword(&self, symbol: i64) -> Option<(u32, u8)> {
        self.codewords.get(&symbol).copied()
    }

    pub fn max_length(&self) -> u8 {
        self.entries.last().map_or(0, |&(_, l)| l)
    }
}

#[derive(Debug)]
struct Node {
    left: usize,
    right: usize,
}

/// Optimal prefix code for `h`, in canonical form.
pub fn build_code(h: &SymbolHistogram) -> HuffmanCode {
    let leaves: Vec<(i64, u64)> = h.counts.iter().map(|(&s, &c)| (s, c)).collect();
    if leaves.len() == 1 {
        return HuffmanCode::from_lengths(vec![(leaves[0].0, 1)])
            .expect("single-symbol code is valid");
    }
    let n = leaves.len();
    // Node ids below n are leaves, in ascending symbol order.
    let mut internal: Vec<Node> = Vec::with_capacity(n - 1);
    let mut heap: BinaryHeap<Reverse<(u64, i64, usize)>> = leaves
        .iter()
        .enumerate()
        .map(|(id, &(s, c))| Reverse((c, s, id)))
        .collect();
    while heap.len() > 1 {
        let Reverse((ca, sa, a)) = heap.pop().unwrap();
        let Reverse((cb, sb, b)) = heap.pop().unwrap();
        let id = n + internal.len();
        internal.push(Node { left: a, right: b });
        heap.push(Reverse((ca + cb, sa.min(sb), id)));
    }
    let root = n + internal.len() - 1;

    let mut depth = vec![0u32; n];
    let mut stack = vec![(root, 0u32)];
    while let Some((id, d)) = stack.pop() {
        if id < n {
            depth[id] = d;
        } else {
            let node = &internal[id - n];
            stack.push((node.left, d + 1));
            stack.push((node.right, d + 1));
        }
    }

    let lengths = if depth.iter().any(|&d| d > MAX_CODE_LEN as u32) {
        limit_lengths(&leaves, &depth)
    } else {
        depth.iter().map(|&d| d as u8).collect()
    };
    let entries = leaves.iter().zip(lengths).map(|(&(s, _), l)| (s, l)).collect();
    HuffmanCode::from_lengths(entries).expect("Huffman lengths satisfy Kraft")
}

// Rebalances an over-long length distribution down to MAX_CODE_LEN while
// keeping the Kraft sum at 1, then hands the shortest lengths to the most
// frequent symbols.
fn limit_lengths(leaves: &[(i64, u64)], depth: &[u32]) -> Vec<u8> {
    let max = *depth.iter().max().unwrap() as usize;
    let mut bl_count = vec![0u64; max + 1];
    for &d in depth {
        bl_count[d as usize] += 1;
    }
    let cap = MAX_CODE_LEN as usize;
    for i in (cap + 1..=max).rev() {
        while bl_count[i] > 0 {
            let mut j = i - 2;
            while bl_count[j] == 0 {
                j -= 1;
            }
            bl_count[i] -= 2;
            bl_count[i - 1] += 1;
            bl_count[j + 1] += 2;
            bl_count[j] -= 1;
        }
    }
    let mut order: Vec<usize> = (0..leaves.len()).collect();
    order.sort_by_key(|&i| (Reverse(leaves[i].1), leaves[i].0));
    let mut lengths = vec![0u8; leaves.len()];
    let mut len = 1;
    for i in order {
        while bl_count[len] == 0 {
            len += 1;
        }
        bl_count[len] -= 1;
        lengths[i] = len as u8;
    }
    lengths
}

/// Probability-weighted mean codeword length in bits per symbol.
pub fn avg_code_length(code: &HuffmanCode, h: &SymbolHistogram) -> Result<f64, CodingError> {
    let mut bits = 0u128;
    for (&s, &c) in &h.counts {
        let l = code.length_of(s).ok_or(CodingError::UnknownSymbol(s))?;
        bits += c as u128 * l as u128;
    }
    Ok(bits as f64 / h.total as f64)
}

/// Packed bits, MSB-first within each byte, zero-padded at the end.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitPayload {
    pub bytes: Vec<u8>,
    pub bit_count: u64,
}

impl BitPayload {
    /// Checks `bytes.len() == ceil(bit_count / 8)` and that padding bits are zero.
    pub fn validate(&self) -> Result<(), String> {
        let want = self.bit_count.div_ceil(8);
        if self.bytes.len() as u64 != want {
            return Err(format!(
                "{} bits need {want} bytes, found {}",
                self.bit_count,
                self.bytes.len()
            ));
        }
        let used = (self.bit_count % 8) as u32;
        if used != 0 {
            let last = *self.bytes.last().unwrap();
            if last & (0xffu8 >> used) != 0 {
                return Err("non-zero padding bits".into());
            }
        }
        Ok(())
    }
}

/// MSB-first bit writer.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    pending: u32,
    bit_count: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `len` bits of `value`, most significant first.
    pub fn write(&mut self, value: u32, len: u8) {
        debug_assert!(len <= 32);
        if len == 0 {
            return;
        }
        let len = len as u32;
        self.acc = (self.acc << len) | (value as u64 & ((1u64 << len) - 1));
        self.pending += len;
        self.bit_count += len as u64;
        while self.pending >= 8 {
            self.pending -= 8;
            self.bytes.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u64 << self.pending) - 1;
    }

    pub fn finish(mut self) -> BitPayload {
        if self.pending > 0 {
            self.bytes.push((self.acc << (8 - self.pending)) as u8);
        }
        BitPayload {
            bytes: self.bytes,
            bit_count: self.bit_count,
        }
    }
}

/// MSB-first bit reader bounded by a bit count.
#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit_count: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(payload: &'a BitPayload) -> Self {
        BitReader {
            bytes: &payload.bytes,
            bit_count: payload.bit_count.min(payload.bytes.len() as u64 * 8),
            pos: 0,
        }
    }

    pub fn read_bit(&mut self) -> Option<u32> {
        if self.pos >= self.bit_count {
            return None;
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = (byte >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        Some(bit as u32)
    }

    pub fn remaining(&self) -> u64 {
        self.bit_count - self.pos
    }
}

/// Encodes `symbols` with `code`.
pub fn encode(symbols: &[i64], code: &HuffmanCode) -> Result<BitPayload, CodingError> {
    let mut w = BitWriter::new();
    for &s in symbols {
        let (cw, len) = code.codeword(s).ok_or(CodingError::UnknownSymbol(s))?;
        w.write(cw, len);
    }
    Ok(w.finish())
}

/// Decodes exactly `count` symbols; the payload must hold no further bits.
pub fn decode(payload: &BitPayload, code: &HuffmanCode, count: usize) -> Result<Vec<i64>, CodingError> {
    let mut r = BitReader::new(payload);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut cw = 0u64;
        let mut len = 0usize;
        loop {
            let bit = r.read_bit().ok_or(CodingError::Truncated {
                decoded: out.len(),
                expected: count,
            })?;
            cw = (cw << 1) | bit as u64;
            len += 1;
            let n = code.count[len] as u64;
            if n > 0 && cw >= code.first_code[len] && cw - code.first_code[len] < n {
                let idx = code.first_index[len] + (cw - code.first_code[len]) as usize;
                out.push(code.entries[idx].0);
                break;
            }
            if len >= MAX_CODE_LEN as usize {
                return Err(CodingError::InvalidCodeword);
            }
        }
    }
    if r.remaining() > 0 || payload.bit_count > payload.bytes.len() as u64 * 8 {
        return Err(CodingError::TrailingBits(r.remaining()));
    }
    Ok(out)
}
