//! Complete prefix codes: a variable-length MPM part plus fixed-length
//! remainder groups, written `2+3+3+(6x32)`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::dataset::SymbolSpace;
use crate::error::{Error, Result};

/// A fixed-length remainder group: `count` codewords of `len` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlGroup {
    pub len: u8,
    pub count: u16,
}

/// A prefix code described by its codeword lengths: `mpm_lengths` for the M
/// predicted slots, then fixed-length groups covering the remaining symbols.
/// Lengths never decrease with rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeShape {
    mpm_lengths: Vec<u8>,
    fl_groups: Vec<FlGroup>,
}

const MAX_CODE_LEN: u8 = 32;

impl CodeShape {
    /// An empty MPM part is allowed (a pure fixed-length code), but the
    /// shape must have at least one codeword overall.
    pub fn new(mpm_lengths: Vec<u8>, fl_groups: Vec<(u8, u16)>) -> Result<Self> {
        if mpm_lengths.is_empty() && fl_groups.is_empty() {
            return Err(Error::InvalidParameter("a code needs at least one codeword".into()));
        }
        for w in mpm_lengths.windows(2) {
            if w[0] > w[1] {
                return Err(Error::InvalidParameter(format!(
                    "MPM lengths must be nondecreasing, got {mpm_lengths:?}"
                )));
            }
        }
        for &l in &mpm_lengths {
            if l == 0 || l > MAX_CODE_LEN {
                return Err(Error::InvalidParameter(format!("MPM length {l} out of range")));
            }
        }
        let groups: Vec<FlGroup> = fl_groups.iter().map(|&(len, count)| FlGroup { len, count }).collect();
        let mut prev = mpm_lengths.last().copied().unwrap_or(1);
        let mut first = true;
        for g in &groups {
            if g.count == 0 {
                return Err(Error::InvalidParameter("FL group with zero codewords".into()));
            }
            if g.len == 0 || g.len > MAX_CODE_LEN {
                return Err(Error::InvalidParameter(format!("FL length {} out of range", g.len)));
            }
            if first {
                if g.len < prev {
                    return Err(Error::InvalidParameter(format!(
                        "first FL length {} is shorter than the last MPM length {prev}",
                        g.len
                    )));
                }
                first = false;
            } else if g.len <= prev {
                return Err(Error::InvalidParameter(
                    "FL group lengths must be strictly increasing".into(),
                ));
            }
            prev = g.len;
        }
        Ok(CodeShape { mpm_lengths, fl_groups: groups })
    }

    /// Number of MPM slots.
    pub fn mpm_count(&self) -> usize {
        self.mpm_lengths.len()
    }

    pub fn mpm_lengths(&self) -> &[u8] {
        &self.mpm_lengths
    }

    pub fn fl_groups(&self) -> &[FlGroup] {
        &self.fl_groups
    }

    /// Total number of codewords (the symbol count this code covers).
    pub fn num_symbols(&self) -> usize {
        self.mpm_count() + self.fl_groups.iter().map(|g| g.count as usize).sum::<usize>()
    }

    /// Codeword length of a rank; ranks are 0-based, shortest first.
    pub fn rank_len(&self, rank: usize) -> u8 {
        if rank < self.mpm_lengths.len() {
            return self.mpm_lengths[rank];
        }
        let mut r = rank - self.mpm_lengths.len();
        for g in &self.fl_groups {
            if r < g.count as usize {
                return g.len;
            }
            r -= g.count as usize;
        }
        panic!("rank {rank} out of range for code {self}");
    }

    /// All codeword lengths by rank.
    pub fn len_vector(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.num_symbols());
        v.extend_from_slice(&self.mpm_lengths);
        for g in &self.fl_groups {
            for _ in 0..g.count {
                v.push(g.len);
            }
        }
        v
    }

    pub fn max_len(&self) -> u8 {
        self.fl_groups
            .last()
            .map(|g| g.len)
            .unwrap_or(0)
            .max(self.mpm_lengths.last().copied().unwrap_or(0))
    }

    pub fn is_complete(&self) -> bool {
        kraft_sum(self) == Ratio::from_integer(1)
    }

    pub fn ensure_complete(&self) -> Result<()> {
        let sum = kraft_sum(self);
        if sum != Ratio::from_integer(1) {
            return Err(Error::IncompleteCode { shape: self.to_string(), sum: sum.to_string() });
        }
        Ok(())
    }
}

impl fmt::Display for CodeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.mpm_lengths.iter().map(|l| l.to_string()).collect();
        for g in &self.fl_groups {
            parts.push(format!("({}x{})", g.len, g.count));
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for CodeShape {
    type Err = Error;

    /// Parse the `2+3+3+(6x32)` notation.
    fn from_str(s: &str) -> Result<Self> {
        let mut mpm = Vec::new();
        let mut groups = Vec::new();
        for part in s.split('+') {
            let part = part.trim();
            if let Some(inner) = part.strip_prefix('(').and_then(|p| p.strip_suffix(')')) {
                let (len, count) = inner
                    .split_once(['x', 'X', '*'])
                    .ok_or_else(|| Error::InvalidParameter(format!("bad FL group {part:?}")))?;
                let len: u8 = len.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad FL length in {part:?}"))
                })?;
                let count: u16 = count.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad FL count in {part:?}"))
                })?;
                groups.push((len, count));
            } else {
                if !groups.is_empty() {
                    return Err(Error::InvalidParameter(
                        "MPM lengths must precede FL groups".into(),
                    ));
                }
                let len: u8 = part
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad MPM length {part:?}")))?;
                mpm.push(len);
            }
        }
        CodeShape::new(mpm, groups)
    }
}

/// Exact Kraft sum of a shape; the shape is a complete prefix code iff this
/// equals 1.
pub fn kraft_sum(shape: &CodeShape) -> Ratio<u128> {
    let mut sum = Ratio::new(0u128, 1u128);
    for &l in &shape.mpm_lengths {
        sum += Ratio::new(1u128, 1u128 << l);
    }
    for g in &shape.fl_groups {
        sum += Ratio::new(g.count as u128, 1u128 << g.len);
    }
    sum
}

/// Enumerate every complete shape over `space.k()` symbols with the given
/// MPM counts, codeword lengths capped at `max_len`, and at most
/// `max_fl_groups` remainder groups. The order is lexicographic on
/// `(M, mpm_lengths, fl_groups)` and the result is duplicate-free.
///
/// The rule generating the set: MPM lengths are nondecreasing, FL group
/// lengths strictly increase starting no shorter than the last MPM length,
/// every group is nonempty, and the Kraft sum is exactly 1.
pub fn enumerate_codes(
    space: &SymbolSpace,
    mpm_counts: &[usize],
    max_len: u8,
    max_fl_groups: usize,
) -> Result<Vec<CodeShape>> {
    if mpm_counts.is_empty() {
        return Err(Error::InvalidParameter("mpm_counts may not be empty".into()));
    }
    let needed = (space.k() as f64).log2().ceil() as u8;
    if max_len < needed {
        return Err(Error::InvalidParameter(format!(
            "max_len {max_len} cannot cover k={} symbols (needs >= {needed})",
            space.k()
        )));
    }
    if max_fl_groups == 0 {
        return Err(Error::InvalidParameter("need at least one FL group".into()));
    }
    let mut counts: Vec<usize> = mpm_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();

    let budget: u64 = 1u64 << max_len;
    let mut out = Vec::new();
    for &m in &counts {
        if m == 0 || m >= space.k() as usize {
            continue;
        }
        let remaining_symbols = space.k() as usize - m;
        let mut mpm = Vec::with_capacity(m);
        enumerate_mpm(
            budget,
            max_len,
            m,
            1,
            &mut mpm,
            remaining_symbols,
            max_fl_groups,
            &mut out,
        );
    }
    Ok(out)
}

/// Recursively pick nondecreasing MPM lengths, then hand the leftover Kraft
/// budget to the FL group search. `budget` is in units of `2^-max_len`.
#[allow(clippy::too_many_arguments)]
fn enumerate_mpm(
    budget: u64,
    max_len: u8,
    slots_left: usize,
    min_len: u8,
    mpm: &mut Vec<u8>,
    remaining_symbols: usize,
    max_fl_groups: usize,
    out: &mut Vec<CodeShape>,
) {
    if slots_left == 0 {
        let first_fl_min = *mpm.last().unwrap();
        let mut groups = Vec::new();
        enumerate_fl(
            budget,
            max_len,
            first_fl_min,
            remaining_symbols,
            max_fl_groups,
            &mut groups,
            &mut |groups: &[(u8, u16)]| {
                let shape = CodeShape::new(mpm.clone(), groups.to_vec())
                    .expect("enumerated shape must be structurally valid");
                debug_assert!(shape.is_complete());
                out.push(shape);
            },
        );
        return;
    }
    for l in min_len..=max_len {
        let w = 1u64 << (max_len - l);
        if w > budget {
            continue;
        }
        // What's left must still pay for the remaining MPM slots and at
        // least one codeword per remaining symbol, all at weight >= 1.
        let rest = budget - w;
        let min_rest = (slots_left as u64 - 1) + remaining_symbols as u64;
        if rest < min_rest {
            continue;
        }
        mpm.push(l);
        enumerate_mpm(
            rest,
            max_len,
            slots_left - 1,
            l,
            mpm,
            remaining_symbols,
            max_fl_groups,
            out,
        );
        mpm.pop();
    }
}

/// Pick strictly increasing FL lengths with positive counts summing to
/// `symbols`, spending exactly `budget` (in units of `2^-max_len`).
fn enumerate_fl(
    budget: u64,
    max_len: u8,
    min_len: u8,
    symbols: usize,
    groups_left: usize,
    acc: &mut Vec<(u8, u16)>,
    emit: &mut impl FnMut(&[(u8, u16)]),
) {
    if symbols == 0 {
        if budget == 0 && !acc.is_empty() {
            emit(acc);
        }
        return;
    }
    if budget == 0 || groups_left == 0 {
        return;
    }
    for l in min_len..=max_len {
        let w = 1u64 << (max_len - l);
        let max_count_by_budget = budget / w;
        let max_count = (symbols as u64).min(max_count_by_budget);
        for count in 1..=max_count {
            let used = w * count;
            let rest_symbols = symbols - count as usize;
            let rest_budget = budget - used;
            // remaining symbols must be affordable at the cheapest weight (1)
            // and expensive enough at weight w/2 (next group is longer).
            if (rest_symbols as u64) > rest_budget {
                continue;
            }
            if rest_symbols == 0 && rest_budget != 0 {
                continue;
            }
            acc.push((l, count as u16));
            enumerate_fl(
                rest_budget,
                max_len,
                l + 1,
                rest_symbols,
                groups_left - 1,
                acc,
                emit,
            );
            acc.pop();
        }
    }
}

/// Default enumeration profile: single FL group, MPM counts {3,5,7} with a
/// length cap of 8 for k=35, MPM counts {3,5,7,9} with a cap of 9 for k=67.
pub fn default_code_set(space: &SymbolSpace) -> Result<Vec<CodeShape>> {
    if space.k() == 67 {
        enumerate_codes(space, &[3, 5, 7, 9], 9, 1)
    } else if space.k() == 35 {
        enumerate_codes(space, &[3, 5, 7], 8, 1)
    } else {
        let cap = (space.k() as f64).log2().ceil() as u8 + 3;
        enumerate_codes(space, &[3, 5, 7], cap, 1)
    }
}

/// Code set used by the dynamic-list search: same caps but up to three FL
/// groups and any MPM count from 1 to 9.
pub fn dynlist_code_set(space: &SymbolSpace) -> Result<Vec<CodeShape>> {
    let (counts, cap): (Vec<usize>, u8) = if space.k() == 67 {
        ((1..=9).collect(), 9)
    } else if space.k() == 35 {
        ((1..=7).collect(), 8)
    } else {
        ((1..=7).collect(), (space.k() as f64).log2().ceil() as u8 + 3)
    };
    enumerate_codes(space, &counts, cap, 3)
}

// ---------------------------------------------------------------------------
// Concrete codewords
// ---------------------------------------------------------------------------

/// Concrete bit strings for every rank of a shape. Bits are stored in the
/// low bits of `word`, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordTable {
    words: Vec<(u32, u8)>,
}

impl CodewordTable {
    /// Canonical-prefix realization: ranks already sort by (length, rank);
    /// each codeword is the previous one incremented then left-shifted to
    /// the new length.
    pub fn canonical(shape: &CodeShape) -> Result<CodewordTable> {
        shape.ensure_complete()?;
        let lens = shape.len_vector();
        let mut words = Vec::with_capacity(lens.len());
        let mut code: u64 = 0;
        let mut prev_len = lens[0];
        for (i, &len) in lens.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (len - prev_len);
            }
            words.push((code as u32, len));
            prev_len = len;
        }
        Ok(CodewordTable { words })
    }

    /// Build from explicit (word, len) pairs; checks prefix-freeness.
    pub fn from_words(words: Vec<(u32, u8)>) -> Result<CodewordTable> {
        let t = CodewordTable { words };
        if !t.is_prefix_free() {
            return Err(Error::Validation("codeword table is not prefix-free".into()));
        }
        Ok(t)
    }

    /// Table I: MPM0 "10", MPM1 "110", MPM2 "111", remainder "0" + 5 bits.
    pub fn hevc_anchor() -> CodewordTable {
        let mut words = vec![(0b10, 2), (0b110, 3), (0b111, 3)];
        for i in 0..32u32 {
            words.push((i, 6)); // leading bit 0, then the 5-bit index
        }
        CodewordTable { words }
    }

    /// Table II: six MPM codewords, then "01"+4 bits (x16), "00"+5 bits
    /// 0..=18 (x19), "00"+6 bits 38..=63 (x26).
    pub fn jem_anchor() -> CodewordTable {
        let mut words = vec![
            (0b10, 2),
            (0b110, 3),
            (0b1110, 4),
            (0b11110, 5),
            (0b111110, 6),
            (0b111111, 6),
        ];
        for i in 0..16u32 {
            words.push((0b010000 | i, 6));
        }
        for i in 0..19u32 {
            words.push((i, 7));
        }
        for i in 0..26u32 {
            words.push((38 + i, 8));
        }
        CodewordTable { words }
    }

    pub fn num_symbols(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, rank: usize) -> (u32, u8) {
        self.words[rank]
    }

    pub fn len(&self, rank: usize) -> u8 {
        self.words[rank].1
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// First (most significant) bit of a rank's codeword.
    pub fn first_bit(&self, rank: usize) -> u8 {
        let (w, l) = self.words[rank];
        ((w >> (l - 1)) & 1) as u8
    }

    pub fn bit_string(&self, rank: usize) -> String {
        let (w, l) = self.words[rank];
        (0..l).rev().map(|b| if (w >> b) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn is_prefix_free(&self) -> bool {
        for (i, &(wa, la)) in self.words.iter().enumerate() {
            for &(wb, lb) in &self.words[i + 1..] {
                let (short, sl, long, ll) = if la <= lb { (wa, la, wb, lb) } else { (wb, lb, wa, la) };
                if (long >> (ll - sl)) == short {
                    return false;
                }
            }
        }
        true
    }

    /// Build a bit-walk decoder for this table.
    pub fn decoder(&self) -> CodewordDecoder {
        CodewordDecoder::new(self)
    }
}

/// Binary trie over codewords; follow one bit at a time until a rank falls
/// out.
#[derive(Debug, Clone)]
pub struct CodewordDecoder {
    // node: [child_on_0, child_on_1]; negative values encode -(rank+1).
    nodes: Vec<[i32; 2]>,
}

impl CodewordDecoder {
    fn new(table: &CodewordTable) -> CodewordDecoder {
        let mut nodes: Vec<[i32; 2]> = vec![[0, 0]];
        for (rank, &(word, len)) in table.words.iter().enumerate() {
            let mut node = 0usize;
            for b in (0..len).rev() {
                let bit = ((word >> b) & 1) as usize;
                if b == 0 {
                    nodes[node][bit] = -((rank as i32) + 1);
                } else {
                    if nodes[node][bit] == 0 {
                        nodes.push([0, 0]);
                        let next = (nodes.len() - 1) as i32;
                        nodes[node][bit] = next;
                    }
                    node = nodes[node][bit] as usize;
                }
            }
        }
        CodewordDecoder { nodes }
    }

    /// Follow bits from `next_bit` until a codeword completes; returns its
    /// rank. `None` means the bit source ran dry mid-codeword.
    pub fn walk(&self, mut next_bit: impl FnMut() -> Option<u8>) -> Option<usize> {
        let mut node = 0usize;
        loop {
            let bit = next_bit()? as usize;
            let entry = self.nodes[node][bit & 1];
            if entry < 0 {
                return Some((-entry - 1) as usize);
            }
            if entry == 0 {
                return None; // unreachable for complete codes
            }
            node = entry as usize;
        }
    }
}

/// Expected codeword length for a descending probability vector: rank r of
/// the shape is paired with the r-th largest probability.
pub fn expected_length(shape: &CodeShape, probs: &[f64]) -> Result<f64> {
    if probs.len() != shape.num_symbols() {
        return Err(Error::InvalidParameter(format!(
            "probability vector has {} entries but the code covers {} symbols",
            probs.len(),
            shape.num_symbols()
        )));
    }
    let mut sum = 0.0;
    for w in probs.windows(2) {
        if w[0] < w[1] {
            return Err(Error::InvalidParameter(
                "probabilities must be sorted nonincreasing".into(),
            ));
        }
    }
    for &p in probs {
        if p < 0.0 {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("probabilities sum to {sum}, not 1")));
    }
    let mut e = 0.0;
    for (rank, &p) in probs.iter().enumerate() {
        e += p * shape.rank_len(rank) as f64;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(s: &str) -> CodeShape {
        s.parse().unwrap()
    }

    #[test]
    fn kraft_anchor_shapes() {
        assert_eq!(kraft_sum(&shape("2+3+3+(6x32)")), Ratio::from_integer(1));
        assert_eq!(
            kraft_sum(&shape("2+3+4+5+6+6+(6x16)+(7x19)+(8x26)")),
            Ratio::from_integer(1)
        );
        assert_eq!(kraft_sum(&shape("2+3+(6x32)")), Ratio::new(7u128, 8u128));
    }

    #[test]
    fn pure_fl_code() {
        let s = shape("(5x32)");
        assert_eq!(s.mpm_count(), 0);
        assert_eq!(s.num_symbols(), 32);
        assert!(s.is_complete());
        assert_eq!(s.rank_len(0), 5);
        assert_eq!(s.rank_len(31), 5);
        assert!("".parse::<CodeShape>().is_err());
    }

    #[test]
    fn notation_roundtrip() {
        for s in ["2+3+3+(6x32)", "2+2+3+(5x3)+(7x11)+(8x50)", "1+3+4+5+6+6+(6x6)+(7x6)+(8x7)+(9x42)"] {
            assert_eq!(shape(s).to_string(), s);
        }
        assert!("(6x32)+2".parse::<CodeShape>().is_err());
        assert!("3+2+(6x32)".parse::<CodeShape>().is_err());
    }

    #[test]
    fn enumerate_hevc_m3() {
        let set = enumerate_codes(&SymbolSpace::hevc(), &[3], 8, 1).unwrap();
        let shown: Vec<String> = set.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            shown,
            vec!["1+2+3+(8x32)", "1+3+3+(7x32)", "2+2+2+(7x32)", "2+3+3+(6x32)"]
        );
    }

    #[test]
    fn enumerate_tiny_k_matches_brute_force() {
        // k=4, M=3, one FL group: brute force over all length vectors.
        let space = SymbolSpace::new(4, 2, 3).unwrap();
        let set = enumerate_codes(&space, &[3], 4, 1).unwrap();
        let mut brute = Vec::new();
        for a in 1u8..=4 {
            for b in a..=4 {
                for c in b..=4 {
                    for g in c..=4 {
                        let sum = Ratio::new(1u128, 1 << a)
                            + Ratio::new(1u128, 1 << b)
                            + Ratio::new(1u128, 1 << c)
                            + Ratio::new(1u128, 1 << g);
                        if sum == Ratio::from_integer(1) {
                            brute.push((vec![a, b, c], vec![(g, 1u16)]));
                        }
                    }
                }
            }
        }
        assert_eq!(set.len(), brute.len());
        for (s, (mpm, fl)) in set.iter().zip(brute.iter()) {
            assert_eq!(s.mpm_lengths(), &mpm[..]);
            assert_eq!(s.fl_groups()[0].len, fl[0].0);
        }
        let shown: Vec<String> = set.iter().map(|s| s.to_string()).collect();
        assert!(shown.contains(&"1+2+3+(3x1)".to_string()));
        assert!(shown.contains(&"2+2+2+(2x1)".to_string()));
    }

    #[test]
    fn enumerated_codes_complete_and_unique() {
        for space in [SymbolSpace::hevc(), SymbolSpace::jem()] {
            let set = default_code_set(&space).unwrap();
            let mut seen = std::collections::HashSet::new();
            for s in &set {
                assert!(s.is_complete(), "{s}");
                assert_eq!(s.num_symbols(), space.k() as usize);
                assert!(seen.insert(s.clone()), "duplicate {s}");
            }
        }
    }

    #[test]
    fn hevc_anchor_table_matches_spec() {
        let t = CodewordTable::hevc_anchor();
        assert_eq!(t.bit_string(0), "10");
        assert_eq!(t.bit_string(1), "110");
        assert_eq!(t.bit_string(2), "111");
        assert_eq!(t.bit_string(3), "000000");
        assert_eq!(t.bit_string(34), "011111");
        assert!(t.is_prefix_free());
    }

    #[test]
    fn jem_anchor_table_matches_spec() {
        let t = CodewordTable::jem_anchor();
        assert_eq!(t.num_symbols(), 67);
        assert_eq!(t.bit_string(0), "10");
        assert_eq!(t.bit_string(5), "111111");
        assert_eq!(t.bit_string(6), "010000");
        assert_eq!(t.bit_string(21), "011111");
        assert_eq!(t.bit_string(22), "0000000");
        assert_eq!(t.bit_string(40), "0010010");
        assert_eq!(t.bit_string(41), "00100110");
        assert_eq!(t.bit_string(66), "00111111");
        assert!(t.is_prefix_free());
    }

    #[test]
    fn canonical_roundtrip_via_decoder() {
        for s in ["2+3+3+(6x32)", "2+3+4+4+5+(6x30)", "2+2+3+(5x3)+(7x11)+(8x50)"] {
            let sh = shape(s);
            let t = CodewordTable::canonical(&sh).unwrap();
            assert!(t.is_prefix_free());
            let dec = t.decoder();
            for rank in 0..t.num_symbols() {
                let (w, l) = t.word(rank);
                let mut bits = (0..l).rev().map(move |b| ((w >> b) & 1) as u8);
                let got = dec.walk(|| bits.next()).unwrap();
                assert_eq!(got, rank);
            }
        }
        assert!(CodewordTable::canonical(&shape("2+3+(6x32)")).is_err());
    }

    #[test]
    fn expected_length_cases() {
        let sh = shape("1+3+3+(7x32)");
        let mut probs = vec![0.0; 35];
        probs[0] = 1.0;
        assert_eq!(expected_length(&sh, &probs).unwrap(), 1.0);

        let uni = vec![1.0 / 35.0; 35];
        let hevc = shape("2+3+3+(6x32)");
        let e = expected_length(&hevc, &uni).unwrap();
        assert!((e - (2.0 + 3.0 + 3.0 + 32.0 * 6.0) / 35.0).abs() < 1e-12);

        let mut unsorted = vec![1.0 / 35.0; 35];
        unsorted[0] = 0.0;
        unsorted[34] = 2.0 / 35.0;
        assert!(expected_length(&hevc, &unsorted).is_err());
    }

    #[test]
    fn expected_length_matches_naive_loop() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let sh = shape("2+3+4+4+5+(6x30)");
        for _ in 0..20 {
            let mut p: Vec<f64> = (0..35).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= s);
            p.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let fast = expected_length(&sh, &p).unwrap();
            let lens = sh.len_vector();
            let naive: f64 = p.iter().zip(lens.iter()).map(|(pi, &l)| pi * l as f64).sum();
            assert!((fast - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn descending_assignment_is_optimal_small_k() {
        // check against all permutations for k <= 6
        let space = SymbolSpace::new(6, 2, 5).unwrap();
        let set = enumerate_codes(&space, &[2, 3], 5, 2).unwrap();
        assert!(!set.is_empty());
        let probs = [0.4, 0.25, 0.15, 0.1, 0.07, 0.03];
        for sh in &set {
            let base = expected_length(sh, &probs).unwrap();
            let lens = sh.len_vector();
            let mut idx: Vec<usize> = (0..6).collect();
            let mut best = f64::INFINITY;
            permute(&mut idx, 0, &mut |perm| {
                let e: f64 = perm.iter().enumerate().map(|(r, &i)| probs[i] * lens[r] as f64).sum();
                if e < best {
                    best = e;
                }
            });
            assert!(base <= best + 1e-12, "{sh}: {base} vs {best}");
        }
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }
}

