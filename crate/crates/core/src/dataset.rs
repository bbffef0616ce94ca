//! Samples, context tuples, conditional histograms and dataset generation.
//!
//! A sample ties one coded block's intra prediction mode (IPM) to the modes
//! of its five causal neighbours. All probabilities used elsewhere in the
//! crate are empirical frequencies read off a [`ConditionalHistogram`].

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mode alphabet: `k` symbols of which `[angular_min, angular_max]` are
/// directional. Planar is 0 and DC is 1 in both built-in profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolSpace {
    k: u16,
    angular_min: u16,
    angular_max: u16,
}

/// Index of the DC mode, shared by both profiles.
pub const DC_MODE: u16 = 1;
/// Index of the planar mode.
pub const PLANAR_MODE: u16 = 0;

impl SymbolSpace {
    /// 35 modes: planar, DC and 33 directional modes 2..=34.
    pub fn hevc() -> Self {
        SymbolSpace { k: 35, angular_min: 2, angular_max: 34 }
    }

    /// 67 modes: planar, DC and 65 directional modes 2..=66.
    pub fn jem() -> Self {
        SymbolSpace { k: 67, angular_min: 2, angular_max: 66 }
    }

    /// Generic alphabet with modes 2..k-1 treated as angular.
    pub fn generic(k: u16) -> Result<Self> {
        Self::new(k, 2, k.saturating_sub(1))
    }

    pub fn new(k: u16, angular_min: u16, angular_max: u16) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("k must be at least 3, got {k}")));
        }
        if !(angular_min < angular_max && angular_max < k) {
            return Err(Error::InvalidParameter(format!(
                "angular range [{angular_min}, {angular_max}] invalid for k={k}"
            )));
        }
        Ok(SymbolSpace { k, angular_min, angular_max })
    }

    pub fn k(&self) -> u16 {
        self.k
    }

    pub fn angular_min(&self) -> u16 {
        self.angular_min
    }

    pub fn angular_max(&self) -> u16 {
        self.angular_max
    }

    pub fn contains(&self, mode: u16) -> bool {
        mode < self.k
    }

    pub fn is_angular(&self, mode: u16) -> bool {
        mode >= self.angular_min && mode <= self.angular_max
    }

    /// Offset an angular mode, wrapping inside the angular range.
    ///
    /// `angular_min + ((a - angular_min + o) mod span)` with `span` the
    /// number of angular modes; the caller guarantees `base` is angular.
    pub fn wrap_angular(&self, base: u16, offset: i32) -> u16 {
        debug_assert!(self.is_angular(base));
        let span = (self.angular_max - self.angular_min + 1) as i64;
        let rel = (base - self.angular_min) as i64 + offset as i64;
        let wrapped = rel.rem_euclid(span);
        self.angular_min + wrapped as u16
    }
}

/// One of the five neighbour positions a context value can come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Context {
    L,
    U,
    Bl,
    Ur,
    Ul,
}

impl Context {
    pub const ALL: [Context; 5] = [Context::L, Context::U, Context::Bl, Context::Ur, Context::Ul];

    pub fn name(&self) -> &'static str {
        match self {
            Context::L => "L",
            Context::U => "U",
            Context::Bl => "BL",
            Context::Ur => "UR",
            Context::Ul => "UL",
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Context {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L" => Ok(Context::L),
            "U" => Ok(Context::U),
            "BL" => Ok(Context::Bl),
            "UR" => Ok(Context::Ur),
            "UL" => Ok(Context::Ul),
            other => Err(Error::InvalidParameter(format!("unknown context {other:?}"))),
        }
    }
}

/// Value used for a neighbour whose mode is not known.
pub const UNAVAILABLE: i16 = -1;

/// The five neighbour modes of one block; -1 marks an unavailable neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContextTuple {
    pub l: i16,
    pub u: i16,
    pub bl: i16,
    pub ur: i16,
    pub ul: i16,
}

impl ContextTuple {
    pub fn new(l: i16, u: i16, bl: i16, ur: i16, ul: i16) -> Self {
        ContextTuple { l, u, bl, ur, ul }
    }

    pub fn all_unavailable() -> Self {
        ContextTuple::new(UNAVAILABLE, UNAVAILABLE, UNAVAILABLE, UNAVAILABLE, UNAVAILABLE)
    }

    pub fn get(&self, c: Context) -> i16 {
        match c {
            Context::L => self.l,
            Context::U => self.u,
            Context::Bl => self.bl,
            Context::Ur => self.ur,
            Context::Ul => self.ul,
        }
    }

    pub fn set(&mut self, c: Context, v: i16) {
        match c {
            Context::L => self.l = v,
            Context::U => self.u = v,
            Context::Bl => self.bl = v,
            Context::Ur => self.ur = v,
            Context::Ul => self.ul = v,
        }
    }

    pub fn validate(&self, space: &SymbolSpace) -> Result<()> {
        for c in Context::ALL {
            let v = self.get(c);
            if v != UNAVAILABLE && !(v >= 0 && (v as u16) < space.k()) {
                return Err(Error::Validation(format!(
                    "context {c} value {v} out of range for k={}",
                    space.k()
                )));
            }
        }
        Ok(())
    }

    /// Replace every unavailable neighbour by DC.
    pub fn map_unavailable_to_dc(&self) -> ContextTuple {
        let fix = |v: i16| if v == UNAVAILABLE { DC_MODE as i16 } else { v };
        ContextTuple::new(fix(self.l), fix(self.u), fix(self.bl), fix(self.ur), fix(self.ul))
    }
}

/// A rate-distortion candidate attached to a sample: an alternative mode
/// and the distortion the encoder measured for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdCandidate {
    pub mode: u16,
    pub distortion: f64,
}

/// One coded block: its chosen mode, its neighbour context, and optionally
/// the rate-distortion candidates used by the multi-pass trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub ipm: u16,
    pub ctx: ContextTuple,
    pub rd_candidates: Option<Vec<RdCandidate>>,
}

impl Sample {
    pub fn new(ipm: u16, ctx: ContextTuple) -> Self {
        Sample { ipm, ctx, rd_candidates: None }
    }

    pub fn validate(&self, space: &SymbolSpace) -> Result<()> {
        if !space.contains(self.ipm) {
            return Err(Error::Validation(format!(
                "ipm {} out of range for k={}",
                self.ipm,
                space.k()
            )));
        }
        self.ctx.validate(space)?;
        if let Some(cands) = &self.rd_candidates {
            let mut seen = vec![false; space.k() as usize];
            let mut has_own = false;
            for c in cands {
                if !space.contains(c.mode) {
                    return Err(Error::Validation(format!("rd candidate mode {} out of range", c.mode)));
                }
                if c.distortion < 0.0 || !c.distortion.is_finite() {
                    return Err(Error::Validation(format!(
                        "rd candidate distortion {} must be a nonnegative finite number",
                        c.distortion
                    )));
                }
                if seen[c.mode as usize] {
                    return Err(Error::Validation(format!("duplicate rd candidate mode {}", c.mode)));
                }
                seen[c.mode as usize] = true;
                has_own |= c.mode == self.ipm;
            }
            if !has_own {
                return Err(Error::Validation(format!(
                    "rd candidates do not contain the chosen mode {}",
                    self.ipm
                )));
            }
        }
        Ok(())
    }
}

/// Per-context-cell mode counts. The key of a cell is the projection of the
/// sample's context tuple onto `context_set`, in that order.
#[derive(Debug, Clone)]
pub struct ConditionalHistogram {
    space: SymbolSpace,
    context_set: Vec<Context>,
    cells: BTreeMap<Vec<i16>, Vec<u64>>,
    total: u64,
}

impl ConditionalHistogram {
    pub fn space(&self) -> &SymbolSpace {
        &self.space
    }

    pub fn context_set(&self) -> &[Context] {
        &self.context_set
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Cells in deterministic (sorted key) order.
    pub fn cells(&self) -> impl Iterator<Item = (&Vec<i16>, &Vec<u64>)> {
        self.cells.iter()
    }

    /// Counts of one cell, if the key occurs in the data.
    pub fn cell(&self, key: &[i16]) -> Option<&Vec<u64>> {
        self.cells.get(key)
    }

    /// Project a full context tuple onto this histogram's context set.
    pub fn key_for_tuple(&self, t: &ContextTuple) -> Vec<i16> {
        self.context_set.iter().map(|c| t.get(*c)).collect()
    }

    pub fn cell_total(counts: &[u64]) -> u64 {
        counts.iter().sum()
    }

    /// Rebuild a full context tuple from a cell key; contexts outside the
    /// histogram's set are unavailable.
    pub fn tuple_for_key(&self, key: &[i16]) -> ContextTuple {
        let mut t = ContextTuple::all_unavailable();
        for (c, v) in self.context_set.iter().zip(key.iter()) {
            t.set(*c, *v);
        }
        t
    }

    /// Marginalize onto a subset of the conditioning contexts.
    pub fn project(&self, subset: &[Context]) -> Result<ConditionalHistogram> {
        for c in subset {
            if !self.context_set.contains(c) {
                return Err(Error::InvalidParameter(format!(
                    "cannot project onto {c}: not part of this histogram"
                )));
            }
        }
        let positions: Vec<usize> = subset
            .iter()
            .map(|c| self.context_set.iter().position(|x| x == c).unwrap())
            .collect();
        let mut cells: BTreeMap<Vec<i16>, Vec<u64>> = BTreeMap::new();
        for (key, counts) in &self.cells {
            let new_key: Vec<i16> = positions.iter().map(|&p| key[p]).collect();
            let entry = cells
                .entry(new_key)
                .or_insert_with(|| vec![0u64; self.space.k() as usize]);
            for (e, c) in entry.iter_mut().zip(counts.iter()) {
                *e += *c;
            }
        }
        Ok(ConditionalHistogram {
            space: self.space,
            context_set: subset.to_vec(),
            cells,
            total: self.total,
        })
    }

    /// Number of joint (context..., ipm) bins with a nonzero count.
    pub fn nonzero_bins(&self) -> u64 {
        self.cells
            .values()
            .map(|counts| counts.iter().filter(|&&c| c > 0).count() as u64)
            .sum()
    }

    /// Number of joint bins the contexts and mode could take in principle:
    /// `(k+1)^(#contexts) * k` (each context may also be unavailable).
    pub fn theoretical_bins(&self) -> u128 {
        let base = (self.space.k() as u128) + 1;
        let mut bins: u128 = self.space.k() as u128;
        for _ in &self.context_set {
            bins = bins.saturating_mul(base);
        }
        bins
    }
}

/// Count mode occurrences per projected context cell.
pub fn build_histogram(
    samples: &[Sample],
    context_set: &[Context],
    space: &SymbolSpace,
) -> Result<ConditionalHistogram> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("cannot build a histogram from zero samples"));
    }
    let mut cells: BTreeMap<Vec<i16>, Vec<u64>> = BTreeMap::new();
    for s in samples {
        let key: Vec<i16> = context_set.iter().map(|c| s.ctx.get(*c)).collect();
        let entry = cells
            .entry(key)
            .or_insert_with(|| vec![0u64; space.k() as usize]);
        entry[s.ipm as usize] += 1;
    }
    Ok(ConditionalHistogram {
        space: *space,
        context_set: context_set.to_vec(),
        cells,
        total: samples.len() as u64,
    })
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

const BINARY_MAGIC: &[u8; 4] = b"IPMS";
const BINARY_VERSION: u8 = 1;

/// Load samples from a CSV or binary `IPMS` file (detected by magic bytes).
pub fn load_samples(path: &Path, space: &SymbolSpace) -> Result<Vec<Sample>> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 4];
    let n = read_up_to(&mut file, &mut magic)?;
    if n == 4 && &magic == BINARY_MAGIC {
        let mut rest = Vec::new();
        file.read_to_end(&mut rest)?;
        return parse_binary(&rest, space);
    }
    drop(file);
    let file = std::fs::File::open(path)?;
    parse_csv(BufReader::new(file), space)
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}

pub fn parse_csv(reader: impl BufRead, space: &SymbolSpace) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if idx == 0 && trimmed.starts_with("ipm") {
            continue; // header
        }
        let fields: Vec<&str> = trimmed.split(',').map(|f| f.trim()).collect();
        if fields.len() < 6 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected at least 6 fields, got {}", fields.len()),
            });
        }
        let mut vals = [0i16; 6];
        for (i, f) in fields[..6].iter().enumerate() {
            vals[i] = f.parse::<i16>().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("field {}: {e}", i + 1),
            })?;
        }
        if vals[0] < 0 {
            return Err(Error::Parse { line: lineno, msg: "ipm may not be negative".into() });
        }
        let tail = &fields[6..];
        let rd_candidates = if tail.is_empty() {
            None
        } else {
            if tail.len() % 2 != 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "rd candidates must come in (mode, distortion) pairs".into(),
                });
            }
            let mut cands = Vec::with_capacity(tail.len() / 2);
            for pair in tail.chunks(2) {
                let mode = pair[0].parse::<u16>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("candidate mode: {e}"),
                })?;
                let distortion = pair[1].parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("candidate distortion: {e}"),
                })?;
                cands.push(RdCandidate { mode, distortion });
            }
            Some(cands)
        };
        let sample = Sample {
            ipm: vals[0] as u16,
            ctx: ContextTuple::new(vals[1], vals[2], vals[3], vals[4], vals[5]),
            rd_candidates,
        };
        sample.validate(space).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        samples.push(sample);
    }
    Ok(samples)
}

fn parse_binary(body: &[u8], space: &SymbolSpace) -> Result<Vec<Sample>> {
    if body.len() < 2 {
        return Err(Error::Parse { line: 0, msg: "binary header truncated".into() });
    }
    let version = body[0];
    if version != BINARY_VERSION {
        return Err(Error::Parse { line: 0, msg: format!("unsupported binary version {version}") });
    }
    let k = body[1] as u16;
    if k != space.k() {
        return Err(Error::Validation(format!(
            "binary file has k={k} but expected k={}",
            space.k()
        )));
    }
    let payload = &body[2..];
    if payload.len() % 12 != 0 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("binary payload length {} is not a multiple of 12", payload.len()),
        });
    }
    let mut samples = Vec::with_capacity(payload.len() / 12);
    for (i, rec) in payload.chunks_exact(12).enumerate() {
        let mut vals = [0i16; 6];
        for (j, v) in vals.iter_mut().enumerate() {
            *v = i16::from_le_bytes([rec[2 * j], rec[2 * j + 1]]);
        }
        if vals[0] < 0 {
            return Err(Error::Parse { line: i + 1, msg: "ipm may not be negative".into() });
        }
        let sample = Sample::new(
            vals[0] as u16,
            ContextTuple::new(vals[1], vals[2], vals[3], vals[4], vals[5]),
        );
        sample.validate(space).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Write samples as CSV. Rd candidates, when present, extend each row.
pub fn save_samples_csv(samples: &[Sample], mut w: impl Write) -> Result<()> {
    let max_cands = samples
        .iter()
        .filter_map(|s| s.rd_candidates.as_ref().map(|c| c.len()))
        .max()
        .unwrap_or(0);
    let mut header = String::from("ipm,L,U,BL,UR,UL");
    for i in 0..max_cands {
        header.push_str(&format!(",cand{i},d{i}"));
    }
    writeln!(w, "{header}")?;
    for s in samples {
        let c = &s.ctx;
        let mut row = format!("{},{},{},{},{},{}", s.ipm, c.l, c.u, c.bl, c.ur, c.ul);
        if let Some(cands) = &s.rd_candidates {
            for cand in cands {
                row.push_str(&format!(",{},{}", cand.mode, cand.distortion));
            }
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Write samples in the fixed-width binary form (drops rd candidates).
pub fn save_samples_binary(samples: &[Sample], space: &SymbolSpace, mut w: impl Write) -> Result<()> {
    if space.k() > 255 {
        return Err(Error::InvalidParameter(
            "binary sample format stores k in one byte; k must be <= 255".into(),
        ));
    }
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&[BINARY_VERSION, space.k() as u8])?;
    for s in samples {
        let c = &s.ctx;
        for v in [s.ipm as i16, c.l, c.u, c.bl, c.ur, c.ul] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Synthetic dataset generator
// ---------------------------------------------------------------------------

/// Parameters of the synthetic block-grid generator.
///
/// Each block's mode is drawn as: with `copy_prob` copy a random available
/// neighbour mode; with `jitter_prob` copy a neighbour then offset it by
/// +-1/+-2 (angular wrap); with `nonangular_prob` pick planar or DC;
/// otherwise uniform over the angular modes. When no neighbour has been
/// generated yet, the copy and jitter mass falls through to the uniform
/// angular draw.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthParams {
    pub copy_prob: f64,
    pub jitter_prob: f64,
    pub nonangular_prob: f64,
    pub seed: u64,
    /// When set, attach `rd_alternates` random alternate candidates plus the
    /// chosen mode to every sample; the chosen mode gets minimal distortion.
    pub rd_alternates: Option<usize>,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            copy_prob: 0.55,
            jitter_prob: 0.2,
            nonangular_prob: 0.1,
            seed: 0,
            rd_alternates: None,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("copy_prob", self.copy_prob),
            ("jitter_prob", self.jitter_prob),
            ("nonangular_prob", self.nonangular_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name}={p} must be in [0, 1]")));
            }
        }
        let sum = self.copy_prob + self.jitter_prob + self.nonangular_prob;
        if sum > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "copy_prob + jitter_prob + nonangular_prob = {sum} exceeds 1"
            )));
        }
        Ok(())
    }
}

/// Generate `width x height` blocks in raster order with spatially
/// correlated modes. Border blocks get -1 for missing neighbours.
pub fn synth_dataset(
    space: &SymbolSpace,
    width: usize,
    height: usize,
    params: &SynthParams,
) -> Result<Vec<Sample>> {
    params.validate()?;
    if width < 2 || height < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid must be at least 2x2, got {width}x{height}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut grid = vec![0u16; width * height];
    let at = |x: usize, y: usize| y * width + x;

    let angular_span = space.angular_max() - space.angular_min() + 1;
    for y in 0..height {
        for x in 0..width {
            // Causal neighbours only: L, U, UL, UR exist when this block is drawn.
            let mut avail: Vec<u16> = Vec::with_capacity(4);
            if x > 0 {
                avail.push(grid[at(x - 1, y)]);
            }
            if y > 0 {
                avail.push(grid[at(x, y - 1)]);
                if x > 0 {
                    avail.push(grid[at(x - 1, y - 1)]);
                }
                if x + 1 < width {
                    avail.push(grid[at(x + 1, y - 1)]);
                }
            }
            let r: f64 = rng.gen();
            let mode = if r < params.copy_prob && !avail.is_empty() {
                avail[rng.gen_range(0..avail.len())]
            } else if r < params.copy_prob + params.jitter_prob && !avail.is_empty() {
                let base = avail[rng.gen_range(0..avail.len())];
                if space.is_angular(base) {
                    let offsets = [-2i32, -1, 1, 2];
                    space.wrap_angular(base, offsets[rng.gen_range(0..4)])
                } else {
                    base
                }
            } else if r < params.copy_prob + params.jitter_prob + params.nonangular_prob {
                if rng.gen_bool(0.5) {
                    PLANAR_MODE
                } else {
                    DC_MODE
                }
            } else {
                space.angular_min() + rng.gen_range(0..angular_span)
            };
            grid[at(x, y)] = mode;
        }
    }

    let mut samples = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let ipm = grid[at(x, y)];
            let pick = |ok: bool, xx: usize, yy: usize| -> i16 {
                if ok {
                    grid[at(xx, yy)] as i16
                } else {
                    UNAVAILABLE
                }
            };
            let ctx = ContextTuple::new(
                pick(x > 0, x.wrapping_sub(1), y),
                pick(y > 0, x, y.wrapping_sub(1)),
                pick(x > 0 && y + 1 < height, x.wrapping_sub(1), y + 1),
                pick(x + 1 < width && y > 0, x + 1, y.wrapping_sub(1)),
                pick(x > 0 && y > 0, x.wrapping_sub(1), y.wrapping_sub(1)),
            );
            let rd_candidates = params.rd_alternates.map(|alts| {
                let base: f64 = rng.gen();
                let mut cands = vec![RdCandidate { mode: ipm, distortion: base }];
                let mut used = vec![false; space.k() as usize];
                used[ipm as usize] = true;
                let max_alts = alts.min(space.k() as usize - 1);
                while cands.len() < 1 + max_alts {
                    let m = rng.gen_range(0..space.k());
                    if used[m as usize] {
                        continue;
                    }
                    used[m as usize] = true;
                    let gap: f64 = 0.01 + rng.gen::<f64>();
                    cands.push(RdCandidate { mode: m, distortion: base + gap });
                }
                cands
            });
            samples.push(Sample { ipm, ctx, rd_candidates });
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_space_profiles() {
        let h = SymbolSpace::hevc();
        assert_eq!((h.k(), h.angular_min(), h.angular_max()), (35, 2, 34));
        let j = SymbolSpace::jem();
        assert_eq!((j.k(), j.angular_min(), j.angular_max()), (67, 2, 66));
        assert!(SymbolSpace::new(2, 0, 1).is_err());
        assert!(SymbolSpace::new(10, 5, 12).is_err());
    }

    #[test]
    fn angular_wrap() {
        let s = SymbolSpace::hevc();
        assert_eq!(s.wrap_angular(2, 1), 3);
        assert_eq!(s.wrap_angular(34, 1), 2);
        assert_eq!(s.wrap_angular(2, -1), 34);
        assert_eq!(s.wrap_angular(2, -2), 33);
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let s = SymbolSpace::hevc();
        let csv = "ipm,L,U,BL,UR,UL\n26,10,26,-1,-1,-1\n0,-1,-1,-1,-1,-1\n5,5,5,5,5,5\n";
        let samples = parse_csv(csv.as_bytes(), &s).unwrap();
        assert_eq!(samples.len(), 3);
        assert_eq!(samples[0].ipm, 26);
        assert_eq!(samples[0].ctx, ContextTuple::new(10, 26, -1, -1, -1));

        // out-of-range mode is a validation error with the line number
        let bad = "ipm,L,U,BL,UR,UL\n35,0,0,0,0,0\n";
        let err = parse_csv(bad.as_bytes(), &s).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let malformed = "1,2,3\n";
        assert!(matches!(parse_csv(malformed.as_bytes(), &s), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_with_candidates() {
        let s = SymbolSpace::hevc();
        let csv = "ipm,L,U,BL,UR,UL,cand0,d0,cand1,d1\n7,3,4,-1,-1,-1,7,0.5,9,1.25\n";
        let samples = parse_csv(csv.as_bytes(), &s).unwrap();
        let cands = samples[0].rd_candidates.as_ref().unwrap();
        assert_eq!(cands.len(), 2);
        assert_eq!(cands[0].mode, 7);
        assert_eq!(cands[1].distortion, 1.25);

        let mut buf = Vec::new();
        save_samples_csv(&samples, &mut buf).unwrap();
        let reparsed = parse_csv(buf.as_slice(), &s).unwrap();
        assert_eq!(reparsed, samples);
    }

    #[test]
    fn binary_roundtrip() {
        let s = SymbolSpace::hevc();
        let samples = vec![
            Sample::new(26, ContextTuple::new(10, 26, -1, -1, -1)),
            Sample::new(0, ContextTuple::all_unavailable()),
        ];
        let mut buf = Vec::new();
        save_samples_binary(&samples, &s, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"IPMS");
        let parsed = parse_binary(&buf[4..], &s).unwrap();
        assert_eq!(parsed, samples);
    }

    #[test]
    fn histogram_counts() {
        let s = SymbolSpace::hevc();
        let samples = vec![
            Sample::new(5, ContextTuple::new(5, 0, -1, -1, -1)),
            Sample::new(7, ContextTuple::new(5, 3, -1, -1, -1)),
        ];
        let hist = build_histogram(&samples, &[Context::L], &s).unwrap();
        assert_eq!(hist.total(), 2);
        assert_eq!(hist.num_cells(), 1);
        let (key, counts) = hist.cells().next().unwrap();
        assert_eq!(key, &vec![5i16]);
        assert_eq!(counts[5], 1);
        assert_eq!(counts[7], 1);

        // empty context set: one marginal cell
        let marginal = build_histogram(&samples, &[], &s).unwrap();
        assert_eq!(marginal.num_cells(), 1);
        assert!(build_histogram(&[], &[], &s).is_err());
    }

    #[test]
    fn projection_consistency() {
        let s = SymbolSpace::hevc();
        let samples = synth_dataset(&s, 30, 30, &SynthParams::default()).unwrap();
        let lu = build_histogram(&samples, &[Context::L, Context::U], &s).unwrap();
        let l_direct = build_histogram(&samples, &[Context::L], &s).unwrap();
        let l_projected = lu.project(&[Context::L]).unwrap();
        assert_eq!(lu.total(), l_direct.total());
        let a: Vec<_> = l_direct.cells().collect();
        let b: Vec<_> = l_projected.cells().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn generator_deterministic_and_valid() {
        let s = SymbolSpace::hevc();
        let p = SynthParams { seed: 42, rd_alternates: Some(3), ..SynthParams::default() };
        let a = synth_dataset(&s, 10, 8, &p).unwrap();
        let b = synth_dataset(&s, 10, 8, &p).unwrap();
        assert_eq!(a, b);
        for sample in &a {
            sample.validate(&s).unwrap();
            let cands = sample.rd_candidates.as_ref().unwrap();
            assert_eq!(cands.len(), 4);
            let own = cands.iter().find(|c| c.mode == sample.ipm).unwrap();
            for c in cands.iter() {
                assert!(c.distortion >= own.distortion);
            }
        }
        // corner block has no neighbours
        assert_eq!(a[0].ctx, ContextTuple::all_unavailable());
    }

    #[test]
    fn generator_copy_only() {
        let s = SymbolSpace::hevc();
        let p = SynthParams {
            copy_prob: 1.0,
            jitter_prob: 0.0,
            nonangular_prob: 0.0,
            seed: 7,
            rd_alternates: None,
        };
        let samples = synth_dataset(&s, 12, 12, &p).unwrap();
        for (i, sample) in samples.iter().enumerate() {
            let x = i % 12;
            let y = i / 12;
            if x == 0 && y == 0 {
                continue;
            }
            // every block copies one of its causal neighbours
            let c = &sample.ctx;
            let neighbours = [c.l, c.u, c.ul, c.ur];
            assert!(
                neighbours.contains(&(sample.ipm as i16)),
                "block ({x},{y}) mode {} not among causal neighbours {:?}",
                sample.ipm,
                neighbours
            );
        }
    }

    #[test]
    fn generator_rejects_bad_params() {
        let s = SymbolSpace::hevc();
        let p = SynthParams { copy_prob: 0.9, jitter_prob: 0.2, ..SynthParams::default() };
        assert!(synth_dataset(&s, 4, 4, &p).is_err());
        assert!(synth_dataset(&s, 1, 4, &SynthParams::default()).is_err());
    }
}
