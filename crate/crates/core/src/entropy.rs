//! Empirical conditional entropy, Miller-Madow correction, and the
//! code-based entropy bound over a fixed code set.

use crate::codes::CodeShape;
use crate::dataset::{ConditionalHistogram, Context};
use crate::error::{Error, Result};

/// Entropy (or code-based entropy) of a dataset together with the
/// Miller-Madow bias correction inputs.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    /// Average bits per coded symbol.
    pub bits_per_symbol: f64,
    /// Contexts the estimate conditions on.
    pub context_set: Vec<Context>,
    /// `(nonzero_bins - 1) / (2 * samples_used)`.
    pub mm_correction: f64,
    /// Number of samples the histogram was built from (B).
    pub samples_used: u64,
    /// Number of joint (context..., mode) bins with a nonzero count (m~).
    pub nonzero_bins: u64,
    /// Joint bins the contexts and mode could take in principle, for
    /// comparison with the measured nonzero count.
    pub theoretical_bins: u128,
}

/// Miller-Madow bias correction `(m~ - 1) / (2B)`.
pub fn miller_madow(nonzero_bins: u64, samples: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("miller_madow needs at least one sample".into()));
    }
    Ok((nonzero_bins.saturating_sub(1)) as f64 / (2.0 * samples as f64))
}

/// Empirical conditional entropy of the mode given the histogram's
/// context set:
/// `-sum_cells P(cell) * sum_i P(i|cell) * log2 P(i|cell)`, with
/// `0 log 0 = 0`.
pub fn entropy(hist: &ConditionalHistogram) -> Result<EntropyReport> {
    let total = hist.total();
    if total == 0 {
        return Err(Error::EmptyInput("entropy of an empty histogram"));
    }
    // H = (1/B) * sum_cells [ ct*log2(ct) - sum_i c_i*log2(c_i) ]
    let mut acc = 0.0f64;
    for (_key, counts) in hist.cells() {
        let ct = ConditionalHistogram::cell_total(counts);
        if ct == 0 {
            continue;
        }
        let mut cell_sum = 0.0f64;
        for &c in counts {
            if c > 0 {
                cell_sum += c as f64 * (c as f64).log2();
            }
        }
        acc += ct as f64 * (ct as f64).log2() - cell_sum;
    }
    let bits = acc / total as f64;
    let nonzero = hist.nonzero_bins();
    Ok(EntropyReport {
        bits_per_symbol: bits.max(0.0),
        context_set: hist.context_set().to_vec(),
        mm_correction: miller_madow(nonzero, total)?,
        samples_used: total,
        nonzero_bins: nonzero,
        theoretical_bins: hist.theoretical_bins(),
    })
}

/// Per-cell integer bit cost of the best code: modes are ranked by
/// descending count (ties by ascending mode index) and matched
/// shortest-codeword-first, which is optimal for a fixed code.
/// Returns the total bit count over the cell's samples.
fn cell_best_bits(counts: &[u64], len_vectors: &[Vec<u8>]) -> Result<u128> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut best: Option<u128> = None;
    for lens in len_vectors {
        let mut bits: u128 = 0;
        for (rank, &mode) in order.iter().enumerate() {
            let c = counts[mode];
            if c == 0 {
                break; // zero counts are ranked last and cost nothing
            }
            bits += c as u128 * lens[rank] as u128;
        }
        best = Some(match best {
            Some(b) if b <= bits => b,
            _ => bits,
        });
    }
    best.ok_or(Error::EmptyInput("code_based_entropy needs at least one code"))
}

fn validated_len_vectors(hist: &ConditionalHistogram, codes: &[CodeShape]) -> Result<Vec<Vec<u8>>> {
    let k = hist.space().k() as usize;
    let mut len_vectors = Vec::with_capacity(codes.len());
    for code in codes {
        code.ensure_complete()?;
        if code.num_symbols() != k {
            return Err(Error::InvalidParameter(format!(
                "code {code} covers {} symbols but the space has {k}",
                code.num_symbols()
            )));
        }
        len_vectors.push(code.len_vector());
    }
    Ok(len_vectors)
}

/// Empirical code-based entropy: every context cell independently uses the
/// best code of `codes` with ideal per-cell mode ranking; the result is the
/// cell-probability-weighted expected codeword length.
pub fn code_based_entropy(
    hist: &ConditionalHistogram,
    codes: &[CodeShape],
) -> Result<EntropyReport> {
    let total = hist.total();
    if total == 0 {
        return Err(Error::EmptyInput("code_based_entropy of an empty histogram"));
    }
    if codes.is_empty() {
        return Err(Error::EmptyInput("code_based_entropy needs at least one code"));
    }
    let total_bits = code_based_total_bits(hist, codes)?;
    let nonzero = hist.nonzero_bins();
    Ok(EntropyReport {
        bits_per_symbol: total_bits as f64 / total as f64,
        context_set: hist.context_set().to_vec(),
        mm_correction: miller_madow(nonzero, total)?,
        samples_used: total,
        nonzero_bins: nonzero,
        theoretical_bins: hist.theoretical_bins(),
    })
}

/// Exact total-bit form of [`code_based_entropy`], for integer comparisons
/// against scheme costs.
pub fn code_based_total_bits(hist: &ConditionalHistogram, codes: &[CodeShape]) -> Result<u128> {
    let len_vectors = validated_len_vectors(hist, codes)?;
    let mut total_bits: u128 = 0;
    for (_key, counts) in hist.cells() {
        total_bits += cell_best_bits(counts, &len_vectors)?;
    }
    Ok(total_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_histogram, ContextTuple, Sample, SymbolSpace};

    fn uniform_hist(k: u16) -> ConditionalHistogram {
        let space = SymbolSpace::generic(k).unwrap();
        let samples: Vec<Sample> = (0..k)
            .map(|m| Sample::new(m, ContextTuple::all_unavailable()))
            .collect();
        build_histogram(&samples, &[], &space).unwrap()
    }

    #[test]
    fn uniform_entropy_is_log2_k() {
        let h = uniform_hist(35);
        let r = entropy(&h).unwrap();
        assert!((r.bits_per_symbol - (35f64).log2()).abs() < 1e-9);
        assert!((r.bits_per_symbol - 5.1293).abs() < 1e-4);
    }

    #[test]
    fn point_mass_entropy_is_zero() {
        let space = SymbolSpace::hevc();
        let samples = vec![
            Sample::new(3, ContextTuple::new(1, 0, -1, -1, -1)),
            Sample::new(3, ContextTuple::new(1, 0, -1, -1, -1)),
            Sample::new(9, ContextTuple::new(2, 0, -1, -1, -1)),
        ];
        let h = build_histogram(&samples, &[crate::dataset::Context::L], &space).unwrap();
        let r = entropy(&h).unwrap();
        assert_eq!(r.bits_per_symbol, 0.0);
    }

    #[test]
    fn miller_madow_values() {
        assert_eq!(miller_madow(1, 100).unwrap(), 0.0);
        assert!((miller_madow(241, 1000).unwrap() - 0.12).abs() < 1e-12);
        assert!(miller_madow(5, 0).is_err());
    }

    #[test]
    fn entropy_matches_naive_double_loop() {
        use crate::dataset::{synth_dataset, Context, SynthParams};
        let space = SymbolSpace::hevc();
        let samples =
            synth_dataset(&space, 25, 20, &SynthParams { seed: 3, ..Default::default() }).unwrap();
        let hist = build_histogram(&samples, &[Context::L, Context::U], &space).unwrap();
        let fast = entropy(&hist).unwrap().bits_per_symbol;

        let total = hist.total() as f64;
        let mut naive = 0.0;
        for (_k, counts) in hist.cells() {
            let ct = ConditionalHistogram::cell_total(counts) as f64;
            let p_cell = ct / total;
            let mut cell_h = 0.0;
            for &c in counts {
                if c > 0 {
                    let p = c as f64 / ct;
                    cell_h -= p * p.log2();
                }
            }
            naive += p_cell * cell_h;
        }
        assert!((fast - naive).abs() < 1e-9, "{fast} vs {naive}");
    }

    #[test]
    fn conditioning_never_increases_entropy() {
        use crate::dataset::{synth_dataset, Context, SynthParams};
        let space = SymbolSpace::hevc();
        let params = SynthParams { copy_prob: 0.6, jitter_prob: 0.2, seed: 11, ..Default::default() };
        let samples = synth_dataset(&space, 40, 40, &params).unwrap();
        let h0 = entropy(&build_histogram(&samples, &[], &space).unwrap()).unwrap();
        let h1 = entropy(&build_histogram(&samples, &[Context::L], &space).unwrap()).unwrap();
        let h2 =
            entropy(&build_histogram(&samples, &[Context::L, Context::U], &space).unwrap()).unwrap();
        assert!(h2.bits_per_symbol <= h1.bits_per_symbol + 1e-12);
        assert!(h1.bits_per_symbol <= h0.bits_per_symbol + 1e-12);
        // correlated generator: conditioning strictly helps
        assert!(h2.bits_per_symbol < h0.bits_per_symbol);
    }

    #[test]
    fn cbe_point_mass_takes_shortest_codeword() {
        let space = SymbolSpace::hevc();
        let samples = vec![
            Sample::new(3, ContextTuple::new(1, 0, -1, -1, -1)),
            Sample::new(9, ContextTuple::new(2, 0, -1, -1, -1)),
        ];
        let h = build_histogram(&samples, &[crate::dataset::Context::L], &space).unwrap();
        let code: CodeShape = "1+3+3+(7x32)".parse().unwrap();
        let r = code_based_entropy(&h, &[code]).unwrap();
        assert_eq!(r.bits_per_symbol, 1.0);
    }

    #[test]
    fn cbe_fixed_length_code_is_constant() {
        let space = SymbolSpace::new(32, 2, 31).unwrap();
        let samples: Vec<Sample> = (0..100u16)
            .map(|i| Sample::new(i % 32, ContextTuple::new((i % 7) as i16, 0, -1, -1, -1)))
            .collect();
        let h = build_histogram(&samples, &[crate::dataset::Context::L], &space).unwrap();
        let code: CodeShape = "(5x32)".parse().unwrap();
        let r = code_based_entropy(&h, &[code]).unwrap();
        assert_eq!(r.bits_per_symbol, 5.0);
    }

    #[test]
    fn cbe_matches_bruteforce_per_cell_minimum() {
        use crate::codes::default_code_set;
        use crate::dataset::{synth_dataset, Context, SynthParams};
        let space = SymbolSpace::hevc();
        let samples =
            synth_dataset(&space, 30, 30, &SynthParams { seed: 5, ..Default::default() }).unwrap();
        let hist = build_histogram(&samples, &[Context::L, Context::U], &space).unwrap();
        let codes = default_code_set(&space).unwrap();
        let fast = code_based_entropy(&hist, &codes).unwrap().bits_per_symbol;

        // independent naive routine: full f64 expected length per (cell, code)
        let total = hist.total() as f64;
        let mut naive = 0.0;
        for (_k, counts) in hist.cells() {
            let ct = ConditionalHistogram::cell_total(counts) as f64;
            let mut probs: Vec<f64> = counts.iter().map(|&c| c as f64 / ct).collect();
            probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let mut best = f64::INFINITY;
            for code in &codes {
                let e = crate::codes::expected_length(code, &probs).unwrap();
                if e < best {
                    best = e;
                }
            }
            naive += (ct / total) * best;
        }
        assert!((fast - naive).abs() < 1e-9, "{fast} vs {naive}");
    }

    #[test]
    fn cbe_bounds() {
        use crate::codes::default_code_set;
        use crate::dataset::{synth_dataset, Context, SynthParams};
        let space = SymbolSpace::hevc();
        let samples =
            synth_dataset(&space, 30, 30, &SynthParams { seed: 8, ..Default::default() }).unwrap();
        let hist = build_histogram(&samples, &[Context::L, Context::U], &space).unwrap();
        let codes = default_code_set(&space).unwrap();
        let h = entropy(&hist).unwrap().bits_per_symbol;
        let cbe_all = code_based_entropy(&hist, &codes).unwrap().bits_per_symbol;
        // codes cannot beat entropy
        assert!(h <= cbe_all + 1e-9);
        // more codes never hurt
        let cbe_one = code_based_entropy(&hist, &codes[..1]).unwrap().bits_per_symbol;
        assert!(cbe_all <= cbe_one + 1e-12);
        // a duplicate code changes nothing
        let mut dup = codes.clone();
        dup.push(codes[0].clone());
        let cbe_dup = code_based_entropy(&hist, &dup).unwrap().bits_per_symbol;
        assert_eq!(cbe_all, cbe_dup);
        assert!(code_based_entropy(&hist, &[]).is_err());
    }
}
