//! Labels (mode predictors), labelling compatibility on a leaf, and the
//! greedy queue search for the best compatible labelling.

use std::collections::BinaryHeap;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::codes::CodeShape;
use crate::dataset::{ConditionalHistogram, Context, ContextTuple, SymbolSpace};
use crate::error::{Error, Result};

/// A predictor mapping a context tuple to a mode (or to "unavailable").
///
/// Offsets are applied with angular wrap; offsetting a non-angular base
/// (planar or DC) yields unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// A fixed mode index.
    Numeric(u16),
    /// The mode of a neighbour block.
    Ctx(Context),
    /// A neighbour mode offset by -4..=4 (nonzero).
    CtxOffset(Context, i8),
    /// `min(L, U)` offset by -3..=3.
    MinLu(i8),
    /// `max(L, U)` offset by -3..=3.
    MaxLu(i8),
    /// `|1 - min(L, U)|`; swaps planar and DC when min is non-angular.
    AbsOneMinusMinLu,
    /// `(L + U) / 2` with floor division; unavailable unless both are angular.
    MeanLu,
}

/// Evaluate a label on a context tuple. `None` means unavailable.
pub fn eval_label(label: Label, ctx: &ContextTuple, space: &SymbolSpace) -> Option<u16> {
    let base_of = |v: i16| -> Option<u16> {
        if v >= 0 {
            Some(v as u16)
        } else {
            None
        }
    };
    let offset_from = |base: u16, d: i8| -> Option<u16> {
        if d == 0 {
            Some(base)
        } else if space.is_angular(base) {
            Some(space.wrap_angular(base, d as i32))
        } else {
            None
        }
    };
    match label {
        Label::Numeric(m) => Some(m),
        Label::Ctx(c) => base_of(ctx.get(c)),
        Label::CtxOffset(c, d) => offset_from(base_of(ctx.get(c))?, d),
        Label::MinLu(d) => {
            let l = base_of(ctx.l)?;
            let u = base_of(ctx.u)?;
            offset_from(l.min(u), d)
        }
        Label::MaxLu(d) => {
            let l = base_of(ctx.l)?;
            let u = base_of(ctx.u)?;
            offset_from(l.max(u), d)
        }
        Label::AbsOneMinusMinLu => {
            let l = base_of(ctx.l)?;
            let u = base_of(ctx.u)?;
            Some((1i32 - l.min(u) as i32).unsigned_abs() as u16)
        }
        Label::MeanLu => {
            let l = base_of(ctx.l)?;
            let u = base_of(ctx.u)?;
            if space.is_angular(l) && space.is_angular(u) {
                Some((l + u) / 2)
            } else {
                None
            }
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let off = |d: i8| if d >= 0 { format!("+{d}") } else { format!("{d}") };
        match self {
            Label::Numeric(m) => write!(f, "#{m}"),
            Label::Ctx(c) => write!(f, "{c}"),
            Label::CtxOffset(c, d) => write!(f, "{c}{}", off(*d)),
            Label::MinLu(0) => write!(f, "min"),
            Label::MinLu(d) => write!(f, "min{}", off(*d)),
            Label::MaxLu(0) => write!(f, "max"),
            Label::MaxLu(d) => write!(f, "max{}", off(*d)),
            Label::AbsOneMinusMinLu => write!(f, "|1-min|"),
            Label::MeanLu => write!(f, "mean"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(num) = s.strip_prefix('#') {
            let m: u16 = num
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad numeric label {s:?}")))?;
            return Ok(Label::Numeric(m));
        }
        if s == "|1-min|" {
            return Ok(Label::AbsOneMinusMinLu);
        }
        if s == "mean" {
            return Ok(Label::MeanLu);
        }
        let (head, d) = match s.find(['+', '-']) {
            Some(pos) => {
                let d: i8 = s[pos..]
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad label offset {s:?}")))?;
                (&s[..pos], d)
            }
            None => (s, 0),
        };
        match head {
            "min" => Ok(Label::MinLu(d)),
            "max" => Ok(Label::MaxLu(d)),
            _ => {
                let c: Context = head.parse()?;
                if d == 0 {
                    Ok(Label::Ctx(c))
                } else {
                    Ok(Label::CtxOffset(c, d))
                }
            }
        }
    }
}

/// Contexts a label reads.
pub fn label_contexts(label: Label) -> Vec<Context> {
    match label {
        Label::Numeric(_) => vec![],
        Label::Ctx(c) | Label::CtxOffset(c, _) => vec![c],
        Label::MinLu(_) | Label::MaxLu(_) | Label::AbsOneMinusMinLu | Label::MeanLu => {
            vec![Context::L, Context::U]
        }
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// The seven labels the HEVC MPM derivation draws from.
pub fn hevc_labels() -> Vec<Label> {
    vec![
        Label::Ctx(Context::L),
        Label::Ctx(Context::U),
        Label::Numeric(0),
        Label::Numeric(1),
        Label::Numeric(26),
        Label::CtxOffset(Context::L, 1),
        Label::CtxOffset(Context::L, -1),
    ]
}

/// The extended 35-entry list used for deriving schemes at HEVC complexity:
/// 30 contextual labels plus 5 numerical modes.
pub fn hevc_extended_labels() -> Vec<Label> {
    use Context::{L, U};
    let mut v = vec![
        Label::Ctx(L),
        Label::Ctx(U),
        Label::CtxOffset(L, 1),
        Label::CtxOffset(L, -1),
        Label::Numeric(0),
        Label::Numeric(1),
        Label::Numeric(26),
        Label::CtxOffset(U, 1),
        Label::CtxOffset(U, -1),
        Label::CtxOffset(L, 2),
        Label::CtxOffset(L, -2),
        Label::CtxOffset(L, 3),
        Label::CtxOffset(L, -3),
        Label::CtxOffset(U, 2),
        Label::CtxOffset(U, -2),
        Label::CtxOffset(U, 3),
        Label::CtxOffset(U, -3),
        Label::MinLu(0),
        Label::MaxLu(0),
    ];
    for d in [1i8, -1, 2, -2, 3, -3] {
        v.push(Label::MinLu(d));
        v.push(Label::MaxLu(d));
    }
    v.push(Label::AbsOneMinusMinLu);
    v.push(Label::MeanLu);
    v.push(Label::Numeric(18));
    v.push(Label::Numeric(2));
    v
}

/// The 21 labels of the JEM dynamic list: five neighbours, their +-1
/// offsets, and six numerical modes.
pub fn jem_labels() -> Vec<Label> {
    let mut v = Vec::with_capacity(21);
    for c in Context::ALL {
        v.push(Label::Ctx(c));
    }
    for c in Context::ALL {
        v.push(Label::CtxOffset(c, -1));
        v.push(Label::CtxOffset(c, 1));
    }
    for m in [0u16, 1, 2, 18, 34, 50] {
        v.push(Label::Numeric(m));
    }
    v
}

/// Vocabulary for dynamic-list search: all `k` numeric labels plus 50
/// contextual labels (the five neighbours with offsets up to +-4 and a
/// small min/max family). 117 labels for k=67.
pub fn dynlist_vocabulary(space: &SymbolSpace) -> Vec<Label> {
    let mut v = Vec::new();
    // contextual part, ordered roughly by usefulness so the identity
    // ordering is a reasonable seed individual
    v.push(Label::Ctx(Context::L));
    v.push(Label::Ctx(Context::U));
    v.push(Label::Ctx(Context::Bl));
    v.push(Label::Ctx(Context::Ur));
    v.push(Label::Ctx(Context::Ul));
    for d in [-1i8, 1, -2, 2, -3, 3, -4, 4] {
        for c in Context::ALL {
            v.push(Label::CtxOffset(c, d));
        }
    }
    v.push(Label::MinLu(0));
    v.push(Label::MaxLu(0));
    v.push(Label::MinLu(1));
    v.push(Label::MaxLu(1));
    v.push(Label::AbsOneMinusMinLu);
    for m in 0..space.k() {
        v.push(Label::Numeric(m));
    }
    v
}

// ---------------------------------------------------------------------------
// Labellings
// ---------------------------------------------------------------------------

/// An ordered list of labels filling the MPM slots of a code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labelling(pub Vec<Label>);

impl Labelling {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }
}

impl fmt::Display for Labelling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Result of checking a labelling against the cells of a leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compatibility {
    Valid,
    /// A label evaluates to "unavailable" on a reached cell.
    Unavailable { label: usize, cell: ContextTuple },
    /// Two labels evaluate to the same mode on a reached cell.
    Conflict { first: usize, second: usize, cell: ContextTuple },
}

/// Check that all labels evaluate to pairwise-distinct available modes on
/// every cell. Cells are scanned in the given order; the first failure (by
/// cell, then label index, then pair order) is reported.
pub fn check_compatibility(
    labelling: &Labelling,
    leaf_cells: &[ContextTuple],
    space: &SymbolSpace,
) -> Compatibility {
    for cell in leaf_cells {
        let evals: Vec<Option<u16>> =
            labelling.0.iter().map(|&l| eval_label(l, cell, space)).collect();
        for (i, e) in evals.iter().enumerate() {
            if e.is_none() {
                return Compatibility::Unavailable { label: i, cell: *cell };
            }
        }
        for i in 0..evals.len() {
            for j in i + 1..evals.len() {
                if evals[i] == evals[j] {
                    return Compatibility::Conflict { first: i, second: j, cell: *cell };
                }
            }
        }
    }
    Compatibility::Valid
}

// ---------------------------------------------------------------------------
// Greedy search
// ---------------------------------------------------------------------------

/// One cell of a leaf: its (full) context tuple and per-mode counts.
#[derive(Debug, Clone)]
pub struct LeafCell {
    pub tuple: ContextTuple,
    pub counts: Vec<u64>,
}

/// Exact bit total of coding the leaf's samples with `labels` in the MPM
/// slots of `shape` and all other modes in ascending order behind them.
/// Requires the labelling to be valid on every counted cell.
pub fn labelling_exact_bits(
    cells: &[LeafCell],
    labels: &[Label],
    shape: &CodeShape,
    space: &SymbolSpace,
) -> Result<u128> {
    let k = space.k() as usize;
    let mut total: u128 = 0;
    let mut rank_of_mode = vec![0u16; k];
    for cell in cells {
        let mut taken = vec![false; k];
        for (slot, &l) in labels.iter().enumerate() {
            let m = eval_label(l, &cell.tuple, space).ok_or_else(|| Error::Internal(format!(
                "label {l} unavailable on cell {:?} during cost evaluation",
                cell.tuple
            )))?;
            if taken[m as usize] {
                return Err(Error::Internal(format!(
                    "labelling conflict on cell {:?}: mode {m} appears twice",
                    cell.tuple
                )));
            }
            taken[m as usize] = true;
            rank_of_mode[m as usize] = slot as u16;
        }
        let mut next = labels.len() as u16;
        for m in 0..k {
            if !taken[m] {
                rank_of_mode[m] = next;
                next += 1;
            }
        }
        for (m, &c) in cell.counts.iter().enumerate() {
            if c > 0 {
                total += c as u128 * shape.rank_len(rank_of_mode[m] as usize) as u128;
            }
        }
    }
    Ok(total)
}

/// Queue search over labellings, generic over how candidate scores and
/// conflicts are obtained so tree search can plug in cached oracles.
///
/// `scores[j]` is the match count of candidate `j` over the leaf,
/// `avail[j]` is false when `j` is unavailable on some cell, and
/// `conflict(a, b)` says whether candidates `a` and `b` collide on some
/// cell. Returns the chosen candidate indices ordered by descending score.
pub(crate) fn greedy_core(
    scores: &[u64],
    avail: &[bool],
    total: u64,
    conflict: &mut dyn FnMut(usize, usize) -> bool,
    shape: &CodeShape,
    mut on_pop: impl FnMut(f64),
) -> Result<Vec<usize>> {
    let m = shape.mpm_count();
    let n = scores.len();
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "need at least {m} candidate labels, got {n}"
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    // candidates by descending score, ties by input order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    let rank_score: Vec<u64> = order.iter().map(|&i| scores[i]).collect();
    let rank_avail: Vec<bool> = order.iter().map(|&i| avail[i]).collect();

    // average remainder length; exact when the shape has one FL group
    let (fl_bits, fl_count) = shape
        .fl_groups()
        .iter()
        .fold((0u64, 0u64), |(b, c), g| (b + g.len as u64 * g.count as u64, c + g.count as u64));
    let fl_avg = if fl_count > 0 { fl_bits as f64 / fl_count as f64 } else { 0.0 };
    let mpm_lens = shape.mpm_lengths();

    let cost_of = |list: &[u16]| -> f64 {
        let mut bits = 0.0f64;
        let mut matched = 0u64;
        for (slot, &r) in list.iter().enumerate() {
            let s = rank_score[r as usize];
            bits += mpm_lens[slot] as f64 * s as f64;
            matched += s;
        }
        bits += fl_avg * (total as f64 - matched as f64);
        if total > 0 {
            bits / total as f64
        } else {
            0.0
        }
    };

    #[derive(PartialEq)]
    struct Item {
        cost: f64,
        list: Vec<u16>,
    }
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // BinaryHeap is a max-heap; invert for cheapest-first,
            // tie-break on the rank vector for determinism
            other
                .cost
                .total_cmp(&self.cost)
                .then_with(|| other.list.cmp(&self.list))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let seed: Vec<u16> = (0..m as u16).collect();
    let mut heap = BinaryHeap::new();
    let mut visited: HashSet<Vec<u16>> = HashSet::new();
    visited.insert(seed.clone());
    heap.push(Item { cost: cost_of(&seed), list: seed });

    // replace the label at `slot` with the next unused rank after it
    let next_replacement = |list: &[u16], slot: usize| -> Option<Vec<u16>> {
        let mut r = list[slot] + 1;
        while (r as usize) < n {
            if !list.contains(&r) {
                let mut child: Vec<u16> = list.to_vec();
                child[slot] = r;
                child.sort_unstable();
                return Some(child);
            }
            r += 1;
        }
        None
    };

    while let Some(Item { cost, list }) = heap.pop() {
        on_pop(cost);
        // first failure: unavailable slot, else conflicting pair
        let mut failure: Option<(usize, Option<usize>)> = None;
        for (slot, &r) in list.iter().enumerate() {
            if !rank_avail[r as usize] {
                failure = Some((slot, None));
                break;
            }
        }
        if failure.is_none() {
            'outer: for i in 0..list.len() {
                for j in i + 1..list.len() {
                    if conflict(order[list[i] as usize], order[list[j] as usize]) {
                        failure = Some((i, Some(j)));
                        break 'outer;
                    }
                }
            }
        }
        match failure {
            None => {
                return Ok(list.iter().map(|&r| order[r as usize]).collect());
            }
            Some((a, b)) => {
                let slots: Vec<usize> = match b {
                    Some(b) => vec![a, b],
                    None => vec![a],
                };
                for slot in slots {
                    if let Some(child) = next_replacement(&list, slot) {
                        if visited.insert(child.clone()) {
                            heap.push(Item { cost: cost_of(&child), list: child });
                        }
                    }
                }
            }
        }
    }
    Err(Error::NoLabelling)
}

/// Greedy queue search for the cheapest compatible labelling of a leaf.
///
/// Candidates are scored by their aggregate match probability over
/// `leaf_cells` (weighted by `hist`), the top-M seed the queue, and on each
/// conflict two children are pushed, each replacing one conflicting label
/// by the next-best unused candidate. The first valid list popped is
/// returned with its exact cost in bits per mode over the leaf.
pub fn greedy_label_search(
    leaf_cells: &[ContextTuple],
    hist: &ConditionalHistogram,
    candidates: &[Label],
    shape: &CodeShape,
) -> Result<(Labelling, f64)> {
    if leaf_cells.is_empty() {
        return Err(Error::EmptyInput("greedy_label_search needs at least one cell"));
    }
    shape.ensure_complete()?;
    let space = *hist.space();
    if shape.num_symbols() != space.k() as usize {
        return Err(Error::InvalidParameter(format!(
            "code {shape} covers {} symbols but the space has {}",
            shape.num_symbols(),
            space.k()
        )));
    }
    let k = space.k() as usize;
    let cells: Vec<LeafCell> = leaf_cells
        .iter()
        .map(|t| {
            let key = hist.key_for_tuple(t);
            let counts = hist.cell(&key).cloned().unwrap_or_else(|| vec![0u64; k]);
            LeafCell { tuple: *t, counts }
        })
        .collect();

    let evals: Vec<Vec<Option<u16>>> = candidates
        .iter()
        .map(|&l| cells.iter().map(|c| eval_label(l, &c.tuple, &space)).collect())
        .collect();
    let mut scores = vec![0u64; candidates.len()];
    let mut avail = vec![true; candidates.len()];
    let mut total = 0u64;
    for (ci, cell) in cells.iter().enumerate() {
        total += cell.counts.iter().sum::<u64>();
        for (j, ev) in evals.iter().enumerate() {
            match ev[ci] {
                Some(mode) => scores[j] += cell.counts[mode as usize],
                None => avail[j] = false,
            }
        }
    }
    let mut conflict = |a: usize, b: usize| -> bool {
        evals[a]
            .iter()
            .zip(evals[b].iter())
            .any(|(x, y)| x.is_some() && x == y)
    };
    let chosen = greedy_core(&scores, &avail, total, &mut conflict, shape, |_| {})?;
    let labels: Vec<Label> = chosen.iter().map(|&i| candidates[i]).collect();
    let bits = labelling_exact_bits(&cells, &labels, shape, &space)?;
    let cost = if total > 0 { bits as f64 / total as f64 } else { 0.0 };
    Ok((Labelling(labels), cost))
}
