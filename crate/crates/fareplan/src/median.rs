//! Weighted medians and the flat tariff design problem.
//!
//! The minimizers of `sum_d t_d * |r_d - f|` over `f` are exactly the
//! weighted medians of the reference prices, so the flat tariff design
//! problem reduces to a selection problem and is solvable in linear time.

use crate::ptn::OdPair;
use crate::{Error, Result};

/// Nonnegative values with positive integer weights.
#[derive(Debug, Clone)]
pub struct WeightedSample {
    values: Vec<f64>,
    weights: Vec<u64>,
}

impl WeightedSample {
    pub fn new(values: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("weighted sample must not be empty"));
        }
        if values.len() != weights.len() {
            return Err(Error::invalid("weighted sample values and weights differ in length"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("sample value {v} is not a nonnegative real")));
        }
        if weights.contains(&0) {
            return Err(Error::invalid("sample weights must be at least 1"));
        }
        Ok(WeightedSample { values, weights })
    }

    pub fn from_demand(demand: &[OdPair]) -> Result<Self> {
        WeightedSample::new(
            demand.iter().map(|d| d.reference_price).collect(),
            demand.iter().map(|d| d.passengers).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The closed interval of all weighted medians; both endpoints are sample
/// values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianInterval {
    pub lower: f64,
    pub upper: f64,
}

impl MedianInterval {
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    pub fn pick(&self, pick: MedianPick) -> f64 {
        match pick {
            MedianPick::Lower => self.lower,
            MedianPick::Upper => self.upper,
        }
    }
}

/// Which end of a nondegenerate median interval to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MedianPick {
    /// Favors the passengers; the default everywhere.
    #[default]
    Lower,
    /// Favors the operator's income.
    Upper,
}

/// Exact interval of values `p` with at most half of the total weight
/// strictly below and at most half strictly above `p`. Runs in linear
/// time via weighted selection.
pub fn weighted_median(sample: &WeightedSample) -> MedianInterval {
    median_by_selection(|buf| buf.extend(sample.values.iter().copied().zip(sample.weights.iter().copied())))
}

/// [`weighted_median`] over raw `(value, weight)` pairs. The slice must
/// be nonempty with positive weights.
pub fn weighted_median_pairs(pairs: &[(f64, u64)]) -> MedianInterval {
    assert!(!pairs.is_empty(), "weighted median of an empty sample");
    median_by_selection(|buf| buf.extend_from_slice(pairs))
}

/// Both interval endpoints by weighted selection: with total weight `T`,
/// the lower endpoint is the smallest value whose cumulative weight
/// reaches `ceil(T/2)`, the upper the smallest reaching
/// `floor(T/2) + 1`. Selection consumes the scratch buffer, so the
/// upper endpoint refills it through `fill`. Buffers are thread-local
/// and reused; repeated queries do not allocate.
fn median_by_selection(fill: impl Fn(&mut Vec<(f64, u64)>)) -> MedianInterval {
    thread_local! {
        static SCRATCH: std::cell::RefCell<Vec<(f64, u64)>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    SCRATCH.with(|cell| {
        let buf = &mut *cell.borrow_mut();
        buf.clear();
        fill(buf);
        assert!(!buf.is_empty(), "weighted median of an empty sample");

        let total: u128 = buf.iter().map(|&(_, w)| w as u128).sum();
        let (lower, upper) = weighted_select_pair(buf, total.div_ceil(2), total / 2 + 1);
        debug_assert!(lower <= upper);
        MedianInterval { lower, upper }
    })
}

/// Smallest values whose cumulative weight `W(x <= v)` reaches
/// `target_lo` and `target_hi` respectively, where
/// `target_lo <= target_hi <= target_lo + 1`. Consumes the buffer.
///
/// Quickselect with deterministic ninther pivots, walking both targets
/// through the shared rounds (they can split ways at most once, in the
/// round where one of them lands on the pivot). Each round makes two
/// branchless streaming passes: one counting the weight below/at the
/// pivot, one compacting the surviving side to the front. If the sampled
/// pivots fail to shrink the candidate set within the round budget, the
/// exact element median takes over as the pivot, so the total work stays
/// linear even then.
fn weighted_select_pair(buf: &mut [(f64, u64)], target_lo: u128, target_hi: u128) -> (f64, f64) {
    debug_assert!(1 <= target_lo && target_lo <= target_hi && target_hi <= target_lo + 1);
    let mut lo = target_lo;
    let mut hi = target_hi;
    let mut len = buf.len();
    let mut sampled_rounds = 2 * usize::BITS.saturating_sub(len.leading_zeros()) + 8;
    loop {
        let cur = &mut buf[..len];
        if len == 1 {
            return (cur[0].0, cur[0].0);
        }
        let pivot = if sampled_rounds == 0 {
            let mid = len / 2;
            cur.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0)).1 .0
        } else {
            sampled_rounds -= 1;
            ninther(cur)
        };

        let mut below: u128 = 0;
        let mut at: u128 = 0;
        for &(v, w) in cur.iter() {
            below += w as u128 * (v < pivot) as u128;
            at += w as u128 * (v == pivot) as u128;
        }

        if hi <= below {
            len = compact_in_place(cur, |v| v < pivot);
        } else if lo > below + at {
            lo -= below + at;
            hi -= below + at;
            len = compact_in_place(cur, |v| v > pivot);
        } else if lo > below {
            // The lower target lands on the pivot.
            if hi <= below + at {
                return (pivot, pivot);
            }
            let kept = compact_in_place(cur, |v| v > pivot);
            let upper = weighted_select(&mut buf[..kept], hi - below - at, sampled_rounds);
            return (pivot, upper);
        } else {
            // Only the upper target lands on the pivot (the pivot weight
            // is at least 1, so both targets cannot straddle it).
            let kept = compact_in_place(cur, |v| v < pivot);
            let lower = weighted_select(&mut buf[..kept], lo, sampled_rounds);
            return (lower, pivot);
        }
    }
}

/// Single-target tail of [`weighted_select_pair`].
fn weighted_select(buf: &mut [(f64, u64)], mut target: u128, mut sampled_rounds: u32) -> f64 {
    debug_assert!(target >= 1);
    let mut len = buf.len();
    loop {
        let cur = &mut buf[..len];
        if len == 1 {
            return cur[0].0;
        }
        let pivot = if sampled_rounds == 0 {
            let mid = len / 2;
            cur.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0)).1 .0
        } else {
            sampled_rounds -= 1;
            ninther(cur)
        };

        let mut below: u128 = 0;
        let mut at: u128 = 0;
        for &(v, w) in cur.iter() {
            below += w as u128 * (v < pivot) as u128;
            at += w as u128 * (v == pivot) as u128;
        }

        if target <= below {
            len = compact_in_place(cur, |v| v < pivot);
        } else if target <= below + at {
            return pivot;
        } else {
            target -= below + at;
            len = compact_in_place(cur, |v| v > pivot);
        }
    }
}

/// Overwrites the slice front with the entries whose value matches
/// `keep`, returning how many were kept. The store is unconditional and
/// the cursor advance branchless; the write index never passes the read
/// index.
fn compact_in_place(slice: &mut [(f64, u64)], keep: impl Fn(f64) -> bool) -> usize {
    let mut kept = 0;
    for i in 0..slice.len() {
        let entry = slice[i];
        slice[kept] = entry;
        kept += keep(entry.0) as usize;
    }
    kept
}

fn ninther(slice: &[(f64, u64)]) -> f64 {
    ninther_of(slice.len(), |i| slice[i].0)
}

fn ninther_of(n: usize, at: impl Fn(usize) -> f64) -> f64 {
    if n < 9 {
        return median3(at(0), at(n / 2), at(n - 1));
    }
    let third = n / 3;
    median3(
        median3(at(0), at(third / 2), at(third - 1)),
        median3(at(third), at(third + third / 2), at(2 * third - 1)),
        median3(at(2 * third), at(2 * third + third / 2), at(n - 1)),
    )
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    if a <= b {
        if b <= c {
            b
        } else if a <= c {
            c
        } else {
            a
        }
    } else if a <= c {
        a
    } else if b <= c {
        c
    } else {
        b
    }
}

/// Result of the flat tariff design problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatSolution {
    pub price: f64,
    pub objective: f64,
}

/// Optimal flat tariff for the demand: the picked weighted median of the
/// reference prices. Every point of the median interval attains the same
/// objective.
pub fn flat_design(demand: &[OdPair], pick: MedianPick) -> Result<FlatSolution> {
    if demand.is_empty() {
        return Err(Error::invalid("flat design needs demand"));
    }
    thread_local! {
        static SCRATCH: std::cell::RefCell<Vec<(f64, u64)>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    SCRATCH.with(|cell| {
        let buf = &mut *cell.borrow_mut();
        buf.clear();
        buf.reserve(demand.len());

        // Estimate a value window certain to contain the weighted median
        // from a deterministic sample, so the selection only ever touches
        // the entries inside it (the Floyd-Rivest idea). Entries outside
        // the window reduce to their weight and value sums.
        let (win_lo, win_hi) = sample_window(demand);

        // One pass over the demand: validate, total up, settle the
        // outside mass and copy the window into the scratch buffer.
        let mut total: u128 = 0;
        let (mut lo_w, mut hi_w): (u128, u128) = (0, 0);
        let (mut lo_s, mut hi_s) = (0.0f64, 0.0f64);
        let mut win_s = 0.0f64;
        for d in demand {
            let (v, w) = (d.reference_price, d.passengers);
            if w == 0 || !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("demand entries need passengers >= 1 and nonnegative prices"));
            }
            total += w as u128;
            if v < win_lo {
                lo_w += w as u128;
                lo_s += v * w as f64;
            } else if v > win_hi {
                hi_w += w as u128;
                hi_s += v * w as f64;
            } else {
                win_s += v * w as f64;
                buf.push((v, w));
            }
        }
        let target = match pick {
            MedianPick::Lower => total.div_ceil(2),
            MedianPick::Upper => total / 2 + 1,
        };

        let window_hit = lo_w < target && target <= total - hi_w;
        let (price, objective) = if total <= u64::MAX as u128 && window_hit {
            let mut sel = FlatSelect {
                target: (target - lo_w) as u64,
                live_w: (total - lo_w - hi_w) as f64,
                live_s: win_s,
                discards: Discards {
                    below_w: lo_w as f64,
                    below_s: lo_s,
                    above_w: hi_w as f64,
                    above_s: hi_s,
                },
                sampled_rounds: 2 * usize::BITS.saturating_sub(buf.len().leading_zeros()) + 8,
            };
            let len = buf.len();
            sel.run(buf, len)
        } else {
            // The sample window missed (or the passenger total exceeds
            // u64): redo over the full demand in wide arithmetic.
            buf.clear();
            buf.extend(demand.iter().map(|d| (d.reference_price, d.passengers)));
            select_with_objective_wide(buf, target)
        };
        Ok(FlatSolution { price, objective })
    })
}

/// Value window `[lo, hi]` covering the sample's weighted 25th to 75th
/// percentile, from up to 1024 stride-sampled demand entries. Sampling
/// error cannot push the true weighted median outside such a wide
/// window unless the data is ordered adversarially, and the caller
/// falls back to a full pass when that happens.
fn sample_window(demand: &[OdPair]) -> (f64, f64) {
    let n = demand.len();
    let s = n.min(1024);
    let stride = n / s;
    thread_local! {
        static SAMPLE: std::cell::RefCell<Vec<(f64, u64)>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    SAMPLE.with(|cell| {
        let sample = &mut *cell.borrow_mut();
        sample.clear();
        sample.extend((0..s).map(|j| {
            let d = &demand[j * stride];
            (d.reference_price, d.passengers)
        }));
        sample.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let total: u128 = sample.iter().map(|&(_, w)| w as u128).sum();
        let quantile = |threshold: u128| -> f64 {
            let threshold = threshold.max(1);
            let mut cum: u128 = 0;
            for &(v, w) in sample.iter() {
                cum += w as u128;
                if cum >= threshold {
                    return v;
                }
            }
            sample.last().unwrap().0
        };
        (quantile(total / 4), quantile(3 * total / 4))
    })
}

/// Weight/value sums below and at a pivot.
#[derive(Default, Clone, Copy)]
struct PivotCounts {
    lt_w: u64,
    at_w: u64,
    lt_s: f64,
    at_s: f64,
}

impl PivotCounts {
    #[inline]
    fn add(&mut self, v: f64, w: u64, pivot: f64) {
        // Wrapping adds: if the total weight overflows u64 these counts
        // are discarded in favor of the wide-arithmetic path.
        let vw = v * w as f64;
        self.lt_w = self.lt_w.wrapping_add(w * (v < pivot) as u64);
        self.at_w = self.at_w.wrapping_add(w * (v == pivot) as u64);
        self.lt_s += vw * (v < pivot) as u64 as f64;
        self.at_s += vw * (v == pivot) as u64 as f64;
    }
}

/// Deviation mass already settled strictly below / strictly above the
/// final value.
#[derive(Default, Clone, Copy)]
struct Discards {
    below_w: f64,
    below_s: f64,
    above_w: f64,
    above_s: f64,
}

enum Step {
    Done((f64, f64)),
    Continue(usize),
}

/// Single-target weighted selection that also assembles the deviation
/// objective `sum w * |v - result|` on the fly: whenever a side is
/// discarded, all its values lie strictly on one side of the final
/// result, so its contribution reduces to its weight and value sums.
struct FlatSelect {
    target: u64,
    live_w: f64,
    live_s: f64,
    discards: Discards,
    sampled_rounds: u32,
}

impl FlatSelect {
    fn run(&mut self, buf: &mut [(f64, u64)], mut len: usize) -> (f64, f64) {
        loop {
            let cur = &mut buf[..len];
            if len == 1 {
                let value = cur[0].0;
                return (value, self.settled(value));
            }
            let pivot = if self.sampled_rounds == 0 {
                let mid = len / 2;
                cur.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0)).1 .0
            } else {
                self.sampled_rounds -= 1;
                ninther(cur)
            };
            let mut counts = PivotCounts::default();
            for &(v, w) in cur.iter() {
                counts.add(v, w, pivot);
            }
            match self.step(buf, len, pivot, counts) {
                Step::Done(result) => return result,
                Step::Continue(next) => len = next,
            }
        }
    }

    fn step(&mut self, buf: &mut [(f64, u64)], len: usize, pivot: f64, counts: PivotCounts) -> Step {
        let cur = &mut buf[..len];
        if len == 1 {
            let value = cur[0].0;
            return Step::Done((value, self.settled(value)));
        }
        let PivotCounts { lt_w, at_w, lt_s, at_s } = counts;
        let lt_wf = lt_w as f64;
        let at_wf = at_w as f64;
        if self.target <= lt_w {
            // Everything at or above the pivot is discarded upward.
            self.discards.above_w += self.live_w - lt_wf;
            self.discards.above_s += self.live_s - lt_s;
            self.live_w = lt_wf;
            self.live_s = lt_s;
            Step::Continue(compact_in_place(cur, |v| v < pivot))
        } else if self.target <= lt_w + at_w {
            let objective = self.settled(pivot)
                + (pivot * lt_wf - lt_s)
                + ((self.live_s - lt_s - at_s) - pivot * (self.live_w - lt_wf - at_wf));
            Step::Done((pivot, objective))
        } else {
            self.target -= lt_w + at_w;
            self.discards.below_w += lt_wf + at_wf;
            self.discards.below_s += lt_s + at_s;
            self.live_w -= lt_wf + at_wf;
            self.live_s -= lt_s + at_s;
            Step::Continue(compact_in_place(cur, |v| v > pivot))
        }
    }

    fn settled(&self, value: f64) -> f64 {
        (value * self.discards.below_w - self.discards.below_s)
            + (self.discards.above_s - value * self.discards.above_w)
    }
}

/// Wide-arithmetic fallback for passenger totals beyond u64.
#[cold]
fn select_with_objective_wide(buf: &mut [(f64, u64)], mut target: u128) -> (f64, f64) {
    let mut len = buf.len();
    let mut sampled_rounds = 2 * usize::BITS.saturating_sub(len.leading_zeros()) + 8;
    let (mut below_w, mut below_s) = (0.0f64, 0.0f64);
    let (mut above_w, mut above_s) = (0.0f64, 0.0f64);
    let mut live_w: f64 = buf.iter().map(|&(_, w)| w as f64).sum();
    let mut live_s: f64 = buf.iter().map(|&(v, w)| v * w as f64).sum();
    loop {
        let cur = &mut buf[..len];
        if len == 1 {
            let value = cur[0].0;
            return (value, (value * below_w - below_s) + (above_s - value * above_w));
        }
        let pivot = if sampled_rounds == 0 {
            let mid = len / 2;
            cur.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0)).1 .0
        } else {
            sampled_rounds -= 1;
            ninther(cur)
        };
        let mut lt_w: u128 = 0;
        let mut at_w: u128 = 0;
        let mut lt_s = 0.0f64;
        let mut at_s = 0.0f64;
        for &(v, w) in cur.iter() {
            let vw = v * w as f64;
            lt_w += w as u128 * (v < pivot) as u128;
            at_w += w as u128 * (v == pivot) as u128;
            lt_s += vw * (v < pivot) as u64 as f64;
            at_s += vw * (v == pivot) as u64 as f64;
        }
        let lt_wf = lt_w as f64;
        let at_wf = at_w as f64;
        if target <= lt_w {
            above_w += live_w - lt_wf;
            above_s += live_s - lt_s;
            live_w = lt_wf;
            live_s = lt_s;
            len = compact_in_place(cur, |v| v < pivot);
        } else if target <= lt_w + at_w {
            let objective = (pivot * below_w - below_s) + (above_s - pivot * above_w)
                + (pivot * lt_wf - lt_s)
                + ((live_s - lt_s - at_s) - pivot * (live_w - lt_wf - at_wf));
            return (pivot, objective);
        } else {
            target -= lt_w + at_w;
            below_w += lt_wf + at_wf;
            below_s += lt_s + at_s;
            live_w -= lt_wf + at_wf;
            live_s -= lt_s + at_s;
            len = compact_in_place(cur, |v| v > pivot);
        }
    }
}
