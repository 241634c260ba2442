//! Price-setting subproblem for a fixed zone partition.
//!
//! Demand is grouped by the number of traversed zones. Without fairness
//! properties each level prices independently at a weighted median; with
//! monotonically increasing prices (no-elongation) an adjacent-merge pass
//! over the level medians solves the problem in `O(kappa * |D|)`; with
//! the no-stopover condition the problem goes through the LP subsolver.

use crate::lp::{self, Bounds, LinearProgram, Relation};
use crate::median::weighted_median_pairs;
use crate::ptn::OdPair;
use crate::tariff::{zone_count, CountingMode, PriceList, ZonePartition};
use crate::{Error, Result};

/// Demand grouped by number of traversed zones: `level(k)` holds the
/// `(reference_price, passengers)` pairs of OD pairs traversing exactly
/// `k` zones. `kappa` is the largest traversed count, so the last level
/// is never empty; earlier levels may be.
#[derive(Debug, Clone)]
pub struct LevelledDemand {
    levels: Vec<Vec<(f64, u64)>>,
}

impl LevelledDemand {
    /// `levels[k-1]` is the demand at level `k`. Trailing empty levels are
    /// trimmed; a completely empty input is rejected.
    pub fn new(mut levels: Vec<Vec<(f64, u64)>>) -> Result<Self> {
        while levels.last().is_some_and(|l| l.is_empty()) {
            levels.pop();
        }
        if levels.is_empty() {
            return Err(Error::invalid("no demand on any level"));
        }
        for level in &levels {
            for &(r, t) in level {
                if !(r.is_finite() && r >= 0.0) {
                    return Err(Error::invalid(format!("reference price {r} is not a nonnegative real")));
                }
                if t == 0 {
                    return Err(Error::invalid("passenger count must be at least 1"));
                }
            }
        }
        Ok(LevelledDemand { levels })
    }

    pub fn kappa(&self) -> usize {
        self.levels.len()
    }

    /// Demand at level `k` (1-based).
    pub fn level(&self, k: usize) -> &[(f64, u64)] {
        &self.levels[k - 1]
    }

    pub fn levels(&self) -> &[Vec<(f64, u64)>] {
        &self.levels
    }

    /// Largest reference price over all levels.
    pub fn max_reference_price(&self) -> f64 {
        self.levels.iter().flatten().map(|&(r, _)| r).fold(0.0, f64::max)
    }

    /// Deviation objective of a price list against this demand, summed in
    /// level order.
    pub fn objective(&self, prices: &PriceList) -> f64 {
        let mut total = 0.0;
        for (idx, level) in self.levels.iter().enumerate() {
            let p = prices.price(idx + 1);
            for &(r, t) in level {
                total += t as f64 * (r - p).abs();
            }
        }
        total
    }
}

/// Groups the demand by [`zone_count`] under the partition and mode.
pub fn build_levels(
    partition: &ZonePartition,
    mode: CountingMode,
    demand: &[OdPair],
) -> Result<LevelledDemand> {
    if demand.is_empty() {
        return Err(Error::invalid("no demand on any level"));
    }
    let mut levels: Vec<Vec<(f64, u64)>> = Vec::new();
    for od in demand {
        let k = zone_count(partition, mode, &od.path)?;
        if levels.len() < k {
            levels.resize(k, Vec::new());
        }
        levels[k - 1].push((od.reference_price, od.passengers));
    }
    LevelledDemand::new(levels)
}

/// Unrestricted price setting: every nonempty level prices at its lower
/// weighted median. Empty levels carry the previous price forward (levels
/// before the first nonempty one take its price), keeping the emitted
/// list monotone whenever the medians are.
pub fn price_unrestricted(levels: &LevelledDemand) -> (PriceList, f64) {
    let mut prices = Vec::with_capacity(levels.kappa());
    let mut first_nonempty_price = None;
    for level in levels.levels() {
        if level.is_empty() {
            prices.push(f64::NAN); // patched below
        } else {
            let p = weighted_median_pairs(level).lower;
            if first_nonempty_price.is_none() {
                first_nonempty_price = Some(p);
            }
            prices.push(p);
        }
    }
    let first = first_nonempty_price.expect("at least one nonempty level");
    let mut carry = first;
    for p in &mut prices {
        if p.is_nan() {
            *p = carry;
        } else {
            carry = *p;
        }
    }
    let prices = PriceList::new(prices).expect("medians of valid demand are valid prices");
    let objective = levels.objective(&prices);
    (prices, objective)
}

/// One contiguous run of levels sharing a price.
#[derive(Debug, Clone)]
pub struct MergeBlock {
    /// First and last level of the block, 1-based inclusive.
    pub range: (usize, usize),
    /// Pooled demand of the block's levels.
    pub pooled: Vec<(f64, u64)>,
    /// Lower weighted median of the pooled demand.
    pub price: f64,
}

/// Final state of the monotone merge pass.
#[derive(Debug, Clone)]
pub struct MergeState {
    pub blocks: Vec<MergeBlock>,
}

/// Outcome of [`price_monotone_traced`].
#[derive(Debug, Clone)]
pub struct MonotoneRun {
    pub prices: PriceList,
    pub objective: f64,
    /// Level range of the block produced by each merge, in order.
    pub merges: Vec<(usize, usize)>,
    pub state: MergeState,
}

/// Monotone (no-elongation) price setting via adjacent merging.
pub fn price_monotone(levels: &LevelledDemand) -> (PriceList, f64) {
    let run = price_monotone_traced(levels);
    (run.prices, run.objective)
}

/// Monotone price setting, also reporting the merge sequence.
///
/// Blocks start as one level each, at the level's lower weighted median;
/// empty levels are pre-merged into the nearest lower nonempty level
/// (next higher only for leading empties). While the block prices are
/// not nondecreasing, the offending adjacent blocks merge, the pooled
/// demand is re-medianed and the scan steps back one block.
pub fn price_monotone_traced(levels: &LevelledDemand) -> MonotoneRun {
    let mut blocks: Vec<MergeBlock> = Vec::new();
    let mut leading_empty = 0;
    for (idx, level) in levels.levels().iter().enumerate() {
        let k = idx + 1;
        if level.is_empty() {
            match blocks.last_mut() {
                Some(block) => block.range.1 = k,
                None => leading_empty += 1,
            }
        } else {
            let start = if blocks.is_empty() { k - leading_empty } else { k };
            blocks.push(MergeBlock {
                range: (start, k),
                pooled: level.clone(),
                price: weighted_median_pairs(level).lower,
            });
        }
    }
    debug_assert!(!blocks.is_empty());

    let mut merges = Vec::new();
    let mut pos = 0;
    while pos + 1 < blocks.len() {
        if blocks[pos].price > blocks[pos + 1].price {
            let right = blocks.remove(pos + 1);
            let left = &mut blocks[pos];
            left.range.1 = right.range.1;
            left.pooled.extend(right.pooled);
            left.price = weighted_median_pairs(&left.pooled).lower;
            merges.push(left.range);
            pos = pos.saturating_sub(1);
        } else {
            pos += 1;
        }
    }

    let mut prices = vec![0.0; levels.kappa()];
    for block in &blocks {
        for k in block.range.0..=block.range.1 {
            prices[k - 1] = block.price;
        }
    }
    let prices = PriceList::new(prices).expect("medians of valid demand are valid prices");
    let objective = levels.objective(&prices);
    MonotoneRun { prices, objective, merges, state: MergeState { blocks } }
}

/// Builds the price-setting LP: deviation rows per OD pair, optional
/// monotonicity rows, optional no-stopover rows for the counting mode
/// (reduced index ranges). Price variables carry the bounds
/// `0 <= p_k <= max r_d`, justified by the bounded-prices argument.
pub(crate) fn price_setting_lp(
    levels: &LevelledDemand,
    monotone: bool,
    stopover: Option<CountingMode>,
) -> LinearProgram {
    let kappa = levels.kappa();
    let pair_count: usize = levels.levels().iter().map(Vec::len).sum();
    let r_bar = levels.max_reference_price();

    // Variables: p_1..p_kappa, then one deviation variable per OD pair.
    let mut prog = LinearProgram::new(kappa + pair_count);
    for k in 0..kappa {
        prog.bounds[k] = Bounds::range(0.0, r_bar);
    }
    let mut y = kappa;
    for (idx, level) in levels.levels().iter().enumerate() {
        for &(r, t) in level {
            prog.minimize[y] = t as f64;
            prog.bounds[y] = Bounds::free();
            prog.add_sparse(&[(idx, -1.0), (y, -1.0)], Relation::Le, -r);
            prog.add_sparse(&[(idx, 1.0), (y, -1.0)], Relation::Le, r);
            y += 1;
        }
    }

    if monotone {
        for k in 0..kappa.saturating_sub(1) {
            prog.add_sparse(&[(k, 1.0), (k + 1, -1.0)], Relation::Le, 0.0);
        }
    }

    match stopover {
        Some(CountingMode::Multiple) => {
            for k in 3..=kappa {
                for i in 2..=k.div_ceil(2) {
                    prog.add_sparse(
                        &[(k - 1, 1.0), (i - 1, -1.0), (k - i, -1.0)],
                        Relation::Le,
                        0.0,
                    );
                }
            }
        }
        Some(CountingMode::Single) => {
            for k in 3..=kappa {
                for i1 in (k + 1).div_ceil(2)..=k {
                    for i2 in k + 1 - i1..=i1 {
                        prog.add_sparse(
                            &[(k - 1, 1.0), (i1 - 1, -1.0), (i2 - 1, -1.0)],
                            Relation::Le,
                            0.0,
                        );
                    }
                }
            }
        }
        None => {}
    }
    prog
}

/// Monotone price setting through the LP subsolver; the independent
/// cross-check route for [`price_monotone`].
pub fn price_monotone_lp(levels: &LevelledDemand) -> Result<(PriceList, f64)> {
    let sol = lp::solve(&price_setting_lp(levels, true, None));
    let (values, _) = sol.optimal()?;
    let prices = PriceList::new(values[..levels.kappa()].iter().map(|p| p.max(0.0)).collect())?;
    let objective = levels.objective(&prices);
    Ok((prices, objective))
}

/// Price setting under the no-stopover condition (and optionally also
/// monotonicity) for the given counting mode, via the LP subsolver. The
/// program is always feasible: constant price lists satisfy every row.
pub fn price_no_stopover(
    levels: &LevelledDemand,
    mode: CountingMode,
    require_monotone: bool,
) -> Result<(PriceList, f64)> {
    let prog = price_setting_lp(levels, require_monotone, Some(mode));
    let sol = lp::solve(&prog);
    let (values, _) = sol.optimal()?;
    let prices =
        PriceList::new(values[..levels.kappa()].iter().map(|p| p.max(0.0)).collect())?;
    let objective = levels.objective(&prices);
    Ok((prices, objective))
}
