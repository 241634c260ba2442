//! Exact zone tariff design by partition enumeration.
//!
//! Every zone partition with at most `N` zones is enumerated exactly once
//! in canonical form: arbitrary partitions as restricted growth strings,
//! connected partitions by growing blocks from the smallest unassigned
//! station over induced-subgraph adjacency. For each partition the
//! price-setting subproblem runs per the configured fairness properties;
//! the best (objective, partition, price list) triple wins, compared
//! lexicographically so results stay deterministic under any thread
//! count. Intended for desk-scale networks; search spaces beyond
//! Bell(12) draw a warning.

use rayon::prelude::*;

use crate::ptn::{OdPair, Ptn, StationId};
use crate::tariff::{self, CountingMode, PriceList, Tariff, ZonePartition};
use crate::zone_pricing::{build_levels, price_monotone, price_no_stopover, price_unrestricted};
use crate::{Error, Result};

/// Which zone tariff design problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignConfig {
    pub mode: CountingMode,
    pub connected: bool,
    /// Upper bound `N` on the number of zones (need not be met).
    pub max_zones: usize,
    /// Enforce monotonically increasing prices.
    pub require_no_elongation: bool,
    /// Enforce the no-stopover price condition.
    pub require_no_stopover: bool,
}

impl DesignConfig {
    pub fn new(mode: CountingMode, connected: bool, max_zones: usize) -> Self {
        DesignConfig { mode, connected, max_zones, require_no_elongation: false, require_no_stopover: false }
    }

    /// Problem variant label: M/S for the counting mode, A/C for
    /// arbitrary or connected zones.
    pub fn variant(&self) -> &'static str {
        match (self.mode, self.connected) {
            (CountingMode::Multiple, false) => "MA",
            (CountingMode::Multiple, true) => "MC",
            (CountingMode::Single, false) => "SA",
            (CountingMode::Single, true) => "SC",
        }
    }

    fn validate(&self, ptn: &Ptn) -> Result<()> {
        if self.max_zones == 0 {
            return Err(Error::invalid("at least one zone is required"));
        }
        if self.max_zones > ptn.station_count() {
            return Err(Error::invalid(format!(
                "max_zones {} exceeds the station count {}",
                self.max_zones,
                ptn.station_count()
            )));
        }
        Ok(())
    }
}

/// Optimal zone tariff found by [`solve_exact`].
#[derive(Debug, Clone)]
pub struct DesignResult {
    pub config: DesignConfig,
    pub partition: ZonePartition,
    pub prices: PriceList,
    pub objective: f64,
}

impl DesignResult {
    pub fn tariff(&self) -> Tariff {
        Tariff::Zone { partition: self.partition.clone(), mode: self.config.mode, prices: self.prices.clone() }
    }
}

/// Calls `f` with every set partition of the stations into at most
/// `max_zones` nonempty zones, canonicalized, each exactly once, in a
/// deterministic order. With `connected`, only partitions whose every
/// zone induces a connected subgraph are produced.
pub fn for_each_partition<F: FnMut(ZonePartition)>(ptn: &Ptn, max_zones: usize, connected: bool, mut f: F) {
    let n = ptn.station_count();
    let max_zones = max_zones.min(n);
    assert!(max_zones >= 1, "at least one zone is required");
    if connected {
        let mut state = ConnectedEnum {
            ptn,
            labels: vec![usize::MAX; n],
            assigned: 0,
            max_zones,
            blocked: vec![false; n],
            f: &mut f,
        };
        state.next_block(0);
    } else {
        for labels in RestrictedGrowth::new(n, max_zones) {
            f(ZonePartition::new(&labels).expect("restricted growth strings are canonical"));
        }
    }
}

/// All partitions as a vector; fine at desk scale.
pub fn enumerate_partitions(ptn: &Ptn, max_zones: usize, connected: bool) -> Vec<ZonePartition> {
    let mut out = Vec::new();
    for_each_partition(ptn, max_zones, connected, |p| out.push(p));
    out
}

/// Restricted growth strings `a` with `a[0] = 0` and
/// `a[i] <= min(max(a[..i]) + 1, max_zones - 1)`, in lexicographic order.
struct RestrictedGrowth {
    labels: Vec<usize>,
    prefix_max: Vec<usize>,
    max_zones: usize,
    started: bool,
    done: bool,
}

impl RestrictedGrowth {
    fn new(n: usize, max_zones: usize) -> Self {
        RestrictedGrowth {
            labels: vec![0; n],
            prefix_max: vec![0; n],
            max_zones,
            started: false,
            done: false,
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.labels.clone());
        }
        let n = self.labels.len();
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                return None;
            }
            i -= 1;
            let cap = (self.prefix_max[i - 1] + 1).min(self.max_zones - 1);
            if self.labels[i] < cap {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return Some(self.labels.clone());
            }
        }
    }
}

/// Recursive enumeration of partitions into connected zones. The next
/// zone always starts at the smallest unassigned station and grows over
/// edges inside the remaining station set, so every connected partition
/// appears exactly once in canonical label order.
struct ConnectedEnum<'a, F: FnMut(ZonePartition)> {
    ptn: &'a Ptn,
    labels: Vec<usize>,
    assigned: usize,
    max_zones: usize,
    /// Stations excluded from the block currently being grown.
    blocked: Vec<bool>,
    f: &'a mut F,
}

impl<F: FnMut(ZonePartition)> ConnectedEnum<'_, F> {
    fn next_block(&mut self, zones_used: usize) {
        let n = self.labels.len();
        if self.assigned == n {
            (self.f)(ZonePartition::new(&self.labels).expect("labels are canonical"));
            return;
        }
        if zones_used == self.max_zones {
            return;
        }
        let seed = (0..n).find(|&v| self.labels[v] == usize::MAX).unwrap();
        let mut block = vec![seed];
        self.labels[seed] = zones_used;
        self.assigned += 1;
        let ext: Vec<StationId> = self
            .ptn
            .neighbors(seed)
            .iter()
            .map(|&(w, _)| w)
            .filter(|&w| self.labels[w] == usize::MAX)
            .collect();
        // The exclusion marks only steer the enumeration of the block
        // being grown; deeper blocks start from a clean slate.
        let saved = std::mem::replace(&mut self.blocked, vec![false; n]);
        self.grow(zones_used, &mut block, ext);
        self.blocked = saved;
        self.labels[seed] = usize::MAX;
        self.assigned -= 1;
    }

    fn grow(&mut self, zone: usize, block: &mut Vec<StationId>, ext: Vec<StationId>) {
        // Emit the block as-is, then every extension of it.
        self.next_block(zone + 1);
        let mut newly_blocked = Vec::new();
        for i in 0..ext.len() {
            let u = ext[i];
            if self.labels[u] != usize::MAX {
                continue;
            }
            self.labels[u] = zone;
            self.assigned += 1;
            block.push(u);
            let mut next_ext: Vec<StationId> = ext[i + 1..]
                .iter()
                .copied()
                .filter(|&w| self.labels[w] == usize::MAX)
                .collect();
            for &(w, _) in self.ptn.neighbors(u) {
                if self.labels[w] == usize::MAX && !self.blocked[w] && !next_ext.contains(&w) {
                    next_ext.push(w);
                }
            }
            self.grow(zone, block, next_ext);
            block.pop();
            self.assigned -= 1;
            self.labels[u] = usize::MAX;
            self.blocked[u] = true;
            newly_blocked.push(u);
        }
        for u in newly_blocked {
            self.blocked[u] = false;
        }
    }
}

struct Candidate {
    partition: ZonePartition,
    prices: PriceList,
    objective: f64,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.objective
        .total_cmp(&b.objective)
        .then_with(|| a.partition.cmp(&b.partition))
        .then_with(|| cmp_prices(&a.prices, &b.prices))
        .is_lt()
}

fn cmp_prices(a: &PriceList, b: &PriceList) -> std::cmp::Ordering {
    let mut it = a.prices().iter().zip(b.prices());
    for (x, y) in &mut it {
        let ord = x.total_cmp(y);
        if ord.is_ne() {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// Exact zone tariff design: enumerates partitions, dispatches the
/// price-setting subproblem per the configured properties and returns the
/// minimum with the deterministic tie-break (objective, canonical
/// partition, price list).
pub fn solve_exact(ptn: &Ptn, demand: &[OdPair], config: &DesignConfig) -> Result<DesignResult> {
    config.validate(ptn)?;
    if demand.is_empty() {
        return Err(Error::invalid("zone design needs demand"));
    }
    if !config.connected && ptn.station_count() > 12 {
        eprintln!(
            "warning: exhaustive zone search over {} stations exceeds Bell(12) partitions",
            ptn.station_count()
        );
    }

    let price = |partition: &ZonePartition| -> Result<(PriceList, f64)> {
        let levels = build_levels(partition, config.mode, demand)?;
        if config.require_no_stopover {
            price_no_stopover(&levels, config.mode, config.require_no_elongation)
        } else if config.require_no_elongation {
            Ok(price_monotone(&levels))
        } else {
            Ok(price_unrestricted(&levels))
        }
    };

    const BATCH: usize = 4096;
    let mut best: Option<Candidate> = None;
    let mut buffer: Vec<ZonePartition> = Vec::with_capacity(BATCH);
    let flush = |buffer: &mut Vec<ZonePartition>, best: &mut Option<Candidate>| -> Result<()> {
        let evaluated: Result<Vec<Candidate>> = buffer
            .par_drain(..)
            .map(|partition| {
                let (prices, objective) = price(&partition)?;
                Ok(Candidate { partition, prices, objective })
            })
            .collect();
        for cand in evaluated? {
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                *best = Some(cand);
            }
        }
        Ok(())
    };

    let mut pending = Ok(());
    for_each_partition(ptn, config.max_zones, config.connected, |partition| {
        buffer.push(partition);
        if buffer.len() == BATCH && pending.is_ok() {
            pending = flush(&mut buffer, &mut best);
        }
    });
    pending?;
    flush(&mut buffer, &mut best)?;

    let Candidate { partition, prices, objective: _ } = best.expect("at least the one-zone partition exists");
    // Report the objective exactly as the assembled tariff evaluates.
    let tariff = Tariff::Zone { partition: partition.clone(), mode: config.mode, prices: prices.clone() };
    let objective = tariff::objective(ptn, &tariff, demand)?;
    Ok(DesignResult { config: *config, partition, prices, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptn::OdPair;
    use std::collections::BTreeSet;

    #[test]
    fn arbitrary_partition_counts_are_bell_numbers() {
        for (n, bell) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)] {
            let ptn = Ptn::line(n);
            assert_eq!(enumerate_partitions(&ptn, n, false).len(), bell, "n={n}");
        }
    }

    #[test]
    fn restricted_zone_counts_match_stirling_sums() {
        let ptn = Ptn::line(4);
        // S(4,1) + S(4,2) = 1 + 7
        assert_eq!(enumerate_partitions(&ptn, 2, false).len(), 8);
        assert_eq!(enumerate_partitions(&ptn, 1, false).len(), 1);
        assert_eq!(enumerate_partitions(&ptn, 1, true).len(), 1);
    }

    #[test]
    fn connected_partitions_on_a_line_are_compositions() {
        // Cutting any subset of the n-1 edges of a path graph.
        for n in 2..=6 {
            let ptn = Ptn::line(n);
            assert_eq!(enumerate_partitions(&ptn, n, true).len(), 1 << (n - 1), "n={n}");
        }
    }

    #[test]
    fn three_node_line_connected_excludes_split_zone() {
        let ptn = Ptn::line(3);
        let all = enumerate_partitions(&ptn, 3, false);
        assert_eq!(all.len(), 5);
        let connected = enumerate_partitions(&ptn, 3, true);
        assert_eq!(connected.len(), 4);
        let excluded = ZonePartition::new(&[0, 1, 0]).unwrap();
        assert!(all.contains(&excluded));
        assert!(!connected.contains(&excluded));
    }

    #[test]
    fn partitions_are_unique_connected_and_within_budget() {
        let ptn = Ptn::from_edges(
            &["a", "b", "c", "d", "e"],
            &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "e", 1.0), ("e", "a", 1.0), ("b", "d", 1.0)],
        )
        .unwrap();
        for connected in [false, true] {
            for max_zones in 1..=5 {
                let parts = enumerate_partitions(&ptn, max_zones, connected);
                let set: BTreeSet<_> = parts.iter().cloned().collect();
                assert_eq!(set.len(), parts.len(), "duplicates emitted");
                for p in &parts {
                    assert!(p.zone_count() <= max_zones);
                    if connected {
                        assert!(tariff::is_connected_partition(&ptn, p));
                    }
                }
            }
        }
        // Connected partitions are exactly the arbitrary ones that pass the
        // connectivity predicate.
        let filtered: BTreeSet<_> = enumerate_partitions(&ptn, 5, false)
            .into_iter()
            .filter(|p| tariff::is_connected_partition(&ptn, p))
            .collect();
        let direct: BTreeSet<_> = enumerate_partitions(&ptn, 5, true).into_iter().collect();
        assert_eq!(filtered, direct);
    }

    fn example1(ptn: &Ptn) -> Vec<OdPair> {
        vec![
            OdPair::new(ptn, 0, 1, 1, 1.0, None).unwrap(),
            OdPair::new(ptn, 0, 2, 1, 2.0, None).unwrap(),
            OdPair::new(ptn, 1, 2, 1, 1.0, None).unwrap(),
        ]
    }

    #[test]
    fn example1_arbitrary_vs_connected() {
        let ptn = Ptn::line(3);
        let demand = example1(&ptn);
        let ma = solve_exact(&ptn, &demand, &DesignConfig::new(CountingMode::Multiple, false, 2)).unwrap();
        assert_eq!(ma.objective, 0.0);
        assert_eq!(ma.partition, ZonePartition::new(&[0, 1, 0]).unwrap());
        assert_eq!(ma.prices.prices(), &[1.0, 1.0, 2.0]);

        let mc = solve_exact(&ptn, &demand, &DesignConfig::new(CountingMode::Multiple, true, 2)).unwrap();
        assert_eq!(mc.objective, 1.0);
    }

    #[test]
    fn objective_nonincreasing_in_max_zones() {
        let ptn = Ptn::line(4);
        let demand = vec![
            OdPair::new(&ptn, 0, 1, 2, 1.0, None).unwrap(),
            OdPair::new(&ptn, 1, 3, 1, 2.5, None).unwrap(),
            OdPair::new(&ptn, 0, 3, 1, 3.0, None).unwrap(),
        ];
        for mode in [CountingMode::Multiple, CountingMode::Single] {
            for connected in [false, true] {
                let mut prev = f64::INFINITY;
                for n in 1..=4 {
                    let mut config = DesignConfig::new(mode, connected, n);
                    config.require_no_elongation = true;
                    let res = solve_exact(&ptn, &demand, &config).unwrap();
                    assert!(res.objective <= prev + 1e-9);
                    prev = res.objective;
                }
            }
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let ptn = Ptn::from_edges(
            &["a", "b", "c", "d"],
            &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "a", 1.0)],
        )
        .unwrap();
        let demand = vec![
            OdPair::new(&ptn, 0, 2, 1, 2.0, None).unwrap(),
            OdPair::new(&ptn, 1, 3, 1, 2.0, None).unwrap(),
            OdPair::new(&ptn, 0, 1, 3, 1.0, None).unwrap(),
        ];
        let config = DesignConfig::new(CountingMode::Single, false, 3);
        let a = solve_exact(&ptn, &demand, &config).unwrap();
        let b = solve_exact(&ptn, &demand, &config).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.prices.prices(), b.prices.prices());
        assert_eq!(a.objective, b.objective);
    }
}
