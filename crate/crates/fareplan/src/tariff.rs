//! Fare strategies, zone partitions, zone counting and the deviation
//! objective.

use std::collections::BTreeSet;

use crate::distance::{path_distance, DistanceMetric};
use crate::ptn::{OdPair, Path, Ptn, StationId};
use crate::{Error, Result, PRICE_EPS};

/// How traversed zones are counted.
///
/// `Multiple` counts a zone each time it is entered (one plus the number
/// of zone-border crossings along the path); `Single` counts the number
/// of different zones touched by the path's nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingMode {
    Multiple,
    Single,
}

impl CountingMode {
    pub fn label(self) -> &'static str {
        match self {
            CountingMode::Multiple => "multiple",
            CountingMode::Single => "single",
        }
    }
}

/// Assignment of every station to one of `L` zones, with zone indices
/// `0..L` canonicalized by first occurrence in station order. Two
/// partitions of the same station set are equal iff they induce the same
/// zones, regardless of the labels they were built with.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZonePartition {
    assignment: Vec<usize>,
    zones: usize,
}

impl ZonePartition {
    /// Builds a partition from raw per-station labels (any `usize` values)
    /// and canonicalizes the zone indices.
    pub fn new(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("zone partition needs at least one station"));
        }
        let mut remap: Vec<(usize, usize)> = Vec::new();
        let mut assignment = Vec::with_capacity(labels.len());
        for &raw in labels {
            let zone = match remap.iter().find(|&&(r, _)| r == raw) {
                Some(&(_, z)) => z,
                None => {
                    let z = remap.len();
                    remap.push((raw, z));
                    z
                }
            };
            assignment.push(zone);
        }
        Ok(ZonePartition { assignment, zones: remap.len() })
    }

    /// One zone per station.
    pub fn singletons(n: usize) -> Self {
        ZonePartition::new(&(0..n).collect::<Vec<_>>()).expect("n >= 1")
    }

    /// Everything in one zone.
    pub fn single_zone(n: usize) -> Self {
        ZonePartition::new(&vec![0; n]).expect("n >= 1")
    }

    pub fn station_count(&self) -> usize {
        self.assignment.len()
    }

    /// Number of nonempty zones `L`.
    pub fn zone_count(&self) -> usize {
        self.zones
    }

    /// Zone of `station` (`0..L`), or an error for stations the partition
    /// does not cover.
    pub fn zone_of(&self, station: StationId) -> Result<usize> {
        self.assignment
            .get(station)
            .copied()
            .ok_or_else(|| Error::invalid(format!("station index {station} is not assigned to a zone")))
    }

    /// Canonical per-station zone labels.
    pub fn labels(&self) -> &[usize] {
        &self.assignment
    }

    /// Stations of each zone, zones in canonical order.
    pub fn blocks(&self) -> Vec<Vec<StationId>> {
        let mut blocks = vec![Vec::new(); self.zones];
        for (station, &z) in self.assignment.iter().enumerate() {
            blocks[z].push(station);
        }
        blocks
    }
}

/// Prices `p_1..p_K` indexed by the number of traversed zones; inputs
/// beyond `K` price as `p_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceList(Vec<f64>);

impl PriceList {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::invalid("price list needs at least one entry"));
        }
        if let Some(bad) = prices.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(format!("price {bad} is not a nonnegative real")));
        }
        Ok(PriceList(prices))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Price for traversing `zones >= 1` zones.
    pub fn price(&self, zones: usize) -> f64 {
        assert!(zones >= 1, "a path traverses at least one zone");
        self.0[zones.min(self.0.len()) - 1]
    }

    pub fn prices(&self) -> &[f64] {
        &self.0
    }
}

/// A priced fare strategy.
#[derive(Debug, Clone)]
pub enum Tariff {
    /// One fixed price for every path.
    Flat { price: f64 },
    /// `rate * distance + base` over network or beeline distance.
    AffineDistance { rate: f64, base: f64, metric: DistanceMetric },
    /// Counting-zones pricing over a zone partition.
    Zone { partition: ZonePartition, mode: CountingMode, prices: PriceList },
}

impl Tariff {
    /// Fare of a single path under this tariff.
    pub fn price(&self, ptn: &Ptn, path: &Path) -> Result<f64> {
        match self {
            Tariff::Flat { price } => Ok(*price),
            Tariff::AffineDistance { rate, base, metric } => {
                Ok(rate * path_distance(ptn, path, *metric)? + base)
            }
            Tariff::Zone { partition, mode, prices } => {
                Ok(prices.price(zone_count(partition, *mode, path)?))
            }
        }
    }
}

/// Number of zones traversed by `path` under the given counting mode.
pub fn zone_count(partition: &ZonePartition, mode: CountingMode, path: &Path) -> Result<usize> {
    match mode {
        CountingMode::Multiple => {
            let mut borders = 0;
            for (a, b) in path.steps() {
                if partition.zone_of(a)? != partition.zone_of(b)? {
                    borders += 1;
                }
            }
            Ok(1 + borders)
        }
        CountingMode::Single => {
            if partition.zone_count() <= 128 {
                let mut mask: u128 = 0;
                for &v in path.nodes() {
                    mask |= 1u128 << partition.zone_of(v)?;
                }
                Ok(mask.count_ones() as usize)
            } else {
                let mut zones = BTreeSet::new();
                for &v in path.nodes() {
                    zones.insert(partition.zone_of(v)?);
                }
                Ok(zones.len())
            }
        }
    }
}

/// Passenger-weighted sum of absolute deviations between reference prices
/// and the fares the tariff assigns to the demand paths.
pub fn objective(ptn: &Ptn, tariff: &Tariff, demand: &[OdPair]) -> Result<f64> {
    let mut total = 0.0;
    for od in demand {
        let fare = tariff.price(ptn, &od.path)?;
        total += od.passengers as f64 * (od.reference_price - fare).abs();
    }
    Ok(total)
}

/// Whether the price list is monotonically increasing (within tolerance),
/// the sufficient condition for the no-elongation property.
pub fn check_monotone(prices: &PriceList) -> bool {
    prices.prices().windows(2).all(|w| w[0] <= w[1] + PRICE_EPS)
}

/// Whether the price list satisfies the sufficient condition for the
/// no-stopover property under the given counting mode.
///
/// Multiple counting: `P(k) <= P(i) + P(k-i+1)` for all `k`, `i <= k`.
/// Single counting: `P(k) <= P(i1) + P(i2)` for all `i1, i2 <= k` with
/// `i1 + i2 >= k + 1`. Indices beyond the list length never add new
/// conditions, so checking `k <= K` suffices.
pub fn check_no_stopover_condition(prices: &PriceList, mode: CountingMode) -> bool {
    let k_max = prices.len();
    match mode {
        CountingMode::Multiple => {
            for k in 1..=k_max {
                for i in 1..=k {
                    if prices.price(k) > prices.price(i) + prices.price(k - i + 1) + PRICE_EPS {
                        return false;
                    }
                }
            }
        }
        CountingMode::Single => {
            for k in 1..=k_max {
                for i1 in 1..=k {
                    for i2 in (k + 1 - i1).max(1)..=k {
                        if prices.price(k) > prices.price(i1) + prices.price(i2) + PRICE_EPS {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Whether every zone induces a connected subgraph. Singleton zones are
/// connected.
pub fn is_connected_partition(ptn: &Ptn, partition: &ZonePartition) -> bool {
    partition
        .blocks()
        .into_iter()
        .all(|block| ptn.is_connected_set(block.into_iter().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptn::Path;

    fn line3() -> Ptn {
        Ptn::line(3)
    }

    #[test]
    fn partition_canonicalizes_labels() {
        let a = ZonePartition::new(&[7, 3, 7]).unwrap();
        let b = ZonePartition::new(&[0, 1, 0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.zone_count(), 2);
        assert_eq!(a.labels(), &[0, 1, 0]);
    }

    #[test]
    fn zone_count_examples() {
        let ptn = line3();
        let path = Path::new(&ptn, vec![0, 1, 2]).unwrap();

        // One border crossing.
        let p = ZonePartition::new(&[0, 0, 1]).unwrap();
        assert_eq!(zone_count(&p, CountingMode::Multiple, &path).unwrap(), 2);

        // v1 and v3 share a zone: three entries under multiple counting,
        // two distinct zones under single counting.
        let p = ZonePartition::new(&[0, 1, 0]).unwrap();
        assert_eq!(zone_count(&p, CountingMode::Multiple, &path).unwrap(), 3);
        assert_eq!(zone_count(&p, CountingMode::Single, &path).unwrap(), 2);

        // Fully inside one zone.
        let p = ZonePartition::single_zone(3);
        assert_eq!(zone_count(&p, CountingMode::Multiple, &path).unwrap(), 1);
        assert_eq!(zone_count(&p, CountingMode::Single, &path).unwrap(), 1);
    }

    #[test]
    fn zone_count_rejects_uncovered_station() {
        let ptn = line3();
        let path = Path::new(&ptn, vec![0, 1, 2]).unwrap();
        let small = ZonePartition::new(&[0, 1]).unwrap();
        assert!(zone_count(&small, CountingMode::Multiple, &path).is_err());
        assert!(zone_count(&small, CountingMode::Single, &path).is_err());
    }

    #[test]
    fn objective_flat() {
        let ptn = line3();
        let demand = vec![
            OdPair::new(&ptn, 0, 1, 1, 1.0, None).unwrap(),
            OdPair::new(&ptn, 0, 2, 1, 2.0, None).unwrap(),
            OdPair::new(&ptn, 1, 2, 1, 2.0, None).unwrap(),
        ];
        let obj = objective(&ptn, &Tariff::Flat { price: 2.0 }, &demand).unwrap();
        assert_eq!(obj, 1.0);
    }

    #[test]
    fn objective_zone_tariff_meets_references() {
        // Disconnected two-zone partition pricing the line's demand exactly.
        let ptn = line3();
        let demand = vec![
            OdPair::new(&ptn, 0, 1, 1, 1.0, None).unwrap(),
            OdPair::new(&ptn, 0, 2, 1, 2.0, None).unwrap(),
            OdPair::new(&ptn, 1, 2, 1, 1.0, None).unwrap(),
        ];
        let tariff = Tariff::Zone {
            partition: ZonePartition::new(&[0, 1, 0]).unwrap(),
            mode: CountingMode::Multiple,
            prices: PriceList::new(vec![1.0, 1.0, 2.0]).unwrap(),
        };
        assert_eq!(objective(&ptn, &tariff, &demand).unwrap(), 0.0);
    }

    #[test]
    fn monotone_check() {
        assert!(check_monotone(&PriceList::new(vec![1.0, 2.0, 3.0]).unwrap()));
        assert!(!check_monotone(&PriceList::new(vec![1.0, 3.0, 2.0]).unwrap()));
        assert!(check_monotone(&PriceList::new(vec![1.0, 1.0, 3.0]).unwrap()));
    }

    #[test]
    fn no_stopover_check() {
        let ok = PriceList::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(check_no_stopover_condition(&ok, CountingMode::Multiple));
        // k=3, i=2 requires p3 <= 2*p2 = 2.
        let bad = PriceList::new(vec![1.0, 1.0, 3.0]).unwrap();
        assert!(!check_no_stopover_condition(&bad, CountingMode::Multiple));
        for mode in [CountingMode::Multiple, CountingMode::Single] {
            let constant = PriceList::new(vec![2.5; 6]).unwrap();
            assert!(check_no_stopover_condition(&constant, mode));
        }
    }

    #[test]
    fn connectivity_predicate() {
        let ptn = line3();
        assert!(!is_connected_partition(&ptn, &ZonePartition::new(&[0, 1, 0]).unwrap()));
        assert!(is_connected_partition(&ptn, &ZonePartition::new(&[0, 0, 1]).unwrap()));
        assert!(is_connected_partition(&ptn, &ZonePartition::singletons(3)));
    }

    mod random_invariants {
        use super::*;
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;

        fn random_connected_ptn(rng: &mut ChaCha8Rng, n: usize) -> Ptn {
            let stations: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
            let mut edges: Vec<(String, String, f64)> = Vec::new();
            for v in 1..n {
                let u = rng.random_range(0..v);
                edges.push((format!("v{}", u + 1), format!("v{}", v + 1), 1.0));
            }
            for _ in 0..rng.random_range(0..=n) {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a != b && !edges.iter().any(|(x, y, _)| {
                    let (x, y) = (x.as_str(), y.as_str());
                    (x, y) == (format!("v{}", a.min(b) + 1).as_str(), format!("v{}", a.max(b) + 1).as_str())
                        || (y, x) == (format!("v{}", a.min(b) + 1).as_str(), format!("v{}", a.max(b) + 1).as_str())
                }) {
                    edges.push((format!("v{}", a + 1), format!("v{}", b + 1), 1.0));
                }
            }
            Ptn::new(stations, edges).unwrap()
        }

        fn random_walk(rng: &mut ChaCha8Rng, ptn: &Ptn) -> Path {
            let mut nodes = vec![rng.random_range(0..ptn.station_count())];
            let len = rng.random_range(1..=8);
            for _ in 0..len {
                let here = *nodes.last().unwrap();
                let nbrs = ptn.neighbors(here);
                let (next, _) = nbrs[rng.random_range(0..nbrs.len())];
                nodes.push(next);
            }
            Path::new(ptn, nodes).unwrap()
        }

        /// Walk that moves only within the current zone or into a zone it
        /// has not touched yet.
        fn zone_non_revisiting_walk(rng: &mut ChaCha8Rng, ptn: &Ptn, partition: &ZonePartition) -> Path {
            let start = rng.random_range(0..ptn.station_count());
            let mut nodes = vec![start];
            let mut visited = vec![partition.zone_of(start).unwrap()];
            for _ in 0..8 {
                let here = *nodes.last().unwrap();
                let zone_here = partition.zone_of(here).unwrap();
                let options: Vec<StationId> = ptn
                    .neighbors(here)
                    .iter()
                    .map(|&(w, _)| w)
                    .filter(|&w| {
                        let z = partition.zone_of(w).unwrap();
                        z == zone_here || !visited.contains(&z)
                    })
                    .collect();
                if options.is_empty() {
                    break;
                }
                let next = options[rng.random_range(0..options.len())];
                let z = partition.zone_of(next).unwrap();
                if !visited.contains(&z) {
                    visited.push(z);
                }
                nodes.push(next);
            }
            if nodes.len() < 2 {
                // Any single edge works: both modes agree on it anyway.
                let (next, _) = ptn.neighbors(start)[0];
                nodes.push(next);
            }
            Path::new(ptn, nodes).unwrap()
        }

        #[test]
        fn counting_modes_agree_on_zone_non_revisiting_paths() {
            let mut rng = ChaCha8Rng::seed_from_u64(53);
            for _ in 0..200 {
                let n = rng.random_range(2..=8);
                let ptn = random_connected_ptn(&mut rng, n);
                let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let partition = ZonePartition::new(&labels).unwrap();
                let path = zone_non_revisiting_walk(&mut rng, &ptn, &partition);
                let multiple = zone_count(&partition, CountingMode::Multiple, &path).unwrap();
                let single = zone_count(&partition, CountingMode::Single, &path).unwrap();
                assert_eq!(multiple, single, "labels {labels:?} path {:?}", path.nodes());
            }
        }

        #[test]
        fn zone_count_bounds_hold_on_arbitrary_walks() {
            let mut rng = ChaCha8Rng::seed_from_u64(59);
            for _ in 0..200 {
                let n = rng.random_range(2..=8);
                let ptn = random_connected_ptn(&mut rng, n);
                let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let partition = ZonePartition::new(&labels).unwrap();
                let path = random_walk(&mut rng, &ptn);
                let multiple = zone_count(&partition, CountingMode::Multiple, &path).unwrap();
                let single = zone_count(&partition, CountingMode::Single, &path).unwrap();
                assert!(single <= multiple);
                assert!(multiple <= path.nodes().len());
                assert!(single <= partition.zone_count());
                // Single-edge paths always agree.
                let (a, b) = (path.nodes()[0], path.nodes()[1]);
                let edge = Path::new(&ptn, vec![a, b]).unwrap();
                assert_eq!(
                    zone_count(&partition, CountingMode::Multiple, &edge).unwrap(),
                    zone_count(&partition, CountingMode::Single, &edge).unwrap()
                );
            }
        }

        #[test]
        fn single_stopover_condition_implies_multiple() {
            let mut rng = ChaCha8Rng::seed_from_u64(61);
            for _ in 0..500 {
                let k = rng.random_range(1..=7);
                let prices: Vec<f64> = (0..k).map(|_| rng.random_range(0..=10) as f64 / 2.0).collect();
                let prices = PriceList::new(prices).unwrap();
                if check_no_stopover_condition(&prices, CountingMode::Single) {
                    assert!(
                        check_no_stopover_condition(&prices, CountingMode::Multiple),
                        "prices {:?}",
                        prices.prices()
                    );
                }
            }
        }
    }

    #[test]
    fn relabeling_does_not_change_objective() {
        let ptn = line3();
        let demand = vec![
            OdPair::new(&ptn, 0, 2, 2, 1.5, None).unwrap(),
            OdPair::new(&ptn, 1, 2, 1, 1.0, None).unwrap(),
        ];
        let prices = PriceList::new(vec![1.0, 2.0, 3.0]).unwrap();
        let a = Tariff::Zone {
            partition: ZonePartition::new(&[5, 9, 5]).unwrap(),
            mode: CountingMode::Single,
            prices: prices.clone(),
        };
        let b = Tariff::Zone {
            partition: ZonePartition::new(&[1, 0, 1]).unwrap(),
            mode: CountingMode::Single,
            prices,
        };
        assert_eq!(
            objective(&ptn, &a, &demand).unwrap(),
            objective(&ptn, &b, &demand).unwrap()
        );
    }
}
