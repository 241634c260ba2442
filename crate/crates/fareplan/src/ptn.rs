//! Public transport network, paths and origin-destination demand.
//!
//! The network is an undirected, connected, simple graph with strictly
//! positive edge lengths and an optional planar embedding. Stations are
//! addressed by [`StationId`], their position in the name-sorted station
//! list; that order is the canonical order used everywhere for
//! deterministic tie-breaking.

use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, Result};

/// Index of a station in the canonical (name-sorted) station list.
pub type StationId = usize;

/// Undirected edge with canonical orientation `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: StationId,
    pub v: StationId,
    pub length: f64,
}

/// Public transport network.
#[derive(Debug, Clone)]
pub struct Ptn {
    names: Vec<String>,
    coords: Vec<Option<(f64, f64)>>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(StationId, f64)>>,
}

impl Ptn {
    /// Builds a network from station names and named edges.
    ///
    /// Station names are sorted to fix the canonical station order;
    /// duplicate names, loops, parallel edges, non-positive lengths and
    /// disconnected graphs are rejected.
    pub fn new(stations: Vec<String>, edges: Vec<(String, String, f64)>) -> Result<Self> {
        let mut names = stations;
        names.sort();
        if names.is_empty() {
            return Err(Error::invalid("network has no stations"));
        }
        if names.windows(2).any(|w| w[0] == w[1]) {
            let dup = names.windows(2).find(|w| w[0] == w[1]).unwrap();
            return Err(Error::invalid(format!("duplicate station id {:?}", dup[0])));
        }
        let index: BTreeMap<&str, StationId> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for (a, b, length) in &edges {
            let ia = *index
                .get(a.as_str())
                .ok_or_else(|| Error::invalid(format!("edge references unknown station {a:?}")))?;
            let ib = *index
                .get(b.as_str())
                .ok_or_else(|| Error::invalid(format!("edge references unknown station {b:?}")))?;
            if ia == ib {
                return Err(Error::invalid(format!("loop edge at station {a:?}")));
            }
            if !(length.is_finite() && *length > 0.0) {
                return Err(Error::invalid(format!("edge {a:?}-{b:?} has non-positive length {length}")));
            }
            let (u, v) = if ia < ib { (ia, ib) } else { (ib, ia) };
            if !seen.insert((u, v)) {
                return Err(Error::invalid(format!("parallel edge {a:?}-{b:?}")));
            }
            canonical.push(Edge { u, v, length: *length });
        }
        canonical.sort_by_key(|e| (e.u, e.v));

        let mut adjacency = vec![Vec::new(); names.len()];
        for e in &canonical {
            adjacency[e.u].push((e.v, e.length));
            adjacency[e.v].push((e.u, e.length));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by_key(|&(w, _)| w);
        }

        let ptn = Ptn { coords: vec![None; names.len()], names, edges: canonical, adjacency };
        if !ptn.is_connected_set((0..ptn.station_count()).collect()) {
            return Err(Error::invalid("network is not connected"));
        }
        Ok(ptn)
    }

    /// Convenience constructor over string literals.
    pub fn from_edges(stations: &[&str], edges: &[(&str, &str, f64)]) -> Result<Self> {
        Ptn::new(
            stations.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|(a, b, l)| (a.to_string(), b.to_string(), *l)).collect(),
        )
    }

    /// Line network `v1 - v2 - ... - vn` with unit edge lengths.
    pub fn line(n: usize) -> Self {
        let stations: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let edges = (1..n).map(|i| (format!("v{i}"), format!("v{}", i + 1), 1.0)).collect();
        Ptn::new(stations, edges).expect("line network is valid")
    }

    pub fn set_coord(&mut self, station: &str, x: f64, y: f64) -> Result<()> {
        let id = self
            .station_id(station)
            .ok_or_else(|| Error::invalid(format!("unknown station {station:?}")))?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinates for {station:?}")));
        }
        self.coords[id] = Some((x, y));
        Ok(())
    }

    pub fn station_count(&self) -> usize {
        self.names.len()
    }

    pub fn station_name(&self, id: StationId) -> &str {
        &self.names[id]
    }

    pub fn station_names(&self) -> &[String] {
        &self.names
    }

    pub fn station_id(&self, name: &str) -> Option<StationId> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn coord(&self, id: StationId) -> Option<(f64, f64)> {
        self.coords[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `station` with edge lengths, ascending by station id.
    pub fn neighbors(&self, station: StationId) -> &[(StationId, f64)] {
        &self.adjacency[station]
    }

    pub fn edge_length(&self, a: StationId, b: StationId) -> Option<f64> {
        self.adjacency[a].iter().find(|&&(w, _)| w == b).map(|&(_, l)| l)
    }

    /// Position of the canonical edge `{a, b}` in [`Ptn::edges`].
    pub fn edge_index(&self, a: StationId, b: StationId) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search_by(|e| (e.u, e.v).cmp(&key)).ok()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.names.len()
    }

    /// Whether the subgraph induced by `set` is connected. Empty sets and
    /// singletons count as connected.
    pub fn is_connected_set(&self, set: BTreeSet<StationId>) -> bool {
        let mut iter = set.iter();
        let start = match iter.next() {
            Some(&s) => s,
            None => return true,
        };
        let mut seen = BTreeSet::new();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &(w, _) in self.neighbors(u) {
                if set.contains(&w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == set.len()
    }
}

/// A path, stored as its node sequence (at least two nodes, consecutive
/// nodes adjacent). The simple graph makes the node sequence identify the
/// path completely. Node and edge repetitions are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    nodes: Vec<StationId>,
}

impl Path {
    pub fn new(ptn: &Ptn, nodes: Vec<StationId>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("path needs at least two nodes"));
        }
        for &n in &nodes {
            if n >= ptn.station_count() {
                return Err(Error::invalid(format!("path references unknown station index {n}")));
            }
        }
        for w in nodes.windows(2) {
            if ptn.edge_length(w[0], w[1]).is_none() {
                return Err(Error::invalid(format!(
                    "path nodes {:?} and {:?} are not adjacent",
                    ptn.station_name(w[0]),
                    ptn.station_name(w[1])
                )));
            }
        }
        Ok(Path { nodes })
    }

    pub fn nodes(&self) -> &[StationId] {
        &self.nodes
    }

    pub fn origin(&self) -> StationId {
        self.nodes[0]
    }

    pub fn destination(&self) -> StationId {
        *self.nodes.last().unwrap()
    }

    /// Consecutive node pairs along the path.
    pub fn steps(&self) -> impl Iterator<Item = (StationId, StationId)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Origin-destination demand entry: passenger count, reference price and
/// the fixed path traveled.
#[derive(Debug, Clone)]
pub struct OdPair {
    pub origin: StationId,
    pub destination: StationId,
    pub passengers: u64,
    pub reference_price: f64,
    pub path: Path,
}

impl OdPair {
    /// Validates an OD pair; with `path == None` the time-shortest path is
    /// synthesized by [`shortest_path`].
    pub fn new(
        ptn: &Ptn,
        origin: StationId,
        destination: StationId,
        passengers: u64,
        reference_price: f64,
        path: Option<Path>,
    ) -> Result<Self> {
        if origin == destination {
            return Err(Error::invalid("OD pair origin equals destination"));
        }
        if passengers == 0 {
            return Err(Error::invalid("OD pair needs at least one passenger"));
        }
        if !(reference_price.is_finite() && reference_price >= 0.0) {
            return Err(Error::invalid(format!("reference price {reference_price} is not a nonnegative real")));
        }
        let path = match path {
            Some(p) => {
                if p.origin() != origin || p.destination() != destination {
                    return Err(Error::invalid("path endpoints do not match the OD pair"));
                }
                p
            }
            None => shortest_path(ptn, origin, destination)?,
        };
        Ok(OdPair { origin, destination, passengers, reference_price, path })
    }
}

/// Shortest path by total edge length, ties broken by the
/// lexicographically smallest node sequence.
pub fn shortest_path(ptn: &Ptn, origin: StationId, destination: StationId) -> Result<Path> {
    let n = ptn.station_count();
    if origin >= n || destination >= n {
        return Err(Error::invalid("shortest path endpoints must be stations of the network"));
    }
    if origin == destination {
        return Err(Error::invalid("shortest path endpoints must differ"));
    }

    // Distance-to-destination labels via Dijkstra.
    let mut dist = vec![f64::INFINITY; n];
    dist[destination] = 0.0;
    let mut done = vec![false; n];
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((ordered(0.0), destination)));
    while let Some(std::cmp::Reverse((_, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(w, len) in ptn.neighbors(u) {
            let cand = len + dist[u];
            if cand < dist[w] {
                dist[w] = cand;
                heap.push(std::cmp::Reverse((ordered(cand), w)));
            }
        }
    }

    // Walk greedily towards the destination. Choosing the smallest
    // neighbor among exact minimizers of `len + dist` yields the
    // lexicographically smallest shortest node sequence; the labels were
    // built from the same float additions, so the comparison is exact.
    let mut nodes = vec![origin];
    let mut at = origin;
    while at != destination {
        let mut best: Option<(f64, StationId)> = None;
        for &(w, len) in ptn.neighbors(at) {
            let key = len + dist[w];
            match best {
                Some((k, _)) if key >= k => {}
                _ => best = Some((key, w)),
            }
        }
        let (_, next) = best.expect("connected network always has a next hop");
        nodes.push(next);
        at = next;
    }
    Path::new(ptn, nodes)
}

fn ordered(x: f64) -> u64 {
    // Total order for nonnegative finite floats.
    x.to_bits()
}
