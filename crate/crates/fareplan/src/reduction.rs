//! Hard-instance generators for the zone tariff design problem.
//!
//! Two graph constructions turn classic NP-complete problems into zone
//! design instances: maximum bipartite subgraph becomes a two-zone design
//! problem with arbitrary zones, and multicut on a star becomes a
//! connected-zones design problem on a tree. The generators emit
//! ordinary instances plus the decision threshold `J`; deciding
//! `optimum <= J` answers the source problem.

use crate::ptn::{OdPair, Ptn, shortest_path};
use crate::tariff::CountingMode;
use crate::zone_design::DesignConfig;
use crate::{Error, Result};

/// Plain undirected simple graph used as generator input.
#[derive(Debug, Clone)]
pub struct SourceGraph {
    nodes: Vec<String>,
    /// Indices into `nodes`, canonical `u < v`, sorted.
    edges: Vec<(usize, usize)>,
}

impl SourceGraph {
    pub fn new(nodes: Vec<String>, edges: Vec<(String, String)>) -> Result<Self> {
        let mut names = nodes;
        names.sort();
        if names.is_empty() {
            return Err(Error::invalid("source graph has no nodes"));
        }
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate node in source graph"));
        }
        let index = |name: &str| {
            names
                .binary_search_by(|n| n.as_str().cmp(name))
                .map_err(|_| Error::invalid(format!("edge references unknown node {name:?}")))
        };
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (a, b) in &edges {
            let (ia, ib) = (index(a)?, index(b)?);
            if ia == ib {
                return Err(Error::invalid(format!("loop edge at {a:?}")));
            }
            idx_edges.push((ia.min(ib), ia.max(ib)));
        }
        idx_edges.sort_unstable();
        if idx_edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("parallel edge in source graph"));
        }
        Ok(SourceGraph { nodes: names, edges: idx_edges })
    }

    pub fn from_edges(nodes: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        SourceGraph::new(
            nodes.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        )
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    fn is_connected(&self) -> bool {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == u && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Center of a star graph: the node incident to every edge.
    fn star_center(&self) -> Option<usize> {
        if self.edges.len() + 1 != self.nodes.len() || self.edges.is_empty() {
            return None;
        }
        (0..self.nodes.len()).find(|&v| self.degree(v) == self.edges.len())
    }
}

/// A generated hard instance with its decision threshold.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub ptn: Ptn,
    pub demand: Vec<OdPair>,
    pub config: DesignConfig,
    /// The design optimum is `<= threshold` iff the source instance is a
    /// yes-instance.
    pub threshold: f64,
}

fn fresh_name(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|t| t == &name) {
        name.push('_');
    }
    name
}

/// Builds the two-zone instance encoding maximum bipartite subgraph:
/// does `graph` have a bipartite subgraph with at least `q_prime` edges?
///
/// Two fresh stations are tied to an anchor node by heavy demand so any
/// good solution separates them from the anchor; the remaining objective
/// counts the non-cut edges of the induced bipartition. Both counting
/// modes coincide here (every path is a single edge); the instance is
/// emitted with multiple counting. The source graph must be connected so
/// the result is a valid network.
pub fn generate_bipartite_reduction(graph: &SourceGraph, q_prime: usize) -> Result<ReductionInstance> {
    if q_prime == 0 || q_prime > graph.edge_count() {
        return Err(Error::invalid("q_prime must lie in 1..=edge count"));
    }
    if !graph.is_connected() {
        return Err(Error::invalid("source graph must be connected to form a network"));
    }

    let x1 = fresh_name("x1", graph.node_names());
    let x2 = fresh_name("x2", graph.node_names());
    let anchor = graph.node_names()[0].clone();

    let mut stations: Vec<String> = graph.node_names().to_vec();
    stations.push(x1.clone());
    stations.push(x2.clone());

    let mut edges: Vec<(String, String, f64)> = graph
        .edges()
        .iter()
        .map(|&(a, b)| (graph.node_names()[a].clone(), graph.node_names()[b].clone(), 1.0))
        .collect();
    edges.push((anchor.clone(), x1.clone(), 1.0));
    edges.push((anchor.clone(), x2.clone(), 1.0));
    edges.push((x1.clone(), x2.clone(), 1.0));

    let ptn = Ptn::new(stations, edges.clone())?;
    let heavy = graph.edge_count() as u64 + 1;
    let mut demand = Vec::with_capacity(edges.len());
    for (a, b, _) in &edges {
        let heavy_edge = (a == &anchor && (b == &x1 || b == &x2)) || (a == &x1 && b == &x2);
        let reference = if a == &x1 && b == &x2 { 1.0 } else { 2.0 };
        let passengers = if heavy_edge { heavy } else { 1 };
        let (u, v) = (ptn.station_id(a).unwrap(), ptn.station_id(b).unwrap());
        demand.push(OdPair::new(&ptn, u, v, passengers, reference, None)?);
    }

    Ok(ReductionInstance {
        ptn,
        demand,
        config: DesignConfig::new(CountingMode::Multiple, false, 2),
        threshold: (graph.edge_count() - q_prime) as f64,
    })
}

/// Builds the connected-zones instance encoding multicut on a star with
/// unit weights: can `budget` edge deletions separate every
/// source-terminal pair?
///
/// A path of `budget + 1` fresh stations hangs off the star center; its
/// edges demand price 1 while the terminal pairs demand price 2, and the
/// zone budget `budget + 1` makes the cut edges of a solution exactly a
/// multicut. The tree structure makes both counting modes coincide; the
/// instance is emitted with multiple counting and `J = 0`.
pub fn generate_multicut_reduction(
    star: &SourceGraph,
    terminal_pairs: &[(String, String)],
    budget: usize,
) -> Result<ReductionInstance> {
    let center = star
        .star_center()
        .ok_or_else(|| Error::invalid("multicut reduction needs a star graph"))?;
    if terminal_pairs.is_empty() {
        return Err(Error::invalid("multicut reduction needs terminal pairs"));
    }
    if budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    if budget >= star.edge_count() {
        return Err(Error::invalid("budget must be smaller than the star's edge count"));
    }

    let mut stations: Vec<String> = star.node_names().to_vec();
    let mut path_names = Vec::with_capacity(budget + 1);
    for j in 1..=budget + 1 {
        let name = fresh_name(&format!("x{j}"), &stations);
        stations.push(name.clone());
        path_names.push(name);
    }

    let mut edges: Vec<(String, String, f64)> = star
        .edges()
        .iter()
        .map(|&(a, b)| (star.node_names()[a].clone(), star.node_names()[b].clone(), 1.0))
        .collect();
    let mut prev = star.node_names()[center].clone();
    for name in &path_names {
        edges.push((prev.clone(), name.clone(), 1.0));
        prev = name.clone();
    }

    let ptn = Ptn::new(stations, edges)?;
    let mut demand = Vec::new();
    for (i, (a, b)) in terminal_pairs.iter().enumerate() {
        let u = ptn
            .station_id(a)
            .filter(|_| star.node_id(a).is_some())
            .ok_or_else(|| Error::invalid(format!("terminal pair {} references unknown node {a:?}", i + 1)))?;
        let v = ptn
            .station_id(b)
            .filter(|_| star.node_id(b).is_some())
            .ok_or_else(|| Error::invalid(format!("terminal pair {} references unknown node {b:?}", i + 1)))?;
        if u == v {
            return Err(Error::invalid(format!("terminal pair {} has equal endpoints", i + 1)));
        }
        let path = shortest_path(&ptn, u, v)?; // unique simple path in a tree
        demand.push(OdPair::new(&ptn, u, v, 1, 2.0, Some(path))?);
    }
    let mut prev = star.node_names()[center].clone();
    for name in &path_names {
        let u = ptn.station_id(&prev).unwrap();
        let v = ptn.station_id(name).unwrap();
        demand.push(OdPair::new(&ptn, u, v, 1, 1.0, None)?);
        prev = name.clone();
    }

    Ok(ReductionInstance {
        ptn,
        demand,
        config: DesignConfig::new(CountingMode::Multiple, true, budget + 1),
        threshold: 0.0,
    })
}
