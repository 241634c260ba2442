//! MILP formulation of the zone tariff design problem, LP-file export and
//! a semantic validator for candidate solutions.
//!
//! The model follows the modular block structure: objective
//! linearization, station assignment, an optional single-commodity flow
//! block forcing connected zones, a counting block per mode, big-M price
//! assignment and optional property rows. Big-M constants are `|V|` for
//! flow and counting and `max r_d` for price assignment; price variables
//! additionally carry the upper bound `max r_d`, which some optimal
//! solution always satisfies. Flow variables exist only for network
//! edges and the artificial source, which realizes the zero-flow rows
//! for non-edges by omission.
//!
//! The model is exported, not solved: integer solving is out of scope.

#![allow(clippy::needless_range_loop)] // index loops mirror the row/column indexing

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::lp::Relation;
use crate::ptn::{OdPair, Ptn, StationId};
use crate::tariff::{zone_count, CountingMode, PriceList, ZonePartition};
use crate::zone_design::DesignConfig;
use crate::{Error, Result};

/// Feasibility tolerance when validating assignments.
const CHECK_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone)]
pub struct MilpVar {
    pub name: String,
    pub kind: VarKind,
    /// `None` is unbounded below. Binaries ignore bounds.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Constraint blocks of the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowGroup {
    ObjectiveLink,
    StationAssignment,
    ConnectivityFlow,
    Counting,
    PriceAssignment,
    NoElongation,
    NoStopover,
}

#[derive(Debug, Clone)]
pub struct MilpRow {
    pub name: String,
    pub group: RowGroup,
    /// `(variable index, coefficient)`, coefficient-accumulated.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// The assembled model plus the index tables needed to interpret it.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub config: DesignConfig,
    pub vars: Vec<MilpVar>,
    pub rows: Vec<MilpRow>,
    /// Minimization objective as `(variable index, coefficient)`.
    pub objective: Vec<(usize, f64)>,
    /// Price list length `K`.
    pub k_max: usize,
    /// Largest reference price, the price big-M.
    pub r_bar: f64,
    station_count: usize,
    demand_count: usize,
    idx_x: Vec<Vec<usize>>,
    idx_s: Vec<usize>,
    idx_f_source: Vec<usize>,
    /// Per canonical edge: forward `f_u_v` and reverse `f_v_u`.
    idx_f_edge: Vec<(usize, usize)>,
    idx_b_edge: Vec<usize>,
    idx_b_dz: Vec<Vec<usize>>,
    idx_c: Vec<Vec<usize>>,
    idx_p: Vec<usize>,
    idx_pi: Vec<usize>,
    idx_y: Vec<usize>,
}

/// Closed-form row counts per block for the given dimensions; tests pin
/// the emitted model against these.
pub fn expected_row_counts(
    stations: usize,
    edges: usize,
    demand: usize,
    max_zones: usize,
    k_max: usize,
    config: &DesignConfig,
) -> BTreeMap<RowGroup, usize> {
    let mut counts = BTreeMap::new();
    counts.insert(RowGroup::ObjectiveLink, 2 * demand);
    counts.insert(RowGroup::StationAssignment, stations);
    if config.connected {
        counts.insert(
            RowGroup::ConnectivityFlow,
            stations + max_zones * stations * (stations - 1) / 2 + 2 * edges * max_zones + stations,
        );
    }
    counts.insert(
        RowGroup::Counting,
        match config.mode {
            CountingMode::Multiple => 2 * edges * max_zones + 2 * demand,
            CountingMode::Single => 2 * demand * max_zones + 2 * demand,
        },
    );
    counts.insert(RowGroup::PriceAssignment, 2 * demand * k_max);
    if config.require_no_elongation {
        counts.insert(RowGroup::NoElongation, k_max.saturating_sub(1));
    }
    if config.require_no_stopover {
        counts.insert(RowGroup::NoStopover, stopover_row_count(config.mode, k_max));
    }
    counts
}

/// Number of no-stopover rows under the reduced index ranges.
pub fn stopover_row_count(mode: CountingMode, k_max: usize) -> usize {
    let mut count = 0;
    match mode {
        CountingMode::Multiple => {
            for k in 3..=k_max {
                count += k.div_ceil(2) - 1;
            }
        }
        CountingMode::Single => {
            for k in 3..=k_max {
                for i1 in (k + 1).div_ceil(2)..=k {
                    count += i1 - (k + 1 - i1) + 1;
                }
            }
        }
    }
    count
}

/// Builds the MILP for the instance and configuration.
pub fn build_milp(ptn: &Ptn, demand: &[OdPair], config: &DesignConfig) -> Result<MilpModel> {
    if demand.is_empty() {
        return Err(Error::invalid("MILP export needs demand"));
    }
    if config.max_zones == 0 || config.max_zones > ptn.station_count() {
        return Err(Error::invalid("max_zones must lie in 1..=station count"));
    }
    let v_count = ptn.station_count();
    let d_count = demand.len();
    let n_zones = config.max_zones;
    let big_m = v_count as f64;
    let r_bar = demand.iter().map(|d| d.reference_price).fold(0.0, f64::max);
    let longest_path = demand.iter().map(|d| d.path.nodes().len()).max().unwrap();
    let k_max = match config.mode {
        CountingMode::Multiple => longest_path,
        CountingMode::Single => longest_path.min(n_zones),
    };

    let mut vars: Vec<MilpVar> = Vec::new();
    let mut add_var = |name: String, kind: VarKind, lower: Option<f64>, upper: Option<f64>| -> usize {
        vars.push(MilpVar { name, kind, lower, upper });
        vars.len() - 1
    };

    // Station/zone/OD/level indices are 1-based in names; 0 is the flow source.
    let idx_x: Vec<Vec<usize>> = (0..v_count)
        .map(|v| {
            (0..n_zones)
                .map(|z| add_var(format!("x_{}_{}", v + 1, z + 1), VarKind::Binary, None, None))
                .collect()
        })
        .collect();

    let (idx_s, idx_f_source, idx_f_edge) = if config.connected {
        let s = (0..v_count)
            .map(|v| add_var(format!("s_{}", v + 1), VarKind::Binary, None, None))
            .collect();
        let f0 = (0..v_count)
            .map(|v| add_var(format!("f_0_{}", v + 1), VarKind::Continuous, Some(0.0), None))
            .collect();
        let fe = ptn
            .edges()
            .iter()
            .map(|e| {
                let fwd = add_var(format!("f_{}_{}", e.u + 1, e.v + 1), VarKind::Continuous, Some(0.0), None);
                let rev = add_var(format!("f_{}_{}", e.v + 1, e.u + 1), VarKind::Continuous, Some(0.0), None);
                (fwd, rev)
            })
            .collect();
        (s, f0, fe)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    let (idx_b_edge, idx_b_dz): (Vec<usize>, Vec<Vec<usize>>) = match config.mode {
        CountingMode::Multiple => {
            let b = ptn
                .edges()
                .iter()
                .map(|e| add_var(format!("b_e_{}_{}", e.u + 1, e.v + 1), VarKind::Binary, None, None))
                .collect();
            (b, Vec::new())
        }
        CountingMode::Single => {
            let b = (0..d_count)
                .map(|d| {
                    (0..n_zones)
                        .map(|z| add_var(format!("bd_{}_{}", d + 1, z + 1), VarKind::Binary, None, None))
                        .collect()
                })
                .collect();
            (Vec::new(), b)
        }
    };

    let idx_c: Vec<Vec<usize>> = (0..d_count)
        .map(|d| {
            (0..k_max)
                .map(|k| add_var(format!("c_{}_{}", d + 1, k + 1), VarKind::Binary, None, None))
                .collect()
        })
        .collect();
    let idx_p: Vec<usize> =
        (0..k_max).map(|k| add_var(format!("p_{}", k + 1), VarKind::Continuous, Some(0.0), Some(r_bar))).collect();
    let idx_pi: Vec<usize> =
        (0..d_count).map(|d| add_var(format!("pi_{}", d + 1), VarKind::Continuous, None, None)).collect();
    let idx_y: Vec<usize> =
        (0..d_count).map(|d| add_var(format!("y_{}", d + 1), VarKind::Continuous, None, None)).collect();

    let objective: Vec<(usize, f64)> =
        demand.iter().enumerate().map(|(d, od)| (idx_y[d], od.passengers as f64)).collect();

    let mut rows: Vec<MilpRow> = Vec::new();
    let mut add_row =
        |name: String, group: RowGroup, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64| {
            let mut acc: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
            for (var, coeff) in terms {
                match acc.iter_mut().find(|(v, _)| *v == var) {
                    Some((_, c)) => *c += coeff,
                    None => acc.push((var, coeff)),
                }
            }
            acc.retain(|&(_, c)| c != 0.0);
            acc.sort_by_key(|&(v, _)| v);
            rows.push(MilpRow { name, group, terms: acc, relation, rhs });
        };

    // Objective linearization: pi_d - r_d <= y_d and r_d - pi_d <= y_d.
    for (d, od) in demand.iter().enumerate() {
        add_row(
            format!("dev_pos_{}", d + 1),
            RowGroup::ObjectiveLink,
            vec![(idx_pi[d], 1.0), (idx_y[d], -1.0)],
            Relation::Le,
            od.reference_price,
        );
        add_row(
            format!("dev_neg_{}", d + 1),
            RowGroup::ObjectiveLink,
            vec![(idx_pi[d], -1.0), (idx_y[d], -1.0)],
            Relation::Le,
            -od.reference_price,
        );
    }

    // Each station sits in exactly one zone.
    for v in 0..v_count {
        add_row(
            format!("assign_{}", v + 1),
            RowGroup::StationAssignment,
            (0..n_zones).map(|z| (idx_x[v][z], 1.0)).collect(),
            Relation::Eq,
            1.0,
        );
    }

    if config.connected {
        // Source flow only into stations marked as zone roots.
        for v in 0..v_count {
            add_row(
                format!("src_cap_{}", v + 1),
                RowGroup::ConnectivityFlow,
                vec![(idx_f_source[v], 1.0), (idx_s[v], -big_m)],
                Relation::Le,
                0.0,
            );
        }
        // At most one root per zone.
        for v1 in 0..v_count {
            for v2 in v1 + 1..v_count {
                for z in 0..n_zones {
                    add_row(
                        format!("src_zone_{}_{}_{}", v1 + 1, v2 + 1, z + 1),
                        RowGroup::ConnectivityFlow,
                        vec![(idx_s[v1], 1.0), (idx_s[v2], 1.0), (idx_x[v1][z], 1.0), (idx_x[v2][z], 1.0)],
                        Relation::Le,
                        3.0,
                    );
                }
            }
        }
        // Edge flow only inside a zone, in both directions.
        for (e, edge) in ptn.edges().iter().enumerate() {
            let (fwd, rev) = idx_f_edge[e];
            for z in 0..n_zones {
                add_row(
                    format!("flow_cap_{}_{}_{}", edge.u + 1, edge.v + 1, z + 1),
                    RowGroup::ConnectivityFlow,
                    vec![(fwd, 1.0), (idx_x[edge.u][z], -big_m), (idx_x[edge.v][z], big_m)],
                    Relation::Le,
                    big_m,
                );
                add_row(
                    format!("flow_cap_{}_{}_{}", edge.v + 1, edge.u + 1, z + 1),
                    RowGroup::ConnectivityFlow,
                    vec![(rev, 1.0), (idx_x[edge.v][z], -big_m), (idx_x[edge.u][z], big_m)],
                    Relation::Le,
                    big_m,
                );
            }
        }
        // Every station consumes one unit.
        for v in 0..v_count {
            let mut terms = vec![(idx_f_source[v], 1.0)];
            for (e, edge) in ptn.edges().iter().enumerate() {
                let (fwd, rev) = idx_f_edge[e];
                if edge.u == v {
                    terms.push((rev, 1.0));
                    terms.push((fwd, -1.0));
                } else if edge.v == v {
                    terms.push((fwd, 1.0));
                    terms.push((rev, -1.0));
                }
            }
            add_row(format!("flow_bal_{}", v + 1), RowGroup::ConnectivityFlow, terms, Relation::Eq, 1.0);
        }
    }

    match config.mode {
        CountingMode::Multiple => {
            for (e, edge) in ptn.edges().iter().enumerate() {
                for z in 0..n_zones {
                    add_row(
                        format!("border_lo_{}_{}_{}", edge.u + 1, edge.v + 1, z + 1),
                        RowGroup::Counting,
                        vec![(idx_x[edge.u][z], 1.0), (idx_x[edge.v][z], -1.0), (idx_b_edge[e], -1.0)],
                        Relation::Le,
                        0.0,
                    );
                    add_row(
                        format!("border_up_{}_{}_{}", edge.u + 1, edge.v + 1, z + 1),
                        RowGroup::Counting,
                        vec![(idx_b_edge[e], 1.0), (idx_x[edge.u][z], 1.0), (idx_x[edge.v][z], 1.0)],
                        Relation::Le,
                        2.0,
                    );
                }
            }
            for (d, od) in demand.iter().enumerate() {
                add_row(
                    format!("count_one_{}", d + 1),
                    RowGroup::Counting,
                    (0..k_max).map(|k| (idx_c[d][k], 1.0)).collect(),
                    Relation::Eq,
                    1.0,
                );
                // Border crossings along the path, per traversal step, equal
                // the traversed-zones level minus one.
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for (a, b) in od.path.steps() {
                    let e = ptn.edge_index(a, b).expect("path steps are edges");
                    terms.push((idx_b_edge[e], 1.0));
                }
                for k in 0..k_max {
                    terms.push((idx_c[d][k], -(k as f64)));
                }
                add_row(format!("count_sum_{}", d + 1), RowGroup::Counting, terms, Relation::Eq, 0.0);
            }
        }
        CountingMode::Single => {
            for (d, od) in demand.iter().enumerate() {
                let mut nodes: Vec<StationId> = od.path.nodes().to_vec();
                nodes.sort_unstable();
                nodes.dedup();
                for z in 0..n_zones {
                    add_row(
                        format!("touch_up_{}_{}", d + 1, z + 1),
                        RowGroup::Counting,
                        nodes
                            .iter()
                            .map(|&v| (idx_x[v][z], 1.0))
                            .chain([(idx_b_dz[d][z], -big_m)])
                            .collect(),
                        Relation::Le,
                        0.0,
                    );
                    add_row(
                        format!("touch_lo_{}_{}", d + 1, z + 1),
                        RowGroup::Counting,
                        nodes
                            .iter()
                            .map(|&v| (idx_x[v][z], -1.0))
                            .chain([(idx_b_dz[d][z], 1.0)])
                            .collect(),
                        Relation::Le,
                        0.0,
                    );
                }
            }
            for d in 0..d_count {
                add_row(
                    format!("count_one_{}", d + 1),
                    RowGroup::Counting,
                    (0..k_max).map(|k| (idx_c[d][k], 1.0)).collect(),
                    Relation::Eq,
                    1.0,
                );
                let mut terms: Vec<(usize, f64)> =
                    (0..n_zones).map(|z| (idx_b_dz[d][z], 1.0)).collect();
                for k in 0..k_max {
                    terms.push((idx_c[d][k], -((k + 1) as f64)));
                }
                add_row(format!("count_sum_{}", d + 1), RowGroup::Counting, terms, Relation::Eq, 0.0);
            }
        }
    }

    // Big-M price assignment: c_d_k = 1 pins pi_d to p_k.
    for d in 0..d_count {
        for k in 0..k_max {
            add_row(
                format!("price_up_{}_{}", d + 1, k + 1),
                RowGroup::PriceAssignment,
                vec![(idx_pi[d], 1.0), (idx_p[k], -1.0), (idx_c[d][k], r_bar)],
                Relation::Le,
                r_bar,
            );
            add_row(
                format!("price_lo_{}_{}", d + 1, k + 1),
                RowGroup::PriceAssignment,
                vec![(idx_p[k], 1.0), (idx_pi[d], -1.0), (idx_c[d][k], r_bar)],
                Relation::Le,
                r_bar,
            );
        }
    }

    if config.require_no_elongation {
        for k in 0..k_max.saturating_sub(1) {
            add_row(
                format!("mono_{}", k + 1),
                RowGroup::NoElongation,
                vec![(idx_p[k], 1.0), (idx_p[k + 1], -1.0)],
                Relation::Le,
                0.0,
            );
        }
    }

    if config.require_no_stopover {
        match config.mode {
            CountingMode::Multiple => {
                for k in 3..=k_max {
                    for i in 2..=k.div_ceil(2) {
                        add_row(
                            format!("stopover_{}_{}", k, i),
                            RowGroup::NoStopover,
                            vec![(idx_p[k - 1], 1.0), (idx_p[i - 1], -1.0), (idx_p[k - i], -1.0)],
                            Relation::Le,
                            0.0,
                        );
                    }
                }
            }
            CountingMode::Single => {
                for k in 3..=k_max {
                    for i1 in (k + 1).div_ceil(2)..=k {
                        for i2 in k + 1 - i1..=i1 {
                            add_row(
                                format!("stopover_{}_{}_{}", k, i1, i2),
                                RowGroup::NoStopover,
                                vec![(idx_p[k - 1], 1.0), (idx_p[i1 - 1], -1.0), (idx_p[i2 - 1], -1.0)],
                                Relation::Le,
                                0.0,
                            );
                        }
                    }
                }
            }
        }
    }

    Ok(MilpModel {
        config: *config,
        vars,
        rows,
        objective,
        k_max,
        r_bar,
        station_count: v_count,
        demand_count: d_count,
        idx_x,
        idx_s,
        idx_f_source,
        idx_f_edge,
        idx_b_edge,
        idx_b_dz,
        idx_c,
        idx_p,
        idx_pi,
        idx_y,
    })
}

impl MilpModel {
    pub fn row_count_by_group(&self) -> BTreeMap<RowGroup, usize> {
        let mut counts = BTreeMap::new();
        for row in &self.rows {
            *counts.entry(row.group).or_insert(0) += 1;
        }
        counts
    }

    pub fn binary_count(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }
}

/// One violated row, bound or integrality requirement.
#[derive(Debug, Clone)]
pub struct Violation {
    pub name: String,
    /// How far the requirement is missed.
    pub amount: f64,
}

/// Outcome of [`check_assignment`].
#[derive(Debug, Clone)]
pub struct AssignmentReport {
    pub feasible: bool,
    /// Objective of the constructed assignment, `sum t_d * y_d`.
    pub objective: f64,
    pub violations: Vec<Violation>,
}

/// Constructs the full variable assignment implied by `(partition,
/// prices)` for the model's instance — station binaries, a witness flow
/// per zone, counting variables, per-OD fares and deviations — then
/// evaluates every row, bound and integrality requirement. Violations
/// are reported, not thrown; the objective always equals the plain
/// deviation objective of the zone tariff.
pub fn check_assignment(
    model: &MilpModel,
    ptn: &Ptn,
    partition: &ZonePartition,
    prices: &PriceList,
    demand: &[OdPair],
) -> Result<AssignmentReport> {
    if demand.len() != model.demand_count {
        return Err(Error::invalid("demand does not match the model's OD pairs"));
    }
    if ptn.station_count() != model.station_count {
        return Err(Error::invalid("network does not match the model"));
    }
    if partition.station_count() != model.station_count {
        return Err(Error::invalid("partition does not cover the model's stations"));
    }
    let n_zones = model.config.max_zones;
    let mut values = vec![0.0; model.vars.len()];

    for v in 0..model.station_count {
        let z = partition.zone_of(v)?;
        if z < n_zones {
            values[model.idx_x[v][z]] = 1.0;
        }
    }

    if model.config.connected {
        // Witness flow: per zone a BFS tree from the smallest station,
        // pushing each station's one unit down from the root. Disconnected
        // zones leave their unreachable stations dry, which the balance
        // rows then report.
        for block in partition.blocks() {
            let root = block[0];
            values[model.idx_s[root]] = 1.0;
            let in_block: Vec<bool> = {
                let mut m = vec![false; model.station_count];
                for &v in &block {
                    m[v] = true;
                }
                m
            };
            let mut parent: Vec<Option<StationId>> = vec![None; model.station_count];
            let mut order = vec![root];
            let mut seen = vec![false; model.station_count];
            seen[root] = true;
            let mut head = 0;
            while head < order.len() {
                let u = order[head];
                head += 1;
                for &(w, _) in ptn.neighbors(u) {
                    if in_block[w] && !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(u);
                        order.push(w);
                    }
                }
            }
            values[model.idx_f_source[root]] = order.len() as f64;
            // Subtree sizes accumulate bottom-up along the BFS order.
            let mut subtree = vec![1.0; model.station_count];
            for &u in order.iter().skip(1).rev() {
                subtree[parent[u].unwrap()] += subtree[u];
            }
            for &u in order.iter().skip(1) {
                let p = parent[u].unwrap();
                let e = ptn.edge_index(p, u).expect("tree edges are network edges");
                let (fwd, rev) = model.idx_f_edge[e];
                let var = if ptn.edges()[e].u == p { fwd } else { rev };
                values[var] = subtree[u];
            }
        }
    }

    match model.config.mode {
        CountingMode::Multiple => {
            for (e, edge) in ptn.edges().iter().enumerate() {
                if partition.zone_of(edge.u)? != partition.zone_of(edge.v)? {
                    values[model.idx_b_edge[e]] = 1.0;
                }
            }
        }
        CountingMode::Single => {
            for (d, od) in demand.iter().enumerate() {
                for &v in od.path.nodes() {
                    let z = partition.zone_of(v)?;
                    if z < n_zones {
                        values[model.idx_b_dz[d][z]] = 1.0;
                    }
                }
            }
        }
    }

    for (d, od) in demand.iter().enumerate() {
        let k = zone_count(partition, model.config.mode, &od.path)?;
        if k <= model.k_max {
            values[model.idx_c[d][k - 1]] = 1.0;
        }
        let fare = prices.price(k);
        values[model.idx_pi[d]] = fare;
        values[model.idx_y[d]] = (od.reference_price - fare).abs();
    }
    for k in 0..model.k_max {
        values[model.idx_p[k]] = prices.price(k + 1);
    }

    let mut violations = Vec::new();
    for row in &model.rows {
        let lhs: f64 = row.terms.iter().map(|&(v, c)| c * values[v]).sum();
        let miss = match row.relation {
            Relation::Le => lhs - row.rhs,
            Relation::Ge => row.rhs - lhs,
            Relation::Eq => (lhs - row.rhs).abs(),
        };
        if miss > CHECK_EPS {
            violations.push(Violation { name: row.name.clone(), amount: miss });
        }
    }
    for (var, &value) in model.vars.iter().zip(&values) {
        match var.kind {
            VarKind::Binary => {
                if (value - value.round()).abs() > CHECK_EPS || !(-CHECK_EPS..=1.0 + CHECK_EPS).contains(&value) {
                    violations.push(Violation { name: format!("binary {}", var.name), amount: value });
                }
            }
            VarKind::Continuous => {
                if let Some(lo) = var.lower {
                    if value < lo - CHECK_EPS {
                        violations.push(Violation { name: format!("bound {}", var.name), amount: lo - value });
                    }
                }
                if let Some(up) = var.upper {
                    if value > up + CHECK_EPS {
                        violations.push(Violation { name: format!("bound {}", var.name), amount: value - up });
                    }
                }
            }
        }
    }

    let objective = demand
        .iter()
        .enumerate()
        .map(|(d, od)| od.passengers as f64 * values[model.idx_y[d]])
        .sum();
    Ok(AssignmentReport { feasible: violations.is_empty(), objective, violations })
}

/// Writes the model in the text LP file format: `Minimize` with a single
/// objective line, `Subject To` with one named row per line, `Bounds`,
/// `Binaries` and `End`. Numbers print in shortest round-trip form.
pub fn write_lp_file(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ zone tariff design {} ({} stations, {} OD pairs, N={}, K={})",
        model.config.variant(),
        model.station_count,
        model.demand_count,
        model.config.max_zones,
        model.k_max
    );
    out.push_str("Minimize\n obj:");
    for &(var, coeff) in &model.objective {
        push_term(&mut out, coeff, &model.vars[var].name);
    }
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        for &(var, coeff) in &row.terms {
            push_term(&mut out, coeff, &model.vars[var].name);
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {} {}", rel, row.rhs);
    }
    out.push_str("Bounds\n");
    for var in &model.vars {
        if var.kind == VarKind::Binary {
            continue;
        }
        match (var.lower, var.upper) {
            (Some(lo), Some(up)) => {
                let _ = writeln!(out, " {} <= {} <= {}", lo, var.name, up);
            }
            (Some(lo), None) => {
                if lo != 0.0 {
                    let _ = writeln!(out, " {} >= {}", var.name, lo);
                }
                // lower bound 0 is the LP-format default
            }
            (None, Some(up)) => {
                let _ = writeln!(out, " {} <= {}", var.name, up);
            }
            (None, None) => {
                let _ = writeln!(out, " {} free", var.name);
            }
        }
    }
    out.push_str("Binaries\n");
    let mut line = String::from(" ");
    for var in model.vars.iter().filter(|v| v.kind == VarKind::Binary) {
        if line.len() + var.name.len() > 78 {
            out.push_str(line.trim_end());
            out.push('\n');
            line = String::from(" ");
        }
        let _ = write!(line, "{} ", var.name);
    }
    if line.trim() != "" {
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

fn push_term(out: &mut String, coeff: f64, name: &str) {
    if coeff < 0.0 {
        let _ = write!(out, " - {} {}", -coeff, name);
    } else {
        let _ = write!(out, " + {} {}", coeff, name);
    }
}

/// An LP file read back into structured form.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLp {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<ParsedRow>,
    /// Explicit bounds only; absent means the format default `>= 0`.
    pub bounds: BTreeMap<String, (Option<f64>, Option<f64>)>,
    pub binaries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Parses the LP file dialect produced by [`write_lp_file`].
pub fn parse_lp_file(text: &str) -> Result<ParsedLp> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Bounds,
        Binaries,
        End,
    }
    let mut section = Section::Preamble;
    let mut parsed = ParsedLp {
        objective: Vec::new(),
        rows: Vec::new(),
        bounds: BTreeMap::new(),
        binaries: Vec::new(),
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let loc = || format!("lp line {}", lineno + 1);
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "minimize" | "min" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "binaries" | "binary" => {
                section = Section::Binaries;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble => {
                return Err(Error::schema(loc(), "expected a section keyword"));
            }
            Section::Objective => {
                let (_, terms) = split_label(line);
                parsed.objective.extend(parse_terms(terms, &loc)?);
            }
            Section::Rows => {
                let (label, rest) = split_label(line);
                let name = label
                    .ok_or_else(|| Error::schema(loc(), "constraint row without a name label"))?
                    .to_string();
                let (relation, split_at, rel_len) = find_relation(rest)
                    .ok_or_else(|| Error::schema(loc(), "constraint row without a relation"))?;
                let terms = parse_terms(&rest[..split_at], &loc)?;
                let rhs_text = rest[split_at + rel_len..].trim();
                let rhs = rhs_text
                    .parse::<f64>()
                    .map_err(|_| Error::schema(loc(), format!("bad right-hand side {rhs_text:?}")))?;
                parsed.rows.push(ParsedRow { name, terms, relation, rhs });
            }
            Section::Bounds => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                match tokens.as_slice() {
                    [var, "free"] => {
                        parsed.bounds.insert(var.to_string(), (None, None));
                    }
                    [lo, "<=", var, "<=", up] => {
                        let lo = lo.parse().map_err(|_| Error::schema(loc(), "bad lower bound"))?;
                        let up = up.parse().map_err(|_| Error::schema(loc(), "bad upper bound"))?;
                        parsed.bounds.insert(var.to_string(), (Some(lo), Some(up)));
                    }
                    [var, "<=", up] => {
                        let up = up.parse().map_err(|_| Error::schema(loc(), "bad upper bound"))?;
                        parsed.bounds.insert(var.to_string(), (None, Some(up)));
                    }
                    [var, ">=", lo] => {
                        let lo = lo.parse().map_err(|_| Error::schema(loc(), "bad lower bound"))?;
                        parsed.bounds.insert(var.to_string(), (Some(lo), None));
                    }
                    _ => return Err(Error::schema(loc(), "unrecognized bounds line")),
                }
            }
            Section::Binaries => {
                parsed.binaries.extend(line.split_whitespace().map(str::to_string));
            }
            Section::End => {
                return Err(Error::schema(loc(), "content after End"));
            }
        }
    }
    if section != Section::End {
        return Err(Error::Parse("lp file has no End marker".into()));
    }
    Ok(parsed)
}

fn split_label(line: &str) -> (Option<&str>, &str) {
    match line.split_once(':') {
        Some((label, rest)) => (Some(label.trim()), rest),
        None => (None, line),
    }
}

fn find_relation(text: &str) -> Option<(Relation, usize, usize)> {
    if let Some(i) = text.find("<=") {
        return Some((Relation::Le, i, 2));
    }
    if let Some(i) = text.find(">=") {
        return Some((Relation::Ge, i, 2));
    }
    text.find('=').map(|i| (Relation::Eq, i, 1))
}

fn parse_terms(text: &str, loc: &dyn Fn() -> String) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coeff: Option<f64> = None;
    for token in text.split_whitespace() {
        match token {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Ok(value) = token.parse::<f64>() {
                    if coeff.is_some() {
                        return Err(Error::schema(loc(), "two consecutive numbers in a term"));
                    }
                    coeff = Some(value);
                } else {
                    terms.push((token.to_string(), sign * coeff.take().unwrap_or(1.0)));
                    sign = 1.0;
                }
            }
        }
    }
    if coeff.is_some() {
        return Err(Error::schema(loc(), "dangling coefficient"));
    }
    Ok(terms)
}
