//! Affine distance tariff design.
//!
//! Fares of the form `rate * distance + base` with nonnegative rate and
//! base, fitted to reference prices in the L1 sense. A finite dominating
//! set makes the problem exactly solvable by enumeration: some optimum
//! meets two reference prices exactly, or meets one with `rate = 0` or
//! `base = 0`, or is the origin. [`affine_design_lp`] solves the same
//! problem through the LP subsolver as an independent route.

use crate::lp::{self, Bounds, LinearProgram, Relation};
use crate::ptn::{OdPair, Path, Ptn};
use crate::{Error, Result};

/// Which journey length an affine tariff prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    /// Sum of edge lengths along the traveled path.
    Network,
    /// Euclidean distance between origin and destination.
    Beeline,
}

impl DistanceMetric {
    pub fn label(self) -> &'static str {
        match self {
            DistanceMetric::Network => "network",
            DistanceMetric::Beeline => "beeline",
        }
    }
}

/// One OD pair projected to the distance-price plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePoint {
    pub distance: f64,
    pub reference_price: f64,
    pub passengers: u64,
}

impl DistancePoint {
    pub fn new(distance: f64, reference_price: f64, passengers: u64) -> Result<Self> {
        if !(distance.is_finite() && distance >= 0.0) {
            return Err(Error::invalid(format!("distance {distance} is not a nonnegative real")));
        }
        if !(reference_price.is_finite() && reference_price >= 0.0) {
            return Err(Error::invalid(format!("reference price {reference_price} is not a nonnegative real")));
        }
        if passengers == 0 {
            return Err(Error::invalid("distance point needs at least one passenger"));
        }
        Ok(DistancePoint { distance, reference_price, passengers })
    }

    /// Projects demand through [`path_distance`].
    pub fn from_demand(ptn: &Ptn, demand: &[OdPair], metric: DistanceMetric) -> Result<Vec<Self>> {
        demand
            .iter()
            .map(|od| DistancePoint::new(path_distance(ptn, &od.path, metric)?, od.reference_price, od.passengers))
            .collect()
    }
}

/// Optimal affine tariff parameters and objective value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineSolution {
    pub rate: f64,
    pub base: f64,
    pub objective: f64,
}

/// Length of a path under the metric: network sum of edge lengths or
/// beeline endpoint distance (which requires coordinates).
pub fn path_distance(ptn: &Ptn, path: &Path, metric: DistanceMetric) -> Result<f64> {
    match metric {
        DistanceMetric::Network => {
            let mut total = 0.0;
            for (a, b) in path.steps() {
                total += ptn
                    .edge_length(a, b)
                    .ok_or_else(|| Error::invalid("path step is not an edge of the network"))?;
            }
            Ok(total)
        }
        DistanceMetric::Beeline => {
            let need = |v| {
                ptn.coord(v).ok_or_else(|| {
                    Error::invalid(format!("station {:?} has no coordinates for beeline distance", ptn.station_name(v)))
                })
            };
            let (x1, y1) = need(path.origin())?;
            let (x2, y2) = need(path.destination())?;
            Ok(((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt())
        }
    }
}

/// Exact affine tariff design over the finite dominating set.
///
/// Candidates: lines through two points with distinct distances, the
/// vertical-axis candidates `(0, r_d)`, the horizontal-axis candidates
/// `(r_d / l_d, 0)` and the origin. Candidates leaving the nonnegative
/// quadrant are discarded; the axis and origin candidates cover that
/// boundary. Ties break towards the lexicographically smallest
/// `(rate, base)`.
pub fn affine_design(points: &[DistancePoint]) -> Result<AffineSolution> {
    if points.is_empty() {
        return Err(Error::invalid("affine design needs at least one point"));
    }

    // Deduplicate by (distance, price), accumulating passengers.
    let mut dedup: Vec<DistancePoint> = Vec::with_capacity(points.len());
    for p in points {
        match dedup
            .iter_mut()
            .find(|q| q.distance == p.distance && q.reference_price == p.reference_price)
        {
            Some(q) => q.passengers += p.passengers,
            None => dedup.push(*p),
        }
    }

    let cost = |rate: f64, base: f64| -> f64 {
        dedup
            .iter()
            .map(|p| p.passengers as f64 * (p.reference_price - (rate * p.distance + base)).abs())
            .sum()
    };

    let mut best: Option<AffineSolution> = None;
    let mut consider = |rate: f64, base: f64| {
        if rate < 0.0 || base < 0.0 {
            return;
        }
        let objective = cost(rate, base);
        let better = match &best {
            None => true,
            Some(b) => {
                (objective, rate, base) < (b.objective, b.rate, b.base)
            }
        };
        if better {
            best = Some(AffineSolution { rate, base, objective });
        }
    };

    consider(0.0, 0.0);
    for p in &dedup {
        consider(0.0, p.reference_price);
        if p.distance > 0.0 {
            consider(p.reference_price / p.distance, 0.0);
        }
    }
    for (i, a) in dedup.iter().enumerate() {
        for b in dedup.iter().skip(i + 1) {
            if a.distance == b.distance {
                continue;
            }
            let rate = (b.reference_price - a.reference_price) / (b.distance - a.distance);
            let base = a.reference_price - rate * a.distance;
            consider(rate, base);
        }
    }

    Ok(best.expect("candidate set always contains the origin"))
}

/// Affine tariff design through the LP subsolver. The optimal objective
/// agrees with [`affine_design`]; the reported `(rate, base)` pair may
/// differ when the optimum is not unique.
pub fn affine_design_lp(points: &[DistancePoint]) -> Result<AffineSolution> {
    if points.is_empty() {
        return Err(Error::invalid("affine design needs at least one point"));
    }
    // Variables: rate, base, then one deviation variable per point.
    let n = points.len();
    let mut prog = LinearProgram::new(2 + n);
    for (d, p) in points.iter().enumerate() {
        prog.minimize[2 + d] = p.passengers as f64;
        prog.bounds[2 + d] = Bounds::free();
        let l = p.distance;
        let r = p.reference_price;
        prog.add_sparse(&[(0, -l), (1, -1.0), (2 + d, -1.0)], Relation::Le, -r);
        prog.add_sparse(&[(0, l), (1, 1.0), (2 + d, -1.0)], Relation::Le, r);
    }
    let sol = lp::solve(&prog);
    let (values, objective) = sol.optimal()?;
    Ok(AffineSolution { rate: values[0], base: values[1], objective })
}
