//! Built-in instances with known optimal values.
//!
//! These small networks witness the separations between the zone design
//! variants (arbitrary vs. connected zones, multiple vs. single
//! counting), the value of allowing fewer zones than permitted, and the
//! reference solutions for the flat and affine designs. Each expectation
//! records its provenance: `Paper` values are published results,
//! `Derived` values were computed independently (by exhaustive search or
//! direct evaluation), `Trivial` values are immediate.

use crate::distance::DistanceMetric;
use crate::io::Instance;
use crate::median::MedianPick;
use crate::ptn::{OdPair, Path, Ptn};
use crate::tariff::CountingMode;
use crate::zone_design::DesignConfig;
use crate::zone_pricing::LevelledDemand;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Paper,
    Derived,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    Exact(f64),
    Positive,
}

#[derive(Debug, Clone)]
pub enum FixtureCheck {
    Flat { pick: MedianPick, price: f64, objective: f64 },
    Affine { metric: DistanceMetric, rate: f64, base: f64, objective: f64 },
    ZoneDesign { config: DesignConfig, expect: Expected },
    /// Unrestricted price setting on a forced partition.
    FixedPartition { labels: &'static [usize], mode: CountingMode, objective: f64 },
}

#[derive(Debug, Clone)]
pub struct Check {
    pub label: &'static str,
    pub provenance: Provenance,
    pub check: FixtureCheck,
}

pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub instance: Instance,
    pub checks: Vec<Check>,
}

/// origin, destination, passengers, reference price, optional path.
type OdSpec<'a> = (&'a str, &'a str, u64, f64, Option<&'a [&'a str]>);

fn instance(
    stations: &[&str],
    edges: &[(&str, &str, f64)],
    ods: &[OdSpec],
    config: Option<DesignConfig>,
) -> Instance {
    let ptn = Ptn::from_edges(stations, edges).expect("fixture network");
    let demand = ods
        .iter()
        .map(|&(o, d, t, r, path)| {
            let origin = ptn.station_id(o).unwrap();
            let destination = ptn.station_id(d).unwrap();
            let path = path.map(|names| {
                Path::new(&ptn, names.iter().map(|n| ptn.station_id(n).unwrap()).collect())
                    .expect("fixture path")
            });
            OdPair::new(&ptn, origin, destination, t, r, path).expect("fixture OD pair")
        })
        .collect();
    Instance { ptn, demand, config, threshold: None }
}

fn zone(config: DesignConfig, expect: Expected, label: &'static str, provenance: Provenance) -> Check {
    Check { label, provenance, check: FixtureCheck::ZoneDesign { config, expect } }
}

fn cfg(mode: CountingMode, connected: bool, max_zones: usize) -> DesignConfig {
    DesignConfig::new(mode, connected, max_zones)
}

use CountingMode::{Multiple, Single};
use Expected::{Exact, Positive};
use Provenance::{Derived, Paper};

/// All shipped fixtures.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        fig1_distance(),
        fig2_fewer_zones(),
        example1(),
        example2(),
        example3(),
        example4(),
        example5(),
        example6(),
    ]
}

/// Fixture by name.
pub fn fixture(name: &str) -> Option<Fixture> {
    fixtures().into_iter().find(|f| f.name == name)
}

pub fn fixture_names() -> Vec<&'static str> {
    fixtures().iter().map(|f| f.name).collect()
}

/// Four demand points in the distance-price plane whose best affine fit
/// is the constant price 2. Realized as a star so network and beeline
/// distances agree.
fn fig1_distance() -> Fixture {
    let mut inst = instance(
        &["c0", "w1", "w2", "w3", "w4"],
        &[("c0", "w1", 1.0), ("c0", "w2", 1.0), ("c0", "w3", 2.0), ("c0", "w4", 3.0)],
        &[
            ("c0", "w1", 1, 1.0, None),
            ("c0", "w2", 1, 2.0, None),
            ("c0", "w3", 1, 3.0, None),
            ("c0", "w4", 1, 2.0, None),
        ],
        None,
    );
    for (name, x, y) in [("c0", 0.0, 0.0), ("w1", 1.0, 0.0), ("w2", 0.0, 1.0), ("w3", -2.0, 0.0), ("w4", 0.0, -3.0)] {
        inst.ptn.set_coord(name, x, y).unwrap();
    }
    Fixture {
        name: "fig1-distance",
        summary: "distances (1,1,2,3) with prices (1,2,3,2); best affine tariff is the constant 2",
        instance: inst,
        checks: vec![
            Check {
                label: "network affine optimum (rate 0, base 2)",
                provenance: Paper,
                check: FixtureCheck::Affine { metric: DistanceMetric::Network, rate: 0.0, base: 2.0, objective: 2.0 },
            },
            Check {
                label: "beeline affine optimum coincides",
                provenance: Derived,
                check: FixtureCheck::Affine { metric: DistanceMetric::Beeline, rate: 0.0, base: 2.0, objective: 2.0 },
            },
        ],
    }
}

/// Two zones price this line exactly; forcing all three singleton zones
/// costs 1, so fewer zones can beat the zone budget.
fn fig2_fewer_zones() -> Fixture {
    Fixture {
        name: "fig2-fewer-zones",
        summary: "line with prices (1,2,2); two zones fit exactly, three singleton zones cost 1",
        instance: instance(
            &["v1", "v2", "v3"],
            &[("v1", "v2", 1.0), ("v2", "v3", 1.0)],
            &[
                ("v1", "v2", 1, 1.0, None),
                ("v1", "v3", 1, 2.0, None),
                ("v2", "v3", 1, 2.0, None),
            ],
            Some(cfg(Multiple, true, 2)),
        ),
        checks: vec![
            zone(cfg(Multiple, true, 2), Exact(0.0), "connected, N=2", Paper),
            Check {
                label: "forced singleton partition",
                provenance: Paper,
                check: FixtureCheck::FixedPartition { labels: &[0, 1, 2], mode: Multiple, objective: 1.0 },
            },
            zone(cfg(Multiple, true, 3), Exact(0.0), "connected, N=3 still uses two zones", Paper),
            Check {
                label: "flat tariff",
                provenance: Derived,
                check: FixtureCheck::Flat { pick: MedianPick::Lower, price: 2.0, objective: 1.0 },
            },
        ],
    }
}

/// Arbitrary zones beat connected zones (multiple counting).
fn example1() -> Fixture {
    Fixture {
        name: "example1",
        summary: "line with prices (1,2,1); the split zone {v1,v3} fits exactly, connected zones cost 1",
        instance: instance(
            &["v1", "v2", "v3"],
            &[("v1", "v2", 1.0), ("v2", "v3", 1.0)],
            &[
                ("v1", "v2", 1, 1.0, None),
                ("v1", "v3", 1, 2.0, None),
                ("v2", "v3", 1, 1.0, None),
            ],
            Some(cfg(Multiple, false, 2)),
        ),
        checks: vec![
            zone(cfg(Multiple, false, 2), Exact(0.0), "arbitrary zones, N=2", Paper),
            zone(cfg(Multiple, true, 2), Exact(1.0), "connected zones, N=2", Paper),
        ],
    }
}

/// Multiple counting beats single counting with two zones: three price
/// levels are observable from two zones only by re-entering.
fn example2() -> Fixture {
    Fixture {
        name: "example2",
        summary: "4-line needing three price levels from two zones",
        instance: instance(
            &["v1", "v2", "v3", "v4"],
            &[("v1", "v2", 1.0), ("v2", "v3", 1.0), ("v3", "v4", 1.0)],
            &[
                ("v1", "v2", 1, 1.0, None),
                ("v2", "v3", 1, 2.0, None),
                ("v3", "v4", 1, 2.0, None),
                ("v1", "v4", 1, 3.0, Some(&["v1", "v2", "v3", "v4"])),
            ],
            Some(cfg(Multiple, false, 2)),
        ),
        checks: vec![
            zone(cfg(Multiple, false, 2), Exact(0.0), "multiple counting, N=2", Paper),
            zone(cfg(Single, false, 2), Positive, "single counting cannot reach 0 with N=2", Paper),
        ],
    }
}

/// Single counting with arbitrary zones beats connected zones on a tree,
/// even with the zone budget maxed out.
fn example3() -> Fixture {
    Fixture {
        name: "example3",
        summary: "5-node tree where only a split zone prices all six OD pairs exactly",
        instance: instance(
            &["v1", "v2", "v3", "v4", "v5"],
            &[("v1", "v2", 1.0), ("v2", "v3", 1.0), ("v2", "v4", 1.0), ("v4", "v5", 1.0)],
            &[
                ("v1", "v2", 1, 2.0, None),
                ("v2", "v3", 1, 1.0, None),
                ("v2", "v4", 1, 2.0, None),
                ("v4", "v5", 1, 2.0, None),
                ("v1", "v4", 1, 2.0, Some(&["v1", "v2", "v4"])),
                ("v2", "v5", 1, 3.0, Some(&["v2", "v4", "v5"])),
            ],
            Some(cfg(Single, false, 5)),
        ),
        checks: vec![
            zone(cfg(Single, false, 5), Exact(0.0), "single counting, arbitrary zones", Paper),
            zone(cfg(Single, true, 5), Positive, "single counting, connected zones", Paper),
        ],
    }
}

/// Single counting beats multiple counting on a line with the zone
/// budget maxed out.
fn example4() -> Fixture {
    Fixture {
        name: "example4",
        summary: "5-line where re-entered zones must count once",
        instance: instance(
            &["v1", "v2", "v3", "v4", "v5"],
            &[("v1", "v2", 1.0), ("v2", "v3", 1.0), ("v3", "v4", 1.0), ("v4", "v5", 1.0)],
            &[
                ("v1", "v2", 1, 1.0, None),
                ("v2", "v3", 1, 2.0, None),
                ("v2", "v4", 1, 2.0, Some(&["v2", "v3", "v4"])),
                ("v3", "v5", 1, 3.0, Some(&["v3", "v4", "v5"])),
            ],
            Some(cfg(Single, false, 5)),
        ),
        checks: vec![
            zone(cfg(Single, false, 5), Exact(0.0), "single counting, arbitrary zones", Paper),
            zone(cfg(Multiple, false, 5), Positive, "multiple counting cannot reach 0", Paper),
        ],
    }
}

/// Multiple counting beats single counting in all zone variants.
fn example5() -> Fixture {
    Fixture {
        name: "example5",
        summary: "cycle graph where border crossings, not distinct zones, match the prices",
        instance: instance(
            &["v1", "v2", "v3", "v4", "v5"],
            &[("v1", "v2", 1.0), ("v2", "v3", 1.0), ("v2", "v4", 1.0), ("v3", "v5", 1.0), ("v4", "v5", 1.0)],
            &[
                ("v2", "v3", 1, 1.0, None),
                ("v3", "v5", 1, 1.0, None),
                ("v1", "v2", 1, 2.0, None),
                ("v1", "v3", 1, 2.0, Some(&["v1", "v2", "v3"])),
                ("v2", "v5", 1, 3.0, Some(&["v2", "v4", "v5"])),
            ],
            Some(cfg(Multiple, false, 5)),
        ),
        checks: vec![
            zone(cfg(Multiple, false, 5), Exact(0.0), "multiple counting, arbitrary zones", Paper),
            zone(cfg(Multiple, true, 5), Exact(0.0), "multiple counting, connected zones", Paper),
            zone(cfg(Single, false, 5), Positive, "single counting, arbitrary zones", Paper),
            zone(cfg(Single, true, 5), Positive, "single counting, connected zones", Paper),
        ],
    }
}

/// Single counting beats multiple counting in all zone variants.
fn example6() -> Fixture {
    Fixture {
        name: "example6",
        summary: "cycle graph whose price pattern needs distinct-zone counting",
        instance: instance(
            &["v1", "v2", "v3", "v4", "v5"],
            &[("v1", "v2", 1.0), ("v2", "v3", 1.0), ("v2", "v4", 1.0), ("v3", "v5", 1.0), ("v4", "v5", 1.0)],
            &[
                ("v2", "v3", 1, 1.0, None),
                ("v3", "v5", 1, 1.0, None),
                ("v1", "v2", 1, 2.0, None),
                ("v1", "v3", 1, 2.0, Some(&["v1", "v2", "v3"])),
                ("v2", "v5", 1, 2.0, Some(&["v2", "v4", "v5"])),
                ("v1", "v4", 1, 3.0, Some(&["v1", "v2", "v4"])),
            ],
            Some(cfg(Single, false, 5)),
        ),
        checks: vec![
            zone(cfg(Single, false, 5), Exact(0.0), "single counting, arbitrary zones", Paper),
            zone(cfg(Single, true, 5), Exact(0.0), "single counting, connected zones", Paper),
            zone(cfg(Multiple, false, 5), Positive, "multiple counting, arbitrary zones", Paper),
            zone(cfg(Multiple, true, 5), Positive, "multiple counting, connected zones", Paper),
        ],
    }
}

/// The six-level worked example of the monotone merge pass: expected
/// price list (1, 3, 3, 4, 4, 4) after merging levels {2,3}, {5,6} and
/// {4,5,6}.
pub fn merge_trace_levels() -> LevelledDemand {
    LevelledDemand::new(vec![
        vec![(1.0, 1)],
        vec![(3.0, 1), (3.0, 1)],
        vec![(1.0, 1)],
        vec![(5.0, 1)],
        vec![(6.0, 1), (6.0, 1)],
        vec![(4.0, 1), (4.0, 1), (4.0, 1), (4.0, 1)],
    ])
    .expect("valid levels")
}

/// Three levels whose monotone optimum (1, 1, 3) leaves the level-1
/// price outside its own median set.
pub fn monotone_counterexample_levels() -> LevelledDemand {
    LevelledDemand::new(vec![vec![(2.0, 1)], vec![(1.0, 2)], vec![(3.0, 3)]]).expect("valid levels")
}
