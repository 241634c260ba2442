//! Instance, partition, tariff and report documents.
//!
//! Everything is one self-describing TOML dialect so fixtures double as
//! documentation. Units are tags only; computation is dimensionless.
//!
//! Instance schema:
//!
//! ```toml
//! [units]                 # optional tags
//! currency = "EUR"
//! distance = "km"
//!
//! [ptn]
//! stations = ["v1", "v2", "v3"]
//! [ptn.coords]            # optional, per station
//! v1 = [0.0, 0.0]
//! [[ptn.edge]]
//! u = "v1"
//! v = "v2"
//! length = 1.0
//!
//! [[od]]
//! origin = "v1"
//! destination = "v3"
//! passengers = 1
//! reference_price = 2.0
//! path = ["v1", "v2", "v3"]   # optional; omitted paths are synthesized
//!                             # as shortest paths
//! [config]                # optional
//! counting = "multiple"
//! connected = false
//! max_zones = 2
//! no_elongation = false
//! no_stopover = false
//! decision_threshold = 1.0    # optional; written by gen-reduction
//! ```
//!
//! Partition documents hold a single `[zones]` table mapping stations to
//! zone numbers; tariff documents a `[tariff]` table with `kind` one of
//! `flat`, `distance`, `zone`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetric;
use crate::ptn::{OdPair, Path, Ptn};
use crate::tariff::{objective, CountingMode, PriceList, Tariff, ZonePartition};
use crate::zone_design::{DesignConfig, DesignResult};
use crate::{Error, Result};

/// A fully validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub ptn: Ptn,
    pub demand: Vec<OdPair>,
    pub config: Option<DesignConfig>,
    /// Decision threshold carried by generated reduction instances.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    units: Option<UnitsDoc>,
    ptn: PtnDoc,
    #[serde(rename = "od", default)]
    demand: Vec<OdDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<ConfigDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    currency: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PtnDoc {
    stations: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    coords: BTreeMap<String, [f64; 2]>,
    #[serde(rename = "edge")]
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    u: String,
    v: String,
    length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OdDoc {
    origin: String,
    destination: String,
    passengers: u64,
    reference_price: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    counting: CountingDoc,
    #[serde(default)]
    connected: bool,
    max_zones: usize,
    #[serde(default)]
    no_elongation: bool,
    #[serde(default)]
    no_stopover: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    decision_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CountingDoc {
    Multiple,
    Single,
}

impl From<CountingDoc> for CountingMode {
    fn from(c: CountingDoc) -> CountingMode {
        match c {
            CountingDoc::Multiple => CountingMode::Multiple,
            CountingDoc::Single => CountingMode::Single,
        }
    }
}

impl From<CountingMode> for CountingDoc {
    fn from(c: CountingMode) -> CountingDoc {
        match c {
            CountingMode::Multiple => CountingDoc::Multiple,
            CountingMode::Single => CountingDoc::Single,
        }
    }
}

/// Parses and validates an instance document. Missing OD paths are
/// completed with deterministic shortest paths.
pub fn load_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut ptn = Ptn::new(
        doc.ptn.stations,
        doc.ptn.edges.into_iter().map(|e| (e.u, e.v, e.length)).collect(),
    )?;
    for (station, [x, y]) in &doc.ptn.coords {
        ptn.set_coord(station, *x, *y)
            .map_err(|e| Error::schema(format!("ptn.coords.{station}"), e.to_string()))?;
    }

    let mut demand = Vec::with_capacity(doc.demand.len());
    for (i, od) in doc.demand.into_iter().enumerate() {
        let loc = |field: &str| format!("od[{i}].{field}");
        let origin = ptn
            .station_id(&od.origin)
            .ok_or_else(|| Error::schema(loc("origin"), format!("unknown station {:?}", od.origin)))?;
        let destination = ptn
            .station_id(&od.destination)
            .ok_or_else(|| Error::schema(loc("destination"), format!("unknown station {:?}", od.destination)))?;
        let path = match od.path {
            None => None,
            Some(names) => {
                let mut nodes = Vec::with_capacity(names.len());
                for name in &names {
                    nodes.push(ptn.station_id(name).ok_or_else(|| {
                        Error::schema(loc("path"), format!("unknown station {name:?}"))
                    })?);
                }
                Some(Path::new(&ptn, nodes).map_err(|e| Error::schema(loc("path"), e.to_string()))?)
            }
        };
        demand.push(
            OdPair::new(&ptn, origin, destination, od.passengers, od.reference_price, path)
                .map_err(|e| Error::schema(format!("od[{i}]"), e.to_string()))?,
        );
    }

    let mut threshold = None;
    let config = match doc.config {
        None => None,
        Some(c) => {
            if c.max_zones == 0 || c.max_zones > ptn.station_count() {
                return Err(Error::schema(
                    "config.max_zones",
                    format!("must lie in 1..={}", ptn.station_count()),
                ));
            }
            threshold = c.decision_threshold;
            Some(DesignConfig {
                mode: c.counting.into(),
                connected: c.connected,
                max_zones: c.max_zones,
                require_no_elongation: c.no_elongation,
                require_no_stopover: c.no_stopover,
            })
        }
    };

    Ok(Instance { ptn, demand, config, threshold })
}

/// Serializes an instance; loading the output yields the same instance
/// (station order normalized).
pub fn save_instance(instance: &Instance) -> String {
    let ptn = &instance.ptn;
    let coords: BTreeMap<String, [f64; 2]> = (0..ptn.station_count())
        .filter_map(|v| ptn.coord(v).map(|(x, y)| (ptn.station_name(v).to_string(), [x, y])))
        .collect();
    let doc = InstanceDoc {
        units: None,
        ptn: PtnDoc {
            stations: ptn.station_names().to_vec(),
            coords,
            edges: ptn
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    u: ptn.station_name(e.u).to_string(),
                    v: ptn.station_name(e.v).to_string(),
                    length: e.length,
                })
                .collect(),
        },
        demand: instance
            .demand
            .iter()
            .map(|od| OdDoc {
                origin: ptn.station_name(od.origin).to_string(),
                destination: ptn.station_name(od.destination).to_string(),
                passengers: od.passengers,
                reference_price: od.reference_price,
                path: Some(od.path.nodes().iter().map(|&v| ptn.station_name(v).to_string()).collect()),
            })
            .collect(),
        config: instance.config.map(|c| ConfigDoc {
            counting: c.mode.into(),
            connected: c.connected,
            max_zones: c.max_zones,
            no_elongation: c.require_no_elongation,
            no_stopover: c.require_no_stopover,
            decision_threshold: instance.threshold,
        }),
    };
    toml::to_string(&doc).expect("instance documents serialize")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionDoc {
    zones: BTreeMap<String, usize>,
}

/// Parses a `[zones]` document against the network: every station must
/// be assigned exactly once.
pub fn load_partition(text: &str, ptn: &Ptn) -> Result<ZonePartition> {
    let doc: PartitionDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for station in doc.zones.keys() {
        if ptn.station_id(station).is_none() {
            return Err(Error::schema(format!("zones.{station}"), "unknown station"));
        }
    }
    let mut labels = Vec::with_capacity(ptn.station_count());
    for v in 0..ptn.station_count() {
        let name = ptn.station_name(v);
        match doc.zones.get(name) {
            Some(&z) => labels.push(z),
            None => return Err(Error::schema("zones", format!("station {name:?} is not assigned"))),
        }
    }
    ZonePartition::new(&labels)
}

pub fn save_partition(partition: &ZonePartition, ptn: &Ptn) -> String {
    let doc = PartitionDoc { zones: partition_map(partition, ptn) };
    toml::to_string(&doc).expect("partition documents serialize")
}

/// Station name to 1-based canonical zone number.
pub fn partition_map(partition: &ZonePartition, ptn: &Ptn) -> BTreeMap<String, usize> {
    partition
        .labels()
        .iter()
        .enumerate()
        .map(|(v, &z)| (ptn.station_name(v).to_string(), z + 1))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TariffFile {
    tariff: TariffDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TariffDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    price: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counting: Option<CountingDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prices: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    zones: BTreeMap<String, usize>,
}

pub fn load_tariff(text: &str, ptn: &Ptn) -> Result<Tariff> {
    let doc: TariffFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let t = doc.tariff;
    let need = |field: &str, ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(Error::schema(format!("tariff.{field}"), "missing field for this tariff kind"))
        }
    };
    match t.kind.as_str() {
        "flat" => {
            need("price", t.price.is_some())?;
            Ok(Tariff::Flat { price: t.price.unwrap() })
        }
        "distance" => {
            need("rate", t.rate.is_some())?;
            need("base", t.base.is_some())?;
            let metric = match t.metric.as_deref() {
                None | Some("network") => DistanceMetric::Network,
                Some("beeline") => DistanceMetric::Beeline,
                Some(other) => {
                    return Err(Error::schema("tariff.metric", format!("unknown metric {other:?}")))
                }
            };
            Ok(Tariff::AffineDistance { rate: t.rate.unwrap(), base: t.base.unwrap(), metric })
        }
        "zone" => {
            need("counting", t.counting.is_some())?;
            need("prices", t.prices.is_some())?;
            need("zones", !t.zones.is_empty())?;
            let partition = load_partition(
                &toml::to_string(&PartitionDoc { zones: t.zones }).unwrap(),
                ptn,
            )?;
            Ok(Tariff::Zone {
                partition,
                mode: t.counting.unwrap().into(),
                prices: PriceList::new(t.prices.unwrap())?,
            })
        }
        other => Err(Error::schema("tariff.kind", format!("unknown tariff kind {other:?}"))),
    }
}

pub fn save_tariff(tariff: &Tariff, ptn: &Ptn) -> String {
    let doc = match tariff {
        Tariff::Flat { price } => TariffDoc {
            kind: "flat".into(),
            price: Some(*price),
            rate: None,
            base: None,
            metric: None,
            counting: None,
            prices: None,
            zones: BTreeMap::new(),
        },
        Tariff::AffineDistance { rate, base, metric } => TariffDoc {
            kind: "distance".into(),
            price: None,
            rate: Some(*rate),
            base: Some(*base),
            metric: Some(metric.label().to_string()),
            counting: None,
            prices: None,
            zones: BTreeMap::new(),
        },
        Tariff::Zone { partition, mode, prices } => TariffDoc {
            kind: "zone".into(),
            price: None,
            rate: None,
            base: None,
            metric: None,
            counting: Some((*mode).into()),
            prices: Some(prices.prices().to_vec()),
            zones: partition_map(partition, ptn),
        },
    };
    toml::to_string(&TariffFile { tariff: doc }).expect("tariff documents serialize")
}

/// Machine-readable result: what was solved, the solution and per-OD
/// fares and deviations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_price: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_zones: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prices: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zones: Option<BTreeMap<String, usize>>,
    #[serde(rename = "od")]
    pub per_od: Vec<OdReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdReport {
    pub origin: String,
    pub destination: String,
    pub passengers: u64,
    pub reference_price: f64,
    pub fare: f64,
    pub deviation: f64,
}

impl Report {
    /// Evaluates a tariff over the demand into a report skeleton.
    pub fn for_tariff(ptn: &Ptn, tariff: &Tariff, demand: &[OdPair], command: &str) -> Result<Report> {
        let mut per_od = Vec::with_capacity(demand.len());
        for od in demand {
            let fare = tariff.price(ptn, &od.path)?;
            per_od.push(OdReport {
                origin: ptn.station_name(od.origin).to_string(),
                destination: ptn.station_name(od.destination).to_string(),
                passengers: od.passengers,
                reference_price: od.reference_price,
                fare,
                deviation: (od.reference_price - fare).abs(),
            });
        }
        let mut report = Report {
            command: command.to_string(),
            variant: None,
            objective: objective(ptn, tariff, demand)?,
            flat_price: None,
            rate: None,
            base: None,
            metric: None,
            max_zones: None,
            prices: None,
            zones: None,
            per_od,
        };
        match tariff {
            Tariff::Flat { price } => report.flat_price = Some(*price),
            Tariff::AffineDistance { rate, base, metric } => {
                report.rate = Some(*rate);
                report.base = Some(*base);
                report.metric = Some(metric.label().to_string());
            }
            Tariff::Zone { partition, mode, prices } => {
                report.variant = Some(mode.label().to_string());
                report.prices = Some(prices.prices().to_vec());
                report.zones = Some(partition_map(partition, ptn));
            }
        }
        Ok(report)
    }

    pub fn for_design_result(ptn: &Ptn, result: &DesignResult, demand: &[OdPair]) -> Result<Report> {
        let mut report = Report::for_tariff(ptn, &result.tariff(), demand, "zone-design")?;
        report.variant = Some(result.config.variant().to_string());
        report.max_zones = Some(result.config.max_zones);
        Ok(report)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports serialize")
    }

    /// Human-readable table; prices print to 4 decimals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        if let Some(v) = &self.variant {
            out.push_str(&format!("variant: {v}\n"));
        }
        if let Some(p) = self.flat_price {
            out.push_str(&format!("flat price: {p:.4}\n"));
        }
        if let (Some(rate), Some(base)) = (self.rate, self.base) {
            let metric = self.metric.as_deref().unwrap_or("network");
            out.push_str(&format!("rate: {rate:.4} per km ({metric}), base: {base:.4}\n"));
        }
        if let Some(prices) = &self.prices {
            let list: Vec<String> = prices.iter().map(|p| format!("{p:.4}")).collect();
            out.push_str(&format!("prices by traversed zones: [{}]\n", list.join(", ")));
        }
        if let Some(zones) = &self.zones {
            let mut by_zone: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
            for (station, &z) in zones {
                by_zone.entry(z).or_default().push(station);
            }
            for (z, stations) in by_zone {
                out.push_str(&format!("zone {z}: {}\n", stations.join(", ")));
            }
        }
        out.push_str(&format!("objective: {:.4}\n", self.objective));
        out.push_str(&format!(
            "{:<12} {:<12} {:>10} {:>10} {:>10} {:>10}\n",
            "origin", "destination", "passengers", "reference", "fare", "deviation"
        ));
        for od in &self.per_od {
            out.push_str(&format!(
                "{:<12} {:<12} {:>10} {:>10.4} {:>10.4} {:>10.4}\n",
                od.origin, od.destination, od.passengers, od.reference_price, od.fare, od.deviation
            ));
        }
        out
    }
}

/// Parses a source graph for the reduction generators:
/// `nodes = [...]` and `edges = [["a", "b"], ...]`.
pub fn load_source_graph(text: &str) -> Result<crate::reduction::SourceGraph> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct GraphDoc {
        nodes: Vec<String>,
        #[serde(default)]
        edges: Vec<(String, String)>,
    }
    let doc: GraphDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    crate::reduction::SourceGraph::new(doc.nodes, doc.edges)
}

/// Serializes a generated reduction instance, threshold included.
pub fn save_reduction(instance: &crate::reduction::ReductionInstance) -> String {
    save_instance(&Instance {
        ptn: instance.ptn.clone(),
        demand: instance.demand.clone(),
        config: Some(instance.config),
        threshold: Some(instance.threshold),
    })
}
