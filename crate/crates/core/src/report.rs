//! The report bundle written by `stats-real` and `evaluate`, its CSV form,
//! and side-by-side comparison of two bundles.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{
    DegreeEvolutionReport, DegreeKind, GraphSummary, HopDirectionReport, HopReference, LengthReport,
    RankChoiceReport,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const QUANTILE_RULE: &str = "nearest-rank";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("schema version mismatch: {a} vs {b}")]
    SchemaMismatch { a: u32, b: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub schema_version: u32,
    /// `real` for measured routes, otherwise the model name.
    pub source: String,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub routes: u64,
    pub degree_kind: DegreeKind,
    pub hop_reference: HopReference,
    pub rank_tie_rule: String,
    pub quantile_rule: String,
    /// Routes whose shortest-path counts overflowed, so sampling among
    /// those paths was only approximately uniform.
    pub saturated_routes: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub meta: ReportMeta,
    pub length: LengthReport,
    pub hop_direction: HopDirectionReport,
    pub degree_evolution: DegreeEvolutionReport,
    pub rank_choice: RankChoiceReport,
    pub graph_summary: GraphSummary,
}

impl StatsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Parses a report, checking the schema version first so that older or
    /// newer documents fail with a clear message.
    pub fn from_json(text: &str) -> Result<StatsReport, ReportError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("meta")
            .and_then(|m| m.get("schema_version"))
            .and_then(|v| v.as_u64())
            .unwrap_or(0) as u32;
        if version != SCHEMA_VERSION {
            return Err(ReportError::SchemaMismatch { a: version, b: SCHEMA_VERSION });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn read(path: &Path) -> Result<StatsReport, ReportError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Writes one CSV table per report into `dir` and returns the paths.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut open = |name: &str| -> Result<csv::Writer<fs::File>, ReportError> {
            let path = dir.join(name);
            let w = csv::Writer::from_path(&path)?;
            written.push(path);
            Ok(w)
        };

        let mut w = open("length.csv")?;
        w.write_record(["histogram", "value", "count"])?;
        for (name, hist) in [
            ("route_length", &self.length.route_length_hist),
            ("sp_length", &self.length.sp_length_hist),
            ("delta", &self.length.delta_hist),
        ] {
            for (k, v) in hist {
                w.write_record([name, &k.to_string(), &v.to_string()])?;
            }
        }
        w.flush()?;

        let mut w = open("hop_direction.csv")?;
        w.write_record(["hop", "forward", "stable", "backward", "forward_fraction", "stable_fraction", "backward_fraction"])?;
        let hd = &self.hop_direction;
        let rows = std::iter::once(("all".to_owned(), hd.overall_counts, hd.overall))
            .chain(hd.per_position.iter().map(|p| (p.hop.to_string(), p.counts, p.fractions)));
        for (hop, c, f) in rows {
            w.write_record([
                hop,
                c.forward.to_string(),
                c.stable.to_string(),
                c.backward.to_string(),
                f.forward.to_string(),
                f.stable.to_string(),
                f.backward.to_string(),
            ])?;
        }
        w.flush()?;

        let mut w = open("degree_evolution.csv")?;
        w.write_record(["position", "min", "p5", "p10", "q1", "median", "q3", "p90", "p95", "max"])?;
        for p in &self.degree_evolution.positions {
            let mut row = vec![p.position.to_string()];
            row.extend(p.quantiles.as_array().iter().map(|q| q.to_string()));
            w.write_record(row)?;
        }
        w.flush()?;

        let mut w = open("rank_choice.csv")?;
        w.write_record(["degree", "rank", "count", "probability"])?;
        for (k, v) in &self.rank_choice.by_degree {
            for (i, (c, p)) in v.counts.iter().zip(&v.probabilities).enumerate() {
                w.write_record([k.to_string(), (i + 1).to_string(), c.to_string(), p.to_string()])?;
            }
        }
        w.flush()?;

        let mut w = open("graph_summary.csv")?;
        w.write_record(["metric", "value"])?;
        for (k, v) in self.scalar_metrics() {
            w.write_record([k, v.to_string()])?;
        }
        let g = &self.graph_summary;
        w.write_record(["directed".to_owned(), g.directed.to_string()])?;
        w.write_record(["connected".to_owned(), g.connected.to_string()])?;
        w.write_record(["source".to_owned(), self.meta.source.clone()])?;
        w.flush()?;

        Ok(written)
    }

    /// Named scalar values shown side by side in comparisons.
    fn scalar_metrics(&self) -> Vec<(String, f64)> {
        let l = &self.length;
        let h = &self.hop_direction.overall;
        let g = &self.graph_summary;
        let mut out = vec![
            ("routes", l.routes as f64),
            ("mean_route_length", l.mean_route_length),
            ("mean_sp_length", l.mean_sp_length),
            ("mean_delta", l.mean_delta),
            ("fraction_shortest", l.fraction_shortest),
            ("forward_fraction", h.forward),
            ("stable_fraction", h.stable),
            ("backward_fraction", h.backward),
            ("focus_length", self.degree_evolution.focus_length as f64),
            ("nodes", g.nodes as f64),
            ("edges", g.edges as f64),
            ("mean_degree", g.mean_degree),
            ("max_degree", g.max_degree as f64),
            ("average_distance", g.average_distance),
        ];
        if let Some(a) = g.power_law_exponent {
            out.push(("power_law_exponent", a));
        }
        out.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub a_source: String,
    pub b_source: String,
    pub metrics: Vec<MetricRow>,
    /// Total-variation distances between the two reports' distributions.
    pub distances: BTreeMap<String, f64>,
}

/// Total-variation distance between two count histograms, each normalised
/// to a probability distribution. Empty histograms are at distance 0 from
/// each other and 1 from anything else.
pub fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    let (na, nb) = (a.values().sum::<u64>(), b.values().sum::<u64>());
    match (na, nb) {
        (0, 0) => return 0.0,
        (0, _) | (_, 0) => return 1.0,
        _ => {}
    }
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let sum: f64 = keys
        .into_iter()
        .map(|k| {
            let pa = a.get(k).copied().unwrap_or(0) as f64 / na as f64;
            let pb = b.get(k).copied().unwrap_or(0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum();
    sum / 2.0
}

fn fraction_tv(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

/// Side-by-side scalars plus total-variation distances. Symmetric in its
/// arguments except for the `a`/`b` labels and the sign of `difference`.
pub fn compare(a: &StatsReport, b: &StatsReport) -> Result<Comparison, ReportError> {
    if a.meta.schema_version != b.meta.schema_version {
        return Err(ReportError::SchemaMismatch { a: a.meta.schema_version, b: b.meta.schema_version });
    }
    let ma: BTreeMap<String, f64> = a.scalar_metrics().into_iter().collect();
    let mb: BTreeMap<String, f64> = b.scalar_metrics().into_iter().collect();
    let mut names: Vec<String> = a.scalar_metrics().into_iter().map(|(k, _)| k).collect();
    if !ma.contains_key("power_law_exponent") && mb.contains_key("power_law_exponent") {
        names.push("power_law_exponent".into());
    }
    let metrics = names
        .into_iter()
        .map(|metric| {
            let (x, y) = (ma.get(&metric).copied(), mb.get(&metric).copied());
            let difference = x.zip(y).map(|(x, y)| y - x);
            MetricRow { metric, a: x, b: y, difference }
        })
        .collect();

    let mut distances = BTreeMap::new();
    distances.insert("route_length".to_owned(), total_variation(&a.length.route_length_hist, &b.length.route_length_hist));
    distances.insert("sp_length".to_owned(), total_variation(&a.length.sp_length_hist, &b.length.sp_length_hist));
    distances.insert("delta".to_owned(), total_variation(&a.length.delta_hist, &b.length.delta_hist));
    let (ha, hb) = (a.hop_direction.overall, b.hop_direction.overall);
    distances.insert(
        "hop_direction".to_owned(),
        fraction_tv([ha.forward, ha.stable, ha.backward], [hb.forward, hb.stable, hb.backward]),
    );

    // Per-degree rank vectors, then their average weighted by pooled samples.
    let degrees: BTreeSet<u32> = a.rank_choice.by_degree.keys().chain(b.rank_choice.by_degree.keys()).copied().collect();
    let (mut weighted, mut weight) = (0.0, 0.0);
    for k in degrees {
        let to_hist = |r: &RankChoiceReport| -> BTreeMap<usize, u64> {
            r.by_degree.get(&k).map(|v| v.counts.iter().copied().enumerate().collect()).unwrap_or_default()
        };
        let (x, y) = (to_hist(&a.rank_choice), to_hist(&b.rank_choice));
        let d = total_variation(&x, &y);
        let w = (x.values().sum::<u64>() + y.values().sum::<u64>()) as f64;
        weighted += d * w;
        weight += w;
        distances.insert(format!("rank_choice_k{k}"), d);
    }
    distances.insert("rank_choice".to_owned(), if weight == 0.0 { 0.0 } else { weighted / weight });

    Ok(Comparison {
        schema_version: a.meta.schema_version,
        a_source: a.meta.source.clone(),
        b_source: b.meta.source.clone(),
        metrics,
        distances,
    })
}

impl Comparison {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("comparison serializes");
        s.push('\n');
        s
    }

    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
        fs::create_dir_all(dir)?;
        let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let metrics_path = dir.join("compare_metrics.csv");
        let mut w = csv::Writer::from_path(&metrics_path)?;
        w.write_record(["metric", "a", "b", "difference"])?;
        for r in &self.metrics {
            w.write_record([r.metric.clone(), fmt(r.a), fmt(r.b), fmt(r.difference)])?;
        }
        w.flush()?;
        let dist_path = dir.join("compare_distances.csv");
        let mut w = csv::Writer::from_path(&dist_path)?;
        w.write_record(["distribution", "total_variation"])?;
        for (k, v) in &self.distances {
            w.write_record([k.clone(), v.to_string()])?;
        }
        w.flush()?;
        Ok(vec![metrics_path, dist_path])
    }
}
