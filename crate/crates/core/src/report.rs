//! JSON and CSV forms of refinement results.
//!
//! Exact angles are written twice: as a double in the fixed column, and as
//! a `"p/q"` string in a companion `*_exact` field (JSON only).

use std::io::Write;

use serde::Serialize;

use crate::engine::{
    AngleMode, GenerationStats, InitialShape, Refinement, RefinementRun, UpsilonStep,
    SIMILARITY_QUANTUM_DEG,
};
use crate::error::{Error, Result};
use crate::geometry::ProcedureKind;
use crate::symbolic::{format_rational, BaseAngles};

pub const CSV_COLUMNS: [&str; 8] = [
    "n",
    "triangle_count",
    "mesh",
    "min_angle_deg",
    "min_largest_angle_deg",
    "max_aspect_ratio",
    "rho",
    "cumulative_similarity_classes",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sides: Option<[f64; 3]>,
    pub scale: f64,
    pub iterations: u32,
    pub mode: AngleMode,
    /// Angle quantum used for similarity keys; absent when keys are exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity_quantum_deg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub n: u32,
    pub triangle_count: u64,
    pub mesh: f64,
    pub min_angle_deg: f64,
    pub min_angle_deg_exact: Option<String>,
    pub min_largest_angle_deg: f64,
    pub min_largest_angle_deg_exact: Option<String>,
    pub max_aspect_ratio: f64,
    /// Needs generation `n + 1`, so the last row has none.
    pub rho: Option<f64>,
    pub cumulative_similarity_classes: u64,
}

impl From<&GenerationStats> for StatsRow {
    fn from(s: &GenerationStats) -> Self {
        Self {
            n: s.n,
            triangle_count: s.triangle_count,
            mesh: s.mesh,
            min_angle_deg: s.min_angle.to_f64(),
            min_angle_deg_exact: s.min_angle.exact().map(format_rational),
            min_largest_angle_deg: s.min_largest_angle.to_f64(),
            min_largest_angle_deg_exact: s.min_largest_angle.exact().map(format_rational),
            max_aspect_ratio: s.max_aspect_ratio,
            rho: s.rho,
            cumulative_similarity_classes: s.cumulative_similarity_classes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementReport {
    pub input: InputRecord,
    pub procedure: ProcedureKind,
    pub generations: Vec<StatsRow>,
}

impl RefinementReport {
    pub fn new(run: &RefinementRun, result: &Refinement) -> Self {
        let (angles, sides) = match &run.shape {
            InitialShape::Angles(base) => (Some(base.to_string()), None),
            InitialShape::Sides(s) => (None, Some(*s)),
        };
        Self {
            input: InputRecord {
                angles,
                sides,
                scale: run.scale,
                iterations: run.depth,
                mode: run.mode,
                similarity_quantum_deg: (!run.tracks_exact_angles()).then_some(SIMILARITY_QUANTUM_DEG),
            },
            procedure: result.kind,
            generations: result.stats.iter().map(StatsRow::from).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Serialization(e.to_string());
        writer.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for row in &self.generations {
            writer
                .write_record([
                    row.n.to_string(),
                    row.triangle_count.to_string(),
                    row.mesh.to_string(),
                    row.min_angle_deg.to_string(),
                    row.min_largest_angle_deg.to_string(),
                    row.max_aspect_ratio.to_string(),
                    row.rho.map(|r| r.to_string()).unwrap_or_default(),
                    row.cumulative_similarity_classes.to_string(),
                ])
                .map_err(csv_err)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Serialization(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpsilonRow {
    pub n: u32,
    pub lineage: String,
    pub theta_deg: String,
    pub phi_deg: String,
    pub gamma_deg: String,
    pub theta_form: String,
    pub phi_form: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpsilonReport {
    pub angles: String,
    pub steps: Vec<UpsilonRow>,
}

impl UpsilonReport {
    pub fn new(base: &BaseAngles, steps: &[UpsilonStep]) -> Self {
        Self {
            angles: base.to_string(),
            steps: steps
                .iter()
                .map(|s| UpsilonRow {
                    n: s.n,
                    lineage: s.lineage.to_string(),
                    theta_deg: format_rational(&s.theta),
                    phi_deg: format_rational(&s.phi),
                    gamma_deg: format_rational(&s.gamma),
                    theta_form: s.theta_form.to_string(),
                    phi_form: s.phi_form.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}
