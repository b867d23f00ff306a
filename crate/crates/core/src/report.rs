//! JSON input and report schemas.
//!
//! Complex numbers are encoded as [re, im] pairs. Key order is fixed by
//! struct declaration order and serialization is deterministic, so reports
//! are byte-stable for identical inputs. `detected_scale` and
//! `per_equation_max` are emitted only when present.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coords::{CalabiPoint, FiberPoint, FullPoint, ReducedPoint};
use crate::error::{Error, Result};
use crate::residuals::{ResidualReport, SystemKind};

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Input point file: {"coords": "reduced"|"full"|"calabi", "points": [...]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointsFile {
    pub coords: String,
    pub points: Vec<PointRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRecord {
    Reduced(ReducedRecord),
    Full(FullRecord),
    Calabi(CalabiRecord),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedRecord {
    pub q: [f64; 2],
    pub zeta: [f64; 2],
    pub v: f64,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullRecord {
    pub q1: [f64; 2],
    pub q2: [f64; 2],
    pub p1: [f64; 2],
    pub p2: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalabiRecord {
    pub z1: [f64; 2],
    pub z2: [f64; 2],
    pub w1: [f64; 2],
    pub w2: [f64; 2],
}

impl ReducedRecord {
    pub fn from_point(p: &ReducedPoint) -> Self {
        Self {
            q: pair(p.q),
            zeta: pair(p.zeta),
            v: p.v,
            rho: p.rho,
            u: None,
            theta: None,
        }
    }

    pub fn with_fiber(p: &ReducedPoint, f: &FiberPoint) -> Self {
        let mut r = Self::from_point(p);
        r.u = Some(f.u);
        r.theta = Some(f.theta());
        r
    }

    pub fn point(&self) -> ReducedPoint {
        ReducedPoint::new(unpair(self.q), unpair(self.zeta), self.v, self.rho)
    }

    pub fn fiber(&self) -> FiberPoint {
        FiberPoint::new(self.u.unwrap_or(0.0), self.theta.unwrap_or(0.0))
    }

    fn finite(&self) -> bool {
        self.q.iter().chain(&self.zeta).all(|x| x.is_finite())
            && self.v.is_finite()
            && self.rho.is_finite()
            && self.u.is_none_or(f64::is_finite)
            && self.theta.is_none_or(f64::is_finite)
    }
}

impl FullRecord {
    pub fn from_point(p: &FullPoint) -> Self {
        Self {
            q1: pair(p.q1),
            q2: pair(p.q2),
            p1: pair(p.p1),
            p2: pair(p.p2),
        }
    }

    pub fn point(&self) -> FullPoint {
        FullPoint::new(unpair(self.q1), unpair(self.q2), unpair(self.p1), unpair(self.p2))
    }

    fn finite(&self) -> bool {
        self.q1
            .iter()
            .chain(&self.q2)
            .chain(&self.p1)
            .chain(&self.p2)
            .all(|x| x.is_finite())
    }
}

impl CalabiRecord {
    pub fn from_point(p: &CalabiPoint) -> Self {
        Self {
            z1: pair(p.z1),
            z2: pair(p.z2),
            w1: pair(p.w1),
            w2: pair(p.w2),
        }
    }

    pub fn point(&self) -> CalabiPoint {
        CalabiPoint::new(unpair(self.z1), unpair(self.z2), unpair(self.w1), unpair(self.w2))
    }

    fn finite(&self) -> bool {
        self.z1
            .iter()
            .chain(&self.z2)
            .chain(&self.w1)
            .chain(&self.w2)
            .all(|x| x.is_finite())
    }
}

impl PointsFile {
    /// Checks the coords tag against every record and that all numbers are
    /// finite; errors name the first offending point index.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            let ok = match (self.coords.as_str(), p) {
                ("reduced", PointRecord::Reduced(r)) => r.finite(),
                ("full", PointRecord::Full(r)) => r.finite(),
                ("calabi", PointRecord::Calabi(r)) => r.finite(),
                ("reduced" | "full" | "calabi", _) => {
                    return Err(Error::invalid(format!(
                        "point {i} does not match coords tag '{}'",
                        self.coords
                    )))
                }
                _ => {
                    return Err(Error::invalid(format!(
                        "unknown coords tag '{}' (expected reduced, full or calabi)",
                        self.coords
                    )))
                }
            };
            if !ok {
                return Err(Error::invalid(format!("point {i} contains non-finite numbers")));
            }
        }
        Ok(())
    }
}

/// Residuals of one point in the report, keyed by equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResidualsRecord {
    Reduced {
        r1: [f64; 2],
        r2: [f64; 2],
        r3: [f64; 2],
        r4: [f64; 2],
        r5: [f64; 2],
        r6: [f64; 2],
    },
    Full {
        c11: [f64; 2],
        c12: [f64; 2],
        c21: [f64; 2],
        c22: [f64; 2],
        a12: [f64; 2],
        b12: [f64; 2],
    },
    Forms {
        defect: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerPointRecord {
    pub point: PointRecord,
    pub residuals: ResidualsRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquationMax {
    pub equation: String,
    pub point_index: usize,
    pub max_abs: f64,
}

/// The report document written by verify and scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub potential: String,
    pub system: String,
    pub tolerance: f64,
    pub per_point: Vec<PerPointRecord>,
    pub sup_norm: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_equation_max: Option<Vec<EquationMax>>,
}

/// Assembles the JSON report from an aggregated residual report; points must
/// parallel the report rows.
pub fn residual_report_to_json(
    potential: &str,
    report: &ResidualReport,
    points: Vec<PointRecord>,
    with_equation_max: bool,
) -> Report {
    assert_eq!(points.len(), report.per_point.len());
    let system = match report.system {
        SystemKind::Reduced => "reduced",
        SystemKind::Full => "full",
    };
    let per_point = points
        .into_iter()
        .zip(&report.per_point)
        .map(|(point, row)| PerPointRecord {
            point,
            residuals: match report.system {
                SystemKind::Reduced => ResidualsRecord::Reduced {
                    r1: pair(row[0]),
                    r2: pair(row[1]),
                    r3: pair(row[2]),
                    r4: pair(row[3]),
                    r5: pair(row[4]),
                    r6: pair(row[5]),
                },
                SystemKind::Full => ResidualsRecord::Full {
                    c11: pair(row[0]),
                    c12: pair(row[1]),
                    c21: pair(row[2]),
                    c22: pair(row[3]),
                    a12: pair(row[4]),
                    b12: pair(row[5]),
                },
            },
        })
        .collect();
    let per_equation_max = with_equation_max.then(|| {
        report
            .system
            .equation_names()
            .iter()
            .zip(&report.equation_max)
            .map(|(name, &(idx, max))| EquationMax {
                equation: name.to_string(),
                point_index: idx,
                max_abs: max,
            })
            .collect()
    });
    Report {
        potential: potential.to_string(),
        system: system.to_string(),
        tolerance: report.tolerance,
        per_point,
        sup_norm: report.sup_norm,
        pass: report.pass,
        detected_scale: report.detected_scale,
        per_equation_max,
    }
}

/// Report written by the forms system (one defect per point).
pub fn forms_report_to_json(
    potential: &str,
    tolerance: f64,
    points: Vec<PointRecord>,
    defects: &[f64],
    with_equation_max: bool,
) -> Report {
    assert_eq!(points.len(), defects.len());
    let sup_norm = defects.iter().cloned().fold(0.0, f64::max);
    let per_point = points
        .into_iter()
        .zip(defects)
        .map(|(point, &defect)| PerPointRecord {
            point,
            residuals: ResidualsRecord::Forms { defect },
        })
        .collect();
    let per_equation_max = with_equation_max.then(|| {
        let (idx, max) = defects
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |acc, (i, &d)| {
                if d > acc.1 {
                    (i, d)
                } else {
                    acc
                }
            });
        vec![EquationMax {
            equation: "defect".to_string(),
            point_index: idx,
            max_abs: max,
        }]
    });
    Report {
        potential: potential.to_string(),
        system: "forms".to_string(),
        tolerance,
        per_point,
        sup_norm,
        pass: sup_norm <= tolerance,
        detected_scale: None,
        per_equation_max,
    }
}

/// Outcome document of the jacobi command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JacobiReport {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_defect: f64,
    pub pass: bool,
}

/// Solve command configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfigFile {
    pub degree: u8,
    pub collocation: CollocationConfig,
    #[serde(default)]
    pub start: StartSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_lambda0")]
    pub lm_lambda0: f64,
    #[serde(default = "default_tikhonov")]
    pub tikhonov: f64,
}

fn default_max_iter() -> usize {
    50
}
fn default_tol() -> f64 {
    1e-8
}
fn default_lambda0() -> f64 {
    1e-3
}
fn default_tikhonov() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollocationConfig {
    pub count: usize,
    pub seed: u64,
    /// Bounds over (q_re, q_im, zeta_re, zeta_im, v, s); defaults to the
    /// standard box when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
}

/// Per-axis [lo, hi] bounds; omitted axes keep their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_re: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_im: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_re: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_im: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Named(String),
    Coefficients(Vec<f64>),
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec::Named("flat".to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub degree: u8,
    pub converged: bool,
    pub iterations: usize,
    pub final_sup: f64,
    pub final_rms: f64,
    pub coefficients: Vec<f64>,
    pub history: Vec<IterationEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationEntry {
    pub iteration: usize,
    pub sup: f64,
    pub rms: f64,
    pub lambda: f64,
    pub accepted: bool,
}
