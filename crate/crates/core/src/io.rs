//! Problem and report file formats.
//!
//! Problems arrive as JSON: a scale (family spec or raw points), symbolic
//! tags or tables for `phi` and the forcing, and exactly one of
//! `lambdas`/`alphas`. Reports mirror the in-memory results; every float is
//! emitted with 17 significant digits so parsing a report reproduces the
//! doubles bit for bit. Complex values serialize as `[re, im]` pairs and are
//! accepted either as pairs or as bare reals.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cascade::CascadeResult;
use crate::error::{Error, Result};
use crate::operator::{CauchyEulerProblem, CoefficientSpec, SpectrumSpec};
use crate::scale::{GridFunction, TimeScale};
use crate::stability::{generate_scale, ScaleFamilySpec, StabilityReport};
use crate::tol::CASCADE_RESIDUAL_REL;

/// A complex number in input position: a bare real or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexIn {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexIn> for Complex64 {
    fn from(value: ComplexIn) -> Self {
        match value {
            ComplexIn::Real(re) => Complex64::new(re, 0.0),
            ComplexIn::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Complex samples serialized as a sequence of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexTable(pub Vec<Complex64>);

impl From<&GridFunction> for ComplexTable {
    fn from(g: &GridFunction) -> Self {
        Self(g.values().to_vec())
    }
}

impl Serialize for ComplexTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|z| [z.re, z.im]))
    }
}

impl<'de> Deserialize<'de> for ComplexTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<ComplexIn>::deserialize(deserializer)?;
        Ok(Self(raw.into_iter().map(Complex64::from).collect()))
    }
}

/// The scale of a problem file: explicit points or a named family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleInput {
    Points(Vec<f64>),
    Family(ScaleFamilySpec),
}

impl ScaleInput {
    pub fn build(&self) -> Result<TimeScale> {
        match self {
            Self::Points(points) => TimeScale::new(points.clone()),
            Self::Family(spec) => generate_scale(spec),
        }
    }
}

/// A coefficient or forcing function: the tag `"t"`, a tag `"const:<value>"`,
/// or a raw table with one entry per scale point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Tag(String),
    Table(Vec<ComplexIn>),
}

impl FieldSpec {
    pub fn evaluate(&self, scale: &Arc<TimeScale>) -> Result<GridFunction> {
        match self {
            Self::Tag(tag) if tag == "t" => {
                Ok(GridFunction::sample_full(scale, |t| Complex64::new(t, 0.0)))
            }
            Self::Tag(tag) => {
                let Some(raw) = tag.strip_prefix("const:") else {
                    return Err(Error::InvalidProblem(format!(
                        "unknown field tag {tag:?}; expected \"t\", \"const:<value>\", or a table"
                    )));
                };
                let value: f64 = raw.trim().parse().map_err(|_| {
                    Error::InvalidProblem(format!("cannot parse constant from {tag:?}"))
                })?;
                Ok(GridFunction::sample_full(scale, |_| {
                    Complex64::new(value, 0.0)
                }))
            }
            Self::Table(entries) => {
                if entries.len() != scale.len() {
                    return Err(Error::InvalidProblem(format!(
                        "table has {} entries but the scale has {} points",
                        entries.len(),
                        scale.len()
                    )));
                }
                GridFunction::from_values(
                    Arc::clone(scale),
                    0,
                    entries.iter().map(|&e| Complex64::from(e)).collect(),
                )
            }
        }
    }
}

/// The on-disk description of a Cauchy-Euler problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub scale: ScaleInput,
    pub phi: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<ComplexIn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<ComplexIn>>,
    pub forcing: FieldSpec,
    pub order: usize,
}

/// Validates the file and assembles the problem. Exactly one of
/// `lambdas`/`alphas` must be present and must agree with `order`.
pub fn build_problem(file: &ProblemFile) -> Result<CauchyEulerProblem> {
    let scale = Arc::new(file.scale.build()?);
    let phi = file.phi.evaluate(&scale)?;
    let forcing = file.forcing.evaluate(&scale)?;
    match (&file.lambdas, &file.alphas) {
        (Some(lambdas), None) => {
            if lambdas.len() != file.order {
                return Err(Error::InvalidProblem(format!(
                    "order is {} but {} characteristic values were given",
                    file.order,
                    lambdas.len()
                )));
            }
            let spectrum =
                SpectrumSpec::new(lambdas.iter().map(|&l| Complex64::from(l)).collect())?;
            CauchyEulerProblem::new(scale, phi, spectrum, forcing)
        }
        (None, Some(alphas)) => {
            if alphas.len() != file.order + 1 {
                return Err(Error::InvalidProblem(format!(
                    "order is {} but {} coefficients were given (need order + 1)",
                    file.order,
                    alphas.len()
                )));
            }
            let coeffs =
                CoefficientSpec::new(alphas.iter().map(|&a| Complex64::from(a)).collect())?;
            CauchyEulerProblem::from_alphas(scale, phi, coeffs, forcing)
        }
        (Some(_), Some(_)) | (None, None) => Err(Error::InvalidProblem(
            "exactly one of \"lambdas\" and \"alphas\" must be present".into(),
        )),
    }
}

/// Report emitted by a solve run: the reconstructed solution, all stage
/// data, and the residual certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub tool_version: String,
    pub input_digest: String,
    pub scale: Vec<f64>,
    pub order: usize,
    pub lambdas: ComplexTable,
    pub alphas: ComplexTable,
    pub anchors: Vec<usize>,
    /// Sup-norm of the input's defect: the epsilon of the stability setup.
    pub epsilon: f64,
    pub sup_deviation: f64,
    pub k_analytic: f64,
    pub stage_constants: Vec<f64>,
    pub a_floor: f64,
    pub x: ComplexTable,
    pub u: ComplexTable,
    pub stages: Vec<ComplexTable>,
    pub g_chain: Vec<ComplexTable>,
    /// Sup-norm of the defect of `u`, certified against the residual contract.
    pub u_residual_sup: f64,
    pub contract_met: bool,
}

impl SolveReport {
    pub fn from_run(
        problem: &CauchyEulerProblem,
        x: &GridFunction,
        run: &CascadeResult,
        epsilon: f64,
        k_analytic: f64,
        stage_constants: Vec<f64>,
        tool_version: &str,
        input_digest: &str,
    ) -> Result<Self> {
        let sup_deviation = x.sub(&run.u)?.sup_norm();
        let norm_floor = 1.0 + problem.forcing().sup_norm() + run.u.sup_norm();
        Ok(Self {
            tool_version: tool_version.to_string(),
            input_digest: input_digest.to_string(),
            scale: problem.scale().points().to_vec(),
            order: problem.order(),
            lambdas: ComplexTable(problem.spectrum().lambdas().to_vec()),
            alphas: ComplexTable(problem.alphas().alphas().to_vec()),
            anchors: run.anchors.clone(),
            epsilon,
            sup_deviation,
            k_analytic,
            stage_constants,
            a_floor: problem.a_floor(),
            x: ComplexTable::from(x),
            u: ComplexTable::from(&run.u),
            stages: run.stages.iter().map(ComplexTable::from).collect(),
            g_chain: run.g_chain.iter().map(ComplexTable::from).collect(),
            u_residual_sup: run.residual_sup,
            contract_met: run.residual_sup <= CASCADE_RESIDUAL_REL * norm_floor,
        })
    }
}

/// Aggregate report of a multi-trial stability run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRunReport {
    pub tool_version: String,
    pub input_digest: String,
    pub magnitude: f64,
    pub shape: String,
    pub base_seed: u64,
    pub trials: usize,
    pub k_analytic: f64,
    pub stage_constants: Vec<f64>,
    pub a_floor: f64,
    pub max_k_empirical: Option<f64>,
    pub all_bounds_satisfied: bool,
    pub trial_reports: Vec<StabilityReport>,
}

/// Serializes with every `f64` written as 17 significant digits
/// (`{:.16e}`), which round-trips double precision exactly.
pub fn to_json_17<T: Serialize>(value: &T) -> std::result::Result<String, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// `{:.16e}` rendering used everywhere floats leave the process.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Complex rendering for CSV cells: plain float when the imaginary part is
/// zero, `re+imi` / `re-imi` otherwise.
pub fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        fmt_f64(z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", fmt_f64(z.re), fmt_f64(-z.im))
    } else {
        format!("{}+{}i", fmt_f64(z.re), fmt_f64(z.im))
    }
}

/// Writes the plotting table. Columns are fixed: `t, x, u, abs_dev, residual`;
/// the residual cell is empty outside the window where the operator exists.
pub fn write_solution_csv<W: Write>(
    mut writer: W,
    scale: &TimeScale,
    x: &GridFunction,
    u: &GridFunction,
    defect: &GridFunction,
) -> std::io::Result<()> {
    writeln!(writer, "t,x,u,abs_dev,residual")?;
    for i in 0..=scale.max_index() {
        let t = scale.points()[i];
        let xv = x.value(i).ok();
        let uv = u.value(i).ok();
        let dev = match (xv, uv) {
            (Some(a), Some(b)) => Some((a - b).norm()),
            _ => None,
        };
        let cell = |v: Option<String>| v.unwrap_or_default();
        writeln!(
            writer,
            "{},{},{},{},{}",
            fmt_f64(t),
            cell(xv.map(fmt_complex)),
            cell(uv.map(fmt_complex)),
            cell(dev.map(fmt_f64)),
            cell(defect.value(i).ok().map(fmt_complex)),
        )?;
    }
    Ok(())
}
