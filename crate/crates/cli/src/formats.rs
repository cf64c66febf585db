//! JSON and CSV documents written and read by the command-line tool.

use std::io::Write;

use ppt_bell_core::bell::{BellFunctional, Scenario};
use ppt_bell_core::linalg::{BipartiteShape, Matrix};
use ppt_bell_core::model::{DensityMatrix, MeasurementParams, MeasurementSet, StateParams};
use ppt_bell_core::optimize::{Diagnostics, SeesawConfig, SimplexConfig};
use serde::{Deserialize, Serialize};

/// Family parameters as one flat object keyed by symbol name.
#[allow(non_snake_case)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub d: usize,
    pub a00: f64,
    pub a01: f64,
    pub a10: f64,
    pub a11: f64,
    pub A: f64,
    pub b00: f64,
    pub b01: f64,
    pub b10: f64,
    pub b11: f64,
    pub B: f64,
    pub u0: f64,
    pub u0p: f64,
    pub u1: f64,
    pub u1p: f64,
    pub U: f64,
    pub v0: f64,
    pub v0p: f64,
    pub v1: f64,
    pub v1p: f64,
    pub V: f64,
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub y0: f64,
    pub y1: f64,
}

impl ParamsDoc {
    pub fn new(d: usize, s: &StateParams, m: &MeasurementParams) -> Self {
        ParamsDoc {
            d,
            a00: s.a00,
            a01: s.a01,
            a10: s.a10,
            a11: s.a11,
            A: s.A,
            b00: s.b00,
            b01: s.b01,
            b10: s.b10,
            b11: s.b11,
            B: s.B,
            u0: s.u0,
            u0p: s.u0p,
            u1: s.u1,
            u1p: s.u1p,
            U: s.U,
            v0: s.v0,
            v0p: s.v0p,
            v1: s.v1,
            v1p: s.v1p,
            V: s.V,
            x0: m.x0,
            x1: m.x1,
            x2: m.x2,
            y0: m.y0,
            y1: m.y1,
        }
    }

    pub fn state(&self) -> StateParams {
        StateParams {
            a00: self.a00,
            a01: self.a01,
            a10: self.a10,
            a11: self.a11,
            A: self.A,
            b00: self.b00,
            b01: self.b01,
            b10: self.b10,
            b11: self.b11,
            B: self.B,
            u0: self.u0,
            u0p: self.u0p,
            u1: self.u1,
            u1p: self.u1p,
            U: self.U,
            v0: self.v0,
            v0p: self.v0p,
            v1: self.v1,
            v1p: self.v1p,
            V: self.V,
        }
    }

    /// Measurement angles as stored; not renormalized.
    pub fn measurements(&self) -> MeasurementParams {
        MeasurementParams {
            x0: self.x0,
            x1: self.x1,
            x2: self.x2,
            y0: self.y0,
            y1: self.y1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub iters: usize,
    pub restarts: usize,
    pub converged: bool,
}

impl From<Diagnostics> for DiagnosticsDoc {
    fn from(d: Diagnostics) -> Self {
        DiagnosticsDoc {
            iters: d.iterations,
            restarts: d.restarts,
            converged: d.converged,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexConfigDoc {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol_f: f64,
    pub tol_x: f64,
    pub seed: u64,
    pub init_scale: f64,
    pub polish_rounds: usize,
}

impl From<SimplexConfig> for SimplexConfigDoc {
    fn from(c: SimplexConfig) -> Self {
        SimplexConfigDoc {
            restarts: c.restarts,
            max_iters: c.max_iters,
            tol_f: c.tol_f,
            tol_x: c.tol_x,
            seed: c.seed,
            init_scale: c.init_scale,
            polish_rounds: c.polish_rounds,
        }
    }
}

impl From<SimplexConfigDoc> for SimplexConfig {
    fn from(c: SimplexConfigDoc) -> Self {
        SimplexConfig {
            restarts: c.restarts,
            max_iters: c.max_iters,
            tol_f: c.tol_f,
            tol_x: c.tol_x,
            seed: c.seed,
            init_scale: c.init_scale,
            polish_rounds: c.polish_rounds,
        }
    }
}

/// Outcome of a family optimization at one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResultDoc {
    pub d: usize,
    pub value: f64,
    pub params: ParamsDoc,
    pub diagnostics: DiagnosticsDoc,
    pub seed: u64,
    pub config: SimplexConfigDoc,
}

/// Anything `verify` accepts: a bare parameter object or an optimization result.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ParamsInput {
    Result(OptResultDoc),
    Seesaw(SeesawDoc),
    Params(ParamsDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffDoc {
    pub x: usize,
    pub y: usize,
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalDoc {
    pub scenario: ScenarioDoc,
    pub coeffs: Vec<CoeffDoc>,
    pub bound: f64,
}

impl From<&BellFunctional> for FunctionalDoc {
    fn from(f: &BellFunctional) -> Self {
        FunctionalDoc {
            scenario: ScenarioDoc {
                alice: f.scenario().alice.clone(),
                bob: f.scenario().bob.clone(),
            },
            coeffs: f
                .terms()
                .map(|(c, w)| CoeffDoc {
                    x: c.x,
                    y: c.y,
                    a: c.a,
                    b: c.b,
                    w,
                })
                .collect(),
            bound: f.classical_bound(),
        }
    }
}

impl TryFrom<&FunctionalDoc> for BellFunctional {
    type Error = ppt_bell_core::Error;

    fn try_from(doc: &FunctionalDoc) -> Result<Self, Self::Error> {
        let scenario = Scenario::new(doc.scenario.alice.clone(), doc.scenario.bob.clone())?;
        let mut f = BellFunctional::new(scenario, doc.bound);
        for c in &doc.coeffs {
            f.add(c.x, c.y, c.a, c.b, c.w)?;
        }
        Ok(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfigDoc {
    pub restarts: usize,
    pub max_cycles: usize,
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub sdp_tol: f64,
    pub seed: u64,
}

impl From<SeesawConfig> for SeesawConfigDoc {
    fn from(c: SeesawConfig) -> Self {
        SeesawConfigDoc {
            restarts: c.restarts,
            max_cycles: c.max_cycles,
            tol_rel: c.tol_rel,
            tol_abs: c.tol_abs,
            sdp_tol: c.sdp_tol,
            seed: c.seed,
        }
    }
}

/// Row-major square matrix.
pub type MatrixDoc = Vec<Vec<f64>>;

pub fn matrix_doc(m: &Matrix) -> MatrixDoc {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn matrix_from_doc(rows: &MatrixDoc) -> ppt_bell_core::Result<Matrix> {
    let n = rows.len();
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    if rows.iter().any(|r| r.len() != n) {
        return Err(ppt_bell_core::Error::Dimension {
            context: "square matrix rows",
            expected: n,
            found: rows.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
        });
    }
    Matrix::from_vec(n, n, data)
}

/// Best state and measurements of a seesaw run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawDoc {
    /// Dimension of the `I_d` functional.
    pub d: usize,
    /// Local dimension of the state.
    pub state_dim: usize,
    pub value: f64,
    pub restart_values: Vec<f64>,
    pub history: Vec<f64>,
    pub diagnostics: DiagnosticsDoc,
    pub seed: u64,
    pub config: SeesawConfigDoc,
    pub rho: MatrixDoc,
    /// `alice[x][a]`, effects of Alice.
    pub alice: Vec<Vec<MatrixDoc>>,
    /// `bob[y][b]`, effects of Bob.
    pub bob: Vec<Vec<MatrixDoc>>,
}

impl SeesawDoc {
    pub fn state(&self) -> ppt_bell_core::Result<DensityMatrix> {
        DensityMatrix::new(
            BipartiteShape::square(self.state_dim)?,
            matrix_from_doc(&self.rho)?,
        )
    }

    pub fn measurement_set(&self) -> ppt_bell_core::Result<MeasurementSet> {
        let convert = |side: &Vec<Vec<MatrixDoc>>| -> ppt_bell_core::Result<Vec<Vec<Matrix>>> {
            side.iter()
                .map(|s| s.iter().map(matrix_from_doc).collect())
                .collect()
        };
        MeasurementSet::new(
            BipartiteShape::square(self.state_dim)?,
            convert(&self.alice)?,
            convert(&self.bob)?,
        )
    }
}

pub fn measurement_docs(ms: &MeasurementSet) -> (Vec<Vec<MatrixDoc>>, Vec<Vec<MatrixDoc>>) {
    let sc = ms.scenario();
    let alice = (0..sc.alice.len())
        .map(|x| ms.alice_setting(x).iter().map(matrix_doc).collect())
        .collect();
    let bob = (0..sc.bob.len())
        .map(|y| ms.bob_setting(y).iter().map(matrix_doc).collect())
        .collect();
    (alice, bob)
}

/// Twelve significant digits.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.11e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub d: usize,
    pub value: f64,
    pub mode: String,
    pub seed: u64,
}

/// Writes rows under the header `d,Q,mode,seed`.
pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "Q", "mode", "seed"])?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            fmt_value(r.value),
            r.mode.clone(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table written by [`write_csv`].
pub fn read_csv(text: &str) -> csv::Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        rows.push(CsvRow {
            d: field(0).parse().unwrap_or(0),
            value: field(1).parse().unwrap_or(f64::NAN),
            mode: field(2),
            seed: field(3).parse().unwrap_or(0),
        });
    }
    Ok(rows)
}
