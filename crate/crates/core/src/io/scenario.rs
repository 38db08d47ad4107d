use crate::fields::{Ansatz, Physics};
use crate::gauss::BasisState;
use crate::potential::Potential;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One ansatz row: `|a|`, `arg a`, `p̄`, `x̄`, `ς`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub magnitude: f64,
    pub phase: f64,
    pub p: f64,
    pub x: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialState {
    /// `exp(-(x-center)²/(2 width²))`, normalized; grid runs only.
    GridGaussian { center: f64, width: f64 },
    AnsatzTable { rows: Vec<TableRow> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub potential: Potential,
    pub initial: InitialState,
    pub physics: Physics,
    /// Grid wavefunction the ansatz approximates, used as the split-operator reference.
    pub reference: Option<InitialState>,
}

const TABLE_WIDTH: f64 = 0.5;

// |a|, arg a, p̄, x̄
const TABLE_ROWS: [[f64; 4]; 21] = [
    [0.424935, -1.52358, -2.0, -2.05],
    [0.160277, -0.27583, -2.0, -1.69],
    [0.16441, -0.232555, 0.0, -1.93],
    [0.326508, 0.488428, 0.0, -1.57],
    [0.227026, 2.76771, 2.0, -1.81],
    [0.0897529, 1.74287, 2.0, -1.45],
    [0.363191, 2.77319, -2.0, -2.35],
    [0.426131, -0.369591, 0.0, -2.25],
    [0.268861, 0.0324824, 2.0, -2.15],
    [0.151384, -2.35028, -2.0, -6.08333],
    [0.201003, 2.18152, -2.0, -5.08333],
    [1.09911, -0.959581, -2.0, -4.08333],
    [0.159998, 2.25803, -2.0, -3.08333],
    [1.09394, 0.37624, 0.0, -5.75],
    [3.92821, -0.214463, 0.0, -4.75],
    [6.64557, 0.282041, 0.0, -3.75],
    [1.75203, -0.368937, 0.0, -2.75],
    [0.391672, -0.246873, 2.0, -5.41667],
    [0.0519809, 1.89087, 2.0, -4.41667],
    [0.925349, -1.1339, 2.0, -3.41667],
    [0.593327, 2.0164, 2.0, -2.41667],
];

/// Center of the Gaussian the tunneling table reproduces.
pub const BENCHMARK_CENTER: f64 = -4.0;

pub fn table_rows() -> Vec<TableRow> {
    TABLE_ROWS
        .iter()
        .map(|r| TableRow { magnitude: r[0], phase: r[1], p: r[2], x: r[3], width: TABLE_WIDTH })
        .collect()
}

/// The 21-state tunneling benchmark ansatz exactly as tabulated (not normalized).
pub fn load_table_i() -> Ansatz {
    ansatz_from_rows(&table_rows()).expect("embedded table is valid")
}

pub fn ansatz_from_rows(rows: &[TableRow]) -> Result<Ansatz> {
    let amplitudes = rows.iter().map(|r| Complex64::from_polar(r.magnitude, r.phase)).collect();
    let basis = rows.iter().map(|r| BasisState::scalar(r.p, r.x, r.width)).collect::<Result<Vec<_>>>()?;
    Ansatz::new(amplitudes, basis, 0.0)
}

fn ground_row() -> TableRow {
    TableRow { magnitude: 1.0, phase: 0.0, p: 0.0, x: 0.0, width: 1.0 }
}

impl Scenario {
    pub fn builtin(name: &str) -> Result<Self> {
        let physics = Physics::unit(1);
        let s = match name {
            "harmonic" => Scenario {
                name: name.into(),
                potential: Potential::harmonic(),
                initial: InitialState::AnsatzTable { rows: vec![ground_row()] },
                physics,
                reference: Some(InitialState::GridGaussian { center: 0.0, width: 1.0 }),
            },
            "double-well" => Scenario {
                name: name.into(),
                potential: Potential::double_well(),
                initial: InitialState::AnsatzTable { rows: vec![ground_row()] },
                physics,
                reference: Some(InitialState::GridGaussian { center: 0.0, width: 1.0 }),
            },
            "barrier" => Scenario {
                name: name.into(),
                potential: Potential::barrier(),
                initial: InitialState::AnsatzTable { rows: table_rows() },
                physics,
                reference: Some(InitialState::GridGaussian { center: BENCHMARK_CENTER, width: 1.0 }),
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario {other:?}; expected one of {}",
                    Self::BUILTIN.join(", ")
                )))
            }
        };
        Ok(s)
    }

    pub const BUILTIN: [&'static str; 3] = ["harmonic", "double-well", "barrier"];

    pub fn dims(&self) -> usize {
        self.potential.dims
    }

    /// Initial ansatz, normalized; grid-only scenarios have none.
    pub fn initial_ansatz(&self) -> Result<Ansatz> {
        match &self.initial {
            InitialState::AnsatzTable { rows } => Ok(ansatz_from_rows(rows)?.normalized(self.physics.hbar)),
            InitialState::GridGaussian { .. } => {
                Err(Error::Config(format!("scenario {} has no ansatz initial state", self.name)))
            }
        }
    }

    /// Shared basis width of the initial ansatz.
    pub fn basis_widths(&self) -> Result<Vec<f64>> {
        Ok(self.initial_ansatz()?.widths().to_vec())
    }
}

/// Potential values at fixed points, guarding the built-in definitions.
pub const GOLDEN_POINTS: [f64; 5] = [-3.7, -1.2, 0.0, 0.45, 2.9];

pub fn golden_values(name: &str) -> Option<[f64; 5]> {
    match name {
        "harmonic" => Some([6.845, 0.72, 0.0, 0.10125, 4.205]),
        "double-well" => Some([20.723922, 1.107072, 0.0, 0.083845125, 0.741762]),
        "barrier" => Some([6.845, 0.72019622939195774, 25.0, 4.8878224919676355, 4.205]),
        _ => None,
    }
}
