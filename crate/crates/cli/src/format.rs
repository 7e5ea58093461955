//! JSON encoding of complex matrices: row-major nested arrays of `[re, im]`.

use orthomeasure::{CMat, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(pub Vec<Vec<[f64; 2]>>);

impl From<&CMat> for JsonMatrix {
    fn from(m: &CMat) -> Self {
        JsonMatrix(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl JsonMatrix {
    pub fn to_cmat(&self) -> Result<CMat, String> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 {
            return Err("empty matrix".into());
        }
        if let Some(bad) = self.0.iter().position(|r| r.len() != cols) {
            return Err(format!("row {bad} has {} entries, expected {cols}", self.0[bad].len()));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            C64::new(re, im)
        }))
    }
}

pub fn complex_to_json(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn complex_from_json(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}
