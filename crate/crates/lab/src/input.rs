//! `file:` inputs.
//!
//! Two JSON schemas are accepted:
//!
//! * `{"kind":"calabi","n":N,"hermitian":[[re,im],...]}`: the Calabi matrix
//!   in the orthonormal `⊙²V^{1,0}` basis, upper triangle in row-major order
//!   (diagonal included, `m(m+1)/2` entries for `m = n(n+1)/2`).
//! * `{"kind":"components","n":N,"entries":[[i,j,k,l,value],...]}`: real
//!   components `R(e_i,e_j,e_k,e_l)` in the frame `e_0..e_{2n-1}` with
//!   `J e_a = e_{a+n}`. Omitted entries are zero; listed entries are spread
//!   over their symmetry orbit and the result is validated.

use std::path::Path;

use calabi_core::curvature::{tensor_from_calabi, AlgebraicCurvatureTensor, SYMMETRY_TOL};
use calabi_core::linalg::CMatrix;
use calabi_core::C64;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TensorFile {
    Calabi { n: usize, hermitian: Vec<[f64; 2]> },
    Components { n: usize, entries: Vec<(usize, usize, usize, usize, f64)> },
}

const MAX_N: usize = 16;

fn schema(msg: impl Into<String>) -> LabError {
    LabError::Schema(msg.into())
}

impl TensorFile {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| schema(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    /// Writes a Calabi-kind file for a Hermitian matrix.
    pub fn calabi(n: usize, h: &CMatrix) -> Self {
        let m = h.rows();
        let mut hermitian = Vec::with_capacity(m * (m + 1) / 2);
        for r in 0..m {
            for c in r..m {
                hermitian.push([h[(r, c)].re, h[(r, c)].im]);
            }
        }
        TensorFile::Calabi { n, hermitian }
    }

    pub fn into_tensor(self) -> Result<AlgebraicCurvatureTensor, LabError> {
        match self {
            TensorFile::Calabi { n, hermitian } => {
                if n == 0 || n > MAX_N {
                    return Err(schema(format!("n must be between 1 and {MAX_N}, got {n}")));
                }
                let m = n * (n + 1) / 2;
                let expected = m * (m + 1) / 2;
                if hermitian.len() != expected {
                    return Err(schema(format!(
                        "'hermitian' needs {expected} upper-triangle entries for n = {n}, got {}",
                        hermitian.len()
                    )));
                }
                let mut h = CMatrix::zeros(m, m);
                let mut it = hermitian.iter().enumerate();
                for r in 0..m {
                    for c in r..m {
                        let (idx, &[re, im]) = it.next().expect("length checked");
                        if !re.is_finite() || !im.is_finite() {
                            return Err(schema(format!("entry {idx} is not finite")));
                        }
                        if r == c && im.abs() > SYMMETRY_TOL * re.abs().max(1.0) {
                            return Err(schema(format!("diagonal entry {idx} has imaginary part {im}")));
                        }
                        let z = if r == c { C64::new(re, 0.0) } else { C64::new(re, im) };
                        h[(r, c)] = z;
                        h[(c, r)] = z.conj();
                    }
                }
                Ok(tensor_from_calabi(n, &h, SYMMETRY_TOL)?)
            }
            TensorFile::Components { n, entries } => {
                if n == 0 || n > MAX_N {
                    return Err(schema(format!("n must be between 1 and {MAX_N}, got {n}")));
                }
                let d = 2 * n;
                let mut list = Vec::with_capacity(entries.len());
                for (idx, (i, j, k, l, v)) in entries.into_iter().enumerate() {
                    if i >= d || j >= d || k >= d || l >= d {
                        return Err(schema(format!("entry {idx}: indices must be below {d}")));
                    }
                    if !v.is_finite() {
                        return Err(schema(format!("entry {idx} is not finite")));
                    }
                    list.push(([i, j, k, l], v));
                }
                Ok(AlgebraicCurvatureTensor::from_entries(n, &list, SYMMETRY_TOL)?)
            }
        }
    }
}

pub fn load_tensor(path: &Path) -> Result<AlgebraicCurvatureTensor, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io { path: path.display().to_string(), source: e })?;
    TensorFile::from_json(&text)?.into_tensor()
}
