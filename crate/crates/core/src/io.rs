//! JSON file formats: matrices, density operators, POVMs, SIC fiducials,
//! and probability vectors.
//!
//! Matrix payloads are `{"d": int, "re": [[float]], "im": [[float]]}` with
//! row-major `d x d` arrays. Operator files wrap this with a `"kind"` tag
//! (`"density"`, `"hermitian"`, or `"povm"` with an `"effects"` list). SIC
//! files store only the fiducial plus the conventions needed to regenerate
//! the orbit; projectors are never stored.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::ComplexMatrix;
use crate::operator::{DensityOperator, HermitianOperator, OperatorError, Povm};
use crate::rep::ProbVector;
use crate::sic::{Fiducial, SicError};
use crate::tolerance::ToleranceSet;

/// The phase convention every SIC file declares.
pub const PHASE_CONVENTION: &str = "tau=-exp(i*pi/d)";
/// The element-ordering convention every SIC file declares.
pub const ELEMENT_ORDER: &str = "lex(p,q)";

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error in {path}: field `{field}`: {message}")]
    Schema {
        path: String,
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Sic(#[from] SicError),
}

/// Row-major complex matrix payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let d = m.nrows();
        let mut re = vec![vec![0.0; m.ncols()]; d];
        let mut im = vec![vec![0.0; m.ncols()]; d];
        for r in 0..d {
            for c in 0..m.ncols() {
                let z = m.as_dmatrix()[(r, c)];
                re[r][c] = z.re;
                im[r][c] = z.im;
            }
        }
        Self { d, re, im }
    }

    pub fn to_matrix(&self, path: &str) -> Result<ComplexMatrix, FileError> {
        let d = self.d;
        if d == 0 {
            return Err(FileError::Schema {
                path: path.into(),
                field: "d",
                message: "dimension must be positive".into(),
            });
        }
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != d {
                return Err(FileError::Schema {
                    path: path.into(),
                    field: if name == "re" { "re" } else { "im" },
                    message: format!("expected {d} rows, found {}", part.len()),
                });
            }
            for (r, row) in part.iter().enumerate() {
                if row.len() != d {
                    return Err(FileError::Schema {
                        path: path.into(),
                        field: if name == "re" { "re" } else { "im" },
                        message: format!("row {r} has length {}, expected {d}", row.len()),
                    });
                }
            }
        }
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                entries.push(Complex64::new(self.re[r][c], self.im[r][c]));
            }
        }
        ComplexMatrix::from_rows(d, d, &entries).map_err(|e| FileError::Schema {
            path: path.into(),
            field: "re",
            message: e.to_string(),
        })
    }
}

/// A single-operator file: a matrix payload tagged `"density"` or
/// `"hermitian"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorFile {
    pub kind: String,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

/// A POVM file: `{"kind": "povm", "d": int, "effects": [matrix, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmFile {
    pub kind: String,
    pub d: usize,
    pub effects: Vec<MatrixJson>,
}

/// A SIC file: the fiducial amplitudes plus the conventions that make the
/// orbit reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SicFile {
    pub d: usize,
    pub fiducial_re: Vec<f64>,
    pub fiducial_im: Vec<f64>,
    pub phase_convention: String,
    pub order: String,
    pub max_deviation: f64,
}

impl SicFile {
    pub fn new(fiducial: &Fiducial, max_deviation: f64) -> Self {
        let amp = fiducial.amplitudes();
        Self {
            d: fiducial.dim(),
            fiducial_re: amp.iter().map(|z| z.re).collect(),
            fiducial_im: amp.iter().map(|z| z.im).collect(),
            phase_convention: PHASE_CONVENTION.into(),
            order: ELEMENT_ORDER.into(),
            max_deviation,
        }
    }

    pub fn fiducial(&self, path: &str) -> Result<Fiducial, FileError> {
        self.validate(path)?;
        Fiducial::from_re_im(&self.fiducial_re, &self.fiducial_im).map_err(FileError::Sic)
    }

    /// The stored amplitudes renormalized, for verification of files whose
    /// fiducial has drifted (or been corrupted) off the unit sphere.
    pub fn fiducial_renormalized(&self, path: &str) -> Result<(Fiducial, f64), FileError> {
        self.validate(path)?;
        let v = nalgebra::DVector::from_fn(self.d, |k, _| {
            Complex64::new(self.fiducial_re[k], self.fiducial_im[k])
        });
        let norm = v.norm();
        if norm < 1e-6 {
            return Err(FileError::Schema {
                path: path.into(),
                field: "fiducial_re",
                message: format!("fiducial norm {norm} is too small to renormalize"),
            });
        }
        let fiducial = Fiducial::new(v.normalize()).map_err(FileError::Sic)?;
        Ok((fiducial, (norm - 1.0).abs()))
    }

    fn validate(&self, path: &str) -> Result<(), FileError> {
        if self.d == 0 {
            return Err(FileError::Schema {
                path: path.into(),
                field: "d",
                message: "dimension must be positive".into(),
            });
        }
        if self.fiducial_re.len() != self.d || self.fiducial_im.len() != self.d {
            return Err(FileError::Schema {
                path: path.into(),
                field: "fiducial_re",
                message: format!(
                    "expected {} amplitudes, found re: {}, im: {}",
                    self.d,
                    self.fiducial_re.len(),
                    self.fiducial_im.len()
                ),
            });
        }
        if self.phase_convention != PHASE_CONVENTION {
            return Err(FileError::Schema {
                path: path.into(),
                field: "phase_convention",
                message: format!(
                    "unsupported convention `{}`, expected `{PHASE_CONVENTION}`",
                    self.phase_convention
                ),
            });
        }
        if self.order != ELEMENT_ORDER {
            return Err(FileError::Schema {
                path: path.into(),
                field: "order",
                message: format!("unsupported order `{}`, expected `{ELEMENT_ORDER}`", self.order),
            });
        }
        Ok(())
    }
}

/// A probability-vector file referencing the SIC it was computed against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PVectorFile {
    pub d: usize,
    pub sic_ref: String,
    pub p: Vec<f64>,
}

impl PVectorFile {
    pub fn prob_vector(&self, path: &str) -> Result<ProbVector, FileError> {
        if self.p.len() != self.d * self.d {
            return Err(FileError::Schema {
                path: path.into(),
                field: "p",
                message: format!("expected {} entries, found {}", self.d * self.d, self.p.len()),
            });
        }
        ProbVector::new(self.p.clone()).map_err(|e| FileError::Schema {
            path: path.into(),
            field: "p",
            message: e.to_string(),
        })
    }
}

/// A check request: the SIC, a state (as a probability vector or an
/// operator file reference), the measurement, and optionally a claimed
/// distribution and `(alpha, beta)` overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRequest {
    pub sic_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_ref: Option<String>,
    pub povm_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_claimed: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

fn read_to_string(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|source| FileError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, FileError> {
    serde_json::from_str(text).map_err(|e| FileError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| FileError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a `"density"`-tagged operator file and validates it.
pub fn load_density(path: &Path, tol: &ToleranceSet) -> Result<DensityOperator, FileError> {
    let file: OperatorFile = parse(path, &read_to_string(path)?)?;
    if file.kind != "density" {
        return Err(FileError::Schema {
            path: path.display().to_string(),
            field: "kind",
            message: format!("expected `density`, found `{}`", file.kind),
        });
    }
    let m = file.matrix.to_matrix(&path.display().to_string())?;
    DensityOperator::new(m, tol).map_err(FileError::Operator)
}

/// Loads a `"density"`- or `"hermitian"`-tagged operator file without
/// enforcing positivity.
pub fn load_hermitian(path: &Path, tol: &ToleranceSet) -> Result<HermitianOperator, FileError> {
    let file: OperatorFile = parse(path, &read_to_string(path)?)?;
    if file.kind != "density" && file.kind != "hermitian" {
        return Err(FileError::Schema {
            path: path.display().to_string(),
            field: "kind",
            message: format!("expected `density` or `hermitian`, found `{}`", file.kind),
        });
    }
    let m = file.matrix.to_matrix(&path.display().to_string())?;
    HermitianOperator::new(m, tol).map_err(FileError::Operator)
}

pub fn save_density(path: &Path, rho: &DensityOperator) -> Result<(), FileError> {
    write_json(
        path,
        &OperatorFile {
            kind: "density".into(),
            matrix: MatrixJson::from_matrix(rho.matrix()),
        },
    )
}

pub fn save_hermitian(path: &Path, op: &HermitianOperator, kind: &str) -> Result<(), FileError> {
    write_json(
        path,
        &OperatorFile {
            kind: kind.into(),
            matrix: MatrixJson::from_matrix(op.matrix()),
        },
    )
}

pub fn load_povm(path: &Path, tol: &ToleranceSet) -> Result<Povm, FileError> {
    let file: PovmFile = parse(path, &read_to_string(path)?)?;
    if file.kind != "povm" {
        return Err(FileError::Schema {
            path: path.display().to_string(),
            field: "kind",
            message: format!("expected `povm`, found `{}`", file.kind),
        });
    }
    let display = path.display().to_string();
    let mut effects = Vec::with_capacity(file.effects.len());
    for m in &file.effects {
        if m.d != file.d {
            return Err(FileError::Schema {
                path: display,
                field: "effects",
                message: format!("effect dimension {} differs from file dimension {}", m.d, file.d),
            });
        }
        effects.push(HermitianOperator::new(m.to_matrix(&display)?, tol)?);
    }
    Povm::new(effects, tol).map_err(FileError::Operator)
}

pub fn save_povm(path: &Path, povm: &Povm) -> Result<(), FileError> {
    write_json(
        path,
        &PovmFile {
            kind: "povm".into(),
            d: povm.dim(),
            effects: povm
                .effects()
                .iter()
                .map(|e| MatrixJson::from_matrix(e.matrix()))
                .collect(),
        },
    )
}

pub fn load_sic_file(path: &Path) -> Result<SicFile, FileError> {
    parse(path, &read_to_string(path)?)
}

pub fn save_sic_file(path: &Path, file: &SicFile) -> Result<(), FileError> {
    write_json(path, file)
}

pub fn load_p_vector_file(path: &Path) -> Result<PVectorFile, FileError> {
    parse(path, &read_to_string(path)?)
}

pub fn save_p_vector_file(path: &Path, file: &PVectorFile) -> Result<(), FileError> {
    write_json(path, file)
}

pub fn load_check_request(path: &Path) -> Result<CheckRequest, FileError> {
    parse(path, &read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_density;
    use nalgebra::DVector;

    #[test]
    fn density_round_trip_is_bitwise() {
        let dir = std::env::temp_dir().join(format!("sicore-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rho.json");
        let rho = random_density(3, 2, 5).unwrap();
        save_density(&path, &rho).unwrap();
        let loaded = load_density(&path, &ToleranceSet::default()).unwrap();
        assert_eq!(rho.matrix(), loaded.matrix());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn mismatched_row_lengths_are_a_schema_error() {
        let json = r#"{"kind":"density","d":2,"re":[[1.0,0.0],[0.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#;
        let file: OperatorFile = serde_json::from_str(json).unwrap();
        let err = file.matrix.to_matrix("inline").unwrap_err();
        assert!(matches!(err, FileError::Schema { field: "re", .. }));
    }

    #[test]
    fn wrong_kind_is_a_schema_error() {
        let dir = std::env::temp_dir().join(format!("sicore-io-kind-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rho.json");
        save_density(&path, &random_density(2, 1, 8).unwrap()).unwrap();
        let err = load_povm(&path, &ToleranceSet::default()).unwrap_err();
        assert!(matches!(err, FileError::Parse { .. } | FileError::Schema { .. }));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn sic_file_rejects_unknown_conventions() {
        let fiducial = Fiducial::new(DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]))
        .unwrap();
        let mut file = SicFile::new(&fiducial, 0.0);
        file.phase_convention = "tau=+exp(i*pi/d)".into();
        let err = file.fiducial("inline").unwrap_err();
        assert!(matches!(
            err,
            FileError::Schema {
                field: "phase_convention",
                ..
            }
        ));
    }
}
