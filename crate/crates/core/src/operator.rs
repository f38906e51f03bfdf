//! Square matrices acting on the atoms of an `LpSpace`.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lp_space::{Field, LpSpace, Vector};

/// An `m x m` matrix, row-major, with `(Tx)_i = sum_k M[i][k] x_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Real { dim: usize, entries: Vec<f64> },
    Complex { dim: usize, entries: Vec<Complex64> },
}

impl Operator {
    pub fn real(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        let entries = flatten(rows)?;
        if let Some(index) = entries.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Operator::Real { dim, entries })
    }

    pub fn complex(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        let entries = flatten(rows)?;
        if let Some(index) = entries.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Operator::Complex { dim, entries })
    }

    pub(crate) fn from_real_entries(dim: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Operator::Real { dim, entries }
    }

    pub(crate) fn from_complex_entries(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Operator::Complex { dim, entries }
    }

    pub fn identity(m: usize, field: Field) -> Self {
        let mut e = vec![0.0; m * m];
        for i in 0..m {
            e[i * m + i] = 1.0;
        }
        Operator::from_real_entries(m, e).with_field(field)
    }

    pub fn zero(m: usize, field: Field) -> Self {
        Operator::from_real_entries(m, vec![0.0; m * m]).with_field(field)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let m = d.len();
        let mut e = vec![0.0; m * m];
        for (i, &v) in d.iter().enumerate() {
            e[i * m + i] = v;
        }
        Operator::from_real_entries(m, e)
    }

    /// `T(x, y) = (-y, x)` on two atoms.
    pub fn rotation() -> Self {
        Operator::from_real_entries(2, vec![0.0, -1.0, 1.0, 0.0])
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Real { dim, .. } | Operator::Complex { dim, .. } => *dim,
        }
    }

    pub fn field(&self) -> Field {
        match self {
            Operator::Real { .. } => Field::Real,
            Operator::Complex { .. } => Field::Complex,
        }
    }

    pub fn real_entries(&self) -> Result<&[f64]> {
        match self {
            Operator::Real { entries, .. } => Ok(entries),
            Operator::Complex { .. } => Err(Error::FieldMismatch {
                expected: Field::Real,
                found: Field::Complex,
            }),
        }
    }

    pub fn entry(&self, i: usize, k: usize) -> Complex64 {
        match self {
            Operator::Real { dim, entries } => Complex64::new(entries[i * dim + k], 0.0),
            Operator::Complex { dim, entries } => entries[i * dim + k],
        }
    }

    /// Same matrix over the complex field.
    pub fn to_complex(&self) -> Operator {
        match self {
            Operator::Real { dim, entries } => Operator::Complex {
                dim: *dim,
                entries: entries.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
            },
            c => c.clone(),
        }
    }

    fn with_field(self, field: Field) -> Self {
        match field {
            Field::Real => self,
            Field::Complex => self.to_complex(),
        }
    }

    pub fn scale(&self, c: f64) -> Operator {
        match self {
            Operator::Real { dim, entries } => Operator::Real {
                dim: *dim,
                entries: entries.iter().map(|e| e * c).collect(),
            },
            Operator::Complex { dim, entries } => Operator::Complex {
                dim: *dim,
                entries: entries.iter().map(|e| e * c).collect(),
            },
        }
    }

    /// Entrywise sum; mixed fields promote to complex.
    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(match (self, other) {
            (Operator::Real { dim, entries: a }, Operator::Real { entries: b, .. }) => Operator::Real {
                dim: *dim,
                entries: a.iter().zip(b).map(|(a, b)| a + b).collect(),
            },
            _ => {
                let (Operator::Complex { dim, entries: a }, Operator::Complex { entries: b, .. }) =
                    (self.to_complex(), other.to_complex())
                else {
                    unreachable!()
                };
                Operator::Complex {
                    dim,
                    entries: a.iter().zip(&b).map(|(a, b)| a + b).collect(),
                }
            }
        })
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        match self {
            Operator::Real { entries, .. } => entries.iter().map(|e| e * e).sum(),
            Operator::Complex { entries, .. } => entries.iter().map(|e| e.norm_sqr()).sum(),
        }
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        let m = self.dim();
        (0..m).map(|i| (0..m).map(|k| self.entry(i, k)).collect()).collect()
    }

    pub(crate) fn check_space(&self, space: &LpSpace) -> Result<()> {
        if self.dim() != space.m() {
            return Err(Error::DimensionMismatch {
                expected: space.m(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

fn flatten<T: Copy>(rows: Vec<Vec<T>>) -> Result<Vec<T>> {
    let dim = rows.len();
    if dim == 0 {
        return Err(Error::EmptySpace);
    }
    let mut out = Vec::with_capacity(dim * dim);
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        out.extend(row);
    }
    Ok(out)
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<R> {
            field: Field,
            matrix: Vec<Vec<R>>,
        }
        let m = self.dim();
        match self {
            Operator::Real { entries, .. } => Repr {
                field: Field::Real,
                matrix: entries.chunks(m).map(<[f64]>::to_vec).collect(),
            }
            .serialize(serializer),
            Operator::Complex { entries, .. } => Repr {
                field: Field::Complex,
                matrix: entries.chunks(m).map(<[Complex64]>::to_vec).collect(),
            }
            .serialize(serializer),
        }
    }
}

pub(crate) fn matvec_real(m: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i * m..(i + 1) * m].iter().zip(x).map(|(a, x)| a * x).sum();
    }
}

pub(crate) fn matvec_complex(m: usize, a: &[Complex64], x: &[Complex64], out: &mut [Complex64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i * m..(i + 1) * m].iter().zip(x).map(|(a, x)| a * x).sum();
    }
}

/// `Tx`. A real operator acts on complex vectors entrywise; a complex operator
/// promotes a real vector.
pub fn apply(space: &LpSpace, t: &Operator, x: &Vector) -> Result<Vector> {
    t.check_space(space)?;
    space.check(x)?;
    let m = space.m();
    Ok(match (t, x) {
        (Operator::Real { entries, .. }, Vector::Real(v)) => {
            let mut out = vec![0.0; m];
            matvec_real(m, entries, v, &mut out);
            Vector::Real(out)
        }
        _ => {
            let Operator::Complex { entries, .. } = t.to_complex() else {
                unreachable!()
            };
            let mut out = vec![Complex64::new(0.0, 0.0); m];
            matvec_complex(m, &entries, &x.to_complex(), &mut out);
            Vector::Complex(out)
        }
    })
}
