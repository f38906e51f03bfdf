//! Finite weighted `L_p` spaces.
//!
//! A space is a finite set of atoms `0..m`, each carrying a positive weight
//! (its measure), together with an exponent `1 < p < inf`. Vectors are real or
//! complex functions on the atoms; integrals are weighted sums.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar field of a vector or operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// A discrete measure space with `m` atoms and exponent `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSpace {
    p: f64,
    q: f64,
    weights: Vec<f64>,
}

impl LpSpace {
    pub fn new(p: f64, weights: Vec<f64>) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeight { index, value });
        }
        Ok(Self {
            p,
            q: conjugate_exponent(p),
            weights,
        })
    }

    /// `l_p^m` with counting measure.
    pub fn uniform(p: f64, m: usize) -> Result<Self> {
        Self::new(p, vec![1.0; m])
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p / (p - 1)`.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The same atoms and weights with exponent `p` replaced.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        Self::new(p, self.weights.clone())
    }

    /// Checks that `x` lives on this space and has finite entries.
    pub fn check(&self, x: &Vector) -> Result<()> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: x.len(),
            });
        }
        let bad = match x {
            Vector::Real(v) => v.iter().position(|e| !e.is_finite()),
            Vector::Complex(v) => v.iter().position(|e| !e.is_finite()),
        };
        match bad {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// A point of an `LpSpace`, tagged with its scalar field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", content = "entries", rename_all = "lowercase")]
pub enum Vector {
    Real(Vec<f64>),
    /// Stored as `(re, im)` pairs.
    Complex(Vec<Complex64>),
}

impl Vector {
    pub fn zeros(m: usize, field: Field) -> Self {
        match field {
            Field::Real => Vector::Real(vec![0.0; m]),
            Field::Complex => Vector::Complex(vec![Complex64::new(0.0, 0.0); m]),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Vector::Real(v) => v.len(),
            Vector::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn field(&self) -> Field {
        match self {
            Vector::Real(_) => Field::Real,
            Vector::Complex(_) => Field::Complex,
        }
    }

    pub fn as_real(&self) -> Result<&[f64]> {
        match self {
            Vector::Real(v) => Ok(v),
            Vector::Complex(_) => Err(Error::FieldMismatch {
                expected: Field::Real,
                found: Field::Complex,
            }),
        }
    }

    /// Complex entries; real vectors are embedded with zero imaginary part.
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Vector::Real(v) => v.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
            Vector::Complex(v) => v.clone(),
        }
    }

    pub fn abs(&self) -> Vec<f64> {
        match self {
            Vector::Real(v) => v.iter().map(|e| e.abs()).collect(),
            Vector::Complex(v) => v.iter().map(|e| e.norm()).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Vector {
        match self {
            Vector::Real(v) => Vector::Real(v.iter().map(|e| e * c).collect()),
            Vector::Complex(v) => Vector::Complex(v.iter().map(|e| e * c).collect()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Vector::Real(v) => v.iter().all(|&e| e == 0.0),
            Vector::Complex(v) => v.iter().all(|e| e.re == 0.0 && e.im == 0.0),
        }
    }
}

/// `(sum_i w_i |x_i|^p)^(1/p)`.
pub fn norm(space: &LpSpace, x: &Vector) -> Result<f64> {
    space.check(x)?;
    Ok(pow_sum(space.p, space.weights(), &x.abs()).powf(1.0 / space.p))
}

/// `sum_i w_i |x_i|^p` for magnitudes `a`.
pub(crate) fn pow_sum(p: f64, weights: &[f64], a: &[f64]) -> f64 {
    weights.iter().zip(a).map(|(w, a)| w * a.powf(p)).sum()
}

/// Real duality map `|x|^(p-1) sign(x)` with `sign(0) = 0`.
pub(crate) fn sharp_real(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(p - 1.0).copysign(x)
    }
}

/// Complex duality map `|x|^(p-1) sign(conj x)`.
pub(crate) fn sharp_complex(p: f64, x: Complex64) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else if x.im == 0.0 {
        // same rounding as the real map
        Complex64::new(sharp_real(p, x.re), 0.0)
    } else {
        x.conj() * (r.powf(p - 1.0) / r)
    }
}

/// The duality map `x^#`, an element of `L_q` with
/// `||x||_p^p = ||x^#||_q^q = pair(x^#, x)`.
pub fn sharp(space: &LpSpace, x: &Vector) -> Result<Vector> {
    space.check(x)?;
    let p = space.p;
    Ok(match x {
        Vector::Real(v) => Vector::Real(v.iter().map(|&e| sharp_real(p, e)).collect()),
        Vector::Complex(v) => Vector::Complex(v.iter().map(|&e| sharp_complex(p, e)).collect()),
    })
}

/// The integral `sum_i w_i g_i x_i`, without conjugation.
///
/// The imaginary part is zero when both arguments are real.
pub fn pair(space: &LpSpace, g: &Vector, x: &Vector) -> Result<Complex64> {
    check_shape(space, g)?;
    check_shape(space, x)?;
    let w = space.weights();
    Ok(match (g, x) {
        (Vector::Real(g), Vector::Real(x)) => {
            let s: f64 = w.iter().zip(g).zip(x).map(|((w, g), x)| w * g * x).sum();
            Complex64::new(s, 0.0)
        }
        _ => {
            let (g, x) = (g.to_complex(), x.to_complex());
            w.iter().zip(&g).zip(&x).map(|((w, g), x)| g.scale(*w) * x).sum()
        }
    })
}

fn check_shape(space: &LpSpace, x: &Vector) -> Result<()> {
    if x.len() != space.m() {
        return Err(Error::DimensionMismatch {
            expected: space.m(),
            found: x.len(),
        });
    }
    Ok(())
}

/// Multiplication by the indicator of the atom set `set` (0-based indices).
pub fn restrict(x: &Vector, set: &[usize]) -> Result<Vector> {
    let m = x.len();
    let mut keep = vec![false; m];
    for &i in set {
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, m });
        }
        keep[i] = true;
    }
    Ok(match x {
        Vector::Real(v) => Vector::Real(v.iter().zip(&keep).map(|(&e, &k)| if k { e } else { 0.0 }).collect()),
        Vector::Complex(v) => Vector::Complex(
            v.iter()
                .zip(&keep)
                .map(|(&e, &k)| if k { e } else { Complex64::new(0.0, 0.0) })
                .collect(),
        ),
    })
}

/// Amplitudes `a_j = |x_j|` and phases `theta_j` in `[0, 2pi)` with
/// `x_j = a_j e^{i theta_j}`; `theta_j = 0` where `x_j = 0`.
pub fn amplitude_phase(x: &Vector) -> (Vec<f64>, Vec<f64>) {
    x.to_complex()
        .iter()
        .map(|z| {
            let a = z.norm();
            if a == 0.0 {
                return (0.0, 0.0);
            }
            let mut theta = z.arg();
            if theta < 0.0 {
                theta += TAU;
            }
            // arg of a tiny negative imaginary part can round up to exactly 2pi
            if theta >= TAU {
                theta = 0.0;
            }
            (a, theta)
        })
        .unzip()
}

/// `x / ||x||_p`; `None` for the zero vector.
pub fn normalize(space: &LpSpace, x: &Vector) -> Result<Option<Vector>> {
    let n = norm(space, x)?;
    Ok((n > 0.0).then(|| x.scale(1.0 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_spaces() {
        assert_eq!(LpSpace::uniform(1.0, 2), Err(Error::InvalidExponent(1.0)));
        assert!(LpSpace::uniform(f64::INFINITY, 2).is_err());
        assert_eq!(LpSpace::uniform(3.0, 0), Err(Error::EmptySpace));
        assert!(matches!(
            LpSpace::new(3.0, vec![1.0, 0.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        let s = LpSpace::uniform(3.0, 2).unwrap();
        assert!((1.0 / s.p() + 1.0 / s.q() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let s3 = LpSpace::uniform(3.0, 2).unwrap();
        let n = norm(&s3, &Vector::Real(vec![1.0, 1.0])).unwrap();
        assert!((n - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(norm(&s3, &Vector::Real(vec![0.0, 0.0])).unwrap(), 0.0);
        let s2 = LpSpace::uniform(2.0, 2).unwrap();
        assert!((norm(&s2, &Vector::Real(vec![3.0, 4.0])).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn norm_errors() {
        let s = LpSpace::uniform(3.0, 2).unwrap();
        assert_eq!(
            norm(&s, &Vector::Real(vec![1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
        assert_eq!(
            norm(&s, &Vector::Real(vec![1.0, f64::NAN])),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn sharp_examples() {
        let s3 = LpSpace::uniform(3.0, 2).unwrap();
        assert_eq!(
            sharp(&s3, &Vector::Real(vec![1.0, -1.0])).unwrap(),
            Vector::Real(vec![1.0, -1.0])
        );
        assert_eq!(
            sharp(&s3, &Vector::Real(vec![2.0, 0.0])).unwrap(),
            Vector::Real(vec![4.0, 0.0])
        );
        let s2 = LpSpace::uniform(2.0, 1).unwrap();
        let Vector::Complex(v) = sharp(&s2, &Vector::Complex(vec![c(0.0, 1.0)])).unwrap() else {
            panic!("field changed");
        };
        assert!((v[0] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn pair_examples() {
        let s = LpSpace::uniform(3.0, 2).unwrap();
        let ones = Vector::Real(vec![1.0, 1.0]);
        assert_eq!(pair(&s, &ones, &ones).unwrap(), c(2.0, 0.0));
        let xs = sharp(&s, &ones).unwrap();
        assert_eq!(pair(&s, &xs, &ones).unwrap().re, 2.0);
        assert_eq!(pair(&s, &Vector::Real(vec![0.0, 0.0]), &ones).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn restrict_examples() {
        let x = Vector::Real(vec![1.0, 2.0, 3.0]);
        assert_eq!(restrict(&x, &[1]).unwrap(), Vector::Real(vec![0.0, 2.0, 0.0]));
        assert!(restrict(&x, &[]).unwrap().is_zero());
        assert_eq!(restrict(&x, &[0, 1, 2]).unwrap(), x);
        assert_eq!(restrict(&x, &[3]), Err(Error::IndexOutOfRange { index: 3, m: 3 }));
    }

    #[test]
    fn amplitude_phase_examples() {
        let (a, t) = amplitude_phase(&Vector::Complex(vec![c(1.0, 1.0) / 2f64.sqrt()]));
        assert!((a[0] - 1.0).abs() < 1e-15 && (t[0] - FRAC_PI_4).abs() < 1e-15);
        let (a, t) = amplitude_phase(&Vector::Complex(vec![c(-2.0, 0.0)]));
        assert!((a[0] - 2.0).abs() < 1e-15 && (t[0] - PI).abs() < 1e-15);
        assert_eq!(
            amplitude_phase(&Vector::Complex(vec![c(0.0, 0.0)])),
            (vec![0.0], vec![0.0])
        );
        // -0.0 imaginary part must not produce theta = -pi
        let (_, t) = amplitude_phase(&Vector::Complex(vec![c(-1.0, -0.0)]));
        assert!(t[0] >= 0.0 && t[0] < TAU);
    }

    fn space_and_vector(complex: bool) -> impl Strategy<Value = (LpSpace, Vector)> {
        (1usize..7, 1.05f64..8.0).prop_flat_map(move |(m, p)| {
            (
                prop::collection::vec(0.1f64..4.0, m),
                prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), m),
            )
                .prop_map(move |(w, e)| {
                    let x = if complex {
                        Vector::Complex(e.iter().map(|&(r, i)| c(r, i)).collect())
                    } else {
                        Vector::Real(e.iter().map(|&(r, _)| r).collect())
                    };
                    (LpSpace::new(p, w).unwrap(), x)
                })
        })
    }

    fn check_duality(space: &LpSpace, x: &Vector) {
        let xs = sharp(space, x).unwrap();
        let np = norm(space, x).unwrap();
        let npp = np.powf(space.p());
        let dual = space.with_exponent(space.q()).unwrap();
        let nq = norm(&dual, &xs).unwrap();
        let scale = npp.max(1.0);
        assert!((nq.powf(space.q()) - npp).abs() <= 1e-10 * scale);
        let pr = pair(space, &xs, x).unwrap();
        assert!((pr.re - npp).abs() <= 1e-10 * scale);
        assert!(pr.im.abs() <= 1e-10 * scale);
        // Hölder saturation
        assert!((pr.re - nq * np).abs() <= 1e-10 * scale);
    }

    proptest! {
        #[test]
        fn duality_identities_real((space, x) in space_and_vector(false)) {
            check_duality(&space, &x);
        }

        #[test]
        fn duality_identities_complex((space, x) in space_and_vector(true)) {
            check_duality(&space, &x);
        }

        #[test]
        fn sharp_homogeneity((space, x) in space_and_vector(false), k in -4.0f64..4.0) {
            let lhs = sharp(&space, &x.scale(k)).unwrap();
            let rhs = sharp(&space, &x).unwrap().scale(sharp_real(space.p(), k));
            for (a, b) in lhs.as_real().unwrap().iter().zip(rhs.as_real().unwrap()) {
                prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }

        #[test]
        fn sharp_homogeneity_complex((space, x) in space_and_vector(true), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let k = c(re, im);
            let Vector::Complex(v) = &x else { unreachable!() };
            let scaled = Vector::Complex(v.iter().map(|e| e * k).collect());
            let lhs = sharp(&space, &scaled).unwrap().to_complex();
            let factor = sharp_complex(space.p(), k);
            let rhs: Vec<_> = sharp(&space, &x).unwrap().to_complex().iter().map(|e| e * factor).collect();
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
            }
        }

        #[test]
        fn restrict_idempotent_and_commutes_with_sharp(
            (space, x) in space_and_vector(true),
            mask in prop::collection::vec(any::<bool>(), 6),
        ) {
            let set: Vec<usize> = (0..space.m()).filter(|&i| mask[i]).collect();
            let r = restrict(&x, &set).unwrap();
            prop_assert_eq!(restrict(&r, &set).unwrap(), r.clone());
            prop_assert_eq!(
                sharp(&space, &r).unwrap(),
                restrict(&sharp(&space, &x).unwrap(), &set).unwrap()
            );
        }

        #[test]
        fn amplitude_phase_reconstructs((_, x) in space_and_vector(true)) {
            let (a, t) = amplitude_phase(&x);
            for ((z, a), t) in x.to_complex().iter().zip(&a).zip(&t) {
                prop_assert!(*t >= 0.0 && *t < TAU);
                prop_assert!((Complex64::from_polar(*a, *t) - z).norm() <= 1e-12 * z.norm().max(1.0));
            }
        }
    }
}
