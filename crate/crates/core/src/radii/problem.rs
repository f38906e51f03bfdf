//! Objective and gradient evaluation on flat parameter vectors.
//!
//! Real problems use `m` parameters; complex problems use `2m`, interleaved as
//! `(re_0, im_0, re_1, im_1, ...)`. Objectives are evaluated on arbitrary
//! nonzero points; the solver works with the scale-invariant ratio
//! `f(x) / ||x||_p^k`, where `k` is the degree of homogeneity of `f`.

use num_complex::Complex64;

use super::Objective;
use crate::error::{Error, Result};
use crate::lp_space::{sharp_complex, sharp_real, Field, LpSpace, Vector};
use crate::operator::{matvec_complex, matvec_real, Operator};

#[derive(Debug, Clone)]
enum Matrix {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    p: f64,
    w: Vec<f64>,
    m: usize,
    mat: Matrix,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|z| c(z[0], z[1])).collect()
}

/// Sign with `sign(0) = 0`.
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|x|^e` with `0^0 = 1`; only called where the result is finite.
fn pow_abs(x: f64, e: f64) -> f64 {
    x.abs().powf(e)
}

impl Problem {
    /// A problem over `field`. A real operator over the complex field is
    /// its complexification.
    pub(crate) fn new(space: &LpSpace, op: &Operator, field: Field) -> Result<Self> {
        op.check_space(space)?;
        let mat = match (op, field) {
            (Operator::Real { entries, .. }, Field::Real) => Matrix::Real(entries.clone()),
            (Operator::Complex { .. }, Field::Real) => {
                return Err(Error::FieldMismatch {
                    expected: Field::Real,
                    found: Field::Complex,
                })
            }
            (op, Field::Complex) => match op.to_complex() {
                Operator::Complex { entries, .. } => Matrix::Complex(entries),
                Operator::Real { .. } => unreachable!(),
            },
        };
        Ok(Self {
            p: space.p(),
            w: space.weights().to_vec(),
            m: space.m(),
            mat,
        })
    }

    pub(crate) fn field(&self) -> Field {
        match self.mat {
            Matrix::Real(_) => Field::Real,
            Matrix::Complex(_) => Field::Complex,
        }
    }

    pub(crate) fn p(&self) -> f64 {
        self.p
    }

    pub(crate) fn dim(&self) -> usize {
        match self.mat {
            Matrix::Real(_) => self.m,
            Matrix::Complex(_) => 2 * self.m,
        }
    }

    pub(crate) fn to_params(&self, x: &Vector) -> Result<Vec<f64>> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: x.len(),
            });
        }
        match (self.field(), x) {
            (Field::Real, Vector::Real(v)) => Ok(v.clone()),
            (Field::Real, Vector::Complex(_)) => Err(Error::FieldMismatch {
                expected: Field::Real,
                found: Field::Complex,
            }),
            (Field::Complex, x) => Ok(x.to_complex().iter().flat_map(|z| [z.re, z.im]).collect()),
        }
    }

    pub(crate) fn to_vector(&self, x: &[f64]) -> Vector {
        match self.field() {
            Field::Real => Vector::Real(x.to_vec()),
            Field::Complex => Vector::Complex(to_complex(x)),
        }
    }

    /// Magnitudes of the entries.
    fn magnitudes(&self, x: &[f64]) -> Vec<f64> {
        match self.field() {
            Field::Real => x.iter().map(|e| e.abs()).collect(),
            Field::Complex => x.chunks_exact(2).map(|z| z[0].hypot(z[1])).collect(),
        }
    }

    pub(crate) fn norm(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .magnitudes(x)
            .iter()
            .zip(&self.w)
            .map(|(a, w)| w * a.powf(self.p))
            .sum();
        s.powf(1.0 / self.p)
    }

    /// Rescales `x` onto the unit sphere; `false` if `x` is zero or not finite.
    pub(crate) fn normalize(&self, x: &mut [f64]) -> bool {
        let n = self.norm(x);
        if !(n.is_finite() && n > 0.0) {
            return false;
        }
        x.iter_mut().for_each(|e| *e /= n);
        true
    }

    /// Euclidean gradient of `||x||_p`.
    fn norm_gradient(&self, x: &[f64], n: f64) -> Vec<f64> {
        let scale = n.powf(1.0 - self.p);
        match self.field() {
            Field::Real => x
                .iter()
                .zip(&self.w)
                .map(|(&e, w)| scale * w * sharp_real(self.p, e))
                .collect(),
            Field::Complex => x
                .chunks_exact(2)
                .zip(&self.w)
                .flat_map(|(z, w)| {
                    let r = z[0].hypot(z[1]);
                    let f = if r == 0.0 {
                        0.0
                    } else {
                        scale * w * r.powf(self.p - 2.0)
                    };
                    [f * z[0], f * z[1]]
                })
                .collect(),
        }
    }

    pub(crate) fn degree(&self, objective: Objective) -> f64 {
        match objective {
            Objective::OpNorm => 1.0,
            Objective::NumRadius | Objective::AbsNumRadius => self.p,
        }
    }

    fn tx_real(&self, a: &[f64], x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        matvec_real(self.m, a, x, &mut y);
        y
    }

    fn tx_complex(&self, a: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![c(0.0, 0.0); self.m];
        matvec_complex(self.m, a, x, &mut y);
        y
    }

    /// Signs of `(Tx)_i`, with `+1` at zero; the default sign state for
    /// the absolute numerical radius.
    pub(crate) fn sign_state(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.mat {
            Matrix::Real(a) => Ok(self
                .tx_real(a, x)
                .iter()
                .map(|&y| if y < 0.0 { -1.0 } else { 1.0 })
                .collect()),
            Matrix::Complex(_) => Err(Error::FieldMismatch {
                expected: Field::Real,
                found: Field::Complex,
            }),
        }
    }

    /// The objective at `x` (not necessarily unit).
    pub(crate) fn value(&self, objective: Objective, x: &[f64]) -> f64 {
        let p = self.p;
        let w = &self.w;
        match &self.mat {
            Matrix::Real(a) => {
                let y = self.tx_real(a, x);
                match objective {
                    Objective::OpNorm => {
                        let s: f64 = y.iter().zip(w).map(|(y, w)| w * y.abs().powf(p)).sum();
                        s.powf(1.0 / p)
                    }
                    Objective::NumRadius => x
                        .iter()
                        .zip(&y)
                        .zip(w)
                        .map(|((&x, y), w)| w * sharp_real(p, x) * y)
                        .sum::<f64>()
                        .abs(),
                    Objective::AbsNumRadius => x
                        .iter()
                        .zip(&y)
                        .zip(w)
                        .map(|((x, y), w)| w * x.abs().powf(p - 1.0) * y.abs())
                        .sum(),
                }
            }
            Matrix::Complex(a) => {
                let xc = to_complex(x);
                let y = self.tx_complex(a, &xc);
                match objective {
                    Objective::OpNorm => {
                        let s: f64 = y.iter().zip(w).map(|(y, w)| w * y.norm().powf(p)).sum();
                        s.powf(1.0 / p)
                    }
                    Objective::NumRadius => xc
                        .iter()
                        .zip(&y)
                        .zip(w)
                        .map(|((&x, y), w)| sharp_complex(p, x) * y * w)
                        .sum::<Complex64>()
                        .norm(),
                    // rejected at construction by the public entry points
                    Objective::AbsNumRadius => xc
                        .iter()
                        .zip(&y)
                        .zip(w)
                        .map(|((x, y), w)| w * x.norm().powf(p - 1.0) * y.norm())
                        .sum(),
                }
            }
        }
    }

    /// The signed real pairing `sum_i w_i x#_i (Tx)_i`.
    pub(crate) fn signed_pair(&self, x: &[f64]) -> f64 {
        let Matrix::Real(a) = &self.mat else {
            return f64::NAN;
        };
        let y = self.tx_real(a, x);
        x.iter()
            .zip(&y)
            .zip(&self.w)
            .map(|((&x, y), w)| w * sharp_real(self.p, x) * y)
            .sum()
    }

    /// The complex pairing `sum_i w_i x#_i (Tx)_i` together with `Tx`.
    pub(crate) fn complex_pair(&self, x: &[Complex64]) -> (Complex64, Vec<Complex64>) {
        let y = match &self.mat {
            Matrix::Complex(a) => self.tx_complex(a, x),
            Matrix::Real(a) => {
                let a: Vec<Complex64> = a.iter().map(|&r| c(r, 0.0)).collect();
                self.tx_complex(&a, x)
            }
        };
        let z = x
            .iter()
            .zip(&y)
            .zip(&self.w)
            .map(|((&x, y), w)| sharp_complex(self.p, x) * y * w)
            .sum();
        (z, y)
    }

    /// `sum_i w_i |x_i|^(p-1) sigma_i (Tx)_i`, a minorant of the absolute
    /// objective that is tight where `sigma = sign(Tx)`.
    pub(crate) fn signed_value(&self, x: &[f64], sigma: &[f64]) -> f64 {
        let Matrix::Real(a) = &self.mat else {
            return f64::NAN;
        };
        let y = self.tx_real(a, x);
        x.iter()
            .zip(&y)
            .zip(sigma)
            .zip(&self.w)
            .map(|(((x, y), s), w)| w * x.abs().powf(self.p - 1.0) * s * y)
            .sum()
    }

    fn check_guard(&self, objective: Objective, x: &[f64], delta: f64) -> Result<()> {
        let guarded = match objective {
            Objective::OpNorm => false,
            Objective::NumRadius => self.p < 2.0,
            Objective::AbsNumRadius => self.p <= 2.0,
        };
        if !guarded {
            return Ok(());
        }
        match self.magnitudes(x).iter().enumerate().find(|(_, &a)| a <= delta) {
            Some((index, &magnitude)) => Err(Error::GuardViolation { index, magnitude }),
            None => Ok(()),
        }
    }

    /// Euclidean gradient of the objective at `x`. For the absolute objective
    /// `sigma` fixes the sign state (default `sign(Tx)`).
    pub(crate) fn gradient(
        &self,
        objective: Objective,
        x: &[f64],
        sigma: Option<&[f64]>,
        delta: f64,
    ) -> Result<Vec<f64>> {
        self.check_guard(objective, x, delta)?;
        let p = self.p;
        let m = self.m;
        let w = &self.w;
        match &self.mat {
            Matrix::Real(a) => {
                let y = self.tx_real(a, x);
                // g = diag_part + T^T coef
                let (diag, coef): (Vec<f64>, Vec<f64>) = match objective {
                    Objective::OpNorm => {
                        let f = self.value(Objective::OpNorm, x);
                        if f == 0.0 {
                            return Ok(vec![0.0; m]);
                        }
                        let s = f.powf(1.0 - p);
                        let coef = y.iter().zip(w).map(|(&y, w)| s * w * sharp_real(p, y)).collect();
                        (vec![0.0; m], coef)
                    }
                    Objective::NumRadius => {
                        let big_f: f64 = x
                            .iter()
                            .zip(&y)
                            .zip(w)
                            .map(|((&x, y), w)| w * sharp_real(p, x) * y)
                            .sum();
                        let s = if big_f < 0.0 { -1.0 } else { 1.0 };
                        let diag = x
                            .iter()
                            .zip(&y)
                            .zip(w)
                            .map(|((&x, y), w)| s * w * (p - 1.0) * pow_abs(x, p - 2.0) * y)
                            .collect();
                        let coef = x.iter().zip(w).map(|(&x, w)| s * w * sharp_real(p, x)).collect();
                        (diag, coef)
                    }
                    Objective::AbsNumRadius => {
                        let sigma = match sigma {
                            Some(s) if s.len() == m => s.to_vec(),
                            Some(s) => {
                                return Err(Error::DimensionMismatch {
                                    expected: m,
                                    found: s.len(),
                                })
                            }
                            None => self.sign_state(x)?,
                        };
                        let diag = x
                            .iter()
                            .zip(&y)
                            .zip(&sigma)
                            .zip(w)
                            .map(|(((&x, y), s), w)| w * (p - 1.0) * pow_abs(x, p - 2.0) * sgn(x) * s * y)
                            .collect();
                        let coef = x
                            .iter()
                            .zip(&sigma)
                            .zip(w)
                            .map(|((x, s), w)| w * x.abs().powf(p - 1.0) * s)
                            .collect();
                        (diag, coef)
                    }
                };
                let mut g = diag;
                for (i, ci) in coef.iter().enumerate() {
                    for (gk, aik) in g.iter_mut().zip(&a[i * m..(i + 1) * m]) {
                        *gk += ci * aik;
                    }
                }
                Ok(g)
            }
            Matrix::Complex(a) => {
                let xc = to_complex(x);
                let y = self.tx_complex(a, &xc);
                let mut g = vec![0.0; 2 * m];
                match objective {
                    Objective::OpNorm => {
                        let f = self.value(Objective::OpNorm, x);
                        if f == 0.0 {
                            return Ok(g);
                        }
                        let s = f.powf(1.0 - p);
                        let coef: Vec<Complex64> = y
                            .iter()
                            .zip(w)
                            .map(|(y, w)| {
                                let r = y.norm();
                                if r == 0.0 {
                                    c(0.0, 0.0)
                                } else {
                                    y * (s * w * r.powf(p - 2.0))
                                }
                            })
                            .collect();
                        // T^H coef
                        for k in 0..m {
                            let gk: Complex64 = (0..m).map(|i| a[i * m + k].conj() * coef[i]).sum();
                            g[2 * k] = gk.re;
                            g[2 * k + 1] = gk.im;
                        }
                    }
                    Objective::NumRadius => {
                        let h: Vec<Complex64> = xc.iter().map(|&x| sharp_complex(p, x)).collect();
                        let z: Complex64 = h.iter().zip(&y).zip(w).map(|((h, y), w)| h * y * w).sum();
                        let u = if z.norm() == 0.0 {
                            c(1.0, 0.0)
                        } else {
                            z.conj() / z.norm()
                        };
                        for k in 0..m {
                            let ck: Complex64 = u * (0..m).map(|i| h[i] * a[i * m + k] * w[i]).sum::<Complex64>();
                            let ek = u * y[k] * w[k];
                            let (re, im) = (xc[k].re, xc[k].im);
                            let r = xc[k].norm();
                            let (dha, dhb) = if r == 0.0 {
                                if p == 2.0 {
                                    (c(1.0, 0.0), c(0.0, -1.0))
                                } else {
                                    (c(0.0, 0.0), c(0.0, 0.0))
                                }
                            } else {
                                let rp2 = r.powf(p - 2.0);
                                let t = (p - 2.0) * r.powf(p - 4.0);
                                let xb = xc[k].conj();
                                (xb * (t * re) + rp2, xb * (t * im) - c(0.0, rp2))
                            };
                            g[2 * k] = ck.re + (ek * dha).re;
                            g[2 * k + 1] = -ck.im + (ek * dhb).re;
                        }
                    }
                    Objective::AbsNumRadius => {
                        return Err(Error::FieldMismatch {
                            expected: Field::Real,
                            found: Field::Complex,
                        })
                    }
                }
                Ok(g)
            }
        }
    }

    /// Gradient of `f_sigma`, the signed minorant.
    pub(crate) fn signed_gradient(&self, x: &[f64], sigma: &[f64], delta: f64) -> Result<Vec<f64>> {
        self.gradient(Objective::AbsNumRadius, x, Some(sigma), delta)
    }

    /// Gradient of `f(x) / ||x||_p^k` given `f(x)` and `grad f(x)`.
    pub(crate) fn ratio_gradient(&self, objective: Objective, x: &[f64], f: f64, gf: &[f64]) -> Vec<f64> {
        let k = self.degree(objective);
        let n = self.norm(x);
        let gn = self.norm_gradient(x, n);
        let nk = n.powf(-k);
        gf.iter().zip(&gn).map(|(g, gn)| nk * g - k * f * nk / n * gn).collect()
    }

    /// One nonlinear power step for the operator norm:
    /// `x <- dual_q(T^t dual_p(Tx))`, normalized.
    pub(crate) fn power_step(&self, x: &[f64]) -> Option<Vec<f64>> {
        let p = self.p;
        let q = p / (p - 1.0);
        let m = self.m;
        let w = &self.w;
        let mut out = match &self.mat {
            Matrix::Real(a) => {
                let y = self.tx_real(a, x);
                let g: Vec<f64> = y.iter().map(|&y| sharp_real(p, y)).collect();
                (0..m)
                    .map(|k| {
                        let h: f64 = (0..m).map(|i| w[i] * g[i] * a[i * m + k]).sum::<f64>() / w[k];
                        sharp_real(q, h)
                    })
                    .collect::<Vec<f64>>()
            }
            Matrix::Complex(a) => {
                let y = self.tx_complex(a, &to_complex(x));
                let g: Vec<Complex64> = y.iter().map(|&y| sharp_complex(p, y)).collect();
                (0..m)
                    .flat_map(|k| {
                        let h: Complex64 = (0..m).map(|i| g[i] * a[i * m + k] * w[i]).sum::<Complex64>() / w[k];
                        let z = sharp_complex(q, h);
                        [z.re, z.im]
                    })
                    .collect()
            }
        };
        self.normalize(&mut out).then_some(out)
    }
}
