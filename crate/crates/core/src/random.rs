//! Reproducible random spaces, operators and vectors.
//!
//! Every draw comes from a ChaCha stream addressed by `(seed, stream)`, so a
//! corpus item can be regenerated on its own and in any order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::lp_space::{Field, LpSpace, Vector};
use crate::operator::Operator;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Weights drawn log-uniformly from `[1/4, 4]`.
pub fn weights(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| 4f64.powf(rng.random_range(-1.0..=1.0))).collect()
}

pub fn space(rng: &mut impl Rng, p: f64, m: usize) -> LpSpace {
    LpSpace::new(p, weights(rng, m)).expect("exponent validated by caller")
}

/// Standard Gaussian entries (real and imaginary parts independent).
pub fn operator(rng: &mut impl Rng, m: usize, field: Field) -> Operator {
    match field {
        Field::Real => Operator::from_real_entries(m, (0..m * m).map(|_| normal(rng)).collect()),
        Field::Complex => Operator::from_complex_entries(
            m,
            (0..m * m).map(|_| Complex64::new(normal(rng), normal(rng))).collect(),
        ),
    }
}

/// `S - S^t` for Gaussian `S`.
pub fn skew_operator(rng: &mut impl Rng, m: usize) -> Operator {
    let s: Vec<f64> = (0..m * m).map(|_| normal(rng)).collect();
    let e = (0..m * m).map(|ik| s[ik] - s[(ik % m) * m + ik / m]).collect();
    Operator::from_real_entries(m, e)
}

/// A unit vector in the given field; the direction is Gaussian.
pub fn unit_vector(rng: &mut impl Rng, space: &LpSpace, field: Field) -> Vector {
    let m = space.m();
    loop {
        let x = match field {
            Field::Real => Vector::Real((0..m).map(|_| normal(rng)).collect()),
            Field::Complex => Vector::Complex((0..m).map(|_| Complex64::new(normal(rng), normal(rng))).collect()),
        };
        if let Ok(Some(u)) = crate::lp_space::normalize(space, &x) {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = operator(&mut stream_rng(7, 3), 3, Field::Real);
        let b = operator(&mut stream_rng(7, 3), 3, Field::Real);
        let c = operator(&mut stream_rng(7, 4), 3, Field::Real);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn skew_is_antisymmetric() {
        let t = skew_operator(&mut stream_rng(1, 0), 4);
        for i in 0..4 {
            for k in 0..4 {
                assert_eq!(t.entry(i, k), -t.entry(k, i));
            }
        }
    }

    #[test]
    fn unit_vectors_are_unit() {
        let mut rng = stream_rng(2, 0);
        let s = space(&mut rng, 1.7, 5);
        for field in [Field::Real, Field::Complex] {
            let x = unit_vector(&mut rng, &s, field);
            assert!((crate::lp_space::norm(&s, &x).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
