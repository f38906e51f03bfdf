//! Grid search over the unit circle of real two-atom spaces.
//!
//! Kept independent of the solver: the objectives are evaluated here from
//! scratch and the circle is walked by angle, so the two agree only if both
//! are right.

use rayon::prelude::*;

use super::Objective;
use crate::error::{Error, Result};
use crate::lp_space::{Field, LpSpace};
use crate::operator::Operator;

/// Maximum of the objective over `resolution` equally spaced angles, each
/// mapped onto the unit circle by
/// `(|cos|^(2/p) sgn(cos) w1^(-1/p), |sin|^(2/p) sgn(sin) w2^(-1/p))`.
pub fn brute_radius_2d(space: &LpSpace, t: &Operator, objective: Objective, resolution: usize) -> Result<f64> {
    if space.m() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: space.m(),
        });
    }
    t.check_space(space)?;
    if t.field() != Field::Real {
        return Err(Error::FieldMismatch {
            expected: Field::Real,
            found: Field::Complex,
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be >= 1".into()));
    }
    let p = space.p();
    let w = space.weights();
    let m = t.real_entries()?;
    let scale = [w[0].powf(-1.0 / p), w[1].powf(-1.0 / p)];
    let circle = |c: f64, s: f64| {
        [
            c.abs().powf(2.0 / p).copysign(c) * scale[0],
            s.abs().powf(2.0 / p).copysign(s) * scale[1],
        ]
    };
    let eval = |x: [f64; 2]| {
        let y = [m[0] * x[0] + m[1] * x[1], m[2] * x[0] + m[3] * x[1]];
        match objective {
            Objective::OpNorm => (w[0] * y[0].abs().powf(p) + w[1] * y[1].abs().powf(p)).powf(1.0 / p),
            Objective::NumRadius => {
                let d = |v: f64| v.abs().powf(p - 1.0).copysign(v) * (v != 0.0) as u8 as f64;
                (w[0] * d(x[0]) * y[0] + w[1] * d(x[1]) * y[1]).abs()
            }
            Objective::AbsNumRadius => {
                w[0] * x[0].abs().powf(p - 1.0) * y[0].abs() + w[1] * x[1].abs().powf(p - 1.0) * y[1].abs()
            }
        }
    };
    let step = std::f64::consts::TAU / resolution as f64;
    Ok((0..resolution)
        .into_par_iter()
        .map(|i| {
            let (s, c) = (i as f64 * step).sin_cos();
            eval(circle(c, s))
        })
        .reduce(|| 0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{compute_mp, MP_TOL};

    #[test]
    fn identity_and_zero() {
        for &p in &[1.3, 2.0, 4.0] {
            let s = LpSpace::new(p, vec![0.7, 1.9]).unwrap();
            for obj in Objective::ALL {
                let v = brute_radius_2d(&s, &Operator::identity(2, Field::Real), obj, 1_000_000).unwrap();
                assert!((v - 1.0).abs() < 1e-6, "p={p} {obj:?}: {v}");
                assert_eq!(
                    brute_radius_2d(&s, &Operator::zero(2, Field::Real), obj, 1000).unwrap(),
                    0.0
                );
            }
        }
    }

    #[test]
    fn rotation_matches_constant() {
        let s = LpSpace::uniform(3.0, 2).unwrap();
        let v = brute_radius_2d(&s, &Operator::rotation(), Objective::NumRadius, 1_000_000).unwrap();
        let mp = compute_mp(3.0, MP_TOL).unwrap().value;
        assert!((v - mp).abs() < 1e-8 && v <= mp + 1e-15);
    }

    #[test]
    fn rejects_other_dimensions() {
        let s = LpSpace::uniform(3.0, 3).unwrap();
        assert!(brute_radius_2d(&s, &Operator::identity(3, Field::Real), Objective::OpNorm, 10).is_err());
        let s2 = LpSpace::uniform(3.0, 2).unwrap();
        assert!(brute_radius_2d(&s2, &Operator::rotation().to_complex(), Objective::OpNorm, 10).is_err());
    }
}
