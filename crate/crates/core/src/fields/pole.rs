use super::ScalarField;
use crate::error::{precondition, Error, Result};
use crate::geometry::Point;
use crate::kernels::KernelConfig;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Least-squares fit `V(x) ≈ a·(−K_{d−2}(x, o)) + b + c·|x − o|²` near a pole.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleFit {
    /// The fitted `a`, standing in for `limsup V(x) / (−K_{d−2}(x, o))`.
    pub coefficient: f64,
    pub intercept: f64,
    /// Sphere means of a smooth part grow like `△V·t²/(2d)`; fitting it keeps `a` unbiased.
    pub curvature: f64,
    pub r_squared: f64,
    pub radii: Vec<f64>,
}

/// Minimum coefficient of determination accepted by [`fit_pole_coefficient`].
pub const MIN_R_SQUARED: f64 = 0.999;

/// Nine radii log-spaced from `1e−2` down to `1e−4`.
pub fn default_pole_radii() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-2.0 - 0.25 * k as f64)).collect()
}

fn directions(d: usize) -> Vec<Point> {
    match d {
        2 => (0..8)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_4 * k as f64 + 0.1;
                Point::xy(t.cos(), t.sin())
            })
            .collect(),
        _ => (0..d)
            .flat_map(|k| [Point::unit(d, k), -Point::unit(d, k)])
            .collect(),
    }
}

/// Fits the pole coefficient of `v` at `o` from direction-averaged values on
/// spheres of the given radii. Fails when `R² < 0.999`.
pub fn fit_pole_coefficient(v: &ScalarField, o: &Point, radii: &[f64]) -> Result<PoleFit> {
    let d = o.dim();
    precondition!(d >= 2, "pole coefficients need d >= 2");
    precondition!(radii.len() >= 3, "need at least three radii");
    let cfg = KernelConfig::new(d)?;
    let dirs = directions(d);
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &t in radii {
        let mut acc = 0.0;
        for u in &dirs {
            let val = v.eval(&(*o + *u * t));
            acc += val.finite().ok_or_else(|| {
                Error::Numeric(format!("field is {val} at distance {t} from the pole"))
            })?;
        }
        xs.push(-cfg.radial(t));
        ys.push(acc / dirs.len() as f64);
    }
    let n = xs.len() as f64;
    let my = ys.iter().sum::<f64>() / n;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let scale = 1e-24 * (1.0 + my * my) * n;
    let t2 = radii.iter().fold(0.0f64, |m, t| m.max(t * t));
    let (a, b, c) = if syy <= scale {
        (0.0, my, 0.0)
    } else {
        let design = DMatrix::from_fn(radii.len(), 3, |i, j| match j {
            0 => xs[i],
            1 => 1.0,
            _ => radii[i] * radii[i] / t2,
        });
        let sol = design
            .svd(true, true)
            .solve(&DVector::from_vec(ys.clone()), 1e-14)
            .map_err(|e| Error::Numeric(format!("pole fit: {e}")))?;
        (sol[0], sol[1], sol[2] / t2)
    };
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .zip(radii)
        .map(|((x, y), t)| (y - a * x - b - c * t * t).powi(2))
        .sum();
    let r_squared = if syy <= scale {
        if sse <= scale {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - sse / syy
    };
    let fit = PoleFit {
        coefficient: a,
        intercept: b,
        curvature: c,
        r_squared,
        radii: radii.to_vec(),
    };
    if !(r_squared >= MIN_R_SQUARED) {
        return Err(Error::Numeric(format!(
            "pole coefficient fit is not convergent (R² = {r_squared:.6}, slope {a:.6})"
        )));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_slope_of_scaled_log() {
        let v = ScalarField::on_space(2, |p| -1.7 * p.norm().ln() + 0.3);
        let f = fit_pole_coefficient(&v, &Point::xy(0.0, 0.0), &default_pole_radii()).unwrap();
        assert!((f.coefficient - 1.7).abs() < 1e-12);
        let z = ScalarField::on_space(2, |_| 0.0);
        let f = fit_pole_coefficient(&z, &Point::xy(0.0, 0.0), &default_pole_radii()).unwrap();
        assert_eq!(f.coefficient, 0.0);
        let q = ScalarField::on_space(2, |p| -0.8 * p.norm().ln() + 40.0 * p.norm_sq());
        let f = fit_pole_coefficient(&q, &Point::xy(0.0, 0.0), &default_pole_radii()).unwrap();
        assert!((f.coefficient - 0.8).abs() < 1e-9, "{}", f.coefficient);
    }
}
