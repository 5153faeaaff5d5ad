use super::ScalarField;
use crate::error::{Error, Result};
use crate::extreal::{ext_sum, ExtReal};
use crate::geometry::Point;
use crate::quadrature::{shell_rule, sphere_rule, Resolution};
use serde::{Deserialize, Serialize};

/// A quadrature mean together with an error estimate: the difference from the
/// same rule at half resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanValue {
    pub value: ExtReal,
    pub error: f64,
}

fn check_inside(v: &ScalarField, x: &Point, r: f64, what: &str) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "{what} radius must be positive, got {r}"
        )));
    }
    if x.dim() != v.dim() {
        return Err(Error::Mismatch(format!(
            "point of dimension {} for a field of dimension {}",
            x.dim(),
            v.dim()
        )));
    }
    let room = v.domain().boundary_distance(x);
    if room < r * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "{what} B({x:?}, {r}) leaves the field's domain"
        )));
    }
    Ok(())
}

fn sphere_sum(v: &ScalarField, x: &Point, r: f64, res: &Resolution) -> Result<ExtReal> {
    let rule = sphere_rule(x.dim(), res, None)?;
    Ok(ext_sum(
        rule.into_iter().map(|(u, w)| v.eval(&(*x + u * r)) * w),
    ))
}

fn ball_sum(v: &ScalarField, x: &Point, r: f64, res: &Resolution) -> Result<ExtReal> {
    let rule = shell_rule(x, 0.0, r, res)?;
    Ok(ext_sum(rule.into_iter().map(|(p, w)| v.eval(&p) * w)))
}

fn with_error(fine: ExtReal, coarse: ExtReal) -> MeanValue {
    let error = match (fine, coarse) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
        (a, b) if a == b => 0.0,
        _ => f64::INFINITY,
    };
    MeanValue { value: fine, error }
}

/// `v^{∘r}(x)`, the mean of `v` over the sphere `∂B(x, r)`.
pub fn sphere_average(v: &ScalarField, x: &Point, r: f64) -> Result<ExtReal> {
    check_inside(v, x, r, "sphere")?;
    sphere_sum(v, x, r, &Resolution::DEFAULT)
}

/// Sphere mean at resolution `res` with a half-resolution error estimate.
pub fn sphere_mean(v: &ScalarField, x: &Point, r: f64, res: &Resolution) -> Result<MeanValue> {
    check_inside(v, x, r, "sphere")?;
    Ok(with_error(
        sphere_sum(v, x, r, res)?,
        sphere_sum(v, x, r, &res.coarser())?,
    ))
}

/// `v^{•r}(x)`, the mean of `v` over the ball `B(x, r)`.
pub fn ball_average(v: &ScalarField, x: &Point, r: f64) -> Result<ExtReal> {
    check_inside(v, x, r, "ball")?;
    ball_sum(v, x, r, &Resolution::DEFAULT)
}

pub fn ball_mean(v: &ScalarField, x: &Point, r: f64, res: &Resolution) -> Result<MeanValue> {
    check_inside(v, x, r, "ball")?;
    Ok(with_error(
        ball_sum(v, x, r, res)?,
        ball_sum(v, x, r, &res.coarser())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    #[test]
    fn averages_of_simple_fields() {
        let o = Point::xy(0.0, 0.0);
        let c = ScalarField::on_space(2, |_| 3.5);
        assert!((sphere_average(&c, &o, 1.0).unwrap().to_f64() - 3.5).abs() < 1e-14);
        assert!((ball_average(&c, &o, 1.0).unwrap().to_f64() - 3.5).abs() < 1e-12);
        let ln = ScalarField::on_space(2, |p| p.norm().ln());
        assert!((sphere_average(&ln, &o, 2.0).unwrap().to_f64() - 2f64.ln()).abs() < 1e-12);
        let e = (ball_average(&ln, &o, 1.0).unwrap().to_f64() + 0.5).abs();
        assert!(e < 1e-6, "{e}");
        let sq = ScalarField::on_space(2, |p| p.norm_sq());
        assert!((ball_average(&sq, &o, 1.0).unwrap().to_f64() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn sphere_leaving_the_domain_is_rejected() {
        let v = ScalarField::constant(Domain::ball(Point::xy(0.0, 0.0), 1.0), 0.0);
        assert!(sphere_average(&v, &Point::xy(0.5, 0.0), 0.6).is_err());
    }
}
