use super::averages::sphere_mean;
use super::ScalarField;
use crate::error::{precondition, Error, Result};
use crate::extreal::ExtReal;
use crate::geometry::{Domain, Point};
use crate::quadrature::{stream, Resolution};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Base tolerance of sub-mean-value tests; the quadrature estimate is added per probe.
pub const SUBMEAN_TOL: f64 = 1e-6;

/// A sphere `∂B(x, r)` at which a mean-value inequality is tested.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub x: Point,
    pub r: f64,
}

/// One row of a probe report: `margin = average − value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub x: Point,
    pub r: f64,
    pub value: ExtReal,
    pub average: ExtReal,
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub records: Vec<ProbeRecord>,
    pub violations: usize,
    pub pass: bool,
}

impl ProbeReport {
    fn from_records(records: Vec<ProbeRecord>) -> Self {
        let violations = records.iter().filter(|r| !r.pass).count();
        ProbeReport {
            records,
            violations,
            pass: violations == 0,
        }
    }

    /// The record with the smallest margin relative to its tolerance.
    pub fn worst(&self) -> Option<&ProbeRecord> {
        self.records
            .iter()
            .min_by(|a, b| (a.margin + a.tol).total_cmp(&(b.margin + b.tol)))
    }
}

fn margin_of(value: ExtReal, average: ExtReal) -> f64 {
    (average - value).to_f64()
}

/// Sub-mean-value test `v(x) ≤ v^{∘r}(x) + tol` at every probe, with
/// `tol = 1e−6 + |avg_N − avg_{N/2}|`.
pub fn check_subharmonic(v: &ScalarField, probes: &[Probe]) -> Result<ProbeReport> {
    check_subharmonic_with(v, probes, SUBMEAN_TOL, &Resolution::DEFAULT)
}

pub fn check_subharmonic_with(
    v: &ScalarField,
    probes: &[Probe],
    tol: f64,
    res: &Resolution,
) -> Result<ProbeReport> {
    let mut records = Vec::with_capacity(probes.len());
    for p in probes {
        let mean = sphere_mean(v, &p.x, p.r, res)?;
        let value = v.eval(&p.x);
        let margin = margin_of(value, mean.value);
        let t = tol
            + if mean.error.is_finite() {
                mean.error
            } else {
                0.0
            };
        let pass = match (value, mean.value) {
            (ExtReal::NegInf, _) => true,
            (ExtReal::Indeterminate, _) | (_, ExtReal::Indeterminate) => false,
            (_, ExtReal::PosInf) => true,
            (ExtReal::PosInf, _) => false,
            (_, ExtReal::NegInf) => false,
            _ => margin >= -t,
        };
        records.push(ProbeRecord {
            x: p.x,
            r: p.r,
            value,
            average: mean.value,
            margin,
            tol: t,
            pass,
        });
    }
    Ok(ProbeReport::from_records(records))
}

/// Mean-value equality test `|v(x) − v^{∘r}(x)| ≤ tol` (harmonicity).
pub fn check_harmonic(v: &ScalarField, probes: &[Probe], tol: f64) -> Result<ProbeReport> {
    let mut records = Vec::with_capacity(probes.len());
    for p in probes {
        let mean = sphere_mean(v, &p.x, p.r, &Resolution::DEFAULT)?;
        let value = v.eval(&p.x);
        let margin = margin_of(value, mean.value);
        records.push(ProbeRecord {
            x: p.x,
            r: p.r,
            value,
            average: mean.value,
            margin,
            tol,
            pass: margin.is_finite() && margin.abs() <= tol,
        });
    }
    Ok(ProbeReport::from_records(records))
}

/// `n` seeded random probes in `dom` (intersected with `window` when given):
/// centres uniform, radii uniform in `[min_r, dist(x, ∂dom)/2]`. Points closer
/// than `min_r` to any of `avoid` are skipped.
pub fn random_probes(
    dom: &Domain,
    window: Option<(Point, Point)>,
    n: usize,
    min_r: f64,
    avoid: &[Point],
    seed: u64,
) -> Result<Vec<Probe>> {
    precondition!(min_r > 0.0, "minimum probe radius must be positive");
    let (lo, hi) = match window.or_else(|| dom.bounding_box()) {
        Some(b) => b,
        None => {
            return Err(Error::Domain(
                "probing an unbounded domain needs a window".into(),
            ))
        }
    };
    let d = dom.dim();
    let mut rng = stream(seed, 0x5eed_9806);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * n.max(1) {
            return Err(Error::Domain(format!(
                "only {} of {n} probes fit in the domain with radius >= {min_r}",
                out.len()
            )));
        }
        let mut x = lo;
        for k in 0..d {
            x[k] = rng.gen_range(lo[k]..hi[k]);
        }
        if !dom.contains(&x) || avoid.iter().any(|a| a.dist(&x) < min_r) {
            continue;
        }
        let rmax = 0.5 * dom.boundary_distance(&x);
        if rmax <= min_r {
            continue;
        }
        out.push(Probe {
            x,
            r: rng.gen_range(min_r..rmax),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_probes(n: usize) -> Vec<Probe> {
        random_probes(
            &Domain::ball(Point::xy(0.0, 0.0), 2.0),
            None,
            n,
            0.02,
            &[],
            7,
        )
        .unwrap()
    }

    #[test]
    fn max_of_log_and_constant_passes() {
        let v = ScalarField::on_space(2, |p| p.norm().ln().max(-1.0));
        assert!(check_subharmonic(&v, &disk_probes(100)).unwrap().pass);
    }

    #[test]
    fn concave_paraboloid_fails_everywhere() {
        let v = ScalarField::on_space(2, |p| -p.norm_sq());
        let rep = check_subharmonic(&v, &disk_probes(50)).unwrap();
        assert_eq!(rep.violations, 50);
    }

    #[test]
    fn probes_respect_the_domain() {
        let dom = Domain::annulus(Point::xy(0.0, 0.0), 1.0, 2.0);
        for p in random_probes(&dom, None, 200, 0.01, &[], 1).unwrap() {
            let s = p.x.norm();
            assert!(s - p.r > 1.0 && s + p.r < 2.0);
        }
    }
}
