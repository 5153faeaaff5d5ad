//! Potentials `pt_μ(y) = ∫ K_{d−2}(x, y) dμ(x)`, their asymptotics and lower bounds.
//!
//! Rotation-invariant layers (spheres, balls, shells, mollifier bumps) are
//! evaluated in closed form by Newton's theorem; harmonic-measure layers by
//! the image-point formula; grid densities cell by cell with exact near-field
//! kernel averages.

use crate::error::{precondition, Error, Result};
use crate::extreal::{ext_sum, ExtReal};
use crate::fields::ScalarField;
use crate::geometry::{Domain, GridDomain, Point};
use crate::kernels::{riesz_kernel, KernelConfig};
use crate::measures::{Component, Measure};
use crate::quadrature::Resolution;
use serde::{Deserialize, Serialize};

/// The potential of a charge.
#[derive(Clone, Debug)]
pub struct Potential {
    charge: Measure,
    cfg: KernelConfig,
}

impl Potential {
    pub fn charge(&self) -> &Measure {
        &self.charge
    }

    pub fn config(&self) -> KernelConfig {
        self.cfg
    }

    pub fn eval(&self, y: &Point) -> ExtReal {
        ext_sum(
            self.charge
                .components()
                .iter()
                .map(|c| component_potential(self.cfg, c, y)),
        )
    }

    /// The potential as a field on `ℝ^d`.
    pub fn field(&self) -> ScalarField {
        let p = self.clone();
        ScalarField::new(Domain::Space { dim: self.cfg.d }, move |y| p.eval(y))
    }
}

/// `pt_μ` for the kernel of dimension `cfg.d`.
pub fn potential(mu: &Measure, cfg: KernelConfig) -> Result<Potential> {
    precondition!(
        mu.dim() == cfg.d,
        "measure of dimension {} with kernel dimension {}",
        mu.dim(),
        cfg.d
    );
    Ok(Potential {
        charge: mu.clone(),
        cfg,
    })
}

/// `pt_{μ−ϑ}`.
pub fn difference_potential(mu: &Measure, theta: &Measure, cfg: KernelConfig) -> Result<Potential> {
    precondition!(mu.dim() == theta.dim(), "measures of different dimensions");
    potential(&mu.minus(theta), cfg)
}

// ∫ s^m ds and ∫ s^m k_q(s) ds antiderivatives.
fn prim_power(m: i32, s: f64) -> f64 {
    s.powi(m + 1) / (m + 1) as f64
}

fn prim_kernel(q: i32, m: i32, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    if q == 0 {
        let n = (m + 1) as f64;
        s.powi(m + 1) * (s.ln() / n - 1.0 / (n * n))
    } else {
        let e = m - q + 1;
        -(q.signum() as f64) * s.powi(e) / e as f64
    }
}

/// Newton's theorem for a radial density `Σ c_j s^{m_j}` (in `ds`) on `[a, b]`
/// with total mass `total`, at distance `s0` from the centre.
fn radial_potential(
    cfg: KernelConfig,
    terms: &[(f64, i32)],
    a: f64,
    b: f64,
    total: f64,
    s0: f64,
) -> ExtReal {
    let q = cfg.q();
    let mass = |lo: f64, hi: f64| -> f64 {
        terms
            .iter()
            .map(|(c, m)| c * (prim_power(*m, hi) - prim_power(*m, lo)))
            .sum()
    };
    let norm = mass(a, b);
    let inner = mass(a, s0.clamp(a, b));
    let lo = s0.max(a);
    let outer: f64 = if lo < b {
        terms
            .iter()
            .map(|(c, m)| c * (prim_kernel(q, *m, b) - prim_kernel(q, *m, lo)))
            .sum()
    } else {
        0.0
    };
    let k0 = if inner == 0.0 {
        0.0
    } else {
        inner * cfg.radial(s0)
    };
    ExtReal::Finite(total * (k0 + outer) / norm)
}

fn component_potential(cfg: KernelConfig, c: &Component, y: &Point) -> ExtReal {
    let d = cfg.d as i32;
    match c {
        Component::Atom { point, weight } => riesz_kernel(cfg, point, y) * *weight,
        Component::SphereUniform {
            center,
            radius,
            total,
        } => ExtReal::Finite(total * cfg.radial(y.dist(center).max(*radius))),
        Component::BallUniform {
            center,
            radius,
            total,
        } => radial_potential(cfg, &[(1.0, d - 1)], 0.0, *radius, *total, y.dist(center)),
        Component::ShellUniform {
            center,
            inner,
            outer,
            total,
        } => radial_potential(cfg, &[(1.0, d - 1)], *inner, *outer, *total, y.dist(center)),
        Component::Mollifier {
            center,
            radius,
            total,
        } => {
            let binom = [1.0, -4.0, 6.0, -4.0, 1.0];
            let terms: Vec<(f64, i32)> = binom
                .iter()
                .enumerate()
                .map(|(j, b)| (b / radius.powi(2 * j as i32), d - 1 + 2 * j as i32))
                .collect();
            radial_potential(cfg, &terms, 0.0, *radius, *total, y.dist(center))
        }
        Component::SpherePoisson {
            center,
            radius,
            pole,
            total,
        } if cfg.d >= 2 => {
            // Off the ball the kernel is harmonic in z, so the layer acts as δ_pole;
            // inside, Kelvin reflection of y gives the image distance ρ.
            let (yt, xt) = (*y - *center, *pole - *center);
            let s = yt.norm();
            let dist = if s >= *radius {
                y.dist(pole)
            } else {
                (xt.norm_sq() * s * s / (radius * radius) - 2.0 * xt.dot(&yt) + radius * radius)
                    .max(0.0)
                    .sqrt()
            };
            ExtReal::Finite(total * cfg.radial(dist))
        }
        Component::SpherePoisson { .. } => {
            let nodes = c.nodes(&Resolution::POISSON).expect("supported dimension");
            ext_sum(nodes.iter().map(|(z, w)| riesz_kernel(cfg, z, y) * *w))
        }
        Component::GridDensity { grid, masses } => grid_potential(cfg, grid, masses, y),
    }
}

fn grid_potential(cfg: KernelConfig, grid: &GridDomain, masses: &[f64], y: &Point) -> ExtReal {
    let h = grid.spacing();
    let dim = grid.dim();
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let m = masses[i];
        if m == 0.0 {
            continue;
        }
        let c = grid.center(i);
        let near = (0..dim).all(|k| (c[k] - y[k]).abs() <= 2.5 * h);
        if near {
            acc += m * cell_kernel_average(cfg, &c, h, y);
        } else {
            acc += m * cfg.radial(c.dist(y));
        }
    }
    ExtReal::Finite(acc)
}

/// Average of `K(·, y)` over the cube of side `h` centred at `c`.
pub fn cell_kernel_average(cfg: KernelConfig, c: &Point, h: f64, y: &Point) -> f64 {
    let rel = *c - *y;
    match cfg.d {
        1 => {
            let (a, b) = (rel[0] - 0.5 * h, rel[0] + 0.5 * h);
            let prim = |u: f64| 0.5 * u * u.abs();
            (prim(b) - prim(a)) / h
        }
        2 => {
            let (x1, x2) = (rel[0] - 0.5 * h, rel[0] + 0.5 * h);
            let (y1, y2) = (rel[1] - 0.5 * h, rel[1] + 0.5 * h);
            0.5 * (log_prim(x2, y2) - log_prim(x1, y2) - log_prim(x2, y1) + log_prim(x1, y1))
                / (h * h)
        }
        _ => cube_average(cfg, &rel, h, 3),
    }
}

/// `∫∫ ln(x² + y²) dx dy`.
fn log_prim(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let mut v = -3.0 * x * y;
    if x != 0.0 && y != 0.0 {
        v += x * y * r2.ln();
    }
    if x != 0.0 {
        v += x * x * (y / x).atan();
    }
    if y != 0.0 {
        v += y * y * (x / y).atan();
    }
    v
}

/// Cube average of `k_{d−2}(|x|)` over the cube of side `h` centred at `rel`,
/// by 5-point-per-axis refinement near the origin.
fn cube_average(cfg: KernelConfig, rel: &Point, h: f64, depth: u32) -> f64 {
    let d = cfg.d;
    let r = rel.norm();
    if r > 1.5 * h * (d as f64).sqrt() {
        return cfg.radial(r);
    }
    if depth == 0 {
        if r > 0.25 * h {
            return cfg.radial(r);
        }
        // Cube centred (near) the singularity: scale-invariant exact constant for d = 3.
        const UNIT_CUBE_INV_DIST: f64 = 2.380_077_363_979_553;
        return if d == 3 {
            -UNIT_CUBE_INV_DIST / h
        } else {
            cfg.radial(0.5 * h)
        };
    }
    let sub = h / 5.0;
    let mut acc = 0.0;
    let mut idx = vec![0usize; d];
    let count = 5usize.pow(d as u32);
    for n in 0..count {
        let mut t = n;
        for k in idx.iter_mut() {
            *k = t % 5;
            t /= 5;
        }
        let mut p = *rel;
        for k in 0..d {
            p[k] += (idx[k] as f64 - 2.0) * sub;
        }
        acc += cube_average(cfg, &p, sub, depth - 1);
    }
    acc / count as f64
}

/// Result of [`asymptotic_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub radii: Vec<f64>,
    /// `e(R) = max_u |pt_μ(Ru) − μ(ℝ^d) k_{d−2}(R)| · R^{d−1}`.
    pub errors: Vec<f64>,
    /// `e(R_{i+1}) / e(R_i)`; `None` when both are negligible.
    pub ratios: Vec<Option<f64>>,
    pub bounded: bool,
}

fn directions(d: usize) -> Vec<Point> {
    match d {
        1 => vec![Point::new(&[1.0]), Point::new(&[-1.0])],
        2 => (0..16)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
                Point::xy(t.cos(), t.sin())
            })
            .collect(),
        _ => {
            // Fibonacci points on S², padded with zeros for d > 3.
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..16)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / 16.0;
                    let s = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    let mut c = vec![0.0; d];
                    c[0] = s * t.cos();
                    c[1] = s * t.sin();
                    c[2] = z;
                    Point::new(&c)
                })
                .collect()
        }
    }
}

/// Checks `pt_μ(x) = μ(ℝ^d) k_{d−2}(|x|) + O(|x|^{1−d})` along `radii`:
/// the scaled error must not grow by more than 10% between consecutive radii.
pub fn asymptotic_check(mu: &Measure, radii: &[f64]) -> Result<AsymptoticReport> {
    let d = mu.dim();
    let cfg = KernelConfig::new(d)?;
    let pt = potential(mu, cfg)?;
    let m = mu.total_mass();
    let dirs = directions(d);
    let mut errors = Vec::with_capacity(radii.len());
    for &r in radii {
        precondition!(
            r > mu.reach_from(&Point::origin(d)),
            "radius {r} does not clear the support"
        );
        let mut e: f64 = 0.0;
        for u in &dirs {
            let v = pt
                .eval(&(*u * r))
                .expect_finite("potential off the support");
            e = e.max((v - m * cfg.radial(r)).abs() * r.powi(d as i32 - 1));
        }
        errors.push(e);
    }
    let floor = 1e-12 * (1.0 + mu.total_variation());
    let ratios: Vec<Option<f64>> = errors
        .windows(2)
        .map(|w| {
            if w[0] <= floor && w[1] <= floor {
                None
            } else {
                Some(w[1] / w[0])
            }
        })
        .collect();
    let bounded = ratios.iter().all(|r| r.is_none_or(|v| v <= 1.1));
    Ok(AsymptoticReport {
        radii: radii.to_vec(),
        errors,
        ratios,
        bounded,
    })
}

/// Result of [`lower_bound_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub bound: f64,
    pub probed_inf: f64,
    pub probes: usize,
    pub holds: bool,
}

/// Points of `l` for probing: a lattice over its bounding box plus, for balls,
/// boundary points.
pub fn probe_points(l: &Domain, per_axis: usize) -> Result<Vec<Point>> {
    let (lo, hi) = l
        .bounding_box()
        .ok_or_else(|| Error::Domain("probe set must be bounded".into()))?;
    let d = l.dim();
    let mut pts = Vec::new();
    let total = per_axis.pow(d as u32);
    for n in 0..total {
        let mut t = n;
        let mut p = lo;
        for k in 0..d {
            let i = t % per_axis;
            t /= per_axis;
            p[k] = lo[k] + (hi[k] - lo[k]) * (i as f64 + 0.5) / per_axis as f64;
        }
        if l.contains(&p) {
            pts.push(p);
        }
    }
    if let Domain::ClosedBall { center, radius } = l {
        for (u, _) in crate::quadrature::sphere_rule(
            d,
            &Resolution {
                circle: 256,
                sphere: 12,
                ..Resolution::DEFAULT
            },
            None,
        )? {
            pts.push(*center + u * *radius);
        }
    }
    Ok(pts)
}

/// Minimum-principle lower bound for positive `μ` on a set `l` off its support:
/// `inf_L pt_μ ≥ μ(ℝ^d) k_{d−2}(dist(L, supp μ))`, and, when `o` is given,
/// `inf_L pt_{μ−δ_o} ≥ that − k_{d−2}(sup_{x∈L} |x − o|)`.
pub fn lower_bound_check(mu: &Measure, l: &Domain, o: Option<&Point>) -> Result<LowerBoundReport> {
    precondition!(mu.is_positive(), "lower bound requires a positive measure");
    let cfg = KernelConfig::new(mu.dim())?;
    let probes = probe_points(l, 41)?;
    precondition!(!probes.is_empty(), "no probe points in L");
    let dist = match l {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
            (mu.distance_to(center) - radius).max(0.0)
        }
        _ => probes
            .iter()
            .map(|p| mu.distance_to(p))
            .fold(f64::INFINITY, f64::min),
    };
    precondition!(dist > 0.0, "L meets the support of the measure");
    let mut bound = mu.total_mass() * cfg.radial(dist);
    let mut charge = mu.clone();
    if let Some(o) = o {
        let reach = match l {
            Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
                center.dist(o) + radius
            }
            _ => probes.iter().map(|p| p.dist(o)).fold(0.0, f64::max),
        };
        bound -= cfg.radial(reach);
        charge = charge.minus(&Measure::dirac(*o));
    }
    let pt = potential(&charge, cfg)?;
    let mut inf = f64::INFINITY;
    for p in &probes {
        if let Some(v) = pt.eval(p).finite() {
            inf = inf.min(v);
        }
    }
    let holds = inf >= bound - 1e-7 * (1.0 + bound.abs() + inf.abs());
    Ok(LowerBoundReport {
        bound,
        probed_inf: inf,
        probes: probes.len(),
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_potentials() {
        let c2 = KernelConfig::new(2).unwrap();
        let p = potential(&Measure::dirac(Point::xy(0.0, 0.0)), c2).unwrap();
        assert!((p.eval(&Point::xy(2.0, 0.0)).to_f64() - 2f64.ln()).abs() < 1e-15);
        let c3 = KernelConfig::new(3).unwrap();
        let p = potential(&Measure::dirac(Point::origin(3)), c3).unwrap();
        assert_eq!(p.eval(&Point::xyz(2.0, 0.0, 0.0)), ExtReal::Finite(-0.5));
    }

    #[test]
    fn log_cell_average_matches_fine_midpoint_rule() {
        let cfg = KernelConfig::new(2).unwrap();
        let h = 0.1;
        for y in [
            Point::xy(0.0, 0.0),
            Point::xy(0.03, -0.01),
            Point::xy(0.12, 0.07),
        ] {
            let exact = cell_kernel_average(cfg, &Point::xy(0.0, 0.0), h, &y);
            let n = 800;
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let x = Point::xy(
                        -0.05 + h * (i as f64 + 0.5) / n as f64,
                        -0.05 + h * (j as f64 + 0.5) / n as f64,
                    );
                    acc += x.dist(&y).ln();
                }
            }
            acc /= (n * n) as f64;
            assert!((exact - acc).abs() < 2e-5, "{exact} vs {acc}");
        }
    }

    #[test]
    fn centre_of_uniform_ball() {
        // d = 2: ln R − 1/2; d = 3: −3/(2R).
        let p = potential(
            &Measure::ball_uniform(Point::xy(0.0, 0.0), 2.0, 1.0),
            KernelConfig::new(2).unwrap(),
        )
        .unwrap();
        assert!((p.eval(&Point::xy(0.0, 0.0)).to_f64() - (2f64.ln() - 0.5)).abs() < 1e-14);
        let p = potential(
            &Measure::ball_uniform(Point::origin(3), 2.0, 1.0),
            KernelConfig::new(3).unwrap(),
        )
        .unwrap();
        assert!((p.eval(&Point::origin(3)).to_f64() + 0.75).abs() < 1e-14);
    }
}
