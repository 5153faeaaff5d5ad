//! Finite compactly supported charges: integration, restriction, Jordan
//! decomposition and smoothing by sweeping.

mod restrict;

use crate::error::{precondition, Error, Result};
use crate::extreal::{ext_sum, ExtReal};
use crate::fields::ScalarField;
use crate::geometry::{GridDomain, Point};
use crate::kernels::{sphere_area, unit_ball_volume};
use crate::quadrature::{compensated_sum, radial_rule, shell_rule, sphere_rule, Resolution};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// One piece of a charge. Every variant carries its (signed) total mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    Atom {
        point: Point,
        weight: f64,
    },
    /// Normalized surface measure on `|x − center| = radius`, times `total`.
    SphereUniform {
        center: Point,
        radius: f64,
        total: f64,
    },
    /// Harmonic measure of the ball `B(center, radius)` at `pole`, times `total`.
    SpherePoisson {
        center: Point,
        radius: f64,
        pole: Point,
        total: f64,
    },
    /// Normalized volume measure on `B(center, radius)`, times `total`.
    BallUniform {
        center: Point,
        radius: f64,
        total: f64,
    },
    /// Normalized volume measure on `inner ≤ |x − center| ≤ outer`, times `total`.
    ShellUniform {
        center: Point,
        inner: f64,
        outer: f64,
        total: f64,
    },
    /// Mollifier profile `(1 − |x−center|²/radius²)^4`, normalized, times `total`.
    Mollifier {
        center: Point,
        radius: f64,
        total: f64,
    },
    /// Cell masses on a lattice (zero on unmasked cells).
    GridDensity {
        grid: GridDomain,
        masses: Vec<f64>,
    },
}

impl Component {
    pub fn dim(&self) -> usize {
        match self {
            Component::Atom { point, .. } => point.dim(),
            Component::SphereUniform { center, .. }
            | Component::SpherePoisson { center, .. }
            | Component::BallUniform { center, .. }
            | Component::ShellUniform { center, .. }
            | Component::Mollifier { center, .. } => center.dim(),
            Component::GridDensity { grid, .. } => grid.dim(),
        }
    }

    pub fn total(&self) -> f64 {
        match self {
            Component::Atom { weight, .. } => *weight,
            Component::SphereUniform { total, .. }
            | Component::SpherePoisson { total, .. }
            | Component::BallUniform { total, .. }
            | Component::ShellUniform { total, .. }
            | Component::Mollifier { total, .. } => *total,
            Component::GridDensity { masses, .. } => compensated_sum(masses.iter().copied()),
        }
    }

    pub fn variation(&self) -> f64 {
        match self {
            Component::GridDensity { masses, .. } => masses.iter().map(|m| m.abs()).sum(),
            other => other.total().abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Component::Atom { weight, .. } => weight.is_finite(),
            Component::SphereUniform { radius, total, .. }
            | Component::BallUniform { radius, total, .. }
            | Component::Mollifier { radius, total, .. } => *radius > 0.0 && total.is_finite(),
            Component::SpherePoisson {
                center,
                radius,
                pole,
                total,
            } => *radius > 0.0 && total.is_finite() && pole.dist(center) < *radius,
            Component::ShellUniform {
                inner,
                outer,
                total,
                ..
            } => 0.0 <= *inner && inner < outer && total.is_finite(),
            Component::GridDensity { grid, masses } => {
                masses.len() == grid.len()
                    && masses.iter().all(|m| m.is_finite())
                    && (0..grid.len()).all(|i| grid.is_masked(i) || masses[i] == 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid measure component {self:?}")))
        }
    }

    fn scaled(&self, a: f64) -> Component {
        let mut c = self.clone();
        match &mut c {
            Component::Atom { weight, .. } => *weight *= a,
            Component::SphereUniform { total, .. }
            | Component::SpherePoisson { total, .. }
            | Component::BallUniform { total, .. }
            | Component::ShellUniform { total, .. }
            | Component::Mollifier { total, .. } => *total *= a,
            Component::GridDensity { masses, .. } => masses.iter_mut().for_each(|m| *m *= a),
        }
        c
    }

    /// Quadrature nodes whose weights sum to the component's total mass.
    pub fn nodes(&self, res: &Resolution) -> Result<Vec<(Point, f64)>> {
        Ok(match self {
            Component::Atom { point, weight } => vec![(*point, *weight)],
            Component::SphereUniform {
                center,
                radius,
                total,
            } => sphere_rule(center.dim(), res, None)?
                .into_iter()
                .map(|(u, w)| (*center + u * *radius, w * total))
                .collect(),
            Component::SpherePoisson {
                center,
                radius,
                pole,
                total,
            } => {
                let axis = *pole - *center;
                let axis = if axis.norm() > 0.0 { Some(axis) } else { None };
                let d = center.dim();
                let rule = sphere_rule(d, &Resolution::POISSON, axis.as_ref())?;
                rule.into_iter()
                    .map(|(u, w)| {
                        let z = *center + u * *radius;
                        (z, w * total * poisson_density(center, *radius, pole, &z))
                    })
                    .collect()
            }
            Component::BallUniform {
                center,
                radius,
                total,
            } => shell_rule(center, 0.0, *radius, res)?
                .into_iter()
                .map(|(p, w)| (p, w * total))
                .collect(),
            Component::ShellUniform {
                center,
                inner,
                outer,
                total,
            } => shell_rule(center, *inner, *outer, res)?
                .into_iter()
                .map(|(p, w)| (p, w * total))
                .collect(),
            Component::Mollifier {
                center,
                radius,
                total,
            } => radial_rule(center, *radius, |t| (1.0 - t * t).powi(4), res)?
                .into_iter()
                .map(|(p, w)| (p, w * total))
                .collect(),
            Component::GridDensity { grid, masses } => (0..grid.len())
                .filter(|&i| masses[i] != 0.0)
                .map(|i| (grid.center(i), masses[i]))
                .collect(),
        })
    }

    /// Distance from `y` to the support.
    pub fn distance_to(&self, y: &Point) -> f64 {
        match self {
            Component::Atom { point, .. } => point.dist(y),
            Component::SphereUniform { center, radius, .. }
            | Component::SpherePoisson { center, radius, .. } => (y.dist(center) - radius).abs(),
            Component::BallUniform { center, radius, .. }
            | Component::Mollifier { center, radius, .. } => (y.dist(center) - radius).max(0.0),
            Component::ShellUniform {
                center,
                inner,
                outer,
                ..
            } => {
                let s = y.dist(center);
                (inner - s).max(s - outer).max(0.0)
            }
            Component::GridDensity { grid, masses } => {
                let half = 0.5 * grid.spacing() * (grid.dim() as f64).sqrt();
                (0..grid.len())
                    .filter(|&i| masses[i] != 0.0)
                    .map(|i| (grid.center(i).dist(y) - half).max(0.0))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// `sup |x − o|` over the support.
    pub fn reach_from(&self, o: &Point) -> f64 {
        match self {
            Component::Atom { point, .. } => point.dist(o),
            Component::SphereUniform { center, radius, .. }
            | Component::SpherePoisson { center, radius, .. }
            | Component::BallUniform { center, radius, .. }
            | Component::Mollifier { center, radius, .. } => center.dist(o) + radius,
            Component::ShellUniform { center, outer, .. } => center.dist(o) + outer,
            Component::GridDensity { grid, masses } => {
                let half = 0.5 * grid.spacing() * (grid.dim() as f64).sqrt();
                (0..grid.len())
                    .filter(|&i| masses[i] != 0.0)
                    .map(|i| grid.center(i).dist(o) + half)
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// Density of harmonic measure `ω_{B(c,R)}(x, ·)` against normalized surface measure.
pub fn poisson_density(c: &Point, r: f64, x: &Point, z: &Point) -> f64 {
    let d = c.dim() as i32;
    let a2 = (*x - *c).norm_sq();
    r.powi(d - 2) * (r * r - a2) / z.dist(x).powi(d)
}

/// The fixed mollifier profile `(1 − |x/r|²)^4` with closed-form normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub radius: f64,
}

impl Mollifier {
    pub fn new(radius: f64) -> Result<Self> {
        precondition!(radius > 0.0, "mollifier radius must be positive");
        Ok(Mollifier { radius })
    }

    /// `∫ (1 − |x/r|²)^4 dx` over `B(0, r)` in `ℝ^d`.
    pub fn normalization(&self, d: usize) -> f64 {
        // s_{d−1} r^d ∫_0^1 t^{d−1}(1−t²)^4 dt, the integral expanded binomially.
        let binom = [1.0, -4.0, 6.0, -4.0, 1.0];
        let radial: f64 = binom
            .iter()
            .enumerate()
            .map(|(j, c)| c / (d + 2 * j) as f64)
            .sum();
        sphere_area(d) * self.radius.powi(d as i32) * radial
    }

    /// Density of the normalized bump centred at the origin.
    pub fn density(&self, x: &Point) -> f64 {
        let t2 = x.norm_sq() / (self.radius * self.radius);
        if t2 >= 1.0 {
            0.0
        } else {
            (1.0 - t2).powi(4) / self.normalization(x.dim())
        }
    }

    pub fn at(&self, center: Point, total: f64) -> Component {
        Component::Mollifier {
            center,
            radius: self.radius,
            total,
        }
    }
}

/// A finite list of components in a common dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    dim: usize,
    components: Vec<Component>,
}

/// A map `x ↦ ι_x` used for sweeping.
#[derive(Clone)]
pub enum Sweep {
    Mollifier(Mollifier),
    Family(Arc<dyn Fn(&Point) -> Measure + Send + Sync>),
}

impl Measure {
    pub fn zero(dim: usize) -> Measure {
        Measure {
            dim,
            components: Vec::new(),
        }
    }

    pub fn new(dim: usize, components: Vec<Component>) -> Result<Measure> {
        let m = Measure { dim, components };
        m.validate()?;
        Ok(m)
    }

    pub fn dirac(x: Point) -> Measure {
        Measure {
            dim: x.dim(),
            components: vec![Component::Atom {
                point: x,
                weight: 1.0,
            }],
        }
    }

    pub fn atom(x: Point, weight: f64) -> Measure {
        Measure {
            dim: x.dim(),
            components: vec![Component::Atom { point: x, weight }],
        }
    }

    pub fn single(c: Component) -> Measure {
        Measure {
            dim: c.dim(),
            components: vec![c],
        }
    }

    pub fn sphere_uniform(center: Point, radius: f64, total: f64) -> Measure {
        Measure::single(Component::SphereUniform {
            center,
            radius,
            total,
        })
    }

    pub fn ball_uniform(center: Point, radius: f64, total: f64) -> Measure {
        Measure::single(Component::BallUniform {
            center,
            radius,
            total,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.components {
            if c.dim() != self.dim {
                return Err(Error::Mismatch(format!(
                    "component of dimension {} in a measure of dimension {}",
                    c.dim(),
                    self.dim
                )));
            }
            c.validate()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn push(&mut self, c: Component) {
        assert_eq!(c.dim(), self.dim, "component dimension mismatch");
        self.components.push(c);
    }

    pub fn plus(&self, other: &Measure) -> Measure {
        assert_eq!(self.dim, other.dim, "measure dimension mismatch");
        let mut out = self.clone();
        out.components.extend(other.components.iter().cloned());
        out
    }

    pub fn minus(&self, other: &Measure) -> Measure {
        self.plus(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Measure {
        Measure {
            dim: self.dim,
            components: self.components.iter().map(|c| c.scaled(a)).collect(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.components.iter().map(|c| c.total()))
    }

    /// Sum of component variations, an upper bound for `|μ|(ℝ^d)` that is exact
    /// when components of opposite sign do not overlap.
    pub fn total_variation(&self) -> f64 {
        self.components.iter().map(|c| c.variation()).sum()
    }

    /// `(μ⁺, μ⁻)` split by the sign of each weight / cell mass.
    pub fn jordan(&self) -> (Measure, Measure) {
        let mut pos = Measure::zero(self.dim);
        let mut neg = Measure::zero(self.dim);
        for c in &self.components {
            match c {
                Component::GridDensity { grid, masses } => {
                    let p: Vec<f64> = masses.iter().map(|m| m.max(0.0)).collect();
                    let n: Vec<f64> = masses.iter().map(|m| (-m).max(0.0)).collect();
                    if p.iter().any(|&m| m > 0.0) {
                        pos.push(Component::GridDensity {
                            grid: grid.clone(),
                            masses: p,
                        });
                    }
                    if n.iter().any(|&m| m > 0.0) {
                        neg.push(Component::GridDensity {
                            grid: grid.clone(),
                            masses: n,
                        });
                    }
                }
                other => {
                    let t = other.total();
                    if t > 0.0 {
                        pos.push(other.clone());
                    } else if t < 0.0 {
                        neg.push(other.scaled(-1.0));
                    }
                }
            }
        }
        (pos, neg)
    }

    pub fn is_positive(&self) -> bool {
        self.components.iter().all(|c| match c {
            Component::GridDensity { masses, .. } => masses.iter().all(|&m| m >= 0.0),
            other => other.total() >= 0.0,
        })
    }

    /// Quadrature nodes of all components.
    pub fn nodes(&self, res: &Resolution) -> Result<Vec<(Point, f64)>> {
        let mut out = Vec::new();
        for c in &self.components {
            out.extend(c.nodes(res)?);
        }
        Ok(out)
    }

    pub fn integrate(&self, f: &ScalarField) -> ExtReal {
        self.integrate_with(f, &Resolution::DEFAULT)
    }

    /// `∫ f dμ` by the component quadrature rules at resolution `res`.
    pub fn integrate_with(&self, f: &ScalarField, res: &Resolution) -> ExtReal {
        let mut parts = Vec::new();
        for c in &self.components {
            let nodes = c
                .nodes(res)
                .expect("measure dimension supported by quadrature");
            parts.push(ext_sum(nodes.iter().map(|(p, w)| f.eval(p) * *w)));
        }
        ext_sum(parts)
    }

    /// Integral of a plain closure; convenience for finite integrands.
    pub fn integrate_fn(&self, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> ExtReal {
        self.integrate(&ScalarField::on_space(self.dim, f))
    }

    /// `dist(y, supp μ)`.
    pub fn distance_to(&self, y: &Point) -> f64 {
        self.components
            .iter()
            .filter(|c| c.variation() > 0.0)
            .map(|c| c.distance_to(y))
            .fold(f64::INFINITY, f64::min)
    }

    /// `sup_{x ∈ supp μ} |x − o|`.
    pub fn reach_from(&self, o: &Point) -> f64 {
        self.components
            .iter()
            .filter(|c| c.variation() > 0.0)
            .map(|c| c.reach_from(o))
            .fold(0.0, f64::max)
    }

    /// Total atom weight within `tol` of any of `points`; continuous
    /// components charge no finite set.
    pub fn mass_on_points(&self, points: &[Point], tol: f64) -> f64 {
        self.components
            .iter()
            .filter_map(|c| match c {
                Component::Atom { point, weight }
                    if points.iter().any(|p| p.dist(point) <= tol) =>
                {
                    Some(*weight)
                }
                _ => None,
            })
            .sum()
    }

    /// Restriction to `s`; exact for atoms, grids and radial sets about a
    /// layer's centre, otherwise by 2^14 stratified samples seeded from `seed`.
    pub fn restrict(&self, s: &crate::geometry::Domain, seed: u64) -> Result<Measure> {
        restrict::restrict(self, s, seed)
    }

    /// Axis-aligned box containing the support.
    pub fn support_box(&self) -> Option<(Point, Point)> {
        let mut lo: Option<Point> = None;
        let mut hi: Option<Point> = None;
        for c in &self.components {
            if c.variation() == 0.0 {
                continue;
            }
            let (center, r) = match c {
                Component::Atom { point, .. } => (*point, 0.0),
                Component::SphereUniform { center, radius, .. }
                | Component::SpherePoisson { center, radius, .. }
                | Component::BallUniform { center, radius, .. }
                | Component::Mollifier { center, radius, .. } => (*center, *radius),
                Component::ShellUniform { center, outer, .. } => (*center, *outer),
                Component::GridDensity { grid, .. } => {
                    let mut top = grid.origin();
                    for k in 0..grid.dim() {
                        top[k] += grid.shape()[k] as f64 * grid.spacing();
                    }
                    let mid = (grid.origin() + top) * 0.5;
                    let half = (top - grid.origin()) * 0.5;
                    let r = half.coords().iter().cloned().fold(0.0, f64::max);
                    (mid, r)
                }
            };
            let (l, h) = (
                center - Point::new(&vec![r; self.dim]),
                center + Point::new(&vec![r; self.dim]),
            );
            lo = Some(match lo {
                None => l,
                Some(mut v) => {
                    for k in 0..self.dim {
                        v[k] = v[k].min(l[k]);
                    }
                    v
                }
            });
            hi = Some(match hi {
                None => h,
                Some(mut v) => {
                    for k in 0..self.dim {
                        v[k] = v[k].max(h[k]);
                    }
                    v
                }
            });
        }
        Some((lo?, hi?))
    }

    /// Rasterizes the measure onto `grid` by assigning each quadrature node's
    /// weight to the cell containing it. Nodes outside the lattice are dropped.
    pub fn rasterize(&self, grid: &GridDomain, res: &Resolution) -> Result<Component> {
        let mut masses = vec![0.0; grid.len()];
        for (p, w) in self.nodes(res)? {
            if let Some(i) = grid.locate(&p) {
                masses[i] += w;
            }
        }
        let mask = masses.iter().map(|&m| m != 0.0).collect();
        Ok(Component::GridDensity {
            grid: grid.with_mask(mask)?,
            masses,
        })
    }
}

/// Volume of `B(0, r)` in `ℝ^d`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    unit_ball_volume(d) * r.powi(d as i32)
}

/// The swept measure `β = ∫ ι_x dμ(x)`.
///
/// Atoms are swept exactly; continuous components are first replaced by their
/// quadrature nodes at resolution `res` and each node is swept.
pub fn convolve_balayage(mu: &Measure, sweep: &Sweep, res: &Resolution) -> Result<Measure> {
    let mut out = Measure::zero(mu.dim());
    for c in mu.components() {
        for (p, w) in c.nodes(res)? {
            if w == 0.0 {
                continue;
            }
            match sweep {
                Sweep::Mollifier(m) => out.push(m.at(p, w)),
                Sweep::Family(f) => {
                    let iota = f(&p);
                    precondition!(
                        iota.dim() == mu.dim(),
                        "sweeping family has the wrong dimension"
                    );
                    out = out.plus(&iota.scale(w));
                }
            }
        }
    }
    Ok(out)
}

/// [`convolve_balayage`] inside an open set `O`: every sweeping measure
/// `ι_x` must stay within half the distance from `x` to `∂O`.
pub fn convolve_balayage_in(
    mu: &Measure,
    sweep: &Sweep,
    o: &crate::geometry::Domain,
    res: &Resolution,
) -> Result<Measure> {
    for c in mu.components() {
        for (p, w) in c.nodes(res)? {
            if w == 0.0 {
                continue;
            }
            precondition!(o.contains(&p), "support point {p:?} lies outside O");
            let room = 0.5 * o.boundary_distance(&p);
            let reach = match sweep {
                Sweep::Mollifier(m) => m.radius,
                Sweep::Family(f) => f(&p).reach_from(&p),
            };
            precondition!(
                reach < room,
                "sweep at {p:?} reaches {reach}, beyond half the distance {room} to the boundary"
            );
        }
    }
    convolve_balayage(mu, sweep, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    #[test]
    fn integrate_examples() {
        let mu = Measure::dirac(Point::xy(1.0, 0.0));
        assert_eq!(mu.integrate_fn(|p| p.norm().ln()), ExtReal::Finite(0.0));
        let a = Point::xy(0.5, 0.0);
        let s = Measure::sphere_uniform(Point::xy(0.0, 0.0), 1.0, 1.0);
        assert!(s.integrate_fn(move |p| p.dist(&a).ln()).to_f64().abs() < 1e-14);
        let b = Measure::ball_uniform(Point::xy(0.0, 0.0), 1.0, std::f64::consts::PI);
        assert!((b.integrate_fn(|_| 1.0).to_f64() - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn mass_and_jordan() {
        let x = Point::xy(0.0, 0.0);
        let y = Point::xy(1.0, 0.0);
        assert_eq!(Measure::dirac(x).total_mass(), 1.0);
        let m = Measure::atom(x, 2.0).plus(&Measure::atom(y, -3.0));
        let (p, n) = m.jordan();
        assert_eq!(p, Measure::atom(x, 2.0));
        assert_eq!(n, Measure::atom(y, 3.0));
    }

    #[test]
    fn restrict_concentric_ball() {
        let o = Point::xy(0.0, 0.0);
        let r = Measure::ball_uniform(o, 1.0, 1.0)
            .restrict(&Domain::ball(o, 0.5), 0)
            .unwrap();
        assert_eq!(r, Measure::ball_uniform(o, 0.5, 0.25));
    }

    #[test]
    fn mollifier_is_normalized() {
        for d in 1..=3 {
            let m = Mollifier::new(0.3).unwrap();
            let mu = Measure::single(m.at(Point::origin(d), 1.0));
            let density_mass = Measure::ball_uniform(Point::origin(d), 0.3, ball_volume(d, 0.3))
                .integrate_fn(move |p| m.density(p))
                .to_f64();
            assert!((density_mass - 1.0).abs() < 1e-10, "d={d}: {density_mass}");
            assert!((mu.integrate_fn(|_| 1.0).to_f64() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweeping_a_dirac_gives_the_bump() {
        let m = Mollifier::new(0.1).unwrap();
        let b = convolve_balayage(
            &Measure::dirac(Point::xy(0.0, 0.0)),
            &Sweep::Mollifier(m),
            &Resolution::DEFAULT,
        )
        .unwrap();
        assert_eq!(b, Measure::single(m.at(Point::xy(0.0, 0.0), 1.0)));
    }
}
