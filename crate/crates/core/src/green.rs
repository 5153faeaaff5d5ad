//! Green's functions of balls, harmonic measures and Jensen / Arens–Singer
//! measure constructors.

use crate::error::{precondition, Result};
use crate::extreal::ExtReal;
use crate::fields::ScalarField;
use crate::geometry::{Domain, Point};
use crate::kernels::KernelConfig;
use crate::measures::{Component, Measure, Mollifier};
use crate::quadrature::{sphere_rule, Resolution};
use serde::{Deserialize, Serialize};

/// Green's function `g_D(·, o)` of the ball `D = B(center, radius)`, extended
/// by zero off `clos D` and by `+∞` at the pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenModel {
    pub center: Point,
    pub radius: f64,
    pub pole: Point,
}

/// `g_{B(x0, R)}(·, o)` in dimension `d = x0.dim() ≥ 2`.
pub fn green_ball(x0: Point, r: f64, o: Point) -> Result<GreenModel> {
    precondition!(x0.dim() >= 2, "Green models need d >= 2");
    precondition!(x0.dim() == o.dim(), "centre and pole dimensions differ");
    precondition!(r > 0.0, "radius must be positive");
    precondition!(o.dist(&x0) < r, "pole must lie inside the ball");
    Ok(GreenModel {
        center: x0,
        radius: r,
        pole: o,
    })
}

impl GreenModel {
    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn domain(&self) -> Domain {
        Domain::ball(self.center, self.radius)
    }

    pub fn kernel(&self) -> KernelConfig {
        KernelConfig { d: self.dim() }
    }

    /// The same ball with another pole.
    pub fn with_pole(&self, o: Point) -> Result<GreenModel> {
        green_ball(self.center, self.radius, o)
    }

    pub fn eval(&self, x: &Point) -> ExtReal {
        let r = self.radius;
        let xt = *x - self.center;
        if xt.norm() >= r {
            return ExtReal::Finite(0.0);
        }
        let ot = self.pole - self.center;
        let dx = x.dist(&self.pole);
        if dx == 0.0 {
            return ExtReal::PosInf;
        }
        // |õ|·|x − o*| / R, symmetric in x̃ and õ and equal to R when õ = 0.
        let rho = (xt.norm_sq() * ot.norm_sq() / (r * r) - 2.0 * xt.dot(&ot) + r * r)
            .max(0.0)
            .sqrt();
        let d = self.dim() as i32;
        let g = if d == 2 {
            (rho / dx).ln()
        } else {
            dx.powi(2 - d) - rho.powi(2 - d)
        };
        ExtReal::Finite(g.max(0.0))
    }

    pub fn field(&self) -> ScalarField {
        let g = *self;
        ScalarField::new(Domain::Space { dim: self.dim() }, move |x| g.eval(x))
    }

    /// Harmonic measure `ω_D(x, ·)`; the uniform sphere measure when `x` is the centre.
    pub fn harmonic_measure(&self, x: &Point) -> Result<Measure> {
        harmonic_measure(self, x)
    }
}

/// Points on the sphere `|x − c| = r`: 720 in d = 2, about 720 in d = 3.
pub fn sphere_samples(c: &Point, r: f64) -> Result<Vec<Point>> {
    let res = Resolution {
        circle: 720,
        sphere: 19,
        sphere_azimuth: 38,
        ..Resolution::DEFAULT
    };
    Ok(sphere_rule(c.dim(), &res, None)?
        .into_iter()
        .map(|(u, _)| *c + u * r)
        .collect())
}

/// `M_g = inf_{∂S_o} g_D(·, o)` for a ball `S_o` with `o ∈ Int S_o`, `clos S_o ⊂ D`,
/// sampled at 720 boundary points.
pub fn mg_constant(green: &GreenModel, s_o: &Domain) -> Result<f64> {
    let (c, rho) = match s_o {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
            (*center, *radius)
        }
        _ => {
            return Err(crate::error::Error::Domain("S_o must be a ball".into()));
        }
    };
    precondition!(
        green.pole.dist(&c) < rho,
        "the pole must lie in the interior of S_o"
    );
    precondition!(
        c.dist(&green.center) + rho < green.radius,
        "S_o must be compactly contained in D"
    );
    let mut m = f64::INFINITY;
    for p in sphere_samples(&c, rho)? {
        m = m.min(green.eval(&p).expect_finite("Green function off the pole"));
    }
    Ok(m)
}

pub fn harmonic_measure(green: &GreenModel, x: &Point) -> Result<Measure> {
    precondition!(x.dist(&green.center) < green.radius, "x must lie in D");
    Ok(if *x == green.center {
        Measure::sphere_uniform(green.center, green.radius, 1.0)
    } else {
        Measure::single(Component::SpherePoisson {
            center: green.center,
            radius: green.radius,
            pole: *x,
            total: 1.0,
        })
    })
}

/// Constructions of Jensen measures for `x` in a ball `D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JensenKind {
    /// `a·δ_x + b·ω_D(x, ·)` with `a, b ≥ 0`, `a + b = 1`.
    HarmonicMixture { a: f64, b: f64 },
    /// The mollifier bump of radius `r` centred at `x`.
    Mollified { r: f64 },
    /// `Σ w_i · (normalized volume on B(x, r_i))`, weights summing to one.
    SubBalls { radii: Vec<f64>, weights: Vec<f64> },
}

pub fn jensen_measure_family(d: &GreenModel, x: &Point, kind: &JensenKind) -> Result<Measure> {
    precondition!(x.dist(&d.center) < d.radius, "x must lie in D");
    let room = d.radius - x.dist(&d.center);
    match kind {
        JensenKind::HarmonicMixture { a, b } => {
            precondition!(
                *a >= 0.0 && *b >= 0.0 && (a + b - 1.0).abs() < 1e-12,
                "mixture weights must be a probability vector"
            );
            let mut m = Measure::zero(x.dim());
            if *a > 0.0 {
                m = m.plus(&Measure::atom(*x, *a));
            }
            if *b > 0.0 {
                m = m.plus(&harmonic_measure(d, x)?.scale(*b));
            }
            Ok(m)
        }
        JensenKind::Mollified { r } => {
            precondition!(*r > 0.0 && *r < room, "mollifier radius must fit inside D");
            Ok(Measure::single(Mollifier::new(*r)?.at(*x, 1.0)))
        }
        JensenKind::SubBalls { radii, weights } => {
            precondition!(
                radii.len() == weights.len() && !radii.is_empty(),
                "radii and weights must pair up"
            );
            precondition!(
                (weights.iter().sum::<f64>() - 1.0).abs() < 1e-12,
                "weights must sum to one"
            );
            let mut m = Measure::zero(x.dim());
            for (r, w) in radii.iter().zip(weights) {
                precondition!(
                    *r > 0.0 && *r < room && *w >= 0.0,
                    "sub-ball must fit inside D with nonnegative weight"
                );
                m.push(Component::BallUniform {
                    center: *x,
                    radius: *r,
                    total: *w,
                });
            }
            Ok(m)
        }
    }
}

/// The sweeping construction attributed to T. Lyons: normalized volume on
/// `B(x, r)` with each small ball `B(e_j, r_j)` replaced by an atom of the same
/// mass at `e_j`. It sweeps `δ_x` for harmonic but not for all subharmonic
/// functions.
pub fn lyons_measure(x: Point, r: f64, holes: &[(Point, f64)]) -> Result<Measure> {
    let d = x.dim() as i32;
    let mut m = Measure::ball_uniform(x, r, 1.0);
    for (k, (e, rj)) in holes.iter().enumerate() {
        precondition!(
            *rj > 0.0 && e.dist(&x) + rj < r,
            "hole {k} must lie inside B(x, r)"
        );
        for (e2, r2) in &holes[..k] {
            precondition!(e.dist(e2) > rj + r2, "holes {k} overlaps an earlier hole");
        }
        let mass = (rj / r).powi(d);
        m.push(Component::BallUniform {
            center: *e,
            radius: *rj,
            total: -mass,
        });
        m.push(Component::Atom {
            point: *e,
            weight: mass,
        });
    }
    Ok(m)
}
