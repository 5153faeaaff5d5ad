//! Linear and affine balayage checks over finite families of test functions,
//! and generators for those families.
//!
//! Verdicts are sampled: a finite family stands in for a class of functions,
//! so a pass is a necessary condition only.

use crate::error::{precondition, Error, Result};
use crate::extreal::ExtReal;
use crate::fields::{random_probes, sphere_mean, ScalarField};
use crate::geometry::{components, Domain, GridDomain, Point};
use crate::green::{sphere_samples, GreenModel};
use crate::kernels::KernelConfig;
use crate::measures::{Component, Measure};
use crate::potentials::{potential, probe_points, Potential};
use crate::quadrature::Resolution;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Amplitude levels used to detect unbounded affine constants.
pub const SCALE_LEVELS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Default number of members in generated families.
pub const DEFAULT_FAMILY_SIZE: usize = 64;

/// A test function.
#[derive(Clone)]
pub enum TestFn {
    /// `sign · K_{d−2}(·, pole)`; integrals are potentials evaluated at the pole.
    Kernel {
        pole: Point,
        sign: f64,
    },
    Constant(f64),
    Field(ScalarField),
}

impl fmt::Debug for TestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFn::Kernel { pole, sign } => write!(f, "Kernel({sign:+} at {pole:?})"),
            TestFn::Constant(c) => write!(f, "Constant({c})"),
            TestFn::Field(_) => write!(f, "Field"),
        }
    }
}

impl TestFn {
    pub fn eval(&self, x: &Point) -> ExtReal {
        match self {
            TestFn::Kernel { pole, sign } => {
                let cfg = KernelConfig { d: x.dim() };
                cfg.kernel(x, pole) * *sign
            }
            TestFn::Constant(c) => ExtReal::Finite(*c),
            TestFn::Field(f) => f.eval(x),
        }
    }

    pub fn field(&self, d: usize) -> ScalarField {
        match self {
            TestFn::Field(f) => f.clone(),
            other => {
                let g = other.clone();
                ScalarField::new(Domain::Space { dim: d }, move |x| g.eval(x))
            }
        }
    }

    pub fn scaled(&self, t: f64) -> TestFn {
        match self {
            TestFn::Kernel { pole, sign } => TestFn::Kernel {
                pole: *pole,
                sign: sign * t,
            },
            TestFn::Constant(c) => TestFn::Constant(c * t),
            TestFn::Field(f) => TestFn::Field(f.scale(t)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Member {
    pub label: String,
    pub f: TestFn,
}

impl Member {
    pub fn new(label: impl Into<String>, f: TestFn) -> Self {
        Member {
            label: label.into(),
            f,
        }
    }
}

/// The classes of test functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyClass {
    /// Positive, compactly supported in `D`, at most `b₊` on `∂S_o`.
    Sbh00PlusBounded,
    /// Positive, vanishing at `∂D`, at most `b₊` on `∂S_o`.
    Sbh0Plus,
    /// Compactly supported, at most `b₊` on `∂S_o`, at least `b₋` on `S_o^{∪3r}∖S_o`.
    Sbh00,
    /// Vanishing at `∂D`, positive near it, with the bounds of `Sbh00`.
    SbhPlus0,
    /// As `SbhPlus0` but the lower bound is imposed on sphere means `v^{∘r}`
    /// over `S_o^{∪2r}∖S_o^{∪r}`.
    SbhPlus0Circ,
    /// `{±K_{d−2}(·, y)}` for poles `y` off a set.
    HarmonicKernels,
    /// `±` real and imaginary parts of planar monomials.
    HarmonicPolynomials,
    /// `{K_{d−2}(·, y)}`, subharmonic on `ℝ^d`.
    SubharmonicKernels,
    Custom,
}

impl FamilyClass {
    pub fn needs_lower_bound(self) -> bool {
        matches!(
            self,
            FamilyClass::Sbh00 | FamilyClass::SbhPlus0 | FamilyClass::SbhPlus0Circ
        )
    }
}

/// Parameters `S_o`, `r`, `b₋ < 0 < b₊` and the Green model of `D` with pole `o`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub s_o: Domain,
    pub r: f64,
    pub b_minus: f64,
    pub b_plus: f64,
    pub green: GreenModel,
}

#[derive(Clone, Debug)]
pub struct TestFamily {
    pub class: FamilyClass,
    pub params: Option<ClassParams>,
    pub members: Vec<Member>,
    /// `H = −H`; linear verdicts then demand equality.
    pub symmetric: bool,
    /// Candidates dropped by class validation.
    pub rejected: usize,
}

impl TestFamily {
    pub fn new(class: FamilyClass, members: Vec<Member>, symmetric: bool) -> Self {
        TestFamily {
            class,
            params: None,
            members,
            symmetric,
            rejected: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds the members `+1` and `−1`.
    pub fn with_constants(mut self) -> Self {
        self.members
            .push(Member::new("constant +1", TestFn::Constant(1.0)));
        self.members
            .push(Member::new("constant -1", TestFn::Constant(-1.0)));
        self
    }

    pub fn subset(&self, indices: &[usize]) -> TestFamily {
        TestFamily {
            class: self.class,
            params: self.params.clone(),
            members: indices.iter().map(|&i| self.members[i].clone()).collect(),
            symmetric: false,
            rejected: 0,
        }
    }

    /// Every member scaled by `t > 0`.
    pub fn scaled(&self, t: f64) -> TestFamily {
        TestFamily {
            class: self.class,
            params: self.params.clone(),
            members: self
                .members
                .iter()
                .map(|m| Member::new(format!("{} x{t}", m.label), m.f.scaled(t)))
                .collect(),
            symmetric: self.symmetric,
            rejected: 0,
        }
    }

    /// The family together with all pairwise maxima.
    pub fn max_closure(&self) -> TestFamily {
        let d = self.dim_hint();
        let mut members = self.members.clone();
        for i in 0..self.members.len() {
            for j in i + 1..self.members.len() {
                let f = self.members[i].f.field(d).max(&self.members[j].f.field(d));
                members.push(Member::new(format!("max({i},{j})"), TestFn::Field(f)));
            }
        }
        TestFamily {
            class: self.class,
            params: self.params.clone(),
            members,
            symmetric: false,
            rejected: 0,
        }
    }

    /// `sup_v v(x)` over the members.
    pub fn pointwise_sup(&self, x: &Point) -> ExtReal {
        self.members
            .iter()
            .map(|m| m.f.eval(x))
            .fold(ExtReal::NegInf, |a, b| a.max(b))
    }

    fn dim_hint(&self) -> usize {
        if let Some(p) = &self.params {
            return p.green.dim();
        }
        for m in &self.members {
            match &m.f {
                TestFn::Kernel { pole, .. } => return pole.dim(),
                TestFn::Field(f) => return f.dim(),
                TestFn::Constant(_) => {}
            }
        }
        2
    }
}

/// Points on the circle / sphere `|y − c| = radius` (Fibonacci lattice in d = 3).
pub fn ring_points(c: &Point, radius: f64, n: usize) -> Vec<Point> {
    match c.dim() {
        2 => (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                *c + Point::xy(t.cos(), t.sin()) * radius
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let s = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    let mut u = vec![0.0; c.dim()];
                    u[0] = s * t.cos();
                    u[1] = s * t.sin();
                    u[2] = z;
                    *c + Point::new(&u) * radius
                })
                .collect()
        }
    }
}

/// `{±K_{d−2}(·, y) : y ∈ probes}`, harmonic on a neighbourhood of `clos S`.
pub fn harmonic_kernel_family(s: &Domain, probes: &[Point]) -> Result<TestFamily> {
    let mut members = Vec::with_capacity(2 * probes.len());
    for (k, y) in probes.iter().enumerate() {
        precondition!(y.dim() == s.dim(), "probe {k} has the wrong dimension");
        precondition!(
            s.exterior_distance(y) > 0.0,
            "probe {k} at {y:?} lies in the closure of S"
        );
        members.push(Member::new(
            format!("+K(.,y{k})"),
            TestFn::Kernel {
                pole: *y,
                sign: 1.0,
            },
        ));
        members.push(Member::new(
            format!("-K(.,y{k})"),
            TestFn::Kernel {
                pole: *y,
                sign: -1.0,
            },
        ));
    }
    Ok(TestFamily::new(FamilyClass::HarmonicKernels, members, true))
}

/// `{K_{d−2}(·, y) : y ∈ poles}`.
pub fn subharmonic_kernel_family(poles: &[Point]) -> TestFamily {
    let members = poles
        .iter()
        .enumerate()
        .map(|(k, y)| {
            Member::new(
                format!("K(.,y{k})"),
                TestFn::Kernel {
                    pole: *y,
                    sign: 1.0,
                },
            )
        })
        .collect();
    TestFamily::new(FamilyClass::SubharmonicKernels, members, false)
}

/// `±1` and `±Re, ±Im` of `((x − c)_i + i (x − c)_j)^k`, `1 ≤ k ≤ degree`, over
/// the coordinate planes.
pub fn harmonic_polynomial_family(c: &Point, degree: usize) -> TestFamily {
    let d = c.dim();
    let mut members = vec![
        Member::new("+1", TestFn::Constant(1.0)),
        Member::new("-1", TestFn::Constant(-1.0)),
    ];
    let planes: Vec<(usize, usize)> = if d == 2 {
        vec![(0, 1)]
    } else {
        (0..d).map(|i| (i, (i + 1) % d)).collect()
    };
    for (i, j) in planes {
        for k in 1..=degree {
            for part in 0..2 {
                for sign in [1.0, -1.0] {
                    let c0 = *c;
                    let f = ScalarField::on_space(d, move |x| {
                        let z =
                            num_complex::Complex64::new(x[i] - c0[i], x[j] - c0[j]).powu(k as u32);
                        sign * if part == 0 { z.re } else { z.im }
                    });
                    let name = if part == 0 { "Re" } else { "Im" };
                    let s = if sign > 0.0 { '+' } else { '-' };
                    members.push(Member::new(
                        format!("{s}{name}(z{i}{j}^{k})"),
                        TestFn::Field(f),
                    ));
                }
            }
        }
    }
    TestFamily::new(FamilyClass::HarmonicPolynomials, members, true)
}

/// Subharmonic probes for Jensen checks in the ball `D = B(c, R)`: kernels
/// with poles on rings at radii `R/4, R/2, 3R/4, 5R/4`, `±1`, `±` coordinates,
/// `|x − c|²` and `max{K(·, y), K(R/2)}`.
pub fn standard_subharmonic_family(center: &Point, radius: f64, per_ring: usize) -> TestFamily {
    let d = center.dim();
    let cfg = KernelConfig { d };
    let mut poles = Vec::new();
    for f in [0.25, 0.5, 0.75, 1.25] {
        poles.extend(ring_points(center, f * radius, per_ring));
    }
    let mut fam = subharmonic_kernel_family(&poles).with_constants();
    let c = *center;
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let f = ScalarField::on_space(d, move |x| sign * (x[k] - c[k]));
            fam.members
                .push(Member::new(format!("{sign:+}x{k}"), TestFn::Field(f)));
        }
    }
    fam.members.push(Member::new(
        "|x-c|^2",
        TestFn::Field(ScalarField::on_space(d, move |x| (*x - c).norm_sq())),
    ));
    let floor = cfg.radial(0.5 * radius);
    for (k, y) in ring_points(center, 0.5 * radius, 4).into_iter().enumerate() {
        let f = ScalarField::new(Domain::Space { dim: d }, move |x| {
            cfg.kernel(x, &y).max(ExtReal::Finite(floor))
        });
        fam.members
            .push(Member::new(format!("max(K(.,z{k}),c)"), TestFn::Field(f)));
    }
    fam.class = FamilyClass::SubharmonicKernels;
    fam
}

/// Per-member result of a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberMargin {
    pub index: usize,
    pub label: String,
    /// `∫ v dϑ`
    pub lhs: ExtReal,
    /// `∫ v dμ`
    pub rhs: ExtReal,
    /// `rhs − lhs` for linear checks, `lhs − rhs` for affine ones.
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Linear,
    Affine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalayageVerdict {
    pub relation: Relation,
    pub pass: bool,
    /// Always true: the verdict is over a finite family.
    pub sampled: bool,
    pub worst_margin: f64,
    pub witness: Option<usize>,
    pub witness_label: Option<String>,
    /// The empirical affine constant `C` (affine checks only).
    pub constant: Option<f64>,
    /// `C` at the amplitude levels of [`SCALE_LEVELS`] when probed.
    pub scaled_constants: Vec<f64>,
    pub divergent: bool,
    pub indeterminate: bool,
    pub diagnostics: Vec<String>,
    pub margins: Vec<MemberMargin>,
}

/// `1e−7 · (1 + |lhs| + |rhs|)`.
pub fn scale_tol(lhs: f64, rhs: f64, tol_scale: f64) -> f64 {
    1e-7 * tol_scale * (1.0 + lhs.abs() + rhs.abs())
}

/// Integrals of family members against one measure, sharing a potential.
pub struct Integrator {
    measure: Measure,
    pt: Potential,
    res: Resolution,
}

impl Integrator {
    pub fn new(measure: &Measure) -> Result<Self> {
        let cfg = KernelConfig::new(measure.dim())?;
        Ok(Integrator {
            measure: measure.clone(),
            pt: potential(measure, cfg)?,
            res: Resolution::DEFAULT,
        })
    }

    pub fn with_resolution(mut self, res: Resolution) -> Self {
        self.res = res;
        self
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn integrate(&self, f: &TestFn) -> ExtReal {
        match f {
            TestFn::Kernel { pole, sign } => self.pt.eval(pole) * *sign,
            TestFn::Constant(c) => ExtReal::Finite(c * self.measure.total_mass()),
            TestFn::Field(v) => self.measure.integrate_with(v, &self.res),
        }
    }
}

fn member_error(i: usize, m: &Member, what: &str) -> Error {
    Error::Numeric(format!("member {i} ({}): {what}", m.label))
}

/// Linear balayage `ϑ ≼_H μ`: `∫h dϑ ≤ ∫h dμ + tol` for every member, with
/// equality for symmetric families.
pub fn check_linear(theta: &Measure, mu: &Measure, family: &TestFamily) -> Result<BalayageVerdict> {
    check_linear_scaled(theta, mu, family, 1.0)
}

pub fn check_linear_scaled(
    theta: &Measure,
    mu: &Measure,
    family: &TestFamily,
    tol_scale: f64,
) -> Result<BalayageVerdict> {
    precondition!(theta.dim() == mu.dim(), "measures of different dimensions");
    let it = Integrator::new(theta)?;
    let im = Integrator::new(mu)?;
    let mut margins = Vec::with_capacity(family.len());
    for (i, m) in family.members.iter().enumerate() {
        let lhs = it.integrate(&m.f);
        let rhs = im.integrate(&m.f);
        if lhs == ExtReal::Indeterminate || rhs == ExtReal::Indeterminate {
            return Err(member_error(i, m, "indeterminate integral"));
        }
        let (margin, tol, pass) = match (lhs, rhs) {
            (ExtReal::Finite(l), ExtReal::Finite(r)) => {
                let tol = scale_tol(l, r, tol_scale);
                let margin = r - l;
                let pass = if family.symmetric {
                    margin.abs() <= tol
                } else {
                    margin >= -tol
                };
                (margin, tol, pass)
            }
            (l, r) => {
                let margin = (r - l).to_f64();
                let pass = !family.symmetric && l <= r;
                (margin, 0.0, pass)
            }
        };
        margins.push(MemberMargin {
            index: i,
            label: m.label.clone(),
            lhs,
            rhs,
            margin,
            tol,
            pass,
        });
    }
    Ok(finish(
        Relation::Linear,
        margins,
        None,
        Vec::new(),
        false,
        family.symmetric,
    ))
}

fn finish(
    relation: Relation,
    margins: Vec<MemberMargin>,
    constant: Option<f64>,
    scaled_constants: Vec<f64>,
    divergent: bool,
    symmetric: bool,
) -> BalayageVerdict {
    // Lowest index wins ties.
    let mut witness: Option<usize> = None;
    let mut worst = f64::INFINITY;
    for m in &margins {
        let key = match relation {
            Relation::Linear if symmetric => -m.margin.abs(),
            Relation::Linear => m.margin,
            Relation::Affine => -m.margin,
        };
        let key = if key.is_nan() { f64::NEG_INFINITY } else { key };
        if witness.is_none() || key < worst {
            worst = key;
            witness = Some(m.index);
        }
    }
    let pass = match relation {
        Relation::Linear => margins.iter().all(|m| m.pass),
        Relation::Affine => constant.is_some_and(|c| c.is_finite()) && !divergent,
    };
    let witness_label =
        witness.map(|i| margins.iter().find(|m| m.index == i).unwrap().label.clone());
    BalayageVerdict {
        relation,
        pass,
        sampled: true,
        worst_margin: if margins.is_empty() { 0.0 } else { worst },
        witness,
        witness_label,
        constant,
        scaled_constants,
        divergent,
        indeterminate: false,
        diagnostics: Vec::new(),
        margins,
    }
}

/// `true` when `values` increase along the amplitude levels and the last
/// increment is at least half the first (affine growth rather than saturation).
pub fn divergence_trend(values: &[f64], tol: f64) -> bool {
    if values.len() < 3 || values.iter().any(|v| !v.is_finite()) {
        return values.contains(&f64::INFINITY);
    }
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    inc.iter().all(|&d| d > tol) && inc[inc.len() - 1] >= 0.5 * inc[0]
}

#[derive(Clone, Debug)]
pub struct AffineOptions {
    /// Probe the family at amplitudes `t·v`, `t ∈ SCALE_LEVELS`, to detect `C = ∞`.
    pub probe_scaling: bool,
    pub seed: u64,
    pub tol_scale: f64,
}

impl Default for AffineOptions {
    fn default() -> Self {
        AffineOptions {
            probe_scaling: false,
            seed: 0,
            tol_scale: 1.0,
        }
    }
}

/// Affine balayage outside `S_o` in `D`:
/// `C = max_v (∫_{D∖S_o} v dϑ − ∫_{D∖S_o} v dμ)`, passing when finite.
pub fn check_affine(
    theta: &Measure,
    mu: &Measure,
    family: &TestFamily,
    s_o: &Domain,
    d: &Domain,
    opts: &AffineOptions,
) -> Result<BalayageVerdict> {
    precondition!(theta.dim() == mu.dim(), "measures of different dimensions");
    let region = Domain::Intersection {
        parts: vec![d.clone(), Domain::complement(s_o.clone())],
    };
    let theta_r = theta.restrict(&region, opts.seed)?;
    let mu_r = mu.restrict(&region, opts.seed.wrapping_add(1))?;
    let it = Integrator::new(&theta_r)?;
    let im = Integrator::new(&mu_r)?;
    let mut margins = Vec::with_capacity(family.len());
    let mut diagnostics = Vec::new();
    let mut indeterminate = false;
    let mut c = f64::NEG_INFINITY;
    for (i, m) in family.members.iter().enumerate() {
        let lhs = it.integrate(&m.f);
        let rhs = im.integrate(&m.f);
        let diff = match (lhs, rhs) {
            (ExtReal::Finite(l), ExtReal::Finite(r)) => l - r,
            (ExtReal::NegInf, ExtReal::NegInf)
            | (ExtReal::PosInf, ExtReal::PosInf)
            | (ExtReal::Indeterminate, _)
            | (_, ExtReal::Indeterminate) => {
                indeterminate = true;
                diagnostics.push(format!(
                    "member {i} ({}): integrals {lhs} and {rhs} are not comparable",
                    m.label
                ));
                f64::NAN
            }
            (l, r) => (l - r).to_f64(),
        };
        let tol = scale_tol(lhs.to_f64(), rhs.to_f64(), opts.tol_scale);
        if !diff.is_nan() {
            c = c.max(diff);
        }
        margins.push(MemberMargin {
            index: i,
            label: m.label.clone(),
            lhs,
            rhs,
            margin: diff,
            tol,
            pass: diff.is_finite() || diff == f64::NEG_INFINITY,
        });
    }
    let constant = if margins.is_empty() { 0.0 } else { c };
    let mut scaled = Vec::new();
    let mut divergent = constant == f64::INFINITY;
    if opts.probe_scaling && constant.is_finite() {
        // C(t) = max_v t·(∫v dϑ − ∫v dμ) over the scaled family.
        for t in SCALE_LEVELS {
            let ct = margins
                .iter()
                .filter(|m| m.margin.is_finite())
                .map(|m| t * m.margin)
                .fold(f64::NEG_INFINITY, f64::max);
            scaled.push(ct);
        }
        let tol = margins.iter().map(|m| m.tol).fold(0.0, f64::max);
        divergent = divergence_trend(&scaled, tol);
    }
    let mut v = finish(
        Relation::Affine,
        margins,
        Some(constant),
        scaled,
        divergent,
        false,
    );
    if indeterminate {
        v.pass = false;
        v.indeterminate = true;
    }
    v.diagnostics = diagnostics;
    Ok(v)
}

// ---------------------------------------------------------------------------
// Generated test classes.

struct ClassSamples {
    /// `∂S_o`
    sphere: Vec<Point>,
    /// `S_o^{∪3r} ∖ S_o`
    layer: Vec<Point>,
    /// `S_o^{∪2r} ∖ S_o^{∪r}` (centres of the sphere means)
    mean_centres: Vec<Point>,
    /// Points of `D ∖ S_o`.
    body: Vec<Point>,
    /// Points of `D` near `∂D`, outside the support radius.
    rim: Vec<Point>,
}

fn ball_of(dom: &Domain) -> Result<(Point, f64)> {
    match dom {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
            Ok((*center, *radius))
        }
        _ => Err(Error::Domain("S_o must be a ball".into())),
    }
}

impl ClassSamples {
    fn new(p: &ClassParams, support: f64) -> Result<Self> {
        let (c, rho) = ball_of(&p.s_o)?;
        let g = &p.green;
        let sphere = sphere_samples(&c, rho)?;
        let layer: Vec<Point> = probe_points(&Domain::closed_ball(c, rho + 3.0 * p.r), 25)?
            .into_iter()
            .filter(|x| !p.s_o.contains(x))
            .collect();
        let mean_centres: Vec<Point> = probe_points(&Domain::closed_ball(c, rho + 2.0 * p.r), 13)?
            .into_iter()
            .filter(|x| x.dist(&c) >= rho + p.r)
            .collect();
        let body: Vec<Point> = probe_points(&Domain::ball(g.center, g.radius), 25)?
            .into_iter()
            .filter(|x| !p.s_o.contains(x))
            .collect();
        let mut rim = Vec::new();
        for f in [0.5, 0.8, 0.98] {
            let s = support + f * (g.radius - support - g.pole.dist(&g.center));
            rim.extend(ring_points(&g.pole, s, 64));
        }
        Ok(ClassSamples {
            sphere,
            layer,
            mean_centres,
            body,
            rim,
        })
    }
}

fn sup_on(v: &ScalarField, pts: &[Point]) -> f64 {
    pts.iter()
        .map(|x| v.eval(x).to_f64())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn inf_on(v: &ScalarField, pts: &[Point]) -> f64 {
    pts.iter()
        .map(|x| v.eval(x).to_f64())
        .fold(f64::INFINITY, f64::min)
}

fn inf_sphere_mean(v: &ScalarField, centres: &[Point], r: f64) -> f64 {
    let res = Resolution {
        circle: 128,
        sphere: 8,
        ..Resolution::DEFAULT
    };
    centres
        .iter()
        .map(|x| {
            sphere_mean(v, x, r, &res)
                .map(|m| m.value.to_f64())
                .unwrap_or(f64::NEG_INFINITY)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Checks a candidate against the constraints of `class` at the sample points.
fn validate(v: &ScalarField, class: FamilyClass, p: &ClassParams, s: &ClassSamples) -> bool {
    let tol = 1e-9;
    if sup_on(v, &s.sphere) > p.b_plus + tol {
        return false;
    }
    match class {
        FamilyClass::Sbh00PlusBounded => {
            inf_on(v, &s.body) >= -tol && s.rim.iter().all(|x| v.eval(x).to_f64().abs() <= tol)
        }
        FamilyClass::Sbh0Plus => inf_on(v, &s.body) >= -tol && inf_on(v, &s.rim) >= -tol,
        FamilyClass::Sbh00 => {
            inf_on(v, &s.layer) >= p.b_minus - tol
                && s.rim.iter().all(|x| v.eval(x).to_f64().abs() <= tol)
        }
        FamilyClass::SbhPlus0 => {
            inf_on(v, &s.layer) >= p.b_minus - tol && inf_on(v, &s.rim) >= -tol
        }
        FamilyClass::SbhPlus0Circ => {
            inf_sphere_mean(v, &s.mean_centres, p.r) >= p.b_minus - tol && inf_on(v, &s.rim) >= -tol
        }
        _ => true,
    }
}

/// Green-type candidates `t·(g_D(·, o) − c)⁺`, scaled so that `sup_{∂S_o} = s·b₊`.
fn green_candidates(
    p: &ClassParams,
    s: &ClassSamples,
    allow_zero_level: bool,
) -> Vec<(String, ScalarField)> {
    let g = p.green.field();
    let gs = sup_on(&g, &s.sphere);
    let mut out = Vec::new();
    let levels: &[f64] = if allow_zero_level {
        &[0.0, 0.05, 0.2, 0.4, 0.6, 0.8]
    } else {
        &[0.05, 0.2, 0.4, 0.6, 0.8]
    };
    for &f in levels {
        for amp in [1.0, 0.5] {
            let c = f * gs;
            let t = amp * p.b_plus / (gs - c);
            let field = g
                .map(move |x| (x - c).positive_part() * t)
                .map(move |x| x.min(ExtReal::Finite(f64::INFINITY)));
            out.push((format!("green(c={c:.3},t={t:.3})"), field));
        }
    }
    let c = 1.5 * gs;
    out.push((
        format!("green(c={c:.3}) = 0"),
        g.map(move |x| (x - c).positive_part()),
    ));
    out
}

/// Largest radius about `o` whose ball stays at distance `margin` from `∂D`.
fn support_radius(p: &ClassParams) -> f64 {
    let room = p.green.radius - p.green.pole.dist(&p.green.center);
    0.9 * room
}

/// Jensen potentials `pt_{λ_R − δ_o}` of normalized volume on `B(o, R)`.
fn jensen_candidates(p: &ClassParams, s: &ClassSamples) -> Result<Vec<(String, ScalarField)>> {
    let o = p.green.pole;
    let (_, rho) = ball_of(&p.s_o)?;
    let rmax = support_radius(p);
    let cfg = KernelConfig::new(o.dim())?;
    let mut out = Vec::new();
    for f in [1.0, 0.8, 0.6] {
        let r = (f * rmax).max(1.2 * rho);
        let mu = Measure::ball_uniform(o, r, 1.0).minus(&Measure::dirac(o));
        let v = potential(&mu, cfg)?.field();
        let top = sup_on(&v, &s.sphere);
        if top > 0.0 {
            let t = p.b_plus / top;
            out.push((format!("jensen(R={r:.3})"), v.scale(t)));
        }
    }
    Ok(out)
}

/// Sign-changing Arens–Singer potentials: volume on `B(o, R)` with the mass of
/// a ball `B(e, h)` near the rim moved to the sphere `∂B(e, h/20)`. Harmonic
/// integrals are unchanged, so the potential still vanishes off `B(o, R)`, but
/// it dips below zero near `e`.
fn arens_singer_candidates(
    p: &ClassParams,
    s: &ClassSamples,
    circ: bool,
) -> Result<Vec<(String, ScalarField)>> {
    let o = p.green.pole;
    let d = o.dim();
    let (_, rho_s) = ball_of(&p.s_o)?;
    let cfg = KernelConfig::new(d)?;
    let mut out = Vec::new();
    let edge = (rho_s + 3.0 * p.r).min(support_radius(p));
    for (k, frac) in [1.0, 0.85].iter().enumerate() {
        let big = frac * edge;
        let hole = (big - rho_s) / 2.5;
        if hole <= 0.0 {
            continue;
        }
        let dist = big - 1.2 * hole;
        for (j, angle) in [0.3f64, 2.4].iter().enumerate() {
            let mut dir = vec![0.0; d];
            dir[0] = angle.cos();
            dir[1] = angle.sin();
            let e = o + Point::new(&dir) * dist;
            let mass = (hole / big).powi(d as i32);
            let mut mu = Measure::ball_uniform(o, big, 1.0);
            mu.push(Component::BallUniform {
                center: e,
                radius: hole,
                total: -mass,
            });
            mu.push(Component::SphereUniform {
                center: e,
                radius: 0.05 * hole,
                total: mass,
            });
            let v = potential(&mu.minus(&Measure::dirac(o)), cfg)?.field();
            let top = sup_on(&v, &s.sphere);
            let low = if circ {
                inf_sphere_mean(&v, &s.mean_centres, p.r)
            } else {
                inf_on(&v, &s.layer)
            };
            let mut t = if top > 0.0 {
                p.b_plus / top
            } else {
                f64::INFINITY
            };
            if low < 0.0 {
                t = t.min(0.98 * p.b_minus / low);
            }
            if t.is_finite() && t > 0.0 {
                out.push((format!("arens-singer(R={big:.3},{k}{j})"), v.scale(t)));
            }
        }
    }
    Ok(out)
}

/// Generates up to `count` validated members of a test class on `D ∖ S_o`.
pub fn build_test_family(
    class: FamilyClass,
    params: &ClassParams,
    count: usize,
) -> Result<TestFamily> {
    let (c, rho) = ball_of(&params.s_o)?;
    let g = &params.green;
    precondition!(
        params.b_minus < 0.0 && 0.0 < params.b_plus,
        "need b₋ < 0 < b₊"
    );
    let dist = g.radius - c.dist(&g.center) - rho;
    precondition!(
        params.r > 0.0 && 3.0 * params.r < dist,
        "need 0 < 3r < dist(S_o, ∂D) = {dist}, got r = {}",
        params.r
    );
    precondition!(
        g.pole.dist(&c) < rho,
        "the pole must lie in the interior of S_o"
    );
    let support = support_radius(params);
    let samples = ClassSamples::new(params, support)?;
    let mut cands = green_candidates(
        params,
        &samples,
        matches!(
            class,
            FamilyClass::SbhPlus0 | FamilyClass::SbhPlus0Circ | FamilyClass::Sbh0Plus
        ),
    );
    cands.extend(jensen_candidates(params, &samples)?);
    if class.needs_lower_bound() {
        cands.extend(arens_singer_candidates(
            params,
            &samples,
            class == FamilyClass::SbhPlus0Circ,
        )?);
    }
    let mut members = Vec::new();
    let mut rejected = 0;
    for (label, f) in cands {
        if members.len() >= count {
            break;
        }
        if validate(&f, class, params, &samples) {
            members.push(Member::new(label, TestFn::Field(f)));
        } else {
            rejected += 1;
        }
    }
    // Fill with pairwise maxima, which stay in every class.
    let base = members.len();
    'outer: for i in 0..base {
        for j in i + 1..base {
            if members.len() >= count {
                break 'outer;
            }
            let (TestFn::Field(a), TestFn::Field(b)) = (&members[i].f, &members[j].f) else {
                continue;
            };
            let f = a.max(b);
            if validate(&f, class, params, &samples) {
                members.push(Member::new(format!("max({i},{j})"), TestFn::Field(f)));
            } else {
                rejected += 1;
            }
        }
    }
    Ok(TestFamily {
        class,
        params: Some(params.clone()),
        members,
        symmetric: false,
        rejected,
    })
}

/// The truncations `v_n` of a nonnegative-near-`∂D` function `V`: on each
/// component of `{V < 1/n}` (lattice cells, 2d-connected) meeting the outside
/// of `D` or the lattice frame, `v_n = 0`; elsewhere `v_n = V − 1/n`.
pub fn truncation_sequence(
    big_v: &ScalarField,
    d: &Domain,
    grid: &GridDomain,
    ns: &[usize],
) -> Result<Vec<ScalarField>> {
    let values: Vec<ExtReal> = big_v.sample(grid);
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        precondition!(n >= 1, "levels start at n = 1");
        let level = 1.0 / n as f64;
        let mask: Vec<bool> = values.iter().map(|v| *v < level).collect();
        let sub = grid.with_mask(mask)?;
        let mut zero = vec![false; grid.len()];
        for comp in components(&sub) {
            let touches = comp.iter().any(|&i| {
                !d.contains(&grid.center(i)) || grid.face_neighbors(i).iter().any(|nb| nb.is_none())
            });
            if touches {
                for i in comp {
                    zero[i] = true;
                }
            }
        }
        let g = grid.clone();
        let v = big_v.clone();
        let f = ScalarField::new(big_v.domain().clone(), move |x| match g.locate(x) {
            Some(i) if zero[i] => ExtReal::Finite(0.0),
            Some(_) => v.eval(x) - level,
            None => ExtReal::Finite(0.0),
        });
        out.push(f);
    }
    Ok(out)
}

/// Random probe points in `dom` for pointwise checks.
pub fn sample_points(dom: &Domain, n: usize, seed: u64) -> Result<Vec<Point>> {
    Ok(random_probes(dom, None, n, 1e-6, &[], seed)?
        .into_iter()
        .map(|p| p.x)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{green_ball, harmonic_measure};

    fn o2() -> Point {
        Point::xy(0.0, 0.0)
    }

    #[test]
    fn harmonic_kernels_see_poisson_equality() {
        let g = green_ball(o2(), 1.0, o2()).unwrap();
        let omega = harmonic_measure(&g, &o2()).unwrap();
        let fam =
            harmonic_kernel_family(&Domain::ball(o2(), 1.0), &ring_points(&o2(), 1.5, 40)).unwrap();
        assert_eq!(fam.len(), 80);
        let v = check_linear(&Measure::dirac(o2()), &omega, &fam).unwrap();
        assert!(v.pass);
        let v = check_linear(
            &Measure::dirac(o2()),
            &Measure::dirac(Point::xy(0.5, 0.0)),
            &fam,
        )
        .unwrap();
        assert!(!v.pass);
    }

    #[test]
    fn probe_inside_closure_is_rejected() {
        assert!(harmonic_kernel_family(&Domain::ball(o2(), 1.0), &[Point::xy(1.0, 0.0)]).is_err());
    }

    #[test]
    fn divergence_trend_semantics() {
        assert!(divergence_trend(&[1.0, 2.0, 4.0, 8.0], 1e-9));
        assert!(!divergence_trend(&[1.0, 1.5, 1.7, 1.75], 1e-9));
        assert!(!divergence_trend(&[-1.0, -2.0, -4.0, -8.0], 1e-9));
    }
}
