use super::pole::{default_pole_radii, fit_pole_coefficient, PoleFit};
use super::ScalarField;
use crate::error::{precondition, Error, Result};
use crate::extreal::ExtReal;
use crate::geometry::{Domain, Point};
use crate::green::{mg_constant, sphere_samples, GreenModel};
use serde::{Deserialize, Serialize};

/// Default offset used to approximate one-sided upper limits at boundary points.
pub const DEFAULT_LIMIT_STEP: f64 = 1e-4;

/// Tolerance of the sampled boundary inequalities.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Data of the max-gluing: `v` on `O`, `v₀` on `O₀`.
#[derive(Clone, Debug)]
pub struct GluingSpec {
    pub o: Domain,
    pub v: ScalarField,
    pub o0: Domain,
    pub v0: ScalarField,
    /// Offset `h` of the upper-limit probes.
    pub step: f64,
}

impl GluingSpec {
    pub fn new(o: Domain, v: ScalarField, o0: Domain, v0: ScalarField) -> Self {
        GluingSpec {
            o,
            v,
            o0,
            v0,
            step: DEFAULT_LIMIT_STEP,
        }
    }
}

/// Data of the quantitative gluing: `v` on `O`, `g` on `O₀`, and the constants
/// `m_v ≤ M_v`, `m_g < M_g`.
#[derive(Clone, Debug)]
pub struct QuantitativeSpec {
    pub o: Domain,
    pub v: ScalarField,
    pub o0: Domain,
    pub g: ScalarField,
    /// `m_v`
    pub lower_v: f64,
    /// `M_v`
    pub upper_v: f64,
    /// `m_g`
    pub lower_g: f64,
    /// `M_g`
    pub upper_g: f64,
    pub step: f64,
}

/// Boundary points with outward unit normals: spheres are sampled at about
/// 720 points, grid boundaries at their face centres.
pub fn boundary_samples(dom: &Domain) -> Result<Vec<(Point, Point)>> {
    let raw = raw_boundary(dom)?;
    Ok(raw
        .into_iter()
        .filter(|(p, n)| {
            let eps = 1e-9 * (1.0 + p.norm());
            dom.contains(&(*p - *n * eps)) && !dom.contains(&(*p + *n * eps))
        })
        .collect())
}

fn raw_boundary(dom: &Domain) -> Result<Vec<(Point, Point)>> {
    Ok(match dom {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
            if *radius == 0.0 {
                Vec::new()
            } else {
                sphere_samples(center, *radius)?
                    .into_iter()
                    .map(|p| (p, (p - *center) * (1.0 / radius)))
                    .collect()
            }
        }
        Domain::Annulus {
            center,
            inner,
            outer,
        } => {
            let mut v: Vec<(Point, Point)> = sphere_samples(center, *outer)?
                .into_iter()
                .map(|p| (p, (p - *center) * (1.0 / outer)))
                .collect();
            v.extend(
                sphere_samples(center, *inner)?
                    .into_iter()
                    .map(|p| (p, (*center - p) * (1.0 / inner))),
            );
            v
        }
        Domain::Grid { grid } => {
            let h = grid.spacing();
            let mut v = Vec::new();
            for i in 0..grid.len() {
                if !grid.is_masked(i) {
                    continue;
                }
                for (k, nb) in grid.face_neighbors(i).into_iter().enumerate() {
                    if nb.is_none_or(|j| !grid.is_masked(j)) {
                        let axis = k / 2;
                        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                        let n = Point::unit(grid.dim(), axis) * sign;
                        v.push((grid.center(i) + n * (0.5 * h), n));
                    }
                }
            }
            v
        }
        Domain::Space { .. } => Vec::new(),
        Domain::Complement { of } => raw_boundary(of)?
            .into_iter()
            .map(|(p, n)| (p, -n))
            .collect(),
        Domain::Union { parts } | Domain::Intersection { parts } => {
            let mut v = Vec::new();
            for p in parts {
                v.extend(raw_boundary(p)?);
            }
            v
        }
    })
}

fn approach_directions(d: usize) -> Vec<Point> {
    match d {
        2 => (0..8)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_4 * k as f64;
                Point::xy(t.cos(), t.sin())
            })
            .collect(),
        _ => (0..8)
            .map(|k| {
                let mut c = vec![0.0; d];
                for (j, cj) in c.iter_mut().enumerate().take(3) {
                    *cj = if (k >> j) & 1 == 1 { 1.0 } else { -1.0 } / 3f64.sqrt();
                }
                Point::new(&c)
            })
            .collect(),
    }
}

/// `limsup_{x' → x, x' ∈ set} f(x')`, approximated per approach direction `u`
/// by the linear extrapolation `2f(x+hu) − f(x+2hu)` and maximized over the
/// eight directions (plus `inward`) whose offsets stay in `set`.
pub fn boundary_limsup(
    f: &ScalarField,
    x: &Point,
    set: &Domain,
    h: f64,
    inward: Option<&Point>,
) -> Option<ExtReal> {
    let mut dirs = approach_directions(x.dim());
    if let Some(n) = inward {
        dirs.push(*n);
    }
    let mut best: Option<ExtReal> = None;
    for u in dirs {
        let (p1, p2) = (*x + u * h, *x + u * (2.0 * h));
        if !(set.contains(&p1) && set.contains(&p2)) {
            continue;
        }
        let (a, b) = (f.eval(&p1), f.eval(&p2));
        let est = match (a, b) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(2.0 * a - b),
            (a, _) => a,
        };
        best = Some(match best {
            None => est,
            Some(c) => c.max(est),
        });
    }
    best
}

fn within(lhs: ExtReal, rhs: ExtReal) -> bool {
    match (lhs, rhs) {
        (ExtReal::Finite(l), ExtReal::Finite(r)) => l <= r + BOUNDARY_TOL * (1.0 + r.abs()),
        (ExtReal::Indeterminate, _) | (_, ExtReal::Indeterminate) => false,
        (l, r) => l <= r,
    }
}

/// Checks `limsup_{O₀∩O ∋ x'→x} f(x') ≤ rhs(x)` at sampled `x ∈ inside ∩ ∂bdry`.
fn check_upper_limit(
    f: &ScalarField,
    rhs: &ScalarField,
    bdry: &Domain,
    inside: &Domain,
    overlap: &Domain,
    h: f64,
    label: &str,
) -> Result<usize> {
    let mut checked = 0;
    for (x, n) in boundary_samples(bdry)? {
        if !inside.contains(&x) {
            continue;
        }
        let Some(l) = boundary_limsup(f, &x, overlap, h, Some(&-n)) else {
            continue;
        };
        let r = rhs.eval(&x);
        checked += 1;
        if !within(l, r) {
            return Err(Error::Precondition(format!(
                "boundary condition on {label} fails at {x:?}: upper limit {l} exceeds {r}"
            )));
        }
    }
    Ok(checked)
}

fn glued_field(o: Domain, v: ScalarField, o0: Domain, v0: ScalarField) -> ScalarField {
    let dom = Domain::Union {
        parts: vec![o0.clone(), o.clone()],
    };
    ScalarField::new(dom, move |x| match (o0.contains(x), o.contains(x)) {
        (true, false) => v0.eval(x),
        (true, true) => v0.eval(x).max(v.eval(x)),
        (false, true) => v.eval(x),
        (false, false) => ExtReal::Indeterminate,
    })
}

/// `V = v₀` on `O₀∖O`, `max{v₀, v}` on `O₀∩O`, `v` on `O∖O₀`, after checking the
/// two boundary inequalities on sampled boundary points.
pub fn glue_max(spec: &GluingSpec) -> Result<ScalarField> {
    precondition!(
        spec.o.dim() == spec.o0.dim(),
        "O and O₀ have different dimensions"
    );
    let overlap = Domain::Intersection {
        parts: vec![spec.o0.clone(), spec.o.clone()],
    };
    check_upper_limit(
        &spec.v,
        &spec.v0,
        &spec.o,
        &spec.o0,
        &overlap,
        spec.step,
        "O₀ ∩ ∂O",
    )?;
    check_upper_limit(
        &spec.v0,
        &spec.v,
        &spec.o0,
        &spec.o,
        &overlap,
        spec.step,
        "O ∩ ∂O₀",
    )?;
    Ok(glued_field(
        spec.o.clone(),
        spec.v.clone(),
        spec.o0.clone(),
        spec.v0.clone(),
    ))
}

/// `(M_v⁺ + m_v⁻)/(M_g − m_g)`, the amplitude of `v₀`.
pub fn quantitative_amplitude(lower_v: f64, upper_v: f64, lower_g: f64, upper_g: f64) -> f64 {
    (upper_v.max(0.0) + (-lower_v).max(0.0)) / (upper_g - lower_g)
}

/// `v₀ = ((M_v⁺ + m_v⁻)/(M_g − m_g))(2g − M_g − m_g)` glued with `v` by [`glue_max`].
pub fn glue_quantitative(spec: &QuantitativeSpec) -> Result<ScalarField> {
    let (mv, big_mv, mg, big_mg) = (spec.lower_v, spec.upper_v, spec.lower_g, spec.upper_g);
    if !(big_mg > mg) {
        return Err(Error::Precondition(format!(
            "degenerate gluing constants: M_g = {big_mg} <= m_g = {mg}"
        )));
    }
    precondition!(
        mv.is_finite() && big_mv.is_finite() && mv <= big_mv,
        "need finite m_v <= M_v"
    );
    let overlap = Domain::Intersection {
        parts: vec![spec.o0.clone(), spec.o.clone()],
    };
    let cst = |c: f64| ScalarField::constant(Domain::Space { dim: spec.o.dim() }, c);
    // m_v ≤ v on O ∩ ∂O₀, and the upper limit of g there is at most m_g.
    for (x, n) in boundary_samples(&spec.o0)? {
        if !spec.o.contains(&x) {
            continue;
        }
        let vx = spec.v.eval(&x);
        if !within(ExtReal::Finite(mv), vx) {
            return Err(Error::Precondition(format!(
                "m_v = {mv} exceeds v = {vx} at {x:?}"
            )));
        }
        if let Some(l) = boundary_limsup(&spec.g, &x, &overlap, spec.step, Some(&-n)) {
            if !within(l, ExtReal::Finite(mg)) {
                return Err(Error::Precondition(format!(
                    "upper limit of g is {l} > m_g = {mg} at {x:?}"
                )));
            }
        }
    }
    // Upper limit of v at most M_v and g at least M_g on O₀ ∩ ∂O.
    check_upper_limit(
        &spec.v,
        &cst(big_mv),
        &spec.o,
        &spec.o0,
        &overlap,
        spec.step,
        "O₀ ∩ ∂O",
    )?;
    for (x, _) in boundary_samples(&spec.o)? {
        if spec.o0.contains(&x) {
            let gx = spec.g.eval(&x);
            if !within(ExtReal::Finite(big_mg), gx) {
                return Err(Error::Precondition(format!(
                    "M_g = {big_mg} exceeds g = {gx} at {x:?}"
                )));
            }
        }
    }
    let amp = quantitative_amplitude(mv, big_mv, mg, big_mg);
    let v0 = spec
        .g
        .map(move |g| (g * 2.0 - (big_mg + mg)) * amp)
        .with_domain(spec.o0.clone());
    glue_max(&GluingSpec {
        o: spec.o.clone(),
        v: spec.v.clone(),
        o0: spec.o0.clone(),
        v0,
        step: spec.step,
    })
}

/// Output of [`glue_with_green`].
#[derive(Clone, Debug)]
pub struct GreenGluing {
    pub field: ScalarField,
    pub green: GreenModel,
    pub s_o: Domain,
    pub s: Domain,
    pub lower_v: f64,
    pub upper_v: f64,
    /// `M_g = inf_{∂S_o} g_D(·, o)`.
    pub m_g: f64,
    /// `2(M_v⁺ + m_v⁻)/M_g`, the pole coefficient of `V`.
    pub coefficient: f64,
}

/// Pointwise check of the two-sided bounds satisfied by a Green gluing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenBoundReport {
    pub probes: usize,
    /// Violations of `v ≤ V ≤ M_v⁺ + c·g_D` on `S∖S_o`.
    pub layer_violations: usize,
    /// Violations of `0 ≤ V ≤ c·g_D` on `S_o∖{o}`.
    pub core_violations: usize,
    pub worst_margin: f64,
    pub pass: bool,
}

impl GreenGluing {
    pub fn pole(&self) -> Point {
        self.green.pole
    }

    pub fn check_bounds(&self, v: &ScalarField, probes: &[Point]) -> GreenBoundReport {
        let c = self.coefficient;
        let mut layer = 0;
        let mut core = 0;
        let mut worst = f64::INFINITY;
        let mut n = 0;
        for x in probes {
            if *x == self.green.pole {
                continue;
            }
            let big_v = self.field.eval(x).to_f64();
            let g = self.green.eval(x).to_f64();
            if self.s_o.contains(x) {
                n += 1;
                let m = big_v.min(c * g - big_v);
                worst = worst.min(m);
                if m < -1e-9 * (1.0 + big_v.abs()) {
                    core += 1;
                }
            } else if self.s.contains(x) {
                n += 1;
                let vx = v.eval(x).to_f64();
                let m = (big_v - vx).min(self.upper_v.max(0.0) + c * g - big_v);
                worst = worst.min(m);
                if m < -1e-9 * (1.0 + big_v.abs()) {
                    layer += 1;
                }
            }
        }
        GreenBoundReport {
            probes: n,
            layer_violations: layer,
            core_violations: core,
            worst_margin: worst,
            pass: layer == 0 && core == 0,
        }
    }

    /// Fitted pole coefficient of `V` at `o`.
    pub fn pole_fit(&self, radii: &[f64]) -> Result<PoleFit> {
        fit_pole_coefficient(&self.field, &self.green.pole, radii)
    }

    pub fn default_pole_fit(&self) -> Result<PoleFit> {
        self.pole_fit(&default_pole_radii())
    }
}

fn ball_of(dom: &Domain, what: &str) -> Result<(Point, f64)> {
    match dom {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
            Ok((*center, *radius))
        }
        _ => Err(Error::Domain(format!("{what} must be a ball"))),
    }
}

/// Sampled extrema of `v` over the layer `S∖S_o` (for choosing `m_v`, `M_v`).
pub fn layer_extrema(
    v: &ScalarField,
    s_o: &Domain,
    s: &Domain,
    per_axis: usize,
) -> Result<(f64, f64)> {
    let pts = layer_points(s_o, s, per_axis)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in &pts {
        let x = v.eval(p).to_f64();
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok((lo, hi))
}

fn layer_points(s_o: &Domain, s: &Domain, per_axis: usize) -> Result<Vec<Point>> {
    let (cs, rs) = ball_of(s, "S")?;
    let (co, ro) = ball_of(s_o, "S_o")?;
    let mut pts: Vec<Point> =
        crate::potentials::probe_points(&Domain::closed_ball(cs, rs), per_axis)?
            .into_iter()
            .filter(|p| !s_o.contains(p))
            .collect();
    pts.extend(sphere_samples(&co, ro)?);
    Ok(pts)
}

/// The Green gluing on `𝒪 ∖ {o}`: `V = v₀` on `S_o`, `max{v₀, v}` on `S∖S_o`,
/// `v` on `𝒪∖S`, with `v₀ = ((M_v⁺ + m_v⁻)/M_g)(2g_D(·, o) − M_g)`.
///
/// `S_o`, `D` and `S` are balls with `o ∈ Int S_o ⋐ D ⋐ S ⊂ 𝒪`; `v` must lie
/// between `m_v` and `M_v` on `S∖S_o` (checked on a lattice of probes).
pub fn glue_with_green(
    v: &ScalarField,
    green: &GreenModel,
    s_o: &Domain,
    s: &Domain,
    outer: &Domain,
    lower_v: f64,
    upper_v: f64,
) -> Result<GreenGluing> {
    let (co, ro) = ball_of(s_o, "S_o")?;
    let (cs, rs) = ball_of(s, "S")?;
    let (cd, rd) = (green.center, green.radius);
    let o = green.pole;
    precondition!(o.dist(&co) < ro, "the pole must lie in the interior of S_o");
    precondition!(
        co.dist(&cd) + ro < rd,
        "S_o must be compactly contained in D"
    );
    precondition!(cd.dist(&cs) + rd < rs, "D must be compactly contained in S");
    for p in sphere_samples(&cs, rs)? {
        precondition!(
            outer.contains(&p),
            "S must lie in the open set 𝒪 (fails at {p:?})"
        );
    }
    for p in layer_points(s_o, s, 41)? {
        let x = v.eval(&p);
        if !(within(ExtReal::Finite(lower_v), x) && within(x, ExtReal::Finite(upper_v))) {
            return Err(Error::Precondition(format!(
                "v = {x} at {p:?} violates m_v = {lower_v} <= v <= M_v = {upper_v} on S∖S_o"
            )));
        }
    }
    let m_g = mg_constant(green, s_o)?;
    let closed_so = Domain::closed_ball(co, ro);
    let spec = QuantitativeSpec {
        o: Domain::Intersection {
            parts: vec![outer.clone(), Domain::complement(closed_so)],
        },
        v: v.clone(),
        o0: Domain::punctured(Domain::ball(cs, rs), &[o]),
        g: green.field(),
        lower_v,
        upper_v,
        lower_g: 0.0,
        upper_g: m_g,
        step: DEFAULT_LIMIT_STEP,
    };
    let field = glue_quantitative(&spec)?;
    Ok(GreenGluing {
        field,
        green: *green,
        s_o: s_o.clone(),
        s: s.clone(),
        lower_v,
        upper_v,
        m_g,
        coefficient: 2.0 * quantitative_amplitude(lower_v, upper_v, 0.0, m_g),
    })
}
