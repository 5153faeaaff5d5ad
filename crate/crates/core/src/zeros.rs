//! Zeros of holomorphic functions of one variable: counting measures, the
//! Poincaré–Lelong check, and the zero-distribution inequalities for functions
//! bounded by `exp M`.

use crate::balayage::{
    build_test_family, check_affine, divergence_trend, sample_points, AffineOptions,
    BalayageVerdict, ClassParams, FamilyClass, TestFamily, DEFAULT_FAMILY_SIZE,
};
use crate::error::{precondition, Error, Result};
use crate::extreal::ExtReal;
use crate::fields::{riesz_measure, ScalarField};
use crate::geometry::{Domain, GridDomain, Point};
use crate::kernels::KernelConfig;
use crate::measures::{Component, Measure};
use crate::potentials::potential;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Default family size for the zero suites.
pub const ZERO_FAMILY_SIZE: usize = DEFAULT_FAMILY_SIZE / 2;

/// Default number of Blaschke factors kept.
pub const DEFAULT_TRUNCATION: usize = 10;

/// Relative tolerance of the derivative tests deciding multiplicities.
pub const MULTIPLICITY_TOL: f64 = 1e-9;

/// Largest relative residual `|p(z)| / Σ|a_k||z|^k` accepted for a root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// A zero with its multiplicity; serialized as `{re, im, multiplicity}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroAtom {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u32,
}

impl ZeroAtom {
    pub fn new(z: Complex64, multiplicity: u32) -> Self {
        ZeroAtom {
            re: z.re,
            im: z.im,
            multiplicity,
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn point(&self) -> Point {
        Point::xy(self.re, self.im)
    }
}

pub type Modulus = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum HoloKind {
    /// Coefficients in ascending powers.
    Polynomial { coefficients: Vec<Complex64> },
    /// `∏_{k<N} (|z_k|/z_k)(z_k − z)/(1 − z̄_k z)`, the factor being `z` when `z_k = 0`.
    Blaschke {
        zeros: Vec<Complex64>,
        truncation: usize,
    },
    /// An indexed zero set with an evaluable `|f|`.
    Explicit {
        zeros: Vec<ZeroAtom>,
        modulus: Modulus,
    },
}

impl fmt::Debug for HoloKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloKind::Polynomial { coefficients } => f
                .debug_struct("Polynomial")
                .field("coefficients", coefficients)
                .finish(),
            HoloKind::Blaschke { zeros, truncation } => f
                .debug_struct("Blaschke")
                .field("zeros", zeros)
                .field("truncation", truncation)
                .finish(),
            HoloKind::Explicit { zeros, .. } => f
                .debug_struct("Explicit")
                .field("zeros", zeros)
                .finish_non_exhaustive(),
        }
    }
}

/// A holomorphic function on a planar domain.
#[derive(Clone, Debug)]
pub struct HoloFunction {
    pub kind: HoloKind,
    pub domain: Domain,
}

fn unit_disk() -> Domain {
    Domain::ball(Point::xy(0.0, 0.0), 1.0)
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// Coefficients of the `j`-th derivative.
fn derivative(c: &[Complex64], j: usize) -> Vec<Complex64> {
    (j..c.len())
        .map(|k| {
            let falling: f64 = (k - j + 1..=k).map(|m| m as f64).product();
            c[k] * falling
        })
        .collect()
}

/// `Σ |a_k| |z|^k`, the natural scale of `p(z)`.
fn magnitude(c: &[Complex64], z: Complex64) -> f64 {
    let t = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * t + a.norm())
}

fn vanishes(c: &[Complex64], z: Complex64, tol: f64) -> bool {
    horner(c, z).norm() <= tol * magnitude(c, z).max(f64::MIN_POSITIVE)
}

/// Multiplicity at `z` by derivative tests, capped at `cap`.
fn multiplicity_at(c: &[Complex64], z: Complex64, cap: usize) -> usize {
    (0..cap)
        .take_while(|&j| vanishes(&derivative(c, j), z, MULTIPLICITY_TOL))
        .count()
}

/// Newton steps on `p^{(m−1)}`, whose root at an `m`-fold zero is simple;
/// a step is kept only when it lowers the residual.
fn newton_polish(c: &[Complex64], z: Complex64, m: usize) -> Complex64 {
    let g = derivative(c, m - 1);
    let dg = derivative(&g, 1);
    let mut z = z;
    let mut res = horner(&g, z).norm();
    for _ in 0..4 {
        let step = horner(&g, z) / horner(&dg, z);
        if !step.is_finite() {
            break;
        }
        let next = z - step;
        let r = horner(&g, next).norm();
        if r >= res {
            break;
        }
        z = next;
        res = r;
    }
    z
}

/// Eigenvalues from the Schur form, solving any unreduced `2 × 2` diagonal block.
fn schur_eigenvalues(m: DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let scale = m
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let (_, t) = m.schur().unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-14 * scale {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half = (a + d) * 0.5;
            let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
            out.push(half + disc);
            out.push(half - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// Roots of `Σ a_k z^k` with multiplicities: companion-matrix eigenvalues,
/// clustered and confirmed by derivative tests.
pub fn polynomial_roots(coefficients: &[Complex64]) -> Result<Vec<ZeroAtom>> {
    let top = coefficients.iter().rposition(|a| a.norm() > 0.0);
    let Some(n) = top else {
        return Err(Error::Domain(
            "the zero polynomial has no isolated zeros".into(),
        ));
    };
    let c = &coefficients[..=n];
    let low = c.iter().position(|a| a.norm() > 0.0).unwrap_or(0);
    let mut out = Vec::new();
    if low > 0 {
        out.push(ZeroAtom::new(Complex64::new(0.0, 0.0), low as u32));
    }
    let q = &c[low..];
    let deg = q.len() - 1;
    if deg == 0 {
        return Ok(out);
    }
    let lead = q[deg];
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -q[i] / lead;
    }
    let mut eig = schur_eigenvalues(comp);
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut used = vec![false; deg];
    for i in 0..deg {
        if used[i] {
            continue;
        }
        let radius = 1e-3 * (1.0 + eig[i].norm());
        let members: Vec<usize> = (i..deg)
            .filter(|&j| !used[j] && (eig[j] - eig[i]).norm() <= radius)
            .collect();
        let mean = members.iter().map(|&j| eig[j]).sum::<Complex64>() / members.len() as f64;
        let m = members.len();
        if m > 1 && multiplicity_at(q, mean, m + 1) == m {
            for &j in &members {
                used[j] = true;
            }
            out.push(ZeroAtom::new(newton_polish(q, mean, m), m as u32));
        } else {
            used[i] = true;
            let z = newton_polish(q, eig[i], 1);
            out.push(ZeroAtom::new(z, multiplicity_at(q, z, deg).max(1) as u32));
        }
    }
    for a in out.iter().skip(usize::from(low > 0)) {
        let res = horner(q, a.z()).norm() / magnitude(q, a.z()).max(f64::MIN_POSITIVE);
        if res > ROOT_RESIDUAL_TOL {
            return Err(Error::Numeric(format!(
                "root {:?} has relative residual {res:.3e}",
                a.z()
            )));
        }
    }
    Ok(merge_atoms(out, 1e-9))
}

/// Sums multiplicities of atoms closer than `tol`.
fn merge_atoms(atoms: Vec<ZeroAtom>, tol: f64) -> Vec<ZeroAtom> {
    let mut out: Vec<ZeroAtom> = Vec::new();
    for a in atoms {
        match out.iter_mut().find(|b| (b.z() - a.z()).norm() <= tol) {
            Some(b) => b.multiplicity += a.multiplicity,
            None => out.push(a),
        }
    }
    out
}

impl HoloFunction {
    /// A polynomial on `ℂ`; coefficients in ascending powers.
    pub fn polynomial(coefficients: Vec<Complex64>) -> Self {
        HoloFunction {
            kind: HoloKind::Polynomial { coefficients },
            domain: Domain::Space { dim: 2 },
        }
    }

    /// `∏ (z − z_k)^{m_k}`.
    pub fn from_roots(roots: &[ZeroAtom]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for a in roots {
            for _ in 0..a.multiplicity {
                let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
                for (k, ck) in c.iter().enumerate() {
                    next[k + 1] += ck;
                    next[k] -= ck * a.z();
                }
                c = next;
            }
        }
        HoloFunction::polynomial(c)
    }

    /// A Blaschke product on the unit disk with the default truncation.
    pub fn blaschke(zeros: Vec<Complex64>) -> Result<Self> {
        HoloFunction::blaschke_truncated(zeros, DEFAULT_TRUNCATION)
    }

    pub fn blaschke_truncated(zeros: Vec<Complex64>, truncation: usize) -> Result<Self> {
        precondition!(
            zeros.iter().all(|z| z.norm() < 1.0),
            "Blaschke zeros must lie in the open unit disk"
        );
        Ok(HoloFunction {
            kind: HoloKind::Blaschke { zeros, truncation },
            domain: unit_disk(),
        })
    }

    /// An explicit zero set on `domain`; `|f|` must vanish at each declared zero.
    pub fn explicit(zeros: Vec<ZeroAtom>, modulus: Modulus, domain: Domain) -> Result<Self> {
        for a in &zeros {
            precondition!(a.multiplicity > 0, "zero {:?} has multiplicity 0", a.z());
            let m = modulus(a.z());
            precondition!(m <= 1e-8, "|f| = {m:.3e} at the declared zero {:?}", a.z());
        }
        Ok(HoloFunction {
            kind: HoloKind::Explicit { zeros, modulus },
            domain,
        })
    }

    pub fn on(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn abs(&self, z: Complex64) -> f64 {
        match &self.kind {
            HoloKind::Polynomial { coefficients } => horner(coefficients, z).norm(),
            HoloKind::Blaschke { zeros, truncation } => zeros
                .iter()
                .take(*truncation)
                .map(|a| {
                    if a.norm() == 0.0 {
                        z.norm()
                    } else {
                        (a - z).norm() / (Complex64::new(1.0, 0.0) - a.conj() * z).norm()
                    }
                })
                .product(),
            HoloKind::Explicit { modulus, .. } => modulus(z),
        }
    }

    pub fn ln_abs(&self, z: Complex64) -> ExtReal {
        let m = self.abs(z);
        if m == 0.0 {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(m.ln())
        }
    }

    /// `ln|f|` as a field on the function's domain.
    pub fn ln_abs_field(&self) -> ScalarField {
        let f = self.clone();
        ScalarField::new(self.domain.clone(), move |p| {
            f.ln_abs(Complex64::new(p[0], p[1]))
        })
    }

    /// All zeros in the domain with multiplicities.
    pub fn zeros(&self) -> Result<Vec<ZeroAtom>> {
        let all = match &self.kind {
            HoloKind::Polynomial { coefficients } => polynomial_roots(coefficients)?,
            HoloKind::Blaschke { zeros, truncation } => merge_atoms(
                zeros
                    .iter()
                    .take(*truncation)
                    .map(|z| ZeroAtom::new(*z, 1))
                    .collect(),
                0.0,
            ),
            HoloKind::Explicit { zeros, .. } => merge_atoms(zeros.clone(), 0.0),
        };
        Ok(all
            .into_iter()
            .filter(|a| self.domain.contains(&a.point()))
            .collect())
    }

    pub fn zeros_in(&self, s: &Domain) -> Result<Vec<ZeroAtom>> {
        Ok(self
            .zeros()?
            .into_iter()
            .filter(|a| s.contains(&a.point()))
            .collect())
    }
}

/// `Σ (1 − |z_k|)·m_k`, finite for zero sets of bounded functions on the disk.
pub fn blaschke_sum(zeros: &[ZeroAtom]) -> f64 {
    zeros
        .iter()
        .map(|a| (1.0 - a.z().norm()) * a.multiplicity as f64)
        .sum()
}

pub fn zero_measure(zeros: &[ZeroAtom]) -> Measure {
    let mut m = Measure::zero(2);
    for a in zeros {
        m.push(Component::Atom {
            point: a.point(),
            weight: a.multiplicity as f64,
        });
    }
    m
}

fn compactly_within(s: &Domain, dom: &Domain) -> bool {
    let ball = |d: &Domain| match d {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
            Some((*center, *radius))
        }
        _ => None,
    };
    match (s, dom) {
        (_, Domain::Space { .. }) => true,
        (_, Domain::Ball { center, radius }) => match ball(s) {
            Some((c, r)) => c.dist(center) + r < *radius,
            None => true,
        },
        _ => true,
    }
}

/// `n_{Zero_f}` restricted to `S`, one atom per distinct zero.
pub fn counting_measure(f: &HoloFunction, s: &Domain) -> Result<Measure> {
    precondition!(
        compactly_within(s, &f.domain),
        "S must be compactly contained in the domain of f"
    );
    Ok(zero_measure(&f.zeros_in(s)?))
}

// ---------------------------------------------------------------------------
// Growth majorants.

/// `M = M₊ − M₋` with both parts subharmonic and their Riesz measures.
#[derive(Clone, Debug)]
pub struct GrowthMajorant {
    pub m_plus: ScalarField,
    pub m_minus: ScalarField,
    pub mu_plus: Measure,
    pub mu_minus: Measure,
}

impl GrowthMajorant {
    /// `M ≡ c`, with `μ_M = 0`.
    pub fn constant(c: f64) -> Self {
        GrowthMajorant {
            m_plus: ScalarField::on_space(2, move |_| c),
            m_minus: ScalarField::on_space(2, |_| 0.0),
            mu_plus: Measure::zero(2),
            mu_minus: Measure::zero(2),
        }
    }

    /// `M₊ = pt_{μ₊} + c`, `M₋ = pt_{μ₋}`.
    pub fn from_riesz(mu_plus: Measure, mu_minus: Measure, c: f64) -> Result<Self> {
        precondition!(
            mu_plus.dim() == 2 && mu_minus.dim() == 2,
            "majorants live in the plane"
        );
        let cfg = KernelConfig::new(2)?;
        let m_plus = potential(&mu_plus, cfg)?.field().shift(c);
        let m_minus = potential(&mu_minus, cfg)?.field();
        Ok(GrowthMajorant {
            m_plus,
            m_minus,
            mu_plus,
            mu_minus,
        })
    }

    pub fn value(&self, p: &Point) -> ExtReal {
        self.m_plus.eval(p) - self.m_minus.eval(p)
    }

    /// `μ_M = μ_{M₊} − μ_{M₋}`.
    pub fn riesz(&self) -> Measure {
        self.mu_plus.minus(&self.mu_minus)
    }

    /// Checks `ln|f| ≤ M` at `n` seeded samples of `d`, failing with a witness.
    pub fn verify(&self, f: &HoloFunction, d: &Domain, n: usize, seed: u64) -> Result<()> {
        for p in sample_points(d, n, seed)? {
            let lf = f.ln_abs(Complex64::new(p[0], p[1]));
            let m = self.value(&p);
            let (a, b) = (lf.to_f64(), m.to_f64());
            if a > b + 1e-9 * (1.0 + b.abs()) {
                return Err(Error::Precondition(format!(
                    "|f| > exp M at ({:.6}, {:.6}): ln|f| = {a:.9}, M = {b:.9}",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Poincaré–Lelong.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroWindow {
    pub zero: ZeroAtom,
    pub window_mass: f64,
    pub relative_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareLelongReport {
    pub spacing: f64,
    pub windows: Vec<ZeroWindow>,
    pub total_mass: f64,
    /// Mass outside all windows.
    pub stray_mass: f64,
    pub pass: bool,
}

/// Window masses must match multiplicities to this relative error.
pub const WINDOW_TOL: f64 = 0.05;

/// Half-width in cells of the window about a zero.
const WINDOW_HALF: usize = 2;

fn check_off_lattice(zeros: &[ZeroAtom], grid: &GridDomain) -> Result<()> {
    let h = grid.spacing();
    let o = grid.origin();
    for a in zeros {
        let p = a.point();
        let dist = (0..2)
            .map(|k| {
                let u = (p[k] - o[k]) / h - 0.5;
                (u - u.round()) * h
            })
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if dist < 0.25 * h {
            return Err(Error::Precondition(format!(
                "zero ({:.6}, {:.6}) lies within h/4 of a lattice node; re-grid with another spacing or offset",
                a.re, a.im
            )));
        }
    }
    Ok(())
}

/// Cells of `grid` inside the square `[lo, hi]` (by centre).
fn cells_in(grid: &GridDomain, lo: &Point, hi: &Point) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| {
            let c = grid.center(i);
            (0..2).all(|k| c[k] > lo[k] && c[k] < hi[k])
        })
        .collect()
}

/// The `5 × 5` block of cells about the cell containing `p`, as a square.
fn window_square(grid: &GridDomain, p: &Point) -> Option<(Point, Point)> {
    let i = grid.locate(p)?;
    let c = grid.center(i);
    let half = (WINDOW_HALF as f64 + 0.5) * grid.spacing();
    Some((c - Point::xy(half, half), c + Point::xy(half, half)))
}

/// Recovers `n_{Zero_f}` as `c₂ △ ln|f|` on `grid` and compares the mass in
/// a `5 × 5`-cell window about each zero with its multiplicity.
pub fn poincare_lelong_check(f: &HoloFunction, grid: &GridDomain) -> Result<PoincareLelongReport> {
    precondition!(grid.dim() == 2, "zeros live in the plane");
    let zeros: Vec<ZeroAtom> = f
        .zeros()?
        .into_iter()
        .filter(|a| grid.contains(&a.point()))
        .collect();
    check_off_lattice(&zeros, grid)?;
    let rm = riesz_measure(&f.ln_abs_field(), grid)?;
    let masses = rm.masses();
    let total_mass: f64 = masses.iter().sum();
    let mut windows = Vec::new();
    let mut seen = vec![false; grid.len()];
    for a in zeros {
        let (lo, hi) = window_square(grid, &a.point()).expect("zero inside the grid");
        let cells = cells_in(grid, &lo, &hi);
        let window_mass: f64 = cells.iter().map(|&i| masses[i]).sum();
        for i in cells {
            seen[i] = true;
        }
        let m = a.multiplicity as f64;
        let relative_error = (window_mass - m).abs() / m;
        windows.push(ZeroWindow {
            zero: a,
            window_mass,
            relative_error,
            pass: relative_error <= WINDOW_TOL,
        });
    }
    let stray_mass: f64 = (0..grid.len())
        .filter(|&i| !seen[i])
        .map(|i| masses[i])
        .sum();
    let pass = windows.iter().all(|w| w.pass) && (!windows.is_empty() || total_mass.abs() <= 1e-6);
    Ok(PoincareLelongReport {
        spacing: grid.spacing(),
        windows,
        total_mass,
        stray_mass,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRecord {
    pub zero: ZeroAtom,
    pub coarse_error: f64,
    pub fine_error: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Largest accepted ratio of fine to coarse window error: the error must at
/// least halve, with 20% slack.
pub const HALVING_RATIO: f64 = 0.6;

/// Window errors on `grid` and on its dyadic refinement, both over the
/// physical square of the coarse `5 × 5` window.
pub fn poincare_lelong_refinement(
    f: &HoloFunction,
    grid: &GridDomain,
) -> Result<Vec<RefinementRecord>> {
    precondition!(grid.dim() == 2, "zeros live in the plane");
    let shape = grid.shape();
    let fine = GridDomain::full(
        grid.origin(),
        0.5 * grid.spacing(),
        vec![2 * shape[0], 2 * shape[1]],
    )?;
    let zeros: Vec<ZeroAtom> = f
        .zeros()?
        .into_iter()
        .filter(|a| grid.contains(&a.point()))
        .collect();
    check_off_lattice(&zeros, grid)?;
    check_off_lattice(&zeros, &fine)?;
    let field = f.ln_abs_field();
    let coarse_m = riesz_measure(&field, grid)?;
    let fine_m = riesz_measure(&field, &fine)?;
    let mut out = Vec::new();
    for a in zeros {
        let (lo, hi) = window_square(grid, &a.point()).expect("zero inside the grid");
        let m = a.multiplicity as f64;
        let err = |g: &GridDomain, masses: &[f64]| {
            let w: f64 = cells_in(g, &lo, &hi).iter().map(|&i| masses[i]).sum();
            (w - m).abs() / m
        };
        let coarse_error = err(grid, coarse_m.masses());
        let fine_error = err(&fine, fine_m.masses());
        let ratio = if coarse_error > 0.0 {
            fine_error / coarse_error
        } else {
            0.0
        };
        out.push(RefinementRecord {
            zero: a,
            coarse_error,
            fine_error,
            ratio,
            pass: ratio <= HALVING_RATIO,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Zero-distribution inequalities.

/// Families for the three statements: `[ZI]` on the sphere-mean class (which
/// contains the `[ZII]` class), `[ZII]` on `sbh_{+0}(r, b₋ < b₊)`, `[ZIII]` on
/// positive functions vanishing at `∂D`.
#[derive(Clone, Debug)]
pub struct HolFamilies {
    pub params: ClassParams,
    pub zi: TestFamily,
    pub zii: TestFamily,
    pub ziii: TestFamily,
}

impl HolFamilies {
    pub fn build(params: &ClassParams, count: usize) -> Result<Self> {
        let zii = build_test_family(FamilyClass::SbhPlus0, params, count)?;
        let mut zi = build_test_family(FamilyClass::SbhPlus0Circ, params, count)?;
        zi.members.extend(zii.members.iter().cloned());
        let ziii = build_test_family(FamilyClass::Sbh0Plus, params, count)?;
        Ok(HolFamilies {
            params: params.clone(),
            zi,
            zii,
            ziii,
        })
    }

    pub fn scaled(&self, t: f64) -> Self {
        HolFamilies {
            params: self.params.clone(),
            zi: self.zi.scaled(t),
            zii: self.zii.scaled(t),
            ziii: self.ziii.scaled(t),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HolOptions {
    pub majorant_samples: usize,
    /// Defaults to the full zero set.
    pub subdivisor: Option<Vec<ZeroAtom>>,
    pub affine: AffineOptions,
}

impl Default for HolOptions {
    fn default() -> Self {
        HolOptions {
            majorant_samples: 10_000,
            subdivisor: None,
            affine: AffineOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub name: String,
    pub class: FamilyClass,
    pub verdict: BalayageVerdict,
}

impl VariantReport {
    pub fn constant(&self) -> f64 {
        self.verdict.constant.unwrap_or(f64::NAN)
    }
}

/// `C₂ ≤ C₁ + max{b₊, −b₋}·|μ_M|(S_o^{∪3r} ∖ S_o)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationCheck {
    pub c1: f64,
    pub c2: f64,
    pub layer_mass: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolReport {
    pub zeros: Vec<ZeroAtom>,
    pub variants: Vec<VariantReport>,
    pub implication: ImplicationCheck,
    pub pass: bool,
}

struct Regions {
    d: Domain,
    s_o: Domain,
    outer: Domain,
    layer: Domain,
}

fn regions(p: &ClassParams) -> Result<Regions> {
    let (c, rho) = match &p.s_o {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
            (*center, *radius)
        }
        _ => return Err(Error::Domain("S_o must be a ball".into())),
    };
    let d = Domain::ball(p.green.center, p.green.radius);
    let grown = Domain::closed_ball(c, rho + 3.0 * p.r);
    let outer = Domain::Intersection {
        parts: vec![d.clone(), Domain::complement(grown.clone())],
    };
    let layer = Domain::Intersection {
        parts: vec![grown, Domain::complement(p.s_o.clone())],
    };
    Ok(Regions {
        d,
        s_o: p.s_o.clone(),
        outer,
        layer,
    })
}

/// Right-hand side charge of `[ZI]`: `μ_M` off `S_o^{∪3r}` minus `μ_{M₋}` on the layer.
fn zi_charge(m: &GrowthMajorant, rg: &Regions, seed: u64) -> Result<Measure> {
    let outer = m.riesz().restrict(&rg.outer, seed)?;
    let inner = m.mu_minus.restrict(&rg.layer, seed.wrapping_add(7))?;
    Ok(outer.minus(&inner))
}

fn implication(
    zi: &VariantReport,
    zii: &VariantReport,
    m: &GrowthMajorant,
    p: &ClassParams,
    rg: &Regions,
    opts: &AffineOptions,
) -> Result<ImplicationCheck> {
    let layer_mass = m
        .riesz()
        .restrict(&rg.layer, opts.seed.wrapping_add(11))?
        .total_variation();
    let (c1, c2) = (zi.constant(), zii.constant());
    let bound = c1 + p.b_plus.max(-p.b_minus) * layer_mass;
    let tol = 1e-7 * opts.tol_scale * (1.0 + bound.abs());
    let holds = c1.is_finite() && zi.verdict.pass && c2 <= bound + tol;
    Ok(ImplicationCheck {
        c1,
        c2,
        layer_mass,
        bound,
        holds,
    })
}

/// Runs `[ZI]`, `[ZII]` and `[ZIII]` for `f` under `|f| ≤ exp M`, reporting the
/// empirical constant of each and the `[ZI] ⇒ [ZII]` estimate.
pub fn check_thm_hol(
    f: &HoloFunction,
    majorant: &GrowthMajorant,
    families: &HolFamilies,
    opts: &HolOptions,
) -> Result<HolReport> {
    let p = &families.params;
    let rg = regions(p)?;
    majorant.verify(f, &rg.d, opts.majorant_samples, opts.affine.seed)?;
    let zeros = f.zeros_in(&rg.d)?;
    let theta = zero_measure(&zeros);
    if let Some(sub) = &opts.subdivisor {
        for a in sub {
            let full = zeros
                .iter()
                .find(|b| (b.z() - a.z()).norm() <= 1e-9)
                .map_or(0, |b| b.multiplicity);
            precondition!(
                a.multiplicity <= full,
                "subdivisor exceeds Zero_f at {:?}",
                a.z()
            );
        }
    }
    let sub = opts
        .subdivisor
        .as_ref()
        .map(|s| zero_measure(s))
        .unwrap_or_else(|| theta.clone());
    let seed = opts.affine.seed;
    let run =
        |name: &str, theta: &Measure, mu: &Measure, fam: &TestFamily| -> Result<VariantReport> {
            let verdict = check_affine(theta, mu, fam, &rg.s_o, &rg.d, &opts.affine)?;
            Ok(VariantReport {
                name: name.into(),
                class: fam.class,
                verdict,
            })
        };
    let zi = run("ZI", &theta, &zi_charge(majorant, &rg, seed)?, &families.zi)?;
    let zii = run("ZII", &theta, &majorant.riesz(), &families.zii)?;
    let ziii = run("ZIII", &sub, &majorant.riesz(), &families.ziii)?;
    let implication = implication(&zi, &zii, majorant, p, &rg, &opts.affine)?;
    let pass = zi.verdict.pass && zii.verdict.pass && ziii.verdict.pass && implication.holds;
    Ok(HolReport {
        zeros,
        variants: vec![zi, zii, ziii],
        implication,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Forward chain of the criterion on the disk.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrend {
    pub prefix_lengths: Vec<usize>,
    pub constants: Vec<f64>,
    pub divergent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriumReport {
    /// `[z2]`, `[z3]`, `[z4]`.
    pub stages: Vec<VariantReport>,
    pub implication: ImplicationCheck,
    pub blaschke_sum: f64,
    /// `[z3]` constants along nested prefixes of the indexed zero set.
    pub growth: GrowthTrend,
    pub pass: bool,
}

fn same_zero_sets(a: &[ZeroAtom], b: &[ZeroAtom]) -> bool {
    let total = |s: &[ZeroAtom]| s.iter().map(|x| x.multiplicity).sum::<u32>();
    total(a) == total(b)
        && a.iter().all(|x| {
            let want: u32 = a
                .iter()
                .filter(|y| (y.z() - x.z()).norm() <= 1e-7)
                .map(|y| y.multiplicity)
                .sum();
            let have: u32 = b
                .iter()
                .filter(|y| (y.z() - x.z()).norm() <= 1e-7)
                .map(|y| y.multiplicity)
                .sum();
            want == have
        })
}

fn prefix_lengths(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [8, 4, 2, 1].iter().map(|k| n.div_ceil(*k).max(1)).collect();
    out.dedup();
    out
}

/// Forward implications `[z1] ⇒ [z2] ⇒ [z3] ⇒ [z4]` on the unit disk for an
/// indexed zero set `z` realized by `f` with `|f| ≤ exp M`.
pub fn check_criterium3_forward(
    z: &[ZeroAtom],
    f: &HoloFunction,
    majorant: &GrowthMajorant,
    families: &HolFamilies,
    count: usize,
    opts: &HolOptions,
) -> Result<CriteriumReport> {
    let p = &families.params;
    let g = &p.green;
    precondition!(
        g.center.dim() == 2 && g.center.norm() == 0.0 && (g.radius - 1.0).abs() < 1e-12,
        "the criterion is checked on the unit disk"
    );
    let rg = regions(p)?;
    let found = f.zeros_in(&rg.d)?;
    let inside: Vec<ZeroAtom> = z
        .iter()
        .cloned()
        .filter(|a| rg.d.contains(&a.point()))
        .collect();
    precondition!(
        same_zero_sets(&inside, &found),
        "f does not realize the given zero set"
    );
    majorant.verify(f, &rg.d, opts.majorant_samples, opts.affine.seed)?;
    let z4_family = build_test_family(FamilyClass::Sbh00, p, count.max(1))?;
    let seed = opts.affine.seed;
    let zi_mu = zi_charge(majorant, &rg, seed)?;
    let mu = majorant.riesz();
    let run =
        |name: &str, theta: &Measure, mu: &Measure, fam: &TestFamily| -> Result<VariantReport> {
            let verdict = check_affine(theta, mu, fam, &rg.s_o, &rg.d, &opts.affine)?;
            Ok(VariantReport {
                name: name.into(),
                class: fam.class,
                verdict,
            })
        };
    let theta = zero_measure(&inside);
    let z2 = run("z2", &theta, &zi_mu, &families.zi)?;
    let z3 = run("z3", &theta, &mu, &families.zii)?;
    let z4 = run("z4", &theta, &mu, &z4_family)?;
    let implication = implication(&z2, &z3, majorant, p, &rg, &opts.affine)?;
    let lengths = prefix_lengths(inside.len());
    let mut constants = Vec::with_capacity(lengths.len());
    for &n in &lengths {
        let v = check_affine(
            &zero_measure(&inside[..n]),
            &mu,
            &families.zii,
            &rg.s_o,
            &rg.d,
            &opts.affine,
        )?;
        constants.push(v.constant.unwrap_or(f64::NAN));
    }
    let tol = 1e-6 * opts.affine.tol_scale;
    let divergent = lengths.len() >= 3 && divergence_trend(&constants, tol);
    let growth = GrowthTrend {
        prefix_lengths: lengths,
        constants,
        divergent,
    };
    let pass = z2.verdict.pass
        && z3.verdict.pass
        && z4.verdict.pass
        && implication.holds
        && !growth.divergent;
    Ok(CriteriumReport {
        stages: vec![z2, z3, z4],
        implication,
        blaschke_sum: blaschke_sum(&inside),
        growth,
        pass,
    })
}
