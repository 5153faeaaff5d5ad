use crate::extreal::ExtReal;
use crate::geometry::{Domain, GridDomain, Point};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

type Eval = dyn Fn(&Point) -> ExtReal + Send + Sync;

/// How a field was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    /// Evaluated from a formula at any point.
    AnalyticForm,
    /// Interpolated from lattice samples.
    Grid,
}

/// A function `domain → ℝ ∪ {−∞}` given by an evaluator closure.
#[derive(Clone)]
pub struct ScalarField {
    domain: Domain,
    smoothness: Smoothness,
    eval: Arc<Eval>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("domain", &self.domain)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl ScalarField {
    pub fn new(domain: Domain, f: impl Fn(&Point) -> ExtReal + Send + Sync + 'static) -> Self {
        ScalarField {
            domain,
            smoothness: Smoothness::AnalyticForm,
            eval: Arc::new(f),
        }
    }

    /// A finite-valued field from an `f64` closure; non-finite results map to tagged values.
    pub fn real(domain: Domain, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::new(domain, move |x| ExtReal::from_f64(f(x)))
    }

    pub fn constant(domain: Domain, c: f64) -> Self {
        ScalarField::new(domain, move |_| ExtReal::Finite(c))
    }

    /// Field on all of `ℝ^d`.
    pub fn on_space(d: usize, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::real(Domain::Space { dim: d }, f)
    }

    /// Piecewise-multilinear interpolant of cell-centre samples.
    pub fn from_grid(grid: GridDomain, values: Vec<ExtReal>) -> Self {
        assert_eq!(grid.len(), values.len());
        let domain = Domain::Grid { grid: grid.clone() };
        let mut f = ScalarField::new(domain, move |x| interpolate(&grid, &values, x));
        f.smoothness = Smoothness::Grid;
        f
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn eval(&self, x: &Point) -> ExtReal {
        (self.eval)(x)
    }

    /// Same evaluator on another domain.
    pub fn with_domain(&self, domain: Domain) -> ScalarField {
        ScalarField {
            domain,
            smoothness: self.smoothness,
            eval: self.eval.clone(),
        }
    }

    pub fn map(&self, g: impl Fn(ExtReal) -> ExtReal + Send + Sync + 'static) -> ScalarField {
        let f = self.eval.clone();
        ScalarField {
            domain: self.domain.clone(),
            smoothness: self.smoothness,
            eval: Arc::new(move |x| g(f(x))),
        }
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        self.map(move |v| v * a)
    }

    pub fn shift(&self, c: f64) -> ScalarField {
        self.map(move |v| v + c)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        ScalarField::new(self.domain.clone(), move |x| f(x) + g(x))
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        ScalarField::new(self.domain.clone(), move |x| f(x) - g(x))
    }

    pub fn max(&self, other: &ScalarField) -> ScalarField {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        ScalarField::new(self.domain.clone(), move |x| f(x).max(g(x)))
    }

    pub fn min(&self, other: &ScalarField) -> ScalarField {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        ScalarField::new(self.domain.clone(), move |x| f(x).min(g(x)))
    }

    /// Samples the field at the cell centres of `grid`.
    pub fn sample(&self, grid: &GridDomain) -> Vec<ExtReal> {
        (0..grid.len())
            .map(|i| self.eval(&grid.center(i)))
            .collect()
    }
}

fn interpolate(grid: &GridDomain, values: &[ExtReal], x: &Point) -> ExtReal {
    let d = grid.dim();
    let h = grid.spacing();
    let mut base = Vec::with_capacity(d);
    let mut frac = Vec::with_capacity(d);
    for k in 0..d {
        let t = (x[k] - grid.origin()[k]) / h - 0.5;
        let n = grid.shape()[k];
        let t = t.clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n.saturating_sub(2));
        base.push(i);
        frac.push(if n > 1 { t - i as f64 } else { 0.0 });
    }
    let mut acc = Vec::with_capacity(1 << d);
    for corner in 0..(1usize << d) {
        let mut idx = Vec::with_capacity(d);
        let mut w = 1.0;
        for k in 0..d {
            let up = (corner >> k) & 1 == 1;
            let n = grid.shape()[k];
            idx.push(if up {
                (base[k] + 1).min(n - 1)
            } else {
                base[k]
            });
            w *= if up { frac[k] } else { 1.0 - frac[k] };
        }
        if w > 0.0 {
            acc.push(values[grid.linear_index(&idx)] * w);
        }
    }
    crate::extreal::ext_sum(acc)
}
