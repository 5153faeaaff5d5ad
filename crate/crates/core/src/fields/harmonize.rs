use super::ScalarField;
use crate::error::{precondition, Error, Result};
use crate::extreal::ExtReal;
use crate::geometry::{Domain, GridDomain, Point};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// The open set on which a field is replaced by its harmonic extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    /// The masked cells of a lattice; unmasked neighbours carry the boundary data.
    Grid { grid: GridDomain },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonizeOptions {
    /// Fourier modes for planar annuli.
    pub modes: usize,
    /// Lattice spacing used to discretize non-planar annuli.
    pub spacing: f64,
    /// Target for the scaled residual `max |△_h u| h² / (2d)`.
    pub residual: f64,
    pub max_sweeps: usize,
}

impl Default for HarmonizeOptions {
    fn default() -> Self {
        HarmonizeOptions {
            modes: 256,
            spacing: 0.02,
            residual: 1e-10,
            max_sweeps: 1_000_000,
        }
    }
}

/// A field made harmonic in a layer.
#[derive(Clone, Debug)]
pub struct Harmonized {
    pub field: ScalarField,
    pub sweeps: usize,
    pub residual: f64,
    /// Extremes of the boundary data.
    pub boundary_min: f64,
    pub boundary_max: f64,
}

/// Replaces `v` in `layer` by the solution of the Dirichlet problem with
/// boundary values `v`; `v` is kept off the layer.
pub fn harmonize_layer(
    v: &ScalarField,
    layer: &Layer,
    opts: &HarmonizeOptions,
) -> Result<Harmonized> {
    match layer {
        Layer::Annulus {
            center,
            inner,
            outer,
        } => {
            precondition!(
                0.0 < *inner && inner < outer,
                "annulus radii must satisfy 0 < inner < outer"
            );
            if center.dim() == 2 {
                fourier_annulus(v, *center, *inner, *outer, opts)
            } else {
                let pad = 2.0 * opts.spacing;
                let n = (2.0 * (outer + pad) / opts.spacing).ceil() as usize;
                let half = 0.5 * n as f64 * opts.spacing;
                let origin = *center - Point::new(&vec![half; center.dim()]);
                let dom = Domain::annulus(*center, *inner, *outer);
                let grid =
                    GridDomain::from_predicate(origin, opts.spacing, vec![n; center.dim()], |p| {
                        dom.contains(p)
                    })?;
                grid_layer(v, &grid, Some(dom), opts)
            }
        }
        Layer::Grid { grid } => grid_layer(v, grid, None, opts),
    }
}

fn finite_on(v: &ScalarField, x: &Point) -> Result<f64> {
    v.eval(x)
        .finite()
        .ok_or_else(|| Error::Domain(format!("boundary data is not finite at {x:?}")))
}

fn fourier_annulus(
    v: &ScalarField,
    c: Point,
    ri: f64,
    ro: f64,
    opts: &HarmonizeOptions,
) -> Result<Harmonized> {
    let n = opts.modes;
    precondition!(
        n >= 8 && n.is_multiple_of(2),
        "mode count must be even and at least 8"
    );
    let sample = |r: f64| -> Result<Vec<Complex64>> {
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                finite_on(v, &(c + Point::xy(r * t.cos(), r * t.sin())))
                    .map(|x| Complex64::new(x, 0.0))
            })
            .collect()
    };
    let mut fi = sample(ri)?;
    let mut fo = sample(ro)?;
    let bmin = fi
        .iter()
        .chain(&fo)
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    let bmax = fi
        .iter()
        .chain(&fo)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut fi);
    fft.process(&mut fo);
    let scale = 1.0 / n as f64;
    let fi: Vec<Complex64> = fi.into_iter().map(|z| z * scale).collect();
    let fo: Vec<Complex64> = fo.into_iter().map(|z| z * scale).collect();
    let rho = ri / ro;
    let coeffs = Arc::new((fi, fo));
    let dom = Domain::annulus(c, ri, ro);
    let inner_v = v.clone();
    let layer_dom = dom.clone();
    let field = ScalarField::new(v.domain().clone(), move |x| {
        if !layer_dom.contains(x) {
            return inner_v.eval(x);
        }
        let (fi, fo) = (&coeffs.0, &coeffs.1);
        let y = *x - c;
        let r = y.norm();
        let t = y[1].atan2(y[0]);
        // Mode 0: a + b ln r.
        let w = (r / ri).ln() / (ro / ri).ln();
        let mut acc = fi[0].re * (1.0 - w) + fo[0].re * w;
        let (a, b, p) = (r / ro, ri / r, rho);
        let (mut am, mut bm, mut pm) = (1.0, 1.0, 1.0);
        for m in 1..=n / 2 {
            am *= a;
            bm *= b;
            pm *= p;
            let den = 1.0 - pm * pm;
            let phi_o = (am - pm * bm) / den;
            let phi_i = (bm - pm * am) / den;
            let e = Complex64::from_polar(1.0, m as f64 * t);
            let pos = fi[m] * phi_i + fo[m] * phi_o;
            if m == n / 2 {
                acc += (pos * e).re;
            } else {
                let neg = fi[n - m] * phi_i + fo[n - m] * phi_o;
                acc += (pos * e).re + (neg * e.conj()).re;
            }
            if am < 1e-18 && bm < 1e-18 {
                break;
            }
        }
        ExtReal::Finite(acc)
    });
    Ok(Harmonized {
        field,
        sweeps: 0,
        residual: 0.0,
        boundary_min: bmin,
        boundary_max: bmax,
    })
}

fn grid_layer(
    v: &ScalarField,
    grid: &GridDomain,
    region: Option<Domain>,
    opts: &HarmonizeOptions,
) -> Result<Harmonized> {
    let d = grid.dim();
    let len = grid.len();
    let mut u = vec![0.0; len];
    let mut unknown = Vec::new();
    let mut nbrs: Vec<Vec<usize>> = Vec::new();
    let mut bmin = f64::INFINITY;
    let mut bmax = f64::NEG_INFINITY;
    let mut fixed = vec![false; len];
    for i in 0..len {
        if !grid.is_masked(i) {
            continue;
        }
        let mut list = Vec::with_capacity(2 * d);
        for nb in grid.face_neighbors(i) {
            let j = nb.ok_or_else(|| Error::Domain("layer touches the lattice frame".into()))?;
            if !grid.is_masked(j) && !fixed[j] {
                let x = finite_on(v, &grid.center(j))?;
                u[j] = x;
                fixed[j] = true;
                bmin = bmin.min(x);
                bmax = bmax.max(x);
            }
            list.push(j);
        }
        unknown.push(i);
        nbrs.push(list);
    }
    precondition!(!unknown.is_empty(), "empty layer");
    let start = 0.5 * (bmin + bmax);
    for &i in &unknown {
        u[i] = start;
    }
    let colour = |i: usize| grid.multi_index(i).iter().sum::<usize>() % 2;
    let colours: Vec<usize> = unknown.iter().map(|&i| colour(i)).collect();
    let nmax = *grid.shape().iter().max().unwrap() as f64;
    let omega = 2.0 / (1.0 + (PI / nmax).sin());
    let target = opts.residual * (1.0 + bmin.abs().max(bmax.abs()));
    let inv = 1.0 / (2 * d) as f64;
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        for c in 0..2 {
            for (k, &i) in unknown.iter().enumerate() {
                if colours[k] != c {
                    continue;
                }
                let avg: f64 = nbrs[k].iter().map(|&j| u[j]).sum::<f64>() * inv;
                u[i] += omega * (avg - u[i]);
            }
        }
        if sweeps % 16 == 0 || sweeps == opts.max_sweeps {
            residual = unknown
                .iter()
                .zip(&nbrs)
                .map(|(&i, nb)| (nb.iter().map(|&j| u[j]).sum::<f64>() * inv - u[i]).abs())
                .fold(0.0, f64::max);
            if residual <= target {
                break;
            }
        }
    }
    if residual > target {
        return Err(Error::Numeric(format!(
            "Laplace solver stalled at residual {residual:.3e} after {sweeps} sweeps"
        )));
    }
    // Cells away from the layer keep v at their centres for interpolation.
    let values: Vec<ExtReal> = (0..len)
        .map(|i| {
            if grid.is_masked(i) || fixed[i] {
                ExtReal::Finite(u[i])
            } else {
                v.eval(&grid.center(i))
            }
        })
        .collect();
    let interp = ScalarField::from_grid(grid.clone(), values);
    let g = grid.clone();
    let outside = v.clone();
    let field = ScalarField::new(v.domain().clone(), move |x| {
        let inside = match &region {
            Some(dom) => dom.contains(x),
            None => g.contains(x),
        };
        if inside {
            interp.eval(x)
        } else {
            outside.eval(x)
        }
    });
    Ok(Harmonized {
        field,
        sweeps,
        residual,
        boundary_min: bmin,
        boundary_max: bmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_data_is_reproduced_on_annulus() {
        let v = ScalarField::on_space(2, |p| p[0] * p[0] - p[1] * p[1] + 0.5 * p.norm().ln());
        let layer = Layer::Annulus {
            center: Point::xy(0.0, 0.0),
            inner: 0.5,
            outer: 1.5,
        };
        let h = harmonize_layer(&v, &layer, &HarmonizeOptions::default()).unwrap();
        for x in [
            Point::xy(0.7, 0.2),
            Point::xy(-1.0, 0.9),
            Point::xy(0.0, -1.3),
        ] {
            assert!((h.field.eval(&x).to_f64() - v.eval(&x).to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_survive_grid_solve() {
        let g = GridDomain::from_predicate(Point::xy(-1.0, -1.0), 0.05, vec![40, 40], |p| {
            let s = p.norm();
            s > 0.3 && s < 0.8
        })
        .unwrap();
        let v = ScalarField::on_space(2, |_| 2.5);
        let h =
            harmonize_layer(&v, &Layer::Grid { grid: g }, &HarmonizeOptions::default()).unwrap();
        assert!((h.field.eval(&Point::xy(0.5, 0.1)).to_f64() - 2.5).abs() < 1e-9);
    }
}
