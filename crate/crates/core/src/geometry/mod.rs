//! Points, model domains, parallel sets, inversion and the inward-filled hull.

mod domain;
mod grid;
mod point;

pub use domain::Domain;
pub use grid::GridDomain;
pub use point::{ExtPoint, Point, MAX_DIM};

use crate::error::{precondition, Error, Result};
use crate::extreal::ExtReal;
use crate::fields::ScalarField;
use std::collections::VecDeque;

/// Inversion in the unit sphere about `o`: `x ↦ o + (x−o)/|x−o|²`, with `o ↦ ∞`.
pub fn inversion(x: &Point, o: &Point) -> ExtPoint {
    let v = *x - *o;
    let r2 = v.norm_sq();
    if r2 == 0.0 {
        ExtPoint::Infinity
    } else {
        ExtPoint::Finite(*o + v * (1.0 / r2))
    }
}

/// Preimage of `dom` under inversion about `o`, with `o` itself removed.
///
/// Since inversion is an involution this is also the image. Spheres through `o`
/// would become hyperplanes and are rejected.
pub fn invert_domain(dom: &Domain, o: &Point) -> Result<Domain> {
    Ok(Domain::punctured(preimage(dom, o)?, &[*o]))
}

fn sphere_image(c: &Point, r: f64, o: &Point) -> Result<(Point, f64, bool)> {
    let s2 = (*c - *o).norm_sq();
    let den = s2 - r * r;
    if den.abs() <= 1e-14 * (s2 + r * r) {
        return Err(Error::Domain(
            "sphere passes through the inversion centre".into(),
        ));
    }
    Ok((*o + (*c - *o) * (1.0 / den), r / den.abs(), den > 0.0))
}

fn preimage(dom: &Domain, o: &Point) -> Result<Domain> {
    Ok(match dom {
        Domain::Ball { center, radius } => {
            let (c, r, outside) = sphere_image(center, *radius, o)?;
            if outside {
                Domain::Ball {
                    center: c,
                    radius: r,
                }
            } else {
                Domain::complement(Domain::ClosedBall {
                    center: c,
                    radius: r,
                })
            }
        }
        Domain::ClosedBall { center, radius } => {
            let (c, r, outside) = sphere_image(center, *radius, o)?;
            if outside {
                Domain::ClosedBall {
                    center: c,
                    radius: r,
                }
            } else {
                Domain::complement(Domain::Ball {
                    center: c,
                    radius: r,
                })
            }
        }
        Domain::Annulus {
            center,
            inner,
            outer,
        } => preimage(
            &Domain::Intersection {
                parts: vec![
                    Domain::Ball {
                        center: *center,
                        radius: *outer,
                    },
                    Domain::complement(Domain::ClosedBall {
                        center: *center,
                        radius: *inner,
                    }),
                ],
            },
            o,
        )?,
        Domain::Space { dim } => Domain::Space { dim: *dim },
        Domain::Complement { of } => Domain::complement(preimage(of, o)?),
        Domain::Union { parts } => Domain::Union {
            parts: parts
                .iter()
                .map(|p| preimage(p, o))
                .collect::<Result<_>>()?,
        },
        Domain::Intersection { parts } => Domain::Intersection {
            parts: parts
                .iter()
                .map(|p| preimage(p, o))
                .collect::<Result<_>>()?,
        },
        Domain::Grid { .. } => {
            return Err(Error::Domain(
                "inversion of grid domains is not supported".into(),
            ))
        }
    })
}

/// Kelvin transform `v(y) = |y−o|^{2−d} · u(o + (y−o)/|y−o|²)`.
pub fn kelvin_transform(u: &ScalarField, o: &Point, d: usize) -> Result<ScalarField> {
    precondition!(d >= 2, "Kelvin transform needs d >= 2, got {d}");
    precondition!(
        u.dim() == d,
        "field dimension {} differs from d = {d}",
        u.dim()
    );
    precondition!(
        !u.domain().contains(o),
        "the inversion centre must lie outside the domain of u"
    );
    let domain = invert_domain(u.domain(), o)?;
    let (u, o) = (u.clone(), *o);
    Ok(ScalarField::new(domain, move |y| match inversion(y, &o) {
        ExtPoint::Infinity => ExtReal::Indeterminate,
        ExtPoint::Finite(ys) => u.eval(&ys) * y.dist(&o).powi(2 - d as i32),
    }))
}

/// The outer parallel set `S^{∪r} = ⋃_{x∈S} B(x, r)` together with its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelSet {
    pub base: Domain,
    pub r: f64,
    pub result: Domain,
}

impl ParallelSet {
    pub fn new(base: Domain, r: f64) -> Result<Self> {
        let result = parallel_set(&base, r)?;
        Ok(ParallelSet { base, r, result })
    }
}

/// `S^{∪r}`: radial dilation for balls and annuli, Euclidean dilation for grids.
pub fn parallel_set(base: &Domain, r: f64) -> Result<Domain> {
    precondition!(
        r > 0.0 && r.is_finite(),
        "parallel-set radius must be positive, got {r}"
    );
    Ok(match base {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => Domain::Ball {
            center: *center,
            radius: radius + r,
        },
        Domain::Annulus {
            center,
            inner,
            outer,
        } => {
            if *inner > r {
                Domain::Annulus {
                    center: *center,
                    inner: inner - r,
                    outer: outer + r,
                }
            } else if *inner == r {
                Domain::punctured(
                    Domain::Ball {
                        center: *center,
                        radius: outer + r,
                    },
                    &[*center],
                )
            } else {
                Domain::Ball {
                    center: *center,
                    radius: outer + r,
                }
            }
        }
        Domain::Grid { grid } => Domain::Grid {
            grid: dilate(grid, r),
        },
        Domain::Space { dim } => Domain::Space { dim: *dim },
        Domain::Union { parts } => Domain::Union {
            parts: parts
                .iter()
                .map(|p| parallel_set(p, r))
                .collect::<Result<_>>()?,
        },
        Domain::Complement { of } => match of.as_ref() {
            Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
                if *radius > r {
                    Domain::complement(Domain::ClosedBall {
                        center: *center,
                        radius: radius - r,
                    })
                } else {
                    Domain::Space { dim: center.dim() }
                }
            }
            _ => {
                return Err(Error::Domain(
                    "parallel set of this complement is not supported".into(),
                ))
            }
        },
        Domain::Intersection { .. } => {
            return Err(Error::Domain(
                "parallel set of an intersection is not supported".into(),
            ))
        }
    })
}

/// Cells whose centre lies within distance `r` of a masked cell centre, on a
/// lattice padded so the dilation fits.
fn dilate(grid: &GridDomain, r: f64) -> GridDomain {
    let h = grid.spacing();
    let reach = (r / h * (1.0 + 1e-12)).floor() as usize;
    let padded = grid.padded(reach);
    let d = padded.dim();
    let thresh = (r / h) * (r / h) * (1.0 + 1e-12);
    let mut offsets: Vec<Vec<isize>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for o in &offsets {
            for k in -(reach as isize)..=(reach as isize) {
                let mut v = o.clone();
                v.push(k);
                next.push(v);
            }
        }
        offsets = next;
    }
    offsets.retain(|o| (o.iter().map(|&k| (k * k) as f64).sum::<f64>()) <= thresh);
    let mut mask = vec![false; padded.len()];
    let shape = padded.shape().to_vec();
    for i in 0..padded.len() {
        if !padded.is_masked(i) {
            continue;
        }
        let idx = padded.multi_index(i);
        'off: for o in &offsets {
            let mut j = Vec::with_capacity(d);
            for k in 0..d {
                let v = idx[k] as isize + o[k];
                if v < 0 || v >= shape[k] as isize {
                    continue 'off;
                }
                j.push(v as usize);
            }
            mask[padded.linear_index(&j)] = true;
        }
    }
    padded.with_mask(mask).expect("dilation preserves lattice")
}

/// The inward-filled hull of `k` in `o`: `k` plus every component of `o ∖ k`
/// that does not reach the boundary cells of `o` (face connectivity).
///
/// The lattice frame counts as boundary, so truncated windows treat the frame
/// as touching the point at infinity.
pub fn inward_filled_hull(k: &GridDomain, o: &GridDomain) -> Result<GridDomain> {
    if !k.same_lattice(o) {
        return Err(Error::Mismatch(
            "hull requires K and O on the same lattice".into(),
        ));
    }
    for i in 0..k.len() {
        precondition!(
            !k.is_masked(i) || o.is_masked(i),
            "K is not contained in O (cell {i})"
        );
    }
    let boundary = o.boundary_cells();
    for &b in &boundary {
        precondition!(
            !k.is_masked(b),
            "K touches the boundary of O (cell {b}); K must be compact in O"
        );
    }
    let free = |i: usize| o.is_masked(i) && !k.is_masked(i);
    let mut reached = vec![false; o.len()];
    let mut queue = VecDeque::new();
    for &b in &boundary {
        if free(b) && !reached[b] {
            reached[b] = true;
            queue.push_back(b);
        }
    }
    while let Some(i) = queue.pop_front() {
        for j in o.face_neighbors(i).into_iter().flatten() {
            if free(j) && !reached[j] {
                reached[j] = true;
                queue.push_back(j);
            }
        }
    }
    let mask = (0..o.len())
        .map(|i| o.is_masked(i) && !reached[i])
        .collect();
    o.with_mask(mask)
}

/// Connected components (face connectivity) of the masked cells.
pub fn components(grid: &GridDomain) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; grid.len()];
    let mut out = Vec::new();
    for s in 0..grid.len() {
        if !grid.is_masked(s) || label[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = vec![s];
        label[s] = id;
        let mut head = 0;
        while head < comp.len() {
            let i = comp[head];
            head += 1;
            for j in grid.face_neighbors(i).into_iter().flatten() {
                if grid.is_masked(j) && label[j] == usize::MAX {
                    label[j] = id;
                    comp.push(j);
                }
            }
        }
        out.push(comp);
    }
    out
}
