use super::{poisson_density, Component, Measure, Mollifier};
use crate::error::Result;
use crate::geometry::{Domain, Point};
use crate::quadrature::{stratified_ball, stratified_sphere, stream};

const SAMPLES: usize = 1 << 14;

/// Radii at which membership in `dom` can change along rays from `c`, if `dom`
/// is invariant under rotations about `c`.
fn radial_breaks(dom: &Domain, c: &Point) -> Option<Vec<f64>> {
    match dom {
        Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } if center == c => {
            Some(vec![*radius])
        }
        Domain::Annulus {
            center,
            inner,
            outer,
        } if center == c => Some(vec![*inner, *outer]),
        Domain::Space { .. } => Some(vec![]),
        Domain::Complement { of } => radial_breaks(of, c),
        Domain::Union { parts } | Domain::Intersection { parts } => {
            let mut all = Vec::new();
            for p in parts {
                all.extend(radial_breaks(p, c)?);
            }
            Some(all)
        }
        _ => None,
    }
}

fn on_ray(c: &Point, s: f64) -> Point {
    let mut p = *c;
    p[0] += s;
    p
}

/// Maximal sub-intervals of `[lo, hi]` whose radii lie in `dom`.
fn radial_intervals(dom: &Domain, c: &Point, breaks: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .cloned()
        .filter(|&b| lo < b && b < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if dom.contains(&on_ray(c, mid)) {
            match out.last_mut() {
                Some(last) if last.1 == w[0] => last.1 = w[1],
                _ => out.push((w[0], w[1])),
            }
        }
    }
    out
}

pub(super) fn restrict(mu: &Measure, s: &Domain, seed: u64) -> Result<Measure> {
    let d = mu.dim();
    let mut out = Measure::zero(d);
    for (k, comp) in mu.components().iter().enumerate() {
        let mut rng = stream(seed, k as u64);
        match comp {
            Component::Atom { point, .. } => {
                if s.contains(point) {
                    out.push(comp.clone());
                }
            }
            Component::GridDensity { grid, masses } => {
                let kept: Vec<f64> = (0..grid.len())
                    .map(|i| {
                        if s.contains(&grid.center(i)) {
                            masses[i]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                if kept.iter().any(|&m| m != 0.0) {
                    let mask = kept.iter().map(|&m| m != 0.0).collect();
                    out.push(Component::GridDensity {
                        grid: grid.with_mask(mask)?,
                        masses: kept,
                    });
                }
            }
            Component::SphereUniform { center, radius, .. }
            | Component::SpherePoisson { center, radius, .. }
                if radial_breaks(s, center).is_some() =>
            {
                if s.contains(&on_ray(center, *radius)) {
                    out.push(comp.clone());
                }
            }
            Component::BallUniform {
                center,
                radius,
                total,
            } if radial_breaks(s, center).is_some() => {
                let b = radial_breaks(s, center).unwrap();
                push_shells(&mut out, s, center, &b, 0.0, *radius, *total);
            }
            Component::ShellUniform {
                center,
                inner,
                outer,
                total,
            } if radial_breaks(s, center).is_some() => {
                let b = radial_breaks(s, center).unwrap();
                push_shells(&mut out, s, center, &b, *inner, *outer, *total);
            }
            Component::SphereUniform {
                center,
                radius,
                total,
            } => {
                let pts = stratified_sphere(d, SAMPLES, &mut rng)?;
                let w = total / pts.len() as f64;
                push_samples(
                    &mut out,
                    s,
                    pts.into_iter().map(|u| (*center + u * *radius, w)),
                );
            }
            Component::SpherePoisson {
                center,
                radius,
                pole,
                total,
            } => {
                let pts: Vec<Point> = stratified_sphere(d, SAMPLES, &mut rng)?
                    .into_iter()
                    .map(|u| *center + u * *radius)
                    .collect();
                let dens: Vec<f64> = pts
                    .iter()
                    .map(|z| poisson_density(center, *radius, pole, z))
                    .collect();
                let norm: f64 = dens.iter().sum();
                push_samples(
                    &mut out,
                    s,
                    pts.into_iter()
                        .zip(dens)
                        .map(|(z, p)| (z, total * p / norm)),
                );
            }
            Component::BallUniform {
                center,
                radius,
                total,
            } => {
                let pts = stratified_ball(d, SAMPLES, &mut rng)?;
                let w = total / pts.len() as f64;
                push_samples(
                    &mut out,
                    s,
                    pts.into_iter().map(|u| (*center + u * *radius, w)),
                );
            }
            Component::ShellUniform {
                center,
                inner,
                outer,
                total,
            } => {
                let pts: Vec<Point> = stratified_ball(d, SAMPLES, &mut rng)?
                    .into_iter()
                    .map(|u| {
                        // Map the ball radius law onto the shell by inverting s^d.
                        let t = u.norm();
                        let rad = (inner.powi(d as i32)
                            + t.powi(d as i32) * (outer.powi(d as i32) - inner.powi(d as i32)))
                        .powf(1.0 / d as f64);
                        if t > 0.0 {
                            *center + u * (rad / t)
                        } else {
                            on_ray(center, *inner)
                        }
                    })
                    .collect();
                let w = total / pts.len() as f64;
                push_samples(&mut out, s, pts.into_iter().map(|p| (p, w)));
            }
            Component::Mollifier {
                center,
                radius,
                total,
            } => {
                let m = Mollifier { radius: *radius };
                let pts: Vec<Point> = stratified_ball(d, SAMPLES, &mut rng)?
                    .into_iter()
                    .map(|u| *center + u * *radius)
                    .collect();
                let dens: Vec<f64> = pts.iter().map(|p| m.density(&(*p - *center))).collect();
                let norm: f64 = dens.iter().sum();
                push_samples(
                    &mut out,
                    s,
                    pts.into_iter()
                        .zip(dens)
                        .map(|(p, w)| (p, total * w / norm)),
                );
            }
        }
    }
    Ok(out)
}

fn push_shells(
    out: &mut Measure,
    s: &Domain,
    c: &Point,
    breaks: &[f64],
    lo: f64,
    hi: f64,
    total: f64,
) {
    let d = c.dim() as i32;
    let vol = hi.powi(d) - lo.powi(d);
    for (a, b) in radial_intervals(s, c, breaks, lo, hi) {
        let t = total * (b.powi(d) - a.powi(d)) / vol;
        if a == 0.0 {
            out.push(Component::BallUniform {
                center: *c,
                radius: b,
                total: t,
            });
        } else {
            out.push(Component::ShellUniform {
                center: *c,
                inner: a,
                outer: b,
                total: t,
            });
        }
    }
}

fn push_samples(out: &mut Measure, s: &Domain, samples: impl Iterator<Item = (Point, f64)>) {
    for (p, w) in samples {
        if s.contains(&p) {
            out.push(Component::Atom {
                point: p,
                weight: w,
            });
        }
    }
}
