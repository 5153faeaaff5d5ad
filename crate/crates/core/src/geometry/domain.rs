use super::{GridDomain, Point};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Model sets of `ℝ^d`.
///
/// `Ball` and `Annulus` are open; `ClosedBall` with radius 0 is a single point,
/// which makes `Complement{ClosedBall}` a punctured space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Ball {
        center: Point,
        radius: f64,
    },
    ClosedBall {
        center: Point,
        radius: f64,
    },
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    Grid {
        grid: GridDomain,
    },
    Space {
        dim: usize,
    },
    Complement {
        of: Box<Domain>,
    },
    Union {
        parts: Vec<Domain>,
    },
    Intersection {
        parts: Vec<Domain>,
    },
}

impl Domain {
    pub fn ball(center: Point, radius: f64) -> Domain {
        assert!(radius > 0.0, "ball radius must be positive");
        Domain::Ball { center, radius }
    }

    pub fn closed_ball(center: Point, radius: f64) -> Domain {
        assert!(radius >= 0.0, "closed ball radius must be nonnegative");
        Domain::ClosedBall { center, radius }
    }

    pub fn annulus(center: Point, inner: f64, outer: f64) -> Domain {
        assert!(
            0.0 < inner && inner < outer,
            "annulus radii must satisfy 0 < inner < outer"
        );
        Domain::Annulus {
            center,
            inner,
            outer,
        }
    }

    pub fn grid(grid: GridDomain) -> Domain {
        Domain::Grid { grid }
    }

    pub fn complement(of: Domain) -> Domain {
        Domain::Complement { of: Box::new(of) }
    }

    /// `base` with the points `holes` removed.
    pub fn punctured(base: Domain, holes: &[Point]) -> Domain {
        let mut parts = vec![base];
        parts.extend(
            holes
                .iter()
                .map(|p| Domain::complement(Domain::closed_ball(*p, 0.0))),
        );
        Domain::Intersection { parts }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Ball { radius, .. } if !(*radius > 0.0) => {
                Err(Error::Domain("ball radius must be positive".into()))
            }
            Domain::ClosedBall { radius, .. } if !(*radius >= 0.0) => Err(Error::Domain(
                "closed ball radius must be nonnegative".into(),
            )),
            Domain::Annulus { inner, outer, .. } if !(0.0 < *inner && inner < outer) => Err(
                Error::Domain("annulus radii must satisfy 0 < inner < outer".into()),
            ),
            Domain::Grid { grid } if grid.masked_count() == 0 => {
                Err(Error::Domain("grid mask is empty".into()))
            }
            Domain::Complement { of } => of.validate(),
            Domain::Union { parts } | Domain::Intersection { parts } => {
                if parts.is_empty() {
                    return Err(Error::Domain("empty union/intersection".into()));
                }
                let d = parts[0].dim();
                for p in parts {
                    p.validate()?;
                    if p.dim() != d {
                        return Err(Error::Mismatch(
                            "mixed dimensions in compound domain".into(),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. }
            | Domain::ClosedBall { center, .. }
            | Domain::Annulus { center, .. } => center.dim(),
            Domain::Grid { grid } => grid.dim(),
            Domain::Space { dim } => *dim,
            Domain::Complement { of } => of.dim(),
            Domain::Union { parts } | Domain::Intersection { parts } => parts[0].dim(),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Domain::Ball { center, radius } => x.dist(center) < *radius,
            Domain::ClosedBall { center, radius } => x.dist(center) <= *radius,
            Domain::Annulus {
                center,
                inner,
                outer,
            } => {
                let s = x.dist(center);
                *inner < s && s < *outer
            }
            Domain::Grid { grid } => grid.contains(x),
            Domain::Space { .. } => true,
            Domain::Complement { of } => !of.contains(x),
            Domain::Union { parts } => parts.iter().any(|p| p.contains(x)),
            Domain::Intersection { parts } => parts.iter().all(|p| p.contains(x)),
        }
    }

    /// A lower bound for `dist(x, ∂self)` when `x ∈ self` (exact for balls, annuli
    /// and their complements/intersections); 0 when `x ∉ self`.
    pub fn boundary_distance(&self, x: &Point) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match self {
            Domain::Ball { center, radius } => radius - x.dist(center),
            Domain::ClosedBall { center, radius } => (radius - x.dist(center)).max(0.0),
            Domain::Annulus {
                center,
                inner,
                outer,
            } => {
                let s = x.dist(center);
                (s - inner).min(outer - s)
            }
            Domain::Grid { grid } => grid.boundary_distance(x),
            Domain::Space { .. } => f64::INFINITY,
            Domain::Complement { of } => of.exterior_distance(x),
            Domain::Union { parts } => parts
                .iter()
                .filter(|p| p.contains(x))
                .map(|p| p.boundary_distance(x))
                .fold(0.0, f64::max),
            Domain::Intersection { parts } => parts
                .iter()
                .map(|p| p.boundary_distance(x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// A lower bound for `dist(x, self)` when `x ∉ self`; 0 otherwise.
    pub fn exterior_distance(&self, x: &Point) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        match self {
            Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
                (x.dist(center) - radius).max(0.0)
            }
            Domain::Annulus {
                center,
                inner,
                outer,
            } => {
                let s = x.dist(center);
                if s <= *inner {
                    inner - s
                } else {
                    s - outer
                }
            }
            Domain::Grid { grid } => (0..grid.len())
                .filter(|&i| grid.is_masked(i))
                .map(|i| grid.center(i).dist(x) - 0.5 * grid.spacing() * (grid.dim() as f64).sqrt())
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
            Domain::Space { .. } => 0.0,
            Domain::Complement { of } => of.boundary_distance(x),
            Domain::Union { parts } => parts
                .iter()
                .map(|p| p.exterior_distance(x))
                .fold(f64::INFINITY, f64::min),
            // Any part not containing x gives a valid lower bound.
            Domain::Intersection { parts } => parts
                .iter()
                .map(|p| p.exterior_distance(x))
                .fold(0.0, f64::max),
        }
    }

    /// Axis-aligned bounding box, `None` for unbounded sets.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            Domain::Ball { center, radius } | Domain::ClosedBall { center, radius } => {
                let r = Point::new(&vec![*radius; center.dim()]);
                Some((*center - r, *center + r))
            }
            Domain::Annulus { center, outer, .. } => {
                let r = Point::new(&vec![*outer; center.dim()]);
                Some((*center - r, *center + r))
            }
            Domain::Grid { grid } => {
                let mut hi = grid.origin();
                for k in 0..grid.dim() {
                    hi[k] += grid.shape()[k] as f64 * grid.spacing();
                }
                Some((grid.origin(), hi))
            }
            Domain::Space { .. } | Domain::Complement { .. } => None,
            Domain::Union { parts } => {
                let boxes: Option<Vec<_>> = parts.iter().map(|p| p.bounding_box()).collect();
                let boxes = boxes?;
                let (mut lo, mut hi) = boxes[0];
                for (l, h) in &boxes[1..] {
                    for k in 0..lo.dim() {
                        lo[k] = lo[k].min(l[k]);
                        hi[k] = hi[k].max(h[k]);
                    }
                }
                Some((lo, hi))
            }
            Domain::Intersection { parts } => {
                let boxes: Vec<_> = parts.iter().filter_map(|p| p.bounding_box()).collect();
                let (mut lo, mut hi) = *boxes.first()?;
                for (l, h) in &boxes[1..] {
                    for k in 0..lo.dim() {
                        lo[k] = lo[k].max(l[k]);
                        hi[k] = hi[k].min(h[k]);
                    }
                }
                Some((lo, hi))
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bounding_box().is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctured_ball_excludes_the_puncture() {
        let d = Domain::punctured(
            Domain::ball(Point::xy(0.0, 0.0), 1.0),
            &[Point::xy(0.0, 0.0)],
        );
        assert!(!d.contains(&Point::xy(0.0, 0.0)));
        assert!(d.contains(&Point::xy(0.1, 0.0)));
        assert!((d.boundary_distance(&Point::xy(0.1, 0.0)) - 0.1).abs() < 1e-15);
        assert!((d.boundary_distance(&Point::xy(0.8, 0.0)) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn annulus_distances() {
        let a = Domain::annulus(Point::xy(0.0, 0.0), 1.0, 3.0);
        assert!((a.boundary_distance(&Point::xy(1.5, 0.0)) - 0.5).abs() < 1e-15);
        assert!((a.exterior_distance(&Point::xy(0.25, 0.0)) - 0.75).abs() < 1e-15);
        assert!((a.exterior_distance(&Point::xy(4.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let d = Domain::Union {
            parts: vec![
                Domain::annulus(Point::xy(0.0, 0.0), 1.0, 2.0),
                Domain::complement(Domain::closed_ball(Point::xy(5.0, 0.0), 0.5)),
            ],
        };
        let s = serde_json::to_string(&d).unwrap();
        let back: Domain = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
