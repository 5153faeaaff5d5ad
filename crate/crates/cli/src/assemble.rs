//! Builds the named measures, fields, functions and families of a scenario.

use crate::scenario::{
    FamilySpec, FieldSpec, HoloSpec, MajorantSpec, MeasureSpec, Scenario, SequenceKind,
};
use num_complex::Complex64;
use potkit::balayage::{
    build_test_family, harmonic_kernel_family, harmonic_polynomial_family, ring_points,
    standard_subharmonic_family, subharmonic_kernel_family, TestFamily,
};
use potkit::duality::{
    arens_singer_examples, harmonic_probe_family, jensen_examples, MeasureClass,
};
use potkit::green::{
    green_ball, harmonic_measure, jensen_measure_family, lyons_measure, GreenModel,
};
use potkit::measures::{convolve_balayage, Mollifier, Sweep};
use potkit::potentials::potential;
use potkit::quadrature::Resolution;
use potkit::zeros::{GrowthMajorant, HoloFunction};
use potkit::{Domain, Error, ExtReal, KernelConfig, Measure, Point, Result, ScalarField};
use std::collections::BTreeMap;

/// The resolved objects of a scenario.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub measures: BTreeMap<String, Measure>,
    pub fields: BTreeMap<String, ScalarField>,
    pub functions: BTreeMap<String, HoloFunction>,
    pub families: BTreeMap<String, TestFamily>,
}

fn named<'a, T>(table: &'a BTreeMap<String, T>, name: &str, what: &str) -> Result<&'a T> {
    table
        .get(name)
        .ok_or_else(|| Error::Precondition(format!("unknown {what} '{name}'")))
}

fn check_dim(p: &Point, d: usize, what: &str) -> Result<()> {
    if p.dim() != d {
        return Err(Error::Precondition(format!(
            "{what} has dimension {} in a {d}-dimensional scenario",
            p.dim()
        )));
    }
    Ok(())
}

pub fn validated_green(g: &GreenModel) -> Result<GreenModel> {
    green_ball(g.center, g.radius, g.pole)
}

/// Measures carry their own dimension, so one scenario may compare several.
fn build_measure(
    spec: &MeasureSpec,
    done: &BTreeMap<String, Measure>,
    d: usize,
) -> Result<Measure> {
    let m = match spec {
        MeasureSpec::Components(cs) => Measure::new(cs.first().map_or(d, |c| c.dim()), cs.clone())?,
        MeasureSpec::HarmonicMeasure { center, radius, at } => {
            harmonic_measure(&green_ball(*center, *radius, *at)?, at)?
        }
        MeasureSpec::Jensen {
            center,
            radius,
            at,
            construction,
        } => jensen_measure_family(&green_ball(*center, *radius, *at)?, at, construction)?,
        MeasureSpec::Lyons { at, radius, holes } => {
            let holes: Vec<(Point, f64)> = holes.iter().map(|h| (h.center, h.radius)).collect();
            lyons_measure(*at, *radius, &holes)?
        }
        MeasureSpec::Mollified { measure, radius } => {
            let base = named(done, measure, "measure")?;
            convolve_balayage(
                base,
                &Sweep::Mollifier(Mollifier::new(*radius)?),
                &Resolution::DEFAULT,
            )?
        }
        MeasureSpec::Example { class, index } => {
            let list = match class {
                MeasureClass::Jensen => jensen_examples(),
                MeasureClass::ArensSinger => arens_singer_examples(),
            };
            let n = list.len();
            list.into_iter()
                .nth(*index)
                .ok_or_else(|| {
                    Error::Precondition(format!(
                        "{class:?} example {index} out of range (have {n})"
                    ))
                })?
                .1
        }
    };
    m.validate()?;
    Ok(m)
}

fn sequence(kind: SequenceKind, count: usize) -> Vec<Complex64> {
    (1..=count)
        .map(|k| {
            let x = match kind {
                SequenceKind::Dyadic => 1.0 - 0.5f64.powi(k as i32),
                SequenceKind::Harmonic => 1.0 - 1.0 / k as f64,
            };
            Complex64::new(x, 0.0)
        })
        .collect()
}

pub fn build_function(spec: &HoloSpec) -> Result<HoloFunction> {
    let c = |v: &[[f64; 2]]| {
        v.iter()
            .map(|[a, b]| Complex64::new(*a, *b))
            .collect::<Vec<_>>()
    };
    match spec {
        HoloSpec::Polynomial { coefficients } => {
            if coefficients.is_empty() {
                return Err(Error::Precondition(
                    "a polynomial needs at least one coefficient".into(),
                ));
            }
            Ok(HoloFunction::polynomial(c(coefficients)))
        }
        HoloSpec::Roots { roots } => Ok(HoloFunction::from_roots(roots)),
        HoloSpec::Blaschke { zeros, truncation } => match truncation {
            Some(n) => HoloFunction::blaschke_truncated(c(zeros), *n),
            None => HoloFunction::blaschke(c(zeros)),
        },
        HoloSpec::BlaschkeSequence { kind, count } => {
            HoloFunction::blaschke_truncated(sequence(*kind, *count), *count)
        }
    }
}

fn build_field(
    name: &str,
    specs: &BTreeMap<String, FieldSpec>,
    a: &mut Assembled,
    d: usize,
    stack: &mut Vec<String>,
) -> Result<ScalarField> {
    if let Some(f) = a.fields.get(name) {
        return Ok(f.clone());
    }
    if stack.iter().any(|s| s == name) {
        return Err(Error::Precondition(format!(
            "field '{name}' is defined in terms of itself"
        )));
    }
    let spec = named(specs, name, "field")?;
    stack.push(name.to_string());
    let f = match spec {
        FieldSpec::Green(g) => {
            check_dim(&g.center, d, "Green ball centre")?;
            validated_green(g)?.field()
        }
        FieldSpec::Potential { measure } => potential(
            named(&a.measures, measure, "measure")?,
            KernelConfig::new(d)?,
        )?
        .field(),
        FieldSpec::KernelSum { poles, offset } => {
            let offset = *offset;
            let cfg = KernelConfig::new(d)?;
            for p in poles {
                check_dim(&p.at, d, "pole")?;
            }
            let poles: Vec<(Point, f64)> = poles.iter().map(|p| (p.at, p.mass)).collect();
            ScalarField::new(Domain::Space { dim: d }, move |x| {
                poles.iter().fold(ExtReal::Finite(offset), |acc, (y, m)| {
                    acc + cfg.kernel(x, y) * *m
                })
            })
        }
        FieldSpec::LogModulus { function } => {
            if d != 2 {
                return Err(Error::Precondition(
                    "ln|f| fields need a planar scenario".into(),
                ));
            }
            named(&a.functions, function, "function")?.ln_abs_field()
        }
        FieldSpec::Quadratic {
            center,
            scale,
            offset,
        } => {
            check_dim(center, d, "quadratic centre")?;
            let (c, s, b) = (*center, *scale, *offset);
            ScalarField::on_space(d, move |x| s * (*x - c).norm_sq() + b)
        }
        FieldSpec::Constant { value } => ScalarField::constant(Domain::Space { dim: d }, *value),
        FieldSpec::Max { of } => {
            let mut parts = Vec::with_capacity(of.len());
            for other in of {
                parts.push(build_field(other, specs, a, d, stack)?);
            }
            let first = parts.first().cloned().ok_or_else(|| {
                Error::Precondition(format!("field '{name}' takes the max of nothing"))
            })?;
            parts[1..].iter().fold(first, |acc, f| acc.max(f))
        }
    };
    stack.pop();
    a.fields.insert(name.to_string(), f.clone());
    Ok(f)
}

fn build_family(spec: &FamilySpec, a: &Assembled) -> Result<TestFamily> {
    Ok(match spec {
        FamilySpec::HarmonicKernels {
            support,
            ring,
            constants,
        } => {
            let fam = harmonic_kernel_family(
                support,
                &ring_points(&ring.center, ring.radius, ring.count),
            )?;
            if *constants {
                TestFamily {
                    symmetric: true,
                    ..fam.with_constants()
                }
            } else {
                fam
            }
        }
        FamilySpec::HarmonicProbe { measures } => {
            let ms: Vec<&Measure> = measures
                .iter()
                .map(|m| named(&a.measures, m, "measure"))
                .collect::<Result<_>>()?;
            harmonic_probe_family(&ms, &[])?
        }
        FamilySpec::HarmonicPolynomials { center, degree } => {
            harmonic_polynomial_family(center, *degree)
        }
        FamilySpec::SubharmonicKernels {
            poles,
            rings,
            constants,
        } => {
            let mut all = poles.clone();
            for r in rings {
                all.extend(ring_points(&r.center, r.radius, r.count));
            }
            let fam = subharmonic_kernel_family(&all);
            if *constants {
                fam.with_constants()
            } else {
                fam
            }
        }
        FamilySpec::StandardSubharmonic {
            center,
            radius,
            per_ring,
        } => standard_subharmonic_family(center, *radius, *per_ring),
        FamilySpec::Class {
            class,
            params,
            count,
        } => {
            let mut p = params.clone();
            p.green = validated_green(&p.green)?;
            build_test_family(*class, &p, *count)?
        }
    })
}

pub fn build_majorant(spec: &MajorantSpec, a: &Assembled) -> Result<GrowthMajorant> {
    match spec {
        MajorantSpec::Constant(c) => Ok(GrowthMajorant::constant(*c)),
        MajorantSpec::Riesz {
            plus,
            minus,
            constant,
        } => {
            let plus = named(&a.measures, plus, "measure")?.clone();
            let minus = match minus {
                Some(m) => named(&a.measures, m, "measure")?.clone(),
                None => Measure::zero(2),
            };
            GrowthMajorant::from_riesz(plus, minus, *constant)
        }
    }
}

/// A named scenario object that could not be built.
#[derive(Debug)]
pub struct AssembleError {
    /// `"measure"`, `"field"`, `"function"` or `"family"`.
    pub table: &'static str,
    pub name: String,
    pub error: Error,
}

impl std::fmt::Display for AssembleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} '{}': {}", self.table, self.name, self.error)
    }
}

impl std::error::Error for AssembleError {}

/// Resolves every named object.
pub fn assemble(sc: &Scenario) -> std::result::Result<Assembled, AssembleError> {
    let d = sc.dimension;
    let mut a = Assembled {
        measures: BTreeMap::new(),
        fields: BTreeMap::new(),
        functions: BTreeMap::new(),
        families: BTreeMap::new(),
    };
    let tag = |table: &'static str, name: &str, error: Error| AssembleError {
        table,
        name: name.to_string(),
        error,
    };
    // Sweeps refer to other measures: build in rounds until nothing is pending.
    let mut pending: Vec<(&String, &MeasureSpec)> = sc.measures.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for (name, spec) in pending {
            if let MeasureSpec::Mollified { measure, .. } = spec {
                if !a.measures.contains_key(measure) {
                    rest.push((name, spec));
                    continue;
                }
            }
            let m = build_measure(spec, &a.measures, d).map_err(|e| tag("measure", name, e))?;
            a.measures.insert(name.clone(), m);
        }
        if rest.len() == before {
            return Err(tag(
                "measure",
                rest[0].0,
                Error::Precondition("sweeps form a cycle".into()),
            ));
        }
        pending = rest;
    }
    for (name, spec) in &sc.functions {
        let f = build_function(spec).map_err(|e| tag("function", name, e))?;
        a.functions.insert(name.clone(), f);
    }
    for name in sc.fields.keys() {
        build_field(name, &sc.fields, &mut a, d, &mut Vec::new())
            .map_err(|e| tag("field", name, e))?;
    }
    for (name, spec) in &sc.families {
        let f = build_family(spec, &a).map_err(|e| tag("family", name, e))?;
        a.families.insert(name.clone(), f);
    }
    Ok(a)
}
