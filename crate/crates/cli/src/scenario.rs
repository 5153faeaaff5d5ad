//! Scenario files: schema, parsing and reference validation.

use potkit::balayage::{ClassParams, FamilyClass};
use potkit::duality::MeasureClass;
use potkit::green::{GreenModel, JensenKind};
use potkit::zeros::ZeroAtom;
use potkit::{Component, Domain, Point};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// The only schema version understood by this runner.
pub const SCHEMA_VERSION: u32 = 1;

/// A schema violation, anchored to a line of the scenario text when possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub source: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {}", self.source, self.message),
            (Some(l), None) => write!(f, "{}:{l}: {}", self.source, self.message),
            _ => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    /// Dimension of fields, families and plots; measures take theirs from their data.
    pub dimension: usize,
    /// Ambient domain; the default plotting window.
    #[serde(default)]
    pub domain: Option<Domain>,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureSpec>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub functions: BTreeMap<String, HoloSpec>,
    #[serde(default)]
    pub families: BTreeMap<String, FamilySpec>,
    pub checks: Vec<CheckEntry>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Scenario fields to sample on the `--grid` lattice.
    #[serde(default)]
    pub fields: Vec<PlotSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub field: String,
    /// Lower-left and upper-right corners; defaults to the scenario domain's box.
    #[serde(default)]
    pub window: Option<(Point, Point)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hole {
    pub center: Point,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Components(Vec<Component>),
    /// `ω_B(at, ·)` for the ball `B(center, radius)`.
    HarmonicMeasure {
        center: Point,
        radius: f64,
        at: Point,
    },
    Jensen {
        center: Point,
        radius: f64,
        at: Point,
        construction: JensenKind,
    },
    Lyons {
        at: Point,
        radius: f64,
        holes: Vec<Hole>,
    },
    /// A named measure swept by the mollifier of the given radius.
    Mollified {
        measure: String,
        radius: f64,
    },
    /// One of the library's reference measures, as `(x, μ)` pairs per class.
    Example {
        class: MeasureClass,
        index: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPoint {
    pub at: Point,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Green(GreenModel),
    Potential {
        measure: String,
    },
    /// `offset + Σ m_k K_{d−2}(·, y_k)`.
    KernelSum {
        poles: Vec<WeightedPoint>,
        #[serde(default)]
        offset: f64,
    },
    /// `ln|f|` for a named holomorphic function.
    LogModulus {
        function: String,
    },
    /// `scale·|x − center|² + offset`.
    Quadratic {
        center: Point,
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    Constant {
        value: f64,
    },
    Max {
        of: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// `z_k = 1 − 2^{−k}`.
    Dyadic,
    /// `z_k = 1 − 1/k`.
    Harmonic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HoloSpec {
    /// Coefficients `[re, im]` in ascending powers.
    Polynomial {
        coefficients: Vec<[f64; 2]>,
    },
    Roots {
        roots: Vec<ZeroAtom>,
    },
    Blaschke {
        zeros: Vec<[f64; 2]>,
        #[serde(default)]
        truncation: Option<usize>,
    },
    /// A Blaschke product over a real zero sequence `z_1, …, z_count`.
    BlaschkeSequence {
        kind: SequenceKind,
        count: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ring {
    pub center: Point,
    pub radius: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `±K(·, y)` with poles on `ring`, harmonic near `clos support`.
    HarmonicKernels {
        support: Domain,
        ring: Ring,
        #[serde(default)]
        constants: bool,
    },
    /// Harmonic kernels on a ring beyond the supports of the named measures.
    HarmonicProbe {
        measures: Vec<String>,
    },
    HarmonicPolynomials {
        center: Point,
        degree: usize,
    },
    SubharmonicKernels {
        #[serde(default)]
        poles: Vec<Point>,
        #[serde(default)]
        rings: Vec<Ring>,
        #[serde(default)]
        constants: bool,
    },
    StandardSubharmonic {
        center: Point,
        radius: f64,
        per_ring: usize,
    },
    Class {
        class: FamilyClass,
        params: ClassParams,
        count: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MajorantSpec {
    Constant(f64),
    /// `M = pt_{plus} − pt_{minus} + constant`.
    Riesz {
        plus: String,
        #[serde(default)]
        minus: Option<String>,
        constant: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckEntry {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub expect: Expect,
    pub check: CheckSpec,
}

fn default_pairs() -> usize {
    10_000
}
fn default_max_dim() -> usize {
    8
}
fn default_max_p() -> usize {
    5
}
fn default_radii() -> Vec<f64> {
    vec![10.0, 20.0, 40.0]
}
fn default_probes() -> usize {
    500
}
fn default_spacings() -> Vec<f64> {
    vec![0.02, 0.01]
}
fn default_family_size() -> usize {
    24
}
fn default_prefix_family() -> usize {
    16
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// `c_d`, `b_p` against closed forms and monotonicity of `k_q`.
    KernelConstants {
        #[serde(default = "default_max_dim")]
        max_dim: usize,
        #[serde(default = "default_max_p")]
        max_p: usize,
        #[serde(default = "default_pairs")]
        pairs: usize,
    },
    /// `|pt_μ(x) − μ(ℝ^d) k_{d−2}(|x|)|·|x|^{d−1}` along the radii.
    Asymptotics {
        measure: String,
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
    },
    GreenValue {
        green: GreenModel,
        at: Point,
        expected: f64,
        tol: f64,
    },
    /// `∫h dω_B(at, ·) = h(at)` for six harmonic polynomials and exponentials.
    PoissonReproduction {
        center: Point,
        radius: f64,
        at: Point,
    },
    /// `∫u dω_B(at, ·) ≥ u(at)` for subharmonic probes.
    JensenInequality {
        center: Point,
        radius: f64,
        at: Point,
    },
    /// Randomized sub-mean-value test of a named field on a domain.
    Subharmonic {
        field: String,
        domain: Domain,
        #[serde(default = "default_probes")]
        probes: usize,
        min_radius: f64,
        #[serde(default)]
        avoid: Vec<Point>,
    },
    MaxGluing {
        o: Domain,
        v: String,
        o0: Domain,
        v0: String,
        #[serde(default = "default_probes")]
        probes: usize,
    },
    QuantitativeGluing {
        o: Domain,
        v: String,
        o0: Domain,
        g: String,
        lower_v: f64,
        upper_v: f64,
        lower_g: f64,
        upper_g: f64,
        #[serde(default = "default_probes")]
        probes: usize,
    },
    GreenGluing {
        v: String,
        green: GreenModel,
        s_o: Domain,
        s: Domain,
        outer: Domain,
        /// Defaults to the sampled extrema of `v` on the layer.
        #[serde(default)]
        bounds: Option<(f64, f64)>,
        #[serde(default = "default_probes")]
        probes: usize,
    },
    Balayage {
        theta: String,
        mu: String,
        family: String,
    },
    /// Margins of `ϑ ≼ μ` before and after sweeping `μ` by a mollifier.
    SweepClosure {
        theta: String,
        mu: String,
        family: String,
        radius: f64,
    },
    PoissonJensen {
        /// Names of library instances; `"*"` selects all of them.
        instances: Vec<String>,
    },
    RoundTrip {
        measure: String,
        at: Point,
        class: MeasureClass,
        /// Centre and half-width of the lattice box.
        center: Point,
        half_width: f64,
        #[serde(default = "default_spacings")]
        spacings: Vec<f64>,
        tol: f64,
    },
    GreenBound {
        measure: String,
        at: Point,
        class: MeasureClass,
        green: GreenModel,
        #[serde(default)]
        layer: Option<(Domain, f64)>,
    },
    /// Cell densities of `c_d △v` on a grid against a constant.
    RieszDensity {
        field: String,
        center: Point,
        half_width: f64,
        expected: f64,
        tol: f64,
    },
    /// Window masses of `c₂ △ln|f|` about each zero, and their refinement.
    PoincareLelong {
        function: String,
        center: Point,
        half_width: f64,
        #[serde(default)]
        cells: Option<usize>,
    },
    ZeroStatements {
        function: String,
        majorant: MajorantSpec,
        params: ClassParams,
        #[serde(default = "default_family_size")]
        family_size: usize,
        #[serde(default)]
        probe_scaling: bool,
    },
    CriteriumForward {
        function: String,
        majorant: MajorantSpec,
        params: ClassParams,
        #[serde(default = "default_family_size")]
        family_size: usize,
        #[serde(default = "default_prefix_family")]
        z4_family_size: usize,
    },
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::KernelConstants { .. } => "kernel_constants",
            CheckSpec::Asymptotics { .. } => "asymptotics",
            CheckSpec::GreenValue { .. } => "green_value",
            CheckSpec::PoissonReproduction { .. } => "poisson_reproduction",
            CheckSpec::JensenInequality { .. } => "jensen_inequality",
            CheckSpec::Subharmonic { .. } => "subharmonic",
            CheckSpec::MaxGluing { .. } => "max_gluing",
            CheckSpec::QuantitativeGluing { .. } => "quantitative_gluing",
            CheckSpec::GreenGluing { .. } => "green_gluing",
            CheckSpec::Balayage { .. } => "balayage",
            CheckSpec::SweepClosure { .. } => "sweep_closure",
            CheckSpec::PoissonJensen { .. } => "poisson_jensen",
            CheckSpec::RoundTrip { .. } => "round_trip",
            CheckSpec::GreenBound { .. } => "green_bound",
            CheckSpec::RieszDensity { .. } => "riesz_density",
            CheckSpec::PoincareLelong { .. } => "poincare_lelong",
            CheckSpec::ZeroStatements { .. } => "zero_statements",
            CheckSpec::CriteriumForward { .. } => "criterium_forward",
        }
    }

    /// Named references, tagged with the table they must resolve in.
    fn references(&self) -> Vec<(Table, String)> {
        use Table::*;
        let mut out: Vec<(Table, &String)> = Vec::new();
        match self {
            CheckSpec::Asymptotics { measure, .. }
            | CheckSpec::RoundTrip { measure, .. }
            | CheckSpec::GreenBound { measure, .. } => out.push((Measures, measure)),
            CheckSpec::Subharmonic { field, .. } | CheckSpec::RieszDensity { field, .. } => {
                out.push((Fields, field))
            }
            CheckSpec::MaxGluing { v, v0: w, .. }
            | CheckSpec::QuantitativeGluing { v, g: w, .. } => {
                out.push((Fields, v));
                out.push((Fields, w));
            }
            CheckSpec::GreenGluing { v, .. } => out.push((Fields, v)),
            CheckSpec::Balayage { theta, mu, family }
            | CheckSpec::SweepClosure {
                theta, mu, family, ..
            } => {
                out.extend([(Measures, theta), (Measures, mu), (Families, family)]);
            }
            CheckSpec::PoincareLelong { function, .. } => out.push((Functions, function)),
            CheckSpec::ZeroStatements {
                function, majorant, ..
            }
            | CheckSpec::CriteriumForward {
                function, majorant, ..
            } => {
                out.push((Functions, function));
                if let MajorantSpec::Riesz { plus, minus, .. } = majorant {
                    out.push((Measures, plus));
                    out.extend(minus.iter().map(|m| (Measures, m)));
                }
            }
            _ => {}
        }
        out.into_iter().map(|(t, s)| (t, s.clone())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Table {
    Measures,
    Fields,
    Functions,
    Families,
}

impl Table {
    fn name(self) -> &'static str {
        match self {
            Table::Measures => "measure",
            Table::Fields => "field",
            Table::Functions => "function",
            Table::Families => "family",
        }
    }
}

impl CheckEntry {
    /// The entry's id, defaulting to `<index>-<kind>` with a 1-based index.
    pub fn id_at(&self, index: usize) -> String {
        self.id
            .clone()
            .unwrap_or_else(|| format!("{}-{}", index + 1, self.check.kind()))
    }
}

/// 1-based line of the first occurrence of `needle` at or after byte `from`.
pub fn line_of(text: &str, needle: &str, from: usize) -> Option<usize> {
    let from = from.min(text.len());
    text[from..]
        .find(needle)
        .map(|k| text[..from + k].matches('\n').count() + 1)
}

impl Scenario {
    /// Parses and validates a scenario; `source` names the text in messages.
    pub fn parse(text: &str, source: &str) -> Result<Scenario, SchemaError> {
        let err = |line: Option<usize>, column: Option<usize>, message: String| SchemaError {
            source: source.to_string(),
            line,
            column,
            message,
        };
        // Check the version first so that a future schema gets a clear message.
        let raw: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| err(Some(e.line()), Some(e.column()), e.to_string()))?;
        match raw.get("schema") {
            Some(serde_json::Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION as u64) => {}
            Some(v) => {
                return Err(err(
                    line_of(text, "\"schema\"", 0),
                    None,
                    format!("unsupported schema version {v}; expected {SCHEMA_VERSION}"),
                ))
            }
            None => return Err(err(Some(1), None, "missing \"schema\" field".into())),
        }
        let sc: Scenario = serde_json::from_str(text)
            .map_err(|e| err(Some(e.line()), Some(e.column()), e.to_string()))?;
        sc.validate(text)
            .map_err(|(line, message)| err(line, None, message))?;
        Ok(sc)
    }

    fn validate(&self, text: &str) -> Result<(), (Option<usize>, String)> {
        let d = self.dimension;
        if !(1..=8).contains(&d) {
            return Err((
                line_of(text, "\"dimension\"", 0),
                format!("dimension {d} is outside 1..=8"),
            ));
        }
        if self.checks.is_empty() {
            return Err((
                line_of(text, "\"checks\"", 0),
                "the scenario lists no checks".into(),
            ));
        }
        let checks_at = text.find("\"checks\"").unwrap_or(0);
        let mut ids = BTreeSet::new();
        let mut cursor = checks_at;
        for (k, entry) in self.checks.iter().enumerate() {
            // Advance to this entry's "check" key so lines point inside it.
            let here = text[cursor.min(text.len())..]
                .find("\"check\"")
                .map_or(cursor, |p| cursor + p);
            let id = entry.id_at(k);
            if !ids.insert(id.clone()) {
                return Err((
                    line_of(text, &format!("\"{id}\""), checks_at),
                    format!("duplicate check id '{id}'"),
                ));
            }
            for (table, name) in entry.check.references() {
                let ok = match table {
                    Table::Measures => self.measures.contains_key(&name),
                    Table::Fields => self.fields.contains_key(&name),
                    Table::Functions => self.functions.contains_key(&name),
                    Table::Families => self.families.contains_key(&name),
                };
                if !ok {
                    return Err((
                        line_of(text, &format!("\"{name}\""), here),
                        format!("check '{id}' refers to unknown {} '{name}'", table.name()),
                    ));
                }
            }
            if let CheckSpec::PoissonJensen { instances } = &entry.check {
                let known = potkit::duality::pj_presets();
                if let Some(bad) = instances
                    .iter()
                    .find(|n| *n != "*" && !known.iter().any(|p| p.name == n.as_str()))
                {
                    return Err((
                        line_of(text, &format!("\"{bad}\""), here),
                        format!("check '{id}' names unknown Poisson–Jensen instance '{bad}'"),
                    ));
                }
            }
            cursor = here + 1;
        }
        let at = |name: &str| line_of(text, &format!("\"{name}\""), 0);
        for (name, spec) in &self.measures {
            if let MeasureSpec::Mollified { measure, .. } = spec {
                if !self.measures.contains_key(measure) || measure == name {
                    return Err((
                        at(name),
                        format!("measure '{name}' sweeps unknown measure '{measure}'"),
                    ));
                }
            }
        }
        for (name, spec) in &self.fields {
            let refs: Vec<(Table, &String)> = match spec {
                FieldSpec::Potential { measure } => vec![(Table::Measures, measure)],
                FieldSpec::LogModulus { function } => vec![(Table::Functions, function)],
                FieldSpec::Max { of } => of.iter().map(|f| (Table::Fields, f)).collect(),
                _ => vec![],
            };
            for (table, r) in refs {
                let ok = match table {
                    Table::Measures => self.measures.contains_key(r),
                    Table::Functions => self.functions.contains_key(r),
                    _ => self.fields.contains_key(r) && r != name,
                };
                if !ok {
                    return Err((
                        at(name),
                        format!("field '{name}' refers to unknown {} '{r}'", table.name()),
                    ));
                }
            }
        }
        for (name, spec) in &self.families {
            if let FamilySpec::HarmonicProbe { measures } = spec {
                if let Some(m) = measures.iter().find(|m| !self.measures.contains_key(*m)) {
                    return Err((
                        at(name),
                        format!("family '{name}' refers to unknown measure '{m}'"),
                    ));
                }
            }
        }
        for p in &self.outputs.fields {
            let line = line_of(
                text,
                &format!("\"{}\"", p.field),
                text.find("\"outputs\"").unwrap_or(0),
            );
            if !self.fields.contains_key(&p.field) {
                return Err((
                    line,
                    format!("output refers to unknown field '{}'", p.field),
                ));
            }
            if p.window.is_none()
                && self
                    .domain
                    .as_ref()
                    .and_then(|d| d.bounding_box())
                    .is_none()
            {
                return Err((
                    line,
                    format!(
                        "output '{}' needs a window or a bounded scenario domain",
                        p.field
                    ),
                ));
            }
        }
        if self.domain.as_ref().is_some_and(|dom| dom.dim() != d) {
            return Err((at("domain"), format!("domain dimension differs from {d}")));
        }
        Ok(())
    }
}
