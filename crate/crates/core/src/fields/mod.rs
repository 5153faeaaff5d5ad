//! Scalar fields, mean values, subharmonicity checks, Riesz measures, gluing
//! and harmonic modification in layers.

mod averages;
mod field;
mod glue;
mod harmonize;
mod pole;
mod riesz;
mod subharmonic;

pub use averages::{ball_average, ball_mean, sphere_average, sphere_mean, MeanValue};
pub use field::{ScalarField, Smoothness};
pub use glue::{
    boundary_limsup, boundary_samples, glue_max, glue_quantitative, glue_with_green, layer_extrema,
    quantitative_amplitude, GluingSpec, GreenBoundReport, GreenGluing, QuantitativeSpec,
    BOUNDARY_TOL, DEFAULT_LIMIT_STEP,
};
pub use harmonize::{harmonize_layer, HarmonizeOptions, Harmonized, Layer};
pub use pole::{default_pole_radii, fit_pole_coefficient, PoleFit, MIN_R_SQUARED};
pub use riesz::{riesz_measure, riesz_measure_from_samples, RieszMeasure};
pub use subharmonic::{
    check_harmonic, check_subharmonic, check_subharmonic_with, random_probes, Probe, ProbeRecord,
    ProbeReport, SUBMEAN_TOL,
};
