//! Empirical measures of the foliated geodesic flow: time averages along
//! orbits and unstable arcs, a bounded-Lipschitz distance between them,
//! attractor clustering, visibility, and forward/backward comparison.
//!
//! Measures are histograms on a product partition of the domain (polar
//! rings and sectors about its base point), the direction circle, and an
//! equal-area partition of the fiber sphere.

pub mod cells;
mod attractor;
mod grid;
mod measure;
mod reversal;
mod sample;
mod svg;

pub use attractor::{classify_attractors, label_measure, pairwise_bl, tally, visibility, AttractorSet, VisibilityEstimate};
pub use grid::{Cell, GridSpec, Resolution};
pub use measure::{bl_distance, Counter, EmpiricalMeasure, MeasureJson, Recording, Source};
pub use reversal::{
    compare_time_reversal, regular_fraction, section_concentration, Concentration, Endpoint, RegularFraction, TimeReversal,
};
pub use sample::{
    birkhoff_empirical, birkhoff_reversed, ensemble_empirical, invariance_defect, orbit_measures, record_orbit,
    unstable_arc_empirical,
};
pub use svg::fiber_heatmap_svg;
