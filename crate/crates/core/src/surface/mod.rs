//! Hyperbolic surfaces as quotients of the upper half-plane: group presets,
//! fundamental polygons and reduction of points and frames to the polygon.

mod domain;
mod group;
mod json;
mod line;
mod presets;
mod word;

pub use domain::{
    FundamentalDomain, Side, SideSpec, Vertex, DEFAULT_REDUCTION_BUDGET, IDEAL_RADIUS_CAP, SIDE_TOLERANCE,
};
pub use group::{FuchsianGroup, GroupReport, RelatorKind};
pub use json::{GroupJson, SideJson};
pub use line::GeodesicLine;
pub use presets::{genus2, punctured_torus, OCTAGON_PAIRS};
pub use word::{Letter, Word};

#[cfg(test)]
mod tests;
