use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{BoundaryPoint, Mat2};
use crate::surface::{FuchsianGroup, GroupReport, Letter, RelatorKind, SideSpec, Word};

/// Serialized group: `generators` and `pairing` always, the rest optional.
///
/// Without `sides`, the polygon is rebuilt as the Dirichlet domain at
/// `base_point` (default `i`) and must reproduce the given pairing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub generators: Vec<[[f64; 2]; 2]>,
    pub pairing: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<SideJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relator: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relator_kind: Option<RelatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideJson {
    /// Homogeneous `(p, q)` pairs; `(1, 0)` is infinity.
    pub endpoints: [[f64; 2]; 2],
    pub letter: Letter,
}

impl GroupJson {
    pub fn from_group(g: &FuchsianGroup<f64>) -> Self {
        let base = g.domain().base_point();
        Self {
            name: Some(g.name.clone()),
            generators: g.generators().iter().map(|m| [[m.a, m.b], [m.c, m.d]]).collect(),
            pairing: g.pairing(),
            sides: Some(
                g.side_specs()
                    .iter()
                    .map(|s| SideJson {
                        endpoints: [[s.endpoints[0].p, s.endpoints[0].q], [s.endpoints[1].p, s.endpoints[1].q]],
                        letter: s.letter,
                    })
                    .collect(),
            ),
            relator: Some(g.relator().clone()),
            relator_kind: Some(g.relator_kind()),
            base_point: Some([base.re, base.im]),
        }
    }

    /// Builds the group and runs verification at `tol`; fails if verification fails.
    pub fn into_group(&self, tol: f64) -> Result<(FuchsianGroup<f64>, GroupReport)> {
        let generators: Vec<Mat2<f64>> =
            self.generators.iter().map(|m| Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])).collect();
        let n_gen = generators.len();
        let relator = match &self.relator {
            Some(w) => w.clone(),
            None => default_relator(n_gen)?,
        };
        let kind = self.relator_kind.unwrap_or(RelatorKind::Identity);
        let base = self.base_point.map(|b| Complex::new(b[0], b[1])).unwrap_or(Complex::new(0.0, 1.0));
        let name = self.name.clone().unwrap_or_else(|| "custom".into());
        let group = match &self.sides {
            Some(sides) => {
                let specs: Vec<SideSpec<f64>> = sides
                    .iter()
                    .map(|s| SideSpec {
                        endpoints: [
                            BoundaryPoint::new(s.endpoints[0][0], s.endpoints[0][1]),
                            BoundaryPoint::new(s.endpoints[1][0], s.endpoints[1][1]),
                        ],
                        letter: s.letter,
                    })
                    .collect();
                FuchsianGroup::from_sides(name, generators, &specs, base, relator, kind)?
            }
            None => FuchsianGroup::dirichlet(name, generators, base, relator, kind)?,
        };
        if group.pairing() != self.pairing {
            return Err(Error::GroupInvalid(format!(
                "pairing {:?} does not match the polygon's pairing {:?}",
                self.pairing,
                group.pairing()
            )));
        }
        let report = group.verify(tol);
        if !report.pass {
            return Err(Error::GroupInvalid(report.failures.join("; ")));
        }
        Ok((group, report))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Json(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))
    }
}

/// `[g0^-1, g1] [g2^-1, g3] ...` for an even number of generators.
fn default_relator(n: usize) -> Result<Word> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::GroupInvalid("a relator is required for an odd number of generators".into()));
    }
    let mut w = Word::new();
    for k in (0..n).step_by(2) {
        let a = Letter::new(k as u16, true);
        let b = Letter::new(k as u16 + 1, false);
        w = w.concat(&Word::commutator(a, b));
    }
    Ok(w)
}
