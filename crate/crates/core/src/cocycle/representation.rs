use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{FuchsianGroup, Letter, RelatorKind, Word};
use crate::{MatC, SpherePoint};

/// Metadata only; never changes the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationTag {
    Fuchsian,
    QuasiFuchsianLike,
    Unitary,
    Nondiscrete,
    Custom,
}

/// Below this unitarity defect an image is treated as an exact isometry of
/// the round sphere, so its crossing contributes exactly zero to the log-derivative.
pub const ISOMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
struct Pullback {
    /// `rho(letter)^-1`
    m: MatC,
    identity: bool,
    isometry: bool,
}

/// Images of the generators in SL(2,C), acting on the fiber sphere.
#[derive(Clone, Debug)]
pub struct Representation {
    images: Vec<MatC>,
    tag: RepresentationTag,
    pullbacks: Vec<[Pullback; 2]>,
}

impl Representation {
    /// Images are rescaled to unit determinant; determinants further than
    /// `1e-9` from one are rejected.
    pub fn new(images: Vec<MatC>, tag: RepresentationTag) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Precondition { field: "images", reason: "empty".into() });
        }
        let mut normalized = Vec::with_capacity(images.len());
        for m in &images {
            let dev = (m.det() - Complex::new(1.0, 0.0)).norm();
            if !(dev < 1e-9) {
                return Err(Error::Determinant { deviation: dev });
            }
            normalized.push(m.normalized()?);
        }
        let pullbacks = normalized
            .iter()
            .map(|m| {
                let inv = m.inverse()?;
                let mk = |x: MatC| Pullback {
                    m: x,
                    identity: x.max_abs_diff(&MatC::identity()) == 0.0,
                    isometry: x.unitarity_defect() < ISOMETRY_TOLERANCE,
                };
                // letter g: pull back by rho(g)^-1; letter g^-1: by rho(g)
                Ok([mk(inv), mk(*m)])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { images: normalized, tag, pullbacks })
    }

    pub fn trivial(generators: usize) -> Self {
        Self::new(vec![MatC::identity(); generators], RepresentationTag::Unitary).expect("identity images")
    }

    /// The inclusion of the group into SL(2,C).
    pub fn fuchsian(group: &FuchsianGroup<f64>) -> Self {
        let images = group.generators().iter().map(MatC::from_real).collect();
        Self::new(images, RepresentationTag::Fuchsian).expect("group generators have unit determinant")
    }

    /// Representation into SU(2) built from two fixed generic rotations `U`, `V`.
    ///
    /// For the genus-two relator `[g0^-1, g1][g2^-1, g3]` the images
    /// `(U^-1, V, V^-1, U)` satisfy it exactly, since `[B, A] = [A, B]^-1`.
    /// Groups with a parabolic relator are free and accept any images.
    pub fn unitary(group: &FuchsianGroup<f64>) -> Result<Self> {
        let u = MatC::su2_axis_angle([0.48, -0.6, 0.64], 1.234_567)?;
        let v = MatC::su2_axis_angle([-0.8, 0.36, 0.48], 2.345_678)?;
        let n = group.generators().len();
        let images = match group.relator_kind() {
            RelatorKind::Identity if n == 4 => vec![u.inverse()?, v, v.inverse()?, u],
            RelatorKind::Identity => {
                return Err(Error::Precondition {
                    field: "representation",
                    reason: format!("no unitary preset for {n} generators"),
                })
            }
            RelatorKind::Parabolic => (0..n).map(|k| if k % 2 == 0 { u } else { v }).collect(),
        };
        let rep = Self::new(images, RepresentationTag::Unitary)?;
        rep.check_relator(group, 1e-10)?;
        Ok(rep)
    }

    /// Bends the inclusion along the axis of the first commutator by angle
    /// `theta`: the last two generators are conjugated by an elliptic element
    /// commuting with `[g0^-1, g1]`.
    pub fn quasi_fuchsian_like(group: &FuchsianGroup<f64>, theta: f64) -> Result<Self> {
        let gens = group.generators();
        if gens.len() != 4 || group.relator_kind() != RelatorKind::Identity {
            return Err(Error::Precondition {
                field: "representation",
                reason: "bending needs a genus-two group".into(),
            });
        }
        let a = Letter::new(0, true);
        let b = Letter::new(1, false);
        let c = Word::commutator(a, b).evaluate(gens);
        let tr = c.trace();
        if !(tr.abs() > 2.0) {
            return Err(Error::Degenerate("commutator is not hyperbolic".into()));
        }
        let sgn = tr.signum();
        let disc = (tr * tr - 4.0).sqrt();
        let l1 = 0.5 * (tr + sgn * disc);
        let l2 = 1.0 / l1;
        let eig = |l: f64| -> (f64, f64) {
            if c.b.abs() > c.c.abs() {
                (c.b, l - c.a)
            } else {
                (l - c.d, c.c)
            }
        };
        let (p1, q1) = eig(l1);
        let (p2, q2) = eig(l2);
        let re = |x: f64| Complex::new(x, 0.0);
        let p = MatC::new(re(p1), re(p2), re(q1), re(q2));
        let pinv = p.inverse()?;
        let h = Complex::new(0.0, 0.5 * theta).exp();
        let d = MatC::new(h, re(0.0), re(0.0), h.conj());
        let r = p.mul(&d).mul(&pinv);
        let rinv = r.inverse()?;
        let mut images: Vec<MatC> = gens.iter().map(MatC::from_real).collect();
        for img in images.iter_mut().skip(2) {
            *img = r.mul(img).mul(&rinv);
        }
        let rep = Self::new(images, RepresentationTag::QuasiFuchsianLike)?;
        rep.check_relator(group, 1e-9)?;
        Ok(rep)
    }

    pub fn images(&self) -> &[MatC] {
        &self.images
    }

    pub fn tag(&self) -> RepresentationTag {
        self.tag
    }

    /// Signed product of the images along `w`.
    pub fn evaluate(&self, w: &Word) -> MatC {
        w.letters().iter().fold(MatC::identity(), |acc, l| {
            let g = self.images[l.generator as usize];
            let m = if l.inverse { self.pullbacks[l.generator as usize][0].m } else { g };
            acc.mul(&m)
        })
    }

    /// Distance of the relator image from `±I` (closed surfaces only; zero otherwise).
    pub fn relator_residual(&self, group: &FuchsianGroup<f64>) -> f64 {
        match group.relator_kind() {
            RelatorKind::Identity => self.evaluate(group.relator()).distance_to_pm_identity(),
            RelatorKind::Parabolic => 0.0,
        }
    }

    pub fn check_relator(&self, group: &FuchsianGroup<f64>, tol: f64) -> Result<()> {
        if self.images.len() != group.generators().len() {
            return Err(Error::Precondition {
                field: "images",
                reason: format!("{} images for {} generators", self.images.len(), group.generators().len()),
            });
        }
        let r = self.relator_residual(group);
        if r < tol {
            Ok(())
        } else {
            Err(Error::GroupInvalid(format!("representation relator residual {r:e}")))
        }
    }

    /// Moves a fiber point into the chart of the neighbouring tile after a
    /// crossing recorded as `letter`; returns the log of the spherical derivative.
    #[inline]
    pub fn pull_back(&self, letter: Letter, fiber: &mut SpherePoint) -> f64 {
        let p = &self.pullbacks[letter.generator as usize][letter.inverse as usize];
        if p.identity {
            return 0.0;
        }
        if p.isometry {
            *fiber = p.m.apply(fiber);
            return 0.0;
        }
        let (w, d) = p.m.apply_with_derivative(fiber);
        *fiber = w;
        d.ln()
    }

    pub fn to_json(&self) -> RepresentationJson {
        RepresentationJson {
            images: self
                .images
                .iter()
                .map(|m| [[m.a.re, m.a.im], [m.b.re, m.b.im], [m.c.re, m.c.im], [m.d.re, m.d.im]])
                .collect(),
            tag: self.tag,
        }
    }
}

/// `{"images": [[[re, im] x 4] ...], "tag": ...}` with entries in the order a, b, c, d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationJson {
    pub images: Vec<[[f64; 2]; 4]>,
    pub tag: RepresentationTag,
}

impl RepresentationJson {
    pub fn build(&self) -> Result<Representation> {
        let c = |v: [f64; 2]| Complex::new(v[0], v[1]);
        let images = self.images.iter().map(|m| MatC::new(c(m[0]), c(m[1]), c(m[2]), c(m[3]))).collect();
        Representation::new(images, self.tag)
    }
}
