use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hyperbolic::Mat2;
use crate::scalar::Real;

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: u16, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub const fn inv(self) -> Self {
        Self { generator: self.generator, inverse: !self.inverse }
    }

    /// Signed one-based encoding: `k + 1` for generator `k`, `-(k + 1)` for its inverse.
    pub fn signed(self) -> i32 {
        let k = self.generator as i32 + 1;
        if self.inverse {
            -k
        } else {
            k
        }
    }

    pub fn from_signed(v: i32) -> Result<Self> {
        if v == 0 || v.unsigned_abs() > u16::MAX as u32 {
            return Err(Error::Json(format!("invalid signed generator index {v}")));
        }
        Ok(Self::new((v.unsigned_abs() - 1) as u16, v < 0))
    }

    pub fn matrix<T: Real>(self, generators: &[Mat2<T>]) -> Mat2<T> {
        let g = generators[self.generator as usize];
        if self.inverse {
            g.sl_inverse()
        } else {
            g
        }
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i32(self.signed())
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i32::deserialize(d)?;
        Letter::from_signed(v).map_err(serde::de::Error::custom)
    }
}

/// Sequence of letters; the product is taken left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    /// Product of the generator images, in order.
    pub fn evaluate<T: Real>(&self, generators: &[Mat2<T>]) -> Mat2<T> {
        self.0.iter().fold(Mat2::identity(), |acc, l| acc * l.matrix(generators))
    }

    pub fn check_indices(&self, count: usize) -> Result<()> {
        match self.0.iter().find(|l| l.generator as usize >= count) {
            Some(l) => Err(Error::GroupInvalid(format!(
                "letter {} refers to a missing generator",
                l.signed()
            ))),
            None => Ok(()),
        }
    }

    /// Freely reduced copy.
    pub fn freely_reduced(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    /// Commutator word `a b a^-1 b^-1`.
    pub fn commutator(a: Letter, b: Letter) -> Self {
        Self(vec![a, b, a.inv(), b.inv()])
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
