use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::cells::{fiber_cell, MAX_FIBER_LEVEL};
use crate::surface::FundamentalDomain;
use crate::{Frame, SpherePoint};

/// One histogram resolution over (position, direction, fiber).
///
/// Positions use the polar coordinates of the domain about its base point:
/// `radial` equal-area rings times `angular` equal-angle sectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub radial: u32,
    pub angular: u32,
    pub directions: u32,
    pub fiber_level: u32,
}

impl Resolution {
    pub const fn new(radial: u32, angular: u32, directions: u32, fiber_level: u32) -> Self {
        Self { radial, angular, directions, fiber_level }
    }

    pub fn base_cells(&self) -> u32 {
        self.radial * self.angular
    }

    pub fn fiber_cells(&self) -> u32 {
        1 << self.fiber_level
    }

    /// Cells of the unit tangent bundle, i.e. position times direction.
    pub fn frame_cells(&self) -> u32 {
        self.base_cells() * self.directions
    }

    pub fn cells(&self) -> u64 {
        u64::from(self.frame_cells()) * u64::from(self.fiber_cells())
    }

    fn validate(&self) -> Result<()> {
        if self.radial == 0 || self.angular == 0 || self.directions == 0 {
            return Err(Error::Precondition { field: "grid", reason: "cell counts must be positive".into() });
        }
        if self.fiber_level > MAX_FIBER_LEVEL {
            return Err(Error::Precondition {
                field: "grid.fiber_level",
                reason: format!("at most {MAX_FIBER_LEVEL}, got {}", self.fiber_level),
            });
        }
        if self.cells() > u64::from(u32::MAX) {
            return Err(Error::Precondition { field: "grid", reason: "more than 2^32 cells".into() });
        }
        Ok(())
    }

    /// Whether every cell of `self` is a union of cells of `fine`.
    pub fn refines_into(&self, fine: &Resolution) -> bool {
        fine.radial.is_multiple_of(self.radial)
            && fine.angular.is_multiple_of(self.angular)
            && fine.directions.is_multiple_of(self.directions)
            && self.fiber_level <= fine.fiber_level
    }
}

/// Native histogram resolution plus the scales of the bounded-Lipschitz
/// distance, each a coarsening of the native one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub native: Resolution,
    pub scales: Vec<Resolution>,
}

/// A decoded cell index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub radial: u32,
    pub angular: u32,
    pub direction: u32,
    pub fiber: u32,
}

impl GridSpec {
    pub fn new(native: Resolution, scales: Vec<Resolution>) -> Result<Self> {
        native.validate()?;
        for s in &scales {
            s.validate()?;
            if !s.refines_into(&native) {
                return Err(Error::Precondition {
                    field: "grid.scales",
                    reason: format!("{s:?} is not a coarsening of {native:?}"),
                });
            }
        }
        Ok(Self { native, scales })
    }

    /// Grid of the bounded-Lipschitz distance. Per-axis counts (position,
    /// direction, fiber) are 2/2/2, 2/4/4 and 4/4/4 at the three scales.
    pub fn bl_default() -> Self {
        Self::new(
            Resolution::new(2, 2, 4, 2),
            vec![Resolution::new(1, 2, 2, 1), Resolution::new(1, 2, 4, 2), Resolution::new(2, 2, 4, 2)],
        )
        .expect("valid default grid")
    }

    /// Joint grid for comparing forward and time-reversed statistics: eight
    /// sectors, eight directions, sixteen fiber cells.
    pub fn comparison_default() -> Self {
        let r = Resolution::new(1, 8, 8, 4);
        Self::new(r, vec![r]).expect("valid comparison grid")
    }

    /// Position-only grid.
    pub fn base_only(radial: u32, angular: u32) -> Result<Self> {
        let r = Resolution::new(radial, angular, 1, 0);
        Self::new(r, vec![r])
    }

    pub fn cells(&self) -> u64 {
        self.native.cells()
    }

    pub fn index(&self, c: Cell) -> u32 {
        let r = &self.native;
        let base = c.radial * r.angular + c.angular;
        ((base * r.directions + c.direction) << r.fiber_level) | c.fiber
    }

    pub fn decode(&self, idx: u32) -> Cell {
        let r = &self.native;
        let fiber = idx & (r.fiber_cells() - 1);
        let frame = idx >> r.fiber_level;
        let direction = frame % r.directions;
        let base = frame / r.directions;
        Cell { radial: base / r.angular, angular: base % r.angular, direction, fiber }
    }

    /// Index of the same cell at a coarser resolution.
    pub fn coarsen(&self, idx: u32, to: &Resolution) -> u32 {
        let r = &self.native;
        let c = self.decode(idx);
        let rad = c.radial / (r.radial / to.radial);
        let ang = c.angular / (r.angular / to.angular);
        let dir = c.direction / (r.directions / to.directions);
        let fib = c.fiber >> (r.fiber_level - to.fiber_level);
        (((rad * to.angular + ang) * to.directions + dir) << to.fiber_level) | fib
    }

    /// Frame-cell part of an index (position and direction, fiber dropped).
    pub fn frame_cell(&self, idx: u32) -> u32 {
        idx >> self.native.fiber_level
    }

    /// Position-only part of an index.
    pub fn base_cell(&self, idx: u32) -> u32 {
        self.frame_cell(idx) / self.native.directions
    }

    pub fn locate(&self, domain: &FundamentalDomain<f64>, frame: &Frame, fiber: &SpherePoint) -> u32 {
        let r = &self.native;
        let (s, alpha) = domain.polar_coordinates(frame.base_point());
        let radial = ((s * f64::from(r.radial)) as u32).min(r.radial - 1);
        let angular = ((alpha / std::f64::consts::TAU * f64::from(r.angular)) as u32).min(r.angular - 1);
        let theta = domain.disk_direction(frame);
        let direction = ((theta / std::f64::consts::TAU * f64::from(r.directions)) as u32).min(r.directions - 1);
        let fiber = fiber_cell(fiber, r.fiber_level);
        self.index(Cell { radial, angular, direction, fiber })
    }
}
