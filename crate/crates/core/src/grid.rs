//! Uniform Cartesian grids and physical parameters.
//!
//! All fields in this crate live on a [`Grid3`]: a rectangular box sampled
//! at `n = [nx, ny, nz]` nodes with spacings `h = [hx, hy, hz]` and node
//! positions `origin[a] + i * h[a]` along each axis. Storage order is fixed
//! once and for all — component slowest, then `z`, then `y`, then `x`
//! fastest — so a scalar node `(i, j, k)` sits at linear index
//! `(k * ny + j) * nx + i`. Every routine in the crate relies on this
//! layout; it is part of the on-disk format as well.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of nodes per axis. Fourth-order stencils need four
/// neighbours, and boxes smaller than this cannot localize anything anyway.
pub const MIN_NODES: usize = 8;

/// A uniform rectangular grid in three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    n: [usize; 3],
    h: [f64; 3],
    origin: [f64; 3],
}

impl Grid3 {
    /// General constructor. Each axis needs at least [`MIN_NODES`] nodes,
    /// strictly positive finite spacing, and a finite origin.
    pub fn new(n: [usize; 3], h: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if n[a] < MIN_NODES {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: {} nodes < minimum {MIN_NODES}",
                    n[a]
                )));
            }
            if !(h[a].is_finite() && h[a] > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: spacing {} must be finite and positive",
                    h[a]
                )));
            }
            if !origin[a].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: origin {} must be finite",
                    origin[a]
                )));
            }
        }
        Ok(Grid3 { n, h, origin })
    }

    /// Cubic box of half-width `half_width` centred on the origin with `n`
    /// nodes per axis. Nodes are placed at cell centres,
    /// `x_i = -L + (i + 1/2) h` with `h = 2L/n`, so no node sits exactly on
    /// the boundary or at the centre — the layout used throughout the
    /// acceptance runs.
    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width {half_width} must be finite and positive"
            )));
        }
        let h = 2.0 * half_width / n as f64;
        let o = -half_width + 0.5 * h;
        Grid3::new([n; 3], [h; 3], [o; 3])
    }

    /// Nodes per axis.
    #[inline]
    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    /// Spacing per axis.
    #[inline]
    pub fn h(&self) -> [f64; 3] {
        self.h
    }

    /// Position of node 0 per axis.
    #[inline]
    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    /// Total number of nodes.
    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    /// Grids are never empty (constructors enforce `n >= 8`).
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell, the quadrature weight of every node.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1] * self.h[2]
    }

    /// Linear index of node `(i, j, k)`; `x` fastest, `z` slowest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n[1] + j) * self.n[0] + i
    }

    /// Inverse of [`Grid3::idx`].
    #[inline]
    pub fn node(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.n[0];
        let j = (idx / self.n[0]) % self.n[1];
        let k = idx / (self.n[0] * self.n[1]);
        (i, j, k)
    }

    /// Physical coordinate of index `i` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.h[axis]
    }

    /// Position vector of node `(i, j, k)`.
    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    /// True if the node lies within `inset` cells of any face.
    #[inline]
    pub fn near_boundary(&self, i: usize, j: usize, k: usize, inset: usize) -> bool {
        i < inset
            || j < inset
            || k < inset
            || i >= self.n[0] - inset
            || j >= self.n[1] - inset
            || k >= self.n[2] - inset
    }

    /// Half-extent of the box along each axis, `n h / 2`. For grids built
    /// with [`Grid3::cube`] this returns the original half-width exactly up
    /// to rounding.
    pub fn half_widths(&self) -> [f64; 3] {
        [
            0.5 * self.n[0] as f64 * self.h[0],
            0.5 * self.n[1] as f64 * self.h[1],
            0.5 * self.n[2] as f64 * self.h[2],
        ]
    }

    /// Error unless `other` is the same grid (shape, spacing, origin).
    pub fn check_same(&self, other: &Grid3, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {:?}/{:?}/{:?} vs {:?}/{:?}/{:?}",
                self.n, self.h, self.origin, other.n, other.h, other.origin
            )))
        }
    }
}

/// Spatial derivative scheme for the Dirac operators.
///
/// `Fd4` is the default: centred fourth-order finite differences with the
/// field treated as zero outside the box, appropriate for localized states.
/// `Spectral` differentiates via the FFT and is exact for periodic data
/// such as plane waves, but wraps around the box — use it only when the
/// state is genuinely periodic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fd4,
    Spectral,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::Fd4
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd4" => Ok(Scheme::Fd4),
            "spectral" => Ok(Scheme::Spectral),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme '{other}' (expected 'fd4' or 'spectral')"
            ))),
        }
    }
}

/// Physical constants of a run. The laboratory works in natural units
/// (`hbar = c = m = 1`) with Gaussian electromagnetic conventions
/// (`div E = 4 pi rho`); the constants are still threaded through every
/// formula so the unit dependence stays visible and testable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Fermion mass.
    pub m: f64,
    /// Coupling charge carried by the fermion (electron: `e = -1` in units
    /// of the elementary charge).
    pub e: f64,
    /// Reduced Planck constant.
    pub hbar: f64,
    /// Speed of light.
    pub c: f64,
}

impl PhysicalParams {
    /// Natural units with the given coupling.
    pub fn natural(e: f64) -> Self {
        PhysicalParams {
            m: 1.0,
            e,
            hbar: 1.0,
            c: 1.0,
        }
    }

    /// Inverse reduced Compton wavelength `m c / hbar`, the only length
    /// scale the free Dirac operator owns.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.m * self.c / self.hbar
    }

    /// Reject non-finite or non-positive structural constants.
    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::InvalidParameter(format!("mass {} must be positive", self.m)));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar {} must be positive",
                self.hbar
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("c {} must be positive", self.c)));
        }
        if !self.e.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling {} must be finite", self.e)));
        }
        Ok(())
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams::natural(-1.0)
    }
}
