//! Field containers: real/complex scalars, real 3-vectors, Dirac spinors.
//!
//! All containers share the node layout of [`Grid3`] (`x` fastest, `z`
//! slowest) and store multi-component data component-slowest, i.e. each
//! component is one contiguous block. Quadrature is the midpoint rule:
//! `integral f = sum_nodes f * hx hy hz`, which for smooth localized fields
//! converges superalgebraically and is exactly linear in the integrand.
//! Integration refuses non-finite data and names the first offending node,
//! because a single NaN silently poisons every downstream identity check.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::reduce;

/// Locate the first non-finite entry, if any.
pub(crate) fn find_non_finite(v: &[f64]) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

pub(crate) fn find_non_finite_c(v: &[Complex64]) -> Option<usize> {
    v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite()))
}

fn non_finite_error(grid: &Grid3, what: &str, component: Option<usize>, idx: usize) -> Error {
    let (i, j, k) = grid.node(idx);
    let [x, y, z] = grid.position(i, j, k);
    let comp = component.map_or(String::new(), |c| format!(" component {c}"));
    Error::NonFinite(format!(
        "{what}{comp} at node ({i}, {j}, {k}) = ({x:.6}, {y:.6}, {z:.6})"
    ))
}

/// Real scalar field on a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid3) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            data: vec![0.0; n],
        }
    }

    /// Fill from a function of position, parallel over z-slabs.
    pub fn from_fn<F>(grid: Grid3, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        let [nx, ny, _] = grid.n();
        let mut data = vec![0.0; grid.len()];
        data.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
            let z = grid.coord(2, k);
            for j in 0..ny {
                let y = grid.coord(1, j);
                for i in 0..nx {
                    slab[j * nx + i] = f([grid.coord(0, i), y, z]);
                }
            }
        });
        ScalarField { grid, data }
    }

    pub fn from_vec(grid: Grid3, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "scalar data length {} but grid has {} nodes",
                data.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.idx(i, j, k)]
    }

    /// Midpoint-rule integral over the box. Errors on non-finite data,
    /// identifying the first offending node.
    pub fn integrate(&self) -> Result<f64> {
        let s = reduce::sum_slice(&self.data);
        if !s.is_finite() {
            return Err(match find_non_finite(&self.data) {
                Some(idx) => non_finite_error(&self.grid, "scalar field", None, idx),
                None => Error::NonFinite("scalar integral overflowed".into()),
            });
        }
        Ok(s * self.grid.cell_volume())
    }

    pub fn assert_finite(&self, what: &str) -> Result<()> {
        match find_non_finite(&self.data) {
            Some(idx) => Err(non_finite_error(&self.grid, what, None, idx)),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `a * fa + b * fb` on a shared grid.
    pub fn linear_comb(a: f64, fa: &ScalarField, b: f64, fb: &ScalarField) -> Result<ScalarField> {
        fa.grid.check_same(&fb.grid, "scalar linear combination")?;
        let data = fa
            .data
            .iter()
            .zip(&fb.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(ScalarField {
            grid: fa.grid.clone(),
            data,
        })
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.data {
            *x *= a;
        }
    }
}

/// Complex scalar field (used for serialized spectral data and scalar
/// moments; spinors carry their own container).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalarField {
    grid: Grid3,
    data: Vec<Complex64>,
}

impl ComplexScalarField {
    pub fn zeros(grid: Grid3) -> Self {
        let n = grid.len();
        ComplexScalarField {
            grid,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_vec(grid: Grid3, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "complex scalar data length {} but grid has {} nodes",
                data.len(),
                grid.len()
            )));
        }
        Ok(ComplexScalarField { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn integrate(&self) -> Result<Complex64> {
        let s: Complex64 = reduce::sum(self.data.len(), |i| self.data[i]);
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(match find_non_finite_c(&self.data) {
                Some(idx) => non_finite_error(&self.grid, "complex scalar field", None, idx),
                None => Error::NonFinite("complex scalar integral overflowed".into()),
            });
        }
        Ok(s * self.grid.cell_volume())
    }
}

/// Real 3-vector field; each Cartesian component is a contiguous block.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid3,
    data: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid3) -> Self {
        let n = grid.len();
        VectorField {
            grid,
            data: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    /// Fill from a function of position returning the vector value.
    pub fn from_fn<F>(grid: Grid3, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync,
    {
        let [nx, ny, _] = grid.n();
        let nxy = nx * ny;
        let mut data = [
            vec![0.0; grid.len()],
            vec![0.0; grid.len()],
            vec![0.0; grid.len()],
        ];
        let (d0, rest) = data.split_at_mut(1);
        let (d1, d2) = rest.split_at_mut(1);
        d0[0]
            .par_chunks_mut(nxy)
            .zip(d1[0].par_chunks_mut(nxy))
            .zip(d2[0].par_chunks_mut(nxy))
            .enumerate()
            .for_each(|(k, ((s0, s1), s2))| {
                let z = grid.coord(2, k);
                for j in 0..ny {
                    let y = grid.coord(1, j);
                    for i in 0..nx {
                        let v = f([grid.coord(0, i), y, z]);
                        s0[j * nx + i] = v[0];
                        s1[j * nx + i] = v[1];
                        s2[j * nx + i] = v[2];
                    }
                }
            });
        VectorField { grid, data }
    }

    pub fn from_components(grid: Grid3, data: [Vec<f64>; 3]) -> Result<Self> {
        for (c, comp) in data.iter().enumerate() {
            if comp.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "vector component {c} length {} but grid has {} nodes",
                    comp.len(),
                    grid.len()
                )));
            }
        }
        Ok(VectorField { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[f64] {
        &self.data[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c]
    }

    /// Mutable access to all three components at once.
    #[inline]
    pub fn comps_mut(&mut self) -> [&mut [f64]; 3] {
        let [a, b, c] = &mut self.data;
        [a, b, c]
    }

    #[inline]
    pub fn at(&self, c: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[c][self.grid.idx(i, j, k)]
    }

    /// Vector value at a flat node index.
    #[inline]
    pub fn vec_at(&self, idx: usize) -> [f64; 3] {
        [self.data[0][idx], self.data[1][idx], self.data[2][idx]]
    }

    pub fn assert_finite(&self, what: &str) -> Result<()> {
        for c in 0..3 {
            if let Some(idx) = find_non_finite(&self.data[c]) {
                return Err(non_finite_error(&self.grid, what, Some(c), idx));
            }
        }
        Ok(())
    }

    /// Componentwise integral.
    pub fn integrate(&self) -> Result<[f64; 3]> {
        self.assert_finite("vector field")?;
        let s = reduce::sum3(self.grid.len(), |i| self.vec_at(i));
        Ok([
            s[0] * self.grid.cell_volume(),
            s[1] * self.grid.cell_volume(),
            s[2] * self.grid.cell_volume(),
        ])
    }

    /// `sqrt(integral |v|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let s = reduce::sum(self.grid.len(), |i| {
            let v = self.vec_at(i);
            v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        });
        (s * self.grid.cell_volume()).sqrt()
    }

    /// Largest pointwise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for idx in 0..self.grid.len() {
            let v = self.vec_at(idx);
            m = m.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
        }
        m
    }

    /// `a * fa + b * fb` on a shared grid.
    pub fn linear_comb(a: f64, fa: &VectorField, b: f64, fb: &VectorField) -> Result<VectorField> {
        fa.grid.check_same(&fb.grid, "vector linear combination")?;
        let mut out = VectorField::zeros(fa.grid.clone());
        for c in 0..3 {
            for (o, (x, y)) in out.data[c]
                .iter_mut()
                .zip(fa.data[c].iter().zip(&fb.data[c]))
            {
                *o = a * x + b * y;
            }
        }
        Ok(out)
    }

    pub fn scale(&mut self, a: f64) {
        for c in 0..3 {
            for x in &mut self.data[c] {
                *x *= a;
            }
        }
    }
}

/// Four-component Dirac spinor field in the Dirac–Pauli representation:
/// components 0, 1 are the upper (large) pair, 2, 3 the lower (small) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid3,
    data: [Vec<Complex64>; 4],
}

impl SpinorField {
    pub fn zeros(grid: Grid3) -> Self {
        let n = grid.len();
        let z = Complex64::new(0.0, 0.0);
        SpinorField {
            grid,
            data: [vec![z; n], vec![z; n], vec![z; n], vec![z; n]],
        }
    }

    /// Fill from a function of position returning the four components.
    pub fn from_fn<F>(grid: Grid3, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [Complex64; 4] + Sync,
    {
        let [nx, ny, nz] = grid.n();
        let nxy = nx * ny;
        let mut out = SpinorField::zeros(grid.clone());
        // Split the four component vectors so rayon can hand each z-slab a
        // disjoint mutable window of all of them.
        let [d0, d1, d2, d3] = &mut out.data;
        let slabs: Vec<(usize, (&mut [Complex64], &mut [Complex64], &mut [Complex64], &mut [Complex64]))> = d0
            .chunks_mut(nxy)
            .zip(d1.chunks_mut(nxy))
            .zip(d2.chunks_mut(nxy))
            .zip(d3.chunks_mut(nxy))
            .enumerate()
            .map(|(k, (((a, b), c), d))| (k, (a, b, c, d)))
            .collect();
        slabs.into_par_iter().for_each(|(k, (s0, s1, s2, s3))| {
            let z = grid.coord(2, k);
            for j in 0..ny {
                let y = grid.coord(1, j);
                for i in 0..nx {
                    let v = f([grid.coord(0, i), y, z]);
                    s0[j * nx + i] = v[0];
                    s1[j * nx + i] = v[1];
                    s2[j * nx + i] = v[2];
                    s3[j * nx + i] = v[3];
                }
            }
        });
        debug_assert_eq!(out.data[0].len(), nxy * nz);
        out
    }

    pub fn from_components(grid: Grid3, data: [Vec<Complex64>; 4]) -> Result<Self> {
        for (c, comp) in data.iter().enumerate() {
            if comp.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "spinor component {c} length {} but grid has {} nodes",
                    comp.len(),
                    grid.len()
                )));
            }
        }
        Ok(SpinorField { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.data[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c]
    }

    /// Spinor value at a flat node index.
    #[inline]
    pub fn spinor_at(&self, idx: usize) -> [Complex64; 4] {
        [
            self.data[0][idx],
            self.data[1][idx],
            self.data[2][idx],
            self.data[3][idx],
        ]
    }

    pub fn assert_finite(&self, what: &str) -> Result<()> {
        for c in 0..4 {
            if let Some(idx) = find_non_finite_c(&self.data[c]) {
                return Err(non_finite_error(&self.grid, what, Some(c), idx));
            }
        }
        Ok(())
    }

    /// `integral psi^dagger psi` — the squared L2 norm.
    pub fn norm_sq(&self) -> f64 {
        let s = reduce::sum(self.grid.len(), |i| {
            let p = self.spinor_at(i);
            p[0].norm_sqr() + p[1].norm_sqr() + p[2].norm_sqr() + p[3].norm_sqr()
        });
        s * self.grid.cell_volume()
    }

    /// `integral phi^dagger psi`.
    pub fn inner(&self, other: &SpinorField) -> Result<Complex64> {
        self.grid.check_same(&other.grid, "spinor inner product")?;
        let s: Complex64 = reduce::sum(self.grid.len(), |i| {
            let a = self.spinor_at(i);
            let b = other.spinor_at(i);
            a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2] + a[3].conj() * b[3]
        });
        Ok(s * self.grid.cell_volume())
    }

    /// Rescale to unit norm; errors if the field is identically zero.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Precondition(format!(
                "cannot normalize spinor with norm^2 = {n}"
            )));
        }
        let s = n.sqrt().recip();
        self.scale(Complex64::new(s, 0.0));
        Ok(())
    }

    pub fn scale(&mut self, a: Complex64) {
        for c in 0..4 {
            for x in &mut self.data[c] {
                *x *= a;
            }
        }
    }

    /// `a * fa + b * fb` on a shared grid.
    pub fn linear_comb(
        a: Complex64,
        fa: &SpinorField,
        b: Complex64,
        fb: &SpinorField,
    ) -> Result<SpinorField> {
        fa.grid.check_same(&fb.grid, "spinor linear combination")?;
        let mut out = SpinorField::zeros(fa.grid.clone());
        for c in 0..4 {
            for (o, (x, y)) in out.data[c]
                .iter_mut()
                .zip(fa.data[c].iter().zip(&fb.data[c]))
            {
                *o = a * x + b * y;
            }
        }
        Ok(out)
    }
}
