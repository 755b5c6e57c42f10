//! Free-space spectral operators via Hockney domain doubling.
//!
//! Open-boundary convolutions against the `1/r` kernel (Coulomb potential,
//! Biot–Savart vector potential) are computed exactly — up to FFT rounding
//! — by embedding the physical box at the corner of a grid doubled along
//! every axis, so the circular convolution never wraps physical data into
//! physical data. The kernel is sampled on the padded grid at the circular
//! distance; its singular cell carries the analytic cell average of `1/r`
//! (closed form below), which keeps the quadrature consistent with the
//! midpoint rule used everywhere else.
//!
//! The same padded spectra drive an exact Leray projection
//! `v_t = v - k (k.v)/k^2`, the Helmholtz split used by the gauge and
//! decomposition layers. All wavenumbers follow the standard DFT layout
//! (frequencies `0..m/2-1, -m/2..-1`, Nyquist negative); nothing is zeroed.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid3;

/// Analytic mean of `1/r` over a cell `[-hx/2,hx/2] x ... x [-hz/2,hz/2]`.
///
/// The antiderivative `F` below satisfies `d^3F/dx dy dz = 1/r` and
/// vanishes whenever a coordinate is zero, so the cell integral is
/// `8 F(hx/2, hy/2, hz/2)` by symmetry. Using the exact average for the
/// singular node makes the discrete kernel the *cell-averaged* Green's
/// function at the origin instead of an arbitrary regularization.
pub fn cell_average_1r(h: [f64; 3]) -> f64 {
    fn f(x: f64, y: f64, z: f64) -> f64 {
        let r = (x * x + y * y + z * z).sqrt();
        y * z * (x / (y * y + z * z).sqrt()).asinh()
            + x * z * (y / (x * x + z * z).sqrt()).asinh()
            + x * y * (z / (x * x + y * y).sqrt()).asinh()
            - 0.5 * x * x * (y * z / (x * r)).atan()
            - 0.5 * y * y * (x * z / (y * r)).atan()
            - 0.5 * z * z * (x * y / (z * r)).atan()
    }
    8.0 * f(0.5 * h[0], 0.5 * h[1], 0.5 * h[2]) / (h[0] * h[1] * h[2])
}

/// Apply an FFT to every 1D line of `data` along `axis`.
/// Lines are independent, so slab-parallelism cannot change the result.
fn fft_lines(dims: [usize; 3], data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let [mx, my, mz] = dims;
    match axis {
        0 => {
            data.par_chunks_mut(mx * my).for_each(|slab| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(slab, &mut scratch);
            });
        }
        1 => {
            data.par_chunks_mut(mx * my).for_each(|slab| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                let mut line = vec![Complex64::new(0.0, 0.0); my];
                for i in 0..mx {
                    for j in 0..my {
                        line[j] = slab[j * mx + i];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for j in 0..my {
                        slab[j * mx + i] = line[j];
                    }
                }
            });
        }
        _ => {
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            let mut line = vec![Complex64::new(0.0, 0.0); mz];
            let stride = mx * my;
            for j in 0..my {
                for i in 0..mx {
                    let base = j * mx + i;
                    for k in 0..mz {
                        line[k] = data[k * stride + base];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for k in 0..mz {
                        data[k * stride + base] = line[k];
                    }
                }
            }
        }
    }
}

/// DFT wavenumbers for a periodic axis of `m` nodes spaced `h`:
/// `k_i = (2 pi / (m h)) * f_i` with `f_i = i` for `i < m/2`, `i - m` above.
fn wavenumbers(m: usize, h: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (m as f64 * h);
    (0..m)
        .map(|i| {
            let f = if i < m.div_ceil(2) {
                i as isize
            } else {
                i as isize - m as isize
            };
            scale * f as f64
        })
        .collect()
}

/// Free-space convolution and projection engine for one grid.
///
/// Construction performs one padded-domain FFT to tabulate the `1/r`
/// kernel spectrum; the engine is then reused for every spectral operation
/// on that grid. All methods take `&self` and allocate their own work
/// buffers, so an engine can be shared.
pub struct FreeSpaceEngine {
    grid: Grid3,
    m: [usize; 3],
    k: [Vec<f64>; 3],
    /// Real part of the kernel spectrum; the kernel is symmetric so the
    /// imaginary part is pure rounding noise.
    ghat: Vec<f64>,
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl FreeSpaceEngine {
    pub fn new(grid: &Grid3) -> Self {
        let n = grid.n();
        let h = grid.h();
        let m = [2 * n[0], 2 * n[1], 2 * n[2]];
        let mut planner = FftPlanner::<f64>::new();
        let fwd = [
            planner.plan_fft_forward(m[0]),
            planner.plan_fft_forward(m[1]),
            planner.plan_fft_forward(m[2]),
        ];
        let inv = [
            planner.plan_fft_inverse(m[0]),
            planner.plan_fft_inverse(m[1]),
            planner.plan_fft_inverse(m[2]),
        ];
        let k = [
            wavenumbers(m[0], h[0]),
            wavenumbers(m[1], h[1]),
            wavenumbers(m[2], h[2]),
        ];

        // Kernel sampled at the circular distance: along each axis the
        // separation is `idx` cells for idx <= n and `idx - m` beyond, so
        // every physical pair sees its true distance.
        let dist = |axis: usize, idx: usize| -> f64 {
            let d = if idx <= n[axis] {
                idx as isize
            } else {
                idx as isize - m[axis] as isize
            };
            d as f64 * h[axis]
        };
        let mut g = vec![Complex64::new(0.0, 0.0); m[0] * m[1] * m[2]];
        g.par_chunks_mut(m[0] * m[1])
            .enumerate()
            .for_each(|(kz, slab)| {
                let dz = dist(2, kz);
                for jy in 0..m[1] {
                    let dy = dist(1, jy);
                    for ix in 0..m[0] {
                        let dx = dist(0, ix);
                        let r2 = dx * dx + dy * dy + dz * dz;
                        slab[jy * m[0] + ix] = if r2 == 0.0 {
                            Complex64::new(cell_average_1r(h), 0.0)
                        } else {
                            Complex64::new(r2.sqrt().recip(), 0.0)
                        };
                    }
                }
            });
        for axis in 0..3 {
            fft_lines(m, &mut g, axis, &fwd[axis]);
        }
        let ghat = g.iter().map(|z| z.re).collect();

        FreeSpaceEngine {
            grid: grid.clone(),
            m,
            k,
            ghat,
            fwd,
            inv,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    fn padded_len(&self) -> usize {
        self.m[0] * self.m[1] * self.m[2]
    }

    /// Embed physical data at the corner of the padded box and transform.
    fn pad_forward(&self, src: &[f64]) -> Vec<Complex64> {
        let [nx, ny, nz] = self.grid.n();
        let [mx, my, _] = self.m;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.padded_len()];
        for k in 0..nz {
            for j in 0..ny {
                let s = (k * ny + j) * nx;
                let d = (k * my + j) * mx;
                for i in 0..nx {
                    buf[d + i] = Complex64::new(src[s + i], 0.0);
                }
            }
        }
        for axis in 0..3 {
            fft_lines(self.m, &mut buf, axis, &self.fwd[axis]);
        }
        buf
    }

    /// Inverse transform, normalize, crop to the physical box, take Re.
    fn inverse_crop(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        for axis in 0..3 {
            fft_lines(self.m, &mut buf, axis, &self.inv[axis]);
        }
        let [nx, ny, nz] = self.grid.n();
        let [mx, my, _] = self.m;
        let norm = 1.0 / self.padded_len() as f64;
        let mut out = vec![0.0; self.grid.len()];
        for k in 0..nz {
            for j in 0..ny {
                let s = (k * my + j) * mx;
                let d = (k * ny + j) * nx;
                for i in 0..nx {
                    out[d + i] = buf[s + i].re * norm;
                }
            }
        }
        out
    }

    #[inline]
    fn kvec(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.k[0][i], self.k[1][j], self.k[2][k]]
    }

    /// Visit every padded spectral node: `f(linear_index, [kx, ky, kz])`.
    fn for_each_mode<F: FnMut(usize, [f64; 3])>(&self, mut f: F) {
        let [mx, my, mz] = self.m;
        for kk in 0..mz {
            for jj in 0..my {
                let base = (kk * my + jj) * mx;
                for ii in 0..mx {
                    f(base + ii, self.kvec(ii, jj, kk));
                }
            }
        }
    }

    /// `(G * f) h^3` with `G = 1/r`: the Newtonian potential of density
    /// `f`, i.e. `out(x) = sum_nodes f(x') / |x - x'| * cell_volume`.
    pub fn convolve_1r(&self, f: &ScalarField) -> Result<ScalarField> {
        self.grid.check_same(f.grid(), "free-space convolution")?;
        f.assert_finite("convolution input")?;
        let mut fh = self.pad_forward(f.data());
        let hv = self.grid.cell_volume();
        for (z, g) in fh.iter_mut().zip(&self.ghat) {
            *z *= g * hv;
        }
        ScalarField::from_vec(self.grid.clone(), self.inverse_crop(fh))
    }

    /// Coulomb potential and longitudinal field of a charge density, in
    /// Gaussian units: `phi = rho * 1/r`, `E = -grad phi`, so
    /// `div E = 4 pi rho`. The gradient is applied spectrally on the
    /// padded domain (`E_hat = -i k phi_hat`), which keeps `E` curl-free
    /// to machine precision.
    pub fn coulomb_field(&self, rho: &ScalarField) -> Result<(ScalarField, VectorField)> {
        self.grid.check_same(rho.grid(), "coulomb field")?;
        rho.assert_finite("charge density")?;
        let mut rh = self.pad_forward(rho.data());
        let hv = self.grid.cell_volume();
        for (z, g) in rh.iter_mut().zip(&self.ghat) {
            *z *= g * hv;
        }
        // rh now holds phi_hat on the padded domain.
        let mut e = VectorField::zeros(self.grid.clone());
        for c in 0..3 {
            let mut eh = rh.clone();
            self.for_each_mode(|idx, k| {
                // -i k_c phi_hat
                eh[idx] *= Complex64::new(0.0, -k[c]);
            });
            e.comp_mut(c).copy_from_slice(&self.inverse_crop(eh));
        }
        let phi = ScalarField::from_vec(self.grid.clone(), self.inverse_crop(rh))?;
        Ok((phi, e))
    }

    /// Transverse (divergence-free) part of `v` by exact Leray projection
    /// on the padded domain: `v_t_hat = v_hat - k (k . v_hat) / k^2`.
    /// The zero mode is left untouched; localized fields carry no mean.
    pub fn project_transverse(&self, v: &VectorField) -> Result<VectorField> {
        self.grid.check_same(v.grid(), "transverse projection")?;
        v.assert_finite("projection input")?;
        let mut vh = [
            self.pad_forward(v.comp(0)),
            self.pad_forward(v.comp(1)),
            self.pad_forward(v.comp(2)),
        ];
        self.leray_in_place(&mut vh);
        let mut out = VectorField::zeros(self.grid.clone());
        for c in 0..3 {
            let buf = std::mem::take(&mut vh[c]);
            out.comp_mut(c).copy_from_slice(&self.inverse_crop(buf));
        }
        Ok(out)
    }

    fn leray_in_place(&self, vh: &mut [Vec<Complex64>; 3]) {
        let [mx, my, mz] = self.m;
        for kk in 0..mz {
            for jj in 0..my {
                let base = (kk * my + jj) * mx;
                for ii in 0..mx {
                    let k = self.kvec(ii, jj, kk);
                    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    if k2 == 0.0 {
                        continue;
                    }
                    let idx = base + ii;
                    let kdotv =
                        vh[0][idx] * k[0] + vh[1][idx] * k[1] + vh[2][idx] * k[2];
                    let s = kdotv / k2;
                    vh[0][idx] -= s * k[0];
                    vh[1][idx] -= s * k[1];
                    vh[2][idx] -= s * k[2];
                }
            }
        }
    }

    /// Transverse vector potential reproducing a given (divergence-free)
    /// magnetic field: `A_t_hat = (1/4pi) i k x (G_hat B_hat) h^3`, the
    /// spectral form of the Biot–Savart inversion of `B = curl A`.
    /// The caller is responsible for checking `div B` beforehand.
    pub fn vector_potential_from_b(&self, b: &VectorField) -> Result<VectorField> {
        self.grid.check_same(b.grid(), "vector potential from B")?;
        b.assert_finite("magnetic field")?;
        let bh = [
            self.pad_forward(b.comp(0)),
            self.pad_forward(b.comp(1)),
            self.pad_forward(b.comp(2)),
        ];
        let hv = self.grid.cell_volume();
        let pref = hv / (4.0 * std::f64::consts::PI);
        let mut out = VectorField::zeros(self.grid.clone());
        for c in 0..3 {
            let (a1, a2) = ((c + 1) % 3, (c + 2) % 3);
            let mut ah = vec![Complex64::new(0.0, 0.0); self.padded_len()];
            self.for_each_mode(|idx, k| {
                let cross = bh[a2][idx] * k[a1] - bh[a1][idx] * k[a2];
                ah[idx] = Complex64::new(0.0, pref * self.ghat[idx]) * cross;
            });
            out.comp_mut(c).copy_from_slice(&self.inverse_crop(ah));
        }
        Ok(out)
    }

    /// Transverse vector potential and magnetic field generated by a
    /// current density, in Gaussian units with the Coulomb-gauge
    /// convention `A = (1/c) j * (1/r)` projected transverse and
    /// `B = curl A`. The curl is taken on the *unprojected* potential —
    /// identical to the curl of the transverse part, since the
    /// longitudinal piece is a pure gradient.
    pub fn vector_potential_from_current(
        &self,
        j: &VectorField,
        c_light: f64,
    ) -> Result<(VectorField, VectorField)> {
        self.grid.check_same(j.grid(), "vector potential from current")?;
        j.assert_finite("current density")?;
        let hv = self.grid.cell_volume();
        let mut ah = [
            self.pad_forward(j.comp(0)),
            self.pad_forward(j.comp(1)),
            self.pad_forward(j.comp(2)),
        ];
        for comp in ah.iter_mut() {
            for (z, g) in comp.iter_mut().zip(&self.ghat) {
                *z *= g * hv / c_light;
            }
        }
        // B before the projection touches ah.
        let mut b = VectorField::zeros(self.grid.clone());
        for c in 0..3 {
            let (a1, a2) = ((c + 1) % 3, (c + 2) % 3);
            let mut bh = vec![Complex64::new(0.0, 0.0); self.padded_len()];
            self.for_each_mode(|idx, k| {
                bh[idx] = Complex64::new(0.0, 1.0) * (ah[a2][idx] * k[a1] - ah[a1][idx] * k[a2]);
            });
            b.comp_mut(c).copy_from_slice(&self.inverse_crop(bh));
        }
        self.leray_in_place(&mut ah);
        let mut at = VectorField::zeros(self.grid.clone());
        for c in 0..3 {
            let buf = std::mem::take(&mut ah[c]);
            at.comp_mut(c).copy_from_slice(&self.inverse_crop(buf));
        }
        Ok((at, b))
    }
}

/// Spectral (periodic) derivative of complex data along one axis of the
/// *physical* grid. Exact for band-limited periodic data such as plane
/// waves; wraps around the box, so only use it when periodicity is real.
pub fn periodic_derivative(grid: &Grid3, data: &[Complex64], axis: usize) -> Vec<Complex64> {
    assert_eq!(data.len(), grid.len(), "data does not match grid");
    let n = grid.n();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n[axis]);
    let inv = planner.plan_fft_inverse(n[axis]);
    let k = wavenumbers(n[axis], grid.h()[axis]);
    let mut buf = data.to_vec();
    fft_lines(n, &mut buf, axis, &fwd);
    let [nx, ny, nz] = n;
    let norm = 1.0 / n[axis] as f64;
    for kk in 0..nz {
        for jj in 0..ny {
            for ii in 0..nx {
                let f = [ii, jj, kk][axis];
                let idx = (kk * ny + jj) * nx + ii;
                buf[idx] *= Complex64::new(0.0, k[f] * norm);
            }
        }
    }
    fft_lines(n, &mut buf, axis, &inv);
    buf
}
