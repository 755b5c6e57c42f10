//! Electromagnetic angular- and linear-momentum integrals: the total field
//! term, the bound part by two independent routes, and the radiative
//! remainder with its transverse-gauge spin/orbital split.
//!
//! All prefactors are Gaussian: `(1/4 pi c) integral x cross (E cross B)`
//! for the field angular momentum and `(1/c) integral rho x cross A_t` for
//! its bound part. Transversality gates compare the interior L2 norm of a
//! divergence against the interior L2 norm of the field itself; the two are
//! commensurable because the laboratory works at order-unity feature
//! scales.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{Grid3, PhysicalParams};
use crate::helmholtz::{self, interior_l2, interior_l2_vec};
use crate::reduce;
use crate::stencil::{self, INTERIOR_INSET};

/// Which gauge a field configuration is expressed in. Bound-part formulas
/// are gauge-specific, so the tag travels with the fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GaugeTag {
    /// Transverse (Coulomb) gauge: `div A = 0`.
    Coulomb,
    /// Gauge-transformed by the named generator; bound-part formulas do
    /// not apply.
    Transformed { chi_id: String },
}

/// A static electromagnetic configuration with its derived fields and
/// consistency diagnostics.
#[derive(Debug, Clone)]
pub struct EmConfig {
    /// Scalar potential.
    pub phi: ScalarField,
    /// Vector potential (transverse in the `Coulomb` tag).
    pub a: VectorField,
    /// Longitudinal (Coulomb) electric field `-grad phi`.
    pub e_long: VectorField,
    /// Transverse electric field (zero for static configurations).
    pub e_trans: VectorField,
    /// Magnetic field.
    pub b: VectorField,
    pub gauge_tag: GaugeTag,
    /// Interior relative L2 mismatch between the stencil curl of `a` and
    /// `b` — pure discretization for spectrally consistent pairs.
    pub curl_consistency: f64,
    /// Interior relative L2 of `div a` against `|a|`.
    pub div_a_interior: f64,
}

impl EmConfig {
    /// Build the static Coulomb-gauge configuration sourced by a charge
    /// density and (optionally) a current density: `phi` and `E_long` from
    /// the `1/r` convolution, `A` and `B` from the current via the
    /// free-space Biot–Savart route. `E_trans` is zero (statics).
    pub fn coulomb_from_sources(
        rho: &ScalarField,
        j: Option<&VectorField>,
        params: &PhysicalParams,
    ) -> Result<EmConfig> {
        params.validate()?;
        let grid = rho.grid().clone();
        if let Some(jv) = j {
            grid.check_same(jv.grid(), "EM sources")?;
        }
        let eng = helmholtz::engine(&grid)?;
        let (phi, e_long) = eng.coulomb_field(rho)?;
        let (a, b) = match j {
            Some(jv) => eng.vector_potential_from_current(jv, params.c)?,
            None => (VectorField::zeros(grid.clone()), VectorField::zeros(grid.clone())),
        };
        Self::assemble(phi, a, e_long, VectorField::zeros(grid), b, GaugeTag::Coulomb)
    }

    /// Wrap externally supplied fields, computing the consistency
    /// diagnostics.
    pub fn from_parts(
        phi: ScalarField,
        a: VectorField,
        e_long: VectorField,
        e_trans: VectorField,
        b: VectorField,
        gauge_tag: GaugeTag,
    ) -> Result<EmConfig> {
        Self::assemble(phi, a, e_long, e_trans, b, gauge_tag)
    }

    fn assemble(
        phi: ScalarField,
        a: VectorField,
        e_long: VectorField,
        e_trans: VectorField,
        b: VectorField,
        gauge_tag: GaugeTag,
    ) -> Result<EmConfig> {
        let grid = phi.grid().clone();
        for (f, what) in [
            (&a, "vector potential"),
            (&e_long, "longitudinal field"),
            (&e_trans, "transverse field"),
            (&b, "magnetic field"),
        ] {
            grid.check_same(f.grid(), "EM configuration")?;
            f.assert_finite(what)?;
        }
        phi.assert_finite("scalar potential")?;

        let b_norm = interior_l2_vec(&grid, &b, INTERIOR_INSET);
        let curl_consistency = if b_norm > 0.0 {
            let curl_a = stencil::curl(&a);
            let diff = VectorField::linear_comb(1.0, &curl_a, -1.0, &b)?;
            interior_l2_vec(&grid, &diff, INTERIOR_INSET) / b_norm
        } else {
            0.0
        };
        let a_norm = interior_l2_vec(&grid, &a, INTERIOR_INSET);
        let div_a_interior = if a_norm > 0.0 {
            let div = stencil::divergence(&a);
            interior_l2(&grid, div.data(), INTERIOR_INSET) / a_norm
        } else {
            0.0
        };
        Ok(EmConfig {
            phi,
            a,
            e_long,
            e_trans,
            b,
            gauge_tag,
            curl_consistency,
            div_a_interior,
        })
    }

    /// Gauss-law consistency of the longitudinal field against a source.
    pub fn gauss_check(&self, rho: &ScalarField) -> Result<helmholtz::GaussCheck> {
        helmholtz::gauss_check(rho, &self.e_long)
    }

    /// Error unless this configuration is tagged (and measured) transverse.
    pub fn require_coulomb(&self, context: &str) -> Result<()> {
        match &self.gauge_tag {
            GaugeTag::Coulomb => Ok(()),
            GaugeTag::Transformed { chi_id } => Err(Error::Precondition(format!(
                "{context} requires the Coulomb gauge but the configuration is \
                 tagged transformed({chi_id})"
            ))),
        }
    }
}

/// The field angular momentum and its decomposition. `radiative` is
/// defined as `total - bound_from_fields` and the boundary residual as
/// `radiative - rad_spin - rad_orbital`, so the two splits hold exactly by
/// construction; the physics question is whether the residual is small.
#[derive(Debug, Clone, Serialize)]
pub struct FieldAngularMomentum {
    pub total: [f64; 3],
    pub bound_from_fields: [f64; 3],
    pub bound_from_rho_at: [f64; 3],
    pub radiative: [f64; 3],
    pub rad_spin: [f64; 3],
    pub rad_orbital: [f64; 3],
    pub rad_boundary_residual: [f64; 3],
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Interior relative divergence gate shared by the transverse-only
/// integrals.
fn require_transverse(v: &VectorField, what: &str) -> Result<()> {
    v.assert_finite(what)?;
    let grid = v.grid();
    let norm = interior_l2_vec(grid, v, INTERIOR_INSET);
    if norm == 0.0 {
        return Ok(());
    }
    let div = stencil::divergence(v);
    let rel = interior_l2(grid, div.data(), INTERIOR_INSET) / norm;
    if rel > 1e-2 {
        return Err(Error::Precondition(format!(
            "{what} is not transverse: interior |div| / |field| = {rel:.3e} (limit 1e-2)"
        )));
    }
    Ok(())
}

/// `(1/4 pi c) integral x cross (E cross B) dV`.
pub fn field_j_total(e: &VectorField, b: &VectorField, params: &PhysicalParams) -> Result<[f64; 3]> {
    e.grid().check_same(b.grid(), "field angular momentum")?;
    e.assert_finite("electric field")?;
    b.assert_finite("magnetic field")?;
    let grid = e.grid();
    let [nx, ny, _] = grid.n();
    let s = reduce::sum3(grid.len(), |idx| {
        let ev = e.vec_at(idx);
        let bv = b.vec_at(idx);
        let p = [
            ev[1] * bv[2] - ev[2] * bv[1],
            ev[2] * bv[0] - ev[0] * bv[2],
            ev[0] * bv[1] - ev[1] * bv[0],
        ];
        let i = idx % nx;
        let j = (idx / nx) % ny;
        let k = idx / (nx * ny);
        let r = grid.position(i, j, k);
        [
            r[1] * p[2] - r[2] * p[1],
            r[2] * p[0] - r[0] * p[2],
            r[0] * p[1] - r[1] * p[0],
        ]
    });
    let w = grid.cell_volume() / (4.0 * std::f64::consts::PI * params.c);
    Ok([s[0] * w, s[1] * w, s[2] * w])
}

/// `(1/c) integral rho x cross A_t dV` — the bound part in the form that
/// follows from the Coulomb-gauge identity. Gauge-specific: errors when
/// `A_t` is measurably non-transverse.
pub fn field_j_bound(
    rho: &ScalarField,
    a_t: &VectorField,
    params: &PhysicalParams,
) -> Result<[f64; 3]> {
    rho.grid().check_same(a_t.grid(), "bound angular momentum")?;
    rho.assert_finite("charge density")?;
    require_transverse(a_t, "bound-term vector potential")?;
    let grid = rho.grid();
    let [nx, ny, _] = grid.n();
    let rd = rho.data();
    let s = reduce::sum3(grid.len(), |idx| {
        let av = a_t.vec_at(idx);
        let i = idx % nx;
        let j = (idx / nx) % ny;
        let k = idx / (nx * ny);
        let r = grid.position(i, j, k);
        let f = rd[idx];
        [
            f * (r[1] * av[2] - r[2] * av[1]),
            f * (r[2] * av[0] - r[0] * av[2]),
            f * (r[0] * av[1] - r[1] * av[0]),
        ]
    });
    let w = grid.cell_volume() / params.c;
    Ok([s[0] * w, s[1] * w, s[2] * w])
}

/// `(1/4 pi c) integral x cross (E_long cross B) dV` — the bound part
/// computed purely from fields. Equality with [`field_j_bound`] (within
/// quadrature error) is the discrete form of the bound-field identity.
pub fn field_j_bound_from_fields(
    e_long: &VectorField,
    b: &VectorField,
    params: &PhysicalParams,
) -> Result<[f64; 3]> {
    field_j_total(e_long, b, params)
}

/// Transverse-gauge split of the radiative part:
/// `rad_spin = (1/4 pi c) integral E_trans cross A_t`,
/// `rad_orbital = (1/4 pi c) integral sum_i E_trans,i (x cross grad) A_t,i`.
/// Both inputs must be transverse for the split to be meaningful.
pub fn field_j_radiative_split(
    e_trans: &VectorField,
    a_t: &VectorField,
    params: &PhysicalParams,
) -> Result<([f64; 3], [f64; 3])> {
    e_trans.grid().check_same(a_t.grid(), "radiative split")?;
    require_transverse(e_trans, "radiative-split transverse field")?;
    require_transverse(a_t, "radiative-split vector potential")?;
    let grid = e_trans.grid();
    let [nx, ny, _] = grid.n();
    let w = grid.cell_volume() / (4.0 * std::f64::consts::PI * params.c);

    let s = reduce::sum3(grid.len(), |idx| {
        let ev = e_trans.vec_at(idx);
        let av = a_t.vec_at(idx);
        [
            ev[1] * av[2] - ev[2] * av[1],
            ev[2] * av[0] - ev[0] * av[2],
            ev[0] * av[1] - ev[1] * av[0],
        ]
    });
    let rad_spin = [s[0] * w, s[1] * w, s[2] * w];

    let mut rad_orbital = [0.0; 3];
    for comp in 0..3 {
        let ec = e_trans.comp(comp);
        let d = [
            stencil::fd4_derivative(grid, a_t.comp(comp), 0),
            stencil::fd4_derivative(grid, a_t.comp(comp), 1),
            stencil::fd4_derivative(grid, a_t.comp(comp), 2),
        ];
        let s = reduce::sum3(grid.len(), |idx| {
            let i = idx % nx;
            let j = (idx / nx) % ny;
            let k = idx / (nx * ny);
            let r = grid.position(i, j, k);
            let g = [d[0][idx], d[1][idx], d[2][idx]];
            let f = ec[idx];
            [
                f * (r[1] * g[2] - r[2] * g[1]),
                f * (r[2] * g[0] - r[0] * g[2]),
                f * (r[0] * g[1] - r[1] * g[0]),
            ]
        });
        for c in 0..3 {
            rad_orbital[c] += s[c] * w;
        }
    }
    Ok((rad_spin, rad_orbital))
}

/// `(1/4 pi c) integral E cross B dV` — the field linear momentum.
pub fn field_p_total(e: &VectorField, b: &VectorField, params: &PhysicalParams) -> Result<[f64; 3]> {
    e.grid().check_same(b.grid(), "field momentum")?;
    e.assert_finite("electric field")?;
    b.assert_finite("magnetic field")?;
    let grid = e.grid();
    let s = reduce::sum3(grid.len(), |idx| {
        let ev = e.vec_at(idx);
        let bv = b.vec_at(idx);
        [
            ev[1] * bv[2] - ev[2] * bv[1],
            ev[2] * bv[0] - ev[0] * bv[2],
            ev[0] * bv[1] - ev[1] * bv[0],
        ]
    });
    let w = grid.cell_volume() / (4.0 * std::f64::consts::PI * params.c);
    Ok([s[0] * w, s[1] * w, s[2] * w])
}

/// `(1/c) integral rho A_t dV` — the bound linear momentum.
pub fn field_p_bound(
    rho: &ScalarField,
    a_t: &VectorField,
    params: &PhysicalParams,
) -> Result<[f64; 3]> {
    rho.grid().check_same(a_t.grid(), "bound momentum")?;
    rho.assert_finite("charge density")?;
    require_transverse(a_t, "bound-momentum vector potential")?;
    let grid = rho.grid();
    let rd = rho.data();
    let s = reduce::sum3(grid.len(), |idx| {
        let av = a_t.vec_at(idx);
        [rd[idx] * av[0], rd[idx] * av[1], rd[idx] * av[2]]
    });
    let w = grid.cell_volume() / params.c;
    Ok([s[0] * w, s[1] * w, s[2] * w])
}

/// Assemble the full [`FieldAngularMomentum`] for a source + configuration.
pub fn angular_momentum(
    rho: &ScalarField,
    cfg: &EmConfig,
    params: &PhysicalParams,
) -> Result<FieldAngularMomentum> {
    let e_total = VectorField::linear_comb(1.0, &cfg.e_long, 1.0, &cfg.e_trans)?;
    let total = field_j_total(&e_total, &cfg.b, params)?;
    let bound_from_fields = field_j_bound_from_fields(&cfg.e_long, &cfg.b, params)?;
    let bound_from_rho_at = field_j_bound(rho, &cfg.a, params)?;
    let radiative = sub3(total, bound_from_fields);
    let (rad_spin, rad_orbital) = if cfg.e_trans.max_norm() == 0.0 {
        ([0.0; 3], [0.0; 3])
    } else {
        field_j_radiative_split(&cfg.e_trans, &cfg.a, params)?
    };
    let rad_boundary_residual = sub3(sub3(radiative, rad_spin), rad_orbital);
    Ok(FieldAngularMomentum {
        total,
        bound_from_fields,
        bound_from_rho_at,
        radiative,
        rad_spin,
        rad_orbital,
        rad_boundary_residual,
    })
}

/// Generators for the localized charge/current configurations used by the
/// cross-route identity tests. All are analytic, solenoidal where they
/// must be, and engineered to decay fast enough that box-truncation tails
/// shrink monotonically over the standard refinement ladder.
pub mod catalog {
    use super::*;

    /// Gaussian bump `exp(-|x - c|^2 / 2 s^2)`.
    pub fn gaussian(grid: &Grid3, center: [f64; 3], s: f64) -> ScalarField {
        ScalarField::from_fn(grid.clone(), |[x, y, z]| {
            let d = [x - center[0], y - center[1], z - center[2]];
            (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (2.0 * s * s)).exp()
        })
    }

    /// Magnetization current `curl(m g) = grad g cross m` of a Gaussian
    /// magnetization blob: exactly divergence-free, zero net moment flux.
    pub fn magnetization_current(
        grid: &Grid3,
        m: [f64; 3],
        center: [f64; 3],
        s: f64,
    ) -> VectorField {
        VectorField::from_fn(grid.clone(), |[x, y, z]| {
            let d = [x - center[0], y - center[1], z - center[2]];
            let g = (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (2.0 * s * s)).exp();
            let f = -g / (s * s);
            let gr = [f * d[0], f * d[1], f * d[2]];
            [
                gr[1] * m[2] - gr[2] * m[1],
                gr[2] * m[0] - gr[0] * m[2],
                gr[0] * m[1] - gr[1] * m[0],
            ]
        })
    }

    /// Triple of magnetization currents `+m at +d, -2m at 0, +m at -d`:
    /// kills both the net moment and the quadrupole, giving the far field
    /// an extra power of decay for clean refinement ladders.
    pub fn magnetization_triple(
        grid: &Grid3,
        m: [f64; 3],
        d: [f64; 3],
        s: f64,
    ) -> VectorField {
        let plus = magnetization_current(grid, m, d, s);
        let minus = magnetization_current(grid, m, [-d[0], -d[1], -d[2]], s);
        let center = magnetization_current(grid, m, [0.0, 0.0, 0.0], s);
        let mut out = VectorField::linear_comb(1.0, &plus, 1.0, &minus).expect("same grid");
        out = VectorField::linear_comb(1.0, &out, -2.0, &center).expect("same grid");
        out
    }

    /// Analytic magnetic field of the compact loop `A0 = m cross (x - c) g`:
    /// `B = curl A0 = 2 m g - (g/s^2) (m |d|^2 - d (m.d))`, exactly
    /// solenoidal and Gaussian-localized.
    pub fn compact_loop_b(grid: &Grid3, m: [f64; 3], center: [f64; 3], s: f64) -> VectorField {
        VectorField::from_fn(grid.clone(), |[x, y, z]| {
            let d = [x - center[0], y - center[1], z - center[2]];
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let g = (-d2 / (2.0 * s * s)).exp();
            let mdotd = m[0] * d[0] + m[1] * d[1] + m[2] * d[2];
            [
                2.0 * m[0] * g - g / (s * s) * (m[0] * d2 - d[0] * mdotd),
                2.0 * m[1] * g - g / (s * s) * (m[1] * d2 - d[1] * mdotd),
                2.0 * m[2] * g - g / (s * s) * (m[2] * d2 - d[2] * mdotd),
            ]
        })
    }

    /// Named cross-route test configurations (charge density plus either a
    /// current density or an analytic magnetic field), all on `L = 10`
    /// boxes in the frozen ladder `n = 48, 64, 96`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum P1Config {
        /// Unit Gaussian charge + octupole-engineered current triple.
        ChargeMtriple,
        /// Unit Gaussian charge + compact-loop analytic B.
        ChargeCompactloop,
        /// Charge-neutral Gaussian pair + compact-loop analytic B.
        PairCompactloop,
    }

    impl P1Config {
        pub const ALL: [P1Config; 3] = [
            P1Config::ChargeMtriple,
            P1Config::ChargeCompactloop,
            P1Config::PairCompactloop,
        ];

        pub fn name(self) -> &'static str {
            match self {
                P1Config::ChargeMtriple => "charge-mtriple",
                P1Config::ChargeCompactloop => "charge-compactloop",
                P1Config::PairCompactloop => "pair-compactloop",
            }
        }

        /// Box half-width all three configurations are tuned for.
        pub const HALF_WIDTH: f64 = 10.0;

        /// The charge density and either a current (`ChargeMtriple`) or an
        /// analytic solenoidal B field (the compact-loop pair).
        pub fn sources(self, grid: &Grid3) -> Result<(ScalarField, SourceKind)> {
            match self {
                P1Config::ChargeMtriple => {
                    let mut rho = gaussian(grid, [0.4, 0.0, 0.0], 1.1);
                    let q = rho.integrate()?;
                    rho.scale(1.0 / q);
                    let j = magnetization_triple(grid, [0.9, 0.0, 0.5], [0.0, 0.8, 0.8], 1.0);
                    Ok((rho, SourceKind::Current(j)))
                }
                P1Config::ChargeCompactloop => {
                    let mut rho = gaussian(grid, [0.0, -0.3, 0.5], 1.1);
                    let q = rho.integrate()?;
                    rho.scale(1.0 / q);
                    let b = compact_loop_b(grid, [0.4, 0.0, 0.9], [0.5, 0.4, -0.2], 1.0);
                    Ok((rho, SourceKind::MagneticField(b)))
                }
                P1Config::PairCompactloop => {
                    let plus = gaussian(grid, [0.0, 0.3, 0.6], 1.0);
                    let minus = gaussian(grid, [0.0, -0.3, -0.6], 1.0);
                    let rho = ScalarField::linear_comb(1.0, &plus, -1.0, &minus)?;
                    let b = compact_loop_b(grid, [0.7, 0.0, 0.7], [0.6, 0.0, 0.0], 1.0);
                    Ok((rho, SourceKind::MagneticField(b)))
                }
            }
        }
    }

    /// How the magnetic side of a catalog configuration is specified.
    #[derive(Debug, Clone)]
    pub enum SourceKind {
        Current(VectorField),
        MagneticField(VectorField),
    }

    /// Both routes to the bound angular and linear momentum for a catalog
    /// configuration at resolution `n`, plus the relative route gaps.
    #[derive(Debug, Clone)]
    pub struct RouteComparison {
        pub j_from_fields: [f64; 3],
        pub j_from_rho_at: [f64; 3],
        pub p_from_fields: [f64; 3],
        pub p_from_rho_at: [f64; 3],
        pub rel_j: f64,
        pub rel_p: f64,
    }

    /// Run one catalog configuration through both routes.
    pub fn compare_routes(
        config: P1Config,
        n: usize,
        params: &PhysicalParams,
    ) -> Result<RouteComparison> {
        let grid = Grid3::cube(n, P1Config::HALF_WIDTH)?;
        let (rho, kind) = config.sources(&grid)?;
        let eng = helmholtz::engine(&grid)?;
        let (_, e_long) = eng.coulomb_field(&rho)?;
        let (a_t, b) = match kind {
            SourceKind::Current(j) => eng.vector_potential_from_current(&j, params.c)?,
            SourceKind::MagneticField(b) => {
                let a_t = helmholtz::vector_potential_from_b(&eng, &b)?;
                (a_t, b)
            }
        };
        let j_from_fields = field_j_bound_from_fields(&e_long, &b, params)?;
        let j_from_rho_at = field_j_bound(&rho, &a_t, params)?;
        let p_from_fields = field_p_total(&e_long, &b, params)?;
        let p_from_rho_at = field_p_bound(&rho, &a_t, params)?;
        let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let rel_j = norm(sub3(j_from_fields, j_from_rho_at)) / norm(j_from_rho_at).max(1e-300);
        let rel_p = norm(sub3(p_from_fields, p_from_rho_at)) / norm(p_from_rho_at).max(1e-300);
        Ok(RouteComparison {
            j_from_fields,
            j_from_rho_at,
            p_from_fields,
            p_from_rho_at,
            rel_j,
            rel_p,
        })
    }
}
