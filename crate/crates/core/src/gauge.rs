//! Gauge transformations of `(psi, phi, A)` and machine verification of
//! gauge-invariance claims.
//!
//! Convention: for `A' = A + grad chi` the spinor acquires the phase
//! `psi' = exp(+ i e chi / (hbar c)) psi`. The sign is not an assumption:
//! it is the unique choice under which the kinetic operator
//! `pi = -i hbar grad - (e/c) A` transforms covariantly
//! (`pi' psi' = phase * pi psi`), and the covariance unit test fails with
//! the opposite sign. Static setting only; `phi` is untouched.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dirac;
use crate::emfield::{EmConfig, GaugeTag};
use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, VectorField};
use crate::grid::{Grid3, PhysicalParams, Scheme};
use crate::stencil;

/// A gauge generator: the scalar function together with its gradient
/// supplied analytically, so gauge-algebra errors are separated from
/// differencing errors.
#[derive(Debug, Clone)]
pub struct GaugeFunction {
    /// Identifier recorded in the transformed configuration's gauge tag.
    pub id: String,
    pub chi: ScalarField,
    /// Analytic gradient of `chi` (not differenced).
    pub grad_chi: VectorField,
}

impl GaugeFunction {
    /// Generic constructor from analytic closures.
    pub fn from_analytic<F, G>(grid: &Grid3, id: &str, chi_fn: F, grad_fn: G) -> Result<GaugeFunction>
    where
        F: Fn([f64; 3]) -> f64 + Sync,
        G: Fn([f64; 3]) -> [f64; 3] + Sync,
    {
        let chi = ScalarField::from_fn(grid.clone(), &chi_fn);
        let grad_chi = VectorField::from_fn(grid.clone(), &grad_fn);
        chi.assert_finite("gauge function")?;
        grad_chi.assert_finite("gauge function gradient")?;
        Ok(GaugeFunction {
            id: id.to_string(),
            chi,
            grad_chi,
        })
    }

    /// Gaussian bump `a exp(-|x - c|^2 / 2 w^2)` with its exact gradient.
    pub fn gaussian_bump(
        grid: &Grid3,
        amplitude: f64,
        center: [f64; 3],
        width: f64,
    ) -> Result<GaugeFunction> {
        if !(width.is_finite() && width > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gauge bump needs finite amplitude and positive width, got a = {amplitude}, w = {width}"
            )));
        }
        let id = format!(
            "bump(a={amplitude:.6},c=({:.6},{:.6},{:.6}),w={width:.6})",
            center[0], center[1], center[2]
        );
        Self::from_analytic(
            grid,
            &id,
            |[x, y, z]| {
                let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2) + (z - center[2]).powi(2);
                amplitude * (-d2 / (2.0 * width * width)).exp()
            },
            |[x, y, z]| {
                let d = [x - center[0], y - center[1], z - center[2]];
                let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                let f = -amplitude * (-d2 / (2.0 * width * width)).exp() / (width * width);
                [f * d[0], f * d[1], f * d[2]]
            },
        )
    }

    /// Peak magnitude of `chi` on the outermost node shell, relative to its
    /// global peak. Gauge functions must be localized: the transformation
    /// is only meaningful where the fields are represented.
    pub fn localization_ratio(&self) -> f64 {
        let grid = self.chi.grid();
        let [nx, ny, nz] = grid.n();
        let data = self.chi.data();
        let mut peak = 0.0f64;
        let mut boundary = 0.0f64;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let v = data[grid.idx(i, j, k)].abs();
                    peak = peak.max(v);
                    if grid.near_boundary(i, j, k, 1) {
                        boundary = boundary.max(v);
                    }
                }
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            boundary / peak
        }
    }

    /// Interior max-norm mismatch between the analytic gradient and the
    /// stencil gradient of `chi`, relative to the analytic peak: a pure
    /// O(h^4) diagnostic separating differencing error from gauge algebra.
    pub fn grad_consistency(&self) -> f64 {
        let grid = self.chi.grid();
        let [nx, ny, nz] = grid.n();
        let inset = stencil::INTERIOR_INSET;
        let mut peak = 0.0f64;
        let mut defect = 0.0f64;
        let grads = [
            stencil::fd4_derivative(grid, self.chi.data(), 0),
            stencil::fd4_derivative(grid, self.chi.data(), 1),
            stencil::fd4_derivative(grid, self.chi.data(), 2),
        ];
        for k in inset..nz - inset {
            for j in inset..ny - inset {
                for i in inset..nx - inset {
                    let idx = grid.idx(i, j, k);
                    let g = self.grad_chi.vec_at(idx);
                    for c in 0..3 {
                        peak = peak.max(g[c].abs());
                        defect = defect.max((grads[c][idx] - g[c]).abs());
                    }
                }
            }
        }
        if peak == 0.0 {
            defect
        } else {
            defect / peak
        }
    }
}

/// Apply the static gauge transformation: `psi' = exp(+i e chi/(hbar c)) psi`,
/// `A' = A + grad chi` (analytic gradient), `phi`, `E`, `B` untouched. The
/// transformed configuration is tagged with the generator id; errors if
/// `chi` is not localized (boundary value above 1e-10 of its peak).
pub fn apply_gauge(
    psi: &SpinorField,
    em: &EmConfig,
    g: &GaugeFunction,
    params: &PhysicalParams,
) -> Result<(SpinorField, EmConfig)> {
    params.validate()?;
    let grid = psi.grid();
    grid.check_same(g.chi.grid(), "gauge transformation")?;
    grid.check_same(em.a.grid(), "gauge transformation")?;
    let loc = g.localization_ratio();
    if loc > 1e-10 {
        return Err(Error::Precondition(format!(
            "gauge function '{}' is not localized: boundary/peak = {loc:.3e} (limit 1e-10)",
            g.id
        )));
    }

    let pref = params.e / (params.hbar * params.c);
    let chi = g.chi.data();
    let mut psi_out = psi.clone();
    for c in 0..4 {
        let comp = psi_out.comp_mut(c);
        for (v, x) in comp.iter_mut().zip(chi) {
            *v *= Complex64::new(0.0, pref * x).exp();
        }
    }

    let a_out = VectorField::linear_comb(1.0, &em.a, 1.0, &g.grad_chi)?;
    let em_out = EmConfig::from_parts(
        em.phi.clone(),
        a_out,
        em.e_long.clone(),
        em.e_trans.clone(),
        em.b.clone(),
        GaugeTag::Transformed {
            chi_id: g.id.clone(),
        },
    )?;
    Ok((psi_out, em_out))
}

/// The four Eq.-(4) terms evaluated in the configuration's own gauge,
/// plus their sum. Used by the scan to compare totals across gauges.
#[derive(Debug, Clone, Serialize)]
pub struct JTotals {
    pub orbital: [f64; 3],
    pub gauge: [f64; 3],
    pub spin: [f64; 3],
    pub field: [f64; 3],
    pub total: [f64; 3],
}

/// Evaluate the four terms for `(psi, em)`.
pub fn j_totals(
    psi: &SpinorField,
    em: &EmConfig,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<JTotals> {
    let orbital = dirac::orbital_term(psi, params, scheme)?.value;
    let gauge = dirac::gauge_term(psi, &em.a, params)?;
    let spin = dirac::spin_term(psi, params);
    let e_total = VectorField::linear_comb(1.0, &em.e_long, 1.0, &em.e_trans)?;
    let field = crate::emfield::field_j_total(&e_total, &em.b, params)?;
    let mut total = [0.0; 3];
    for c in 0..3 {
        total[c] = orbital[c] + gauge[c] + spin[c] + field[c];
    }
    Ok(JTotals {
        orbital,
        gauge,
        spin,
        field,
        total,
    })
}

/// One gauge-scan trial: the bump parameters, the per-term shifts, and the
/// deviation of the total.
#[derive(Debug, Clone, Serialize)]
pub struct GaugeTrial {
    pub amplitude: f64,
    pub center: [f64; 3],
    pub width: f64,
    /// `after - before` for (orbital, gauge, spin, field).
    pub term_shifts: [[f64; 3]; 4],
    /// Max-norm of `total_after - total_before` in units of hbar.
    pub total_deviation: f64,
}

/// Scan report: all trials plus the worst total deviation.
#[derive(Debug, Clone, Serialize)]
pub struct GaugeScanReport {
    pub seed: u64,
    pub n_trials: usize,
    pub trials: Vec<GaugeTrial>,
    pub max_total_deviation: f64,
}

/// Bump parameter ranges for the seeded generator. Amplitudes are kept
/// small enough that the phase stays well resolved on 64-point grids and
/// centers stay deep inside the field support.
pub const SCAN_AMPLITUDE_RANGE: (f64, f64) = (-0.10, 0.10);
pub const SCAN_WIDTH_RANGE: (f64, f64) = (0.90, 1.05);
pub const SCAN_CENTER_RANGE: (f64, f64) = (-0.5, 0.5);

/// Run `n_trials` random-bump gauge transformations (ChaCha8 stream seeded
/// by `seed`; draw order per trial: amplitude, width, cx, cy, cz) and
/// report how far the Eq.-(4) total moves. Individual terms shift — only
/// the total and the orbital+gauge pair are gauge invariant.
pub fn gauge_scan(
    psi: &SpinorField,
    em: &EmConfig,
    params: &PhysicalParams,
    n_trials: usize,
    seed: u64,
) -> Result<GaugeScanReport> {
    let before = j_totals(psi, em, params, Scheme::Fd4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(n_trials);
    let mut max_dev = 0.0f64;
    for _ in 0..n_trials {
        let amplitude = rng.gen_range(SCAN_AMPLITUDE_RANGE.0..=SCAN_AMPLITUDE_RANGE.1);
        let width = rng.gen_range(SCAN_WIDTH_RANGE.0..=SCAN_WIDTH_RANGE.1);
        let center = [
            rng.gen_range(SCAN_CENTER_RANGE.0..=SCAN_CENTER_RANGE.1),
            rng.gen_range(SCAN_CENTER_RANGE.0..=SCAN_CENTER_RANGE.1),
            rng.gen_range(SCAN_CENTER_RANGE.0..=SCAN_CENTER_RANGE.1),
        ];
        let g = GaugeFunction::gaussian_bump(psi.grid(), amplitude, center, width)?;
        let (psi_t, em_t) = apply_gauge(psi, em, &g, params)?;
        let after = j_totals(&psi_t, &em_t, params, Scheme::Fd4)?;
        let mut dev = 0.0f64;
        for c in 0..3 {
            dev = dev.max((after.total[c] - before.total[c]).abs());
        }
        dev /= params.hbar;
        max_dev = max_dev.max(dev);
        let shift = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        trials.push(GaugeTrial {
            amplitude,
            center,
            width,
            term_shifts: [
                shift(after.orbital, before.orbital),
                shift(after.gauge, before.gauge),
                shift(after.spin, before.spin),
                shift(after.field, before.field),
            ],
            total_deviation: dev,
        });
    }
    Ok(GaugeScanReport {
        seed,
        n_trials,
        trials,
        max_total_deviation: max_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{self, Scenario};

    fn params() -> PhysicalParams {
        PhysicalParams::natural(-1.0)
    }

    fn static_config(psi: &SpinorField, p: &PhysicalParams) -> EmConfig {
        let d = dirac::densities(psi, p).unwrap();
        EmConfig::coulomb_from_sources(&d.rho, Some(&d.j), p).unwrap()
    }

    fn test_state(n: usize) -> (SpinorField, PhysicalParams) {
        let g = Grid3::cube(n, 8.0).unwrap();
        let p = params();
        let psi = scenario::generate(
            &"gaussian-spin-up".parse::<Scenario>().unwrap(),
            &g,
            &p,
        )
        .unwrap();
        (psi, p)
    }

    #[test]
    fn zero_chi_is_identity() {
        let (psi, p) = test_state(16);
        let em = static_config(&psi, &p);
        let g = GaugeFunction::gaussian_bump(psi.grid(), 0.0, [0.0; 3], 1.0).unwrap();
        let (psi_t, em_t) = apply_gauge(&psi, &em, &g, &p).unwrap();
        for c in 0..4 {
            assert_eq!(psi.comp(c), psi_t.comp(c));
        }
        for c in 0..3 {
            assert_eq!(em.a.comp(c), em_t.a.comp(c));
        }
        match &em_t.gauge_tag {
            GaugeTag::Transformed { chi_id } => assert!(chi_id.starts_with("bump(")),
            _ => panic!("transformed tag expected"),
        }
    }

    #[test]
    fn zero_coupling_shifts_potential_only() {
        let g = Grid3::cube(16, 8.0).unwrap();
        let p0 = PhysicalParams::natural(0.0);
        let psi = scenario::generate(
            &"gaussian-spin-up".parse::<Scenario>().unwrap(),
            &g,
            &p0,
        )
        .unwrap();
        let em = EmConfig::coulomb_from_sources(
            &ScalarField::zeros(g.clone()),
            None,
            &p0,
        )
        .unwrap();
        let gf = GaugeFunction::gaussian_bump(&g, 0.07, [0.2, -0.1, 0.0], 1.0).unwrap();
        let (psi_t, em_t) = apply_gauge(&psi, &em, &gf, &p0).unwrap();
        for c in 0..4 {
            assert_eq!(psi.comp(c), psi_t.comp(c), "e = 0 must leave psi alone");
        }
        let mut moved = 0.0f64;
        for c in 0..3 {
            for i in 0..g.len() {
                moved = moved
                    .max((em_t.a.comp(c)[i] - em.a.comp(c)[i] - gf.grad_chi.comp(c)[i]).abs());
            }
        }
        assert!(moved < 1e-15, "A shift should equal grad chi exactly");
    }

    #[test]
    fn densities_are_pointwise_gauge_invariant() {
        let (psi, p) = test_state(20);
        let em = static_config(&psi, &p);
        let gf = GaugeFunction::gaussian_bump(psi.grid(), 0.09, [0.3, 0.1, -0.2], 1.0).unwrap();
        let (psi_t, _) = apply_gauge(&psi, &em, &gf, &p).unwrap();
        let before = dirac::densities(&psi, &p).unwrap();
        let after = dirac::densities(&psi_t, &p).unwrap();
        for i in 0..psi.grid().len() {
            assert!((before.rho.data()[i] - after.rho.data()[i]).abs() < 1e-12);
            for c in 0..3 {
                assert!((before.j.comp(c)[i] - after.j.comp(c)[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kinetic_operator_is_covariant_with_plus_sign() {
        // H' psi' = phase * H psi when psi' = exp(+i e chi/(hbar c)) psi:
        // the mass and potential terms commute with the phase exactly, so
        // the defect isolates the kinetic O(h^4) differencing error of the
        // phase product. The opposite sign convention leaves an O(1)
        // defect — checked too.
        let (psi, p) = test_state(32);
        let grid = psi.grid().clone();
        let em = static_config(&psi, &p);
        let gf = GaugeFunction::gaussian_bump(&grid, 0.08, [0.2, -0.3, 0.1], 1.0).unwrap();
        let (psi_t, em_t) = apply_gauge(&psi, &em, &gf, &p).unwrap();

        let h_before =
            dirac::apply_h(&psi, Some(&em.phi), Some(&em.a), &p, Scheme::Fd4).unwrap();
        let h_after =
            dirac::apply_h(&psi_t, Some(&em_t.phi), Some(&em_t.a), &p, Scheme::Fd4).unwrap();

        let pref = p.e / (p.hbar * p.c);
        let chi = gf.chi.data();
        let mut defect2 = 0.0f64;
        let mut base2 = 0.0f64;
        for c in 0..4 {
            let hb = h_before.comp(c);
            let ha = h_after.comp(c);
            for i in 0..grid.len() {
                let phase = Complex64::new(0.0, pref * chi[i]).exp();
                defect2 += (ha[i] - phase * hb[i]).norm_sqr();
                base2 += hb[i].norm_sqr();
            }
        }
        // h^4 times 5th-derivative structure of the sigma = 1 state gives
        // ~1.5e-3 at h = 0.5; the 64^3 bound of 1e-3 (16x refinement) is
        // checked in the heavy property suite.
        let rel = (defect2 / base2).sqrt();
        assert!(rel < 5e-3, "covariance defect {rel} at 32^3");

        // Wrong sign: order-unity violation.
        let mut psi_wrong = psi.clone();
        for c in 0..4 {
            let comp = psi_wrong.comp_mut(c);
            for (v, x) in comp.iter_mut().zip(chi) {
                *v *= Complex64::new(0.0, -pref * x).exp();
            }
        }
        let h_wrong =
            dirac::apply_h(&psi_wrong, Some(&em_t.phi), Some(&em_t.a), &p, Scheme::Fd4).unwrap();
        let mut wrong2 = 0.0f64;
        for c in 0..4 {
            let hb = h_before.comp(c);
            let hw = h_wrong.comp(c);
            for i in 0..grid.len() {
                let phase = Complex64::new(0.0, -pref * chi[i]).exp();
                wrong2 += (hw[i] - phase * hb[i]).norm_sqr();
            }
        }
        let rel_wrong = (wrong2 / base2).sqrt();
        assert!(
            rel_wrong > 10.0 * rel && rel_wrong > 1e-2,
            "sign discrimination too weak: {rel_wrong} vs {rel}"
        );
    }

    #[test]
    fn composition_of_gauges_matches_sum() {
        let (psi, p) = test_state(16);
        let em = static_config(&psi, &p);
        let g1 = GaugeFunction::gaussian_bump(psi.grid(), 0.06, [0.3, 0.0, -0.1], 1.0).unwrap();
        let g2 = GaugeFunction::gaussian_bump(psi.grid(), -0.04, [-0.2, 0.4, 0.2], 0.95).unwrap();
        let (psi_a, em_a) = apply_gauge(&psi, &em, &g1, &p).unwrap();
        let (psi_ab, em_ab) = apply_gauge(&psi_a, &em_a, &g2, &p).unwrap();

        let chi_sum = ScalarField::linear_comb(1.0, &g1.chi, 1.0, &g2.chi).unwrap();
        let grad_sum = VectorField::linear_comb(1.0, &g1.grad_chi, 1.0, &g2.grad_chi).unwrap();
        let g12 = GaugeFunction {
            id: "sum".to_string(),
            chi: chi_sum,
            grad_chi: grad_sum,
        };
        let (psi_s, em_s) = apply_gauge(&psi, &em, &g12, &p).unwrap();
        for c in 0..4 {
            for i in 0..psi.grid().len() {
                assert!(
                    (psi_ab.comp(c)[i] - psi_s.comp(c)[i]).norm() < 1e-12,
                    "spinor composition"
                );
            }
        }
        for c in 0..3 {
            for i in 0..psi.grid().len() {
                assert!(
                    (em_ab.a.comp(c)[i] - em_s.a.comp(c)[i]).abs() < 1e-12,
                    "potential composition"
                );
            }
        }
    }

    #[test]
    fn delocalized_chi_is_rejected() {
        let (psi, p) = test_state(16);
        let em = static_config(&psi, &p);
        let wide = GaugeFunction::gaussian_bump(psi.grid(), 0.1, [0.0; 3], 6.0).unwrap();
        let err = apply_gauge(&psi, &em, &wide, &p).unwrap_err();
        assert!(err.to_string().contains("not localized"));
    }

    #[test]
    fn grad_consistency_refines_at_fourth_order() {
        let coarse = Grid3::cube(16, 6.0).unwrap();
        let fine = Grid3::cube(32, 6.0).unwrap();
        let gc = GaugeFunction::gaussian_bump(&coarse, 0.1, [0.2, 0.0, -0.1], 1.0).unwrap();
        let gfi = GaugeFunction::gaussian_bump(&fine, 0.1, [0.2, 0.0, -0.1], 1.0).unwrap();
        let (ec, ef) = (gc.grad_consistency(), gfi.grad_consistency());
        let ratio = ec / ef;
        assert!(
            (10.0..30.0).contains(&ratio),
            "expected ~16x refinement, got {ec} -> {ef} (ratio {ratio})"
        );
    }

    #[test]
    fn scan_empty_and_zero_coupling() {
        let g = Grid3::cube(16, 8.0).unwrap();
        let p0 = PhysicalParams::natural(0.0);
        let psi = scenario::generate(
            &"gaussian-spin-up".parse::<Scenario>().unwrap(),
            &g,
            &p0,
        )
        .unwrap();
        let em = EmConfig::coulomb_from_sources(&ScalarField::zeros(g.clone()), None, &p0).unwrap();
        let empty = gauge_scan(&psi, &em, &p0, 0, 42).unwrap();
        assert!(empty.trials.is_empty());
        assert_eq!(empty.max_total_deviation, 0.0);

        let rep = gauge_scan(&psi, &em, &p0, 3, 42).unwrap();
        assert!(
            rep.max_total_deviation < 1e-13,
            "e = 0 scan moved J by {}",
            rep.max_total_deviation
        );
    }

    #[test]
    fn scan_total_j_is_gauge_invariant() {
        // Torus state: its probability density is anisotropic, so the
        // orbital and gauge terms genuinely move under off-center bumps
        // (for an isotropic density the product centroid lies along the
        // bump center and every per-term shift integrates to zero).
        let g = Grid3::cube(32, 8.0).unwrap();
        let p = params();
        let psi = scenario::generate(
            &"torus-m1-spin-up".parse::<Scenario>().unwrap(),
            &g,
            &p,
        )
        .unwrap();
        let em = static_config(&psi, &p);
        let rep = gauge_scan(&psi, &em, &p, 3, 42).unwrap();
        assert_eq!(rep.n_trials, 3);
        // O(h^4) covariance error at h = 0.5; the 64^3 bound of 1e-3 hbar
        // is checked in the heavy property suite.
        assert!(
            rep.max_total_deviation < 1e-4,
            "max deviation {}",
            rep.max_total_deviation
        );
        // Individual terms must move (the invariance is of the total):
        // the gauge term shift is first order in the bump amplitude.
        let moved = rep
            .trials
            .iter()
            .any(|t| t.term_shifts[1].iter().any(|v| v.abs() > 1e-8));
        assert!(moved, "per-term shifts should be visible");
    }
}
