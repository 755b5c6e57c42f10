//! The catalog of named spinor configurations used as test data across the
//! crate and exposed through the CLI.
//!
//! Every generator returns a unit-norm spinor. Localized states carry
//! exact lowest-order small components (so they are good approximate
//! positive-energy states), and the plane wave carries the exact free-Dirac
//! amplitude `u(p)` with its momentum snapped to the box-periodic lattice
//! so spectral derivatives act on it exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::grid::{Grid3, PhysicalParams};

/// Helicity label for the plane-wave scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }
}

/// Default width of the Gaussian scenarios.
pub const DEFAULT_SIGMA_GAUSSIAN: f64 = 1.0;
/// Default width of the circulating (torus) scenarios. Slightly wider than
/// the Gaussian default so the `r_perp` prefactor stays well resolved.
pub const DEFAULT_SIGMA_TORUS: f64 = 1.2;
/// Default plane-wave momentum before lattice snapping.
pub const DEFAULT_MOMENTUM: [f64; 3] = [0.0, 0.0, 0.5];

/// A named spinor configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// Spherical Gaussian, spin up, with exact lowest-order small
    /// components: an approximate positive-energy rest state.
    GaussianSpinUp { sigma: f64 },
    /// Same envelope, spin down.
    GaussianSpinDown { sigma: f64 },
    /// Circulating packet `(x + i y) exp(-r^2 / 2 sigma^2)`, spin up,
    /// upper component only: an exact `J_z = 3/2 hbar` eigenstate.
    TorusM1SpinUp { sigma: f64 },
    /// Exact free-Dirac plane wave `u(p) exp(i p.x / hbar)`; `p` is snapped
    /// to the periodic lattice of the target grid at generation time.
    PlaneWave { p: [f64; 3], helicity: Helicity },
    /// `(psi_{m=+1} + psi_{m=-1}) / sqrt(2)` of torus packets: zero net
    /// circulation.
    Superposition { sigma: f64 },
}

/// Names accepted by [`Scenario::from_str`] / the CLI, in catalog order.
pub const CATALOG: [&str; 5] = [
    "gaussian-spin-up",
    "gaussian-spin-down",
    "torus-m1-spin-up",
    "plane-wave",
    "superposition",
];

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-spin-up" => Ok(Scenario::GaussianSpinUp {
                sigma: DEFAULT_SIGMA_GAUSSIAN,
            }),
            "gaussian-spin-down" => Ok(Scenario::GaussianSpinDown {
                sigma: DEFAULT_SIGMA_GAUSSIAN,
            }),
            "torus-m1-spin-up" => Ok(Scenario::TorusM1SpinUp {
                sigma: DEFAULT_SIGMA_TORUS,
            }),
            "plane-wave" => Ok(Scenario::PlaneWave {
                p: DEFAULT_MOMENTUM,
                helicity: Helicity::Plus,
            }),
            "superposition" => Ok(Scenario::Superposition {
                sigma: DEFAULT_SIGMA_TORUS,
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown scenario '{other}'; catalog: {}",
                CATALOG.join(", ")
            ))),
        }
    }
}

impl Scenario {
    /// Canonical name as listed in [`CATALOG`].
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::GaussianSpinUp { .. } => CATALOG[0],
            Scenario::GaussianSpinDown { .. } => CATALOG[1],
            Scenario::TorusM1SpinUp { .. } => CATALOG[2],
            Scenario::PlaneWave { .. } => CATALOG[3],
            Scenario::Superposition { .. } => CATALOG[4],
        }
    }
}

/// Snap a momentum onto the box-periodic lattice of `grid`: each component
/// becomes `hbar * 2 pi * n_i / (box length)` for the nearest integer
/// `n_i`, so `exp(i p.x / hbar)` is exactly periodic over the grid and the
/// spectral derivative of the plane wave is exact.
pub fn snapped_momentum(p: [f64; 3], grid: &Grid3, params: &PhysicalParams) -> [f64; 3] {
    let mut out = [0.0; 3];
    for c in 0..3 {
        let span = grid.n()[c] as f64 * grid.h()[c];
        let quantum = 2.0 * std::f64::consts::PI * params.hbar / span;
        out[c] = (p[c] / quantum).round() * quantum;
    }
    out
}

fn gaussian_envelope(r2: f64, sigma: f64) -> f64 {
    (-r2 / (2.0 * sigma * sigma)).exp()
}

/// Generate the named configuration on `grid`, unit-normalized.
pub fn generate(scn: &Scenario, grid: &Grid3, params: &PhysicalParams) -> Result<SpinorField> {
    params.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let mut psi = match *scn {
        Scenario::GaussianSpinUp { sigma } => {
            check_sigma(sigma)?;
            // Lowest-order small components: sigma.(-i hbar grad) g / (2 m c)
            // applied to the spin-up rest spinor.
            let c2 = params.hbar / (2.0 * params.m * params.c * sigma * sigma);
            SpinorField::from_fn(grid.clone(), |[x, y, z]| {
                let g = gaussian_envelope(x * x + y * y + z * z, sigma);
                [
                    Complex64::new(g, 0.0),
                    zero,
                    Complex64::new(0.0, c2 * z * g),
                    Complex64::new(-c2 * y * g, c2 * x * g),
                ]
            })
        }
        Scenario::GaussianSpinDown { sigma } => {
            check_sigma(sigma)?;
            let c2 = params.hbar / (2.0 * params.m * params.c * sigma * sigma);
            SpinorField::from_fn(grid.clone(), |[x, y, z]| {
                let g = gaussian_envelope(x * x + y * y + z * z, sigma);
                [
                    zero,
                    Complex64::new(g, 0.0),
                    Complex64::new(c2 * y * g, c2 * x * g),
                    Complex64::new(0.0, -c2 * z * g),
                ]
            })
        }
        Scenario::TorusM1SpinUp { sigma } => {
            check_sigma(sigma)?;
            SpinorField::from_fn(grid.clone(), |[x, y, z]| {
                let g = gaussian_envelope(x * x + y * y + z * z, sigma);
                [Complex64::new(x * g, y * g), zero, zero, zero]
            })
        }
        Scenario::Superposition { sigma } => {
            check_sigma(sigma)?;
            // (x + i y) + (x - i y) = 2x: the m = +-1 phases cancel.
            let w = std::f64::consts::FRAC_1_SQRT_2;
            SpinorField::from_fn(grid.clone(), |[x, y, z]| {
                let g = gaussian_envelope(x * x + y * y + z * z, sigma);
                [Complex64::new(2.0 * w * x * g, 0.0), zero, zero, zero]
            })
        }
        Scenario::PlaneWave { p, helicity } => plane_wave(p, helicity, grid, params),
    };
    psi.normalize()?;
    Ok(psi)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scenario width sigma = {sigma} must be positive"
        )));
    }
    Ok(())
}

/// Exact free-Dirac plane wave with helicity spinor amplitudes:
/// `psi = N (chi, h lambda chi) exp(i p.x / hbar)` with
/// `lambda = |p| c / (E + m c^2)`, `E = sqrt(m^2 c^4 + p^2 c^2)`, and
/// `chi` the helicity-`h` eigenspinor of `sigma.p_hat`.
fn plane_wave(
    p_raw: [f64; 3],
    helicity: Helicity,
    grid: &Grid3,
    params: &PhysicalParams,
) -> SpinorField {
    let p = snapped_momentum(p_raw, grid, params);
    let pmag = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let mc2 = params.m * params.c * params.c;
    let energy = (mc2 * mc2 + pmag * pmag * params.c * params.c).sqrt();
    let lambda = pmag * params.c / (energy + mc2);

    // Helicity eigenspinors from the polar angles of p_hat; for p = 0 the
    // direction is taken as +z.
    let (theta, phi) = if pmag > 0.0 {
        (
            (p[2] / pmag).clamp(-1.0, 1.0).acos(),
            p[1].atan2(p[0]),
        )
    } else {
        (0.0, 0.0)
    };
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let eip = Complex64::new(0.0, phi).exp();
    let chi = match helicity {
        Helicity::Plus => [Complex64::new(ct, 0.0), st * eip],
        Helicity::Minus => [-st * eip.conj(), Complex64::new(ct, 0.0)],
    };
    let h = helicity.sign();
    let volume = grid.len() as f64 * grid.cell_volume();
    let norm = 1.0 / (volume * (1.0 + lambda * lambda)).sqrt();
    let amp = [
        norm * chi[0],
        norm * chi[1],
        h * lambda * norm * chi[0],
        h * lambda * norm * chi[1],
    ];
    let inv_hbar = 1.0 / params.hbar;
    SpinorField::from_fn(grid.clone(), |[x, y, z]| {
        let phase = Complex64::new(0.0, (p[0] * x + p[1] * y + p[2] * z) * inv_hbar).exp();
        [amp[0] * phase, amp[1] * phase, amp[2] * phase, amp[3] * phase]
    })
}

/// Free-Dirac dispersion energy for a (snapped) momentum.
pub fn dispersion_energy(p: [f64; 3], params: &PhysicalParams) -> f64 {
    let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let mc2 = params.m * params.c * params.c;
    (mc2 * mc2 + p2 * params.c * params.c).sqrt()
}
