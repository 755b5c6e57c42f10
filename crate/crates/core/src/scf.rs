//! Diagnostic self-consistent fixed-point iterator for the coupled
//! spinor/field system: alternate between regenerating the static
//! self-fields of the spinor and taking one residual-descent step on the
//! eigen-residual `|| (H - E) psi ||^2`.
//!
//! The descent acts on the squared residual rather than the energy: the
//! Dirac operator is unbounded below, so energy minimization collapses
//! into the negative continuum, while the residual functional is bounded
//! by zero. The module reports residual reduction and fixed-point
//! consistency; it makes no claim that a converged normalizable bound
//! state exists (an open physics problem) — non-convergence is a valid,
//! reportable outcome carried by the stagnation flag.

use num_complex::Complex64;
use serde::Serialize;

use crate::dirac;
use crate::emfield::{EmConfig, GaugeTag};
use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, VectorField};
use crate::grid::{PhysicalParams, Scheme};

/// Iteration controls.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScfParams {
    /// Linear field mixing in `(0, 1]`: `fields <- mix * self_fields(psi)
    /// + (1 - mix) * fields_prev`, starting from zero fields.
    pub mix: f64,
    /// Residual target.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Initial descent step, halved by backtracking until the residual
    /// decreases.
    pub step: f64,
}

impl Default for ScfParams {
    fn default() -> Self {
        ScfParams {
            mix: 0.5,
            tol: 1e-8,
            max_iter: 50,
            step: 0.05,
        }
    }
}

impl ScfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mix > 0.0 && self.mix <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mix {} must lie in (0, 1]",
                self.mix
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step {} must be positive",
                self.step
            )));
        }
        Ok(())
    }
}

/// State after the iteration stops.
#[derive(Debug, Clone)]
pub struct ScfState {
    pub psi: SpinorField,
    pub em: EmConfig,
    /// Rayleigh quotient `Re <psi|H psi>`.
    pub energy: f64,
    /// `|| H psi - energy psi ||` (psi is unit norm).
    pub residual: f64,
    pub iteration: usize,
    /// True when backtracking underflowed before finding a descent
    /// direction — reported, not raised.
    pub stagnated: bool,
    pub converged: bool,
}

/// One history row, emitted as a CSV line by [`history_csv`]. `step` is
/// the accepted descent step that produced this iterate (0 for the
/// initial row).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScfHistoryRow {
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
    pub step: f64,
    pub mix: f64,
}

/// Render the history in the stable CSV layout
/// `iteration,energy,residual,step,mix`. Floats use Rust's shortest
/// round-trip formatting, so identical runs serialize byte-identically.
pub fn history_csv(rows: &[ScfHistoryRow]) -> String {
    let mut out = String::from("iteration,energy,residual,step,mix\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iteration, r.energy, r.residual, r.step, r.mix
        ));
    }
    out
}

/// Static self-fields of the spinor: Coulomb potential of its charge
/// density plus the magnetostatic transverse potential of its current.
/// At `e = 0` every field is identically zero.
pub fn self_fields(psi: &SpinorField, params: &PhysicalParams) -> Result<EmConfig> {
    let d = dirac::densities(psi, params)?;
    EmConfig::coulomb_from_sources(&d.rho, Some(&d.j), params)
}

/// Rayleigh quotient and eigen-residual of `psi` in the given fields.
/// Returns `(energy, residual)`; errors if the quotient has an imaginary
/// part beyond hermiticity noise (boundary contamination).
pub fn dirac_residual(
    psi: &SpinorField,
    em: &EmConfig,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<(f64, f64)> {
    let (energy, residual, _) = residual_with_gradient(psi, em, params, scheme)?;
    Ok((energy, residual))
}

/// Shared worker: energy, residual, and the descent direction
/// `(H - E) psi`.
fn residual_with_gradient(
    psi: &SpinorField,
    em: &EmConfig,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<(f64, f64, SpinorField)> {
    let h_psi = dirac::apply_h(psi, Some(&em.phi), Some(&em.a), params, scheme)?;
    let rayleigh = psi.inner(&h_psi)?;
    let scale = 1.0f64.max(rayleigh.re.abs());
    if rayleigh.im.abs() > 1e-10 * scale {
        return Err(Error::Precondition(format!(
            "Rayleigh quotient has imaginary part {:.3e}; the state is not \
             localized enough for a hermitian quadrature",
            rayleigh.im
        )));
    }
    let energy = rayleigh.re;
    let d = SpinorField::linear_comb(
        Complex64::new(1.0, 0.0),
        &h_psi,
        Complex64::new(-energy, 0.0),
        psi,
    )?;
    let residual = d.norm_sq().sqrt();
    Ok((energy, residual, d))
}

fn blend(mix: f64, target: &EmConfig, prev: &EmConfig) -> Result<EmConfig> {
    let keep = 1.0 - mix;
    EmConfig::from_parts(
        ScalarField::linear_comb(mix, &target.phi, keep, &prev.phi)?,
        VectorField::linear_comb(mix, &target.a, keep, &prev.a)?,
        VectorField::linear_comb(mix, &target.e_long, keep, &prev.e_long)?,
        VectorField::linear_comb(mix, &target.e_trans, keep, &prev.e_trans)?,
        VectorField::linear_comb(mix, &target.b, keep, &prev.b)?,
        GaugeTag::Coulomb,
    )
}

fn zero_fields(psi: &SpinorField) -> Result<EmConfig> {
    let g = psi.grid().clone();
    EmConfig::from_parts(
        ScalarField::zeros(g.clone()),
        VectorField::zeros(g.clone()),
        VectorField::zeros(g.clone()),
        VectorField::zeros(g.clone()),
        VectorField::zeros(g),
        GaugeTag::Coulomb,
    )
}

/// Run the alternating iteration from `psi0` (must be unit norm).
///
/// Each pass mixes freshly generated self-fields into the running
/// configuration, measures `(energy, residual)`, and — unless converged —
/// takes one normalized descent step `psi <- normalize(psi - s (H-E)psi)`,
/// halving `s` (up to 30 times) until the fixed-field residual decreases.
/// Underflow of the backtracking sets the stagnation flag and stops the
/// loop; it is not an error. The whole path is deterministic: identical
/// inputs produce bitwise identical histories.
pub fn scf_iterate(
    psi0: &SpinorField,
    scf: &ScfParams,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<(ScfState, Vec<ScfHistoryRow>)> {
    scf.validate()?;
    params.validate()?;
    let norm = psi0.norm_sq();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "scf starting state must be unit norm, got ||psi||^2 = {norm}"
        )));
    }

    let mut psi = psi0.clone();
    let mut em = zero_fields(&psi)?;
    let mut history: Vec<ScfHistoryRow> = Vec::new();
    let mut stagnated = false;
    let mut converged = false;
    let mut last_step = 0.0;
    let mut energy = 0.0;
    let mut residual = f64::INFINITY;

    for it in 0..=scf.max_iter {
        let target = self_fields(&psi, params)?;
        em = blend(scf.mix, &target, &em)?;
        let (e_now, r_now, grad) = residual_with_gradient(&psi, &em, params, scheme)?;
        energy = e_now;
        residual = r_now;
        history.push(ScfHistoryRow {
            iteration: it,
            energy,
            residual,
            step: last_step,
            mix: scf.mix,
        });
        if residual <= scf.tol {
            converged = true;
            break;
        }
        if it == scf.max_iter {
            break;
        }

        // Fixed-field backtracking on || (H - E) psi || along the line
        // psi - s (H - E) psi. The operator is indefinite (the spectrum
        // extends below E), so the residual can decrease for either sign
        // of s — both are tried at every halving level, positive first
        // for determinism. The search starts from twice the last accepted
        // magnitude (standard step memory), so the nominal `step` only
        // seeds the very first iteration.
        let mut s = if last_step == 0.0 {
            scf.step
        } else {
            (2.0 * last_step.abs()).min(1.0)
        };
        let mut accepted = false;
        'search: for _ in 0..=30 {
            for signed in [s, -s] {
                let mut cand = SpinorField::linear_comb(
                    Complex64::new(1.0, 0.0),
                    &psi,
                    Complex64::new(-signed, 0.0),
                    &grad,
                )?;
                cand.normalize()?;
                let (_, r_cand, _) = residual_with_gradient(&cand, &em, params, scheme)?;
                if r_cand < residual {
                    psi = cand;
                    last_step = signed;
                    accepted = true;
                    break 'search;
                }
            }
            s *= 0.5;
            if s < 1e-12 {
                break;
            }
        }
        if !accepted {
            stagnated = true;
            break;
        }
    }

    let iteration = history.last().map_or(0, |r| r.iteration);
    Ok((
        ScfState {
            psi,
            em,
            energy,
            residual,
            iteration,
            stagnated,
            converged,
        },
        history,
    ))
}
