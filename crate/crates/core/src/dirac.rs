//! Dirac algebra, bilinear densities, and the fermionic pieces of the
//! angular-momentum decomposition.
//!
//! Conventions (Dirac–Pauli representation throughout):
//! - spinor components 0, 1 = upper (large) pair, 2, 3 = lower (small) pair;
//! - `beta = diag(1, 1, -1, -1)`, `gamma^i = [[0, sigma_i], [-sigma_i, 0]]`,
//!   `alpha_i = [[0, sigma_i], [sigma_i, 0]]`, `Sigma_i = diag(sigma_i, sigma_i)`;
//! - Hamiltonian `H = c alpha.(-i hbar grad - (e/c) A) + beta m c^2 + e phi`;
//! - Gaussian electromagnetic units: charge density `e psi^dag psi`,
//!   current density `e c psi^dag alpha psi`.
//!
//! The bilinears are hand-unrolled into explicitly real combinations
//! (`2 Re(...)` forms), so their imaginary parts are zero by construction
//! rather than by cancellation; a unit test cross-checks the unrolled
//! forms against literal matrix contraction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, VectorField};
use crate::grid::{Grid3, PhysicalParams, Scheme};
use crate::reduce;
use crate::spectral;
use crate::stencil;

/// Exact gamma-matrix algebra over Gaussian integers.
///
/// Every matrix appearing in the Dirac algebra of this crate has entries
/// in `{0, +-1, +-i}`, so the canonical identities (Clifford relations,
/// hermiticity, the spin matrix construction) can be verified with integer
/// arithmetic — no tolerances, no rounding.
pub mod gamma {
    use num_complex::Complex64;

    /// A Gaussian integer `re + im i`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct Gi {
        pub re: i64,
        pub im: i64,
    }

    impl Gi {
        pub const ZERO: Gi = Gi { re: 0, im: 0 };
        pub const ONE: Gi = Gi { re: 1, im: 0 };
        pub const I: Gi = Gi { re: 0, im: 1 };

        pub const fn new(re: i64, im: i64) -> Gi {
            Gi { re, im }
        }

        pub fn conj(self) -> Gi {
            Gi::new(self.re, -self.im)
        }
    }

    impl std::ops::Add for Gi {
        type Output = Gi;
        fn add(self, o: Gi) -> Gi {
            Gi::new(self.re + o.re, self.im + o.im)
        }
    }

    impl std::ops::Sub for Gi {
        type Output = Gi;
        fn sub(self, o: Gi) -> Gi {
            Gi::new(self.re - o.re, self.im - o.im)
        }
    }

    impl std::ops::Mul for Gi {
        type Output = Gi;
        fn mul(self, o: Gi) -> Gi {
            Gi::new(
                self.re * o.re - self.im * o.im,
                self.re * o.im + self.im * o.re,
            )
        }
    }

    impl std::ops::Neg for Gi {
        type Output = Gi;
        fn neg(self) -> Gi {
            Gi::new(-self.re, -self.im)
        }
    }

    /// Dense 4x4 matrix over Gaussian integers.
    pub type Mat4 = [[Gi; 4]; 4];

    pub const fn zero() -> Mat4 {
        [[Gi::ZERO; 4]; 4]
    }

    pub fn identity() -> Mat4 {
        let mut m = zero();
        for (d, row) in m.iter_mut().enumerate() {
            row[d] = Gi::ONE;
        }
        m
    }

    pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
        let mut out = zero();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Gi::ZERO;
                for (k, brow) in b.iter().enumerate() {
                    acc = acc + a[i][k] * brow[j];
                }
                out[i][j] = acc;
            }
        }
        out
    }

    pub fn add(a: &Mat4, b: &Mat4) -> Mat4 {
        let mut out = zero();
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = a[i][j] + b[i][j];
            }
        }
        out
    }

    pub fn scale(a: &Mat4, s: Gi) -> Mat4 {
        let mut out = zero();
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = s * a[i][j];
            }
        }
        out
    }

    pub fn dagger(a: &Mat4) -> Mat4 {
        let mut out = zero();
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = a[j][i].conj();
            }
        }
        out
    }

    pub fn eq(a: &Mat4, b: &Mat4) -> bool {
        a == b
    }

    fn anticommutator(a: &Mat4, b: &Mat4) -> Mat4 {
        add(&mul(a, b), &mul(b, a))
    }

    fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
        let ab = mul(a, b);
        let ba = mul(b, a);
        let mut out = zero();
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = ab[i][j] - ba[i][j];
            }
        }
        out
    }

    /// 2x2 Pauli matrices embedded as the four quadrant blocks.
    fn pauli(i: usize) -> [[Gi; 2]; 2] {
        match i {
            0 => [[Gi::ZERO, Gi::ONE], [Gi::ONE, Gi::ZERO]],
            1 => [[Gi::ZERO, -Gi::I], [Gi::I, Gi::ZERO]],
            _ => [[Gi::ONE, Gi::ZERO], [Gi::ZERO, -Gi::ONE]],
        }
    }

    fn from_blocks(ul: [[Gi; 2]; 2], ur: [[Gi; 2]; 2], ll: [[Gi; 2]; 2], lr: [[Gi; 2]; 2]) -> Mat4 {
        let mut m = zero();
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = ul[i][j];
                m[i][j + 2] = ur[i][j];
                m[i + 2][j] = ll[i][j];
                m[i + 2][j + 2] = lr[i][j];
            }
        }
        m
    }

    fn zero2() -> [[Gi; 2]; 2] {
        [[Gi::ZERO; 2]; 2]
    }

    fn neg2(b: [[Gi; 2]; 2]) -> [[Gi; 2]; 2] {
        [[-b[0][0], -b[0][1]], [-b[1][0], -b[1][1]]]
    }

    fn id2() -> [[Gi; 2]; 2] {
        [[Gi::ONE, Gi::ZERO], [Gi::ZERO, Gi::ONE]]
    }

    /// `beta = gamma^0 = diag(1, 1, -1, -1)`.
    pub fn beta() -> Mat4 {
        from_blocks(id2(), zero2(), zero2(), neg2(id2()))
    }

    /// `gamma^mu` for `mu` in 0..=3.
    pub fn gamma(mu: usize) -> Mat4 {
        if mu == 0 {
            beta()
        } else {
            let s = pauli(mu - 1);
            from_blocks(zero2(), s, neg2(s), zero2())
        }
    }

    /// `alpha_i = gamma^0 gamma^i`, the velocity matrices.
    pub fn alpha(i: usize) -> Mat4 {
        let s = pauli(i);
        from_blocks(zero2(), s, s, zero2())
    }

    /// `Sigma_i = diag(sigma_i, sigma_i)`, the spin matrices.
    pub fn sigma(i: usize) -> Mat4 {
        let s = pauli(i);
        from_blocks(s, zero2(), zero2(), s)
    }

    /// Convert to complex for numerical cross-checks.
    pub fn to_complex(m: &Mat4) -> [[Complex64; 4]; 4] {
        let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = Complex64::new(m[i][j].re as f64, m[i][j].im as f64);
            }
        }
        out
    }

    /// One exact algebra check.
    #[derive(Debug, Clone)]
    pub struct GammaCheck {
        pub name: String,
        pub pass: bool,
    }

    /// The full exact verification suite for the representation above.
    /// Every check is integer arithmetic; `pass` is a strict equality.
    pub fn suite() -> Vec<GammaCheck> {
        let mut out = Vec::new();
        let mut push = |name: &str, pass: bool| {
            out.push(GammaCheck {
                name: name.to_string(),
                pass,
            })
        };

        // Clifford relations: {gamma^mu, gamma^nu} = 2 eta^{mu nu} I.
        let eta = [1i64, -1, -1, -1];
        let mut clifford = true;
        for mu in 0..4 {
            for nu in 0..4 {
                let ac = anticommutator(&gamma(mu), &gamma(nu));
                let expect = if mu == nu {
                    scale(&identity(), Gi::new(2 * eta[mu], 0))
                } else {
                    zero()
                };
                clifford &= eq(&ac, &expect);
            }
        }
        push("clifford_anticommutation", clifford);

        push("gamma0_hermitian", eq(&dagger(&gamma(0)), &gamma(0)));
        let mut anti = true;
        for i in 1..4 {
            anti &= eq(&dagger(&gamma(i)), &scale(&gamma(i), -Gi::ONE));
        }
        push("spatial_gammas_antihermitian", anti);

        push("beta_squared_identity", eq(&mul(&beta(), &beta()), &identity()));

        let mut alpha_herm = true;
        let mut alpha_sq = true;
        let mut alpha_anti = true;
        for i in 0..3 {
            alpha_herm &= eq(&dagger(&alpha(i)), &alpha(i));
            alpha_sq &= eq(&mul(&alpha(i), &alpha(i)), &identity());
            for j in 0..3 {
                if i != j {
                    alpha_anti &= eq(&anticommutator(&alpha(i), &alpha(j)), &zero());
                }
            }
            alpha_anti &= eq(&anticommutator(&alpha(i), &beta()), &zero());
        }
        push("alpha_hermitian", alpha_herm);
        push("alpha_squared_identity", alpha_sq);
        push("alpha_beta_anticommute", alpha_anti);

        // Sigma_k = i gamma^i gamma^j for cyclic (i, j, k).
        let mut sigma_con = true;
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let built = scale(&mul(&gamma(i + 1), &gamma(j + 1)), Gi::I);
            sigma_con &= eq(&built, &sigma(k));
        }
        push("sigma_from_gamma_pairs", sigma_con);

        let mut sigma_herm = true;
        let mut sigma_sq = true;
        let mut sigma_su2 = true;
        let mut sigma_beta = true;
        for k in 0..3 {
            sigma_herm &= eq(&dagger(&sigma(k)), &sigma(k));
            sigma_sq &= eq(&mul(&sigma(k), &sigma(k)), &identity());
            sigma_beta &= eq(&commutator(&sigma(k), &beta()), &zero());
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            // [Sigma_i, Sigma_j] = 2 i Sigma_k.
            let lhs = commutator(&sigma(i), &sigma(j));
            let rhs = scale(&sigma(k), Gi::new(0, 2));
            sigma_su2 &= eq(&lhs, &rhs);
        }
        push("sigma_hermitian", sigma_herm);
        push("sigma_squared_identity", sigma_sq);
        push("sigma_su2_commutators", sigma_su2);
        push("sigma_commutes_with_beta", sigma_beta);

        out
    }
}

/// The standard matrices bundled as complex arrays for callers that want
/// to contract against them numerically. All entries are exact (integer
/// real/imaginary parts).
#[derive(Debug, Clone)]
pub struct DiracMatrices {
    /// `gamma^0 .. gamma^3`.
    pub gamma: [[[Complex64; 4]; 4]; 4],
    /// `alpha_x, alpha_y, alpha_z`.
    pub alpha: [[[Complex64; 4]; 4]; 3],
    /// `Sigma_x, Sigma_y, Sigma_z`.
    pub sigma_big: [[[Complex64; 4]; 4]; 3],
    /// `beta = gamma^0`.
    pub beta: [[Complex64; 4]; 4],
    /// Metric signature `diag(+1, -1, -1, -1)`.
    pub metric: [f64; 4],
}

/// Build the matrix bundle. The underlying exact-integer identities are
/// verified by [`gamma::suite`]; this is the floating-point view.
pub fn build_matrices() -> DiracMatrices {
    let gm = |mu: usize| gamma::to_complex(&gamma::gamma(mu));
    let al = |i: usize| gamma::to_complex(&gamma::alpha(i));
    let sg = |i: usize| gamma::to_complex(&gamma::sigma(i));
    DiracMatrices {
        gamma: [gm(0), gm(1), gm(2), gm(3)],
        alpha: [al(0), al(1), al(2)],
        sigma_big: [sg(0), sg(1), sg(2)],
        beta: gm(0),
        metric: [1.0, -1.0, -1.0, -1.0],
    }
}

/// Charge and current densities bundled as the sources fed to the field
/// solver.
#[derive(Debug, Clone)]
pub struct SourceDensities {
    /// `rho = e psi^dag psi`.
    pub rho: ScalarField,
    /// `j = e c psi^dag alpha psi`.
    pub j: VectorField,
}

/// Compute both source densities by literal matrix contraction against
/// `alpha`, checking that the bilinears come out real. The contraction is
/// deliberately not the unrolled fast path: a nonzero imaginary residual
/// here signals a corrupted matrix or broken algebra, which the unrolled
/// forms (real by construction) could never detect.
pub fn densities(psi: &SpinorField, params: &PhysicalParams) -> Result<SourceDensities> {
    psi.assert_finite("densities spinor")?;
    let grid = psi.grid().clone();
    let m = build_matrices();
    let ec = params.e * params.c;
    let mut rho = probability_density(psi);
    rho.scale(params.e);
    let mut j = VectorField::zeros(grid.clone());
    let mut max_im = 0.0f64;
    for axis in 0..3 {
        let a = &m.alpha[axis];
        let out = j.comp_mut(axis);
        for idx in 0..grid.len() {
            let p = psi.spinor_at(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (r, row) in a.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    acc += p[r].conj() * v * p[c];
                }
            }
            max_im = max_im.max(acc.im.abs());
            out[idx] = ec * acc.re;
        }
    }
    if max_im > 1e-10 {
        return Err(Error::Precondition(format!(
            "current bilinear has imaginary residual {max_im:.3e} > 1e-10: \
             the alpha matrices are not hermitian — algebra bug"
        )));
    }
    Ok(SourceDensities { rho, j })
}

/// Derivative of one complex component per the chosen scheme: zero-extended
/// fourth-order differences for localized states, periodic spectral for
/// genuinely periodic ones.
pub(crate) fn deriv(
    grid: &Grid3,
    data: &[Complex64],
    axis: usize,
    scheme: Scheme,
) -> Vec<Complex64> {
    match scheme {
        Scheme::Fd4 => stencil::fd4_derivative(grid, data, axis),
        Scheme::Spectral => spectral::periodic_derivative(grid, data, axis),
    }
}

/// `psi^dag psi`.
pub fn probability_density(psi: &SpinorField) -> ScalarField {
    let grid = psi.grid().clone();
    let data = (0..grid.len())
        .map(|i| {
            let p = psi.spinor_at(i);
            p[0].norm_sqr() + p[1].norm_sqr() + p[2].norm_sqr() + p[3].norm_sqr()
        })
        .collect();
    ScalarField::from_vec(grid, data).expect("length preserved")
}

/// Charge density `e psi^dag psi` (Gaussian units).
pub fn charge_density(psi: &SpinorField, params: &PhysicalParams) -> ScalarField {
    let mut rho = probability_density(psi);
    rho.scale(params.e);
    rho
}

/// Current density `e c psi^dag alpha psi`, unrolled per component:
/// `j_x = 2 e c Re(p1* p4 + p2* p3)`,
/// `j_y = 2 e c Re(-i p1* p4 + i p2* p3)`,
/// `j_z = 2 e c Re(p1* p3 - p2* p4)`
/// (indices 1-based here to match the spinor-component naming).
pub fn current_density(psi: &SpinorField, params: &PhysicalParams) -> VectorField {
    let grid = psi.grid().clone();
    let ec = params.e * params.c;
    let mut out = VectorField::zeros(grid.clone());
    let [jx, jy, jz] = out.comps_mut();
    for i in 0..grid.len() {
        let p = psi.spinor_at(i);
        let a14 = p[0].conj() * p[3];
        let a23 = p[1].conj() * p[2];
        let a13 = p[0].conj() * p[2];
        let a24 = p[1].conj() * p[3];
        jx[i] = 2.0 * ec * (a14.re + a23.re);
        jy[i] = 2.0 * ec * (a14.im - a23.im);
        jz[i] = 2.0 * ec * (a13.re - a24.re);
    }
    out
}

/// Spin density `psi^dag Sigma psi`, unrolled:
/// `s_x = 2 Re(p1* p2) + 2 Re(p3* p4)`,
/// `s_y = 2 Im(p1* p2) + 2 Im(p3* p4)`,
/// `s_z = |p1|^2 - |p2|^2 + |p3|^2 - |p4|^2`.
pub fn spin_density(psi: &SpinorField) -> VectorField {
    let grid = psi.grid().clone();
    let mut out = VectorField::zeros(grid.clone());
    let [sx, sy, sz] = out.comps_mut();
    for i in 0..grid.len() {
        let p = psi.spinor_at(i);
        let u = p[0].conj() * p[1];
        let l = p[2].conj() * p[3];
        sx[i] = 2.0 * (u.re + l.re);
        sy[i] = 2.0 * (u.im + l.im);
        sz[i] = p[0].norm_sqr() - p[1].norm_sqr() + p[2].norm_sqr() - p[3].norm_sqr();
    }
    out
}

/// Spin expectation `S = (hbar/2) integral psi^dag Sigma psi` — the term
/// whose coupling independence the laboratory exists to demonstrate.
pub fn spin_term(psi: &SpinorField, params: &PhysicalParams) -> [f64; 3] {
    let grid = psi.grid();
    let s = reduce::sum3(grid.len(), |i| {
        let p = psi.spinor_at(i);
        let u = p[0].conj() * p[1];
        let l = p[2].conj() * p[3];
        [
            2.0 * (u.re + l.re),
            2.0 * (u.im + l.im),
            p[0].norm_sqr() - p[1].norm_sqr() + p[2].norm_sqr() - p[3].norm_sqr(),
        ]
    });
    let w = 0.5 * params.hbar * grid.cell_volume();
    [s[0] * w, s[1] * w, s[2] * w]
}

/// Result of the orbital integral, with its hermiticity diagnostic.
#[derive(Debug, Clone)]
pub struct OrbitalResult {
    /// `L = integral psi^dag x cross (-i hbar grad) psi`, the real part of
    /// the operator expectation.
    pub value: [f64; 3],
    /// Magnitude of the imaginary part of each component. On localized
    /// states the operator is hermitian and this is pure discretization
    /// noise; anything larger signals boundary contamination.
    pub imag_residual: [f64; 3],
    /// Set when any residual exceeds 1e-6 of the overall scale.
    pub warning: bool,
}

/// Orbital angular momentum of the fermion field.
///
/// Accumulated one derivative axis at a time to bound memory: the
/// derivative along axis `a` contributes `+x_{a+2}` moments to component
/// `a+1` and `-x_{a+1}` moments to component `a+2` (cyclic), which covers
/// all six terms of `x cross grad`.
pub fn orbital_term(
    psi: &SpinorField,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<OrbitalResult> {
    psi.assert_finite("orbital_term spinor")?;
    let grid = psi.grid();
    let [nx, ny, _] = grid.n();
    let mut moments = [Complex64::new(0.0, 0.0); 3];
    for a in 0..3 {
        let (c1, c2) = ((a + 1) % 3, (a + 2) % 3);
        for comp in 0..4 {
            let d = deriv(grid, psi.comp(comp), a, scheme);
            let pc = psi.comp(comp);
            let coord = |idx: usize, axis: usize| -> f64 {
                let i = idx % nx;
                let j = (idx / nx) % ny;
                let k = idx / (nx * ny);
                grid.coord(axis, [i, j, k][axis])
            };
            let s1: Complex64 =
                reduce::sum(grid.len(), |i| pc[i].conj() * d[i] * coord(i, c2));
            let s2: Complex64 =
                reduce::sum(grid.len(), |i| pc[i].conj() * d[i] * coord(i, c1));
            moments[c1] += s1;
            moments[c2] -= s2;
        }
    }
    let w = params.hbar * grid.cell_volume();
    // L = <-i hbar (x cross grad)>: real part hbar Im(M), spurious
    // imaginary part hbar Re(M).
    let value = [
        moments[0].im * w,
        moments[1].im * w,
        moments[2].im * w,
    ];
    let imag_residual = [
        moments[0].re.abs() * w,
        moments[1].re.abs() * w,
        moments[2].re.abs() * w,
    ];
    let scale = params.hbar * (1.0 + value.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let warning = imag_residual.iter().any(|r| *r > 1e-6 * scale);
    Ok(OrbitalResult {
        value,
        imag_residual,
        warning,
    })
}

/// The gauge (potential) angular momentum of Eq. (4):
/// `J_gauge = -(1/c) integral rho_charge x cross A`, `rho_charge = e psi^dag psi`.
/// Proportional to `e`, so `e = 0` gives exactly zero and flipping the
/// sign of `e` negates the result bitwise.
pub fn gauge_term(
    psi: &SpinorField,
    a: &VectorField,
    params: &PhysicalParams,
) -> Result<[f64; 3]> {
    psi.grid().check_same(a.grid(), "gauge term")?;
    a.assert_finite("gauge term vector potential")?;
    let grid = psi.grid();
    let [nx, ny, _] = grid.n();
    let pref = -params.e / params.c;
    let s = reduce::sum3(grid.len(), |idx| {
        let p = psi.spinor_at(idx);
        let prob = p[0].norm_sqr() + p[1].norm_sqr() + p[2].norm_sqr() + p[3].norm_sqr();
        let i = idx % nx;
        let j = (idx / nx) % ny;
        let k = idx / (nx * ny);
        let r = grid.position(i, j, k);
        let av = a.vec_at(idx);
        [
            pref * prob * (r[1] * av[2] - r[2] * av[1]),
            pref * prob * (r[2] * av[0] - r[0] * av[2]),
            pref * prob * (r[0] * av[1] - r[1] * av[0]),
        ]
    });
    let hv = grid.cell_volume();
    Ok([s[0] * hv, s[1] * hv, s[2] * hv])
}

/// Apply the Dirac Hamiltonian
/// `H psi = c alpha.(-i hbar grad - (e/c) A) psi + beta m c^2 psi + e phi psi`.
/// `phi`/`a` default to zero (free Hamiltonian) when absent.
pub fn apply_h(
    psi: &SpinorField,
    phi: Option<&ScalarField>,
    a: Option<&VectorField>,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<SpinorField> {
    params.validate()?;
    let grid = psi.grid();
    if let Some(p) = phi {
        grid.check_same(p.grid(), "apply_h scalar potential")?;
    }
    if let Some(av) = a {
        grid.check_same(av.grid(), "apply_h vector potential")?;
    }
    let n = grid.len();
    let mut out = SpinorField::zeros(grid.clone());
    let c = params.c;
    let mih = Complex64::new(0.0, -params.hbar); // -i hbar
    let eoc = params.e / c;

    // Kinetic part, one derivative axis at a time. pi_axis applied to
    // component `comp` is `-i hbar d_axis psi_comp - (e/c) A_axis psi_comp`;
    // the sigma.pi block structure routes upper <-> lower pairs.
    for axis in 0..3 {
        let d: [Vec<Complex64>; 4] = [
            deriv(grid, psi.comp(0), axis, scheme),
            deriv(grid, psi.comp(1), axis, scheme),
            deriv(grid, psi.comp(2), axis, scheme),
            deriv(grid, psi.comp(3), axis, scheme),
        ];
        for i in 0..n {
            let pv = psi.spinor_at(i);
            let a_ax = a.map_or(0.0, |av| av.comp(axis)[i]);
            let pi = |comp: usize| mih * d[comp][i] - eoc * a_ax * pv[comp];
            let (q1, q2, r1, r2) = match axis {
                // sigma_x: (a, b) -> (v b, v a)
                0 => (pi(3), pi(2), pi(1), pi(0)),
                // sigma_y: (a, b) -> (-i v b, i v a)
                1 => {
                    let i_ = Complex64::new(0.0, 1.0);
                    (-i_ * pi(3), i_ * pi(2), -i_ * pi(1), i_ * pi(0))
                }
                // sigma_z: (a, b) -> (v a, -v b)
                _ => (pi(2), -pi(3), pi(0), -pi(1)),
            };
            out.comp_mut(0)[i] += c * q1;
            out.comp_mut(1)[i] += c * q2;
            out.comp_mut(2)[i] += c * r1;
            out.comp_mut(3)[i] += c * r2;
        }
    }

    // Mass and scalar-potential diagonal.
    let mc2 = params.m * c * c;
    for i in 0..n {
        let v = params.e * phi.map_or(0.0, |p| p.data()[i]);
        let pv = psi.spinor_at(i);
        out.comp_mut(0)[i] += (mc2 + v) * pv[0];
        out.comp_mut(1)[i] += (mc2 + v) * pv[1];
        out.comp_mut(2)[i] += (-mc2 + v) * pv[2];
        out.comp_mut(3)[i] += (-mc2 + v) * pv[3];
    }
    Ok(out)
}

/// Apply one component of the total angular momentum operator
/// `J_axis = -i hbar (x_j d_k - x_k d_j) + (hbar/2) Sigma_axis`
/// with `(axis, j, k)` cyclic.
pub fn apply_j(
    psi: &SpinorField,
    axis: usize,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<SpinorField> {
    if axis > 2 {
        return Err(Error::InvalidParameter(format!(
            "angular momentum axis {axis} out of range"
        )));
    }
    let grid = psi.grid();
    let [nx, ny, _] = grid.n();
    let (ja, ka) = ((axis + 1) % 3, (axis + 2) % 3);
    let mih = Complex64::new(0.0, -params.hbar);
    let half = 0.5 * params.hbar;
    let mut out = SpinorField::zeros(grid.clone());
    for comp in 0..4 {
        let dj = deriv(grid, psi.comp(comp), ja, scheme);
        let dk = deriv(grid, psi.comp(comp), ka, scheme);
        let o = out.comp_mut(comp);
        for i in 0..grid.len() {
            let ii = i % nx;
            let jj = (i / nx) % ny;
            let kk = i / (nx * ny);
            let node = [ii, jj, kk];
            let xj = grid.coord(ja, node[ja]);
            let xk = grid.coord(ka, node[ka]);
            o[i] = mih * (xj * dk[i] - xk * dj[i]);
        }
    }
    // Spin part: Sigma_axis shuffles components within each pair.
    let i_ = Complex64::new(0.0, 1.0);
    for i in 0..grid.len() {
        let p = psi.spinor_at(i);
        let s = match axis {
            0 => [p[1], p[0], p[3], p[2]],
            1 => [-i_ * p[1], i_ * p[0], -i_ * p[3], i_ * p[2]],
            _ => [p[0], -p[1], p[2], -p[3]],
        };
        for c in 0..4 {
            out.comp_mut(c)[i] += half * s[c];
        }
    }
    Ok(out)
}

/// Relative interior norm of the su(2) closure defect
/// `([J_x, J_y] - i hbar J_z) psi`, normalized by the interior norm of
/// `J_z psi`.
///
/// The commutator applies two derivative stencils back to back, so the
/// one-sided boundary layer is twice [`stencil::INTERIOR_INSET`]; both
/// norms exclude it. For finite differences the defect is pure stencil
/// truncation and must fall at O(h^4) under refinement; the spectral
/// scheme closes the algebra to rounding on band-limited states.
pub fn j_commutator_defect(
    psi: &SpinorField,
    params: &PhysicalParams,
    scheme: Scheme,
) -> Result<f64> {
    let grid = psi.grid();
    let jy = apply_j(psi, 1, params, scheme)?;
    let jx = apply_j(psi, 0, params, scheme)?;
    let xy = apply_j(&jy, 0, params, scheme)?;
    let yx = apply_j(&jx, 1, params, scheme)?;
    let jz = apply_j(psi, 2, params, scheme)?;
    let ih = Complex64::new(0.0, params.hbar);

    let inset = 2 * stencil::INTERIOR_INSET;
    let [nx, ny, nz] = grid.n();
    if nx <= 2 * inset || ny <= 2 * inset || nz <= 2 * inset {
        return Err(Error::InvalidGrid(format!(
            "grid {nx}x{ny}x{nz} has no interior at inset {inset}"
        )));
    }
    let mut defect = Vec::new();
    let mut reference = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if grid.near_boundary(i, j, k, inset) {
                    continue;
                }
                let idx = grid.idx(i, j, k);
                let mut d2 = 0.0;
                let mut r2 = 0.0;
                for c in 0..4 {
                    let d = xy.comp(c)[idx] - yx.comp(c)[idx] - ih * jz.comp(c)[idx];
                    d2 += d.norm_sqr();
                    r2 += jz.comp(c)[idx].norm_sqr();
                }
                defect.push(d2);
                reference.push(r2);
            }
        }
    }
    let num = reduce::sum_slice(&defect).sqrt();
    let den = reduce::sum_slice(&reference).sqrt();
    if den == 0.0 {
        return Err(Error::Precondition(
            "J_z psi vanishes on the interior; commutator defect undefined".into(),
        ));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid3;

    fn params() -> PhysicalParams {
        PhysicalParams::natural(-1.0)
    }

    #[test]
    fn gamma_suite_is_all_exact() {
        let checks = gamma::suite();
        assert!(checks.len() >= 10);
        for c in &checks {
            assert!(c.pass, "gamma algebra check failed: {}", c.name);
        }
    }

    /// A smooth localized spinor with all four components active.
    fn test_spinor(g: &Grid3) -> SpinorField {
        SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / 2.0).exp();
            [
                Complex64::new(e, 0.3 * x * e),
                Complex64::new(-0.4 * y * e, 0.2 * e),
                Complex64::new(0.1 * z * e, 0.5 * e * x),
                Complex64::new(0.3 * e, -0.2 * z * e),
            ]
        })
    }

    #[test]
    fn unrolled_bilinears_match_matrix_contraction() {
        let g = Grid3::cube(8, 2.0).unwrap();
        let psi = test_spinor(&g);
        let p = params();
        let j = current_density(&psi, &p);
        let s = spin_density(&psi);
        let alpha = [
            gamma::to_complex(&gamma::alpha(0)),
            gamma::to_complex(&gamma::alpha(1)),
            gamma::to_complex(&gamma::alpha(2)),
        ];
        let sigma = [
            gamma::to_complex(&gamma::sigma(0)),
            gamma::to_complex(&gamma::sigma(1)),
            gamma::to_complex(&gamma::sigma(2)),
        ];
        let contract = |m: &[[Complex64; 4]; 4], p: &[Complex64; 4]| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..4 {
                for b in 0..4 {
                    acc += p[a].conj() * m[a][b] * p[b];
                }
            }
            acc
        };
        for idx in [0usize, 7, 100, 300, 511] {
            let pv = psi.spinor_at(idx);
            for c in 0..3 {
                let ja = contract(&alpha[c], &pv);
                assert!(ja.im.abs() < 1e-14, "current bilinear not real");
                assert!(
                    (j.comp(c)[idx] - p.e * p.c * ja.re).abs() < 1e-13,
                    "current component {c} mismatch at {idx}"
                );
                let sa = contract(&sigma[c], &pv);
                assert!(sa.im.abs() < 1e-14, "spin bilinear not real");
                assert!(
                    (s.comp(c)[idx] - sa.re).abs() < 1e-13,
                    "spin component {c} mismatch at {idx}"
                );
            }
        }
    }

    #[test]
    fn densities_bundle_matches_unrolled_and_respects_light_cone() {
        let g = Grid3::cube(12, 3.0).unwrap();
        let psi = test_spinor(&g);
        let p = params();
        let d = densities(&psi, &p).unwrap();
        let rho = charge_density(&psi, &p);
        let j = current_density(&psi, &p);
        for i in 0..g.len() {
            assert!((d.rho.data()[i] - rho.data()[i]).abs() < 1e-13);
            for c in 0..3 {
                assert!((d.j.comp(c)[i] - j.comp(c)[i]).abs() < 1e-13);
            }
            // |j(x)| <= c |rho(x)|: spinor velocity never exceeds c.
            let jv = d.j.vec_at(i);
            let jm = (jv[0] * jv[0] + jv[1] * jv[1] + jv[2] * jv[2]).sqrt();
            assert!(jm <= p.c * d.rho.data()[i].abs() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn charge_integrates_to_e_for_unit_norm() {
        let g = Grid3::cube(24, 8.0).unwrap();
        let mut psi = test_spinor(&g);
        psi.normalize().unwrap();
        let p = params();
        let d = densities(&psi, &p).unwrap();
        let q = d.rho.integrate().unwrap();
        assert!((q - p.e).abs() < 1e-10, "total charge {q}");
    }

    #[test]
    fn upper_only_spinor_carries_no_current() {
        let g = Grid3::cube(12, 3.0).unwrap();
        let psi = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / 2.0).exp();
            [
                Complex64::new(e, 0.1 * x * e),
                Complex64::new(0.3 * y * e, e),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        });
        let j = current_density(&psi, &params());
        for c in 0..3 {
            assert!(j.comp(c).iter().all(|v| v.abs() <= 1e-12));
        }
    }

    #[test]
    fn matrix_bundle_matches_exact_constructors() {
        let m = build_matrices();
        assert_eq!(m.metric, [1.0, -1.0, -1.0, -1.0]);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.beta[i][j], m.gamma[0][i][j]);
            }
        }
        // alpha_i = gamma^0 gamma^i numerically.
        for a in 0..3 {
            let g0 = gamma::gamma(0);
            let gi = gamma::gamma(a + 1);
            let prod = gamma::to_complex(&gamma::mul(&g0, &gi));
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(m.alpha[a][i][j], prod[i][j]);
                }
            }
        }
    }

    #[test]
    fn orbital_vanishes_on_real_spherical_state() {
        let g = Grid3::cube(20, 6.0).unwrap();
        let mut psi = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / 2.0).exp();
            [
                Complex64::new(e, 0.0),
                Complex64::new(0.4 * e, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        });
        psi.normalize().unwrap();
        let l = orbital_term(&psi, &params(), Scheme::Fd4).unwrap();
        for c in 0..3 {
            assert!(l.value[c].abs() < 1e-10, "L[{c}] = {}", l.value[c]);
        }
        assert!(!l.warning);
    }

    #[test]
    fn spin_term_pure_and_mixed_states() {
        let g = Grid3::cube(24, 8.0).unwrap();
        // Pure spin-up: S = (0, 0, hbar/2) for a normalized state.
        let mut up = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / 2.0).exp();
            [
                Complex64::new(e, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        });
        up.normalize().unwrap();
        let s = spin_term(&up, &params());
        assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);
        assert!((s[2] - 0.5).abs() < 1e-12);

        // (up + down)/sqrt(2): S points along +x with magnitude hbar/2.
        let mut mixed = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / 2.0).exp();
            let v = std::f64::consts::FRAC_1_SQRT_2 * e;
            [
                Complex64::new(v, 0.0),
                Complex64::new(v, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        });
        mixed.normalize().unwrap();
        let s = spin_term(&mixed, &params());
        assert!((s[0] - 0.5).abs() < 1e-12, "S_x = {}", s[0]);
        assert!(s[1].abs() < 1e-14 && s[2].abs() < 1e-14);
    }

    #[test]
    fn spin_magnitude_bounded_by_half_norm() {
        // |psi^dag Sigma psi| <= psi^dag psi pointwise, so |S| <= hbar/2 n^2.
        let g = Grid3::cube(12, 3.0).unwrap();
        for seed in 0..6 {
            let f = seed as f64;
            let psi = SpinorField::from_fn(g.clone(), |[x, y, z]| {
                let e = (-(x * x + y * y + z * z) / 1.5).exp();
                [
                    Complex64::new(e * (1.0 + 0.3 * f), 0.2 * x * e * f),
                    Complex64::new(0.4 * y * e, e * (0.5 - 0.1 * f)),
                    Complex64::new(0.3 * e * z, 0.1 * f * e),
                    Complex64::new(-0.2 * e, 0.6 * e * (x + y) * f.sin()),
                ]
            });
            let s = spin_term(&psi, &params());
            let mag = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            let bound = 0.5 * psi.norm_sq();
            assert!(
                mag <= bound * (1.0 + 1e-12),
                "seed {seed}: |S| = {mag} exceeds {bound}"
            );
        }
    }

    #[test]
    fn orbital_term_on_unit_circulation_state() {
        // psi_1 = N (x + i y) exp(-r^2 / 2 sigma^2): L_z = hbar exactly in
        // the continuum; fourth-order differences at this resolution are
        // good to ~1e-3.
        let sigma = 1.2;
        let g = Grid3::cube(32, 8.0).unwrap();
        let mut psi = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp();
            [
                Complex64::new(x * e, y * e),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        });
        psi.normalize().unwrap();
        let l = orbital_term(&psi, &params(), Scheme::Fd4).unwrap();
        assert!((l.value[2] - 1.0).abs() < 1e-2, "L_z = {}", l.value[2]);
        assert!(l.value[0].abs() < 1e-10 && l.value[1].abs() < 1e-10);
        assert!(!l.warning, "residuals {:?}", l.imag_residual);
    }

    #[test]
    fn gauge_term_uniform_field_oracle() {
        // A = (1/2) B0 x r for uniform B0; for a spherical Gaussian charge
        // cloud the integral is analytic:
        // J_gauge = -(q / 2c) (2/3) <r^2> B0 with <r^2> = 3 sigma^2 / 2
        // for |psi|^2 ~ exp(-r^2/sigma^2).
        let sigma = 1.0f64;
        let g = Grid3::cube(32, 8.0).unwrap();
        let psi = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp();
            [
                Complex64::new(e, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        });
        let b0 = [0.3, -1.1, 0.7];
        let a = VectorField::from_fn(g.clone(), |[x, y, z]| {
            [
                0.5 * (b0[1] * z - b0[2] * y),
                0.5 * (b0[2] * x - b0[0] * z),
                0.5 * (b0[0] * y - b0[1] * x),
            ]
        });
        let p = params();
        let q = p.e * psi.norm_sq();
        let r2_mean = 1.5 * sigma * sigma;
        let jg = gauge_term(&psi, &a, &p).unwrap();
        for c in 0..3 {
            let expect = -(q / (2.0 * p.c)) * (2.0 / 3.0) * r2_mean * b0[c];
            assert!(
                (jg[c] - expect).abs() < 1e-10 * expect.abs().max(1.0),
                "component {c}: {} vs {expect}",
                jg[c]
            );
        }

        // e = 0: exactly zero. Sign flip: exact negation.
        let p0 = PhysicalParams::natural(0.0);
        let z = gauge_term(&psi, &a, &p0).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
        let pm = PhysicalParams::natural(1.0);
        let jm = gauge_term(&psi, &a, &pm).unwrap();
        for c in 0..3 {
            assert_eq!(jm[c].to_bits(), (-jg[c]).to_bits());
        }
    }

    #[test]
    fn hamiltonian_is_hermitian_in_discrete_inner_product() {
        // The zero-extended centred stencil is an exactly antisymmetric
        // matrix, so -i hbar d is hermitian including boundary truncation;
        // real phi and A keep it so.
        let g = Grid3::cube(16, 4.0).unwrap();
        let psi = test_spinor(&g);
        let phi2 = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / 1.7).exp();
            [
                Complex64::new(0.2 * e, -0.1 * y * e),
                Complex64::new(e, 0.0),
                Complex64::new(0.0, 0.4 * e),
                Complex64::new(0.1 * x * e, 0.1 * e),
            ]
        });
        let pot = ScalarField::from_fn(g.clone(), |[x, y, z]| {
            0.3 * (-(x * x + y * y + z * z) / 4.0).exp()
        });
        let a = VectorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / 3.0).exp();
            [-y * e, x * e, 0.2 * z * e]
        });
        let p = params();
        let h_psi = apply_h(&psi, Some(&pot), Some(&a), &p, Scheme::Fd4).unwrap();
        let h_phi = apply_h(&phi2, Some(&pot), Some(&a), &p, Scheme::Fd4).unwrap();
        let lhs = phi2.inner(&h_psi).unwrap();
        let rhs = h_phi.inner(&psi).unwrap();
        let scale = lhs.norm().max(1.0);
        assert!(
            (lhs - rhs).norm() < 1e-12 * scale,
            "hermiticity defect {} vs scale {scale}",
            (lhs - rhs).norm()
        );
    }

    #[test]
    fn free_hamiltonian_on_rest_spinor_gives_mass() {
        // A constant-profile upper spinor is not an eigenstate (gradients
        // at the box edge), but a well-localized Gaussian at rest gives
        // <H> = m c^2 + kinetic corrections of order (hbar/(m c sigma))^2.
        let g = Grid3::cube(24, 8.0).unwrap();
        let sigma = 1.5f64;
        let mut psi = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp();
            [
                Complex64::new(e, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        });
        psi.normalize().unwrap();
        let p = params();
        let h = apply_h(&psi, None, None, &p, Scheme::Fd4).unwrap();
        let energy = psi.inner(&h).unwrap();
        assert!(energy.im.abs() < 1e-12);
        // <H> for the upper-only Gaussian: exactly m c^2 (the kinetic term
        // only mixes upper into lower, which is empty here).
        assert!((energy.re - 1.0).abs() < 1e-10, "<H> = {}", energy.re);
    }

    #[test]
    fn j_z_on_spin_orbital_eigenstate() {
        // gaussian-spin-up-like state: j_z = 1/2 eigenstate of J_z.
        let sigma = 1.0f64;
        let g = Grid3::cube(32, 8.0).unwrap();
        let c2 = 0.5 / (sigma * sigma);
        let mut psi = SpinorField::from_fn(g.clone(), |[x, y, z]| {
            let e = (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp();
            [
                Complex64::new(e, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, c2 * z * e),
                Complex64::new(-c2 * y * e, c2 * x * e),
            ]
        });
        psi.normalize().unwrap();
        let jz = apply_j(&psi, 2, &params(), Scheme::Fd4).unwrap();
        let half = SpinorField::linear_comb(
            Complex64::new(1.0, 0.0),
            &jz,
            Complex64::new(-0.5, 0.0),
            &psi,
        )
        .unwrap();
        // Both the L2 eigen-residual (~1.2e-2) and the expectation error
        // (~1.3e-3) are fourth-order stencil truncation at h = 0.5 and
        // shrink as h^4 under refinement.
        let rel = half.norm_sq().sqrt();
        assert!(rel < 2e-2, "J_z eigen-residual {rel}");
        let expect = psi.inner(&jz).unwrap();
        assert!(
            (expect.re - 0.5).abs() < 5e-3,
            "<J_z> = {} should be hbar/2",
            expect.re
        );
        assert!(expect.im.abs() < 1e-12);
        assert!(apply_j(&psi, 3, &params(), Scheme::Fd4).is_err());
    }

    #[test]
    fn j_commutator_closes_at_fourth_order() {
        let p = params();
        let defect_at = |n: usize| {
            let g = Grid3::cube(n, 8.0).unwrap();
            j_commutator_defect(&test_spinor(&g), &p, Scheme::Fd4).unwrap()
        };
        let d16 = defect_at(16);
        let d32 = defect_at(32);
        assert!(d32 < d16, "defect must shrink: {d16} -> {d32}");
        let ratio = d16 / d32;
        assert!(
            (8.0..40.0).contains(&ratio),
            "expected ~16x per halving, got {ratio} ({d16} -> {d32})"
        );
        // An 8^3 grid has no interior once the doubled stencil inset is cut.
        let tiny = Grid3::cube(8, 2.0).unwrap();
        assert!(j_commutator_defect(&test_spinor(&tiny), &p, Scheme::Fd4).is_err());
    }
}
