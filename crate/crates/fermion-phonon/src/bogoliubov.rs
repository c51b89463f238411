//! Bogoliubov diagonalization of the bosonized fermion-phonon Hamiltonian.
//!
//! For every boson momentum `0 < |p| <= pi / a` the Hamiltonian couples the
//! fermion density mode and the phonon mode through the 2x2 blocks `A(p)` and
//! `B(p)`. Diagonalizing `C = A^{1/2} B A^{1/2}` gives the renormalized
//! velocities and the mixing coefficients `rho_X`, `sigma_X` of the fermion
//! density in the new normal modes. Above the cutoff the couplings vanish and
//! the blocks are already diagonal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derived_couplings, validate_params, DerivedCouplings, ModelParams, MomentumGrid};

/// A real 2x2 matrix, rows then columns, index 0 = fermion (F), 1 = phonon (P).
pub type Mat2 = [[f64; 2]; 2];

/// Relative size of `W` (in units of `v_F^2`) below which the two branches are
/// treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Boson flavor of a normal mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    /// Fermion density branch.
    F,
    /// Phonon branch.
    P,
}

impl Flavor {
    /// Both flavors, fermion first.
    pub const BOTH: [Flavor; 2] = [Flavor::F, Flavor::P];

    /// Matrix index.
    pub fn index(self) -> usize {
        match self {
            Flavor::F => 0,
            Flavor::P => 1,
        }
    }
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Flavor::F => "F",
            Flavor::P => "P",
        })
    }
}

/// Quadratic-form blocks of the Hamiltonian at one momentum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrices {
    /// Momentum.
    pub p: f64,
    /// Kinetic block `diag(1 - gamma1(p), 1)`.
    pub a: Mat2,
    /// Potential block.
    pub b: Mat2,
    /// `A^{1/2} B A^{1/2}`.
    pub c: Mat2,
}

fn within_cutoff(params: &ModelParams, p: f64) -> bool {
    // The boundary mode p = pi / a is inside; compare on the mode-index scale so
    // that a momentum computed as m * 2 pi / L is classified exactly.
    let m = p.abs() * params.l / (2.0 * PI);
    let n_a = params.n_a() as f64;
    m <= n_a + 1e-9 * n_a.max(1.0)
}

/// Blocks `A(p)`, `B(p)` and `C(p)` at momentum `p != 0`.
pub fn block_matrices(params: &ModelParams, p: f64) -> Result<BlockMatrices> {
    if p == 0.0 {
        return Err(Error::ZeroMode);
    }
    let (g1, g2) = if within_cutoff(params, p) {
        (params.gamma1(), params.gamma2())
    } else {
        (0.0, 0.0)
    };
    let (vf, vp) = (params.v_f, params.v_p);
    let p2 = p * p;
    let a = [[1.0 - g1, 0.0], [0.0, 1.0]];
    let off = p2 * vf * vp * g2;
    let b = [[p2 * vf * vf * (1.0 + g1), off], [off, p2 * vp * vp]];
    let s = [(1.0 - g1).sqrt(), 1.0];
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = s[i] * b[i][j] * s[j];
        }
    }
    Ok(BlockMatrices { p, a, b, c })
}

/// Eigen-decomposition of the blocks at one momentum and the induced
/// transformation of the boson operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericDiagonalization {
    /// Momentum.
    pub p: f64,
    /// Fermion-branch frequency (larger eigenvalue of `C`, square-rooted).
    pub omega_f: f64,
    /// Phonon-branch frequency.
    pub omega_p: f64,
    /// Orthogonal matrix with `C = U diag(omega^2) U^T`; column 0 is the F branch.
    pub u: Mat2,
    /// `A^{-1/2} U`, mapping new momenta to old ones.
    pub m_pi: Mat2,
    /// `A^{1/2} U`, mapping new fields to old ones.
    pub m_phi: Mat2,
    /// Coefficients of `b~(p)` in `b(p)`.
    pub curly_c: Mat2,
    /// Coefficients of `b~†(-p)` in `b(p)`.
    pub curly_s: Mat2,
}

impl NumericDiagonalization {
    /// Renormalized velocity `omega_X / |p|`.
    pub fn velocity(&self, x: Flavor) -> f64 {
        match x {
            Flavor::F => self.omega_f / self.p.abs(),
            Flavor::P => self.omega_p / self.p.abs(),
        }
    }

    /// `rho_X = C_{F,X}`.
    pub fn rho(&self, x: Flavor) -> f64 {
        self.curly_c[0][x.index()]
    }

    /// `sigma_X = -S_{F,X}`.
    pub fn sigma(&self, x: Flavor) -> f64 {
        -self.curly_s[0][x.index()]
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric 2x2
/// matrix, computed without cancellation in the eigenvector components.
fn symmetric_eigen(m: &Mat2) -> (f64, f64, [f64; 2], [f64; 2]) {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let h = 0.5 * (m[0][0] - m[1][1]);
    let beta = m[0][1];
    let s = h.hypot(beta);
    let hi = mean + s;
    // The smaller root via the determinant keeps relative accuracy.
    let det = m[0][0] * m[1][1] - beta * beta;
    let lo = if hi != 0.0 { det / hi } else { mean - s };
    let (x, y) = if h >= 0.0 { (h + s, beta) } else { (beta, s - h) };
    let n = x.hypot(y);
    let v_hi = if n > 0.0 { [x / n, y / n] } else { [1.0, 0.0] };
    let v_lo = [-v_hi[1], v_hi[0]];
    (hi, lo, v_hi, v_lo)
}

/// Fixes the sign of an eigenvector column: the phonon component is made
/// positive, or the fermion component when the phonon component vanishes.
fn normalize_column(v: [f64; 2]) -> [f64; 2] {
    let key = if v[1] != 0.0 { v[1] } else { v[0] };
    if key < 0.0 {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Numerical diagonalization at momentum `p != 0`.
pub fn diagonalize_numeric(params: &ModelParams, p: f64) -> Result<NumericDiagonalization> {
    let blocks = block_matrices(params, p)?;
    let (hi, lo, v_hi, v_lo) = symmetric_eigen(&blocks.c);
    let p2 = p * p;
    let w = (hi - lo) / p2;
    if w < DEGENERACY_THRESHOLD * params.v_f * params.v_f {
        return Err(Error::DegenerateBranches { w });
    }
    let col_f = normalize_column(v_hi);
    let col_p = normalize_column(v_lo);
    let u = [[col_f[0], col_p[0]], [col_f[1], col_p[1]]];
    let omega = [hi.max(0.0).sqrt(), lo.max(0.0).sqrt()];
    let sa = [blocks.a[0][0].sqrt(), blocks.a[1][1].sqrt()];
    let v = [params.v_f, params.v_p];
    let mut m_pi = [[0.0; 2]; 2];
    let mut m_phi = [[0.0; 2]; 2];
    let mut curly_c = [[0.0; 2]; 2];
    let mut curly_s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m_pi[i][j] = u[i][j] / sa[i];
            m_phi[i][j] = sa[i] * u[i][j];
            let vt = omega[j] / p.abs();
            let phi_part = (v[i] / vt).sqrt() * m_phi[i][j];
            let pi_part = (vt / v[i]).sqrt() * m_pi[i][j];
            curly_c[i][j] = 0.5 * (phi_part + pi_part);
            curly_s[i][j] = 0.5 * (phi_part - pi_part);
        }
    }
    Ok(NumericDiagonalization {
        p,
        omega_f: omega[0],
        omega_p: omega[1],
        u,
        m_pi,
        m_phi,
        curly_c,
        curly_s,
    })
}

/// Closed-form solution of the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovSolution {
    /// Model parameters.
    pub params: ModelParams,
    /// Dimensionless couplings.
    pub couplings: DerivedCouplings,
    /// Renormalized fermion velocity.
    pub vtilde_f: f64,
    /// Renormalized phonon velocity.
    pub vtilde_p: f64,
    /// Weight of the F branch in the same-chirality density.
    pub rho_f: f64,
    /// Weight of the P branch in the same-chirality density.
    pub rho_p: f64,
    /// Weight of the F branch in the opposite-chirality density.
    pub sigma_f: f64,
    /// Weight of the P branch in the opposite-chirality density.
    pub sigma_p: f64,
    /// Ground-state energy.
    #[serde(rename = "E0")]
    pub e0: f64,
}

impl BogoliubovSolution {
    /// Solution of the non-interacting model.
    pub fn free(params: ModelParams) -> Self {
        Self {
            params,
            couplings: derived_couplings(&params),
            vtilde_f: params.v_f,
            vtilde_p: params.v_p,
            rho_f: 1.0,
            rho_p: 0.0,
            sigma_f: 0.0,
            sigma_p: 0.0,
            e0: 0.0,
        }
    }

    /// Renormalized velocity of flavor `x` below the cutoff.
    pub fn vtilde(&self, x: Flavor) -> f64 {
        match x {
            Flavor::F => self.vtilde_f,
            Flavor::P => self.vtilde_p,
        }
    }

    /// Bare velocity of flavor `x`.
    pub fn bare_velocity(&self, x: Flavor) -> f64 {
        match x {
            Flavor::F => self.params.v_f,
            Flavor::P => self.params.v_p,
        }
    }

    /// `rho_X`.
    pub fn rho(&self, x: Flavor) -> f64 {
        match x {
            Flavor::F => self.rho_f,
            Flavor::P => self.rho_p,
        }
    }

    /// `sigma_X`.
    pub fn sigma(&self, x: Flavor) -> f64 {
        match x {
            Flavor::F => self.sigma_f,
            Flavor::P => self.sigma_p,
        }
    }

    /// Whether mode index `m` (momentum `2 pi m / L`) lies inside the cutoff.
    pub fn in_cutoff(&self, m: i64) -> bool {
        m != 0 && m.unsigned_abs() <= self.params.n_a()
    }

    /// `rho_X(p)` for `p = 2 pi m / L`.
    pub fn rho_at(&self, x: Flavor, m: i64) -> f64 {
        if self.in_cutoff(m) {
            self.rho(x)
        } else if x == Flavor::F {
            1.0
        } else {
            0.0
        }
    }

    /// `sigma_X(p)` for `p = 2 pi m / L`.
    pub fn sigma_at(&self, x: Flavor, m: i64) -> f64 {
        if self.in_cutoff(m) {
            self.sigma(x)
        } else {
            0.0
        }
    }

    /// `v~_X(p)` for `p = 2 pi m / L`.
    pub fn vtilde_at(&self, x: Flavor, m: i64) -> f64 {
        if self.in_cutoff(m) {
            self.vtilde(x)
        } else {
            self.bare_velocity(x)
        }
    }

    /// `rho_F^2 - sigma_F^2 + rho_P^2 - sigma_P^2` (equals 1).
    pub fn norm_identity(&self) -> f64 {
        self.rho_f * self.rho_f - self.sigma_f * self.sigma_f + self.rho_p * self.rho_p - self.sigma_p * self.sigma_p
    }

    /// `(rho_F^2 + sigma_F^2) v~_F + (rho_P^2 + sigma_P^2) v~_P` (equals `v_F`).
    pub fn velocity_sum(&self) -> f64 {
        (self.rho_f * self.rho_f + self.sigma_f * self.sigma_f) * self.vtilde_f
            + (self.rho_p * self.rho_p + self.sigma_p * self.sigma_p) * self.vtilde_p
    }

    /// `sigma_F^2 + sigma_P^2`, the anomalous dimension of the fermion field.
    pub fn sigma_sq(&self) -> f64 {
        self.sigma_f * self.sigma_f + self.sigma_p * self.sigma_p
    }
}

/// Decoupled solution (`gamma2 = 0`): a Thirring-type fermion branch and a free
/// phonon branch, labelled by which of the two is faster.
fn decoupled(params: &ModelParams, couplings: DerivedCouplings) -> Result<(f64, f64, [f64; 4])> {
    let g1 = couplings.gamma1;
    let u = params.v_f * (1.0 - g1 * g1).sqrt();
    let t = ((1.0 - g1) / (1.0 + g1)).powf(0.25);
    let rho = 0.5 * (t + 1.0 / t);
    let sigma = 0.5 * (1.0 / t - t);
    if u > params.v_p {
        Ok((u, params.v_p, [rho, 0.0, sigma, 0.0]))
    } else {
        // The fermion branch is the slower one, so it carries the P label.
        Ok((params.v_p, u, [0.0, rho, 0.0, sigma]))
    }
}

/// Closed-form renormalized velocities and mixing coefficients.
///
/// The textbook expressions contain differences that cancel as `gamma2 -> 0`;
/// they are rewritten here in algebraically equivalent forms whose values agree
/// with the direct ones but keep full relative accuracy for small couplings.
pub fn solve_closed_form(params: &ModelParams) -> Result<BogoliubovSolution> {
    let params = validate_params(*params)?;
    let couplings = derived_couplings(&params);
    let (vf, vp) = (params.v_f, params.v_p);
    let (g1, g2, w) = (couplings.gamma1, couplings.gamma2, couplings.w);
    if w < DEGENERACY_THRESHOLD * vf * vf {
        return Err(Error::DegenerateBranches { w });
    }
    let (vtf, vtp, coeffs) = if g2 == 0.0 {
        decoupled(&params, couplings)?
    } else {
        let d = DerivedCouplings::d(&params, g1);
        let s = vf * vf * (1.0 - g1 * g1) + vp * vp;
        let det = vf * vf * vp * vp * (1.0 - g1) * (1.0 + g1 - g2 * g2);
        let vtf2 = 0.5 * (s + w);
        let vtf = vtf2.sqrt();
        let vtp = (det / vtf2).sqrt();
        // gamma2 / sqrt(v~_F^2 - v_F^2 (1 - gamma1^2)), where the radicand is (W - D) / 2.
        let cross = 2.0 * vf * vp * (1.0 - g1).sqrt();
        let ratio_f = if d > 0.0 {
            g2.signum() * (2.0 * (w + d)).sqrt() / cross
        } else {
            g2 / (0.5 * (w - d)).sqrt()
        };
        // gamma2 / sqrt(v_F^2 (1 - gamma1^2) - v~_P^2), where the radicand is (W + D) / 2.
        let ratio_p = if d < 0.0 {
            g2.signum() * (2.0 * (w - d)).sqrt() / cross
        } else {
            g2 / (0.5 * (w + d)).sqrt()
        };
        let pref_f = (vf / vtf).sqrt() * vp / (2.0 * w.sqrt()) * ratio_f;
        let pref_p = -(vf / vtp).sqrt() * vp / (2.0 * w.sqrt()) * ratio_p;
        let base = vf * (1.0 - g1);
        (
            vtf,
            vtp,
            [
                pref_f * (vtf + base),
                pref_p * (vtp + base),
                pref_f * (vtf - base),
                pref_p * (vtp - base),
            ],
        )
    };
    let mut sol = BogoliubovSolution {
        params,
        couplings,
        vtilde_f: vtf,
        vtilde_p: vtp,
        rho_f: coeffs[0],
        rho_p: coeffs[1],
        sigma_f: coeffs[2],
        sigma_p: coeffs[3],
        e0: 0.0,
    };
    sol.e0 = ground_state_energy(&params, &sol);
    Ok(sol)
}

/// Above this many cutoff modes the ground-state sum uses its closed form.
const DIRECT_SUM_LIMIT: u64 = 1_000_000;

/// `E0 = (1/2) sum_X sum_{0 < |p| <= pi/a} (v~_X - v_X) |p|`.
pub fn ground_state_energy(params: &ModelParams, solution: &BogoliubovSolution) -> f64 {
    let shift = solution.vtilde_f - params.v_f + solution.vtilde_p - params.v_p;
    let n_a = params.n_a();
    let spacing = 2.0 * PI / params.l;
    // sum over both signs of p: 2 * spacing * n_a (n_a + 1) / 2.
    let momentum_sum = if n_a > DIRECT_SUM_LIMIT {
        spacing * (n_a as f64) * (n_a as f64 + 1.0)
    } else {
        crate::numeric::compensated_sum((1..=n_a).map(|m| 2.0 * spacing * m as f64))
    };
    0.5 * shift * momentum_sum
}

/// One eigenstate of the diagonalized Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// Charge of the `+` chirality.
    pub q_plus: i32,
    /// Charge of the `-` chirality.
    pub q_minus: i32,
    /// Occupation of the phonon zero mode.
    pub m_p0: u32,
    /// Boson occupations `(flavor, m, count)` with `p = 2 pi m / L`.
    pub occupations: Vec<(Flavor, i32, u32)>,
    /// Energy including `E0`.
    pub energy: f64,
    /// Number of entries sharing this energy level.
    pub degeneracy: usize,
}

struct BosonMode {
    flavor: Flavor,
    m: i32,
    quantum: f64,
}

/// All eigenstates with `energy - E0 <= e_max`, sorted by energy.
pub fn spectrum(
    params: &ModelParams,
    solution: &BogoliubovSolution,
    e_max: f64,
    grid: &MomentumGrid,
) -> Result<Vec<SpectrumEntry>> {
    if !e_max.is_finite() || e_max < 0.0 {
        return Err(Error::BadArgument(format!("E_max must be finite and non-negative, got {e_max}")));
    }
    let spacing = 2.0 * PI / params.l;
    let k = grid.k as i64;
    // The first momentum outside the grid must not fit below the cap.
    for x in Flavor::BOTH {
        let outside = solution.vtilde_at(x, k + 1) * spacing * (k + 1) as f64;
        if outside <= e_max {
            return Err(Error::GridTooSmall(format!(
                "mode {x}(p = {} * 2 pi / L) has energy {outside} <= E_max = {e_max}",
                k + 1
            )));
        }
    }
    let mut modes: Vec<BosonMode> = Vec::new();
    for x in Flavor::BOTH {
        for m in (-k..=k).filter(|m| *m != 0) {
            let quantum = solution.vtilde_at(x, m) * spacing * m.unsigned_abs() as f64;
            if quantum <= e_max {
                modes.push(BosonMode {
                    flavor: x,
                    m: m as i32,
                    quantum,
                });
            }
        }
    }
    let charge_unit = PI * params.v_f / params.l;
    let g1 = solution.couplings.gamma1;
    let q_max = (e_max / (charge_unit * (1.0 - g1.abs()))).sqrt().floor() as i32 + 1;
    let mut out = Vec::new();
    let tol = 1e-12 * e_max.max(charge_unit);
    for q_plus in -q_max..=q_max {
        for q_minus in -q_max..=q_max {
            let (qp, qm) = (q_plus as f64, q_minus as f64);
            let zero = charge_unit * (qp * qp + qm * qm + 2.0 * g1 * qp * qm);
            if zero > e_max + tol {
                continue;
            }
            let mut m_p0 = 0u32;
            while zero + params.omega0 * m_p0 as f64 <= e_max + tol {
                let base = zero + params.omega0 * m_p0 as f64;
                let mut occ = Vec::new();
                fill_modes(&modes, 0, base, e_max + tol, &mut occ, &mut |occupations, energy| {
                    out.push(SpectrumEntry {
                        q_plus,
                        q_minus,
                        m_p0,
                        occupations: occupations.to_vec(),
                        energy: solution.e0 + energy,
                        degeneracy: 0,
                    });
                });
                m_p0 += 1;
            }
        }
    }
    out.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then((a.q_plus, a.q_minus, a.m_p0).cmp(&(b.q_plus, b.q_minus, b.m_p0)))
            .then(a.occupations.cmp(&b.occupations))
    });
    tally_degeneracies(&mut out, tol);
    Ok(out)
}

fn fill_modes(
    modes: &[BosonMode],
    pos: usize,
    energy: f64,
    cap: f64,
    occ: &mut Vec<(Flavor, i32, u32)>,
    emit: &mut impl FnMut(&[(Flavor, i32, u32)], f64),
) {
    if pos == modes.len() {
        emit(occ, energy);
        return;
    }
    fill_modes(modes, pos + 1, energy, cap, occ, emit);
    let mode = &modes[pos];
    let mut n = 1u32;
    while energy + mode.quantum * n as f64 <= cap {
        occ.push((mode.flavor, mode.m, n));
        fill_modes(modes, pos + 1, energy + mode.quantum * n as f64, cap, occ, emit);
        occ.pop();
        n += 1;
    }
}

fn tally_degeneracies(entries: &mut [SpectrumEntry], tol: f64) {
    let mut start = 0;
    while start < entries.len() {
        let mut end = start + 1;
        while end < entries.len() && entries[end].energy - entries[start].energy <= tol {
            end += 1;
        }
        for e in &mut entries[start..end] {
            e.degeneracy = end - start;
        }
        start = end;
    }
}
