//! Model parameters, stability validation, dimensionless couplings and the
//! momentum-grid bookkeeping shared by every other module.
//!
//! Units: hbar = 1 and no internal rescaling, so the system size `L` appears
//! explicitly wherever a mode spacing `2 pi / L` enters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chirality `r`: right movers (`+`) and left movers (`-`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chirality {
    /// Right movers, `r = +1`.
    #[serde(rename = "+")]
    Plus,
    /// Left movers, `r = -1`.
    #[serde(rename = "-")]
    Minus,
}

impl Chirality {
    /// Both chiralities, `+` first.
    pub const BOTH: [Chirality; 2] = [Chirality::Plus, Chirality::Minus];

    /// `+1` or `-1`.
    pub fn sign(self) -> i32 {
        match self {
            Chirality::Plus => 1,
            Chirality::Minus => -1,
        }
    }

    /// Opposite chirality.
    pub fn flip(self) -> Self {
        match self {
            Chirality::Plus => Chirality::Minus,
            Chirality::Minus => Chirality::Plus,
        }
    }

    /// Array slot: 0 for `+`, 1 for `-`.
    pub fn index(self) -> usize {
        match self {
            Chirality::Plus => 0,
            Chirality::Minus => 1,
        }
    }

    /// Chirality with the sign of `s`; `None` for zero.
    pub fn from_sign(s: i64) -> Option<Self> {
        match s.signum() {
            1 => Some(Chirality::Plus),
            -1 => Some(Chirality::Minus),
            _ => None,
        }
    }
}

impl std::fmt::Display for Chirality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Chirality::Plus => "+",
            Chirality::Minus => "-",
        })
    }
}

/// Physical inputs of the fermion-phonon Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Fermi velocity.
    pub v_f: f64,
    /// Phonon velocity, strictly below `v_f`.
    pub v_p: f64,
    /// Fermion-fermion coupling (velocity units).
    pub lambda: f64,
    /// Fermion-phonon coupling (velocity units).
    pub g: f64,
    /// Interaction range, which also acts as the UV cutoff.
    pub a: f64,
    /// System size.
    #[serde(rename = "L")]
    pub l: f64,
    /// Frequency of the phonon zero mode (IR cutoff).
    pub omega0: f64,
}

impl ModelParams {
    /// Builds parameters, defaulting the phonon zero-mode frequency to one
    /// boson-mode spacing `2 pi v_p / L`.
    pub fn new(v_f: f64, v_p: f64, lambda: f64, g: f64, a: f64, l: f64, omega0: Option<f64>) -> Self {
        Self {
            v_f,
            v_p,
            lambda,
            g,
            a,
            l,
            omega0: omega0.unwrap_or(2.0 * PI * v_p / l),
        }
    }

    /// Same parameters with different couplings.
    pub fn with_couplings(&self, lambda: f64, g: f64) -> Self {
        Self { lambda, g, ..*self }
    }

    /// Dimensionless fermion-fermion coupling `lambda / (2 pi v_f)`.
    pub fn gamma1(&self) -> f64 {
        self.lambda / (2.0 * PI * self.v_f)
    }

    /// Dimensionless fermion-phonon coupling `g / (v_p sqrt(pi v_f))`.
    pub fn gamma2(&self) -> f64 {
        self.g / (self.v_p * (PI * self.v_f).sqrt())
    }

    /// Number of positive boson modes with `p <= pi / a`.
    pub fn n_a(&self) -> u64 {
        count_modes(self.l, self.a)
    }
}

/// Dimensionless couplings and the discriminant-like combination `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedCouplings {
    /// `lambda / (2 pi v_f)`.
    pub gamma1: f64,
    /// `g / (v_p sqrt(pi v_f))`.
    pub gamma2: f64,
    /// `sqrt(D^2 + 4 v_f^2 v_p^2 gamma2^2 (1 - gamma1))` with `D = v_f^2 (1 - gamma1^2) - v_p^2`.
    #[serde(rename = "W")]
    pub w: f64,
}

impl DerivedCouplings {
    /// The combination `D = v_f^2 (1 - gamma1^2) - v_p^2` entering `W`.
    pub fn d(params: &ModelParams, gamma1: f64) -> f64 {
        params.v_f * params.v_f * (1.0 - gamma1 * gamma1) - params.v_p * params.v_p
    }
}

/// Checks every invariant of [`ModelParams`] and returns the parameters unchanged.
pub fn validate_params(raw: ModelParams) -> Result<ModelParams> {
    let fields = [
        ("v_f", raw.v_f),
        ("v_p", raw.v_p),
        ("lambda", raw.lambda),
        ("g", raw.g),
        ("a", raw.a),
        ("L", raw.l),
        ("omega0", raw.omega0),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(Error::BadGeometry(format!("{name} must be finite, got {value}")));
        }
    }
    let positive = [("v_f", raw.v_f), ("v_p", raw.v_p), ("a", raw.a), ("L", raw.l), ("omega0", raw.omega0)];
    for (name, value) in positive {
        if value <= 0.0 {
            return Err(Error::BadGeometry(format!("{name} must be positive, got {value}")));
        }
    }
    if raw.v_p >= raw.v_f {
        return Err(Error::BadGeometry(format!(
            "phonon velocity must be below the Fermi velocity (v_p = {}, v_f = {})",
            raw.v_p, raw.v_f
        )));
    }
    if raw.a >= raw.l {
        return Err(Error::BadGeometry(format!(
            "interaction range must be below the system size (a = {}, L = {})",
            raw.a, raw.l
        )));
    }
    let g1 = raw.gamma1();
    let g2 = raw.gamma2();
    if g1 >= 1.0 {
        return Err(Error::UnstableCouplings(format!(
            "lambda < 2 pi v_f is violated (gamma1 = {g1})"
        )));
    }
    if g2 * g2 >= 1.0 + g1 {
        return Err(Error::UnstableCouplings(format!(
            "2 (g / v_p)^2 < 2 pi v_f + lambda is violated (gamma2^2 = {}, 1 + gamma1 = {})",
            g2 * g2,
            1.0 + g1
        )));
    }
    Ok(raw)
}

/// Dimensionless couplings of validated parameters.
pub fn derived_couplings(params: &ModelParams) -> DerivedCouplings {
    let gamma1 = params.gamma1();
    let gamma2 = params.gamma2();
    let d = DerivedCouplings::d(params, gamma1);
    let cross = 4.0 * params.v_f.powi(2) * params.v_p.powi(2) * gamma2 * gamma2 * (1.0 - gamma1);
    DerivedCouplings {
        gamma1,
        gamma2,
        w: d.hypot(cross.sqrt()),
    }
}

/// Fermion and boson mode sets of a finite system.
///
/// Fermion modes are `k = (2 pi / L)(n + 1/2)` for `n = -K, ..., K - 1`, which is
/// the symmetric window `|k| <= (2 pi / L)(K - 1/2)` holding `2K` modes per
/// chirality. Boson modes are `p = (2 pi / L) m` with `|m| <= K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    /// System size.
    #[serde(rename = "L")]
    pub l: f64,
    /// Truncation parameter.
    #[serde(rename = "K")]
    pub k: u32,
    /// Number of positive boson modes with `p <= pi / a`.
    pub n_a: u64,
}

impl MomentumGrid {
    /// Mode spacing `2 pi / L`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Fermion momenta in units of `pi / L` (odd integers), ascending.
    pub fn fermion_half_units(&self) -> Vec<i32> {
        let k = self.k as i32;
        (-k..k).map(|n| 2 * n + 1).collect()
    }

    /// Fermion momenta, ascending.
    pub fn fermion_momenta(&self) -> Vec<f64> {
        self.fermion_half_units()
            .into_iter()
            .map(|k2| k2 as f64 * PI / self.l)
            .collect()
    }

    /// Boson mode numbers `m` with `p = (2 pi / L) m`, ascending.
    pub fn boson_indices(&self) -> Vec<i32> {
        let k = self.k as i32;
        (-k..=k).collect()
    }

    /// Boson momenta, ascending.
    pub fn boson_momenta(&self) -> Vec<f64> {
        self.boson_indices()
            .into_iter()
            .map(|m| m as f64 * self.spacing())
            .collect()
    }

    /// Whether `k2` (momentum in units of `pi / L`) is a fermion mode of the window.
    pub fn contains_fermion(&self, k2: i32) -> bool {
        k2 % 2 != 0 && k2.unsigned_abs() < 2 * self.k
    }
}

/// Builds the momentum grid for system size `L`, truncation `K` and range `a`.
pub fn momentum_grid(l: f64, k: u32, a: f64) -> Result<MomentumGrid> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::BadGeometry(format!("L must be positive, got {l}")));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::BadGeometry(format!("a must be positive, got {a}")));
    }
    if k == 0 {
        return Err(Error::BadGeometry("K must be at least 1".into()));
    }
    if a > l / 2.0 * (1.0 + 1e-12) {
        return Err(Error::BadGeometry(format!("a must not exceed L/2 (a = {a}, L = {l})")));
    }
    Ok(MomentumGrid {
        l,
        k,
        n_a: count_modes(l, a),
    })
}

/// `floor(L / (2a))` with ties counted in: a ratio within rounding distance of an
/// integer is treated as that integer, so the boundary mode `p = pi / a` is kept.
pub fn count_modes(l: f64, a: f64) -> u64 {
    let x = l / (2.0 * a);
    let nearest = x.round();
    if (x - nearest).abs() <= 8.0 * f64::EPSILON * x.max(1.0) {
        nearest as u64
    } else {
        x.floor() as u64
    }
}
