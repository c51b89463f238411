//! Closed-form correlation functions of the renormalized model in the
//! thermodynamic limit, free finite-size correlators, Klein sign combinatorics,
//! scaling exponents and the Cauchy determinant identity behind Wick's theorem.
//!
//! Every power of a complex number is taken on the principal branch, one factor
//! at a time; factors are never merged before exponentiation, so products of
//! non-integer powers do not depend on how the factors are grouped.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{BogoliubovSolution, Flavor};
use crate::error::{Error, Result};
use crate::model::Chirality;

/// One field insertion `psi_r^q(x, t)`; `q = +1` is `psi^dagger`, `q = -1` is `psi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsertionPoint {
    /// Chirality.
    pub r: Chirality,
    /// `+1` for a creation field, `-1` for an annihilation field.
    pub q: i32,
    /// Position.
    pub x: f64,
    /// Time.
    #[serde(default)]
    pub t: f64,
}

impl InsertionPoint {
    /// Insertion at `(x, t)`.
    pub fn new(r: Chirality, q: i32, x: f64, t: f64) -> Self {
        Self { r, q, x, t }
    }

    /// `(r, q)` pair entering the Klein word.
    pub fn word_entry(&self) -> (Chirality, i32) {
        (self.r, self.q)
    }
}

/// An ordered product of field insertions together with the renormalization
/// length and the finite regulator standing in for `i0+`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSpec {
    /// Insertions, leftmost operator first.
    pub insertions: Vec<InsertionPoint>,
    /// Renormalization length `ell`.
    pub ell: f64,
    /// Positive regulator; also used as the damping `epsilon` of finite-size fields.
    pub regulator: f64,
}

impl CorrelatorSpec {
    /// Builds and validates a spec.
    pub fn new(insertions: Vec<InsertionPoint>, ell: f64, regulator: f64) -> Result<Self> {
        let spec = Self {
            insertions,
            ell,
            regulator,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks `ell > 0`, `regulator > 0`, unit charges and finite coordinates.
    pub fn validate(&self) -> Result<()> {
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return Err(Error::BadArgument(format!("ell must be positive, got {}", self.ell)));
        }
        if !(self.regulator.is_finite() && self.regulator > 0.0) {
            return Err(Error::BadRegulator(self.regulator));
        }
        for ins in &self.insertions {
            if ins.q != 1 && ins.q != -1 {
                return Err(Error::BadArgument(format!("insertion charge must be +1 or -1, got {}", ins.q)));
            }
            if !(ins.x.is_finite() && ins.t.is_finite()) {
                return Err(Error::BadArgument("insertion coordinates must be finite".into()));
            }
        }
        Ok(())
    }

    /// The Klein word `[(r_1, q_1), ..., (r_N, q_N)]`.
    pub fn word(&self) -> Vec<(Chirality, i32)> {
        self.insertions.iter().map(InsertionPoint::word_entry).collect()
    }

    /// Two-point spec `<psi_r(x, t) psi_r^dagger(0, 0)>`.
    pub fn two_point(r: Chirality, x: f64, t: f64, ell: f64, regulator: f64) -> Result<Self> {
        Self::new(
            vec![InsertionPoint::new(r, -1, x, t), InsertionPoint::new(r, 1, 0.0, 0.0)],
            ell,
            regulator,
        )
    }
}

/// Vacuum expectation of the Klein word `R_{r_1}^{q_1 r_1} ... R_{r_N}^{q_N r_N}`.
///
/// Zero unless the charges balance within each chirality; otherwise every pair
/// `i < j` with `r_i = -` and `r_j = +` contributes a factor `-1`.
pub fn klein_sign(word: &[(Chirality, i32)]) -> i32 {
    let charge = |r: Chirality| word.iter().filter(|(s, _)| *s == r).map(|(_, q)| *q).sum::<i32>();
    if charge(Chirality::Plus) != 0 || charge(Chirality::Minus) != 0 {
        return 0;
    }
    let mut minus_seen = 0usize;
    let mut swaps = 0usize;
    for (r, _) in word {
        match r {
            Chirality::Minus => minus_seen += 1,
            Chirality::Plus => swaps += minus_seen,
        }
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Pair sums of a balanced Klein word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumRules {
    /// `sum_{n<m} q_n q_m [r_n = r_m]`, equal to `-N/2`.
    pub same: i32,
    /// `sum_{n<m} q_n q_m [r_n != r_m]`, equal to `0`.
    pub cross: i32,
}

/// Computes the same- and cross-chirality pair sums of a word whose Klein
/// expectation is nonzero.
pub fn sum_rules(word: &[(Chirality, i32)]) -> Result<SumRules> {
    if klein_sign(word) == 0 {
        return Err(Error::SelectionViolated);
    }
    let mut out = SumRules { same: 0, cross: 0 };
    for (n, (rn, qn)) in word.iter().enumerate() {
        for (rm, qm) in &word[n + 1..] {
            if rn == rm {
                out.same += qn * qm;
            } else {
                out.cross += qn * qm;
            }
        }
    }
    Ok(out)
}

/// Denominator `r x - v t` of a regulated power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Denominator {
    /// Chirality sign in front of `x`.
    pub r: Chirality,
    /// Position.
    pub x: f64,
    /// Time.
    pub t: f64,
    /// Velocity.
    pub v: f64,
}

/// `(i ell / (r x - v t + i regulator))^exponent` on the principal branch.
pub fn regulated_power(ell: f64, denom: Denominator, exponent: f64, regulator: f64) -> Complex64 {
    if exponent == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let base = denom.r.sign() as f64 * denom.x - denom.v * denom.t;
    let z = Complex64::new(0.0, ell) / Complex64::new(base, regulator);
    (z.ln() * exponent).exp()
}

fn require_equal_time(spec: &CorrelatorSpec, l: f64) -> Result<()> {
    spec.validate()?;
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::BadGeometry(format!("L must be positive, got {l}")));
    }
    for ins in &spec.insertions {
        if ins.t != 0.0 {
            return Err(Error::BadArgument("free finite-size correlators are equal-time only".into()));
        }
        if ins.x.abs() > l / 2.0 {
            return Err(Error::BadGeometry(format!("|x| = {} exceeds L/2 = {}", ins.x.abs(), l / 2.0)));
        }
    }
    Ok(())
}

/// `i / (2 L sin(pi (r dx + i reg) / L))`, the free equal-time pair kernel.
pub fn free_kernel(r: Chirality, dx: f64, regulator: f64, l: f64) -> Complex64 {
    let arg = Complex64::new(r.sign() as f64 * dx, regulator) * (PI / l);
    Complex64::new(0.0, 1.0) / (arg.sin() * (2.0 * l))
}

/// Free equal-time correlator of a system of size `L`: the Klein sign times the
/// product of free pair kernels raised to `-q_n q_m` over same-chirality pairs.
/// A word violating charge selection gives 0.
pub fn free_finite_l(spec: &CorrelatorSpec, l: f64) -> Result<Complex64> {
    require_equal_time(spec, l)?;
    let sign = klein_sign(&spec.word());
    if sign == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut value = Complex64::new(sign as f64, 0.0);
    let ins = &spec.insertions;
    for n in 0..ins.len() {
        for m in n + 1..ins.len() {
            if ins[n].r != ins[m].r {
                continue;
            }
            let kernel = free_kernel(ins[n].r, ins[n].x - ins[m].x, spec.regulator, l);
            value *= if ins[n].q * ins[m].q < 0 { kernel } else { kernel.inv() };
        }
    }
    Ok(value)
}

/// `<psi_r(x) psi_r^dagger(x')>` of the free system as the explicit momentum sum
/// `(1/L) sum_{r k > 0} e^{i k (x - x') - |k| reg}`, summed term by term until the
/// remaining geometric tail is below `1e-17` relative to the first term.
pub fn free_two_point_momentum_sum(r: Chirality, dx: f64, regulator: f64, l: f64) -> Result<Complex64> {
    if !(regulator.is_finite() && regulator > 0.0) {
        return Err(Error::BadRegulator(regulator));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::BadGeometry(format!("L must be positive, got {l}")));
    }
    let spacing = 2.0 * PI / l;
    let damping = spacing * regulator;
    // Tail after n terms is at most e^{-n d} / (1 - e^{-d}).
    let tail_factor = 1.0 / (-(-damping).exp_m1());
    let n_terms = ((tail_factor / 1e-17).ln() / damping).ceil().max(1.0) as u64;
    let s = r.sign() as f64;
    let mut acc = crate::numeric::ComplexNeumaier::new();
    for n in 0..n_terms {
        let k = spacing * (n as f64 + 0.5);
        let term = Complex64::new(-k * regulator, s * k * dx).exp();
        acc.add(term);
    }
    Ok(acc.total() / l)
}

/// Two-point function `<Psi_r(x, t) Psi_r^dagger(0, 0)>` of the renormalized model
/// in the thermodynamic limit.
pub fn two_point(r: Chirality, x: f64, t: f64, sol: &BogoliubovSolution, ell: f64, regulator: f64) -> Complex64 {
    let mut value = Complex64::new(1.0 / (2.0 * PI * ell), 0.0);
    for flavor in Flavor::BOTH {
        let v = sol.vtilde(flavor);
        let rho = sol.rho(flavor);
        let sigma = sol.sigma(flavor);
        value *= regulated_power(ell, Denominator { r, x, t, v }, rho * rho, regulator);
        value *= regulated_power(ell, Denominator { r: r.flip(), x, t, v }, sigma * sigma, regulator);
    }
    value
}

/// `c_{r,X; r_n, r_m}`: `rho_X^2 [r = r_n] + sigma_X^2 [r != r_n]` for equal
/// chiralities `r_n = r_m`, and `rho_X sigma_X` otherwise.
pub fn pair_exponent(sol: &BogoliubovSolution, r: Chirality, flavor: Flavor, rn: Chirality, rm: Chirality) -> f64 {
    let rho = sol.rho(flavor);
    let sigma = sol.sigma(flavor);
    if rn == rm {
        if r == rn {
            rho * rho
        } else {
            sigma * sigma
        }
    } else {
        rho * sigma
    }
}

/// N-point function of the renormalized model in the thermodynamic limit.
/// A word violating charge selection gives 0.
pub fn npoint_continuum(spec: &CorrelatorSpec, sol: &BogoliubovSolution) -> Result<Complex64> {
    spec.validate()?;
    let sign = klein_sign(&spec.word());
    if sign == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ins = &spec.insertions;
    let half_n = ins.len() as i32 / 2;
    let mut value = Complex64::new(sign as f64, 0.0) * (1.0 / (2.0 * PI * spec.ell)).powi(half_n);
    for n in 0..ins.len() {
        for m in n + 1..ins.len() {
            let qq = (ins[n].q * ins[m].q) as f64;
            for r in Chirality::BOTH {
                for flavor in Flavor::BOTH {
                    let c = pair_exponent(sol, r, flavor, ins[n].r, ins[m].r);
                    let denom = Denominator {
                        r,
                        x: ins[n].x - ins[m].x,
                        t: ins[n].t - ins[m].t,
                        v: sol.vtilde(flavor),
                    };
                    value *= regulated_power(spec.ell, denom, -qq * c, spec.regulator);
                }
            }
        }
    }
    Ok(value)
}

/// Order parameter channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderKind {
    /// Charge density wave, exponent `sum_X (rho_X - sigma_X)^2`.
    #[serde(rename = "CDW")]
    Cdw,
    /// Superconducting pairing, exponent `sum_X (rho_X + sigma_X)^2`.
    #[serde(rename = "SC")]
    Sc,
}

/// CDW or SC order-parameter correlator
/// `(1/2 pi ell)^2 prod_X (ell^2 / (x^2 - (v~_X t - i reg)^2))^{(rho_X -+ sigma_X)^2}`.
pub fn order_correlator(
    kind: OrderKind,
    x: f64,
    t: f64,
    sol: &BogoliubovSolution,
    ell: f64,
    regulator: f64,
) -> Complex64 {
    let pref = 1.0 / (2.0 * PI * ell);
    let mut value = Complex64::new(pref * pref, 0.0);
    for flavor in Flavor::BOTH {
        let rho = sol.rho(flavor);
        let sigma = sol.sigma(flavor);
        let e = match kind {
            OrderKind::Cdw => (rho - sigma) * (rho - sigma),
            OrderKind::Sc => (rho + sigma) * (rho + sigma),
        };
        if e == 0.0 {
            continue;
        }
        let shifted = Complex64::new(sol.vtilde(flavor) * t, -regulator);
        let z = Complex64::new(ell * ell, 0.0) / (Complex64::new(x * x, 0.0) - shifted * shifted);
        value *= (z.ln() * e).exp();
    }
    value
}

/// One exponent `c_{r,X; r_n, r_m}` of the pair table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairExponent {
    /// Chirality of the denominator.
    pub r: Chirality,
    /// Flavor.
    pub flavor: Flavor,
    /// Chirality of the left insertion.
    pub r_n: Chirality,
    /// Chirality of the right insertion.
    pub r_m: Chirality,
    /// Value.
    pub value: f64,
}

/// Scaling exponents derived from one solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    /// All sixteen pair exponents `c_{r,X; r_n, r_m}`.
    pub pairs: Vec<PairExponent>,
    /// `sum_X (rho_X - sigma_X)^2`.
    pub delta_cdw: f64,
    /// `sum_X (rho_X + sigma_X)^2`.
    pub delta_sc: f64,
    /// `sum_X (rho_X^2 + sigma_X^2)`.
    pub fermion_dimension: f64,
}

impl ExponentTable {
    /// Looks up `c_{r,X; r_n, r_m}`.
    pub fn pair(&self, r: Chirality, flavor: Flavor, r_n: Chirality, r_m: Chirality) -> f64 {
        self.pairs
            .iter()
            .find(|e| e.r == r && e.flavor == flavor && e.r_n == r_n && e.r_m == r_m)
            .map(|e| e.value)
            .expect("table holds every combination")
    }
}

/// Exponent table of a solution.
pub fn exponents(sol: &BogoliubovSolution) -> ExponentTable {
    let mut pairs = Vec::with_capacity(16);
    for r in Chirality::BOTH {
        for flavor in Flavor::BOTH {
            for r_n in Chirality::BOTH {
                for r_m in Chirality::BOTH {
                    pairs.push(PairExponent {
                        r,
                        flavor,
                        r_n,
                        r_m,
                        value: pair_exponent(sol, r, flavor, r_n, r_m),
                    });
                }
            }
        }
    }
    let sum = |f: &dyn Fn(f64, f64) -> f64| Flavor::BOTH.iter().map(|&x| f(sol.rho(x), sol.sigma(x))).sum::<f64>();
    ExponentTable {
        pairs,
        delta_cdw: sum(&|r, s| (r - s) * (r - s)),
        delta_sc: sum(&|r, s| (r + s) * (r + s)),
        fermion_dimension: sum(&|r, s| r * r + s * s),
    }
}

/// Largest matrix size accepted by [`cauchy_residual`] and [`determinant`].
pub const MAX_CAUCHY_SIZE: usize = 8;

/// Determinant by cofactor expansion along the first row. Intended for the
/// small matrices of the Cauchy identity, where it is exact up to rounding and
/// needs no pivoting decisions.
pub fn determinant<T>(matrix: &[Vec<T>]) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + num_traits::Zero + num_traits::One,
{
    fn rec<T>(matrix: &[Vec<T>], rows: usize, cols: &mut Vec<usize>) -> T
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + num_traits::Zero + num_traits::One,
    {
        if cols.is_empty() {
            return T::one();
        }
        let row = rows;
        let mut total = T::zero();
        for k in 0..cols.len() {
            let col = cols.remove(k);
            let minor = rec(matrix, rows + 1, cols);
            cols.insert(k, col);
            let term = matrix[row][col] * minor;
            total = if k % 2 == 0 { total + term } else { total - term };
        }
        total
    }
    let mut cols: Vec<usize> = (0..matrix.len()).collect();
    rec(matrix, 0, &mut cols)
}

/// `|product form - det(1 / sin(U_n - V_m))|` for the Cauchy-type identity
/// `det(1 / sin(U_n - V_m)) = prod_{n<m} sin(U_n - U_m) sin(V_m - V_n) / prod_{n,m} sin(U_n - V_m)`.
///
/// The sines are evaluated in double-double precision, where the difference
/// of two `f64` inputs is exact. Everything after that is exact rational
/// arithmetic, so the residual measures the identity itself and not the
/// rounding of nearly singular entries.
pub fn cauchy_residual(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::BadArgument("U and V must be non-empty and of equal length".into()));
    }
    if u.len() > MAX_CAUCHY_SIZE {
        return Err(Error::BadArgument(format!("size {} exceeds {MAX_CAUCHY_SIZE}", u.len())));
    }
    let sin_diff = |a: f64, b: f64| -> Result<BigRational> {
        let s = TwoFloat::new_sub(a, b).sin();
        let exact = |x: f64| BigRational::from_float(x).ok_or_else(|| Error::BadArgument(format!("non-finite input {x}")));
        Ok(exact(s.hi())? + exact(s.lo())?)
    };
    let m = u.len();
    let mut matrix = Vec::with_capacity(m);
    let mut denom = BigRational::one();
    for (n, &un) in u.iter().enumerate() {
        let mut row = Vec::with_capacity(m);
        for (k, &vk) in v.iter().enumerate() {
            let s = sin_diff(un, vk)?;
            if s.is_zero() {
                return Err(Error::SingularConfiguration(format!("sin(U_{n} - V_{k}) vanishes")));
            }
            row.push(s.recip());
            denom *= s;
        }
        matrix.push(row);
    }
    let mut numer = BigRational::one();
    for n in 0..m {
        for k in n + 1..m {
            numer *= sin_diff(u[n], u[k])? * sin_diff(v[k], v[n])?;
        }
    }
    let residual = (numer / denom - exact_determinant(matrix)).abs();
    Ok(residual.to_f64().unwrap_or(f64::INFINITY))
}

/// Exact determinant by Gaussian elimination over the rationals.
fn exact_determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let m = a.len();
    let mut det = BigRational::one();
    for col in 0..m {
        let Some(pivot) = (col..m).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        for r in col + 1..m {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..m {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
        det *= p;
    }
    det
}
