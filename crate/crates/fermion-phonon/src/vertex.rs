//! Normal-ordered vertex operators and finite-size fermion correlators of the
//! interacting model.
//!
//! A field `psi_r^q(x, t; eps)` of the diagonalized model is a product of a
//! zero-mode part `R_r^{q r} exp(i A . Q)` and four boson exponentials, one per
//! channel `(s, X)` with chirality `s` and flavor `X`. On channel `(s, X)` the
//! coefficient of mode `p = 2 pi m / L` is
//!
//! `alpha(p) = -i kappa(p) e^{-i p (x - s v(p) t) - eps |p| / 2} / p`,
//!
//! where `kappa = q r rho_X` on `s = r`, `kappa = -q r sigma_X` on `s = -r`, and
//! above the cutoff only `(r, F)` survives with `kappa = q r` and the bare
//! velocity. Normal ordering two such factors produces a scalar per channel
//!
//! `exp(-kappa kappa' sum_{n >= 1} e^{i n 2 pi u / L - n 2 pi eps_bar / L} / n)`,
//!
//! with `u = s (x - x') - v (t - t')` and `eps_bar = (eps + eps') / 2`, together
//! with the zero-mode phase `exp(i (A . d' - A' . d) / 2)` where `d` is the charge
//! shift of the Klein factor. The mode sums are evaluated directly in chunks:
//! each chunk starts from an exactly computed exponential and advances by a
//! short recurrence, and chunk totals are combined in a fixed order with
//! compensated summation, so sequential and parallel runs agree bit for bit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{BogoliubovSolution, Flavor};
use crate::correlators::{CorrelatorSpec, InsertionPoint};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{Chirality, MomentumGrid};
use crate::numeric::{ComplexNeumaier, Neumaier};

/// Terms summed by one recurrence before an exact restart.
const CHUNK: u64 = 256;

/// Default cap on the number of boson modes in a truncated sum.
pub const DEFAULT_MAX_MODES: u64 = 200_000_000;

/// A chirality-flavor pair labelling one independent boson sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    /// Chirality of the boson modes.
    pub r: Chirality,
    /// Flavor of the boson modes.
    pub x: Flavor,
}

impl Channel {
    /// The four channels in a fixed order.
    pub const ALL: [Channel; 4] = [
        Channel { r: Chirality::Plus, x: Flavor::F },
        Channel { r: Chirality::Plus, x: Flavor::P },
        Channel { r: Chirality::Minus, x: Flavor::F },
        Channel { r: Chirality::Minus, x: Flavor::P },
    ];
}

/// Coefficient pattern of one vertex factor on one channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelCoefficients {
    /// The channel.
    pub channel: Channel,
    /// Weight `kappa` of modes with `0 < |m| <= N_a`.
    pub kappa_below: f64,
    /// Weight `kappa` of modes with `|m| > N_a`.
    pub kappa_above: f64,
    /// Velocity of modes with `0 < |m| <= N_a`.
    pub velocity_below: f64,
    /// Velocity of modes with `|m| > N_a`.
    pub velocity_above: f64,
}

/// One normal-ordered vertex operator representing a fermion field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexFactor {
    /// Chirality of the field.
    pub r: Chirality,
    /// `+1` for `psi^dagger`, `-1` for `psi`.
    pub q: i32,
    /// Position.
    pub x: f64,
    /// Time.
    pub t: f64,
    /// Damping `eps` of the boson modes.
    pub eps: f64,
    /// System size.
    pub l: f64,
    /// Number of positive modes inside the cutoff.
    pub n_a: u64,
    /// Klein exponent per chirality (`[+, -]`): `q r` on chirality `r`.
    pub winding: [i32; 2],
    /// Coefficients of `Q_+` and `Q_-` in the zero-mode exponent `i A . Q`.
    pub zero_mode: [f64; 2],
    /// Per-channel coefficient data, in [`Channel::ALL`] order.
    pub channels: [ChannelCoefficients; 4],
    /// Scalar prefactor `Z_{a,eps} / sqrt(L)`.
    pub prefactor: Complex64,
}

impl VertexFactor {
    /// Charge shift produced by the Klein factor: `q` on chirality `r`.
    pub fn charge_shift(&self) -> [f64; 2] {
        let mut d = [0.0; 2];
        d[self.r.index()] = self.q as f64;
        d
    }

    /// Klein word entry `(r, q)`.
    pub fn klein_entry(&self) -> (Chirality, i32) {
        (self.r, self.q)
    }

    /// Coefficient `alpha(p)` of mode `p = 2 pi m / L` on channel `index`
    /// (position in [`Channel::ALL`]); zero for `m = 0`.
    pub fn alpha(&self, index: usize, m: i64) -> Complex64 {
        if m == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let ch = &self.channels[index];
        let s = ch.channel.r.sign() as f64;
        let below = m.unsigned_abs() <= self.n_a;
        let (kappa, v) = if below {
            (ch.kappa_below, ch.velocity_below)
        } else {
            (ch.kappa_above, ch.velocity_above)
        };
        if kappa == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = 2.0 * PI * m as f64 / self.l;
        let phase = Complex64::new(-self.eps * p.abs() / 2.0, -p * (self.x - s * v * self.t));
        Complex64::new(0.0, -kappa / p) * phase.exp()
    }
}

fn require_positive(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::BadRegulator(eps))
    }
}

fn check_grid(sol: &BogoliubovSolution, grid: &MomentumGrid) -> Result<()> {
    let l = sol.params.l;
    if (grid.l - l).abs() > 1e-12 * l || grid.n_a != sol.params.n_a() {
        return Err(Error::BadGeometry(format!(
            "grid (L = {}, N_a = {}) does not match the model (L = {}, N_a = {})",
            grid.l,
            grid.n_a,
            l,
            sol.params.n_a()
        )));
    }
    Ok(())
}

/// Builds the vertex factor of the field `psi_r^q(x, t; eps)` of the
/// diagonalized model.
pub fn field_vertex(
    r: Chirality,
    q: i32,
    x: f64,
    t: f64,
    eps: f64,
    sol: &BogoliubovSolution,
    grid: &MomentumGrid,
) -> Result<VertexFactor> {
    require_positive(eps)?;
    check_grid(sol, grid)?;
    if q != 1 && q != -1 {
        return Err(Error::BadArgument(format!("field charge must be +1 or -1, got {q}")));
    }
    let l = sol.params.l;
    if !(x.is_finite() && t.is_finite()) || x.abs() > l / 2.0 {
        return Err(Error::BadGeometry(format!("x = {x} must satisfy |x| <= L/2 = {}", l / 2.0)));
    }
    let qr = (q * r.sign()) as f64;
    let v_f = sol.params.v_f;
    let mut zero_mode = [0.0; 2];
    zero_mode[r.index()] = -2.0 * PI * q as f64 * (r.sign() as f64 * x - v_f * t) / l;
    zero_mode[r.flip().index()] = -2.0 * PI * q as f64 * sol.couplings.gamma1 * v_f * t / l;
    let mut winding = [0; 2];
    winding[r.index()] = q * r.sign();
    let channels = Channel::ALL.map(|channel| {
        let same = channel.r == r;
        let kappa_below = if same {
            qr * sol.rho(channel.x)
        } else {
            -qr * sol.sigma(channel.x)
        };
        let kappa_above = if same && channel.x == Flavor::F { qr } else { 0.0 };
        ChannelCoefficients {
            channel,
            kappa_below,
            kappa_above,
            velocity_below: sol.vtilde(channel.x),
            velocity_above: sol.bare_velocity(channel.x),
        }
    });
    let z = z_renorm(sol, eps)?.z;
    Ok(VertexFactor {
        r,
        q,
        x,
        t,
        eps,
        l,
        n_a: sol.params.n_a(),
        winding,
        zero_mode,
        channels,
        prefactor: Complex64::new(z / l.sqrt(), 0.0),
    })
}

/// Normalization constant of a field and its small-cutoff asymptote.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZRenorm {
    /// `Z_{a,eps} = exp(-(sigma_F^2 + sigma_P^2) sum_{n=1}^{N_a} e^{-2 pi eps n / L} / n)`.
    pub z: f64,
    /// `(e^gamma L / (2a))^{-(sigma_F^2 + sigma_P^2)}`.
    pub asymptote: f64,
}

/// Computes `Z_{a,eps}` by direct summation and its asymptotic form.
pub fn z_renorm(sol: &BogoliubovSolution, eps: f64) -> Result<ZRenorm> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::BadRegulator(eps));
    }
    let params = &sol.params;
    let sigma_sq = sol.sigma_sq();
    let asymptote = (crate::numeric::EULER_GAMMA.exp() * params.l / (2.0 * params.a)).powf(-sigma_sq);
    if sigma_sq == 0.0 {
        return Ok(ZRenorm { z: 1.0, asymptote });
    }
    let d = 2.0 * PI * eps / params.l;
    let sum = damped_log_series(0.0, d, 1, params.n_a(), Exec::default()).sum.re;
    Ok(ZRenorm {
        z: (-sigma_sq * sum).exp(),
        asymptote,
    })
}

/// Value of a truncated series with a bound on its floating-point error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    /// Sum of the terms.
    pub sum: Complex64,
    /// Bound on the rounding error of `sum`.
    pub rounding: f64,
}

/// `sum_{n = lo}^{hi} e^{i n theta - n d} / n` evaluated in chunks with exact
/// restarts and combined in index order.
pub fn damped_log_series(theta: f64, d: f64, lo: u64, hi: u64, exec: Exec) -> SeriesValue {
    if hi < lo {
        return SeriesValue {
            sum: Complex64::new(0.0, 0.0),
            rounding: 0.0,
        };
    }
    let count = hi - lo + 1;
    let chunks = count.div_ceil(CHUNK) as usize;
    let step = Complex64::new(-d, theta).exp();
    let partial = exec.map_range(chunks, |c| {
        let start = lo + c as u64 * CHUNK;
        let end = (start + CHUNK - 1).min(hi);
        // Reduce the phase modulo 2 pi in the integer domain where possible.
        let mut w = Complex64::from_polar((-(start as f64) * d).exp(), phase_of(theta, start));
        let mut acc = ComplexNeumaier::new();
        let mut abs = 0.0;
        for n in start..=end {
            let term = w / n as f64;
            abs += term.norm();
            acc.add(term);
            w *= step;
        }
        (acc.total(), abs)
    });
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    let mut abs = 0.0;
    for (s, a) in partial {
        re.add(s.re);
        im.add(s.im);
        abs += a;
    }
    SeriesValue {
        sum: Complex64::new(re.total(), im.total()),
        rounding: abs * (2 * CHUNK + 10) as f64 * f64::EPSILON,
    }
}

/// `n theta` reduced modulo `2 pi`, using the exact product when it is small.
fn phase_of(theta: f64, n: u64) -> f64 {
    let x = theta * n as f64;
    x.rem_euclid(2.0 * PI)
}

/// Upper bound on `|sum_{n > n_max} e^{i n theta - n d} / n|`.
pub fn log_series_tail(d: f64, n_max: u64) -> f64 {
    let n1 = n_max as f64 + 1.0;
    (-d * n1).exp() / (n1 * -(-d).exp_m1())
}

/// Smallest `N` with `e^{-d N} < 1e-16 d N`, the truncation rule for a series
/// damped by `e^{-n d}`.
pub fn truncation_modes(d: f64) -> u64 {
    // Solve x = ln(1 / (1e-16 x)) for x = d N by fixed-point iteration.
    let mut x: f64 = 40.0;
    for _ in 0..50 {
        x = (1e16 / x).ln().max(1.0);
    }
    ((x / d).ceil() as u64).max(1)
}

/// Truncation and execution settings of the finite-size pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteOptions {
    /// Largest acceptable relative error caused by truncating the mode sums.
    pub tolerance: f64,
    /// Hard cap on the number of modes in each sum.
    pub max_modes: u64,
    /// Execution strategy for the mode sums.
    pub exec: Exec,
}

impl Default for FiniteOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_modes: DEFAULT_MAX_MODES,
            exec: Exec::default(),
        }
    }
}

/// Logarithm of one pairwise contraction constant with error bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairContraction {
    /// `ln C` (the contraction constant is `exp(log_value)`).
    pub log_value: Complex64,
    /// Bound on `|ln C - log_value|` from truncating the mode sums.
    pub tail_bound: f64,
    /// Bound on `|ln C - log_value|` from rounding.
    pub rounding_bound: f64,
    /// Number of modes kept.
    pub n_max: u64,
}

impl PairContraction {
    /// The contraction constant.
    pub fn value(&self) -> Complex64 {
        self.log_value.exp()
    }
}

/// Contraction constant of the ordered pair `(v1, v2)` with truncation
/// diagnostics.
pub fn pair_contraction_detailed(v1: &VertexFactor, v2: &VertexFactor, opts: &FiniteOptions) -> PairContraction {
    let l = v1.l;
    let eps_bar = 0.5 * (v1.eps + v2.eps);
    let d = 2.0 * PI * eps_bar / l;
    let n_max = truncation_modes(d).min(opts.max_modes);
    let n_a = v1.n_a.min(v2.n_a);
    let tail = log_series_tail(d, n_max);
    let dx = v1.x - v2.x;
    let dt = v1.t - v2.t;

    let mut log_value = Complex64::new(0.0, 0.0);
    let mut tail_bound = 0.0;
    let mut rounding = 0.0;
    for (c1, c2) in v1.channels.iter().zip(&v2.channels) {
        let s = c1.channel.r.sign() as f64;
        let below = c1.kappa_below * c2.kappa_below;
        if below != 0.0 {
            let u = s * dx - c1.velocity_below * dt;
            let hi = n_a.min(n_max);
            let series = damped_log_series(2.0 * PI * u / l, d, 1, hi, opts.exec);
            log_value -= series.sum * below;
            rounding += below.abs() * series.rounding;
            if n_a > n_max {
                tail_bound += below.abs() * tail;
            }
        }
        let above = c1.kappa_above * c2.kappa_above;
        if above != 0.0 {
            let u = s * dx - c1.velocity_above * dt;
            if n_a < n_max {
                let series = damped_log_series(2.0 * PI * u / l, d, n_a + 1, n_max, opts.exec);
                log_value -= series.sum * above;
                rounding += above.abs() * series.rounding;
            }
            tail_bound += above.abs() * tail;
        }
    }
    // Zero-mode phase from reordering exp(i A . Q / 2) past the Klein factors.
    let d1 = v1.charge_shift();
    let d2 = v2.charge_shift();
    let phase = (0..2).map(|k| v1.zero_mode[k] * d2[k] - v2.zero_mode[k] * d1[k]).sum::<f64>() / 2.0;
    log_value += Complex64::new(0.0, phase);
    PairContraction {
        log_value,
        tail_bound,
        rounding_bound: rounding + 4.0 * f64::EPSILON * log_value.norm(),
        n_max,
    }
}

/// Contraction constant `C(v1, v2)` with the default truncation settings.
pub fn pair_contraction(v1: &VertexFactor, v2: &VertexFactor) -> Complex64 {
    pair_contraction_detailed(v1, v2, &FiniteOptions::default()).value()
}

/// Contraction constant evaluated mode by mode from the coefficients
/// `alpha(p)`, keeping `0 < m <= n_max`:
/// `exp(i (A1 . d2 - A2 . d1) / 2) exp(-sum_channels sum_m (2 pi / L) p alpha_1(-s p) alpha_2(s p))`.
/// This is the defining sum and serves as a reference for [`pair_contraction`].
pub fn pair_contraction_by_modes(v1: &VertexFactor, v2: &VertexFactor, n_max: u64) -> Complex64 {
    let l = v1.l;
    let mut acc = ComplexNeumaier::new();
    for (index, channel) in Channel::ALL.iter().enumerate() {
        let s = channel.r.sign() as i64;
        for m in 1..=n_max as i64 {
            let p = 2.0 * PI * m as f64 / l;
            acc.add(v1.alpha(index, -s * m) * v2.alpha(index, s * m) * (2.0 * PI / l * p));
        }
    }
    let d1 = v1.charge_shift();
    let d2 = v2.charge_shift();
    let phase = (0..2).map(|k| v1.zero_mode[k] * d2[k] - v2.zero_mode[k] * d1[k]).sum::<f64>() / 2.0;
    (Complex64::new(0.0, phase) - acc.total()).exp()
}

/// Sign of the vacuum expectation of a Klein word, found by moving every `R_+`
/// factor to the left of every `R_-` factor one transposition at a time
/// (`R_+^a R_-^b = (-1)^{ab} R_-^b R_+^a`) and then requiring zero net charge per
/// chirality.
pub fn klein_word_sign(word: &[(Chirality, i32)]) -> i32 {
    let mut items: Vec<(Chirality, i32)> = word.iter().map(|&(r, q)| (r, q * r.sign())).collect();
    let mut sign = 1;
    // Bubble sort with + before -, tracking the sign of every exchange.
    let n = items.len();
    for i in 0..n {
        for j in 0..n - 1 - i {
            if items[j].0 == Chirality::Minus && items[j + 1].0 == Chirality::Plus {
                if (items[j].1 * items[j + 1].1).rem_euclid(2) == 1 {
                    sign = -sign;
                }
                items.swap(j, j + 1);
            }
        }
    }
    let exponent = |r: Chirality| items.iter().filter(|(s, _)| *s == r).map(|(_, e)| *e).sum::<i32>();
    if exponent(Chirality::Plus) != 0 || exponent(Chirality::Minus) != 0 {
        0
    } else {
        sign
    }
}

/// An ordered product of vertex factors brought to normal order.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalOrderedProduct {
    /// The factors, in operator order.
    pub factors: Vec<VertexFactor>,
    /// Product of all pairwise contraction constants `C(v_j, v_l)`, `j < l`.
    pub contraction: Complex64,
    /// Product of the factors' own scalar prefactors.
    pub scalar: Complex64,
    /// Klein word in operator order.
    pub klein_word: Vec<(Chirality, i32)>,
    /// Bound on the relative error of `contraction` from truncated mode sums.
    pub tail_bound: f64,
    /// Bound on the relative error of `contraction` from rounding.
    pub rounding_bound: f64,
    /// Largest number of modes kept in any pair.
    pub n_max: u64,
}

/// Normal-orders a product of vertex factors.
pub fn normal_order_product(factors: &[VertexFactor], opts: &FiniteOptions) -> Result<NormalOrderedProduct> {
    if factors.is_empty() {
        return Err(Error::BadArgument("a product needs at least one factor".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..factors.len())
        .flat_map(|j| (j + 1..factors.len()).map(move |l| (j, l)))
        .collect();
    let results: Vec<PairContraction> = pairs
        .iter()
        .map(|&(j, l)| pair_contraction_detailed(&factors[j], &factors[l], opts))
        .collect();
    let mut log_total = ComplexNeumaier::new();
    let mut tail = 0.0;
    let mut rounding = 0.0;
    let mut n_max = 0;
    for res in &results {
        log_total.add(res.log_value);
        tail += res.tail_bound;
        rounding += res.rounding_bound;
        n_max = n_max.max(res.n_max);
    }
    let scalar = factors.iter().fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.prefactor);
    Ok(NormalOrderedProduct {
        klein_word: factors.iter().map(VertexFactor::klein_entry).collect(),
        factors: factors.to_vec(),
        contraction: log_total.total().exp(),
        scalar,
        tail_bound: tail.exp_m1(),
        rounding_bound: rounding.exp_m1() + 8.0 * f64::EPSILON,
        n_max,
    })
}

/// Vacuum expectation of a normal-ordered product: the scalar factors times the
/// Klein sign. The zero-mode exponentials act trivially on the vacuum because
/// `Q_r Omega = 0`; a word with nonzero net charge gives 0.
pub fn vacuum_expectation(product: &NormalOrderedProduct) -> Complex64 {
    let sign = klein_word_sign(&product.klein_word);
    product.contraction * product.scalar * sign as f64
}

/// A finite-size correlator value with its error budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteValue {
    /// The correlator.
    pub value: Complex64,
    /// Bound on `|exact - value|` from truncating the mode sums.
    pub tail_bound: f64,
    /// Bound on `|exact - value|` from rounding.
    pub rounding_bound: f64,
    /// Largest number of boson modes kept in a pair sum.
    pub n_max: u64,
}

fn vertices(spec: &CorrelatorSpec, sol: &BogoliubovSolution, grid: &MomentumGrid) -> Result<Vec<VertexFactor>> {
    spec.insertions
        .iter()
        .map(|ins: &InsertionPoint| field_vertex(ins.r, ins.q, ins.x, ins.t, spec.regulator, sol, grid))
        .collect()
}

fn evaluate(spec: &CorrelatorSpec, sol: &BogoliubovSolution, grid: &MomentumGrid, opts: &FiniteOptions, renormalized: bool) -> Result<FiniteValue> {
    spec.validate()?;
    let zero = FiniteValue {
        value: Complex64::new(0.0, 0.0),
        tail_bound: 0.0,
        rounding_bound: 0.0,
        n_max: 0,
    };
    if spec.insertions.is_empty() || klein_word_sign(&spec.word()) == 0 {
        check_grid(sol, grid)?;
        require_positive(spec.regulator)?;
        return Ok(zero);
    }
    let mut factors = vertices(spec, sol, grid)?;
    if renormalized {
        // Z_{a,eps}^{-1} (2 pi ell / L)^{sigma_F^2 + sigma_P^2} replaces Z_{a,eps}.
        let l = sol.params.l;
        let scale = (2.0 * PI * spec.ell / l).powf(sol.sigma_sq()) / l.sqrt();
        for f in &mut factors {
            f.prefactor = Complex64::new(scale, 0.0);
        }
    }
    let product = normal_order_product(&factors, opts)?;
    if product.tail_bound > opts.tolerance {
        return Err(Error::TailTooLarge {
            bound: product.tail_bound,
            tolerance: opts.tolerance,
        });
    }
    let value = vacuum_expectation(&product);
    Ok(FiniteValue {
        value,
        tail_bound: value.norm() * product.tail_bound,
        rounding_bound: value.norm() * product.rounding_bound,
        n_max: product.n_max,
    })
}

/// Correlator `<psi_{r_1}^{q_1}(x_1, t_1; eps) ... psi_{r_N}^{q_N}(x_N, t_N; eps)>` in
/// the ground state of the interacting model of size `L` with cutoff `a`, using
/// `eps = spec.regulator` for every field.
pub fn finite_correlator(spec: &CorrelatorSpec, sol: &BogoliubovSolution, grid: &MomentumGrid, opts: &FiniteOptions) -> Result<FiniteValue> {
    evaluate(spec, sol, grid, opts, false)
}

/// Finite correlator of the renormalized fields: each field's normalization
/// `Z_{a,eps}` is replaced by `(2 pi ell / L)^{sigma_F^2 + sigma_P^2}`.
pub fn renormalized_finite_correlator(
    spec: &CorrelatorSpec,
    sol: &BogoliubovSolution,
    grid: &MomentumGrid,
    opts: &FiniteOptions,
) -> Result<FiniteValue> {
    evaluate(spec, sol, grid, opts, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_rule_holds() {
        for d in [1e-1, 1e-3, 1e-6] {
            let n = truncation_modes(d) as f64;
            assert!((-d * n).exp() < 1e-16 * d * n);
            assert!((-d * (n - 2.0)).exp() >= 1e-16 * d * (n - 2.0));
        }
    }

    #[test]
    fn series_matches_logarithm() {
        let (theta, d) = (0.7, 0.01);
        let n = truncation_modes(d);
        let s = damped_log_series(theta, d, 1, n, Exec::Sequential);
        let z = Complex64::new(-d, theta).exp();
        let exact = -(Complex64::new(1.0, 0.0) - z).ln();
        assert!((s.sum - exact).norm() < 1e-13);
    }

    #[test]
    fn modes_agree_bit_for_bit() {
        let a = damped_log_series(1.3, 1e-4, 1, 100_000, Exec::Sequential);
        let b = damped_log_series(1.3, 1e-4, 1, 100_000, Exec::Parallel);
        assert_eq!(a, b);
    }
}
