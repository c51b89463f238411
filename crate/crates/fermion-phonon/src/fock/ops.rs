//! Elementary Fock-space operators and their exact action on basis states.
//!
//! Every operator maps a basis state to a finite combination of basis states
//! with Gaussian-rational amplitudes. Operators that can push an excitation past
//! the mode window (densities, Klein factors, cutoff-regularized operators) also
//! report a *leak*: the stored image is then the exact projection onto the window
//! but misses weight outside it, so products through that state are not exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::space::{annihilate, create, FockSpace, Mode, SignConvention};
use crate::model::Chirality;

/// Exact amplitude: a Gaussian rational.
pub type Amp = Complex<BigRational>;

/// Sparse vector over basis indices.
pub type SparseVec = BTreeMap<u64, Amp>;

/// Integer amplitude.
pub fn amp(n: i64) -> Amp {
    Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
}

/// Rational amplitude `n / d`.
pub fn amp_ratio(n: i64, d: i64) -> Amp {
    Complex::new(BigRational::new(BigInt::from(n), BigInt::from(d)), BigRational::zero())
}

/// Purely imaginary amplitude `i n`.
pub fn amp_imag(n: i64) -> Amp {
    Complex::new(BigRational::zero(), BigRational::from_integer(BigInt::from(n)))
}

/// Size of an amplitude measured as the larger of `|re|` and `|im|` (stays rational).
pub fn amp_size(a: &Amp) -> BigRational {
    let re = a.re.abs();
    let im = a.im.abs();
    if re > im {
        re
    } else {
        im
    }
}

/// Adds `coeff * value` into `acc[idx]`, dropping exact zeros.
pub fn accumulate(acc: &mut SparseVec, idx: u64, value: Amp) {
    if value.is_zero() {
        return;
    }
    let entry = acc.entry(idx).or_insert_with(Amp::zero);
    *entry += value;
    if entry.is_zero() {
        acc.remove(&idx);
    }
}

/// An elementary operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FockOp {
    /// `c_r(k)` or `c†_r(k)`.
    Ladder { mode: Mode, dagger: bool },
    /// `psi_r(k)` or its adjoint, in units where the `sqrt(L / 2 pi)` prefactor is
    /// tracked separately as one power of the length scale.
    Field { mode: Mode, dagger: bool },
    /// Normal-ordered density `J_r(p)` with `p = (2 pi / L) m`, optionally
    /// regularized by `Theta(Lambda - |k + p/2|)` with `Lambda` in units of `pi / L`.
    Density { r: Chirality, m: i32, cutoff2: Option<u32> },
    /// Free Hamiltonian `sum |k| c† c` in units of `2 pi / L` (the velocity is left
    /// to the caller), optionally restricted to `|k| <= Lambda`.
    H0 { cutoff2: Option<u32> },
    /// Charge `Q_r = J_r(0)`.
    Charge { r: Chirality },
    /// Klein factor `R_r` or its adjoint.
    Klein { r: Chirality, dagger: bool },
}

/// What a prediction says about the exactness of an operator on a sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prediction {
    /// The image is guaranteed exact and lies in sector `(energy2, charges)`.
    Exact(i64, [i32; 2]),
    /// The image is guaranteed to vanish.
    Zero,
    /// Exactness is not guaranteed by the energy bookkeeping.
    Unknown,
}

/// Image of a basis state.
#[derive(Clone, Debug, Default)]
pub struct Image {
    /// Window projection of the image.
    pub terms: Vec<(u64, Amp)>,
    /// Whether some weight left the window (or was removed by a cutoff).
    pub leaks: bool,
}

#[derive(Clone, Copy)]
struct Step {
    mode: Mode,
    create: bool,
}

enum StepResult {
    Zero,
    State(u64, i32),
    Leak,
}

/// Applies a ladder string (product order, rightmost acts first). Modes outside
/// the window start empty; creating one marks the result as leaking.
fn apply_steps(space: &FockSpace, idx: u64, steps: &[Step]) -> StepResult {
    let mut state = idx;
    let mut sign = 1;
    let mut outside: Vec<Mode> = Vec::new();
    let signed = space.convention() == SignConvention::JordanWigner;
    for step in steps.iter().rev() {
        match space.mode_index(step.mode) {
            Some(i) => {
                let next = if step.create { create(state, i) } else { annihilate(state, i) };
                match next {
                    Some((s, sg)) => {
                        state = s;
                        if signed {
                            sign *= sg;
                        }
                    }
                    None => return StepResult::Zero,
                }
            }
            None => {
                let pos = outside.iter().position(|m| *m == step.mode);
                match (step.create, pos) {
                    (true, None) => outside.push(step.mode),
                    (false, Some(p)) => {
                        outside.swap_remove(p);
                    }
                    _ => return StepResult::Zero,
                }
            }
        }
    }
    if outside.is_empty() {
        StepResult::State(state, sign)
    } else {
        StepResult::Leak
    }
}

impl FockOp {
    /// Adjoint operator.
    pub fn adjoint(&self) -> FockOp {
        match self.clone() {
            FockOp::Ladder { mode, dagger } => FockOp::Ladder { mode, dagger: !dagger },
            FockOp::Field { mode, dagger } => FockOp::Field { mode, dagger: !dagger },
            FockOp::Density { r, m, cutoff2 } => FockOp::Density { r, m: -m, cutoff2 },
            FockOp::Klein { r, dagger } => FockOp::Klein { r, dagger: !dagger },
            other => other,
        }
    }

    /// Power of `sqrt(L / 2 pi)` carried by the operator.
    pub fn scale_power(&self) -> i32 {
        match self {
            FockOp::Field { .. } => 1,
            FockOp::H0 { .. } => -2,
            _ => 0,
        }
    }

    /// Energy (units of `pi / L`) and charge bookkeeping for a homogeneous input
    /// sector, together with the exactness guarantee.
    pub fn predict(&self, space: &FockSpace, e2: i64, q: [i32; 2]) -> Prediction {
        let bound = space.exact_energy_bound2();
        let finish = |e2_out: i64, q_out: [i32; 2]| {
            if e2_out < 0 {
                Prediction::Zero
            } else {
                Prediction::Exact(e2_out, q_out)
            }
        };
        match self {
            FockOp::Ladder { mode, dagger } => {
                let step = if *dagger { 1 } else { -1 };
                let mut q_out = q;
                q_out[mode.r.index()] += step * (mode.r.sign() * mode.k2).signum();
                finish(e2 + step as i64 * mode.k2.abs() as i64, q_out)
            }
            FockOp::Field { mode, dagger } => {
                let step = if *dagger { 1 } else { -1 };
                let mut q_out = q;
                q_out[mode.r.index()] += step;
                finish(e2 + (step * mode.r.sign() * mode.k2) as i64, q_out)
            }
            FockOp::Density { r, m, cutoff2 } => {
                let e2_out = e2 - 2 * (r.sign() * m) as i64;
                if e2_out < 0 {
                    return Prediction::Zero;
                }
                if e2_out > bound {
                    return Prediction::Unknown;
                }
                if let Some(c) = cutoff2 {
                    if e2.max(e2_out) > *c as i64 {
                        return Prediction::Unknown;
                    }
                }
                Prediction::Exact(e2_out, q)
            }
            FockOp::H0 { cutoff2 } => match cutoff2 {
                Some(c) if e2 > *c as i64 => Prediction::Unknown,
                _ => Prediction::Exact(e2, q),
            },
            FockOp::Charge { .. } => Prediction::Exact(e2, q),
            FockOp::Klein { r, dagger } => {
                let s = r.sign();
                let qr = q[r.index()];
                let (e2_out, dq) = if *dagger {
                    (e2 - 2 * (s * qr) as i64 + 1, -s)
                } else {
                    (e2 + 2 * (s * qr) as i64 + 1, s)
                };
                if e2_out > bound {
                    return Prediction::Unknown;
                }
                let mut q_out = q;
                q_out[r.index()] += dq;
                Prediction::Exact(e2_out, q_out)
            }
        }
    }

    /// Exact action on basis state `idx`.
    pub fn apply_basis(&self, space: &FockSpace, idx: u64) -> Image {
        match self {
            FockOp::Ladder { mode, dagger } => single(apply_steps(space, idx, &[Step { mode: *mode, create: *dagger }])),
            FockOp::Field { mode, dagger } => {
                let create = mode.is_particle_like() == *dagger;
                single(apply_steps(space, idx, &[Step { mode: *mode, create }]))
            }
            FockOp::Density { r, m, cutoff2 } => density_image(space, idx, *r, *m, *cutoff2),
            FockOp::H0 { cutoff2 } => {
                let mut total = 0i64;
                let mut leaks = false;
                let mut bits = idx;
                while bits != 0 {
                    let i = bits.trailing_zeros();
                    let k2 = space.mode_at(i).k2.abs();
                    match cutoff2 {
                        Some(c) if k2 as u32 > *c => leaks = true,
                        _ => total += k2 as i64,
                    }
                    bits &= bits - 1;
                }
                Image {
                    terms: nonzero(idx, amp_ratio(total, 2)),
                    leaks,
                }
            }
            FockOp::Charge { r } => Image {
                terms: nonzero(idx, amp(space.charges(idx)[r.index()] as i64)),
                leaks: false,
            },
            FockOp::Klein { r, dagger } => klein_image(space, idx, *r, *dagger),
        }
    }

    /// Exact action on a sparse vector; the flag reports whether any component leaked.
    pub fn apply_vec(&self, space: &FockSpace, v: &SparseVec) -> (SparseVec, bool) {
        let mut out = SparseVec::new();
        let mut leaks = false;
        for (idx, a) in v {
            let image = self.apply_basis(space, *idx);
            leaks |= image.leaks;
            for (j, b) in image.terms {
                accumulate(&mut out, j, a * b);
            }
        }
        (out, leaks)
    }
}

fn nonzero(idx: u64, a: Amp) -> Vec<(u64, Amp)> {
    if a.is_zero() {
        Vec::new()
    } else {
        vec![(idx, a)]
    }
}

fn single(result: StepResult) -> Image {
    match result {
        StepResult::Zero => Image::default(),
        StepResult::State(j, s) => Image {
            terms: vec![(j, amp(s as i64))],
            leaks: false,
        },
        StepResult::Leak => Image {
            terms: Vec::new(),
            leaks: true,
        },
    }
}

/// `J_r(p) = sum_k :psi†_r(k) psi_r(k + p):` written in ladder operators.
fn density_image(space: &FockSpace, idx: u64, r: Chirality, m: i32, cutoff2: Option<u32>) -> Image {
    let reach = space.max_k2() + 2 * m.abs();
    let mut acc = SparseVec::new();
    let mut leaks = false;
    let mut k2 = -reach;
    while k2 <= reach {
        let a = Mode::new(r, k2);
        let b = Mode::new(r, k2 + 2 * m);
        if space.contains(a) || space.contains(b) {
            let (steps, coeff) = match (a.is_particle_like(), b.is_particle_like()) {
                (true, true) => ([Step { mode: a, create: true }, Step { mode: b, create: false }], 1),
                (true, false) => ([Step { mode: a, create: true }, Step { mode: b, create: true }], 1),
                (false, true) => ([Step { mode: a, create: false }, Step { mode: b, create: false }], 1),
                (false, false) => ([Step { mode: b, create: true }, Step { mode: a, create: false }], -1),
            };
            let dropped = matches!(cutoff2, Some(c) if (k2 + m).unsigned_abs() > c);
            match apply_steps(space, idx, &steps) {
                StepResult::Zero => {}
                StepResult::Leak => leaks = true,
                StepResult::State(j, s) => {
                    if dropped {
                        leaks = true;
                    } else {
                        accumulate(&mut acc, j, amp((coeff * s) as i64));
                    }
                }
            }
        }
        k2 += 2;
    }
    Image {
        terms: acc.into_iter().collect(),
        leaks,
    }
}

/// Klein factor on a basis state.
///
/// `R_r` shifts every `c†_r(k)` to `c†_r(k + 2 pi / L)` (with `c†_r(-pi/L)` turning
/// into `c_r(pi/L)`), anticommutes with the other chirality, and maps the vacuum to
/// `c†_r(pi/L) Ω`. The adjoint uses the mirrored rules.
fn klein_image(space: &FockSpace, idx: u64, r: Chirality, dagger: bool) -> Image {
    let (seed, edge, shift) = if dagger { (-1, 1, -2) } else { (1, -1, 2) };
    let mut steps = Vec::new();
    let mut sign = 1i32;
    let mut bits = idx;
    while bits != 0 {
        let i = bits.trailing_zeros();
        let mode = space.mode_at(i);
        if mode.r == r {
            if mode.k2 == edge {
                steps.push(Step { mode: Mode::new(r, seed), create: false });
            } else {
                steps.push(Step { mode: Mode::new(r, mode.k2 + shift), create: true });
            }
        } else {
            steps.push(Step { mode, create: true });
            sign = -sign;
        }
        bits &= bits - 1;
    }
    let start = space
        .mode_index(Mode::new(r, seed))
        .expect("the modes at +-pi/L are always in the window");
    let image = single(apply_steps(space, 1u64 << start, &steps));
    Image {
        terms: image
            .terms
            .into_iter()
            .map(|(j, a)| (j, a * amp(sign as i64)))
            .collect(),
        leaks: image.leaks,
    }
}
