//! Boson basis states built from Klein factors and boson creation operators.
//!
//! The state with labels `(q_+, q_-, m(p))` is
//! `prod_p (b†(p))^{m(p)} / sqrt(m(p)!) R_+^{q_+} R_-^{-q_-} Omega`. Each `b†(p)`
//! carries a factor `sqrt(2 pi / (L |p|)) = sqrt(1 / |m|)`, so the vector is
//! stored as an exact Gaussian-rational vector times the square root of an
//! exact rational radicand.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ops::{accumulate, amp, Amp, FockOp, SparseVec};
use super::operator::boson_expr;
use super::space::FockSpace;
use crate::error::{Error, Result};
use crate::model::Chirality;

/// Labels of a boson basis state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BosonLabels {
    /// Charge of the `+` chirality.
    pub q_plus: i32,
    /// Charge of the `-` chirality.
    pub q_minus: i32,
    /// Occupation numbers `m(p)` keyed by `p` in units of `2 pi / L` (nonzero).
    pub occupations: BTreeMap<i32, u32>,
}

impl BosonLabels {
    /// Energy in units of `pi / L`: `q_+^2 + q_-^2 + 2 sum |m_p| n(p)`.
    pub fn energy2(&self) -> u32 {
        let zero = (self.q_plus * self.q_plus + self.q_minus * self.q_minus) as u32;
        zero + self
            .occupations
            .iter()
            .map(|(&m, &n)| 2 * m.unsigned_abs() * n)
            .sum::<u32>()
    }
}

/// A boson basis state `sqrt(radicand) * vector`.
#[derive(Clone, Debug)]
pub struct BosonState {
    /// Labels the state was built from.
    pub labels: BosonLabels,
    /// Exact part of the vector.
    pub vector: SparseVec,
    /// Radicand of the square-root prefactor.
    pub radicand: BigRational,
    /// Whether some intermediate state left the mode window.
    pub leaks: bool,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

fn apply_expr_power(space: &FockSpace, op: &super::expr::Expr, n: u32, v: SparseVec, leaks: &mut bool) -> SparseVec {
    let mut current = v;
    for _ in 0..n {
        let mut next = SparseVec::new();
        for (idx, a) in &current {
            let eval = op.apply_basis(space, *idx);
            *leaks |= eval.leaks;
            for (j, b) in eval.vector {
                accumulate(&mut next, j, a * b);
            }
        }
        current = next;
    }
    current
}

fn apply_op_power(space: &FockSpace, op: FockOp, n: u32, v: SparseVec, leaks: &mut bool) -> SparseVec {
    let mut current = v;
    for _ in 0..n {
        let (next, leak) = op.apply_vec(space, &current);
        *leaks |= leak;
        current = next;
    }
    current
}

/// Builds the boson basis state with the given labels.
pub fn boson_state(space: &FockSpace, labels: &BosonLabels) -> Result<BosonState> {
    let mut leaks = false;
    let mut v = SparseVec::new();
    v.insert(0, amp(1));
    // R_-^{-q_-} acts first, then R_+^{q_+}.
    let minus = FockOp::Klein {
        r: Chirality::Minus,
        dagger: labels.q_minus > 0,
    };
    v = apply_op_power(space, minus, labels.q_minus.unsigned_abs(), v, &mut leaks);
    let plus = FockOp::Klein {
        r: Chirality::Plus,
        dagger: labels.q_plus < 0,
    };
    v = apply_op_power(space, plus, labels.q_plus.unsigned_abs(), v, &mut leaks);

    let mut radicand = BigRational::one();
    for (&m, &count) in &labels.occupations {
        if m == 0 {
            return Err(Error::ZeroMode);
        }
        if m.unsigned_abs() > space.k() {
            return Err(Error::ModeOutOfWindow(format!("boson mode m = {m} outside |m| <= K")));
        }
        let creator = boson_expr(m, true);
        v = apply_expr_power(space, &creator, count, v, &mut leaks);
        let weight = BigInt::from(m.unsigned_abs()).pow(count) * factorial(count);
        radicand /= BigRational::from_integer(weight);
    }
    Ok(BosonState {
        labels: labels.clone(),
        vector: v,
        radicand,
        leaks,
    })
}

/// `<a, b> = sqrt(radicand) * coeff`, returned as `(coeff, radicand)`.
pub fn inner_product(a: &BosonState, b: &BosonState) -> (Amp, BigRational) {
    let mut coeff = Amp::zero();
    for (idx, x) in &a.vector {
        if let Some(y) = b.vector.get(idx) {
            coeff += Complex::new(x.re.clone(), -x.im.clone()) * y;
        }
    }
    (coeff, &a.radicand * &b.radicand)
}

/// Whether `<a, b>` equals `delta` exactly (1 for equal labels, 0 otherwise).
pub fn is_orthonormal_pair(a: &BosonState, b: &BosonState) -> bool {
    let (coeff, radicand) = inner_product(a, b);
    if a.labels != b.labels {
        return coeff.is_zero();
    }
    // coeff must be real and coeff^2 * radicand = 1.
    coeff.im.is_zero() && &coeff.re * &coeff.re * radicand == BigRational::one() && coeff.re > BigRational::zero()
}

/// All boson labels with energy at most `e2_max` (units of `pi / L`) whose
/// occupied modes satisfy `|m| <= K`.
pub fn labels_up_to(space: &FockSpace, e2_max: u32) -> Vec<BosonLabels> {
    let k = space.k() as i32;
    let modes: Vec<i32> = (1..=k).flat_map(|m| [m, -m]).collect();
    let mut out = Vec::new();
    let q_max = (e2_max as f64).sqrt() as i32 + 1;
    for q_plus in -q_max..=q_max {
        for q_minus in -q_max..=q_max {
            let zero = (q_plus * q_plus + q_minus * q_minus) as u32;
            if zero > e2_max {
                continue;
            }
            let mut occ = BTreeMap::new();
            fill(&modes, 0, (e2_max - zero) / 2, &mut occ, &mut |occupations| {
                out.push(BosonLabels {
                    q_plus,
                    q_minus,
                    occupations: occupations.clone(),
                })
            });
        }
    }
    out.sort();
    out
}

fn fill(modes: &[i32], pos: usize, budget: u32, occ: &mut BTreeMap<i32, u32>, emit: &mut impl FnMut(&BTreeMap<i32, u32>)) {
    if pos == modes.len() {
        emit(occ);
        return;
    }
    let m = modes[pos];
    let cost = m.unsigned_abs();
    let mut n = 0;
    while n * cost <= budget {
        if n > 0 {
            occ.insert(m, n);
        }
        fill(modes, pos + 1, budget - n * cost, occ, emit);
        n += 1;
    }
    occ.remove(&m);
}
