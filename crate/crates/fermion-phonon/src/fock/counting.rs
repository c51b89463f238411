//! Level counting on both sides of the boson-fermion correspondence, and the
//! q-series identity that makes the counts agree.

use std::collections::BTreeMap;

use super::space::FockSpace;
use crate::error::{Error, Result};

/// Number of integer partitions `P(n)` for `n = 0..=n_max`.
pub fn partition_numbers(n_max: usize) -> Vec<u64> {
    let mut p = vec![0u64; n_max + 1];
    p[0] = 1;
    for part in 1..=n_max {
        for n in part..=n_max {
            p[n] += p[n - part];
        }
    }
    p
}

/// Degeneracies of the free Hamiltonian per energy level (units of `pi / L`).
///
/// The first entry counts occupation states of the fermion window with energy
/// `E`; the second counts boson labels `(q_+, q_-, m(p))` with
/// `E = q_+^2 + q_-^2 + 2 sum_{p != 0} |m_p| n(p)`, where boson momenta run over
/// both signs of `p = (2 pi / L) m_p`.
pub fn degeneracy_counts(space: &FockSpace, e2_max: u32) -> BTreeMap<u32, (u64, u64)> {
    let mut out: BTreeMap<u32, (u64, u64)> = (0..=e2_max).map(|e| (e, (0, 0))).collect();
    for idx in space.states_up_to(e2_max) {
        if let Some(entry) = out.get_mut(&space.energy2(idx)) {
            entry.0 += 1;
        }
    }
    // Multisets of boson quanta over modes of both signs: the generating function
    // is the square of the partition generating function.
    let half = (e2_max / 2) as usize;
    let p = partition_numbers(half);
    let two_sided: Vec<u64> = (0..=half).map(|n| (0..=n).map(|a| p[a] * p[n - a]).sum()).collect();
    let q_max = (e2_max as f64).sqrt() as i64 + 1;
    for q_plus in -q_max..=q_max {
        for q_minus in -q_max..=q_max {
            let zero_mode = (q_plus * q_plus + q_minus * q_minus) as u32;
            if zero_mode > e2_max {
                continue;
            }
            let mut e2 = zero_mode;
            while e2 <= e2_max {
                let quanta = ((e2 - zero_mode) / 2) as usize;
                out.get_mut(&e2).expect("level in range").1 += two_sided[quanta];
                e2 += 2;
            }
        }
    }
    out
}

/// Both sides of `prod (1 + z^{2n-1})^2 = sum_q z^{q^2} / prod (1 - z^{2n})`
/// truncated at a finite order, with rigorous bounds on the truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiReport {
    /// Truncated left-hand side.
    pub lhs: f64,
    /// Truncated right-hand side.
    pub rhs: f64,
    /// `|lhs - rhs|`.
    pub residual: f64,
    /// Upper bound on `|lhs - rhs|` coming from the dropped factors and terms.
    pub tail_bound: f64,
    /// Upper bound on the floating-point rounding in both evaluations.
    pub rounding_bound: f64,
}

impl JacobiReport {
    /// Whether the residual is explained by the truncation and rounding bounds.
    pub fn pass(&self) -> bool {
        self.residual <= self.tail_bound + self.rounding_bound + 1e-12
    }
}

/// Evaluates both sides of the Jacobi triple product special case at `z`,
/// keeping factors `n <= order` and theta terms `|q| <= order`.
pub fn jacobi_check(z: f64, order: u32) -> Result<JacobiReport> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::BadArgument(format!("z = {z} must lie in (0, 1)")));
    }
    if order == 0 {
        return Err(Error::BadArgument("order must be at least 1".into()));
    }
    let n = order as i32;
    let mut lhs = 1.0f64;
    let mut product = 1.0f64;
    for j in 1..=n {
        let odd = z.powi(2 * j - 1);
        lhs *= (1.0 + odd) * (1.0 + odd);
        product /= 1.0 - z.powi(2 * j);
    }
    let theta = 1.0 + 2.0 * (1..=n).map(|q| z.powi(q * q)).rev().sum::<f64>();
    let rhs = theta * product;

    // Dropped factors: prod_{j > n} (1 + z^{2j-1})^2 <= exp(2 z^{2n+1} / (1 - z^2)).
    let z2 = z * z;
    let lhs_tail = lhs * (2.0 * z.powi(2 * n + 1) / (1.0 - z2)).exp_m1();
    // Dropped theta terms: 2 sum_{q > n} z^{q^2} <= 2 z^{(n+1)^2} / (1 - z).
    let theta_tail = 2.0 * z.powi((n + 1) * (n + 1)) / (1.0 - z);
    // Dropped factors: prod_{j > n} (1 - z^{2j})^{-1} <= exp(z^{2n+2} / ((1 - z^2)(1 - z^{2n+2}))).
    let zn = z.powi(2 * n + 2);
    let prod_growth = (zn / ((1.0 - z2) * (1.0 - zn))).exp_m1();
    let rhs_tail = theta_tail * product + (theta + theta_tail) * product * prod_growth;
    let tail_bound = lhs_tail + rhs_tail;
    let ops = 4.0 * (order as f64 + 2.0);
    let rounding_bound = ops * f64::EPSILON * (lhs.abs() + rhs.abs());
    Ok(JacobiReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        tail_bound,
        rounding_bound,
    })
}
