//! Fermion fields rebuilt from densities and Klein factors.
//!
//! On a state of charge `q_r` the field `psi_r(k)` equals
//! `U_r(nu_+) U_r(nu_-) R_r^{-r}` summed over boson occupation vectors `nu_±`,
//! where `U_r(nu_+) = prod_m (1/nu!) (-(1/m) J_r(-r m))^nu` raises the energy,
//! `U_r(nu_-) = prod_m (1/nu!) ((1/m) J_r(r m))^nu` lowers it, and the two total
//! momenta `P_±` are tied to `k` by energy conservation:
//! `P_+ - P_- = (q_r - 1/2) - r k` in units of `2 pi / L`. The lowering part can
//! only remove as much energy as the state carries, so both sums are finite.

use num_traits::One;

use super::ops::{accumulate, amp_ratio, Amp, FockOp, Prediction, SparseVec};
use super::space::{FockSpace, Mode};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::Chirality;

/// Image of a basis state under the reconstructed field.
#[derive(Clone, Debug, Default)]
pub struct Reconstruction {
    /// Window projection of the image.
    pub vector: SparseVec,
    /// Whether some intermediate state left the mode window.
    pub leaks: bool,
    /// Whether the energy bookkeeping guarantees an exact result.
    pub guaranteed: bool,
    /// Number of `(nu_-, nu_+)` pairs that were summed.
    pub terms: usize,
}

/// Integer partitions of `n` as `(part, multiplicity)` lists, parts ascending.
pub fn partitions(n: u32) -> Vec<Vec<(u32, u32)>> {
    fn rec(n: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(n)).rev() {
            current.push(part);
            rec(n - part, part, current, out);
            current.pop();
        }
    }
    let mut raw = Vec::new();
    rec(n, n, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|parts| {
            let mut mult: Vec<(u32, u32)> = Vec::new();
            for p in parts.into_iter().rev() {
                match mult.last_mut() {
                    Some((q, c)) if *q == p => *c += 1,
                    _ => mult.push((p, 1)),
                }
            }
            mult
        })
        .collect()
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// Applies `prod_m (1/nu_m!) (sign/m)^{nu_m} J_r(dir * m)^{nu_m}` to `v`.
fn apply_u(space: &FockSpace, r: Chirality, dir: i32, sign: i64, nu: &[(u32, u32)], v: &SparseVec) -> (SparseVec, bool) {
    let mut current = v.clone();
    let mut leaks = false;
    let mut coeff = Amp::one();
    for &(m, count) in nu {
        let op = FockOp::Density {
            r,
            m: dir * m as i32,
            cutoff2: None,
        };
        for _ in 0..count {
            let (next, leak) = op.apply_vec(space, &current);
            leaks |= leak;
            current = next;
        }
        coeff *= amp_ratio(sign.pow(count), (m as i64).pow(count) * factorial(count));
    }
    for a in current.values_mut() {
        *a *= &coeff;
    }
    (current, leaks)
}

/// `psi_r(k)` with `k = k2 * pi / L`, rebuilt from densities and Klein factors and
/// applied to basis state `ket`. The `sqrt(L / 2 pi)` prefactor shared with
/// [`super::operator::field_op`] is left implicit.
pub fn reconstructed_field(space: &FockSpace, r: Chirality, k2: i32, ket: u64) -> Result<Reconstruction> {
    space.require(Mode::new(r, k2))?;
    if ket >= space.dim() {
        return Err(Error::BadArgument(format!("basis index {ket} outside the space")));
    }
    let s = r.sign();
    let q = space.charges(ket);
    let e2 = space.energy2(ket) as i64;
    let twice_gap = 2 * q[r.index()] - 1 - s * k2;
    let gap = twice_gap / 2;

    // R_r^{-r}: R_+^dagger for r = +, R_- for r = -.
    let klein = FockOp::Klein {
        r,
        dagger: r == Chirality::Plus,
    };
    let e2_out = e2 - (s * k2) as i64;
    let bound = space.exact_energy_bound2();
    let (e2_first, guaranteed) = match klein.predict(space, e2, q) {
        Prediction::Exact(e, _) => (e, e2_out <= bound),
        _ => (e2 + 2 * q[r.index()].unsigned_abs() as i64 + 1, false),
    };
    let first = klein.apply_basis(space, ket);
    let mut out = Reconstruction {
        leaks: first.leaks,
        guaranteed,
        ..Default::default()
    };
    let start: SparseVec = first.terms.into_iter().collect();
    if start.is_empty() {
        return Ok(out);
    }
    let p_minus_max = (e2_first / 2).max(0) as u32;
    for p_minus in 0..=p_minus_max {
        let p_plus = p_minus as i64 + gap as i64;
        if p_plus < 0 {
            continue;
        }
        for nu_minus in partitions(p_minus) {
            let (lowered, leak) = apply_u(space, r, s, 1, &nu_minus, &start);
            out.leaks |= leak;
            if lowered.is_empty() {
                continue;
            }
            for nu_plus in partitions(p_plus as u32) {
                let (raised, leak) = apply_u(space, r, -s, -1, &nu_plus, &lowered);
                out.leaks |= leak;
                out.terms += 1;
                for (j, a) in raised {
                    accumulate(&mut out.vector, j, a);
                }
            }
        }
    }
    Ok(out)
}

/// Summary of a reconstructed-field versus field-operator comparison.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReconstructionReport {
    /// Number of (ket, r, k) triples compared exactly.
    pub pairs_checked: usize,
    /// Triples outside the exactness guarantee.
    pub pairs_skipped: usize,
    /// Triples where the two images differ.
    pub mismatches: usize,
    /// Triples predicted exact that nevertheless leaked.
    pub unexpected_leaks: usize,
    /// First mismatch as `(r, k2, ket)`.
    pub first_mismatch: Option<(Chirality, i32, u64)>,
}

impl ReconstructionReport {
    /// Whether every checked triple agreed exactly.
    pub fn pass(&self) -> bool {
        self.pairs_checked > 0 && self.mismatches == 0 && self.unexpected_leaks == 0
    }
}

/// Compares the reconstructed field with the field operator on every ket of energy
/// at most `window2 * pi / L` and every window momentum.
pub fn reconstruction_check(space: &FockSpace, window2: u32, exec: Exec) -> Result<ReconstructionReport> {
    let kets = space.states_up_to(window2);
    let k2s = space.grid().fermion_half_units();
    let per_ket = exec.map(&kets, |&ket| -> Result<ReconstructionReport> {
        let mut rep = ReconstructionReport::default();
        for r in Chirality::BOTH {
            for &k2 in &k2s {
                let rec = reconstructed_field(space, r, k2, ket)?;
                if !rec.guaranteed {
                    rep.pairs_skipped += 1;
                    continue;
                }
                rep.pairs_checked += 1;
                if rec.leaks {
                    rep.unexpected_leaks += 1;
                    rep.first_mismatch.get_or_insert((r, k2, ket));
                    continue;
                }
                let field = FockOp::Field {
                    mode: Mode::new(r, k2),
                    dagger: false,
                }
                .apply_basis(space, ket);
                let expected: SparseVec = field.terms.into_iter().collect();
                if expected != rec.vector {
                    rep.mismatches += 1;
                    rep.first_mismatch.get_or_insert((r, k2, ket));
                }
            }
        }
        Ok(rep)
    });
    let mut total = ReconstructionReport::default();
    for rep in per_ket {
        let rep = rep?;
        total.pairs_checked += rep.pairs_checked;
        total.pairs_skipped += rep.pairs_skipped;
        total.mismatches += rep.mismatches;
        total.unexpected_leaks += rep.unexpected_leaks;
        if total.first_mismatch.is_none() {
            total.first_mismatch = rep.first_mismatch;
        }
    }
    Ok(total)
}
