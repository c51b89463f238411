//! Materialized sparse operators on a truncated Fock space and the public
//! constructors for the operators of the bosonization dictionary.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::expr::Expr;
use super::ops::{amp_imag, Amp, FockOp, SparseVec};
use super::space::{FockSpace, Mode};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::Chirality;

/// An operator stored column by column (ket index to image).
///
/// The numeric value of the operator is `sqrt(radicand) * (L / 2 pi)^(scale_power / 2)`
/// times the stored Gaussian-rational matrix. A column is *exact* when the image of
/// the ket stays inside the mode window; stored entries are always the exact window
/// projection, but products through a leaking column are not.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    expr: Expr,
    columns: Vec<Vec<(u64, Amp)>>,
    leaks: Vec<bool>,
    energy2: Vec<u32>,
    scale_power: i32,
    radicand: BigRational,
}

impl SparseOperator {
    /// Materializes `expr` on every basis state of `space`.
    pub fn from_expr(space: &FockSpace, expr: Expr) -> Result<Self> {
        Self::from_expr_with(space, expr, BigRational::one(), Exec::default())
    }

    /// Materializes `sqrt(radicand) * expr` with an explicit execution strategy.
    pub fn from_expr_with(space: &FockSpace, expr: Expr, radicand: BigRational, exec: Exec) -> Result<Self> {
        let scale_power = expr
            .scale_power()
            .ok_or_else(|| Error::IncompatibleScale("terms carry different powers of L".into()))?;
        let (fold, radicand) = split_square(&radicand);
        let expr = expr.scale(&Complex::new(fold, BigRational::zero()));
        let dim = space.dim() as usize;
        let images = exec.map_range(dim, |idx| {
            let ev = expr.apply_basis(space, idx as u64);
            (ev.vector.into_iter().collect::<Vec<_>>(), ev.leaks, space.energy2(idx as u64))
        });
        let mut columns = Vec::with_capacity(dim);
        let mut leaks = Vec::with_capacity(dim);
        let mut energy2 = Vec::with_capacity(dim);
        for (col, leak, e2) in images {
            columns.push(col);
            leaks.push(leak);
            energy2.push(e2);
        }
        Ok(Self {
            expr,
            columns,
            leaks,
            energy2,
            scale_power,
            radicand,
        })
    }

    /// The expression this operator was built from.
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Power of `sqrt(L / 2 pi)` multiplying the stored matrix.
    pub fn scale_power(&self) -> i32 {
        self.scale_power
    }

    /// Rational whose square root multiplies the stored matrix (1 unless irrational).
    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    /// Stored image of basis state `col`.
    pub fn column(&self, col: u64) -> &[(u64, Amp)] {
        &self.columns[col as usize]
    }

    /// Stored matrix element `<row | A | col>`.
    pub fn entry(&self, row: u64, col: u64) -> Amp {
        self.columns[col as usize]
            .iter()
            .find(|(r, _)| *r == row)
            .map(|(_, a)| a.clone())
            .unwrap_or_else(Amp::zero)
    }

    /// Whether the image of `col` lies entirely inside the window.
    pub fn is_exact_column(&self, col: u64) -> bool {
        !self.leaks[col as usize]
    }

    /// Number of stored non-zero entries.
    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Validity window in units of `pi / L`: the largest energy such that every
    /// column at or below it is exact, or `-1` when the vacuum column already leaks.
    pub fn window2(&self) -> i64 {
        let first_leak = self
            .leaks
            .iter()
            .zip(&self.energy2)
            .filter(|(l, _)| **l)
            .map(|(_, e)| *e as i64)
            .min();
        match first_leak {
            Some(e) => e - 1,
            None => self.energy2.iter().copied().max().unwrap_or(0) as i64,
        }
    }

    /// Validity window in units of `2 pi / L`.
    pub fn window(&self) -> BigRational {
        BigRational::new(BigInt::from(self.window2()), BigInt::from(2))
    }

    /// Applies the stored matrix to a sparse vector.
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (idx, a) in v {
            for (row, b) in &self.columns[*idx as usize] {
                super::ops::accumulate(&mut out, *row, a * b);
            }
        }
        out
    }

    /// Conjugate transpose of the stored entries as `(row, col, value)` triples,
    /// sorted by column then row.
    pub fn conjugate_transpose_entries(&self) -> Vec<(u64, u64, Amp)> {
        let mut out = Vec::with_capacity(self.nnz());
        for (col, column) in self.columns.iter().enumerate() {
            for (row, a) in column {
                out.push((col as u64, *row, a.conj()));
            }
        }
        out.sort_by(|x, y| (x.1, x.0).cmp(&(y.1, y.0)));
        out
    }

    /// The adjoint operator, rebuilt from the adjoint expression so that its leak
    /// flags are exact as well.
    pub fn adjoint(&self, space: &FockSpace) -> Result<Self> {
        Self::from_expr_with(space, self.expr.adjoint(), self.radicand.clone(), Exec::default())
    }

    /// Operator product `self * other`.
    pub fn product(&self, space: &FockSpace, other: &Self) -> Result<Self> {
        let radicand = &self.radicand * &other.radicand;
        Self::from_expr_with(space, self.expr.mul(&other.expr), radicand, Exec::default())
    }

    /// `[self, other]`.
    pub fn commutator(&self, space: &FockSpace, other: &Self) -> Result<Self> {
        self.combine(space, other, Expr::commutator)
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, space: &FockSpace, other: &Self) -> Result<Self> {
        self.combine(space, other, Expr::anticommutator)
    }

    fn combine(&self, space: &FockSpace, other: &Self, f: fn(&Expr, &Expr) -> Expr) -> Result<Self> {
        let radicand = &self.radicand * &other.radicand;
        Self::from_expr_with(space, f(&self.expr, &other.expr), radicand, Exec::default())
    }
}

/// Splits `r` into `s^2 * rest` with `s` rational, pulling out the largest
/// square that is visible from perfect-square numerator and denominator.
fn split_square(r: &BigRational) -> (BigRational, BigRational) {
    if r.is_zero() {
        return (BigRational::zero(), BigRational::one());
    }
    let sign = if r.is_negative() { -BigInt::one() } else { BigInt::one() };
    let numer = r.numer().abs();
    let denom = r.denom().clone();
    let sn = numer.sqrt();
    let sd = denom.sqrt();
    let n_square = &sn * &sn == numer;
    let d_square = &sd * &sd == denom;
    match (n_square, d_square) {
        (true, true) => (BigRational::new(sn, sd), BigRational::from_integer(sign)),
        (true, false) => (BigRational::new(sn, BigInt::one()), BigRational::new(sign, denom)),
        (false, true) => (BigRational::new(BigInt::one(), sd), BigRational::from_integer(sign * numer)),
        (false, false) => (BigRational::one(), r.clone()),
    }
}

fn check_mode(space: &FockSpace, r: Chirality, k2: i32) -> Result<Mode> {
    let mode = Mode::new(r, k2);
    space.require(mode)?;
    Ok(mode)
}

fn check_cutoff(space: &FockSpace, cutoff2: Option<u32>) -> Result<()> {
    match cutoff2 {
        Some(c) if c > space.max_k2() as u32 => Err(Error::ModeOutOfWindow(format!(
            "cutoff {c} pi/L exceeds the window edge {} pi/L",
            space.max_k2()
        ))),
        _ => Ok(()),
    }
}

/// `c_r(k)` with `k = k2 * pi / L`.
pub fn ladder_op(space: &FockSpace, r: Chirality, k2: i32) -> Result<SparseOperator> {
    let mode = check_mode(space, r, k2)?;
    SparseOperator::from_expr(space, Expr::op(FockOp::Ladder { mode, dagger: false }))
}

/// `c†_r(k)` with `k = k2 * pi / L`.
pub fn ladder_op_dagger(space: &FockSpace, r: Chirality, k2: i32) -> Result<SparseOperator> {
    let mode = check_mode(space, r, k2)?;
    SparseOperator::from_expr(space, Expr::op(FockOp::Ladder { mode, dagger: true }))
}

/// `psi_r(k)`: `c_r(k)` for `r k > 0` and `c†_r(k)` for `r k < 0`, times `sqrt(L / 2 pi)`.
pub fn field_op(space: &FockSpace, r: Chirality, k2: i32) -> Result<SparseOperator> {
    let mode = check_mode(space, r, k2)?;
    SparseOperator::from_expr(space, Expr::op(FockOp::Field { mode, dagger: false }))
}

/// Normal-ordered density `J_r(p)` with `p = (2 pi / L) m` and optional cutoff
/// `Lambda = cutoff2 * pi / L`.
pub fn density_op(space: &FockSpace, r: Chirality, m: i32, cutoff2: Option<u32>) -> Result<SparseOperator> {
    if m.unsigned_abs() > space.k() {
        return Err(Error::ModeOutOfWindow(format!(
            "boson mode m = {m} outside |m| <= K = {}",
            space.k()
        )));
    }
    check_cutoff(space, cutoff2)?;
    SparseOperator::from_expr(space, Expr::op(FockOp::Density { r, m, cutoff2 }))
}

/// Free Hamiltonian `sum |k| c† c` (units of `2 pi / L` times velocity), optionally
/// restricted to `|k| <= cutoff2 * pi / L`.
pub fn free_hamiltonian(space: &FockSpace, cutoff2: Option<u32>) -> Result<SparseOperator> {
    check_cutoff(space, cutoff2)?;
    SparseOperator::from_expr(space, Expr::op(FockOp::H0 { cutoff2 }))
}

/// Klein factor `R_r`.
pub fn klein_factor(space: &FockSpace, r: Chirality) -> Result<SparseOperator> {
    SparseOperator::from_expr(space, Expr::op(FockOp::Klein { r, dagger: false }))
}

/// Klein factor adjoint `R†_r`, built directly from the mirrored shift rules.
pub fn klein_factor_dagger(space: &FockSpace, r: Chirality) -> Result<SparseOperator> {
    SparseOperator::from_expr(space, Expr::op(FockOp::Klein { r, dagger: true }))
}

/// Phase of `b(p)` relative to `sqrt(2 pi / (L |p|)) J(p)`: `-i` for `p > 0`, `+i` for `p < 0`.
pub fn boson_phase(m: i32) -> Amp {
    if m > 0 {
        amp_imag(-1)
    } else {
        amp_imag(1)
    }
}

/// Expression part of `b(p)` (without the square-root factor `sqrt(1 / |m|)`).
pub fn boson_expr(m: i32, dagger: bool) -> Expr {
    let r = if m > 0 { Chirality::Plus } else { Chirality::Minus };
    let b = Expr::op(FockOp::Density { r, m, cutoff2: None }).scale(&boson_phase(m));
    if dagger {
        b.adjoint()
    } else {
        b
    }
}

/// Boson annihilation operator `b(p)`, `p = (2 pi / L) m`, `m != 0`.
pub fn boson_ladder(space: &FockSpace, m: i32) -> Result<SparseOperator> {
    boson_ladder_impl(space, m, false)
}

/// Boson creation operator `b†(p)`.
pub fn boson_ladder_dagger(space: &FockSpace, m: i32) -> Result<SparseOperator> {
    boson_ladder_impl(space, m, true)
}

fn boson_ladder_impl(space: &FockSpace, m: i32, dagger: bool) -> Result<SparseOperator> {
    if m == 0 {
        return Err(Error::ZeroMode);
    }
    if m.unsigned_abs() > space.k() {
        return Err(Error::ModeOutOfWindow(format!("boson mode m = {m} outside |m| <= K")));
    }
    let radicand = BigRational::new(BigInt::one(), BigInt::from(m.unsigned_abs()));
    SparseOperator::from_expr_with(space, boson_expr(m, dagger), radicand, Exec::default())
}
