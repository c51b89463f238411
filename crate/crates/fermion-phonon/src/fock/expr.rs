//! Polynomial expressions in the elementary operators, evaluated exactly on
//! basis states with leak tracking.

use num_traits::{One, Zero};

use super::ops::{accumulate, amp, Amp, FockOp, Prediction, SparseVec};
use super::space::FockSpace;

/// `coeff * ops[0] * ops[1] * ...` (rightmost operator acts first).
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    /// Scalar coefficient.
    pub coeff: Amp,
    /// Operator string in product order.
    pub ops: Vec<FockOp>,
}

/// A finite sum of operator strings.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Expr {
    /// Summands.
    pub terms: Vec<Term>,
}

/// Result of evaluating an expression on one basis state.
#[derive(Clone, Debug, Default)]
pub struct Evaluation {
    /// Window projection of the image.
    pub vector: SparseVec,
    /// Whether any intermediate state leaked out of the window.
    pub leaks: bool,
}

impl Expr {
    /// Single operator.
    pub fn op(op: FockOp) -> Self {
        Self {
            terms: vec![Term {
                coeff: Amp::one(),
                ops: vec![op],
            }],
        }
    }

    /// Product of operators in the given order.
    pub fn product(ops: Vec<FockOp>) -> Self {
        Self {
            terms: vec![Term { coeff: Amp::one(), ops }],
        }
    }

    /// Scalar multiple of the identity.
    pub fn scalar(coeff: Amp) -> Self {
        Self {
            terms: vec![Term { coeff, ops: Vec::new() }],
        }
    }

    /// Zero operator.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Sum.
    pub fn add(&self, other: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expr { terms }
    }

    /// Difference.
    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.scale(&amp(-1)))
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &Amp) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * c,
                    ops: t.ops.clone(),
                })
                .collect(),
        }
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Expr) -> Expr {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut ops = a.ops.clone();
                ops.extend(b.ops.iter().cloned());
                terms.push(Term {
                    coeff: &a.coeff * &b.coeff,
                    ops,
                });
            }
        }
        Expr { terms }
    }

    /// `[a, b]`.
    pub fn commutator(a: &Expr, b: &Expr) -> Expr {
        a.mul(b).sub(&b.mul(a))
    }

    /// `{a, b}`.
    pub fn anticommutator(a: &Expr, b: &Expr) -> Expr {
        a.mul(b).add(&b.mul(a))
    }

    /// Adjoint: reversed strings of adjoint operators with conjugated coefficients.
    pub fn adjoint(&self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.conj(),
                    ops: t.ops.iter().rev().map(FockOp::adjoint).collect(),
                })
                .collect(),
        }
    }

    /// Common power of `sqrt(L / 2 pi)` of all terms; `None` if the terms disagree.
    /// The empty expression reports `Some(0)`.
    pub fn scale_power(&self) -> Option<i32> {
        let mut powers = self.terms.iter().map(|t| t.ops.iter().map(FockOp::scale_power).sum::<i32>());
        let first = powers.next().unwrap_or(0);
        powers.all(|p| p == first).then_some(first)
    }

    /// Whether the energy bookkeeping guarantees an exact image of every term on a
    /// basis state in sector `(e2, q)`.
    pub fn guaranteed_exact(&self, space: &FockSpace, e2: i64, q: [i32; 2]) -> bool {
        self.terms.iter().all(|t| {
            let mut sector = (e2, q);
            for op in t.ops.iter().rev() {
                match op.predict(space, sector.0, sector.1) {
                    Prediction::Exact(e, qq) => sector = (e, qq),
                    Prediction::Zero => return true,
                    Prediction::Unknown => return false,
                }
            }
            true
        })
    }

    /// Exact image of basis state `idx`.
    pub fn apply_basis(&self, space: &FockSpace, idx: u64) -> Evaluation {
        let mut start = SparseVec::new();
        start.insert(idx, Amp::one());
        self.apply_vec(space, &start)
    }

    /// Exact image of a sparse vector.
    pub fn apply_vec(&self, space: &FockSpace, v: &SparseVec) -> Evaluation {
        let mut out = Evaluation::default();
        for term in &self.terms {
            if term.coeff.is_zero() {
                continue;
            }
            let mut current = v.clone();
            for op in term.ops.iter().rev() {
                if current.is_empty() {
                    break;
                }
                let (next, leaks) = op.apply_vec(space, &current);
                out.leaks |= leaks;
                current = next;
            }
            for (j, a) in current {
                accumulate(&mut out.vector, j, a * &term.coeff);
            }
        }
        out
    }
}
