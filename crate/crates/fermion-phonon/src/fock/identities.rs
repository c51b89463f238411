//! Exact verification of the bosonization operator identities on the interior
//! window of a truncated Fock space.
//!
//! Each identity expands into a list of instances (one per choice of chiralities
//! and momenta). An instance is evaluated on every basis ket of the interior window
//! for which the energy bookkeeping guarantees that no intermediate state leaves
//! the mode window; on those kets both sides must agree exactly. A leak on a ket
//! that was predicted to be exact is reported as a failure, never skipped.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::operator::boson_expr;
use super::ops::{amp, amp_ratio, amp_size, FockOp, SparseVec};
use super::space::{FockSpace, Mode};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::Chirality;

/// Supported operator identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Identity {
    /// Canonical anticommutation relations of `c`, `c†` and of the fields.
    #[serde(rename = "CAR")]
    Car,
    /// `[J_r(p), J_r'(p')] = r delta_{rr'} (L p / 2 pi) delta_{p,-p'}`.
    #[serde(rename = "SCHWINGER")]
    Schwinger,
    /// `[J_r(p), psi†_r'(k)] = delta_{rr'} psi†_r(k - p)`.
    #[serde(rename = "J_PSI")]
    JPsi,
    /// `[H0, J_r(p)] = -r p J_r(p)`.
    #[serde(rename = "H0_J")]
    H0J,
    /// `[J_r(p), R_r'] = r delta_{rr'} delta_{p,0} R_r`.
    #[serde(rename = "J_R")]
    JR,
    /// `[H0, R_r] = r (pi / L) {Q_r, R_r}`.
    #[serde(rename = "H0_R")]
    H0R,
    /// `R_+ R_- = -R_- R_+` (and the variants with adjoints).
    #[serde(rename = "RR_ANTI")]
    RrAnti,
    /// `H0 = (pi / L) sum_r [Q_r^2 + 2 sum_{p>0} J_r(-r p) J_r(r p)]`.
    #[serde(rename = "KRONIG")]
    Kronig,
    /// `R†_r R_r = R_r R†_r = 1`.
    #[serde(rename = "KLEIN_UNITARY")]
    KleinUnitary,
    /// `[b(p), b†(p')] = delta_{p,p'}`.
    #[serde(rename = "BOSON_CCR")]
    BosonCcr,
    /// `[H0, psi†_r(k)] = r k psi†_r(k)`.
    #[serde(rename = "H0_PSI")]
    H0Psi,
}

impl Identity {
    /// The core suite.
    pub const CORE: [Identity; 8] = [
        Identity::Car,
        Identity::Schwinger,
        Identity::JPsi,
        Identity::H0J,
        Identity::JR,
        Identity::H0R,
        Identity::RrAnti,
        Identity::Kronig,
    ];

    /// Core suite plus the auxiliary identities.
    pub const ALL: [Identity; 11] = [
        Identity::Car,
        Identity::Schwinger,
        Identity::JPsi,
        Identity::H0J,
        Identity::JR,
        Identity::H0R,
        Identity::RrAnti,
        Identity::Kronig,
        Identity::KleinUnitary,
        Identity::BosonCcr,
        Identity::H0Psi,
    ];

    /// Canonical upper-case name.
    pub fn name(self) -> &'static str {
        match self {
            Identity::Car => "CAR",
            Identity::Schwinger => "SCHWINGER",
            Identity::JPsi => "J_PSI",
            Identity::H0J => "H0_J",
            Identity::JR => "J_R",
            Identity::H0R => "H0_R",
            Identity::RrAnti => "RR_ANTI",
            Identity::Kronig => "KRONIG",
            Identity::KleinUnitary => "KLEIN_UNITARY",
            Identity::BosonCcr => "BOSON_CCR",
            Identity::H0Psi => "H0_PSI",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

/// One concrete instance `lhs = rhs`.
#[derive(Clone, Debug)]
pub struct Instance {
    /// Human-readable label (chiralities and momenta).
    pub label: String,
    /// Left-hand side.
    pub lhs: Expr,
    /// Right-hand side.
    pub rhs: Expr,
    /// Power of `sqrt(L / 2 pi)` carried by the scalar coefficients of the
    /// right-hand side (for instance `-2` when they are momenta in units of `2 pi / L`).
    pub rhs_scale: i32,
}

impl Instance {
    fn new(label: String, lhs: Expr, rhs: Expr) -> Self {
        Self {
            label,
            lhs,
            rhs,
            rhs_scale: 0,
        }
    }

    fn with_rhs_scale(mut self, power: i32) -> Self {
        self.rhs_scale = power;
        self
    }

    /// Whether both sides carry the same power of the length scale. A side made
    /// only of scalars counts as compatible with anything.
    pub fn scales_consistent(&self) -> bool {
        let only_scalars = |e: &Expr| e.terms.iter().all(|t| t.ops.is_empty());
        if only_scalars(&self.lhs) || only_scalars(&self.rhs) {
            return true;
        }
        match (self.lhs.scale_power(), self.rhs.scale_power()) {
            (Some(l), Some(r)) => l == r + self.rhs_scale,
            _ => false,
        }
    }
}

/// First ket on which an instance failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// Instance label.
    pub instance: String,
    /// Basis index of the ket.
    pub ket: u64,
    /// Basis index of the offending bra (absent for an unexpected leak).
    pub bra: Option<u64>,
    /// What went wrong.
    pub detail: String,
}

/// Outcome of an identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    /// Identity name.
    pub identity: Identity,
    /// Truncation parameter.
    pub k: u32,
    /// System size.
    pub l: f64,
    /// Ket window in units of `pi / L`.
    pub window2: u32,
    /// Largest residual component over all checked kets and instances.
    pub residual: BigRational,
    /// Number of instances.
    pub instances: usize,
    /// Number of (instance, ket) pairs evaluated.
    pub kets_checked: usize,
    /// Number of (instance, ket) pairs outside the exactness guarantee.
    pub kets_skipped: usize,
    /// First failure, if any.
    pub failure: Option<Failure>,
}

impl IdentityReport {
    /// Window in units of `2 pi / L`.
    pub fn window(&self) -> BigRational {
        BigRational::new(BigInt::from(self.window2), BigInt::from(2))
    }

    /// Whether the identity holds exactly on every checked ket.
    pub fn pass(&self) -> bool {
        self.failure.is_none() && self.residual.is_zero() && self.kets_checked > 0
    }
}

fn op(o: FockOp) -> Expr {
    Expr::op(o)
}

fn density(r: Chirality, m: i32, cutoff2: Option<u32>) -> Expr {
    op(FockOp::Density { r, m, cutoff2 })
}

fn h0(cutoff2: Option<u32>) -> Expr {
    op(FockOp::H0 { cutoff2 })
}

fn klein(r: Chirality, dagger: bool) -> Expr {
    op(FockOp::Klein { r, dagger })
}

fn charge(r: Chirality) -> Expr {
    op(FockOp::Charge { r })
}

fn field(r: Chirality, k2: i32, dagger: bool) -> Expr {
    op(FockOp::Field {
        mode: Mode::new(r, k2),
        dagger,
    })
}

fn ladder(mode: Mode, dagger: bool) -> Expr {
    op(FockOp::Ladder { mode, dagger })
}

/// All instances of `identity` on `space`, with densities and the free
/// Hamiltonian regularized by `cutoff2` when given.
pub fn instances(space: &FockSpace, identity: Identity, cutoff2: Option<u32>) -> Vec<Instance> {
    let kk = space.k() as i32;
    let ms: Vec<i32> = (-kk..=kk).collect();
    let k2s: Vec<i32> = space.grid().fermion_half_units();
    let modes: Vec<Mode> = (0..space.n_modes()).map(|i| space.mode_at(i)).collect();
    let mut out = Vec::new();
    match identity {
        Identity::Car => {
            for a in &modes {
                for b in &modes {
                    let delta = if a == b { amp(1) } else { amp(0) };
                    out.push(Instance::new(
                        format!("{{c{a:?}, c+{b:?}}}"),
                        Expr::anticommutator(&ladder(*a, false), &ladder(*b, true)),
                        Expr::scalar(delta.clone()),
                    ));
                    out.push(Instance::new(
                        format!("{{c{a:?}, c{b:?}}}"),
                        Expr::anticommutator(&ladder(*a, false), &ladder(*b, false)),
                        Expr::zero(),
                    ));
                    out.push(Instance::new(
                        format!("{{c+{a:?}, c+{b:?}}}"),
                        Expr::anticommutator(&ladder(*a, true), &ladder(*b, true)),
                        Expr::zero(),
                    ));
                    out.push(Instance::new(
                        format!("{{psi{a:?}, psi+{b:?}}}"),
                        Expr::anticommutator(&field(a.r, a.k2, false), &field(b.r, b.k2, true)),
                        Expr::scalar(delta),
                    ));
                }
            }
        }
        Identity::Schwinger => {
            for r in Chirality::BOTH {
                for rp in Chirality::BOTH {
                    for &m in &ms {
                        for &mp in &ms {
                            let value = if r == rp && m == -mp { r.sign() * m } else { 0 };
                            out.push(Instance::new(
                                format!("[J{r}({m}), J{rp}({mp})]"),
                                Expr::commutator(&density(r, m, cutoff2), &density(rp, mp, cutoff2)),
                                Expr::scalar(amp(value as i64)),
                            ));
                        }
                    }
                }
            }
        }
        Identity::JPsi => {
            for r in Chirality::BOTH {
                for rp in Chirality::BOTH {
                    for &m in &ms {
                        for &k2 in &k2s {
                            let lhs = Expr::commutator(&density(r, m, cutoff2), &field(rp, k2, true));
                            let rhs = if r != rp {
                                Expr::zero()
                            } else if space.contains(Mode::new(r, k2 - 2 * m)) {
                                field(r, k2 - 2 * m, true)
                            } else {
                                continue;
                            };
                            out.push(Instance::new(format!("[J{r}({m}), psi+{rp}({k2}/2)]"), lhs, rhs));
                        }
                    }
                }
            }
        }
        Identity::H0J => {
            for r in Chirality::BOTH {
                for &m in &ms {
                    out.push(Instance::new(
                        format!("[H0, J{r}({m})]"),
                        Expr::commutator(&h0(cutoff2), &density(r, m, cutoff2)),
                        density(r, m, cutoff2).scale(&amp(-(r.sign() * m) as i64)),
                    )
                    .with_rhs_scale(-2));
                }
            }
        }
        Identity::JR => {
            for r in Chirality::BOTH {
                for rp in Chirality::BOTH {
                    for &m in &ms {
                        for dagger in [false, true] {
                            // [J, R†] = -(r delta delta) R† follows from the adjoint relation.
                            let s = if dagger { -1 } else { 1 };
                            let value = if r == rp && m == 0 { s * r.sign() } else { 0 };
                            out.push(Instance::new(
                                format!("[J{r}({m}), R{rp}{}]", if dagger { "+" } else { "" }),
                                Expr::commutator(&density(r, m, cutoff2), &klein(rp, dagger)),
                                klein(rp, dagger).scale(&amp(value as i64)),
                            ));
                        }
                    }
                }
            }
        }
        Identity::H0R => {
            for r in Chirality::BOTH {
                let lhs = Expr::commutator(&h0(cutoff2), &klein(r, false));
                let rhs = Expr::anticommutator(&charge(r), &klein(r, false)).scale(&amp_ratio(r.sign() as i64, 2));
                out.push(Instance::new(format!("[H0, R{r}]"), lhs, rhs).with_rhs_scale(-2));
            }
        }
        Identity::RrAnti => {
            for dp in [false, true] {
                for dm in [false, true] {
                    let a = klein(Chirality::Plus, dp);
                    let b = klein(Chirality::Minus, dm);
                    out.push(Instance::new(
                        format!("{{R+{}, R-{}}}", if dp { "+" } else { "" }, if dm { "+" } else { "" }),
                        Expr::anticommutator(&a, &b),
                        Expr::zero(),
                    ));
                }
            }
        }
        Identity::Kronig => {
            let mut rhs = Expr::zero();
            for r in Chirality::BOTH {
                rhs = rhs.add(&charge(r).mul(&charge(r)).scale(&amp_ratio(1, 2)));
                for m in 1..=kk {
                    let s = r.sign();
                    rhs = rhs.add(&density(r, -s * m, cutoff2).mul(&density(r, s * m, cutoff2)));
                }
            }
            out.push(Instance::new("H0 = Kronig".into(), h0(cutoff2), rhs).with_rhs_scale(-2));
        }
        Identity::KleinUnitary => {
            for r in Chirality::BOTH {
                out.push(Instance::new(
                    format!("R{r}+ R{r}"),
                    klein(r, true).mul(&klein(r, false)),
                    Expr::scalar(amp(1)),
                ));
                out.push(Instance::new(
                    format!("R{r} R{r}+"),
                    klein(r, false).mul(&klein(r, true)),
                    Expr::scalar(amp(1)),
                ));
            }
        }
        Identity::BosonCcr => {
            let nonzero: Vec<i32> = ms.iter().copied().filter(|m| *m != 0).collect();
            for &m in &nonzero {
                for &mp in &nonzero {
                    // b(p) = phase * sqrt(1/|m|) * J; on the diagonal the square roots
                    // combine to the rational 1/|m|, off the diagonal the commutator of
                    // the rational parts has to vanish on its own.
                    let lhs = Expr::commutator(&boson_expr(m, false), &boson_expr(mp, true));
                    let rhs = if m == mp {
                        Expr::scalar(amp(m.abs() as i64))
                    } else {
                        Expr::zero()
                    };
                    out.push(Instance::new(format!("[b({m}), b+({mp})]"), lhs, rhs));
                }
            }
        }
        Identity::H0Psi => {
            for r in Chirality::BOTH {
                for &k2 in &k2s {
                    out.push(Instance::new(
                        format!("[H0, psi+{r}({k2}/2)]"),
                        Expr::commutator(&h0(cutoff2), &field(r, k2, true)),
                        field(r, k2, true).scale(&amp_ratio((r.sign() * k2) as i64, 2)),
                    )
                    .with_rhs_scale(-2));
                }
            }
        }
    }
    out
}

/// Checks `identity` on the default interior window `E_int = (K - 1) 2 pi / L`.
pub fn identity_residual(space: &FockSpace, identity: Identity, cutoff2: Option<u32>) -> Result<IdentityReport> {
    identity_residual_with(space, identity, cutoff2, space.interior_window2(), Exec::default())
}

/// Checks `identity` on all kets with energy at most `window2 * pi / L`.
pub fn identity_residual_with(
    space: &FockSpace,
    identity: Identity,
    cutoff2: Option<u32>,
    window2: u32,
    exec: Exec,
) -> Result<IdentityReport> {
    if let Some(c) = cutoff2 {
        if c > space.max_k2() as u32 {
            return Err(Error::ModeOutOfWindow(format!("cutoff {c} pi/L exceeds the window edge")));
        }
    }
    let list = instances(space, identity, cutoff2);
    if let Some(bad) = list.iter().find(|i| !i.scales_consistent()) {
        return Err(Error::IncompatibleScale(bad.label.clone()));
    }
    Ok(check_instances(space, identity, &list, window2, exec))
}

#[derive(Default)]
struct KetOutcome {
    residual: BigRational,
    checked: usize,
    skipped: usize,
    failure: Option<Failure>,
}

/// Evaluates explicit instances on every ket of the window.
pub fn check_instances(
    space: &FockSpace,
    identity: Identity,
    list: &[Instance],
    window2: u32,
    exec: Exec,
) -> IdentityReport {
    let kets = space.states_up_to(window2);
    let outcomes = exec.map(&kets, |&ket| {
        let e2 = space.energy2(ket) as i64;
        let q = space.charges(ket);
        let mut out = KetOutcome::default();
        for inst in list {
            if !(inst.lhs.guaranteed_exact(space, e2, q) && inst.rhs.guaranteed_exact(space, e2, q)) {
                out.skipped += 1;
                continue;
            }
            out.checked += 1;
            let lhs = inst.lhs.apply_basis(space, ket);
            let rhs = inst.rhs.apply_basis(space, ket);
            if lhs.leaks || rhs.leaks {
                out.failure.get_or_insert_with(|| Failure {
                    instance: inst.label.clone(),
                    ket,
                    bra: None,
                    detail: "image left the mode window on a ket predicted to be exact".into(),
                });
                continue;
            }
            let mut diff: SparseVec = lhs.vector;
            for (j, a) in rhs.vector {
                super::ops::accumulate(&mut diff, j, -a);
            }
            if let Some((bra, worst)) = largest(&diff) {
                if worst > out.residual {
                    out.residual = worst.clone();
                }
                out.failure.get_or_insert_with(|| Failure {
                    instance: inst.label.clone(),
                    ket,
                    bra: Some(bra),
                    detail: format!("residual component {worst}"),
                });
            }
        }
        out
    });
    let mut report = IdentityReport {
        identity,
        k: space.k(),
        l: space.l(),
        window2,
        residual: BigRational::zero(),
        instances: list.len(),
        kets_checked: 0,
        kets_skipped: 0,
        failure: None,
    };
    for o in outcomes {
        report.kets_checked += o.checked;
        report.kets_skipped += o.skipped;
        if o.residual > report.residual {
            report.residual = o.residual;
        }
        if report.failure.is_none() {
            report.failure = o.failure;
        }
    }
    report
}

fn largest(v: &SparseVec) -> Option<(u64, BigRational)> {
    let mut best: Option<(u64, BigRational)> = None;
    for (j, a) in v {
        let s = amp_size(a);
        if best.as_ref().map_or(true, |(_, b)| s > *b) {
            best = Some((*j, s));
        }
    }
    best
}

/// Convenience: the residual vector `lhs - rhs` of an instance on one ket.
pub fn instance_residual(space: &FockSpace, inst: &Instance, ket: u64) -> (SparseVec, bool) {
    let lhs = inst.lhs.apply_basis(space, ket);
    let rhs = inst.rhs.apply_basis(space, ket);
    let mut diff = lhs.vector;
    for (j, a) in rhs.vector {
        super::ops::accumulate(&mut diff, j, -a);
    }
    (diff, lhs.leaks || rhs.leaks)
}
