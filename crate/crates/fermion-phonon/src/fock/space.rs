//! Truncated fermion Fock space: modes, occupation states and Jordan-Wigner signs.
//!
//! Modes are ordered with chirality `+` before `-` and momenta descending inside
//! each chirality. A basis state is the ordered product of creation operators
//! `c†_{i1} c†_{i2} ... Ω` with ascending mode index, so the sign picked up by a
//! ladder operator on mode `i` is `(-1)` to the number of occupied modes before `i`.
//! The basis index of a state is its occupation bitmask read as an integer, which
//! makes the vacuum index 0 and the ordering lexicographic in (chirality, momentum).

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::model::{Chirality, MomentumGrid};

/// Largest number of fermion modes (`4K`) accepted by [`build_space`].
pub const MAX_MODES: u32 = 24;

/// A fermion mode: chirality and momentum in units of `pi / L` (an odd integer).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    /// Chirality.
    pub r: Chirality,
    /// Momentum in units of `pi / L`.
    pub k2: i32,
}

impl Mode {
    /// Mode with chirality `r` and momentum `k2 * pi / L`.
    pub fn new(r: Chirality, k2: i32) -> Self {
        Self { r, k2 }
    }

    /// Whether `r k > 0`, i.e. the mode is empty in the Dirac sea description.
    pub fn is_particle_like(&self) -> bool {
        self.r.sign() * self.k2 > 0
    }
}

/// One basis vector of the truncated Fock space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OccupationState {
    /// Occupation bitmask of the `+` modes (bit `j` is momentum `(2K - 1 - 2j) pi / L`).
    pub plus: u32,
    /// Occupation bitmask of the `-` modes, same layout.
    pub minus: u32,
    /// Charges `(q_+, q_-)` with `q_r = sum_k sgn(r k) n_r(k)`.
    pub charge: [i32; 2],
    /// Energy in units of `pi / L`: `sum |k2| n_r(k)`.
    pub energy2: u32,
}

impl OccupationState {
    /// Energy in units of `2 pi / L` as an exact rational.
    pub fn energy(&self) -> BigRational {
        BigRational::new(BigInt::from(self.energy2), BigInt::from(2))
    }
}

/// Sign convention for ladder operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// Jordan-Wigner signs from the ordered product of creation operators.
    #[default]
    JordanWigner,
    /// All ladder signs set to `+1`. This breaks the anticommutation relations on
    /// purpose and exists only as a negative control for the verification suite.
    Unsigned,
}

/// The truncated Fock space built on a [`MomentumGrid`].
#[derive(Clone, Debug)]
pub struct FockSpace {
    grid: MomentumGrid,
    k: u32,
    convention: SignConvention,
}

/// Builds the complete occupation-number basis on `grid`.
pub fn build_space(grid: MomentumGrid) -> Result<FockSpace> {
    build_space_with(grid, SignConvention::JordanWigner)
}

/// Builds the basis with an explicit ladder sign convention.
pub fn build_space_with(grid: MomentumGrid, convention: SignConvention) -> Result<FockSpace> {
    if grid.k == 0 {
        return Err(Error::BadGeometry("K must be at least 1".into()));
    }
    let bits = 4 * grid.k;
    if bits > MAX_MODES {
        return Err(Error::TruncationTooLarge { bits });
    }
    Ok(FockSpace {
        grid,
        k: grid.k,
        convention,
    })
}

impl FockSpace {
    /// Underlying momentum grid.
    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    /// Ladder sign convention.
    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    /// Truncation parameter `K`.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// System size.
    pub fn l(&self) -> f64 {
        self.grid.l
    }

    /// Number of modes per chirality (`2K`).
    pub fn modes_per_chirality(&self) -> u32 {
        2 * self.k
    }

    /// Total number of modes (`4K`).
    pub fn n_modes(&self) -> u32 {
        4 * self.k
    }

    /// Dimension `2^(4K)`.
    pub fn dim(&self) -> u64 {
        1u64 << self.n_modes()
    }

    /// Largest mode momentum in units of `pi / L` (`2K - 1`).
    pub fn max_k2(&self) -> i32 {
        2 * self.k as i32 - 1
    }

    /// Default interior window `E_int = (K - 1) 2 pi / L`, in units of `pi / L`.
    pub fn interior_window2(&self) -> u32 {
        2 * (self.k - 1)
    }

    /// Energy up to which every state of energy at most this value only occupies
    /// window modes, in units of `pi / L` (`2K`).
    pub fn exact_energy_bound2(&self) -> i64 {
        2 * self.k as i64
    }

    /// Whether `mode` lies in the truncated window.
    pub fn contains(&self, mode: Mode) -> bool {
        mode.k2 % 2 != 0 && mode.k2.abs() <= self.max_k2()
    }

    /// Position of `mode` in the operator ordering, if it lies in the window.
    pub fn mode_index(&self, mode: Mode) -> Option<u32> {
        if !self.contains(mode) {
            return None;
        }
        let within = ((self.max_k2() - mode.k2) / 2) as u32;
        Some(mode.r.index() as u32 * self.modes_per_chirality() + within)
    }

    /// Mode at position `i` of the operator ordering.
    pub fn mode_at(&self, i: u32) -> Mode {
        let per = self.modes_per_chirality();
        let r = if i < per { Chirality::Plus } else { Chirality::Minus };
        let j = (i % per) as i32;
        Mode::new(r, self.max_k2() - 2 * j)
    }

    /// Checks that `mode` is a window mode.
    pub fn require(&self, mode: Mode) -> Result<u32> {
        self.mode_index(mode).ok_or_else(|| {
            Error::ModeOutOfWindow(format!(
                "mode (r = {}, k = {} pi/L) is outside |k| <= {} pi/L",
                mode.r,
                mode.k2,
                self.max_k2()
            ))
        })
    }

    /// Energy of basis state `idx` in units of `pi / L`.
    pub fn energy2(&self, idx: u64) -> u32 {
        let mut e = 0u32;
        let mut bits = idx;
        while bits != 0 {
            let i = bits.trailing_zeros();
            e += self.mode_at(i).k2.unsigned_abs();
            bits &= bits - 1;
        }
        e
    }

    /// Charges `(q_+, q_-)` of basis state `idx`.
    pub fn charges(&self, idx: u64) -> [i32; 2] {
        let mut q = [0i32; 2];
        let mut bits = idx;
        while bits != 0 {
            let i = bits.trailing_zeros();
            let m = self.mode_at(i);
            q[m.r.index()] += (m.r.sign() * m.k2).signum();
            bits &= bits - 1;
        }
        q
    }

    /// Full description of basis state `idx`.
    pub fn state(&self, idx: u64) -> OccupationState {
        let per = self.modes_per_chirality();
        let mask = (1u64 << per) - 1;
        OccupationState {
            plus: (idx & mask) as u32,
            minus: ((idx >> per) & mask) as u32,
            charge: self.charges(idx),
            energy2: self.energy2(idx),
        }
    }

    /// Basis position of `state`.
    pub fn index_of(&self, state: &OccupationState) -> u64 {
        state.plus as u64 | ((state.minus as u64) << self.modes_per_chirality())
    }

    /// Basis state with exactly the given modes occupied, as `(index, sign)` of
    /// `c†_{m1} c†_{m2} ... Ω` in the order given.
    pub fn create_all(&self, modes: &[Mode]) -> Result<Option<(u64, i32)>> {
        let mut state = Some((0u64, 1i32));
        for mode in modes.iter().rev() {
            let i = self.require(*mode)?;
            let unsigned = self.convention == SignConvention::Unsigned;
            state = state.and_then(|(idx, sign)| {
                create(idx, i).map(|(j, s)| (j, if unsigned { sign } else { s * sign }))
            });
        }
        Ok(state)
    }

    /// Iterates over all basis states in basis order.
    pub fn basis(&self) -> impl Iterator<Item = OccupationState> + '_ {
        (0..self.dim()).map(move |idx| self.state(idx))
    }

    /// Basis indices with energy at most `e2_max` (units of `pi / L`), ascending.
    ///
    /// Only modes with `|k2| <= e2_max` can be occupied, so the search runs over
    /// that sub-lattice of bitmasks instead of the full basis.
    pub fn states_up_to(&self, e2_max: u32) -> Vec<u64> {
        let allowed: Vec<u32> = (0..self.n_modes())
            .filter(|&i| self.mode_at(i).k2.unsigned_abs() <= e2_max)
            .collect();
        let mut out = Vec::new();
        self.collect_states(&allowed, 0, 0, 0, e2_max, &mut out);
        out.sort_unstable();
        out
    }

    fn collect_states(&self, allowed: &[u32], pos: usize, idx: u64, e2: u32, cap: u32, out: &mut Vec<u64>) {
        if pos == allowed.len() {
            out.push(idx);
            return;
        }
        self.collect_states(allowed, pos + 1, idx, e2, cap, out);
        let i = allowed[pos];
        let cost = self.mode_at(i).k2.unsigned_abs();
        if e2 + cost <= cap {
            self.collect_states(allowed, pos + 1, idx | (1u64 << i), e2 + cost, cap, out);
        }
    }
}

/// Jordan-Wigner sign for a ladder operator on mode `i` acting on `idx`.
pub fn jw_sign(idx: u64, i: u32) -> i32 {
    if (idx & ((1u64 << i) - 1)).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `c†_i` on basis state `idx`: `None` if the mode is already occupied.
pub fn create(idx: u64, i: u32) -> Option<(u64, i32)> {
    let bit = 1u64 << i;
    if idx & bit != 0 {
        None
    } else {
        Some((idx | bit, jw_sign(idx, i)))
    }
}

/// `c_i` on basis state `idx`: `None` if the mode is empty.
pub fn annihilate(idx: u64, i: u32) -> Option<(u64, i32)> {
    let bit = 1u64 << i;
    if idx & bit == 0 {
        None
    } else {
        Some((idx & !bit, jw_sign(idx, i)))
    }
}

impl FockSpace {
    /// Index of the same occupation pattern in a larger truncation.
    pub fn embed_index(&self, idx: u64, larger: &FockSpace) -> Result<u64> {
        let mut out = 0u64;
        let mut bits = idx;
        while bits != 0 {
            let i = bits.trailing_zeros();
            out |= 1u64 << larger.require(self.mode_at(i))?;
            bits &= bits - 1;
        }
        Ok(out)
    }
}
