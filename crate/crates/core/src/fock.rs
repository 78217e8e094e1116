//! Truncated zero-charge fermionic Fock space.
//!
//! Basis states are occupation records: a strictly increasing list of
//! occupied fermion modes (`b`) and one of antifermion modes (`c`). The
//! canonical operator string for a state is the `b`-creators in ascending
//! mode order followed by the `c`-creators in ascending order, applied to
//! the vacuum; every sign in the crate is the transposition count relative
//! to this convention.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::op::{self, MatrixBuilder, OperatorMatrix};

/// Default cap on catalog dimension before `enumerate` refuses.
pub const DEFAULT_MAX_STATES: usize = 2_000_000;

/// Ladder operator species.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    B,
    BDag,
    C,
    CDag,
}

/// Mode truncation: modes `|n| <= lambda` are representable, and catalogs
/// keep at most `max_pairs` fermion/antifermion pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeWindow {
    lambda: i32,
    max_pairs: usize,
}

impl ModeWindow {
    pub fn new(lambda: i32, max_pairs: usize) -> Result<Self> {
        if lambda < 1 {
            return Err(CoreError::InvalidWindow(format!("lambda = {lambda}, need >= 1")));
        }
        let num_modes = 2 * lambda as usize + 1;
        if max_pairs > num_modes {
            return Err(CoreError::InvalidWindow(format!(
                "max_pairs = {max_pairs} exceeds mode count {num_modes}"
            )));
        }
        Ok(Self { lambda, max_pairs })
    }

    pub fn lambda(&self) -> i32 {
        self.lambda
    }

    pub fn max_pairs(&self) -> usize {
        self.max_pairs
    }

    pub fn num_modes(&self) -> usize {
        2 * self.lambda as usize + 1
    }

    pub fn contains_mode(&self, mode: i32) -> bool {
        mode.abs() <= self.lambda
    }

    /// Ladder application with the window precondition checked.
    pub fn apply_ladder(
        &self,
        kind: LadderKind,
        mode: i32,
        state: &FockState,
    ) -> Result<Option<(i32, FockState)>> {
        if !self.contains_mode(mode) {
            return Err(CoreError::ModeOutsideWindow { mode, lambda: self.lambda });
        }
        Ok(state.apply_ladder(kind, mode))
    }
}

/// Occupation record. Not restricted to zero charge: composite operator
/// strings pass through intermediate charge sectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockState {
    fermions: Vec<i32>,
    antifermions: Vec<i32>,
}

impl FockState {
    pub fn vacuum() -> Self {
        Self { fermions: Vec::new(), antifermions: Vec::new() }
    }

    /// Build from mode lists; both must be strictly increasing.
    pub fn new(fermions: Vec<i32>, antifermions: Vec<i32>) -> Result<Self> {
        for w in [&fermions, &antifermions] {
            if w.windows(2).any(|p| p[0] >= p[1]) {
                return Err(CoreError::InvalidWindow(
                    "occupation lists must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { fermions, antifermions })
    }

    pub fn fermions(&self) -> &[i32] {
        &self.fermions
    }

    pub fn antifermions(&self) -> &[i32] {
        &self.antifermions
    }

    pub fn is_vacuum(&self) -> bool {
        self.fermions.is_empty() && self.antifermions.is_empty()
    }

    /// Apply one ladder operator. Returns the fermionic sign and the new
    /// occupation, or `None` when the action annihilates the state.
    pub fn apply_ladder(&self, kind: LadderKind, mode: i32) -> Option<(i32, FockState)> {
        let mut next = self.clone();
        let sign = match kind {
            LadderKind::BDag => {
                let pos = next.fermions.partition_point(|&m| m < mode);
                if next.fermions.get(pos) == Some(&mode) {
                    return None; // Pauli exclusion
                }
                next.fermions.insert(pos, mode);
                parity(pos)
            }
            LadderKind::B => {
                let pos = next.fermions.partition_point(|&m| m < mode);
                if next.fermions.get(pos) != Some(&mode) {
                    return None;
                }
                next.fermions.remove(pos);
                parity(pos)
            }
            LadderKind::CDag => {
                let pos = next.antifermions.partition_point(|&m| m < mode);
                if next.antifermions.get(pos) == Some(&mode) {
                    return None;
                }
                next.antifermions.insert(pos, mode);
                parity(self.fermions.len() + pos)
            }
            LadderKind::C => {
                let pos = next.antifermions.partition_point(|&m| m < mode);
                if next.antifermions.get(pos) != Some(&mode) {
                    return None;
                }
                next.antifermions.remove(pos);
                parity(self.fermions.len() + pos)
            }
        };
        Some((sign, next))
    }

    /// Apply an operator string right to left, accumulating the sign.
    pub fn apply_string(&self, ops: &[(LadderKind, i32)]) -> Option<(i32, FockState)> {
        let mut sign = 1;
        let mut state = self.clone();
        for &(kind, mode) in ops.iter().rev() {
            let (s, next) = state.apply_ladder(kind, mode)?;
            sign *= s;
            state = next;
        }
        Some((sign, state))
    }

    /// Ordinary charge Q = #fermions - #antifermions.
    pub fn charge_q(&self) -> i32 {
        self.fermions.len() as i32 - self.antifermions.len() as i32
    }

    /// Axial charge Q5 = #{b >= 0} - #{b < 0} - #{c > 0} + #{c <= 0}.
    pub fn charge_q5(&self) -> i32 {
        let b_pos = self.fermions.iter().filter(|&&m| m >= 0).count() as i32;
        let b_neg = self.fermions.len() as i32 - b_pos;
        let c_pos = self.antifermions.iter().filter(|&&n| n > 0).count() as i32;
        let c_neg = self.antifermions.len() as i32 - c_pos;
        b_pos - b_neg - c_pos + c_neg
    }

    /// Total momentum in units of 2 pi / L.
    pub fn momentum_index(&self) -> i32 {
        self.fermions.iter().sum::<i32>() + self.antifermions.iter().sum::<i32>()
    }

    /// Free Dirac energy in units of 2 pi / L: sum of |mode| over all
    /// occupied modes of both species.
    pub fn dirac_index(&self) -> i32 {
        self.fermions.iter().map(|m| m.abs()).sum::<i32>()
            + self.antifermions.iter().map(|n| n.abs()).sum::<i32>()
    }

    pub fn pair_count(&self) -> usize {
        self.fermions.len().max(self.antifermions.len())
    }

    /// Largest |mode| occupied (0 for the vacuum).
    pub fn max_abs_mode(&self) -> i32 {
        self.fermions
            .iter()
            .chain(self.antifermions.iter())
            .map(|m| m.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn within(&self, lambda: i32) -> bool {
        self.max_abs_mode() <= lambda
    }
}

fn parity(transpositions: usize) -> i32 {
    if transpositions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The unexcited state in the axial sector Q5 = 2P.
///
/// P > 0 occupies fermion modes {0..P-1} and antifermion modes {-(P-1)..0};
/// P < 0 occupies {P..-1} and {1..-P}.
pub fn unexcited_state(p: i32, window: &ModeWindow) -> Result<FockState> {
    let lambda = window.lambda();
    let needed = if p > 0 { p - 1 } else { -p };
    if needed > lambda || p.unsigned_abs() as usize > window.max_pairs() {
        return Err(CoreError::WindowTooSmall(format!(
            "unexcited state P = {p} needs modes up to {needed} and {} pairs",
            p.unsigned_abs()
        )));
    }
    let state = if p == 0 {
        FockState::vacuum()
    } else if p > 0 {
        FockState {
            fermions: (0..p).collect(),
            antifermions: (-(p - 1)..=0).collect(),
        }
    } else {
        FockState {
            fermions: (p..0).collect(),
            antifermions: (1..=-p).collect(),
        }
    };
    debug_assert_eq!(state.charge_q5(), 2 * p);
    Ok(state)
}

/// Indexed zero-charge basis under a window. Enumeration is lexicographic
/// in (pair count, fermion set, antifermion set) with modes ordered
/// ascending, so indices are reproducible run to run.
#[derive(Debug)]
pub struct BasisCatalog {
    window: ModeWindow,
    states: Vec<FockState>,
    lookup: HashMap<FockState, usize>,
}

impl BasisCatalog {
    pub fn enumerate(window: ModeWindow) -> Result<Arc<Self>> {
        Self::enumerate_capped(window, DEFAULT_MAX_STATES)
    }

    pub fn enumerate_capped(window: ModeWindow, cap: usize) -> Result<Arc<Self>> {
        let count = Self::expected_count(&window);
        if count > cap as u128 {
            return Err(CoreError::CapacityExceeded { required: count, cap });
        }
        let modes: Vec<i32> = (-window.lambda()..=window.lambda()).collect();
        let mut states = Vec::with_capacity(count as usize);
        for k in 0..=window.max_pairs() {
            let subsets = k_subsets(&modes, k);
            for f in &subsets {
                for a in &subsets {
                    states.push(FockState { fermions: f.clone(), antifermions: a.clone() });
                }
            }
        }
        debug_assert_eq!(states.len() as u128, count);
        let lookup = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Arc::new(Self { window, states, lookup }))
    }

    /// Closed-form count: sum over k of C(2 lambda + 1, k)^2.
    pub fn expected_count(window: &ModeWindow) -> u128 {
        let n = window.num_modes() as u128;
        (0..=window.max_pairs() as u128).map(|k| binomial(n, k).pow(2)).sum()
    }

    pub fn window(&self) -> &ModeWindow {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, index: usize) -> &FockState {
        &self.states[index]
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.lookup.get(state).copied()
    }

    /// States with all occupied modes in [-(lambda - mode_margin),
    /// lambda - mode_margin] and at most max_pairs - pair_margin pairs.
    /// This is the inner subspace on which an operator whose strings shift
    /// modes by at most `mode_margin` and create at most `pair_margin`
    /// pairs acts without clipping.
    pub fn inner_mask(&self, mode_margin: i32, pair_margin: usize) -> Vec<bool> {
        let radius = self.window.lambda() - mode_margin;
        let max_pairs = self.window.max_pairs().saturating_sub(pair_margin);
        self.states
            .iter()
            .map(|s| s.max_abs_mode() <= radius && s.pair_count() <= max_pairs)
            .collect()
    }

    /// Indices of basis states with the given total momentum index.
    pub fn indices_with_momentum(&self, k: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.states[i].momentum_index() == k).collect()
    }

    /// Diagonal matrix of the ordinary charge Q (identically zero here,
    /// kept for operator-identity tests).
    pub fn charge_q_matrix(&self) -> OperatorMatrix {
        OperatorMatrix::diagonal_real(&self.states.iter().map(|s| s.charge_q() as f64).collect::<Vec<_>>())
    }

    /// Diagonal matrix of the axial charge Q5.
    pub fn charge_q5_matrix(&self) -> OperatorMatrix {
        OperatorMatrix::diagonal_real(
            &self.states.iter().map(|s| s.charge_q5() as f64).collect::<Vec<_>>(),
        )
    }

    /// Assemble the matrix of an operator given as a sum of ladder strings
    /// with complex coefficients. Columns are basis states; strings whose
    /// image leaves the catalog are dropped.
    pub fn assemble(&self, terms: &[(Complex64, Vec<(LadderKind, i32)>)]) -> OperatorMatrix {
        let dim = self.dim();
        let mut b = MatrixBuilder::new();
        for col in 0..dim {
            let state = &self.states[col];
            for (coeff, ops) in terms {
                if let Some((sign, image)) = state.apply_string(ops) {
                    if let Some(row) = self.index_of(&image) {
                        b.push(row, col, coeff * sign as f64);
                    }
                }
            }
        }
        b.build(dim, dim)
    }
}

/// Free Dirac Hamiltonian: diagonal with entry sum_occupied |k_m|,
/// k_m = 2 pi m / L.
pub fn free_dirac_matrix(catalog: &BasisCatalog, length: f64) -> OperatorMatrix {
    let unit = 2.0 * std::f64::consts::PI / length;
    OperatorMatrix::diagonal_real(
        &catalog.states().iter().map(|s| unit * s.dirac_index() as f64).collect::<Vec<_>>(),
    )
}

/// Dense amplitudes over a basis catalog.
#[derive(Debug, Clone)]
pub struct StateVector {
    catalog: Arc<BasisCatalog>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(catalog: Arc<BasisCatalog>) -> Self {
        let dim = catalog.dim();
        Self { catalog, amplitudes: vec![Complex64::ZERO; dim] }
    }

    pub fn basis_state(catalog: Arc<BasisCatalog>, index: usize) -> Self {
        let mut v = Self::zero(catalog);
        v.amplitudes[index] = Complex64::ONE;
        v
    }

    pub fn from_amplitudes(catalog: Arc<BasisCatalog>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != catalog.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "{} amplitudes over a {}-state catalog",
                amplitudes.len(),
                catalog.dim()
            )));
        }
        Ok(Self { catalog, amplitudes })
    }

    pub fn catalog(&self) -> &Arc<BasisCatalog> {
        &self.catalog
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        op::norm(&self.amplitudes)
    }

    pub fn dot(&self, other: &Self) -> Complex64 {
        op::dot(&self.amplitudes, &other.amplitudes)
    }

    pub fn scale(&mut self, s: Complex64) {
        for a in &mut self.amplitudes {
            *a *= s;
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn k_subsets(modes: &[i32], k: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(modes: &[i32], start: usize, k: usize, current: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let remaining = k - current.len();
        for i in start..=modes.len().saturating_sub(remaining) {
            current.push(modes[i]);
            rec(modes, i + 1, k, current, out);
            current.pop();
        }
    }
    rec(modes, 0, k, &mut current, &mut out);
    out
}
