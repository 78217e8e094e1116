//! Independent bosonic-oscillator representation.
//!
//! States carry an axial sector label P and occupation numbers for boson
//! modes 0 < |m| <= lambda_b. In this representation the dressed
//! Hamiltonian is diagonal, the anomaly identity is exact, and the
//! dictionary built from creation strings of density modes maps the basis
//! onto the fermionic representation. Spectra are produced here; the
//! fermionic side serves as the validation oracle.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::densities::{a_ladder_matrix, DensityFamily, PhysicalConstants};
use crate::error::{CoreError, Result};
use crate::fock::unexcited_state;
use crate::op::{MatrixBuilder, OperatorMatrix};

/// Occupation record (P, {n_m}); `occ` is indexed by mode slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BosonState {
    p: i32,
    occ: Vec<u32>,
}

impl BosonState {
    pub fn sector(&self) -> i32 {
        self.p
    }

    pub fn total_occupation(&self) -> u32 {
        self.occ.iter().sum()
    }
}

/// Indexed basis of (P, {n_m}) with total occupation bounded by `degree`
/// and |P| <= p_range. Enumeration is ascending in P, then lexicographic
/// in the occupation vector.
#[derive(Debug)]
pub struct BosonCatalog {
    lambda_b: i32,
    degree: u32,
    p_range: i32,
    states: Vec<BosonState>,
    lookup: HashMap<BosonState, usize>,
}

impl BosonCatalog {
    pub fn enumerate(lambda_b: i32, degree: u32, p_range: i32) -> Result<Arc<Self>> {
        Self::enumerate_capped(lambda_b, degree, p_range, crate::fock::DEFAULT_MAX_STATES)
    }

    pub fn enumerate_capped(
        lambda_b: i32,
        degree: u32,
        p_range: i32,
        cap: usize,
    ) -> Result<Arc<Self>> {
        if lambda_b < 1 || p_range < 0 {
            return Err(CoreError::InvalidConfig(format!(
                "boson catalog needs lambda_b >= 1 and p_range >= 0, got {lambda_b}, {p_range}"
            )));
        }
        let slots = 2 * lambda_b as usize;
        let per_sector = multiset_count(slots as u128, degree as u128);
        let count = per_sector * (2 * p_range as u128 + 1);
        if count > cap as u128 {
            return Err(CoreError::CapacityExceeded { required: count, cap });
        }
        let mut states = Vec::with_capacity(count as usize);
        let mut occ = vec![0u32; slots];
        for p in -p_range..=p_range {
            fill(&mut states, p, &mut occ, 0, degree);
        }
        let lookup = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Arc::new(Self { lambda_b, degree, p_range, states, lookup }))
    }

    pub fn lambda_b(&self) -> i32 {
        self.lambda_b
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn p_range(&self) -> i32 {
        self.p_range
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, index: usize) -> &BosonState {
        &self.states[index]
    }

    pub fn states(&self) -> &[BosonState] {
        &self.states
    }

    pub fn index_of(&self, state: &BosonState) -> Option<usize> {
        self.lookup.get(state).copied()
    }

    /// Slot of mode m; modes are ordered -lambda_b..-1, 1..lambda_b.
    pub fn slot(&self, m: i32) -> usize {
        assert!(m != 0 && m.abs() <= self.lambda_b, "mode {m} outside boson window");
        if m < 0 {
            (m + self.lambda_b) as usize
        } else {
            (self.lambda_b + m - 1) as usize
        }
    }

    pub fn mode_of_slot(&self, slot: usize) -> i32 {
        let s = slot as i32;
        if s < self.lambda_b {
            s - self.lambda_b
        } else {
            s - self.lambda_b + 1
        }
    }

    pub fn occupation(&self, index: usize, m: i32) -> u32 {
        self.states[index].occ[self.slot(m)]
    }

    /// The zero-boson state of sector P.
    pub fn ground_of_sector(&self, p: i32) -> Option<usize> {
        self.index_of(&BosonState { p, occ: vec![0; 2 * self.lambda_b as usize] })
    }

    /// States with total occupation at most degree - margin: the interior
    /// on which one more ladder application cannot clip.
    pub fn interior_mask(&self, degree_margin: u32) -> Vec<bool> {
        let bound = self.degree.saturating_sub(degree_margin);
        self.states.iter().map(|s| s.total_occupation() <= bound).collect()
    }

    /// The sector shift (P, n) -> (P + delta, n), used by the twisted
    /// boundary condition. Entries for sectors shifted out of range are
    /// dropped.
    pub fn sector_shift_matrix(&self, delta: i32) -> OperatorMatrix {
        let mut b = MatrixBuilder::new();
        for (col, s) in self.states.iter().enumerate() {
            let shifted = BosonState { p: s.p + delta, occ: s.occ.clone() };
            if let Some(row) = self.index_of(&shifted) {
                b.push(row, col, Complex64::ONE);
            }
        }
        b.build(self.dim(), self.dim())
    }
}

fn multiset_count(slots: u128, degree: u128) -> u128 {
    // sum_{d=0}^{degree} C(slots + d - 1, d) = C(slots + degree, degree)
    let mut acc: u128 = 1;
    for i in 0..degree {
        acc = acc * (slots + degree - i) / (i + 1);
    }
    acc
}

fn fill(states: &mut Vec<BosonState>, p: i32, occ: &mut Vec<u32>, slot: usize, left: u32) {
    if slot == occ.len() {
        states.push(BosonState { p, occ: occ.clone() });
        return;
    }
    for n in 0..=left {
        occ[slot] = n;
        fill(states, p, occ, slot + 1, left - n);
        occ[slot] = 0;
    }
}

/// Diagonal dressed Hamiltonian without the zero mode:
/// sum_m omega_m n_m + c0.
pub fn boson_hprime_matrix(
    catalog: &BosonCatalog,
    constants: &PhysicalConstants,
    c0: f64,
) -> OperatorMatrix {
    let diag: Vec<f64> = catalog
        .states()
        .iter()
        .map(|s| {
            let excitation: f64 = s
                .occ
                .iter()
                .enumerate()
                .map(|(slot, &n)| n as f64 * constants.omega(catalog.mode_of_slot(slot)))
                .sum();
            excitation + c0
        })
        .collect();
    OperatorMatrix::diagonal_real(&diag)
}

/// Ladder operator A_m (or A†_m) acting on occupations in the standard
/// way; applications that exceed the degree bound are clipped.
pub fn boson_a_matrix(m: i32, dagger: bool, catalog: &BosonCatalog) -> OperatorMatrix {
    let slot = catalog.slot(m);
    let mut b = MatrixBuilder::new();
    for (col, s) in catalog.states().iter().enumerate() {
        let n = s.occ[slot];
        if dagger {
            if s.total_occupation() < catalog.degree() {
                let mut occ = s.occ.clone();
                occ[slot] = n + 1;
                let row = catalog
                    .index_of(&BosonState { p: s.p, occ })
                    .expect("raised state within bounds is enumerated");
                b.push(row, col, Complex64::new(((n + 1) as f64).sqrt(), 0.0));
            }
        } else if n > 0 {
            let mut occ = s.occ.clone();
            occ[slot] = n - 1;
            let row = catalog
                .index_of(&BosonState { p: s.p, occ })
                .expect("lowered state is enumerated");
            b.push(row, col, Complex64::new((n as f64).sqrt(), 0.0));
        }
    }
    b.build(catalog.dim(), catalog.dim())
}

/// Dressed scalar-field modes:
/// Phi_m = (A_m + A†_{-m}) / sqrt(2 omega_m L),
/// Pi_m = -i sqrt(omega_m / 2L) (A_m - A†_{-m}).
pub fn boson_phi_pi(
    m: i32,
    which: crate::densities::FieldMode,
    catalog: &BosonCatalog,
    constants: &PhysicalConstants,
) -> OperatorMatrix {
    let a = boson_a_matrix(m, false, catalog);
    let adag_neg = boson_a_matrix(-m, true, catalog);
    let omega = constants.omega(m);
    let l = constants.length();
    match which {
        crate::densities::FieldMode::Phi => {
            a.add(&adag_neg).scale(Complex64::new(1.0 / (2.0 * omega * l).sqrt(), 0.0))
        }
        crate::densities::FieldMode::Pi => {
            a.sub(&adag_neg).scale(Complex64::new(0.0, -(omega / (2.0 * l)).sqrt()))
        }
    }
}

/// Operator norm of i[H', Pi_m] + omega_m^2 Phi_m restricted to interior
/// states. Exact (machine precision) in this representation. With
/// `include_anomaly_mass` false the e^2/pi term is dropped from the
/// frequency, which is the negative control: the residual becomes
/// (e^2/pi) * ||Phi_m|| on the interior.
pub fn anomaly_residual(
    m: i32,
    catalog: &BosonCatalog,
    constants: &PhysicalConstants,
    include_anomaly_mass: bool,
) -> Result<f64> {
    if m == 0 || m.abs() > catalog.lambda_b() {
        return Err(CoreError::InvalidConfig(format!("anomaly mode {m} outside boson window")));
    }
    let interior = catalog.interior_mask(1);
    if !interior.iter().any(|&b| b) {
        return Err(CoreError::EmptyMask("anomaly interior".into()));
    }
    let hprime = boson_hprime_matrix(catalog, constants, 0.0);
    let pi = boson_phi_pi(m, crate::densities::FieldMode::Pi, catalog, constants);
    let phi = boson_phi_pi(m, crate::densities::FieldMode::Phi, catalog, constants);
    let commutator = hprime.matmul(&pi).sub(&pi.matmul(&hprime));
    let omega_sq = if include_anomaly_mass {
        let w = constants.omega(m);
        w * w
    } else {
        let k = constants.momentum(m);
        k * k
    };
    let residual = commutator
        .scale(Complex64::new(0.0, 1.0))
        .add(&phi.scale(Complex64::new(omega_sq, 0.0)));
    operator_norm_masked(&residual, &interior)
}

/// Largest singular value of P A P for the projector P onto `mask`.
pub fn operator_norm_masked(matrix: &OperatorMatrix, mask: &[bool]) -> Result<f64> {
    let masked = matrix.masked(mask)?;
    if masked.nnz() == 0 {
        return Ok(0.0);
    }
    let gram = masked.adjoint().matmul(&masked);
    let dense = gram.to_dense();
    let eigen = dense.symmetric_eigen();
    Ok(eigen.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0).sqrt())
}

/// Dictionary from boson basis states to fermionic vectors:
/// (P, {n_m}) maps to prod_m (A†_m)^{n_m} / sqrt(n_m!) applied to the
/// unexcited state, with the creation factors applied in ascending slot
/// order. The normalization is P-independent by construction.
///
/// Returns the (fermionic dim) x (boson dim) matrix of image columns.
pub fn dictionary_map(catalog: &BosonCatalog, family: &DensityFamily) -> Result<OperatorMatrix> {
    let fock = family.catalog();
    let dim_f = fock.dim();
    let mut b = MatrixBuilder::new();
    // cache the fermionic A† matrices per mode
    let adags: Vec<OperatorMatrix> = (0..2 * catalog.lambda_b() as usize)
        .map(|slot| a_ladder_matrix(catalog.mode_of_slot(slot), true, family))
        .collect();
    for (col, s) in catalog.states().iter().enumerate() {
        let omega_p = unexcited_state(s.sector(), fock.window())?;
        let start = fock
            .index_of(&omega_p)
            .ok_or_else(|| CoreError::WindowTooSmall(format!("sector P = {}", s.sector())))?;
        let mut v = vec![Complex64::ZERO; dim_f];
        v[start] = Complex64::ONE;
        let mut norm = 1.0f64;
        for (slot, &n) in s.occ.iter().enumerate() {
            for _ in 0..n {
                v = adags[slot].apply(&v);
            }
            norm *= factorial(n);
        }
        let scale = Complex64::new(1.0 / norm.sqrt(), 0.0);
        for (row, amp) in v.iter().enumerate() {
            b.push(row, col, amp * scale);
        }
    }
    Ok(b.build(dim_f, catalog.dim()))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Dressing generator in the bosonic representation:
/// Z = i sum_{m>0} zeta(m) (A†_m A†_{-m} - A_m A_{-m}).
pub fn z_boson_matrix(catalog: &BosonCatalog, spec: &crate::coulomb::BogoliubovSpec) -> OperatorMatrix {
    let dim = catalog.dim();
    let mut acc = OperatorMatrix::zeros(dim, dim);
    let cutoff = spec.m_cutoff().min(catalog.lambda_b());
    for m in 1..=cutoff {
        let zeta = spec.zeta(m);
        let up = boson_a_matrix(m, true, catalog).matmul(&boson_a_matrix(-m, true, catalog));
        let down = boson_a_matrix(m, false, catalog).matmul(&boson_a_matrix(-m, false, catalog));
        acc = acc.add(&up.sub(&down).scale(Complex64::new(0.0, zeta)));
    }
    acc
}

/// Boson states whose dictionary image provably fits the fermionic
/// window: the per-side mode budget (sector extent plus the summed mode
/// indices of that side) must not exceed lambda - reserve, and the pair
/// budget (|P| + total bosons + pair reserve) must fit max_pairs.
pub fn dictionary_interior(
    catalog: &BosonCatalog,
    fock_window: &crate::fock::ModeWindow,
    mode_reserve: i32,
    pair_reserve: usize,
) -> Vec<bool> {
    catalog
        .states()
        .iter()
        .map(|s| {
            let extent = match unexcited_state(s.sector(), fock_window) {
                Ok(st) => st.max_abs_mode(),
                Err(_) => return false,
            };
            let mut side_pos = 0i32;
            let mut side_neg = 0i32;
            for (slot, &n) in s.occ.iter().enumerate() {
                let m = catalog.mode_of_slot(slot);
                if m > 0 {
                    side_pos += m * n as i32;
                } else {
                    side_neg += -m * n as i32;
                }
            }
            let lambda = fock_window.lambda();
            let pairs = s.sector().unsigned_abs() as usize
                + s.total_occupation() as usize
                + pair_reserve;
            extent + side_pos + mode_reserve <= lambda
                && extent + side_neg + mode_reserve <= lambda
                && pairs <= fock_window.max_pairs()
        })
        .collect()
}
