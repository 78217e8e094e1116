//! Normal-ordered Coulomb interaction and its Bogoliubov dressing.
//!
//! The Coulomb term is assembled from density-mode products with the
//! normal-ordering constant subtracted per mode. The dressing transformation
//! is generated by a Hermitian quadratic Z whose per-mode coefficients
//! zeta(m) solve the mixing relation; exponentials are taken by spectral
//! decomposition (dense at desk scale, Krylov-restricted above it).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::densities::{DensityFamily, PhysicalConstants, Species};
use crate::error::{CoreError, Result};
use crate::fock::{unexcited_state, StateVector};
use crate::op::OperatorMatrix;
use crate::solver;

/// zeta(m) = -(1/2) atanh( lambda V_m / (lambda V_m + pi) ) with
/// lambda = e^2/2 and V_m = k_m^{-2}; even in m, strictly negative,
/// monotone to zero as |m| grows.
pub fn zeta_coefficient(m: i32, constants: &PhysicalConstants) -> f64 {
    assert!(m != 0);
    let lambda = 0.5 * constants.coupling() * constants.coupling();
    let k = constants.momentum(m);
    let v = 1.0 / (k * k);
    let ratio = lambda * v / (lambda * v + PI);
    -0.5 * ratio.atanh()
}

/// Dressing parameters: coupling point, mode cutoff and the cached
/// per-mode coefficients.
#[derive(Debug, Clone)]
pub struct BogoliubovSpec {
    constants: PhysicalConstants,
    m_cutoff: i32,
    zetas: Vec<f64>,
}

impl BogoliubovSpec {
    pub fn new(constants: PhysicalConstants, m_cutoff: i32) -> Result<Self> {
        if m_cutoff < 1 {
            return Err(CoreError::InvalidConfig(format!("m_cutoff = {m_cutoff}, need >= 1")));
        }
        let zetas = (1..=m_cutoff).map(|m| zeta_coefficient(m, &constants)).collect();
        Ok(Self { constants, m_cutoff, zetas })
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn m_cutoff(&self) -> i32 {
        self.m_cutoff
    }

    pub fn zeta(&self, m: i32) -> f64 {
        assert!(m != 0 && m.abs() <= self.m_cutoff);
        self.zetas[(m.abs() - 1) as usize]
    }
}

/// Normal-ordered Coulomb interaction over the catalog:
/// (e^2 L / 2) sum_{0 < |m| <= cutoff} k_m^{-2} :j0(-m) j0(m):
/// with the combined normal-ordered form
/// :j0(-m) j0(m): = (1/L^2)(rho^R(m) rho^R(-m) + rho^L(m) rho^R(-m)
/// + rho^R(m) rho^L(-m) + rho^L(m) rho^L(-m) - |m|).
pub fn coulomb_matrix(
    family: &DensityFamily,
    constants: &PhysicalConstants,
    m_cutoff: i32,
) -> OperatorMatrix {
    let dim = family.catalog().dim();
    let e2l_half = 0.5 * constants.coupling() * constants.coupling() * constants.length();
    let mut acc = OperatorMatrix::zeros(dim, dim);
    for m in (-m_cutoff..=m_cutoff).filter(|&m| m != 0) {
        let k = constants.momentum(m);
        let prefactor = e2l_half / (k * k * constants.length() * constants.length());
        let rr = family.rho(Species::Right, m).matmul(family.rho(Species::Right, -m));
        let lr = family.rho(Species::Left, m).matmul(family.rho(Species::Right, -m));
        let rl = family.rho(Species::Right, m).matmul(family.rho(Species::Left, -m));
        let ll = family.rho(Species::Left, m).matmul(family.rho(Species::Left, -m));
        let constant = OperatorMatrix::identity(dim).scale(Complex64::new(-(m.abs() as f64), 0.0));
        let block = rr.add(&lr).add(&rl).add(&ll).add(&constant);
        acc = acc.add(&block.scale(Complex64::new(prefactor, 0.0)));
    }
    acc
}

/// Hermitian generator of the dressing transformation:
/// Z = (2 pi i / L) sum_{m != 0} (zeta(m)/k_m) rho^R(m) rho^L(-m),
/// symmetrized. Errors when the raw assembly fails Hermiticity on the
/// inner subspace, which signals a window too small for the cutoff.
pub fn z_matrix(family: &DensityFamily, spec: &BogoliubovSpec) -> Result<OperatorMatrix> {
    let catalog = family.catalog();
    let dim = catalog.dim();
    let constants = spec.constants();
    let mut raw = OperatorMatrix::zeros(dim, dim);
    for m in (-spec.m_cutoff()..=spec.m_cutoff()).filter(|&m| m != 0) {
        let coeff = Complex64::new(0.0, 2.0 * PI / constants.length())
            * Complex64::new(spec.zeta(m) / constants.momentum(m), 0.0);
        let prod = family.rho(Species::Right, m).matmul(family.rho(Species::Left, -m));
        raw = raw.add(&prod.scale(coeff));
    }
    let asym = raw.sub(&raw.adjoint());
    let mask = catalog.inner_mask(spec.m_cutoff().min(catalog.window().lambda()), 2);
    let masked_residual = asym.masked(&mask)?.max_abs();
    if masked_residual > 1e-10 {
        return Err(CoreError::NonHermitian { residual: masked_residual, tolerance: 1e-10 });
    }
    Ok(raw.add(&raw.adjoint()).scale(Complex64::new(0.5, 0.0)))
}

/// Apply the dressing unitary U^{direction} = e^{i direction Z} to a
/// vector. Dense spectral decomposition at desk scale, Krylov-restricted
/// spectral application above it.
pub fn bogoliubov_apply(
    z: &OperatorMatrix,
    vector: &[Complex64],
    direction: i32,
    dense_threshold: usize,
) -> Result<Vec<Complex64>> {
    let t = direction.signum() as f64;
    if z.nrows() <= dense_threshold {
        solver::hermitian_exp_apply(z, t, vector, dense_threshold)
    } else {
        solver::hermitian_exp_apply_krylov(z, t, vector)
    }
}

/// C0(cutoff) = (2 pi / L) sum_{m=1}^{cutoff} m [ (1 + 2 lambda V_m / pi)^{1/2}
/// - lambda V_m / pi - 1 ]: the finite vacuum-energy shift produced by the
/// dressing. Every summand is nonpositive and the tail falls off like m^{-3}.
pub fn c0_constant(constants: &PhysicalConstants, m_cutoff: i32) -> f64 {
    let lambda = 0.5 * constants.coupling() * constants.coupling();
    (1..=m_cutoff)
        .map(|m| {
            let k = constants.momentum(m);
            let x = 2.0 * lambda / (PI * k * k);
            (2.0 * PI / constants.length()) * m as f64 * ((1.0 + x).sqrt() - 0.5 * x - 1.0)
        })
        .sum()
}

/// The dressed unexcited state: U^{-1} applied to the basis state in the
/// Q5 = 2P sector. Unit norm up to the unitarity of the exponential.
pub fn dressed_state(
    p: i32,
    z: &OperatorMatrix,
    family: &DensityFamily,
    dense_threshold: usize,
) -> Result<StateVector> {
    let catalog = family.catalog();
    let omega_p = unexcited_state(p, catalog.window())?;
    let idx = catalog
        .index_of(&omega_p)
        .ok_or_else(|| CoreError::WindowTooSmall(format!("unexcited state P = {p}")))?;
    let basis = StateVector::basis_state(catalog.clone(), idx);
    let dressed = bogoliubov_apply(z, basis.amplitudes(), -1, dense_threshold)?;
    StateVector::from_amplitudes(catalog.clone(), dressed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::t_matrix;
    use crate::fock::{BasisCatalog, FockState, ModeWindow};
    use crate::modular;
    use crate::op;
    use std::sync::Arc;

    const L: f64 = 2.0 * PI;

    fn setup(lambda: i32, max_pairs: usize, m_max: i32) -> (Arc<BasisCatalog>, DensityFamily) {
        let cat = BasisCatalog::enumerate(ModeWindow::new(lambda, max_pairs).unwrap()).unwrap();
        let fam = DensityFamily::build(cat.clone(), m_max);
        (cat, fam)
    }

    #[test]
    fn zeta_values() {
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        // defining relation lambda V / (lambda V + pi) = -tanh(2 zeta)
        for m in 1..=6 {
            let z = zeta_coefficient(m, &constants);
            let k = constants.momentum(m);
            let ratio = 0.5 / (k * k) / (0.5 / (k * k) + PI);
            assert!((-(2.0 * z).tanh() - ratio).abs() < 1e-15);
            assert!(z < 0.0);
            assert_eq!(z, zeta_coefficient(-m, &constants));
        }
        // frozen decimal for m = 1 at the reference point
        assert!((zeta_coefficient(1, &constants) + 0.0690876).abs() < 2e-6);
        // |zeta| decreases monotonically to zero
        let mut prev = zeta_coefficient(1, &constants).abs();
        for m in 2..=40 {
            let cur = zeta_coefficient(m, &constants).abs();
            assert!(cur < prev);
            prev = cur;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn c0_negative_convergent() {
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        for cutoff in [1, 4, 16, 64] {
            assert!(c0_constant(&constants, cutoff) < 0.0);
        }
        // summands are individually nonpositive: partial sums decrease
        let mut prev = 0.0;
        for cutoff in 1..=64 {
            let c = c0_constant(&constants, cutoff);
            assert!(c <= prev + 1e-15);
            prev = c;
        }
        // m^{-3} tail: doubling the cutoff moves the value by < 1e-5
        let c64 = c0_constant(&constants, 64);
        let c128 = c0_constant(&constants, 128);
        assert!((c128 - c64).abs() <= 1e-5, "tail {}", (c128 - c64).abs());
        // coupling to zero removes the interaction
        let free = PhysicalConstants::new(L, 0.0).unwrap();
        assert_eq!(c0_constant(&free, 32), 0.0);
    }

    #[test]
    fn c0_matches_dispersion_form() {
        // independent route: the summand equals omega_m - e^2/(2 pi k_m) - k_m
        let constants = PhysicalConstants::new(L, 0.7).unwrap();
        let cutoff = 24;
        let direct = c0_constant(&constants, cutoff);
        let e2 = constants.coupling() * constants.coupling();
        let via_omega: f64 = (1..=cutoff)
            .map(|m| {
                let k = constants.momentum(m);
                constants.omega(m) - e2 / (2.0 * PI * k) - k
            })
            .sum();
        assert!((direct - via_omega).abs() < 1e-13);
    }

    #[test]
    fn coulomb_is_hermitian_and_vacuum_ordered() {
        let (cat, fam) = setup(3, 3, 6);
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        let hc = coulomb_matrix(&fam, &constants, 2);
        assert!(hc.hermiticity_residual() <= 1e-12);
        // normal ordering removes the vacuum expectation on every
        // unexcited state whose mode shifts stay in the window:
        // extent(Omega_P) + cutoff <= lambda and |P| + 1 <= max_pairs
        for p in [-1i32, 0, 1, 2] {
            let omega_p = unexcited_state(p, cat.window()).unwrap();
            assert!(omega_p.max_abs_mode() + 2 <= 3 && p.unsigned_abs() as usize + 1 <= 3);
            let idx = cat.index_of(&omega_p).unwrap();
            assert!(
                hc.get(idx, idx).norm() <= 1e-12,
                "P = {p}: {}",
                hc.get(idx, idx)
            );
        }
        // without the subtraction the diagonal is the subtracted constant
        let e2 = constants.coupling() * constants.coupling();
        let expected: f64 = [-2i32, -1, 1, 2]
            .iter()
            .map(|&m| {
                let k = constants.momentum(m);
                0.5 * e2 * L / (k * k) * (m.abs() as f64) / (L * L)
            })
            .sum();
        let vac = cat.index_of(&FockState::vacuum()).unwrap();
        let raw_diag: f64 = (-2i32..=2)
            .filter(|&m| m != 0)
            .map(|m| {
                let k = constants.momentum(m);
                let pre = 0.5 * e2 * L / (k * k * L * L);
                let rr = fam.rho(Species::Right, m).matmul(fam.rho(Species::Right, -m));
                let ll = fam.rho(Species::Left, m).matmul(fam.rho(Species::Left, -m));
                let lr = fam.rho(Species::Left, m).matmul(fam.rho(Species::Right, -m));
                let rl = fam.rho(Species::Right, m).matmul(fam.rho(Species::Left, -m));
                pre * rr.add(&ll).add(&lr).add(&rl).get(vac, vac).re
            })
            .sum();
        assert!((raw_diag - expected).abs() < 1e-13);
    }

    #[test]
    fn coulomb_gauge_invariance() {
        // Γ :H_coul: Γ⁻¹ = :H_coul: entrywise on states with margin for
        // the cutoff, a gauge shift, and two extra pairs
        let (cat, fam) = setup(3, 3, 2);
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        let hc = coulomb_matrix(&fam, &constants, 1);
        let (g, gauge_mask) = modular::gauge_matrix(1, &cat);
        let margins = cat.inner_mask(2, 2);
        let mask: Vec<bool> = (0..cat.dim())
            .map(|i| margins[i] && gauge_mask.forward[i])
            .collect();
        assert!(mask.iter().filter(|&&b| b).count() >= 5);
        let diff = g.adjoint().matmul(&hc).matmul(&g).sub(&hc);
        for (r, c, v) in diff.iter() {
            if mask[r] && mask[c] {
                assert!(v.norm() <= 1e-12, "({r},{c}): {v}");
            }
        }
    }

    #[test]
    fn z_matrix_hermitian_and_vacuum_free()
    {
        let (cat, fam) = setup(3, 3, 2);
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        let spec = BogoliubovSpec::new(constants, 2).unwrap();
        let z = z_matrix(&fam, &spec).unwrap();
        assert!(z.hermiticity_residual() <= 1e-14);
        let vac = cat.index_of(&FockState::vacuum()).unwrap();
        // Z creates or annihilates boson pairs, so the vacuum diagonal is 0
        assert_eq!(z.get(vac, vac), Complex64::ZERO);
        // coupling to zero gives zeta = 0 identically, so Z = 0
        let free = PhysicalConstants::new(L, 0.0).unwrap();
        let spec0 = BogoliubovSpec::new(free, 2).unwrap();
        let z0 = z_matrix(&fam, &spec0).unwrap();
        assert_eq!(z0.nnz(), 0);
    }

    #[test]
    fn bogoliubov_unitary_round_trip() {
        let (cat, fam) = setup(2, 2, 2);
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        let spec = BogoliubovSpec::new(constants, 2).unwrap();
        let z = z_matrix(&fam, &spec).unwrap();
        // a superposition touching several sectors
        let mut v = vec![Complex64::ZERO; cat.dim()];
        v[0] = Complex64::new(0.6, 0.0);
        v[1] = Complex64::new(0.0, 0.8);
        let forward = bogoliubov_apply(&z, &v, 1, 900).unwrap();
        assert!((op::norm(&forward) - op::norm(&v)).abs() <= 1e-10);
        let back = bogoliubov_apply(&z, &forward, -1, 900).unwrap();
        let mut diff = 0.0f64;
        for i in 0..cat.dim() {
            diff += (back[i] - v[i]).norm_sqr();
        }
        assert!(diff.sqrt() <= 1e-10);
    }

    #[test]
    fn dressed_states_unit_norm_and_free_limit() {
        let (cat, fam) = setup(2, 2, 2);
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        let spec = BogoliubovSpec::new(constants, 2).unwrap();
        let z = z_matrix(&fam, &spec).unwrap();
        for p in -1..=1 {
            let dressed = dressed_state(p, &z, &fam, 900).unwrap();
            assert!((dressed.norm() - 1.0).abs() <= 1e-10);
        }
        // e -> 0: the dressed state is the bare state
        let free = PhysicalConstants::new(L, 0.0).unwrap();
        let spec0 = BogoliubovSpec::new(free, 2).unwrap();
        let z0 = z_matrix(&fam, &spec0).unwrap();
        let dressed = dressed_state(0, &z0, &fam, 900).unwrap();
        let vac = cat.index_of(&FockState::vacuum()).unwrap();
        assert_eq!(dressed.amplitudes()[vac], Complex64::ONE);
    }

    #[test]
    fn dressed_vacuum_energy_approaches_c0() {
        // fermionic-side evaluation of the dressed ground energy:
        // <U⁻¹ Omega_0 | (T + :H_coul:) | U⁻¹ Omega_0> tracks C0 at the
        // matching cutoff, improving as the window grows
        let constants = PhysicalConstants::new(L, 1.0).unwrap();
        let cutoff = 1;
        let c0 = c0_constant(&constants, cutoff);
        let mut deviations = Vec::new();
        for lambda in [2, 3] {
            let (_, fam) = setup(lambda, 2, 2 * lambda);
            let spec = BogoliubovSpec::new(constants, cutoff).unwrap();
            let z = z_matrix(&fam, &spec).unwrap();
            let dressed = dressed_state(0, &z, &fam, 900).unwrap();
            let h = t_matrix(&fam, &constants, 2 * lambda)
                .add(&coulomb_matrix(&fam, &constants, cutoff));
            let hv = h.apply(dressed.amplitudes());
            let energy = op::dot(dressed.amplitudes(), &hv).re;
            deviations.push((energy - c0).abs());
        }
        assert!(
            deviations[1] < deviations[0],
            "no improvement: {deviations:?}"
        );
        assert!(deviations[1] < 2e-3, "deviation {}", deviations[1]);
    }
}
