//! Fermionic-side bosonization operators.
//!
//! Density modes for right- and left-moving fermions, the currents built
//! from them, the nonnegative operator T, the bosonic ladder operators and
//! scalar-field modes, and the Kronig identity that expresses the free
//! Dirac energy through them.
//!
//! All operators are assembled from ladder strings so the Fock sign
//! convention flows through unchanged. Sums are clipped termwise to the
//! mode window: a term is kept exactly when every mode it references lies
//! inside the window, which keeps adjoint pairs clipped symmetrically.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::fock::{BasisCatalog, LadderKind};
use crate::op::OperatorMatrix;

/// Circle circumference and coupling, with the derived mode momenta.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalConstants {
    length: f64,
    coupling: f64,
}

impl PhysicalConstants {
    pub fn new(length: f64, coupling: f64) -> Result<Self> {
        if length <= 0.0 || coupling < 0.0 {
            return Err(CoreError::InvalidConfig(format!(
                "need L > 0 and e >= 0, got L = {length}, e = {coupling}"
            )));
        }
        Ok(Self { length, coupling })
    }

    /// L = 2 pi, e = 1: the parameter point all quoted numbers use.
    pub fn reference() -> Self {
        Self { length: 2.0 * PI, coupling: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// k_m = 2 pi m / L.
    pub fn momentum(&self, m: i32) -> f64 {
        2.0 * PI * m as f64 / self.length
    }

    /// Dressed dispersion: omega_m = sqrt(k_m^2 + e^2/pi).
    pub fn omega(&self, m: i32) -> f64 {
        let k = self.momentum(m);
        (k * k + self.coupling * self.coupling / PI).sqrt()
    }
}

/// Chirality of a density mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    Right,
    Left,
}

type Term = (Complex64, Vec<(LadderKind, i32)>);

/// Ladder-string terms of rho^{R,L}(m), clipped to the window.
fn rho_terms(species: Species, m: i32, lambda: i32) -> Vec<Term> {
    assert!(m != 0, "density modes are defined for m != 0");
    let one = Complex64::ONE;
    let neg = -Complex64::ONE;
    let mut terms: Vec<Term> = Vec::new();
    let mu = m.abs();
    match (species, m > 0) {
        (Species::Right, true) => {
            // -sum_{k>m} c†_k c_{k-m} + sum_{0<k<=m} b†_{m-k} c†_k
            // + sum_{k>=0} b†_{k+m} b_k
            for k in (mu + 1)..=lambda {
                terms.push((neg, vec![(LadderKind::CDag, k), (LadderKind::C, k - mu)]));
            }
            for k in 1.max(mu - lambda)..=mu.min(lambda) {
                terms.push((one, vec![(LadderKind::BDag, mu - k), (LadderKind::CDag, k)]));
            }
            for k in 0..=(lambda - mu) {
                terms.push((one, vec![(LadderKind::BDag, k + mu), (LadderKind::B, k)]));
            }
        }
        (Species::Right, false) => {
            // -sum_{k>m} c†_{k-m} c_k + sum_{0<k<=m} c_k b_{m-k}
            // + sum_{k>=0} b†_k b_{k+m}
            for k in (mu + 1)..=lambda {
                terms.push((neg, vec![(LadderKind::CDag, k - mu), (LadderKind::C, k)]));
            }
            for k in 1.max(mu - lambda)..=mu.min(lambda) {
                terms.push((one, vec![(LadderKind::C, k), (LadderKind::B, mu - k)]));
            }
            for k in 0..=(lambda - mu) {
                terms.push((one, vec![(LadderKind::BDag, k), (LadderKind::B, k + mu)]));
            }
        }
        (Species::Left, true) => {
            // sum_{k<-m} b†_{k+m} b_k + sum_{-m<=k<0} c_{-k-m} b_k
            // - sum_{k<=0} c†_k c_{k-m}
            for k in -lambda..-mu {
                terms.push((one, vec![(LadderKind::BDag, k + mu), (LadderKind::B, k)]));
            }
            for k in (-mu).max(-lambda)..=(-1).min(lambda - mu) {
                terms.push((one, vec![(LadderKind::C, -k - mu), (LadderKind::B, k)]));
            }
            for k in (mu - lambda).max(-lambda)..=0 {
                terms.push((neg, vec![(LadderKind::CDag, k), (LadderKind::C, k - mu)]));
            }
        }
        (Species::Left, false) => {
            // sum_{k<-m} b†_k b_{k+m} + sum_{-m<=k<0} b†_k c†_{-k-m}
            // - sum_{k<=0} c†_{k-m} c_k
            for k in -lambda..-mu {
                terms.push((one, vec![(LadderKind::BDag, k), (LadderKind::B, k + mu)]));
            }
            for k in (-mu).max(-lambda)..=(-1).min(lambda - mu) {
                terms.push((one, vec![(LadderKind::BDag, k), (LadderKind::CDag, -k - mu)]));
            }
            for k in (mu - lambda).max(-lambda)..=0 {
                terms.push((neg, vec![(LadderKind::CDag, k - mu), (LadderKind::C, k)]));
            }
        }
    }
    terms
}

/// Density mode rho^{R,L}(m) over the catalog; identically zero for
/// |m| > 2 lambda.
pub fn rho_matrix(species: Species, m: i32, catalog: &BasisCatalog) -> OperatorMatrix {
    catalog.assemble(&rho_terms(species, m, catalog.window().lambda()))
}

/// Cached density matrices for all 0 < |m| <= m_max.
#[derive(Debug)]
pub struct DensityFamily {
    catalog: Arc<BasisCatalog>,
    m_max: i32,
    right: Vec<OperatorMatrix>,
    right_neg: Vec<OperatorMatrix>,
    left: Vec<OperatorMatrix>,
    left_neg: Vec<OperatorMatrix>,
}

impl DensityFamily {
    pub fn build(catalog: Arc<BasisCatalog>, m_max: i32) -> Self {
        let assemble = |list: Vec<(Species, i32)>| -> Vec<OperatorMatrix> {
            list.into_par_iter().map(|(s, m)| rho_matrix(s, m, &catalog)).collect()
        };
        let right = assemble((1..=m_max).map(|m| (Species::Right, m)).collect());
        let right_neg = assemble((1..=m_max).map(|m| (Species::Right, -m)).collect());
        let left = assemble((1..=m_max).map(|m| (Species::Left, m)).collect());
        let left_neg = assemble((1..=m_max).map(|m| (Species::Left, -m)).collect());
        Self { catalog, m_max, right, right_neg, left, left_neg }
    }

    pub fn catalog(&self) -> &Arc<BasisCatalog> {
        &self.catalog
    }

    pub fn m_max(&self) -> i32 {
        self.m_max
    }

    pub fn rho(&self, species: Species, m: i32) -> &OperatorMatrix {
        assert!(m != 0 && m.abs() <= self.m_max, "mode {m} outside cached range");
        let idx = (m.abs() - 1) as usize;
        match (species, m > 0) {
            (Species::Right, true) => &self.right[idx],
            (Species::Right, false) => &self.right_neg[idx],
            (Species::Left, true) => &self.left[idx],
            (Species::Left, false) => &self.left_neg[idx],
        }
    }
}

/// Current mode: component 0 is the charge density, 1 the axial density.
/// j^mu(m) is built from rho(-m) with the 1/L normalization.
pub fn current_matrix(
    component: u8,
    m: i32,
    family: &DensityFamily,
    constants: &PhysicalConstants,
) -> OperatorMatrix {
    assert!(m != 0);
    let r = family.rho(Species::Right, -m);
    let l = family.rho(Species::Left, -m);
    let combined = match component {
        0 => r.add(l),
        1 => r.sub(l),
        _ => panic!("current component must be 0 or 1"),
    };
    combined.scale(Complex64::new(1.0 / constants.length(), 0.0))
}

/// T = (2 pi / L) sum_{m=1}^{cutoff} (rho^R(m) rho^R(-m) + rho^L(-m) rho^L(m)).
///
/// Annihilators sit rightmost, so intermediates never leave the window and
/// T acts exactly as the Kronig diagonal on the whole catalog once the
/// cutoff reaches 2 lambda.
pub fn t_matrix(
    family: &DensityFamily,
    constants: &PhysicalConstants,
    m_sum_cutoff: i32,
) -> OperatorMatrix {
    let dim = family.catalog().dim();
    let mut acc = OperatorMatrix::zeros(dim, dim);
    for m in 1..=m_sum_cutoff.min(family.m_max()) {
        let r = family.rho(Species::Right, m).matmul(family.rho(Species::Right, -m));
        let l = family.rho(Species::Left, -m).matmul(family.rho(Species::Left, m));
        acc = acc.add(&r).add(&l);
    }
    acc.scale(Complex64::new(2.0 * PI / constants.length(), 0.0))
}

/// Max over masked columns of || (H0_D - T - (pi/2L) Q5 (Q5 - 2)) psi ||.
pub fn kronig_residual(
    family: &DensityFamily,
    constants: &PhysicalConstants,
    inner_mask: &[bool],
) -> Result<f64> {
    if !inner_mask.iter().any(|&b| b) {
        return Err(CoreError::EmptyMask("kronig residual".into()));
    }
    let catalog = family.catalog();
    let lambda = catalog.window().lambda();
    let h0 = crate::fock::free_dirac_matrix(catalog, constants.length());
    let t = t_matrix(family, constants, 2 * lambda);
    let unit = PI / (2.0 * constants.length());
    let q_part: Vec<f64> = catalog
        .states()
        .iter()
        .map(|s| {
            let q5 = s.charge_q5() as f64;
            unit * q5 * (q5 - 2.0)
        })
        .collect();
    let residual = h0.sub(&t).sub(&OperatorMatrix::diagonal_real(&q_part));
    let col_norms = residual.column_norms_sq();
    Ok(col_norms
        .iter()
        .zip(inner_mask)
        .filter(|(_, &keep)| keep)
        .map(|(&n2, _)| n2.sqrt())
        .fold(0.0, f64::max))
}

/// Bosonic ladder operator built from a density mode.
///
/// For m > 0: A†_m = -i m^{-1/2} rho^R(m), A_m = i m^{-1/2} rho^R(-m);
/// for the negative branch: A†_{-m} = i m^{-1/2} rho^L(-m),
/// A_{-m} = -i m^{-1/2} rho^L(m).
pub fn a_ladder_matrix(m: i32, dagger: bool, family: &DensityFamily) -> OperatorMatrix {
    assert!(m != 0);
    let root = (m.abs() as f64).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let (coeff, rho) = if m > 0 {
        if dagger {
            (-i / root, family.rho(Species::Right, m))
        } else {
            (i / root, family.rho(Species::Right, -m))
        }
    } else if dagger {
        (i / root, family.rho(Species::Left, m))
    } else {
        (-i / root, family.rho(Species::Left, -m))
    };
    rho.scale(coeff)
}

/// Which scalar-field mode family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Phi,
    Pi,
}

/// Nonzero Fourier modes of the scalar field and its conjugate momentum:
/// Phi_m = -(sqrt(pi) / (i k_m)) j0(m), Pi_m = sqrt(pi) j1(m).
/// The m = 0 components live on the gauge grid, not here.
pub fn phi_pi_matrix(
    which: FieldMode,
    m: i32,
    family: &DensityFamily,
    constants: &PhysicalConstants,
) -> Result<OperatorMatrix> {
    if m == 0 {
        return Err(CoreError::InvalidConfig(
            "zero-mode scalar components are grid operators".into(),
        ));
    }
    let out = match which {
        FieldMode::Phi => {
            let j0 = current_matrix(0, m, family, constants);
            // -sqrt(pi)/(i k_m) = i sqrt(pi)/k_m
            j0.scale(Complex64::new(0.0, PI.sqrt() / constants.momentum(m)))
        }
        FieldMode::Pi => {
            let j1 = current_matrix(1, m, family, constants);
            j1.scale(Complex64::new(PI.sqrt(), 0.0))
        }
    };
    Ok(out)
}
