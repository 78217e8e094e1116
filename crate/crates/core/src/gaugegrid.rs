//! The gauge zero mode: a grid over a in [0, 2 pi / L) with
//! twisted-periodic boundary conditions, Hamiltonian assemblies over
//! grid (x) sector spaces, zero-mode operators, and the analytic vacuum.
//!
//! The twist ties the end of the grid to its start through the sector
//! representation of the gauge generator: crossing the seam applies
//! e^{-2 i theta} times the inverse generator. Sectors can be the full
//! Fock catalog, the bosonic catalog, or the bare axial-sector ladder
//! {Omega_P}; in each case the generator shifts P down by one.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::bosonrep::BosonCatalog;
use crate::densities::PhysicalConstants;
use crate::error::{CoreError, Result};
use crate::fock::BasisCatalog;
use crate::modular;
use crate::op::{MatrixBuilder, OperatorMatrix};

/// Uniform grid over the dual circle a in [0, 2 pi / L), with the twist
/// phase theta.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    points: usize,
    period: f64,
    theta: f64,
}

impl GridSpec {
    pub fn new(points: usize, theta: f64, constants: &PhysicalConstants) -> Result<Self> {
        if points < 8 {
            return Err(CoreError::InvalidConfig(format!("grid needs >= 8 points, got {points}")));
        }
        Ok(Self { points, period: 2.0 * PI / constants.length(), theta })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points as f64
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }
}

/// Sector representation of the gauge generator and its inverse.
///
/// `forward` is the generator (P down by one); `inverse` is its
/// conjugate transpose, which equals the inverse on the mutually masked
/// subspace because the generator is a signed permutation.
#[derive(Debug, Clone)]
pub struct TwistOperatorPair {
    forward: OperatorMatrix,
    inverse: OperatorMatrix,
}

impl TwistOperatorPair {
    pub fn new(forward: OperatorMatrix) -> Result<Self> {
        if !forward.is_square() {
            return Err(CoreError::DimensionMismatch("twist operator must be square".into()));
        }
        let inverse = forward.adjoint();
        Ok(Self { forward, inverse })
    }

    /// Trivial twist: plain periodic boundary conditions.
    pub fn identity(dim: usize) -> Self {
        Self { forward: OperatorMatrix::identity(dim), inverse: OperatorMatrix::identity(dim) }
    }

    /// Shift on the bare axial sectors {Omega_P : |P| <= p_window};
    /// overflow at the ends is zeroed.
    pub fn p_sector(p_window: i32) -> Self {
        let dim = (2 * p_window + 1) as usize;
        let mut b = MatrixBuilder::new();
        // generator maps sector P to P - 1: column index of P, row of P - 1
        for s in 1..dim {
            b.push(s - 1, s, Complex64::ONE);
        }
        let forward = b.build(dim, dim);
        let inverse = forward.adjoint();
        Self { forward, inverse }
    }

    /// Signed-permutation representation on a Fock catalog.
    pub fn fock(catalog: &BasisCatalog) -> Self {
        let (forward, _) = modular::gauge_matrix(1, catalog);
        let inverse = forward.adjoint();
        Self { forward, inverse }
    }

    /// Sector shift on a boson catalog: (P, n) -> (P - 1, n).
    pub fn boson(catalog: &BosonCatalog) -> Self {
        let forward = catalog.sector_shift_matrix(-1);
        let inverse = forward.adjoint();
        Self { forward, inverse }
    }

    pub fn dim(&self) -> usize {
        self.forward.nrows()
    }

    pub fn forward(&self) -> &OperatorMatrix {
        &self.forward
    }

    pub fn inverse(&self) -> &OperatorMatrix {
        &self.inverse
    }

    /// True when the twist moves no state at all, which would make the
    /// twisted problem identical to a plain periodic one.
    pub fn is_degenerate(&self) -> bool {
        self.forward.nnz() == 0 && self.dim() > 0
    }
}

/// Block second-difference operator with twisted seam blocks:
/// (psi_{j+1} - 2 psi_j + psi_{j-1}) / h^2 with
/// psi_M = e^{-2 i theta} G⁻¹ psi_0 and psi_{-1} = e^{+2 i theta} G psi_{M-1}.
pub fn twisted_laplacian(grid: &GridSpec, twist: &TwistOperatorPair) -> Result<OperatorMatrix> {
    if twist.is_degenerate() {
        return Err(CoreError::InvalidConfig(
            "twist operator annihilates every sector state; enlarge the sector space".into(),
        ));
    }
    let s = twist.dim();
    let m = grid.points();
    let dim = m * s;
    let h2 = grid.spacing() * grid.spacing();
    let mut b = MatrixBuilder::new();
    let inv_h2 = Complex64::new(1.0 / h2, 0.0);
    for j in 0..m {
        for sec in 0..s {
            b.push(j * s + sec, j * s + sec, Complex64::new(-2.0 / h2, 0.0));
        }
        if j + 1 < m {
            for sec in 0..s {
                b.push(j * s + sec, (j + 1) * s + sec, inv_h2);
            }
        }
        if j > 0 {
            for sec in 0..s {
                b.push(j * s + sec, (j - 1) * s + sec, inv_h2);
            }
        }
    }
    // seam: row M-1 reaches psi_M, row 0 reaches psi_{-1}
    let phase = Complex64::new(0.0, -2.0 * grid.theta()).exp();
    for (r, c, v) in twist.inverse().iter() {
        b.push((m - 1) * s + r, c, v * phase * inv_h2);
    }
    let phase_conj = phase.conj();
    for (r, c, v) in twist.forward().iter() {
        b.push(r, (m - 1) * s + c, v * phase_conj * inv_h2);
    }
    Ok(b.build(dim, dim))
}

/// Twisted central first difference (psi_{j+1} - psi_{j-1}) / 2h with the
/// same seam blocks; anti-Hermitian by construction.
pub fn twisted_central_difference(
    grid: &GridSpec,
    twist: &TwistOperatorPair,
) -> Result<OperatorMatrix> {
    if twist.is_degenerate() {
        return Err(CoreError::InvalidConfig("degenerate twist".into()));
    }
    let s = twist.dim();
    let m = grid.points();
    let half = Complex64::new(1.0 / (2.0 * grid.spacing()), 0.0);
    let mut b = MatrixBuilder::new();
    for j in 0..m {
        if j + 1 < m {
            for sec in 0..s {
                b.push(j * s + sec, (j + 1) * s + sec, half);
            }
        }
        if j > 0 {
            for sec in 0..s {
                b.push(j * s + sec, (j - 1) * s + sec, -half);
            }
        }
    }
    let phase = Complex64::new(0.0, -2.0 * grid.theta()).exp();
    for (r, c, v) in twist.inverse().iter() {
        b.push((m - 1) * s + r, c, v * phase * half);
    }
    for (r, c, v) in twist.forward().iter() {
        b.push(r, (m - 1) * s + c, -v * phase.conj() * half);
    }
    Ok(b.build(m * s, m * s))
}

/// Which操作 form of the free Hamiltonian to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum H0Form {
    /// Free Dirac energy with the regularization counterterms:
    /// kinetic + H0_D - a^2 L / (2 pi) - a Q5reg(a).
    Fermionic,
    /// Bosonized: kinetic + (pi / 2L) Q5reg(a)^2 + T.
    Bosonized,
}

/// Grid-diagonal of the regularized axial charge Q5reg(a) = q5 - a L/pi - 1.
fn q5reg(a: f64, q5: f64, constants: &PhysicalConstants) -> f64 {
    q5 - a * constants.length() / PI - 1.0
}

/// Shared assembly: kinetic term plus a grid-diagonal potential built from
/// the sector axial charges, plus an optional sector operator applied
/// pointwise (T, the Dirac energy, or the boson excitation diagonal).
fn assemble(
    grid: &GridSpec,
    twist: &TwistOperatorPair,
    constants: &PhysicalConstants,
    sector_q5: &[f64],
    sector_op: Option<&OperatorMatrix>,
    form: H0Form,
) -> Result<OperatorMatrix> {
    let s = twist.dim();
    if sector_q5.len() != s {
        return Err(CoreError::DimensionMismatch(format!(
            "{} axial charges for a {}-dimensional sector",
            sector_q5.len(),
            s
        )));
    }
    let e2 = constants.coupling() * constants.coupling();
    let kin_coeff = Complex64::new(-e2 / (2.0 * constants.length()), 0.0);
    let mut h = twisted_laplacian(grid, twist)?.scale(kin_coeff);

    let m = grid.points();
    let mut diag = vec![0.0f64; m * s];
    for j in 0..m {
        let a = grid.coordinate(j);
        for (sec, &q5) in sector_q5.iter().enumerate() {
            let reg = q5reg(a, q5, constants);
            diag[j * s + sec] = match form {
                H0Form::Fermionic => {
                    -a * a * constants.length() / (2.0 * PI) - a * reg
                }
                H0Form::Bosonized => PI / (2.0 * constants.length()) * reg * reg,
            };
        }
    }
    h = h.add(&OperatorMatrix::diagonal_real(&diag));

    if let Some(op) = sector_op {
        if op.nrows() != s {
            return Err(CoreError::DimensionMismatch("sector operator dimension".into()));
        }
        let mut b = MatrixBuilder::new();
        for j in 0..m {
            for (r, c, v) in op.iter() {
                b.push(j * s + r, j * s + c, v);
            }
        }
        h = h.add(&b.build(m * s, m * s));
    }
    Ok(h)
}

/// Axial charges 2P of the bare sector ladder, ordered with the sector
/// index: P = index - p_window + p_offset.
pub fn p_sector_q5(p_window: i32, p_offset: i32) -> Vec<f64> {
    (-p_window..=p_window).map(|p| 2.0 * (p + p_offset) as f64).collect()
}

/// Bosonized free Hamiltonian on grid (x) bare P sectors: the T part
/// vanishes there. `p_offset` relocates the sector labels, which must not
/// change the physics; it is exercised by the gauge-invariance checks.
pub fn assemble_h0_psector(
    grid: &GridSpec,
    p_window: i32,
    p_offset: i32,
    constants: &PhysicalConstants,
) -> Result<OperatorMatrix> {
    let twist = TwistOperatorPair::p_sector(p_window);
    let q5 = p_sector_q5(p_window, p_offset);
    assemble(grid, &twist, constants, &q5, None, H0Form::Bosonized)
}

/// Untwisted control: plain periodic boundary conditions on the same
/// sector space. The Fock-vacuum direction is periodic, so comparing
/// spectra against the twisted assembly exhibits the destabilization.
pub fn assemble_h0_psector_untwisted(
    grid: &GridSpec,
    p_window: i32,
    constants: &PhysicalConstants,
) -> Result<OperatorMatrix> {
    let dim = (2 * p_window + 1) as usize;
    let twist = TwistOperatorPair::identity(dim);
    let q5 = p_sector_q5(p_window, 0);
    assemble(grid, &twist, constants, &q5, None, H0Form::Bosonized)
}

/// Free Hamiltonian on grid (x) Fock catalog, in either form.
pub fn assemble_h0_fock(
    grid: &GridSpec,
    family: &crate::densities::DensityFamily,
    constants: &PhysicalConstants,
    form: H0Form,
) -> Result<OperatorMatrix> {
    let catalog = family.catalog();
    let twist = TwistOperatorPair::fock(catalog);
    let q5: Vec<f64> = catalog.states().iter().map(|st| st.charge_q5() as f64).collect();
    let sector_op = match form {
        H0Form::Fermionic => crate::fock::free_dirac_matrix(catalog, constants.length()),
        H0Form::Bosonized => {
            crate::densities::t_matrix(family, constants, 2 * catalog.window().lambda())
        }
    };
    assemble(grid, &twist, constants, &q5, Some(&sector_op), form)
}

/// Full dressed Hamiltonian on grid (x) boson catalog:
/// kinetic + (pi/2L) Q5reg^2 + sum_m omega_m n_m + C0.
pub fn assemble_full_dressed(
    grid: &GridSpec,
    catalog: &BosonCatalog,
    constants: &PhysicalConstants,
    c0: f64,
) -> Result<OperatorMatrix> {
    let twist = TwistOperatorPair::boson(catalog);
    let q5: Vec<f64> = catalog.states().iter().map(|s| 2.0 * s.sector() as f64).collect();
    let boson_diag = crate::bosonrep::boson_hprime_matrix(catalog, constants, c0);
    assemble(grid, &twist, constants, &q5, Some(&boson_diag), H0Form::Bosonized)
}

/// Zero-mode operators on grid (x) sector: the transverse electric field
/// E_tr = -(i e^2 / L) d/da as a twisted central difference, the scalar
/// zero mode Phi_0 = (sqrt(pi)/e^2) E_tr, and its conjugate
/// Pi_0 = (sqrt(pi)/L) Q5reg(a).
pub fn zero_mode_operators(
    grid: &GridSpec,
    twist: &TwistOperatorPair,
    sector_q5: &[f64],
    constants: &PhysicalConstants,
) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    let e2 = constants.coupling() * constants.coupling();
    let diff = twisted_central_difference(grid, twist)?;
    let e_tr = diff.scale(Complex64::new(0.0, -e2 / constants.length()));
    let phi0 = e_tr.scale(Complex64::new(PI.sqrt() / e2, 0.0));
    let s = twist.dim();
    let mut diag = vec![0.0f64; grid.points() * s];
    for j in 0..grid.points() {
        let a = grid.coordinate(j);
        for (sec, &q5) in sector_q5.iter().enumerate() {
            diag[j * s + sec] = PI.sqrt() / constants.length() * q5reg(a, q5, constants);
        }
    }
    let pi0 = OperatorMatrix::diagonal_real(&diag);
    Ok((e_tr, phi0, pi0))
}

/// Amplitudes over grid (x) sector, indexed (grid point, sector).
#[derive(Debug, Clone)]
pub struct CombinedVector {
    grid: GridSpec,
    sector_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl CombinedVector {
    pub fn zero(grid: GridSpec, sector_dim: usize) -> Self {
        let n = grid.points() * sector_dim;
        Self { grid, sector_dim, amplitudes: vec![Complex64::ZERO; n] }
    }

    pub fn from_amplitudes(
        grid: GridSpec,
        sector_dim: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if amplitudes.len() != grid.points() * sector_dim {
            return Err(CoreError::DimensionMismatch("combined vector length".into()));
        }
        Ok(Self { grid, sector_dim, amplitudes })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn sector_dim(&self) -> usize {
        self.sector_dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn get(&self, j: usize, sector: usize) -> Complex64 {
        self.amplitudes[j * self.sector_dim + sector]
    }

    pub fn set(&mut self, j: usize, sector: usize, value: Complex64) {
        self.amplitudes[j * self.sector_dim + sector] = value;
    }

    /// Discrete norm on the gauge circle: sqrt(h * sum |psi|^2).
    pub fn norm_grid(&self) -> f64 {
        (self.grid.spacing() * self.amplitudes.iter().map(|x| x.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// |<self, other>| normalized by both norms (grid weights cancel).
    pub fn overlap(&self, other: &Self) -> f64 {
        let ip = crate::op::dot(&self.amplitudes, &other.amplitudes).norm();
        ip / (crate::op::norm(&self.amplitudes) * crate::op::norm(&other.amplitudes))
    }

    /// CSV dump with columns (a, sector label, Re, Im). Labels default to
    /// the sector index when not provided.
    pub fn write_csv<W: Write>(&self, mut w: W, labels: Option<&[i32]>) -> std::io::Result<()> {
        writeln!(w, "a,sector,re,im")?;
        for j in 0..self.grid.points() {
            let a = self.grid.coordinate(j);
            for sec in 0..self.sector_dim {
                let label = labels.map(|l| l[sec] as i64).unwrap_or(sec as i64);
                let v = self.get(j, sec);
                writeln!(w, "{a},{label},{},{}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Gaussian factor of the analytic vacuum:
/// f(x) = L^{1/4} pi^{-3/8} e^{-1/4} exp(-L x^2 / (2 sqrt(pi) e)).
pub fn vacuum_profile(x: f64, constants: &PhysicalConstants) -> f64 {
    let l = constants.length();
    let e = constants.coupling();
    let norm = l.powf(0.25) / (PI.powf(0.375) * e.powf(0.25));
    norm * (-l * x * x / (2.0 * PI.sqrt() * e)).exp()
}

/// The analytic vacuum on grid (x) bare P sectors:
/// Psi_0(a) = sum_P f(a - (2 pi / L)(P - 1/2)) Omega_P.
/// Satisfies the twisted matching conditions identically.
pub fn analytic_vacuum(
    grid: &GridSpec,
    p_window: i32,
    constants: &PhysicalConstants,
) -> CombinedVector {
    let sector_dim = (2 * p_window + 1) as usize;
    let mut v = CombinedVector::zero(*grid, sector_dim);
    for j in 0..grid.points() {
        let a = grid.coordinate(j);
        for (sec, p) in (-p_window..=p_window).enumerate() {
            let x = a - grid.period() * (p as f64 - 0.5);
            v.set(j, sec, Complex64::new(vacuum_profile(x, constants), 0.0));
        }
    }
    v
}

/// The same Gaussian comb over the zero-boson states of a boson catalog:
/// the dressed vacuum in the dressed representation.
pub fn analytic_vacuum_boson(
    grid: &GridSpec,
    catalog: &BosonCatalog,
    constants: &PhysicalConstants,
) -> CombinedVector {
    let mut v = CombinedVector::zero(*grid, catalog.dim());
    for j in 0..grid.points() {
        let a = grid.coordinate(j);
        for p in -catalog.p_range()..=catalog.p_range() {
            if let Some(sec) = catalog.ground_of_sector(p) {
                let x = a - grid.period() * (p as f64 - 0.5);
                v.set(j, sec, Complex64::new(vacuum_profile(x, constants), 0.0));
            }
        }
    }
    v
}

/// Gaussian comb over dressed unexcited states on grid (x) Fock catalog.
pub fn analytic_vacuum_dressed_fock(
    grid: &GridSpec,
    family: &crate::densities::DensityFamily,
    z: &OperatorMatrix,
    p_window: i32,
    constants: &PhysicalConstants,
    dense_threshold: usize,
) -> Result<CombinedVector> {
    let catalog = family.catalog();
    let mut v = CombinedVector::zero(*grid, catalog.dim());
    for p in -p_window..=p_window {
        let dressed = crate::coulomb::dressed_state(p, z, family, dense_threshold)?;
        for j in 0..grid.points() {
            let a = grid.coordinate(j);
            let f = vacuum_profile(a - grid.period() * (p as f64 - 0.5), constants);
            if f == 0.0 {
                continue;
            }
            for (sec, amp) in dressed.amplitudes().iter().enumerate() {
                if *amp != Complex64::ZERO {
                    let cur = v.get(j, sec);
                    v.set(j, sec, cur + amp * f);
                }
            }
        }
    }
    Ok(v)
}

/// Residual of the twisted boundary condition on a combined vector:
/// || psi(a_M) - e^{-2 i theta} G⁻¹ psi(a_0) || evaluated through one
/// seam crossing, normalized by the vector norm. For the analytic vacuum
/// this vanishes identically.
pub fn twisted_bc_residual(
    vector: &CombinedVector,
    twist: &TwistOperatorPair,
    extended_profile: impl Fn(usize) -> Vec<Complex64>,
) -> f64 {
    // psi(a_M) must equal e^{-2 i theta} G⁻¹ psi(a_0)
    let s = vector.sector_dim();
    let psi0: Vec<Complex64> = (0..s).map(|sec| vector.get(0, sec)).collect();
    let phase = Complex64::new(0.0, -2.0 * vector.grid().theta()).exp();
    let wrapped: Vec<Complex64> =
        twist.inverse().apply(&psi0).into_iter().map(|x| x * phase).collect();
    let direct = extended_profile(vector.grid().points());
    let mut diff = 0.0;
    for sec in 0..s {
        diff += (wrapped[sec] - direct[sec]).norm_sqr();
    }
    diff.sqrt() / crate::op::norm(&vector.amplitudes)
}
