//! Eigenvalue machinery: lowest eigenpairs of sparse Hermitian operators,
//! Hermitian matrix exponentials, residual diagnostics.
//!
//! Small problems are solved densely; above the dense threshold a Lanczos
//! iteration with full reorthogonalization is used. Starting vectors come
//! from a seeded generator so repeated runs are bit-identical.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::op::{self, OperatorMatrix};

/// Matrix-free Hermitian linear operator.
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
}

impl LinearOp for OperatorMatrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.nrows()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        OperatorMatrix::apply(self, x)
    }
}

/// Request for the lowest eigenpairs of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct EigenRequest {
    pub count: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Problems at or below this dimension are solved densely.
    pub dense_threshold: usize,
    pub seed: u64,
}

impl Default for EigenRequest {
    fn default() -> Self {
        Self { count: 1, tolerance: 1e-10, max_iterations: 1200, dense_threshold: 900, seed: 1 }
    }
}

impl EigenRequest {
    pub fn lowest(count: usize) -> Self {
        Self { count, ..Self::default() }
    }
}

/// One converged eigenpair.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
}

/// Lowest eigenpairs in ascending order of eigenvalue.
///
/// The operator must be Hermitian; this is spot-checked on seeded probe
/// vectors before any work is done.
pub fn lowest_eigenpairs(op: &dyn LinearOp, request: &EigenRequest) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if request.count == 0 || request.count > n {
        return Err(CoreError::InvalidConfig(format!(
            "requested {} eigenpairs of a dimension-{} operator",
            request.count, n
        )));
    }
    check_hermitian_probes(op, request.seed)?;
    if n <= request.dense_threshold {
        dense_lowest(op, request)
    } else {
        lanczos_lowest(op, request)
    }
}

fn check_hermitian_probes(op: &dyn LinearOp, seed: u64) -> Result<()> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let x = random_vector(n, &mut rng);
        let y = random_vector(n, &mut rng);
        let ax = op.apply(&x);
        let ay = op.apply(&y);
        let lhs = op::dot(&ax, &y);
        let rhs = op::dot(&x, &ay);
        worst = worst.max((lhs - rhs).norm());
        scale = scale.max(op::norm(&ax)).max(op::norm(&ay));
    }
    let tolerance = 1e-10 * (1.0 + scale);
    if worst > tolerance {
        return Err(CoreError::NonHermitian { residual: worst, tolerance });
    }
    Ok(())
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let nrm = op::norm(&v);
    for x in &mut v {
        *x /= nrm;
    }
    v
}

/// Materialize the operator column by column and solve densely.
fn dense_lowest(op: &dyn LinearOp, request: &EigenRequest) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    let dense = materialize(op);
    let se = dense.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let pairs = order
        .iter()
        .take(request.count)
        .map(|&i| EigenPair {
            value: se.eigenvalues[i],
            vector: se.eigenvectors.column(i).iter().cloned().collect(),
        })
        .collect();
    Ok(pairs)
}

pub(crate) fn materialize(op: &dyn LinearOp) -> DMatrix<Complex64> {
    let n = op.dim();
    let mut dense = DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::ZERO; n];
    for j in 0..n {
        e[j] = Complex64::ONE;
        let col = op.apply(&e);
        e[j] = Complex64::ZERO;
        for i in 0..n {
            dense[(i, j)] = col[i];
        }
    }
    dense
}

/// Lanczos with full reorthogonalization. Basis vectors are kept so Ritz
/// vectors can be reconstructed; dimensions here are desk scale.
fn lanczos_lowest(op: &dyn LinearOp, request: &EigenRequest) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
    let mut basis: Vec<Vec<Complex64>> = vec![random_vector(n, &mut rng)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut exhausted = false;

    let block = 24usize.max(2 * request.count);
    loop {
        let target = (alphas.len() + block).min(n).min(request.max_iterations);
        while alphas.len() < target && !exhausted {
            let j = alphas.len();
            let mut w = op.apply(&basis[j]);
            let alpha = op::dot(&basis[j], &w).re;
            alphas.push(alpha);
            op::axpy(Complex64::new(-alpha, 0.0), &basis[j], &mut w);
            if j > 0 {
                op::axpy(Complex64::new(-betas[j - 1], 0.0), &basis[j - 1], &mut w);
            }
            // full reorthogonalization, twice for safety
            for _ in 0..2 {
                for v in &basis {
                    let proj = op::dot(v, &w);
                    op::axpy(-proj, v, &mut w);
                }
            }
            let beta = op::norm(&w);
            if beta < 1e-13 {
                exhausted = true;
                break;
            }
            betas.push(beta);
            for x in &mut w {
                *x /= beta;
            }
            basis.push(w);
        }

        let m = alphas.len();
        let (ritz_values, ritz_coeffs) = tridiagonal_eigen(&alphas, &betas[..m - 1]);
        if m >= request.count {
            // residual of each wanted Ritz pair is |beta_m * last coefficient|
            let tail_beta = if exhausted || m == n { 0.0 } else { *betas.last().unwrap() };
            let converged = (0..request.count).all(|k| {
                let resid = tail_beta * ritz_coeffs[(m - 1, k)].abs();
                resid <= request.tolerance * (1.0 + ritz_values[k].abs())
            });
            if converged || exhausted || m == n || m >= request.max_iterations {
                if !(converged || exhausted || m == n) {
                    let worst = (0..request.count)
                        .map(|k| tail_beta * ritz_coeffs[(m - 1, k)].abs())
                        .fold(0.0, f64::max);
                    return Err(CoreError::NoConvergence { iterations: m, residual: worst });
                }
                let mut pairs = Vec::with_capacity(request.count);
                for k in 0..request.count {
                    let mut vector = vec![Complex64::ZERO; n];
                    for (j, basis_vec) in basis.iter().take(m).enumerate() {
                        op::axpy(Complex64::new(ritz_coeffs[(j, k)], 0.0), basis_vec, &mut vector);
                    }
                    let nrm = op::norm(&vector);
                    for x in &mut vector {
                        *x /= nrm;
                    }
                    pairs.push(EigenPair { value: ritz_values[k], vector });
                }
                return Ok(pairs);
            }
        }
    }
}

/// Eigendecomposition of the real symmetric tridiagonal Lanczos matrix,
/// eigenvalues ascending.
fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let se = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut coeffs = DMatrix::<f64>::zeros(m, m);
    for (k, &i) in order.iter().enumerate() {
        coeffs.set_column(k, &se.eigenvectors.column(i));
    }
    (values, coeffs)
}

/// e^{i t G} v for Hermitian G via dense spectral decomposition.
///
/// Dimensions above `dense_threshold` are refused; see
/// [`hermitian_exp_apply_krylov`] for larger problems.
pub fn hermitian_exp_apply(
    generator: &OperatorMatrix,
    t: f64,
    vector: &[Complex64],
    dense_threshold: usize,
) -> Result<Vec<Complex64>> {
    let n = generator.nrows();
    if !generator.is_square() || vector.len() != n {
        return Err(CoreError::DimensionMismatch("exp_apply".into()));
    }
    if n > dense_threshold {
        return Err(CoreError::AboveDenseThreshold { dim: n, threshold: dense_threshold });
    }
    let herm = generator.hermiticity_residual();
    let tol = 1e-10 * (1.0 + generator.max_abs());
    if herm > tol {
        return Err(CoreError::NonHermitian { residual: herm, tolerance: tol });
    }
    let se = generator.to_dense().symmetric_eigen();
    let v = nalgebra::DVector::from_column_slice(vector);
    let mut coeffs = se.eigenvectors.adjoint() * v;
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c *= Complex64::new(0.0, t * se.eigenvalues[i]).exp();
    }
    let out = &se.eigenvectors * coeffs;
    Ok(out.iter().cloned().collect())
}

/// e^{i t G} v for Hermitian G via the spectral decomposition of G
/// restricted to a Krylov space of v. Used where the dense path is too
/// large; the Krylov space is grown until the result stops changing.
pub fn hermitian_exp_apply_krylov(
    generator: &dyn LinearOp,
    t: f64,
    vector: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = generator.dim();
    if vector.len() != n {
        return Err(CoreError::DimensionMismatch("exp_apply_krylov".into()));
    }
    let vnorm = op::norm(vector);
    if vnorm == 0.0 {
        return Ok(vector.to_vec());
    }
    let mut basis: Vec<Vec<Complex64>> = vec![vector.iter().map(|x| x / vnorm).collect()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut exhausted = false;
    let mut previous: Option<Vec<Complex64>> = None;
    loop {
        for _ in 0..8 {
            let j = alphas.len();
            let mut w = generator.apply(&basis[j]);
            let alpha = op::dot(&basis[j], &w).re;
            alphas.push(alpha);
            op::axpy(Complex64::new(-alpha, 0.0), &basis[j], &mut w);
            if j > 0 {
                op::axpy(Complex64::new(-betas[j - 1], 0.0), &basis[j - 1], &mut w);
            }
            for v in &basis {
                let proj = op::dot(v, &w);
                op::axpy(-proj, v, &mut w);
            }
            let beta = op::norm(&w);
            if beta < 1e-14 || basis.len() == n {
                exhausted = true;
                break;
            }
            betas.push(beta);
            for x in &mut w {
                *x /= beta;
            }
            basis.push(w);
        }
        let m = alphas.len();
        let (values, coeffs) = tridiagonal_eigen(&alphas, &betas[..m - 1]);
        // exp(i t T) e_1 in the Krylov basis
        let mut small = vec![Complex64::ZERO; m];
        for k in 0..m {
            let phase = Complex64::new(0.0, t * values[k]).exp();
            let weight = coeffs[(0, k)];
            for j in 0..m {
                small[j] += phase * weight * coeffs[(j, k)];
            }
        }
        let mut out = vec![Complex64::ZERO; n];
        for (j, basis_vec) in basis.iter().take(m).enumerate() {
            op::axpy(small[j] * vnorm, basis_vec, &mut out);
        }
        let done = match &previous {
            Some(prev) => {
                let mut diff = 0.0;
                for i in 0..n {
                    diff += (out[i] - prev[i]).norm_sqr();
                }
                diff.sqrt() <= 1e-12 * vnorm
            }
            None => false,
        };
        if done || exhausted {
            return Ok(out);
        }
        previous = Some(out);
        if m > 500 {
            return Err(CoreError::NoConvergence { iterations: m, residual: f64::NAN });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::MatrixBuilder;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dense_on_diagonal() {
        let m = OperatorMatrix::diagonal_real(&[3.0, 1.0, 2.0]);
        let pairs = lowest_eigenpairs(&m, &EigenRequest::lowest(2)).unwrap();
        assert!((pairs[0].value - 1.0).abs() < 1e-14);
        assert!((pairs[1].value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let mut b = MatrixBuilder::new();
        b.push(0, 0, c(2.0, 0.0));
        b.push(0, 1, c(0.0, 1.0));
        b.push(1, 0, c(0.0, -1.0));
        b.push(1, 1, c(2.0, 0.0));
        let m = b.build(2, 2);
        let pairs = lowest_eigenpairs(&m, &EigenRequest::lowest(2)).unwrap();
        assert!((pairs[0].value - 1.0).abs() < 1e-12);
        assert!((pairs[1].value - 3.0).abs() < 1e-12);
        let hv = m.apply(&pairs[0].vector);
        let mut r = 0.0f64;
        for i in 0..2 {
            r += (hv[i] - pairs[0].vector[i] * pairs[0].value).norm_sqr();
        }
        assert!(r.sqrt() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut b = MatrixBuilder::new();
        b.push(0, 1, c(1.0, 0.0));
        let m = b.build(2, 2);
        assert!(matches!(
            lowest_eigenpairs(&m, &EigenRequest::lowest(1)),
            Err(CoreError::NonHermitian { .. })
        ));
    }

    /// Seeded random Hermitian matrix for solver cross-checks.
    fn random_hermitian(n: usize, seed: u64) -> OperatorMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = MatrixBuilder::new();
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    c(rng.gen::<f64>() - 0.5, 0.0)
                } else {
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                };
                b.push(i, j, v);
                if i != j {
                    b.push(j, i, v.conj());
                }
            }
        }
        b.build(n, n)
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let m = random_hermitian(120, 11);
        let dense = lowest_eigenpairs(&m, &EigenRequest::lowest(4)).unwrap();
        let via_lanczos = lowest_eigenpairs(
            &m,
            &EigenRequest { count: 4, dense_threshold: 0, ..EigenRequest::default() },
        )
        .unwrap();
        for (a, b) in dense.iter().zip(&via_lanczos) {
            assert!((a.value - b.value).abs() < 1e-9, "{} vs {}", a.value, b.value);
        }
        for i in 0..4 {
            for j in 0..4 {
                let ip = op::dot(&via_lanczos[i].vector, &via_lanczos[j].vector).norm();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lanczos_residuals_meet_tolerance() {
        let m = random_hermitian(200, 3);
        let req = EigenRequest { count: 3, dense_threshold: 0, ..EigenRequest::default() };
        let pairs = lowest_eigenpairs(&m, &req).unwrap();
        for p in &pairs {
            let hv = m.apply(&p.vector);
            let mut r = 0.0f64;
            for i in 0..200 {
                r += (hv[i] - p.vector[i] * p.value).norm_sqr();
            }
            assert!(r.sqrt() <= req.tolerance * (1.0 + p.value.abs()) * 10.0);
        }
    }

    #[test]
    fn exp_apply_scalar_cases() {
        // t = 0 is the identity
        let m = random_hermitian(10, 5);
        let v = vec![c(1.0, 0.0); 10];
        let out = hermitian_exp_apply(&m, 0.0, &v, 100).unwrap();
        for i in 0..10 {
            assert!((out[i] - v[i]).norm() < 1e-13);
        }
        // 1-dim: diag(pi) multiplies by e^{i pi} = -1
        let g = OperatorMatrix::diagonal_real(&[std::f64::consts::PI]);
        let out = hermitian_exp_apply(&g, 1.0, &[c(1.0, 0.0)], 10).unwrap();
        assert!((out[0] - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exp_apply_unitary_and_krylov_agrees() {
        let m = random_hermitian(60, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = random_vector(60, &mut rng);
        let dense = hermitian_exp_apply(&m, 0.7, &v, 100).unwrap();
        assert!((op::norm(&dense) - op::norm(&v)).abs() < 1e-10);
        let krylov = hermitian_exp_apply_krylov(&m, 0.7, &v).unwrap();
        let mut diff = 0.0f64;
        for i in 0..60 {
            diff += (dense[i] - krylov[i]).norm_sqr();
        }
        assert!(diff.sqrt() < 1e-10, "krylov vs dense: {}", diff.sqrt());
    }

    #[test]
    fn exp_apply_refuses_large_dense() {
        let m = OperatorMatrix::identity(50);
        let v = vec![Complex64::ONE; 50];
        assert!(matches!(
            hermitian_exp_apply(&m, 1.0, &v, 10),
            Err(CoreError::AboveDenseThreshold { .. })
        ));
    }
}
