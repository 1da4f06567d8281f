//! Top eigenpairs of Hermitian operators: cyclic Jacobi (dense), power
//! iteration and thick-restart Lanczos (matrix-free).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::spectral::matrix::KernelMatrix;

/// A Hermitian linear map on `C^dim`.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>>;
}

impl HermitianOperator for KernelMatrix {
    fn dim(&self) -> usize {
        KernelMatrix::dim(self)
    }

    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(KernelMatrix::apply(self, v))
    }
}

/// All eigenvalues of a Hermitian matrix by cyclic Jacobi, ascending.
pub fn jacobi_eigenvalues(c: &KernelMatrix) -> Result<Vec<f64>> {
    c.require_hermitian()?;
    let n = c.dim();
    let mut a: Vec<Complex64> = c.entries().to_vec();
    for i in 0..n {
        a[i * n + i].im = 0.0;
    }
    let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let target = (1e-16 * 1e-16) * fro2;
    let mut converged = n <= 1;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if 2.0 * off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let b = apq.norm();
                if b == 0.0 {
                    continue;
                }
                // Make a_pq real by rephasing basis vector q, then rotate.
                let phase = apq / b;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * b);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[r * n + p];
                    let h = a[r * n + q] * phase.conj();
                    let rp = g * cs - h * sn;
                    let rq = g * sn + h * cs;
                    a[r * n + p] = rp;
                    a[p * n + r] = rp.conj();
                    a[r * n + q] = rq;
                    a[q * n + r] = rq.conj();
                }
                a[p * n + p] = Complex64::new(app - t * b, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * b, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum();
        return Err(LabError::Convergence { iterations: 100, residual: off.sqrt() });
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[derive(Clone, Debug)]
pub struct EigenEstimate {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub iterations: usize,
    /// `‖A v − θ v‖ / |θ|` for the returned unit vector.
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [Complex64], s: f64) {
    for z in a {
        *z *= s;
    }
}

fn relative_residual(av: &[Complex64], v: &[Complex64], theta: f64) -> f64 {
    let r: f64 = av.iter().zip(v).map(|(a, x)| (a - x * theta).norm_sqr()).sum::<f64>().sqrt();
    if theta.abs() > 0.0 {
        r / theta.abs()
    } else {
        r
    }
}

/// Seeded start vector with uniform entries in the unit square, normalized.
/// `real` keeps it real, which real symmetric operators preserve.
pub fn start_vector(dim: usize, seed: u64, real: bool) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            Complex64::new(re, im)
        })
        .collect();
    let nv = norm(&v);
    scale(&mut v, 1.0 / nv);
    v
}

/// Power iteration for the top eigenvalue of a PSD operator.
pub fn power_iteration(
    op: &dyn HermitianOperator,
    start: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
) -> Result<EigenEstimate> {
    check_tol(tol)?;
    let mut v = start;
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(LabError::invalid("start vector is zero"));
    }
    scale(&mut v, 1.0 / nv);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let av = op.apply(&v)?;
        let theta = dot(&v, &av).re;
        residual = relative_residual(&av, &v, theta);
        if residual <= tol {
            return Ok(EigenEstimate { value: theta, vector: v, iterations: it, residual });
        }
        let na = norm(&av);
        if na == 0.0 {
            return Ok(EigenEstimate { value: 0.0, vector: v, iterations: it, residual: 0.0 });
        }
        v = av;
        scale(&mut v, 1.0 / na);
    }
    Err(LabError::Convergence { iterations: max_iter, residual })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LabError::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Orthogonalize `w` against `basis` twice (classical Gram–Schmidt), return
/// the remaining norm.
fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, w);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    norm(w)
}

/// Thick-restart Lanczos in projected form: the basis `V` and `AV` are kept
/// explicitly, the Rayleigh quotient `V*AV` is diagonalized each step, and on
/// restart the leading Ritz vectors are retained. One operator application
/// per iteration.
pub fn lanczos(
    op: &dyn HermitianOperator,
    start: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
) -> Result<EigenEstimate> {
    check_tol(tol)?;
    let dim = op.dim();
    let max_basis = dim.min(40);
    let keep = max_basis.min(10).max(1);
    let mut v = start;
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(LabError::invalid("start vector is zero"));
    }
    scale(&mut v, 1.0 / nv);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut images: Vec<Vec<Complex64>> = Vec::new();
    let mut residual = f64::INFINITY;
    let mut restarts = 0u64;
    for it in 1..=max_iter {
        let w = op.apply(&v)?;
        basis.push(v);
        images.push(w);
        let m = basis.len();
        let h = DMatrix::<Complex64>::from_fn(m, m, |i, j| {
            0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]).conj())
        });
        let eig = SymmetricEigen::new(h);
        let order = {
            let mut o: Vec<usize> = (0..m).collect();
            o.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            o
        };
        let theta = eig.eigenvalues[order[0]];
        let ritz = |col: usize, src: &[Vec<Complex64>]| -> Vec<Complex64> {
            let mut y = vec![Complex64::new(0.0, 0.0); dim];
            for (k, b) in src.iter().enumerate() {
                let c = eig.eigenvectors[(k, col)];
                for (o, x) in y.iter_mut().zip(b) {
                    *o += c * x;
                }
            }
            y
        };
        let y = ritz(order[0], &basis);
        let ay = ritz(order[0], &images);
        residual = relative_residual(&ay, &y, theta);
        if residual <= tol || m == dim {
            return Ok(EigenEstimate { value: theta, vector: y, iterations: it, residual });
        }
        let mut r: Vec<Complex64> = ay.iter().zip(&y).map(|(a, x)| a - x * theta).collect();
        if m == max_basis {
            let nb: Vec<Vec<Complex64>> = order[..keep].iter().map(|&c| ritz(c, &basis)).collect();
            let ni: Vec<Vec<Complex64>> = order[..keep].iter().map(|&c| ritz(c, &images)).collect();
            basis = nb;
            images = ni;
            restarts += 1;
        }
        let mut nr = orthogonalize(&mut r, &basis);
        if nr <= 1e-14 * theta.abs().max(1.0) {
            // Invariant subspace found; continue with a fresh direction.
            r = start_vector(dim, restarts.wrapping_add(it as u64), false);
            nr = orthogonalize(&mut r, &basis);
            if nr == 0.0 {
                return Ok(EigenEstimate { value: theta, vector: y, iterations: it, residual });
            }
        }
        scale(&mut r, 1.0 / nr);
        v = r;
    }
    Err(LabError::Convergence { iterations: max_iter, residual })
}
