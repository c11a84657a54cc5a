//! Small self-contained eigensolvers.
//!
//! Everything in the toolkit that needs spectra reduces to one of three
//! problems, all small enough that robust textbook algorithms beat pulling in
//! a full linear-algebra stack:
//!
//! * lowest eigenpairs of a **symmetric tridiagonal** matrix (the discretised
//!   1-D Hamiltonians in [`crate::wellmodes`]) — Sturm-sequence bisection plus
//!   inverse iteration;
//! * the **minimum eigenvalue of a dense real symmetric** matrix — Householder
//!   reduction to tridiagonal form followed by the same bisection;
//! * the **minimum eigenvalue of a dense complex Hermitian** matrix (the
//!   many-body positivity checks in [`crate::oracle`]) — the standard
//!   `[[A, -B], [B, A]]` real embedding of `A + iB`, which doubles every
//!   eigenvalue's multiplicity and changes nothing else.

use crate::Scalar;
use num_complex::Complex;

/// Symmetric tridiagonal matrix: `diag` has length `n`, `off` length `n − 1`;
/// `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone)]
pub struct SymTridiag<R> {
    /// Main diagonal.
    pub diag: Vec<R>,
    /// Sub-/super-diagonal (the matrix is symmetric).
    pub off: Vec<R>,
}

impl<R: Scalar> SymTridiag<R> {
    /// Builds the matrix, checking the bands have consistent lengths.
    pub fn new(diag: Vec<R>, off: Vec<R>) -> Self {
        assert!(
            !diag.is_empty() && off.len() + 1 == diag.len(),
            "tridiagonal bands must satisfy off.len() + 1 == diag.len()"
        );
        Self { diag, off }
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm, used to scale pivot protections and tolerances.
    fn norm_inf(&self) -> R {
        let n = self.n();
        let mut best = R::zero();
        for i in 0..n {
            let mut row = self.diag[i].abs();
            if i > 0 {
                row += self.off[i - 1].abs();
            }
            if i + 1 < n {
                row += self.off[i].abs();
            }
            best = best.max(row);
        }
        best
    }

    /// Number of eigenvalues strictly below `x`, from the Sturm sequence of
    /// the `LDLᵀ` factorisation of `T − xI`.
    pub fn sturm_count(&self, x: R) -> usize {
        let tiny = pivot_floor(self.norm_inf());
        let mut count = 0usize;
        let mut d = self.diag[0] - x;
        if d < R::zero() {
            count += 1;
        }
        for i in 1..self.n() {
            if d.abs() < tiny {
                d = -tiny;
            }
            d = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d;
            if d < R::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin bounds `(lo, hi)` containing the whole spectrum.
    pub fn spectrum_bounds(&self) -> (R, R) {
        let n = self.n();
        let mut lo = R::infinity();
        let mut hi = R::neg_infinity();
        for i in 0..n {
            let mut r = R::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` lowest eigenvalues, ascending, each located by bisection on the
    /// Sturm count. Converges to machine precision relative to the spectrum
    /// bounds regardless of clustering.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<R> {
        assert!(k <= self.n(), "asked for more eigenvalues than dimension");
        let (mut glo, mut ghi) = self.spectrum_bounds();
        let scale = ghi.abs().max(glo.abs()).max(R::one());
        let tol = R::epsilon() * scale * R::lit(4.0);
        // Pad so eigenvalues sitting exactly on a Gershgorin bound stay bracketed.
        glo -= tol;
        ghi += tol;
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            // Eigenvalue j+1-from-below lies where the count crosses j+1.
            let mut lo = glo;
            let mut hi = ghi;
            for _ in 0..4 * 8 * std::mem::size_of::<R>() {
                if hi - lo <= tol {
                    break;
                }
                let mid = lo + (hi - lo) * R::lit(0.5);
                if self.sturm_count(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let lambda = lo + (hi - lo) * R::lit(0.5);
            out.push(lambda);
            // Later (larger) eigenvalues cannot lie below this one.
            glo = lo;
        }
        out
    }

    /// Eigenvector for an eigenvalue estimate `lambda`, by inverse iteration
    /// with a partially pivoted tridiagonal solve.
    ///
    /// `orthogonalize_against` handles (nearly) degenerate pairs: pass the
    /// already-computed eigenvectors of the cluster and the iteration is
    /// re-orthogonalised against them each sweep. The result is normalised to
    /// unit Euclidean norm with a deterministic sign (largest-magnitude
    /// component positive).
    pub fn eigenvector(&self, lambda: R, orthogonalize_against: &[&[R]]) -> Vec<R> {
        let n = self.n();
        if n == 1 {
            return vec![R::one()];
        }
        // Deterministic, sign-varying start vector (a fixed linear congruential
        // stream); any start without special symmetry works.
        let mut x: Vec<R> = (0..n)
            .map(|i| {
                let u = ((i as u64).wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1)
                    >> 33) as f64
                    / (1u64 << 31) as f64;
                R::lit(2.0 * u - 1.0 + 0.1)
            })
            .collect();
        normalize(&mut x);
        for _ in 0..4 {
            let mut y = self.solve_shifted(lambda, &x);
            for q in orthogonalize_against {
                let c = dot(&y, q);
                for (yi, qi) in y.iter_mut().zip(q.iter()) {
                    *yi -= c * *qi;
                }
            }
            let norm = normalize(&mut y);
            x = y;
            // Growth ~1/(eps·‖T‖) signals convergence to working accuracy.
            if norm > R::one() / (R::epsilon() * R::lit(64.0)) {
                break;
            }
        }
        // Deterministic sign convention.
        let mut imax = 0;
        for i in 1..n {
            if x[i].abs() > x[imax].abs() {
                imax = i;
            }
        }
        if x[imax] < R::zero() {
            for xi in x.iter_mut() {
                *xi = -*xi;
            }
        }
        x
    }

    /// Solves `(T − λI) y = b` with partial pivoting (fill-in limited to a
    /// second superdiagonal). Exactly singular pivots are replaced by a tiny
    /// value, which is what inverse iteration wants.
    fn solve_shifted(&self, lambda: R, b: &[R]) -> Vec<R> {
        let n = self.n();
        let tiny = pivot_floor(self.norm_inf() + lambda.abs());
        let mut d: Vec<R> = self.diag.iter().map(|&v| v - lambda).collect();
        let mut u1: Vec<R> = (0..n)
            .map(|i| if i + 1 < n { self.off[i] } else { R::zero() })
            .collect();
        let mut u2 = vec![R::zero(); n];
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            let lead = self.off[i];
            if d[i].abs() < lead.abs() {
                // Swap rows i and i+1. Row i has entries (d, u1) in columns
                // (i, i+1); row i+1 has (lead, d[i+1], u1[i+1]) in columns
                // (i, i+1, i+2).
                let (ri_d, ri_u1) = (d[i], u1[i]);
                d[i] = lead;
                u1[i] = d[i + 1];
                u2[i] = u1[i + 1];
                d[i + 1] = ri_d;
                u1[i + 1] = ri_u1;
                x.swap(i, i + 1);
                // Eliminate: row_{i+1} -= m · row_i with m = ri_d / lead.
                let m = d[i + 1] / d[i];
                d[i + 1] = u1[i + 1] - m * u1[i];
                u1[i + 1] = -m * u2[i];
                x[i + 1] = x[i + 1] - m * x[i];
            } else {
                let piv = if d[i].abs() < tiny {
                    if d[i] < R::zero() {
                        -tiny
                    } else {
                        tiny
                    }
                } else {
                    d[i]
                };
                d[i] = piv;
                let m = lead / piv;
                d[i + 1] -= m * u1[i];
                u1[i + 1] -= m * u2[i];
                x[i + 1] = x[i + 1] - m * x[i];
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = if d[n - 1] < R::zero() { -tiny } else { tiny };
        }
        // Back substitution.
        x[n - 1] /= d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / d[i];
        }
        x
    }
}

fn pivot_floor<R: Scalar>(scale: R) -> R {
    (R::epsilon() * R::epsilon() * scale.max(R::one())).max(R::min_positive_value())
}

fn dot<R: Scalar>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |s, (&x, &y)| s + x * y)
}

fn normalize<R: Scalar>(v: &mut [R]) -> R {
    let norm = dot(v, v).sqrt();
    if norm > R::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Householder reduction of a dense symmetric matrix (row-major, `n × n`) to
/// tridiagonal form with the same spectrum. The input buffer is destroyed.
pub fn tridiagonalize_symmetric<R: Scalar>(a: &mut [R], n: usize) -> SymTridiag<R> {
    assert_eq!(a.len(), n * n, "matrix buffer must be n*n");
    let at = |a: &[R], i: usize, j: usize| a[i * n + j];
    let mut diag = vec![R::zero(); n];
    let mut off = vec![R::zero(); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the diagonal.
        let m = n - k - 1;
        let mut v: Vec<R> = (0..m).map(|r| at(a, k + 1 + r, k)).collect();
        let x0 = v[0];
        let sigma = v[1..].iter().fold(R::zero(), |s, &t| s + t * t);
        if sigma == R::zero() {
            off[k] = x0;
            continue;
        }
        let mu = (x0 * x0 + sigma).sqrt();
        let v0 = if x0 <= R::zero() {
            x0 - mu
        } else {
            -sigma / (x0 + mu)
        };
        let beta = R::lit(2.0) * v0 * v0 / (sigma + v0 * v0);
        for t in v.iter_mut() {
            *t /= v0;
        }
        v[0] = R::one();
        // New subdiagonal entry: first component of H·x, rest are zero.
        let vtx = v
            .iter()
            .enumerate()
            .fold(R::zero(), |s, (r, &vr)| s + vr * at(a, k + 1 + r, k));
        off[k] = x0 - beta * vtx;
        for r in 0..m {
            a[(k + 1 + r) * n + k] = if r == 0 { off[k] } else { R::zero() };
            a[k * n + (k + 1 + r)] = a[(k + 1 + r) * n + k];
        }
        // Two-sided update of the trailing block: p = β·A₂₂·v,
        // w = p − (β/2)(pᵀv)·v, A₂₂ ← A₂₂ − v wᵀ − w vᵀ.
        let mut p = vec![R::zero(); m];
        for r in 0..m {
            let mut s = R::zero();
            for c in 0..m {
                s += at(a, k + 1 + r, k + 1 + c) * v[c];
            }
            p[r] = beta * s;
        }
        let ptv = dot(&p, &v);
        let half = beta * ptv * R::lit(0.5);
        let w: Vec<R> = p.iter().zip(&v).map(|(&pr, &vr)| pr - half * vr).collect();
        for r in 0..m {
            for c in 0..m {
                a[(k + 1 + r) * n + (k + 1 + c)] =
                    at(a, k + 1 + r, k + 1 + c) - v[r] * w[c] - w[r] * v[c];
            }
        }
    }
    if n >= 2 {
        off[n - 2] = at(a, n - 1, n - 2);
    }
    for i in 0..n {
        diag[i] = at(a, i, i);
    }
    SymTridiag::new(diag, off)
}

/// The `k` lowest eigenvalues of a dense symmetric matrix (row-major, `n × n`).
/// The buffer is destroyed.
pub fn dense_symmetric_lowest_eigenvalues<R: Scalar>(a: &mut [R], n: usize, k: usize) -> Vec<R> {
    tridiagonalize_symmetric(a, n).lowest_eigenvalues(k)
}

/// Minimum eigenvalue of a dense complex Hermitian matrix (row-major, `n × n`),
/// via the real symmetric embedding `[[Re, −Im], [Im, Re]]`, which carries the
/// same eigenvalues with doubled multiplicity.
pub fn hermitian_min_eigenvalue<R: Scalar>(p: &[Complex<R>], n: usize) -> R {
    assert_eq!(p.len(), n * n, "matrix buffer must be n*n");
    if n == 0 {
        return R::zero();
    }
    let nn = 2 * n;
    let mut big = vec![R::zero(); nn * nn];
    for i in 0..n {
        for j in 0..n {
            let z = p[i * n + j];
            big[i * nn + j] = z.re;
            big[(i + n) * nn + (j + n)] = z.re;
            big[i * nn + (j + n)] = -z.im;
            big[(i + n) * nn + j] = z.im;
        }
    }
    dense_symmetric_lowest_eigenvalues(&mut big, nn, 1)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra as na;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_from_tridiag(t: &SymTridiag<f64>) -> na::DMatrix<f64> {
        let n = t.n();
        let mut m = na::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = t.off[i];
                m[(i + 1, i)] = t.off[i];
            }
        }
        m
    }

    fn random_tridiag(n: usize, seed: u64) -> SymTridiag<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymTridiag::new(
            (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            (0..n - 1).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        )
    }

    #[test]
    fn bisection_matches_dense_reference() {
        let t = random_tridiag(60, 7);
        let mut reference: Vec<f64> = dense_from_tridiag(&t)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = t.lowest_eigenvalues(6);
        for (g, r) in got.iter().zip(reference.iter()) {
            assert!((g - r).abs() < 1e-10, "eigenvalue mismatch: {g} vs {r}");
        }
    }

    #[test]
    fn inverse_iteration_residual_is_small() {
        let t = random_tridiag(80, 11);
        let lams = t.lowest_eigenvalues(3);
        let norm = dense_from_tridiag(&t).norm();
        let mut prev: Vec<Vec<f64>> = Vec::new();
        for &lam in &lams {
            let handles: Vec<&[f64]> = prev.iter().map(|v| v.as_slice()).collect();
            let v = t.eigenvector(lam, &handles);
            // residual ‖Tv − λv‖
            let n = t.n();
            let mut res = 0.0f64;
            for i in 0..n {
                let mut tv = t.diag[i] * v[i];
                if i > 0 {
                    tv += t.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    tv += t.off[i] * v[i + 1];
                }
                res += (tv - lam * v[i]).powi(2);
            }
            assert!(res.sqrt() < 1e-10 * norm, "residual {}", res.sqrt());
            prev.push(v);
        }
        // Orthogonality between the computed vectors.
        for i in 0..prev.len() {
            for j in 0..i {
                let d: f64 = prev[i].iter().zip(&prev[j]).map(|(a, b)| a * b).sum();
                assert!(d.abs() < 1e-8, "vectors {i},{j} not orthogonal: {d}");
            }
        }
    }

    #[test]
    fn near_degenerate_pair_is_resolved() {
        // Two decoupled blocks give an almost-degenerate lowest pair.
        let n = 40;
        let mut diag = vec![1.0f64; n];
        let mut off = vec![0.5f64; n - 1];
        off[n / 2] = 1e-9; // almost severs the chain
        diag[0] = -1.0;
        diag[n - 1] = -1.0 + 1e-9;
        let t = SymTridiag::new(diag, off);
        let lams = t.lowest_eigenvalues(2);
        assert!(lams[0] <= lams[1]);
        let v0 = t.eigenvector(lams[0], &[]);
        let v1 = t.eigenvector(lams[1], &[&v0]);
        let d: f64 = v0.iter().zip(&v1).map(|(a, b)| a * b).sum();
        assert!(d.abs() < 1e-7, "near-degenerate vectors not orthogonal: {d}");
    }

    #[test]
    fn householder_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 24;
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let dense = na::DMatrix::from_row_slice(n, n, &a);
        let mut reference: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let got = dense_symmetric_lowest_eigenvalues(&mut a, n, 4);
        for (g, r) in got.iter().zip(reference.iter()) {
            assert!((g - r).abs() < 1e-10, "{g} vs {r}");
        }
    }

    #[test]
    fn hermitian_embedding_matches_complex_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 16;
        let mut p = vec![Complex::new(0.0f64, 0.0); n * n];
        for i in 0..n {
            p[i * n + i] = Complex::new(rng.gen_range(0.0..1.0), 0.0);
            for j in 0..i {
                let z = Complex::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
                p[i * n + j] = z;
                p[j * n + i] = z.conj();
            }
        }
        let dense = na::DMatrix::from_fn(n, n, |i, j| {
            na::Complex::new(p[i * n + j].re, p[i * n + j].im)
        });
        let mut reference: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let got = hermitian_min_eigenvalue(&p, n);
        assert!((got - reference[0]).abs() < 1e-10, "{got} vs {}", reference[0]);
    }

    #[test]
    fn works_in_single_precision() {
        let t = SymTridiag::<f32>::new(vec![2.0, 2.0, 2.0, 2.0], vec![-1.0, -1.0, -1.0]);
        // Known spectrum of the 4-point Dirichlet Laplacian: 2 − 2cos(kπ/5).
        let lams = t.lowest_eigenvalues(4);
        for (k, lam) in lams.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f32::consts::PI * (k as f32 + 1.0) / 5.0).cos();
            assert!((lam - exact).abs() < 1e-5, "{lam} vs {exact}");
        }
    }
}
