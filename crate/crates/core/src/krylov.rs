//! Right-preconditioned BiCGStab.
//!
//! The recursively updated residual is used as a cheap convergence gate; a
//! declared convergence is always verified against the true residual
//! `||b - A x|| / ||b||`, so a reported success is honest. Breakdowns return
//! the iterate with the smallest observed true residual.

use crate::csc::CscMatrix;
use crate::error::{Error, Result};

const BREAKDOWN_TOL: f64 = 1e-290;
const STAGNATION_RTOL: f64 = 1e-16;
const STAGNATION_SPAN: usize = 50;

/// Outcome of one BiCGStab solve.
#[derive(Debug, Clone)]
pub struct KrylovStats {
    /// Full steps taken; an exit at the half step counts as a full one.
    pub iterations: usize,
    /// True relative residual of the returned iterate.
    pub final_rel_residual: f64,
    /// Stage label when the recurrence broke down.
    pub breakdown: Option<String>,
    pub converged: bool,
}

/// Applies the sparse approximate inverse: `M v`.
pub fn apply_preconditioner(m: &CscMatrix, v: &[f64]) -> Result<Vec<f64>> {
    m.spmv(v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Solves `A x = b` with right-preconditioned BiCGStab.
///
/// `apply_a` computes `y = A x` into its second argument. When `m` is given,
/// the iteration runs on `z -> A (M z)` but `x` is returned in the original
/// variables. Stops when the true relative residual drops to `rel_tol` or
/// after `max_iter` full steps; the initial guess is `x0`.
///
/// Breakdown (vanishing `rho` or `omega`, or 50 stagnant steps) is reported
/// through [`KrylovStats::breakdown`] with the best iterate returned;
/// non-finite arithmetic is an error.
pub fn bicgstab<F>(
    apply_a: F,
    m: Option<&CscMatrix>,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
    x0: &[f64],
) -> Result<(Vec<f64>, KrylovStats)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "bicgstab: x0 has length {}, expected {n}",
            x0.len()
        )));
    }
    if let Some(prec) = m {
        if prec.n_rows() != n || prec.n_cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "bicgstab: preconditioner is {}x{}, expected {n}x{n}",
                prec.n_rows(),
                prec.n_cols()
            )));
        }
    }

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((
            x0.to_vec(),
            KrylovStats {
                iterations: 0,
                final_rel_residual: 0.0,
                breakdown: None,
                converged: true,
            },
        ));
    }

    let precondition = |v: &[f64]| -> Vec<f64> {
        match m {
            Some(prec) => {
                let mut out = vec![0.0; n];
                prec.spmv_into(v, &mut out);
                out
            }
            None => v.to_vec(),
        }
    };
    let true_rel = |x: &[f64], scratch: &mut Vec<f64>| -> f64 {
        apply_a(x, scratch);
        let mut s = 0.0;
        for (t, bi) in scratch.iter().zip(b) {
            let d = bi - t;
            s += d * d;
        }
        s.sqrt() / b_norm
    };

    let mut x = x0.to_vec();
    let mut scratch = vec![0.0; n];
    let mut r = {
        apply_a(&x, &mut scratch);
        b.iter().zip(&scratch).map(|(bi, ax)| bi - ax).collect::<Vec<f64>>()
    };
    let initial_rel = norm(&r) / b_norm;
    if initial_rel <= rel_tol {
        return Ok((
            x,
            KrylovStats {
                iterations: 0,
                final_rel_residual: initial_rel,
                breakdown: None,
                converged: true,
            },
        ));
    }

    let r_hat = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    let mut best_x = x.clone();
    let mut best_rel = initial_rel;
    let mut prev_rnorm = norm(&r);
    let mut stagnant = 0usize;
    // full steps actually completed; a half-step exit counts as a full one
    let mut completed = 0usize;

    let mut breakdown: Option<String> = None;

    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < BREAKDOWN_TOL {
            breakdown = Some("rho".into());
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precondition(&p);
        apply_a(&p_hat, &mut v);
        let rhv = dot(&r_hat, &v);
        if rhv.abs() < BREAKDOWN_TOL {
            breakdown = Some("rho_hat_v".into());
            break;
        }
        alpha = rho / rhv;

        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        let s_norm = norm(&s);
        if !s_norm.is_finite() {
            return Err(Error::Numerical("BiCGStab: non-finite residual".into()));
        }
        if s_norm / b_norm <= rel_tol {
            // half-step exit candidate; verify with the true residual
            let x_cand: Vec<f64> = x.iter().zip(&p_hat).map(|(xi, pi)| xi + alpha * pi).collect();
            let tr = true_rel(&x_cand, &mut scratch);
            if tr < best_rel {
                best_rel = tr;
                best_x = x_cand.clone();
            }
            if tr <= rel_tol {
                return Ok((
                    x_cand,
                    KrylovStats {
                        iterations: it,
                        final_rel_residual: tr,
                        breakdown: None,
                        converged: true,
                    },
                ));
            }
        }

        let s_hat = precondition(&s);
        let mut t = vec![0.0; n];
        apply_a(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = dot(&t, &s) / tt;
        if !omega.is_finite() {
            breakdown = Some("omega".into());
            break;
        }
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
        }
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        completed = it;
        let rnorm = norm(&r);
        if !rnorm.is_finite() {
            return Err(Error::Numerical("BiCGStab: non-finite residual".into()));
        }
        if rnorm / b_norm <= rel_tol {
            let tr = true_rel(&x, &mut scratch);
            if tr < best_rel {
                best_rel = tr;
                best_x = x.clone();
            }
            if tr <= rel_tol {
                return Ok((
                    x,
                    KrylovStats {
                        iterations: it,
                        final_rel_residual: tr,
                        breakdown: None,
                        converged: true,
                    },
                ));
            }
        }
        if omega.abs() < BREAKDOWN_TOL {
            breakdown = Some("omega".into());
            break;
        }
        if (rnorm - prev_rnorm).abs() <= STAGNATION_RTOL * prev_rnorm {
            stagnant += 1;
            if stagnant >= STAGNATION_SPAN {
                breakdown = Some("stagnation".into());
                break;
            }
        } else {
            stagnant = 0;
        }
        prev_rnorm = rnorm;
    }

    // breakdown or max_iter: return the best observed iterate
    let current_rel = true_rel(&x, &mut scratch);
    if current_rel < best_rel {
        best_rel = current_rel;
        best_x = x;
    }
    Ok((
        best_x,
        KrylovStats {
            iterations: completed,
            final_rel_residual: best_rel,
            breakdown,
            converged: best_rel <= rel_tol,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;

    fn spmv_closure(a: &CscMatrix) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| a.spmv_into(x, y)
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = CscMatrix::identity(4);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let (x, stats) = bicgstab(spmv_closure(&a), None, &b, 1e-12, 100, &[0.0; 4]).unwrap();
        assert!(stats.converged);
        assert!(stats.iterations <= 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_rhs_returns_after_zero_iterations() {
        let a = CscMatrix::identity(3);
        let (x, stats) = bicgstab(spmv_closure(&a), None, &[0.0; 3], 1e-10, 100, &[0.0; 3]).unwrap();
        assert_eq!(stats.iterations, 0);
        assert!(stats.converged);
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn diagonally_dominant_matches_dense_oracle() {
        let n = 20;
        let mut state = 42u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && (i + j) % 3 == 0 {
                    triplets.push((i, j, next()));
                }
            }
        }
        let mut diag = vec![1.0; n];
        for &(i, _, v) in &triplets {
            diag[i] += v.abs();
        }
        for (i, d) in diag.iter().enumerate() {
            triplets.push((i, i, *d));
        }
        let a = CscMatrix::from_triplets(n, n, &triplets).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let (x, stats) = bicgstab(spmv_closure(&a), None, &b, 1e-10, 500, &vec![0.0; n]).unwrap();
        assert!(stats.converged, "{stats:?}");

        let dense = a.to_dense();
        let rhs = DenseMatrix::from_columns(n, &[b.clone()]);
        let oracle = crate::dense::small_dense_solve(&dense, &rhs).unwrap();
        for i in 0..n {
            assert!(
                (x[i] - oracle.get(i, 0)).abs() <= 1e-8,
                "component {i}: {} vs {}",
                x[i],
                oracle.get(i, 0)
            );
        }
    }

    #[test]
    fn apply_preconditioner_cases() {
        let id = CscMatrix::identity(3);
        let v = vec![1.0, 2.0, 3.0];
        assert_eq!(apply_preconditioner(&id, &v).unwrap(), v);
        let d = CscMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (1, 1, 3.0), (2, 2, 4.0)]).unwrap();
        assert_eq!(apply_preconditioner(&d, &v).unwrap(), vec![2.0, 6.0, 12.0]);
        // random sparse against the dense oracle
        let m =
            CscMatrix::from_triplets(3, 3, &[(0, 1, 1.5), (1, 0, -2.0), (2, 2, 0.25)]).unwrap();
        let got = apply_preconditioner(&m, &v).unwrap();
        let want = m.to_dense().matvec(&v);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-14);
        }
    }

    #[test]
    fn none_equals_identity_preconditioner_bitwise() {
        let n = 15;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 4.0 + i as f64 * 0.1));
            if i + 1 < n {
                triplets.push((i, i + 1, -1.0));
                triplets.push((i + 1, i, 0.5));
            }
        }
        let a = CscMatrix::from_triplets(n, n, &triplets).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let id = CscMatrix::identity(n);
        let (x1, s1) = bicgstab(spmv_closure(&a), None, &b, 1e-11, 200, &vec![0.0; n]).unwrap();
        let (x2, s2) =
            bicgstab(spmv_closure(&a), Some(&id), &b, 1e-11, 200, &vec![0.0; n]).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(s1.iterations, s2.iterations);
    }

    #[test]
    fn converged_implies_true_residual_holds() {
        let n = 12;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 3.0));
            triplets.push((i, (i + 5) % n, -0.9));
            triplets.push(((i + 2) % n, i, 0.7));
        }
        let a = CscMatrix::from_triplets(n, n, &triplets).unwrap();
        for seed in 0..5u64 {
            let b: Vec<f64> = (0..n).map(|i| ((i as u64 + seed * 7) as f64 * 0.61).cos()).collect();
            let tol = 1e-9;
            let (x, stats) =
                bicgstab(spmv_closure(&a), None, &b, tol, 300, &vec![0.0; n]).unwrap();
            assert!(stats.iterations <= 300);
            if stats.converged {
                let ax = a.spmv(&x).unwrap();
                let mut s = 0.0;
                let mut bn = 0.0;
                for (axi, bi) in ax.iter().zip(&b) {
                    s += (bi - axi) * (bi - axi);
                    bn += bi * bi;
                }
                assert!(s.sqrt() / bn.sqrt() <= tol, "declared convergence drifted");
            }
        }
    }

    #[test]
    fn max_iter_reached_reports_not_converged() {
        let n = 30;
        // skew-circulant-ish system that will not converge in 1 step
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 1.0));
            triplets.push((i, (i + 1) % n, -2.0));
        }
        let a = CscMatrix::from_triplets(n, n, &triplets).unwrap();
        let b = vec![1.0; n];
        let (_, stats) = bicgstab(spmv_closure(&a), None, &b, 1e-14, 2, &vec![0.0; n]).unwrap();
        assert!(!stats.converged);
        assert!(stats.iterations <= 2);
    }
}
