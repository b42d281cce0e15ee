//! Dense complex linear algebra kept deliberately self-contained: a
//! scaling-and-squaring matrix exponential with Pade approximants of adaptive
//! order, a partial-pivot LU solver backing it, and a cyclic Jacobi
//! eigensolver for Hermitian matrices. No external LAPACK linkage, so results
//! are bit-reproducible across machines with the same float semantics.

use ndarray::{Array1, Array2};

use crate::{C64, Error, Result};

/// Maximum column sum norm.
pub fn one_norm(m: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        let s: f64 = m.column(j).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

pub fn frobenius_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

/// LU factorization with partial pivoting, in place. Returns the pivot row
/// for each elimination step.
fn lu_factor(m: &mut Array2<C64>) -> Result<Vec<usize>> {
    let n = m.nrows();
    let mut pivots = vec![0usize; n];
    for k in 0..n {
        let mut p = k;
        let mut best = m[(k, k)].norm();
        for i in (k + 1)..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::IntegrationFailure(
                "singular matrix in linear solve".into(),
            ));
        }
        pivots[k] = p;
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
        }
        let inv = C64::new(1.0, 0.0) / m[(k, k)];
        for i in (k + 1)..n {
            let factor = m[(i, k)] * inv;
            m[(i, k)] = factor;
            if factor != C64::new(0.0, 0.0) {
                for j in (k + 1)..n {
                    let sub = factor * m[(k, j)];
                    m[(i, j)] -= sub;
                }
            }
        }
    }
    Ok(pivots)
}

/// Solve A X = B for X with A given by its LU factors.
fn lu_solve(lu: &Array2<C64>, pivots: &[usize], b: &mut Array2<C64>) {
    let n = lu.nrows();
    let cols = b.ncols();
    for k in 0..n {
        let p = pivots[k];
        if p != k {
            for j in 0..cols {
                let tmp = b[(k, j)];
                b[(k, j)] = b[(p, j)];
                b[(p, j)] = tmp;
            }
        }
        for i in (k + 1)..n {
            let factor = lu[(i, k)];
            if factor != C64::new(0.0, 0.0) {
                for j in 0..cols {
                    let sub = factor * b[(k, j)];
                    b[(i, j)] -= sub;
                }
            }
        }
    }
    for k in (0..n).rev() {
        let inv = C64::new(1.0, 0.0) / lu[(k, k)];
        for j in 0..cols {
            b[(k, j)] *= inv;
        }
        for i in 0..k {
            let factor = lu[(i, k)];
            if factor != C64::new(0.0, 0.0) {
                for j in 0..cols {
                    let sub = factor * b[(k, j)];
                    b[(i, j)] -= sub;
                }
            }
        }
    }
}

/// Solve A X = B for square complex A.
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let mut lu = a.clone();
    let pivots = lu_factor(&mut lu)?;
    let mut x = b.clone();
    lu_solve(&lu, &pivots, &mut x);
    Ok(x)
}

// Pade coefficient tables and the 1-norm thresholds that pick the cheapest
// order meeting double-precision accuracy.
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

fn pade_coeffs(order: usize) -> &'static [f64] {
    match order {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[
            17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
        ],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("unsupported Pade order"),
    }
}

fn scaled_real(m: &Array2<C64>, factor: f64) -> Array2<C64> {
    m.mapv(|z| z * factor)
}

/// Matrix exponential by scaling and squaring with diagonal Pade
/// approximants, order chosen from the 1-norm.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            context: "expm input".into(),
            expected: n,
            got: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::IntegrationFailure(
            "non-finite entries in expm input".into(),
        ));
    }

    let mut order = 13;
    let mut squarings = 0u32;
    for &(m, theta) in &THETA {
        if norm <= theta {
            order = m;
            squarings = 0;
            break;
        }
    }
    if norm > THETA[4].1 {
        order = 13;
        squarings = (norm / THETA[4].1).log2().ceil().max(0.0) as u32;
    }

    let scaled = if squarings > 0 {
        scaled_real(a, 0.5f64.powi(squarings as i32))
    } else {
        a.clone()
    };

    let b = pade_coeffs(order);
    let eye = identity(n);
    let a2 = scaled.dot(&scaled);

    let (u, v) = if order < 13 {
        // U = A * (sum_k b[2k+1] A^{2k}), V = sum_k b[2k] A^{2k}
        let mut even = scaled_real(&eye, b[0]);
        let mut odd = scaled_real(&eye, b[1]);
        let mut power = a2.clone();
        let mut k = 2;
        while k <= order {
            even = even + scaled_real(&power, b[k]);
            if k + 1 <= order {
                odd = odd + scaled_real(&power, b[k + 1]);
            }
            if k + 2 <= order {
                power = power.dot(&a2);
            }
            k += 2;
        }
        (scaled.dot(&odd), even)
    } else {
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        let u_inner = scaled_real(&a6, b[13]) + scaled_real(&a4, b[11]) + scaled_real(&a2, b[9]);
        let u_poly = a6.dot(&u_inner)
            + scaled_real(&a6, b[7])
            + scaled_real(&a4, b[5])
            + scaled_real(&a2, b[3])
            + scaled_real(&eye, b[1]);
        let v_inner = scaled_real(&a6, b[12]) + scaled_real(&a4, b[10]) + scaled_real(&a2, b[8]);
        let v_poly = a6.dot(&v_inner)
            + scaled_real(&a6, b[6])
            + scaled_real(&a4, b[4])
            + scaled_real(&a2, b[2])
            + scaled_real(&eye, b[0]);
        (scaled.dot(&u_poly), v_poly)
    };

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut result = solve(&lhs, &rhs)?;
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues in ascending order with matching
/// eigenvector columns.
pub fn hermitian_eigen(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            context: "hermitian_eigen input".into(),
            expected: n,
            got: a.ncols(),
        });
    }
    let scale = frobenius_norm(a).max(f64::MIN_POSITIVE);
    let mut m = a.clone();
    let mut v = identity(n);

    let off = |m: &Array2<C64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let tol = 1e-14 * scale;
    for _sweep in 0..60 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = m[(p, q)];
                let r = alpha.norm();
                if r <= tol / (n as f64) {
                    continue;
                }
                let phase = alpha / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // G = [[c, s*phase], [-s*conj(phase), c]] acting on (p, q)
                let g00 = C64::new(c, 0.0);
                let g01 = phase * s;
                let g10 = -phase.conj() * s;
                let g11 = C64::new(c, 0.0);

                // columns: M <- M G
                for k in 0..n {
                    let mp = m[(k, p)];
                    let mq = m[(k, q)];
                    m[(k, p)] = mp * g00 + mq * g10;
                    m[(k, q)] = mp * g01 + mq * g11;
                }
                // rows: M <- G^dagger M
                for k in 0..n {
                    let mp = m[(p, k)];
                    let mq = m[(q, k)];
                    m[(p, k)] = g00.conj() * mp + g10.conj() * mq;
                    m[(q, k)] = g01.conj() * mp + g11.conj() * mq;
                }
                // accumulate eigenvectors: V <- V G
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * g00 + vq * g10;
                    v[(k, q)] = vp * g01 + vq * g11;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).expect("finite eigenvalues"));

    let mut eigvals = Array1::zeros(n);
    let mut eigvecs = Array2::zeros((n, n));
    for (slot, &src) in order.iter().enumerate() {
        eigvals[slot] = vals[src];
        for k in 0..n {
            eigvecs[(k, slot)] = v[(k, src)];
        }
    }
    Ok((eigvals, eigvecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expm_diagonal() {
        let a = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-2.0, 0.0)]];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - 1f64.exp()).abs() < 1e-13);
        assert!((e[(1, 1)].re - (-2f64).exp()).abs() < 1e-13);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_pauli_x_rotation() {
        // exp(-i theta X) = cos(theta) I - i sin(theta) X
        let theta = 0.7;
        let a = array![
            [c(0.0, 0.0), c(0.0, -theta)],
            [c(0.0, -theta), c(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((e[(0, 1)].im + theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        let theta = 40.0;
        let a = array![
            [c(0.0, 0.0), c(0.0, -theta)],
            [c(0.0, -theta), c(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-11);
        assert!((e[(0, 1)].im + theta.sin()).abs() < 1e-11);
    }

    #[test]
    fn expm_of_skew_hermitian_is_unitary() {
        let h = array![
            [c(0.3, 0.0), c(0.2, 0.5), c(0.0, -0.1)],
            [c(0.2, -0.5), c(-1.0, 0.0), c(0.4, 0.0)],
            [c(0.0, 0.1), c(0.4, 0.0), c(2.2, 0.0)]
        ];
        let a = h.mapv(|z| z * c(0.0, -1.0));
        let u = expm(&a).unwrap();
        let udag = u.t().mapv(|z| z.conj());
        let prod = udag.dot(&u);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eigen_reconstructs_hermitian_matrix() {
        let h = array![
            [c(1.0, 0.0), c(0.2, 0.7), c(0.0, -0.3)],
            [c(0.2, -0.7), c(-0.5, 0.0), c(0.1, 0.1)],
            [c(0.0, 0.3), c(0.1, -0.1), c(0.8, 0.0)]
        ];
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        // H V = V diag(vals)
        for k in 0..3 {
            for i in 0..3 {
                let mut hv = c(0.0, 0.0);
                for j in 0..3 {
                    hv += h[(i, j)] * vecs[(j, k)];
                }
                assert!((hv - vecs[(i, k)] * vals[k]).norm() < 1e-12);
            }
        }
        // orthonormal columns
        for a in 0..3 {
            for b in 0..3 {
                let mut dot = c(0.0, 0.0);
                for i in 0..3 {
                    dot += vecs[(i, a)].conj() * vecs[(i, b)];
                }
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_keeps_exact_diagonals() {
        let h = array![
            [c(-3.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(4.0, 0.0)]
        ];
        let (vals, _) = hermitian_eigen(&h).unwrap();
        assert_eq!(vals[0], -3.0);
        assert_eq!(vals[1], 4.0);
    }

    #[test]
    fn solve_matches_direct_inverse() {
        let a = array![
            [c(2.0, 1.0), c(0.5, 0.0)],
            [c(0.0, -1.0), c(1.5, 0.2)]
        ];
        let b = Array2::eye(2);
        let x = solve(&a, &b).unwrap();
        let prod = a.dot(&x);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }
}
