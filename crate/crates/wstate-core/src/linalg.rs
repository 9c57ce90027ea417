//! Dense complex linear-algebra helpers behind the propagator oracle and the
//! validation checks: Kronecker products, scaling-and-squaring matrix
//! exponential, Hermitian eigenvalue wrappers.
//!
//! Everything here works on the small matrices of this problem (basis
//! dimensions of a few tens at most); none of it is tuned for large systems.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Inverse, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|v| v.conj())
}

/// Maximum absolute column sum.
pub fn one_norm(a: &Array2<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::<C64>::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
            block.zip_mut_with(b, |o, &bv| *o = aij * bv);
        }
    }
    out
}

// Padé coefficient tables and 1-norm thresholds for degrees 3, 5, 7, 9, 13
// (Higham, "The scaling and squaring method for the matrix exponential
// revisited").
const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
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
        _ => unreachable!("unsupported Padé degree"),
    }
}

fn scaled_add(acc: &mut Array2<C64>, m: &Array2<C64>, c: f64) {
    let c = C64::new(c, 0.0);
    acc.zip_mut_with(m, |a, &v| *a += c * v);
}

/// Matrix exponential exp(A) by diagonal Padé approximation with scaling and
/// squaring; the Padé degree is picked from the 1-norm of `A`.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let dim = a.nrows();
    if a.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: a.ncols(),
        });
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Linalg("matrix exponential of a non-finite matrix".into()));
    }
    let (degree, squarings) = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some((m, _)) => (*m, 0u32),
        None => {
            let theta13 = THETA[4].1;
            (13, (norm / theta13).log2().ceil().max(0.0) as u32)
        }
    };
    let scale = C64::new(2f64.powi(-(squarings as i32)), 0.0);
    let a = a.mapv(|v| v * scale);
    let b = pade_coefficients(degree);
    let eye = Array2::<C64>::eye(dim);
    let a2 = a.dot(&a);

    // U = A·(odd-coefficient polynomial in A²), V = even-coefficient polynomial.
    let (u, v) = if degree == 13 {
        let a4 = a2.dot(&a2);
        let a6 = a2.dot(&a4);
        let mut w1 = Array2::<C64>::zeros((dim, dim));
        scaled_add(&mut w1, &a6, b[13]);
        scaled_add(&mut w1, &a4, b[11]);
        scaled_add(&mut w1, &a2, b[9]);
        let mut w2 = a6.dot(&w1);
        scaled_add(&mut w2, &a6, b[7]);
        scaled_add(&mut w2, &a4, b[5]);
        scaled_add(&mut w2, &a2, b[3]);
        scaled_add(&mut w2, &eye, b[1]);
        let u = a.dot(&w2);

        let mut z1 = Array2::<C64>::zeros((dim, dim));
        scaled_add(&mut z1, &a6, b[12]);
        scaled_add(&mut z1, &a4, b[10]);
        scaled_add(&mut z1, &a2, b[8]);
        let mut v = a6.dot(&z1);
        scaled_add(&mut v, &a6, b[6]);
        scaled_add(&mut v, &a4, b[4]);
        scaled_add(&mut v, &a2, b[2]);
        scaled_add(&mut v, &eye, b[0]);
        (u, v)
    } else {
        // Powers A², A⁴, … as needed for the lower degrees.
        let mut powers = vec![eye.clone(), a2.clone()];
        while powers.len() <= degree / 2 {
            let next = powers.last().expect("non-empty").dot(&a2);
            powers.push(next);
        }
        let mut u_inner = Array2::<C64>::zeros((dim, dim));
        let mut v = Array2::<C64>::zeros((dim, dim));
        for (k, power) in powers.iter().enumerate() {
            scaled_add(&mut u_inner, power, b[2 * k + 1]);
            scaled_add(&mut v, power, b[2 * k]);
        }
        (a.dot(&u_inner), v)
    };

    let denom = &v - &u;
    let numer = &v + &u;
    let inv = denom
        .inv()
        .map_err(|e| Error::Linalg(format!("Padé denominator solve failed: {e}")))?;
    let mut r = inv.dot(&numer);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and a
/// matrix whose **columns** are the eigenvectors, so that H = V·diag(λ)·V†.
///
/// The backend returns eigenvectors for the conjugated matrix on row-major
/// Hermitian input; this wrapper folds that conjugation back in so callers
/// get the textbook convention (pinned by a unit test).
pub fn eigh_hermitian(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("hermitian eigendecomposition failed: {e}")))?;
    Ok((vals, vecs.mapv(|v| v.conj())))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(h: &Array2<C64>) -> Result<Array1<f64>> {
    Ok(eigh_hermitian(h)?.0)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &Array2<C64>) -> Result<f64> {
    let vals = eigvalsh(h)?;
    Ok(vals[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_matches_hand_computation() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(0.0, 0.0), c(3.0, 0.0)]];
        let b = array![[c(0.0, 1.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[[0, 0]], c(0.0, 1.0));
        assert_eq!(k[[0, 2]], c(0.0, 2.0));
        assert_eq!(k[[1, 0]], c(1.0, 0.0));
        assert_eq!(k[[3, 2]], c(3.0, 0.0));
        assert_eq!(k[[2, 0]], c(0.0, 0.0));
    }

    #[test]
    fn expm_of_diagonal_is_elementwise_exp() {
        let a = Array2::from_diag(&array![c(0.3, 0.0), c(-1.2, 0.5)]);
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]] - c(0.3, 0.0).exp()).norm() < 1e-14);
        assert!((e[[1, 1]] - c(-1.2, 0.5).exp()).norm() < 1e-14);
        assert!(e[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn expm_of_nilpotent_truncates_exactly() {
        let a = array![[c(0.0, 0.0), c(2.5, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[[0, 0]].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[[0, 1]].re, 2.5, epsilon = 1e-13);
        assert_abs_diff_eq!(e[[1, 1]].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn expm_of_rotation_generator_gives_sine_cosine() {
        // Large-angle case exercises the squaring path.
        let theta = 7.3;
        let a = array![[c(0.0, 0.0), c(-theta, 0.0)], [c(theta, 0.0), c(0.0, 0.0)]];
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[[0, 0]].re, theta.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(e[[1, 0]].re, theta.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(e[[0, 1]].re, -theta.sin(), epsilon = 1e-12);
    }

    #[test]
    fn eigh_hermitian_returns_column_eigenvectors() {
        let h = ndarray::array![
            [c(1.0, 0.0), c(0.3, 0.4)],
            [c(0.3, -0.4), c(-0.5, 0.0)]
        ];
        let (vals, vecs) = eigh_hermitian(&h).unwrap();
        for k in 0..2 {
            let v = vecs.column(k).to_owned();
            let hv = h.dot(&v);
            for (a, b) in hv.iter().zip(v.iter()) {
                assert!((a - b * c(vals[k], 0.0)).norm() < 1e-13);
            }
        }
        // Reconstruction H = V·Λ·V†.
        let lam = Array2::from_diag(&vals.mapv(|l| c(l, 0.0)));
        let rebuilt = vecs.dot(&lam).dot(&adjoint(&vecs));
        for (a, b) in rebuilt.iter().zip(h.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_agrees_with_hermitian_eigendecomposition() {
        // exp(−iH) for random Hermitian H via the Padé route must match the
        // spectral route.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let dim = 5;
            let mut h = Array2::<C64>::zeros((dim, dim));
            for i in 0..dim {
                h[[i, i]] = c(rng.random_range(-2.0..2.0), 0.0);
                for j in (i + 1)..dim {
                    let v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    h[[i, j]] = v;
                    h[[j, i]] = v.conj();
                }
            }
            let (vals, vecs) = eigh_hermitian(&h).unwrap();
            let phases = Array2::from_diag(&vals.mapv(|l| c(0.0, -l).exp()));
            let spectral = vecs.dot(&phases).dot(&adjoint(&vecs));
            let a = h.mapv(|v| v * c(0.0, -1.0));
            let pade = expm(&a).unwrap();
            for (x, y) in spectral.iter().zip(pade.iter()) {
                assert!((x - y).norm() < 1e-12, "spectral {x} vs padé {y}");
            }
        }
    }

    #[test]
    fn eigvalsh_orders_ascending() {
        let h = array![
            [c(0.0, 0.0), c(0.5, 0.0)],
            [c(0.5, 0.0), c(0.0, 0.0)]
        ];
        let vals = eigvalsh(&h).unwrap();
        assert_abs_diff_eq!(vals[0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(min_eigenvalue(&h).unwrap(), -0.5, epsilon = 1e-14);
    }
}
