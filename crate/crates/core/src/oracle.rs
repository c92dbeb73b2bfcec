//! Classical reference implementations.
//!
//! Nothing here shares code with the protocol builders: permutations are
//! generated by plain recursion and their signs come from counting
//! inversions.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{one, zero, Real};

/// Largest size for which [`det_ref`] uses the Leibniz sum.
pub const LEIBNIZ_MAX: usize = 8;
/// Largest size for which [`inv_ref`] and [`solve_ref`] use the adjugate.
pub const ADJUGATE_MAX: usize = 4;

pub fn matvec_ref<T: Real>(a: &ComplexMatrix<T>, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    if a.cols() != v.len() {
        return Err(Error::Shape(format!(
            "{}×{} matrix times {}-vector",
            a.rows(),
            a.cols(),
            v.len()
        )));
    }
    Ok((0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(v)
                .fold(zero(), |acc, (x, y)| acc + x * y)
        })
        .collect())
}

pub fn matmul_ref<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if a.cols() != b.rows() {
        return Err(Error::Shape(format!(
            "{}×{} times {}×{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).fold(zero(), |acc, l| acc + a[(i, l)] * b[(l, j)])
    }))
}

pub fn sum_ref<T: Real>(c: &ComplexMatrix<T>, d: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if c.rows() != d.rows() || c.cols() != d.cols() {
        return Err(Error::Shape(format!(
            "{}×{} plus {}×{}",
            c.rows(),
            c.cols(),
            d.rows(),
            d.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(c.rows(), c.cols(), |i, j| {
        c[(i, j)] + d[(i, j)]
    }))
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// `true` when the number of inversions is even.
fn is_even(p: &[usize]) -> bool {
    let mut inversions = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions.is_multiple_of(2)
}

fn require_square<T: Real>(e: &ComplexMatrix<T>) -> Result<()> {
    if e.is_square() {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{}×{} matrix is not square",
            e.rows(),
            e.cols()
        )))
    }
}

/// `Σ_σ sgn(σ) Π e_{i,σ(i)}`.
pub fn det_leibniz<T: Real>(e: &ComplexMatrix<T>) -> Result<Complex<T>> {
    require_square(e)?;
    let n = e.rows();
    let mut acc = zero();
    for p in permutations(n) {
        let term = p.iter().enumerate().fold(one(), |t, (i, &j)| t * e[(i, j)]);
        if is_even(&p) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Determinant by LU with partial pivoting.
pub fn det_lu<T: Real>(e: &ComplexMatrix<T>) -> Result<Complex<T>> {
    require_square(e)?;
    let n = e.rows();
    let mut a = e.clone();
    let mut det: Complex<T> = one();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| {
                a[(x, k)]
                    .norm()
                    .partial_cmp(&a[(y, k)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if a[(p, k)] == zero() {
            return Ok(zero());
        }
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    Ok(det)
}

/// Leibniz for `n ≤ LEIBNIZ_MAX`, LU beyond.
pub fn det_ref<T: Real>(e: &ComplexMatrix<T>) -> Result<Complex<T>> {
    require_square(e)?;
    if e.rows() <= LEIBNIZ_MAX {
        det_leibniz(e)
    } else {
        det_lu(e)
    }
}

fn minor<T: Real>(e: &ComplexMatrix<T>, skip_row: usize, skip_col: usize) -> ComplexMatrix<T> {
    let n = e.rows();
    let rows: Vec<usize> = (0..n).filter(|&i| i != skip_row).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| j != skip_col).collect();
    ComplexMatrix::from_fn(n - 1, n - 1, |i, j| e[(rows[i], cols[j])])
}

/// Signed minor `(−1)^{i+j} det(E without row i, column j)`.
pub fn cofactor<T: Real>(e: &ComplexMatrix<T>, i: usize, j: usize) -> Result<Complex<T>> {
    require_square(e)?;
    let m = det_ref(&minor(e, i, j))?;
    Ok(if (i + j).is_multiple_of(2) { m } else { -m })
}

fn check_nonsingular<T: Real>(det: Complex<T>) -> Result<()> {
    if det.norm() <= T::lit(T::SINGULAR_TOL) {
        Err(Error::Singular(format!("|det| = {:.3e}", det.norm())))
    } else {
        Ok(())
    }
}

fn gauss_jordan<T: Real>(e: &ComplexMatrix<T>, rhs: ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = e.rows();
    let m = rhs.cols();
    let mut a = e.clone();
    let mut b = rhs;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| {
                a[(x, k)]
                    .norm()
                    .partial_cmp(&a[(y, k)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if a[(p, k)].norm() <= T::lit(T::SINGULAR_TOL) {
            return Err(Error::Singular(format!("zero pivot in column {k}")));
        }
        a.swap_rows(p, k);
        b.swap_rows(p, k);
        let pivot = a[(k, k)];
        for j in 0..n {
            a[(k, j)] /= pivot;
        }
        for j in 0..m {
            b[(k, j)] /= pivot;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[(i, k)];
            if f == zero() {
                continue;
            }
            for j in 0..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
            for j in 0..m {
                let v = b[(k, j)];
                b[(i, j)] -= f * v;
            }
        }
    }
    Ok(b)
}

/// `E⁻¹` as adjugate over determinant for small `n`, Gauss-Jordan otherwise.
pub fn inv_ref<T: Real>(e: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    require_square(e)?;
    let n = e.rows();
    if n <= ADJUGATE_MAX {
        let det = det_ref(e)?;
        check_nonsingular(det)?;
        if n == 1 {
            return Ok(ComplexMatrix::from_fn(1, 1, |_, _| one::<T>() / det));
        }
        let mut inv = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // adjugate is the transposed cofactor matrix
                inv[(j, i)] = cofactor(e, i, j)? / det;
            }
        }
        Ok(inv)
    } else {
        gauss_jordan(e, ComplexMatrix::identity(n))
    }
}

/// Solution of `E x = b`.
pub fn solve_ref<T: Real>(e: &ComplexMatrix<T>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    require_square(e)?;
    if b.len() != e.rows() {
        return Err(Error::Shape(format!(
            "{}×{} system with {}-vector",
            e.rows(),
            e.cols(),
            b.len()
        )));
    }
    if e.rows() <= ADJUGATE_MAX {
        matvec_ref(&inv_ref(e)?, b)
    } else {
        Ok(gauss_jordan(e, ComplexMatrix::column(b.to_vec()))?
            .data()
            .to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn worked_e() -> ComplexMatrix<f64> {
        ComplexMatrix::from_real(&[&[0.75, 0.25], &[0.25, 0.75]]).unwrap()
    }

    fn close(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn pseudo_random(n: usize, seed: u64) -> ComplexMatrix<f64> {
        // small LCG keeps these tests free of the rand dependency
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(n, n, |_, _| Complex::new(next(), next()))
    }

    #[test]
    fn permutation_count_and_parity() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(3).iter().filter(|p| is_even(p)).count(), 3);
        assert!(!is_even(&[1, 0, 2]));
        assert!(is_even(&[1, 2, 0]));
    }

    #[test]
    fn identity_times_vector() {
        let v = vec![c(0.1), Complex::new(0.0, 0.3), c(-0.2)];
        assert_eq!(matvec_ref(&ComplexMatrix::identity(3), &v).unwrap(), v);
    }

    #[test]
    fn worked_system() {
        let h = 1.0 / 2f64.sqrt();
        let x = vec![c(h), c(h)];
        let b = matvec_ref(&worked_e(), &x).unwrap();
        assert!(close(b[0], c(h), 1e-15) && close(b[1], c(h), 1e-15));
        let sol = solve_ref(&worked_e(), &[c(h), c(h)]).unwrap();
        assert!(close(sol[0], c(h), 1e-14) && close(sol[1], c(h), 1e-14));
    }

    #[test]
    fn associativity() {
        let a = pseudo_random(3, 1);
        let b = pseudo_random(3, 2);
        let v = pseudo_random(3, 3).data()[..3].to_vec();
        let left = matvec_ref(&a, &matvec_ref(&b, &v).unwrap()).unwrap();
        let right = matvec_ref(&matmul_ref(&a, &b).unwrap(), &v).unwrap();
        for (l, r) in left.iter().zip(&right) {
            assert!(close(*l, *r, 1e-12));
        }
    }

    #[test]
    fn worked_determinant() {
        assert!(close(det_ref(&worked_e()).unwrap(), c(0.5), 1e-15));
    }

    #[test]
    fn triangular_determinant() {
        let u = ComplexMatrix::from_real(&[&[2.0, 5.0, -1.0], &[0.0, 3.0, 7.0], &[0.0, 0.0, -0.5]])
            .unwrap();
        assert!(close(det_ref(&u).unwrap(), c(-3.0), 1e-14));
    }

    #[test]
    fn leibniz_matches_lu() {
        for seed in 0..10 {
            let e = pseudo_random(4, seed);
            assert!(close(det_leibniz(&e).unwrap(), det_lu(&e).unwrap(), 1e-10));
        }
    }

    #[test]
    fn determinant_symmetries() {
        let e = pseudo_random(4, 7);
        let mut swapped = e.clone();
        swapped.swap_rows(0, 2);
        let d = det_ref(&e).unwrap();
        assert!(close(det_ref(&swapped).unwrap(), -d, 1e-12));
        assert!(close(det_ref(&e.transpose()).unwrap(), d, 1e-12));
    }

    #[test]
    fn worked_inverse() {
        let inv = inv_ref(&worked_e()).unwrap();
        let want = ComplexMatrix::from_real(&[&[1.5, -0.5], &[-0.5, 1.5]]).unwrap();
        assert!(inv.max_abs_diff(&want).unwrap() < 1e-14);
        let prod = matmul_ref(&worked_e(), &inv).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-14);
    }

    #[test]
    fn identity_inverse() {
        let i3 = ComplexMatrix::<f64>::identity(3);
        assert_eq!(inv_ref(&i3).unwrap(), i3);
    }

    #[test]
    fn random_inverse_residual() {
        for seed in 10..20 {
            let e = pseudo_random(3, seed);
            if det_ref(&e).unwrap().norm() < 1e-3 {
                continue;
            }
            let prod = matmul_ref(&e, &inv_ref(&e).unwrap()).unwrap();
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(3)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn elimination_path_for_large_systems() {
        let e = pseudo_random(6, 42);
        let inv = inv_ref(&e).unwrap();
        let prod = matmul_ref(&e, &inv).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(6)).unwrap() < 1e-10);
        let b: Vec<_> = (0..6).map(|i| c(i as f64)).collect();
        let x = solve_ref(&e, &b).unwrap();
        let r = matvec_ref(&e, &x).unwrap();
        for (ri, bi) in r.iter().zip(&b) {
            assert!(close(*ri, *bi, 1e-10));
        }
        let big = pseudo_random(9, 3);
        assert!(close(det_ref(&big).unwrap(), det_lu(&big).unwrap(), 1e-12));
    }

    #[test]
    fn singular_and_shape_errors() {
        let s: ComplexMatrix<f64> =
            ComplexMatrix::from_real(&[&[0.5, 0.25], &[0.5, 0.25]]).unwrap();
        assert!(matches!(inv_ref(&s), Err(Error::Singular(_))));
        let r = ComplexMatrix::<f64>::zeros(2, 3);
        assert!(matches!(det_ref(&r), Err(Error::Shape(_))));
        assert!(matmul_ref(&r, &r).is_err());
        assert!(sum_ref(&r, &ComplexMatrix::zeros(3, 2)).is_err());
    }
}
