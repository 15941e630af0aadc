use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Absolute pivot magnitude below which a system is reported singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// Intended for the strictly diagonally dominant / SPD systems that arise
/// from harmonic label propagation, but any non-singular square system works.
pub fn solve_dd(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {n} rows",
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Array1::zeros(0));
    }
    ensure_finite(a.iter(), "solve_dd matrix")?;
    ensure_finite(b.iter(), "solve_dd right-hand side")?;

    let mut m = a.to_owned();
    let mut x = b.to_owned();
    for k in 0..n {
        let (piv_row, piv_abs) = (k..n)
            .map(|r| (r, m[[r, k]].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs < SINGULAR_PIVOT {
            return Err(Error::Singular { row: k, pivot: piv_abs, threshold: SINGULAR_PIVOT });
        }
        if piv_row != k {
            for c in 0..n {
                m.swap([k, c], [piv_row, c]);
            }
            x.swap(k, piv_row);
        }
        let pivot = m[[k, k]];
        for r in (k + 1)..n {
            let factor = m[[r, k]] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[[r, k]] = 0.0;
            for c in (k + 1)..n {
                m[[r, c]] -= factor * m[[k, c]];
            }
            x[r] -= factor * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for c in (k + 1)..n {
            acc -= m[[k, c]] * x[c];
        }
        x[k] = acc / m[[k, k]];
    }
    Ok(x)
}

/// Squared Euclidean distances between all rows of `x`.
pub fn pairwise_sq_distances(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        let xi = x.row(i);
        for j in (i + 1)..n {
            let d: f64 = xi.iter().zip(x.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            out[[i, j]] = d;
            out[[j, i]] = d;
        }
    }
    out
}

/// Strict upper-triangle entries (`i < j`) in row-major order.
pub fn upper_triangle(m: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..m.ncols() {
            v.push(m[[i, j]]);
        }
    }
    v
}

/// Median of a non-empty sample; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
/// Eigenvectors are the columns of the returned matrix.
pub fn symmetric_eigen(m: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("eigen input is {}x{}", n, m.ncols())));
    }
    ensure_finite(m.iter(), "eigen input")?;
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (m[[i, j]] + m[[j, i]]));
    let eig = nalgebra::SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = Array1::from_iter(order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = Array2::from_shape_fn((n, n), |(i, c)| eig.eigenvectors[(i, order[c])]);
    Ok((values, vectors))
}

pub fn ensure_finite<'a>(values: impl IntoIterator<Item = &'a f64>, what: &str) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomStream;
    use ndarray::{array, Array2};

    fn residual(a: &Array2<f64>, x: &Array1<f64>, b: &Array1<f64>) -> f64 {
        (a.dot(x) - b).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn identity_system() {
        let a = Array2::eye(3);
        let b = array![1.0, 2.0, 3.0];
        assert_eq!(solve_dd(a.view(), b.view()).unwrap(), b);
    }

    #[test]
    fn two_by_two_hand_solution() {
        let a = array![[2.0, -1.0], [-1.0, 2.0]];
        let x = solve_dd(a.view(), array![1.0, 1.0].view()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_is_singular() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        match solve_dd(a.view(), array![1.0, 0.0].view()) {
            Err(Error::Singular { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        let a = Array2::<f64>::zeros((2, 3));
        assert!(matches!(
            solve_dd(a.view(), array![1.0, 2.0].view()),
            Err(Error::DimensionMismatch(_))
        ));
        let a = Array2::<f64>::eye(2);
        assert!(matches!(
            solve_dd(a.view(), array![1.0].view()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn random_diagonally_dominant_systems() {
        let mut s = RandomStream::new(42);
        for trial in 0..1000 {
            let n = 1 + trial % 50;
            let mut a = Array2::zeros((n, n));
            for i in 0..n {
                let mut off = 0.0;
                for j in 0..n {
                    if i != j {
                        let v = s.uniform(-1.0, 1.0).unwrap();
                        a[[i, j]] = v;
                        off += v.abs();
                    }
                }
                let sign = if s.next_f64() < 0.5 { -1.0 } else { 1.0 };
                a[[i, i]] = sign * (off + s.uniform(0.1, 2.0).unwrap());
            }
            let b = Array1::from_shape_fn(n, |_| s.uniform(-10.0, 10.0).unwrap());
            let x = solve_dd(a.view(), b.view()).unwrap();
            let bound = 1e-9 * (1.0 + b.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
            assert!(residual(&a, &x, &b) <= bound, "trial {trial}");
        }
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = array![[2.0, 0.0], [0.0, 5.0]];
        let (vals, vecs) = symmetric_eigen(m.view()).unwrap();
        assert!((vals[0] - 5.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        assert!((vecs[[1, 0]].abs() - 1.0).abs() < 1e-12);
    }
}
