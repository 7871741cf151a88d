//! Small dense linear-algebra helpers shared across modules.
//!
//! Everything here is a thin policy layer over nalgebra: rank decisions with a
//! relative tolerance, orthonormal bases of null spaces and complements, and
//! minimal-norm least squares. Matrices are small (at most a few hundred rows
//! or columns), so SVD-based robustness is preferred over speed everywhere.

use nalgebra::{DMatrix, DVector};

/// Singular values of `a`, sorted in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Numerical rank given descending singular values and a relative tolerance.
pub fn rank_from_singulars(sv: &[f64], rel_tol: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormalize the columns of `cols` by modified Gram-Schmidt with
/// re-orthogonalization, dropping columns whose residual is below
/// `1e-12 * (largest column norm)`. Returns an `n x r` matrix with
/// orthonormal columns spanning the same space.
pub fn orthonormalize(cols: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cols.nrows();
    let scale = (0..cols.ncols())
        .map(|j| cols.column(j).norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut q: Vec<DVector<f64>> = Vec::new();
    for j in 0..cols.ncols() {
        let mut r = cols.column(j).clone_owned();
        for _ in 0..2 {
            for u in &q {
                let c = u.dot(&r);
                r -= u * c;
            }
        }
        let nrm = r.norm();
        if nrm > 1e-12 * scale {
            q.push(r / nrm);
        }
    }
    from_columns(n, &q)
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `cols` in Euclidean `R^n`. The input columns need not be orthonormal.
/// Deterministic, via Householder QR of the orthonormalized input: the
/// reflectors that triangularize the basis are applied to the trailing
/// standard basis vectors, whose images are exactly orthogonal to the
/// span. Costs `O(n^2 r)` for an `n x r` input.
pub fn orthonormal_complement(cols: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cols.nrows();
    let mut base = orthonormalize(cols);
    let r = base.ncols();
    if r == 0 {
        return DMatrix::identity(n, n);
    }
    // Householder vectors v_k (supported on rows k..n) with
    // H_k = I − 2 v_k v_k^T and H_{r−1}·…·H_0·base upper triangular.
    let mut reflectors: Vec<DVector<f64>> = Vec::with_capacity(r);
    for k in 0..r {
        let mut v = DVector::<f64>::zeros(n);
        for i in k..n {
            v[i] = base[(i, k)];
        }
        let norm = v.norm();
        let sign = if v[k] >= 0.0 { 1.0 } else { -1.0 };
        v[k] += sign * norm;
        let vn = v.norm();
        if vn > 0.0 {
            v /= vn;
        }
        for j in k..r {
            let c = 2.0 * v.dot(&base.column(j));
            for i in k..n {
                base[(i, j)] -= c * v[i];
            }
        }
        reflectors.push(v);
    }
    let mut comp = DMatrix::<f64>::zeros(n, n - r);
    for j in r..n {
        let mut w = DVector::<f64>::zeros(n);
        w[j] = 1.0;
        for v in reflectors.iter().rev() {
            let c = 2.0 * v.dot(&w);
            w -= v * c;
        }
        comp.set_column(j - r, &w);
    }
    comp
}

/// Orthonormal basis (as columns in `R^ncols`) of the row space of `a`:
/// right-singular vectors with singular value above `rel_tol * σ_max`.
pub fn row_space_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut keep: Vec<DVector<f64>> = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && s > rel_tol * smax {
            keep.push(vt.row(i).transpose());
        }
    }
    from_columns(a.ncols(), &keep)
}

/// Orthonormal basis of the (right) null space of `a` at the relative rank
/// tolerance, as columns in `R^ncols`. Works for wide matrices, where the
/// thin SVD alone does not expose the null space.
pub fn null_space_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    orthonormal_complement(&row_space_basis(a, rel_tol))
}

/// Orthonormal basis of the left null space of `a` (null space of the
/// transpose) at the relative rank tolerance, as columns in `R^nrows`.
pub fn left_null_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut keep: Vec<DVector<f64>> = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && s > rel_tol * smax {
            keep.push(u.column(i).clone_owned());
        }
    }
    orthonormal_complement(&from_columns(a.nrows(), &keep))
}

/// Euclidean orthogonal projection of `x` onto the null space of `a`.
pub fn project_onto_null(a: &DMatrix<f64>, x: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let rows = row_space_basis(a, rel_tol);
    let mut r = x.clone();
    for _ in 0..2 {
        for j in 0..rows.ncols() {
            let u = rows.column(j);
            let c = u.dot(&r);
            r -= u * c;
        }
    }
    r
}

/// Minimal-norm least-squares solution of `a y = b` via SVD with a relative
/// singular-value cutoff.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let eps = (rel_tol * smax).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("svd solve with u and v computed")
}

/// Residual `|a y - b|` of the minimal-norm least-squares solution;
/// convenience for tangency checks.
pub fn lstsq_residual(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> f64 {
    let y = lstsq(a, b, rel_tol);
    (a * y - b).norm()
}

/// Count `(negative, zero, positive)` eigenvalues with the zero band defined
/// relative to the largest magnitude: `|e| <= rel_zero * max|e|`.
pub fn inertia_counts(eigs: &[f64], rel_zero: f64) -> (usize, usize, usize) {
    let scale = eigs.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    if scale == 0.0 {
        return (0, eigs.len(), 0);
    }
    let band = rel_zero * scale;
    let mut neg = 0;
    let mut zero = 0;
    let mut pos = 0;
    for &e in eigs {
        if e < -band {
            neg += 1;
        } else if e > band {
            pos += 1;
        } else {
            zero += 1;
        }
    }
    (neg, zero, pos)
}

/// Count eigenvalues of a symmetric matrix strictly below `-band` without a
/// full eigendecomposition.
///
/// The matrix is reduced to symmetric tridiagonal form by Householder
/// similarity transforms, then a Sturm-sequence pivot recurrence at the shift
/// `-band` counts the crossings. This costs a fraction of an eigensolve and is
/// what index-counting scans use; callers that need the eigenvalues themselves
/// should use a full decomposition instead. `band >= 0` plays the role of the
/// zero band: eigenvalues inside `[-band, band]` are not counted as negative.
pub fn negative_count_sym(r: &DMatrix<f64>, band: f64) -> usize {
    let n = r.nrows();
    assert_eq!(n, r.ncols(), "negative_count_sym needs a square matrix");
    if n == 0 {
        return 0;
    }
    if n == 1 {
        return usize::from(r[(0, 0)] < -band);
    }
    let tri = nalgebra::linalg::SymmetricTridiagonal::new(r.clone());
    let diag = tri.diagonal();
    let off = tri.off_diagonal();
    // Sturm slicing for T + band*I: the number of negative pivots in the
    // LDL^T recurrence equals the number of eigenvalues below -band.
    let scale = (0..n)
        .map(|i| diag[i].abs() + if i + 1 < n { off[i].abs() } else { 0.0 })
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let tiny = f64::EPSILON * scale;
    let mut count = 0;
    let mut d = diag[0] + band;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let mut prev = d;
        if prev.abs() < tiny {
            prev = if prev < 0.0 { -tiny } else { tiny };
        }
        d = diag[i] + band - off[i - 1] * off[i - 1] / prev;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Assemble a matrix from column vectors; an empty list yields an `n x 0`
/// matrix.
pub fn from_columns(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_dimensions_and_orthogonality() {
        let a = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let c = orthonormal_complement(&a);
        assert_eq!(c.ncols(), 2);
        for j in 0..c.ncols() {
            assert!((c.column(j).norm() - 1.0).abs() < 1e-12);
            for i in 0..a.ncols() {
                assert!(c.column(j).dot(&a.column(i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        // 2 x 5 matrix of rank 2: null space has dimension 3.
        let a = DMatrix::from_row_slice(2, 5, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let nsb = null_space_basis(&a, 1e-12);
        assert_eq!(nsb.ncols(), 3);
        let prod = &a * &nsb;
        assert!(prod.amax() < 1e-12);
    }

    #[test]
    fn left_null_detects_dependent_row() {
        let a = DMatrix::from_row_slice(3, 4, &[
            1.0, 2.0, 3.0, 4.0, //
            2.0, 4.0, 6.0, 8.0, //
            0.0, 1.0, 0.0, 1.0,
        ]);
        let ln = left_null_basis(&a, 1e-10);
        assert_eq!(ln.ncols(), 1);
        let r = ln.transpose() * &a;
        assert!(r.amax() < 1e-10);
    }

    #[test]
    fn inertia_counting_with_relative_band() {
        let eigs = [3.0, -1.0, 1e-9, 2e-7];
        let (n, z, p) = inertia_counts(&eigs, 1e-6);
        assert_eq!((n, z, p), (1, 2, 1));
    }

    #[test]
    fn lstsq_minimal_norm() {
        // Underdetermined: pick the minimal-norm solution.
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let y = lstsq(&a, &DVector::from_column_slice(&[2.0]), 1e-12);
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sturm_count_agrees_with_eigenvalues() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [1_usize, 2, 5, 17, 40] {
            let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let sym = (&raw + raw.transpose()) * 0.5;
            let eigs = sym.clone().symmetric_eigen().eigenvalues;
            for band in [0.0, 1e-9, 0.3] {
                let expected = eigs.iter().filter(|&&e| e < -band).count();
                assert_eq!(negative_count_sym(&sym, band), expected, "n={n} band={band}");
            }
        }
    }
}
