//! Dense complex linear algebra and scalar root finding.
//!
//! Everything here is small and direct: the matrices involved have at most a
//! few thousand rows and the transforms a few hundred points.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_vec(n_rows, n_cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Plain (non-conjugating) transpose.
    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)]);
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    /// Returns `I - alpha * self`.
    pub fn identity_minus_scaled(&self, alpha: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "I - aM needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let mut out = self.clone();
        identity_minus_scaled_into(&self.data, self.rows, alpha, &mut out.data);
        Ok(out)
    }

    pub fn det(&self) -> Result<Complex64> {
        lu_det(self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Writes `I - alpha * src` (both `n x n`, row-major) into `dst`.
pub(crate) fn identity_minus_scaled_into(
    src: &[Complex64],
    n: usize,
    alpha: f64,
    dst: &mut [Complex64],
) {
    for (k, (d, s)) in dst.iter_mut().zip(src).enumerate() {
        *d = -*s * alpha;
        if k % (n + 1) == 0 {
            *d += 1.0;
        }
    }
}

/// Determinant by LU factorization with partial pivoting on the largest
/// modulus in each column.
///
/// A column with no non-zero pivot candidate yields exactly zero.
pub fn lu_det(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if let Some(bad) = m.data.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite matrix entry {bad}")));
    }
    let mut work = m.data.clone();
    Ok(det_in_place(&mut work, m.rows))
}

/// LU determinant on a scratch buffer; the buffer is overwritten.
pub(crate) fn det_in_place(a: &mut [Complex64], n: usize) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = a[k * n + k].norm_sqr();
        for i in k + 1..n {
            let mag = a[i * n + k].norm_sqr();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != k {
            for j in k..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        let inv = pivot.inv();
        let (upper, lower) = a.split_at_mut((k + 1) * n);
        let pivot_tail = &upper[k * n + k + 1..k * n + n];
        for row in lower.chunks_exact_mut(n) {
            let factor = row[k] * inv;
            if factor.re == 0.0 && factor.im == 0.0 {
                continue;
            }
            for (x, p) in row[k + 1..].iter_mut().zip(pivot_tail) {
                *x -= factor * p;
            }
        }
    }
    det
}

/// Direct discrete Fourier transform, `out[n] = sum_i v[i] exp(-j 2 pi i n / N)`.
pub fn dft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    transform(v, -1.0)
}

/// Inverse of [`dft`], including the `1/N` normalization.
pub fn idft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = v.len() as f64;
    Ok(transform(v, 1.0)?.into_iter().map(|z| z / n).collect())
}

fn transform(v: &[Complex64], sign: f64) -> Result<Vec<Complex64>> {
    let n = v.len();
    if n == 0 {
        return Err(Error::InvalidInput("transform of an empty vector".into()));
    }
    Ok((0..n)
        .map(|bin| {
            v.iter()
                .enumerate()
                .map(|(i, &x)| {
                    // reduce i*bin mod n first so the angle stays small
                    let angle = sign * 2.0 * PI * ((i * bin) % n) as f64 / n as f64;
                    x * Complex64::from_polar(1.0, angle)
                })
                .sum()
        })
        .collect())
}

/// Bisection for a root of `f` on `[lo, hi]`.
///
/// Requires a strict sign change across the bracket. Stops when the bracket is
/// no wider than `tol` (or an exact zero is hit) and returns its midpoint.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval at floating-point resolution
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Laplace expansion along the first row; exponential, test-only.
    fn cofactor_det(m: &[Vec<Complex64>]) -> Complex64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        let mut total = c(0.0, 0.0);
        for j in 0..n {
            let minor: Vec<Vec<Complex64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, z)| *z).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += m[0][j] * sign * cofactor_det(&minor);
        }
        total
    }

    fn unit_disc_matrix(rng: &mut impl Rng, n: usize) -> Vec<Vec<Complex64>> {
        (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI)))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn det_of_identity_is_one() {
        let d = lu_det(&ComplexMatrix::identity(3).unwrap()).unwrap();
        assert_eq!(d, c(1.0, 0.0));
    }

    #[test]
    fn det_two_by_two_closed_form() {
        let a = c(0.0, 0.5);
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), a], vec![a, c(1.0, 0.0)]]).unwrap();
        let d = lu_det(&m).unwrap();
        assert!((d - c(1.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn det_random_three_by_three_matches_cofactor() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rows = unit_disc_matrix(&mut rng, 3);
            let want = cofactor_det(&rows);
            let got = lu_det(&ComplexMatrix::from_rows(&rows).unwrap()).unwrap();
            assert!((got - want).norm() <= 1e-10 * want.norm(), "{got} vs {want}");
        }
    }

    #[test]
    fn det_zero_pivot_column_is_exactly_zero() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 2.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(lu_det(&m).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn det_rejects_non_square_and_non_finite() {
        let m = ComplexMatrix::zeros(2, 3).unwrap();
        assert!(matches!(lu_det(&m), Err(Error::Dimension(_))));
        let mut m = ComplexMatrix::identity(2).unwrap();
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(lu_det(&m), Err(Error::InvalidInput(_))));
        m[(0, 1)] = c(0.0, f64::INFINITY);
        assert!(matches!(lu_det(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn from_vec_checks_entry_count() {
        assert!(ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::zeros(0, 2).is_err());
    }

    #[test]
    fn identity_minus_scaled_matches_definition() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 1.0)], vec![c(2.0, 0.0), c(0.5, 0.0)]])
            .unwrap();
        let out = m.identity_minus_scaled(2.0).unwrap();
        assert_eq!(out[(0, 0)], c(1.0, 0.0));
        assert_eq!(out[(0, 1)], c(-2.0, -2.0));
        assert_eq!(out[(1, 0)], c(-4.0, 0.0));
        assert_eq!(out[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn dft_of_delta_is_all_ones() {
        let out = dft(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        for z in out {
            assert!((z - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dft_of_constant_is_dc_bin() {
        let k = c(0.3, -1.2);
        let out = dft(&[k, k, k]).unwrap();
        assert!((out[0] - k * 3.0).norm() < 1e-12);
        assert!(out[1].norm() < 1e-12);
        assert!(out[2].norm() < 1e-12);
    }

    #[test]
    fn dft_of_symmetric_three_point_vector() {
        let out = dft(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let want = [2.0, -1.0, -1.0];
        for (z, w) in out.iter().zip(want) {
            assert!((z - c(w, 0.0)).norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn dft_rejects_empty() {
        assert!(matches!(dft(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bisect_linear_and_quadratic() {
        let x = bisect(|x| x - 2.0, 0.0, 4.0, 1e-9).unwrap();
        assert!((x - 2.0).abs() <= 1e-9);
        let x = bisect(|x| x * x - 0.25, 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn bisect_cosine_root() {
        let tol = 1e-10;
        let x = bisect(f64::cos, 1.0, 2.0, tol).unwrap();
        assert!((x - PI / 2.0).abs() <= tol);
    }

    #[test]
    fn bisect_requires_sign_change() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
        assert!(bisect(|x| x, 1.0, 0.0, 1e-6).is_err());
        assert!(bisect(|x| x, -1.0, 1.0, 0.0).is_err());
    }

    fn arb_matrix(max_n: usize) -> impl Strategy<Value = Vec<Vec<Complex64>>> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(
                proptest::collection::vec((0.0f64..1.0, 0.0f64..(2.0 * PI)), n),
                n,
            )
            .prop_map(|rows| {
                rows.into_iter()
                    .map(|r| r.into_iter().map(|(m, a)| Complex64::from_polar(m, a)).collect())
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn lu_matches_cofactor_expansion(rows in arb_matrix(4)) {
            let want = cofactor_det(&rows);
            let got = lu_det(&ComplexMatrix::from_rows(&rows).unwrap()).unwrap();
            let scale = want.norm().max(1e-300);
            prop_assert!((got - want).norm() <= 1e-9 * scale || (got - want).norm() < 1e-14);
        }

        #[test]
        fn row_permutation_flips_sign_by_parity(rows in arb_matrix(4), seed in any::<u64>()) {
            let n = rows.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut parity = 1.0;
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                if i != j {
                    perm.swap(i, j);
                    parity = -parity;
                }
            }
            let permuted: Vec<Vec<Complex64>> = perm.iter().map(|&p| rows[p].clone()).collect();
            let d = lu_det(&ComplexMatrix::from_rows(&rows).unwrap()).unwrap();
            let dp = lu_det(&ComplexMatrix::from_rows(&permuted).unwrap()).unwrap();
            prop_assert!((dp - d * parity).norm() <= 1e-9 * d.norm().max(1e-12));
        }

        #[test]
        fn dft_inverse_round_trip(v in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..64)) {
            let v: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
            let back = idft(&dft(&v).unwrap()).unwrap();
            for (x, y) in v.iter().zip(&back) {
                prop_assert!((x - y).norm() < 1e-10);
            }
        }
    }
}
