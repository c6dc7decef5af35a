//! Exact phases on roots of unity, exponent grids, and the tolerance-aware
//! complex containers used to verify them.
//!
//! A generator matrix is carried exactly as a grid of exponents of a root of
//! unity. Complex values are only produced on demand, for verification.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comparison tolerance for all floating-point checks.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-9);

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 && eps < 1e-3 {
            Ok(Tolerance(eps))
        } else {
            Err(Error::InvalidTolerance(eps))
        }
    }

    #[inline]
    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.0)
    }
}

/// `ω_L^exp` with `ω_L = e^{2πi/L}`; the exponent is always reduced mod `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootExponent {
    order: u32,
    exp: u32,
}

impl RootExponent {
    pub fn new(order: u32, exp: i64) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        Ok(Self { order, exp: exp.rem_euclid(order as i64) as u32 })
    }

    pub fn one(order: u32) -> Result<Self> {
        Self::new(order, 0)
    }

    pub fn order(self) -> u32 {
        self.order
    }

    pub fn exp(self) -> u32 {
        self.exp
    }

    /// Product of two roots of the same order.
    pub fn mul(self, other: Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::DimensionMismatch {
                left: self.order as usize,
                right: other.order as usize,
            });
        }
        Ok(Self { order: self.order, exp: (self.exp + other.exp) % self.order })
    }

    pub fn inverse(self) -> Self {
        Self { order: self.order, exp: (self.order - self.exp) % self.order }
    }

    pub fn value(self) -> Complex64 {
        unit_root(self.order, self.exp)
    }
}

impl fmt::Display for RootExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}^{}", self.order, self.exp)
    }
}

/// `e^{2πi·e/L}` with the exponent reduced mod `L` first.
pub fn root_value(order: u32, exp: i64) -> Result<Complex64> {
    Ok(RootExponent::new(order, exp)?.value())
}

// Quarter turns are returned exactly so that ±1 and ±i carry no rounding.
fn unit_root(order: u32, exp: u32) -> Complex64 {
    let (order, exp) = (order as u64, exp as u64);
    if (4 * exp) % order == 0 {
        return match (4 * exp / order) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let angle = TAU * exp as f64 / order as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// `1/√d`, correctly rounded for `d = 2`.
#[inline]
pub(crate) fn inv_sqrt(d: usize) -> f64 {
    (1.0 / d as f64).sqrt()
}

/// A `d×d` grid of exponents of `ω_L`; entry `(k, j)` stands for `ω_L^e / √d`.
///
/// Generators built by [`crate::chargroup`] always use `L = d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentMatrix {
    dim: usize,
    order: u32,
    entries: Vec<u32>,
}

impl ExponentMatrix {
    /// Builds a grid from rows, reducing every entry mod `order`.
    pub fn from_rows<R, T>(order: u32, rows: R) -> Result<Self>
    where
        R: IntoIterator<Item = T>,
        T: AsRef<[i64]>,
    {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        let rows: Vec<T> = rows.into_iter().collect();
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionTooSmall { got: 0, min: 1 });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::NotSquare { rows: dim, cols: row.len() });
            }
            entries.extend(row.iter().map(|&e| e.rem_euclid(order as i64) as u32));
        }
        Ok(Self { dim, order, entries })
    }

    /// Builds a grid from a function of `(row, col)`.
    pub fn from_fn(dim: usize, order: u32, mut f: impl FnMut(usize, usize) -> i64) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        if dim == 0 {
            return Err(Error::DimensionTooSmall { got: 0, min: 1 });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c).rem_euclid(order as i64) as u32);
            }
        }
        Ok(Self { dim, order, entries })
    }

    pub(crate) fn from_raw(dim: usize, order: u32, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        debug_assert!(entries.iter().all(|&e| e < order));
        Self { dim, order, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.dim + col]
    }

    pub fn root(&self, row: usize, col: usize) -> RootExponent {
        RootExponent { order: self.order, exp: self.get(row, col) }
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.entries.chunks(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.rows().map(<[u32]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c];
            }
        }
        Self { dim: d, order: self.order, entries }
    }

    /// Re-expresses the grid over `ω_L'` where `L'` is a multiple of the
    /// current order.
    pub fn with_order(&self, order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        if order % self.order != 0 {
            return Err(Error::InvalidDecomposition(format!(
                "order {order} is not a multiple of {}",
                self.order
            )));
        }
        let scale = order / self.order;
        Ok(Self {
            dim: self.dim,
            order,
            entries: self.entries.iter().map(|&e| e * scale).collect(),
        })
    }

    /// The grid with entry `(r, c)` moved to `(row_image[r], col_image[c])`.
    pub fn permuted(&self, row_image: &[usize], col_image: &[usize]) -> Self {
        let d = self.dim;
        assert!(row_image.len() == d && col_image.len() == d);
        let mut entries = vec![0; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[row_image[r] * d + col_image[c]] = self.entries[r * d + c];
            }
        }
        Self { dim: d, order: self.order, entries }
    }
}

impl fmt::Display for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(u32::to_string).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Dense complex matrix with only finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Row-major construction; rejects NaN and infinities.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { left: data.len(), right: rows * cols });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if let Some(pos) = m.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |r, c| if r == c { diag[r] } else { Complex64::new(0.0, 0.0) }))
    }

    pub(crate) fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::DimensionMismatch { left: self.ncols(), right: rhs.nrows() });
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kronecker(&rhs.0))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.0.shape() != other.0.shape() {
            return Err(Error::DimensionMismatch { left: self.nrows(), right: other.nrows() });
        }
        Ok(self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.max_abs_diff(other).is_ok_and(|diff| diff <= tol.eps())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.nrows() * self.ncols());
        for r in 0..self.nrows() {
            for c in 0..self.ncols() {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    /// Column `c` as a vector.
    pub fn column(&self, c: usize) -> ComplexVector {
        ComplexVector(self.0.column(c).iter().copied().collect())
    }
}

/// Dense complex vector with only finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self(data))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { left: self.len(), right: other.len() });
        }
        Ok(inner(&self.0, &other.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

#[inline]
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Complex matrix with entry `(k, j) = ω_L^{E(k,j)} / √d`.
pub fn to_complex(e: &ExponentMatrix) -> ComplexMatrix {
    let d = e.dim();
    let scale = inv_sqrt(d);
    ComplexMatrix::from_fn(d, d, |r, c| unit_root(e.order(), e.get(r, c)) * scale)
}

/// True iff `max |M†M − 1| ≤ eps`.
pub fn is_unitary(m: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    Ok(unitarity_residual(m)? <= tol.eps())
}

/// `max |M†M − 1|` over all entries.
pub fn unitarity_residual(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let gram = m.adjoint().mul(m)?;
    gram.max_abs_diff(&ComplexMatrix::identity(m.nrows()))
}

/// Unitary with every entry of modulus `1/√d`.
pub fn is_zeilinger(m: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    Ok(zeilinger_defect(m, tol)?.is_none())
}

/// Describes why `m` fails to be a Zeilinger matrix, if it does.
pub fn zeilinger_defect(m: &ComplexMatrix, tol: Tolerance) -> Result<Option<String>> {
    let residual = unitarity_residual(m)?;
    if residual > tol.eps() {
        return Ok(Some(format!("unitarity residual {residual:.3e} exceeds {tol}")));
    }
    let flat = inv_sqrt(m.nrows());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let modulus = m.get(r, c).norm();
            if (modulus - flat).abs() > tol.eps() {
                return Ok(Some(format!(
                    "entry ({r}, {c}) has modulus {modulus:.12}, expected {flat:.12}"
                )));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(root_value(4, 1).unwrap(), c(0.0, 1.0));
        assert_eq!(root_value(2, 1).unwrap(), c(-1.0, 0.0));
        assert_eq!(root_value(6, 6).unwrap(), c(1.0, 0.0));
        assert_eq!(root_value(8, -2).unwrap(), c(0.0, -1.0));
        assert!(matches!(root_value(0, 1), Err(Error::ZeroOrder)));
    }

    #[test]
    fn root_exponent_group_law() {
        for order in 1..=64u32 {
            for a in 0..order {
                let ra = RootExponent::new(order, a as i64).unwrap();
                assert_eq!(ra.mul(ra.inverse()).unwrap().exp(), 0);
                for b in 0..order {
                    let lhs = root_value(order, a as i64).unwrap() * root_value(order, b as i64).unwrap();
                    let rhs = root_value(order, (a + b) as i64).unwrap();
                    assert!((lhs - rhs).norm() <= 1e-12, "L={order} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn to_complex_small_cases() {
        let h = ExponentMatrix::from_rows(2, [[0i64, 0], [0, 1]]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ComplexMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]).unwrap();
        assert_eq!(to_complex(&h), expected);

        let one = ExponentMatrix::from_rows(1, [[0i64]]).unwrap();
        assert_eq!(to_complex(&one), ComplexMatrix::identity(1));

        let f3 = ExponentMatrix::from_rows(3, [[0i64, 0, 0], [0, 1, 2], [0, 2, 1]]).unwrap();
        let m = to_complex(&f3);
        for r in 0..3 {
            for col in 0..3 {
                assert!((m.get(r, col).norm() - 3f64.sqrt().recip()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unitarity_and_zeilinger_predicates() {
        let tol = Tolerance::default();
        assert!(is_unitary(&ComplexMatrix::identity(3), tol).unwrap());
        let h = to_complex(&ExponentMatrix::from_rows(2, [[0i64, 0], [0, 1]]).unwrap());
        assert!(is_unitary(&h, tol).unwrap());
        assert!(is_zeilinger(&h, tol).unwrap());
        let ones = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0); 4]).unwrap();
        assert!(!is_unitary(&ones, tol).unwrap());
        assert!(!is_zeilinger(&ComplexMatrix::identity(2), tol).unwrap());
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(is_unitary(&rect, tol), Err(Error::NotSquare { .. })));
        assert!(matches!(is_zeilinger(&rect, tol), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn rejects_non_finite_and_bad_tolerance() {
        assert!(matches!(
            ComplexMatrix::from_row_slice(1, 1, &[c(f64::NAN, 0.0)]),
            Err(Error::NonFinite(0))
        ));
        assert!(ComplexVector::new(vec![c(0.0, f64::INFINITY)]).is_err());
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1e-3).is_err());
        assert!(Tolerance::new(1e-12).is_ok());
    }

    #[test]
    fn exponent_grid_reduction_and_shape() {
        let e = ExponentMatrix::from_rows(3, [[-1i64, 4], [3, 5]]).unwrap();
        assert_eq!(e.entries(), &[2, 1, 0, 2]);
        assert!(matches!(
            ExponentMatrix::from_rows(3, vec![vec![0i64, 0], vec![0]]),
            Err(Error::NotSquare { .. })
        ));
        assert_eq!(e.with_order(6).unwrap().entries(), &[4, 2, 0, 4]);
        assert!(e.with_order(4).is_err());
    }

    #[test]
    fn to_complex_is_injective_for_small_grids() {
        // All 2x2 grids over ω_3: distinct grids must stay far apart.
        let grids: Vec<ExponentMatrix> = (0..81)
            .map(|code: i64| {
                ExponentMatrix::from_fn(2, 3, |r, c| (code / 3i64.pow((2 * r + c) as u32)) % 3).unwrap()
            })
            .collect();
        for (i, a) in grids.iter().enumerate() {
            for b in &grids[i + 1..] {
                assert!(to_complex(a).max_abs_diff(&to_complex(b)).unwrap() > 1e-6);
            }
        }
    }
}
