//! Dense complex-matrix kernel.
//!
//! Everything operator-valued in the crate (states, POVM members, gradient
//! operators) is a [`HermMatrix`]: a square complex matrix that is Hermitian
//! up to round-off and is re-symmetrized on construction so that drift does
//! not accumulate over many iteration rounds.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default tolerance for positivity checks.
pub const PSD_TOL: f64 = 1e-10;

const HERMITICITY_TOL: f64 = 1e-12;
const FIXPOINT_TOL: f64 = 1e-14;
const FIXPOINT_MAX_ITER: usize = 100;
const SINGULAR_EIGENVALUE: f64 = 1e-14;

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A - B|` over entries. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `tr(AB)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Square complex matrix that is Hermitian by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix(CMatrix);

impl HermMatrix {
    /// Validates squareness, finiteness and Hermiticity (relative tolerance
    /// 1e-12), then stores `(M + M†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = hermiticity_deviation(&m);
        if deviation > HERMITICITY_TOL * (1.0 + max_abs(&m)) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermMatrix(symmetrize(&m)))
    }

    /// Hermitian part `(M + M†)/2` of an arbitrary square matrix.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "hermitian_part needs a square matrix");
        HermMatrix(symmetrize(m))
    }

    pub fn identity(dim: usize) -> Self {
        HermMatrix(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermMatrix(CMatrix::zeros(dim, dim))
    }

    /// Builds from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        }))
    }

    /// Diagonal matrix with real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermMatrix(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Projector `|v⟩⟨v|`.
    pub fn projector(v: &CVector) -> Self {
        HermMatrix(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermMatrix(self.0.scale(factor))
    }

    pub fn add(&self, other: &HermMatrix) -> Self {
        HermMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermMatrix) -> Self {
        HermMatrix(&self.0 - &other.0)
    }

    /// `X · self · X` for Hermitian `X`; the result is Hermitian.
    pub fn sandwich(&self, x: &HermMatrix) -> Self {
        HermMatrix::hermitian_part(&(&x.0 * &self.0 * &x.0))
    }

    /// `G† · self · G` for arbitrary square `G`.
    pub fn congruence(&self, g: &CMatrix) -> Self {
        HermMatrix::hermitian_part(&(g.adjoint() * &self.0 * g))
    }

    /// Eigenvalues in ascending order with the matching eigenvectors as
    /// columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let n = self.dim();
        if n == 0 {
            return (Vec::new(), CMatrix::zeros(0, 0));
        }
        let eig = SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > tol).count()
    }

    /// True when every imaginary part is at most `tol` in magnitude.
    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= tol)
    }

    /// Applies `f` to the spectrum: `U f(Λ) U†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let (values, vectors) = self.eigen();
        let n = self.dim();
        let mut scaled = vectors.clone();
        for (c, v) in values.iter().enumerate() {
            let fv = f(*v);
            for r in 0..n {
                scaled[(r, c)] *= fv;
            }
        }
        HermMatrix::hermitian_part(&(scaled * vectors.adjoint()))
    }

    /// Gershgorin enclosure `[lo, hi]` of the (real) spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let center = self.0[(i, i)].re;
            let radius: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| self.0[(i, j)].norm())
                .sum();
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }
}

impl std::ops::Deref for HermMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &HermMatrix, tol: f64) -> bool {
    m.min_eigenvalue() >= -tol
}

/// Inverse square root by the fixpoint iteration
/// `X ← (3/2)X − (1/4)X(SX + XS)X` from `X = 1`.
///
/// Requires the spectrum of `s` inside `(0, 3)`. A Gershgorin enclosure is
/// tried first; the eigensolver only runs when it is inconclusive.
pub fn inv_sqrt_fixpoint(s: &HermMatrix, tol: f64, max_iter: usize) -> Result<HermMatrix> {
    let (lo, hi) = s.gershgorin_bounds();
    if !(lo > 0.0 && hi < 3.0) {
        let values = s.eigenvalues();
        let min = values.first().copied().unwrap_or(0.0);
        let max = values.last().copied().unwrap_or(0.0);
        if min <= 0.0 || max >= 3.0 {
            return Err(Error::SpectrumOutOfRange { min, max });
        }
    }

    let n = s.dim();
    let mut x = CMatrix::identity(n, n);
    for _ in 0..max_iter {
        let sx = s.matrix() * &x;
        let xs = &x * s.matrix();
        let next = symmetrize(&(x.scale(1.5) - (&x * (sx + xs) * &x).scale(0.25)));
        let diff = max_abs_diff(&next, &x);
        if !diff.is_finite() || diff > 1e8 {
            return Err(Error::SpectrumOutOfRange {
                min: f64::NAN,
                max: f64::NAN,
            });
        }
        x = next;
        if diff <= tol {
            return Ok(HermMatrix(x));
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
    })
}

/// Inverse square root from the eigendecomposition.
pub fn inv_sqrt_eigen(s: &HermMatrix) -> Result<HermMatrix> {
    let min = s.min_eigenvalue();
    if min <= SINGULAR_EIGENVALUE {
        return Err(Error::SingularMatrix {
            min_eigenvalue: min,
        });
    }
    Ok(s.map_spectrum(|v| v.powf(-0.5)))
}

/// `S^{-1/2}` using the fixpoint iteration with its default settings and
/// falling back to the eigendecomposition.
pub fn inv_sqrt(s: &HermMatrix) -> Result<HermMatrix> {
    match inv_sqrt_fixpoint(s, FIXPOINT_TOL, FIXPOINT_MAX_ITER) {
        Ok(x) => Ok(x),
        Err(Error::NotConverged { .. }) | Err(Error::SpectrumOutOfRange { .. }) => {
            inv_sqrt_eigen(s)
        }
        Err(e) => Err(e),
    }
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a sequence of factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Reduced operator on the subsystems listed in `keep`.
///
/// Subsystem 0 is the most significant factor, matching [`tensor`]. `keep`
/// may be given in any order; the output follows ascending subsystem order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, subsystem dims multiply to {}",
            m.nrows(),
            m.ncols(),
            total
        )));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            limit: dims.len(),
        });
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dim: usize = kept.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // strides of each subsystem in the full index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offset = |sub: &[usize], mut idx: usize| -> usize {
        let mut full = 0;
        for &s in sub.iter().rev() {
            full += (idx % dims[s]) * strides[s];
            idx /= dims[s];
        }
        full
    };

    let kept_offsets: Vec<usize> = (0..kept_dim).map(|a| offset(&kept, a)).collect();
    let traced_offsets: Vec<usize> = (0..traced_dim).map(|t| offset(&traced, t)).collect();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for (a, &ra) in kept_offsets.iter().enumerate() {
        for (b, &rb) in kept_offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_offsets {
                acc += m[(ra + t, rb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The 2×2 Pauli matrix, with `σ_z|0⟩ = |0⟩`.
    pub fn matrix(self) -> CMatrix {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match self {
            Axis::X => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            Axis::Y => {
                CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
            }
            Axis::Z => {
                CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
            }
        }
    }
}

/// Pauli operator along `axis` acting on `qubit` of an `n_qubits` register
/// (qubit 0 is the leftmost tensor factor).
pub fn pauli(axis: Axis, qubit: usize, n_qubits: usize) -> Result<HermMatrix> {
    if qubit >= n_qubits {
        return Err(Error::IndexOutOfRange {
            index: qubit,
            limit: n_qubits,
        });
    }
    let id = CMatrix::identity(2, 2);
    let sigma = axis.matrix();
    let factors: Vec<&CMatrix> = (0..n_qubits)
        .map(|q| if q == qubit { &sigma } else { &id })
        .collect();
    Ok(HermMatrix(tensor_all(factors)))
}
