//! Dense complex operators on a finite-dimensional Hilbert space.
//!
//! The three wrapper types carry role-specific invariants that are checked
//! once, at construction: [`HermitianOperator`] (Hamiltonians, observables),
//! [`UnitaryOperator`] (time-evolution and passivizing operators) and
//! [`DensityOperator`] (states). Everything is built on
//! `nalgebra::DMatrix<Complex64>`.
//!
//! Exponentials and logarithms go through eigendecompositions. Hermitian
//! matrices are diagonalized directly; a unitary `U` is diagonalized through
//! the commuting Hermitian pair `(U + U^dagger)/2` and `(U - U^dagger)/2i`,
//! which keeps the whole layer on the well-conditioned Hermitian solver and
//! copes with the exactly degenerate spectra of permutation operators.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let dev = max_abs(&(m - m.adjoint()));
    dev / max_abs(m).max(1.0)
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// A Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity (relative tolerance `tol::HERM`) and stores the
    /// exactly Hermitian part of `m`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermiticity_deviation(&m);
        if deviation > tol::HERM {
            return Err(Error::NonHermitianInput { deviation });
        }
        Ok(Self {
            m: hermitian_part(&m),
        })
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self {
            m: hermitian_part(&m),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            m: CMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    Complex64::new(values[r], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m: self.m.scale(factor),
        }
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    /// Sorted eigenvalues and the matching orthonormal eigenvectors (columns).
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.m)
    }
}

/// A unitary operator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    m: CMatrix,
}

impl UnitaryOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = check_square(&m)?;
        let deviation = max_abs(&(m.adjoint() * &m - CMatrix::identity(n, n)));
        if deviation > tol::UNIT {
            return Err(Error::NonUnitaryInput { deviation });
        }
        Ok(Self { m })
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &UnitaryOperator) -> Self {
        Self {
            m: &self.m * &other.m,
        }
    }

    /// Multiplies by the global phase `e^{i phase}`.
    pub fn with_phase(&self, phase: f64) -> Self {
        Self {
            m: self.m.map(|z| z * Complex64::from_polar(1.0, phase)),
        }
    }

    pub fn kron(&self, other: &UnitaryOperator) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }
}

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    m: CMatrix,
}

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermiticity_deviation(&m);
        if deviation > tol::HERM {
            return Err(Error::InvalidDensity {
                reason: format!("not Hermitian (deviation {deviation:e})"),
            });
        }
        let m = hermitian_part(&m);
        let trace = m.trace().re;
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidDensity {
                reason: format!("trace {trace} != 1"),
            });
        }
        let (values, _) = hermitian_eigen(&m);
        if let Some(&min) = values.first() {
            if min < -tol::PSD {
                return Err(Error::InvalidDensity {
                    reason: format!("negative eigenvalue {min}"),
                });
            }
        }
        Ok(Self { m })
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self {
            m: hermitian_part(&m),
        }
    }

    /// The incoherent state `sum_k p_k |k><k|`.
    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        let h = HermitianOperator::from_real_diagonal(p);
        Self::new(h.into_matrix())
    }

    /// A pure state `|psi><psi|`; `psi` is normalized here.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidDensity {
                reason: "zero state vector".into(),
            });
        }
        let v = v.unscale(norm);
        Ok(Self {
            m: &v * v.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// `U rho U^dagger`.
    pub fn conjugated(&self, u: &UnitaryOperator) -> Self {
        Self::new_unchecked(&u.m * &self.m * u.m.adjoint())
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigen(&self.m).0
    }

    /// Real parts of the diagonal in the computational basis.
    pub fn diagonal(&self) -> Vec<f64> {
        self.m.diagonal().iter().map(|z| z.re).collect()
    }

    /// `tr(rho X)`.
    pub fn expectation(&self, x: &HermitianOperator) -> f64 {
        (&self.m * x.matrix()).trace().re
    }

    pub fn kron(&self, other: &DensityOperator) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }
}

/// Principal logarithm of a unitary: a skew-Hermitian matrix with its
/// eigenphases in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewLog {
    entries: CMatrix,
    phases: Vec<f64>,
}

impl SkewLog {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigenphases, sorted ascending.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Hilbert-Schmidt norm, `sqrt(sum theta_j^2)`.
    pub fn norm(&self) -> f64 {
        self.phases.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    /// `exp(self)`, reassembled from the stored matrix.
    pub fn exp(&self) -> UnitaryOperator {
        // entries = i K with K Hermitian, so exp(entries) = e^{-i(-1)K}.
        let k = HermitianOperator::new_unchecked(self.entries.map(|z| z * (-I)));
        expm_skew(&k, -1.0)
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Groups consecutive sorted values whose gaps are within `tol`.
pub(crate) fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            if start < k {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

fn spectral_tolerance(values: &[f64]) -> f64 {
    let range = match (values.first(), values.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    tol::CLUSTER * range.max(1.0)
}

/// Eigenphases in `(-pi, pi]` and orthonormal eigenvectors of a unitary matrix.
pub(crate) fn unitary_eigen(u: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = u.nrows();
    let ud = u.adjoint();
    let cos_part = (u + &ud).scale(0.5);
    let sin_part = (u - &ud) * Complex64::new(0.0, -0.5);
    let (cos_values, basis) = hermitian_eigen(&cos_part);
    let tol = spectral_tolerance(&cos_values);

    let mut vectors = CMatrix::zeros(n, n);
    let mut col = 0;
    for cluster in cluster_sorted(&cos_values, tol) {
        let block = basis.columns(cluster.start, cluster.len()).into_owned();
        if cluster.len() == 1 {
            vectors.set_column(col, &block.column(0));
            col += 1;
            continue;
        }
        // The cluster spans an invariant subspace of U; split it by the sine part.
        let restricted = block.adjoint() * &sin_part * &block;
        let (_, inner) = hermitian_eigen(&restricted);
        let rotated = block * inner;
        for j in 0..rotated.ncols() {
            vectors.set_column(col, &rotated.column(j));
            col += 1;
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let v = vectors.column(j);
            let rayleigh = (v.adjoint() * u * v)[(0, 0)];
            (snap_phase(rayleigh.im.atan2(rayleigh.re)), j)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let phases = pairs.iter().map(|p| p.0).collect();
    let sorted = CMatrix::from_fn(n, n, |r, c| vectors[(r, pairs[c].1)]);
    (phases, sorted)
}

/// Moves phases within `tol::PHASE` of `-pi` to `+pi`.
pub(crate) fn snap_phase(theta: f64) -> f64 {
    if theta <= -PI + tol::PHASE {
        PI
    } else {
        theta
    }
}

/// `e^{-itH}`.
pub fn expm_skew(h: &HermitianOperator, t: f64) -> UnitaryOperator {
    UnitaryOperator::new_unchecked(expm_hermitian_matrix(h.matrix(), t))
}

pub(crate) fn expm_hermitian_matrix(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&e| Complex64::from_polar(1.0, -t * e)),
    );
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * phases[c]
    });
    scaled * vectors.adjoint()
}

/// Principal logarithm with eigenphases in `(-pi, pi]`.
pub fn principal_log(u: &UnitaryOperator) -> SkewLog {
    let (phases, vectors) = unitary_eigen(u.matrix());
    let n = phases.len();
    let scaled = CMatrix::from_fn(n, n, |r, c| vectors[(r, c)] * (I * phases[c]));
    let entries = scaled * vectors.adjoint();
    // Exactly skew-Hermitian.
    let entries = (&entries - entries.adjoint()).scale(0.5);
    SkewLog { entries, phases }
}

/// Eigenphases of a unitary matrix in `(-pi, pi]`, ascending.
pub fn eigenphases(u: &UnitaryOperator) -> Vec<f64> {
    unitary_eigen(u.matrix()).0
}

/// Hilbert-Schmidt norm `sqrt(tr X^dagger X)`.
pub fn hs_norm(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bi-invariant geodesic distance `||Log(U^dagger V)||`.
pub fn geodesic_distance(u: &UnitaryOperator, v: &UnitaryOperator) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: v.dim(),
        });
    }
    let w = UnitaryOperator::new_unchecked(u.matrix().adjoint() * v.matrix());
    Ok(log_norm(&w))
}

/// `||Log U||`, computed from eigenphases only.
pub fn log_norm(u: &UnitaryOperator) -> f64 {
    eigenphases(u).iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Bandwidth `tr(H^2)`.
pub fn bandwidth(h: &HermitianOperator) -> f64 {
    h.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Default number of propagation steps: 1000 per unit of `omega * T`.
pub fn default_steps(omega: f64, time: f64) -> usize {
    ((1000.0 * omega * time).ceil() as usize).max(1)
}

/// Integrates `rho' = -i[H(t), rho]` over `[0, time]` with the exponential
/// midpoint rule: every step conjugates by `e^{-i dt H(t_mid)}`, so the
/// spectrum of the state is preserved up to rounding.
pub fn von_neumann_evolve<F>(
    generator: F,
    rho0: &DensityOperator,
    time: f64,
    steps: usize,
) -> Result<DensityOperator>
where
    F: Fn(f64) -> CMatrix,
{
    if time < 0.0 {
        return Err(Error::NegativeTime(time));
    }
    if steps == 0 {
        return Err(Error::ZeroSteps);
    }
    let n = rho0.dim();
    let dt = time / steps as f64;
    let mut rho = rho0.matrix().clone();
    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let h = generator(t_mid);
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.nrows(),
            });
        }
        let deviation = hermiticity_deviation(&h);
        if deviation > tol::HERM {
            return Err(Error::NonHermitianGenerator {
                time: t_mid,
                deviation,
            });
        }
        let u = expm_hermitian_matrix(&h, dt);
        rho = &u * rho * u.adjoint();
    }
    Ok(DensityOperator::new_unchecked(rho))
}

/// Single-shot propagation `e^{-itH} rho e^{itH}` for a constant Hamiltonian.
pub fn evolve_constant(h: &HermitianOperator, rho0: &DensityOperator, time: f64) -> DensityOperator {
    rho0.conjugated(&expm_skew(h, time))
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Projector onto the span of the given computational basis vectors.
pub fn basis_projector(n: usize, indices: &[usize]) -> CMatrix {
    let mut p = CMatrix::zeros(n, n);
    for &k in indices {
        p[(k, k)] = Complex64::new(1.0, 0.0);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        max_abs(&(a - b)) <= eps
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let u = expm_skew(&HermitianOperator::zeros(3), 1.0);
        assert!(close(u.matrix(), &CMatrix::identity(3, 3), 1e-15));
    }

    #[test]
    fn expm_diagonal_at_pi_is_minus_identity() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        let u = expm_skew(&h, PI);
        assert!(close(u.matrix(), &(-CMatrix::identity(2, 2)), 1e-14));
    }

    #[test]
    fn expm_swap_coupling_gives_minus_i_swap() {
        // H = w/sqrt2 (|2><1| + |1><2|); the 2x2 oracle gives e^{-itH} = cos(wt/sqrt2) - i sin(wt/sqrt2) X.
        let omega = 1.7;
        let g = omega / SQRT_2;
        let h = HermitianOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(g, 0.0), c(g, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        let t = PI * SQRT_2 / (2.0 * omega);
        let u = expm_skew(&h, t);
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        assert!(close(u.matrix(), &expected, 1e-14));
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn non_unitary_input_rejected() {
        let m = CMatrix::identity(2, 2).scale(1.1);
        assert!(matches!(
            UnitaryOperator::new(m),
            Err(Error::NonUnitaryInput { .. })
        ));
    }

    #[test]
    fn log_of_identity_is_zero() {
        let log = principal_log(&UnitaryOperator::identity(4));
        assert!(max_abs(log.entries()) < 1e-15);
        assert!(log.phases().iter().all(|t| t.abs() < 1e-15));
    }

    #[test]
    fn log_of_diagonal_phases() {
        let u = UnitaryOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)],
        ))
        .unwrap();
        let log = principal_log(&u);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, PI / 2.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -PI / 2.0)],
        );
        assert!(close(log.entries(), &expected, 1e-14));
    }

    #[test]
    fn eigenvalue_minus_one_maps_to_plus_pi() {
        let u = UnitaryOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(-1.0, -0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ))
        .unwrap();
        let log = principal_log(&u);
        assert_eq!(log.phases()[1], PI);
        // Same for a swap, whose -1 eigenvector is not a basis vector.
        let swap = UnitaryOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        let phases = eigenphases(&swap);
        assert!(phases[0].abs() < 1e-15);
        assert_eq!(phases[1], PI);
    }

    #[test]
    fn hs_norm_examples() {
        assert_eq!(hs_norm(&CMatrix::zeros(3, 3)), 0.0);
        assert!((hs_norm(&CMatrix::identity(5, 5)) - 5f64.sqrt()).abs() < 1e-15);
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, PI / 2.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -PI / 2.0)],
        );
        assert!((hs_norm(&x) - PI * FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn geodesic_distance_examples() {
        let id = UnitaryOperator::identity(2);
        assert!(geodesic_distance(&id, &id).unwrap().abs() < 1e-15);
        let minus_i_swap = UnitaryOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)],
        ))
        .unwrap();
        let d = geodesic_distance(&id, &minus_i_swap).unwrap();
        assert!((d - PI / SQRT_2).abs() < 1e-14);
        let swap = UnitaryOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        assert!((geodesic_distance(&id, &swap).unwrap() - PI).abs() < 1e-14);
        assert!(matches!(
            geodesic_distance(&id, &UnitaryOperator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bandwidth_of_zero_and_diagonal() {
        assert_eq!(bandwidth(&HermitianOperator::zeros(4)), 0.0);
        let h = HermitianOperator::from_real_diagonal(&[1.0, -2.0]);
        assert!((bandwidth(&h) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn evolution_under_zero_hamiltonian_is_trivial() {
        let rho = DensityOperator::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let out = von_neumann_evolve(|_| CMatrix::zeros(3, 3), &rho, 5.0, 10).unwrap();
        assert!(close(out.matrix(), rho.matrix(), 1e-15));
    }

    #[test]
    fn evolution_rejects_bad_arguments() {
        let rho = DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        assert!(matches!(
            von_neumann_evolve(|_| CMatrix::zeros(2, 2), &rho, -1.0, 10),
            Err(Error::NegativeTime(_))
        ));
        let bad = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            von_neumann_evolve(move |_| bad.clone(), &rho, 1.0, 10),
            Err(Error::NonHermitianGenerator { .. })
        ));
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::from_diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityOperator::from_diagonal(&[1.2, -0.2]).is_err());
        assert!(DensityOperator::from_diagonal(&[0.25, 0.75]).is_ok());
    }

    #[test]
    fn cluster_sorted_chains_close_values() {
        let groups = cluster_sorted(&[0.0, 1e-12, 1.0, 2.0, 2.0], 1e-9);
        assert_eq!(groups, vec![0..2, 2..3, 3..5]);
    }
}
