//! Seeded random operators and specs for property sweeps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::{CMatrix, HermitianOperator, UnitaryOperator};
use crate::system::{canonical_passivizing, permutation_operator, SystemSpec};

fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryOperator {
    let qr = ginibre(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    UnitaryOperator::new_unchecked(q)
}

/// Hermitian matrix with standard normal entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(n, rng);
    HermitianOperator::new_unchecked((&g + g.adjoint()).scale(0.5))
}

/// Random unitary that is block diagonal over `groups` (each a list of indices).
pub fn random_block_unitary<R: Rng + ?Sized>(
    n: usize,
    groups: &[Vec<usize>],
    rng: &mut R,
) -> UnitaryOperator {
    let mut m = CMatrix::zeros(n, n);
    for g in groups {
        let block = random_unitary(g.len(), rng);
        for (r, &i) in g.iter().enumerate() {
            for (c, &j) in g.iter().enumerate() {
                m[(i, j)] = block.matrix()[(r, c)];
            }
        }
    }
    UnitaryOperator::new_unchecked(m)
}

/// A random passivizing unitary `U P_sigma V` with `U` commuting with the
/// observable and `V` with the initial state.
pub fn random_passivizing_unitary<R: Rng + ?Sized>(spec: &SystemSpec, rng: &mut R) -> UnitaryOperator {
    let n = spec.n();
    let a_groups: Vec<Vec<usize>> = spec.a_groups().iter().map(|r| r.clone().collect()).collect();
    let u = random_block_unitary(n, &a_groups, rng);
    let v = random_block_unitary(n, spec.p_classes(), rng);
    let p = permutation_operator(&canonical_passivizing(spec));
    u.compose(&p).compose(&v)
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Strict spectra: distinct sorted observable eigenvalues and distinct probabilities.
pub fn random_strict_spec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SystemSpec {
    loop {
        let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        a.sort_by(f64::total_cmp);
        let p = random_probabilities(n, rng);
        let gap = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
        };
        if n < 2 || (gap(&a) > 1e-3 && gap(&p) > 1e-3) {
            return SystemSpec::new(a, p, 1.0).expect("valid random spec");
        }
    }
}

/// Random spec with integer-valued levels so that degeneracies occur.
pub fn random_degenerate_spec<R: Rng + ?Sized>(n: usize, levels: usize, rng: &mut R) -> SystemSpec {
    let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
    a.sort_by(f64::total_cmp);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(1..=levels) as f64).collect();
    let total: f64 = w.iter().sum();
    let p = w.iter().map(|x| x / total).collect();
    SystemSpec::new(a, p, 1.0).expect("valid random spec")
}
