//! Seeded random matrices and states for tests and experiments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matfun::{operator_norm, ComplexMatrix};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng + ?Sized>(r: &mut R) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, r: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(r))
}

/// Random Hermitian matrix scaled to operator norm 1.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, r: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, r);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    let n = operator_norm(&h);
    if n == 0.0 {
        h
    } else {
        h.scale_real(1.0 / n)
    }
}

/// Haar-random unitary by Gram–Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, r: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, r);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|i| g[(i, j)]).collect();
        // Two passes keep the columns orthonormal to rounding.
        for _ in 0..2 {
            for q in &cols {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, qa) in v.iter_mut().zip(q) {
                    *x -= proj * qa;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Hilbert–Schmidt random state of the given rank, `G G† / Tr(G G†)`.
pub fn random_density_rank<R: Rng + ?Sized>(dim: usize, rank: usize, r: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rank.max(1), r);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut m = m.scale_real(1.0 / tr);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
    }
    hermitize(&m)
}

/// Full-rank random state mixed with `I/d` so every eigenvalue is at least
/// `1/kappa_max` (requires `kappa_max ≥ d`).
pub fn random_density<R: Rng + ?Sized>(dim: usize, kappa_max: f64, r: &mut R) -> ComplexMatrix {
    assert!(kappa_max >= dim as f64, "kappa_max must be at least the dimension");
    let hs = random_density_rank(dim, dim, r);
    let p = dim as f64 / kappa_max;
    let mixed = &hs.scale_real(1.0 - p) + &ComplexMatrix::identity(dim).scale_real(p / dim as f64);
    hermitize(&mixed)
}

/// Normalized random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, r: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| complex_normal(r)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale_real(0.5)
}
