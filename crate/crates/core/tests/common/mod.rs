#![allow(dead_code)]

//! Shared randomized-input helpers for the integration tests.
//!
//! Every generator takes an explicit RNG so each test controls its seeds;
//! the `rng_for` keying scheme makes (seed, shape, trial) triples
//! reproducible independently of iteration order.

use mlsv_core::eig::HermitianMatrix;
use mlsv_core::horn::DegenerateData;
use mlsv_core::{Matrix, Tensor, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Counter-keyed RNG: one independent stream per (seed, shape, trial).
pub fn rng_for(seed: u64, shape_idx: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((shape_idx as u64) << 32) | trial as u64);
    rng
}

/// Entry distributions used by the randomized campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    ComplexGaussian,
    RealGaussian,
    NonnegativeUniform,
}

/// Random tensor with unit Frobenius norm.
pub fn random_tensor(rng: &mut ChaCha8Rng, dims: &[usize], dist: Dist) -> Tensor {
    let len: usize = dims.iter().product();
    let mut entries = Vec::with_capacity(len);
    for _ in 0..len {
        let e = match dist {
            Dist::ComplexGaussian => {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }
            Dist::RealGaussian => C64::new(rng.sample(StandardNormal), 0.0),
            Dist::NonnegativeUniform => C64::new(rng.gen_range(0.0..1.0), 0.0),
        };
        entries.push(e);
    }
    let norm = entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        entries[0] = C64::new(1.0, 0.0);
    } else {
        for e in entries.iter_mut() {
            *e /= norm;
        }
    }
    Tensor::new(dims.to_vec(), entries).expect("generator produced a malformed tensor")
}

/// Random complex Gaussian vector of unit-scale entries.
fn random_complex_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Random Hermitian matrix (indefinite) of order `n`.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let m = Matrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    HermitianMatrix::new(m.add(&m.conj_transpose()).scale(C64::new(0.5, 0.0)))
        .expect("symmetrized matrix must be Hermitian")
}

/// Random positive semidefinite matrix of order `n` with the given rank,
/// built as a sum of `rank` random outer products.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> HermitianMatrix {
    let mut m = Matrix::zeros(n, n);
    for _ in 0..rank {
        let v = random_complex_vector(rng, n);
        let outer = Matrix::from_fn(n, n, |r, c| v[r - 1] * v[c - 1].conj());
        m = m.add(&outer.scale(C64::new(1.0 / n as f64, 0.0)));
    }
    HermitianMatrix::new(m).expect("sum of outer products must be Hermitian")
}

/// Random boundary-case parameters for the given dims: positive
/// semidefinite `A`, `B` of order `I_3 - 1` with admissible ranks, and a
/// leading value `L` strictly above `lambda_max(A + B)`.
pub fn random_degenerate_data(rng: &mut ChaCha8Rng, dims: [usize; 3]) -> DegenerateData {
    let (i1, i2, i3) = (dims[0], dims[1], dims[2]);
    let m = i3 - 1;
    let max_rank_a = (i1.min(i3) - 1).min(m);
    let max_rank_b = (i2 - 1).min(m);
    let rank_a = rng.gen_range(0..=max_rank_a);
    let rank_b = rng.gen_range(0..=max_rank_b);
    let a = random_psd(rng, m, rank_a);
    let b = random_psd(rng, m, rank_b);
    let top = HermitianMatrix::new(a.matrix().add(b.matrix()))
        .expect("sum of Hermitian matrices")
        .eigenvalues()
        .expect("eigensolver on a small PSD matrix")[0]
        .max(0.0);
    let l = (top + 0.1) * rng.gen_range(1.05..2.0);
    DegenerateData::new(dims, l, a, b).expect("draw satisfies the data invariants by construction")
}
