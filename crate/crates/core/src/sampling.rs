//! Random instance generators shared by the verification suites and tests.

use crate::cone::ConeSpec;
use crate::linalg::{Mat, PsdMatrix, SymMatrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn standard_normal_vec(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

pub fn standard_normal_mat(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_vec(rows, cols, standard_normal_vec(rng, rows * cols)).expect("shape")
}

/// `G Gᵀ / d` for a Gaussian `G`: PSD, generically full rank.
pub fn random_psd(rng: &mut impl Rng, d: usize) -> PsdMatrix {
    let g = standard_normal_mat(rng, d, d);
    PsdMatrix::new(g.gram_left().scale(1.0 / d as f64)).expect("gram is PSD")
}

/// Random PD matrix with eigenvalues at least `floor`.
pub fn random_pd(rng: &mut impl Rng, d: usize, floor: f64) -> PsdMatrix {
    let mut s = random_psd(rng, d).as_sym().clone();
    s.shift_diag(floor);
    PsdMatrix::new(s).expect("shifted gram is PD")
}

/// The five cone kinds at small dimensions, for per-kind sweeps.
pub fn cone_zoo() -> Vec<ConeSpec> {
    vec![
        ConeSpec::Scalar { dim: 5 },
        ConeSpec::Diagonal { dim: 6 },
        ConeSpec::Full { dim: 4 },
        ConeSpec::KroneckerLeft { d_left: 3, d_right: 2 },
        ConeSpec::DirectSum(vec![
            ConeSpec::Diagonal { dim: 2 },
            ConeSpec::Full { dim: 2 },
            ConeSpec::KroneckerLeft { d_left: 2, d_right: 2 },
        ]),
    ]
}
