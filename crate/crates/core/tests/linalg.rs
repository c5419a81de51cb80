mod common;

use causal_bandits::linalg::{dot, mvn_sample, LowerTriangular, SpdMatrix};
use common::{explicit_quad_norm, gauss_jordan_inverse};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spd_from(dim: usize, entries: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            a[i * dim + j] = (0..dim).map(|k| entries[i * dim + k] * entries[j * dim + k]).sum();
        }
        a[i * dim + i] += 0.5;
    }
    a
}

fn spd() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=8)
        .prop_flat_map(|d| (Just(d), prop::collection::vec(-2.0f64..2.0, d * d)))
        .prop_map(|(d, e)| (d, spd_from(d, &e)))
}

#[test]
fn gauss_jordan_oracle_inverts() {
    let a = [4.0, 1.0, 1.0, 3.0];
    let inv = gauss_jordan_inverse(2, &a);
    let expected = [3.0 / 11.0, -1.0 / 11.0, -1.0 / 11.0, 4.0 / 11.0];
    for (x, y) in inv.iter().zip(expected) {
        assert!((x - y).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cholesky_reconstructs((d, a) in spd()) {
        let m = SpdMatrix::from_rows(d, &a).unwrap();
        let llt = m.cholesky().unwrap().factor().gram();
        for (x, y) in llt.iter().zip(&a) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn solve_inverts_mul((d, a) in spd(), x in prop::collection::vec(-3.0f64..3.0, 8)) {
        let m = SpdMatrix::from_rows(d, &a).unwrap();
        let x = &x[..d];
        let b = m.mul_vec(x).unwrap();
        let back = m.solve(&b).unwrap();
        for (u, v) in back.iter().zip(x) {
            prop_assert!((u - v).abs() < 1e-7);
        }
    }

    #[test]
    fn quad_norm_matches_explicit_inverse((d, a) in spd(), x in prop::collection::vec(-3.0f64..3.0, 8)) {
        let m = SpdMatrix::from_rows(d, &a).unwrap();
        let x = &x[..d];
        let q = m.quad_norm_inv(x).unwrap();
        prop_assert!((q - explicit_quad_norm(d, &a, x)).abs() < 1e-8);
    }

    #[test]
    fn quad_norm_is_homogeneous((d, a) in spd(), x in prop::collection::vec(-3.0f64..3.0, 8), c in -5.0f64..5.0) {
        let m = SpdMatrix::from_rows(d, &a).unwrap();
        let x = &x[..d];
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let lhs = m.quad_norm_inv(&scaled).unwrap();
        let rhs = c.abs() * m.quad_norm_inv(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn rank1_update_adds_outer_product((d, a) in spd(), x in prop::collection::vec(-3.0f64..3.0, 8)) {
        let mut m = SpdMatrix::from_rows(d, &a).unwrap();
        let x = &x[..d];
        let before = m.trace();
        m.rank1_update(x).unwrap();
        prop_assert!((m.trace() - before - dot(x, x)).abs() < 1e-9);
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }
}

#[test]
fn mvn_sampler_moments() {
    let l = LowerTriangular::from_rows(3, &[1.0, 0.0, 0.0, 0.5, 0.8, 0.0, -0.3, 0.2, 0.6]).unwrap();
    let cov = l.gram();
    let mean = [0.5, -1.0, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 100_000;
    let mut sum = [0.0; 3];
    let mut outer = [0.0; 9];
    for _ in 0..n {
        let s = mvn_sample(&mean, &l, &mut rng).unwrap();
        for i in 0..3 {
            sum[i] += s[i];
            for j in 0..3 {
                outer[i * 3 + j] += s[i] * s[j];
            }
        }
    }
    let nf = n as f64;
    for i in 0..3 {
        assert!((sum[i] / nf - mean[i]).abs() < 0.02);
        for j in 0..3 {
            let c = outer[i * 3 + j] / nf - sum[i] * sum[j] / (nf * nf);
            assert!((c - cov[i * 3 + j]).abs() < 0.02, "cov[{i}][{j}] = {c}");
        }
    }
}

#[test]
fn precision_sampler_has_inverse_covariance() {
    let v = SpdMatrix::from_rows(2, &[4.0, 1.0, 1.0, 2.0]).unwrap();
    let chol = v.cholesky().unwrap();
    let inv = gauss_jordan_inverse(2, v.as_slice());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 100_000;
    let mut outer = [0.0; 4];
    for _ in 0..n {
        let s = chol.sample_precision(&[0.0, 0.0], 1.5, &mut rng);
        for i in 0..2 {
            for j in 0..2 {
                outer[i * 2 + j] += s[i] * s[j];
            }
        }
    }
    for k in 0..4 {
        let c = outer[k] / n as f64;
        assert!((c - 2.25 * inv[k]).abs() < 0.01, "{k}: {c} vs {}", 2.25 * inv[k]);
    }
}

#[test]
fn non_spd_is_rejected() {
    let m = SpdMatrix::from_rows(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
    assert!(m.cholesky().is_err());
}
