//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use causal_bandits::scm::NetworkSpec;

/// Flat row-major inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(dim: usize, a: &[f64]) -> Vec<f64> {
    let w = 2 * dim;
    let mut m = vec![0.0; dim * w];
    for i in 0..dim {
        m[i * w..i * w + dim].copy_from_slice(&a[i * dim..(i + 1) * dim]);
        m[i * w + dim + i] = 1.0;
    }
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&x, &y| m[x * w + col].abs().total_cmp(&m[y * w + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..w {
                m.swap(col * w + k, pivot * w + k);
            }
        }
        let p = m[col * w + col];
        assert!(p.abs() > 1e-300, "singular matrix");
        for k in 0..w {
            m[col * w + k] /= p;
        }
        for r in 0..dim {
            if r != col {
                let f = m[r * w + col];
                if f != 0.0 {
                    for k in 0..w {
                        m[r * w + k] -= f * m[col * w + k];
                    }
                }
            }
        }
    }
    let mut inv = vec![0.0; dim * dim];
    for i in 0..dim {
        inv[i * dim..(i + 1) * dim].copy_from_slice(&m[i * w + dim..(i + 1) * w]);
    }
    inv
}

/// `xᵀ A⁻¹ x` through an explicit inverse, square-rooted.
pub fn explicit_quad_norm(dim: usize, a: &[f64], x: &[f64]) -> f64 {
    let inv = gauss_jordan_inverse(dim, a);
    let mut q = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            q += x[i] * inv[i * dim + j] * x[j];
        }
    }
    q.sqrt()
}

/// `P(Pa_Y = z | do(assign))` by enumerating the full joint of the
/// mutilated network, working only from the serialized spec. `assign` holds
/// `(variable index, 0-based value)` pairs.
pub fn brute_force_parent_distribution(spec: &NetworkSpec, assign: &[(usize, usize)]) -> Vec<f64> {
    let n = spec.variables.len();
    let idx = |name: &str| spec.variables.iter().position(|v| v.name == name).unwrap();
    let domains: Vec<usize> = spec.variables.iter().map(|v| v.domain_size).collect();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, to) in &spec.edges {
        parents[idx(to)].push(idx(from));
    }
    for p in &mut parents {
        p.sort_unstable();
    }
    let reward: Vec<usize> = spec.reward_parents.iter().map(|r| idx(r)).collect();
    let num_z: usize = reward.iter().map(|&r| domains[r]).product();
    let mut forced: Vec<Option<usize>> = vec![None; n];
    for &(v, x) in assign {
        forced[v] = Some(x);
    }

    let total: usize = domains.iter().product();
    let mut dist = vec![0.0; num_z];
    let mut values = vec![0usize; n];
    for mut flat in 0..total {
        for v in (0..n).rev() {
            values[v] = flat % domains[v];
            flat /= domains[v];
        }
        let mut p = 1.0;
        for v in 0..n {
            p *= match forced[v] {
                Some(x) => f64::from(u8::from(values[v] == x)),
                None => {
                    let row = parents[v].iter().fold(0, |r, &q| r * domains[q] + values[q]);
                    spec.cpts[&spec.variables[v].name][row * domains[v] + values[v]]
                }
            };
            if p == 0.0 {
                break;
            }
        }
        let z = reward.iter().fold(0, |r, &q| r * domains[q] + values[q]);
        dist[z] += p;
    }
    dist
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn max_abs_diff(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
