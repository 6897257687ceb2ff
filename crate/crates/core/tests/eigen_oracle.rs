// Jacobi eigenvalues checked against roots of the characteristic polynomial
// (Faddeev-LeVerrier coefficients, Durand-Kerner roots) for n <= 4.

use eband_core::eigen::{hermitian_eigen, ComplexMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn matmul(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    out
}

/// Monic coefficients c[0..=n] of det(λI − A), c[0] = 1.
fn char_poly(a: &[C], n: usize) -> Vec<C> {
    let mut c = vec![C::new(1.0, 0.0)];
    let mut m = vec![C::new(0.0, 0.0); n * n];
    for k in 1..=n {
        // M_k = A·M_{k-1} + c_{k-1}·I
        let mut next = matmul(a, &m, n);
        for i in 0..n {
            next[i * n + i] += c[k - 1];
        }
        m = next;
        let am = matmul(a, &m, n);
        let tr: C = (0..n).map(|i| am[i * n + i]).sum();
        c.push(-tr / k as f64);
    }
    c
}

fn durand_kerner(c: &[C]) -> Vec<C> {
    let n = c.len() - 1;
    let eval = |z: C| c.iter().fold(C::new(0.0, 0.0), |acc, &k| acc * z + k);
    let seed = C::new(0.4, 0.9);
    let mut roots: Vec<C> = (0..n).map(|i| seed.powu(i as u32) * 3.0).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let mut den = C::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
        }
        let moved = roots.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, C::new(rng.random_range(-3.0..3.0), 0.0));
        for j in i + 1..n {
            let z = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

#[test]
fn jacobi_matches_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for trial in 0..400 {
        let n = 1 + trial % 4;
        let m = random_hermitian(n, &mut rng);
        let mut oracle: Vec<f64> = durand_kerner(&char_poly(m.entries(), n)).iter().map(|z| z.re).collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        let got = hermitian_eigen(&m).unwrap().values;
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-8, "n={n} trial {trial}: {got:?} vs {oracle:?}");
        }
    }
}

#[test]
fn repeated_eigenvalues() {
    // 2·I + rank-one: eigenvalues 2 + |v|², 2, 2
    let v = [C::new(1.0, 0.5), C::new(-0.3, 0.2), C::new(0.0, -1.0)];
    let m = ComplexMatrix::from_fn(3, 3, |i, j| {
        v[i] * v[j].conj() + if i == j { C::new(2.0, 0.0) } else { C::new(0.0, 0.0) }
    });
    let e = hermitian_eigen(&m).unwrap();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    assert!((e.values[0] - 2.0 - norm2).abs() < 1e-12);
    assert!((e.values[1] - 2.0).abs() < 1e-12);
    assert!((e.values[2] - 2.0).abs() < 1e-12);
    assert!(e.max_residual(&m) < 1e-12);
}

#[test]
fn eigenvectors_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_hermitian(12, &mut rng);
    let e = hermitian_eigen(&m).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            let dot: C = e.vectors[i].iter().zip(&e.vectors[j]).map(|(a, b)| a.conj() * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot - C::new(want, 0.0)).norm() < 1e-12);
        }
    }
}
