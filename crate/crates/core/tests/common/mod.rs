//! Oracles written independently of the library code paths.
#![allow(dead_code)]

use num_complex::Complex64;
use uavg_core::cmatrix::ComplexMatrix;
use uavg_core::rng::RandomStream;

/// Permanent by Laplace expansion along the first row.
pub fn laplace_permanent(a: &[Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let minor: Vec<Vec<Complex64>> = a[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        total += a[0][j] * laplace_permanent(&minor);
    }
    total
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut RandomStream) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| rng.complex_normal()).collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

/// All occupation vectors of `n` photons in `m` modes, in any order.
pub fn occupations(m: usize, n: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|k| {
            occupations(m - 1, n - k).into_iter().map(move |mut rest| {
                rest.insert(0, k);
                rest
            })
        })
        .collect()
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// `|Perm(A_{out,in})|² / (∏in! ∏out!)` for every output pattern, using the
/// Laplace permanent, keyed by occupation vector. Unnormalised, so for a
/// contraction the values sum to the vacuum-herald probability.
pub fn output_weights(a: &ComplexMatrix, input: &[usize]) -> Vec<(Vec<usize>, f64)> {
    let n: usize = input.iter().sum();
    let cols: Vec<usize> = input
        .iter()
        .enumerate()
        .flat_map(|(j, &k)| std::iter::repeat_n(j, k))
        .collect();
    occupations(a.rows(), n)
        .into_iter()
        .map(|out| {
            let rows: Vec<usize> = out
                .iter()
                .enumerate()
                .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
                .collect();
            let sub: Vec<Vec<Complex64>> = rows
                .iter()
                .map(|&r| cols.iter().map(|&c| a[(r, c)]).collect())
                .collect();
            let norm = input.iter().chain(&out).map(|&k| fact(k)).product::<f64>();
            let w = laplace_permanent(&sub).norm_sqr() / norm;
            (out, w)
        })
        .collect()
}

/// Half the l1 distance between two normalised weight lists keyed by
/// occupation vector.
pub fn tvd_oracle(p: &[(Vec<usize>, f64)], q: &[(Vec<usize>, f64)]) -> f64 {
    let sp: f64 = p.iter().map(|x| x.1).sum();
    let sq: f64 = q.iter().map(|x| x.1).sum();
    0.5 * p
        .iter()
        .map(|(k, w)| {
            let v = q.iter().find(|(k2, _)| k2 == k).map_or(0.0, |x| x.1);
            (w / sp - v / sq).abs()
        })
        .sum::<f64>()
}

/// Spectral norm by power iteration on `a†a`.
pub fn power_norm(a: &ComplexMatrix) -> f64 {
    let n = a.cols();
    let g = a.dagger().matmul(a).unwrap();
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + i as f64 * 0.37, 0.11 * i as f64))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| g[(i, j)] * v[j]).sum()).collect();
        let nw = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nw == 0.0 {
            return 0.0;
        }
        lambda = nw;
        v = w.iter().map(|x| x / nw).collect();
    }
    lambda.sqrt()
}
