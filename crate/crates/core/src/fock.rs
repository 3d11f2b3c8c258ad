//! n-photon state space and permanents.
//!
//! The Fock basis of `n` photons in `m` modes holds every occupation vector
//! with `Σ x_i = n`, `C(m+n−1, n)` states in total, ordered
//! lexicographically descending: `(2,0), (1,1), (0,2)` for `m = n = 2`.
//! Every distribution in the crate is indexed by this order.
//!
//! The amplitude for `n` photons to go from input `x` to output `y` through a
//! single-photon transform `A` is `Perm(A_{y,x}) / √(∏x_i! ∏y_j!)`, where
//! `A_{y,x}` repeats column `j` of `A` `x_j` times and row `i` `y_i` times.
//! Collecting these amplitudes gives the n-photon lift [`phi_matrix`], which
//! is multiplicative (`φ(AB) = φ(A)φ(B)`) and homogeneous of degree `n`.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmatrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Photon counts per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(Vec<usize>);

impl FockState {
    pub fn new(occupations: Vec<usize>) -> Self {
        Self(occupations)
    }

    /// `n` single photons in the first `n` of `m` modes.
    pub fn single_photons(m: usize, n: usize) -> Result<Self> {
        if n > m {
            return Err(Error::InvalidArgument(format!(
                "cannot place {n} single photons in {m} modes"
            )));
        }
        Ok(Self((0..m).map(|i| usize::from(i < n)).collect()))
    }

    pub fn occupations(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> usize {
        self.0.iter().sum()
    }

    /// Mode indices with multiplicity, e.g. `(2,0,1) → [0, 0, 2]`.
    pub fn mode_list(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
            .collect()
    }

    /// `∏ x_i!`
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&k| factorial(k)).product()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl std::str::FromStr for FockState {
    type Err = Error;

    /// Parses `"1,0,1"` or `"(1,0,1)"`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let occ = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad occupation '{t}' in '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(occ))
    }
}

const FACTORIALS: [f64; 21] = {
    let mut t = [1.0; 21];
    let mut i = 1;
    while i < 21 {
        t[i] = t[i - 1] * i as f64;
        i += 1;
    }
    t
};

/// `k!` in double precision (table up to 20).
pub fn factorial(k: usize) -> f64 {
    if k < FACTORIALS.len() {
        FACTORIALS[k]
    } else {
        (1..=k).map(|i| i as f64).product()
    }
}

/// All occupation vectors with a fixed photon count, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    m: usize,
    n: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl FockBasis {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn index_of(&self, s: &FockState) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Enumerates `FockBasis(m, n)` in lexicographically descending order.
pub fn enumerate_basis(m: usize, n: usize) -> Result<FockBasis> {
    if m == 0 {
        return Err(Error::InvalidArgument("mode count must be at least 1".into()));
    }
    fn rec(m: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<FockState>) {
        if prefix.len() == m - 1 {
            prefix.push(left);
            out.push(FockState(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(m, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut states = Vec::new();
    rec(m, n, &mut Vec::with_capacity(m), &mut states);
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(FockBasis { m, n, states, index })
}

/// `C(m+n−1, n)`, the size of the n-photon basis on m modes.
pub fn basis_size(m: usize, n: usize) -> usize {
    let mut r: u128 = 1;
    for i in 0..n as u128 {
        r = r * (m as u128 + i) / (i + 1);
    }
    r as usize
}

/// Permanent by summing over all permutations. Exponential in `n!`; kept as
/// an independent check on [`permanent_ryser`].
pub fn permanent_naive(a: &ComplexMatrix) -> Result<Complex64> {
    let n = a.require_square()?;
    if n > 9 {
        return Err(Error::InvalidArgument(format!(
            "naive permanent limited to 9x9, got {n}x{n}"
        )));
    }
    fn rec(a: &ComplexMatrix, row: usize, used: &mut [bool], acc: Complex64) -> Complex64 {
        let n = used.len();
        if row == n {
            return acc;
        }
        let mut total = Complex64::new(0.0, 0.0);
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                total += rec(a, row + 1, used, acc * a[(row, c)]);
                used[c] = false;
            }
        }
        total
    }
    Ok(rec(a, 0, &mut vec![false; n], Complex64::new(1.0, 0.0)))
}

/// Ryser's formula with Gray-code subset enumeration, `O(n 2ⁿ)`.
///
/// `Perm(A) = (−1)ⁿ Σ_{S ⊆ cols} (−1)^{|S|} ∏_i Σ_{j∈S} a_ij`; successive
/// subsets differ in one column, so the row sums update in `O(n)`.
pub fn permanent_ryser(a: &ComplexMatrix) -> Result<Complex64> {
    let n = a.require_square()?;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if n > 30 {
        return Err(Error::InvalidArgument(format!("permanent of {n}x{n} is out of reach")));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << flipped) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += a[(i, flipped)];
            } else {
                *s -= a[(i, flipped)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if next.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    Ok(if n % 2 == 1 { -total } else { total })
}

fn check_transition(a: &ComplexMatrix, input: &FockState, output: &FockState) -> Result<()> {
    let m = a.require_square()?;
    for s in [input, output] {
        if s.modes() != m {
            return Err(Error::DimensionMismatch(format!(
                "state {s} has {} modes, matrix has {m}",
                s.modes()
            )));
        }
    }
    if input.photons() != output.photons() {
        return Err(Error::PhotonMismatch {
            input: input.photons(),
            output: output.photons(),
        });
    }
    Ok(())
}

/// `n×n` matrix with row `i` of `a` repeated `output_i` times and column `j`
/// repeated `input_j` times.
pub fn build_submatrix(a: &ComplexMatrix, input: &FockState, output: &FockState) -> Result<ComplexMatrix> {
    check_transition(a, input, output)?;
    a.sub_matrix(&output.mode_list(), &input.mode_list())
}

/// `⟨output| φ(a) |input⟩ = Perm(a_{output,input}) / √(∏input! ∏output!)`.
pub fn transition_amplitude(a: &ComplexMatrix, input: &FockState, output: &FockState) -> Result<Complex64> {
    let sub = build_submatrix(a, input, output)?;
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent_ryser(&sub)? / norm)
}

/// The n-photon lift of an m×m transform onto `FockBasis(m, n)`, with entry
/// `[y][x] = transition_amplitude(a, x, y)`. Columns are computed in
/// parallel; each entry is independent so the result does not depend on the
/// worker count.
pub fn phi_matrix(a: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let m = a.require_square()?;
    let basis = enumerate_basis(m, n)?;
    let dim = basis.len();
    let columns: Vec<Vec<Complex64>> = basis
        .states()
        .par_iter()
        .map(|x| {
            basis
                .states()
                .iter()
                .map(|y| transition_amplitude(a, x, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (c, col) in columns.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            out[(r, c)] = z;
        }
    }
    Ok(out)
}
