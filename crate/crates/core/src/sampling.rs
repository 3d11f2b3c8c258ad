//! Output distributions, total variation distance and distance bounds.
//!
//! Distributions are computed exactly over the whole Fock basis, one
//! permanent per output configuration. That costs `O(C(m+n−1, n) · n 2ⁿ)`
//! per distribution, fine at desk scale. The bounds need only operator norms
//! and the two heralding probabilities, and coarse-grained methods can
//! produce those probabilities in `O(log(n) n³ 2ⁿ)` (not implemented here).

use std::sync::Arc;

use serde::Serialize;

use crate::cmatrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, transition_amplitude, FockBasis, FockState};

/// Normalised output probabilities over a Fock basis, together with the
/// heralding probability that normalised them (1 when unheralded).
#[derive(Debug, Clone)]
pub struct Distribution {
    basis: Arc<FockBasis>,
    probs: Vec<f64>,
    herald_probability: f64,
}

impl Distribution {
    /// Validates normalisation (to 1e-9) and clamps tiny negatives to zero.
    pub fn new(basis: Arc<FockBasis>, probs: Vec<f64>, herald_probability: f64) -> Result<Self> {
        if probs.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a basis of {}",
                probs.len(),
                basis.len()
            )));
        }
        if probs.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
            return Err(Error::InvalidArgument("negative or non-finite probability".into()));
        }
        let probs: Vec<f64> = probs.into_iter().map(|p| p.max(0.0)).collect();
        let total = pairwise_sum(&probs);
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            basis,
            probs,
            herald_probability,
        })
    }

    /// Point mass on one basis state.
    pub fn point_mass(basis: Arc<FockBasis>, state: &FockState) -> Result<Self> {
        let idx = basis
            .index_of(state)
            .ok_or_else(|| Error::InvalidArgument(format!("{state} is not in the basis")))?;
        let mut probs = vec![0.0; basis.len()];
        probs[idx] = 1.0;
        Self::new(basis, probs, 1.0)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn shared_basis(&self) -> Arc<FockBasis> {
        Arc::clone(&self.basis)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn herald_probability(&self) -> f64 {
        self.herald_probability
    }

    pub fn prob(&self, state: &FockState) -> Option<f64> {
        self.basis.index_of(state).map(|i| self.probs[i])
    }

    pub fn same_basis(&self, other: &Distribution) -> bool {
        self.basis.m() == other.basis.m() && self.basis.n() == other.basis.n()
    }
}

/// Sum with a fixed binary tree so results do not depend on how the caller
/// chunked the work.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn unnormalised_weights(a: &ComplexMatrix, input: &FockState) -> Result<(Arc<FockBasis>, Vec<f64>)> {
    let m = a.require_square()?;
    if input.modes() != m {
        return Err(Error::DimensionMismatch(format!(
            "input {input} has {} modes, transform has {m}",
            input.modes()
        )));
    }
    let basis = Arc::new(enumerate_basis(m, input.photons())?);
    let w = basis
        .states()
        .iter()
        .map(|y| transition_amplitude(a, input, y).map(|z| z.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    Ok((basis, w))
}

/// `P_U(y) = |Perm(U_{y,x})|² / (∏x! ∏y!)` for a unitary `u`.
pub fn ideal_distribution(u: &ComplexMatrix, input: &FockState) -> Result<Distribution> {
    u.require_unitary(1e-8)?;
    let (basis, w) = unnormalised_weights(u, input)?;
    let total = pairwise_sum(&w);
    let probs = w.iter().map(|x| x / total).collect();
    Distribution::new(basis, probs, 1.0)
}

/// Output distribution of a vacuum-heralded transform `a` with `‖a‖ ≤ 1`.
///
/// The unnormalised weights `|⟨y|φ(a)|x⟩|²` sum to the heralding probability
/// `p_a`; the returned distribution is normalised by it.
pub fn heralded_distribution(a: &ComplexMatrix, input: &FockState) -> Result<Distribution> {
    let norm = a.operator_norm();
    if norm > 1.0 + 1e-9 {
        return Err(Error::NormTooLarge(norm));
    }
    let (basis, w) = unnormalised_weights(a, input)?;
    let p = pairwise_sum(&w);
    if p.is_nan() || p < 1e-300 {
        return Err(Error::ZeroHeraldProbability);
    }
    let probs = w.iter().map(|x| x / p).collect();
    Distribution::new(basis, probs, p)
}

/// `½ Σ |d1(x) − d2(x)|`.
pub fn tvd(d1: &Distribution, d2: &Distribution) -> Result<f64> {
    if !d1.same_basis(d2) {
        return Err(Error::BasisMismatch);
    }
    let diffs: Vec<f64> = d1.probs.iter().zip(&d2.probs).map(|(a, b)| (a - b).abs()).collect();
    Ok((0.5 * pairwise_sum(&diffs)).clamp(0.0, 1.0))
}

/// `n ‖u − v‖_op`, the distance bound between the output distributions of
/// two unitary interferometers.
pub fn arkhipov_bound(u: &ComplexMatrix, v: &ComplexMatrix, n: usize) -> Result<f64> {
    Ok(n as f64 * u.try_sub(v)?.operator_norm())
}

/// Result of [`theorem1_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeraldedBound {
    pub bound: f64,
    /// `max(‖A'‖, ‖B'‖, 1)` with `A' = a p_a^{−1/2n}`, `B' = b p_b^{−1/2n}`.
    pub k: f64,
    /// Both transforms have `|det| > 1e-12`. When false the bound is still
    /// reported but the invertibility hypothesis it rests on does not hold.
    pub invertible: bool,
}

/// Distance bound between the distributions of two vacuum-heralded
/// transforms: `n k^{n−1} ‖a p_a^{−1/2n} − b p_b^{−1/2n}‖_op` with
/// `k = max(‖a p_a^{−1/2n}‖, ‖b p_b^{−1/2n}‖, 1)`.
///
/// Any `k ≥ 1` dominating both rescaled norms is valid; the smallest such
/// value is used here.
pub fn theorem1_bound(a: &ComplexMatrix, p_a: f64, b: &ComplexMatrix, p_b: f64, n: usize) -> Result<HeraldedBound> {
    if p_a.is_nan() || p_b.is_nan() || p_a <= 0.0 || p_b <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "heralding probabilities must be positive, got {p_a} and {p_b}"
        )));
    }
    if n == 0 {
        return Ok(HeraldedBound {
            bound: 0.0,
            k: 1.0,
            invertible: is_invertible(a)? && is_invertible(b)?,
        });
    }
    let exponent = -1.0 / (2.0 * n as f64);
    let a_s = a.scale_real(p_a.powf(exponent));
    let b_s = b.scale_real(p_b.powf(exponent));
    let k = a_s.operator_norm().max(b_s.operator_norm()).max(1.0);
    let dist = a_s.try_sub(&b_s)?.operator_norm();
    Ok(HeraldedBound {
        bound: n as f64 * k.powi(n as i32 - 1) * dist,
        k,
        invertible: is_invertible(a)? && is_invertible(b)?,
    })
}

fn is_invertible(a: &ComplexMatrix) -> Result<bool> {
    Ok(a.determinant()?.norm() > 1e-12)
}

/// Uniform-depth lower bound on the averaging success probability,
/// `(1 − ν/2)^{2dn}`.
pub fn p_uni(nu: f64, d: usize, n: usize) -> Result<f64> {
    if !(0.0..2.0).contains(&nu) {
        return Err(Error::InvalidArgument(format!("nu must lie in [0, 2), got {nu}")));
    }
    Ok((1.0 - nu / 2.0).powi((2 * d * n) as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::haar_random;
    use crate::rng::RandomStream;
    use num_complex::Complex64;

    fn st(v: &[usize]) -> FockState {
        FockState::new(v.to_vec())
    }

    fn hom() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[vec![s, s], vec![s, -s]])
    }

    #[test]
    fn ideal_identity_point_mass() {
        let d = ideal_distribution(&ComplexMatrix::identity(3), &st(&[1, 1, 0])).unwrap();
        assert_eq!(d.prob(&st(&[1, 1, 0])), Some(1.0));
        assert_eq!(d.herald_probability(), 1.0);
    }

    #[test]
    fn hong_ou_mandel() {
        let d = ideal_distribution(&hom(), &st(&[1, 1])).unwrap();
        assert!((d.probs()[0] - 0.5).abs() < 1e-15);
        assert!(d.probs()[1].abs() < 1e-15);
        assert!((d.probs()[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ideal_normalised_and_rejects_non_unitary() {
        let u = haar_random(3, &mut RandomStream::from_seed(2));
        let d = ideal_distribution(&u, &st(&[1, 1, 0])).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            ideal_distribution(&half, &st(&[1, 1])),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn heralded_scaled_identity() {
        let a = ComplexMatrix::identity(2).scale(Complex64::from_polar(0.9, 0.4));
        let d = heralded_distribution(&a, &st(&[1, 1])).unwrap();
        assert!((d.prob(&st(&[1, 1])).unwrap() - 1.0).abs() < 1e-12);
        assert!((d.herald_probability() - 0.6561).abs() < 1e-12);
    }

    #[test]
    fn heralded_unitary_matches_ideal() {
        let u = haar_random(3, &mut RandomStream::from_seed(4));
        let input = st(&[1, 0, 1]);
        let h = heralded_distribution(&u, &input).unwrap();
        let i = ideal_distribution(&u, &input).unwrap();
        assert!(tvd(&h, &i).unwrap() < 1e-12);
        assert!((h.herald_probability() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn heralded_errors() {
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            heralded_distribution(&z, &st(&[1, 0])),
            Err(Error::ZeroHeraldProbability)
        ));
        let big = ComplexMatrix::identity(2).scale_real(1.1);
        assert!(matches!(
            heralded_distribution(&big, &st(&[1, 0])),
            Err(Error::NormTooLarge(_))
        ));
    }

    #[test]
    fn tvd_cases() {
        let basis = Arc::new(enumerate_basis(2, 2).unwrap());
        let a = Distribution::new(basis.clone(), vec![0.5, 0.5, 0.0], 1.0).unwrap();
        let b = Distribution::new(basis.clone(), vec![0.5, 0.0, 0.5], 1.0).unwrap();
        assert_eq!(tvd(&a, &a).unwrap(), 0.0);
        assert!((tvd(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        let p = Distribution::point_mass(basis.clone(), &st(&[2, 0])).unwrap();
        let q = Distribution::point_mass(basis, &st(&[0, 2])).unwrap();
        assert_eq!(tvd(&p, &q).unwrap(), 1.0);
        let other = Distribution::point_mass(Arc::new(enumerate_basis(3, 1).unwrap()), &st(&[1, 0, 0])).unwrap();
        assert!(matches!(tvd(&p, &other), Err(Error::BasisMismatch)));
    }

    #[test]
    fn distribution_rejects_bad_mass() {
        let basis = Arc::new(enumerate_basis(2, 1).unwrap());
        assert!(Distribution::new(basis.clone(), vec![0.5, 0.4], 1.0).is_err());
        assert!(Distribution::new(basis.clone(), vec![1.1, -0.1], 1.0).is_err());
        let d = Distribution::new(basis, vec![1.0 + 1e-13, -1e-13], 1.0).unwrap();
        assert_eq!(d.probs()[1], 0.0);
    }

    #[test]
    fn arkhipov_cases() {
        let u = haar_random(3, &mut RandomStream::from_seed(1));
        assert_eq!(arkhipov_bound(&u, &u, 3).unwrap(), 0.0);
        let z = ComplexMatrix::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert!((arkhipov_bound(&ComplexMatrix::identity(2), &z, 1).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theorem1_cases() {
        let u = haar_random(2, &mut RandomStream::from_seed(3));
        let same = theorem1_bound(&u, 1.0, &u, 1.0, 2).unwrap();
        assert_eq!(same.bound, 0.0);
        assert!(same.invertible);
        // b = 0.9 U heralds with p = 0.9^{2n}, so both rescale to U
        let n = 2;
        let b = u.scale_real(0.9);
        let r = theorem1_bound(&u, 1.0, &b, 0.9f64.powi(2 * n as i32), n).unwrap();
        assert!(r.bound < 1e-12);
        assert!(theorem1_bound(&u, 0.0, &u, 1.0, 2).is_err());
        let singular = ComplexMatrix::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!(!theorem1_bound(&u, 1.0, &singular, 0.5, 2).unwrap().invertible);
    }

    #[test]
    fn p_uni_cases() {
        assert_eq!(p_uni(0.0, 5, 3).unwrap(), 1.0);
        assert_eq!(p_uni(0.3, 5, 0).unwrap(), 1.0);
        assert!((p_uni(0.01, 2, 2).unwrap() - 0.995f64.powi(8)).abs() < 1e-15);
        assert!((p_uni(0.01, 2, 2).unwrap() - 0.960_693_043_575_472).abs() < 1e-12);
        assert!(p_uni(2.0, 1, 1).is_err());
        assert!(p_uni(-0.1, 1, 1).is_err());
    }

    #[test]
    fn pairwise_sum_small() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }
}
