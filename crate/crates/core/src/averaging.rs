//! Unitary averaging networks, the distribution-averaging baseline, and
//! heralded linear combinations of unitaries.
//!
//! A network interferes `N` copies `U_k` of an m-mode transform. Each
//! original input mode is spread over `N` copies by an encoder `E`, the
//! copies act in parallel, a decoder `D` recombines them, and the `(N−1)m`
//! ancilla modes are heralded on vacuum. On success the original modes see
//!
//! ```text
//! M_N = Σ_k α_k U_k,   α_k = E_{0,k} D_{0,k}
//! ```
//!
//! With DFT encoders `α_k = 1/N` and `M_N` is the plain average of the copies.
//!
//! Global modes are ordered copy-major: mode `(k, j)` of copy `k` has index
//! `k·m + j`, so copy 0 holds the original modes.

use num_complex::Complex64;
use serde::Serialize;

use crate::cmatrix::{dft, direct_sum, eig_hermitian, ComplexMatrix};
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::sampling::{heralded_distribution, ideal_distribution, pairwise_sum, Distribution};

/// `N` copies plus encoder/decoder pair.
#[derive(Debug, Clone, Serialize)]
pub struct AveragingNetwork {
    copies: Vec<ComplexMatrix>,
    encoder: ComplexMatrix,
    decoder: ComplexMatrix,
    #[serde(serialize_with = "serialize_complex_vec")]
    alpha: Vec<Complex64>,
}

fn serialize_complex_vec<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

fn common_dimension(copies: &[ComplexMatrix]) -> Result<usize> {
    let first = copies
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one copy is required".into()))?;
    let m = first.require_square()?;
    for (k, c) in copies.iter().enumerate() {
        if c.rows() != m || c.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "copy {k} is {}x{}, expected {m}x{m}",
                c.rows(),
                c.cols()
            )));
        }
    }
    Ok(m)
}

impl AveragingNetwork {
    pub fn new(copies: Vec<ComplexMatrix>, encoder: ComplexMatrix, decoder: ComplexMatrix) -> Result<Self> {
        common_dimension(&copies)?;
        let n = copies.len();
        for (name, x) in [("encoder", &encoder), ("decoder", &decoder)] {
            if x.rows() != n || x.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n} for {n} copies",
                    x.rows(),
                    x.cols()
                )));
            }
            x.require_unitary(1e-10)?;
        }
        let alpha = (0..n).map(|k| encoder[(0, k)] * decoder[(0, k)]).collect();
        Ok(Self {
            copies,
            encoder,
            decoder,
            alpha,
        })
    }

    /// Plain unitary averaging with DFT encoder and decoder.
    pub fn uniform(copies: Vec<ComplexMatrix>) -> Result<Self> {
        let f = dft(copies.len())?;
        Self::new(copies, f.clone(), f)
    }

    pub fn copy_count(&self) -> usize {
        self.copies.len()
    }

    pub fn modes(&self) -> usize {
        self.copies[0].rows()
    }

    pub fn copies(&self) -> &[ComplexMatrix] {
        &self.copies
    }

    pub fn encoder(&self) -> &ComplexMatrix {
        &self.encoder
    }

    pub fn decoder(&self) -> &ComplexMatrix {
        &self.decoder
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    /// `Σ_k α_k U_k`, the transform applied to the original modes on success.
    pub fn effective_transform(&self) -> ComplexMatrix {
        let m = self.modes();
        self.copies
            .iter()
            .zip(&self.alpha)
            .fold(ComplexMatrix::zeros(m, m), |acc, (u, &a)| &acc + &u.scale(a))
    }
}

/// Arithmetic mean of the copies, `(1/N) Σ U_j`.
pub fn unitary_average(copies: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let m = common_dimension(copies)?;
    let sum = copies.iter().fold(ComplexMatrix::zeros(m, m), |acc, u| &acc + u);
    Ok(sum.scale_real(1.0 / copies.len() as f64))
}

/// The full `(N·m)`-mode unitary `(D ⊗ I_m) · ⊕_k U_k · (Eᵀ ⊗ I_m)` of a
/// network. Its top-left `m×m` block is `Σ_k α_k U_k`.
pub fn build_global_unitary(net: &AveragingNetwork) -> Result<ComplexMatrix> {
    let m = net.modes();
    let id = ComplexMatrix::identity(m);
    let enc = net.encoder.transpose().kron(&id);
    let dec = net.decoder.kron(&id);
    let copies = direct_sum(&net.copies)?;
    dec.matmul(&copies)?.matmul(&enc)
}

/// Heralded output of the averaged transform, plus its success probability.
pub fn ua_distribution(copies: &[ComplexMatrix], input: &FockState) -> Result<(Distribution, f64)> {
    let avg = unitary_average(copies)?;
    let d = heralded_distribution(&avg, input)?;
    let p = d.herald_probability();
    Ok((d, p))
}

/// Simulates a unitary on `total` modes with `input` on the first
/// `input.modes()` modes and vacuum elsewhere, then heralds vacuum on every
/// mode beyond the first `input.modes()`. Enumerates every output
/// configuration of the large system, so only usable for small systems.
pub fn heralded_by_full_simulation(global: &ComplexMatrix, input: &FockState) -> Result<(Distribution, f64)> {
    let total = global.require_square()?;
    let m = input.modes();
    if m > total {
        return Err(Error::DimensionMismatch(format!(
            "input on {m} modes does not fit a {total}-mode unitary"
        )));
    }
    let mut padded = input.occupations().to_vec();
    padded.resize(total, 0);
    let full = ideal_distribution(global, &FockState::new(padded))?;

    let small = std::sync::Arc::new(crate::fock::enumerate_basis(m, input.photons())?);
    let mut w = vec![0.0; small.len()];
    for (state, &p) in full.basis().states().iter().zip(full.probs()) {
        let occ = state.occupations();
        if occ[m..].iter().all(|&k| k == 0) {
            let idx = small
                .index_of(&FockState::new(occ[..m].to_vec()))
                .expect("restricted state lies in the small basis");
            w[idx] = p;
        }
    }
    let p_post = pairwise_sum(&w);
    if p_post.is_nan() || p_post < 1e-300 {
        return Err(Error::ZeroHeraldProbability);
    }
    let probs = w.iter().map(|x| x / p_post).collect();
    Ok((Distribution::new(small, probs, p_post)?, p_post))
}

/// Entrywise mean of unheralded distributions on a common basis.
pub fn distribution_average(dists: &[Distribution]) -> Result<Distribution> {
    let first = dists
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one distribution is required".into()))?;
    for d in dists {
        if !d.same_basis(first) {
            return Err(Error::BasisMismatch);
        }
        if d.herald_probability() != 1.0 {
            return Err(Error::InvalidArgument(
                "distribution averaging expects unheralded distributions".into(),
            ));
        }
    }
    let n = dists.len() as f64;
    let probs = (0..first.probs().len())
        .map(|i| {
            let col: Vec<f64> = dists.iter().map(|d| d.probs()[i]).collect();
            pairwise_sum(&col) / n
        })
        .collect();
    Distribution::new(first.shared_basis(), probs, 1.0)
}

/// Encoder and decoder whose first rows multiply to `alpha / ‖alpha‖₁`.
///
/// First rows are `E_{0,k} = √|α_k| e^{i arg α_k} / √‖α‖₁` and
/// `D_{0,k} = √|α_k| / √‖α‖₁`; the remaining rows come from Gram–Schmidt
/// over the standard basis, skipping vectors whose residual norm is below
/// 1e-8. Returns `(E, D, ‖α‖₁)`.
pub fn lcu_encoders(alpha: &[Complex64]) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    if alpha.is_empty() {
        return Err(Error::InvalidArgument("coefficient list is empty".into()));
    }
    let scale: f64 = alpha.iter().map(|a| a.norm()).sum();
    if scale == 0.0 {
        return Err(Error::InvalidArgument("all coefficients are zero".into()));
    }
    let e0: Vec<Complex64> = alpha
        .iter()
        .map(|a| Complex64::from_polar((a.norm() / scale).sqrt(), if a.norm() > 0.0 { a.arg() } else { 0.0 }))
        .collect();
    let d0: Vec<Complex64> = alpha
        .iter()
        .map(|a| Complex64::new((a.norm() / scale).sqrt(), 0.0))
        .collect();
    Ok((complete_unitary(e0)?, complete_unitary(d0)?, scale))
}

fn complete_unitary(first: Vec<Complex64>) -> Result<ComplexMatrix> {
    let n = first.len();
    let mut rows = vec![first];
    for j in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[j] = Complex64::new(1.0, 0.0);
        for _pass in 0..2 {
            for r in &rows {
                let proj: Complex64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(r) {
                    *x -= proj * a;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        rows.push(v.into_iter().map(|x| x / norm).collect());
    }
    if rows.len() != n {
        return Err(Error::InvalidArgument("could not complete rows to a unitary".into()));
    }
    let m = ComplexMatrix::from_rows(&rows);
    m.require_unitary(1e-10)?;
    Ok(m)
}

/// Up to four unitaries and coefficients with `Σ c_k V_k = target`.
#[derive(Debug, Clone, Serialize)]
pub struct LcuSpec {
    pub unitaries: Vec<ComplexMatrix>,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub coefficients: Vec<Complex64>,
    /// `Σ |c_k|`, the factor the heralded network divides the target by.
    pub scale: f64,
}

impl LcuSpec {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let m = self.unitaries[0].rows();
        self.unitaries
            .iter()
            .zip(&self.coefficients)
            .fold(ComplexMatrix::zeros(m, m), |acc, (u, &c)| &acc + &u.scale(c))
    }
}

/// Writes a contraction as a combination of at most four unitaries.
///
/// With `H₁ = (M + M†)/2` and `H₂ = (M − M†)/(2i)`, each Hermitian part with
/// `‖H‖ ≤ 1` equals `(V₊ + V₋)/2` for the unitaries `V± = H ± i√(I − H²)`,
/// so `M = ½V₁₊ + ½V₁₋ + (i/2)V₂₊ + (i/2)V₂₋`. Parts with norm below 1e-12
/// are dropped; a unitary target is returned as a single term.
pub fn decompose_into_unitaries(target: &ComplexMatrix) -> Result<LcuSpec> {
    let m = target.require_square()?;
    let norm = target.operator_norm();
    if norm > 1.0 + 1e-9 {
        return Err(Error::NormTooLarge(norm));
    }
    if target.unitarity_error()? < 1e-10 {
        return Ok(LcuSpec {
            unitaries: vec![target.clone()],
            coefficients: vec![Complex64::new(1.0, 0.0)],
            scale: 1.0,
        });
    }
    let dag = target.dagger();
    let h1 = (target + &dag).scale_real(0.5);
    let h2 = (target - &dag).scale(Complex64::new(0.0, -0.5));
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);

    let mut unitaries = Vec::new();
    let mut coefficients = Vec::new();
    for (h, c) in [(h1, half), (h2, half_i)] {
        if h.operator_norm() < 1e-12 {
            continue;
        }
        let (vals, w) = eig_hermitian(&h)?;
        let root: Vec<Complex64> = vals
            .iter()
            .map(|&l| {
                let l = l.clamp(-1.0, 1.0);
                Complex64::new((1.0 - l * l).max(0.0).sqrt(), 0.0)
            })
            .collect();
        let sqrt_part = &(&w * &ComplexMatrix::from_diag(&root)) * &w.dagger();
        let i_sqrt = sqrt_part.scale(Complex64::new(0.0, 1.0));
        unitaries.push(&h + &i_sqrt);
        unitaries.push(&h - &i_sqrt);
        coefficients.push(c);
        coefficients.push(c);
    }
    if unitaries.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{m}x{m} target has no component above 1e-12"
        )));
    }
    let scale = coefficients.iter().map(|c| c.norm()).sum();
    Ok(LcuSpec {
        unitaries,
        coefficients,
        scale,
    })
}

/// Heralded network realising `target / scale` on the original modes.
pub fn lcu_network(target: &ComplexMatrix) -> Result<(LcuSpec, AveragingNetwork)> {
    let spec = decompose_into_unitaries(target)?;
    let (e, d, _) = lcu_encoders(&spec.coefficients)?;
    let net = AveragingNetwork::new(spec.unitaries.clone(), e, d)?;
    Ok((spec, net))
}

/// Probability that at least one photon leaves through an ancilla mode of a
/// uniform averaging network, `1 − p_post`. Zero exactly when every copy is
/// the same unitary.
pub fn repeatability_witness(copies: &[ComplexMatrix], input: &FockState) -> Result<f64> {
    let avg = unitary_average(copies)?;
    match heralded_distribution(&avg, input) {
        Ok(d) => Ok((1.0 - d.herald_probability()).max(0.0)),
        Err(Error::ZeroHeraldProbability) => Ok(1.0),
        Err(e) => Err(e),
    }
}
