//! Rectangular (Clements) interferometer meshes and the stochastic
//! beamsplitter error model.
//!
//! A beamsplitter element acting on modes `(top, top + 1)` has the 2×2 action
//!
//! ```text
//! B(θ, φ) = [ e^{iφ} cos θ   −sin θ ]
//!           [ e^{iφ} sin θ    cos θ ]
//! ```
//!
//! i.e. a phase `φ` on the top input followed by a real rotation `R(θ)`. A
//! mesh applies its layers in order and finishes with a diagonal layer of
//! output phases: `U = diag(e^{iψ}) · L_K ⋯ L_1`.
//!
//! Noise perturbs every angle by an independent zero-mean Gaussian of
//! variance `ν`. Because `E[cos(θ+δ)] = e^{-ν/2} cos θ`,
//! `E[sin(θ+δ)] = e^{-ν/2} sin θ` and `E[e^{i(φ+δ)}] = e^{-ν/2} e^{iφ}`,
//! each noisy factor a photon path crosses shrinks its mean by the same
//! amount. [`uniform_depth_pad`] rewrites a mesh so every path crosses the
//! same number `d` of noisy factors, which gives
//! `E[U_i] = e^{-νd/2} U ≈ (1 − ν/2)^d U` exactly under the model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmatrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// A tunable beamsplitter with reflectivity angle `theta` and input phase `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterElement {
    pub top: usize,
    pub theta: f64,
    pub phi: f64,
}

/// One element of a mesh layer.
///
/// Clements decompositions contain only beamsplitters. Uniform-depth padding
/// splits each beamsplitter into a phase shifter on its top mode and a bare
/// coupler, and fills idle slots with phase shifters at zero phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshElement {
    BeamSplitter(BeamSplitterElement),
    /// Real rotation `[[cos θ, −sin θ], [sin θ, cos θ]]` on `(top, top + 1)`.
    Coupler {
        top: usize,
        theta: f64,
    },
    /// Single-mode phase shifter `e^{iφ}`.
    Phase {
        mode: usize,
        phi: f64,
    },
}

impl MeshElement {
    fn modes(&self) -> (usize, Option<usize>) {
        match *self {
            MeshElement::BeamSplitter(b) => (b.top, Some(b.top + 1)),
            MeshElement::Coupler { top, .. } => (top, Some(top + 1)),
            MeshElement::Phase { mode, .. } => (mode, None),
        }
    }

    /// Number of noisy parameters on the element.
    fn param_count(&self) -> usize {
        match self {
            MeshElement::BeamSplitter(_) => 2,
            MeshElement::Coupler { .. } | MeshElement::Phase { .. } => 1,
        }
    }
}

/// Ordered layers of non-overlapping elements plus a final output phase layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub m: usize,
    pub layers: Vec<Vec<MeshElement>>,
    pub output_phases: Vec<f64>,
}

impl MeshSpec {
    /// Checks mode ranges, that no two elements of a layer share a mode, and
    /// the output phase count.
    pub fn validate(&self) -> Result<()> {
        if self.output_phases.len() != self.m {
            return Err(Error::InvalidArgument(format!(
                "mesh on {} modes has {} output phases",
                self.m,
                self.output_phases.len()
            )));
        }
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.m];
            for el in layer {
                let (a, b) = el.modes();
                for k in std::iter::once(a).chain(b) {
                    if k >= self.m {
                        return Err(Error::IndexOutOfRange { index: k, dim: self.m });
                    }
                    if used[k] {
                        return Err(Error::InvalidArgument(format!(
                            "layer {li} has overlapping elements on mode {k}"
                        )));
                    }
                    used[k] = true;
                }
            }
        }
        Ok(())
    }

    pub fn element_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn beamsplitter_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|e| matches!(e, MeshElement::BeamSplitter(_) | MeshElement::Coupler { .. }))
            .count()
    }

    /// Total number of noisy parameters, including output phases.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .map(MeshElement::param_count)
            .sum::<usize>()
            + self.m
    }

    /// Depth `d` of a uniform mesh: the number of noisy factors on every
    /// path, counting the output phase layer. `None` if some path crosses a
    /// different number of factors than another.
    pub fn uniform_depth(&self) -> Option<usize> {
        for layer in &self.layers {
            let mut covered = vec![0usize; self.m];
            for el in layer {
                if matches!(el, MeshElement::BeamSplitter(_)) {
                    return None;
                }
                let (a, b) = el.modes();
                covered[a] += 1;
                if let Some(b) = b {
                    covered[b] += 1;
                }
            }
            if covered.iter().any(|&c| c != 1) {
                return None;
            }
        }
        Some(self.layers.len() + 1)
    }
}

/// Variance of the Gaussian perturbation applied to every mesh angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    nu: f64,
}

impl NoiseModel {
    pub fn gaussian(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be finite and non-negative, got {nu}"
            )));
        }
        Ok(Self { nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    fn draw(&self, rng: &mut RandomStream) -> f64 {
        self.nu.sqrt() * rng.normal()
    }
}

fn beamsplitter_block(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let e = Complex64::from_polar(1.0, phi);
    let (s, c) = theta.sin_cos();
    [[e * c, Complex64::new(-s, 0.0)], [e * s, Complex64::new(c, 0.0)]]
}

fn apply_rows(w: &mut ComplexMatrix, top: usize, b: &[[Complex64; 2]; 2]) {
    for col in 0..w.cols() {
        let x = w[(top, col)];
        let y = w[(top + 1, col)];
        w[(top, col)] = b[0][0] * x + b[0][1] * y;
        w[(top + 1, col)] = b[1][0] * x + b[1][1] * y;
    }
}

/// Multiplies out the mesh: layers in order, then the output phases.
pub fn mesh_to_unitary(spec: &MeshSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let mut w = ComplexMatrix::identity(spec.m);
    for layer in &spec.layers {
        for el in layer {
            match *el {
                MeshElement::BeamSplitter(b) => {
                    apply_rows(&mut w, b.top, &beamsplitter_block(b.theta, b.phi));
                }
                MeshElement::Coupler { top, theta } => {
                    apply_rows(&mut w, top, &beamsplitter_block(theta, 0.0));
                }
                MeshElement::Phase { mode, phi } => {
                    let e = Complex64::from_polar(1.0, phi);
                    for col in 0..spec.m {
                        w[(mode, col)] *= e;
                    }
                }
            }
        }
    }
    for (mode, &psi) in spec.output_phases.iter().enumerate() {
        let e = Complex64::from_polar(1.0, psi);
        for col in 0..spec.m {
            w[(mode, col)] *= e;
        }
    }
    Ok(w)
}

fn arg_or_zero(z: Complex64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        z.arg()
    }
}

/// Rectangular Clements decomposition of a unitary into `m(m−1)/2`
/// beamsplitters arranged in `m` layers (one layer for `m = 2`), followed by
/// output phases.
pub fn clements_decompose(u: &ComplexMatrix) -> Result<MeshSpec> {
    let m = u.require_square()?;
    u.require_unitary(1e-8)?;
    let mut w = u.clone();
    // elements applied from the right as w ← w·B†, in order
    let mut right: Vec<BeamSplitterElement> = Vec::new();
    // elements applied from the left as w ← B·w, in order
    let mut left: Vec<BeamSplitterElement> = Vec::new();

    for i in 1..m {
        if i % 2 == 1 {
            for j in 0..i {
                let p = i - j - 1;
                let r = m - 1 - j;
                let (a, b) = (w[(r, p)], w[(r, p + 1)]);
                let theta = a.norm().atan2(b.norm());
                let phi = if a.norm() == 0.0 {
                    0.0
                } else {
                    arg_or_zero(a) - arg_or_zero(b)
                };
                let e = Complex64::from_polar(1.0, -phi);
                let (s, c) = theta.sin_cos();
                for row in 0..m {
                    let x = w[(row, p)];
                    let y = w[(row, p + 1)];
                    w[(row, p)] = x * e * c - y * s;
                    w[(row, p + 1)] = x * e * s + y * c;
                }
                right.push(BeamSplitterElement { top: p, theta, phi });
            }
        } else {
            for j in 1..=i {
                let p = m + j - i - 2;
                let col = j - 1;
                let (a, b) = (w[(p, col)], w[(p + 1, col)]);
                let theta = b.norm().atan2(a.norm());
                let phi = if b.norm() == 0.0 {
                    0.0
                } else {
                    arg_or_zero(-b) - arg_or_zero(a)
                };
                apply_rows(&mut w, p, &beamsplitter_block(theta, phi));
                left.push(BeamSplitterElement { top: p, theta, phi });
            }
        }
    }

    // w is now diagonal: u = L_1† ⋯ L_K† · D · R_J ⋯ R_1. Push each L† through
    // D using L(θ,φ)† · diag(d1, d2) = diag(−e^{−iφ} d2, d2) · B(θ, arg(−d1/d2)).
    let mut diag: Vec<Complex64> = (0..m).map(|k| w[(k, k)]).collect();
    let mut moved = Vec::with_capacity(left.len());
    for el in left.iter().rev() {
        let (d1, d2) = (diag[el.top], diag[el.top + 1]);
        let phi = arg_or_zero(-d1 / d2);
        diag[el.top] = -Complex64::from_polar(1.0, -el.phi) * d2;
        diag[el.top + 1] = d2;
        moved.push(BeamSplitterElement {
            top: el.top,
            theta: el.theta,
            phi,
        });
    }

    // as-soon-as-possible layering of the application-ordered element list
    let mut layers: Vec<Vec<MeshElement>> = Vec::new();
    let mut depth_of_mode = vec![0usize; m];
    for el in right.into_iter().chain(moved) {
        let layer = depth_of_mode[el.top].max(depth_of_mode[el.top + 1]);
        if layers.len() <= layer {
            layers.push(Vec::new());
        }
        layers[layer].push(MeshElement::BeamSplitter(el));
        depth_of_mode[el.top] = layer + 1;
        depth_of_mode[el.top + 1] = layer + 1;
    }
    for layer in &mut layers {
        layer.sort_by_key(|e| e.modes().0);
    }

    Ok(MeshSpec {
        m,
        layers,
        output_phases: diag.iter().map(|d| arg_or_zero(*d)).collect(),
    })
}

/// Rewrites a mesh so every optical path crosses the same number of noisy
/// elements.
///
/// Each layer holding beamsplitters becomes two layers: a phase layer (the
/// beamsplitter's `φ` on its top mode, zero-phase shifters on every other
/// mode) and a coupler layer (the bare rotations, zero-phase shifters on idle
/// modes). Layers without beamsplitters only get their idle modes filled.
/// The action is unchanged; already-uniform meshes come back as-is.
pub fn uniform_depth_pad(spec: &MeshSpec) -> Result<MeshSpec> {
    spec.validate()?;
    let m = spec.m;
    let mut layers = Vec::new();
    for layer in &spec.layers {
        let has_bs = layer.iter().any(|e| matches!(e, MeshElement::BeamSplitter(_)));
        if has_bs {
            let mut phase_layer: Vec<MeshElement> = (0..m).map(|mode| MeshElement::Phase { mode, phi: 0.0 }).collect();
            let mut rest = Vec::new();
            for el in layer {
                match *el {
                    MeshElement::BeamSplitter(b) => {
                        phase_layer[b.top] = MeshElement::Phase {
                            mode: b.top,
                            phi: b.phi,
                        };
                        rest.push(MeshElement::Coupler {
                            top: b.top,
                            theta: b.theta,
                        });
                    }
                    other => rest.push(other),
                }
            }
            layers.push(phase_layer);
            layers.push(fill_idle(m, rest));
        } else {
            layers.push(fill_idle(m, layer.clone()));
        }
    }
    Ok(MeshSpec {
        m,
        layers,
        output_phases: spec.output_phases.clone(),
    })
}

fn fill_idle(m: usize, mut layer: Vec<MeshElement>) -> Vec<MeshElement> {
    let mut used = vec![false; m];
    for el in &layer {
        let (a, b) = el.modes();
        used[a] = true;
        if let Some(b) = b {
            used[b] = true;
        }
    }
    for (mode, _) in used.iter().enumerate().filter(|(_, &u)| !u) {
        layer.push(MeshElement::Phase { mode, phi: 0.0 });
    }
    layer.sort_by_key(|e| e.modes().0);
    layer
}

/// Shifts every angle of the mesh (θ and φ of beamsplitters, coupler θ,
/// phase-shifter φ, output phases) by an independent Gaussian draw of
/// variance `ν`. Draw order is layer by layer, element by element, then the
/// output phases, so a given stream always maps to the same perturbation.
pub fn perturb(spec: &MeshSpec, noise: &NoiseModel, rng: &mut RandomStream) -> MeshSpec {
    let mut out = spec.clone();
    for layer in &mut out.layers {
        for el in layer.iter_mut() {
            match el {
                MeshElement::BeamSplitter(b) => {
                    b.theta += noise.draw(rng);
                    b.phi += noise.draw(rng);
                }
                MeshElement::Coupler { theta, .. } => *theta += noise.draw(rng),
                MeshElement::Phase { phi, .. } => *phi += noise.draw(rng),
            }
        }
    }
    for psi in &mut out.output_phases {
        *psi += noise.draw(rng);
    }
    out
}

/// A target unitary prepared for repeated noisy realisation: decomposed and
/// padded once, perturbed per sample.
#[derive(Debug, Clone)]
pub struct NoisyInterferometer {
    target: ComplexMatrix,
    mesh: MeshSpec,
    depth: usize,
}

impl NoisyInterferometer {
    pub fn new(target: &ComplexMatrix) -> Result<Self> {
        let mesh = uniform_depth_pad(&clements_decompose(target)?)?;
        let depth = mesh.uniform_depth().expect("padding always yields a uniform mesh");
        Ok(Self {
            target: target.clone(),
            mesh,
            depth,
        })
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn mesh(&self) -> &MeshSpec {
        &self.mesh
    }

    /// Uniform depth `d` of the padded mesh.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn sample(&self, noise: &NoiseModel, rng: &mut RandomStream) -> ComplexMatrix {
        let noisy = perturb(&self.mesh, noise, rng);
        mesh_to_unitary(&noisy).expect("perturbation keeps the mesh valid")
    }
}

/// One stochastic realisation of `u`: decompose, pad to uniform depth,
/// perturb, rebuild. Returns the noisy unitary and the depth `d`.
pub fn sample_noisy_unitary(
    u: &ComplexMatrix,
    noise: &NoiseModel,
    rng: &mut RandomStream,
) -> Result<(ComplexMatrix, usize)> {
    let dev = NoisyInterferometer::new(u)?;
    Ok((dev.sample(noise, rng), dev.depth))
}

/// Closed-form mean of the noisy unitary, `(1 − ν/2)^d · U`.
pub fn mean_unitary_prediction(u: &ComplexMatrix, nu: f64, d: usize) -> ComplexMatrix {
    u.scale_real((1.0 - nu / 2.0).powi(d as i32))
}

/// Returns `spec` with `offset` added to the θ of the `index`-th beamsplitter
/// or coupler (counted in layer order). Models a systematic fabrication
/// deviation of one element.
pub fn offset_theta(spec: &MeshSpec, index: usize, offset: f64) -> Result<MeshSpec> {
    let mut out = spec.clone();
    let target = out
        .layers
        .iter_mut()
        .flatten()
        .filter_map(|e| match e {
            MeshElement::BeamSplitter(b) => Some(&mut b.theta),
            MeshElement::Coupler { theta, .. } => Some(theta),
            MeshElement::Phase { .. } => None,
        })
        .nth(index)
        .ok_or(Error::IndexOutOfRange {
            index,
            dim: spec.beamsplitter_count(),
        })?;
    *target += offset;
    Ok(out)
}
