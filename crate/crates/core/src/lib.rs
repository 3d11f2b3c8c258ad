//! Simulation of n-photon interference through noisy linear-optical
//! interferometers, and of unitary averaging as an error-mitigation scheme.
//!
//! Noisy copies of a target interferometer are produced by perturbing the
//! beamsplitter angles of its rectangular mesh ([`mesh`]). Their output
//! distributions come from matrix permanents over the full Fock basis
//! ([`fock`], [`sampling`]). [`averaging`] builds unitary averaging
//! networks, which interfere `N` copies and herald the ancilla modes on
//! vacuum so the original modes see the mean transform, together with the
//! naive baseline of averaging output distributions and the general
//! linear-combination-of-unitaries construction. [`experiments`] runs the
//! Monte Carlo comparisons.
//!
//! ```
//! use uavg_core::prelude::*;
//!
//! let mut rng = RandomStream::from_seed(1);
//! let u = haar_random(2, &mut rng);
//! let noise = NoiseModel::gaussian(0.01).unwrap();
//! let copies: Vec<_> = (0..4)
//!     .map(|_| sample_noisy_unitary(&u, &noise, &mut rng).unwrap().0)
//!     .collect();
//! let input = FockState::new(vec![1, 1]);
//! let (dist, p_post) = ua_distribution(&copies, &input).unwrap();
//! let target = ideal_distribution(&u, &input).unwrap();
//! assert!(tvd(&target, &dist).unwrap() < 0.5);
//! assert!(p_post > 0.0 && p_post <= 1.0);
//! ```

pub mod averaging;
pub mod cmatrix;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod mesh;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::averaging::{
        build_global_unitary, decompose_into_unitaries, distribution_average, heralded_by_full_simulation,
        lcu_encoders, lcu_network, repeatability_witness, ua_distribution, unitary_average, AveragingNetwork, LcuSpec,
    };
    pub use crate::cmatrix::{dft, direct_sum, eig_hermitian, haar_random, ComplexMatrix};
    pub use crate::error::{Error, Result};
    pub use crate::fock::{
        build_submatrix, enumerate_basis, permanent_naive, permanent_ryser, phi_matrix, transition_amplitude,
        FockBasis, FockState,
    };
    pub use crate::mesh::{
        clements_decompose, mean_unitary_prediction, mesh_to_unitary, perturb, sample_noisy_unitary, uniform_depth_pad,
        MeshElement, MeshSpec, NoiseModel, NoisyInterferometer,
    };
    pub use crate::rng::RandomStream;
    pub use crate::sampling::{
        arkhipov_bound, heralded_distribution, ideal_distribution, p_uni, theorem1_bound, tvd, Distribution,
        HeraldedBound,
    };
    pub use num_complex::Complex64;
}
