//! Decision-boundary margin analysis for small image classifiers.
//!
//! The crate trains a LeNet-style convolutional network on MNIST, perturbs the
//! correctly classified test samples with two white-box attacks (iterative
//! FGSM and DeepFool), trains a one-vs-rest linear SVM on the network's last
//! convolutional features, and measures how well the SVM's support vectors
//! predict which samples the attacks can flip.
//!
//! The pieces are usable on their own: [`tensor`] holds the differentiable
//! primitives, [`network`] the classifier, [`attacks`] the perturbation
//! algorithms, [`svm`] the dual coordinate-descent solver, and [`pas`] the
//! coverage bookkeeping. See the `examples/` directory for one runnable
//! program per capability, and [`cli`] for the pipeline driver used by the
//! `margin-probe` binary.

pub mod attacks;
pub mod cli;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod network;
pub mod pas;
pub mod svm;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
pub use tensor::Tensor;
