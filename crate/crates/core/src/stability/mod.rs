//! Stability of shrinkers: the quadratic form of L, spectra of −L on
//! surfaces of revolution and the cutoff instability certificate.

mod banded;
pub mod certificate;
pub mod form;
pub mod spectrum;

pub use certificate::{
    certificate_threshold, instability_certificate, CertificateModel, CertificateReport,
};
pub use form::{
    logu_check, quadratic_form, translation_eigen_check, LogUCheck, QuadraticFormReport,
};
pub use spectrum::{
    spectrum, spectrum_modes, spectrum_with, ModeEigenvalue, SpectrumOptions, SpectrumResult,
};
