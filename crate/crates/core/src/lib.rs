//! C-self-adjoint contractive and bounded extensions of C-symmetric
//! contractions defined on a subspace, and the matching dissipative
//! extensions obtained through the Cayley transform.

pub mod certificate;
pub mod conjugation;
pub mod dissipative;
pub mod error;
pub mod extensions;
pub mod linalg;
pub mod oracle;
pub mod partial;

pub use certificate::{Certificate, Check};
pub use conjugation::{Composition, Conjugation};
pub use dissipative::{
    cayley_forward, cayley_inverse, check_defect_identities, dissipative_uniqueness,
    extend_by_nlambda, glazman_extend, lambda_independence, CayleyData, DissipativeOperator,
    DissipativeUniqueness, GlazmanExtension, MaximalExtension,
};
pub use error::{Error, Result};
pub use extensions::{
    bounded_extend, bounded_recover, center_w0, contractive_recover, crandall_extend,
    crandall_recover, cself_contractive_extend, operator_ball, uniqueness_report,
    validate_cself_contractive, BoundedParam, BoundedVariant, Center, ContractiveExtension,
    ContractiveParam, OperatorBall, Probe, UniquenessReport,
};
pub use linalg::{CMatrix, CVector, Subspace, Tolerance};
pub use num_complex::Complex64;
pub use oracle::{GridReport, ProblemInstance, SearchReport};
pub use partial::{build_kit, ExtensionKit, KitDims, PartialOperator};

pub(crate) fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}
