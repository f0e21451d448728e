//! Karlin–McGregor semigroups of non-colliding particles, their Doob
//! transforms, determinant eigenfunctions and entrance laws.
//!
//! Normalizing constants are always obtained by quadrature; eigenvalue
//! rates are stored with each eigenfunction and validated by
//! [`eigen_residual`], never inferred.

mod eigen;
mod entrance;
mod km;
mod weyl;

pub use eigen::{
    build_eigenfunction_recursive, eigenfunction_catalog, ground_state, recursion_weights, wronskian_product,
    ChainLevel, Component, EigenChain, EigenFamily, Eigenfunction,
};
pub use entrance::{
    entrance_consistency_residual, entrance_law, polynomial_ensemble_limit, EntranceFamily, EntranceLaw,
    PolynomialEnsemble,
};
pub use km::{
    chamber_nodes, eigen_residual, h_transform_density, km_density, km_mass, linear_nodes, spectral_km,
    symmetric_chamber_integral,
};
pub use weyl::{canonical_probe, for_each_strict_tuple, WeylVector};
