//! Exact finite-n computations for variable-length resolvability of mixed
//! sources: smooth entropy over variational-distance balls, the budget
//! allocation across mixture components, resolvability and δ-error FV code
//! construction, and closed-form first- and second-order rates.

pub mod code;
pub mod dist;
pub mod error;
pub mod rates;
pub mod smooth;

pub use code::{
    build_fv_code, build_fv_code_typeclass, build_mixed_vlcode, build_vlcode, partition_lengths,
    FvCode, LengthPartition, MixedVlCode, TypeClassFvCode, VlCode,
};
pub use dist::{
    dmc_output, entropy, mixture, product_extension, variational_distance, ComponentSpec, Dmc,
    FiniteDist, IidSpec, MixedSourceSpec,
};
pub use error::{Error, Result};
pub use rates::{
    first_order_rate, kpv_estimate, q_function, q_inverse, second_order_rate, varentropy,
    RateReport,
};
pub use smooth::typeclass::MAX_TYPECLASS_N;
pub use smooth::{
    dagger_allocation, dagger_smooth_entropy_finite, smooth_entropy, smooth_entropy_iid,
    smooth_entropy_mixed_iid, smooth_min_entropy_dist, AllocationResult, SmoothedResult,
    TypeClassTable,
};
