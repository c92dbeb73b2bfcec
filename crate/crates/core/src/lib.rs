//! Exact simulation of sender-receiver quantum protocols for matrix
//! arithmetic.
//!
//! Classical data is written into single-excitation states of several
//! *sender* registers. A unitary `W` that preserves the excitation number
//! mixes the joint state, and the answer appears in the `−n` order coherence
//! elements `ρ^(R)_{N_R;0_R}` of a small *receiver* register after tracing
//! out everything else. The crate covers `Av`, `AB`, `C + D`, `det E`,
//! `E⁻¹` and `Ex = b`.
//!
//! ```
//! use senrec_core::{decode, evolve_sector, plan_determinant, value_map, Matrix, ScalePolicy};
//!
//! let e = Matrix::from_real(&[&[0.75, 0.25], &[0.25, 0.75]]).unwrap();
//! let plan = plan_determinant(&e, ScalePolicy::auto()).unwrap();
//! let values = value_map(&evolve_sector(&plan).unwrap());
//! let det = decode(&plan, &values).unwrap().as_scalar().unwrap();
//! assert!((det.re - 0.5).abs() < 1e-12);
//! ```
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the unsuffixed
//! aliases below fix `f64`.

pub mod error;
pub mod evolution;
pub mod excitation_space;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod problem;
pub mod protocols;
pub mod sampling;
pub mod scalar;
pub mod unitary_forge;

pub use error::{Error, Result};
pub use evolution::{
    apply_receiver_unitary, evolve_dense, evolve_sector, execute, extract, partial_trace, run,
    run_dense, value_map, CoherenceElement, DenseOptions, DenseRun, Engine, Execution,
    ReceiverDensity, DEFAULT_DENSE_CAP,
};
pub use excitation_space::{
    enumerate_sector, tensor_product, JointState, MultiIndex, SenderState, SystemLayout,
};
pub use io::DenseComplexMatrix;
pub use matrix::ComplexMatrix;
pub use problem::{Decoded, Operation, ProtocolInput};
pub use protocols::{
    decode, plan_determinant, plan_for, plan_inverse, plan_linsolve, plan_matmul, plan_matsum,
    plan_matvec, Decoding, ExtractionTarget, Label, PlanOptions, ProtocolPlan, RhsPolicy,
    ScaleMode, ScalePolicy, ScaleRecord, Stage,
};
pub use sampling::InstanceSampler;
pub use scalar::Real;
pub use unitary_forge::{BlockUnitary, CompletionOrder, PartialUnitarySpec, SectorUnitary};

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type Matrix = ComplexMatrix<f64>;
pub type Plan = ProtocolPlan<f64>;
pub type Density = ReceiverDensity<f64>;
pub type Spec = PartialUnitarySpec<f64>;
pub type Unitary = BlockUnitary<f64>;
pub type Sender = SenderState<f64>;
pub type Outcome = Decoded<f64>;

pub type C32 = Complex<f32>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type Plan32 = ProtocolPlan<f32>;
pub type Density32 = ReceiverDensity<f32>;
