//! Analogue-digital control: ground-truth plants observed through
//! error-bounded physical oracles, measure/control/predict loops that
//! produce η-tubes, a multi-mode runtime built from pre/orders/post
//! triples, and a strategy-graph verifier.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! built-in scenarios use.

pub mod integrate;
pub mod oracle;
pub mod trace;
pub mod metric;
pub mod modes;
pub mod plant;
pub mod predictor;
pub mod scalar;
pub mod scenarios;
pub mod seeding;
pub mod tube;
pub mod verifier;
pub mod zone;

pub use metric::{distance, GeometryError};
pub use plant::{check_admissible, evolve, PlantError};
pub use scalar::Scalar;
pub use tube::{tube_clear_of_zone, tube_contains, Clearance};
pub use zone::zone_contains;

/// Any error the crate can produce.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Predict(#[from] predictor::PredictError),
    #[error(transparent)]
    Mode(#[from] modes::ModeError),
    #[error(transparent)]
    Verify(#[from] verifier::VerifyError),
    #[error(transparent)]
    Scenario(#[from] scenarios::ScenarioError),
    #[error(transparent)]
    Trace(#[from] trace::TraceError),
}

pub type StatePoint = metric::StatePoint<f64>;
pub type MetricSpec = metric::MetricSpec<f64>;
pub type Zone = zone::Zone<f64>;
pub type ControlPoint = plant::ControlPoint<f64>;
pub type ControlFibration = plant::ControlFibration<f64>;
pub type VectorField = plant::VectorField<f64>;
pub type TruthPlant = plant::TruthPlant<f64>;
pub type Trajectory = plant::Trajectory<f64>;
pub type PathSegment = tube::PathSegment<f64>;
pub type DisjointPath = tube::DisjointPath<f64>;
pub type Tube = tube::Tube<f64>;
pub type OracleConfig = oracle::OracleConfig<f64>;
pub type OracleSession = oracle::OracleSession<f64>;
pub type ModelSpec = predictor::ModelSpec<f64>;
pub type LeeReport = predictor::LeeReport<f64>;
pub type Triple = modes::Triple<f64>;
pub type Strategy = modes::Strategy<f64>;
pub type SelectionFunction = modes::SelectionFunction<f64>;
pub type ModeRuntime = modes::ModeRuntime<f64>;
pub type GridSpec = verifier::GridSpec<f64>;
pub type Sampler = verifier::Sampler<f64>;
