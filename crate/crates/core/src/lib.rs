//! Trust-model engine over typed instance graphs.
//!
//! Instance models of a trust ontology are validated against structural
//! axioms and classified by trust kind. Degrees, risk chains and bounded
//! model search build on the same graph.

pub mod constraints;
pub mod exec;
pub mod finder;
pub mod kernel;
pub mod measure;
pub mod onti;
pub mod quant;
pub mod report;
pub mod risk;
pub mod triples;
pub mod typology;

pub use constraints::{check_axiom, validate, AxiomId, Diagnostic, Severity};
pub use exec::Execution;
pub use kernel::{ElementId, ElementKind, InstanceGraph, RelationKind};
pub use measure::{MeasureValue, Scale};
pub use typology::{classify, TrustKind, TrustView};

/// Version string of the instance document format.
pub const FORMAT_VERSION: &str = "ontrust-i/1";
