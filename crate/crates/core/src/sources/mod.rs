//! Source classes and their exact output distributions.

pub mod bp;
pub mod flat;
pub mod nobf;
pub mod spec;

pub use bp::{BranchingProgram, Edge, VertexId};
pub use flat::{AffineSource, FlatSource, InterleavedSource, SumsetSource};
pub use nobf::{twise_xor_bias, NobfSource};
pub use spec::{dist_of, Source, SourceSpec};
