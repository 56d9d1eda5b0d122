//! Core library: directed stock-interaction networks from return panels.
//!
//! The pipeline runs in five steps, one module each:
//! 1. [`ingest`] parses prices/universe/stage inputs into clean per-stage
//!    return panels;
//! 2. [`network`] infers the directed adjacency via per-stock L1-penalized
//!    regressions ([`lasso`] holds the solver);
//! 3. [`flow`] turns the adjacency into a 2N-node random-walk flow system and
//!    evaluates the two-level codelength of any partition;
//! 4. [`search`] minimizes that codelength over partitions;
//! 5. [`topo`] computes the network indicator set, and [`report`] collapses
//!    partitions to stock level and renders the output tables. [`pipeline`]
//!    drives everything per stage.

pub mod flow;
pub mod ingest;
pub mod lasso;
pub mod network;
pub mod search;
pub mod topo;
mod util;

pub use flow::{entropy, CodelengthReport, FlowError, FlowSystem, Partition};
pub use ingest::{
    IngestError, PricePanel, ReturnMatrix, ReturnPanel, StageDefinition, StageKind,
};
pub use network::{DirectedAdjacency, LassoFit, NetworkConfig, NetworkError};
pub use search::{delta_codelength, optimize, SearchConfig, SearchResult};
pub use topo::{GraphMode, IndicatorTable, TopoError};
