//! PureRank: parameter-free importance ranking for sparse directed graphs.
//!
//! Nodes are split into recurrent classes (closed strongly connected
//! components), one transient class and one dangling class. Each class
//! gets a local importance vector, and the local vectors are combined
//! into a global score vector that sums to 1 without any damping factor.
//!
//! ```
//! use purerank::{compute, Graph, SolverOptions};
//!
//! let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0)]).unwrap();
//! let r = compute(&g, &SolverOptions::default()).unwrap();
//! // The default step tolerance is 1e-10; the error is of the same order.
//! assert!((r.pi[2] - 13.0 / 27.0).abs() < 1e-10);
//! ```

pub mod classify;
pub mod error;
pub mod graph;
pub mod io;
pub mod local;
pub mod metrics;
pub mod multi;
pub mod pagerank;
pub mod rank;
pub mod surfer;

pub use classify::{
    class_fingerprint, classify, scc_decompose, ClassId, ClassSummary, Classification,
};
pub use error::{Error, Result};
pub use graph::{
    load_edge_list, Delimiter, Graph, GraphBuilder, LoadOptions, NodeId, WeightColumn,
};
pub use local::{lambda_d, lambda_r, lambda_t, ClassOperator, LocalVector, SolverOptions};
pub use metrics::{
    class_breakdown, compare, kendall_tau, pearson, top_k, top_k_overlap, ComparisonReport,
};
pub use multi::{
    build_splitting_network, load_multi_edge_list, multi_purerank, net_score, CopyMap, MultiGraph,
    SplitResult,
};
pub use pagerank::{pagerank, PageRankResult};
pub use rank::{
    assemble, compute, compute_incremental, EdgeChange, GraphDelta, IncrementalOutcome,
    PureRankResult, RankCache,
};
pub use surfer::{simulate, sojourn_check, ExtendedChain, SojournReport, SurferStats};
