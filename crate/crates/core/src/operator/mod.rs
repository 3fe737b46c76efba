//! The mean curvature operator in weak form, its linearisation, and the
//! extrinsic geometry of graphs.

pub mod assembly;
pub mod graph;
pub mod maxprinciple;
pub mod problem;

pub use assembly::{
    flux_balance, jacobian_qtau, lumped_mass, residual_all, residual_q, residual_qtau, scaled_residual,
    stiffness_triplets, FluxBalance, SparseSystem,
};
pub use graph::{
    graph_normal, induced_metric, mean_curvature_of_graph, second_fundamental_form, GraphEvaluation,
    InducedMetric, SecondFundamentalForm,
};
pub use maxprinciple::{max_principle_conditions, MaxPrincipleReport};
pub use problem::Problem;
