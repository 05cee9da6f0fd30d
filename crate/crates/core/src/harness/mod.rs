//! Instance generators, experiment drivers and their CSV rows.

pub mod corpus;
pub mod experiments;
pub mod generate;

pub use corpus::nonisomorphic_graphs;
pub use experiments::{
    experiment_cheap_tree, experiment_g1_vs_g2, experiment_round_counts,
    experiment_threshold_scaling, experiment_union_amplification, rows_to_csv, write_rows,
    ExperimentRow, RoundsConfig, ScalingConfig, SizeRule,
};
pub use generate::{generate, Family, InstanceSpec, Interior};
