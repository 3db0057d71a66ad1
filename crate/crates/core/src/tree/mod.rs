//! The dyadic-tree space: branch codes and their weight staircases, bushes,
//! the bush seminorms, and the norm taken over chains of disjoint bushes.

pub mod bush;
pub mod code;
pub mod node;
pub mod props;
pub mod seminorm;
pub mod ynorm;

pub use bush::{Bush, BushViolation};
pub use code::{branch_denominators, branch_to_code, branch_weights, code_to_branch, BranchCode};
pub use node::{nodes_up_to, TreeNode};
pub use seminorm::{bush_seminorm, SeminormWitness, TreeVector};
pub use ynorm::{y_norm, y_norm_oracle, ChainLink, YWitness};
pub use props::{eq22_builder, eq23_threshold, eq24_check, chain_split, node_threshold, GrowthCheck, SlowGrowthTable, SplitReport};
