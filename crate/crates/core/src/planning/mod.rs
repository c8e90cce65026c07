//! Planning with state-dependent action costs: the ground formalism, the
//! grouping task encoded in it, an optimal solver and an exhaustive oracle.

pub mod formalism;
mod oracle;
mod search;
mod task;

pub use formalism::{apply, plan_cost, ActionCost, ActionInstance, Condition, Fact, State};
pub use oracle::{brute_force_grouping, brute_force_grouping_capped, DEFAULT_ORACLE_CAP};
pub use search::{solve_optimal, solve_with, SearchOptions, SearchOutcome};
pub use task::{
    build_grouping_task, group_name, GroupingAction, GroupingState, GroupingTask, Plan,
};
