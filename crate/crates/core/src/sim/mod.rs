//! Port-numbering simulation: graphs, the proposal algorithm and checkers.

mod check;
mod graph;
mod proposal;

pub use check::{
    apply_white_configuration, check_xy_matching, labeling_valid, run_zero_round_witness, unmatched_guarantee,
    MatchingVerdict,
};
pub use graph::{complete_bipartite, gen_regular_bipartite, gen_tree, set_white_ports_at, Edge, SimGraph};
pub use proposal::{run_proposal, MatchLabel, Message, MessageKind, NodeState, OutputLabeling, ProposalRun, Transcript};
