//! Two non-probabilistic uses of the pipeline: conjunctive queries evaluated
//! over the Boolean semiring, and min-cost attack trees over the tropical one.

mod attack;
mod cq;

pub use attack::{
    attack_brute_force, attack_min_cost, attack_tree_to_diagram, leaf_costs, random_attack_tree,
    tropical_interpretation, AttackNode, AttackTree, STEP_SORT,
};
pub use cq::{
    evaluate_query, instance_to_interpretation, naive_join, parse_query, query_to_diagram, Atom,
    ConjunctiveQuery, Relation, RelationalInstance, DOMAIN_SORT,
};
