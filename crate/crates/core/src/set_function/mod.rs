//! Monotone submodular set functions, structural checks and greedy oracles.

mod greedy;
mod itemset;
mod properties;
mod spec;
pub(crate) mod table;

pub use greedy::{
    brute_force_opt, exact_greedy, greedy_benchmark, min_chain_cost_by_enumeration, verify_lemma1,
    GreedyChain, Lemma1Check, Lemma1Verifier, INEQUALITY_TOL,
};
pub(crate) use greedy::{benchmark_on, opt_on, BestExtension};
pub use itemset::{binomial, subsets_of_size, subsets_up_to, ItemSet, Items, MAX_ITEMS};
pub use properties::{
    approx_ratio, check_monotone, check_submodular, curvature, MonotoneCheck, SubmodularCheck,
    STRUCTURAL_TOL,
};
pub(crate) use properties::{curvature_on, monotone_on, submodular_on};
pub use spec::{
    tabulate, HarmonicInstance, HarmonicVariant, SetFunctionSpec, Tabular, UniqueGreedyPath,
    WeightedCover, DEFAULT_PATH_PENALTY,
};
pub use table::ENUMERATION_CAP;
