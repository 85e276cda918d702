//! Bundled codings: the six named surfaces plus a corpus of automata
//! satisfying condition (★), used by tests and the CLI.

use crate::tree_codec::{parse_tree_spec, TreeAutomaton};

macro_rules! corpus_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".tree")))),*]
    };
}

/// Named codings, in the order plane, cylinder, Loch Ness, Jacob's ladder,
/// Cantor tree, Cantor tree with handles.
pub const NAMED: &[(&str, &str)] = corpus_files!(
    "plane",
    "cylinder",
    "loch_ness",
    "jacobs_ladder",
    "cantor_tree",
    "cantor_tree_with_handles",
);

/// Further codings. Every one of them satisfies (★).
pub const EXTRA: &[(&str, &str)] = corpus_files!(
    "cantor_two_state",
    "cantor_handle_root",
    "cantor_sparse_branching",
    "handles_every_other",
    "ladder_late_split",
    "three_genus_ends",
    "cantor_with_isolated",
    "cantor_handles_sparse",
    "mixed_cycle",
    "prefix_then_loch_ness",
    "period_three_handles",
    "binary_then_ladders",
    "alternating_colors",
    "left_spine_handles",
    "delayed_isolated",
    "two_loop_end",
    "genus_tree_mix",
    "explicit_sample",
);

fn load(list: &[(&'static str, &'static str)]) -> Vec<(&'static str, TreeAutomaton)> {
    list.iter()
        .map(|&(name, text)| (name, parse_tree_spec(text).unwrap_or_else(|e| panic!("corpus file {name}: {e}"))))
        .collect()
}

pub fn named() -> Vec<(&'static str, TreeAutomaton)> {
    load(NAMED)
}

pub fn get(name: &str) -> Option<TreeAutomaton> {
    NAMED
        .iter()
        .chain(EXTRA)
        .find(|(n, _)| *n == name)
        .map(|&(n, text)| load(&[(n, text)]).remove(0).1)
}

/// Every bundled coding satisfying (★).
pub fn star_corpus() -> Vec<(&'static str, TreeAutomaton)> {
    let mut all = load(NAMED);
    all.extend(load(EXTRA));
    all.retain(|(_, a)| crate::tree_codec::check_conditions(a).star);
    all
}

pub fn plane() -> TreeAutomaton {
    get("plane").unwrap()
}

pub fn cylinder() -> TreeAutomaton {
    get("cylinder").unwrap()
}

pub fn loch_ness() -> TreeAutomaton {
    get("loch_ness").unwrap()
}

pub fn jacobs_ladder() -> TreeAutomaton {
    get("jacobs_ladder").unwrap()
}

pub fn cantor_tree() -> TreeAutomaton {
    get("cantor_tree").unwrap()
}

pub fn cantor_tree_with_handles() -> TreeAutomaton {
    get("cantor_tree_with_handles").unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extra_codings_satisfy_star() {
        for (name, a) in load(EXTRA) {
            assert!(crate::tree_codec::check_conditions(&a).star, "{name}");
        }
        assert!(star_corpus().len() >= 20);
    }
}
