//! Inputs shared by the benchmarks.

use subshift::{Alphabet, Group, GroupSpec, Pattern, PatternSet};

/// Two letters, `1 1` forbidden along every generator.
pub fn golden_mean(group: &Group) -> PatternSet {
    forbid_pairs(group, &[(1, 1)])
}

/// Two letters, equal neighbours forbidden along every generator.
pub fn alternating(group: &Group) -> PatternSet {
    forbid_pairs(group, &[(0, 0), (1, 1)])
}

/// Every pair forbidden: empty on any group.
pub fn all_pairs(group: &Group) -> PatternSet {
    forbid_pairs(group, &[(0, 0), (0, 1), (1, 0), (1, 1)])
}

fn forbid_pairs(group: &Group, pairs: &[(u32, u32)]) -> PatternSet {
    let alpha = Alphabet::simple(["0", "1"]).expect("two labels");
    let mut pats = Vec::new();
    for s in 0..group.num_generators() {
        for &(a, b) in pairs {
            let support = vec![group.identity(), group.gen(s)];
            pats.push(Pattern::new(support, vec![vec![a], vec![b]]).expect("two cells"));
        }
    }
    PatternSet::explicit(group, alpha, pats, None).expect("valid patterns")
}

pub fn free2() -> Group {
    Group::new(GroupSpec::free(2)).expect("free group")
}

pub fn z2() -> Group {
    Group::new(GroupSpec::free_abelian(2)).expect("free abelian group")
}
