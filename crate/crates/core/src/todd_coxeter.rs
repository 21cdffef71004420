//! Coset enumeration for finite presentations, plus a bounded rewriting
//! search used when enumeration does not close.

use std::collections::{HashSet, VecDeque};

use crate::group::{Gen, GroupSpec, Word};

const NONE: usize = usize::MAX;

/// Regular action of a finite group on itself, with cosets numbered in
/// shortlex order of their minimal words.
#[derive(Clone, Debug)]
pub struct FiniteTable {
    act: Vec<Vec<usize>>,
    words: Vec<Word>,
}

impl FiniteTable {
    pub fn len(&self) -> usize {
        self.act.len()
    }

    pub fn is_empty(&self) -> bool {
        self.act.is_empty()
    }

    pub fn act(&self, coset: usize, s: Gen) -> usize {
        self.act[coset][s]
    }

    /// Shortlex-minimal word of a coset.
    pub fn word(&self, coset: usize) -> &[Gen] {
        &self.words[coset]
    }
}

struct Enumerator<'a> {
    inv: &'a [Gen],
    table: Vec<Vec<usize>>,
    parent: Vec<usize>,
    queue: VecDeque<usize>,
    budget: usize,
}

impl Enumerator<'_> {
    fn find(&mut self, mut c: usize) -> usize {
        while self.parent[c] != c {
            let p = self.parent[c];
            self.parent[c] = self.parent[p];
            c = p;
        }
        c
    }

    fn define(&mut self, c: usize, s: Gen) -> bool {
        if self.table.len() >= self.budget {
            return false;
        }
        let d = self.table.len();
        self.table.push(vec![NONE; self.inv.len()]);
        self.parent.push(d);
        self.table[c][s] = d;
        self.table[d][self.inv[s]] = c;
        true
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        let (keep, dead) = if a < b { (a, b) } else { (b, a) };
        self.parent[dead] = keep;
        self.queue.push_back(dead);
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        self.merge(a, b);
        while let Some(e) = self.queue.pop_front() {
            for s in 0..self.inv.len() {
                let f = self.table[e][s];
                if f == NONE {
                    continue;
                }
                let si = self.inv[s];
                if self.table[f][si] == e {
                    self.table[f][si] = NONE;
                }
                let e1 = self.find(e);
                let f1 = self.find(f);
                if self.table[e1][s] != NONE {
                    let t = self.table[e1][s];
                    self.merge(f1, t);
                } else if self.table[f1][si] != NONE {
                    let t = self.table[f1][si];
                    self.merge(e1, t);
                } else {
                    self.table[e1][s] = f1;
                    self.table[f1][si] = e1;
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: usize, r: &[Gen]) -> bool {
        if r.is_empty() {
            return true;
        }
        let mut f = c;
        let mut b = c;
        let mut i = 0isize;
        let mut j = r.len() as isize - 1;
        loop {
            while i <= j && self.table[f][r[i as usize]] != NONE {
                f = self.table[f][r[i as usize]];
                i += 1;
            }
            if i > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return true;
            }
            while j >= i && self.table[b][self.inv[r[j as usize]]] != NONE {
                b = self.table[b][self.inv[r[j as usize]]];
                j -= 1;
            }
            if j < i {
                self.coincidence(f, b);
                return true;
            }
            if i == j {
                let s = r[i as usize];
                self.table[f][s] = b;
                self.table[b][self.inv[s]] = f;
                return true;
            }
            if !self.define(f, r[i as usize]) {
                return false;
            }
        }
    }
}

/// Enumerate cosets of the trivial subgroup, defining at most `budget` cosets.
/// Returns `None` when the budget runs out.
pub fn enumerate(spec: &GroupSpec, budget: usize) -> Option<FiniteTable> {
    let ngen = spec.generators.len();
    if budget == 0 {
        return None;
    }
    let mut en = Enumerator {
        inv: &spec.inverses,
        table: vec![vec![NONE; ngen]],
        parent: vec![0],
        queue: VecDeque::new(),
        budget,
    };
    let mut c = 0;
    while c < en.table.len() {
        if en.parent[c] == c {
            for r in &spec.relators {
                if !en.scan_and_fill(c, r) {
                    return None;
                }
                if en.parent[c] != c {
                    break;
                }
            }
            for s in 0..ngen {
                if en.parent[c] == c && en.table[c][s] == NONE && !en.define(c, s) {
                    return None;
                }
            }
        }
        c += 1;
    }
    // Renumber live cosets breadth-first so that indices follow shortlex order.
    let mut order = vec![NONE; en.table.len()];
    let mut words: Vec<Word> = vec![Vec::new()];
    let mut live = vec![0usize];
    order[0] = 0;
    let mut head = 0;
    while head < live.len() {
        let cur = live[head];
        for s in 0..ngen {
            let t = en.find(en.table[cur][s]);
            if order[t] == NONE {
                order[t] = live.len();
                live.push(t);
                let mut w = words[head].clone();
                w.push(s);
                words.push(w);
            }
        }
        head += 1;
    }
    let act = live
        .iter()
        .map(|&c| {
            (0..ngen)
                .map(|s| {
                    let t = en.table[c][s];
                    order[en.find(t)]
                })
                .collect()
        })
        .collect();
    Some(FiniteTable { act, words })
}

fn free_reduce(w: &mut Word, inv: &[Gen]) {
    let mut out: Word = Vec::with_capacity(w.len());
    for &s in w.iter() {
        if out.last().is_some_and(|&t| inv[t] == s) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    *w = out;
}

/// Search for a proof that `w` is trivial by applying relators, exploring at
/// most `budget` words. A `false` answer means "not found", not "nontrivial".
pub fn bounded_triviality(spec: &GroupSpec, w: &[Gen], budget: usize) -> bool {
    let inv = &spec.inverses;
    let mut rels: Vec<Word> = Vec::new();
    for r in &spec.relators {
        let ri: Word = r.iter().rev().map(|&s| inv[s]).collect();
        for base in [r, &ri] {
            for k in 0..base.len() {
                let mut rot = base[k..].to_vec();
                rot.extend_from_slice(&base[..k]);
                rels.push(rot);
            }
        }
    }
    rels.sort();
    rels.dedup();
    let mut start = w.to_vec();
    free_reduce(&mut start, inv);
    let max_len = start.len() + spec.max_relator_len;
    let mut seen: HashSet<Word> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(cur) = queue.pop_front() {
        if cur.is_empty() {
            return true;
        }
        for p in 0..=cur.len() {
            for r in &rels {
                for k in 0..=r.len() {
                    if p + k > cur.len() || cur[p..p + k] != r[..k] {
                        break;
                    }
                    let mut next = cur[..p].to_vec();
                    next.extend(r[k..].iter().rev().map(|&s| inv[s]));
                    next.extend_from_slice(&cur[p + k..]);
                    free_reduce(&mut next, inv);
                    if next.len() <= max_len && seen.insert(next.clone()) {
                        if next.is_empty() {
                            return true;
                        }
                        if seen.len() > budget {
                            return false;
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Group, GroupSpec};

    fn names(k: usize) -> Vec<String> {
        ["a", "A", "b", "B", "c", "C"][..2 * k]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn symmetric_group_s3() {
        // ⟨a, b | a², b², (ab)³⟩
        let spec = GroupSpec::generic(
            names(2),
            vec![1, 0, 3, 2],
            vec![vec![0, 0], vec![2, 2], vec![0, 2, 0, 2, 0, 2]],
            1000,
        )
        .unwrap();
        let t = enumerate(&spec, 1000).unwrap();
        assert_eq!(t.len(), 6);
        let g = Group::new(spec).unwrap();
        assert_eq!(g.finite_order(), Some(6));
        assert_eq!(g.ball(&g.identity(), 10).unwrap().len(), 6);
    }

    #[test]
    fn cyclic_presentation_matches_builtin() {
        let spec = GroupSpec::generic(names(1), vec![1, 0], vec![vec![0; 5]], 100).unwrap();
        let g = Group::new(spec).unwrap();
        assert_eq!(g.finite_order(), Some(5));
        let norms: Vec<usize> = (0..5)
            .map(|k| g.norm(&g.normal_form(&vec![0; k]).unwrap()))
            .collect();
        assert_eq!(norms, vec![0, 1, 2, 2, 1]);
    }

    #[test]
    fn infinite_group_exhausts_budget() {
        let spec =
            GroupSpec::generic(names(2), vec![1, 0, 3, 2], vec![vec![0, 2, 1, 3]], 500).unwrap();
        assert!(enumerate(&spec, 500).is_none());
        let g = Group::new(spec).unwrap();
        assert!(g.normal_form(&[0]).is_err());
        let ab = g.parse_word("ab").unwrap();
        let ba = g.parse_word("ba").unwrap();
        assert_eq!(g.word_problem(&ab, &ba), crate::group::WordProblem::Equal);
        let aa = g.parse_word("aa").unwrap();
        assert_eq!(g.word_problem(&ab, &aa), crate::group::WordProblem::Unknown);
    }
}
