//! Backtracking search for configurations on a finite cell space.
//!
//! Variables are `(cell, component)` pairs. They are assigned layer by layer,
//! cells in the order of the space (breadth-first for balls), and values in
//! alphabet order. Failed rule checks report the variables they read, which
//! drives conflict-directed backjumping: levels that played no part in a
//! failure are skipped on the way back.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::{Element, Family, Group};
use crate::sft::{Check, Letter, LocalRule, Patch, PatternSet, View};

#[derive(Clone, Debug)]
enum Kind {
    Region(HashMap<Element, usize>),
    Cyclic(i64),
    Planar(i64, i64),
}

/// The cells a search ranges over: a finite region of the group, or a torus
/// (the quotient by a period lattice) for periodic search.
#[derive(Clone, Debug)]
pub struct CellSpace {
    group: Group,
    cells: Vec<Element>,
    kind: Kind,
}

impl CellSpace {
    /// `B(radius, 1)` in breadth-first order.
    pub fn ball(group: &Group, radius: usize) -> Result<Self> {
        let ball = group.ball(&group.identity(), radius)?;
        Ok(Self::region(group, ball.members))
    }

    /// An arbitrary finite region; cells are searched in the given order.
    pub fn region(group: &Group, cells: Vec<Element>) -> Self {
        let index = cells
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        CellSpace {
            group: group.clone(),
            cells,
            kind: Kind::Region(index),
        }
    }

    /// ℤ / pℤ for an infinite cyclic group.
    pub fn cyclic(group: &Group, p: i64) -> Result<Self> {
        if p < 1 || !group.is_infinite_cyclic() {
            return Err(Error::InvalidGroup("cyclic torus needs ℤ and p ≥ 1".into()));
        }
        let cells = (0..p)
            .map(|v| group.from_integer(v).expect("cyclic"))
            .collect();
        Ok(CellSpace {
            group: group.clone(),
            cells,
            kind: Kind::Cyclic(p),
        })
    }

    /// ℤ² / (pℤ × qℤ).
    pub fn planar(group: &Group, p: i64, q: i64) -> Result<Self> {
        if p < 1 || q < 1 || !matches!(group.spec().family, Family::FreeAbelian { rank: 2 }) {
            return Err(Error::InvalidGroup(
                "planar torus needs ℤ² and p, q ≥ 1".into(),
            ));
        }
        let mut cells = Vec::new();
        for y in 0..q {
            for x in 0..p {
                let w: Vec<usize> = std::iter::repeat_n(0, x as usize)
                    .chain(std::iter::repeat_n(2, y as usize))
                    .collect();
                cells.push(group.normal_form(&w)?);
            }
        }
        Ok(CellSpace {
            group: group.clone(),
            cells,
            kind: Kind::Planar(p, q),
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn cells(&self) -> &[Element] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_torus(&self) -> bool {
        !matches!(self.kind, Kind::Region(_))
    }

    /// Generators of the period lattice, for a torus.
    pub fn periods(&self) -> Vec<Element> {
        let g = &self.group;
        match self.kind {
            Kind::Region(_) => Vec::new(),
            Kind::Cyclic(p) => vec![g.from_integer(p).expect("cyclic")],
            Kind::Planar(p, q) => vec![g.pow(&g.gen(0), p), g.pow(&g.gen(2), q)],
        }
    }

    pub fn cell_of(&self, e: &Element) -> Option<usize> {
        match &self.kind {
            Kind::Region(index) => index.get(e).copied(),
            Kind::Cyclic(p) => {
                let v = self.group.as_integer(e)?;
                Some(v.rem_euclid(*p) as usize)
            }
            Kind::Planar(p, q) => {
                let c = e.coords();
                Some((c[0].rem_euclid(*p) + p * c[1].rem_euclid(*q)) as usize)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    /// One letter per cell of the space.
    Solution(Vec<Letter>),
    /// No assignment satisfies every rule instance.
    Unsat,
    /// The node budget ran out.
    Budget,
    /// Exhausted, but some rule could not decide a complete assignment.
    Undetermined,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub instances: usize,
    pub variables: usize,
}

#[derive(Clone, Default)]
struct LevelSet {
    words: Vec<u64>,
}

impl LevelSet {
    fn with_len(n: usize) -> Self {
        LevelSet {
            words: vec![0; n / 64 + 1],
        }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn union_with(&mut self, other: &LevelSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    fn max(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }
}

struct Instance {
    rule: usize,
    cells: Vec<u32>,
}

struct EngineView<'a> {
    cells: &'a [u32],
    ncomp: usize,
    assign: &'a [Option<u32>],
    level_of: &'a [usize],
    reads: &'a mut Vec<usize>,
}

impl View for EngineView<'_> {
    fn get(&mut self, cell: usize, comp: usize) -> Option<u32> {
        let var = self.cells[cell] as usize * self.ncomp + comp;
        let v = self.assign[var];
        if v.is_some() {
            self.reads.push(self.level_of[var]);
        }
        v
    }
}

/// Instantiate every rule at every anchor whose support maps into the space.
fn instances(ps: &PatternSet, space: &CellSpace) -> Vec<Instance> {
    let group = space.group();
    let mut out = Vec::new();
    for (ri, rule) in ps.rules().iter().enumerate() {
        for anchor in space.cells() {
            let cells: Option<Vec<u32>> = rule
                .support()
                .iter()
                .map(|x| space.cell_of(&group.mul(anchor, x)).map(|c| c as u32))
                .collect();
            if let Some(cells) = cells {
                out.push(Instance { rule: ri, cells });
            }
        }
    }
    out
}

/// Search for an assignment of letters to the cells of `space` satisfying
/// every rule at every anchor whose support lies in the space.
pub fn solve(ps: &PatternSet, space: &CellSpace, budget: u64) -> (Outcome, SearchStats) {
    let alphabet = ps.alphabet();
    let ncomp = alphabet.num_components();
    let rules: &[std::sync::Arc<dyn LocalRule>] = ps.rules();
    let insts = instances(ps, space);
    let nvars = space.len() * ncomp;

    let mut watch: Vec<Vec<u32>> = vec![Vec::new(); nvars];
    for (ii, inst) in insts.iter().enumerate() {
        for &cell in &inst.cells {
            for &c in rules[inst.rule].components() {
                let var = cell as usize * ncomp + c;
                if watch[var].last() != Some(&(ii as u32)) {
                    watch[var].push(ii as u32);
                }
            }
        }
    }
    for w in watch.iter_mut() {
        w.sort_unstable();
        w.dedup();
    }
    let mut order: Vec<usize> = (0..nvars).filter(|&v| !watch[v].is_empty()).collect();
    order.sort_by_key(|&v| (alphabet.components[v % ncomp].layer, v / ncomp, v % ncomp));
    let mut level_of = vec![usize::MAX; nvars];
    for (l, &v) in order.iter().enumerate() {
        level_of[v] = l;
    }
    let mut stats = SearchStats {
        nodes: 0,
        instances: insts.len(),
        variables: order.len(),
    };

    let nlev = order.len();
    let mut assign: Vec<Option<u32>> = vec![None; nvars];
    let mut next_val = vec![0u32; nlev + 1];
    let mut conf: Vec<LevelSet> = (0..=nlev).map(|_| LevelSet::with_len(nlev + 1)).collect();
    let mut reads: Vec<usize> = Vec::new();
    let mut undetermined = false;

    let eval = |ii: usize, assign: &[Option<u32>], reads: &mut Vec<usize>| -> Check {
        let inst = &insts[ii];
        let mut view = EngineView {
            cells: &inst.cells,
            ncomp,
            assign,
            level_of: &level_of,
            reads,
        };
        rules[inst.rule].check(&mut view)
    };

    let mut i = 0usize;
    loop {
        if i == nlev {
            // Everything is assigned: every instance must now pass outright.
            let mut failed = None;
            for ii in 0..insts.len() {
                reads.clear();
                match eval(ii, &assign, &mut reads) {
                    Check::Pass => {}
                    Check::Fail => {
                        failed = Some(reads.clone());
                        break;
                    }
                    Check::Open => {
                        undetermined = true;
                        failed = Some(reads.clone());
                        break;
                    }
                }
            }
            match failed {
                None => {
                    let letters = (0..space.len())
                        .map(|c| {
                            (0..ncomp)
                                .map(|k| assign[c * ncomp + k].unwrap_or(0))
                                .collect()
                        })
                        .collect();
                    return (Outcome::Solution(letters), stats);
                }
                Some(r) => {
                    if nlev == 0 {
                        let out = if undetermined {
                            Outcome::Undetermined
                        } else {
                            Outcome::Unsat
                        };
                        return (out, stats);
                    }
                    for l in r {
                        conf[nlev].insert(l);
                    }
                    i = nlev;
                    // Fall through to the backjump below with level nlev as the dead end.
                }
            }
        } else {
            let var = order[i];
            let domain = alphabet.components[var % ncomp].size;
            let mut advanced = false;
            while next_val[i] < domain {
                let v = next_val[i];
                next_val[i] += 1;
                stats.nodes += 1;
                if stats.nodes > budget {
                    return (Outcome::Budget, stats);
                }
                assign[var] = Some(v);
                let mut failed = false;
                for &ii in &watch[var] {
                    reads.clear();
                    if eval(ii as usize, &assign, &mut reads) == Check::Fail {
                        for &l in &reads {
                            if l != i {
                                conf[i].insert(l);
                            }
                        }
                        failed = true;
                        break;
                    }
                }
                if !failed {
                    advanced = true;
                    break;
                }
                assign[var] = None;
            }
            if advanced {
                i += 1;
                next_val[i] = 0;
                conf[i].clear();
                continue;
            }
        }
        // Dead end at level i: jump to the deepest level in its conflict set.
        let Some(h) = conf[i].max() else {
            let out = if undetermined {
                Outcome::Undetermined
            } else {
                Outcome::Unsat
            };
            return (out, stats);
        };
        let mut carried = conf[i].clone();
        carried.remove(h);
        conf[h].union_with(&carried);
        for l in h..i.min(nlev) {
            assign[order[l]] = None;
        }
        for l in h + 1..=i {
            conf[l].clear();
        }
        i = h;
    }
}

/// Convert a region solution back into a patch.
pub fn solution_patch(space: &CellSpace, letters: &[Letter]) -> Patch {
    let mut p = Patch::new(space.group());
    for (e, l) in space.cells().iter().zip(letters) {
        p.insert(e.clone(), l.clone());
    }
    p
}
