//! Derivatives and integrals of Lipschitz maps between groups.
//!
//! For `f: G → H` the derivative records, at each `g` and generator `s`, the
//! step `f(g)⁻¹ f(gs)`. Integrating a derivative along a word multiplies
//! those steps back together.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Ball, Element, Gen, Group, Word, WordProblem};
use crate::sft::{Alphabet, Check, Component, Letter, LocalRule, Patch, Pattern, PatternSet, View};

/// A finite partial map `G → H` together with a Lipschitz bound.
#[derive(Clone, Debug)]
pub struct FunctionPatch {
    pub source: Group,
    pub target: Group,
    pub n: usize,
    pub values: BTreeMap<Element, Element>,
}

impl FunctionPatch {
    pub fn new(source: &Group, target: &Group, n: usize) -> Self {
        FunctionPatch {
            source: source.clone(),
            target: target.clone(),
            n,
            values: BTreeMap::new(),
        }
    }

    /// Tabulate `f` on `region`.
    pub fn from_fn(
        source: &Group,
        target: &Group,
        n: usize,
        region: &[Element],
        f: impl Fn(&Element) -> Element,
    ) -> Self {
        let mut p = Self::new(source, target, n);
        for g in region {
            p.values.insert(g.clone(), f(g));
        }
        p
    }

    pub fn insert(&mut self, g: Element, h: Element) {
        self.values.insert(g, h);
    }

    pub fn get(&self, g: &Element) -> Option<&Element> {
        self.values.get(g)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Check `d_H(f(g), f(gs)) ≤ n` on every edge inside the domain.
    pub fn validate(&self) -> Result<()> {
        for (g, fg) in &self.values {
            for s in 0..self.source.num_generators() {
                if let Some(fgs) = self.values.get(&self.source.mul_gen(g, s)) {
                    let d = self.target.dist(fg, fgs);
                    if d > self.n {
                        return Err(Error::LipschitzViolation {
                            at: g.clone(),
                            generator: s,
                            distance: d,
                            bound: self.n,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Partial assignment `g ↦ (s ↦ ⟨σ(g), s⟩)`, one optional value per generator.
#[derive(Clone, Debug)]
pub struct DerivativePatch {
    pub source: Group,
    pub target: Group,
    pub n: usize,
    pub cells: BTreeMap<Element, Vec<Option<Element>>>,
}

impl DerivativePatch {
    pub fn new(source: &Group, target: &Group, n: usize) -> Self {
        DerivativePatch {
            source: source.clone(),
            target: target.clone(),
            n,
            cells: BTreeMap::new(),
        }
    }

    /// Set `⟨σ(g), s⟩`; the value must lie in `B_H(n)`.
    pub fn set(&mut self, g: &Element, s: Gen, h: Element) -> Result<()> {
        let d = self.target.norm(&h);
        if d > self.n {
            return Err(Error::LipschitzViolation {
                at: g.clone(),
                generator: s,
                distance: d,
                bound: self.n,
            });
        }
        let k = self.source.num_generators();
        self.cells.entry(g.clone()).or_insert_with(|| vec![None; k])[s] = Some(h);
        Ok(())
    }

    pub fn value(&self, g: &Element, s: Gen) -> Option<&Element> {
        self.cells.get(g).and_then(|v| v[s].as_ref())
    }

    /// Cells where every generator has a value.
    pub fn complete_cells(&self) -> impl Iterator<Item = (&Element, Vec<&Element>)> {
        self.cells.iter().filter_map(|(g, v)| {
            v.iter()
                .map(Option::as_ref)
                .collect::<Option<Vec<_>>>()
                .map(|vals| (g, vals))
        })
    }
}

/// `df(g) = (s ↦ f(g)⁻¹ f(gs))`, wherever both points are in the domain.
pub fn derivative(f: &FunctionPatch) -> Result<DerivativePatch> {
    f.validate()?;
    let mut d = DerivativePatch::new(&f.source, &f.target, f.n);
    for (g, fg) in &f.values {
        for s in 0..f.source.num_generators() {
            if let Some(fgs) = f.values.get(&f.source.mul_gen(g, s)) {
                d.set(g, s, f.target.relative(fg, fgs))?;
            }
        }
    }
    Ok(d)
}

/// `∫_{g·w} σ = ⟨σ(g), s₀⟩⟨σ(gs₀), s₁⟩⋯`.
pub fn integrate(sigma: &DerivativePatch, g: &Element, w: &[Gen]) -> Result<Element> {
    let (src, tgt) = (&sigma.source, &sigma.target);
    let mut at = g.clone();
    let mut acc = tgt.identity();
    for &s in w {
        let v = sigma
            .value(&at, s)
            .ok_or_else(|| Error::CoverageGap(at.clone()))?;
        acc = tgt.mul(&acc, v);
        at = src.mul_gen(&at, s);
    }
    Ok(acc)
}

/// The coding of derivative values as letters: one component per generator
/// of `G`, each ranging over `B_H(n)` in breadth-first order.
#[derive(Clone, Debug)]
pub struct DerivativeCoding {
    pub source: Group,
    pub target: Group,
    pub n: usize,
    pub ball: Ball,
}

impl DerivativeCoding {
    pub fn new(source: &Group, target: &Group, n: usize) -> Result<Self> {
        Ok(DerivativeCoding {
            source: source.clone(),
            target: target.clone(),
            n,
            ball: target.ball(&target.identity(), n)?,
        })
    }

    pub fn components(&self, layer: u32) -> Vec<Component> {
        let labels: Vec<String> = self
            .ball
            .members
            .iter()
            .map(|h| self.target.show(h))
            .collect();
        (0..self.source.num_generators())
            .map(|s| Component {
                name: format!("d{}", self.source.symbol(s)),
                size: labels.len() as u32,
                layer,
                labels: labels.clone(),
            })
            .collect()
    }

    pub fn encode(&self, h: &Element) -> Option<u32> {
        self.ball.position(h).map(|i| i as u32)
    }

    pub fn decode(&self, v: u32) -> &Element {
        &self.ball.members[v as usize]
    }

    /// The complete cells of `sigma` as a patch over [`Self::components`].
    pub fn to_patch(&self, sigma: &DerivativePatch) -> Result<Patch> {
        let mut p = Patch::new(&self.source);
        for (g, vals) in sigma.complete_cells() {
            let letter: Option<Letter> = vals.iter().map(|h| self.encode(h)).collect();
            let letter = letter.ok_or_else(|| {
                Error::InvalidPatternSet("derivative value outside B_H(n)".into())
            })?;
            p.insert(g.clone(), letter);
        }
        Ok(p)
    }

    /// Read the first `num_generators` components of each letter as derivative values.
    pub fn from_patch(&self, patch: &Patch) -> DerivativePatch {
        let mut d = DerivativePatch::new(&self.source, &self.target, self.n);
        for (g, l) in patch.iter() {
            let vals = (0..self.source.num_generators())
                .map(|s| Some(self.decode(l[s]).clone()))
                .collect();
            d.cells.insert(g.clone(), vals);
        }
        d
    }
}

/// Words of length at most `k` as a prefix tree, grouped by the element they
/// represent. Every word in a group must integrate to the same value.
#[derive(Clone, Debug)]
pub struct WordTable {
    pub k: usize,
    /// Elements visited before each step, i.e. prefixes of non-maximal words.
    pub support: Vec<Element>,
    /// Per trie node (after the root): parent node, generator, support index of the parent's endpoint.
    pub nodes: Vec<(usize, Gen, usize)>,
    /// Trie nodes grouped by represented element; only groups of size ≥ 2.
    pub classes: Vec<Vec<usize>>,
    pub words: Vec<Word>,
}

impl WordTable {
    pub fn new(group: &Group, k: usize) -> Result<Self> {
        let words = group.words_up_to(k);
        let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut support: Vec<Element> = Vec::new();
        let mut sindex: HashMap<Element, usize> = HashMap::new();
        let mut nodes = vec![(usize::MAX, 0, usize::MAX)];
        let mut ends: Vec<Element> = vec![group.identity()];
        let exact = group.has_exact_word_problem();
        for w in words.iter().skip(1) {
            let parent = index[&w[..w.len() - 1].to_vec()];
            let pe = ends[parent].clone();
            let si = *sindex.entry(pe.clone()).or_insert_with(|| {
                support.push(pe.clone());
                support.len() - 1
            });
            let s = *w.last().unwrap();
            nodes.push((parent, s, si));
            ends.push(if exact {
                group.mul_gen(&pe, s)
            } else {
                pe.clone()
            });
        }
        let classes: Vec<Vec<usize>> = if exact {
            let mut by: HashMap<&Element, Vec<usize>> = HashMap::new();
            for (i, e) in ends.iter().enumerate() {
                by.entry(e).or_default().push(i);
            }
            let mut v: Vec<Vec<usize>> = by.into_values().filter(|c| c.len() > 1).collect();
            v.sort();
            v
        } else {
            // Group words pairwise with the bounded word-problem solver.
            let mut reps: Vec<usize> = Vec::new();
            let mut members: Vec<Vec<usize>> = Vec::new();
            for i in 0..words.len() {
                let mut placed = false;
                for (c, &r) in reps.iter().enumerate() {
                    match group.word_problem(&words[r], &words[i]) {
                        WordProblem::Equal => {
                            members[c].push(i);
                            placed = true;
                            break;
                        }
                        WordProblem::NotEqual => {}
                        WordProblem::Unknown => return Err(Error::WordProblemUnknown),
                    }
                }
                if !placed {
                    reps.push(i);
                    members.push(vec![i]);
                }
            }
            members.into_iter().filter(|c| c.len() > 1).collect()
        };
        Ok(WordTable {
            k,
            support,
            nodes,
            classes,
            words,
        })
    }
}

/// Local predicate: integrals over equal words agree at every anchor.
#[derive(Debug)]
pub struct DerivativeRule {
    table: WordTable,
    coding: DerivativeCoding,
    components: Vec<usize>,
    /// Alphabet component holding generator `s`'s value.
    offset: usize,
}

impl DerivativeRule {
    pub fn new(coding: DerivativeCoding, k: usize, offset: usize) -> Result<Self> {
        let table = WordTable::new(&coding.source, k)?;
        let components = (offset..offset + coding.source.num_generators()).collect();
        Ok(DerivativeRule {
            table,
            coding,
            components,
            offset,
        })
    }

    pub fn table(&self) -> &WordTable {
        &self.table
    }
}

impl LocalRule for DerivativeRule {
    fn name(&self) -> &str {
        "path-independence"
    }

    fn support(&self) -> &[Element] {
        &self.table.support
    }

    fn components(&self) -> &[usize] {
        &self.components
    }

    fn check(&self, view: &mut dyn View) -> Check {
        let tgt = &self.coding.target;
        let mut value: Vec<Option<Element>> = Vec::with_capacity(self.table.nodes.len());
        value.push(Some(tgt.identity()));
        for &(parent, s, cell) in &self.table.nodes[1..] {
            let v = match (&value[parent], view.get(cell, self.offset + s)) {
                (Some(acc), Some(code)) => Some(tgt.mul(acc, self.coding.decode(code))),
                _ => None,
            };
            value.push(v);
        }
        let mut open = false;
        for class in &self.table.classes {
            let mut first: Option<&Element> = None;
            for &i in class {
                match (&value[i], first) {
                    (None, _) => open = true,
                    (Some(v), None) => first = Some(v),
                    (Some(v), Some(f)) if v != f => return Check::Fail,
                    _ => {}
                }
            }
        }
        if open {
            Check::Open
        } else {
            Check::Pass
        }
    }
}

/// The constant `K_G` used for the word pairs: the longest relator, and at
/// least 2 so that `s s⁻¹` pairs are covered.
pub fn word_bound(group: &Group) -> usize {
    group.max_relator_len().max(2)
}

/// The derivative SFT `Y_n` over `B_H(n)^S` as a local predicate.
pub fn compile_derivative_sft(source: &Group, target: &Group, n: usize) -> Result<PatternSet> {
    let coding = DerivativeCoding::new(source, target, n)?;
    let alphabet = Alphabet::product(coding.components(0))?;
    let k = word_bound(source);
    let rule = DerivativeRule::new(coding, k, 0)?;
    Ok(PatternSet::predicate(
        source,
        alphabet,
        vec![Arc::new(rule)],
        k.saturating_sub(1),
    ))
}

/// Expand every rule of a predicate set into explicit forbidden patterns,
/// provided `|A|^{|support|}` stays within `guard` for each rule.
pub fn materialize(ps: &PatternSet, guard: u128) -> Result<PatternSet> {
    let letters = ps
        .alphabet()
        .letters(guard.min(usize::MAX as u128) as usize)
        .ok_or(Error::SizeLimit(guard as usize))?;
    let mut patterns = Vec::new();
    for rule in ps.rules() {
        let cells = rule.support().len();
        let total = (letters.len() as u128)
            .checked_pow(cells as u32)
            .filter(|t| *t <= guard)
            .ok_or(Error::SizeLimit(guard as usize))?;
        let mut digits = vec![0usize; cells];
        for _ in 0..total {
            let assignment: Vec<&Letter> = digits.iter().map(|&d| &letters[d]).collect();
            let mut view = FullView(&assignment);
            if rule.check(&mut view) == Check::Fail {
                patterns.push(Pattern::new(
                    rule.support().to_vec(),
                    assignment.iter().map(|l| (*l).clone()).collect(),
                )?);
            }
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < letters.len() {
                    break;
                }
                *d = 0;
            }
        }
    }
    PatternSet::explicit(
        ps.group(),
        ps.alphabet().clone(),
        patterns,
        Some(ps.defining_radius()),
    )
}

struct FullView<'a>(&'a [&'a Letter]);

impl View for FullView<'_> {
    fn get(&mut self, cell: usize, comp: usize) -> Option<u32> {
        Some(self.0[cell][comp])
    }
}

/// Integrate `sigma` from the identity over a connected region, normalised
/// by `f(1_G) = 1_H`, and check that every edge of the region agrees.
pub fn integrate_to_function(sigma: &DerivativePatch, region: &[Element]) -> Result<FunctionPatch> {
    let (src, tgt) = (&sigma.source, &sigma.target);
    let inside: HashMap<&Element, usize> = region.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let id = src.identity();
    if !inside.contains_key(&id) {
        return Err(Error::DomainTooSmall(
            "region must contain the identity".into(),
        ));
    }
    let mut f = FunctionPatch::new(src, tgt, sigma.n);
    let mut path: HashMap<Element, Word> = HashMap::new();
    f.insert(id.clone(), tgt.identity());
    path.insert(id.clone(), Vec::new());
    let mut queue = VecDeque::from([id]);
    let mut order = Vec::new();
    while let Some(g) = queue.pop_front() {
        order.push(g.clone());
        for s in 0..src.num_generators() {
            let gs = src.mul_gen(&g, s);
            if !inside.contains_key(&gs) || f.values.contains_key(&gs) {
                continue;
            }
            if let Some(v) = sigma.value(&g, s) {
                let val = tgt.mul(&f.values[&g], v);
                f.insert(gs.clone(), val);
                let mut w = path[&g].clone();
                w.push(s);
                path.insert(gs.clone(), w);
                queue.push_back(gs);
            }
        }
    }
    if order.len() < region.len() {
        let missing = region.iter().find(|e| !f.values.contains_key(e)).unwrap();
        return Err(Error::CoverageGap(missing.clone()));
    }
    // Every loop in the region is a product of tree paths and single edges.
    for g in &order {
        for s in 0..src.num_generators() {
            let gs = src.mul_gen(g, s);
            let (Some(v), Some(fgs)) = (sigma.value(g, s), f.values.get(&gs)) else {
                continue;
            };
            if tgt.mul(&f.values[g], v) != *fgs {
                let mut second = path[g].clone();
                second.push(s);
                return Err(Error::PathDependent {
                    at: gs.clone(),
                    first: path[&gs].clone(),
                    second,
                });
            }
        }
    }
    Ok(f)
}
