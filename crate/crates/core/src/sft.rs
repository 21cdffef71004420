//! Alphabets, forbidden patterns, local rules, patches and periodic
//! configurations.
//!
//! Every pattern set compiles to a list of [`LocalRule`]s. A rule reads the
//! configuration around an anchor `g` through a [`View`] indexed by its own
//! relative support, and reports [`Check::Fail`] as soon as the cells it has
//! seen rule out every completion. The search engine relies on that
//! monotonicity; admissibility checks only ever look at fully covered anchors.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, Family, Group, GroupSpec};

/// A letter is one value per alphabet component.
pub type Letter = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub size: u32,
    /// Search order: all variables of a lower layer are assigned first.
    #[serde(default)]
    pub layer: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

/// A product of finite components. Simple alphabets have one labelled
/// component; compiled alphabets have many.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub components: Vec<Component>,
}

impl Alphabet {
    pub fn simple<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidPatternSet("alphabet is empty".into()));
        }
        let unique: HashSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidPatternSet(
                "duplicate letters in alphabet".into(),
            ));
        }
        Ok(Alphabet {
            components: vec![Component {
                name: "letter".into(),
                size: labels.len() as u32,
                layer: 0,
                labels,
            }],
        })
    }

    pub fn product(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() || components.iter().any(|c| c.size == 0) {
            return Err(Error::InvalidPatternSet("alphabet is empty".into()));
        }
        Ok(Alphabet { components })
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn is_simple(&self) -> bool {
        self.components.len() == 1
    }

    /// Number of letters, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        self.components
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.size as u128))
    }

    pub fn contains(&self, l: &[u32]) -> bool {
        l.len() == self.components.len() && l.iter().zip(&self.components).all(|(&v, c)| v < c.size)
    }

    /// Look up a letter of a simple alphabet by label.
    pub fn letter(&self, label: &str) -> Option<Letter> {
        if !self.is_simple() {
            return None;
        }
        self.components[0]
            .labels
            .iter()
            .position(|l| l == label)
            .map(|i| vec![i as u32])
    }

    pub fn label(&self, l: &[u32]) -> String {
        if self.is_simple() {
            if let Some(s) = self.components[0].labels.get(l[0] as usize) {
                return s.clone();
            }
        }
        let parts: Vec<String> = l.iter().map(u32::to_string).collect();
        format!("({})", parts.join(","))
    }

    /// Parse a label produced by [`Alphabet::label`].
    pub fn parse_label(&self, text: &str) -> Option<Letter> {
        if let Some(l) = self.letter(text) {
            return Some(l);
        }
        let inner = text.strip_prefix('(')?.strip_suffix(')')?;
        let l: Letter = inner
            .split(',')
            .map(|p| p.trim().parse().ok())
            .collect::<Option<_>>()?;
        self.contains(&l).then_some(l)
    }

    /// All letters in lexicographic order; `None` when there are more than `cap`.
    pub fn letters(&self, cap: usize) -> Option<Vec<Letter>> {
        if self.size() > cap as u128 {
            return None;
        }
        let mut out = vec![Vec::new()];
        for c in &self.components {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..c.size).map(move |v| {
                        let mut l = prefix.clone();
                        l.push(v);
                        l
                    })
                })
                .collect();
        }
        Some(out)
    }
}

/// A finite labelling `support → letters`, forbidden wherever it appears.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub support: Vec<Element>,
    pub letters: Vec<Letter>,
}

impl Pattern {
    pub fn new(support: Vec<Element>, letters: Vec<Letter>) -> Result<Self> {
        if support.is_empty() || support.len() != letters.len() {
            return Err(Error::InvalidPatternSet(
                "pattern support and letters differ".into(),
            ));
        }
        let distinct: HashSet<&Element> = support.iter().collect();
        if distinct.len() != support.len() {
            return Err(Error::InvalidPatternSet("repeated support element".into()));
        }
        Ok(Pattern { support, letters })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Pass,
    Fail,
    /// Not yet decided by the cells seen so far.
    Open,
}

/// Read access to a configuration around an anchor.
pub trait View {
    /// Component `comp` of the letter at `anchor · support[cell]`.
    fn get(&mut self, cell: usize, comp: usize) -> Option<u32>;
}

/// A translation-invariant local condition.
pub trait LocalRule: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    /// Cells read by the rule, relative to the anchor.
    fn support(&self) -> &[Element];
    /// Alphabet components the rule may read.
    fn components(&self) -> &[usize];
    /// Must return `Fail` only if every completion of the visible cells fails.
    fn check(&self, view: &mut dyn View) -> Check;
}

/// The rule form of an explicit list of forbidden patterns.
#[derive(Debug)]
pub struct ExplicitRule {
    support: Vec<Element>,
    components: Vec<usize>,
    patterns: Vec<Vec<(usize, Letter)>>,
}

impl ExplicitRule {
    pub fn new(patterns: &[Pattern], ncomp: usize) -> Self {
        let mut support: Vec<Element> = Vec::new();
        let mut compiled = Vec::with_capacity(patterns.len());
        for p in patterns {
            let mut cells = Vec::with_capacity(p.support.len());
            for (x, l) in p.support.iter().zip(&p.letters) {
                let idx = match support.iter().position(|y| y == x) {
                    Some(i) => i,
                    None => {
                        support.push(x.clone());
                        support.len() - 1
                    }
                };
                cells.push((idx, l.clone()));
            }
            compiled.push(cells);
        }
        ExplicitRule {
            support,
            components: (0..ncomp).collect(),
            patterns: compiled,
        }
    }
}

impl LocalRule for ExplicitRule {
    fn name(&self) -> &str {
        "forbidden-patterns"
    }

    fn support(&self) -> &[Element] {
        &self.support
    }

    fn components(&self) -> &[usize] {
        &self.components
    }

    fn check(&self, view: &mut dyn View) -> Check {
        let mut open = false;
        'pattern: for p in &self.patterns {
            let mut unknown = false;
            for (cell, letter) in p {
                for (c, &want) in letter.iter().enumerate() {
                    match view.get(*cell, c) {
                        Some(v) if v != want => continue 'pattern,
                        Some(_) => {}
                        None => unknown = true,
                    }
                }
            }
            if !unknown {
                return Check::Fail;
            }
            open = true;
        }
        if open {
            Check::Open
        } else {
            Check::Pass
        }
    }
}

/// An SFT description: explicit forbidden patterns, or local predicates.
#[derive(Clone, Debug)]
pub struct PatternSet {
    group: Group,
    alphabet: Alphabet,
    radius: usize,
    patterns: Option<Vec<Pattern>>,
    rules: Vec<Arc<dyn LocalRule>>,
}

impl PatternSet {
    /// `radius` defaults to the largest norm of a support element.
    pub fn explicit(
        group: &Group,
        alphabet: Alphabet,
        patterns: Vec<Pattern>,
        radius: Option<usize>,
    ) -> Result<Self> {
        let needed = patterns
            .iter()
            .flat_map(|p| p.support.iter())
            .map(|x| {
                if group.owns(x) {
                    Ok(group.norm(x))
                } else {
                    Err(Error::MixedGroups)
                }
            })
            .try_fold(0usize, |m, r| r.map(|v| m.max(v)))?;
        let radius = radius.unwrap_or(needed);
        if needed > radius {
            return Err(Error::InvalidPatternSet(format!(
                "pattern support leaves B({radius})"
            )));
        }
        for p in &patterns {
            if p.letters.iter().any(|l| !alphabet.contains(l)) {
                return Err(Error::InvalidPatternSet(
                    "pattern uses unknown letter".into(),
                ));
            }
        }
        let rule: Arc<dyn LocalRule> =
            Arc::new(ExplicitRule::new(&patterns, alphabet.num_components()));
        Ok(PatternSet {
            group: group.clone(),
            alphabet,
            radius,
            patterns: Some(patterns),
            rules: if rule.support().is_empty() {
                vec![]
            } else {
                vec![rule]
            },
        })
    }

    pub fn predicate(
        group: &Group,
        alphabet: Alphabet,
        rules: Vec<Arc<dyn LocalRule>>,
        radius: usize,
    ) -> Self {
        PatternSet {
            group: group.clone(),
            alphabet,
            radius,
            patterns: None,
            rules,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn defining_radius(&self) -> usize {
        self.radius
    }

    pub fn patterns(&self) -> Option<&[Pattern]> {
        self.patterns.as_deref()
    }

    pub fn is_explicit(&self) -> bool {
        self.patterns.is_some()
    }

    pub fn rules(&self) -> &[Arc<dyn LocalRule>] {
        &self.rules
    }

    /// Span of the supports when the group is infinite cyclic.
    pub fn integer_window(&self) -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for r in &self.rules {
            for x in r.support() {
                let v = self.group.as_integer(x)?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// A finite partial configuration. Missing cells are absent, never defaulted.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    group: Group,
    cells: BTreeMap<Element, Letter>,
}

impl Patch {
    pub fn new(group: &Group) -> Self {
        Patch {
            group: group.clone(),
            cells: BTreeMap::new(),
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn insert(&mut self, x: Element, l: Letter) {
        debug_assert!(self.group.owns(&x));
        self.cells.insert(x, l);
    }

    pub fn get(&self, x: &Element) -> Option<&Letter> {
        self.cells.get(x)
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.cells.contains_key(x)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &Letter)> {
        self.cells.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Element> {
        self.cells.keys()
    }

    /// The patch `x ↦ self(h⁻¹x)`, i.e. the contents moved by `h`.
    pub fn translate(&self, h: &Element) -> Patch {
        Patch {
            group: self.group.clone(),
            cells: self
                .cells
                .iter()
                .map(|(x, l)| (self.group.mul(h, x), l.clone()))
                .collect(),
        }
    }

    pub fn restrict(&self, keep: impl Fn(&Element) -> bool) -> Patch {
        Patch {
            group: self.group.clone(),
            cells: self
                .cells
                .iter()
                .filter(|(x, _)| keep(x))
                .map(|(x, l)| (x.clone(), l.clone()))
                .collect(),
        }
    }

    /// Build a patch on ℤ (or any infinite cyclic group) from consecutive letters.
    pub fn from_integer_word(group: &Group, start: i64, letters: &[Letter]) -> Result<Self> {
        let mut p = Patch::new(group);
        for (i, l) in letters.iter().enumerate() {
            let x = group
                .from_integer(start + i as i64)
                .ok_or_else(|| Error::InvalidGroup("group is not infinite cyclic".into()))?;
            p.insert(x, l.clone());
        }
        Ok(p)
    }
}

struct ResolvedView<'a> {
    cells: Vec<Option<&'a Letter>>,
}

impl View for ResolvedView<'_> {
    fn get(&mut self, cell: usize, comp: usize) -> Option<u32> {
        self.cells[cell].map(|l| l[comp])
    }
}

/// Does pattern `p` appear at `g`, i.e. `patch(g·x) = p(x)` for every `x`?
pub fn occurs(patch: &Patch, p: &Pattern, g: &Element) -> Result<bool> {
    let group = &patch.group;
    let mut all = true;
    for (x, l) in p.support.iter().zip(&p.letters) {
        match patch.get(&group.mul(g, x)) {
            None => return Err(Error::SupportNotCovered),
            Some(v) => all &= v == l,
        }
    }
    Ok(all)
}

/// Candidate anchors `g` whose translated support could fit in the domain.
fn anchors_for(patch: &Patch, rule: &dyn LocalRule) -> Vec<Element> {
    let group = &patch.group;
    let Some(first) = rule.support().first() else {
        return Vec::new();
    };
    let inv = group.inv(first);
    let mut seen = HashSet::new();
    patch
        .domain()
        .map(|c| group.mul(c, &inv))
        .filter(|g| seen.insert(g.clone()))
        .collect()
}

/// Evaluate a rule at `g` on a patch; `None` if the support is not covered.
pub fn check_at(patch: &Patch, rule: &dyn LocalRule, g: &Element) -> Option<Check> {
    let group = &patch.group;
    let cells: Option<Vec<&Letter>> = rule
        .support()
        .iter()
        .map(|x| patch.get(&group.mul(g, x)))
        .collect();
    let cells = cells?;
    let mut view = ResolvedView {
        cells: cells.into_iter().map(Some).collect(),
    };
    Some(rule.check(&mut view))
}

/// First anchor at which some rule fails on a fully covered support.
pub fn first_violation(patch: &Patch, ps: &PatternSet) -> Option<(usize, Element)> {
    for (ri, rule) in ps.rules().iter().enumerate() {
        for g in anchors_for(patch, rule.as_ref()) {
            if let Some(c) = check_at(patch, rule.as_ref(), &g) {
                if c != Check::Pass {
                    return Some((ri, g));
                }
            }
        }
    }
    None
}

/// True iff no rule fails at any anchor whose support lies inside the patch.
pub fn locally_admissible(patch: &Patch, ps: &PatternSet) -> bool {
    first_violation(patch, ps).is_none()
}

/// A configuration invariant under left multiplication by its periods, stored
/// through its values on a superset of a fundamental domain.
#[derive(Clone, Debug)]
pub struct PeriodicConfig {
    group: Group,
    pub periods: Vec<Element>,
    pub domain_data: Patch,
    /// One element per orbit that the verifier checks; may be a truncation.
    pub representatives: Vec<Element>,
    pub lookup_budget: usize,
    /// Set when the representatives only cover part of an infinite domain.
    pub truncated: bool,
}

impl PeriodicConfig {
    pub fn new(
        periods: Vec<Element>,
        domain_data: Patch,
        representatives: Vec<Element>,
        lookup_budget: usize,
    ) -> Result<Self> {
        let group = domain_data.group.clone();
        if periods.is_empty() || periods.iter().any(|p| group.is_identity(p)) {
            return Err(Error::NotPeriodic("period must be nontrivial".into()));
        }
        Ok(PeriodicConfig {
            group,
            periods,
            domain_data,
            representatives,
            lookup_budget,
            truncated: false,
        })
    }

    /// Period `p` on ℤ with `domain = {0 ↦ w₀, …, p−1 ↦ w_{p−1}}`.
    pub fn integer_cycle(group: &Group, word: &[Letter]) -> Result<Self> {
        let data = Patch::from_integer_word(group, 0, word)?;
        let period = group
            .from_integer(word.len() as i64)
            .ok_or_else(|| Error::InvalidGroup("group is not infinite cyclic".into()))?;
        let reps = data.domain().cloned().collect();
        Self::new(vec![period], data, reps, 64)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    fn abelian(&self) -> bool {
        matches!(
            self.group.spec().family,
            Family::FreeAbelian { .. } | Family::IntegerSteps { .. } | Family::FiniteCyclic { .. }
        ) || self.group.is_infinite_cyclic()
    }

    fn lattice_coeffs(&self, delta: &Element) -> Option<Vec<i64>> {
        // delta = Σ k_i · period_i in coordinates.
        let coords = |e: &Element| -> Vec<i64> {
            match self.group.as_integer(e) {
                Some(v) => vec![v],
                None => e.coords().to_vec(),
            }
        };
        let d = coords(delta);
        let ps: Vec<Vec<i64>> = self.periods.iter().map(coords).collect();
        match ps.len() {
            1 => {
                let p = &ps[0];
                let mut k: Option<i64> = None;
                for (a, b) in d.iter().zip(p) {
                    if *b == 0 {
                        if *a != 0 {
                            return None;
                        }
                    } else {
                        if a % b != 0 {
                            return None;
                        }
                        let q = a / b;
                        if k.is_some_and(|k| k != q) {
                            return None;
                        }
                        k = Some(q);
                    }
                }
                Some(vec![k.unwrap_or(0)])
            }
            2 if d.len() == 2 => {
                let (p, q) = (&ps[0], &ps[1]);
                let det = p[0] * q[1] - p[1] * q[0];
                if det == 0 {
                    return None;
                }
                let k1 = d[0] * q[1] - d[1] * q[0];
                let k2 = p[0] * d[1] - p[1] * d[0];
                (k1 % det == 0 && k2 % det == 0).then(|| vec![k1 / det, k2 / det])
            }
            _ => None,
        }
    }

    /// The letter at `x`, found by translating `x` by period powers with
    /// exponents bounded by `lookup_budget`.
    pub fn lookup(&self, x: &Element) -> Result<Option<Letter>> {
        let mut found: Option<Letter> = None;
        let mut record = |l: &Letter| -> Result<()> {
            match &found {
                Some(prev) if prev != l => Err(Error::InconsistentPeriod(x.clone())),
                Some(_) => Ok(()),
                None => {
                    found = Some(l.clone());
                    Ok(())
                }
            }
        };
        let budget = self.lookup_budget as i64;
        if self.abelian() && self.periods.len() <= 2 {
            for (c, l) in self.domain_data.iter() {
                let delta = self.group.relative(x, c);
                if let Some(k) = self.lattice_coeffs(&delta) {
                    if k.iter().all(|v| v.abs() <= budget) {
                        record(l)?;
                    }
                }
            }
        } else {
            let g = &self.periods[0];
            let gi = self.group.inv(g);
            let mut fwd = x.clone();
            let mut back = x.clone();
            if let Some(l) = self.domain_data.get(x) {
                record(l)?;
            }
            for _ in 0..budget {
                fwd = self.group.mul(g, &fwd);
                back = self.group.mul(&gi, &back);
                for y in [&fwd, &back] {
                    if let Some(l) = self.domain_data.get(y) {
                        record(l)?;
                    }
                }
            }
        }
        Ok(found)
    }

    /// Check that overlapping translates inside the stored data agree.
    pub fn check_consistency(&self) -> Result<()> {
        for x in self.domain_data.domain() {
            self.lookup(x)?;
        }
        Ok(())
    }
}

struct PeriodicView {
    values: Vec<Option<Letter>>,
}

impl View for PeriodicView {
    fn get(&mut self, cell: usize, comp: usize) -> Option<u32> {
        self.values[cell].as_ref().map(|l| l[comp])
    }
}

/// Check every rule at every stored representative, resolving cells through
/// the period. By periodicity this certifies the whole configuration (or the
/// covered part when the config is marked truncated).
pub fn verify_periodic_point(pc: &PeriodicConfig, ps: &PatternSet) -> Result<bool> {
    let group = &pc.group;
    if group.id() != ps.group().id() {
        return Err(Error::MixedGroups);
    }
    pc.check_consistency()?;
    for x in &pc.representatives {
        for rule in ps.rules() {
            let mut values = Vec::with_capacity(rule.support().len());
            for y in rule.support() {
                let cell = group.mul(x, y);
                match pc.lookup(&cell)? {
                    Some(l) => values.push(Some(l)),
                    None => return Err(Error::CoverageGap(cell)),
                }
            }
            let mut view = PeriodicView { values };
            if rule.check(&mut view) != Check::Pass {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Wang tiles as `(north, east, south, west)` colour tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WangTileSet {
    pub tiles: Vec<[u32; 4]>,
}

impl WangTileSet {
    pub fn new(tiles: Vec<[u32; 4]>) -> Result<Self> {
        if tiles.is_empty() {
            return Err(Error::InvalidPatternSet("no tiles".into()));
        }
        Ok(WangTileSet { tiles })
    }
}

/// Forbid horizontally adjacent pairs whose east/west colours differ and
/// vertically adjacent pairs whose north/south colours differ, on ℤ².
pub fn wang_to_sft(ts: &WangTileSet) -> Result<PatternSet> {
    let z2 = Group::new(GroupSpec::free_abelian(2))?;
    let labels: Vec<String> = (0..ts.tiles.len()).map(|i| format!("t{i}")).collect();
    let alphabet = Alphabet::simple(labels)?;
    let origin = z2.identity();
    let east = z2.gen(0);
    let north = z2.gen(2);
    let mut patterns = Vec::new();
    for (i, t1) in ts.tiles.iter().enumerate() {
        for (j, t2) in ts.tiles.iter().enumerate() {
            if t1[1] != t2[3] {
                patterns.push(Pattern::new(
                    vec![origin.clone(), east.clone()],
                    vec![vec![i as u32], vec![j as u32]],
                )?);
            }
        }
    }
    for (i, t1) in ts.tiles.iter().enumerate() {
        for (j, t2) in ts.tiles.iter().enumerate() {
            if t1[0] != t2[2] {
                patterns.push(Pattern::new(
                    vec![origin.clone(), north.clone()],
                    vec![vec![i as u32], vec![j as u32]],
                )?);
            }
        }
    }
    PatternSet::explicit(&z2, alphabet, patterns, Some(1))
}

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#1f77b4", "#2ca02c",
];
const CELL_PX: i64 = 24;

/// Render a patch on ℤ² as an SVG grid, one 24px square per cell.
pub fn render_svg(patch: &Patch, alphabet: &Alphabet) -> Result<String> {
    if !matches!(patch.group().spec().family, Family::FreeAbelian { rank: 2 }) {
        return Err(Error::InvalidGroup("SVG rendering needs ℤ²".into()));
    }
    let pts: Vec<(i64, i64, &Letter)> = patch
        .iter()
        .map(|(e, l)| (e.coords()[0], e.coords()[1], l))
        .collect();
    let (min_x, max_x) = pts
        .iter()
        .fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (min_y, max_y) = pts
        .iter()
        .fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (w, h) = if pts.is_empty() {
        (0, 0)
    } else {
        ((max_x - min_x + 1) * CELL_PX, (max_y - min_y + 1) * CELL_PX)
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    for (x, y, l) in pts {
        let idx = l.iter().fold(0u64, |acc, &v| acc * 31 + v as u64) as usize;
        let colour = PALETTE[idx % PALETTE.len()];
        let px = (x - min_x) * CELL_PX;
        let py = (max_y - y) * CELL_PX;
        out.push_str(&format!(
            "  <rect x=\"{px}\" y=\"{py}\" width=\"{CELL_PX}\" height=\"{CELL_PX}\" fill=\"{colour}\"><title>{}</title></rect>\n",
            alphabet.label(l)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Group {
        Group::integers()
    }

    fn letters(alpha: &Alphabet, word: &str) -> Vec<Letter> {
        word.chars()
            .map(|c| alpha.letter(&c.to_string()).unwrap())
            .collect()
    }

    fn word_patterns(g: &Group, alpha: &Alphabet, words: &[&str]) -> Vec<Pattern> {
        words
            .iter()
            .map(|w| {
                let support = (0..w.len() as i64)
                    .map(|i| g.from_integer(i).unwrap())
                    .collect();
                Pattern::new(support, letters(alpha, w)).unwrap()
            })
            .collect()
    }

    fn golden_mean() -> PatternSet {
        let g = z();
        let a = Alphabet::simple(["0", "1"]).unwrap();
        let pats = word_patterns(&g, &a, &["11"]);
        PatternSet::explicit(&g, a, pats, None).unwrap()
    }

    #[test]
    fn occurs_examples() {
        let g = z();
        let a = Alphabet::simple(["a", "b"]).unwrap();
        let p = word_patterns(&g, &a, &["ab"]).remove(0);
        let patch = Patch::from_integer_word(&g, 0, &letters(&a, "ab")).unwrap();
        assert!(occurs(&patch, &p, &g.identity()).unwrap());
        let patch = Patch::from_integer_word(&g, 0, &letters(&a, "aba")).unwrap();
        assert!(!occurs(&patch, &p, &g.from_integer(1).unwrap()).unwrap());
        assert_eq!(
            occurs(&patch, &p, &g.from_integer(2).unwrap()),
            Err(Error::SupportNotCovered)
        );
    }

    #[test]
    fn admissibility_examples() {
        let ps = golden_mean();
        let g = ps.group().clone();
        let a = ps.alphabet().clone();
        let ok = Patch::from_integer_word(&g, 0, &letters(&a, "0101")).unwrap();
        assert!(locally_admissible(&ok, &ps));
        let bad = Patch::from_integer_word(&g, 0, &letters(&a, "0110")).unwrap();
        assert!(!locally_admissible(&bad, &ps));
        assert!(locally_admissible(&Patch::new(&g), &ps));
    }

    #[test]
    fn periodic_lookup_examples() {
        let g = z();
        let a = Alphabet::simple(["a", "b"]).unwrap();
        let pc = PeriodicConfig::integer_cycle(&g, &letters(&a, "ab")).unwrap();
        let b = a.letter("b").unwrap();
        assert_eq!(pc.lookup(&g.from_integer(7).unwrap()).unwrap(), Some(b));
        assert_eq!(
            pc.lookup(&g.identity()).unwrap(),
            Some(a.letter("a").unwrap())
        );
        let far = g.from_integer(2 * 64 + 10).unwrap();
        assert_eq!(pc.lookup(&far).unwrap(), None);
    }

    #[test]
    fn inconsistent_period_detected() {
        let g = z();
        let a = Alphabet::simple(["a", "b"]).unwrap();
        let data = Patch::from_integer_word(&g, 0, &letters(&a, "aab")).unwrap();
        let reps = data.domain().cloned().collect();
        let pc = PeriodicConfig::new(vec![g.from_integer(2).unwrap()], data, reps, 8).unwrap();
        assert!(matches!(
            pc.lookup(&g.identity()),
            Err(Error::InconsistentPeriod(_))
        ));
    }

    #[test]
    fn verify_examples() {
        let g = z();
        let a = Alphabet::simple(["a", "b"]).unwrap();
        let alt = PatternSet::explicit(&g, a.clone(), word_patterns(&g, &a, &["aa", "bb"]), None)
            .unwrap();
        let pc = PeriodicConfig::integer_cycle(&g, &letters(&a, "ab")).unwrap();
        assert!(verify_periodic_point(&pc, &alt).unwrap());
        let no_ab =
            PatternSet::explicit(&g, a.clone(), word_patterns(&g, &a, &["ab"]), None).unwrap();
        assert!(!verify_periodic_point(&pc, &no_ab).unwrap());
        let gm = golden_mean();
        let zero = PeriodicConfig::integer_cycle(&g, &[vec![0]]).unwrap();
        assert!(verify_periodic_point(&zero, &gm).unwrap());
    }

    #[test]
    fn wang_pattern_counts() {
        let one = WangTileSet::new(vec![[0, 0, 0, 0]]).unwrap();
        assert_eq!(wang_to_sft(&one).unwrap().patterns().unwrap().len(), 0);
        // Tile 0 has east 1 / west 0, tile 1 has east 0 / west 1; verticals match.
        let two = WangTileSet::new(vec![[5, 1, 5, 0], [5, 0, 5, 1]]).unwrap();
        let ps = wang_to_sft(&two).unwrap();
        assert_eq!(ps.patterns().unwrap().len(), 2);
    }

    #[test]
    fn svg_has_one_rect_per_cell() {
        let z2 = Group::new(GroupSpec::free_abelian(2)).unwrap();
        let a = Alphabet::simple(["x", "y"]).unwrap();
        let mut p = Patch::new(&z2);
        p.insert(z2.identity(), vec![0]);
        p.insert(z2.gen(0), vec![1]);
        let svg = render_svg(&p, &a).unwrap();
        assert_eq!(svg.matches("<rect").count(), 2);
        assert!(svg.contains("width=\"48\""));
    }
}
