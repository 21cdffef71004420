//! Compiled predicates for QI pairs and pullbacks.
//!
//! A configuration over `B_H(n)^S × B_G(n²+n)^{B_H(n)}` codes `(df, ℓ)`; the
//! pullback alphabet adds one letter of `X_H` per `k ∈ B_H(n)`. Each rule
//! reconstructs `f` relative to its anchor by integrating along shortlex
//! paths of the support ball, so its verdict depends only on relative data.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::calculus::{word_bound, DerivativeCoding, DerivativeRule, FunctionPatch};
use crate::error::{Error, Result};
use crate::group::{Ball, Element, Group};
use crate::qi::QIPairPatch;
use crate::sft::{Alphabet, Check, Component, Letter, LocalRule, Patch, PatternSet, View};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QipParams {
    pub n: usize,
    pub m: usize,
    pub big_n: usize,
    pub check_radius: usize,
    pub k_g: usize,
    pub k_h: usize,
}

impl QipParams {
    /// `M = max(n, K_H) + 1`, `N = nM + 1`, radius `n + N + nM + n²`.
    pub fn new(source: &Group, target: &Group, n: usize) -> Self {
        let k_h = word_bound(target);
        let m = n.max(k_h) + 1;
        let big_n = n * m + 1;
        QipParams {
            n,
            m,
            big_n,
            check_radius: n + big_n + n * m + n * n,
            k_g: word_bound(source),
            k_h,
        }
    }

    /// Radius of the codomain of the local quasi-inverse.
    pub fn codomain_radius(&self) -> usize {
        self.n + self.big_n + self.n * self.m
    }
}

/// How `(df, ℓ, σ_X)` sit inside a letter.
#[derive(Clone, Debug)]
pub struct QipLayout {
    pub coding: DerivativeCoding,
    /// `B_H(n)`, indexing the `ℓ` and pullback components.
    pub keys: Ball,
    /// `B_G(n² + n)`, the range of `ℓ` values.
    pub records: Ball,
    pub ell_offset: usize,
    pub pull_offset: usize,
}

impl QipLayout {
    pub fn new(source: &Group, target: &Group, n: usize) -> Result<Self> {
        let coding = DerivativeCoding::new(source, target, n)?;
        let keys = target.ball(&target.identity(), n)?;
        let records = source.ball(&source.identity(), n * n + n)?;
        let ell_offset = source.num_generators();
        let pull_offset = ell_offset + keys.len();
        Ok(QipLayout {
            coding,
            keys,
            records,
            ell_offset,
            pull_offset,
        })
    }

    pub fn source(&self) -> &Group {
        &self.coding.source
    }

    pub fn target(&self) -> &Group {
        &self.coding.target
    }

    pub fn n(&self) -> usize {
        self.coding.n
    }

    pub fn components(&self, pull: Option<&Alphabet>) -> Vec<Component> {
        let h = self.target();
        let mut out = self.coding.components(0);
        let labels: Vec<String> = self
            .records
            .members
            .iter()
            .map(|g| self.source().show(g))
            .collect();
        // Pullback letters are searched before ℓ, which only the QIP rule reads.
        let ell_layer = if pull.is_some() { 2 } else { 1 };
        for k in &self.keys.members {
            out.push(Component {
                name: format!("l[{}]", h.show(k)),
                size: labels.len() as u32,
                layer: ell_layer,
                labels: labels.clone(),
            });
        }
        if let Some(a) = pull {
            let c = &a.components[0];
            for k in &self.keys.members {
                out.push(Component {
                    name: format!("p[{}]", h.show(k)),
                    size: c.size,
                    layer: 1,
                    labels: c.labels.clone(),
                });
            }
        }
        out
    }
}

/// A support ball with `f` reconstruction along its breadth-first tree.
#[derive(Debug)]
struct Frame {
    ball: Ball,
    layout: QipLayout,
}

impl Frame {
    fn new(layout: QipLayout, radius: usize) -> Result<Self> {
        let g = layout.source();
        let ball = g.ball(&g.identity(), radius)?;
        Ok(Frame { ball, layout })
    }

    /// `φ(x) = f(g)⁻¹ f(gx)` for every support cell `x`, where the path is known.
    fn phi(&self, view: &mut dyn View, complete: &mut bool) -> Vec<Option<Element>> {
        let mut out = Vec::new();
        self.extend_phi(view, &mut out, self.ball.len(), complete);
        out
    }

    /// Extend a prefix of `φ` to the first `upto` cells, reading only their paths.
    fn extend_phi(
        &self,
        view: &mut dyn View,
        out: &mut Vec<Option<Element>>,
        upto: usize,
        complete: &mut bool,
    ) {
        let h = self.layout.target();
        if out.is_empty() && upto > 0 {
            out.push(Some(h.identity()));
        }
        for i in out.len()..upto {
            let (p, s) = self.ball.parent[i].expect("non-root");
            let v = match &out[p] {
                Some(acc) => match view.get(p, s) {
                    Some(code) => Some(h.mul(acc, self.layout.coding.decode(code))),
                    None => {
                        *complete = false;
                        None
                    }
                },
                None => None,
            };
            out.push(v);
        }
    }
}

/// Existence of a local quasi-inverse compatible with `ℓ` at the anchor.
#[derive(Debug)]
pub struct QipRule {
    params: QipParams,
    frame: Frame,
    components: Vec<usize>,
    /// Support indices forming the codomain `B_G(n + N + nM)`.
    codomain: Vec<usize>,
    /// Support indices of `B_G(N)`.
    inner: Vec<usize>,
    /// For each codomain cell, the sorted codomain cells within distance `n`.
    near: Vec<Vec<usize>>,
    h_m: Vec<Element>,
    h_n_ball: Vec<Element>,
    h_n: HashSet<Element>,
}

impl QipRule {
    pub fn new(layout: QipLayout, params: QipParams) -> Result<Self> {
        let ncomp = layout.ell_offset + layout.keys.len();
        let g = layout.source().clone();
        let h = layout.target().clone();
        let frame = Frame::new(layout, params.check_radius)?;
        let within = |r: usize| -> Vec<usize> {
            (0..frame.ball.len())
                .filter(|&i| frame.ball.dist[i] <= r)
                .collect()
        };
        let codomain = within(params.codomain_radius());
        let inner = within(params.big_n);
        let g_n = g.ball(&g.identity(), params.n)?.members;
        let cod_r = params.codomain_radius();
        let mut near = vec![Vec::new(); frame.ball.len()];
        for &c in &codomain {
            let mut v: Vec<usize> = g_n
                .iter()
                .filter_map(|u| {
                    frame
                        .ball
                        .index
                        .get(&g.mul(&frame.ball.members[c], u))
                        .copied()
                })
                .filter(|&i| frame.ball.dist[i] <= cod_r)
                .collect();
            v.sort_unstable();
            near[c] = v;
        }
        let h_n_ball = h.ball(&h.identity(), params.n)?.members;
        Ok(QipRule {
            h_m: h.ball(&h.identity(), params.m)?.members,
            near,
            h_n: h_n_ball.iter().cloned().collect(),
            h_n_ball,
            params,
            frame,
            components: (0..ncomp).collect(),
            codomain,
            inner,
        })
    }

    pub fn params(&self) -> &QipParams {
        &self.params
    }
}

impl LocalRule for QipRule {
    fn name(&self) -> &str {
        "local-quasi-inverse"
    }

    fn support(&self) -> &[Element] {
        &self.frame.ball.members
    }

    fn components(&self) -> &[usize] {
        &self.components
    }

    fn check(&self, view: &mut dyn View) -> Check {
        let lay = &self.frame.layout;
        let (g, h) = (lay.source(), lay.target());
        let ball = &self.frame.ball;
        let mut complete = true;
        let phi = self.frame.phi(view, &mut complete);

        // Known part of the domain N_M φ(B(N)).
        let mut dom: Vec<Element> = Vec::new();
        let mut dom_ix: HashMap<Element, usize> = HashMap::new();
        for &x in &self.inner {
            match &phi[x] {
                Some(p) => {
                    for u in &self.h_m {
                        let e = h.mul(p, u);
                        if !dom_ix.contains_key(&e) {
                            dom_ix.insert(e.clone(), dom.len());
                            dom.push(e);
                        }
                    }
                }
                None => complete = false,
            }
        }
        let mut cand: Vec<Option<Vec<usize>>> = vec![None; dom.len()];
        let restrict = |c: &mut Option<Vec<usize>>, set: &[usize]| match c {
            Some(v) => v.retain(|i| set.binary_search(i).is_ok()),
            None => *c = Some(set.to_vec()),
        };

        // Compatibility with ℓ: L(φ(x)k) = x ⟨ℓ(gx), k⟩.
        let cod_r = self.params.codomain_radius();
        for x in 0..ball.len() {
            let Some(px) = &phi[x] else { continue };
            for (j, k) in lay.keys.members.iter().enumerate() {
                let target = h.mul(px, k);
                let Some(&d) = dom_ix.get(&target) else {
                    continue;
                };
                match view.get(x, lay.ell_offset + j) {
                    Some(code) => {
                        let val = g.mul(&ball.members[x], &lay.records.members[code as usize]);
                        match ball.index.get(&val) {
                            Some(&i) if ball.dist[i] <= cod_r => restrict(&mut cand[d], &[i]),
                            _ => return Check::Fail,
                        }
                    }
                    None => complete = false,
                }
            }
        }
        // Left quasi-inverse: L(φ(x)) ∈ B(n, x).
        for &x in &self.inner {
            let Some(px) = &phi[x] else { continue };
            restrict(&mut cand[dom_ix[px]], &self.near[x]);
        }
        // Right quasi-inverse: φ(L(h)) ∈ B(n, h) where φ(L(h)) is known.
        let mut by_phi: HashMap<&Element, Vec<usize>> = HashMap::new();
        let mut unknown = Vec::new();
        for &i in &self.codomain {
            match &phi[i] {
                Some(p) => by_phi.entry(p).or_default().push(i),
                None => unknown.push(i),
            }
        }
        for (d, he) in dom.iter().enumerate() {
            match &mut cand[d] {
                Some(v) => v.retain(|&i| match &phi[i] {
                    Some(pi) => self.h_n.contains(&h.relative(he, pi)),
                    None => true,
                }),
                c @ None => {
                    let mut v = unknown.clone();
                    for u in &self.h_n_ball {
                        if let Some(cells) = by_phi.get(&h.mul(he, u)) {
                            v.extend_from_slice(cells);
                        }
                    }
                    v.sort_unstable();
                    *c = Some(v);
                }
            }
        }
        let cand: Vec<Vec<usize>> = cand.into_iter().map(|c| c.unwrap_or_default()).collect();
        if cand.iter().any(|c| c.is_empty()) {
            return Check::Fail;
        }
        // Lipschitz constraint on the Cayley edges of the domain.
        let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); dom.len()];
        for (d, he) in dom.iter().enumerate() {
            for t in 0..h.num_generators() {
                if let Some(&e) = dom_ix.get(&h.mul_gen(he, t)) {
                    if e != d && !nbrs[d].contains(&e) {
                        nbrs[d].push(e);
                    }
                }
            }
        }
        let close = |a: usize, b: usize| self.near[a].binary_search(&b).is_ok();
        if solve_csp(cand, &nbrs, &close) {
            if complete {
                Check::Pass
            } else {
                Check::Open
            }
        } else {
            Check::Fail
        }
    }
}

/// Arc consistency followed by backtracking for a binary CSP whose only
/// constraint, on every listed edge, is `close`.
fn solve_csp(
    mut cand: Vec<Vec<usize>>,
    nbrs: &[Vec<usize>],
    close: &dyn Fn(usize, usize) -> bool,
) -> bool {
    let mut queue: Vec<(usize, usize)> = nbrs
        .iter()
        .enumerate()
        .flat_map(|(a, ns)| ns.iter().map(move |&b| (a, b)))
        .collect();
    while let Some((a, b)) = queue.pop() {
        let before = cand[a].len();
        let cb = cand[b].clone();
        cand[a].retain(|&x| cb.iter().any(|&y| close(x, y)));
        if cand[a].is_empty() {
            return false;
        }
        if cand[a].len() < before {
            for &c in &nbrs[a] {
                if c != b {
                    queue.push((c, a));
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..cand.len()).collect();
    order.sort_by_key(|&v| cand[v].len());
    let mut value: Vec<Option<usize>> = vec![None; cand.len()];
    fn go(
        i: usize,
        order: &[usize],
        cand: &[Vec<usize>],
        nbrs: &[Vec<usize>],
        value: &mut [Option<usize>],
        close: &dyn Fn(usize, usize) -> bool,
        steps: &mut usize,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        *steps += 1;
        if *steps > 100_000 {
            // Give up proving infeasibility; report satisfiable so Fail stays sound.
            return true;
        }
        let v = order[i];
        for &x in &cand[v] {
            if nbrs[v]
                .iter()
                .all(|&u| value[u].is_none_or(|y| close(x, y)))
            {
                value[v] = Some(x);
                if go(i + 1, order, cand, nbrs, value, close, steps) {
                    return true;
                }
                value[v] = None;
            }
        }
        false
    }
    let mut steps = 0;
    go(0, &order, &cand, nbrs, &mut value, close, &mut steps)
}

/// The QI-pair SFT: path independence of `df` plus the local quasi-inverse predicate.
pub fn compile_qipair_sft(source: &Group, target: &Group, n: usize) -> Result<PatternSet> {
    let params = QipParams::new(source, target, n);
    let layout = QipLayout::new(source, target, n)?;
    let alphabet = Alphabet::product(layout.components(None))?;
    let deriv = DerivativeRule::new(layout.coding.clone(), params.k_g, 0)?;
    let qip = QipRule::new(layout, params)?;
    Ok(PatternSet::predicate(
        source,
        alphabet,
        vec![Arc::new(deriv), Arc::new(qip)],
        params.check_radius,
    ))
}

/// Pullback consistency: equal points `f(g₁)k₁ = f(g₂)k₂` carry equal letters.
#[derive(Debug)]
pub struct ConsistencyRule {
    frame: Frame,
    components: Vec<usize>,
    key_ix: HashMap<Element, usize>,
}

impl LocalRule for ConsistencyRule {
    fn name(&self) -> &str {
        "pullback-consistency"
    }

    fn support(&self) -> &[Element] {
        &self.frame.ball.members
    }

    fn components(&self) -> &[usize] {
        &self.components
    }

    fn check(&self, view: &mut dyn View) -> Check {
        let lay = &self.frame.layout;
        let h = lay.target();
        let mut complete = true;
        let mut phi = Vec::new();
        let mut open = false;
        for x in 0..self.frame.ball.len() {
            self.frame.extend_phi(view, &mut phi, x + 1, &mut complete);
            let Some(px) = &phi[x] else { continue };
            for (j2, k2) in lay.keys.members.iter().enumerate() {
                let Some(&j1) = self.key_ix.get(&h.mul(px, k2)) else {
                    continue;
                };
                if x == 0 && j1 == j2 {
                    continue;
                }
                match (
                    view.get(0, lay.pull_offset + j1),
                    view.get(x, lay.pull_offset + j2),
                ) {
                    (Some(a), Some(b)) if a != b => return Check::Fail,
                    (Some(_), Some(_)) => {}
                    _ => open = true,
                }
            }
        }
        open |= !complete;
        if open {
            Check::Open
        } else {
            Check::Pass
        }
    }
}

/// A forbidden pattern of `X_H` in relative coordinates.
#[derive(Clone, Debug)]
struct HPattern {
    support: Vec<Element>,
    letters: Vec<u32>,
}

/// No translate of a forbidden `X_H` pattern may be displayed through `f`.
#[derive(Debug)]
pub struct TransferRule {
    frame: Frame,
    components: Vec<usize>,
    patterns: Vec<HPattern>,
}

impl LocalRule for TransferRule {
    fn name(&self) -> &str {
        "pullback-transfer"
    }

    fn support(&self) -> &[Element] {
        &self.frame.ball.members
    }

    fn components(&self) -> &[usize] {
        &self.components
    }

    fn check(&self, view: &mut dyn View) -> Check {
        let lay = &self.frame.layout;
        let h = lay.target();
        let ball = &self.frame.ball;
        let mut complete = true;
        let mut phi = Vec::new();
        // Letters displayed at each point of H near f(g), grown shell by shell.
        let mut shown: HashMap<Element, Vec<u32>> = HashMap::new();
        let mut x = 0;
        while x < ball.len() {
            let shell = ball.dist[x];
            let end = (x..ball.len())
                .find(|&i| ball.dist[i] > shell)
                .unwrap_or(ball.len());
            self.frame.extend_phi(view, &mut phi, end, &mut complete);
            for (y, py) in phi.iter().enumerate().take(end).skip(x) {
                let Some(py) = py else { continue };
                for (j, k) in lay.keys.members.iter().enumerate() {
                    match view.get(y, lay.pull_offset + j) {
                        Some(a) => {
                            let e = shown.entry(h.mul(py, k)).or_default();
                            if !e.contains(&a) {
                                e.push(a);
                            }
                        }
                        None => complete = false,
                    }
                }
            }
            if self.displays_forbidden(h, &lay.keys.members, &shown) {
                return Check::Fail;
            }
            x = end;
        }
        if complete {
            Check::Pass
        } else {
            Check::Open
        }
    }
}

impl TransferRule {
    fn displays_forbidden(
        &self,
        h: &Group,
        keys: &[Element],
        shown: &HashMap<Element, Vec<u32>>,
    ) -> bool {
        self.patterns.iter().any(|p| {
            let h1 = h.inv(&p.support[0]);
            keys.iter().any(|k1| {
                let base = h.mul(k1, &h1);
                p.support
                    .iter()
                    .zip(&p.letters)
                    .all(|(hi, a)| shown.get(&h.mul(&base, hi)).is_some_and(|v| v.contains(a)))
            })
        })
    }
}

/// Radius of the transfer rule: `2n + n(2n + diam α)`.
pub fn transfer_radius(n: usize, diam: usize) -> usize {
    2 * n + n * (2 * n + diam)
}

/// The pullback SFT of an explicit `ps_h` along `n`-QI pairs `G → H`.
pub fn compile_pullback_sft(
    source: &Group,
    target: &Group,
    n: usize,
    ps_h: &PatternSet,
) -> Result<PatternSet> {
    if ps_h.group().id() != target.id() {
        return Err(Error::MixedGroups);
    }
    let pats = ps_h
        .patterns()
        .ok_or_else(|| Error::InvalidPatternSet("pullback needs explicit patterns".into()))?;
    if !ps_h.alphabet().is_simple() {
        return Err(Error::InvalidPatternSet(
            "pullback needs a simple alphabet".into(),
        ));
    }
    let params = QipParams::new(source, target, n);
    let layout = QipLayout::new(source, target, n)?;
    let alphabet = Alphabet::product(layout.components(Some(ps_h.alphabet())))?;
    let nkeys = layout.keys.len();
    let deriv_comps: Vec<usize> = (0..source.num_generators()).collect();
    let pull_comps: Vec<usize> = (layout.pull_offset..layout.pull_offset + nkeys).collect();
    let with_pull: Vec<usize> = deriv_comps.iter().chain(&pull_comps).copied().collect();

    let deriv = DerivativeRule::new(layout.coding.clone(), params.k_g, 0)?;
    let qip = QipRule::new(layout.clone(), params)?;
    let key_ix = layout
        .keys
        .members
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    let consistency = ConsistencyRule {
        frame: Frame::new(layout.clone(), 2 * n * n + 2 * n)?,
        components: with_pull.clone(),
        key_ix,
    };
    let mut diam = 0;
    let patterns: Vec<HPattern> = pats
        .iter()
        .map(|p| {
            for a in &p.support {
                for b in &p.support {
                    diam = diam.max(target.dist(a, b));
                }
            }
            HPattern {
                support: p.support.clone(),
                letters: p.letters.iter().map(|l| l[0]).collect(),
            }
        })
        .collect();
    let rt = transfer_radius(n, diam);
    let transfer = TransferRule {
        frame: Frame::new(layout, rt)?,
        components: with_pull,
        patterns,
    };
    Ok(PatternSet::predicate(
        source,
        alphabet,
        vec![
            Arc::new(deriv),
            Arc::new(qip),
            Arc::new(consistency),
            Arc::new(transfer),
        ],
        params.check_radius.max(rt),
    ))
}

/// Code `(df, ℓ)` of a QI pair on `region` as a patch over the QIP alphabet.
pub fn encode_qi_pair(p: &QIPairPatch, layout: &QipLayout, region: &[Element]) -> Result<Patch> {
    encode(p, layout, region, None)
}

/// As [`encode_qi_pair`], adding the pulled-back blocks `f*(B_n σ)`.
pub fn encode_pullback(
    p: &QIPairPatch,
    layout: &QipLayout,
    sigma: &Patch,
    region: &[Element],
) -> Result<Patch> {
    encode(p, layout, region, Some(sigma))
}

fn encode(
    p: &QIPairPatch,
    layout: &QipLayout,
    region: &[Element],
    sigma: Option<&Patch>,
) -> Result<Patch> {
    let (g, h) = (p.source(), p.target());
    let f: &FunctionPatch = &p.f;
    let mut out = Patch::new(g);
    for x in region {
        let fx = f.get(x).ok_or(Error::SupportNotCovered)?;
        let mut letter: Letter = Vec::new();
        for s in 0..g.num_generators() {
            let fxs = f.get(&g.mul_gen(x, s)).ok_or(Error::SupportNotCovered)?;
            let v = layout
                .coding
                .encode(&h.relative(fx, fxs))
                .ok_or_else(|| Error::VerificationFailed("f is not n-Lipschitz".into()))?;
            letter.push(v);
        }
        for k in &layout.keys.members {
            let y = p.big_f.get(&h.mul(fx, k)).ok_or(Error::SupportNotCovered)?;
            let v = layout
                .records
                .position(&g.relative(x, y))
                .ok_or_else(|| Error::VerificationFailed("ℓ value exceeds n² + n".into()))?;
            letter.push(v as u32);
        }
        if let Some(s) = sigma {
            for k in &layout.keys.members {
                let l = s.get(&h.mul(fx, k)).ok_or(Error::SupportNotCovered)?;
                letter.push(l[0]);
            }
        }
        out.insert(x.clone(), letter);
    }
    Ok(out)
}
