//! Semi-deciding emptiness of SFTs.
//!
//! Emptiness is certified by exhausting the colorings of a ball; nonemptiness
//! by exhibiting a periodic configuration (or, on finite groups, a coloring
//! of the whole group).

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::ends::periodic_point_pipeline;
use crate::error::{Error, Result};
use crate::group::{Family, Group};
use crate::search::{solution_patch, solve, CellSpace, Outcome, SearchStats};
use crate::sft::{
    locally_admissible, verify_periodic_point, Letter, Patch, PatternSet, PeriodicConfig,
};

/// Default node budget for [`decide_domino`].
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Largest transition graph (edges) built exactly on ℤ.
const TRANSITION_LIMIT: u128 = 1 << 16;

#[derive(Clone, Debug)]
pub enum Certificate {
    EmptyAt(usize),
    Admissible(Patch),
}

/// Search all colorings of `B(r)` for a locally admissible one.
/// Returns `SizeLimit` when the node budget runs out.
pub fn emptiness_certificate(
    ps: &PatternSet,
    r: usize,
    budget: u64,
) -> Result<(Certificate, SearchStats)> {
    let space = CellSpace::ball(ps.group(), r)?;
    let (out, stats) = solve(ps, &space, budget);
    match out {
        Outcome::Solution(letters) => Ok((
            Certificate::Admissible(solution_patch(&space, &letters)),
            stats,
        )),
        Outcome::Unsat => Ok((Certificate::EmptyAt(r), stats)),
        Outcome::Budget | Outcome::Undetermined => Err(Error::SizeLimit(budget as usize)),
    }
}

#[derive(Clone, Debug)]
pub enum Witness {
    Periodic(PeriodicConfig),
    /// A coloring of an entire finite group.
    Patch(Patch),
}

#[derive(Clone, Debug)]
pub enum Verdict {
    EmptyAt(usize),
    Nonempty(Witness),
    Unknown,
}

impl Verdict {
    pub fn is_empty(&self) -> bool {
        matches!(self, Verdict::EmptyAt(_))
    }

    pub fn is_nonempty(&self) -> bool {
        matches!(self, Verdict::Nonempty(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::EmptyAt(_) => "empty",
            Verdict::Nonempty(_) => "nonempty",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DominoOutcome {
    pub verdict: Verdict,
    pub nodes: u64,
    /// Largest radius for which a certificate search finished.
    pub radius_reached: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stats {
    pub nodes: u64,
    pub radius_reached: usize,
}

struct Run<'a> {
    ps: &'a PatternSet,
    budget: u64,
    nodes: u64,
    radius: usize,
}

impl Run<'_> {
    fn left(&self) -> u64 {
        self.budget.saturating_sub(self.nodes)
    }

    fn done(self, verdict: Verdict) -> DominoOutcome {
        DominoOutcome {
            verdict,
            nodes: self.nodes,
            radius_reached: self.radius,
        }
    }

    /// Certificate at radius `r`; `Some(true)` for empty, `None` if out of budget.
    fn certify(&mut self, r: usize, share: u64) -> Option<bool> {
        let b = share.min(self.left());
        match emptiness_certificate(self.ps, r, b) {
            Ok((c, st)) => {
                self.nodes += st.nodes;
                self.radius = self.radius.max(r);
                Some(matches!(c, Certificate::EmptyAt(_)))
            }
            Err(_) => {
                self.nodes += b;
                None
            }
        }
    }

    fn torus(&mut self, space: CellSpace, share: u64) -> Option<Vec<Letter>> {
        let b = share.min(self.left());
        let (out, st) = solve(self.ps, &space, b);
        self.nodes += st.nodes;
        match out {
            Outcome::Solution(l) => Some(l),
            _ => None,
        }
    }
}

/// Decide emptiness of `X_ps` within a node budget.
pub fn decide_domino(ps: &PatternSet, budget: u64) -> DominoOutcome {
    let mut run = Run {
        ps,
        budget,
        nodes: 0,
        radius: 0,
    };
    let group = ps.group().clone();
    if let Some(order) = group.finite_order() {
        return decide_finite(run, order);
    }
    if group.is_infinite_cyclic() {
        if let Some(v) = decide_z_exact(&mut run) {
            return run.done(v);
        }
        return decide_z_torus(run);
    }
    match group.spec().family {
        Family::FreeAbelian { rank: 2 } => decide_planar(run),
        Family::Free { .. } | Family::FreeProduct { .. } => decide_ends(run),
        _ => decide_certificates(run),
    }
}

fn decide_finite(mut run: Run, order: usize) -> DominoOutcome {
    let group = run.ps.group().clone();
    let all = match group.ball(&group.identity(), order) {
        Ok(b) => b,
        Err(_) => return run.done(Verdict::Unknown),
    };
    let diam = all.dist.iter().copied().max().unwrap_or(0);
    let space = CellSpace::region(&group, all.members);
    let (out, st) = solve(run.ps, &space, run.left());
    run.nodes += st.nodes;
    match out {
        Outcome::Solution(l) => {
            let patch = solution_patch(&space, &l);
            if locally_admissible(&patch, run.ps) {
                run.radius = diam;
                run.done(Verdict::Nonempty(Witness::Patch(patch)))
            } else {
                run.done(Verdict::Unknown)
            }
        }
        Outcome::Unsat => {
            run.radius = diam;
            run.done(Verdict::EmptyAt(diam))
        }
        _ => run.done(Verdict::Unknown),
    }
}

fn verified_cycle(ps: &PatternSet, word: &[Letter]) -> Option<PeriodicConfig> {
    let pc = PeriodicConfig::integer_cycle(ps.group(), word).ok()?;
    matches!(verify_periodic_point(&pc, ps), Ok(true)).then_some(pc)
}

/// Every word of length `len` over the alphabet, in lexicographic order.
fn all_words(letters: &[Letter], len: usize) -> Vec<Vec<Letter>> {
    let mut out: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * letters.len());
        for w in &out {
            for l in letters {
                let mut v = w.clone();
                v.push(l.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn word_admissible(ps: &PatternSet, w: &[Letter]) -> bool {
    match Patch::from_integer_word(ps.group(), 0, w) {
        Ok(p) => locally_admissible(&p, ps),
        Err(_) => false,
    }
}

/// Exact decision on ℤ from the graph of admissible windows, when it is small.
fn decide_z_exact(run: &mut Run) -> Option<Verdict> {
    let ps = run.ps;
    let (lo, hi) = ps.integer_window()?;
    let w = ((hi - lo + 1) as usize).max(2);
    let size = ps.alphabet().size();
    if size
        .checked_pow(w as u32)
        .is_none_or(|e| e > TRANSITION_LIMIT)
    {
        return None;
    }
    let letters = ps.alphabet().letters(size as usize)?;
    let verts: Vec<Vec<Letter>> = all_words(&letters, w - 1)
        .into_iter()
        .filter(|v| word_admissible(ps, v))
        .collect();
    let vindex: HashMap<&Vec<Letter>, usize> =
        verts.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for (i, v) in verts.iter().enumerate() {
        for l in &letters {
            let mut e = v.clone();
            e.push(l.clone());
            if word_admissible(ps, &e) {
                if let Some(&j) = vindex.get(&e[1..].to_vec()) {
                    succ[i].push(j);
                }
            }
        }
    }
    if let Some(cycle) = shortest_cycle(&succ) {
        let word: Vec<Letter> = cycle.iter().map(|&i| verts[i][0].clone()).collect();
        return verified_cycle(ps, &word).map(|pc| Verdict::Nonempty(Witness::Periodic(pc)));
    }
    // Acyclic: the longest admissible word bounds the certificate radius.
    let longest = if verts.is_empty() {
        (0..w - 1)
            .rev()
            .find(|&m| {
                all_words(&letters, m)
                    .iter()
                    .any(|x| word_admissible(ps, x))
            })
            .unwrap_or(0)
    } else {
        (w - 1) + longest_path(&succ)
    };
    let r = longest.div_ceil(2);
    match run.certify(r, run.left()) {
        Some(true) => Some(Verdict::EmptyAt(r)),
        _ => Some(Verdict::Unknown),
    }
}

/// Shortest directed cycle, ties broken by smallest start vertex.
fn shortest_cycle(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for s in 0..succ.len() {
        let mut prev = vec![usize::MAX; succ.len()];
        let mut queue = VecDeque::from([s]);
        let mut seen = vec![false; succ.len()];
        seen[s] = true;
        let mut found = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &v in &succ[u] {
                if v == s {
                    found = Some(u);
                    break 'bfs;
                }
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if let Some(mut u) = found {
            let mut path = vec![u];
            while u != s {
                u = prev[u];
                path.push(u);
            }
            path.reverse();
            if best.as_ref().is_none_or(|b| path.len() < b.len()) {
                best = Some(path);
            }
        }
    }
    best
}

/// Longest path (in edges) of an acyclic graph.
fn longest_path(succ: &[Vec<usize>]) -> usize {
    fn go(u: usize, succ: &[Vec<usize>], memo: &mut [Option<usize>]) -> usize {
        if let Some(v) = memo[u] {
            return v;
        }
        let v = succ[u]
            .iter()
            .map(|&t| 1 + go(t, succ, memo))
            .max()
            .unwrap_or(0);
        memo[u] = Some(v);
        v
    }
    let mut memo = vec![None; succ.len()];
    (0..succ.len())
        .map(|u| go(u, succ, &mut memo))
        .max()
        .unwrap_or(0)
}

fn decide_z_torus(mut run: Run) -> DominoOutcome {
    let group = run.ps.group().clone();
    let share = (run.budget / 64).max(1000);
    // Balls smaller than the defining radius hold no rule instance. Each new
    // certificate waits until the tori have spent as much as the last one.
    let mut r = run.ps.defining_radius().max(1);
    let mut last_cost = 0u64;
    let mut since = 0u64;
    let mut k = 1usize;
    while run.left() > 0 {
        if since >= last_cost {
            let before = run.nodes;
            if run.certify(r, share) == Some(true) {
                return run.done(Verdict::EmptyAt(r));
            }
            last_cost = run.nodes - before;
            since = 0;
            r += 1;
        }
        let Ok(space) = CellSpace::cyclic(&group, k as i64) else {
            break;
        };
        let before = run.nodes;
        if let Some(l) = run.torus(space, share) {
            if let Some(pc) = verified_cycle(run.ps, &l) {
                return run.done(Verdict::Nonempty(Witness::Periodic(pc)));
            }
        }
        since += run.nodes - before;
        k += 1;
    }
    run.done(Verdict::Unknown)
}

fn planar_config(
    group: &Group,
    p: i64,
    q: i64,
    space: &CellSpace,
    l: &[Letter],
) -> Option<PeriodicConfig> {
    let data = solution_patch(space, l);
    let periods = vec![group.pow(&group.gen(0), p), group.pow(&group.gen(2), q)];
    let reps = data.domain().cloned().collect();
    PeriodicConfig::new(periods, data, reps, 64).ok()
}

fn decide_planar(mut run: Run) -> DominoOutcome {
    let group = run.ps.group().clone();
    let share = (run.budget / 64).max(1000);
    let mut k = 1i64;
    while run.left() > 0 {
        if run.certify(k as usize, share) == Some(true) {
            return run.done(Verdict::EmptyAt(k as usize));
        }
        // New tori with max(p, q) = k.
        for (p, q) in (1..=k).flat_map(|j| [(k, j), (j, k)]) {
            if p == q && p != k {
                continue;
            }
            if (p * q) as u64 > run.budget || run.left() == 0 {
                continue;
            }
            let Ok(space) = CellSpace::planar(&group, p, q) else {
                return run.done(Verdict::Unknown);
            };
            if let Some(l) = run.torus(space.clone(), share) {
                if let Some(pc) = planar_config(&group, p, q, &space, &l) {
                    if matches!(verify_periodic_point(&pc, run.ps), Ok(true)) {
                        return run.done(Verdict::Nonempty(Witness::Periodic(pc)));
                    }
                }
            }
        }
        k += 1;
    }
    run.done(Verdict::Unknown)
}

fn decide_ends(mut run: Run) -> DominoOutcome {
    let share = (run.budget / 16).max(1000);
    let n = run.ps.defining_radius().max(1);
    let mut tried = false;
    let mut r = 1;
    while run.left() > 0 {
        match run.certify(r, share) {
            Some(true) => return run.done(Verdict::EmptyAt(r)),
            None => break,
            Some(false) => {}
        }
        if !tried && r >= n {
            tried = true;
            let b = run.left() / 2;
            if let Ok((found, spent)) = periodic_point_pipeline(run.ps, n, b) {
                run.nodes += spent;
                let Some((_, c)) = found else {
                    r += 1;
                    continue;
                };
                if matches!(verify_periodic_point(&c.config, run.ps), Ok(true)) {
                    return run.done(Verdict::Nonempty(Witness::Periodic(c.config)));
                }
            }
        }
        r += 1;
    }
    run.done(Verdict::Unknown)
}

fn decide_certificates(mut run: Run) -> DominoOutcome {
    let share = (run.budget / 16).max(1000);
    let mut r = 1;
    while run.left() > 0 {
        match run.certify(r, share) {
            Some(true) => return run.done(Verdict::EmptyAt(r)),
            None => break,
            Some(false) => r += 1,
        }
    }
    run.done(Verdict::Unknown)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Empty,
    Nonempty { period: usize, word: Vec<Letter> },
}

/// Independent ℤ decision by de Bruijn graph: vertices are admissible words
/// of length `L − 1`, edges admissible words of length `L`, where `L` is the
/// span of the pattern supports. Works directly on the forbidden words.
pub fn z_transition_oracle(ps: &PatternSet) -> Result<OracleVerdict> {
    let group = ps.group();
    let pats = ps
        .patterns()
        .ok_or_else(|| Error::InvalidPatternSet("oracle needs explicit patterns".into()))?;
    if !group.is_infinite_cyclic() {
        return Err(Error::InvalidGroup("oracle needs ℤ".into()));
    }
    // Each pattern as a map from offset to letter, normalised to start at 0.
    let mut forb: Vec<Vec<(usize, Letter)>> = Vec::new();
    let mut span = 1;
    for p in pats {
        let offs: Vec<i64> = p
            .support
            .iter()
            .map(|e| group.as_integer(e).unwrap())
            .collect();
        let lo = *offs.iter().min().unwrap();
        let cells: Vec<(usize, Letter)> = offs
            .iter()
            .zip(&p.letters)
            .map(|(o, l)| ((o - lo) as usize, l.clone()))
            .collect();
        span = span.max(cells.iter().map(|c| c.0 + 1).max().unwrap());
        forb.push(cells);
    }
    let l = span.max(2);
    let letters = ps
        .alphabet()
        .letters(1 << 12)
        .ok_or_else(|| Error::InvalidPatternSet("alphabet too large".into()))?;
    let clean = |w: &[usize]| -> bool {
        forb.iter().all(|f| {
            let width = f.iter().map(|c| c.0 + 1).max().unwrap();
            (0..w.len().saturating_sub(width - 1))
                .all(|s| !f.iter().all(|(o, lt)| letters[w[s + o]] == *lt))
        })
    };
    let k = letters.len();
    let nverts = k.pow((l - 1) as u32);
    let decode = |mut code: usize, len: usize| -> Vec<usize> {
        let mut w = vec![0; len];
        for i in (0..len).rev() {
            w[i] = code % k;
            code /= k;
        }
        w
    };
    let live: Vec<bool> = (0..nverts).map(|c| clean(&decode(c, l - 1))).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nverts];
    for c in 0..nverts {
        if !live[c] {
            continue;
        }
        for a in 0..k {
            let mut w = decode(c, l - 1);
            w.push(a);
            if clean(&w) {
                let next = (c * k + a) % nverts;
                if live[next] {
                    adj[c].push(next);
                }
            }
        }
    }
    // BFS from each vertex back to itself.
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    for s in (0..nverts).filter(|&c| live[c]) {
        let mut dist = vec![usize::MAX; nverts];
        let mut from = vec![usize::MAX; nverts];
        let mut q = VecDeque::new();
        dist[s] = 0;
        q.push_back(s);
        let mut closing = None;
        while let Some(u) = q.pop_front() {
            if adj[u].contains(&s) {
                closing = Some(u);
                break;
            }
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    from[v] = u;
                    q.push_back(v);
                }
            }
        }
        if let Some(u) = closing {
            let len = dist[u] + 1;
            if best.as_ref().is_none_or(|b| len < b.0) {
                let mut path = vec![u];
                let mut cur = u;
                while cur != s {
                    cur = from[cur];
                    path.push(cur);
                }
                path.reverse();
                best = Some((len, s, path));
            }
        }
    }
    Ok(match best {
        None => OracleVerdict::Empty,
        Some((len, _, path)) => OracleVerdict::Nonempty {
            period: len,
            word: path
                .iter()
                .map(|&c| letters[decode(c, l - 1)[0]].clone())
                .collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::{Alphabet, Pattern};

    fn z_words(labels: &[&str], forbidden: &[&str]) -> PatternSet {
        let z = Group::integers();
        let alpha = Alphabet::simple(labels.iter().copied()).unwrap();
        let pats = forbidden
            .iter()
            .map(|w| {
                let letters: Vec<Letter> = w
                    .chars()
                    .map(|c| alpha.letter(&c.to_string()).unwrap())
                    .collect();
                let support = (0..letters.len() as i64)
                    .map(|i| z.from_integer(i).unwrap())
                    .collect();
                Pattern::new(support, letters).unwrap()
            })
            .collect();
        PatternSet::explicit(&z, alpha, pats, None).unwrap()
    }

    #[test]
    fn certificates() {
        let all = z_words(&["a", "b"], &["aa", "ab", "ba", "bb"]);
        assert!(matches!(
            emptiness_certificate(&all, 1, 1000).unwrap().0,
            Certificate::EmptyAt(1)
        ));
        let golden = z_words(&["0", "1"], &["11"]);
        assert!(matches!(
            emptiness_certificate(&golden, 3, 1000).unwrap().0,
            Certificate::Admissible(_)
        ));
        let one_edge = z_words(&["0", "1"], &["00", "01", "11"]);
        assert!(matches!(
            emptiness_certificate(&one_edge, 2, 1000).unwrap().0,
            Certificate::EmptyAt(2)
        ));
    }

    #[test]
    fn decide_examples() {
        let golden = z_words(&["0", "1"], &["11"]);
        match decide_domino(&golden, DEFAULT_BUDGET).verdict {
            Verdict::Nonempty(Witness::Periodic(pc)) => {
                assert_eq!(pc.domain_data.len(), 1);
                assert_eq!(pc.domain_data.iter().next().unwrap().1, &vec![0]);
            }
            v => panic!("{v:?}"),
        }
        let alt = z_words(&["a", "b"], &["aa", "bb"]);
        match decide_domino(&alt, DEFAULT_BUDGET).verdict {
            Verdict::Nonempty(Witness::Periodic(pc)) => assert_eq!(pc.domain_data.len(), 2),
            v => panic!("{v:?}"),
        }
        let all = z_words(&["a", "b"], &["aa", "ab", "ba", "bb"]);
        assert!(matches!(
            decide_domino(&all, DEFAULT_BUDGET).verdict,
            Verdict::EmptyAt(1)
        ));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            z_transition_oracle(&z_words(&["0", "1"], &["11"])).unwrap(),
            OracleVerdict::Nonempty {
                period: 1,
                word: vec![vec![0]]
            }
        );
        assert_eq!(
            z_transition_oracle(&z_words(&["0", "1"], &["00", "11"])).unwrap(),
            OracleVerdict::Nonempty {
                period: 2,
                word: vec![vec![0], vec![1]]
            }
        );
        assert_eq!(
            z_transition_oracle(&z_words(&["0", "1"], &["00", "01", "10", "11"])).unwrap(),
            OracleVerdict::Empty
        );
    }

    #[test]
    fn finite_group_witness_is_a_patch() {
        let c4 = Group::new(crate::group::GroupSpec::finite_cyclic(4)).unwrap();
        let alpha = Alphabet::simple(["0", "1"]).unwrap();
        let pats = (0..2u32)
            .map(|a| Pattern::new(vec![c4.identity(), c4.gen(0)], vec![vec![a], vec![a]]).unwrap())
            .collect();
        let ps = PatternSet::explicit(&c4, alpha, pats, None).unwrap();
        assert!(matches!(
            decide_domino(&ps, 10_000).verdict,
            Verdict::Nonempty(Witness::Patch(_))
        ));
    }

    #[test]
    fn planar_torus_witness() {
        let ts = crate::sft::WangTileSet::new(vec![[0, 0, 0, 0]]).unwrap();
        let ps = crate::sft::wang_to_sft(&ts).unwrap();
        assert!(decide_domino(&ps, 10_000).verdict.is_nonempty());
    }
}
