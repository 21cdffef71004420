//! Ends of Cayley graphs and the periodic-point construction for groups with
//! at least two ends.
//!
//! Everything here works inside a finite truncation (a ball or a tube around
//! an axis). A component of the complement of a ball counts as unbounded when
//! it reaches the outer sphere of the truncation.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Ball, Element, Group};
use crate::search::{solution_patch, solve, CellSpace, Outcome};
use crate::sft::{verify_periodic_point, Letter, Patch, PatternSet, PeriodicConfig};

#[derive(Clone, Debug, Serialize)]
pub struct EndComponent {
    #[serde(skip)]
    pub members: Vec<Element>,
    pub size: usize,
    pub unbounded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndsEstimate {
    pub inner_radius: usize,
    pub outer_radius: usize,
    pub component_count: usize,
    /// Same count with the outer radius reduced by one.
    pub stable: bool,
    /// The count at inner radius `n + 1` is larger, the signature of infinitely many ends.
    pub growing: bool,
    pub components: Vec<EndComponent>,
}

/// Components of `{x ∈ ball : inner < dist(x) ≤ outer}`; the flag says
/// whether the component reaches distance `outer`.
fn annulus_components(ball: &Ball, inner: usize, outer: usize) -> Vec<(Vec<usize>, bool)> {
    let inside = |i: usize| ball.dist[i] > inner && ball.dist[i] <= outer;
    let mut label = vec![usize::MAX; ball.len()];
    let mut out = Vec::new();
    for start in 0..ball.len() {
        if !inside(start) || label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        let mut reaches = ball.dist[start] == outer;
        label[start] = id;
        let mut head = 0;
        while head < members.len() {
            let cur = members[head];
            head += 1;
            for t in ball.adjacency[cur].iter().flatten() {
                if inside(*t) && label[*t] == usize::MAX {
                    label[*t] = id;
                    reaches |= ball.dist[*t] == outer;
                    members.push(*t);
                }
            }
        }
        out.push((members, reaches));
    }
    out
}

fn count_unbounded(ball: &Ball, inner: usize, outer: usize) -> usize {
    annulus_components(ball, inner, outer)
        .iter()
        .filter(|(_, u)| *u)
        .count()
}

/// Count the components of `B(R) ∖ B(n)` that meet the sphere of radius `R`.
pub fn estimate_ends(group: &Group, n: usize, outer: usize) -> Result<EndsEstimate> {
    if outer <= n {
        return Err(Error::TruncationTooSmall(
            "outer radius must exceed n".into(),
        ));
    }
    let ball = group.ball(&group.identity(), outer)?;
    let comps = annulus_components(&ball, n, outer);
    let count = comps.iter().filter(|(_, u)| *u).count();
    let before = if outer > n + 1 {
        count_unbounded(&ball, n, outer - 1)
    } else {
        count
    };
    let after = if outer > n + 1 {
        count_unbounded(&ball, n + 1, outer)
    } else {
        count
    };
    Ok(EndsEstimate {
        inner_radius: n,
        outer_radius: outer,
        component_count: count,
        stable: before == count,
        growing: after > count,
        components: comps
            .into_iter()
            .map(|(m, u)| EndComponent {
                size: m.len(),
                members: m.into_iter().map(|i| ball.members[i].clone()).collect(),
                unbounded: u,
            })
            .collect(),
    })
}

/// Does `b1` separate `b0` from `b2`? The balls `b0` and `b2` must lie in
/// distinct components of the complement of `b1`, computed inside the
/// truncation `B(radius, center of b1)`.
pub fn separates(group: &Group, b0: &Ball, b1: &Ball, b2: &Ball, radius: usize) -> Result<bool> {
    let trunc = group.ball(&b1.center, radius)?;
    separates_in(group, &trunc, b0, b1, b2)
}

fn separates_in(group: &Group, trunc: &Ball, b0: &Ball, b1: &Ball, b2: &Ball) -> Result<bool> {
    for b in [b0, b2] {
        let reach = group.dist(&trunc.center, &b.center) + b.radius + 1;
        if reach > trunc.radius {
            return Err(Error::TruncationTooSmall(format!(
                "ball needs truncation radius {reach}, have {}",
                trunc.radius
            )));
        }
    }
    if b0.members.iter().chain(&b2.members).any(|x| b1.contains(x)) {
        return Ok(false);
    }
    let removed: HashSet<usize> = b1
        .members
        .iter()
        .filter_map(|x| trunc.position(x))
        .collect();
    let start = trunc.position(&b0.center).expect("inside truncation");
    let goal = trunc.position(&b2.center).expect("inside truncation");
    let mut seen = vec![false; trunc.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(cur) = queue.pop_front() {
        if cur == goal {
            return Ok(false);
        }
        for t in trunc.adjacency[cur].iter().flatten() {
            if !seen[*t] && !removed.contains(t) {
                seen[*t] = true;
                queue.push_back(*t);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct AxialElement {
    #[serde(skip)]
    pub g: Element,
    pub n: usize,
    #[serde(skip)]
    pub x: Element,
    #[serde(skip)]
    pub y: Element,
    /// Separation was checked directly for all `−c ≤ a < b < c' ≤ c`.
    pub checked_range: usize,
}

fn word_key(group: &Group, e: &Element) -> (usize, Vec<usize>) {
    let w = group.geodesic_word(e);
    (w.len(), w)
}

/// Check `g^b B` separates `g^a B` from `g^c B` for all `−range ≤ a < b < c ≤ range`,
/// using translation by `g^{−b}` to centre each test at the identity.
fn verify_axial(group: &Group, g: &Element, n: usize, range: usize) -> Result<bool> {
    let id = group.identity();
    let b1 = group.ball(&id, n)?;
    let mut truncs: HashMap<usize, Ball> = HashMap::new();
    let r = range as i64;
    for a in -r..=r {
        for b in a + 1..=r {
            for c in b + 1..=r {
                let p0 = group.pow(g, a - b);
                let p2 = group.pow(g, c - b);
                let rad = group.norm(&p0).max(group.norm(&p2)) + n + 1;
                if let std::collections::hash_map::Entry::Vacant(e) = truncs.entry(rad) {
                    e.insert(group.ball(&id, rad)?);
                }
                let b0 = group.ball(&p0, n)?;
                let b2 = group.ball(&p2, n)?;
                if !separates_in(group, &truncs[&rad], &b0, &b1, &b2)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Candidate roots `r` with `r^k = g`, read off prefixes of a geodesic word.
fn roots(group: &Group, g: &Element) -> Vec<Element> {
    let w = group.geodesic_word(g);
    let mut out = Vec::new();
    for k in (1..=w.len()).rev() {
        if !w.len().is_multiple_of(k) {
            continue;
        }
        if let Ok(r) = group.normal_form(&w[..w.len() / k]) {
            if group.pow(&r, k as i64) == *g {
                out.push(r);
            }
        }
    }
    out
}

/// Find an `n`-axial element: take `x`, `y` of norm `2n + 1` in distinct
/// unbounded components of the complement of `B(n)` and return the shortest
/// verified root of `x⁻¹y`, choosing between it and its inverse by shortlex.
pub fn find_axial(group: &Group, n: usize, outer: usize) -> Result<AxialElement> {
    find_axial_with_range(group, n, outer, 3)
}

pub fn find_axial_with_range(
    group: &Group,
    n: usize,
    outer: usize,
    max_range: usize,
) -> Result<AxialElement> {
    if outer < 2 * n + 1 {
        return Err(Error::TruncationTooSmall(format!(
            "outer radius must be at least {}",
            2 * n + 1
        )));
    }
    let est = estimate_ends(group, n, outer)?;
    if est.component_count < 2 {
        return Err(Error::NotMultiEnded);
    }
    let mut comp_of: HashMap<&Element, usize> = HashMap::new();
    for (i, c) in est
        .components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.unbounded)
    {
        for m in &c.members {
            comp_of.insert(m, i);
        }
    }
    let ball = group.ball(&group.identity(), 2 * n + 1)?;
    let sphere: Vec<&Element> = ball
        .members
        .iter()
        .zip(&ball.dist)
        .filter(|(_, d)| **d == 2 * n + 1)
        .map(|(e, _)| e)
        .filter(|e| comp_of.contains_key(e))
        .collect();
    let x = (*sphere.first().ok_or(Error::NotMultiEnded)?).clone();
    let y = sphere
        .iter()
        .find(|e| comp_of[*e] != comp_of[&x])
        .ok_or(Error::NotMultiEnded)?;
    let y = (*y).clone();
    let g0 = group.relative(&x, &y);

    let mut candidates = roots(group, &g0);
    candidates.sort_by_key(|r| group.norm(r));
    let mut chosen = None;
    for r in candidates {
        if group.norm(&r) <= 2 * n {
            continue;
        }
        if verify_axial(group, &r, n, 1)? {
            let ri = group.inv(&r);
            chosen = Some(if word_key(group, &ri) < word_key(group, &r) {
                ri
            } else {
                r
            });
            break;
        }
    }
    let g =
        chosen.ok_or_else(|| Error::TruncationTooSmall("no candidate verified as axial".into()))?;
    let mut checked = 1;
    for c in 2..=max_range {
        match verify_axial(group, &g, n, c) {
            Ok(true) => checked = c,
            Ok(false) => {
                return Err(Error::VerificationFailed(format!(
                    "axiality fails at range {c}"
                )))
            }
            Err(Error::SizeLimit(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(AxialElement {
        g,
        n,
        x,
        y,
        checked_range: checked,
    })
}

/// Smallest `p ≥ 1` such that `g^{pk} B(2n)` misses `B(2n)` for `0 < |k| ≤ range`.
pub fn axial_power(group: &Group, g: &Element, n: usize, range: i64) -> (i64, Element) {
    let mut p = 1;
    loop {
        let gp = group.pow(g, p);
        if (1..=range).all(|k| group.norm(&group.pow(&gp, k)) > 4 * n) {
            return (p, gp);
        }
        p += 1;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentClass {
    pub size: usize,
    pub touches: Vec<i64>,
    /// The component reaches the edge of the truncation.
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalDomain {
    #[serde(skip)]
    pub g: Element,
    pub m1: i64,
    pub m2: i64,
    pub n: usize,
    #[serde(skip)]
    pub members: Vec<Element>,
    pub classification: Vec<ComponentClass>,
    /// Some component was cut by the truncation.
    pub truncated: bool,
}

impl FundamentalDomain {
    pub fn period(&self, group: &Group) -> Element {
        group.pow(&self.g, self.m2 - self.m1)
    }

    /// The translate `t^k x` lying in the domain, for `|k| ≤ budget`.
    pub fn representative(&self, group: &Group, x: &Element, budget: i64) -> Option<Element> {
        let set: HashSet<&Element> = self.members.iter().collect();
        let t = self.period(group);
        let ti = group.inv(&t);
        let (mut f, mut b) = (x.clone(), x.clone());
        for _ in 0..=budget {
            if set.contains(&f) {
                return Some(f);
            }
            if set.contains(&b) {
                return Some(b);
            }
            f = group.mul(&t, &f);
            b = group.mul(&ti, &b);
        }
        None
    }
}

/// Compute the fundamental domain for `⟨g^{m2−m1}⟩` inside `B(radius)`.
pub fn fundamental_domain(
    group: &Group,
    g: &Element,
    m1: i64,
    m2: i64,
    n: usize,
    radius: usize,
) -> Result<FundamentalDomain> {
    let region = group.ball(&group.identity(), radius)?.members;
    let fd = fundamental_domain_in(group, g, m1, m2, n, &region)?;
    // Covering check on the part of the ball far enough from the edge.
    let t = group.pow(g, m2 - m1);
    let margin = group.norm(&t) + group.norm(&group.pow(g, m1)) + n + 1;
    if radius > margin {
        let inner = group.ball(&group.identity(), radius - margin)?;
        for h in &inner.members {
            if fd.representative(group, h, 64).is_none() {
                return Err(Error::TruncationTooSmall(format!(
                    "{h:?} has no representative"
                )));
            }
        }
    }
    Ok(fd)
}

/// As [`fundamental_domain`], inside an arbitrary finite region.
pub fn fundamental_domain_in(
    group: &Group,
    g: &Element,
    m1: i64,
    m2: i64,
    n: usize,
    region: &[Element],
) -> Result<FundamentalDomain> {
    if m1 == m2 {
        return Err(Error::DisjointnessFailure);
    }
    let index: HashMap<&Element, usize> = region.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let t = group.pow(g, m2 - m1);
    let base = group.pow(g, m1);
    let unit = group.ball(&group.identity(), n)?;
    let mut block = vec![None::<i64>; region.len()];
    let mut found_any = false;
    // Walk k outward in both directions until the blocks leave the region.
    for dir in [1i64, -1] {
        let mut k = if dir == 1 { 0 } else { -1 };
        let mut misses = 0;
        let mut centre = group.mul(&group.pow(&t, k), &base);
        let step = if dir == 1 { t.clone() } else { group.inv(&t) };
        while misses < 2 && k.abs() < 100_000 {
            let mut hit = false;
            for u in &unit.members {
                if let Some(&i) = index.get(&group.mul(&centre, u)) {
                    if block[i].is_some_and(|b| b != k) {
                        return Err(Error::DisjointnessFailure);
                    }
                    block[i] = Some(k);
                    hit = true;
                }
            }
            misses = if hit { 0 } else { misses + 1 };
            found_any |= hit;
            centre = group.mul(&step, &centre);
            k += dir;
        }
    }
    if !found_any || !block.contains(&Some(0)) {
        return Err(Error::TruncationTooSmall(
            "B_0 is not inside the region".into(),
        ));
    }
    let ngen = group.num_generators();
    let mut label = vec![usize::MAX; region.len()];
    let mut members: Vec<Element> = region
        .iter()
        .zip(&block)
        .filter(|(_, b)| **b == Some(0))
        .map(|(e, _)| e.clone())
        .collect();
    let mut classes = Vec::new();
    let mut truncated_any = false;
    let mut cut: Vec<Vec<usize>> = Vec::new();
    for start in 0..region.len() {
        if block[start].is_some() || label[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut comp = vec![start];
        label[start] = id;
        let mut touches: Vec<i64> = Vec::new();
        let mut truncated = false;
        let mut head = 0;
        while head < comp.len() {
            let cur = comp[head];
            head += 1;
            for s in 0..ngen {
                match index.get(&group.mul_gen(&region[cur], s)) {
                    None => truncated = true,
                    Some(&j) => match block[j] {
                        Some(k) => {
                            if !touches.contains(&k) {
                                touches.push(k);
                            }
                        }
                        None => {
                            if label[j] == usize::MAX {
                                label[j] = id;
                                comp.push(j);
                            }
                        }
                    },
                }
            }
        }
        touches.sort_unstable();
        if (touches.len() > 2 || (touches.len() == 2 && touches[1] - touches[0] != 1)) && !truncated
        {
            return Err(Error::VerificationFailed(format!(
                "component touches blocks {touches:?}"
            )));
        }
        if touches == [0, 1] || (touches == [0] && !truncated) {
            members.extend(comp.iter().map(|&i| region[i].clone()));
        } else if touches == [0] {
            cut.push(comp.clone());
        }
        truncated_any |= truncated;
        classes.push(ComponentClass {
            size: comp.len(),
            touches,
            truncated,
        });
    }
    // A cut component may really touch a block outside the region; keep it
    // only when none of its translates collides with the domain so far.
    for comp in cut {
        let set: HashSet<&Element> = members.iter().collect();
        let clash = comp.iter().any(|&i| {
            [-2i64, -1, 1, 2]
                .iter()
                .any(|&k| set.contains(&group.mul(&group.pow(&t, k), &region[i])))
        });
        if !clash {
            members.extend(comp.iter().map(|&i| region[i].clone()));
        }
    }
    // Disjointness within the region: no nontrivial translate lands back inside.
    let set: HashSet<&Element> = members.iter().collect();
    for x in &members {
        for k in [-2i64, -1, 1, 2] {
            if set.contains(&group.mul(&group.pow(&t, k), x)) {
                return Err(Error::DisjointnessFailure);
            }
        }
    }
    let order: HashMap<&Element, usize> = index;
    members.sort_by_key(|e| order[e]);
    Ok(FundamentalDomain {
        g: g.clone(),
        m1,
        m2,
        n,
        members,
        classification: classes,
        truncated: truncated_any,
    })
}

/// The result of the periodic-point construction.
#[derive(Clone, Debug)]
pub struct Construction {
    pub config: PeriodicConfig,
    pub domain: FundamentalDomain,
    /// The power of the axial element used as `g`.
    pub power: i64,
    pub m1: i64,
    pub m2: i64,
}

/// Repeat the seed between two translates `g^{m1} B(2n)` and `g^{m2} B(2n)`
/// on which it agrees, giving a `g^{m2−m1}`-periodic configuration.
pub fn construct_periodic_point(
    ps: &PatternSet,
    seed: &Patch,
    ax: &AxialElement,
) -> Result<Construction> {
    let group = ps.group();
    let n = ax.n;
    if ps.defining_radius() > n {
        return Err(Error::InvalidPatternSet(format!(
            "defining radius {} exceeds n = {n}",
            ps.defining_radius()
        )));
    }
    let (power, g) = axial_power(group, &ax.g, n, 8);
    let big = group.ball(&group.identity(), 2 * n)?;
    let window = |m: i64| -> Option<Vec<Letter>> {
        let c = group.pow(&g, m);
        big.members
            .iter()
            .map(|u| seed.get(&group.mul(&c, u)).cloned())
            .collect()
    };
    let mut ms: Vec<i64> = Vec::new();
    for dir in [1i64, -1] {
        let mut m = if dir == 1 { 0 } else { -1 };
        while window(m).is_some() {
            ms.push(m);
            m += dir;
        }
    }
    ms.sort_unstable();
    let mut seen: HashMap<Vec<Letter>, i64> = HashMap::new();
    let mut pair = None;
    for &m in &ms {
        let w = window(m).expect("window covered");
        if let Some(&m1) = seen.get(&w) {
            pair = Some((m1, m));
            break;
        }
        seen.insert(w, m);
    }
    let (m1, m2) = pair.ok_or(Error::NeedLargerPatch)?;
    let region: Vec<Element> = seed.domain().cloned().collect();
    let fd = fundamental_domain_in(group, &g, m1, m2, n, &region)?;
    let t = fd.period(group);

    let mut keep: HashSet<Element> = fd.members.iter().cloned().collect();
    for m in [m1, m2] {
        let c = group.pow(&g, m);
        keep.extend(big.members.iter().map(|u| group.mul(&c, u)));
    }
    let data = seed.restrict(|e| keep.contains(e));
    let mut pc = PeriodicConfig::new(vec![t], data, Vec::new(), 4)?;
    pc.lookup_budget = if group.is_infinite_cyclic() { 64 } else { 4 };
    let unit = group.ball(&group.identity(), n)?;
    let mut reps = Vec::new();
    for x in &fd.members {
        let mut ok = true;
        for u in &unit.members {
            if pc.lookup(&group.mul(x, u))?.is_none() {
                ok = false;
                break;
            }
        }
        if ok {
            reps.push(x.clone());
        } else if !fd.truncated {
            return Err(Error::CoverageGap(x.clone()));
        }
    }
    pc.truncated = reps.len() < fd.members.len();
    pc.representatives = reps;
    match verify_periodic_point(&pc, ps) {
        Ok(true) => {}
        Ok(false) => {
            return Err(Error::VerificationFailed(
                "constructed configuration violates a rule".into(),
            ))
        }
        Err(e) => return Err(Error::VerificationFailed(e.to_string())),
    }
    Ok(Construction {
        config: pc,
        domain: fd,
        power,
        m1,
        m2,
    })
}

/// On ℤ, shrink the period of a configuration to the smallest divisor that
/// still describes it, re-verifying the result.
pub fn reduce_period(pc: &PeriodicConfig, ps: &PatternSet) -> Result<PeriodicConfig> {
    let group = pc.group();
    let period = pc
        .periods
        .first()
        .and_then(|p| group.as_integer(p))
        .filter(|_| pc.periods.len() == 1)
        .ok_or_else(|| Error::InvalidGroup("period reduction needs ℤ".into()))?
        .abs();
    let mut word = Vec::with_capacity(period as usize);
    for v in 0..period {
        let x = group.from_integer(v).expect("cyclic");
        word.push(pc.lookup(&x)?.ok_or(Error::CoverageGap(x))?);
    }
    for d in 1..=period {
        if period % d != 0 {
            continue;
        }
        if (0..period as usize).all(|i| word[i] == word[i % d as usize]) {
            let reduced = PeriodicConfig::integer_cycle(group, &word[..d as usize])?;
            if verify_periodic_point(&reduced, ps)? {
                return Ok(reduced);
            }
        }
    }
    Ok(pc.clone())
}

/// Region of radius `width` around the axis path through `g^m`, `|m| ≤ reach`,
/// listed breadth-first from the identity.
pub fn tube(group: &Group, g: &Element, reach: i64, width: usize) -> Result<Vec<Element>> {
    let w = group.geodesic_word(g);
    let mut axis: Vec<Element> = Vec::new();
    let mut cur = group.pow(g, -reach);
    for _ in -reach..reach {
        for &s in &w {
            axis.push(cur.clone());
            cur = group.mul_gen(&cur, s);
        }
    }
    axis.push(cur);
    let unit = group.ball(&group.identity(), width)?;
    let mut set: HashSet<Element> = HashSet::new();
    for a in &axis {
        for u in &unit.members {
            set.insert(group.mul(a, u));
        }
    }
    if set.len() > crate::group::DEFAULT_BALL_CAP {
        return Err(Error::SizeLimit(crate::group::DEFAULT_BALL_CAP));
    }
    let start = group.identity();
    let mut order = vec![start.clone()];
    let mut seen: HashSet<Element> = HashSet::from([start]);
    let mut head = 0;
    while head < order.len() {
        for s in 0..group.num_generators() {
            let nb = group.mul_gen(&order[head], s);
            if set.contains(&nb) && seen.insert(nb.clone()) {
                order.push(nb);
            }
        }
        head += 1;
    }
    Ok(order)
}

/// Full pipeline: find an axial element, search an admissible seed on a
/// growing region along its axis, and construct a periodic point. Also
/// returns the search nodes spent.
pub fn periodic_point_pipeline(
    ps: &PatternSet,
    n: usize,
    budget: u64,
) -> Result<(Option<(AxialElement, Construction)>, u64)> {
    let group = ps.group();
    let ax = find_axial_with_range(group, n, 2 * n + 2, 1)?;
    let (_, g) = axial_power(group, &ax.g, n, 8);
    let mut reach = 4;
    let mut spent = 0u64;
    while reach <= 64 && spent < budget {
        let region = tube(group, &g, reach, 2 * n + 1)?;
        let space = CellSpace::region(group, region);
        let (out, stats) = solve(ps, &space, budget - spent);
        spent += stats.nodes;
        match out {
            Outcome::Solution(letters) => {
                let seed = solution_patch(&space, &letters);
                match construct_periodic_point(ps, &seed, &ax) {
                    Ok(c) => return Ok((Some((ax, c)), spent)),
                    Err(Error::NeedLargerPatch) => reach *= 2,
                    Err(e) => return Err(e),
                }
            }
            Outcome::Unsat | Outcome::Budget | Outcome::Undetermined => break,
        }
    }
    Ok((None, spent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn ends_table() {
        let c4 = Group::new(GroupSpec::finite_cyclic(4)).unwrap();
        assert_eq!(estimate_ends(&c4, 2, 3).unwrap().component_count, 0);
        let z2 = Group::new(GroupSpec::free_abelian(2)).unwrap();
        assert_eq!(estimate_ends(&z2, 2, 8).unwrap().component_count, 1);
        let z = Group::integers();
        let e = estimate_ends(&z, 1, 8).unwrap();
        assert_eq!(e.component_count, 2);
        assert!(e.stable && !e.growing);
        let f2 = Group::new(GroupSpec::free(2)).unwrap();
        let e = estimate_ends(&f2, 1, 6).unwrap();
        assert!(e.component_count >= 4 && e.growing);
    }

    #[test]
    fn separation_on_z() {
        let z = Group::integers();
        let b = |c: i64| z.ball(&z.from_integer(c).unwrap(), 1).unwrap();
        assert!(separates(&z, &b(0), &b(4), &b(8), 6).unwrap());
        assert!(!separates(&z, &b(0), &b(1), &b(2), 4).unwrap());
        assert!(matches!(
            separates(&z, &b(0), &b(4), &b(8), 3),
            Err(Error::TruncationTooSmall(_))
        ));
    }

    #[test]
    fn axial_on_z_is_three() {
        let z = Group::integers();
        let ax = find_axial(&z, 1, 4).unwrap();
        assert_eq!(z.as_integer(&ax.g), Some(3));
        assert_eq!(ax.checked_range, 3);
        let (p, g) = axial_power(&z, &ax.g, 1, 8);
        assert_eq!((p, z.as_integer(&g)), (2, Some(6)));
    }

    #[test]
    fn one_ended_has_no_axis() {
        let z2 = Group::new(GroupSpec::free_abelian(2)).unwrap();
        assert_eq!(find_axial(&z2, 1, 4).unwrap_err(), Error::NotMultiEnded);
    }

    #[test]
    fn z_fundamental_domain() {
        let z = Group::integers();
        let fd = fundamental_domain(&z, &z.gen(0), 0, 5, 1, 20).unwrap();
        let mut v: Vec<i64> = fd
            .members
            .iter()
            .map(|e| z.as_integer(e).unwrap())
            .collect();
        v.sort_unstable();
        assert_eq!(v, vec![-1, 0, 1, 2, 3]);
    }

    #[test]
    fn axial_on_free_group() {
        let f2 = Group::new(GroupSpec::free(2)).unwrap();
        let ax = find_axial_with_range(&f2, 1, 4, 1).unwrap();
        assert_eq!(f2.show(&ax.g), "AAba");
        let (p, _) = axial_power(&f2, &ax.g, 1, 8);
        assert_eq!(p, 2);
    }

    fn alternating(group: &Group) -> PatternSet {
        use crate::sft::{Alphabet, Pattern};
        let alpha = Alphabet::simple(["0", "1"]).unwrap();
        let mut pats = Vec::new();
        for s in 0..group.num_generators() {
            for a in 0..2u32 {
                pats.push(
                    Pattern::new(vec![group.identity(), group.gen(s)], vec![vec![a], vec![a]])
                        .unwrap(),
                );
            }
        }
        PatternSet::explicit(group, alpha, pats, None).unwrap()
    }

    #[test]
    fn periodic_point_on_z_reduces_to_period_two() {
        let z = Group::integers();
        let ps = alternating(&z);
        let word: Vec<Letter> = (0..41).map(|i| vec![(i % 2) as u32]).collect();
        let seed = Patch::from_integer_word(&z, -20, &word).unwrap();
        let ax = find_axial(&z, 1, 4).unwrap();
        let c = construct_periodic_point(&ps, &seed, &ax).unwrap();
        assert!(verify_periodic_point(&c.config, &ps).unwrap());
        assert!(!c.config.truncated);
        let r = reduce_period(&c.config, &ps).unwrap();
        assert_eq!(z.as_integer(&r.periods[0]), Some(2));
    }

    #[test]
    fn periodic_point_on_free_group() {
        let f2 = Group::new(GroupSpec::free(2)).unwrap();
        let ps = alternating(&f2);
        let (ax, c) = periodic_point_pipeline(&ps, 1, 1_000_000)
            .unwrap()
            .0
            .unwrap();
        assert_eq!(f2.show(&ax.g), "AAba");
        assert!(c.config.truncated);
        assert!(!c.config.representatives.is_empty());
        assert!(verify_periodic_point(&c.config, &ps).unwrap());
    }
}
