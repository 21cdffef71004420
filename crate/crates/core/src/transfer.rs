//! Deciding `X_H` through a quasi-isometric group `G`.

use serde::Serialize;

use crate::domino::{decide_domino, DominoOutcome, Verdict, Witness};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::qip::{compile_pullback_sft, compile_qipair_sft, QipLayout, QipParams};
use crate::sft::{
    locally_admissible, verify_periodic_point, Letter, Patch, PatternSet, PeriodicConfig,
};

/// A domino solver for `G`, typically [`decide_domino`].
pub type Solver<'a> = &'a dyn Fn(&PatternSet, u64) -> DominoOutcome;

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub params: QipParams,
    pub qipair: &'static str,
    pub pullback: Option<&'static str>,
    pub nodes: u64,
}

#[derive(Clone, Debug)]
pub struct TransferOutcome {
    /// Verdict about `X_H`. Radii in `EmptyAt` refer to balls of `G`.
    pub outcome: DominoOutcome,
    pub stages: Vec<Stage>,
    /// The `G`-side witness of the pullback SFT.
    pub pullback_witness: Option<Witness>,
}

/// An `n` for which `QIP_n(G, H)` is known to be inhabited.
#[derive(Clone, Debug)]
pub struct TransferPlan {
    pub source: Group,
    pub target: Group,
    pub params: QipParams,
    /// The `G` solver's witness for the QI-pair SFT.
    pub qipair_witness: Witness,
}

#[derive(Clone, Debug)]
pub struct PlanSearch {
    pub plan: Option<TransferPlan>,
    pub stages: Vec<Stage>,
    pub nodes: u64,
}

impl TransferPlan {
    /// Round-robin over `n = 1..=max_n` with doubling node shares, dropping
    /// every `n` whose QI-pair SFT is certified empty.
    pub fn find(
        source: &Group,
        target: &Group,
        max_n: usize,
        budget: u64,
        solver: Solver,
    ) -> Result<PlanSearch> {
        let mut compiled = Vec::new();
        for n in 1..=max_n {
            compiled.push((n, compile_qipair_sft(source, target, n)?));
        }
        let mut spent = 0u64;
        let mut stages = Vec::new();
        let mut share = 1000u64;
        while spent < budget && !compiled.is_empty() {
            let mut i = 0;
            while i < compiled.len() && spent < budget {
                let (n, ps) = &compiled[i];
                let q = solver(ps, share.min(budget - spent));
                spent += q.nodes;
                stages.push(Stage {
                    params: QipParams::new(source, target, *n),
                    qipair: q.verdict.name(),
                    pullback: None,
                    nodes: q.nodes,
                });
                match q.verdict {
                    Verdict::Nonempty(w) => {
                        let plan = TransferPlan {
                            source: source.clone(),
                            target: target.clone(),
                            params: QipParams::new(source, target, *n),
                            qipair_witness: w,
                        };
                        return Ok(PlanSearch {
                            plan: Some(plan),
                            stages,
                            nodes: spent,
                        });
                    }
                    Verdict::EmptyAt(_) => {
                        compiled.remove(i);
                    }
                    Verdict::Unknown => i += 1,
                }
            }
            share = share.saturating_mul(2);
        }
        Ok(PlanSearch {
            plan: None,
            stages,
            nodes: spent,
        })
    }

    /// Decide `X_H` through the pullback SFT at this plan's `n`.
    pub fn decide(
        &self,
        ps_h: &PatternSet,
        budget: u64,
        solver: Solver,
    ) -> Result<TransferOutcome> {
        if ps_h.group().id() != self.target.id() {
            return Err(Error::MixedGroups);
        }
        let n = self.params.n;
        let pull = compile_pullback_sft(&self.source, &self.target, n, ps_h)?;
        let p = solver(&pull, budget);
        let stage = Stage {
            params: self.params,
            qipair: "nonempty",
            pullback: Some(p.verdict.name()),
            nodes: p.nodes,
        };
        let (verdict, witness) = match p.verdict {
            Verdict::EmptyAt(r) => (Verdict::EmptyAt(r), None),
            Verdict::Nonempty(w) => {
                let layout = QipLayout::new(&self.source, &self.target, n)?;
                let h = reconstruct(&layout, &w, ps_h)?;
                (Verdict::Nonempty(h), Some(w))
            }
            Verdict::Unknown => (Verdict::Unknown, None),
        };
        Ok(TransferOutcome {
            outcome: DominoOutcome {
                verdict,
                nodes: p.nodes,
                radius_reached: p.radius_reached,
            },
            stages: vec![stage],
            pullback_witness: witness,
        })
    }
}

/// Find an inhabited `QIP_n(G, H)` with at most half the budget, then decide
/// the pullback SFT; its emptiness is that of `X_H`.
pub fn domino_transfer(
    source: &Group,
    target: &Group,
    ps_h: &PatternSet,
    budget: u64,
    max_n: usize,
    solver: Solver,
) -> Result<TransferOutcome> {
    if ps_h.group().id() != target.id() {
        return Err(Error::MixedGroups);
    }
    let search = TransferPlan::find(source, target, max_n, budget / 2, solver)?;
    let Some(plan) = search.plan else {
        return Ok(TransferOutcome {
            outcome: DominoOutcome {
                verdict: Verdict::Unknown,
                nodes: search.nodes,
                radius_reached: 0,
            },
            stages: search.stages,
            pullback_witness: None,
        });
    };
    let mut t = plan.decide(ps_h, budget - search.nodes, solver)?;
    t.outcome.nodes += search.nodes;
    let mut stages = search.stages;
    stages.append(&mut t.stages);
    t.stages = stages;
    Ok(t)
}

/// [`domino_transfer`] with [`decide_domino`] as the `G` solver.
pub fn domino_transfer_default(
    source: &Group,
    target: &Group,
    ps_h: &PatternSet,
    budget: u64,
) -> Result<TransferOutcome> {
    domino_transfer(source, target, ps_h, budget, 3, &decide_domino)
}

/// `f` on a region of `G`, integrated from `df` with `f(1) = 1`.
fn integrate_f(
    layout: &QipLayout,
    letter: &dyn Fn(&Element) -> Result<Option<Letter>>,
    radius: usize,
) -> Result<Vec<(Element, Element, Letter)>> {
    let (g, h) = (layout.source(), layout.target());
    let ball = g.ball(&g.identity(), radius)?;
    let mut f: Vec<Option<Element>> = vec![None; ball.len()];
    let mut out = Vec::with_capacity(ball.len());
    for i in 0..ball.len() {
        let x = &ball.members[i];
        let fx = match ball.parent[i] {
            None => h.identity(),
            Some((p, s)) => {
                let lp = letter(&ball.members[p])?.ok_or(Error::SupportNotCovered)?;
                let fp = f[p].as_ref().expect("parent first");
                h.mul(fp, layout.coding.decode(lp[s]))
            }
        };
        f[i] = Some(fx.clone());
        let l = letter(x)?.ok_or(Error::SupportNotCovered)?;
        out.push((x.clone(), fx, l));
    }
    Ok(out)
}

/// `σ₀(f(g)k) = ⟨σ_X(g), k⟩` on `f(region)·B(n)`.
fn displayed(layout: &QipLayout, cells: &[(Element, Element, Letter)]) -> Result<Patch> {
    let h = layout.target();
    let mut sigma = Patch::new(h);
    for (_, fx, l) in cells {
        for (j, k) in layout.keys.members.iter().enumerate() {
            let a = vec![l[layout.pull_offset + j]];
            let y = h.mul(fx, k);
            if let Some(prev) = sigma.get(&y) {
                if *prev != a {
                    return Err(Error::VerificationFailed(format!(
                        "pulled-back letters disagree at {}",
                        h.show(&y)
                    )));
                }
            }
            sigma.insert(y, a);
        }
    }
    Ok(sigma)
}

/// Rebuild a point of `X_H` from a pullback witness. On ℤ-like targets a
/// periodic `G` witness yields an `h_π`-periodic point; otherwise the
/// displayed patch is returned after a local admissibility check.
pub fn reconstruct(layout: &QipLayout, w: &Witness, ps_h: &PatternSet) -> Result<Witness> {
    let (g, h) = (layout.source(), layout.target());
    match w {
        Witness::Periodic(pc) if pc.periods.len() == 1 => {
            let pi = &pc.periods[0];
            let reach = g.norm(pi) * 4 + 2 * layout.n() + 2;
            let cells = integrate_f(layout, &|x| pc.lookup(x), reach)?;
            let sigma = displayed(layout, &cells)?;
            let f_at = |x: &Element| cells.iter().find(|c| &c.0 == x).map(|c| c.1.clone());
            let h_pi = f_at(pi).ok_or_else(|| {
                Error::DomainTooSmall("period outside the integrated region".into())
            })?;
            if let (Some(t), true) = (h.as_integer(&h_pi), h.is_infinite_cyclic()) {
                if t != 0 {
                    let p = t.unsigned_abs() as i64;
                    let word: Option<Vec<Letter>> = (0..p)
                        .map(|v| sigma.get(&h.from_integer(v).expect("ℤ")).cloned())
                        .collect();
                    if let Some(word) = word {
                        let cand = PeriodicConfig::integer_cycle(h, &word)?;
                        if verify_periodic_point(&cand, ps_h)? {
                            return Ok(Witness::Periodic(cand));
                        }
                        return Err(Error::VerificationFailed(
                            "reconstructed point is not admissible".into(),
                        ));
                    }
                }
            }
            checked_patch(sigma, ps_h)
        }
        Witness::Periodic(pc) => {
            let cells = integrate_f(layout, &|x| pc.lookup(x), 4 * layout.n() + 2)?;
            checked_patch(displayed(layout, &cells)?, ps_h)
        }
        Witness::Patch(p) => {
            let lookup = |x: &Element| Ok(p.get(x).cloned());
            let mut r = 0;
            while g
                .ball(&g.identity(), r + 1)?
                .members
                .iter()
                .all(|x| p.contains(x))
            {
                r += 1;
            }
            let cells = integrate_f(layout, &lookup, r)?;
            checked_patch(displayed(layout, &cells)?, ps_h)
        }
    }
}

fn checked_patch(sigma: Patch, ps_h: &PatternSet) -> Result<Witness> {
    if locally_admissible(&sigma, ps_h) {
        Ok(Witness::Patch(sigma))
    } else {
        Err(Error::VerificationFailed(
            "reconstructed patch is not admissible".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::{Alphabet, Pattern};

    fn two_words(z: &Group, forbid: &[(u32, u32)]) -> PatternSet {
        let alpha = Alphabet::simple(["0", "1"]).unwrap();
        let pats = forbid
            .iter()
            .map(|&(a, b)| {
                Pattern::new(vec![z.identity(), z.gen(0)], vec![vec![a], vec![b]]).unwrap()
            })
            .collect();
        PatternSet::explicit(z, alpha, pats, None).unwrap()
    }

    #[test]
    fn golden_mean_transfers() {
        let z = Group::integers();
        let ps = two_words(&z, &[(1, 1)]);
        let t = domino_transfer_default(&z, &z, &ps, 2_000_000).unwrap();
        let Verdict::Nonempty(Witness::Periodic(pc)) = &t.outcome.verdict else {
            panic!("{:?} {:?}", t.outcome.verdict.name(), t.stages);
        };
        assert!(verify_periodic_point(pc, &ps).unwrap());
        assert!(t.stages.iter().any(|s| s.qipair == "nonempty"));
    }

    #[test]
    fn all_pairs_forbidden_transfers() {
        let z = Group::integers();
        let ps = two_words(&z, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let t = domino_transfer_default(&z, &z, &ps, 2_000_000).unwrap();
        assert!(t.outcome.verdict.is_empty(), "{:?}", t.stages);
    }
}
