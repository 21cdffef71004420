//! Quasi-isometry pairs `(f, F)`, their local records, higher blocks,
//! pullbacks and the period computation for periodic pairs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::calculus::{derivative, FunctionPatch};
use crate::error::{Error, Result};
use crate::group::{Ball, Element, Group};
use crate::sft::{Letter, Patch};

/// A pair `f: G → H`, `F: H → G` meant to be an `n`-QI pair.
#[derive(Clone, Debug)]
pub struct QIPairPatch {
    pub f: FunctionPatch,
    pub big_f: FunctionPatch,
    pub n: usize,
}

impl QIPairPatch {
    pub fn new(f: FunctionPatch, big_f: FunctionPatch, n: usize) -> Result<Self> {
        if f.source.id() != big_f.target.id() || f.target.id() != big_f.source.id() {
            return Err(Error::MixedGroups);
        }
        Ok(QIPairPatch { f, big_f, n })
    }

    pub fn source(&self) -> &Group {
        &self.f.source
    }

    pub fn target(&self) -> &Group {
        &self.f.target
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QiCheck {
    Valid,
    Violation {
        condition: &'static str,
        at: Element,
        distance: usize,
    },
}

impl QiCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, QiCheck::Valid)
    }
}

fn lipschitz(f: &FunctionPatch, n: usize, name: &'static str) -> Option<QiCheck> {
    for (g, fg) in &f.values {
        for s in 0..f.source.num_generators() {
            if let Some(fgs) = f.values.get(&f.source.mul_gen(g, s)) {
                let d = f.target.dist(fg, fgs);
                if d > n {
                    return Some(QiCheck::Violation {
                        condition: name,
                        at: g.clone(),
                        distance: d,
                    });
                }
            }
        }
    }
    None
}

/// Check the three QI-pair conditions wherever the maps compose.
pub fn verify_qi_pair(p: &QIPairPatch) -> QiCheck {
    let (g, h) = (p.source(), p.target());
    if let Some(v) = lipschitz(&p.f, p.n, "f is n-Lipschitz") {
        return v;
    }
    if let Some(v) = lipschitz(&p.big_f, p.n, "F is n-Lipschitz") {
        return v;
    }
    for (x, fx) in &p.f.values {
        if let Some(ffx) = p.big_f.get(fx) {
            let d = g.dist(ffx, x);
            if d > p.n {
                return QiCheck::Violation {
                    condition: "left quasi-inverse",
                    at: x.clone(),
                    distance: d,
                };
            }
        }
    }
    for (y, fy) in &p.big_f.values {
        if let Some(ffy) = p.f.get(fy) {
            let d = h.dist(ffy, y);
            if d > p.n {
                return QiCheck::Violation {
                    condition: "right quasi-inverse",
                    at: y.clone(),
                    distance: d,
                };
            }
        }
    }
    QiCheck::Valid
}

/// The constant `max{2N, 3N² + N, N, N² + N} + 1`.
pub fn qi_constant(big_n: usize) -> usize {
    [
        2 * big_n,
        3 * big_n * big_n + big_n,
        big_n,
        big_n * big_n + big_n,
    ]
    .into_iter()
    .max()
    .unwrap()
        + 1
}

/// Build `F` on `region` by choosing, for each `h`, a `g` with
/// `d(f(g), h) ≤ N`: the nearest, then the smallest in normal-form order. Requires `f` to be an
/// `N`-quasi-isometric embedding on its domain.
pub fn synthesize_quasi_inverse(
    f: &FunctionPatch,
    big_n: usize,
    region: &[Element],
) -> Result<(FunctionPatch, usize)> {
    let (g, h) = (&f.source, &f.target);
    let pts: Vec<(&Element, &Element)> = f.values.iter().collect();
    for (i, (x, fx)) in pts.iter().enumerate() {
        for (y, fy) in &pts[i + 1..] {
            let dg = g.dist(x, y);
            let dh = h.dist(fx, fy);
            if dh > big_n * dg + big_n || dg > big_n * (dh + big_n) {
                return Err(Error::VerificationFailed(format!(
                    "f is not a {big_n}-quasi-isometric embedding at {x:?}, {y:?}"
                )));
            }
        }
    }
    let n = qi_constant(big_n);
    let mut big_f = FunctionPatch::new(h, g, n);
    for y in region {
        // Nearest preimage first; `values` iterates in normal-form order, so
        // `min_by_key` keeps the smallest one among ties.
        let pre = f
            .values
            .iter()
            .map(|(x, fx)| (h.dist(fx, y), x))
            .filter(|(d, _)| *d <= big_n)
            .min_by_key(|(d, _)| *d)
            .map(|(_, x)| x.clone())
            .ok_or_else(|| Error::NotQuasiSurjective(y.clone()))?;
        big_f.insert(y.clone(), pre);
    }
    Ok((big_f, n))
}

/// `ℓ(g)(k) = g⁻¹ F(f(g) k)` for `k ∈ B_H(n)`, stored relative to `g`.
#[derive(Clone, Debug)]
pub struct LocalRecord {
    pub source: Group,
    pub target: Group,
    pub n: usize,
    /// `B_H(n)` in breadth-first order; values are indexed the same way.
    pub keys: Ball,
    pub cells: BTreeMap<Element, Vec<Element>>,
}

/// Record `ℓ` at every `g` whose neighbourhood `B(n, f(g))` lies in the domain of `F`.
pub fn local_record(p: &QIPairPatch) -> Result<LocalRecord> {
    let (g, h) = (p.source(), p.target());
    let keys = h.ball(&h.identity(), p.n)?;
    let bound = p.n * p.n + p.n;
    let mut cells = BTreeMap::new();
    for (x, fx) in &p.f.values {
        let vals: Option<Vec<Element>> = keys
            .members
            .iter()
            .map(|k| p.big_f.get(&h.mul(fx, k)).map(|y| g.relative(x, y)))
            .collect();
        let Some(vals) = vals else { continue };
        if let Some(v) = vals.iter().find(|v| g.norm(v) > bound) {
            return Err(Error::VerificationFailed(format!(
                "record value {} at {x:?} exceeds n² + n",
                g.show(v)
            )));
        }
        cells.insert(x.clone(), vals);
    }
    if cells.is_empty() {
        return Err(Error::SupportNotCovered);
    }
    Ok(LocalRecord {
        source: g.clone(),
        target: h.clone(),
        n: p.n,
        keys,
        cells,
    })
}

/// `B_n σ(h) = (k ↦ σ(hk))` for `k ∈ B(n)` in breadth-first order.
#[derive(Clone, Debug)]
pub struct HigherBlockPatch {
    pub n: usize,
    pub keys: Ball,
    pub cells: BTreeMap<Element, Vec<Letter>>,
}

pub fn higher_block(sigma: &Patch, n: usize) -> Result<HigherBlockPatch> {
    let group = sigma.group();
    let keys = group.ball(&group.identity(), n)?;
    let mut cells = BTreeMap::new();
    for (h, _) in sigma.iter() {
        let block: Option<Vec<Letter>> = keys
            .members
            .iter()
            .map(|k| sigma.get(&group.mul(h, k)).cloned())
            .collect();
        if let Some(b) = block {
            cells.insert(h.clone(), b);
        }
    }
    Ok(HigherBlockPatch { n, keys, cells })
}

/// `f*σ = σ ∘ f` on the domain of `f`.
pub fn pullback(f: &FunctionPatch, sigma: &Patch) -> Result<Patch> {
    let mut out = Patch::new(&f.source);
    for (g, fg) in &f.values {
        let l = sigma.get(fg).ok_or(Error::SupportNotCovered)?;
        out.insert(g.clone(), l.clone());
    }
    Ok(out)
}

/// `f*(B_n σ)`: at each `g`, the block of `σ` around `f(g)`.
pub fn pullback_blocks(
    f: &FunctionPatch,
    blocks: &HigherBlockPatch,
) -> Result<BTreeMap<Element, Vec<Letter>>> {
    f.values
        .iter()
        .map(|(g, fg)| {
            blocks
                .cells
                .get(fg)
                .map(|b| (g.clone(), b.clone()))
                .ok_or(Error::SupportNotCovered)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub enum PeriodCheck {
    /// `f(πg) = h_π f(g)` on the tested domain.
    Verified {
        #[serde(skip)]
        h_pi: Element,
        /// `h_π` is trivial, impossible for a nontrivial period of a torsion-free group.
        trivial: bool,
    },
    Violated {
        #[serde(skip)]
        at: Element,
        what: &'static str,
    },
}

/// Check `f(πg) = f(π) f(1)⁻¹ f(g)` for a QI pair whose `(df, ℓ)` is
/// `π`-periodic, and optionally `σ(f(g)k) = σ(h_π f(g)k)` for a configuration
/// `sigma` on `H`.
pub fn periodic_homomorphism_check(
    p: &QIPairPatch,
    pi: &Element,
    sigma: Option<&Patch>,
) -> Result<PeriodCheck> {
    let (g, h) = (p.source(), p.target());
    let one = g.identity();
    let f1 =
        p.f.get(&one)
            .ok_or_else(|| Error::DomainTooSmall("f(1) undefined".into()))?;
    if !h.is_identity(f1) {
        return Err(Error::DomainTooSmall("f must satisfy f(1) = 1".into()));
    }
    let fpi =
        p.f.get(pi)
            .ok_or_else(|| Error::DomainTooSmall("f(π) undefined".into()))?;
    let df = derivative(&p.f)?;
    let rec = local_record(p)?;
    let mut tested = 0;
    for (x, vals) in &df.cells {
        if let Some(other) = df.cells.get(&g.mul(pi, x)) {
            let clash = vals
                .iter()
                .zip(other)
                .any(|(a, b)| matches!((a, b), (Some(a), Some(b)) if a != b));
            if clash {
                return Err(Error::NotPeriodic(format!("df differs at {x:?}")));
            }
            tested += 1;
        }
    }
    for (x, vals) in &rec.cells {
        if let Some(other) = rec.cells.get(&g.mul(pi, x)) {
            if other != vals {
                return Err(Error::NotPeriodic(format!("ℓ differs at {x:?}")));
            }
        }
    }
    if tested == 0 {
        return Err(Error::DomainTooSmall(
            "no g with both g and πg in the domain".into(),
        ));
    }
    let h_pi = h.mul(fpi, &h.inv(f1));
    for (x, fx) in &p.f.values {
        if let Some(fpx) = p.f.get(&g.mul(pi, x)) {
            if *fpx != h.mul(&h_pi, fx) {
                return Ok(PeriodCheck::Violated {
                    at: x.clone(),
                    what: "f(πg) ≠ h_π f(g)",
                });
            }
        }
    }
    if let Some(s) = sigma {
        let keys = h.ball(&h.identity(), p.n)?;
        for (x, fx) in &p.f.values {
            for k in &keys.members {
                let a = h.mul(fx, k);
                let b = h.mul(&h_pi, &a);
                if let (Some(la), Some(lb)) = (s.get(&a), s.get(&b)) {
                    if la != lb {
                        return Ok(PeriodCheck::Violated {
                            at: x.clone(),
                            what: "σ(f(g)k) ≠ σ(h_π f(g)k)",
                        });
                    }
                }
            }
        }
    }
    Ok(PeriodCheck::Verified {
        trivial: h.is_identity(&h_pi),
        h_pi,
    })
}
