//! Finitely generated groups given by a symmetric generating set.
//!
//! Every element is stored in a canonical normal form, so equality of
//! [`Element`]s is equality in the group. The built-in families (free abelian,
//! free, finite cyclic, free products of cyclic groups, and the integers with
//! an arbitrary set of step sizes) have exact normal forms. Generic
//! presentations are canonicalized through coset enumeration, which only
//! succeeds for finite groups within the configured budget; otherwise the word
//! problem degrades to a bounded rewriting search that can prove equality but
//! never inequality.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::todd_coxeter::{self, FiniteTable};

/// Index of a generator in the ordered symmetric generating set.
pub type Gen = usize;
/// A word over the generating set.
pub type Word = Vec<Gen>;

/// Default cap on the number of elements a ball enumeration may produce.
pub const DEFAULT_BALL_CAP: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum Family {
    FreeAbelian {
        rank: usize,
    },
    Free {
        rank: usize,
    },
    FiniteCyclic {
        order: u32,
    },
    /// Free product of cyclic groups; `None` is an infinite cyclic factor.
    FreeProduct {
        orders: Vec<Option<u32>>,
    },
    /// The integers generated by `{±s : s ∈ steps}`.
    IntegerSteps {
        steps: Vec<i64>,
    },
    GenericPresentation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub family: Family,
    pub generators: Vec<String>,
    /// `inverses[s]` is the index of the formal inverse of generator `s`.
    pub inverses: Vec<Gen>,
    pub relators: Vec<Word>,
    pub max_relator_len: usize,
    pub wp_budget: usize,
}

fn letter_names(count: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let base = if i < 26 {
            ((b'a' + i as u8) as char).to_string()
        } else {
            format!("x{i}")
        };
        let inv = if i < 26 {
            base.to_uppercase()
        } else {
            format!("X{i}")
        };
        out.push(base);
        out.push(inv);
    }
    out
}

fn paired_inverses(count: usize) -> Vec<Gen> {
    (0..2 * count).map(|s| s ^ 1).collect()
}

fn max_len(relators: &[Word]) -> usize {
    relators.iter().map(Vec::len).max().unwrap_or(0).max(2)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl GroupSpec {
    /// ℤ^d with generators `a, A, b, B, ...` and commutator relators.
    pub fn free_abelian(rank: usize) -> Self {
        let mut relators = Vec::new();
        for i in 0..rank {
            for j in i + 1..rank {
                relators.push(vec![2 * i, 2 * j, 2 * i + 1, 2 * j + 1]);
            }
        }
        GroupSpec {
            family: Family::FreeAbelian { rank },
            generators: letter_names(rank),
            inverses: paired_inverses(rank),
            max_relator_len: max_len(&relators),
            relators,
            wp_budget: 0,
        }
    }

    pub fn integers() -> Self {
        Self::free_abelian(1)
    }

    pub fn free(rank: usize) -> Self {
        GroupSpec {
            family: Family::Free { rank },
            generators: letter_names(rank),
            inverses: paired_inverses(rank),
            relators: Vec::new(),
            max_relator_len: 2,
            wp_budget: 0,
        }
    }

    pub fn finite_cyclic(order: u32) -> Self {
        assert!(order >= 1, "cyclic group order must be positive");
        let relators = vec![vec![0; order as usize]];
        GroupSpec {
            family: Family::FiniteCyclic { order },
            generators: letter_names(1),
            inverses: paired_inverses(1),
            max_relator_len: max_len(&relators),
            relators,
            wp_budget: 0,
        }
    }

    pub fn free_product(orders: Vec<Option<u32>>) -> Self {
        let relators: Vec<Word> = orders
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.map(|m| vec![2 * i; m as usize]))
            .collect();
        GroupSpec {
            generators: letter_names(orders.len()),
            inverses: paired_inverses(orders.len()),
            max_relator_len: max_len(&relators),
            relators,
            family: Family::FreeProduct { orders },
            wp_budget: 0,
        }
    }

    /// ℤ with generating set `{±s}`; the steps must have gcd 1.
    pub fn integer_steps(steps: Vec<i64>) -> Result<Self> {
        if steps.is_empty() || steps.iter().any(|&s| s <= 0) {
            return Err(Error::InvalidGroup("steps must be positive".into()));
        }
        if steps.iter().fold(0, |g, &s| gcd(g, s)) != 1 {
            return Err(Error::InvalidGroup("steps must generate ℤ".into()));
        }
        let k = steps.len();
        let mut relators = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                relators.push(vec![2 * i, 2 * j, 2 * i + 1, 2 * j + 1]);
                let g = gcd(steps[i], steps[j]);
                let mut r = vec![2 * i; (steps[j] / g) as usize];
                r.extend(std::iter::repeat_n(2 * j + 1, (steps[i] / g) as usize));
                relators.push(r);
            }
        }
        Ok(GroupSpec {
            family: Family::IntegerSteps { steps },
            generators: letter_names(k),
            inverses: paired_inverses(k),
            max_relator_len: max_len(&relators),
            relators,
            wp_budget: 0,
        })
    }

    pub fn generic(
        generators: Vec<String>,
        inverses: Vec<Gen>,
        relators: Vec<Word>,
        wp_budget: usize,
    ) -> Result<Self> {
        let spec = GroupSpec {
            family: Family::GenericPresentation,
            max_relator_len: max_len(&relators),
            generators,
            inverses,
            relators,
            wp_budget,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.generators.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty generating set".into()));
        }
        if self.inverses.len() != n {
            return Err(Error::InvalidGroup("inverse table length mismatch".into()));
        }
        for (s, &t) in self.inverses.iter().enumerate() {
            if t >= n || self.inverses[t] != s {
                return Err(Error::InvalidGroup(format!(
                    "generator `{}` has no consistent inverse",
                    self.generators[s]
                )));
            }
        }
        let mut seen = HashSet::new();
        for g in &self.generators {
            if g.is_empty() || !seen.insert(g) {
                return Err(Error::InvalidGroup(format!("bad generator symbol `{g}`")));
            }
        }
        for r in &self.relators {
            if r.iter().any(|&s| s >= n) {
                return Err(Error::InvalidGroup("relator uses unknown generator".into()));
            }
            if r.len() > self.max_relator_len {
                return Err(Error::InvalidGroup(
                    "relator longer than max_relator_len".into(),
                ));
            }
        }
        if self.max_relator_len < 2 {
            return Err(Error::InvalidGroup(
                "max_relator_len must be at least 2".into(),
            ));
        }
        Ok(())
    }

    fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

/// A group element in canonical normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    gid: u64,
    nf: SmallVec<[i64; 4]>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.nf.as_slice())
    }
}

impl Element {
    /// The raw normal-form coordinates. Their meaning depends on the family.
    pub fn coords(&self) -> &[i64] {
        &self.nf
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distance {
    Known(usize),
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WordProblem {
    Equal,
    NotEqual,
    Unknown,
}

struct Inner {
    spec: GroupSpec,
    id: u64,
    table: Option<FiniteTable>,
}

/// A shareable handle to a group. Cloning is cheap.
#[derive(Clone)]
pub struct Group(Arc<Inner>);

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({:?})", self.0.spec.family)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Self> {
        spec.validate()?;
        let table = match spec.family {
            Family::GenericPresentation => todd_coxeter::enumerate(&spec, spec.wp_budget),
            _ => None,
        };
        let id = spec.fingerprint();
        Ok(Group(Arc::new(Inner { spec, id, table })))
    }

    pub fn integers() -> Self {
        Self::new(GroupSpec::integers()).expect("valid")
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.0.spec
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn num_generators(&self) -> usize {
        self.0.spec.generators.len()
    }

    pub fn inverse_gen(&self, s: Gen) -> Gen {
        self.0.spec.inverses[s]
    }

    /// `K_G`: the maximum relator length (at least 2).
    pub fn max_relator_len(&self) -> usize {
        self.0.spec.max_relator_len
    }

    /// Whether elements can be put in canonical form.
    pub fn has_exact_word_problem(&self) -> bool {
        !matches!(self.0.spec.family, Family::GenericPresentation) || self.0.table.is_some()
    }

    /// Finite order of the group if known.
    pub fn finite_order(&self) -> Option<usize> {
        match &self.0.spec.family {
            Family::FiniteCyclic { order } => Some(*order as usize),
            Family::FreeAbelian { rank: 0 } | Family::Free { rank: 0 } => Some(1),
            Family::FreeProduct { orders } if orders.is_empty() => Some(1),
            Family::FreeProduct { orders } if orders.len() == 1 => orders[0].map(|m| m as usize),
            Family::GenericPresentation => self.0.table.as_ref().map(|t| t.len()),
            _ => None,
        }
    }

    /// True when the group is (isomorphic to) ℤ in one of the built-in families.
    pub fn is_infinite_cyclic(&self) -> bool {
        match &self.0.spec.family {
            Family::FreeAbelian { rank } | Family::Free { rank } => *rank == 1,
            Family::IntegerSteps { .. } => true,
            Family::FreeProduct { orders } => orders.len() == 1 && orders[0].is_none(),
            _ => false,
        }
    }

    /// For infinite cyclic groups, the integer an element corresponds to.
    pub fn as_integer(&self, g: &Element) -> Option<i64> {
        if !self.is_infinite_cyclic() {
            return None;
        }
        match &self.0.spec.family {
            Family::FreeProduct { .. } | Family::Free { .. } => {
                Some(if g.nf.is_empty() { 0 } else { g.nf[1] })
            }
            _ => Some(g.nf[0]),
        }
    }

    /// Inverse of [`Group::as_integer`].
    pub fn from_integer(&self, v: i64) -> Option<Element> {
        if !self.is_infinite_cyclic() {
            return None;
        }
        let nf: SmallVec<[i64; 4]> = match &self.0.spec.family {
            Family::FreeProduct { .. } | Family::Free { .. } => {
                if v == 0 {
                    SmallVec::new()
                } else {
                    smallvec::smallvec![0, v]
                }
            }
            _ => smallvec::smallvec![v],
        };
        Some(self.make(nf))
    }

    fn make(&self, nf: SmallVec<[i64; 4]>) -> Element {
        Element { gid: self.0.id, nf }
    }

    pub fn owns(&self, e: &Element) -> bool {
        e.gid == self.0.id
    }

    pub fn identity(&self) -> Element {
        let nf = match &self.0.spec.family {
            Family::FreeAbelian { rank } => smallvec::smallvec![0; *rank],
            Family::IntegerSteps { .. } | Family::FiniteCyclic { .. } => smallvec::smallvec![0],
            Family::Free { .. } | Family::FreeProduct { .. } => SmallVec::new(),
            Family::GenericPresentation => smallvec::smallvec![0],
        };
        self.make(nf)
    }

    pub fn is_identity(&self, e: &Element) -> bool {
        *e == self.identity()
    }

    fn syllable_order(&self, factor: usize) -> Option<u32> {
        match &self.0.spec.family {
            Family::FreeProduct { orders } => orders[factor],
            _ => None,
        }
    }

    fn push_syllable(&self, nf: &mut SmallVec<[i64; 4]>, factor: i64, exp: i64) {
        let norm = |e: i64| match self.syllable_order(factor as usize) {
            Some(m) => e.rem_euclid(m as i64),
            None => e,
        };
        let len = nf.len();
        if len >= 2 && nf[len - 2] == factor {
            let e = norm(nf[len - 1] + exp);
            if e == 0 {
                nf.truncate(len - 2);
            } else {
                nf[len - 1] = e;
            }
        } else {
            let e = norm(exp);
            if e != 0 {
                nf.push(factor);
                nf.push(e);
            }
        }
    }

    /// `a · s` for a single generator; the hot path of every enumeration.
    pub fn mul_gen(&self, a: &Element, s: Gen) -> Element {
        debug_assert!(self.owns(a));
        let mut nf = a.nf.clone();
        match &self.0.spec.family {
            Family::FreeAbelian { .. } => {
                nf[s / 2] += if s.is_multiple_of(2) { 1 } else { -1 };
            }
            Family::IntegerSteps { steps } => {
                let st = steps[s / 2];
                nf[0] += if s.is_multiple_of(2) { st } else { -st };
            }
            Family::FiniteCyclic { order } => {
                let m = *order as i64;
                nf[0] = (nf[0] + if s.is_multiple_of(2) { 1 } else { -1 }).rem_euclid(m);
            }
            Family::Free { .. } | Family::FreeProduct { .. } => {
                let exp = if s.is_multiple_of(2) { 1 } else { -1 };
                self.push_syllable(&mut nf, (s / 2) as i64, exp);
            }
            Family::GenericPresentation => {
                let t = self
                    .0
                    .table
                    .as_ref()
                    .expect("canonical elements need a table");
                nf[0] = t.act(nf[0] as usize, s) as i64;
            }
        }
        self.make(nf)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        debug_assert!(self.owns(a) && self.owns(b));
        match &self.0.spec.family {
            Family::FreeAbelian { .. } | Family::IntegerSteps { .. } => {
                let nf = a.nf.iter().zip(b.nf.iter()).map(|(x, y)| x + y).collect();
                self.make(nf)
            }
            Family::FiniteCyclic { order } => self.make(smallvec::smallvec![
                (a.nf[0] + b.nf[0]).rem_euclid(*order as i64)
            ]),
            Family::Free { .. } | Family::FreeProduct { .. } => {
                let mut nf = a.nf.clone();
                for pair in b.nf.chunks(2) {
                    self.push_syllable(&mut nf, pair[0], pair[1]);
                }
                self.make(nf)
            }
            Family::GenericPresentation => {
                let t = self
                    .0
                    .table
                    .as_ref()
                    .expect("canonical elements need a table");
                let mut c = a.nf[0] as usize;
                for &s in t.word(b.nf[0] as usize) {
                    c = t.act(c, s);
                }
                self.make(smallvec::smallvec![c as i64])
            }
        }
    }

    pub fn inv(&self, a: &Element) -> Element {
        match &self.0.spec.family {
            Family::FreeAbelian { .. } | Family::IntegerSteps { .. } => {
                self.make(a.nf.iter().map(|x| -x).collect())
            }
            Family::FiniteCyclic { order } => {
                self.make(smallvec::smallvec![(-a.nf[0]).rem_euclid(*order as i64)])
            }
            Family::Free { .. } | Family::FreeProduct { .. } => {
                let mut nf = SmallVec::new();
                for pair in a.nf.chunks(2).rev() {
                    self.push_syllable(&mut nf, pair[0], -pair[1]);
                }
                self.make(nf)
            }
            Family::GenericPresentation => {
                let t = self
                    .0
                    .table
                    .as_ref()
                    .expect("canonical elements need a table");
                let w = t.word(a.nf[0] as usize);
                let mut c = 0;
                for &s in w.iter().rev() {
                    c = t.act(c, self.inverse_gen(s));
                }
                self.make(smallvec::smallvec![c as i64])
            }
        }
    }

    /// `a⁻¹ b`
    pub fn relative(&self, a: &Element, b: &Element) -> Element {
        self.mul(&self.inv(a), b)
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        if !self.owns(a) || !self.owns(b) {
            return Err(Error::MixedGroups);
        }
        Ok(self.mul(a, b))
    }

    pub fn invert(&self, a: &Element) -> Result<Element> {
        if !self.owns(a) {
            return Err(Error::MixedGroups);
        }
        Ok(self.inv(a))
    }

    pub fn pow(&self, a: &Element, k: i64) -> Element {
        let base = if k < 0 { self.inv(a) } else { a.clone() };
        let mut acc = self.identity();
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            sq = self.mul(&sq, &sq);
            e >>= 1;
        }
        acc
    }

    pub fn gen(&self, s: Gen) -> Element {
        self.mul_gen(&self.identity(), s)
    }

    pub fn normal_form(&self, w: &[Gen]) -> Result<Element> {
        let n = self.num_generators();
        if let Some(&bad) = w.iter().find(|&&s| s >= n) {
            return Err(Error::UnknownSymbol(bad.to_string()));
        }
        if !self.has_exact_word_problem() {
            return Err(Error::BudgetExhausted);
        }
        Ok(w.iter()
            .fold(self.identity(), |acc, &s| self.mul_gen(&acc, s)))
    }

    /// Word length of `a` with respect to the generating set.
    pub fn norm(&self, a: &Element) -> usize {
        match &self.0.spec.family {
            Family::FreeAbelian { .. } => a.nf.iter().map(|x| x.unsigned_abs() as usize).sum(),
            Family::IntegerSteps { steps } => integer_steps_norm(steps, a.nf[0]),
            Family::FiniteCyclic { order } => {
                let r = a.nf[0];
                r.min(*order as i64 - r) as usize
            }
            Family::Free { .. } | Family::FreeProduct { .. } => {
                a.nf.chunks(2)
                    .map(|p| match self.syllable_order(p[0] as usize) {
                        Some(m) => p[1].min(m as i64 - p[1]) as usize,
                        None => p[1].unsigned_abs() as usize,
                    })
                    .sum()
            }
            Family::GenericPresentation => self
                .0
                .table
                .as_ref()
                .expect("table")
                .word(a.nf[0] as usize)
                .len(),
        }
    }

    pub fn distance(&self, g: &Element, h: &Element, budget: usize) -> Distance {
        if !self.owns(g) || !self.owns(h) {
            return Distance::Unknown;
        }
        let d = self.norm(&self.relative(g, h));
        if d <= budget {
            Distance::Known(d)
        } else {
            Distance::Unknown
        }
    }

    /// Exact word metric between two elements.
    pub fn dist(&self, g: &Element, h: &Element) -> usize {
        self.norm(&self.relative(g, h))
    }

    /// Shortlex-minimal geodesic word for `g`.
    pub fn geodesic_word(&self, g: &Element) -> Word {
        let mut word = Vec::new();
        let mut rest = g.clone();
        let mut len = self.norm(&rest);
        while len > 0 {
            let (s, next) = (0..self.num_generators())
                .map(|s| (s, self.mul(&self.gen(self.inverse_gen(s)), &rest)))
                .find(|(_, r)| self.norm(r) + 1 == len)
                .expect("geodesic step exists");
            word.push(s);
            rest = next;
            len -= 1;
        }
        word
    }

    /// Decide whether two words represent the same element.
    pub fn word_problem(&self, w1: &[Gen], w2: &[Gen]) -> WordProblem {
        if self.has_exact_word_problem() {
            return match (self.normal_form(w1), self.normal_form(w2)) {
                (Ok(a), Ok(b)) if a == b => WordProblem::Equal,
                (Ok(_), Ok(_)) => WordProblem::NotEqual,
                _ => WordProblem::Unknown,
            };
        }
        let mut w: Word = w1.to_vec();
        w.extend(w2.iter().rev().map(|&s| self.inverse_gen(s)));
        if crate::todd_coxeter::bounded_triviality(self.spec(), &w, self.spec().wp_budget) {
            WordProblem::Equal
        } else {
            WordProblem::Unknown
        }
    }

    pub fn symbol(&self, s: Gen) -> &str {
        &self.0.spec.generators[s]
    }

    /// Parse a word such as `"a a⁻¹ b"`, `"abA"`, `"a^-1 b"` or `""`.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let gens = &self.0.spec.generators;
        let mut out = Vec::new();
        for token in text.split_whitespace() {
            if token == "1" && !gens.iter().any(|g| g == "1") {
                continue;
            }
            let mut rest = token;
            while !rest.is_empty() {
                let (idx, name) = gens
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| rest.starts_with(g.as_str()))
                    .max_by_key(|(_, g)| g.len())
                    .ok_or_else(|| Error::UnknownSymbol(rest.to_string()))?;
                rest = &rest[name.len()..];
                let mut s = idx;
                for suffix in ["⁻¹", "^-1"] {
                    if let Some(r) = rest.strip_prefix(suffix) {
                        rest = r;
                        s = self.inverse_gen(s);
                        break;
                    }
                }
                out.push(s);
            }
        }
        Ok(out)
    }

    pub fn format_word(&self, w: &[Gen]) -> String {
        let gens = &self.0.spec.generators;
        let single = w.iter().all(|&s| gens[s].chars().count() == 1);
        let parts: Vec<&str> = w.iter().map(|&s| gens[s].as_str()).collect();
        if single {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    /// Parse a word and reduce it to an element.
    pub fn element(&self, text: &str) -> Result<Element> {
        let w = self.parse_word(text)?;
        self.normal_form(&w)
    }

    /// Human-readable form: the shortlex geodesic word.
    pub fn show(&self, g: &Element) -> String {
        self.format_word(&self.geodesic_word(g))
    }

    pub fn ball(&self, center: &Element, radius: usize) -> Result<Ball> {
        self.ball_with_cap(center, radius, DEFAULT_BALL_CAP)
    }

    /// Breadth-first enumeration of `B(radius, center)` by right multiplication.
    pub fn ball_with_cap(&self, center: &Element, radius: usize, cap: usize) -> Result<Ball> {
        if !self.has_exact_word_problem() {
            return Err(Error::BudgetExhausted);
        }
        if !self.owns(center) {
            return Err(Error::MixedGroups);
        }
        let ngen = self.num_generators();
        let mut members = vec![center.clone()];
        let mut dist = vec![0];
        let mut index = HashMap::new();
        index.insert(center.clone(), 0usize);
        let mut head = 0;
        while head < members.len() {
            let d = dist[head];
            if d < radius {
                for s in 0..ngen {
                    let next = self.mul_gen(&members[head], s);
                    if !index.contains_key(&next) {
                        if members.len() >= cap {
                            return Err(Error::SizeLimit(cap));
                        }
                        index.insert(next.clone(), members.len());
                        members.push(next);
                        dist.push(d + 1);
                    }
                }
            }
            head += 1;
        }
        let adjacency: Vec<Vec<Option<usize>>> = members
            .iter()
            .map(|m| {
                (0..ngen)
                    .map(|s| index.get(&self.mul_gen(m, s)).copied())
                    .collect()
            })
            .collect();
        let mut parent = vec![None; members.len()];
        for (i, row) in adjacency.iter().enumerate() {
            for (s, t) in row.iter().enumerate() {
                if let Some(t) = *t {
                    if dist[t] == dist[i] + 1 && parent[t].is_none() {
                        parent[t] = Some((i, s));
                    }
                }
            }
        }
        Ok(Ball {
            center: center.clone(),
            radius,
            members,
            dist,
            index,
            adjacency,
            parent,
        })
    }

    /// Enumerate all words of length at most `len`, in shortlex order.
    pub fn words_up_to(&self, len: usize) -> Vec<Word> {
        let n = self.num_generators();
        let mut out: Vec<Word> = vec![Vec::new()];
        let mut frontier: Vec<Word> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(frontier.len() * n);
            for w in &frontier {
                for s in 0..n {
                    let mut v = w.clone();
                    v.push(s);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

fn integer_steps_norm(steps: &[i64], v: i64) -> usize {
    if v == 0 {
        return 0;
    }
    let max = *steps.iter().max().expect("nonempty");
    // Steps of a geodesic can be reordered so every partial sum stays inside
    // this window.
    let lo = v.min(0) - max;
    let hi = v.max(0) + max;
    let width = (hi - lo + 1) as usize;
    let mut dist = vec![usize::MAX; width];
    let mut queue = VecDeque::new();
    dist[(0 - lo) as usize] = 0;
    queue.push_back(0i64);
    while let Some(x) = queue.pop_front() {
        let d = dist[(x - lo) as usize];
        if x == v {
            return d;
        }
        for &s in steps {
            for y in [x + s, x - s] {
                if y >= lo && y <= hi && dist[(y - lo) as usize] == usize::MAX {
                    dist[(y - lo) as usize] = d + 1;
                    queue.push_back(y);
                }
            }
        }
    }
    unreachable!("steps generate ℤ")
}

/// A ball in the Cayley graph, with members in breadth-first order.
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: Element,
    pub radius: usize,
    pub members: Vec<Element>,
    /// Distance of each member from the center.
    pub dist: Vec<usize>,
    pub index: HashMap<Element, usize>,
    /// `adjacency[i][s]` is the index of `members[i] · s`, if inside the ball.
    pub adjacency: Vec<Vec<Option<usize>>>,
    /// Breadth-first tree: the path of parents from a member spells its
    /// shortlex geodesic (relative to the center).
    pub parent: Vec<Option<(usize, Gen)>>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.index.contains_key(e)
    }

    pub fn position(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Generators along the tree path from the center to member `i`.
    pub fn path(&self, mut i: usize) -> Word {
        let mut w = Vec::new();
        while let Some((p, s)) = self.parent[i] {
            w.push(s);
            i = p;
        }
        w.reverse();
        w
    }

    /// Indices of members on the outer sphere.
    pub fn sphere(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.dist[i] == self.radius)
    }
}
