//! JSON file formats. Group elements are written as generator words.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calculus::FunctionPatch;
use crate::domino::{DominoOutcome, Verdict, Witness};
use crate::error::{Error, Result};
use crate::group::{Element, Family, Gen, Group, GroupSpec};
use crate::sft::{Alphabet, Letter, Patch, Pattern, PatternSet, PeriodicConfig, WangTileSet};

fn default_wp_budget() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupFile {
    Integers,
    FreeAbelian {
        rank: usize,
    },
    Free {
        rank: usize,
    },
    FiniteCyclic {
        order: u32,
    },
    /// `null` entries are infinite cyclic factors.
    FreeProduct {
        orders: Vec<Option<u32>>,
    },
    IntegerSteps {
        steps: Vec<i64>,
    },
    /// Generators are named without inverses; `a` gets the inverse `A`,
    /// longer names `x` get `x^-1`.
    Presentation {
        generators: Vec<String>,
        relators: Vec<String>,
        #[serde(default = "default_wp_budget")]
        wp_budget: usize,
    },
}

fn inverse_name(g: &str) -> String {
    let mut chars = g.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_lowercase() => c.to_ascii_uppercase().to_string(),
        _ => format!("{g}^-1"),
    }
}

impl GroupFile {
    pub fn build(&self) -> Result<Group> {
        let spec = match self {
            GroupFile::Integers => GroupSpec::integers(),
            GroupFile::FreeAbelian { rank } => GroupSpec::free_abelian(*rank),
            GroupFile::Free { rank } => GroupSpec::free(*rank),
            GroupFile::FiniteCyclic { order } => GroupSpec::finite_cyclic(*order),
            GroupFile::FreeProduct { orders } => GroupSpec::free_product(orders.clone()),
            GroupFile::IntegerSteps { steps } => GroupSpec::integer_steps(steps.clone())?,
            GroupFile::Presentation {
                generators,
                relators,
                wp_budget,
            } => {
                let mut names = Vec::new();
                for g in generators {
                    names.push(g.clone());
                    names.push(inverse_name(g));
                }
                let inverses: Vec<Gen> = (0..names.len()).map(|s| s ^ 1).collect();
                // Parse relators over the free group on the same names.
                let mut free = GroupSpec::free(generators.len());
                free.generators = names.clone();
                let parser = Group::new(free)?;
                let words = relators
                    .iter()
                    .map(|r| parser.parse_word(r))
                    .collect::<Result<Vec<_>>>()?;
                GroupSpec::generic(names, inverses, words, *wp_budget)?
            }
        };
        Group::new(spec)
    }

    pub fn describe(group: &Group) -> Self {
        let spec = group.spec();
        match &spec.family {
            Family::FreeAbelian { rank: 1 } => GroupFile::Integers,
            Family::FreeAbelian { rank } => GroupFile::FreeAbelian { rank: *rank },
            Family::Free { rank } => GroupFile::Free { rank: *rank },
            Family::FiniteCyclic { order } => GroupFile::FiniteCyclic { order: *order },
            Family::FreeProduct { orders } => GroupFile::FreeProduct {
                orders: orders.clone(),
            },
            Family::IntegerSteps { steps } => GroupFile::IntegerSteps {
                steps: steps.clone(),
            },
            Family::GenericPresentation => GroupFile::Presentation {
                generators: spec.generators.iter().step_by(2).cloned().collect(),
                relators: spec.relators.iter().map(|r| group.format_word(r)).collect(),
                wp_budget: spec.wp_budget,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphabetFile {
    Labels(Vec<String>),
    Product(Alphabet),
}

impl AlphabetFile {
    pub fn build(&self) -> Result<Alphabet> {
        match self {
            AlphabetFile::Labels(l) => Alphabet::simple(l.clone()),
            AlphabetFile::Product(a) => Alphabet::product(a.components.clone()),
        }
    }

    pub fn describe(a: &Alphabet) -> Self {
        if a.is_simple() && !a.components[0].labels.is_empty() {
            AlphabetFile::Labels(a.components[0].labels.clone())
        } else {
            AlphabetFile::Product(a.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    pub at: String,
    pub letter: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternEntry {
    pub cells: Vec<CellEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    pub alphabet: AlphabetFile,
    pub patterns: Vec<PatternEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
}

fn element_at(group: &Group, text: &str, what: &str) -> Result<Element> {
    group
        .element(text)
        .map_err(|e| Error::InvalidInput(format!("{what}: `{text}`: {e}")))
}

fn letter_of(alphabet: &Alphabet, text: &str, what: &str) -> Result<Letter> {
    alphabet
        .parse_label(text)
        .ok_or_else(|| Error::InvalidInput(format!("{what}: unknown letter `{text}`")))
}

fn cells_of(group: &Group, alphabet: &Alphabet, cells: &[CellEntry], what: &str) -> Result<Patch> {
    let mut patch = Patch::new(group);
    for (j, c) in cells.iter().enumerate() {
        let at = element_at(group, &c.at, &format!("{what}.cells[{j}].at"))?;
        let l = letter_of(alphabet, &c.letter, &format!("{what}.cells[{j}].letter"))?;
        patch.insert(at, l);
    }
    Ok(patch)
}

fn entries_of(patch: &Patch, alphabet: &Alphabet) -> Vec<CellEntry> {
    let g = patch.group();
    patch
        .iter()
        .map(|(x, l)| CellEntry {
            at: g.show(x),
            letter: alphabet.label(l),
        })
        .collect()
}

impl PatternFile {
    pub fn build(&self, group: &Group) -> Result<PatternSet> {
        let alphabet = self.alphabet.build()?;
        let mut patterns = Vec::with_capacity(self.patterns.len());
        for (i, p) in self.patterns.iter().enumerate() {
            let what = format!("patterns[{i}]");
            let mut support = Vec::new();
            let mut letters = Vec::new();
            for (j, c) in p.cells.iter().enumerate() {
                support.push(element_at(group, &c.at, &format!("{what}.cells[{j}].at"))?);
                letters.push(letter_of(
                    &alphabet,
                    &c.letter,
                    &format!("{what}.cells[{j}].letter"),
                )?);
            }
            patterns.push(
                Pattern::new(support, letters)
                    .map_err(|e| Error::InvalidInput(format!("{what}: {e}")))?,
            );
        }
        PatternSet::explicit(group, alphabet, patterns, self.radius)
    }

    /// The file form of an explicit pattern set.
    pub fn describe(ps: &PatternSet) -> Result<Self> {
        let pats = ps.patterns().ok_or_else(|| {
            Error::InvalidPatternSet("predicate sets have no pattern list".into())
        })?;
        let g = ps.group();
        let a = ps.alphabet();
        let patterns = pats
            .iter()
            .map(|p| PatternEntry {
                cells: p
                    .support
                    .iter()
                    .zip(&p.letters)
                    .map(|(x, l)| CellEntry {
                        at: g.show(x),
                        letter: a.label(l),
                    })
                    .collect(),
            })
            .collect();
        Ok(PatternFile {
            alphabet: AlphabetFile::describe(a),
            patterns,
            radius: Some(ps.defining_radius()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchFile {
    pub alphabet: AlphabetFile,
    pub cells: Vec<CellEntry>,
}

impl PatchFile {
    pub fn build(&self, group: &Group) -> Result<(Alphabet, Patch)> {
        let alphabet = self.alphabet.build()?;
        let patch = cells_of(group, &alphabet, &self.cells, "patch")?;
        Ok((alphabet, patch))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueEntry {
    pub at: String,
    pub value: String,
}

/// A Lipschitz map between two groups given on finitely many points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub source: GroupFile,
    pub target: GroupFile,
    pub n: usize,
    pub values: Vec<ValueEntry>,
}

impl FunctionFile {
    pub fn build(&self) -> Result<FunctionPatch> {
        let g = self.source.build()?;
        let h = self.target.build()?;
        let mut f = FunctionPatch::new(&g, &h, self.n);
        for (i, v) in self.values.iter().enumerate() {
            f.insert(
                element_at(&g, &v.at, &format!("values[{i}].at"))?,
                element_at(&h, &v.value, &format!("values[{i}].value"))?,
            );
        }
        Ok(f)
    }

    pub fn describe(f: &FunctionPatch) -> Self {
        FunctionFile {
            source: GroupFile::describe(&f.source),
            target: GroupFile::describe(&f.target),
            n: f.n,
            values: f
                .values
                .iter()
                .map(|(x, y)| ValueEntry {
                    at: f.source.show(x),
                    value: f.target.show(y),
                })
                .collect(),
        }
    }
}

pub fn parse_wang(text: &str) -> Result<WangTileSet> {
    let ts: WangTileSet =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("wang tiles: {e}")))?;
    WangTileSet::new(ts.tiles)
}

/// Deserialize, naming the offending line or field in the error message.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

pub fn patch_json(patch: &Patch, alphabet: &Alphabet) -> Value {
    json!(PatchFile {
        alphabet: AlphabetFile::describe(alphabet),
        cells: entries_of(patch, alphabet),
    })
}

pub fn periodic_json(pc: &PeriodicConfig, alphabet: &Alphabet) -> Value {
    let g = pc.group();
    json!({
        "periods": pc.periods.iter().map(|p| g.show(p)).collect::<Vec<_>>(),
        "cells": entries_of(&pc.domain_data, alphabet),
        "representatives": pc.representatives.len(),
        "truncated": pc.truncated,
    })
}

pub fn witness_json(w: &Witness, alphabet: &Alphabet) -> Value {
    match w {
        Witness::Periodic(pc) => json!({"kind": "periodic", "config": periodic_json(pc, alphabet)}),
        Witness::Patch(p) => json!({"kind": "patch", "patch": patch_json(p, alphabet)}),
    }
}

pub fn outcome_json(o: &DominoOutcome, alphabet: &Alphabet) -> Value {
    let mut v = json!({
        "verdict": o.verdict.name(),
        "nodes": o.nodes,
        "radius_reached": o.radius_reached,
    });
    match &o.verdict {
        Verdict::EmptyAt(r) => v["certificate_radius"] = json!(r),
        Verdict::Nonempty(w) => v["witness"] = witness_json(w, alphabet),
        Verdict::Unknown => {}
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_files_round_trip() {
        let files = [
            r#"{"kind":"integers"}"#,
            r#"{"kind":"free_abelian","rank":2}"#,
            r#"{"kind":"free","rank":2}"#,
            r#"{"kind":"finite_cyclic","order":4}"#,
            r#"{"kind":"free_product","orders":[2,3]}"#,
            r#"{"kind":"integer_steps","steps":[2,3]}"#,
            r#"{"kind":"presentation","generators":["a","b"],"relators":["abAB"]}"#,
        ];
        for text in files {
            let f: GroupFile = parse_json(text, "group").unwrap();
            let g = f.build().unwrap();
            let back = GroupFile::describe(&g);
            assert_eq!(back.build().unwrap().spec(), g.spec(), "{text}");
        }
        let bad = parse_json::<GroupFile>("{\"kind\":\"free\",\n\"rnk\":2}", "group").unwrap_err();
        assert!(bad.to_string().contains("rnk"), "{bad}");
        let bad =
            parse_json::<PatternFile>("{\"alphabet\":[\"0\"],\n\"patterns\":[}", "p").unwrap_err();
        assert!(bad.to_string().contains("line 2"), "{bad}");
    }

    #[test]
    fn pattern_file_round_trip() {
        let z = Group::integers();
        let text = r#"{"alphabet":["0","1"],"patterns":[{"cells":[{"at":"","letter":"1"},{"at":"a","letter":"1"}]}]}"#;
        let f: PatternFile = parse_json(text, "patterns").unwrap();
        let ps = f.build(&z).unwrap();
        assert_eq!(ps.patterns().unwrap().len(), 1);
        let again = PatternFile::describe(&ps).unwrap();
        let ps2 = again.build(&z).unwrap();
        assert_eq!(ps.patterns(), ps2.patterns());
        let json = serde_json::to_string(&again).unwrap();
        assert_eq!(parse_json::<PatternFile>(&json, "p").unwrap(), again);

        let bad = r#"{"alphabet":["0","1"],"patterns":[{"cells":[{"at":"q","letter":"1"}]}]}"#;
        let e = parse_json::<PatternFile>(bad, "p")
            .unwrap()
            .build(&z)
            .unwrap_err();
        assert!(e.to_string().contains("patterns[0].cells[0].at"), "{e}");
    }

    #[test]
    fn function_file_round_trip() {
        let text = r#"{"source":{"kind":"integers"},"target":{"kind":"integers"},"n":2,
            "values":[{"at":"","value":""},{"at":"a","value":"aa"}]}"#;
        let f: FunctionFile = parse_json(text, "f").unwrap();
        let fp = f.build().unwrap();
        assert_eq!(fp.len(), 2);
        assert_eq!(
            FunctionFile::describe(&fp).build().unwrap().values,
            fp.values
        );
    }
}
