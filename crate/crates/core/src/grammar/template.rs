use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::rule::{compile_pattern, normalize_pattern, slot_count};
use crate::world::def::GameDef;

/// A verb pattern with its slots rendered as `_`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Template {
    pub surface: String,
    pub blanks: usize,
    /// Indices into the game's grammar of the rules sharing this surface.
    pub rule_ids: Vec<usize>,
}

impl Template {
    pub fn new(surface: &str) -> Self {
        let surface = normalize_pattern(surface);
        let blanks = slot_count(&compile_pattern(&surface));
        Template { surface, blanks, rule_ids: Vec::new() }
    }
}

/// Sorted, de-duplicated lowercase tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
}

impl Vocabulary {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut words: Vec<String> = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        words.sort();
        words.dedup();
        Vocabulary { words }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index_of(word).is_some()
    }
}

/// Grammar literals, object nouns and exit directions of a game.
pub fn extract_vocabulary(game: &GameDef) -> Vocabulary {
    let mut words: Vec<String> = Vec::new();
    for rule in &game.grammar {
        words.extend(rule.literal_words());
    }
    for obj in &game.objects {
        words.extend(obj.names.iter().map(|n| n.to_lowercase()));
    }
    for exit in &game.exits {
        words.push(exit.direction.to_lowercase());
    }
    Vocabulary::from_words(words)
}

/// One template per distinct rule surface, sorted by surface.
pub fn extract_templates(game: &GameDef) -> Vec<Template> {
    let mut by_surface: BTreeMap<String, Template> = BTreeMap::new();
    for (i, rule) in game.grammar.iter().enumerate() {
        let surface = rule.surface();
        by_surface
            .entry(surface.clone())
            .or_insert_with(|| Template::new(&surface))
            .rule_ids
            .push(i);
    }
    by_surface.into_values().collect()
}

/// A filled template, `u <= w1, w2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionCandidate {
    pub template: usize,
    pub fillers: Vec<String>,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("template `{surface}` has {blanks} blank(s) but {given} word(s) were given")]
pub struct ArityError {
    pub surface: String,
    pub blanks: usize,
    pub given: usize,
}

fn substitute(surface: &str, fillers: &[&str]) -> String {
    let mut out = String::with_capacity(surface.len() + 16);
    let mut next = fillers.iter();
    for (i, w) in surface.split(' ').enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if w == "_" {
            out.push_str(next.next().copied().unwrap_or("_"));
        } else {
            out.push_str(w);
        }
    }
    out
}

/// Left-to-right substitution of `words` into the blanks of `templates[index]`.
pub fn fill_template(
    templates: &[Template],
    index: usize,
    w1: Option<&str>,
    w2: Option<&str>,
) -> Result<ActionCandidate, ArityError> {
    let t = &templates[index];
    let given: Vec<&str> = [w1, w2].into_iter().flatten().collect();
    if given.len() != t.blanks || (w1.is_none() && w2.is_some()) {
        return Err(ArityError { surface: t.surface.clone(), blanks: t.blanks, given: given.len() });
    }
    Ok(ActionCandidate {
        template: index,
        surface: substitute(&t.surface, &given),
        fillers: given.into_iter().map(ToString::to_string).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("action-space size overflows 128 bits")]
pub struct Overflow;

/// Size of a template action space over a vocabulary of `n` words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSpaceSize {
    /// Sum over templates of `n^blanks`.
    pub exact: u128,
    /// `|T| * n^2`, the all-two-blank bound.
    pub upper_bound: u128,
}

pub fn action_space_size(templates: &[Template], n: u64) -> Result<ActionSpaceSize, Overflow> {
    let n = n as u128;
    let mut exact: u128 = 0;
    for t in templates {
        let term = n.checked_pow(t.blanks as u32).ok_or(Overflow)?;
        exact = exact.checked_add(term).ok_or(Overflow)?;
    }
    Ok(ActionSpaceSize { exact, upper_bound: template_upper_bound(templates.len() as u64, n as u64)? })
}

/// `|T| * n^2`.
pub fn template_upper_bound(template_count: u64, n: u64) -> Result<u128, Overflow> {
    (n as u128)
        .checked_mul(n as u128)
        .and_then(|sq| sq.checked_mul(template_count as u128))
        .ok_or(Overflow)
}

/// Number of `k`-word sentences over `n` words, `n^k`.
pub fn free_form_space_size(n: u64, k: u32) -> Result<u128, Overflow> {
    (n as u128).checked_pow(k).ok_or(Overflow)
}

/// How two-blank templates are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairMode {
    /// Ordered pairs of distinct objects.
    #[default]
    Distinct,
    /// Ordered pairs including `(p, p)`.
    WithSelfPairs,
}

/// All fillings of `templates` with `objects`, in template order and then
/// lexical filler order.
pub fn enumerate_candidates(templates: &[Template], objects: &[String], mode: PairMode) -> Vec<ActionCandidate> {
    let mut objs: Vec<&str> = objects.iter().map(String::as_str).collect();
    objs.sort_unstable();
    objs.dedup();
    let mut out = Vec::new();
    for (ti, t) in templates.iter().enumerate() {
        match t.blanks {
            0 => out.push(ActionCandidate { template: ti, fillers: Vec::new(), surface: t.surface.clone() }),
            1 => {
                for &a in &objs {
                    out.push(ActionCandidate {
                        template: ti,
                        fillers: alloc::vec![a.to_string()],
                        surface: substitute(&t.surface, &[a]),
                    });
                }
            }
            _ => {
                for &a in &objs {
                    for &b in &objs {
                        if a == b && mode == PairMode::Distinct {
                            continue;
                        }
                        out.push(ActionCandidate {
                            template: ti,
                            fillers: alloc::vec![a.to_string(), b.to_string()],
                            surface: substitute(&t.surface, &[a, b]),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Closed-form length of [`enumerate_candidates`] for `n` distinct objects.
pub fn candidate_count(templates: &[Template], n: u64, mode: PairMode) -> u128 {
    let n = n as u128;
    templates
        .iter()
        .map(|t| match t.blanks {
            0 => 1,
            1 => n,
            _ => match mode {
                PairMode::Distinct => n * n.saturating_sub(1),
                PairMode::WithSelfPairs => n * n,
            },
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ts(surfaces: &[&str]) -> Vec<Template> {
        surfaces.iter().map(|s| Template::new(s)).collect()
    }

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn fill_two_blanks() {
        let t = ts(&["put _ in _"]);
        assert_eq!(fill_template(&t, 0, Some("egg"), Some("box")).unwrap().surface, "put egg in box");
    }

    #[test]
    fn fill_zero_blanks() {
        let t = ts(&["look"]);
        let c = fill_template(&t, 0, None, None).unwrap();
        assert_eq!(c.surface, "look");
        assert!(c.fillers.is_empty());
    }

    #[test]
    fn fill_is_syntactic_only() {
        let t = ts(&["take _"]);
        assert_eq!(fill_template(&t, 0, Some("north"), None).unwrap().surface, "take north");
    }

    #[test]
    fn fill_arity_mismatch() {
        let t = ts(&["take _", "look"]);
        assert!(fill_template(&t, 0, None, None).is_err());
        assert!(fill_template(&t, 0, Some("a"), Some("b")).is_err());
        assert!(fill_template(&t, 1, Some("a"), None).is_err());
        assert!(fill_template(&t, 0, None, Some("a")).is_err());
    }

    #[test]
    fn published_action_space_bounds() {
        assert_eq!(template_upper_bound(200, 700).unwrap(), 98_000_000);
        // 237 * 697 * 697, the "115 million" figure
        assert_eq!(template_upper_bound(237, 697).unwrap(), 115_136_733);
        assert_eq!(template_upper_bound(237, 697).unwrap() / 1_000_000, 115);
        assert_eq!(free_form_space_size(700, 4).unwrap(), 240_100_000_000);
    }

    #[test]
    fn action_space_edge_cases() {
        let s = action_space_size(&[], 700).unwrap();
        assert_eq!(s.exact, 0);
        assert_eq!(s.upper_bound, 0);
        assert_eq!(free_form_space_size(5, 0).unwrap(), 1);
        assert_eq!(free_form_space_size(0, 3).unwrap(), 0);
        assert_eq!(free_form_space_size(u64::MAX, 3), Err(Overflow));
        let t = ts(&["look", "take _", "put _ in _"]);
        assert_eq!(action_space_size(&t, 10).unwrap().exact, 1 + 10 + 100);
        assert_eq!(action_space_size(&t, 10).unwrap().upper_bound, 300);
    }

    #[test]
    fn enumerate_one_blank() {
        let t = ts(&["take _"]);
        let c = enumerate_candidates(&t, &words(&["egg", "box"]), PairMode::Distinct);
        let s: Vec<&str> = c.iter().map(|c| c.surface.as_str()).collect();
        assert_eq!(s, vec!["take box", "take egg"]);
    }

    #[test]
    fn enumerate_pairs_without_self() {
        let t = ts(&["put _ in _"]);
        let c = enumerate_candidates(&t, &words(&["egg", "box"]), PairMode::Distinct);
        let s: Vec<&str> = c.iter().map(|c| c.surface.as_str()).collect();
        assert_eq!(s, vec!["put box in egg", "put egg in box"]);
        let c = enumerate_candidates(&t, &words(&["egg", "box"]), PairMode::WithSelfPairs);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn enumeration_matches_closed_form() {
        let t = ts(&["look", "north", "take _", "drop _", "put _ in _", "unlock _ with _"]);
        for n in 0..7u64 {
            let objs: Vec<String> = (0..n).map(|i| alloc::format!("o{i}")).collect();
            for mode in [PairMode::Distinct, PairMode::WithSelfPairs] {
                let got = enumerate_candidates(&t, &objs, mode).len() as u128;
                assert_eq!(got, candidate_count(&t, n, mode));
            }
            // with self pairs the enumeration is exactly sum n^blanks
            assert_eq!(
                enumerate_candidates(&t, &objs, PairMode::WithSelfPairs).len() as u128,
                action_space_size(&t, n).unwrap().exact
            );
            // self-pair adjustment: one per object per two-blank template
            let two_blank = t.iter().filter(|t| t.blanks == 2).count() as u128;
            assert_eq!(
                candidate_count(&t, n, PairMode::Distinct),
                action_space_size(&t, n).unwrap().exact - two_blank * n as u128
            );
        }
    }
}
