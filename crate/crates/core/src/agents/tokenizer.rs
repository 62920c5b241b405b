//! Word-level tokenizer with a game-derived vocabulary.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::grammar::command_words;
use crate::world::{Game, DARK_TEXT, DEFAULT_FAILURE, EMPTY_HANDED, UNPARSEABLE_TEXT};

use super::random::CANONICAL_ACTIONS;

pub const UNK: u32 = 0;

/// Engine messages that appear in observations but not in game files.
const ENGINE_TEXT: &[&str] = &[
    DARK_TEXT,
    EMPTY_HANDED,
    UNPARSEABLE_TEXT,
    DEFAULT_FAILURE,
    "you are carrying taken dropped done opened closed unlocked there is here contains containing reveals",
    "can't see any won't budge already have that not carrying too many things put something inside itself",
    "closed locked open on off now providing light nothing special about go way isn't doesn't fit don't",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tokenizer {
    index: BTreeMap<String, u32>,
    words: Vec<String>,
    /// Longest token sequence kept per text channel.
    pub max_len: usize,
}

impl Tokenizer {
    /// Index 0 is reserved for unknown words; the rest are sorted.
    pub fn from_words<I, S>(words: I, max_len: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut sorted: Vec<String> =
            words.into_iter().flat_map(|w| command_words(w.as_ref())).collect();
        sorted.sort();
        sorted.dedup();
        let mut words = alloc::vec![String::from("<unk>")];
        words.extend(sorted);
        let index = words.iter().enumerate().skip(1).map(|(i, w)| (w.clone(), i as u32)).collect();
        Tokenizer { index, words, max_len }
    }

    /// Every word in the game file plus the grammar vocabulary and the
    /// engine's own messages.
    pub fn for_game(game: &Game, max_len: usize) -> Self {
        let def = game.def();
        let mut texts: Vec<&str> = Vec::new();
        texts.extend(game.vocabulary().words().iter().map(String::as_str));
        texts.push(&def.intro_text);
        texts.push(&def.win_text);
        for o in &def.objects {
            texts.extend(o.names.iter().map(String::as_str));
            texts.extend(o.title.as_deref());
            texts.push(&o.text);
            texts.extend(o.read_text.as_deref());
        }
        for r in &def.grammar {
            texts.extend(r.text.as_deref());
            texts.extend(r.failure_text.as_deref());
            for e in &r.effects {
                match e {
                    crate::grammar::Effect::EmitText { text } | crate::grammar::Effect::EndGame { text } => {
                        texts.push(text)
                    }
                    crate::grammar::Effect::EmitRandom { texts: ts } => texts.extend(ts.iter().map(String::as_str)),
                    _ => {}
                }
            }
        }
        for s in &def.score_rules {
            texts.extend(s.text.as_deref());
        }
        texts.extend(CANONICAL_ACTIONS);
        texts.extend(ENGINE_TEXT);
        Self::from_words(texts, max_len)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn token(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn word(&self, token: u32) -> Option<&str> {
        self.words.get(token as usize).map(String::as_str)
    }

    /// Tokens of `text`, truncated to `max_len`.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        command_words(text).iter().take(self.max_len).map(|w| self.token(w)).collect()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}
