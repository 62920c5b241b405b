//! Text rendering of rooms, inventory and objects. Observations are single
//! lines; sentences are joined with spaces.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::def::{Attribute, ObjectKind};
use super::state::WorldState;
use super::tree::NodeIdx;

pub const DARK_TEXT: &str = "It is pitch black. You can't see a thing.";
pub const EMPTY_HANDED: &str = "You are empty-handed.";

fn article(name: &str) -> &'static str {
    match name.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

pub(crate) fn join_list(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => {
            let mut s = items[..n - 1].join(", ");
            s.push_str(" and ");
            s.push_str(&items[n - 1]);
            s
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

impl WorldState {
    pub(crate) fn display_name(&self, i: NodeIdx) -> &str {
        self.game.node(i).display()
    }

    pub(crate) fn with_article(&self, i: NodeIdx) -> String {
        let name = self.display_name(i);
        let mut s = alloc::format!("{} {}", article(name), name);
        if self.has(i, Attribute::Lit) {
            s.push_str(" (providing light)");
        }
        s
    }

    fn content_phrases(&self, i: NodeIdx) -> Vec<String> {
        self.tree.children(i).map(|c| self.with_article(c)).collect()
    }

    /// "The box contains an egg." for open containers with contents,
    /// recursing into nested containers.
    fn describe_contents(&self, i: NodeIdx, out: &mut String) {
        if !self.see_inside(i) || self.tree.first_child(i).is_none() {
            return;
        }
        let _ = write!(out, " The {} contains {}.", self.display_name(i), join_list(&self.content_phrases(i)));
        for c in self.tree.children(i) {
            self.describe_contents(c, out);
        }
    }

    /// Room description as produced by `look`.
    pub fn render_look(&self) -> String {
        let room = self.room_idx();
        if self.is_dark_idx(room) {
            return DARK_TEXT.into();
        }
        let node = self.game.node(room);
        let mut out = capitalize(node.display());
        out.push('.');
        if !node.text.is_empty() {
            out.push(' ');
            out.push_str(&node.text);
        }
        for c in self.tree.children(room) {
            if c == self.game.player {
                continue;
            }
            if self.kind(c) == ObjectKind::Item {
                let _ = write!(out, " There is {} here.", self.with_article(c));
            }
            self.describe_contents(c, &mut out);
        }
        out
    }

    pub fn render_inventory(&self) -> String {
        let items: Vec<String> = self
            .tree
            .children(self.game.player)
            .map(|c| {
                let mut s = self.with_article(c);
                if self.see_inside(c) && self.tree.first_child(c).is_some() {
                    let _ = write!(s, " (containing {})", join_list(&self.content_phrases(c)));
                }
                s
            })
            .collect();
        if items.is_empty() {
            EMPTY_HANDED.into()
        } else {
            alloc::format!("You are carrying: {}.", join_list(&items))
        }
    }

    pub(crate) fn render_examine(&self, i: NodeIdx) -> String {
        let node = self.game.node(i);
        let mut out = if node.text.is_empty() {
            alloc::format!("You see nothing special about the {}.", node.display())
        } else {
            node.text.clone()
        };
        if self.has(i, Attribute::Openable) && self.has(i, Attribute::Container) {
            let state = if self.has(i, Attribute::Open) { "open" } else { "closed" };
            let _ = write!(out, " The {} is {}.", node.display(), state);
        }
        if self.has(i, Attribute::Lightsource) {
            let state = if self.has(i, Attribute::Lit) { "on" } else { "off" };
            let _ = write!(out, " The {} is {}.", node.display(), state);
        }
        self.describe_contents(i, &mut out);
        out
    }
}
