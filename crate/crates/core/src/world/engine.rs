//! Command execution: conditions, effects, scoring.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::def::{Attribute, ObjectKind, Trigger};
use super::render::join_list;
use super::state::{WorldError, WorldState};
use super::tree::NodeIdx;
use crate::grammar::parse::{parse, ParseOutcome};
use crate::grammar::{Condition, Effect};

pub const UNPARSEABLE_TEXT: &str = "I don't understand that.";
pub const DEFAULT_FAILURE: &str = "You can't do that.";

/// Result of executing one command against the world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutcome {
    pub text: String,
    pub parse: ParseOutcome,
    /// Parsed, conditions held and effects applied.
    pub accepted: bool,
}

/// Message produced by an effect. `Essential` lines survive a rule's own
/// success text (room descriptions, random or ending lines).
enum Msg {
    Default(String),
    Essential(String),
}

type Bound = [Option<NodeIdx>; 2];

impl WorldState {
    pub(crate) fn check(&self, c: &Condition, bound: &Bound) -> bool {
        let g = self.game.clone();
        let target = |t| g.resolve(t, bound);
        match c {
            Condition::PlayerIn { room } => g.idx(*room) == Some(self.room_idx()),
            Condition::Carried { target: t } => target(*t).is_some_and(|i| self.is_carried(i)),
            Condition::NotCarried { target: t } => target(*t).is_some_and(|i| !self.is_carried(i)),
            Condition::Has { target: t, attr } => target(*t).is_some_and(|i| self.has(i, *attr)),
            Condition::Lacks { target: t, attr } => target(*t).is_some_and(|i| !self.has(i, *attr)),
            Condition::Is { target: t, object } => target(*t).is_some() && target(*t) == g.idx(*object),
            Condition::In { target: t, parent } => {
                target(*t).is_some_and(|i| self.tree.parent(i).is_some() && self.tree.parent(i) == g.idx(*parent))
            }
            Condition::GlobalEq { name, value } => self.global(name) == *value,
            Condition::GlobalAtLeast { name, value } => self.global(name) >= *value,
            Condition::NotDark => !self.is_dark_idx(self.room_idx()),
            Condition::InventoryUnderLimit => match g.def().inventory_limit {
                Some(limit) => self.tree.child_count(g.player) < limit as usize,
                None => true,
            },
        }
    }

    fn name(&self, i: NodeIdx) -> String {
        self.display_name(i).to_string()
    }

    fn take_check(&self, i: NodeIdx) -> Result<(), String> {
        let g = &self.game;
        if matches!(self.kind(i), ObjectKind::Room | ObjectKind::Player) {
            return Err("You can't take that.".into());
        }
        if self.tree.parent(i) == Some(g.player) {
            return Err("You already have that.".into());
        }
        if !self.has(i, Attribute::Takeable) || self.has(i, Attribute::Fixed) {
            return Err(alloc::format!("The {} won't budge.", self.name(i)));
        }
        if let Some(limit) = g.def().inventory_limit {
            if self.tree.child_count(g.player) >= limit as usize {
                return Err("You're carrying too many things already.".into());
            }
        }
        Ok(())
    }

    fn apply_effect(&mut self, e: &Effect, bound: &Bound, out: &mut Vec<Msg>) -> Result<(), String> {
        let g = self.game.clone();
        let target = |t| g.resolve(t, bound).ok_or_else(|| String::from(DEFAULT_FAILURE));
        match e {
            Effect::Go { direction } => {
                let room = self.room_idx();
                let exit = g.exits.get(&(room, direction.clone())).ok_or("You can't go that way.")?;
                if let Some(door) = exit.door {
                    if !self.has(door, Attribute::Open) {
                        return Err(alloc::format!("The {} is closed.", self.name(door)));
                    }
                }
                self.tree.reparent(g.player, exit.to).map_err(|_| DEFAULT_FAILURE)?;
                out.push(Msg::Essential(self.render_look()));
            }
            Effect::MovePlayer { room } => {
                let to = g.idx(*room).ok_or(DEFAULT_FAILURE)?;
                self.tree.reparent(g.player, to).map_err(|_| DEFAULT_FAILURE)?;
                out.push(Msg::Essential(self.render_look()));
            }
            Effect::ReparentToPlayer { target: t } => {
                let i = target(*t)?;
                self.take_check(i)?;
                self.tree.reparent(i, g.player).map_err(|_| DEFAULT_FAILURE)?;
                out.push(Msg::Default("Taken.".into()));
            }
            Effect::ReparentToFloor { target: t } => {
                let i = target(*t)?;
                if self.tree.parent(i) != Some(g.player) {
                    return Err("You're not carrying that.".into());
                }
                self.tree.reparent(i, self.room_idx()).map_err(|_| DEFAULT_FAILURE)?;
                out.push(Msg::Default("Dropped.".into()));
            }
            Effect::TakeAll => {
                let room = self.room_idx();
                if self.is_dark_idx(room) {
                    return Err("It's too dark to see anything to take.".into());
                }
                let candidates: Vec<NodeIdx> = self
                    .tree
                    .children(room)
                    .filter(|&c| c != g.player && self.has(c, Attribute::Takeable) && !self.has(c, Attribute::Fixed))
                    .collect();
                if candidates.is_empty() {
                    return Err("There is nothing here to take.".into());
                }
                let mut lines = Vec::new();
                let mut took = false;
                for c in candidates {
                    match self.take_check(c) {
                        Ok(()) => {
                            self.tree.reparent(c, g.player).map_err(|_| DEFAULT_FAILURE)?;
                            lines.push(alloc::format!("{}: Taken.", self.name(c)));
                            took = true;
                        }
                        Err(msg) => lines.push(alloc::format!("{}: {}", self.name(c), msg)),
                    }
                }
                if !took {
                    return Err(lines.join(" "));
                }
                out.push(Msg::Default(lines.join(" ")));
            }
            Effect::PutIn { item, container } => {
                let (i, c) = (target(*item)?, target(*container)?);
                if !self.is_carried(i) {
                    return Err(alloc::format!("You're not carrying the {}.", self.name(i)));
                }
                if i == c || self.tree.is_within(c, i) {
                    return Err("You can't put something inside itself.".into());
                }
                if !self.has(c, Attribute::Container) {
                    return Err(alloc::format!("You can't put things in the {}.", self.name(c)));
                }
                if self.has(c, Attribute::Openable) && !self.has(c, Attribute::Open) {
                    return Err(alloc::format!("The {} is closed.", self.name(c)));
                }
                if let Some(cap) = g.node(c).capacity {
                    if self.tree.child_count(c) >= cap as usize {
                        return Err(alloc::format!("There's no room in the {}.", self.name(c)));
                    }
                }
                self.tree.reparent(i, c).map_err(|_| DEFAULT_FAILURE)?;
                out.push(Msg::Default("Done.".into()));
            }
            Effect::Reparent { target: t, to } => {
                let i = target(*t)?;
                let p = g.idx(*to).ok_or(DEFAULT_FAILURE)?;
                self.tree.reparent(i, p).map_err(|_| DEFAULT_FAILURE)?;
            }
            Effect::SetAttribute { target: t, attr } => {
                let i = target(*t)?;
                let msg = match attr {
                    Attribute::Open => {
                        if !self.has(i, Attribute::Openable) {
                            return Err(alloc::format!("You can't open the {}.", self.name(i)));
                        }
                        if self.has(i, Attribute::Locked) {
                            return Err(alloc::format!("The {} is locked.", self.name(i)));
                        }
                        if self.has(i, Attribute::Open) {
                            return Err("It's already open.".into());
                        }
                        self.attrs[i.get()].insert(Attribute::Open);
                        if self.has(i, Attribute::Container) && self.tree.first_child(i).is_some() {
                            let items: Vec<String> = self.tree.children(i).map(|c| self.with_article(c)).collect();
                            alloc::format!("Opening the {} reveals {}.", self.name(i), join_list(&items))
                        } else {
                            "Opened.".into()
                        }
                    }
                    Attribute::Lit => {
                        if !self.has(i, Attribute::Lightsource) {
                            return Err(alloc::format!("You can't light the {}.", self.name(i)));
                        }
                        if self.has(i, Attribute::Lit) {
                            return Err("It's already on.".into());
                        }
                        self.attrs[i.get()].insert(Attribute::Lit);
                        alloc::format!("The {} is now on.", self.name(i))
                    }
                    a => {
                        self.attrs[i.get()].insert(*a);
                        "Done.".into()
                    }
                };
                out.push(Msg::Default(msg));
            }
            Effect::ClearAttribute { target: t, attr } => {
                let i = target(*t)?;
                let msg = match attr {
                    Attribute::Open => {
                        if !self.has(i, Attribute::Open) {
                            return Err("It's already closed.".into());
                        }
                        "Closed.".into()
                    }
                    Attribute::Lit => {
                        if !self.has(i, Attribute::Lit) {
                            return Err("It's already off.".into());
                        }
                        alloc::format!("The {} is now off.", self.name(i))
                    }
                    _ => "Done.".into(),
                };
                self.attrs[i.get()].remove(*attr);
                out.push(Msg::Default(msg));
            }
            Effect::UnlockWith { target: t, key } => {
                let (l, k) = (target(*t)?, target(*key)?);
                if !self.has(l, Attribute::Locked) {
                    return Err("It isn't locked.".into());
                }
                if !self.is_carried(k) {
                    return Err(alloc::format!("You don't have the {}.", self.name(k)));
                }
                if g.node(l).key_id != Some(g.id_of(k)) {
                    return Err(alloc::format!("The {} doesn't fit.", self.name(k)));
                }
                self.attrs[l.get()].remove(Attribute::Locked);
                out.push(Msg::Default("Unlocked.".into()));
            }
            Effect::ToggleLight { target: t } => {
                let i = target(*t)?;
                if !self.has(i, Attribute::Lightsource) {
                    return Err(alloc::format!("You can't light the {}.", self.name(i)));
                }
                let on = !self.has(i, Attribute::Lit);
                if on {
                    self.attrs[i.get()].insert(Attribute::Lit);
                } else {
                    self.attrs[i.get()].remove(Attribute::Lit);
                }
                let state = if on { "on" } else { "off" };
                out.push(Msg::Default(alloc::format!("The {} is now {}.", self.name(i), state)));
            }
            Effect::EmitText { text } => out.push(Msg::Essential(text.clone())),
            Effect::EmitRandom { texts } => {
                if !texts.is_empty() {
                    let k = self.rng.below(texts.len());
                    out.push(Msg::Essential(texts[k].clone()));
                }
            }
            Effect::Look => out.push(Msg::Essential(self.render_look())),
            Effect::Inventory => out.push(Msg::Essential(self.render_inventory())),
            Effect::Examine { target: t } => {
                let i = target(*t)?;
                out.push(Msg::Essential(self.render_examine(i)));
            }
            Effect::Read { target: t } => {
                let i = target(*t)?;
                match (&g.node(i).read_text, self.has(i, Attribute::Readable)) {
                    (Some(text), true) => out.push(Msg::Essential(text.clone())),
                    _ => return Err(alloc::format!("There's nothing written on the {}.", self.name(i))),
                }
            }
            Effect::SetGlobal { name, value } => {
                self.globals.insert(name.clone(), *value);
            }
            Effect::EndGame { text } => {
                self.done = true;
                out.push(Msg::Essential(text.clone()));
            }
        }
        Ok(())
    }

    fn trigger_holds(&self, t: &Trigger) -> bool {
        let g = &self.game;
        match t {
            Trigger::EnterRoom { room } => g.idx(*room) == Some(self.room_idx()),
            Trigger::Acquire { object } => g.idx(*object).is_some_and(|i| self.is_carried(i)),
            Trigger::StateReached { all } => all.iter().all(|c| self.check(c, &[None, None])),
            Trigger::ActionPattern { .. } => false,
        }
    }

    /// Fires score rules after a command `rule` took `before` to `self`.
    fn fire_score_rules(&mut self, before: &WorldState, rule: usize, out: &mut Vec<String>) {
        let g = self.game.clone();
        for (i, sr) in g.def().score_rules.iter().enumerate() {
            let key = score_key(i);
            if sr.once && self.global(&key) != 0 {
                continue;
            }
            let fires = match &sr.trigger {
                Trigger::ActionPattern { rule: r } => g.rule_index(r) == Some(rule),
                t => self.trigger_holds(t) && !before.trigger_holds(t),
            };
            if !fires {
                continue;
            }
            self.score += sr.points;
            if sr.once {
                self.globals.insert(key, 1);
            }
            if let Some(text) = &sr.text {
                out.push(text.clone());
            }
        }
        if g.def().end_at_max_score && self.score >= g.max_score() && !self.done {
            self.done = true;
            if !g.def().win_text.is_empty() {
                out.push(g.def().win_text.clone());
            }
        }
    }

    /// Parses and executes one command. Rejected commands leave the state
    /// untouched; accepted ones advance `moves` by one.
    pub fn step(&mut self, text: &str) -> Result<CommandOutcome, WorldError> {
        if self.done {
            return Err(WorldError::GameOver);
        }
        let parsed = parse(self, text);
        let ParseOutcome::Resolved { rule, .. } = parsed.outcome else {
            let text = match &parsed.outcome {
                ParseOutcome::Unresolved { noun } => alloc::format!("You can't see any {noun} here."),
                _ => UNPARSEABLE_TEXT.into(),
            };
            return Ok(CommandOutcome { text, parse: parsed.outcome, accepted: false });
        };
        let g = self.game.clone();
        let def_rule = &g.def().grammar[rule];
        let reject = |text: String, parse: ParseOutcome| Ok(CommandOutcome { text, parse, accepted: false });

        if !def_rule.when.iter().all(|c| self.check(c, &parsed.bound)) {
            let text = def_rule.failure_text.clone().unwrap_or_else(|| DEFAULT_FAILURE.into());
            return reject(text, parsed.outcome);
        }

        let mut next = self.clone();
        let was_dark = next.is_dark_idx(next.room_idx());
        let mut msgs = Vec::new();
        for e in &def_rule.effects {
            if let Err(text) = next.apply_effect(e, &parsed.bound, &mut msgs) {
                return reject(text, parsed.outcome);
            }
        }
        let moved = next.room_idx() != self.room_idx();
        if was_dark && !moved && !next.is_dark_idx(next.room_idx()) {
            msgs.push(Msg::Essential(next.render_look()));
        }

        let mut lines: Vec<String> = Vec::new();
        if let Some(t) = &def_rule.text {
            lines.push(t.clone());
        }
        for m in msgs {
            match m {
                Msg::Default(s) if def_rule.text.is_none() => lines.push(s),
                Msg::Default(_) => {}
                Msg::Essential(s) => lines.push(s),
            }
        }
        next.moves += 1;
        next.fire_score_rules(self, rule, &mut lines);
        *self = next;
        Ok(CommandOutcome { text: lines.join(" "), parse: parsed.outcome, accepted: true })
    }
}

pub(crate) fn score_key(i: usize) -> String {
    alloc::format!("score:{i}")
}
