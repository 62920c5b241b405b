//! Validated, indexed form of a [`GameDef`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use super::def::{Attribute, GameDef, ObjectId, ObjectKind, ObjectNode, Trigger, FORMAT_VERSION};
use super::tree::{NodeIdx, ObjectTree};
use crate::grammar::rule::{compile_pattern, slot_count, PatternToken};
use crate::grammar::{extract_templates, extract_vocabulary, Condition, Target, Template, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    UnsupportedVersion(u32),
    ReservedId,
    DuplicateId(ObjectId),
    EmptyNames(ObjectId),
    BadName { id: ObjectId, name: String },
    PlayerCount(usize),
    AttributeInvariant { id: ObjectId, detail: &'static str },
    Dangling { id: ObjectId, context: String },
    NotARoom { id: ObjectId, context: String },
    LocationCycle(ObjectId),
    BadPattern { rule: String, detail: &'static str },
    SlotOutOfRange { rule: String, slot: u8 },
    DuplicateRuleId(String),
    UnknownRule(String),
    SlotInScoreRule(usize),
    RepeatingPositiveScore(usize),
    MaxScore { declared: i64, computed: i64 },
    TemplateCount { expected: usize, actual: usize },
    BadInventoryLimit,
}

impl Issue {
    pub fn object(&self) -> Option<ObjectId> {
        match self {
            Issue::DuplicateId(id)
            | Issue::EmptyNames(id)
            | Issue::LocationCycle(id)
            | Issue::BadName { id, .. }
            | Issue::AttributeInvariant { id, .. }
            | Issue::Dangling { id, .. }
            | Issue::NotARoom { id, .. } => Some(*id),
            _ => None,
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::UnsupportedVersion(v) => write!(f, "format_version {v} is not supported (expected {FORMAT_VERSION})"),
            Issue::ReservedId => write!(f, "object id 0 is reserved for the universe root"),
            Issue::DuplicateId(id) => write!(f, "duplicate object id {id}"),
            Issue::EmptyNames(id) => write!(f, "object {id} has no names"),
            Issue::BadName { id, name } => write!(f, "object {id}: name `{name}` must be one lowercase word"),
            Issue::PlayerCount(n) => write!(f, "expected exactly one player object, found {n}"),
            Issue::AttributeInvariant { id, detail } => write!(f, "object {id}: {detail}"),
            Issue::Dangling { id, context } => write!(f, "{context} references missing object {id}"),
            Issue::NotARoom { id, context } => write!(f, "{context}: object {id} is not a room"),
            Issue::LocationCycle(id) => write!(f, "object {id} is (transitively) located inside itself"),
            Issue::BadPattern { rule, detail } => write!(f, "rule `{rule}`: {detail}"),
            Issue::SlotOutOfRange { rule, slot } => write!(f, "rule `{rule}` references slot ${slot} beyond its pattern"),
            Issue::DuplicateRuleId(r) => write!(f, "duplicate rule id `{r}`"),
            Issue::UnknownRule(r) => write!(f, "score rule references unknown rule `{r}`"),
            Issue::SlotInScoreRule(i) => write!(f, "score rule {i} uses a slot target"),
            Issue::RepeatingPositiveScore(i) => write!(f, "score rule {i} is repeatable but awards positive points"),
            Issue::MaxScore { declared, computed } => {
                write!(f, "max_score is {declared} but positive one-shot rules sum to {computed}")
            }
            Issue::TemplateCount { expected, actual } => {
                write!(f, "expected_template_count is {expected} but the grammar yields {actual} templates")
            }
            Issue::BadInventoryLimit => write!(f, "inventory_limit must be positive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub issues: Vec<Issue>,
}

impl ValidationError {
    /// Object ids named by any issue, sorted and de-duplicated.
    pub fn offending_ids(&self) -> Vec<ObjectId> {
        let set: BTreeSet<ObjectId> = self.issues.iter().filter_map(Issue::object).collect();
        set.into_iter().collect()
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid game: ")?;
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    NoDescription(ObjectId),
    IsolatedRoom(ObjectId),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NoDescription(id) => write!(f, "object {id} has no description text"),
            Warning::IsolatedRoom(id) => write!(f, "room {id} has no exits in or out"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledRule {
    pub pattern: Vec<PatternToken>,
}

#[derive(Debug, Clone)]
pub(crate) struct ExitTo {
    pub to: NodeIdx,
    pub door: Option<NodeIdx>,
}

/// A validated game with dense node indices. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct Game {
    def: GameDef,
    index: BTreeMap<ObjectId, NodeIdx>,
    pub(crate) nodes: Vec<ObjectNode>,
    pub(crate) player: NodeIdx,
    pub(crate) start_room: NodeIdx,
    pub(crate) dark: Vec<bool>,
    pub(crate) rules: Vec<CompiledRule>,
    rule_index: BTreeMap<String, usize>,
    templates: Vec<Template>,
    vocab: Vocabulary,
    nouns: BTreeMap<String, Vec<NodeIdx>>,
    pub(crate) exits: BTreeMap<(NodeIdx, String), ExitTo>,
    pub(crate) initial_tree: ObjectTree,
    warnings: Vec<Warning>,
}

fn valid_word(w: &str) -> bool {
    !w.is_empty() && w.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

impl Game {
    pub fn new(def: GameDef) -> Result<Game, ValidationError> {
        let mut issues = Vec::new();
        if def.format_version != FORMAT_VERSION {
            issues.push(Issue::UnsupportedVersion(def.format_version));
        }

        // Objects and dense indices; index 0 is the universe.
        let mut index = BTreeMap::new();
        let mut nodes = alloc::vec![ObjectNode {
            id: ObjectId::UNIVERSE,
            names: alloc::vec!["universe".to_string()],
            kind: ObjectKind::Scenery,
            title: None,
            attributes: Default::default(),
            key_id: None,
            capacity: None,
            text: String::new(),
            read_text: None,
            location: None,
        }];
        index.insert(ObjectId::UNIVERSE, NodeIdx::ROOT);
        for obj in &def.objects {
            if obj.id == ObjectId::UNIVERSE {
                issues.push(Issue::ReservedId);
                continue;
            }
            if index.contains_key(&obj.id) {
                issues.push(Issue::DuplicateId(obj.id));
                continue;
            }
            index.insert(obj.id, NodeIdx(nodes.len() as u32));
            nodes.push(obj.clone());
        }

        let players: Vec<NodeIdx> = (1..nodes.len())
            .filter(|&i| nodes[i].kind == ObjectKind::Player)
            .map(|i| NodeIdx(i as u32))
            .collect();
        if players.len() != 1 {
            issues.push(Issue::PlayerCount(players.len()));
        }

        let lookup = |id: ObjectId, ctx: &str, issues: &mut Vec<Issue>| -> Option<NodeIdx> {
            let r = index.get(&id).copied();
            if r.is_none() {
                issues.push(Issue::Dangling { id, context: ctx.to_string() });
            }
            r
        };
        let is_room = |i: NodeIdx| nodes[i.get()].kind == ObjectKind::Room;

        for obj in nodes.iter().skip(1) {
            if obj.names.is_empty() {
                issues.push(Issue::EmptyNames(obj.id));
            }
            for n in &obj.names {
                if !valid_word(n) {
                    issues.push(Issue::BadName { id: obj.id, name: n.clone() });
                }
            }
            let a = obj.attributes;
            if a.has(Attribute::Locked) && !a.has(Attribute::Openable) {
                issues.push(Issue::AttributeInvariant { id: obj.id, detail: "locked requires openable" });
            }
            if a.has(Attribute::Open) && !a.has(Attribute::Openable) {
                issues.push(Issue::AttributeInvariant { id: obj.id, detail: "open requires openable" });
            }
            if a.has(Attribute::Lit) && !a.has(Attribute::Lightsource) {
                issues.push(Issue::AttributeInvariant { id: obj.id, detail: "lit requires lightsource" });
            }
            if let Some(k) = obj.key_id {
                if let Some(ki) = lookup(k, "key_id", &mut issues) {
                    if nodes[ki.get()].kind != ObjectKind::Item {
                        issues.push(Issue::AttributeInvariant { id: obj.id, detail: "key_id must name an item" });
                    }
                }
            }
            if let Some(loc) = obj.location {
                if obj.kind != ObjectKind::Player {
                    lookup(loc, "location", &mut issues);
                }
                if obj.kind == ObjectKind::Room && loc != ObjectId::UNIVERSE {
                    issues.push(Issue::AttributeInvariant { id: obj.id, detail: "rooms cannot have a location" });
                }
            }
        }

        let start_room = lookup(def.start_room, "start_room", &mut issues);
        if let Some(s) = start_room {
            if !is_room(s) {
                issues.push(Issue::NotARoom { id: def.start_room, context: "start_room".to_string() });
            }
        }
        if def.inventory_limit == Some(0) {
            issues.push(Issue::BadInventoryLimit);
        }
        let mut dark = alloc::vec![false; nodes.len()];
        for &r in &def.dark_rooms {
            if let Some(i) = lookup(r, "dark_rooms", &mut issues) {
                if is_room(i) {
                    dark[i.get()] = true;
                } else {
                    issues.push(Issue::NotARoom { id: r, context: "dark_rooms".to_string() });
                }
            }
        }

        let mut exits = BTreeMap::new();
        for e in &def.exits {
            let from = lookup(e.from, "exit.from", &mut issues);
            let to = lookup(e.to, "exit.to", &mut issues);
            let door = e.door.and_then(|d| lookup(d, "exit.door", &mut issues));
            for (i, id) in [(from, e.from), (to, e.to)] {
                if let Some(i) = i {
                    if !is_room(i) {
                        issues.push(Issue::NotARoom { id, context: "exit".to_string() });
                    }
                }
            }
            if let (Some(from), Some(to)) = (from, to) {
                exits.insert((from, e.direction.to_lowercase()), ExitTo { to, door });
            }
        }

        // Grammar.
        let mut rules = Vec::new();
        let mut rule_index = BTreeMap::new();
        for (ri, rule) in def.grammar.iter().enumerate() {
            if rule_index.insert(rule.id.clone(), ri).is_some() {
                issues.push(Issue::DuplicateRuleId(rule.id.clone()));
            }
            let pattern = compile_pattern(&rule.pattern);
            let slots = slot_count(&pattern);
            if pattern.is_empty() {
                issues.push(Issue::BadPattern { rule: rule.id.clone(), detail: "empty pattern" });
            }
            if slots > 2 {
                issues.push(Issue::BadPattern { rule: rule.id.clone(), detail: "more than two slots" });
            }
            if pattern.iter().any(|t| matches!(t, PatternToken::Word(w) if !valid_word(w))) {
                issues.push(Issue::BadPattern { rule: rule.id.clone(), detail: "literals must be lowercase words" });
            }
            if rule.effects.is_empty() {
                issues.push(Issue::BadPattern { rule: rule.id.clone(), detail: "no effects" });
            }
            let targets = rule
                .when
                .iter()
                .flat_map(Condition::targets)
                .chain(rule.effects.iter().flat_map(|e| e.targets()));
            for t in targets {
                match t {
                    Target::Slot(s) if s as usize > slots || s == 0 => {
                        issues.push(Issue::SlotOutOfRange { rule: rule.id.clone(), slot: s })
                    }
                    Target::Object(id) => {
                        lookup(id, &alloc::format!("rule `{}`", rule.id), &mut issues);
                    }
                    _ => {}
                }
            }
            for c in &rule.when {
                match c {
                    Condition::PlayerIn { room } => {
                        lookup(*room, &alloc::format!("rule `{}`", rule.id), &mut issues);
                    }
                    Condition::Is { object, .. } | Condition::In { parent: object, .. } => {
                        lookup(*object, &alloc::format!("rule `{}`", rule.id), &mut issues);
                    }
                    _ => {}
                }
            }
            for e in &rule.effects {
                match e {
                    crate::grammar::Effect::MovePlayer { room } => {
                        lookup(*room, &alloc::format!("rule `{}`", rule.id), &mut issues);
                    }
                    crate::grammar::Effect::Reparent { to, .. } => {
                        lookup(*to, &alloc::format!("rule `{}`", rule.id), &mut issues);
                    }
                    _ => {}
                }
            }
            rules.push(CompiledRule { pattern });
        }

        // Scoring.
        let mut computed = 0i64;
        for (i, sr) in def.score_rules.iter().enumerate() {
            match &sr.trigger {
                Trigger::EnterRoom { room } => {
                    if let Some(r) = lookup(*room, "score rule", &mut issues) {
                        if !is_room(r) {
                            issues.push(Issue::NotARoom { id: *room, context: "enter-room".to_string() });
                        }
                    }
                }
                Trigger::Acquire { object } => {
                    lookup(*object, "score rule", &mut issues);
                }
                Trigger::StateReached { all } => {
                    if all.iter().flat_map(Condition::targets).any(|t| matches!(t, Target::Slot(_))) {
                        issues.push(Issue::SlotInScoreRule(i));
                    }
                }
                Trigger::ActionPattern { rule } => {
                    if !rule_index.contains_key(rule) {
                        issues.push(Issue::UnknownRule(rule.clone()));
                    }
                }
            }
            if sr.points > 0 {
                if sr.once {
                    computed += sr.points;
                } else {
                    issues.push(Issue::RepeatingPositiveScore(i));
                }
            }
        }
        if computed != def.metadata.max_score || def.metadata.max_score <= 0 {
            issues.push(Issue::MaxScore { declared: def.metadata.max_score, computed });
        }

        let templates = extract_templates(&def);
        if templates.len() != def.metadata.expected_template_count {
            issues.push(Issue::TemplateCount {
                expected: def.metadata.expected_template_count,
                actual: templates.len(),
            });
        }
        let vocab = extract_vocabulary(&def);

        // Initial tree. Attach in reverse declaration order so child chains
        // list objects in the order they were written.
        let mut initial_tree = ObjectTree::new(nodes.len());
        for i in (1..nodes.len()).rev() {
            let obj = &nodes[i];
            let parent = match obj.kind {
                ObjectKind::Player => start_room,
                _ => obj.location.and_then(|l| index.get(&l).copied()),
            };
            if let Some(p) = parent {
                if initial_tree.reparent(NodeIdx(i as u32), p).is_err() {
                    issues.push(Issue::LocationCycle(obj.id));
                }
            }
        }

        if !issues.is_empty() {
            return Err(ValidationError { issues });
        }

        let mut nouns: BTreeMap<String, Vec<NodeIdx>> = BTreeMap::new();
        for (i, obj) in nodes.iter().enumerate().skip(1) {
            for n in &obj.names {
                nouns.entry(n.clone()).or_default().push(NodeIdx(i as u32));
            }
        }

        let mut warnings = Vec::new();
        for (i, obj) in nodes.iter().enumerate().skip(1) {
            if obj.text.trim().is_empty() && obj.kind != ObjectKind::Player {
                warnings.push(Warning::NoDescription(obj.id));
            }
            if obj.kind == ObjectKind::Room {
                let idx = NodeIdx(i as u32);
                let connected = exits.iter().any(|((from, _), e)| *from == idx || e.to == idx);
                let rooms = nodes.iter().filter(|n| n.kind == ObjectKind::Room).count();
                if rooms > 1 && !connected {
                    warnings.push(Warning::IsolatedRoom(obj.id));
                }
            }
        }

        Ok(Game {
            player: players[0],
            start_room: start_room.unwrap(),
            def,
            index,
            nodes,
            dark,
            rules,
            rule_index,
            templates,
            vocab,
            nouns,
            exits,
            initial_tree,
            warnings,
        })
    }

    pub fn def(&self) -> &GameDef {
        &self.def
    }

    pub fn title(&self) -> &str {
        &self.def.metadata.title
    }

    pub fn max_score(&self) -> i64 {
        self.def.metadata.max_score
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn idx(&self, id: ObjectId) -> Option<NodeIdx> {
        self.index.get(&id).copied()
    }

    pub fn id_of(&self, idx: NodeIdx) -> ObjectId {
        self.nodes[idx.get()].id
    }

    pub fn node(&self, idx: NodeIdx) -> &ObjectNode {
        &self.nodes[idx.get()]
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectNode> {
        self.idx(id).map(|i| self.node(i))
    }

    pub fn player(&self) -> NodeIdx {
        self.player
    }

    pub fn player_id(&self) -> ObjectId {
        self.id_of(self.player)
    }

    pub fn start_room_id(&self) -> ObjectId {
        self.id_of(self.start_room)
    }

    pub fn rule_index(&self, id: &str) -> Option<usize> {
        self.rule_index.get(id).copied()
    }

    /// Objects answering to `noun`.
    pub fn objects_named(&self, noun: &str) -> &[NodeIdx] {
        self.nouns.get(noun).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_noun(&self, word: &str) -> bool {
        self.nouns.contains_key(word)
    }

    pub fn is_dark_room(&self, room: NodeIdx) -> bool {
        self.dark[room.get()]
    }

    pub(crate) fn resolve(&self, t: Target, bound: &[Option<NodeIdx>; 2]) -> Option<NodeIdx> {
        match t {
            Target::Slot(s) => bound.get(s as usize - 1).copied().flatten(),
            Target::Object(id) => self.idx(id),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn tiny_validates_without_warnings() {
        let g = Game::new(tiny()).unwrap();
        assert!(g.warnings().is_empty(), "{:?}", g.warnings());
        assert_eq!(g.templates().len(), 13);
        assert_eq!(g.node_count(), 10);
    }

    #[test]
    fn dangling_key_is_named() {
        let mut def = tiny();
        def.objects[4].key_id = Some(ObjectId(42));
        let err = Game::new(def).unwrap_err();
        assert_eq!(err.offending_ids(), alloc::vec![ObjectId(42)]);
        assert!(alloc::format!("{err}").contains("#42"));
    }

    #[test]
    fn attribute_invariants() {
        let mut def = tiny();
        def.objects[6].attributes.insert(Attribute::Lit);
        def.objects[6].attributes.remove(Attribute::Lightsource);
        def.objects[5].attributes.insert(Attribute::Locked);
        let err = Game::new(def).unwrap_err();
        assert_eq!(err.offending_ids(), alloc::vec![ObjectId(6), ObjectId(7)]);
    }

    #[test]
    fn max_score_must_match_rules() {
        let mut def = tiny();
        def.metadata.max_score = 10;
        let err = Game::new(def).unwrap_err();
        assert!(err.issues.contains(&Issue::MaxScore { declared: 10, computed: 3 }));
    }

    #[test]
    fn exactly_one_player() {
        let mut def = tiny();
        def.objects.pop();
        let err = Game::new(def).unwrap_err();
        assert!(err.issues.contains(&Issue::PlayerCount(0)));
    }

    #[test]
    fn slot_beyond_pattern() {
        let mut def = tiny();
        def.grammar[0].effects.push(crate::grammar::Effect::Examine { target: Target::Slot(1) });
        let err = Game::new(def).unwrap_err();
        assert!(matches!(err.issues[0], Issue::SlotOutOfRange { slot: 1, .. }));
    }

    #[test]
    fn location_cycle_detected() {
        let mut def = tiny();
        def.objects[4].location = Some(ObjectId(6)); // box inside egg inside box
        let err = Game::new(def).unwrap_err();
        assert!(err.issues.iter().any(|i| matches!(i, Issue::LocationCycle(_))));
    }
}
