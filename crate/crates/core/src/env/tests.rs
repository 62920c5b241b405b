use super::*;
use crate::grammar::Template;
use crate::world::game::fixtures::{obj, tiny};
use crate::world::{state_diff, Attribute, ObjectId, ObjectKind};
use alloc::string::ToString;

fn game() -> Arc<Game> {
    Arc::new(Game::new(tiny()).unwrap())
}

fn env() -> Env {
    let mut e = Env::new(game(), Handicaps::ALL, 99).unwrap();
    e.reset(Some(7)).unwrap();
    e
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn seeded_resets_replay_identically() {
    let cmds = ["open mailbox", "take leaflet", "xyzzy", "take box", "open box", "look", "down", "up"];
    let run = || {
        let mut e = env();
        let mut out = Vec::new();
        for i in 0..100 {
            match e.step(cmds[i % cmds.len()]) {
                Ok(r) => out.push((r.observation, r.reward, r.score, r.done)),
                Err(_) => break,
            }
        }
        out
    };
    assert_eq!(run(), run());
}

#[test]
fn fixed_seed_needs_handicap() {
    let mut e = Env::new(game(), Handicaps::NONE, 1).unwrap();
    assert_eq!(e.reset(Some(3)), Err(EnvError::MissingHandicap(Handicap::FixedSeed)));
    let (_, a) = e.reset(None).unwrap();
    let (_, b) = e.reset(None).unwrap();
    assert!(!a.fixed);
    assert_ne!(a.seed, b.seed);
    assert_eq!(e.seed(), b.seed);
}

#[test]
fn reset_copies_intro() {
    let mut e = Env::new(game(), Handicaps::ALL, 1).unwrap();
    let (obs, info) = e.reset(Some(5)).unwrap();
    assert_eq!(obs.narrative, "Welcome to tiny.");
    assert_eq!(obs.description, "Yard. It is a yard. There is a box here.");
    assert_eq!(info, ResetInfo { seed: 5, fixed: true });
}

#[test]
fn inconsistent_handicaps_rejected() {
    let h = Handicaps::ALL.without(Handicap::LoadSave);
    assert_eq!(Env::new(game(), h, 0).unwrap_err(), EnvError::InconsistentHandicaps);
}

#[test]
fn opening_and_taking() {
    let mut e = env();
    let r = e.step("open mailbox").unwrap();
    assert!(r.observation.contains("leaflet"));
    assert_eq!(r.reward, 0);
    assert!(r.world_changed);
    let r = e.step("take leaflet").unwrap();
    assert!(r.world_changed);
    assert_eq!(r.reward, 1);
    assert_eq!(r.score, 1);
}

#[test]
fn gibberish_is_inert() {
    let mut e = env();
    let h = e.state_hash();
    let r = e.step("fnord blah").unwrap();
    assert_eq!(r.parse, ParseOutcome::Unparseable);
    assert!(!r.world_changed && !r.valid);
    assert_eq!(r.moves, 0);
    assert_eq!(e.state_hash(), h);
}

#[test]
fn no_steps_after_done() {
    let mut e = env();
    for c in ["open mailbox", "take leaflet", "down"] {
        e.step(c).unwrap();
    }
    assert!(e.done());
    assert_eq!(e.step("up"), Err(EnvError::EpisodeOver));
}

#[test]
fn detectors() {
    let mut e = env();
    let snap = e.save().unwrap();
    e.step("look").unwrap();
    assert!(!e.world_changed(&snap, Detector::Tree).unwrap());
    assert!(!e.world_changed(&snap, Detector::Exact).unwrap());

    let r = e.step("ring bell").unwrap();
    assert!(!r.world_changed);
    assert!(r.exact_changed);
    assert!(!e.world_changed(&snap, Detector::Tree).unwrap());
    assert!(e.world_changed(&snap, Detector::Exact).unwrap());

    e.step("take box").unwrap();
    assert!(e.world_changed(&snap, Detector::Tree).unwrap());
}

#[test]
fn gating_does_not_depend_on_outcome() {
    let mut e = Env::new(game(), Handicaps::NONE, 0).unwrap();
    e.reset(None).unwrap();
    let miss = |h| Err::<(), _>(EnvError::MissingHandicap(h));
    assert_eq!(e.save().map(|_| ()), miss(Handicap::LoadSave));
    assert_eq!(e.templates().map(|_| ()), miss(Handicap::TemplatesVocab));
    assert_eq!(e.vocabulary().map(|_| ()), miss(Handicap::TemplatesVocab));
    assert_eq!(e.object_tree().map(|_| ()), miss(Handicap::ObjectTree));
    assert_eq!(e.gather_augmented_observation().map(|_| ()), miss(Handicap::LoadSave));
    assert_eq!(e.identify_valid_actions(&[]).map(|_| ()), miss(Handicap::ValidActionDetection));
    // still gated once the game is over
    for c in ["open mailbox", "take leaflet", "down"] {
        e.step(c).unwrap();
    }
    assert_eq!(e.identify_valid_actions(&[]).map(|_| ()), miss(Handicap::ValidActionDetection));
}

/// Brute force: fill every template with every ordered choice of words by
/// plain string substitution and run each on a cloned state.
fn oracle(state: &WorldState, templates: &[Template], words: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut surfaces = Vec::new();
    for t in templates {
        let parts: Vec<&str> = t.surface.split(' ').collect();
        let blanks = parts.iter().filter(|p| **p == "_").count();
        let fill = |fillers: &[&String]| {
            let mut k = 0;
            parts
                .iter()
                .map(|p| {
                    if *p == "_" {
                        k += 1;
                        fillers[k - 1].as_str()
                    } else {
                        p
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        match blanks {
            0 => surfaces.push(t.surface.clone()),
            1 => surfaces.extend(words.iter().map(|w| fill(&[w]))),
            _ => {
                for a in words {
                    for b in words {
                        if a != b {
                            surfaces.push(fill(&[a, b]));
                        }
                    }
                }
            }
        }
    }
    for s in surfaces {
        let mut probe = state.clone();
        if probe.step(&s).is_ok() && state_diff(state, &probe).tree_changed() {
            out.push(s);
        }
    }
    out.sort();
    out
}

fn sorted(set: &ValidActionSet) -> Vec<String> {
    let mut v: Vec<String> = set.surfaces().map(String::from).collect();
    v.sort();
    v
}

#[test]
fn valid_actions_match_oracle_and_restore() {
    let mut e = env();
    for cmd in ["", "open mailbox", "take box", "open box", "put box in mailbox", "down"] {
        if !cmd.is_empty() {
            e.step(cmd).unwrap();
        }
        let objs = e.interactive_objects();
        let before = e.state_hash();
        let y = e.identify_valid_actions(&objs).unwrap();
        assert_eq!(e.state_hash(), before, "after `{cmd}`");
        let expected = oracle(e.world_state().unwrap(), e.game().templates(), &objs);
        assert_eq!(sorted(&y), expected, "after `{cmd}`");
        // every listed action really changes the tree
        for a in &y.actions {
            let mut probe = e.clone();
            assert!(probe.step(&a.surface).unwrap().world_changed, "{}", a.surface);
        }
    }
}

#[test]
fn start_state_valid_actions() {
    let mut e = env();
    let objs = e.interactive_objects();
    assert_eq!(objs, names(&["bell", "box", "mailbox"]));
    let y = e.identify_valid_actions(&objs).unwrap();
    assert_eq!(sorted(&y), names(&["down", "open box", "open mailbox", "take all", "take box"]));
    assert!(!y.surfaces().any(|s| s == "ring bell"), "global-only change is missed");
    assert_eq!(e.valid_steps(), 0);
    assert_eq!(e.total_steps(), 0);
}

#[test]
fn nothing_to_do_yields_empty_set() {
    let mut def = tiny();
    def.exits.clear();
    def.grammar.retain(|r| r.id != "down" && r.id != "up");
    def.metadata.expected_template_count = 11;
    def.metadata.max_score = 1;
    def.score_rules.truncate(1);
    def.objects[2].attributes.remove(Attribute::Openable);
    def.objects[3].attributes.remove(Attribute::Takeable);
    def.objects[4].attributes = [Attribute::Fixed].into_iter().collect();
    let g = Arc::new(Game::new(def).unwrap());
    let mut e = Env::new(g, Handicaps::ALL, 0).unwrap();
    e.reset(Some(1)).unwrap();
    let objs = e.interactive_objects();
    assert_eq!(objs, names(&["bell", "box", "leaflet", "mailbox"]));
    assert!(e.identify_valid_actions(&objs).unwrap().is_empty());
}

#[test]
fn dedup_keeps_first_surface() {
    let mut e = env();
    let mut s = e.world_state().unwrap().clone();
    s.reparent(ObjectId(7), ObjectId(1)).unwrap();
    e.load(&s.snapshot()).unwrap();
    let objs = names(&["lamp", "lantern"]);
    let all = e.identify_valid_actions(&objs).unwrap();
    assert!(sorted(&all).contains(&"take lantern".to_string()));
    let mut e = e.with_dedup_by_diff(true);
    let d = e.identify_valid_actions(&objs).unwrap();
    let s = sorted(&d);
    assert!(s.contains(&"take lamp".to_string()));
    assert!(!s.contains(&"take lantern".to_string()));
    assert!(d.len() < all.len());
}

#[test]
fn augmented_observation_is_neutral() {
    let mut e = env();
    e.step("take box").unwrap();
    let (h, moves) = (e.state_hash(), e.world_state().unwrap().moves());
    let aug = e.gather_augmented_observation().unwrap();
    assert_eq!(e.state_hash(), h);
    assert_eq!(e.world_state().unwrap().moves(), moves);
    assert_eq!(aug.inventory, "You are carrying: a box.");
    assert_eq!(aug.prev_action, "take box");
    assert_eq!(aug.narrative, "Taken.");
    let mut scratch = e.clone();
    assert_eq!(aug.description, scratch.step("look").unwrap().observation);
}

#[test]
fn interactive_objects_in_dark() {
    let mut e = env();
    let mut s = e.world_state().unwrap().clone();
    s.reparent(ObjectId(7), ObjectId(9)).unwrap();
    s.reparent(ObjectId(9), ObjectId(2)).unwrap();
    e.load(&s.snapshot()).unwrap();
    assert_eq!(e.interactive_objects(), names(&["lamp"]));
}

#[test]
fn text_mode_noun_extraction() {
    let mut def = tiny();
    def.objects.insert(2, obj(20, &["table"], ObjectKind::Scenery, Some(2), &[]));
    def.objects.insert(3, obj(21, &["sack", "bag"], ObjectKind::Item, Some(20), &[Attribute::Takeable]));
    let g = Game::new(def).unwrap();
    let nouns = extract_nouns(&g, "On the table is a brown sack.");
    assert_eq!(nouns, names(&["sack", "table"]));

    let mut e = Env::new(game(), Handicaps::NONE, 0).unwrap();
    e.reset(None).unwrap();
    e.step("open mailbox").unwrap();
    assert_eq!(e.interactive_objects(), names(&["leaflet", "mailbox"]));
}

#[test]
fn invalid_commands_do_not_use_budget() {
    let mut e = env().with_limits(EpisodeLimits { valid_steps: 2, total_steps: None });
    e.reset(Some(1)).unwrap();
    for _ in 0..50 {
        assert!(!e.step("xyzzy").unwrap().valid);
        assert!(!e.step("take leaflet").unwrap().valid);
    }
    assert_eq!(e.valid_steps(), 0);
    assert!(!e.step("take box").unwrap().truncated);
    let r = e.step("drop box").unwrap();
    assert!(r.truncated && r.episode_over());
    assert_eq!(e.step("look"), Err(EnvError::EpisodeOver));
    e.reset(Some(1)).unwrap();
    assert!(!e.episode_over());
}

#[test]
fn total_step_cap() {
    let mut e = env().with_limits(EpisodeLimits { valid_steps: 100, total_steps: Some(3) });
    e.reset(Some(1)).unwrap();
    e.step("xyzzy").unwrap();
    e.step("xyzzy").unwrap();
    assert!(e.step("xyzzy").unwrap().truncated);
}
