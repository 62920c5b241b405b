use std::sync::Arc;

use ifworld_core::bench::{compute_normalized_completion, Aggregation, Row};
use ifworld_core::env::{Env, Handicap, Handicaps};
use ifworld_core::grammar::{action_space_size, template_upper_bound};
use ifworld_core::world::{verify_walkthrough, Game, GameDef, WorldState};
use proptest::prelude::*;

fn mailhouse() -> Arc<Game> {
    let def: GameDef = serde_json::from_str(include_str!("../../../games/mailhouse.game.json")).unwrap();
    Arc::new(Game::new(def).unwrap())
}

const COMMANDS: [&str; 14] = [
    "north", "south", "east", "west", "open door", "close door", "open mailbox", "take leaflet", "read leaflet",
    "take coin", "drop coin", "take cake", "eat cake", "ring bell",
];

#[test]
fn walkthrough_and_definition_round_trip() {
    let g = mailhouse();
    let r = verify_walkthrough(&g, 0).unwrap();
    assert_eq!(r.final_score, 5);
    let json = serde_json::to_string(g.def()).unwrap();
    let back: GameDef = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, g.def());
}

#[test]
fn gated_accessors_need_handicaps() {
    let g = mailhouse();
    let env = Env::new(g.clone(), Handicaps::NONE.with(Handicap::FixedSeed), 0).unwrap();
    assert!(env.templates().is_err());
    assert!(env.save().is_err());
    assert!(Env::new(g, Handicaps::NONE.with(Handicap::ValidActionDetection), 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshots_restore_exactly(cmds in prop::collection::vec(0..COMMANDS.len(), 0..30), seed in any::<u64>()) {
        let g = mailhouse();
        let mut s = WorldState::new(g.clone(), seed);
        for c in &cmds {
            if s.done() { break; }
            s.step(COMMANDS[*c]).unwrap();
        }
        let back = WorldState::restore(&g, &s.snapshot()).unwrap();
        prop_assert_eq!(back.state_hash(), s.state_hash());
        prop_assert_eq!(back.snapshot(), s.snapshot());
    }

    #[test]
    fn valid_actions_change_the_tree(cmds in prop::collection::vec(0..COMMANDS.len(), 0..12)) {
        let g = mailhouse();
        let mut env = Env::new(g, Handicaps::ALL, 1).unwrap();
        env.reset(Some(1)).unwrap();
        for c in &cmds {
            if env.episode_over() { break; }
            env.step(COMMANDS[*c]).unwrap();
        }
        prop_assume!(!env.episode_over());
        let objects = env.interactive_objects();
        let valid = env.identify_valid_actions(&objects).unwrap();
        for a in valid.surfaces() {
            let mut probe = env.clone();
            let before = probe.save().unwrap();
            probe.step(a).unwrap();
            prop_assert!(probe.world_changed(&before, ifworld_core::env::Detector::Tree).unwrap(), "{}", a);
        }
    }

    #[test]
    fn upper_bound_is_exact_product(t in 0u64..5000, n in 0u64..100_000) {
        prop_assert_eq!(template_upper_bound(t, n).unwrap(), t as u128 * n as u128 * n as u128);
    }

    #[test]
    fn completion_is_a_percentage(scores in prop::collection::vec((-50.0f64..400.0, 1.0f64..400.0), 1..40)) {
        let rows: Vec<Row> = scores.iter().map(|&(s, m)| Row::new(s.min(m), m)).collect();
        let v = compute_normalized_completion(&rows, Aggregation::default()).unwrap();
        prop_assert!((0.0..=100.0).contains(&v));
    }
}

#[test]
fn exact_space_is_below_bound() {
    let g = mailhouse();
    let s = action_space_size(g.templates(), g.vocabulary().len() as u64).unwrap();
    assert!(s.exact <= s.upper_bound);
}
