//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ifworld::games::{bundled, bundled_names};
use ifworld_core::agents::{
    AgentKind, BceTargets, Drrn, DrrnTransition, ObsTokens, ParamStore, PrioritizedReplay, ReplayConfig, Sequential, Tdqn,
    TdqnAction, TdqnTransition, Tokenizer, TrainConfig, Trainer,
};
use ifworld_core::bench::{compute_normalized_completion, reference, Aggregation};
use ifworld_core::env::{Detector, EpisodeLimits, Env, Handicaps, Transcript, TranscriptStep};
use ifworld_core::grammar::{enumerate_candidates, free_form_space_size, template_upper_bound, PairMode};
use ifworld_core::rng::SplitMix64;
use ifworld_core::world::{Game, ObjectId, WorldState};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn env_for(game: &Arc<Game>, seed: u64) -> Env {
    let mut env = Env::new(game.clone(), Handicaps::ALL, seed).unwrap();
    env.reset(Some(seed)).unwrap();
    env
}

// 1 ------------------------------------------------------------------------

fn action_space() -> Outcome {
    let t0 = Instant::now();
    let zork = template_upper_bound(237, 697).unwrap();
    let desk = template_upper_bound(200, 700).unwrap();
    let free = free_form_space_size(700, 4).unwrap();
    let took = t0.elapsed();
    let detail = format!("237x697^2 = {zork}, 200x700^2 = {desk}, 700^4 = {free}, {took:?}");
    check(
        zork == 115_131_933 && desk == 98_000_000 && free == 240_100_000_000 && took < Duration::from_millis(1),
        detail.clone(),
        format!("{detail}; expected 115131933, 98000000, 240100000000"),
    )
}

// 2 ------------------------------------------------------------------------

/// Parent and attributes of every object.
fn tree_signature(s: &WorldState) -> Vec<(Option<ObjectId>, Option<u16>)> {
    s.game().def().objects.iter().map(|o| (s.parent_of(o.id), s.attributes(o.id).map(|a| a.bits()))).collect()
}

fn fillings(surface: &str, objects: &[String]) -> Vec<String> {
    let mut out = vec![String::new()];
    for (i, w) in surface.split(' ').enumerate() {
        let sep = if i == 0 { "" } else { " " };
        out = if w == "_" {
            out.iter().flat_map(|p| objects.iter().map(move |o| format!("{p}{sep}{o}"))).collect()
        } else {
            out.iter().map(|p| format!("{p}{sep}{w}")).collect()
        };
    }
    out
}

/// Every filling (same-object pairs included) that is accepted and moves
/// or re-flags some object, found by stepping a fresh copy each time.
fn oracle_valid(state: &WorldState, objects: &[String]) -> BTreeSet<String> {
    let before = tree_signature(state);
    let mut out = BTreeSet::new();
    for t in state.game().templates() {
        for cmd in fillings(&t.surface, objects) {
            let mut s = state.clone();
            if matches!(s.step(&cmd), Ok(o) if o.accepted) && tree_signature(&s) != before {
                out.insert(cmd);
            }
        }
    }
    out
}

fn algorithm_matches(env: &mut Env) -> Result<(), String> {
    let objects = env.interactive_objects();
    let got: BTreeSet<String> = env.identify_valid_actions(&objects).unwrap().surfaces().map(String::from).collect();
    let want = oracle_valid(env.world_state().unwrap(), &objects);
    if got == want {
        Ok(())
    } else {
        Err(format!(
            "missing {:?}, extra {:?}",
            want.difference(&got).collect::<Vec<_>>(),
            got.difference(&want).collect::<Vec<_>>()
        ))
    }
}

fn oracle_equivalence() -> Outcome {
    let mut slowest = Duration::ZERO;
    let mut states = 0;
    for name in bundled_names() {
        let game = bundled(name).unwrap();
        let t0 = Instant::now();
        let mut rng = SplitMix64::new(0xA11);
        let mut env = env_for(&game, 1);
        algorithm_matches(&mut env).map_err(|e| format!("{name} start: {e}"))?;
        states += 1;
        for k in 0..20 {
            let mut env = env_for(&game, k);
            let walk = 1 + rng.below(12);
            for _ in 0..walk {
                let objects = env.interactive_objects();
                let options: Vec<String> = oracle_valid(env.world_state().unwrap(), &objects).into_iter().collect();
                if options.is_empty() || env.episode_over() {
                    break;
                }
                env.step(&options[rng.below(options.len())]).unwrap();
                if env.episode_over() {
                    env.reset(Some(k)).unwrap();
                }
            }
            algorithm_matches(&mut env).map_err(|e| format!("{name} state {k}: {e}"))?;
            states += 1;
        }
        slowest = slowest.max(t0.elapsed());
    }
    check(
        slowest < Duration::from_secs(2),
        format!("{states} states over 5 games equal the brute-force set; slowest game {slowest:?}"),
        format!("sets equal but slowest game took {slowest:?}"),
    )
}

// 3 ------------------------------------------------------------------------

fn false_negative() -> Outcome {
    let game = bundled("mailhouse").unwrap();
    let mut env = env_for(&game, 0);
    env.step("north").unwrap();
    let objects = env.interactive_objects();
    let in_tree_set = env.identify_valid_actions(&objects).unwrap().surfaces().any(|a| a == "ring bell");
    let before = env.save().unwrap();
    let r = env.step("ring bell").unwrap();
    let tree = env.world_changed(&before, Detector::Tree).unwrap();
    let exact = env.world_changed(&before, Detector::Exact).unwrap();
    check(
        r.parse.is_resolved() && !in_tree_set && !tree && exact && r.valid,
        "`ring bell` is parsed, changes only a global, is absent from the tree-channel set and detected exactly".into(),
        format!("resolved {}, in tree set {in_tree_set}, tree {tree}, exact {exact}", r.parse.is_resolved()),
    )
}

// 4 ------------------------------------------------------------------------

/// Random template fillings over interactive objects and vocabulary words.
fn random_command(env: &Env, rng: &mut SplitMix64) -> String {
    let game = env.game();
    let t = &game.templates()[rng.below(game.templates().len())];
    let objects = env.interactive_objects();
    let words = game.vocabulary().words();
    t.surface
        .split(' ')
        .map(|w| {
            if w != "_" {
                w.to_string()
            } else if !objects.is_empty() && rng.below(2) == 0 {
                objects[rng.below(objects.len())].clone()
            } else {
                words[rng.below(words.len())].clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_transcript(game: &Arc<Game>, seed: u64, steps: usize) -> String {
    let mut rng = SplitMix64::new(seed);
    let mut env = Env::new(game.clone(), Handicaps::ALL, seed).unwrap();
    let (obs, _) = env.reset(Some(rng.next_u64())).unwrap();
    let mut pending = obs.narrative;
    let mut tr = Transcript::new();
    for _ in 0..steps {
        let cmd = random_command(&env, &mut rng);
        let r = env.step(&cmd).unwrap();
        tr.push(TranscriptStep {
            observation: std::mem::replace(&mut pending, r.observation.clone()),
            action: cmd,
            reward: r.reward,
            score: r.score,
            done: r.done,
            ..Default::default()
        });
        if r.episode_over() {
            pending = env.reset(Some(rng.next_u64())).unwrap().0.narrative;
        }
    }
    tr.render()
}

fn determinism() -> Outcome {
    for name in bundled_names() {
        let game = bundled(name).unwrap();
        let (a, b) = (random_transcript(&game, 42, 1000), random_transcript(&game, 42, 1000));
        if a != b {
            return Err(format!("{name}: transcripts differ"));
        }
        if a.lines().filter(|l| l.starts_with("Action")).count() != 1000 {
            return Err(format!("{name}: transcript does not have 1000 steps"));
        }

        let unlimited = EpisodeLimits { valid_steps: u32::MAX, total_steps: None };
        let mut rng = SplitMix64::new(7);
        let mut env = Env::new(game.clone(), Handicaps::ALL, 3).unwrap().with_limits(unlimited);
        env.reset(Some(3)).unwrap();
        for _ in 0..40 {
            let cmd = random_command(&env, &mut rng);
            env.step(&cmd).unwrap();
            if env.episode_over() {
                env.reset(Some(3)).unwrap();
            }
        }
        let snap = env.save().unwrap();
        let mut twin = Env::new(game.clone(), Handicaps::ALL, 99).unwrap().with_limits(unlimited);
        twin.reset(Some(3)).unwrap();
        twin.load(&snap).unwrap();
        for _ in 0..200 {
            if env.episode_over() {
                break;
            }
            let cmd = random_command(&env, &mut rng);
            let (x, y) = (env.step(&cmd).unwrap(), twin.step(&cmd).unwrap());
            if x != y || env.state_hash() != twin.state_hash() {
                return Err(format!("{name}: restored copy diverged at `{cmd}`"));
            }
            if env.episode_over() {
                break;
            }
            let h = env.state_hash();
            let objects = env.interactive_objects();
            env.identify_valid_actions(&objects).unwrap();
            env.gather_augmented_observation().unwrap();
            if env.state_hash() != h {
                return Err(format!("{name}: probing changed the state hash"));
            }
        }
    }
    Ok("1000-step transcripts identical, restored copies continue identically, probes keep the hash (5 games)".into())
}

// 5 ------------------------------------------------------------------------

const FD_H: f64 = 1e-4;
const FD_FLOOR: f64 = 1e-8;
const VOCAB: usize = 10;

fn rand_tokens(rng: &mut SplitMix64, n: usize) -> Vec<u32> {
    (0..n).map(|_| rng.below(VOCAB) as u32).collect()
}

fn rand_obs(rng: &mut SplitMix64) -> ObsTokens {
    ObsTokens {
        narrative: rand_tokens(rng, 3),
        inventory: rand_tokens(rng, 2),
        description: rand_tokens(rng, 4),
        prev_action: rand_tokens(rng, 2),
    }
}

/// Largest relative error between `analytic` and central differences of
/// `f` over every parameter.
fn max_rel_error(mut params: Vec<f64>, analytic: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let x = params[i];
        params[i] = x + FD_H;
        let up = f(&params);
        params[i] = x - FD_H;
        let down = f(&params);
        params[i] = x;
        let numeric = (up - down) / (2.0 * FD_H);
        let denom = analytic[i].abs().max(numeric.abs()).max(FD_FLOOR);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

fn gradients() -> Outcome {
    let t0 = Instant::now();
    let mut report = Vec::new();
    for seed in [11, 12, 13] {
        let mut rng = SplitMix64::new(seed);
        let mut p = ParamStore::new();
        let drrn = Drrn::new(&mut p, VOCAB, 3, 4, &mut rng);
        let target = p.data.iter().map(|x| x * 0.5).collect::<Vec<_>>();
        let batch: Vec<DrrnTransition> = (0..3)
            .map(|i| DrrnTransition {
                obs: rand_obs(&mut rng),
                action: rand_tokens(&mut rng, 2),
                reward: rng.uniform(-1.0, 2.0),
                next_obs: rand_obs(&mut rng),
                next_actions: vec![rand_tokens(&mut rng, 2), rand_tokens(&mut rng, 1)],
                done: i == 1,
            })
            .collect();
        let refs: Vec<&DrrnTransition> = batch.iter().collect();
        let w = [0.5, 1.0, 0.8];
        let mut g = p.zeros_like();
        drrn.loss_and_grad(&p.data, &target, &refs, &w, 0.9, &mut g);
        let e = max_rel_error(p.data.clone(), &g, |d| drrn.loss(d, &target, &refs, &w, 0.9).loss);
        report.push(("drrn", seed, e));

        let (nt, nw) = (5, 7);
        let mut q = ParamStore::new();
        let tdqn = Tdqn::new(&mut q, VOCAB, nt, nw, 3, 4, &mut rng);
        let target = q.data.iter().map(|x| x * 0.5).collect::<Vec<_>>();
        let acts = [
            TdqnAction { template: 1, p1: None, p2: None },
            TdqnAction { template: 4, p1: Some(2), p2: Some(6) },
            TdqnAction { template: 0, p1: Some(5), p2: None },
        ];
        let batch: Vec<TdqnTransition> = acts
            .iter()
            .enumerate()
            .map(|(i, a)| TdqnTransition {
                obs: rand_obs(&mut rng),
                action: *a,
                reward: rng.uniform(-1.0, 2.0),
                next_obs: rand_obs(&mut rng),
                done: i == 2,
                targets: BceTargets { templates: vec![1, 4], p1: vec![2, 5], p2: vec![6] },
            })
            .collect();
        let refs: Vec<&TdqnTransition> = batch.iter().collect();
        let w = [1.0, 0.3, 0.6];
        let mut g = q.zeros_like();
        tdqn.loss_and_grad(&q.data, &target, &refs, &w, 0.9, 0.5, &mut g);
        let e = max_rel_error(q.data.clone(), &g, |d| tdqn.loss(d, &target, &refs, &w, 0.9, 0.5).total);
        report.push(("tdqn", seed, e));
    }
    let took = t0.elapsed();
    let worst = report.iter().map(|r| r.2).fold(0.0, f64::max);
    let detail = format!("worst relative error {worst:.2e} over 3 inits of each agent, {took:.1?}");
    check(worst < 1e-4 && took < Duration::from_secs(60), detail.clone(), format!("{detail}: {report:?}"))
}

// 6 ------------------------------------------------------------------------

fn learn(game: &Arc<Game>, kind: AgentKind, steps: u64, goal: f64) -> (f64, Vec<f64>) {
    let scores: Vec<f64> = (0..5)
        .map(|seed| {
            let cfg = TrainConfig {
                seed,
                env_steps: steps,
                stop_at_score: Some(goal),
                embed_dim: 8,
                hidden: 16,
                env_count: 4,
                learning_starts: 64,
                ..TrainConfig::default()
            };
            let mut t = Trainer::new(game.clone(), kind, cfg).unwrap();
            t.train(&mut Sequential, &mut |_| {}).unwrap().final_score()
        })
        .collect();
    (scores.iter().sum::<f64>() / scores.len() as f64, scores)
}

fn learning() -> Outcome {
    let t0 = Instant::now();
    let game = bundled("mailhouse").unwrap();
    let max = game.max_score() as f64;
    let (drrn, ds) = learn(&game, AgentKind::Drrn, 20_000, 0.9 * max);
    let (tdqn, ts) = learn(&game, AgentKind::Tdqn, 100_000, 0.5 * max);
    let (rand, rs) = learn(&game, AgentKind::Random, 20_000, 0.25 * max);
    let took = t0.elapsed();
    let detail = format!(
        "mean final score of 5 seeds: drrn {:.0}% {ds:.2?}, tdqn {:.0}% {ts:.2?}, random {:.0}% {rs:.2?}; {took:.0?}",
        100.0 * drrn / max,
        100.0 * tdqn / max,
        100.0 * rand / max
    );
    check(
        drrn >= 0.9 * max && tdqn >= 0.5 * max && rand < 0.25 * max && took < Duration::from_secs(15 * 60),
        detail.clone(),
        detail,
    )
}

// 7 ------------------------------------------------------------------------

fn metric() -> Outcome {
    let rand = compute_normalized_completion(&reference::rows(|g| g.random), Aggregation::default()).unwrap();
    let drrn = compute_normalized_completion(&reference::rows(|g| g.drrn), Aggregation::default()).unwrap();
    let drrn_raw = compute_normalized_completion(&reference::rows(|g| g.drrn), Aggregation::RAW).unwrap();
    let detail = format!("random {rand:.3}%, drrn {drrn:.3}% (clip negatives), drrn {drrn_raw:.3}% (raw)");
    check((rand - 1.8).abs() <= 0.1 && (drrn - 10.7).abs() <= 1.0, detail.clone(), detail)
}

// 8 ------------------------------------------------------------------------

fn chi_square_p(replay: &PrioritizedReplay<usize>, expected: &[f64], draws: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut counts = vec![0usize; expected.len()];
    for _ in 0..draws / 10 {
        for i in replay.sample(10, 0.4, &mut rng).unwrap().indices {
            counts[i] += 1;
        }
    }
    let stat: f64 = counts
        .iter()
        .zip(expected)
        .map(|(&c, &p)| {
            let e = p * draws as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new((expected.len() - 1) as f64).unwrap().cdf(stat)
}

fn replay_statistics() -> Outcome {
    let priorities = [0.05, 0.3, 1.0, 2.0, 0.7, 4.0, 1.5, 0.2, 3.0, 0.9, 0.4, 2.5];
    let mut results = Vec::new();
    for (alpha, seed) in [(0.6, 1), (0.0, 2)] {
        let cfg = ReplayConfig { capacity: 16, alpha, ..ReplayConfig::default() };
        let mut r = PrioritizedReplay::new(cfg);
        for (i, &p) in priorities.iter().enumerate() {
            r.push_with_priority(i, p);
        }
        let weights: Vec<f64> = priorities.iter().map(|p: &f64| p.powf(alpha)).collect();
        let total: f64 = weights.iter().sum();
        let expected: Vec<f64> = weights.iter().map(|w| w / total).collect();
        results.push((alpha, chi_square_p(&r, &expected, 100_000, seed)));
    }
    let detail = format!("chi-square p over 1e5 draws: alpha 0.6 -> {:.3}, alpha 0 (uniform) -> {:.3}", results[0].1, results[1].1);
    check(results.iter().all(|r| r.1 > 0.01), detail.clone(), detail)
}

// 9 ------------------------------------------------------------------------

fn episode_protocol() -> Outcome {
    let game = bundled("mailhouse").unwrap();
    let mut env = env_for(&game, 0);
    for cmd in ["xyzzy", "take unicorn", "look", "inventory", "examine mailbox", "south", "close mailbox"].iter().cycle().take(700) {
        env.step(cmd).unwrap();
    }
    if env.valid_steps() != 0 || env.episode_over() {
        return Err(format!("{} invalid commands used {} valid steps", env.total_steps(), env.valid_steps()));
    }
    for name in bundled_names() {
        let game = bundled(name).unwrap();
        let mut env = env_for(&game, 0);
        let mut ret = 0;
        for cmd in &game.def().walkthrough {
            ret += env.step(cmd).unwrap().reward;
        }
        if ret != env.score() || env.score() != game.max_score() || !env.done() {
            return Err(format!("{name}: return {ret}, score {}, done {}", env.score(), env.done()));
        }
    }
    Ok("700 invalid commands used no budget; walkthrough returns equal final scores on all 5 games".into())
}

// 10 -----------------------------------------------------------------------

/// Template index and fillers of `cmd`, by matching it word for word
/// against template surfaces.
fn parse_against(surfaces: &[&str], cmd: &str) -> (usize, Vec<String>) {
    let words: Vec<&str> = cmd.split(' ').collect();
    for (i, s) in surfaces.iter().enumerate() {
        let pat: Vec<&str> = s.split(' ').collect();
        if pat.len() == words.len() && pat.iter().zip(&words).all(|(p, w)| *p == "_" || p == w) {
            let fillers = pat.iter().zip(&words).filter(|(p, _)| **p == "_").map(|(_, w)| w.to_string()).collect();
            return (i, fillers);
        }
    }
    panic!("`{cmd}` matches no template");
}

fn tdqn_loss_composition() -> Outcome {
    let game = bundled("mailhouse").unwrap();
    let templates = game.templates();
    let vocab = game.vocabulary();
    let surfaces: Vec<&str> = templates.iter().map(|t| t.surface.as_str()).collect();
    let valid = ["open door", "south", "put coin in mailbox", "take coin", "ring bell"];

    let (nt, nw) = (templates.len(), vocab.len());
    let mut want = [vec![0.0; nt], vec![0.0; nw], vec![0.0; nw]];
    for cmd in valid {
        let (t, fillers) = parse_against(&surfaces, cmd);
        want[0][t] = 1.0;
        for (k, f) in fillers.iter().enumerate() {
            want[k + 1][vocab.words().iter().position(|w| w == f).unwrap()] = 1.0;
        }
    }
    let objects: Vec<String> = ["door", "coin", "mailbox", "bell"].map(String::from).to_vec();
    let candidates: Vec<_> = enumerate_candidates(templates, &objects, PairMode::Distinct)
        .into_iter()
        .filter(|c| valid.contains(&c.surface.as_str()))
        .collect();
    if candidates.len() != valid.len() {
        return Err(format!("only {} of the hand-written actions were enumerated", candidates.len()));
    }
    let targets = BceTargets::from_valid(vocab, &candidates);
    if targets.dense(nt, nw) != want {
        return Err(format!("multi-hot targets differ: {targets:?}"));
    }

    let tok = Tokenizer::for_game(&game, 16);
    let mut rng = SplitMix64::new(3);
    let mut p = ParamStore::new();
    let m = Tdqn::new(&mut p, tok.len(), nt, nw, 6, 8, &mut rng);
    let enc = |s: &str| ObsTokens { narrative: tok.encode(s), inventory: tok.encode("empty"), description: tok.encode(s), prev_action: vec![] };
    let batch: Vec<TdqnTransition> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (t, f) = parse_against(&surfaces, &c.surface);
            let idx = |k: usize| f.get(k).map(|w| vocab.index_of(w).unwrap());
            TdqnTransition {
                obs: enc("porch door bell"),
                action: TdqnAction { template: t, p1: idx(0), p2: idx(1) },
                reward: i as f64,
                next_obs: enc("hall coin"),
                done: i == 0,
                targets: targets.clone(),
            }
        })
        .collect();
    let refs: Vec<&TdqnTransition> = batch.iter().collect();
    let w = vec![1.0; refs.len()];
    let l = m.loss(&p.data, &p.data, &refs, &w, 0.9, 0.5);
    let gap = (l.total - (0.5 * l.td + 0.5 * l.bce)).abs();
    check(
        gap <= 1e-10 && l.td > 0.0 && l.bce > 0.0,
        format!("total {:.6} = 0.5*{:.6} + 0.5*{:.6} (gap {gap:.1e}); multi-hot targets match", l.total, l.td, l.bce),
        format!("gap {gap:e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("action-space arithmetic", action_space),
        ("valid-action oracle equivalence", oracle_equivalence),
        ("tree-channel false negative", false_negative),
        ("determinism and round-trip", determinism),
        ("gradient checks", gradients),
        ("learning on the trivial game", learning),
        ("normalized completion", metric),
        ("replay statistics", replay_statistics),
        ("episode protocol", episode_protocol),
        ("TDQN loss composition", tdqn_loss_composition),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let r = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match r {
            Ok(d) => println!("criterion {n:>2} PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
