//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::HashMap;
use std::f64::consts::{E, FRAC_PI_4};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use hazardforge::batch::{run_batch, summarize, BatchSpec, CellSummary};
use hazardforge::cell::clearance::analyze_clearance;
use hazardforge::cell::{SensorKind, BUILTIN_NAMES};
use hazardforge::geometry::{normalize_angle, segments_intersect, Segment, Vec2};
use hazardforge::human::{reach_contains, shoulder_center, substep_human};
use hazardforge::safety::{safety_index, step_reward, SafetyObservation};
use hazardforge::search::{replay, MctsEngine};
use hazardforge::trace::{trace_records, TraceRecord};
use hazardforge::world::EpisodeSpec;
use hazardforge::{
    builtin_scenario, enumerate_actions, init, search, step_action, Action, Algorithm, BendTarget, HumanParams,
    HumanState, Scenario, SearchConfig, SearchOutcome, WalkPrimitive,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const ALGORITHMS: [Algorithm; 3] = [Algorithm::Random, Algorithm::Mcts1, Algorithm::Mcts2];
const FLAWED: [&str; 3] = ["s1-scanner-width", "s2-elbow-bay", "s3-fence-gap"];
/// Opening left in the lower fence of s3.
const S3_GAP: (Vec2, Vec2) = (Vec2 { x: -3.2, y: -1.0 }, Vec2 { x: -1.2, y: -1.0 });

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn obs(d_hr: f64, v_r: f64, unsafe_state: bool) -> SafetyObservation {
    SafetyObservation {
        d_hr,
        v_r,
        contact: unsafe_state,
        unsafe_state,
    }
}

fn metric_exactness() -> Check {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    ensure(close(safety_index(0.0, 0.0), 1.0), "c_S(0,0) != 1")?;
    ensure(close(safety_index(1.0, 0.0), 2.0), "c_S(1,0) != 2")?;
    ensure(close(safety_index(2.0, 1.0), 5.0 / E), "c_S(2,1) != 5/e")?;
    for (d, v) in [(0.3, 0.0f64), (1.0, 0.7), (2.2, 1.5)] {
        let c = (d * d + 1.0) * (-v).exp();
        for k in 1..8 {
            ensure(
                close(step_reward(&obs(d, v, false), k, 8), 1.0 / c),
                "early reward != 1/c_S",
            )?;
        }
        ensure(
            close(step_reward(&obs(d, v, false), 8, 8), -c),
            "safe terminal reward != -c_S",
        )?;
    }
    ensure(
        close(step_reward(&obs(0.0, 1.5, true), 8, 8), 1.5f64.exp()),
        "unsafe terminal reward != 1/c_S",
    )?;
    Ok("closed forms match to 1e-9".into())
}

fn run_action(h: HumanState, a: Action, p: &HumanParams) -> Vec<HumanState> {
    let mut out = vec![h];
    for k in 0..4 {
        out.push(substep_human(out.last().unwrap(), a, 0.05, &[], k, 4, p));
    }
    out
}

fn kinematic_exactness() -> Check {
    let p = HumanParams::default();
    let h = HumanState::upright(Vec2::new(0.0, 0.0), 0.3);
    for bend in BendTarget::ALL {
        let end = *run_action(h, Action::new(WalkPrimitive::WalkForward, bend), &p)
            .last()
            .unwrap();
        let d = end.position.distance(h.position);
        ensure((d - 0.32).abs() <= 1e-12, format!("walk displaced {d}"))?;
    }
    for (walk, deg) in [
        (WalkPrimitive::TurnLeft45, 45.0),
        (WalkPrimitive::TurnLeft90, 90.0),
        (WalkPrimitive::TurnRight45, -45.0),
        (WalkPrimitive::TurnRight90, -90.0),
    ] {
        let end = *run_action(h, Action::new(walk, BendTarget::Upright), &p)
            .last()
            .unwrap();
        let turned = normalize_angle(end.heading - h.heading);
        ensure(
            (turned - deg * FRAC_PI_4 / 45.0).abs() <= 1e-12,
            format!("{walk:?} turned {turned}"),
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let mut s = HumanState::upright(Vec2::new(0.0, 0.0), 0.0);
        for _ in 0..8 {
            let a = Action::from_index(rng.gen_range(0..30)).unwrap();
            for st in run_action(s, a, &p) {
                ensure(
                    (0.0..=55.0).contains(&st.bend_forward) && st.bend_lateral.abs() <= 35.0,
                    format!("bend limits exceeded: {st:?}"),
                )?;
                s = st;
            }
        }
    }
    Ok("0.32 m walk, exact turns, bend limits over 10000 sequences".into())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut jobs = Vec::new();
    for name in BUILTIN_NAMES {
        for algo in ["random", "mcts1", "mcts2"] {
            for seed in 1..=5u64 {
                jobs.push((name, algo, seed));
            }
        }
    }
    let run = |name: &str, algo: &str, seed: u64, tag: &str| -> Result<(Vec<u8>, Option<Vec<u8>>), String> {
        let base = dir.path().join(format!("{name}-{algo}-{seed}-{tag}"));
        let (summary, trace) = (base.with_extension("json"), base.with_extension("jsonl"));
        let scenario = format!("builtin:{name}");
        let status = Command::new(env!("CARGO_BIN_EXE_hazardforge"))
            .args([
                "run",
                "--scenario",
                &scenario,
                "--algo",
                algo,
                "--seed",
                &seed.to_string(),
            ])
            .args(["--summary", summary.to_str().unwrap(), "--out", trace.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(
            status.status.success(),
            format!("{name} {algo} {seed}: exit {:?}", status.status.code()),
        )?;
        let read = |p: &Path| fs::read(p).ok();
        Ok((read(&summary).ok_or("summary missing")?, read(&trace)))
    };
    let mismatches: Vec<String> = jobs
        .par_iter()
        .map(|&(name, algo, seed)| -> Result<Option<String>, String> {
            let a = run(name, algo, seed, "a")?;
            let b = run(name, algo, seed, "b")?;
            Ok((a != b).then(|| format!("{name}/{algo}/{seed}")))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    ensure(mismatches.is_empty(), format!("outputs differ: {mismatches:?}"))?;
    Ok(format!("{} runs repeated byte-identically", jobs.len()))
}

/// All depth-2 sequences; returns those reaching an unsafe state, truncated at the unsafe step.
fn depth2_unsafe(sc: &Scenario) -> Result<Vec<Vec<Action>>, String> {
    let ep = EpisodeSpec::new(2);
    let s0 = init(sc);
    let mut found = Vec::new();
    for a in enumerate_actions() {
        let (s1, i1) = step_action(&s0, a, sc, &ep).map_err(|e| e.to_string())?;
        for b in enumerate_actions() {
            if i1.unsafe_hit {
                found.push(vec![a]);
                continue;
            }
            let (_, i2) = step_action(&s1, b, sc, &ep).map_err(|e| e.to_string())?;
            if i2.unsafe_hit {
                found.push(vec![a, b]);
            }
        }
    }
    found.sort();
    found.dedup();
    Ok(found)
}

fn searches(
    sc: &Scenario,
    template: SearchConfig,
    seeds: std::ops::RangeInclusive<u64>,
) -> Result<Vec<(Algorithm, u64, SearchOutcome)>, String> {
    let jobs: Vec<_> = ALGORITHMS
        .iter()
        .flat_map(|&a| seeds.clone().map(move |s| (a, s)))
        .collect();
    jobs.par_iter()
        .map(|&(algorithm, seed)| {
            let cfg = SearchConfig {
                algorithm,
                seed,
                ..template
            };
            search(sc, &cfg)
                .map(|o| (algorithm, seed, o))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn baseline_soundness() -> Check {
    let sc = builtin_scenario("safe-baseline").map_err(|e| e.to_string())?;
    let hits = depth2_unsafe(&sc)?;
    ensure(hits.is_empty(), format!("{} unsafe depth-2 sequences", hits.len()))?;
    for (a, seed, o) in searches(&sc, SearchConfig::new(Algorithm::Random, 0), 1..=10)? {
        ensure(!o.found, format!("{a} seed {seed} found a hazard"))?;
    }
    let report = analyze_clearance(&sc, 0.05);
    ensure(
        report.certifies(0.1),
        format!(
            "clearance margin {:.3} s, undetected contact {:?}",
            report.margin(),
            report.undetected_contact
        ),
    )?;
    Ok(format!(
        "900 sequences and 30 searches safe; time-to-contact margin {:.3} s",
        report.margin()
    ))
}

fn oracle_equivalence() -> Check {
    let sc = builtin_scenario("mini-cell").map_err(|e| e.to_string())?;
    let oracle = depth2_unsafe(&sc)?;
    ensure(!oracle.is_empty(), "oracle finds no unsafe sequence")?;
    let template = SearchConfig {
        episode_len: 2,
        ..SearchConfig::new(Algorithm::Mcts1, 0)
    };
    let mut found = 0;
    for seed in 1..=10 {
        let cfg = SearchConfig { seed, ..template };
        let o = search(&sc, &cfg).map_err(|e| e.to_string())?;
        if let Some(h) = &o.hazard_actions {
            found += 1;
            let steps = replay(&sc, h).map_err(|e| e.to_string())?;
            ensure(
                steps.last().is_some_and(|s| s.unsafe_hit),
                format!("seed {seed}: replay not unsafe"),
            )?;
            ensure(
                oracle.contains(h),
                format!("seed {seed}: hazard {h:?} unknown to the oracle"),
            )?;
        }
    }
    ensure(found >= 9, format!("MCTS1 found hazards in {found}/10 seeds"))?;
    Ok(format!("oracle: {} unsafe sequences; MCTS1 {found}/10", oracle.len()))
}

fn cell<'a>(s: &'a [CellSummary], scenario: &str, a: Algorithm) -> &'a CellSummary {
    s.iter()
        .find(|c| c.scenario == scenario && c.algorithm == a)
        .expect("cell present")
}

fn table_reproduction() -> Check {
    let scenarios = FLAWED
        .iter()
        .map(|n| builtin_scenario(n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let spec = BatchSpec {
        scenarios,
        algorithms: ALGORITHMS.to_vec(),
        seeds: (1..=10).collect(),
        config: SearchConfig::new(Algorithm::Random, 0),
    };
    let rows = run_batch(&spec).map_err(|e| e.to_string())?;
    let s = summarize(&rows, 200);
    println!("{}", hazardforge::batch::format_table(&s));
    let mut notes = Vec::new();
    for name in FLAWED {
        let r = cell(&s, name, Algorithm::Random);
        let m1 = cell(&s, name, Algorithm::Mcts1);
        let m2 = cell(&s, name, Algorithm::Mcts2);
        ensure(
            m1.successes >= 8 && m2.successes >= 8,
            format!("{name}: MCTS success below 8/10"),
        )?;
        ensure(
            r.successes <= m1.successes && r.successes <= m2.successes,
            format!("{name}: random beats MCTS"),
        )?;
        let ratio = m1.mean_episodes / r.mean_episodes;
        ensure(ratio <= 0.8, format!("{name}: MCTS1/random episode ratio {ratio:.2}"))?;
        notes.push(format!("{name} ratio {ratio:.2}"));
    }
    Ok(notes.join(", "))
}

fn unsafe_index(records: &[TraceRecord]) -> Option<usize> {
    records.iter().position(|r| r.unsafe_state)
}

fn sensor_fired(sc: &Scenario, r: &TraceRecord, scanner: bool) -> bool {
    sc.sensors
        .iter()
        .zip(&r.sensors)
        .any(|(s, rec)| rec.detected && matches!(s.kind, SensorKind::ScannerZone(_)) == scanner)
}

/// Torso or arm line to a reachable robot point passes through the s3 gap.
fn contact_through_gap(sc: &Scenario, r: &TraceRecord) -> bool {
    let h = HumanState {
        position: Vec2::new(r.human.x, r.human.y),
        heading: r.human.heading_rad,
        bend_forward: r.human.bend_fwd_deg,
        bend_lateral: r.human.bend_lat_deg,
    };
    let shoulder = shoulder_center(&h, &sc.human_params);
    let gap = Segment::new(S3_GAP.0, S3_GAP.1);
    r.robot.points.iter().any(|p| {
        let target = Vec2::new(p.x, p.y);
        reach_contains(&h, target, sc.occluders(), &sc.human_params)
            && (segments_intersect(&Segment::new(h.position, shoulder), &gap)
                || segments_intersect(&Segment::new(shoulder, target), &gap))
    })
}

fn hazard_semantics() -> Check {
    let mut counts = Vec::new();
    for name in FLAWED {
        let sc = builtin_scenario(name).map_err(|e| e.to_string())?;
        let mut n = 0;
        for (a, seed, o) in searches(&sc, SearchConfig::new(Algorithm::Random, 0), 1..=10)? {
            let Some(h) = &o.hazard_actions else { continue };
            let steps = replay(&sc, h).map_err(|e| e.to_string())?;
            let records = trace_records(&steps, &sc);
            let k = unsafe_index(&records).ok_or(format!("{name} {a} {seed}: no unsafe record"))?;
            let who = format!("{name} {a} seed {seed}");
            match name {
                "s1-scanner-width" => {
                    ensure(
                        records[..k].iter().any(|r| sensor_fired(&sc, r, true)),
                        format!("{who}: no scanner detection before contact"),
                    )?;
                    let v = records[k].v_r;
                    ensure(v > 0.0 && v <= sc.robot.nominal_speed, format!("{who}: v_r {v}"))?;
                }
                "s2-elbow-bay" => {
                    ensure(
                        records[..=k].iter().any(|r| sensor_fired(&sc, r, false)),
                        format!("{who}: no curtain crossing"),
                    )?;
                }
                _ => {
                    ensure(
                        contact_through_gap(&sc, &records[k]),
                        format!("{who}: contact not through the fence gap"),
                    )?;
                }
            }
            n += 1;
        }
        counts.push(format!("{name} {n}"));
    }
    Ok(format!("hazards checked: {}", counts.join(", ")))
}

fn tree_accounting() -> Check {
    let sc = builtin_scenario("s1-scanner-width").map_err(|e| e.to_string())?;
    let cfg = SearchConfig::new(Algorithm::Mcts1, 1);
    let mut engine = MctsEngine::new(&sc, &cfg).map_err(|e| e.to_string())?;
    let mut returns: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut root_backups = 0usize;
    for _ in 0..200 {
        let ep = engine.run_episode().map_err(|e| e.to_string())?;
        if let Some(&(node, action)) = ep.tree_path.first() {
            ensure(node == engine.root(), "path does not start at the root")?;
            root_backups += 1;
            returns.entry(action.index()).or_default().push(ep.result.return_value);
        }
    }
    let root = engine.node(engine.root());
    let sum: u32 = root.edges.iter().map(|e| e.visits).sum();
    ensure(
        sum as usize == root_backups,
        format!("sum N_a {sum} != backups {root_backups}"),
    )?;
    for e in &root.edges {
        let g = &returns[&e.action.index()];
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ensure(e.visits as usize == g.len(), "N_a differs from backup count")?;
        ensure(
            (e.q - mean).abs() <= 1e-12,
            format!("Q of {} off by {}", e.action, (e.q - mean).abs()),
        )?;
    }
    Ok(format!("{} root edges, {root_backups} backups", root.edges.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("metric exactness", metric_exactness),
        ("kinematic exactness", kinematic_exactness),
        ("determinism", determinism),
        ("safe-baseline soundness", baseline_soundness),
        ("oracle equivalence", oracle_equivalence),
        ("qualitative search comparison", table_reproduction),
        ("hazard semantics", hazard_semantics),
        ("tree accounting", tree_accounting),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        match check() {
            Ok(detail) => println!(
                "criterion {} {name}: PASS ({detail}) [{:.1}s]",
                i + 1,
                start.elapsed().as_secs_f64()
            ),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
