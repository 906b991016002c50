//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use baac::coordination::Tuple;
use baac::engine::{run, EngineConfig, Run};
use baac::expr::{ArithOp, Atom, CmpOp, Constraint, Expr};
use baac::lang::{load_settings, parse_theory, Domain, Mode, Strategy as Arbitration};
use baac::load::load_problem;
use baac::planner::{PlanError, PlanInput, Planner, PlannerConfig};
use baac::render::{render_grid, RenderHints};
use baac::semantics::{
    apply_transition, brute_force_plans, brute_force_set_plans, check_trajectory, collect_initial, eval_expr, holds,
    joint_effects, solve_effects, solve_exhaustive, ActionRef, Cons, FExpr, Fixture, Problem, Signature, State,
    Trajectory,
};
use baac::supervisor::{Reason, Supervisor};
use baac::trace::write_trace;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn domains() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../domains")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn compile(srcs: &[String]) -> Problem {
    let theories: Vec<_> = srcs.iter().map(|s| parse_theory(s).unwrap_or_else(|e| panic!("{e}\n{s}"))).collect();
    Problem::compile(&theories).unwrap_or_else(|e| panic!("{e}\n{}", srcs.join("\n---\n")))
}

fn load_domain(name: &str) -> (baac::lang::Settings, Problem) {
    let settings = load_settings(&domains().join(name).join("settings.txt")).unwrap();
    let problem = load_problem(&settings.theories).unwrap();
    (settings, problem)
}

// 1 -----------------------------------------------------------------------

fn rally() -> Outcome {
    let dir = domains().join("volley2v2");
    let text = std::fs::read_to_string(dir.join("rally.fixture")).map_err(|e| e.to_string())?;
    let fx = Fixture::parse(&text).map_err(|e| e.to_string())?;
    let problem = load_problem(&fx.theory_paths(&dir)).map_err(|e| e.to_string())?;
    let traj = fx.to_trajectory(&problem.sig).map_err(|e| e.to_string())?;
    ensure(fx.horizon == 9, || format!("horizon {}", fx.horizon))?;
    let throws: Vec<(usize, String)> = traj
        .actions
        .iter()
        .enumerate()
        .flat_map(|(i, set)| set.iter().filter(|a| a.action.starts_with("throw")).map(move |a| (i + 1, a.to_string())))
        .collect();
    let want = [
        (1, "black:throw_1_ne_3"),
        (3, "black:throw_2_se_3"),
        (5, "white:throw_1_w_5"),
        (7, "black:throw_1_e_5"),
    ];
    ensure(throws.iter().map(|(t, a)| (*t, a.as_str())).eq(want.iter().copied()), || format!("throws {throws:?}"))?;
    let report = check_trajectory(&problem, &traj, 9);
    ensure(report.is_valid(), || format!("{} violations: {:?}", report.violations.len(), report.violations))?;

    let (settings, _) = load_domain("volley2v2");
    let hints = RenderHints::from_map(&settings.render).map_err(|e| e.to_string())?;
    let states: Vec<BTreeMap<String, i64>> = fx.steps.iter().map(|s| s.state.iter().cloned().collect()).collect();
    let frames = render_grid(&hints, &states);
    let golden = std::fs::read_to_string(dir.join("rally.frames")).map_err(|e| e.to_string())?;
    ensure(frames == golden, || "frames differ from the golden rendering".into())?;
    Ok("0 violations, 4 throws, 10 frames".into())
}

// 2 -----------------------------------------------------------------------

fn guitar_run(problem: &Problem, settings: &baac::lang::Settings, n: usize) -> Run {
    let mut c = EngineConfig::from_settings(settings);
    c.horizon = n;
    run(problem, &c).expect("guitar run")
}

fn guitar() -> Outcome {
    let (settings, problem) = load_domain("guitar");
    let sig = &problem.sig;
    let guitars = sig.id("guitars").unwrap();
    let account = sig.id("seller_account").unwrap();
    // smallest horizon at which the goal is reached
    let mut found = None;
    for n in 1..=settings.horizon as usize + 2 {
        let r = guitar_run(&problem, &settings, n);
        ensure(r.report.is_valid(), || format!("N={n}: {:?}", r.report.violations))?;
        if r.trajectory.states.last().unwrap()[guitars] == 10 {
            found = Some(n);
            break;
        }
    }
    ensure(found == Some(settings.horizon as usize), || format!("minimal horizon {found:?}"))?;

    let r = guitar_run(&problem, &settings, settings.horizon as usize);
    ensure(r.all_succeeded(), || "some agent missed its goal".into())?;
    let gm = problem.agent("guitar_maker").unwrap();
    let kind = |index: usize| -> Option<i64> {
        let req = gm.requests.get(index)?;
        let wanted = sig.show(&req.wanted);
        if wanted.starts_with("strings") {
            Some(8)
        } else if wanted.starts_with("pickup") {
            Some(60)
        } else {
            None
        }
    };
    let mut fulfilled = 0;
    for (t, step) in r.steps.iter().enumerate() {
        let mut expect = 0;
        for a in &step.result.enabled {
            if let Some((_, index, _)) = a.help_parts() {
                expect += kind(index).unwrap_or(0);
            }
        }
        let got = r.trajectory.states[t + 1][account] - r.trajectory.states[t][account];
        ensure(got == expect, || format!("step {t}: account moved by {got}, expected {expect}"))?;
    }
    let events = r.steps.iter().flat_map(|s| &s.events).chain(&r.final_events);
    let mut total = 0;
    for e in events {
        if let Tuple::Fulfilled { id, requester, .. } = &e.tuple {
            if e.op == baac::coordination::Op::Out && requester == "guitar_maker" {
                fulfilled += 1;
                total += kind((id & 0xffff) as usize).unwrap_or(0);
            }
        }
    }
    let last = r.trajectory.states.last().unwrap()[account];
    ensure(total == last, || format!("fulfilled requests pay {total}, account holds {last}"))?;
    Ok(format!("guitars=10 at minimal N={}, {fulfilled} fulfilled requests, account {last}", settings.horizon))
}

// 3 -----------------------------------------------------------------------

fn conflict() -> Outcome {
    let (settings, problem) = load_domain("conflict");
    let f = problem.sig.id("f").unwrap();
    let a = ActionRef::new("a", "act_a");
    let b = ActionRef::new("b", "act_b");
    let c = ActionRef::new("c", "act_c");
    let outcome_failed = |r: &Run, agent: &str| {
        r.steps[0].events.iter().any(|e| {
            matches!(&e.tuple, Tuple::Outcome { time: 0, agent: x, success: false, .. } if x == agent)
        })
    };

    let mut cfg = EngineConfig::from_settings(&settings);
    cfg.mode = Mode::Supervisor;
    let r = run(&problem, &cfg).map_err(|e| e.to_string())?;
    let s0 = &r.steps[0].result;
    ensure(s0.inhibited.contains(&(c.clone(), Reason::Priority)), || format!("{:?}", s0.inhibited))?;
    ensure(s0.enabled == vec![a.clone()], || format!("enabled {:?}", s0.enabled))?;
    ensure(r.trajectory.states[1][f] == 1, || "f != 1 after step 0".into())?;
    ensure(s0.inhibited.contains(&(b.clone(), Reason::Arbitration)), || format!("{:?}", s0.inhibited))?;
    ensure(outcome_failed(&r, "b"), || "b got no failure outcome".into())?;

    cfg.mode = Mode::Negotiate;
    let r = run(&problem, &cfg).map_err(|e| e.to_string())?;
    let s0 = &r.steps[0].result;
    ensure(s0.inhibited.contains(&(c.clone(), Reason::Priority)), || format!("{:?}", s0.inhibited))?;
    ensure(s0.inhibited.contains(&(a.clone(), Reason::RetryAfter(2))), || format!("{:?}", s0.inhibited))?;
    ensure(s0.inhibited.contains(&(b.clone(), Reason::Forego)), || format!("{:?}", s0.inhibited))?;
    ensure(s0.enabled.is_empty(), || format!("enabled {:?}", s0.enabled))?;
    ensure(outcome_failed(&r, "a") && outcome_failed(&r, "b"), || "missing failure outcomes".into())?;
    let proposed = |t: usize| -> Vec<ActionRef> {
        r.steps[t].result.proposals.iter().find(|(x, _)| x == "a").map(|(_, v)| v.clone()).unwrap_or_default()
    };
    ensure(proposed(1).is_empty(), || format!("a proposed {:?} at 1", proposed(1)))?;
    ensure(proposed(2) == vec![a.clone()], || format!("a proposed {:?} at 2", proposed(2)))?;
    Ok("act_c filtered; supervisor enables act_a; negotiation: a retries at +2, b foregoes".into())
}

// random instances ----------------------------------------------------------

fn fluent_decls(n: usize, d: i64) -> String {
    (0..n).map(|k| format!("fluent f{k} valued 0..{}.\n", d - 1)).collect()
}

fn random_effect(rng: &mut ChaCha8Rng, n: usize, d: i64) -> String {
    let x = rng.gen_range(0..n);
    let y = rng.gen_range(0..n);
    let c = rng.gen_range(0..d);
    match rng.gen_range(0..5) {
        0 | 1 => format!("f{x} = {c}"),
        2 => format!("f{x} = f{y}@-1 + {}", rng.gen_range(-1..=1)),
        3 => format!("f{x} = {} - f{y}", rng.gen_range(0..d)),
        _ => format!("f{x} = f{y}"),
    }
}

fn random_goal(rng: &mut ChaCha8Rng, n: usize, d: i64) -> String {
    let x = rng.gen_range(0..n);
    let y = rng.gen_range(0..n);
    let c = rng.gen_range(0..d);
    match rng.gen_range(0..4) {
        0 => format!("f{x} = {c}"),
        1 => format!("f{x} > {}", c.min(d - 2)),
        2 => format!("f{x} + f{y} = {}", rng.gen_range(0..2 * d - 1)),
        _ => format!("f{x} != {c}"),
    }
}

fn random_cond(rng: &mut ChaCha8Rng, n: usize, d: i64) -> String {
    let x = rng.gen_range(0..n);
    let c = rng.gen_range(0..d);
    match rng.gen_range(0..4) {
        0 => "true".into(),
        1 => format!("f{x} = {c}"),
        2 => format!("f{x} < {}", c.max(1)),
        _ => format!("f{x} != {c}"),
    }
}

fn brute_consistent(problem: &Problem, seq: &[State], set: &[ActionRef]) -> bool {
    match joint_effects(problem, seq, set) {
        Ok(c) => solve_exhaustive(&problem.sig, seq, &c).is_some(),
        Err(_) => false,
    }
}

// 4 -----------------------------------------------------------------------

fn maximality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut conflicts = 0;
    for case in 0..200 {
        let n = rng.gen_range(1..=4);
        let d = rng.gen_range(2..=5);
        let k = rng.gen_range(1..=6);
        let mut srcs = Vec::new();
        for i in 0..k {
            let effects: Vec<String> = (0..rng.gen_range(1..=2)).map(|_| random_effect(&mut rng, n, d)).collect();
            srcs.push(format!(
                "agent g{i}.\n{}action x.\nexecutable x if true.\nx causes {}.\n",
                fluent_decls(n, d),
                effects.join(" and ")
            ));
        }
        let problem = compile(&srcs);
        let init = collect_initial(&problem).unwrap();
        let seq = vec![init];
        let acts: Vec<ActionRef> = (0..k).map(|i| ActionRef::new(format!("g{i}"), "x")).collect();
        let proposals: Vec<(String, Vec<ActionRef>)> = acts.iter().map(|a| (a.agent.clone(), vec![a.clone()])).collect();
        let mut sup = Supervisor::new(&problem, Arbitration::MaxSubset, Mode::Supervisor, case);
        let res = sup.step(&seq, &proposals).map_err(|e| e.to_string())?;
        if !res.conflicts.is_empty() {
            conflicts += 1;
        }
        let best = (0u32..1 << k)
            .filter(|mask| {
                let set: Vec<ActionRef> =
                    acts.iter().enumerate().filter(|(j, _)| mask & (1 << j) != 0).map(|(_, a)| a.clone()).collect();
                brute_consistent(&problem, &seq, &set)
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap_or(0);
        ensure(res.enabled.len() == best, || {
            format!("case {case}: enabled {} of max {best}\n{}", res.enabled.len(), srcs.join("---\n"))
        })?;
        ensure(brute_consistent(&problem, &seq, &res.enabled), || format!("case {case}: enabled set inconsistent"))?;
    }
    Ok(format!("200 instances, {conflicts} with conflicts"))
}

// 5 -----------------------------------------------------------------------

fn tiny_domain(rng: &mut ChaCha8Rng, n: usize, d: i64, k: usize) -> String {
    let mut s = format!("agent a.\n{}", fluent_decls(n, d));
    for j in 0..k {
        s += &format!("action x{j}.\nexecutable x{j} if {}.\n", random_cond(rng, n, d));
        let prec = if rng.gen_bool(0.3) { format!(" if {}", random_cond(rng, n, d)) } else { String::new() };
        s += &format!("x{j} causes {}{prec}.\n", random_effect(rng, n, d));
    }
    let goals: Vec<String> = (0..rng.gen_range(1..=2)).map(|_| random_goal(rng, n, d)).collect();
    s += &format!("goal {}.\n", goals.join(" and "));
    let init: Vec<String> = (0..n).map(|f| format!("f{f} = {}", rng.gen_range(0..d))).collect();
    s += &format!("initially {}.\n", init.join(" and "));
    if rng.gen_bool(0.15) {
        s += &format!("always {}.\n", random_cond(rng, n, d));
    }
    s
}

fn replay(problem: &Problem, init: &State, steps: &[Vec<ActionRef>], n: usize) -> Trajectory {
    let mut traj = Trajectory::new(init.clone());
    for t in 0..n {
        let acts = steps.get(t).cloned().unwrap_or_default();
        let next = apply_transition(problem, &traj.states, &acts).unwrap_or_else(|_| traj.states[t].clone());
        traj.push(acts, next);
    }
    traj
}

fn planner_case(src: &str, n: usize, sets: bool) -> Result<bool, String> {
    let problem = compile(&[src.to_string()]);
    let Ok(init) = collect_initial(&problem) else { return Ok(false) };
    let config = PlannerConfig { node_budget: u64::MAX, max_set_size: if sets { None } else { Some(1) } };
    let plan = Planner::new(&problem, "a", config).plan(&PlanInput {
        seq: std::slice::from_ref(&init),
        horizon: n,
        ..PlanInput::default()
    });
    let oracle = if sets { brute_force_set_plans(&problem, "a", &init, n) } else { brute_force_plans(&problem, "a", &init, n) }
        .map_err(|e| e.to_string())?;
    match plan {
        Ok(p) => {
            if oracle.is_empty() {
                return Err(format!("planner found {:?}, oracle none\nN={n}\n{src}", p.steps));
            }
            let traj = replay(&problem, &init, &p.steps, n);
            let report = check_trajectory(&problem, &traj, n);
            if !report.is_valid() || !report.success.iter().all(|(_, ok)| *ok) {
                return Err(format!("plan {:?} does not replay: {:?}\nN={n}\n{src}", p.steps, report));
            }
            Ok(true)
        }
        Err(PlanError::NoPlan) => {
            if !oracle.is_empty() {
                return Err(format!("planner found none, oracle {:?}\nN={n}\n{src}", oracle[0]));
            }
            Ok(false)
        }
        Err(e) => Err(format!("{e}\n{src}")),
    }
}

fn planner_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cases, mut solvable) = (0, 0);
    for n in 1..=3 {
        for d in 2..=4 {
            for k in 1..=4 {
                for horizon in 1..=4 {
                    for _ in 0..20 {
                        let src = tiny_domain(&mut rng, n, d, k);
                        cases += 1;
                        solvable += planner_case(&src, horizon, false)? as usize;
                        if k <= 3 {
                            cases += 1;
                            solvable += planner_case(&src, horizon, true)? as usize;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cases} instances, {solvable} solvable"))
}

// 6 -----------------------------------------------------------------------

const NF: usize = 3;
const DOM: i64 = 4;

fn sig() -> Signature {
    let mut s = Signature::new();
    for k in 0..NF {
        s.declare(&format!("f{k}"), Domain::Range(0, DOM - 1));
    }
    s
}

fn atom(back: u32) -> impl Strategy<Value = FExpr> {
    (0..NF, 0..=back).prop_map(|(fluent, back)| Expr::Fluent(Atom { fluent, back }))
}

fn expr(back: u32) -> impl Strategy<Value = FExpr> {
    let leaf = prop_oneof![(-3i64..6).prop_map(Expr::Lit), atom(back)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just(ArithOp::Add), Just(ArithOp::Sub), Just(ArithOp::Mul)], inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.prop_map(|a| Expr::Abs(Box::new(a))),
        ]
    })
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![Just(CmpOp::Eq), Just(CmpOp::Ne), Just(CmpOp::Lt), Just(CmpOp::Le), Just(CmpOp::Gt), Just(CmpOp::Ge)]
}

fn cons(back: u32) -> impl Strategy<Value = Cons> {
    let leaf = (cmp_op(), expr(back), expr(back)).prop_map(|(op, a, b)| Constraint::cmp(op, a, b));
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..3).prop_map(Constraint::And),
            prop::collection::vec(inner.clone(), 1..3).prop_map(Constraint::Or),
            inner.prop_map(Constraint::negate),
        ]
    })
}

/// `f = e` conjunctions, the shape action effects take.
fn effect(back: u32) -> impl Strategy<Value = Cons> {
    prop::collection::vec((0..NF, expr(back)), 1..3).prop_map(|eqs| {
        Constraint::And(eqs.into_iter().map(|(f, e)| Constraint::cmp(CmpOp::Eq, Expr::fluent(f), e)).collect())
    })
}

fn state() -> impl Strategy<Value = State> {
    prop::collection::vec(0..DOM, NF)
}

fn seq() -> impl Strategy<Value = Vec<State>> {
    prop::collection::vec(state(), 1..4)
}

fn property<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

/// A one-agent problem whose actions have the generated effects.
fn effect_problem(effects: &[Cons]) -> Problem {
    let s = sig();
    let mut src = format!("agent a.\n{}", fluent_decls(NF, DOM));
    for (j, e) in effects.iter().enumerate() {
        src += &format!("action x{j}.\nexecutable x{j} if true.\nx{j} causes {}.\n", s.show(e));
    }
    compile(&[src])
}

fn semantics() -> Outcome {
    let s = sig();
    property("empty set is the identity", (effect(1), seq()), |(c, seq)| {
        let p = effect_problem(&[c]);
        prop_assert_eq!(apply_transition(&p, &seq, &[]).ok(), Some(seq.last().unwrap().clone()));
        Ok(())
    })?;
    property("inertia", (prop::collection::vec(effect(1), 1..3), seq()), |(cs, seq)| {
        let p = effect_problem(&cs);
        let acts: Vec<ActionRef> = (0..cs.len()).map(|j| ActionRef::new("a", format!("x{j}"))).collect();
        if let Ok(next) = apply_transition(&p, &seq, &acts) {
            let touched = Constraint::all(cs.clone()).fluents();
            let last = seq.last().unwrap();
            for f in 0..NF {
                if !touched.contains(&f) {
                    prop_assert_eq!(next[f], last[f]);
                }
            }
            let tl = baac::semantics::Timeline::extended(&seq, &next);
            prop_assert!(cs.iter().all(|c| tl.satisfied_now(c)));
        }
        Ok(())
    })?;
    property("clamp", (seq(), 0..NF, 1u32..5, 0usize..4), |(seq, f, back, j)| {
        let j = j.min(seq.len() - 1);
        let v = eval_expr(&seq, j, &Expr::past(f, back)).unwrap();
        let want = if (j as i64) - (back as i64) < 0 { seq[0][f] } else { seq[j - back as usize][f] };
        prop_assert_eq!(v, want);
        Ok(())
    })?;
    property("rei agrees with holds", (cons(2), seq(), 0usize..4), |(c, seq, j)| {
        let j = j.min(seq.len() - 1);
        let r = eval_expr(&seq, j, &Expr::Rei(Box::new(c.clone())));
        if let Ok(h) = holds(&seq, j, &c) {
            prop_assert_eq!(r.ok(), Some(h as i64));
        }
        Ok(())
    })?;
    property("solver agrees with enumeration", (cons(1), seq()), |(c, seq)| {
        prop_assert_eq!(solve_effects(&s, &seq, &c), solve_exhaustive(&s, &seq, &c));
        Ok(())
    })?;
    Ok("5 properties x 1000 cases".into())
}

// 7 -----------------------------------------------------------------------

fn determinism() -> Outcome {
    let mut sizes = Vec::new();
    for name in ["guitar", "conflict", "volley1v1", "volley2v2"] {
        let (settings, problem) = load_domain(name);
        let mut config = EngineConfig::from_settings(&settings);
        config.deterministic = true;
        let theories: Vec<String> = settings.theories.iter().map(|p| p.display().to_string()).collect();
        let texts: Vec<String> = (0..2)
            .map(|_| {
                let r = run(&problem, &config).expect("run");
                write_trace(&problem.sig, &r, &theories, &settings.render)
            })
            .collect();
        ensure(texts[0] == texts[1], || format!("{name}: traces differ"))?;
        config.deterministic = false;
        let threaded = write_trace(&problem.sig, &run(&problem, &config).expect("run"), &theories, &settings.render);
        ensure(threaded == texts[0], || format!("{name}: threaded trace differs"))?;
        sizes.push(format!("{name} {}B", texts[0].len()));
    }
    Ok(sizes.join(", "))
}

// 8 -----------------------------------------------------------------------

fn negotiation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut max_turns = 0;
    for case in 0..300 {
        let k = rng.gen_range(2..=5);
        let mut srcs = Vec::new();
        let mut budget = 0;
        for i in 0..k {
            let mut opts = Vec::new();
            for _ in 0..rng.gen_range(0..=3) {
                let cond = if rng.gen_bool(0.3) { format!(" provided f < {}", rng.gen_range(0..3)) } else { String::new() };
                opts.push(match rng.gen_range(0..3) {
                    0 => format!(" on_conflict retry_after {}{cond}", rng.gen_range(1..4)),
                    1 => format!(" on_conflict forego{cond}"),
                    _ => " on_conflict arbitrate".to_string(),
                });
            }
            budget += opts.len();
            let value = rng.gen_range(0..4);
            srcs.push(format!(
                "agent g{i}.\nfluent f, g valued 0..3.\naction x{}.\nexecutable x if true.\nx causes f = {value}.\n",
                opts.concat()
            ));
        }
        let problem = compile(&srcs);
        let seq = vec![collect_initial(&problem).unwrap()];
        let proposals: Vec<(String, Vec<ActionRef>)> =
            (0..k).map(|i| (format!("g{i}"), vec![ActionRef::new(format!("g{i}"), "x")])).collect();
        let mut sup = Supervisor::new(&problem, Arbitration::MaxSubset, Mode::Negotiate, case);
        let res = sup.step(&seq, &proposals).map_err(|e| e.to_string())?;
        ensure(res.turns.len() <= budget, || format!("case {case}: {} turns for {budget} options", res.turns.len()))?;
        ensure(brute_consistent(&problem, &seq, &res.enabled), || format!("case {case}: inconsistent survivors"))?;
        max_turns = max_turns.max(res.turns.len());
    }
    Ok(format!("300 conflicts, at most {max_turns} turns"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("volleyball rally fixture", Duration::from_secs(1), rally),
        ("guitar end-to-end", Duration::from_secs(30), guitar),
        ("conflict micro-scenario", Duration::from_secs(1), conflict),
        ("arbitration maximality", Duration::from_secs(10), maximality),
        ("planner/oracle equivalence", Duration::from_secs(60), planner_oracle),
        ("semantics properties", Duration::from_secs(60), semantics),
        ("determinism", Duration::from_secs(10), determinism),
        ("negotiation termination", Duration::from_secs(10), negotiation),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let res = match res {
            Ok(_) if took > *limit => Err(format!("took {took:.2?}, limit {limit:?}")),
            r => r,
        };
        match res {
            Ok(detail) => println!("PASS {} {name}: {detail} ({took:.2?})", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} ({took:.2?})", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
