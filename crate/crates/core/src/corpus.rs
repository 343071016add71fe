//! The acceptance corpus: each criterion as a self-contained check.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::canon::{canonical, congruent, CanonicalForm};
use crate::checkers::{can_step, must_succeed, solves_leader_election_bouge, solves_leader_election_indexed, StepMode};
use crate::confluence::{check_local_confluence, check_local_confluence_unchecked};
use crate::execution::{enumerate_executions, DEFAULT_MAX_DEPTH};
use crate::gen::Gen;
use crate::label::Label;
use crate::name::Name;
use crate::parse::parse;
use crate::semantics::transitions;
use crate::subst::{Substitution, SymmetryRelation};
use crate::symexec::{has_symmetric_execution, subdivide, symmetric_execution, validate, SearchVerdict};
use crate::symmetry::{build, is_symmetric, SymmetricNetwork};
use crate::syntax::{free_names, Process};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u8, title: &'static str, outcome: Result<String, String>) -> Self {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        CriterionResult { id, title, passed, detail }
    }
}

pub const MIXED_NET: &str = "new x,y . (x! . 1! . 0 + y?() . 2! . 0 | y! . 2! . 0 + x?() . 1! . 0)";
pub const NETWORK_ONE: &str = "x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0";
pub const V1: &str = "a?() . slave! . 0 + a! . leader! . 0";
pub const V2: &str = "a?() . 0 + a! . check";
pub const V3: &str = "a?() . 0 + a! . 0";

const SEED: u64 = 0x5eed;

fn n(s: &str) -> Name {
    Name::new(s)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p(src: &str) -> Result<Process, String> {
    parse(src).map_err(|e| e.to_string())
}

fn pair(src: &str) -> Result<Process, String> {
    p(&format!("({src}) | ({src})"))
}

pub fn titles() -> [(u8, &'static str); 10] {
    [
        (1, "mixed-choice counterexample"),
        (2, "separate networks have symmetric executions"),
        (3, "bound-output round"),
        (4, "network (1)"),
        (5, "leader election, leader/slave"),
        (6, "must-succeed"),
        (7, "tau step existence"),
        (8, "local confluence"),
        (9, "subdivision"),
        (10, "equivariance"),
    ]
}

pub fn run(id: u8) -> Option<CriterionResult> {
    let outcome = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => return None,
    };
    let title = titles()[(id - 1) as usize].1;
    Some(CriterionResult::new(id, title, outcome))
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=10).filter_map(run).collect()
}

fn criterion_1() -> Result<String, String> {
    let term = p(MIXED_NET)?;
    let obs: BTreeSet<Name> = [n("1"), n("2")].into_iter().collect();
    let ex = enumerate_executions(&term, DEFAULT_MAX_DEPTH, Some(&obs)).map_err(|e| e.to_string())?;
    ensure(ex.iter().all(|e| e.maximal), || "non-maximal execution".into())?;
    let mut seqs: Vec<String> = ex
        .iter()
        .map(|e| e.labels().iter().map(Label::to_string).collect::<Vec<_>>().join(" "))
        .collect();
    seqs.sort();
    ensure(seqs == ["tau 1! 1!", "tau 2! 2!"], || format!("executions {seqs:?}"))?;
    let sigma = SymmetryRelation::new("x>y,y>x,1>2,2>1".parse().map_err(|e| format!("{e}"))?, 2)
        .map_err(|e| e.to_string())?;
    let net = SymmetricNetwork::new(p("x! . 1! . 0 + y?() . 2! . 0")?, sigma, vec![n("x"), n("y")])
        .map_err(|e| e.to_string())?;
    match has_symmetric_execution(&net, 16) {
        SearchVerdict::No => Ok(format!("executions {seqs:?}; no symmetric execution")),
        other => Err(format!("search returned {other:?}")),
    }
}

fn criterion_2() -> Result<String, String> {
    let mut g = Gen::new(SEED);
    let mut total = 0;
    let mut complete = 0;
    for degree in [2, 3] {
        for _ in 0..200 {
            let net = g.network(12, degree);
            total += 1;
            let ex = symmetric_execution(&net, 16).map_err(|e| format!("{net}: {e}"))?;
            validate(&ex).map_err(|e| format!("{net}: {e}"))?;
            ensure(ex.complete || ex.rounds.len() >= 16, || format!("{net}: short prefix"))?;
            complete += ex.complete as usize;
        }
    }
    Ok(format!("{total} networks, {complete} complete, 0 failures"))
}

fn criterion_3() -> Result<String, String> {
    let (net, _) = build(p("new x . a!x . x! . 0")?, SymmetryRelation::identity(2), vec![])
        .map_err(|e| e.to_string())?;
    let ex = symmetric_execution(&net, 8).map_err(|e| e.to_string())?;
    validate(&ex)?;
    let r = ex.rounds.first().ok_or("no round")?;
    let labels: Vec<String> = r.labels.iter().map(Label::to_string).collect();
    ensure(labels == ["a!(x)", "a!(x'1)"], || format!("labels {labels:?}"))?;
    let sigma = r.sigma().perm().to_string();
    ensure(sigma == "x>x'1,x'1>x", || format!("sigma {sigma}"))?;
    let fin = r.network.denote();
    ensure(congruent(&fin, &p("x! . 0 | x'1! . 0")?), || format!("final {fin}"))?;
    Ok(format!("labels {labels:?}, sigma {sigma}, term {fin}"))
}

fn criterion_4() -> Result<String, String> {
    let sigma = SymmetryRelation::new("x>y,y>x".parse().map_err(|e| format!("{e}"))?, 2).map_err(|e| e.to_string())?;
    let (net, term) = build(p(NETWORK_ONE)?, sigma.clone(), vec![]).map_err(|e| e.to_string())?;
    ensure(is_symmetric(&term, &sigma, &[]), || "not symmetric".into())?;
    let v = solves_leader_election_indexed(&term, &n("out"), 2, DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
    ensure(v.is_holds(), || format!("indexed election: {v:?}"))?;
    let ex = symmetric_execution(&net, 16).map_err(|e| e.to_string())?;
    validate(&ex)?;
    ensure(ex.complete, || "incomplete".into())?;
    let rounds: Vec<Vec<String>> =
        ex.rounds.iter().map(|r| r.labels.iter().map(Label::to_string).collect()).collect();
    let first_tau = rounds.first().is_some_and(|r| r.iter().all(|l| l == "tau"));
    let rest_out = rounds.len() > 1
        && rounds[1..].iter().all(|r| r.iter().all(|l| l.starts_with("out!")));
    ensure(first_tau && rest_out, || format!("rounds {rounds:?}"))?;
    Ok(format!("indexed election holds; rounds {rounds:?}"))
}

fn criterion_5() -> Result<String, String> {
    let (l, s) = (n("leader"), n("slave"));
    let two = solves_leader_election_bouge(&pair(V1)?, &l, &s, 2, DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
    let one = solves_leader_election_bouge(&p(V1)?, &l, &s, 1, DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
    ensure(two.is_holds() && one.is_fails(), || format!("P|P {}, P {}", two.name(), one.name()))?;
    Ok("P|P holds, P fails".into())
}

fn criterion_6() -> Result<String, String> {
    let two = must_succeed(&pair(V2)?, DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
    let one = must_succeed(&p(V2)?, DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
    ensure(two.is_holds() && one.is_fails(), || format!("P|P {}, P {}", two.name(), one.name()))?;
    Ok("P|P holds, P fails".into())
}

fn criterion_7() -> Result<String, String> {
    let one = can_step(&p(V3)?, StepMode::TauOnly).map_err(|e| e.to_string())?;
    let two = can_step(&pair(V3)?, StepMode::TauOnly).map_err(|e| e.to_string())?;
    ensure(!one && two, || format!("P {one}, P|P {two}"))?;
    Ok("P cannot step, P|P can".into())
}

fn criterion_8() -> Result<String, String> {
    let mut g = Gen::new(SEED ^ 8);
    let mut checked = 0;
    let mut tries = 0;
    while checked < 200 {
        tries += 1;
        ensure(tries < 200_000, || format!("only {checked} suitable terms"))?;
        let t = g.sep_process(12);
        let u = free_names(&t);
        let ts = transitions(&t, &u).map_err(|e| e.to_string())?;
        if !(ts.iter().any(|t| t.label.is_output()) && ts.iter().any(|t| t.label.is_input())) {
            continue;
        }
        checked += 1;
        let v = check_local_confluence(&t, &u).map_err(|e| format!("{t}: {e}"))?;
        ensure(v.holds(), || format!("{t}: {v:?}"))?;
    }
    let w = p(V3)?;
    let v = check_local_confluence_unchecked(&w, &free_names(&w)).map_err(|e| e.to_string())?;
    ensure(!v.holds(), || "mixed witness is confluent".into())?;
    Ok(format!("{checked} terms confluent; mixed witness refuted"))
}

/// Matches labels modulo a consistent renaming of names outside `fixed`,
/// allowing a bound output against its free variant.
struct Matcher<'a> {
    fixed: &'a BTreeSet<Name>,
    map: BTreeMap<Name, Name>,
}

impl Matcher<'_> {
    fn name(&self, a: &Name, b: &Name, trial: &mut BTreeMap<Name, Name>) -> bool {
        if let Some(m) = self.map.get(a).or_else(|| trial.get(a)) {
            return m == b;
        }
        if a == b || (!self.fixed.contains(a) && !self.fixed.contains(b)) {
            trial.insert(a.clone(), b.clone());
            return true;
        }
        false
    }

    fn label(&mut self, a: &Label, b: &Label) -> bool {
        let kinds = a.kind_rank() == b.kind_rank() || (a.is_output() && b.is_output());
        if !kinds {
            return false;
        }
        let mut trial = BTreeMap::new();
        let ok = match (a.subject(), b.subject()) {
            (Some(s), Some(t)) => {
                self.name(s, t, &mut trial) && self.name(a.object().unwrap(), b.object().unwrap(), &mut trial)
            }
            (None, None) => true,
            _ => false,
        };
        if ok {
            self.map.extend(trial);
        }
        ok
    }
}

fn criterion_9() -> Result<String, String> {
    let mut g = Gen::new(SEED ^ 9);
    let mut done = 0;
    let mut rounds = 0;
    while done < 50 {
        let base = g.sep_process(12);
        let (net, term) = build(base, SymmetryRelation::identity(2), vec![]).map_err(|e| e.to_string())?;
        let ex = symmetric_execution(&net, 16).map_err(|e| format!("{net}: {e}"))?;
        if ex.rounds.is_empty() {
            continue;
        }
        let sub = subdivide(&ex, 1).map_err(|e| format!("{net}: {e}"))?;
        validate(&sub).map_err(|e| format!("{net}: replay: {e}"))?;
        let fixed = free_names(&term);
        let mut m = Matcher { fixed: &fixed, map: BTreeMap::new() };
        ensure(sub.rounds.len() == ex.rounds.len(), || format!("{net}: round count"))?;
        for (s, r) in sub.rounds.iter().zip(&ex.rounds) {
            for l in &s.labels {
                ensure(r.labels.iter().any(|x| m.label(l, x)), || {
                    format!("{net}: label {l} not in round {:?}", r.labels)
                })?;
            }
        }
        rounds += ex.rounds.len();
        done += 1;
    }
    Ok(format!("{done} executions ({rounds} rounds) subdivided and replayed"))
}

type Step = (Label, CanonicalForm);

/// Transitions as (label, target) with bound-output objects closed and renamed.
fn normalized(p: &Process, universe: &BTreeSet<Name>) -> Result<BTreeSet<Step>, String> {
    let ts = transitions(p, universe).map_err(|e| e.to_string())?;
    Ok(ts
        .into_iter()
        .map(|t| match &t.label {
            Label::BoundOutput { subject, object } => (
                Label::BoundOutput { subject: subject.clone(), object: n("_b") },
                canonical(&Process::res(object.clone(), t.target.clone())),
            ),
            l => (l.clone(), canonical(&t.target)),
        })
        .collect())
}

fn criterion_10() -> Result<String, String> {
    let mut g = Gen::new(SEED ^ 10);
    let mut pairs = 0;
    let mut steps = 0;
    while pairs < 500 {
        let t = g.sep_process(12);
        let s: Substitution = g.renaming(&t);
        let u = free_names(&t);
        let before = normalized(&t, &u)?;
        let image: BTreeSet<Step> = transitions(&t, &u)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|tr| {
                let lab = s.apply_label(&tr.label);
                match &lab {
                    Label::BoundOutput { subject, object } => (
                        Label::BoundOutput { subject: subject.clone(), object: n("_b") },
                        canonical(&s.apply(&Process::res(object.clone(), tr.target.clone()))),
                    ),
                    _ => (lab.clone(), canonical(&s.apply(&tr.target))),
                }
            })
            .collect();
        let renamed = s.apply(&t);
        let su: BTreeSet<Name> = u.iter().map(|x| s.get(x)).collect();
        let after = normalized(&renamed, &su)?;
        ensure(image == after, || format!("{t} under {s}: transition sets differ"))?;
        steps += before.len();
        pairs += 1;
    }
    Ok(format!("{pairs} pairs, {steps} transitions, 0 mismatches"))
}
