//! Leader election, must-success and step existence on concrete networks.

use std::collections::BTreeSet;

use crate::canon::{canonical, CanonicalForm};
use crate::error::CheckError;
use crate::execution::{explore, Execution, Exploration};
use crate::name::Name;
use crate::semantics::{tau_transitions, transitions, Transition};
use crate::syntax::{bound_names, free_names, Process};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// A replayable execution violating the property.
    Fails(Execution),
    /// A bound was hit before the property could be decided.
    Unknown(String),
}

impl Verdict {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    AnyLabel,
    TauOnly,
}

fn component_count(term: &Process) -> usize {
    term.strip_restrictions().1.components().len()
}

fn check_channels(term: &Process, chans: &[&Name], expected: usize) -> Result<(), CheckError> {
    let bn = bound_names(term);
    if let Some(c) = chans.iter().find(|c| bn.contains(**c)) {
        return Err(CheckError::ChannelBound((*c).clone()));
    }
    let found = component_count(term);
    if found != expected {
        return Err(CheckError::ComponentCount { expected, found });
    }
    Ok(())
}

/// Outputs on `chans` per component: `(component, channel, datum)`.
fn outputs(e: &Execution, chans: &[&Name]) -> Vec<(usize, Name, Name)> {
    e.steps
        .iter()
        .filter(|t| t.label.is_output())
        .filter_map(|t| {
            let subj = t.label.subject()?;
            let actor = t.single_actor()?;
            chans
                .contains(&subj)
                .then(|| (actor, subj.clone(), t.label.object().unwrap().clone()))
        })
        .collect()
}

/// Judges each explored execution; cycles count as failures only if their
/// prefix already violates the property.
fn judge(
    execs: Vec<Execution>,
    ok_final: impl Fn(&Execution) -> bool,
    ok_prefix: impl Fn(&Execution) -> bool,
) -> Verdict {
    let mut unknown: Option<String> = None;
    for e in execs {
        if e.maximal {
            if !ok_final(&e) {
                return Verdict::Fails(e);
            }
        } else if !ok_prefix(&e) {
            return Verdict::Fails(e);
        } else if e.truncated {
            unknown.get_or_insert_with(|| format!("depth bound {} reached", e.len()));
        } else {
            unknown.get_or_insert_with(|| "divergent execution".to_string());
        }
    }
    match unknown {
        Some(why) => Verdict::Unknown(why),
        None => Verdict::Holds,
    }
}

/// Every maximal closed-world execution has each component output exactly once,
/// on `leader` or `slave`, with exactly one leader.
pub fn solves_leader_election_bouge(
    term: &Process,
    leader: &Name,
    slave: &Name,
    components: usize,
    max_depth: usize,
) -> Result<Verdict, CheckError> {
    check_channels(term, &[leader, slave], components)?;
    let obs: BTreeSet<Name> = [leader.clone(), slave.clone()].into_iter().collect();
    let execs = explore(term, max_depth, &Exploration::Closed(obs))?;
    let chans = [leader, slave];
    let counts = |e: &Execution| {
        let mut per = vec![0usize; components];
        let mut leaders = 0;
        for (c, ch, _) in outputs(e, &chans) {
            if c < components {
                per[c] += 1;
            }
            if &ch == leader {
                leaders += 1;
            }
        }
        (per, leaders)
    };
    Ok(judge(
        execs,
        |e| {
            let (per, leaders) = counts(e);
            per.iter().all(|&k| k == 1) && leaders == 1
        },
        |e| {
            let (per, leaders) = counts(e);
            per.iter().all(|&k| k <= 1) && leaders <= 1
        },
    ))
}

/// Every maximal closed-world execution has each component output exactly
/// once on `out`, all with the same datum.
pub fn solves_leader_election_indexed(
    term: &Process,
    out: &Name,
    components: usize,
    max_depth: usize,
) -> Result<Verdict, CheckError> {
    check_channels(term, &[out], components)?;
    let obs: BTreeSet<Name> = [out.clone()].into_iter().collect();
    let execs = explore(term, max_depth, &Exploration::Closed(obs))?;
    let summary = |e: &Execution| {
        let mut per = vec![0usize; components];
        let mut data = BTreeSet::new();
        for (c, _, d) in outputs(e, &[out]) {
            if c < components {
                per[c] += 1;
            }
            data.insert(d);
        }
        (per, data.len())
    };
    Ok(judge(
        execs,
        |e| {
            let (per, distinct) = summary(e);
            per.iter().all(|&k| k == 1) && distinct == 1
        },
        |e| {
            let (per, distinct) = summary(e);
            per.iter().all(|&k| k <= 1) && distinct <= 1
        },
    ))
}

/// Every maximal τ-execution passes through a state with a top-level `check`.
/// A τ-cycle avoiding success is a failure.
pub fn must_succeed(term: &Process, max_depth: usize) -> Result<Verdict, CheckError> {
    let mut st = MustState { initial: term.clone(), good: BTreeSet::new(), unknown: None };
    let mut path = vec![canonical(term)];
    let mut steps = Vec::new();
    if let Some(fail) = st.dfs(term, max_depth, &mut path, &mut steps)? {
        return Ok(Verdict::Fails(fail));
    }
    Ok(match st.unknown {
        Some(why) => Verdict::Unknown(why),
        None => Verdict::Holds,
    })
}

struct MustState {
    initial: Process,
    /// States all of whose τ-executions succeed.
    good: BTreeSet<CanonicalForm>,
    unknown: Option<String>,
}

impl MustState {
    fn witness(&self, steps: &[Transition], maximal: bool, cycle: bool) -> Execution {
        Execution {
            initial: self.initial.clone(),
            steps: steps.to_vec(),
            maximal,
            truncated: false,
            cycle,
        }
    }

    /// Returns a failing execution if one exists below the bound.
    fn dfs(
        &mut self,
        cur: &Process,
        max_depth: usize,
        path: &mut Vec<CanonicalForm>,
        steps: &mut Vec<Transition>,
    ) -> Result<Option<Execution>, CheckError> {
        let here = path.last().unwrap().clone();
        if here.has_top_success() || self.good.contains(&here) {
            return Ok(None);
        }
        let next = tau_transitions(cur)?;
        if next.is_empty() {
            return Ok(Some(self.witness(steps, true, false)));
        }
        if steps.len() >= max_depth {
            self.unknown.get_or_insert_with(|| format!("depth bound {max_depth} reached"));
            return Ok(None);
        }
        let unknown_before = self.unknown.is_some();
        for t in next {
            let c = canonical(&t.target);
            let target = t.target.clone();
            steps.push(t);
            if path.contains(&c) {
                return Ok(Some(self.witness(steps, false, true)));
            }
            path.push(c);
            let r = self.dfs(&target, max_depth, path, steps)?;
            path.pop();
            if r.is_some() {
                return Ok(r);
            }
            steps.pop();
        }
        if !unknown_before && self.unknown.is_none() {
            self.good.insert(here);
        }
        Ok(None)
    }
}

/// Existence of a step: any transition (inputs over the free names plus a
/// witness) or only τ-steps.
pub fn can_step(term: &Process, mode: StepMode) -> Result<bool, CheckError> {
    Ok(match mode {
        StepMode::AnyLabel => !transitions(term, &free_names(term))?.is_empty(),
        StepMode::TauOnly => !tau_transitions(term)?.is_empty(),
    })
}

/// Labels of an execution, for reports.
pub fn label_strings(e: &Execution) -> Vec<String> {
    e.steps.iter().map(|t| t.label.to_string()).collect::<Vec<_>>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    const V1: &str = "a?() . slave! . 0 + a! . leader! . 0";

    #[test]
    fn bouge_examples() {
        let p = parse(V1).unwrap();
        let pp = parse(&format!("({V1}) | ({V1})")).unwrap();
        let v = solves_leader_election_bouge(&pp, &n("leader"), &n("slave"), 2, 32).unwrap();
        assert!(v.is_holds(), "{v:?}");
        let v = solves_leader_election_bouge(&p, &n("leader"), &n("slave"), 1, 32).unwrap();
        assert!(v.is_fails());
        let two = parse("leader! . 0 | leader! . 0").unwrap();
        assert!(solves_leader_election_bouge(&two, &n("leader"), &n("slave"), 2, 32)
            .unwrap()
            .is_fails());
        let bound = parse("new leader . leader! . 0").unwrap();
        assert_eq!(
            solves_leader_election_bouge(&bound, &n("leader"), &n("slave"), 1, 32),
            Err(CheckError::ChannelBound(n("leader")))
        );
    }

    #[test]
    fn indexed_examples() {
        let net1 = parse(
            "(x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0) | (y! . 0 | y?() . out!1 . 0 + x?() . out!2 . 0)",
        )
        .unwrap();
        assert!(solves_leader_election_indexed(&net1, &n("out"), 2, 32).unwrap().is_holds());
        let bad = parse("out!1 . 0 | out!2 . 0").unwrap();
        assert!(solves_leader_election_indexed(&bad, &n("out"), 2, 32).unwrap().is_fails());
        let mixed = parse("new x,y . (x! . out!1 . 0 + y?() . out!2 . 0 | y! . out!2 . 0 + x?() . out!1 . 0)").unwrap();
        assert!(solves_leader_election_indexed(&mixed, &n("out"), 2, 32).unwrap().is_holds());
    }

    #[test]
    fn must_succeed_examples() {
        let p = parse("a?() . 0 + a! . check").unwrap();
        let pp = parse("(a?() . 0 + a! . check) | (a?() . 0 + a! . check)").unwrap();
        assert!(must_succeed(&pp, 32).unwrap().is_holds());
        assert!(must_succeed(&p, 32).unwrap().is_fails());
        assert!(must_succeed(&Process::Success, 32).unwrap().is_holds());
        let div = parse("new c . (c! . 0 | !c?() . c! . 0)").unwrap();
        // Each unfolding leaves a `0` behind, so no state repeats.
        assert!(matches!(must_succeed(&div, 8).unwrap(), Verdict::Unknown(_)));
        let deep = parse("tau . tau . tau . check").unwrap();
        assert!(matches!(must_succeed(&deep, 2).unwrap(), Verdict::Unknown(_)));
    }

    #[test]
    fn can_step_examples() {
        let p = parse("a?() . 0 + a! . 0").unwrap();
        let pp = parse("(a?() . 0 + a! . 0) | (a?() . 0 + a! . 0)").unwrap();
        assert!(!can_step(&p, StepMode::TauOnly).unwrap());
        assert!(can_step(&pp, StepMode::TauOnly).unwrap());
        assert!(can_step(&p, StepMode::AnyLabel).unwrap());
        assert!(!can_step(&Process::nil(), StepMode::AnyLabel).unwrap());
        assert!(!can_step(&Process::nil(), StepMode::TauOnly).unwrap());
    }
}
