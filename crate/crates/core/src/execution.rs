//! Executions and bounded exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};

use crate::canon::{canonical, CanonicalForm};
use crate::error::SemanticsError;
use crate::label::Label;
use crate::name::Name;
use crate::semantics::{transitions_with, StepOptions, Transition};
use crate::subst::Substitution;
use crate::syntax::{free_names, Process};

pub const DEFAULT_MAX_DEPTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub initial: Process,
    pub steps: Vec<Transition>,
    /// No step is possible from the final term.
    pub maximal: bool,
    /// The depth bound stopped exploration.
    pub truncated: bool,
    /// The last step revisits a state already on the path (up to congruence).
    pub cycle: bool,
}

impl Execution {
    pub fn final_term(&self) -> &Process {
        self.steps.last().map_or(&self.initial, |t| &t.target)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.steps.iter().map(|t| t.label.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Label sequence and final state with bound-output objects renamed to
    /// `_b0, _b1, …` in order of extrusion.
    pub fn signature(&self) -> (Vec<Label>, CanonicalForm, bool, bool, bool) {
        let mut map = BTreeMap::new();
        for t in &self.steps {
            if let Label::BoundOutput { object, .. } = &t.label {
                let k = map.len();
                map.entry(object.clone()).or_insert_with(|| Name::new(format!("_b{k}")));
            }
        }
        let s = Substitution::from_pairs(map);
        let labels = self.steps.iter().map(|t| s.apply_label(&t.label)).collect();
        let fin = canonical(&s.apply(self.final_term()));
        (labels, fin, self.maximal, self.truncated, self.cycle)
    }
}

/// Which steps an exploration follows.
#[derive(Debug, Clone)]
pub enum Exploration {
    /// Every transition; inputs range over the free names of the initial term
    /// and of the current state, plus a witness.
    Open,
    /// Closed world: τ-steps and outputs on the given channels only.
    Closed(BTreeSet<Name>),
    /// τ-steps only.
    TauOnly,
}

impl Exploration {
    pub fn from_observables(observables: Option<&BTreeSet<Name>>) -> Self {
        match observables {
            Some(o) => Exploration::Closed(o.clone()),
            None => Exploration::Open,
        }
    }

    pub fn steps(&self, p: &Process, base: &BTreeSet<Name>) -> Result<Vec<Transition>, SemanticsError> {
        match self {
            Exploration::Open => {
                let mut u = base.clone();
                u.extend(free_names(p));
                transitions_with(p, &StepOptions::universe(u))
            }
            Exploration::Closed(obs) => Ok(transitions_with(p, &StepOptions::default())?
                .into_iter()
                .filter(|t| match &t.label {
                    Label::Tau => true,
                    l if l.is_output() => obs.contains(l.subject().unwrap()),
                    _ => false,
                })
                .collect()),
            Exploration::TauOnly => Ok(transitions_with(p, &StepOptions::default())?
                .into_iter()
                .filter(|t| t.label.is_tau())
                .collect()),
        }
    }
}

/// All executions of `term` up to `max_depth` steps, modulo congruence.
///
/// Paths stop when no step is possible (maximal), at the bound (truncated)
/// or when a state repeats on the current path (cycle).
pub fn enumerate_executions(
    term: &Process,
    max_depth: usize,
    observables: Option<&BTreeSet<Name>>,
) -> Result<Vec<Execution>, SemanticsError> {
    explore(term, max_depth, &Exploration::from_observables(observables))
}

pub fn explore(term: &Process, max_depth: usize, mode: &Exploration) -> Result<Vec<Execution>, SemanticsError> {
    let base = free_names(term);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut path = vec![canonical(term)];
    let mut steps = Vec::new();
    dfs(term, term, &base, max_depth, mode, &mut path, &mut steps, &mut out, &mut seen)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    initial: &Process,
    cur: &Process,
    base: &BTreeSet<Name>,
    max_depth: usize,
    mode: &Exploration,
    path: &mut Vec<CanonicalForm>,
    steps: &mut Vec<Transition>,
    out: &mut Vec<Execution>,
    seen: &mut BTreeSet<(Vec<Label>, CanonicalForm, bool, bool, bool)>,
) -> Result<(), SemanticsError> {
    let mut record = |steps: &Vec<Transition>, maximal, truncated, cycle| {
        let e = Execution { initial: initial.clone(), steps: steps.clone(), maximal, truncated, cycle };
        if seen.insert(e.signature()) {
            out.push(e);
        }
    };
    let next = mode.steps(cur, base)?;
    if next.is_empty() {
        record(steps, true, false, false);
        return Ok(());
    }
    if steps.len() >= max_depth {
        record(steps, false, true, false);
        return Ok(());
    }
    for t in next {
        let c = canonical(&t.target);
        let target = t.target.clone();
        steps.push(t);
        if path.contains(&c) {
            let e = Execution {
                initial: initial.clone(),
                steps: steps.clone(),
                maximal: false,
                truncated: false,
                cycle: true,
            };
            if seen.insert(e.signature()) {
                out.push(e);
            }
        } else {
            path.push(c);
            dfs(initial, &target, base, max_depth, mode, path, steps, out, seen)?;
            path.pop();
        }
        steps.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn obs(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(Name::new).collect()
    }

    #[test]
    fn mixed_counterexample_has_two_executions() {
        let p = parse("new x,y . (x! . 1! . 0 + y?() . 2! . 0 | y! . 2! . 0 + x?() . 1! . 0)").unwrap();
        let ex = enumerate_executions(&p, DEFAULT_MAX_DEPTH, Some(&obs(&["1", "2"]))).unwrap();
        let mut seqs: Vec<String> = ex
            .iter()
            .map(|e| {
                assert!(e.maximal);
                e.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
            })
            .collect();
        seqs.sort();
        assert_eq!(seqs, vec!["tau 1! 1!", "tau 2! 2!"]);
    }

    #[test]
    fn nil_has_one_empty_execution() {
        let ex = enumerate_executions(&Process::nil(), 4, None).unwrap();
        assert_eq!(ex.len(), 1);
        assert!(ex[0].maximal && ex[0].is_empty());
    }

    #[test]
    fn closed_world_without_observables() {
        let p = parse("a?() . 0 + a! . 0").unwrap();
        let ex = enumerate_executions(&p, 4, Some(&BTreeSet::new())).unwrap();
        assert_eq!(ex.len(), 1);
        assert!(ex[0].maximal && ex[0].is_empty());
    }

    #[test]
    fn truncation_and_cycles_are_reported() {
        let p = parse("!tau . a! . 0").unwrap();
        let ex = explore(&p, 3, &Exploration::TauOnly).unwrap();
        assert!(ex.iter().all(|e| e.truncated));
        let p = parse("new c . (c! . 0 | !c?() . c! . 0)").unwrap();
        let ex = explore(&p, 6, &Exploration::TauOnly).unwrap();
        assert!(!ex.is_empty());
        assert!(ex.iter().all(|e| e.truncated || e.cycle));
    }

    #[test]
    fn open_world_inputs_use_witness() {
        let p = parse("a?(z) . z! . 0").unwrap();
        let ex = enumerate_executions(&p, 4, None).unwrap();
        let ls: BTreeSet<String> = ex.iter().map(|e| e.labels()[0].to_string()).collect();
        assert!(ls.contains("a?_w0"));
        assert!(ls.contains("a?a"));
    }
}
