//! The early labelled transition system.
//!
//! Steps are computed structurally; parallel composition is n-ary so
//! communication between any two components is direct. After every step the
//! target is freshened so it again satisfies the binding discipline.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::SemanticsError;
use crate::label::Label;
use crate::name::{FreshSupply, Name};
use crate::subst::Substitution;
use crate::syntax::{all_names, bound_names, check_hygiene, free_names, Prefix, Process};

/// The channel, datum and kind of the communication behind a τ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comm {
    pub channel: Name,
    pub datum: Name,
    /// True for scope extrusion (Close).
    pub bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: Process,
    pub label: Label,
    pub target: Process,
    /// Top-level components (under the outermost restrictions) that moved.
    pub actors: BTreeSet<usize>,
    /// `(sender, receiver)` for a communication between top-level components.
    pub sync: Option<(usize, usize)>,
    /// Set for τ-steps that come from a communication at any depth.
    pub comm: Option<Comm>,
}

impl Transition {
    pub fn single_actor(&self) -> Option<usize> {
        match self.actors.len() {
            1 => self.actors.iter().next().copied(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Whole,
    Single(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone)]
enum Kind {
    Tau(Option<Comm>),
    Out { subject: Name, object: Name, bound: bool },
    /// `template` still has `var` free; the received name is substituted later.
    In { subject: Name, var: Name },
}

#[derive(Debug, Clone)]
struct Raw {
    kind: Kind,
    target: Process,
    origin: Origin,
}

/// Unit data only meet unit binders and proper names only meet proper binders.
fn sorts_match(datum: &Name, var: &Name) -> bool {
    datum.is_unit() == var.is_unit()
}

fn instantiate(template: &Process, var: &Name, datum: &Name) -> Process {
    if var.is_unit() {
        template.clone()
    } else {
        Substitution::single(var.clone(), datum.clone()).apply(template)
    }
}

fn replace(ps: &[Process], i: usize, p: Process) -> Vec<Process> {
    let mut v = ps.to_vec();
    v[i] = p;
    v
}

fn steps(p: &Process) -> Vec<Raw> {
    match p {
        Process::Success => Vec::new(),
        Process::Sum(bs) => bs
            .iter()
            .map(|b| {
                let kind = match &b.prefix {
                    Prefix::Tau => Kind::Tau(None),
                    Prefix::Output { channel, datum } => Kind::Out {
                        subject: channel.clone(),
                        object: datum.clone(),
                        bound: false,
                    },
                    Prefix::Input { channel, binder } => Kind::In {
                        subject: channel.clone(),
                        var: binder.clone(),
                    },
                };
                Raw { kind, target: b.body.clone(), origin: Origin::Whole }
            })
            .collect(),
        Process::Res(z, q) => steps(q)
            .into_iter()
            .filter_map(|r| lift_res(z, r))
            .collect(),
        Process::Par(ps) => {
            let per: Vec<Vec<Raw>> = ps.iter().map(steps).collect();
            let mut out = Vec::new();
            for (i, rs) in per.iter().enumerate() {
                for r in rs {
                    out.push(Raw {
                        kind: r.kind.clone(),
                        target: Process::Par(replace(ps, i, r.target.clone())),
                        origin: Origin::Single(i),
                    });
                }
            }
            for (i, outs) in per.iter().enumerate() {
                for (j, ins) in per.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for (s, r) in outs.iter().flat_map(|o| ins.iter().map(move |r| (o, r))) {
                        if let Some((comm, ti, tj)) = communicate(s, r) {
                            let mut v = replace(ps, i, ti);
                            v[j] = tj;
                            let body = Process::Par(v);
                            let target = if comm.bound {
                                Process::res(comm.datum.clone(), body)
                            } else {
                                body
                            };
                            out.push(Raw {
                                kind: Kind::Tau(Some(comm)),
                                target,
                                origin: Origin::Pair(i, j),
                            });
                        }
                    }
                }
            }
            out
        }
        Process::Rep(q) => {
            let inner = steps(q);
            let mut out: Vec<Raw> = inner
                .iter()
                .map(|r| Raw {
                    kind: r.kind.clone(),
                    target: Process::Par(vec![r.target.clone(), p.clone()]),
                    origin: Origin::Whole,
                })
                .collect();
            for s in &inner {
                for r in &inner {
                    if let Some((comm, ts, tr)) = communicate(s, r) {
                        let body = Process::Par(vec![ts, Process::Par(vec![tr, p.clone()])]);
                        let target = if comm.bound {
                            Process::res(comm.datum.clone(), body)
                        } else {
                            body
                        };
                        out.push(Raw { kind: Kind::Tau(Some(comm)), target, origin: Origin::Whole });
                    }
                }
            }
            out
        }
    }
}

/// Pairs an output step with an input step on the same channel.
fn communicate(s: &Raw, r: &Raw) -> Option<(Comm, Process, Process)> {
    match (&s.kind, &r.kind) {
        (
            Kind::Out { subject, object, bound },
            Kind::In { subject: sub2, var },
        ) if subject == sub2 && sorts_match(object, var) => Some((
            Comm { channel: subject.clone(), datum: object.clone(), bound: *bound },
            s.target.clone(),
            instantiate(&r.target, var, object),
        )),
        _ => None,
    }
}

/// Rules Res and Open.
fn lift_res(z: &Name, r: Raw) -> Option<Raw> {
    match r.kind {
        Kind::Tau(_) => Some(Raw { target: Process::res(z.clone(), r.target), ..r }),
        Kind::Out { ref subject, .. } | Kind::In { ref subject, .. } if subject == z => None,
        Kind::Out { subject, object, bound: false } if &object == z => Some(Raw {
            kind: Kind::Out { subject, object, bound: true },
            target: r.target,
            origin: r.origin,
        }),
        kind => Some(Raw { kind, target: Process::res(z.clone(), r.target), origin: r.origin }),
    }
}

/// True if some binder shadows another, or is also free or `reserved`.
fn needs_freshen(p: &Process, reserved: &BTreeSet<Name>) -> bool {
    fn walk(p: &Process, scope: &mut Vec<Name>, binders: &mut BTreeSet<Name>) -> bool {
        let bind = |x: &Name, q: &Process, scope: &mut Vec<Name>, binders: &mut BTreeSet<Name>| {
            if scope.contains(x) {
                return true;
            }
            binders.insert(x.clone());
            scope.push(x.clone());
            let r = walk(q, scope, binders);
            scope.pop();
            r
        };
        match p {
            Process::Success => false,
            Process::Sum(bs) => bs.iter().any(|b| match &b.prefix {
                Prefix::Input { binder, .. } if !binder.is_unit() => bind(binder, &b.body, scope, binders),
                _ => walk(&b.body, scope, binders),
            }),
            Process::Par(ps) => ps.iter().any(|q| walk(q, scope, binders)),
            Process::Res(x, q) => bind(x, q, scope, binders),
            Process::Rep(q) => walk(q, scope, binders),
        }
    }
    let mut binders = BTreeSet::new();
    if walk(p, &mut Vec::new(), &mut binders) {
        return true;
    }
    !binders.is_disjoint(reserved) || !binders.is_disjoint(&free_names(p))
}

/// Renames binders that clash with a free name or `reserved`, or that shadow
/// an enclosing binder.
pub(crate) fn freshen(p: &Process, reserved: &BTreeSet<Name>, supply: &mut FreshSupply) -> Process {
    let mut clash = free_names(p);
    clash.extend(reserved.iter().cloned());
    supply.avoid_all(all_names(p));
    supply.avoid_all(reserved.iter().cloned());
    let mut w = Freshener { clash: &clash, supply, uniform: BTreeMap::new() };
    w.walk(p, &mut Vec::new(), &BTreeMap::new())
}

/// Offending binders sharing a name all receive the same fresh name, so
/// copies made by replication stay identical.
struct Freshener<'a> {
    clash: &'a BTreeSet<Name>,
    supply: &'a mut FreshSupply,
    uniform: BTreeMap<Name, Name>,
}

impl Freshener<'_> {
    fn enter(&mut self, b: &Name, scope: &[Name]) -> Name {
        if !self.clash.contains(b) && !scope.contains(b) {
            return b.clone();
        }
        match self.uniform.get(b) {
            Some(f) if !scope.contains(f) => f.clone(),
            Some(_) => self.supply.fresh(b),
            None => {
                let f = self.supply.fresh(b);
                self.uniform.insert(b.clone(), f.clone());
                f
            }
        }
    }

    fn walk(&mut self, p: &Process, scope: &mut Vec<Name>, env: &BTreeMap<Name, Name>) -> Process {
        fresh_walk(p, self, scope, env)
    }
}

fn fresh_walk(
    p: &Process,
    w: &mut Freshener<'_>,
    scope: &mut Vec<Name>,
    env: &BTreeMap<Name, Name>,
) -> Process {
    let get = |n: &Name| env.get(n).cloned().unwrap_or_else(|| n.clone());
    match p {
        Process::Success => Process::Success,
        Process::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Input { channel, binder } if !binder.is_unit() => {
                        let nb = w.enter(binder, scope);
                        let mut env2 = env.clone();
                        env2.insert(binder.clone(), nb.clone());
                        scope.push(nb.clone());
                        let body = fresh_walk(&b.body, w, scope, &env2);
                        scope.pop();
                        crate::syntax::Branch {
                            prefix: Prefix::Input { channel: get(channel), binder: nb },
                            body,
                        }
                    }
                    pre => crate::syntax::Branch {
                        prefix: match pre {
                            Prefix::Output { channel, datum } => Prefix::Output {
                                channel: get(channel),
                                datum: get(datum),
                            },
                            Prefix::Input { channel, binder } => Prefix::Input {
                                channel: get(channel),
                                binder: binder.clone(),
                            },
                            Prefix::Tau => Prefix::Tau,
                        },
                        body: fresh_walk(&b.body, w, scope, env),
                    },
                })
                .collect(),
        ),
        Process::Par(ps) => Process::Par(
            ps.iter()
                .map(|q| fresh_walk(q, w, scope, env))
                .collect(),
        ),
        Process::Res(x, q) => {
            let nx = w.enter(x, scope);
            let mut env2 = env.clone();
            env2.insert(x.clone(), nx.clone());
            scope.push(nx.clone());
            let body = fresh_walk(q, w, scope, &env2);
            scope.pop();
            Process::Res(nx, Box::new(body))
        }
        Process::Rep(q) => Process::Rep(Box::new(fresh_walk(q, w, scope, env))),
    }
}

/// The name used for "some name not in the universe" in early inputs.
pub fn witness_name(taken: &BTreeSet<Name>) -> Name {
    (0..)
        .map(|k| Name::new(format!("_w{k}")))
        .find(|n| !taken.contains(n))
        .expect("unbounded")
}

/// Which early inputs [`transitions_with`] produces.
#[derive(Debug, Clone, Default)]
pub enum Inputs {
    /// Only τ-steps and outputs.
    #[default]
    Disabled,
    /// Objects from the universe (which must contain every free name) minus
    /// bound names, plus one witness name.
    Universe(BTreeSet<Name>),
    /// Exactly these objects.
    Objects(BTreeSet<Name>),
}

/// Options for [`transitions_with`].
#[derive(Debug, Clone, Default)]
pub struct StepOptions {
    pub inputs: Inputs,
    /// Extra names freshly generated binders must avoid.
    pub avoid: BTreeSet<Name>,
}

impl StepOptions {
    pub fn universe(universe: BTreeSet<Name>) -> Self {
        StepOptions { inputs: Inputs::Universe(universe), avoid: BTreeSet::new() }
    }

    pub fn objects(objects: BTreeSet<Name>) -> Self {
        StepOptions { inputs: Inputs::Objects(objects), avoid: BTreeSet::new() }
    }
}

/// All transitions of `p`, with early inputs instantiated over `universe`
/// (minus bound names) plus one witness name.
pub fn transitions(p: &Process, universe: &BTreeSet<Name>) -> Result<Vec<Transition>, SemanticsError> {
    transitions_with(p, &StepOptions::universe(universe.clone()))
}

/// The τ-transitions of `p`.
pub fn tau_transitions(p: &Process) -> Result<Vec<Transition>, SemanticsError> {
    Ok(transitions_with(p, &StepOptions::default())?
        .into_iter()
        .filter(|t| t.label.is_tau())
        .collect())
}

pub fn transitions_with(p: &Process, opts: &StepOptions) -> Result<Vec<Transition>, SemanticsError> {
    check_hygiene(p)?;
    let fns = free_names(p);
    let objects: Option<Vec<Name>> = match &opts.inputs {
        Inputs::Disabled => None,
        Inputs::Objects(objs) => Some(objs.iter().filter(|n| !n.is_unit()).cloned().collect()),
        Inputs::Universe(u) => {
            if let Some(missing) = fns.iter().find(|n| !n.is_unit() && !u.contains(*n)) {
                return Err(SemanticsError::UniverseMissing(missing.clone()));
            }
            let bn = bound_names(p);
            let mut taken = all_names(p);
            taken.extend(u.iter().cloned());
            let mut objs: Vec<Name> = u
                .iter()
                .filter(|n| !n.is_unit() && !bn.contains(*n))
                .cloned()
                .collect();
            objs.push(witness_name(&taken));
            Some(objs)
        }
    };
    let (_, body) = p.strip_restrictions();
    let top_par = matches!(body, Process::Par(_));
    let mut out: Vec<Transition> = Vec::new();
    let mut seen: HashSet<(Label, Process, BTreeSet<usize>, Option<Comm>)> = HashSet::new();
    let mut avoid = opts.avoid.clone();
    avoid.extend(all_names(p));
    for raw in steps(p) {
        let (actors, sync) = match (raw.origin, top_par) {
            (Origin::Single(i), true) => (BTreeSet::from([i]), None),
            (Origin::Pair(s, r), true) => (BTreeSet::from([s, r]), Some((s, r))),
            _ => (BTreeSet::from([0]), None),
        };
        let mut emit = |label: Label, target: Process| {
            let reserved = label.bound_names();
            let target = if needs_freshen(&target, &reserved) {
                let mut supply = FreshSupply::new(avoid.clone());
                supply.avoid_all(label.names());
                freshen(&target, &reserved, &mut supply)
            } else {
                target
            };
            let comm = match &raw.kind {
                Kind::Tau(c) => c.clone(),
                _ => None,
            };
            if seen.insert((label.clone(), target.clone(), actors.clone(), comm.clone())) {
                out.push(Transition {
                    source: p.clone(),
                    label,
                    target,
                    actors: actors.clone(),
                    sync,
                    comm,
                });
            }
        };
        match &raw.kind {
            Kind::Tau(_) => emit(Label::Tau, raw.target.clone()),
            Kind::Out { subject, object, bound } => {
                let label = if *bound {
                    Label::BoundOutput { subject: subject.clone(), object: object.clone() }
                } else {
                    Label::FreeOutput { subject: subject.clone(), object: object.clone() }
                };
                emit(label, raw.target.clone())
            }
            Kind::In { subject, var } => {
                let Some(objs) = &objects else { continue };
                if var.is_unit() {
                    let label = Label::FreeInput { subject: subject.clone(), object: Name::unit() };
                    emit(label, raw.target.clone());
                } else {
                    for y in objs {
                        let label = Label::FreeInput { subject: subject.clone(), object: y.clone() };
                        emit(label, instantiate(&raw.target, var, y));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// True if `p` has no transition at all (inputs counted once per channel).
pub fn is_stuck(p: &Process) -> bool {
    steps(p).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::congruent;
    use crate::parse::parse;

    fn universe(p: &Process) -> BTreeSet<Name> {
        free_names(p)
    }

    fn lbl(s: &str) -> Label {
        s.parse().unwrap()
    }

    #[test]
    fn comm_example() {
        let p = parse("x!y . 0 | x?(z) . z!a . 0").unwrap();
        let ts = transitions(&p, &universe(&p)).unwrap();
        let expect = parse("0 | y!a . 0").unwrap();
        let t = ts
            .iter()
            .find(|t| t.label.is_tau())
            .expect("a tau step");
        assert_eq!(t.target, expect);
        assert_eq!(t.actors, [0, 1].into_iter().collect());
        assert_eq!(t.sync, Some((0, 1)));
    }

    #[test]
    fn open_example() {
        let p = parse("new y . x!y . 0").unwrap();
        let ts = transitions(&p, &universe(&p)).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].label, lbl("x!(y)"));
        assert_eq!(ts[0].target, Process::nil());
    }

    #[test]
    fn mixed_sum_has_both_polarities() {
        let p = parse("a?() . 0 + a!<> . 0").unwrap();
        let ts = transitions(&p, &universe(&p)).unwrap();
        let labels: Vec<Label> = ts.iter().map(|t| t.label.clone()).collect();
        assert!(labels.contains(&lbl("a?")));
        assert!(labels.contains(&lbl("a!")));
    }

    #[test]
    fn tau_examples() {
        let p = parse("x!a . 0 | x?(z) . 0").unwrap();
        let ts = tau_transitions(&p).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].target, parse("0 | 0").unwrap());

        let p = parse("(a?() . 0 + a! . check) | (a?() . 0 + a! . check)").unwrap();
        let targets: Vec<Process> = tau_transitions(&p).unwrap().into_iter().map(|t| t.target).collect();
        assert_eq!(targets.len(), 2);
        assert!(targets.contains(&parse("0 | check").unwrap()));
        assert!(targets.contains(&parse("check | 0").unwrap()));

        let p = parse("(new x . a!x . x!u . 0) | (new x' . a!x' . x'!u . 0)").unwrap();
        assert!(tau_transitions(&p).unwrap().is_empty());
    }

    #[test]
    fn input_universe_and_witness() {
        let p = parse("x?(z) . z! . 0").unwrap();
        let u: BTreeSet<Name> = ["x", "a"].into_iter().map(Name::new).collect();
        let ts = transitions(&p, &u).unwrap();
        let objs: BTreeSet<String> =
            ts.iter().map(|t| t.label.object().unwrap().to_string()).collect();
        assert_eq!(objs, ["_w0", "a", "x"].into_iter().map(String::from).collect());
        assert!(matches!(
            transitions(&p, &BTreeSet::new()),
            Err(SemanticsError::UniverseMissing(_))
        ));
    }

    #[test]
    fn close_extrudes_scope() {
        let p = parse("(new y . x!y . y!a . 0) | x?(z) . z?(w) . 0").unwrap();
        let ts = tau_transitions(&p).unwrap();
        assert_eq!(ts.len(), 1);
        let expect = parse("new y . (y!a . 0 | y?(w) . 0)").unwrap();
        assert!(congruent(&ts[0].target, &expect));
        assert_eq!(ts[0].comm.as_ref().map(|c| c.bound), Some(true));
    }

    #[test]
    fn replication_unfolds_once() {
        let p = parse("!a! . 0").unwrap();
        let ts = transitions(&p, &universe(&p)).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].target, parse("0 | !a! . 0").unwrap());
        let p = parse("!(a! . 0 + a?() . b! . 0)").unwrap();
        assert_eq!(tau_transitions(&p).unwrap().len(), 1);
    }

    #[test]
    fn bound_output_binders_are_refreshed() {
        let p = parse("(new x . a!x . x!u . 0) | (new x . a!x . x!u . 0)").unwrap();
        let ts = transitions(&p, &universe(&p)).unwrap();
        let t = ts.iter().find(|t| t.actors.contains(&0)).unwrap();
        assert_eq!(t.label, lbl("a!(x)"));
        assert_eq!(t.target, parse("x!u . 0 | (new x'1 . a!x'1 . x'1!u . 0)").unwrap());
        assert!(check_hygiene(&t.target).is_ok());
    }

    #[test]
    fn restriction_blocks_subject() {
        let p = parse("new a . a! . 0").unwrap();
        assert!(transitions(&p, &universe(&p)).unwrap().is_empty());
        assert!(is_stuck(&Process::Success));
    }
}
