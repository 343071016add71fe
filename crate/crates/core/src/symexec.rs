//! Symmetric executions: restoring symmetry after one step, building whole
//! symmetric executions, searching for them exhaustively and subdividing them.

use std::collections::{BTreeMap, BTreeSet};

use crate::canon::{canonical, CanonicalForm};
use crate::error::ExecutionError;
use crate::label::Label;
use crate::name::Name;
use crate::semantics::{transitions_with, StepOptions, Transition};
use crate::subst::{power, Substitution, SymmetryRelation};
use crate::symmetry::{
    align_components, align_into, is_symmetric, symmetric_action_sequence, LabelRound,
    SymmetricNetwork,
};
use crate::syntax::{all_names, classify, free_names, Process};

pub const DEFAULT_MAX_ROUNDS: usize = 16;

/// Transitions tried while completing one round before giving up.
const ROUND_BUDGET: usize = 50_000;

/// How the generator of a round arose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundCase {
    /// A step of a single component.
    Internal { actor: usize },
    /// A communication between two components.
    Communication { sender: usize, receiver: usize },
}

impl RoundCase {
    fn of(first: &Transition, degree: usize) -> RoundCase {
        if degree == 1 {
            return RoundCase::Internal { actor: 0 };
        }
        match first.sync {
            Some((sender, receiver)) => RoundCase::Communication { sender, receiver },
            None => RoundCase::Internal { actor: first.actors.iter().next().copied().unwrap_or(0) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub labels: LabelRound,
    /// The generator followed by the `n − 1` restoring steps.
    pub steps: Vec<Transition>,
    /// The symmetric network reached at the end of the round.
    pub network: SymmetricNetwork,
    pub case: RoundCase,
}

impl Round {
    pub fn sigma(&self) -> &SymmetryRelation {
        self.network.relation()
    }

    pub fn restriction(&self) -> &[Name] {
        self.network.restriction()
    }

    pub fn base(&self) -> &Process {
        self.network.base()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricExecution {
    pub initial: SymmetricNetwork,
    pub rounds: Vec<Round>,
    /// The final network has no transition.
    pub complete: bool,
}

impl SymmetricExecution {
    pub fn final_network(&self) -> &SymmetricNetwork {
        self.rounds.last().map_or(&self.initial, |r| &r.network)
    }

    /// `σ, σ₁, …, σₘ`.
    pub fn sigma_chain(&self) -> Vec<SymmetryRelation> {
        std::iter::once(self.initial.relation().clone())
            .chain(self.rounds.iter().map(|r| r.sigma().clone()))
            .collect()
    }

    pub fn steps(&self) -> impl Iterator<Item = &Transition> {
        self.rounds.iter().flat_map(|r| r.steps.iter())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.steps().map(|t| t.label.clone()).collect()
    }
}

/// The output of [`restore_symmetry`].
#[derive(Debug, Clone)]
pub struct RoundResult {
    /// The `n − 1` steps after the generator.
    pub steps: Vec<Transition>,
    pub next: SymmetricNetwork,
    pub labels: LabelRound,
}

/// Options for a step inside a round: fresh names avoid the round's starting
/// term and every name already used by the round's labels.
fn step_options(net: &SymmetricNetwork, inputs: Option<&Name>, done: &[Transition]) -> StepOptions {
    let mut opts = match inputs {
        Some(b) => StepOptions::objects([b.clone()].into_iter().collect()),
        None => StepOptions::default(),
    };
    opts.avoid = net.relation().support();
    opts.avoid.extend(all_names(&net.denote()));
    opts.avoid.extend(done.iter().flat_map(|t| t.label.names()));
    opts
}

fn open_options(term: &Process, net: &SymmetricNetwork) -> StepOptions {
    let mut opts = StepOptions::universe(free_names(term));
    opts.avoid = net.relation().support();
    opts
}

/// The names a round's labels are checked against: the previous restriction,
/// plus the orbit of a component-local name extruded by the generator.
fn label_scope(restriction: &[Name], mu: &Label, sigma: &SymmetryRelation) -> Vec<Name> {
    let mut scope = restriction.to_vec();
    if let Label::BoundOutput { object, .. } = mu {
        if !restriction.contains(object) {
            scope.extend(sigma.orbit(object));
        }
    }
    scope
}

/// Strips exactly `names` from the front of `term`.
fn strip_exact<'a>(term: &'a Process, names: &[Name]) -> Option<&'a Process> {
    let mut cur = term;
    for x in names {
        match cur {
            Process::Res(y, body) if y == x => cur = body,
            _ => return None,
        }
    }
    Some(cur)
}

/// Checks that `steps`, starting from `net`, end in a symmetric network whose
/// labels form a symmetric sequence, inferring the extended relation.
pub fn close_round(net: &SymmetricNetwork, steps: &[Transition]) -> Option<(SymmetricNetwork, LabelRound)> {
    let n = net.degree();
    if steps.len() != n {
        return None;
    }
    let fin = &steps.last()?.target;
    let labels: LabelRound = steps.iter().map(|t| t.label.clone()).collect();
    let mu = &labels[0];
    let sigma = net.relation();
    if n == 1 {
        let mut rest: Vec<Name> = net.restriction().to_vec();
        if let Label::BoundOutput { object, .. } = mu {
            rest.retain(|x| x != object);
        }
        let base = strip_exact(fin, &rest)?.clone();
        return Some((SymmetricNetwork::trusted(base, sigma.clone(), rest), labels));
    }
    let (chain, body) = fin.strip_restrictions();
    let comps: Vec<&Process> = match body {
        Process::Par(ps) if ps.len() == n => ps.iter().collect(),
        _ => return None,
    };
    let mut map: BTreeMap<Name, Name> =
        sigma.perm().pairs().map(|(a, b)| (a.clone(), b.clone())).collect();
    if !align_components(&comps, &mut map) {
        return None;
    }
    for t in 0..n {
        let (a, b) = (&labels[t], &labels[(t + 1) % n]);
        match (a.subject(), b.subject()) {
            (Some(x), Some(y)) => {
                if !align_into(&mut map, x, y) {
                    return None;
                }
            }
            (None, None) => {}
            _ => return None,
        }
        if a.is_output() && b.is_output() && !align_into(&mut map, a.object()?, b.object()?) {
            return None;
        }
    }
    let next_sigma = SymmetryRelation::new(Substitution::from_pairs(map), n).ok()?;
    if !chain.iter().all(|x| chain.contains(&next_sigma.image(x))) {
        return None;
    }
    if !is_symmetric(fin, &next_sigma, &chain) {
        return None;
    }
    let scope = label_scope(net.restriction(), mu, &next_sigma);
    if symmetric_action_sequence(mu, &next_sigma, &scope) != labels {
        return None;
    }
    let base = comps[0].clone();
    Some((SymmetricNetwork::trusted(base, next_sigma, chain), labels))
}

fn is_genuine(t: &Transition, opts: &StepOptions) -> bool {
    transitions_with(&t.source, opts)
        .map(|ts| ts.iter().any(|u| u.label == t.label && u.target == t.target))
        .unwrap_or(false)
}

/// Does `cand` mimic the generator `mu` at offset `t` of the round?
fn mimics(cand: &Label, mu: &Label, s: &Substitution) -> bool {
    match mu {
        Label::Tau => cand.is_tau(),
        Label::FreeInput { subject, object } => {
            *cand == Label::FreeInput { subject: s.get(subject), object: object.clone() }
        }
        Label::FreeOutput { subject, object } => {
            *cand == Label::FreeOutput { subject: s.get(subject), object: s.get(object) }
        }
        Label::BoundOutput { subject, .. } => {
            cand.is_output() && cand.subject() == Some(&s.get(subject))
        }
    }
}

fn top_component(term: &Process, i: usize) -> Option<&Process> {
    let (_, body) = term.strip_restrictions();
    match body {
        Process::Par(ps) => ps.get(i),
        other if i == 0 => Some(other),
        _ => None,
    }
}

/// Completes a round from its generator, constructively:
/// every other component mimics an internal step in turn, or the
/// communication is replayed between every rotated pair of components.
pub fn restore_symmetry(net: &SymmetricNetwork, first: &Transition) -> Result<RoundResult, ExecutionError> {
    if !classify(net.base()).is_separate() {
        return Err(ExecutionError::NotSeparate);
    }
    let term = net.denote();
    if first.source != term {
        return Err(ExecutionError::ForeignTransition(format!(
            "source `{}` is not the network `{term}`",
            first.source
        )));
    }
    let mu = first.label.clone();
    let input_obj = match &mu {
        Label::FreeInput { object, .. } => Some(object.clone()),
        _ => None,
    };
    if !is_genuine(first, &step_options(net, input_obj.as_ref(), &[])) {
        return Err(ExecutionError::ForeignTransition(format!(
            "`{}` is not a step of `{term}`",
            first.label
        )));
    }
    if let Some(b) = &input_obj {
        if net.relation().image(b) != *b {
            return Err(ExecutionError::InputObjectNotFixed(b.clone()));
        }
    }
    let n = net.degree();
    let case = RoundCase::of(first, n);
    if n == 1 {
        return close_round(net, std::slice::from_ref(first))
            .map(|(next, labels)| RoundResult { steps: Vec::new(), next, labels })
            .ok_or_else(|| ExecutionError::Defect(format!("degree-1 round after `{mu}` is not closed")));
    }
    let comm = first.comm.clone();
    let mover = match case {
        RoundCase::Internal { actor } => top_component(&first.target, actor).cloned(),
        RoundCase::Communication { .. } => None,
    };
    let candidates = |path: &[Transition]| -> Vec<Transition> {
        let t = path.len();
        let cur = &path[t - 1].target;
        let s = net.relation().power(t);
        let opts = step_options(net, input_obj.as_ref(), path);
        let Ok(all) = transitions_with(cur, &opts) else {
            return Vec::new();
        };
        let mut picked: Vec<(usize, Transition)> = all
            .into_iter()
            .filter(|c| match case {
                RoundCase::Internal { actor } => {
                    c.sync.is_none()
                        && c.actors == BTreeSet::from([(actor + t) % n])
                        && mimics(&c.label, &mu, &s)
                }
                RoundCase::Communication { sender, receiver } => {
                    let want = ((sender + t) % n, (receiver + t) % n);
                    let (Some(cc), Some(fc)) = (&c.comm, &comm) else {
                        return false;
                    };
                    c.sync == Some(want)
                        && cc.channel == s.get(&fc.channel)
                        && cc.bound == fc.bound
                        && (fc.bound || cc.datum == s.get(&fc.datum))
                }
            })
            .map(|c| {
                let rank = match (&mover, case) {
                    (Some(m), RoundCase::Internal { actor }) => {
                        let want = canonical(&s.permute(m));
                        match top_component(&c.target, (actor + t) % n) {
                            Some(got) if canonical(got) == want => 0,
                            _ => 1,
                        }
                    }
                    _ => 0,
                };
                (rank, c)
            })
            .collect();
        picked.sort_by_key(|(r, _)| *r);
        picked.into_iter().map(|(_, c)| c).collect()
    };
    let mut budget = ROUND_BUDGET;
    let mut path = vec![first.clone()];
    if let Some((next, labels)) = complete_round(net, &mut path, &candidates, &mut budget) {
        return Ok(RoundResult { steps: path[1..].to_vec(), next, labels });
    }
    Err(ExecutionError::Defect(format!(
        "no completion of the round generated by `{mu}` from `{term}`"
    )))
}

fn complete_round(
    net: &SymmetricNetwork,
    path: &mut Vec<Transition>,
    candidates: &dyn Fn(&[Transition]) -> Vec<Transition>,
    budget: &mut usize,
) -> Option<(SymmetricNetwork, LabelRound)> {
    let n = net.degree();
    if path.len() == n {
        return close_round(net, path);
    }
    for c in candidates(path) {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        path.push(c);
        if let Some(done) = complete_round(net, path, candidates, budget) {
            return Some(done);
        }
        path.pop();
    }
    None
}

/// Deterministic generator choice: lowest actor, then label kind, then label.
fn policy_key(t: &Transition) -> (usize, u8, Label) {
    (
        t.actors.iter().next().copied().unwrap_or(0),
        t.label.kind_rank(),
        t.label.clone(),
    )
}

/// Generators a constructive round may start with: inputs must receive a
/// name fixed by `σ`.
pub fn generator_candidates(net: &SymmetricNetwork) -> Result<Vec<Transition>, ExecutionError> {
    let term = net.denote();
    let mut ts: Vec<Transition> = transitions_with(&term, &open_options(&term, net))?
        .into_iter()
        .filter(|t| match &t.label {
            Label::FreeInput { object, .. } => net.relation().image(object) == *object,
            _ => true,
        })
        .collect();
    ts.sort_by_key(policy_key);
    Ok(ts)
}

/// Builds a symmetric execution by repeatedly choosing a generator and
/// restoring symmetry, for at most `max_rounds` rounds.
pub fn symmetric_execution(
    net: &SymmetricNetwork,
    max_rounds: usize,
) -> Result<SymmetricExecution, ExecutionError> {
    if !classify(net.base()).is_separate() {
        return Err(ExecutionError::NotSeparate);
    }
    let mut rounds = Vec::new();
    let mut cur = net.clone();
    loop {
        let ts = generator_candidates(&cur)?;
        let Some(first) = ts.into_iter().next() else {
            return Ok(SymmetricExecution { initial: net.clone(), rounds, complete: true });
        };
        if rounds.len() >= max_rounds {
            return Ok(SymmetricExecution { initial: net.clone(), rounds, complete: false });
        }
        let RoundResult { steps, next, labels } = restore_symmetry(&cur, &first)?;
        let case = RoundCase::of(&first, cur.degree());
        let mut all = vec![first];
        all.extend(steps);
        rounds.push(Round { labels, steps: all, network: next.clone(), case });
        cur = next;
    }
}

/// Outcome of [`has_symmetric_execution`].
#[derive(Debug, Clone)]
pub enum SearchVerdict {
    /// A witness: complete, or a finite prefix ending in a revisited network.
    Yes(SymmetricExecution),
    /// The search space was exhausted without finding one.
    No,
    /// A bound was hit first.
    Unknown(String),
}

enum Search {
    Found(Vec<Round>, bool),
    Exhausted,
    Bounded(String),
}

/// Searches every generator and every completion of every round. The first
/// branch that hits a bound ends the search with `Unknown`.
pub fn has_symmetric_execution(net: &SymmetricNetwork, max_rounds: usize) -> SearchVerdict {
    let mut visited = Vec::new();
    let mut budget = ROUND_BUDGET * 4;
    match search(net, max_rounds, &mut visited, &mut budget) {
        Search::Found(mut rounds, complete) => {
            rounds.reverse();
            SearchVerdict::Yes(SymmetricExecution { initial: net.clone(), rounds, complete })
        }
        Search::Exhausted => SearchVerdict::No,
        Search::Bounded(why) => SearchVerdict::Unknown(why),
    }
}

fn search(
    net: &SymmetricNetwork,
    rounds_left: usize,
    visited: &mut Vec<(CanonicalForm, SymmetryRelation)>,
    budget: &mut usize,
) -> Search {
    let term = net.denote();
    let Ok(firsts) = transitions_with(&term, &open_options(&term, net)) else {
        return Search::Exhausted;
    };
    if firsts.is_empty() {
        return Search::Found(Vec::new(), true);
    }
    if rounds_left == 0 {
        return Search::Bounded("round bound reached".into());
    }
    visited.push((canonical(&term), net.relation().clone()));
    let mut bounded: Option<String> = None;
    for first in firsts {
        let mu = first.label.clone();
        let objects = match &mu {
            Label::FreeInput { object, .. } => Some(object.clone()),
            _ => None,
        };
        let candidates = |path: &[Transition]| -> Vec<Transition> {
            let opts = step_options(net, objects.as_ref(), path);
            transitions_with(&path[path.len() - 1].target, &opts)
                .unwrap_or_default()
                .into_iter()
                .filter(|c| c.label.kind_rank() == mu.kind_rank() || (c.label.is_output() && mu.is_output()))
                .collect()
        };
        for (steps, next, labels) in all_completions(net, &first, &candidates, budget) {
            let key = (canonical(&next.denote()), next.relation().clone());
            let round = Round { labels, steps, network: next.clone(), case: RoundCase::of(&first, net.degree()) };
            if visited.contains(&key) {
                visited.pop();
                return Search::Found(vec![round], false);
            }
            match search(&next, rounds_left - 1, visited, budget) {
                Search::Found(mut rs, complete) => {
                    rs.push(round);
                    visited.pop();
                    return Search::Found(rs, complete);
                }
                Search::Exhausted => {}
                // A bounded branch rules out `No`; stop rather than sweep the rest.
                bounded @ Search::Bounded(_) => {
                    visited.pop();
                    return bounded;
                }
            }
        }
        if *budget == 0 {
            bounded = Some("search budget exhausted".into());
            break;
        }
    }
    visited.pop();
    match bounded {
        Some(why) => Search::Bounded(why),
        None => Search::Exhausted,
    }
}

/// Every way of closing the round generated by `first`.
fn all_completions(
    net: &SymmetricNetwork,
    first: &Transition,
    candidates: &dyn Fn(&[Transition]) -> Vec<Transition>,
    budget: &mut usize,
) -> Vec<(Vec<Transition>, SymmetricNetwork, LabelRound)> {
    fn go(
        net: &SymmetricNetwork,
        path: &mut Vec<Transition>,
        candidates: &dyn Fn(&[Transition]) -> Vec<Transition>,
        budget: &mut usize,
        out: &mut Vec<(Vec<Transition>, SymmetricNetwork, LabelRound)>,
    ) {
        if path.len() == net.degree() {
            if let Some((next, labels)) = close_round(net, path) {
                out.push((path.clone(), next, labels));
            }
            return;
        }
        for c in candidates(path) {
            if *budget == 0 {
                return;
            }
            *budget -= 1;
            path.push(c);
            go(net, path, candidates, budget, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(net, &mut vec![first.clone()], candidates, budget, &mut out);
    out
}

/// Positional correspondence between names of two executions, used to match
/// labels up to the choice of fresh names.
struct NameMatch<'a> {
    fixed: &'a BTreeSet<Name>,
    map: BTreeMap<Name, Name>,
}

impl NameMatch<'_> {
    fn names(&self, mine: &Name, theirs: &Name, trial: &mut BTreeMap<Name, Name>) -> bool {
        if let Some(m) = self.map.get(mine).or_else(|| trial.get(mine)) {
            return m == theirs;
        }
        if mine == theirs || (!self.fixed.contains(mine) && !self.fixed.contains(theirs)) {
            trial.insert(mine.clone(), theirs.clone());
            true
        } else {
            false
        }
    }

    /// `mine` equals `theirs`, or is a bound output whose free variant is `theirs`.
    fn label(&mut self, mine: &Label, theirs: &Label) -> bool {
        let kinds_ok = mine.kind_rank() == theirs.kind_rank()
            || (mine.is_bound_output() && matches!(theirs, Label::FreeOutput { .. }));
        if !kinds_ok {
            return false;
        }
        let mut trial = BTreeMap::new();
        let ok = match (mine.subject(), theirs.subject()) {
            (Some(a), Some(b)) => {
                self.names(a, b, &mut trial) && self.names(mine.object().unwrap(), theirs.object().unwrap(), &mut trial)
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

/// Re-executes `exec` on the network of smaller degree `n_prime`, taking the
/// corresponding generator each round.
pub fn subdivide(exec: &SymmetricExecution, n_prime: usize) -> Result<SymmetricExecution, ExecutionError> {
    let n = exec.initial.degree();
    if n_prime == 0 || n_prime >= n {
        return Err(ExecutionError::Subdivision(format!("need 0 < {n_prime} < {n}")));
    }
    if !power(exec.initial.relation().perm(), n_prime).is_identity() {
        return Err(ExecutionError::Subdivision(format!(
            "σ^{n_prime} is not the identity"
        )));
    }
    let small = exec.initial.with_degree(n_prime)?;
    let fixed = free_names(&exec.initial.denote());
    let mut matcher = NameMatch { fixed: &fixed, map: BTreeMap::new() };
    let mut budget = ROUND_BUDGET;
    let mut rounds = Vec::new();
    if !sub_rounds(&exec.rounds, &small, n_prime, &mut matcher, &mut budget, &mut rounds) {
        return Err(ExecutionError::Defect(
            "no matching execution of the smaller network".into(),
        ));
    }
    let last = rounds.last().map_or(&small, |r: &Round| &r.network).clone();
    let term = last.denote();
    let complete = exec.complete
        && transitions_with(&term, &open_options(&term, &last))
            .map(|ts| ts.is_empty())
            .unwrap_or(false);
    Ok(SymmetricExecution { initial: small, rounds, complete })
}

fn sub_rounds(
    orig: &[Round],
    net: &SymmetricNetwork,
    n_prime: usize,
    matcher: &mut NameMatch<'_>,
    budget: &mut usize,
    out: &mut Vec<Round>,
) -> bool {
    let Some((round, rest)) = orig.split_first() else {
        return true;
    };
    let term = net.denote();
    let gen = &round.steps[0];
    let mut opts = open_options(&term, net);
    if let Label::FreeInput { object, .. } = &gen.label {
        if let crate::semantics::Inputs::Universe(u) = &mut opts.inputs {
            u.insert(object.clone());
        }
    }
    let Ok(all) = transitions_with(&term, &opts) else {
        return false;
    };
    let mut ranked: Vec<(u8, Transition)> = Vec::new();
    for c in all {
        let rank = match round.case {
            RoundCase::Internal { actor } => {
                let want = actor % n_prime;
                if n_prime > 1 && (c.sync.is_some() || c.actors != BTreeSet::from([want])) {
                    continue;
                }
                let congruent = match (top_component(&gen.target, actor), top_component(&c.target, want)) {
                    (Some(a), Some(b)) if n_prime > 1 => canonical(a) == canonical(b),
                    _ => false,
                };
                let exact = c.label == gen.label;
                let variant = c.label.unbound() == gen.label.unbound();
                match (exact, variant, congruent) {
                    (true, _, true) => 0,
                    (true, _, false) => 1,
                    (false, true, _) => 2,
                    _ if c.label.kind_rank() == gen.label.kind_rank()
                        || (c.label.is_output() && gen.label.is_output()) =>
                    {
                        3
                    }
                    _ => continue,
                }
            }
            RoundCase::Communication { sender, receiver } => {
                let (s, r) = (sender % n_prime, receiver % n_prime);
                let (Some(cc), Some(gc)) = (&c.comm, &gen.comm) else {
                    continue;
                };
                let placed = if n_prime == 1 {
                    true
                } else if s != r {
                    c.sync == Some((s, r))
                } else {
                    c.sync.is_none() && c.actors == BTreeSet::from([s])
                };
                if !placed || cc.channel != gc.channel {
                    continue;
                }
                if cc.datum == gc.datum { 0 } else { 1 }
            }
        };
        ranked.push((rank, c));
    }
    ranked.sort_by_key(|(r, _)| *r);
    for (_, first) in ranked {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let Ok(res) = restore_symmetry(net, &first) else {
            continue;
        };
        let saved = matcher.map.clone();
        // An extruded name is new in both executions, even if the smaller
        // one reuses a name that left its term in an earlier round.
        for l in &res.labels {
            if let Label::BoundOutput { object, .. } = l {
                matcher.map.remove(object);
            }
        }
        let labels_ok = res.labels.iter().all(|l| round.labels.iter().any(|o| matcher.label(l, o)));
        if !labels_ok {
            matcher.map = saved;
            continue;
        }
        let mut steps = vec![first.clone()];
        steps.extend(res.steps);
        out.push(Round {
            labels: res.labels,
            steps,
            network: res.next.clone(),
            case: RoundCase::of(&first, n_prime),
        });
        if sub_rounds(rest, &res.next, n_prime, matcher, budget, out) {
            return true;
        }
        out.pop();
        matcher.map = saved;
    }
    false
}

/// A recorded step: its label and the printed target term.
pub type StepRecord = (Label, String);

/// Rebuilds a symmetric execution from recorded rounds, re-deriving every
/// step through the transition relation.
pub fn replay(initial: &SymmetricNetwork, rounds: &[Vec<StepRecord>]) -> Result<SymmetricExecution, ExecutionError> {
    let mut net = initial.clone();
    let mut out = Vec::new();
    for (r, recs) in rounds.iter().enumerate() {
        let mut steps: Vec<Transition> = Vec::new();
        let mut cur = net.denote();
        for (k, (label, target)) in recs.iter().enumerate() {
            let obj = match label {
                Label::FreeInput { object, .. } => Some(object),
                _ => None,
            };
            let opts = step_options(&net, obj, &steps);
            let t = transitions_with(&cur, &opts)?
                .into_iter()
                .find(|t| &t.label == label && t.target.to_string() == *target)
                .ok_or_else(|| ExecutionError::Replay(format!("round {r}, step {k}: no `{label}` step to `{target}`")))?;
            cur = t.target.clone();
            steps.push(t);
        }
        let (next, labels) = close_round(&net, &steps)
            .ok_or_else(|| ExecutionError::Replay(format!("round {r} does not end symmetric")))?;
        out.push(Round { labels, case: RoundCase::of(&steps[0], net.degree()), steps, network: next.clone() });
        net = next;
    }
    let term = net.denote();
    let complete = transitions_with(&term, &open_options(&term, &net))?.is_empty();
    Ok(SymmetricExecution { initial: initial.clone(), rounds: out, complete })
}

/// Independent check of every symmetric-execution invariant, replaying each
/// step through the transition relation.
pub fn validate(exec: &SymmetricExecution) -> Result<(), String> {
    let mut prev = exec.initial.clone();
    let n = prev.degree();
    for (r, round) in exec.rounds.iter().enumerate() {
        let ctx = |m: String| format!("round {r}: {m}");
        if round.steps.len() != n || round.labels.len() != n {
            return Err(ctx(format!("expected {n} steps")));
        }
        let mut cur = prev.denote();
        for (k, t) in round.steps.iter().enumerate() {
            if t.source != cur {
                return Err(ctx(format!("step {k} does not continue from the previous state")));
            }
            let opts = match &t.label {
                Label::FreeInput { object, .. } => step_options(&prev, Some(object), &round.steps[..k]),
                _ => step_options(&prev, None, &round.steps[..k]),
            };
            if !is_genuine(t, &opts) {
                return Err(ctx(format!("step {k} (`{}`) does not replay", t.label)));
            }
            if round.labels[k] != t.label {
                return Err(ctx(format!("label {k} differs from its step")));
            }
            cur = t.target.clone();
        }
        let sigma = round.sigma();
        if sigma.degree() != n || !sigma.extends(prev.relation()) {
            return Err(ctx("σ does not extend its predecessor".into()));
        }
        if round.network.denote() != cur {
            return Err(ctx("recorded network differs from the reached term".into()));
        }
        if !is_symmetric(&cur, sigma, round.restriction()) {
            return Err(ctx("reached term is not symmetric".into()));
        }
        let scope = label_scope(prev.restriction(), &round.labels[0], sigma);
        if n > 1 && symmetric_action_sequence(&round.labels[0], sigma, &scope) != round.labels {
            return Err(ctx("labels are not a symmetric sequence".into()));
        }
        prev = round.network.clone();
    }
    if exec.complete {
        let term = prev.denote();
        let stuck = transitions_with(&term, &open_options(&term, &prev))
            .map(|ts| ts.is_empty())
            .unwrap_or(false);
        if !stuck {
            return Err("marked complete but the final network can move".into());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::congruent;
    use crate::parse::parse;
    use crate::symmetry::build;

    fn net(base: &str, perm: &str, degree: usize, restrict: &[&str]) -> SymmetricNetwork {
        let rel = SymmetryRelation::new(perm.parse().unwrap(), degree).unwrap();
        let x = restrict.iter().map(Name::new).collect();
        build(parse(base).unwrap(), rel, x).unwrap().0
    }

    fn lbls(xs: &[&str]) -> Vec<Label> {
        xs.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn bound_output_round_alpha_renames() {
        let net = net("new x . a!x . x! . 0", "", 2, &[]);
        let first = generator_candidates(&net).unwrap().remove(0);
        assert_eq!(first.label.to_string(), "a!(x)");
        let res = restore_symmetry(&net, &first).unwrap();
        assert_eq!(res.labels, lbls(&["a!(x)", "a!(x'1)"]));
        assert_eq!(res.next.relation().perm().to_string(), "x>x'1,x'1>x");
        assert!(congruent(&res.next.denote(), &parse("x! . 0 | x'1! . 0").unwrap()));
    }

    #[test]
    fn free_output_round() {
        let net = net("a!b . 0", "", 2, &[]);
        let ex = symmetric_execution(&net, 8).unwrap();
        assert!(ex.complete);
        assert_eq!(ex.rounds.len(), 1);
        assert_eq!(ex.rounds[0].labels, lbls(&["a!b", "a!b"]));
        assert!(ex.rounds[0].base().is_nil());
        assert!(ex.rounds[0].sigma().perm().is_identity());
        validate(&ex).unwrap();
    }

    #[test]
    fn internal_tau_round() {
        let net = net("a! . 0 | a?() . c! . 0", "", 2, &[]);
        let first = generator_candidates(&net).unwrap().remove(0);
        assert!(first.label.is_tau());
        let res = restore_symmetry(&net, &first).unwrap();
        assert_eq!(res.labels, vec![Label::Tau, Label::Tau]);
        assert_eq!(res.next.base(), &parse("0 | c! . 0").unwrap());
    }

    #[test]
    fn empty_network_is_complete() {
        let ex = symmetric_execution(&net("0", "", 2, &[]), 4).unwrap();
        assert!(ex.complete && ex.rounds.is_empty());
    }

    #[test]
    fn network_one_execution() {
        let net = net("x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0", "x>y,y>x", 2, &[]);
        let ex = symmetric_execution(&net, 16).unwrap();
        validate(&ex).unwrap();
        assert!(ex.complete);
        assert!(ex.rounds[0].labels.iter().all(Label::is_tau));
        let rest: Vec<String> = ex.rounds[1..].iter().flat_map(|r| r.labels.iter().map(|l| l.to_string())).collect();
        assert_eq!(rest, vec!["out!1", "out!1"]);
    }

    #[test]
    fn mixed_network_is_rejected_and_has_no_symmetric_execution() {
        let net = net("x! . 1! . 0 + y?() . 2! . 0", "x>y,y>x,1>2,2>1", 2, &["x", "y"]);
        assert_eq!(symmetric_execution(&net, 4).unwrap_err(), ExecutionError::NotSeparate);
        assert!(matches!(has_symmetric_execution(&net, 8), SearchVerdict::No));
    }

    #[test]
    fn search_finds_trivial_witness() {
        let net = net("a!b . 0", "", 2, &[]);
        match has_symmetric_execution(&net, 4) {
            SearchVerdict::Yes(ex) => {
                assert_eq!(ex.labels(), lbls(&["a!b", "a!b"]));
                validate(&ex).unwrap();
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn moved_input_object_is_rejected() {
        let net = net("a?(z) . 0 | b! . 0", "a>b,b>a", 2, &[]);
        let term = net.denote();
        let u = free_names(&term);
        let t = crate::semantics::transitions(&term, &u)
            .unwrap()
            .into_iter()
            .find(|t| t.label.to_string() == "a?a")
            .unwrap();
        assert_eq!(
            restore_symmetry(&net, &t).unwrap_err(),
            ExecutionError::InputObjectNotFixed(Name::new("a"))
        );
    }

    #[test]
    fn subdivide_to_degree_one() {
        let net = net("a! . 0 | a?() . c! . 0", "", 2, &[]);
        let ex = symmetric_execution(&net, 8).unwrap();
        let sub = subdivide(&ex, 1).unwrap();
        validate(&sub).unwrap();
        assert_eq!(sub.rounds.len(), ex.rounds.len());
        for (a, b) in sub.rounds.iter().zip(&ex.rounds) {
            assert_eq!(a.labels[0], b.labels[0]);
        }
    }

    #[test]
    fn subdivide_degree_four_to_two() {
        let net = net("new x . a!x . x! . 0", "", 4, &[]);
        let ex = symmetric_execution(&net, 8).unwrap();
        validate(&ex).unwrap();
        let sub = subdivide(&ex, 2).unwrap();
        validate(&sub).unwrap();
        assert_eq!(sub.initial.degree(), 2);
        assert!(sub.rounds.iter().all(|r| r.labels.len() == 2));
    }

    #[test]
    fn recorded_executions_replay() {
        let nets = [
            net("x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0", "x>y,y>x", 2, &[]),
            net("new x . a!x . x! . 0", "", 3, &[]),
            net("(new b . d!b . 0) | !c?(e) . (new b . d!b . 0)", "d>c,c>a,a>d", 3, &[]),
            net("a?(z) . z! . 0", "", 2, &[]),
        ];
        for n in nets {
            let ex = symmetric_execution(&n, 6).unwrap();
            let recs: Vec<Vec<StepRecord>> = ex
                .rounds
                .iter()
                .map(|r| r.steps.iter().map(|t| (t.label.clone(), t.target.to_string())).collect())
                .collect();
            assert_eq!(replay(&n, &recs).unwrap(), ex);
        }
    }

    #[test]
    fn subdivision_survives_reused_extruded_names() {
        // At degree 1 nothing keeps an extruded name alive, so the smaller
        // execution reuses `a'1` after it has left the term.
        let n = net("c?(a) . (0 | 0) | !c?(b) . c?(b'1) . new a . d!a . 0", "", 2, &[]);
        let ex = symmetric_execution(&n, 16).unwrap();
        let sub = subdivide(&ex, 1).unwrap();
        assert!(validate(&sub).is_ok());
        assert_eq!(sub.rounds.len(), 16);
    }

    #[test]
    fn close_round_on_communication_with_extrusion() {
        let net = net("(new z . a!z . z! . 0) | a?(w) . w?() . 0", "", 2, &[]);
        let ex = symmetric_execution(&net, 8).unwrap();
        validate(&ex).unwrap();
        assert!(ex.complete);
    }
}
