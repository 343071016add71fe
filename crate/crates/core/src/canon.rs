//! Canonical forms deciding structural congruence.
//!
//! A term is flattened into blocks: the restrictions that can be extruded to a
//! parallel composition, and the prefix sums, replications and successes under
//! them. Blocks are encoded namelessly (bound names become binding levels) and
//! their components sorted, so congruent terms encode identically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::name::{FreshSupply, Name};
use crate::syntax::{all_names, free_names, Branch, Prefix, Process};

/// Blocks with more restrictions than this are numbered by first use instead
/// of by exhaustive search.
const EXHAUSTIVE_LIMIT: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Slot {
    Bound(usize),
    Free(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EPrefix {
    Tau,
    Out(Slot, Slot),
    /// Binds the next level.
    In(Slot),
    InUnit(Slot),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EAtom {
    Success,
    Sum(Vec<(EPrefix, EBlock)>),
    Rep(EBlock),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct EBlock {
    nres: usize,
    atoms: Vec<EAtom>,
}

/// The canonical representative of a congruence class.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    encoding: EBlock,
    term: Process,
}

impl CanonicalForm {
    /// The canonical term, with bound names `_c0`, `_c1`, … by binding level.
    pub fn term(&self) -> &Process {
        &self.term
    }

    /// Number of restrictions extruded to the top level.
    pub fn top_restrictions(&self) -> usize {
        self.encoding.nres
    }

    /// True if a success marker is a top-level component.
    pub fn has_top_success(&self) -> bool {
        self.encoding.atoms.iter().any(|a| matches!(a, EAtom::Success))
    }
}

impl PartialEq for CanonicalForm {
    fn eq(&self, other: &Self) -> bool {
        self.encoding == other.encoding
    }
}

impl Eq for CanonicalForm {}

impl PartialOrd for CanonicalForm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalForm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.encoding.cmp(&other.encoding)
    }
}

impl Hash for CanonicalForm {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.encoding.hash(state)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.term.fmt(f)
    }
}

pub fn canonical(p: &Process) -> CanonicalForm {
    let p = uniquify(p);
    let encoding = encode_block(&p, &BTreeMap::new(), 0);
    let fns = free_names(&p);
    let prefix = binder_prefix(&fns);
    let term = decode_block(&encoding, 0, &prefix);
    CanonicalForm { encoding, term }
}

/// Structural congruence: alpha-conversion, scope extrusion and the
/// commutative monoid laws of `|` (without `P | 0 ≡ P`).
pub fn congruent(p: &Process, q: &Process) -> bool {
    canonical(p) == canonical(q)
}

/// Renames every binder to a distinct name not occurring elsewhere.
fn uniquify(p: &Process) -> Process {
    let mut supply = FreshSupply::new(all_names(p));
    uniq(p, &BTreeMap::new(), &mut supply)
}

fn uniq(p: &Process, env: &BTreeMap<Name, Name>, supply: &mut FreshSupply) -> Process {
    let get = |n: &Name| env.get(n).cloned().unwrap_or_else(|| n.clone());
    match p {
        Process::Success => Process::Success,
        Process::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Input { channel, binder } if !binder.is_unit() => {
                        let nb = supply.fresh(binder);
                        let mut env2 = env.clone();
                        env2.insert(binder.clone(), nb.clone());
                        Branch {
                            prefix: Prefix::Input { channel: get(channel), binder: nb },
                            body: uniq(&b.body, &env2, supply),
                        }
                    }
                    Prefix::Input { channel, binder } => Branch {
                        prefix: Prefix::Input { channel: get(channel), binder: binder.clone() },
                        body: uniq(&b.body, env, supply),
                    },
                    Prefix::Output { channel, datum } => Branch {
                        prefix: Prefix::Output { channel: get(channel), datum: get(datum) },
                        body: uniq(&b.body, env, supply),
                    },
                    Prefix::Tau => Branch { prefix: Prefix::Tau, body: uniq(&b.body, env, supply) },
                })
                .collect(),
        ),
        Process::Par(ps) => Process::Par(ps.iter().map(|q| uniq(q, env, supply)).collect()),
        Process::Res(x, q) => {
            let nx = supply.fresh(x);
            let mut env2 = env.clone();
            env2.insert(x.clone(), nx.clone());
            Process::Res(nx, Box::new(uniq(q, &env2, supply)))
        }
        Process::Rep(q) => Process::Rep(Box::new(uniq(q, env, supply))),
    }
}

/// Splits a term into extrudable restrictions and atomic components.
fn flatten<'a>(p: &'a Process, names: &mut Vec<Name>, atoms: &mut Vec<&'a Process>) {
    match p {
        Process::Par(ps) => ps.iter().for_each(|q| flatten(q, names, atoms)),
        Process::Res(x, q) => {
            names.push(x.clone());
            flatten(q, names, atoms);
        }
        other => atoms.push(other),
    }
}

fn slot(env: &BTreeMap<Name, usize>, n: &Name) -> Slot {
    match env.get(n) {
        Some(l) => Slot::Bound(*l),
        None => Slot::Free(n.clone()),
    }
}

fn encode_atom(p: &Process, env: &BTreeMap<Name, usize>, depth: usize) -> EAtom {
    match p {
        Process::Success => EAtom::Success,
        Process::Rep(q) => EAtom::Rep(encode_block(q, env, depth)),
        Process::Sum(bs) => EAtom::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Tau => (EPrefix::Tau, encode_block(&b.body, env, depth)),
                    Prefix::Output { channel, datum } => (
                        EPrefix::Out(slot(env, channel), slot(env, datum)),
                        encode_block(&b.body, env, depth),
                    ),
                    Prefix::Input { channel, binder } if binder.is_unit() => (
                        EPrefix::InUnit(slot(env, channel)),
                        encode_block(&b.body, env, depth),
                    ),
                    Prefix::Input { channel, binder } => {
                        let mut env2 = env.clone();
                        env2.insert(binder.clone(), depth);
                        (
                            EPrefix::In(slot(env, channel)),
                            encode_block(&b.body, &env2, depth + 1),
                        )
                    }
                })
                .collect(),
        ),
        Process::Par(_) | Process::Res(..) => unreachable!("flattened away"),
    }
}

fn encode_with(
    atoms: &[&Process],
    order: &[Name],
    env: &BTreeMap<Name, usize>,
    depth: usize,
) -> Vec<EAtom> {
    let mut env2 = env.clone();
    for (k, n) in order.iter().enumerate() {
        env2.insert(n.clone(), depth + k);
    }
    let inner = depth + order.len();
    let mut out: Vec<EAtom> = atoms.iter().map(|a| encode_atom(a, &env2, inner)).collect();
    out.sort();
    out
}

fn encode_block(p: &Process, env: &BTreeMap<Name, usize>, depth: usize) -> EBlock {
    let mut names = Vec::new();
    let mut atoms = Vec::new();
    flatten(p, &mut names, &mut atoms);
    let mut used = BTreeSet::new();
    for a in &atoms {
        used.extend(free_names(a));
    }
    // Unused restrictions are interchangeable; they take the last levels.
    let (live, dead): (Vec<Name>, Vec<Name>) = names.into_iter().partition(|n| used.contains(n));
    let best_order = if live.len() <= EXHAUSTIVE_LIMIT {
        let mut best: Option<(Vec<EAtom>, Vec<Name>)> = None;
        for perm in permutations(&live) {
            let mut order = perm;
            order.extend(dead.iter().cloned());
            let enc = encode_with(&atoms, &order, env, depth);
            if best.as_ref().is_none_or(|(b, _)| &enc < b) {
                best = Some((enc, order));
            }
        }
        best.map(|(_, o)| o).unwrap_or_default()
    } else {
        first_use_order(&atoms, &live, &dead, env, depth)
    };
    EBlock { nres: best_order.len(), atoms: encode_with(&atoms, &best_order, env, depth) }
}

/// Heuristic numbering: sort atoms with the local names hidden, then number
/// locals by first occurrence.
fn first_use_order(
    atoms: &[&Process],
    live: &[Name],
    dead: &[Name],
    env: &BTreeMap<Name, usize>,
    depth: usize,
) -> Vec<Name> {
    let hidden: BTreeSet<&Name> = live.iter().collect();
    let mut keyed: Vec<(EAtom, &Process)> = atoms
        .iter()
        .map(|a| {
            let masked = crate::subst::rename_all(a, &|n| {
                if hidden.contains(n) {
                    Name::new("_local")
                } else {
                    n.clone()
                }
            });
            (encode_atom(&masked, env, depth + live.len() + dead.len()), *a)
        })
        .collect();
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    let mut order: Vec<Name> = Vec::new();
    for (_, a) in keyed {
        for n in occurrence_order(a) {
            if hidden.contains(&n) && !order.contains(&n) {
                order.push(n);
            }
        }
    }
    order.extend(dead.iter().cloned());
    order
}

fn occurrence_order(p: &Process) -> Vec<Name> {
    fn walk(p: &Process, out: &mut Vec<Name>) {
        match p {
            Process::Sum(bs) => {
                for b in bs {
                    match &b.prefix {
                        Prefix::Output { channel, datum } => {
                            out.push(channel.clone());
                            out.push(datum.clone());
                        }
                        Prefix::Input { channel, .. } => out.push(channel.clone()),
                        Prefix::Tau => {}
                    }
                    walk(&b.body, out);
                }
            }
            Process::Par(ps) => ps.iter().for_each(|q| walk(q, out)),
            Process::Res(_, q) | Process::Rep(q) => walk(q, out),
            Process::Success => {}
        }
    }
    let mut out = Vec::new();
    walk(p, &mut out);
    out
}

fn permutations(items: &[Name]) -> Vec<Vec<Name>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

fn binder_prefix(fns: &BTreeSet<Name>) -> String {
    let mut prefix = String::from("_c");
    loop {
        let clash = fns.iter().any(|n| {
            n.as_str()
                .strip_prefix(prefix.as_str())
                .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
        });
        if !clash {
            return prefix;
        }
        prefix.push('c');
    }
}

fn level_name(prefix: &str, level: usize) -> Name {
    Name::new(format!("{prefix}{level}"))
}

fn decode_slot(s: &Slot, prefix: &str) -> Name {
    match s {
        Slot::Bound(l) => level_name(prefix, *l),
        Slot::Free(n) => n.clone(),
    }
}

fn decode_block(b: &EBlock, depth: usize, prefix: &str) -> Process {
    let inner = depth + b.nres;
    let atoms: Vec<Process> = b.atoms.iter().map(|a| decode_atom(a, inner, prefix)).collect();
    let names: Vec<Name> = (depth..inner).map(|l| level_name(prefix, l)).collect();
    Process::res_all(&names, Process::par(atoms))
}

fn decode_atom(a: &EAtom, depth: usize, prefix: &str) -> Process {
    match a {
        EAtom::Success => Process::Success,
        EAtom::Rep(b) => Process::rep(decode_block(b, depth, prefix)),
        EAtom::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|(pre, body)| match pre {
                    EPrefix::Tau => Branch { prefix: Prefix::Tau, body: decode_block(body, depth, prefix) },
                    EPrefix::Out(c, d) => Branch {
                        prefix: Prefix::Output {
                            channel: decode_slot(c, prefix),
                            datum: decode_slot(d, prefix),
                        },
                        body: decode_block(body, depth, prefix),
                    },
                    EPrefix::InUnit(c) => Branch {
                        prefix: Prefix::Input { channel: decode_slot(c, prefix), binder: Name::unit() },
                        body: decode_block(body, depth, prefix),
                    },
                    EPrefix::In(c) => Branch {
                        prefix: Prefix::Input {
                            channel: decode_slot(c, prefix),
                            binder: level_name(prefix, depth),
                        },
                        body: decode_block(body, depth + 1, prefix),
                    },
                })
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse, parse_raw};

    fn cong(a: &str, b: &str) -> bool {
        congruent(&parse_raw(a).unwrap(), &parse_raw(b).unwrap())
    }

    #[test]
    fn spec_examples() {
        assert!(cong("x!y . 0 | 0", "0 | x!y . 0"));
        assert!(cong("new x . x?(z) . 0", "new w . w?(z') . 0"));
        assert!(cong("(new x . x!a . 0) | a?(z) . 0", "new x . (x!a . 0 | a?(z) . 0)"));
        assert!(cong("out!1 . 0 | out!2 . 0", "out!2 . 0 | out!1 . 0"));
    }

    #[test]
    fn distinguishes() {
        assert!(!cong("x!y . 0", "x!z . 0"));
        assert!(!cong("new x . x!a . 0", "x!a . 0"));
        assert!(!cong("x!y . 0 | 0", "x!y . 0"));
        assert!(!cong("a! . 0 + b! . 0", "b! . 0 + a! . 0"));
        assert!(!cong("new x,y . a!x . a!y . 0", "new x . a!x . a!x . 0"));
    }

    #[test]
    fn idempotent() {
        for src in ["0 | 0", "new x . (x!a . 0 | new y . y?(z) . z!x . 0)", "!(new q . q!) | check"] {
            let c = canonical(&parse(src).unwrap());
            let again = canonical(c.term());
            assert_eq!(c, again);
            assert_eq!(c.term(), again.term());
        }
    }

    #[test]
    fn restriction_order_irrelevant() {
        assert!(cong("new x,y . (x!y . 0 | y!x . 0)", "new y,x . (y!x . 0 | x!y . 0)"));
        assert!(cong("new a . a!b . 0 | new c . c!d . 0", "new c . c!d . 0 | new a . a!b . 0"));
    }

    #[test]
    fn avoids_binder_clash_with_free_names() {
        let c = canonical(&parse("new x . x!_c0 . 0").unwrap());
        assert_eq!(c.term(), &parse("new _cc0 . _cc0!_c0 . 0").unwrap());
    }
}
