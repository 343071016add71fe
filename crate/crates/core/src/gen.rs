//! Seeded random terms, symmetries and renamings for property suites.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::name::{FreshSupply, Name};
use crate::semantics::freshen;
use crate::subst::{Substitution, SymmetryRelation};
use crate::symmetry::SymmetricNetwork;
use crate::syntax::{bound_names, free_names, Branch, Prefix, Process};

pub const POOL: [&str; 4] = ["a", "b", "c", "d"];

pub struct Gen {
    rng: ChaCha8Rng,
    pool: Vec<Name>,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pool: POOL.iter().map(Name::new).collect(),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn pick(&mut self) -> Name {
        self.pool.choose(&mut self.rng).unwrap().clone()
    }

    /// A hygienic separate-choice term of at most `max_size` nodes.
    pub fn sep_process(&mut self, max_size: usize) -> Process {
        let raw = self.raw(max_size.max(1));
        freshen(&raw, &BTreeSet::new(), &mut FreshSupply::new(BTreeSet::new()))
    }

    fn raw(&mut self, budget: usize) -> Process {
        if budget <= 1 {
            return if self.rng.gen_bool(0.1) { Process::Success } else { Process::nil() };
        }
        match self.rng.gen_range(0..20) {
            0..=1 => Process::nil(),
            2..=11 => self.sum(budget),
            12..=15 if budget >= 3 => {
                let left = self.rng.gen_range(1..budget - 1);
                let (l, r) = (self.raw(left), self.raw(budget - 1 - left));
                Process::par(vec![l, r])
            }
            16..=17 => {
                let x = self.pick();
                Process::res(x, self.raw(budget - 1))
            }
            18 if budget >= 3 => {
                // Guarded replication keeps unfolding driven by communication.
                let c = self.pick();
                let x = self.pick();
                Process::rep(Process::input(c, x, self.raw(budget - 2)))
            }
            _ => self.sum(budget),
        }
    }

    /// A sum whose branches are all inputs or all outputs/τ.
    fn sum(&mut self, budget: usize) -> Process {
        let inputs = self.rng.gen_bool(0.5);
        let k = self.rng.gen_range(1..=3.min(budget / 2).max(1));
        let mut left = budget;
        let mut branches = Vec::new();
        for i in 0..k {
            let share = if i + 1 == k { left } else { self.rng.gen_range(2..=left - 2 * (k - 1 - i)) };
            left -= share;
            let prefix = self.prefix(inputs);
            let body = self.raw(share - 1);
            branches.push(Branch { prefix, body });
        }
        Process::Sum(branches)
    }

    fn prefix(&mut self, input: bool) -> Prefix {
        let channel = self.pick();
        if input {
            let binder = if self.rng.gen_bool(0.3) { Name::unit() } else { self.pick() };
            Prefix::Input { channel, binder }
        } else if self.rng.gen_bool(0.15) {
            Prefix::Tau
        } else {
            let datum = if self.rng.gen_bool(0.3) { Name::unit() } else { self.pick() };
            Prefix::Output { channel, datum }
        }
    }

    /// A random valid symmetry of `degree` for `p`: disjoint `degree`-cycles
    /// over pool and free names, avoiding bound names.
    pub fn symmetry(&mut self, p: &Process, degree: usize) -> SymmetryRelation {
        let bn = bound_names(p);
        let mut cands: Vec<Name> = self
            .pool
            .iter()
            .cloned()
            .chain(free_names(p))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter(|n| !bn.contains(n) && !n.is_unit())
            .collect();
        cands.shuffle(&mut self.rng);
        let mut pairs = Vec::new();
        if degree >= 2 {
            for cycle in cands.chunks_exact(degree) {
                if self.rng.gen_bool(0.6) {
                    for (i, x) in cycle.iter().enumerate() {
                        pairs.push((x.clone(), cycle[(i + 1) % degree].clone()));
                    }
                }
            }
        }
        SymmetryRelation::new(Substitution::from_pairs(pairs), degree.max(1))
            .expect("generated cycles have the requested degree")
    }

    /// A random σ-closed restriction made of whole orbits of free names.
    pub fn restriction(&mut self, p: &Process, sigma: &SymmetryRelation) -> Vec<Name> {
        let fns = free_names(p);
        let mut out: Vec<Name> = Vec::new();
        for x in &fns {
            if out.contains(x) {
                continue;
            }
            let orbit = sigma.orbit(x);
            if orbit.iter().all(|y| fns.contains(y)) && self.rng.gen_bool(0.4) {
                out.extend(orbit);
            }
        }
        out
    }

    /// A random network of the given degree; retries until the invariants hold.
    pub fn network(&mut self, max_size: usize, degree: usize) -> SymmetricNetwork {
        loop {
            let p = self.sep_process(max_size);
            let sigma = self.symmetry(&p, degree);
            let x = self.restriction(&p, &sigma);
            if let Ok(net) = SymmetricNetwork::new(p, sigma, x) {
                return net;
            }
        }
    }

    /// An injective renaming of the free names of `p`, into the pool and
    /// fresh names `e0, e1, …`, avoiding the bound names of `p`.
    pub fn renaming(&mut self, p: &Process) -> Substitution {
        let fns: Vec<Name> = free_names(p).into_iter().filter(|n| !n.is_unit()).collect();
        let bn = bound_names(p);
        let mut targets: Vec<Name> = self.pool.iter().filter(|n| !bn.contains(*n)).cloned().collect();
        targets.extend((0..fns.len()).map(|i| Name::new(format!("e{i}"))));
        targets.shuffle(&mut self.rng);
        Substitution::from_pairs(fns.into_iter().zip(targets))
    }
}
