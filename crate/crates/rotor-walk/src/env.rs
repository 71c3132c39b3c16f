//! Lazily sampled rotor environment on the integer lattice.
//!
//! The initial configuration is a pure function of (environment seed, site),
//! so a site's initial rotor can be queried at any time without storing the
//! whole line: positive sites point right with probability `alpha`, negative
//! sites point left with probability `beta`, the origin is uniform. A finite
//! set of pinned overrides takes precedence over the random law. Rotors
//! change only when the walk exits a site; mutated rotors live in a dense
//! buffer over the exited interval, which a walk grows one site at a time.

use std::collections::{BTreeMap, VecDeque};

use crate::rng::{derive_seed, unit_uniform, zigzag};

/// Rotor value: +1 points right, -1 points left.
pub type Rotor = i8;

/// Finite map of pinned initial rotors, ordered by site.
pub type Overrides = BTreeMap<i64, Rotor>;

#[derive(Debug, Clone)]
pub struct RotorEnvironment {
    alpha: f64,
    beta: f64,
    law_seed: u64,
    overrides: Overrides,
    /// Current rotors of the exited interval `[lo, lo + exited.len())`.
    exited: VecDeque<Rotor>,
    lo: i64,
}

impl RotorEnvironment {
    /// Sample an (alpha, beta)-random initial configuration with the given
    /// pinned overrides. `seed` keys the site law; queries are consistent
    /// and independent of query order.
    pub fn new(alpha: f64, beta: f64, overrides: Overrides, seed: u64) -> Self {
        debug_assert!((0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta));
        RotorEnvironment {
            alpha,
            beta,
            law_seed: seed,
            overrides,
            exited: VecDeque::new(),
            lo: 0,
        }
    }

    /// Initial rotor at `x`: the pinned value if overridden, otherwise a
    /// draw from the (alpha, beta) law. Unaffected by walk mutations.
    pub fn initial_rotor(&self, x: i64) -> Rotor {
        if let Some(&r) = self.overrides.get(&x) {
            return r;
        }
        let u = unit_uniform(derive_seed(self.law_seed, zigzag(x)));
        match x.cmp(&0) {
            std::cmp::Ordering::Greater => {
                if u < self.alpha {
                    1
                } else {
                    -1
                }
            }
            std::cmp::Ordering::Less => {
                if u < self.beta {
                    -1
                } else {
                    1
                }
            }
            std::cmp::Ordering::Equal => {
                if u < 0.5 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// Current rotor at `x`: the last exit direction if the walk has exited
    /// `x`, otherwise the initial rotor.
    pub fn rotor(&self, x: i64) -> Rotor {
        if !self.exited.is_empty() {
            let idx = x - self.lo;
            if idx >= 0 && (idx as usize) < self.exited.len() {
                return self.exited[idx as usize];
            }
        }
        self.initial_rotor(x)
    }

    /// Record the exit direction of a step leaving `x`. Sites are exited in
    /// a contiguous interval, so `x` is adjacent to (or inside) the buffer.
    pub(crate) fn set_rotor(&mut self, x: i64, rotor: Rotor) {
        debug_assert!(rotor == 1 || rotor == -1);
        if self.exited.is_empty() {
            self.exited.push_back(rotor);
            self.lo = x;
            return;
        }
        let idx = x - self.lo;
        if idx >= 0 && (idx as usize) < self.exited.len() {
            self.exited[idx as usize] = rotor;
        } else if idx == -1 {
            self.exited.push_front(rotor);
            self.lo = x;
        } else if idx as usize == self.exited.len() {
            self.exited.push_back(rotor);
        } else {
            unreachable!("exited interval must stay contiguous");
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn overrides(&self) -> &Overrides {
        &self.overrides
    }
}
