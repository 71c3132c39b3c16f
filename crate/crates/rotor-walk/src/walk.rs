//! The p-rotor walk engine.
//!
//! One step from site `x`: flip a coin that is +1 with probability `p`
//! (the rotor is broken and keeps its direction) and -1 otherwise (the
//! rotor flips), multiply the rotor at `x` by the coin, then move in the
//! direction of the updated rotor. A trajectory is the sequence of
//! positions together with running extrema and per-step records.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Overrides, Rotor, RotorEnvironment};
use crate::error::{Error, Result};
use crate::params::WalkParams;
use crate::rng::{derive_seed, ensemble_seed, stream_rng, STREAM_COIN, STREAM_ENV, STREAM_TRAJECTORY};

/// Hard cap on in-memory per-step records; longer runs must stream.
pub const RECORDING_STEP_LIMIT: usize = 5_000_000;

/// Everything observed while performing step `index` from `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Step number n; the walk moves from X_n to X_{n+1}.
    pub index: u64,
    /// Position X_n before the move.
    pub position: i64,
    /// Coin value: +1 broken (rotor kept), -1 working (rotor flipped).
    pub coin: i8,
    /// Rotor at the site after the coin acted; equals the displacement.
    pub rotor_after: i8,
    /// X_n exceeds every earlier position (strict new maximum).
    pub new_max: bool,
    /// X_n is below every earlier position (strict new minimum).
    pub new_min: bool,
    /// The rotor at X_n was still in its initial state before this step.
    pub fresh: bool,
}

impl StepRecord {
    /// Displacement of this step; the walk always follows the updated rotor.
    pub fn displacement(&self) -> i64 {
        self.rotor_after as i64
    }

    /// Rotor at the site before the coin acted.
    pub fn rotor_before(&self) -> Rotor {
        self.coin * self.rotor_after
    }
}

/// A fully recorded walk: positions, running extrema and per-step records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: WalkParams,
    pub seed: u64,
    pub positions: Vec<i64>,
    pub running_max: Vec<i64>,
    pub running_min: Vec<i64>,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    /// Number of steps taken (positions run from X_0 to X_len).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Streaming observables of a walk: endpoint state, origin returns,
/// decomposition accumulators and optional mid-run snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkSummary {
    pub params: WalkParams,
    pub seed: u64,
    pub n_steps: u64,
    pub position: i64,
    pub max: i64,
    pub min: i64,
    /// Number of visits to the origin after step 0.
    pub returns_to_origin: u64,
    pub first_return: Option<u64>,
    /// Steps (k >= 1) whose direction differed from the previous step.
    pub reversals: u64,
    /// Martingale part Y_n = sum of (displacement - conditional drift).
    pub martingale: f64,
    /// Compensator Z_n = sum of conditional drifts.
    pub compensator: f64,
    /// Quadratic variation V_n = sum over 1 <= k <= n-1 of (1 - drift_k^2);
    /// run one extra step to obtain V at the horizon of interest.
    pub quadratic_variation: f64,
    /// (step, position, max, min) at each requested snapshot step.
    pub snapshots: Vec<(u64, i64, i64, i64)>,
}

/// Incremental p-rotor walk over a rotor environment.
#[derive(Debug, Clone)]
pub struct Walker {
    env: RotorEnvironment,
    params: WalkParams,
    coin_rng: ChaCha8Rng,
    n: u64,
    position: i64,
    max: i64,
    min: i64,
    arrived_new_max: bool,
    arrived_new_min: bool,
    last_displacement: i8,
    // drift constants of the (alpha, beta) law
    drift_interior: f64,
    drift_new_min: f64,
    drift_new_max: f64,
    // accumulators
    martingale: f64,
    compensator: f64,
    quadratic_variation: f64,
    returns_to_origin: u64,
    first_return: Option<u64>,
    reversals: u64,
}

impl Walker {
    /// Start a walk at the origin. The coin sequence and the environment
    /// law use disjoint substreams of `seed`.
    pub fn new(params: WalkParams, seed: u64, overrides: Overrides) -> Self {
        let env = RotorEnvironment::new(
            params.alpha(),
            params.beta(),
            overrides,
            derive_seed(seed, STREAM_ENV),
        );
        let drift = 2.0 * params.p() - 1.0;
        Walker {
            env,
            params,
            coin_rng: stream_rng(derive_seed(seed, STREAM_COIN)),
            n: 0,
            position: 0,
            max: 0,
            min: 0,
            arrived_new_max: false,
            arrived_new_min: false,
            last_displacement: 0,
            drift_interior: drift,
            drift_new_min: drift * (1.0 - 2.0 * params.beta()),
            drift_new_max: drift * (2.0 * params.alpha() - 1.0),
            martingale: 0.0,
            compensator: 0.0,
            quadratic_variation: 0.0,
            returns_to_origin: 0,
            first_return: None,
            reversals: 0,
        }
    }

    /// Perform one step and return its record.
    pub fn step(&mut self) -> StepRecord {
        let n = self.n;
        let x = self.position;
        let new_max = self.arrived_new_max;
        let new_min = self.arrived_new_min;
        let fresh = n == 0 || new_max || new_min;

        let rotor_before = self.env.rotor(x);
        let coin: i8 = if self.coin_rng.random::<f64>() < self.params.p() {
            1
        } else {
            -1
        };
        let rotor_after = coin * rotor_before;
        self.env.set_rotor(x, rotor_after);

        // Conditional drift E[displacement | history] of this step.
        let drift = if n == 0 {
            0.0 // uniform origin rotor
        } else if new_min {
            self.drift_new_min
        } else if new_max {
            self.drift_new_max
        } else {
            self.drift_interior * rotor_before as f64
        };
        self.compensator += drift;
        self.martingale += rotor_after as f64 - drift;
        if n >= 1 {
            self.quadratic_variation += 1.0 - drift * drift;
            if rotor_after != self.last_displacement {
                self.reversals += 1;
            }
        }
        self.last_displacement = rotor_after;

        let next = x + rotor_after as i64;
        self.position = next;
        self.n = n + 1;
        self.arrived_new_max = next > self.max;
        self.arrived_new_min = next < self.min;
        if self.arrived_new_max {
            self.max = next;
        }
        if self.arrived_new_min {
            self.min = next;
        }
        if next == 0 {
            self.returns_to_origin += 1;
            if self.first_return.is_none() {
                self.first_return = Some(self.n);
            }
        }

        StepRecord {
            index: n,
            position: x,
            coin,
            rotor_after,
            new_max,
            new_min,
            fresh,
        }
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    pub fn running_max(&self) -> i64 {
        self.max
    }

    pub fn running_min(&self) -> i64 {
        self.min
    }

    pub fn steps_taken(&self) -> u64 {
        self.n
    }

    pub fn environment(&self) -> &RotorEnvironment {
        &self.env
    }

    /// Check the visited-interval orientation: every exited site left of the
    /// walker carries rotor +1, every exited site right of it rotor -1.
    /// Returns the first offending site, if any.
    pub fn orientation_violation(&self) -> Option<i64> {
        for x in self.min..=self.max {
            if x == self.position {
                continue;
            }
            let want: Rotor = if x < self.position { 1 } else { -1 };
            if self.env.rotor(x) != want {
                return Some(x);
            }
        }
        None
    }

    fn summary(&self, seed: u64, snapshots: Vec<(u64, i64, i64, i64)>) -> WalkSummary {
        WalkSummary {
            params: self.params,
            seed,
            n_steps: self.n,
            position: self.position,
            max: self.max,
            min: self.min,
            returns_to_origin: self.returns_to_origin,
            first_return: self.first_return,
            reversals: self.reversals,
            martingale: self.martingale,
            compensator: self.compensator,
            quadratic_variation: self.quadratic_variation,
            snapshots,
        }
    }
}

/// Run a fully recorded walk of `n_steps` steps.
pub fn run_walk(params: &WalkParams, n_steps: usize, seed: u64, overrides: Overrides) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    if n_steps > RECORDING_STEP_LIMIT {
        return Err(Error::RecordingBudget {
            requested: n_steps,
            limit: RECORDING_STEP_LIMIT,
        });
    }
    let mut walker = Walker::new(*params, seed, overrides);
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut running_max = Vec::with_capacity(n_steps + 1);
    let mut running_min = Vec::with_capacity(n_steps + 1);
    let mut steps = Vec::with_capacity(n_steps);
    positions.push(0);
    running_max.push(0);
    running_min.push(0);
    for _ in 0..n_steps {
        steps.push(walker.step());
        positions.push(walker.position());
        running_max.push(walker.running_max());
        running_min.push(walker.running_min());
    }
    Ok(Trajectory {
        params: *params,
        seed,
        positions,
        running_max,
        running_min,
        steps,
    })
}

/// Run a walk keeping O(1) state: endpoint, extrema, return statistics and
/// decomposition accumulators, plus the walk state at the given snapshot
/// steps (strictly increasing, each <= n_steps).
pub fn run_walk_streaming(
    params: &WalkParams,
    n_steps: u64,
    seed: u64,
    overrides: Overrides,
    snapshot_steps: &[u64],
) -> WalkSummary {
    let mut walker = Walker::new(*params, seed, overrides);
    let mut snapshots = Vec::with_capacity(snapshot_steps.len());
    let mut next_snap = 0;
    if snapshot_steps.first() == Some(&0) {
        snapshots.push((0, 0, 0, 0));
        next_snap = 1;
    }
    for k in 1..=n_steps {
        walker.step();
        if next_snap < snapshot_steps.len() && snapshot_steps[next_snap] == k {
            snapshots.push((k, walker.position(), walker.running_max(), walker.running_min()));
            next_snap += 1;
        }
    }
    walker.summary(seed, snapshots)
}

/// Endpoint and running-maximum marginals of a walk ensemble at one
/// rescaled time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeMarginal {
    pub time: f64,
    pub step: u64,
    /// X(nt) / sqrt(n) across the ensemble.
    pub endpoints: Vec<f64>,
    /// M(nt) / sqrt(n) across the ensemble.
    pub maxima: Vec<f64>,
}

/// Simulate `count` independent walks of horizon `n_steps` and collect the
/// rescaled endpoint and maximum marginals at each requested time
/// (`step = round(time * n_steps)`). Deterministic in `master_seed` and
/// independent of thread count.
pub fn endpoint_ensemble(
    params: &WalkParams,
    n_steps: u64,
    times: &[f64],
    count: usize,
    master_seed: u64,
    overrides: &Overrides,
) -> Vec<TimeMarginal> {
    let steps: Vec<u64> = times.iter().map(|t| (t * n_steps as f64).round() as u64).collect();
    let mut sorted = steps.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let scale = 1.0 / (n_steps as f64).sqrt();

    let summaries: Vec<WalkSummary> = (0..count)
        .into_par_iter()
        .map(|i| {
            let seed = ensemble_seed(master_seed, STREAM_TRAJECTORY, i as u64);
            run_walk_streaming(params, n_steps, seed, overrides.clone(), &sorted)
        })
        .collect();

    times
        .iter()
        .zip(&steps)
        .map(|(&time, &step)| {
            let mut endpoints = Vec::with_capacity(count);
            let mut maxima = Vec::with_capacity(count);
            for s in &summaries {
                let (_, x, max, _) = *s
                    .snapshots
                    .iter()
                    .find(|(k, ..)| *k == step)
                    .expect("snapshot recorded for every requested step");
                endpoints.push(x as f64 * scale);
                maxima.push(max as f64 * scale);
            }
            TimeMarginal { time, step, endpoints, maxima }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::binomial_ci_check;

    fn pinned(range: std::ops::RangeInclusive<i64>, rotor: Rotor) -> Overrides {
        range.map(|x| (x, rotor)).collect()
    }

    #[test]
    fn deterministic_walk_follows_initial_rotors() {
        // p = 1: rotors never flip, so the walk rides the all-right field.
        let params = WalkParams::with_any_p(1.0, 0.5, 0.5).unwrap();
        let traj = run_walk(&params, 50, 3, pinned(0..=50, 1)).unwrap();
        let expect: Vec<i64> = (0..=50).collect();
        assert_eq!(traj.positions, expect);
    }

    #[test]
    fn nearly_working_rotor_flips_and_goes_left() {
        // p = 0.001: the first step almost surely flips the pinned +1 rotor
        // at the origin and moves to -1.
        let params = WalkParams::new(0.001, 0.5, 0.5).unwrap();
        let trials = 20_000u64;
        let went_left = (0..trials)
            .filter(|&s| {
                let mut w = Walker::new(params, s, pinned(-10..=10, 1));
                let rec = w.step();
                rec.rotor_after == -1 && w.position() == -1
            })
            .count() as u64;
        assert!(binomial_ci_check(went_left, trials, 0.999, 3.0).unwrap());
    }

    #[test]
    fn fair_coin_walks_like_simple_random_walk() {
        // p = 1/2: each displacement is an independent fair sign.
        let params = WalkParams::new(0.5, 0.3, 0.9).unwrap();
        let traj = run_walk(&params, 100_000, 17, Overrides::new()).unwrap();
        let ups = traj.steps.iter().filter(|s| s.rotor_after == 1).count() as u64;
        assert!(binomial_ci_check(ups, 100_000, 0.5, 3.0).unwrap());
    }

    #[test]
    fn same_seed_reproduces_trajectory() {
        let params = WalkParams::new(0.75, 1.0, 0.0).unwrap();
        let a = run_walk(&params, 5_000, 42, Overrides::new()).unwrap();
        let b = run_walk(&params, 5_000, 42, Overrides::new()).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.steps, b.steps);
        let c = run_walk(&params, 5_000, 43, Overrides::new()).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn single_step_is_nearest_neighbor() {
        for seed in 0..20 {
            let params = WalkParams::new(0.3, 0.2, 0.8).unwrap();
            let traj = run_walk(&params, 1, seed, Overrides::new()).unwrap();
            assert_eq!(traj.positions[0], 0);
            assert_eq!(traj.positions[1].abs(), 1);
        }
    }

    #[test]
    fn step_record_algebra_and_extrema_invariants() {
        let params = WalkParams::new(0.7, 0.6, 0.1).unwrap();
        let traj = run_walk(&params, 10_000, 9, Overrides::new()).unwrap();
        for (n, s) in traj.steps.iter().enumerate() {
            assert_eq!(s.position, traj.positions[n]);
            assert_eq!(traj.positions[n + 1] - traj.positions[n], s.displacement());
            assert_eq!(s.rotor_after, s.coin * s.rotor_before());
            assert!(!(s.new_max && s.new_min));
            let fresh = n == 0 || s.new_max || s.new_min;
            assert_eq!(s.fresh, fresh);
        }
        for n in 0..traj.positions.len() {
            let x = traj.positions[n];
            assert!(traj.running_min[n] <= x && x <= traj.running_max[n]);
            assert_eq!(traj.running_max[n], *traj.positions[..=n].iter().max().unwrap());
            assert_eq!(traj.running_min[n], *traj.positions[..=n].iter().min().unwrap());
        }
    }

    #[test]
    fn visited_interval_points_at_walker() {
        // Exhaustive orientation scan after every step.
        for seed in 0..25 {
            let params = WalkParams::new(0.35, 0.8, 0.4).unwrap();
            let mut w = Walker::new(params, seed, Overrides::new());
            for _ in 0..2_000 {
                w.step();
                assert_eq!(w.orientation_violation(), None);
            }
        }
    }

    #[test]
    fn recording_budget_is_enforced() {
        let params = WalkParams::new(0.5, 0.5, 0.5).unwrap();
        let err = run_walk(&params, RECORDING_STEP_LIMIT + 1, 0, Overrides::new());
        assert!(matches!(err, Err(Error::RecordingBudget { .. })));
    }

    #[test]
    fn streaming_matches_recorded_run() {
        let params = WalkParams::new(0.25, 1.0, 0.5).unwrap();
        let traj = run_walk(&params, 4_000, 77, Overrides::new()).unwrap();
        let summary = run_walk_streaming(&params, 4_000, 77, Overrides::new(), &[1_000, 4_000]);
        assert_eq!(summary.position, *traj.positions.last().unwrap());
        assert_eq!(summary.max, *traj.running_max.last().unwrap());
        assert_eq!(summary.min, *traj.running_min.last().unwrap());
        assert_eq!(summary.snapshots[0], (1_000, traj.positions[1_000], traj.running_max[1_000], traj.running_min[1_000]));
        let returns = traj.positions[1..].iter().filter(|&&x| x == 0).count() as u64;
        assert_eq!(summary.returns_to_origin, returns);
    }

    #[test]
    fn native_reversal_frequency_matches_break_probability() {
        // alpha = beta = 0: every step reverses direction iff the rotor is
        // broken, so reversals are Bernoulli(p) among steps k >= 1.
        let params = WalkParams::new(0.25, 0.0, 0.0).unwrap();
        let s = run_walk_streaming(&params, 200_000, 5, Overrides::new(), &[]);
        assert!(binomial_ci_check(s.reversals, 200_000 - 1, 0.25, 3.0).unwrap());
    }

    #[test]
    fn ensemble_is_order_independent() {
        let params = WalkParams::new(0.75, 1.0, 0.0).unwrap();
        let a = endpoint_ensemble(&params, 400, &[0.5, 1.0], 64, 123, &Overrides::new());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| endpoint_ensemble(&params, 400, &[0.5, 1.0], 64, 123, &Overrides::new()));
        assert_eq!(a[0].endpoints, b[0].endpoints);
        assert_eq!(a[1].maxima, b[1].maxima);
        assert_eq!(a[1].step, 400);
    }
}
