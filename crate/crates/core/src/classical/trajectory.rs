use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{ParticleState, Table, Vec2, Wall};
use crate::error::{Error, Result};
use crate::scales::BilliardParams;

/// Reflections allowed between consecutive piston hits before the run is
/// declared trapped (a near-vertical orbit of the flat box).
pub const STEP_BUDGET: usize = 1_000_000;

/// One reflection off the piston.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PistonCollision {
    pub t: f64,
    pub y: f64,
    /// Angle from the wall normal, positive when moving up.
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionSequence {
    pub records: Vec<PistonCollision>,
    pub t_total: f64,
    pub params: BilliardParams,
    pub seed: Option<u64>,
}

impl CollisionSequence {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Impulses `2 m v cosθ` for a parallel piston displacement.
    pub fn impulses(&self) -> Vec<f64> {
        self.impulses_with(|_| 1.0)
    }

    /// Impulses weighted by the piston displacement profile `D_f(y)`.
    pub fn impulses_with(&self, df: impl Fn(f64) -> f64) -> Vec<f64> {
        let scale = 2.0 * self.params.mass * self.params.speed();
        self.records.iter().map(|r| scale * r.theta.cos() * df(r.y)).collect()
    }

    /// Checks the ordering invariant.
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.records.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(Error::Unsorted(i + 1));
            }
        }
        if let Some(last) = self.records.last() {
            if self.t_total < last.t {
                return Err(Error::Format(format!(
                    "t_total {} precedes last collision {}",
                    self.t_total, last.t
                )));
            }
        }
        self.params.validate()
    }
}

fn random_state(table: &Table, rng: &mut impl Rng) -> ParticleState {
    loop {
        let x = rng.random::<f64>() * table.lx;
        let y = rng.random::<f64>() * table.ly;
        if x > table.left_wall(y) {
            let phi = rng.random::<f64>() * 2.0 * PI;
            return ParticleState::new(Vec2::new(x, y), Vec2::new(phi.cos(), phi.sin()), 0.0);
        }
    }
}

/// Runs a trajectory from a uniformly drawn phase-space point until
/// `n_piston_hits` piston collisions are recorded.
pub fn simulate_trajectory(p: &BilliardParams, n_piston_hits: usize, seed: u64) -> Result<CollisionSequence> {
    let table = Table::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = random_state(&table, &mut rng);
    let mut seq = run(&table, p, start, n_piston_hits)?;
    seq.seed = Some(seed);
    Ok(seq)
}

/// Runs a trajectory from an explicit state. A start on the piston itself
/// (`x = Lx`, moving left) counts as the first collision.
pub fn simulate_from(p: &BilliardParams, start: ParticleState, n_piston_hits: usize) -> Result<CollisionSequence> {
    let table = Table::new(p)?;
    if !table.contains(start.pos, 1e-12 * p.lx) {
        return Err(Error::Domain(format!("start ({}, {}) outside billiard", start.pos.x, start.pos.y)));
    }
    run(&table, p, start, n_piston_hits)
}

fn run(table: &Table, p: &BilliardParams, start: ParticleState, n: usize) -> Result<CollisionSequence> {
    if n == 0 {
        return Err(Error::Domain("n_piston_hits must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(n);
    let mut state = start;
    let mut last = None;
    if start.pos.x == p.lx && start.dir.x < 0.0 {
        records.push(record(&start));
        last = Some(Wall::Piston);
    }
    let mut since_hit = 0usize;
    while records.len() < n {
        let (next, wall) = table.propagate(&state, last)?;
        state = next;
        last = Some(wall);
        if wall == Wall::Piston {
            records.push(record(&state));
            since_hit = 0;
        } else {
            since_hit += 1;
            if since_hit > STEP_BUDGET {
                return Err(Error::StepBudget { steps: STEP_BUDGET });
            }
        }
    }
    let t_total = records.last().map_or(0.0, |r| r.t);
    Ok(CollisionSequence { records, t_total, params: *p, seed: None })
}

fn record(s: &ParticleState) -> PistonCollision {
    PistonCollision { t: s.time, y: s.pos.y, theta: s.dir.y.atan2(-s.dir.x) }
}
