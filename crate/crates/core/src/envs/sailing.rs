use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_action, Environment, Pos};
use crate::amdp::{ActionId, GenerativeModel, ModelError, Observation};

/// Compass directions, clockwise from north, in 45° steps.
const COMPASS: [(i32, i32); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// Forward, turn -45°, turn +45°.
const TURNS: [u8; 3] = [0, 7, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SailState {
    pub pos: Pos,
    /// Compass index 0..8 of the boat.
    pub heading: u8,
    /// Compass index 0..8 the wind blows toward.
    pub wind: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SailingConfig {
    #[serde(default = "default_side")]
    pub width: i32,
    #[serde(default = "default_side")]
    pub height: i32,
    #[serde(default = "default_p_wind_change")]
    pub p_wind_change: f64,
    #[serde(default)]
    pub start: Option<Pos>,
    #[serde(default)]
    pub goal: Option<Pos>,
    #[serde(default)]
    pub initial_heading: u8,
    /// Drawn at reset when absent.
    #[serde(default)]
    pub initial_wind: Option<u8>,
    #[serde(default = "default_w_progress")]
    pub w_progress: f64,
    #[serde(default = "default_w_wind")]
    pub w_wind: f64,
    #[serde(default = "default_w_border")]
    pub w_border: f64,
}

fn default_side() -> i32 {
    40
}

fn default_p_wind_change() -> f64 {
    0.1
}

fn default_w_progress() -> f64 {
    1.0
}

fn default_w_wind() -> f64 {
    0.2
}

fn default_w_border() -> f64 {
    0.5
}

impl Default for SailingConfig {
    fn default() -> Self {
        Self {
            width: default_side(),
            height: default_side(),
            p_wind_change: default_p_wind_change(),
            start: None,
            goal: None,
            initial_heading: 0,
            initial_wind: None,
            w_progress: default_w_progress(),
            w_wind: default_w_wind(),
            w_border: default_w_border(),
        }
    }
}

/// A boat steering through a wind field. Turning changes the heading by
/// 45°, after which the boat advances one cell along it. The wind shifts one
/// compass point either way with total probability `p_wind_change`.
///
/// Reward: progress toward the goal, minus a penalty for sailing into the
/// wind and for touching the map edge, clipped to `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct SailingWorld {
    config: SailingConfig,
    start: Pos,
    goal: Pos,
}

impl SailingWorld {
    pub fn new(config: &SailingConfig) -> Result<Self, ModelError> {
        let c = config;
        if c.width < 1 || c.height < 1 || c.width * c.height < 2 {
            return Err(ModelError::InvalidSpec("sailing map needs at least two cells"));
        }
        if !(0.0..=1.0).contains(&c.p_wind_change) {
            return Err(ModelError::InvalidSpec("p_wind_change must lie in [0, 1]"));
        }
        if c.w_progress < 0.0 || c.w_wind < 0.0 || c.w_border < 0.0 {
            return Err(ModelError::InvalidSpec("reward weights must be nonnegative"));
        }
        if c.initial_heading >= 8 || c.initial_wind.is_some_and(|w| w >= 8) {
            return Err(ModelError::InvalidSpec("compass indices run from 0 to 7"));
        }
        let start = c.start.unwrap_or(Pos::new(0, c.height - 1));
        let goal = c.goal.unwrap_or(Pos::new(c.width - 1, 0));
        let world = Self {
            config: c.clone(),
            start,
            goal,
        };
        for p in [start, goal] {
            if !world.inside(p) {
                return Err(ModelError::InvalidState(format!("{p:?} outside the map")));
            }
        }
        if start == goal {
            return Err(ModelError::InvalidSpec("start and goal coincide"));
        }
        Ok(world)
    }

    pub fn with_endpoints(&self, start: Pos, goal: Pos) -> Result<Self, ModelError> {
        let mut config = self.config.clone();
        config.start = Some(start);
        config.goal = Some(goal);
        Self::new(&config)
    }

    pub fn config(&self) -> SailingConfig {
        let mut c = self.config.clone();
        c.start = Some(self.start);
        c.goal = Some(self.goal);
        c
    }

    pub fn goal(&self) -> Pos {
        self.goal
    }

    /// `width · height · 8 · 8`.
    pub fn state_count(&self) -> usize {
        (self.config.width * self.config.height) as usize * 64
    }

    pub fn inside(&self, p: Pos) -> bool {
        (0..self.config.width).contains(&p.x) && (0..self.config.height).contains(&p.y)
    }

    fn on_border(&self, p: Pos) -> bool {
        p.x == 0 || p.y == 0 || p.x == self.config.width - 1 || p.y == self.config.height - 1
    }

    /// Reward of moving from `from` to `to` with the boat at `heading` and
    /// the wind blowing toward `wind`.
    pub fn reward(&self, from: Pos, to: Pos, heading: u8, wind: u8) -> f64 {
        let c = &self.config;
        let progress = from.dist(self.goal) - to.dist(self.goal);
        let angle = f64::from(heading as i32 - wind as i32) * std::f64::consts::FRAC_PI_4;
        let against = (-angle.cos()).max(0.0);
        // Snap float noise so that aligned headings carry no penalty at all.
        let against = if against < 1e-12 { 0.0 } else { against };
        let border = if self.on_border(to) { 1.0 } else { 0.0 };
        (c.w_progress * progress - c.w_wind * against - c.w_border * border).clamp(-1.0, 1.0)
    }

    fn check_state(&self, s: &SailState) -> Result<(), ModelError> {
        if !self.inside(s.pos) || s.heading >= 8 || s.wind >= 8 {
            return Err(ModelError::InvalidState(format!("{s:?}")));
        }
        Ok(())
    }
}

impl GenerativeModel for SailingWorld {
    type State = SailState;

    fn actions(&self, _s: &SailState) -> Vec<ActionId> {
        (0..TURNS.len()).map(ActionId).collect()
    }

    fn sample<R: Rng + ?Sized>(&self, s: &SailState, a: ActionId, rng: &mut R) -> Result<Observation<SailState>, ModelError> {
        check_action(a, TURNS.len())?;
        self.check_state(s)?;
        if s.pos == self.goal {
            return Ok(super::absorbed(*s, 1.0));
        }
        let heading = (s.heading + TURNS[a.0]) % 8;
        let (dx, dy) = COMPASS[heading as usize];
        let target = Pos::new(s.pos.x + dx, s.pos.y + dy);
        let pos = if self.inside(target) { target } else { s.pos };
        let reward = self.reward(s.pos, pos, heading, s.wind);
        let u: f64 = rng.gen();
        let half = self.config.p_wind_change / 2.0;
        let wind = if u < half {
            (s.wind + 7) % 8
        } else if u < 2.0 * half {
            (s.wind + 1) % 8
        } else {
            s.wind
        };
        Ok(Observation {
            next_state: SailState { pos, heading, wind },
            reward,
            terminal: false,
        })
    }
}

impl Environment for SailingWorld {
    fn start(&self) -> SailState {
        SailState {
            pos: self.start,
            heading: self.config.initial_heading,
            wind: self.config.initial_wind.unwrap_or(0),
        }
    }

    fn reset_state<R: Rng + ?Sized>(&self, rng: &mut R) -> SailState {
        SailState {
            wind: self.config.initial_wind.unwrap_or_else(|| rng.gen_range(0..8)),
            ..self.start()
        }
    }

    fn is_goal(&self, s: &SailState) -> bool {
        s.pos == self.goal
    }

    fn reward_range(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn start_goal_distance(&self) -> f64 {
        self.start.dist(self.goal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn world() -> SailingWorld {
        SailingWorld::new(&SailingConfig {
            width: 20,
            height: 20,
            start: Some(Pos::new(2, 17)),
            goal: Some(Pos::new(10, 5)),
            ..SailingConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn wind_mostly_holds() {
        let w = world();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = SailState {
            pos: Pos::new(8, 8),
            heading: 2,
            wind: 3,
        };
        let (mut kept, mut left, mut right) = (0, 0, 0);
        for _ in 0..20_000 {
            match w.sample(&s, ActionId(0), &mut rng).unwrap().next_state.wind {
                3 => kept += 1,
                2 => left += 1,
                4 => right += 1,
                other => panic!("wind jumped to {other}"),
            }
        }
        assert!((kept as f64 / 20_000.0 - 0.9).abs() < 0.01);
        assert!((left as f64 / 20_000.0 - 0.05).abs() < 0.01);
        assert!((right as f64 / 20_000.0 - 0.05).abs() < 0.01);
    }

    #[test]
    fn downwind_toward_the_goal_pays_progress_only() {
        let w = world();
        // Goal due north of (10, 8); heading north with wind toward north.
        assert_eq!(w.reward(Pos::new(10, 8), Pos::new(10, 7), 0, 0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = SailState {
            pos: Pos::new(10, 8),
            heading: 0,
            wind: 0,
        };
        let o = w.sample(&s, ActionId(0), &mut rng).unwrap();
        assert_eq!(o.next_state.pos, Pos::new(10, 7));
        assert_eq!(o.reward, 1.0);
    }

    #[test]
    fn upwind_and_border_cost() {
        let w = world();
        let flat = w.reward(Pos::new(10, 8), Pos::new(11, 8), 2, 2);
        let into = w.reward(Pos::new(10, 8), Pos::new(11, 8), 2, 6);
        assert!((flat - into - 0.2).abs() < 1e-12);
        let edge = w.reward(Pos::new(1, 8), Pos::new(0, 8), 6, 6);
        let inner = w.reward(Pos::new(2, 8), Pos::new(1, 8), 6, 6);
        assert!(edge < inner);
    }

    #[test]
    fn turns_and_edges() {
        let w = world();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = SailState {
            pos: Pos::new(0, 5),
            heading: 0,
            wind: 0,
        };
        let step = |a: usize, rng: &mut ChaCha8Rng| {
            let o = w.sample(&s, ActionId(a), rng).unwrap().next_state;
            (o.pos, o.heading)
        };
        assert_eq!(step(0, &mut rng), (Pos::new(0, 4), 0));
        // North-west would leave the map: the boat turns but stays put.
        assert_eq!(step(1, &mut rng), (Pos::new(0, 5), 7));
        assert_eq!(step(2, &mut rng), (Pos::new(1, 4), 1));
    }

    #[test]
    fn state_space_size() {
        assert_eq!(world().state_count(), 20 * 20 * 8 * 8);
    }
}
