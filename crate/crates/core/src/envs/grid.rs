use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cardinal_actions, check_action, Environment, Pos, CARDINAL};
use crate::amdp::{ActionId, GenerativeModel, ModelError, Observation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_side")]
    pub width: i32,
    #[serde(default = "default_side")]
    pub height: i32,
    #[serde(default = "default_p_stay")]
    pub p_stay: f64,
    #[serde(default)]
    pub start: Option<Pos>,
    #[serde(default)]
    pub goal: Option<Pos>,
    #[serde(default = "default_r_goal")]
    pub r_goal: f64,
    /// Proximity length scale; `width / 5` when absent.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Weight of the proximity reward off the goal.
    #[serde(default = "default_proximity_scale")]
    pub proximity_scale: f64,
}

fn default_side() -> i32 {
    50
}

fn default_p_stay() -> f64 {
    0.1
}

fn default_r_goal() -> f64 {
    1.0
}

fn default_proximity_scale() -> f64 {
    1.0
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width: default_side(),
            height: default_side(),
            p_stay: default_p_stay(),
            start: None,
            goal: None,
            r_goal: default_r_goal(),
            sigma: None,
            proximity_scale: default_proximity_scale(),
        }
    }
}

/// Open grid with slippery moves: each move fails (the agent stays put) with
/// probability `p_stay`. Reward grows toward the goal as `exp(-d(s', goal)/σ)`
/// and peaks at `r_goal` on the goal, which absorbs.
#[derive(Debug, Clone)]
pub struct GridWorld {
    width: i32,
    height: i32,
    p_stay: f64,
    start: Pos,
    goal: Pos,
    r_goal: f64,
    sigma: f64,
    proximity_scale: f64,
}

impl GridWorld {
    pub fn new(config: &GridConfig) -> Result<Self, ModelError> {
        let GridConfig { width, height, p_stay, .. } = *config;
        if width < 1 || height < 1 || width * height < 2 {
            return Err(ModelError::InvalidSpec("grid needs at least two cells"));
        }
        if !(0.0..=1.0).contains(&p_stay) {
            return Err(ModelError::InvalidSpec("p_stay must lie in [0, 1]"));
        }
        if !(config.r_goal > 0.0) {
            return Err(ModelError::InvalidSpec("r_goal must be positive"));
        }
        let start = config.start.unwrap_or(Pos::new(0, 0));
        let goal = config.goal.unwrap_or(Pos::new(width - 1, height - 1));
        let sigma = config.sigma.unwrap_or(width as f64 / 5.0);
        if !(sigma > 0.0) {
            return Err(ModelError::InvalidSpec("sigma must be positive"));
        }
        if !(0.0..=1.0).contains(&config.proximity_scale) {
            return Err(ModelError::InvalidSpec("proximity_scale must lie in [0, 1]"));
        }
        let world = Self {
            width,
            height,
            p_stay,
            start,
            goal,
            r_goal: config.r_goal,
            sigma,
            proximity_scale: config.proximity_scale,
        };
        for p in [start, goal] {
            if !world.inside(p) {
                return Err(ModelError::InvalidState(format!("{p:?} outside the grid")));
            }
        }
        if start == goal {
            return Err(ModelError::InvalidSpec("start and goal coincide"));
        }
        Ok(world)
    }

    /// Same world with another start and goal.
    pub fn with_endpoints(&self, start: Pos, goal: Pos) -> Result<Self, ModelError> {
        let mut config = self.config();
        config.start = Some(start);
        config.goal = Some(goal);
        Self::new(&config)
    }

    pub fn config(&self) -> GridConfig {
        GridConfig {
            width: self.width,
            height: self.height,
            p_stay: self.p_stay,
            start: Some(self.start),
            goal: Some(self.goal),
            r_goal: self.r_goal,
            sigma: Some(self.sigma),
            proximity_scale: self.proximity_scale,
        }
    }

    pub fn goal(&self) -> Pos {
        self.goal
    }

    pub fn inside(&self, p: Pos) -> bool {
        (0..self.width).contains(&p.x) && (0..self.height).contains(&p.y)
    }

    /// `r_goal` on the goal, `proximity_scale·r_goal·exp(-d(s', goal)/σ)`
    /// elsewhere.
    pub fn reward(&self, next: Pos) -> f64 {
        if next == self.goal {
            return self.r_goal;
        }
        self.proximity_scale * self.r_goal * (-next.dist(self.goal) / self.sigma).exp()
    }
}

impl GenerativeModel for GridWorld {
    type State = Pos;

    fn actions(&self, _s: &Pos) -> Vec<ActionId> {
        cardinal_actions()
    }

    fn sample<R: Rng + ?Sized>(&self, s: &Pos, a: ActionId, rng: &mut R) -> Result<Observation<Pos>, ModelError> {
        check_action(a, CARDINAL.len())?;
        if !self.inside(*s) {
            return Err(ModelError::InvalidState(format!("{s:?} outside the grid")));
        }
        if *s == self.goal {
            return Ok(super::absorbed(*s, self.r_goal));
        }
        let (dx, dy) = CARDINAL[a.0];
        let target = Pos::new(s.x + dx, s.y + dy);
        let next = if rng.gen::<f64>() < self.p_stay || !self.inside(target) {
            *s
        } else {
            target
        };
        Ok(Observation {
            next_state: next,
            reward: self.reward(next),
            terminal: false,
        })
    }
}

impl Environment for GridWorld {
    fn start(&self) -> Pos {
        self.start
    }

    fn is_goal(&self, s: &Pos) -> bool {
        *s == self.goal
    }

    fn reward_range(&self) -> (f64, f64) {
        (0.0, self.r_goal)
    }

    fn start_goal_distance(&self) -> f64 {
        self.start.dist(self.goal)
    }
}
