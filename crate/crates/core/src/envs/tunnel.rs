use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cardinal_actions, check_action, Environment, Pos, CARDINAL};
use crate::amdp::{ActionId, GenerativeModel, ModelError, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Wall,
    Free,
    Small,
    Goal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunnelConfig {
    /// Cells between the start and the large goal along the corridor.
    #[serde(default = "default_distance")]
    pub goal_distance: i32,
    #[serde(default = "default_corridor_width")]
    pub corridor_width: i32,
    /// Length of the small-reward room behind the start.
    #[serde(default = "default_region_len")]
    pub region_len: i32,
    #[serde(default = "default_r_small")]
    pub r_small: f64,
    #[serde(default = "default_r_large")]
    pub r_large: f64,
    /// Text map (`#` wall, `.` free, `s` start, `g` goal, `r` small reward);
    /// replaces the generated layout when present.
    #[serde(default)]
    pub map: Option<String>,
    /// Text map read from disk; used when `map` is absent.
    #[serde(default)]
    pub map_file: Option<std::path::PathBuf>,
}

fn default_distance() -> i32 {
    20
}

fn default_corridor_width() -> i32 {
    3
}

fn default_region_len() -> i32 {
    3
}

fn default_r_small() -> f64 {
    0.005
}

fn default_r_large() -> f64 {
    1.0
}

impl Default for TunnelConfig {
    fn default() -> Self {
        Self {
            goal_distance: default_distance(),
            corridor_width: default_corridor_width(),
            region_len: default_region_len(),
            r_small: default_r_small(),
            r_large: default_r_large(),
            map: None,
            map_file: None,
        }
    }
}

/// A walled corridor. Behind the start lies a room paying a small reward on
/// every step spent in it; far down the corridor lies a large goal that absorbs.
/// Moves are deterministic and walls block them.
#[derive(Debug, Clone)]
pub struct TunnelWorld {
    cells: Vec<Vec<Cell>>,
    start: Pos,
    goal: Pos,
    r_small: f64,
    r_large: f64,
}

impl TunnelWorld {
    pub fn new(config: &TunnelConfig) -> Result<Self, ModelError> {
        if !(config.r_small >= 0.0 && config.r_large > 0.0) {
            return Err(ModelError::InvalidSpec("tunnel rewards must be nonnegative with r_large > 0"));
        }
        let map = match (&config.map, &config.map_file) {
            (Some(m), _) => m.clone(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| ModelError::InvalidState(format!("cannot read tunnel map {}: {e}", path.display())))?,
            (None, None) => layout(config.goal_distance, config.corridor_width, config.region_len)?,
        };
        Self::parse(&map, config.r_small, config.r_large)
    }

    pub fn parse(map: &str, r_small: f64, r_large: f64) -> Result<Self, ModelError> {
        let mut cells = Vec::new();
        let (mut start, mut goal) = (None, None);
        for (y, line) in map.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let mut row = Vec::new();
            for (x, ch) in line.trim_end().chars().enumerate() {
                let p = Pos::new(x as i32, y as i32);
                row.push(match ch {
                    '#' => Cell::Wall,
                    '.' => Cell::Free,
                    'r' => Cell::Small,
                    's' if start.is_none() => {
                        start = Some(p);
                        Cell::Free
                    }
                    'g' if goal.is_none() => {
                        goal = Some(p);
                        Cell::Goal
                    }
                    's' | 'g' => return Err(ModelError::InvalidSpec("tunnel map has more than one start or goal")),
                    _ => return Err(ModelError::InvalidSpec("tunnel map uses only '#', '.', 's', 'g', 'r'")),
                });
            }
            cells.push(row);
        }
        let (Some(start), Some(goal)) = (start, goal) else {
            return Err(ModelError::InvalidSpec("tunnel map needs a start and a goal"));
        };
        Ok(Self {
            cells,
            start,
            goal,
            r_small,
            r_large,
        })
    }

    fn cell(&self, p: Pos) -> Cell {
        if p.x < 0 || p.y < 0 {
            return Cell::Wall;
        }
        self.cells
            .get(p.y as usize)
            .and_then(|row| row.get(p.x as usize))
            .copied()
            .unwrap_or(Cell::Wall)
    }

    pub fn is_wall(&self, p: Pos) -> bool {
        self.cell(p) == Cell::Wall
    }

    pub fn in_small_region(&self, p: Pos) -> bool {
        self.cell(p) == Cell::Small
    }

    pub fn goal(&self) -> Pos {
        self.goal
    }

    pub fn r_small(&self) -> f64 {
        self.r_small
    }

    pub fn r_large(&self) -> f64 {
        self.r_large
    }

    /// Every non-wall cell.
    pub fn open_cells(&self) -> Vec<Pos> {
        let mut out = Vec::new();
        for (y, row) in self.cells.iter().enumerate() {
            for (x, c) in row.iter().enumerate() {
                if *c != Cell::Wall {
                    out.push(Pos::new(x as i32, y as i32));
                }
            }
        }
        out
    }

    pub fn reward(&self, next: Pos) -> f64 {
        match self.cell(next) {
            Cell::Small => self.r_small,
            Cell::Goal => self.r_large,
            _ => 0.0,
        }
    }
}

/// Generated map: the small-reward room, the start right after it and the
/// goal `distance` cells further along a corridor `width` cells wide.
pub fn layout(distance: i32, width: i32, region_len: i32) -> Result<String, ModelError> {
    if distance < 1 || width < 1 || region_len < 0 {
        return Err(ModelError::InvalidSpec("tunnel layout needs distance >= 1 and width >= 1"));
    }
    let start_x = region_len + 1;
    let goal_x = start_x + distance;
    let mid = 1 + width / 2;
    let mut rows = Vec::new();
    let wall_row: String = "#".repeat((goal_x + 2) as usize);
    rows.push(wall_row.clone());
    for y in 1..=width {
        let mut row = String::from("#");
        for x in 1..=goal_x {
            row.push(match (x, y) {
                _ if x == start_x && y == mid => 's',
                _ if x == goal_x && y == mid => 'g',
                _ if x < start_x => 'r',
                _ => '.',
            });
        }
        row.push('#');
        rows.push(row);
    }
    rows.push(wall_row);
    Ok(rows.join("\n"))
}

impl GenerativeModel for TunnelWorld {
    type State = Pos;

    fn actions(&self, _s: &Pos) -> Vec<ActionId> {
        cardinal_actions()
    }

    fn sample<R: Rng + ?Sized>(&self, s: &Pos, a: ActionId, _rng: &mut R) -> Result<Observation<Pos>, ModelError> {
        check_action(a, CARDINAL.len())?;
        if self.is_wall(*s) {
            return Err(ModelError::InvalidState(format!("{s:?} is a wall")));
        }
        if *s == self.goal {
            return Ok(super::absorbed(*s, self.r_large));
        }
        let (dx, dy) = CARDINAL[a.0];
        let target = Pos::new(s.x + dx, s.y + dy);
        let next = if self.is_wall(target) { *s } else { target };
        Ok(Observation {
            next_state: next,
            reward: self.reward(next),
            terminal: false,
        })
    }
}

impl Environment for TunnelWorld {
    fn start(&self) -> Pos {
        self.start
    }

    fn is_goal(&self, s: &Pos) -> bool {
        *s == self.goal
    }

    fn reward_range(&self) -> (f64, f64) {
        (0.0, self.r_small.max(self.r_large))
    }

    fn start_goal_distance(&self) -> f64 {
        self.start.dist(self.goal)
    }
}
