use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;
use std::time::Instant;

use aags_core::aags::{AagsConfig, AagsPlanner};
use aags_core::amdp::AmdpSpec;
use aags_core::belief::ConfidenceSpec;
use aags_core::envs::{Bandit, Chain, Environment, Episode, GridWorld, Pos, SailingWorld, TunnelConfig, TunnelWorld};
use aags_core::planner::Planner;
use aags_core::uct::{UctConfig, UctPlanner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{AlgoConfig, EnvConfig, ExperimentConfig, PairSpec};
use crate::records::{summarize, EpisodeRecord, RecordWriter, SummaryRow};
use crate::{seeds, HarnessError};

/// How cells are scheduled. Output is identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Serial,
    /// Worker count; 0 lets the pool decide.
    Parallel { jobs: usize },
}

impl ExecMode {
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(1) => ExecMode::Serial,
            Some(n) => ExecMode::Parallel { jobs: n },
            None => ExecMode::Parallel { jobs: 0 },
        }
    }
}

/// A start-goal configuration of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInfo {
    pub index: usize,
    pub start: Option<Pos>,
    pub goal: Option<Pos>,
    /// Tunnel goal distance along the corridor.
    pub goal_distance: Option<i32>,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub pairs: Vec<PairInfo>,
    pub records: Vec<EpisodeRecord>,
    pub summary: Vec<SummaryRow>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    alpha: Option<f64>,
    pair: usize,
    episode: usize,
}

/// Enough cells per batch to keep every worker busy between flushes.
const BATCH: usize = 64;

/// Runs every cell and returns the records in canonical order
/// (alpha, pair, episode).
pub fn run_experiment(config: &ExperimentConfig, mode: ExecMode) -> Result<Experiment, HarnessError> {
    run_with_sink(config, mode, |_| Ok(()))
}

/// As [`run_experiment`], writing `records.csv` batch by batch, then
/// `summary.json` and `metadata.json`, into `out`.
pub fn run_to_dir(config: &ExperimentConfig, mode: ExecMode, out: &Path) -> Result<Experiment, HarnessError> {
    std::fs::create_dir_all(out)?;
    let mut writer = RecordWriter::new(File::create(out.join("records.csv"))?);
    let exp = run_with_sink(config, mode, |batch| writer.append(batch))?;
    write_json_file(&out.join("summary.json"), &exp.summary)?;
    write_json_file(
        &out.join("metadata.json"),
        &Metadata {
            crate_version: env!("CARGO_PKG_VERSION"),
            env: config.env.id(),
            algo: config.algo.id(),
            records: exp.records.len(),
            config: &exp.config,
            pairs: &exp.pairs,
        },
    )?;
    Ok(exp)
}

#[derive(Serialize)]
struct Metadata<'a> {
    crate_version: &'static str,
    env: &'static str,
    algo: &'static str,
    records: usize,
    config: &'a ExperimentConfig,
    pairs: &'a [PairInfo],
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn run_with_sink<F>(config: &ExperimentConfig, mode: ExecMode, mut sink: F) -> Result<Experiment, HarnessError>
where
    F: FnMut(&[EpisodeRecord]) -> Result<(), HarnessError>,
{
    config.validate()?;
    let pairs = resolve_pairs(config)?;
    let mut cells = Vec::new();
    for alpha in config.alphas() {
        for pair in 0..pairs.len() {
            for episode in 0..config.sweep.episodes {
                cells.push(Cell { alpha, pair, episode });
            }
        }
    }
    let exec = Executor::new(mode)?;
    let mut records = Vec::with_capacity(cells.len());
    for batch in cells.chunks(BATCH) {
        let done = exec.map(batch, |cell| play_cell(config, &pairs[cell.pair], cell))?;
        sink(&done)?;
        records.extend(done);
    }
    let summary = summarize(&records)?;
    Ok(Experiment {
        config: config.clone(),
        pairs,
        records,
        summary,
    })
}

enum Executor {
    Serial,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

impl Executor {
    fn new(mode: ExecMode) -> Result<Self, HarnessError> {
        match mode {
            ExecMode::Serial => Ok(Executor::Serial),
            #[cfg(feature = "parallel")]
            ExecMode::Parallel { jobs } => rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map(Executor::Pool)
                .map_err(|e| HarnessError::Config(format!("thread pool: {e}"))),
            #[cfg(not(feature = "parallel"))]
            ExecMode::Parallel { .. } => Ok(Executor::Serial),
        }
    }

    fn map<F>(&self, cells: &[Cell], f: F) -> Result<Vec<EpisodeRecord>, HarnessError>
    where
        F: Fn(&Cell) -> Result<EpisodeRecord, HarnessError> + Sync + Send,
    {
        match self {
            Executor::Serial => cells.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Pool(pool) => {
                use rayon::prelude::*;
                pool.install(|| cells.par_iter().map(f).collect())
            }
        }
    }
}

fn resolve_pairs(config: &ExperimentConfig) -> Result<Vec<PairInfo>, HarnessError> {
    match (&config.sweep.pairs, &config.env) {
        (PairSpec::Fixed, env) => {
            let (start, goal, goal_distance, distance) = match env {
                EnvConfig::Grid(g) => {
                    let w = GridWorld::new(g)?;
                    (Some(w.start()), Some(w.goal()), None, w.start_goal_distance())
                }
                EnvConfig::Sailing(s) => {
                    let w = SailingWorld::new(s)?;
                    (Some(w.start().pos), Some(w.goal()), None, w.start_goal_distance())
                }
                EnvConfig::Tunnel(t) => {
                    let w = TunnelWorld::new(t)?;
                    let d = (t.map.is_none() && t.map_file.is_none()).then_some(t.goal_distance);
                    (Some(w.start()), Some(w.goal()), d, w.start_goal_distance())
                }
                EnvConfig::Bandit(b) => (None, None, None, Bandit::new(b.arms.clone())?.start_goal_distance()),
                EnvConfig::Chain(c) => (None, None, None, Chain::new(c.len, c.quit_reward)?.start_goal_distance()),
            };
            Ok(vec![PairInfo {
                index: 0,
                start,
                goal,
                goal_distance,
                distance,
            }])
        }
        (PairSpec::Distances(ds), EnvConfig::Tunnel(t)) => ds
            .iter()
            .enumerate()
            .map(|(index, &d)| {
                let w = TunnelWorld::new(&TunnelConfig {
                    goal_distance: d,
                    map: None,
                    map_file: None,
                    ..t.clone()
                })?;
                Ok(PairInfo {
                    index,
                    start: Some(w.start()),
                    goal: Some(w.goal()),
                    goal_distance: Some(d),
                    distance: w.start_goal_distance(),
                })
            })
            .collect(),
        (
            PairSpec::Sampled {
                count,
                min_distance,
                max_distance,
            },
            env,
        ) => {
            let (w, h) = match env {
                EnvConfig::Grid(g) => (g.width, g.height),
                EnvConfig::Sailing(s) => (s.width, s.height),
                _ => unreachable!("validated"),
            };
            sample_pairs(config.run.seed, env.id(), w, h, *count, *min_distance, *max_distance)
        }
        _ => unreachable!("validated"),
    }
}

/// Distinct start-goal pairs, uniform over cells, within the distance band.
/// Drawn from the master seed alone so every planner sees the same pairs.
fn sample_pairs(
    master: u64,
    env: &str,
    width: i32,
    height: i32,
    count: usize,
    min_distance: f64,
    max_distance: f64,
) -> Result<Vec<PairInfo>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(master, &[env.as_bytes(), b"pairs"]));
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::with_capacity(count);
    let attempts = 1000 * count.max(1);
    for _ in 0..attempts {
        if pairs.len() == count {
            break;
        }
        let start = Pos::new(rng.gen_range(0..width), rng.gen_range(0..height));
        let goal = Pos::new(rng.gen_range(0..width), rng.gen_range(0..height));
        let d = start.dist(goal);
        if start == goal || d < min_distance || d > max_distance || !seen.insert((start, goal)) {
            continue;
        }
        pairs.push(PairInfo {
            index: pairs.len(),
            start: Some(start),
            goal: Some(goal),
            goal_distance: None,
            distance: d,
        });
    }
    if pairs.len() < count {
        return Err(HarnessError::Config(format!(
            "could only draw {} of {count} start-goal pairs in the distance band",
            pairs.len()
        )));
    }
    Ok(pairs)
}

fn play_cell(config: &ExperimentConfig, pair: &PairInfo, cell: &Cell) -> Result<EpisodeRecord, HarnessError> {
    let seed = seeds::cell_seed(config.run.seed, config.env.id(), config.algo.id(), cell.alpha, pair.index, cell.episode);
    let started = Instant::now();
    let (steps, discounted, undiscounted, reached) = match &config.env {
        EnvConfig::Grid(g) => {
            let w = GridWorld::new(g)?;
            let w = match (pair.start, pair.goal) {
                (Some(s), Some(t)) => w.with_endpoints(s, t)?,
                _ => w,
            };
            play(&w, config, cell.alpha, seed)?
        }
        EnvConfig::Sailing(s) => {
            let w = SailingWorld::new(s)?;
            let w = match (pair.start, pair.goal) {
                (Some(s), Some(t)) => w.with_endpoints(s, t)?,
                _ => w,
            };
            play(&w, config, cell.alpha, seed)?
        }
        EnvConfig::Tunnel(t) => {
            let w = match pair.goal_distance {
                Some(d) => TunnelWorld::new(&TunnelConfig {
                    goal_distance: d,
                    map: None,
                    map_file: None,
                    ..t.clone()
                })?,
                None => TunnelWorld::new(t)?,
            };
            play(&w, config, cell.alpha, seed)?
        }
        EnvConfig::Bandit(b) => play(&Bandit::new(b.arms.clone())?, config, cell.alpha, seed)?,
        EnvConfig::Chain(c) => play(&Chain::new(c.len, c.quit_reward)?, config, cell.alpha, seed)?,
    };
    let wall_ms = if config.run.timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(EpisodeRecord {
        env: config.env.id().to_owned(),
        algo: config.algo.id().to_owned(),
        alpha: cell.alpha,
        seed,
        distance: pair.distance,
        discounted_return: discounted,
        undiscounted_return: undiscounted,
        steps,
        reached_goal: reached,
        wall_ms,
    })
}

/// `(steps, discounted return, undiscounted return, reached goal)`.
type Outcome = (usize, f64, f64, bool);

fn play<E: Environment>(env: &E, config: &ExperimentConfig, alpha: Option<f64>, seed: u64) -> Result<Outcome, HarnessError> {
    let (env_seed, planner_seed) = seeds::split(seed);
    let gamma = config.algo.gamma();
    match &config.algo {
        AlgoConfig::Aags(a) => {
            let (r_min, r_max) = env.reward_range();
            let spec = AmdpSpec::new(gamma, r_min, r_max)?;
            let mut cfg = AagsConfig::new(
                alpha.unwrap_or(0.0),
                ConfidenceSpec::new(a.epsilon, a.delta).map_err(aags_core::planner::PlanError::from)?,
                config.run.samples_per_step,
                a.horizon,
            );
            cfg.reuse_graph = a.reuse_graph.unwrap_or(config.env.is_static());
            cfg.beta_floor = a.beta_floor;
            cfg.root_action_selection = a.root_action_selection;
            cfg.seed = planner_seed;
            let mut planner = AagsPlanner::new(cfg, spec)?;
            episode(env, &mut planner, gamma, config.run.max_steps, env_seed)
        }
        AlgoConfig::Uct(u) => {
            let mut planner = UctPlanner::new(UctConfig {
                c: u.c,
                rollout_horizon: u.rollout_horizon,
                n_samples: config.run.samples_per_step,
                gamma,
                seed: planner_seed,
            })?;
            episode(env, &mut planner, gamma, config.run.max_steps, env_seed)
        }
    }
}

/// Plays one episode: plan, act, repeat until the goal, a dead end or the
/// step cap.
pub fn episode<E, P>(env: &E, planner: &mut P, gamma: f64, max_steps: usize, seed: u64) -> Result<Outcome, HarnessError>
where
    E: Environment,
    P: Planner<E>,
{
    planner.reset();
    let mut ep = Episode::new(env, seed);
    let (mut discounted, mut undiscounted, mut discount) = (0.0, 0.0, 1.0);
    while !ep.done() && ep.steps() < max_steps && !env.actions(ep.state()).is_empty() {
        let state = ep.state().clone();
        let action = planner.plan(env, &state)?;
        let obs = ep.step(action)?;
        discounted += discount * obs.reward;
        undiscounted += obs.reward;
        discount *= gamma;
    }
    Ok((ep.steps(), discounted, undiscounted, env.is_goal(ep.state())))
}
