//! The 5x5 open-room gridworld POMDP.
//!
//! The agent starts at `(0, 0)` (lower left) and pays `-1` per step until it reaches
//! the absorbing goal `(4, 4)` (upper right). It observes only which of the eight
//! neighbouring squares are walls, and moves with noise: with probability 0.05 each it
//! moves up, left, down or right regardless of the chosen action, otherwise it moves
//! as intended. Moves into a wall leave it in place.

mod experiment;

use std::fmt;

use crate::rng::{self, SplitMix64};
use crate::search::PolicyClass;
use crate::sim::{Policy, SimModel, StateText, TabularMdp};

pub use experiment::{
    exact_sweep, gridworld_experiment, CompiledScenarios, ExactSweep, ExperimentConfig, ExperimentRow, ExperimentTable,
    Variant,
};

pub const SIZE: u8 = 5;
pub const N_CELLS: usize = (SIZE as usize) * (SIZE as usize);
pub const N_OBSERVATIONS: usize = 8;
pub const N_POLICIES: usize = 65536;
pub const DEFAULT_GAMMA: f64 = 0.99;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("policy index {0} out of range 0..65536")]
    IndexOutOfRange(usize),
    #[error("cell ({0}, {1}) is outside the grid")]
    OutsideGrid(i32, i32),
    #[error("observation {0:#010b} is not in the catalogue")]
    UnknownObservation(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: u8,
    pub y: u8,
}

impl Cell {
    pub const START: Cell = Cell { x: 0, y: 0 };
    pub const GOAL: Cell = Cell { x: SIZE - 1, y: SIZE - 1 };

    pub fn new(x: i32, y: i32) -> Result<Self, GridError> {
        if (0..SIZE as i32).contains(&x) && (0..SIZE as i32).contains(&y) {
            Ok(Cell { x: x as u8, y: y as u8 })
        } else {
            Err(GridError::OutsideGrid(x, y))
        }
    }

    /// Row-major index `y * 5 + x`.
    pub fn index(self) -> usize {
        self.y as usize * SIZE as usize + self.x as usize
    }

    pub fn from_index(i: usize) -> Cell {
        Cell { x: (i % SIZE as usize) as u8, y: (i / SIZE as usize) as u8 }
    }

    pub fn all() -> impl Iterator<Item = Cell> {
        (0..N_CELLS).map(Cell::from_index)
    }

    fn offset(self, dx: i32, dy: i32) -> Option<Cell> {
        Cell::new(self.x as i32 + dx, self.y as i32 + dy).ok()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl StateText for Cell {
    fn to_token(&self) -> String {
        format!("{};{}", self.x, self.y)
    }

    fn from_token(token: &str) -> Option<Self> {
        let (x, y) = token.split_once(';')?;
        Cell::new(x.trim().parse().ok()?, y.trim().parse().ok()?).ok()
    }
}

/// Compass actions, numbered in the order of the noise branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    Up = 0,
    Left = 1,
    Down = 2,
    Right = 3,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Up, Dir::Left, Dir::Down, Dir::Right];

    pub fn from_id(id: usize) -> Dir {
        Dir::ALL[id & 3]
    }

    pub fn id(self) -> usize {
        self as usize
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Dir::Up => (0, 1),
            Dir::Left => (-1, 0),
            Dir::Down => (0, -1),
            Dir::Right => (1, 0),
        }
    }
}

/// One step from `cell` towards `dir`; staying put if that would hit a wall.
pub fn step(cell: Cell, dir: Dir) -> Cell {
    let (dx, dy) = dir.delta();
    cell.offset(dx, dy).unwrap_or(cell)
}

/// The noise branch selected by `p`, or `None` for the intended move.
///
/// Branches are closed on the right: `p <= 0.05` up, `0.05 < p <= 0.10` left,
/// `0.10 < p <= 0.15` down, `0.15 < p <= 0.20` right.
pub fn noise_branch(p: f64) -> Option<Dir> {
    if p <= 0.05 {
        Some(Dir::Up)
    } else if p <= 0.10 {
        Some(Dir::Left)
    } else if p <= 0.15 {
        Some(Dir::Down)
    } else if p <= 0.20 {
        Some(Dir::Right)
    } else {
        None
    }
}

/// The deterministic simulative model of the gridworld.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridWorld {
    pub gamma: f64,
}

impl Default for GridWorld {
    fn default() -> Self {
        Self { gamma: DEFAULT_GAMMA }
    }
}

pub fn build_gridworld() -> GridWorld {
    GridWorld::default()
}

impl GridWorld {
    pub fn with_gamma(gamma: f64) -> Self {
        Self { gamma }
    }

    pub fn move_with_noise(cell: Cell, action: Dir, p: f64) -> Cell {
        step(cell, noise_branch(p).unwrap_or(action))
    }

    /// Analytic next-cell distribution for `(cell, action)`, wall-blocked mass folded
    /// onto staying put (duplicates are left to the consumer to merge).
    pub fn analytic_distribution(cell: Cell, action: Dir) -> Vec<(Cell, f64)> {
        let mut out = vec![(step(cell, action), 0.80)];
        out.extend(Dir::ALL.iter().map(|&d| (step(cell, d), 0.05)));
        out
    }

    /// The explicit tabular MDP; state `i` is `Cell::from_index(i)`.
    pub fn tabular(&self) -> TabularMdp {
        let transitions = Cell::all()
            .map(|cell| {
                Dir::ALL
                    .iter()
                    .map(|&a| {
                        let mut row: Vec<(usize, f64)> = Vec::new();
                        for (c, p) in Self::analytic_distribution(cell, a) {
                            match row.iter_mut().find(|(s, _)| *s == c.index()) {
                                Some((_, q)) => *q += p,
                                None => row.push((c.index(), p)),
                            }
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        TabularMdp {
            n_states: N_CELLS,
            n_actions: 4,
            transitions,
            rewards: Cell::all().map(|c| if c == Cell::GOAL { 0.0 } else { -1.0 }).collect(),
            initial: vec![(Cell::START.index(), 1.0)],
            absorbing: Cell::all().map(|c| c == Cell::GOAL).collect(),
        }
    }
}

impl SimModel for GridWorld {
    type State = Cell;
    type Action = Dir;

    fn noise_dim(&self) -> usize {
        1
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn r_max(&self) -> f64 {
        1.0
    }

    fn transition(&self, state: &Cell, action: &Dir, p: &[f64]) -> Cell {
        Self::move_with_noise(*state, *action, p[0])
    }

    fn reward(&self, state: &Cell) -> f64 {
        if *state == Cell::GOAL {
            0.0
        } else {
            -1.0
        }
    }

    fn initial(&self, _rng: &mut SplitMix64) -> Cell {
        Cell::START
    }

    fn is_absorbing(&self, state: &Cell) -> bool {
        *state == Cell::GOAL
    }
}

/// The "complex" variant: `g'(s, a, p) = g(s, a, fract(k(s, a) p))` with one integer
/// multiplier `k(s, a)` in `1..=1000` per state-action pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGridWorld {
    base: GridWorld,
    multipliers: Vec<[u32; 4]>,
}

pub fn wrap_complex(model: GridWorld, seed: u64) -> ComplexGridWorld {
    let mut gen = rng::stream(seed, 0);
    let multipliers = (0..N_CELLS)
        .map(|_| {
            let mut k = [0u32; 4];
            for slot in k.iter_mut() {
                *slot = rng::uniform_int(&mut gen, 1, 1000) as u32;
            }
            k
        })
        .collect();
    ComplexGridWorld { base: model, multipliers }
}

impl ComplexGridWorld {
    pub fn with_multipliers(base: GridWorld, multipliers: Vec<[u32; 4]>) -> Self {
        assert_eq!(multipliers.len(), N_CELLS);
        Self { base, multipliers }
    }

    pub fn multiplier(&self, cell: Cell, action: Dir) -> u32 {
        self.multipliers[cell.index()][action.id()]
    }

    pub fn hash(&self, cell: Cell, action: Dir, p: f64) -> f64 {
        let x = self.multiplier(cell, action) as f64 * p;
        x - x.floor()
    }
}

impl SimModel for ComplexGridWorld {
    type State = Cell;
    type Action = Dir;

    fn noise_dim(&self) -> usize {
        1
    }

    fn gamma(&self) -> f64 {
        self.base.gamma
    }

    fn r_max(&self) -> f64 {
        1.0
    }

    fn transition(&self, state: &Cell, action: &Dir, p: &[f64]) -> Cell {
        GridWorld::move_with_noise(*state, *action, self.hash(*state, *action, p[0]))
    }

    fn reward(&self, state: &Cell) -> f64 {
        self.base.reward(state)
    }

    fn initial(&self, rng: &mut SplitMix64) -> Cell {
        self.base.initial(rng)
    }

    fn is_absorbing(&self, state: &Cell) -> bool {
        self.base.is_absorbing(state)
    }
}

/// Wall bits of the eight neighbours, bit `k` in the order N, NE, E, SE, S, SW, W, NW.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WallObservation(pub u8);

const NEIGHBOURS: [(i32, i32); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

impl WallObservation {
    pub fn wall(self, k: usize) -> bool {
        self.0 >> k & 1 == 1
    }
}

pub fn observe(cell: Cell) -> WallObservation {
    let mut bits = 0u8;
    for (k, &(dx, dy)) in NEIGHBOURS.iter().enumerate() {
        if cell.offset(dx, dy).is_none() {
            bits |= 1 << k;
        }
    }
    WallObservation(bits)
}

/// The eight observations of non-goal cells, in order of first appearance when cells
/// are scanned row by row from `(0, 0)`: SW corner, S edge, SE corner, W edge,
/// interior, E edge, NW corner, N edge.
pub fn observation_catalogue() -> [WallObservation; N_OBSERVATIONS] {
    let mut out = [WallObservation(0); N_OBSERVATIONS];
    let mut n = 0;
    for cell in Cell::all().filter(|&c| c != Cell::GOAL) {
        let o = observe(cell);
        if !out[..n].contains(&o) {
            out[n] = o;
            n += 1;
        }
    }
    debug_assert_eq!(n, N_OBSERVATIONS);
    out
}

pub fn catalogue_index(obs: WallObservation) -> Result<usize, GridError> {
    observation_catalogue().iter().position(|&o| o == obs).ok_or(GridError::UnknownObservation(obs.0))
}

/// Catalogue index of every cell's observation; the goal maps to 0 (it is absorbing,
/// so its entry is never consulted).
pub fn cell_observation_indices() -> [u8; N_CELLS] {
    let cat = observation_catalogue();
    let mut out = [0u8; N_CELLS];
    for cell in Cell::all() {
        if let Some(k) = cat.iter().position(|&o| o == observe(cell)) {
            out[cell.index()] = k as u8;
        }
    }
    out
}

/// Memory-free observation policy: one action per catalogue observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabularPolicy {
    table: [Dir; N_OBSERVATIONS],
    cell_obs: [u8; N_CELLS],
}

pub fn policy_from_index(idx: usize) -> Result<TabularPolicy, GridError> {
    if idx >= N_POLICIES {
        return Err(GridError::IndexOutOfRange(idx));
    }
    let mut table = [Dir::Up; N_OBSERVATIONS];
    for (k, slot) in table.iter_mut().enumerate() {
        *slot = Dir::from_id(idx >> (2 * k));
    }
    Ok(TabularPolicy { table, cell_obs: cell_observation_indices() })
}

impl TabularPolicy {
    pub fn from_table(table: [Dir; N_OBSERVATIONS]) -> Self {
        Self { table, cell_obs: cell_observation_indices() }
    }

    /// Base-4 class index; digit `k` is the action for catalogue observation `k`.
    pub fn class_index(&self) -> usize {
        self.table.iter().enumerate().map(|(k, d)| d.id() << (2 * k)).sum()
    }

    pub fn table(&self) -> &[Dir; N_OBSERVATIONS] {
        &self.table
    }

    pub fn action_for_observation(&self, k: usize) -> Dir {
        self.table[k]
    }

    /// Action per cell, usable as a state-indexed tabular policy.
    pub fn state_actions(&self) -> Vec<usize> {
        Cell::all().map(|c| self.action(&c).id()).collect()
    }
}

impl Policy<Cell, Dir> for TabularPolicy {
    fn action(&self, state: &Cell) -> Dir {
        self.table[self.cell_obs[state.index()] as usize]
    }
}

/// All `4^8` observation policies.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridPolicyClass;

impl PolicyClass for GridPolicyClass {
    type Policy = TabularPolicy;

    fn len(&self) -> usize {
        N_POLICIES
    }

    fn policy(&self, index: usize) -> TabularPolicy {
        policy_from_index(index).expect("index within class")
    }
}
