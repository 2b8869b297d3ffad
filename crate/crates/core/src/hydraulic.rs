//! Gravity-relaxation simulator for three-player games.
//!
//! The allocation is encoded as offsets `y` from the equal split,
//! `x_i = y_i + v(N)/3` with `y_1 + y_2 + y_3 = 0`. Each player `i` carries
//! two fluid levels that move oppositely as money flows:
//!
//! * `E_i`, the complaint of the pair opposing `i`, equals `y_i` plus a
//!   game constant and rises when `i` gains;
//! * `C_i`, the complaint of `i` alone, equals a constant minus `y_i` and
//!   falls when `i` gains.
//!
//! The six levels are exactly the six proper-coalition complaints. Each step
//! pushes the current highest levels down: the tied top levels contribute
//! their gradients, the averaged direction is projected onto the
//! conserved-sum subspace of the still-free coordinates, and the state slides
//! along it. The slide stops early at the first point where the top of the
//! level pool would start rising again (levels meet there), so a step never
//! raises the maximum. When no direction lowers the maximum, the levels that
//! can no longer sink (a pinched `E_i`/`C_i` pair, or all rising levels, or
//! all falling ones) freeze and their coordinates stop moving; a level that
//! merely touches the maximum at that moment stays free and keeps sinking in
//! the next phase. Once every coordinate is pinned (or every level frozen)
//! the state is the nucleolus.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::game::{Allocation, Coalition, CoalitionGame};
use crate::numfmt::format_sig;

/// Simulation parameters.
///
/// `step_size` caps how far one step may slide. `eps_tie` is the band below
/// the maximum within which levels count as tied (both for averaging
/// gradients and for freezing at a pinch). `eps_conv` declares stationarity:
/// a step that cannot lower the maximum by more than this, or a projected
/// direction smaller than this, stops the phase.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub step_size: f64,
    pub eps_tie: f64,
    pub eps_conv: f64,
    pub max_steps: u64,
    pub trace_every: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step_size: 0.01,
            eps_tie: 1e-6,
            eps_conv: 1e-9,
            max_steps: 1_000_000,
            trace_every: 100,
        }
    }
}

/// One of the six fluid levels. `Pair(i)` tracks the complaint of the
/// two-player coalition opposing player `i` (rises when `i` gains);
/// `Singleton(i)` tracks player `i`'s own complaint (falls when `i` gains).
/// Player indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Pair(usize),
    Singleton(usize),
}

impl Level {
    /// 0-based index of the coordinate this level moves with.
    fn coord(self) -> usize {
        match self {
            Level::Pair(i) | Level::Singleton(i) => i - 1,
        }
    }

    /// Rate of change of the level per unit increase of its coordinate.
    fn slope(self) -> f64 {
        match self {
            Level::Pair(_) => 1.0,
            Level::Singleton(_) => -1.0,
        }
    }

    fn all() -> [Level; 6] {
        [
            Level::Pair(1),
            Level::Pair(2),
            Level::Pair(3),
            Level::Singleton(1),
            Level::Singleton(2),
            Level::Singleton(3),
        ]
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Pair(i) => write!(f, "E{i}"),
            Level::Singleton(i) => write!(f, "C{i}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulator supports exactly 3 players, got {0}")]
    UnsupportedPlayerCount(usize),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("no stationary state within {max_steps} steps")]
    MaxStepsExceeded {
        max_steps: u64,
        allocation: Allocation,
        trace: Trace,
    },
}

/// Snapshot of the simulator: offsets, level values, frozen levels, and
/// progress counters. States are immutable; [`step`] returns the successor.
#[derive(Debug, Clone)]
pub struct SimState {
    y: [f64; 3],
    pair_levels: [f64; 3],
    singleton_levels: [f64; 3],
    frozen: BTreeSet<Level>,
    step_count: u64,
    phase: u32,
    stationary: bool,
}

/// The two per-player level offsets determined by the game alone:
/// `E_i = y_i + e_const[i]` and `C_i = c_const[i] - y_i`.
fn level_consts(game: &CoalitionGame) -> ([f64; 3], [f64; 3]) {
    let vn = game.grand_worth();
    let mut e_const = [0.0; 3];
    let mut c_const = [0.0; 3];
    for i in 1..=3usize {
        let pair: Vec<usize> = (1..=3).filter(|&p| p != i).collect();
        let opposing = Coalition::from_members(&pair).expect("two valid players");
        e_const[i - 1] = vn / 3.0 - vn + game.worth(opposing).expect("within game");
        c_const[i - 1] = game.singleton_worth(i) - vn / 3.0;
    }
    (e_const, c_const)
}

impl SimState {
    /// Builds a state at the given offsets with nothing frozen. The offsets
    /// must sum to zero (money is only moved, never created).
    pub fn with_y(game: &CoalitionGame, y: [f64; 3]) -> Result<SimState, SimError> {
        if game.player_count() != 3 {
            return Err(SimError::UnsupportedPlayerCount(game.player_count()));
        }
        debug_assert!(y.iter().sum::<f64>().abs() < 1e-9, "offsets must sum to 0");
        let mut state = SimState {
            y,
            pair_levels: [0.0; 3],
            singleton_levels: [0.0; 3],
            frozen: BTreeSet::new(),
            step_count: 0,
            phase: 1,
            stationary: false,
        };
        state.recompute_levels(game);
        Ok(state)
    }

    fn recompute_levels(&mut self, game: &CoalitionGame) {
        let (e_const, c_const) = level_consts(game);
        for i in 0..3 {
            self.pair_levels[i] = self.y[i] + e_const[i];
            self.singleton_levels[i] = c_const[i] - self.y[i];
        }
    }

    pub fn y(&self) -> [f64; 3] {
        self.y
    }

    /// `E_1..E_3`: the opposing-pair complaint levels.
    pub fn pair_levels(&self) -> [f64; 3] {
        self.pair_levels
    }

    /// `C_1..C_3`: the own-singleton complaint levels.
    pub fn singleton_levels(&self) -> [f64; 3] {
        self.singleton_levels
    }

    pub fn frozen(&self) -> &BTreeSet<Level> {
        &self.frozen
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    pub fn allocation(&self, game: &CoalitionGame) -> Allocation {
        let share = game.grand_worth() / 3.0;
        Allocation::new(self.y.iter().map(|yi| yi + share).collect())
    }

    fn level_value(&self, level: Level) -> f64 {
        match level {
            Level::Pair(i) => self.pair_levels[i - 1],
            Level::Singleton(i) => self.singleton_levels[i - 1],
        }
    }

    /// Coordinates not pinned by any frozen level.
    fn free_coords(&self) -> Vec<usize> {
        (0..3)
            .filter(|&i| !self.frozen.iter().any(|l| l.coord() == i))
            .collect()
    }

    /// Highest level the simulator still works on: the maximum over
    /// non-frozen levels, or over everything once all six are frozen.
    fn active_max(&self) -> f64 {
        let free: Vec<f64> = Level::all()
            .into_iter()
            .filter(|l| !self.frozen.contains(l))
            .map(|l| self.level_value(l))
            .collect();
        let pool = if free.is_empty() {
            Level::all().map(|l| self.level_value(l)).to_vec()
        } else {
            free
        };
        pool.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// State at the equal split, nothing frozen.
pub fn init_state(game: &CoalitionGame) -> Result<SimState, SimError> {
    SimState::with_y(game, [0.0; 3])
}

/// Rate of change of a level along direction `d`.
fn level_rate(l: Level, d: &[f64; 3]) -> f64 {
    l.slope() * d[l.coord()]
}

/// Directions spanning the extreme rays of every feasibility cone used by
/// [`blocked_levels`]: for each tied level, the in-plane directions along
/// which that level is constant. Complete for this geometry because the
/// feasible set lives in at most two dimensions, where a cone is generated
/// by its boundary rays.
fn candidate_directions(tied: &[Level], free: &[usize]) -> Vec<[f64; 3]> {
    match free.len() {
        2 => {
            let mut u = [0.0; 3];
            u[free[0]] = 1.0;
            u[free[1]] = -1.0;
            vec![u, [-u[0], -u[1], -u[2]]]
        }
        3 => {
            let mut dirs = Vec::with_capacity(2 * tied.len());
            for &l in tied {
                // Projected gradient of the level, then its in-plane
                // perpendicular: cross(gradient, (1,1,1)).
                let mut g = [-1.0 / 3.0; 3];
                g[l.coord()] += 1.0;
                for c in &mut g {
                    *c *= l.slope();
                }
                let perp = [g[1] - g[2], g[2] - g[0], g[0] - g[1]];
                dirs.push(perp);
                dirs.push([-perp[0], -perp[1], -perp[2]]);
            }
            dirs
        }
        _ => Vec::new(),
    }
}

/// The tied levels that cannot sink any further: no free direction lowers
/// them without raising another tied level. These are exactly the levels
/// every continuation of the flow keeps at the current maximum, so they are
/// the ones to freeze. A level tied only by coincidence is not blocked.
fn blocked_levels(tied: &[Level], free: &[usize]) -> Vec<Level> {
    const RATE_TOL: f64 = 1e-9;
    let dirs = candidate_directions(tied, free);
    tied.iter()
        .copied()
        .filter(|&l| {
            !dirs.iter().any(|d| {
                level_rate(l, d) < -RATE_TOL && tied.iter().all(|&m| level_rate(m, d) <= RATE_TOL)
            })
        })
        .collect()
}

/// Checks that no player has sunk below their standalone worth by more than
/// `eps`. Holds along the whole trajectory for superadditive games; a
/// failure flags input where pure level-chasing stops being meaningful.
pub fn level_bound_check_with(state: &SimState, game: &CoalitionGame, eps: f64) -> bool {
    let share = game.grand_worth() / 3.0;
    (1..=3).all(|i| state.y[i - 1] >= game.singleton_worth(i) - share - eps)
}

/// [`level_bound_check_with`] at the default slack of `1e-6`.
pub fn level_bound_check(state: &SimState, game: &CoalitionGame) -> bool {
    level_bound_check_with(state, game, 1e-6)
}

/// Advances the state by one step, or returns it marked stationary when no
/// step can lower the current maximum level.
///
/// The direction averages the gradients of all levels tied with the maximum
/// (within `eps_tie`) and projects the result onto the free coordinates'
/// zero-sum subspace. The step slides at most `step_size`, stopping early at
/// the first crossing where the pool maximum stops falling.
pub fn step(state: &SimState, game: &CoalitionGame, cfg: &SimConfig) -> SimState {
    debug_assert_eq!(game.player_count(), 3);
    let stationary = |s: &SimState| {
        let mut next = s.clone();
        next.stationary = true;
        next
    };

    let free = state.free_coords();
    if free.len() <= 1 {
        return stationary(state);
    }

    let active: Vec<Level> = Level::all()
        .into_iter()
        .filter(|l| !state.frozen.contains(l))
        .collect();
    let m0 = state.active_max();
    let tied: Vec<Level> = active
        .iter()
        .copied()
        .filter(|&l| state.level_value(l) >= m0 - cfg.eps_tie)
        .collect();

    // Averaged gradient of the tied levels, negated for descent, then
    // projected: pinned coordinates stay put, free ones keep their sum.
    let mut d = [0.0; 3];
    for &l in &tied {
        d[l.coord()] -= l.slope() / tied.len() as f64;
    }
    for (i, slot) in d.iter_mut().enumerate() {
        if !free.contains(&i) {
            *slot = 0.0;
        }
    }
    let mean: f64 = free.iter().map(|&i| d[i]).sum::<f64>() / free.len() as f64;
    for &i in &free {
        d[i] -= mean;
    }
    if d.iter().all(|c| c.abs() <= cfg.eps_conv) {
        return stationary(state);
    }

    // Along the ray the pool maximum is convex piecewise-linear, so its
    // minimum over [0, step_size] sits at a level crossing or at the cap.
    let value_at = |l: Level, t: f64| state.level_value(l) + t * l.slope() * d[l.coord()];
    let pool_max = |t: f64| {
        active
            .iter()
            .map(|&l| value_at(l, t))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut candidates = vec![cfg.step_size];
    for (k, &a) in active.iter().enumerate() {
        for &b in &active[k + 1..] {
            let slope_gap = b.slope() * d[b.coord()] - a.slope() * d[a.coord()];
            if slope_gap.abs() < 1e-15 {
                continue;
            }
            let t = (state.level_value(a) - state.level_value(b)) / slope_gap;
            if t > 0.0 && t < cfg.step_size {
                candidates.push(t);
            }
        }
    }
    let mut t_best = cfg.step_size;
    let mut m_best = f64::INFINITY;
    candidates.sort_by(f64::total_cmp);
    for &t in &candidates {
        let m = pool_max(t);
        if m < m_best - 1e-15 {
            m_best = m;
            t_best = t;
        }
    }
    if m_best >= m0 - cfg.eps_conv {
        return stationary(state);
    }

    let mut next = state.clone();
    for &i in &free {
        next.y[i] += t_best * d[i];
    }
    let drift: f64 = next.y.iter().sum();
    for &i in &free {
        next.y[i] -= drift / free.len() as f64;
    }
    next.recompute_levels(game);
    next.step_count += 1;
    next.stationary = false;
    next
}

/// One row of the trace: the state after `step` steps. `max_level` is the
/// pool maximum the simulator is still working on at that point.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub step: u64,
    pub y: [f64; 3],
    pub pair_levels: [f64; 3],
    pub singleton_levels: [f64; 3],
    pub max_level: f64,
    pub phase: u32,
}

/// Sampled history of a run: the initial state, every `trace_every`-th step,
/// and the final state.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    rows: Vec<TraceRow>,
}

impl Trace {
    fn record(&mut self, state: &SimState) {
        let row = TraceRow {
            step: state.step_count,
            y: state.y,
            pair_levels: state.pair_levels,
            singleton_levels: state.singleton_levels,
            max_level: state.active_max(),
            phase: state.phase,
        };
        match self.rows.last_mut() {
            Some(last) if last.step == row.step => *last = row,
            _ => self.rows.push(row),
        }
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Renders the trace as CSV with values to 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,y1,y2,y3,E1,E2,E3,C1,C2,C3,max_level,phase\n");
        for r in &self.rows {
            let mut fields = vec![r.step.to_string()];
            fields.extend(r.y.iter().map(|&v| format_sig(v, 9)));
            fields.extend(r.pair_levels.iter().map(|&v| format_sig(v, 9)));
            fields.extend(r.singleton_levels.iter().map(|&v| format_sig(v, 9)));
            fields.push(format_sig(r.max_level, 9));
            fields.push(r.phase.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn validate_config(cfg: &SimConfig) -> Result<(), SimError> {
    let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
    if !(cfg.step_size.is_finite() && cfg.step_size > 0.0) {
        return bad("step_size must be positive and finite");
    }
    if !(cfg.eps_tie.is_finite() && cfg.eps_tie >= 0.0) {
        return bad("eps_tie must be non-negative and finite");
    }
    if !(cfg.eps_conv.is_finite() && cfg.eps_conv >= 0.0) {
        return bad("eps_conv must be non-negative and finite");
    }
    if cfg.max_steps == 0 {
        return bad("max_steps must be at least 1");
    }
    if cfg.trace_every == 0 {
        return bad("trace_every must be at least 1");
    }
    Ok(())
}

/// Runs the simulator to a stationary state and returns the allocation with
/// the sampled trace. At each stationary point the levels tied with the
/// maximum freeze and their coordinates stop moving; the run ends when every
/// coordinate is pinned or every level frozen. For games with a nonempty set
/// of tied top levels at every pinch (any superadditive game), the result is
/// the nucleolus.
pub fn run(game: &CoalitionGame, cfg: &SimConfig) -> Result<(Allocation, Trace), SimError> {
    validate_config(cfg)?;
    let mut state = init_state(game)?;
    let mut trace = Trace::default();
    trace.record(&state);

    loop {
        let next = step(&state, game, cfg);
        if next.stationary {
            state = next;
            let m0 = state.active_max();
            let tied: Vec<Level> = Level::all()
                .into_iter()
                .filter(|l| !state.frozen.contains(l))
                .filter(|&l| state.level_value(l) >= m0 - cfg.eps_tie)
                .collect();
            let mut to_freeze = blocked_levels(&tied, &state.free_coords());
            if to_freeze.is_empty() {
                // Numerically converged without a clean pinch; settle the
                // whole band rather than loop.
                to_freeze = tied;
            }
            state.frozen.extend(to_freeze);
            if state.frozen.len() == 6 || state.free_coords().len() <= 1 {
                state.stationary = true;
                break;
            }
            state.stationary = false;
            state.phase += 1;
            continue;
        }
        state = next;
        if state.step_count % cfg.trace_every == 0 {
            trace.record(&state);
        }
        if state.step_count >= cfg.max_steps {
            trace.record(&state);
            return Err(SimError::MaxStepsExceeded {
                max_steps: cfg.max_steps,
                allocation: state.allocation(game),
                trace,
            });
        }
    }
    trace.record(&state);
    Ok((state.allocation(game), trace))
}
