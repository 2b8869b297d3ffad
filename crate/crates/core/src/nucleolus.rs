//! Nucleolus computation by sequential min-max linear programs.
//!
//! Round one finds the smallest achievable maximum complaint `T*` over all
//! efficient, individually rational allocations. Coalitions whose complaint
//! is pinned at `T*` on the whole optimal face are frozen as equalities, and
//! the next round minimizes the maximum complaint of the remaining
//! coalitions. Iteration stops once the frozen equalities (plus efficiency)
//! determine the allocation uniquely; the result is the nucleolus, the
//! allocation whose descending-sorted complaint vector is lexicographically
//! minimal.
//!
//! Whether a coalition is pinned at `T*` is decided by re-optimization, not
//! by inspecting a single optimal vertex: the program is re-solved with that
//! coalition forced strictly below `T*`, and the coalition is frozen exactly
//! when that fails or pushes the objective up.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::game::{Allocation, Coalition, CoalitionGame, ExcessVector, GameError};
use crate::simplex::{solve_lp, LinearProgram, LpStatus, SimplexError};

/// How far below `T*` a coalition's complaint is pushed when probing whether
/// the optimal face really pins it at `T*`.
const DELTA_PROBE: f64 = 1e-6;

/// Objective increase (relative) that counts as degradation in a probe.
const EPS_DEGRADE: f64 = 1e-9;

/// Complaints this far below `T*` at the found vertex are provably not
/// pinned, so no probe is needed.
const CANDIDATE_BAND: f64 = 1e-7;

/// Rank tolerance for the frozen equality system.
const EPS_RANK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NucleolusError {
    #[error("no imputation exists: singleton worths sum above the grand worth")]
    InfeasibleGame,
    #[error("operation supports exactly 3 players, got {0}")]
    UnsupportedPlayerCount(usize),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

impl From<SimplexError> for NucleolusError {
    fn from(e: SimplexError) -> Self {
        NucleolusError::Solver(e.to_string())
    }
}

/// Outcome of one min-max round: the optimal level `T*`, one optimal
/// allocation, and the coalitions pinned at `T*` across the whole optimal
/// face.
#[derive(Debug, Clone)]
pub struct MinMaxSolution {
    pub t_star: f64,
    pub x_star: Allocation,
    pub tight: Vec<Coalition>,
}

/// One round of the iteration as reported to callers.
#[derive(Debug, Clone)]
pub struct Round {
    pub t_star: f64,
    pub fixed: Vec<Coalition>,
}

#[derive(Debug, Clone)]
pub struct NucleolusResult {
    pub x: Allocation,
    pub rounds: Vec<Round>,
    pub excess: ExcessVector,
}

/// Builds the round LP over variables `x_1..x_n, T`:
///
/// * every proper coalition not yet frozen: `complaint(S, x) <= T`
/// * every frozen coalition `S`: `complaint(S, x) == frozen[S]`
/// * efficiency: `sum x_i == v(N)`
/// * bounds: `x_i >= v({i})`, `T` free
/// * optional probe row: `complaint(S, x) <= bound`
fn build_round_lp(
    game: &CoalitionGame,
    frozen: &BTreeMap<Coalition, f64>,
    probe: Option<(Coalition, f64)>,
) -> LinearProgram {
    let n = game.player_count();
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut bounds: Vec<Option<f64>> = (1..=n).map(|p| Some(game.singleton_worth(p))).collect();
    bounds.push(None);
    let mut lp = LinearProgram::new(objective, bounds);

    let member_coeffs = |s: Coalition, value: f64| -> Vec<f64> {
        let mut coeffs = vec![0.0; n + 1];
        for p in s.members() {
            coeffs[p - 1] = value;
        }
        coeffs
    };

    for s in game.proper_coalitions() {
        if frozen.contains_key(&s) {
            continue;
        }
        // v(S) - sum x_i <= T
        let mut coeffs = member_coeffs(s, -1.0);
        coeffs[n] = -1.0;
        lp.push_le(coeffs, -game.worth(s).expect("coalition from game"));
    }
    for (&s, &level) in frozen {
        // v(S) - sum x_i == level
        lp.push_eq(
            member_coeffs(s, 1.0),
            game.worth(s).expect("coalition from game") - level,
        );
    }
    let mut eff = vec![1.0; n + 1];
    eff[n] = 0.0;
    lp.push_eq(eff, game.grand_worth());

    if let Some((s, bound)) = probe {
        // v(S) - sum x_i <= bound
        lp.push_le(
            member_coeffs(s, -1.0),
            bound - game.worth(s).expect("coalition from game"),
        );
    }
    lp
}

/// Solves one round: minimizes the maximum complaint of the non-frozen
/// coalitions subject to the frozen equalities, and identifies the
/// coalitions pinned at the optimum by re-optimization.
pub fn min_max_lp(
    game: &CoalitionGame,
    frozen: &BTreeMap<Coalition, f64>,
) -> Result<MinMaxSolution, NucleolusError> {
    let n = game.player_count();
    let singles: f64 = (1..=n).map(|p| game.singleton_worth(p)).sum();
    if singles > game.grand_worth() + 1e-9 {
        return Err(NucleolusError::InfeasibleGame);
    }

    let sol = solve_lp(&build_round_lp(game, frozen, None))?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(if frozen.is_empty() {
                NucleolusError::InfeasibleGame
            } else {
                NucleolusError::Solver("frozen equality system is infeasible".into())
            })
        }
        LpStatus::Unbounded => {
            return Err(NucleolusError::Solver("round program is unbounded".into()))
        }
    }
    let t_star = sol.z[n];
    let x_star = Allocation::new(sol.z[..n].to_vec());

    let mut tight = Vec::new();
    for s in game.proper_coalitions() {
        if frozen.contains_key(&s) {
            continue;
        }
        if game.complaint(s, &x_star)? < t_star - CANDIDATE_BAND {
            // Some optimal point has this complaint strictly below T*.
            continue;
        }
        let probe = solve_lp(&build_round_lp(
            game,
            frozen,
            Some((s, t_star - DELTA_PROBE)),
        ))?;
        let pinned = match probe.status {
            LpStatus::Infeasible => true,
            LpStatus::Optimal => probe.z[n] > t_star + EPS_DEGRADE * (1.0 + t_star.abs()),
            LpStatus::Unbounded => {
                return Err(NucleolusError::Solver("probe program is unbounded".into()))
            }
        };
        if pinned {
            tight.push(s);
        }
    }
    Ok(MinMaxSolution {
        t_star,
        x_star,
        tight,
    })
}

/// Computes the nucleolus. The returned rounds record each `T_k` and the
/// coalitions frozen after round `k`; successive `T_k` strictly decrease
/// (each round settles the next-lower band of complaints).
pub fn nucleolus(game: &CoalitionGame) -> Result<NucleolusResult, NucleolusError> {
    let n = game.player_count();
    let proper_count = (1usize << n) - 2;
    let mut frozen: BTreeMap<Coalition, f64> = BTreeMap::new();
    let mut rounds: Vec<Round> = Vec::new();

    loop {
        let mm = min_max_lp(game, &frozen)?;
        if let Some(prev) = rounds.last() {
            if mm.t_star >= prev.t_star {
                return Err(NucleolusError::Solver(format!(
                    "round level failed to decrease: {} after {}",
                    mm.t_star, prev.t_star
                )));
            }
        }
        if mm.tight.is_empty() {
            return Err(NucleolusError::Solver(
                "round produced no pinned coalition".into(),
            ));
        }
        for &s in &mm.tight {
            frozen.insert(s, mm.t_star);
        }
        rounds.push(Round {
            t_star: mm.t_star,
            fixed: mm.tight.clone(),
        });

        if equality_rank(n, frozen.keys().copied()) >= n || frozen.len() >= proper_count {
            let x = solve_frozen_system(game, &frozen).unwrap_or(mm.x_star);
            let excess = game.excess_vector(&x)?;
            return Ok(NucleolusResult { x, rounds, excess });
        }
        if rounds.len() > proper_count {
            return Err(NucleolusError::Solver(
                "iteration failed to terminate".into(),
            ));
        }
    }
}

/// Rank of the efficiency row plus the frozen coalitions' indicator rows.
/// Once this reaches `n`, the equalities determine the allocation uniquely.
fn equality_rank(n: usize, coalitions: impl Iterator<Item = Coalition>) -> usize {
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for s in coalitions {
        let mut row = vec![0.0; n];
        for p in s.members() {
            row[p - 1] = 1.0;
        }
        rows.push(row);
    }
    let mut rank = 0;
    for col in 0..n {
        let Some(best) = (rank..rows.len())
            .filter(|&r| rows[r][col].abs() > EPS_RANK)
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
        else {
            continue;
        };
        rows.swap(rank, best);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col].abs() > 0.0 {
                let f = row[col] / pivot[col];
                for (cell, p) in row[col..n].iter_mut().zip(&pivot[col..n]) {
                    *cell -= f * p;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Solves the frozen equality system (efficiency plus frozen complaints) by
/// normal equations. With rank `n` the solution is the unique allocation
/// consistent with every round; solving it directly removes the simplex's
/// residual feasibility slack from the reported payoffs.
fn solve_frozen_system(
    game: &CoalitionGame,
    frozen: &BTreeMap<Coalition, f64>,
) -> Option<Allocation> {
    let n = game.player_count();
    let mut rows: Vec<(Vec<f64>, f64)> = vec![(vec![1.0; n], game.grand_worth())];
    for (&s, &level) in frozen {
        let mut row = vec![0.0; n];
        for p in s.members() {
            row[p - 1] = 1.0;
        }
        rows.push((row, game.worth(s).ok()? - level));
    }

    // Normal equations A^T A x = A^T b; the system is tiny and 0/1-valued.
    let mut ata = vec![vec![0.0f64; n]; n];
    let mut atb = vec![0.0f64; n];
    for (row, rhs) in &rows {
        for i in 0..n {
            if row[i] == 0.0 {
                continue;
            }
            atb[i] += rhs;
            for j in 0..n {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = ata[i].clone();
            r.push(atb[i]);
            r
        })
        .collect();
    for col in 0..n {
        let best = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[best][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, best);
        let pivot = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col {
                let f = row[col] / pivot[col];
                for (cell, p) in row[col..=n].iter_mut().zip(&pivot[col..=n]) {
                    *cell -= f * p;
                }
            }
        }
    }
    Some(Allocation::new((0..n).map(|i| m[i][n] / m[i][i]).collect()))
}

/// Exhaustive grid search for three-player games: walks efficient,
/// individually rational allocations in steps of `grid_step` and returns the
/// one whose sorted complaint vector is lexicographically smallest. A test
/// oracle for [`nucleolus`], deliberately independent of the LP machinery.
pub fn brute_force_min_max(
    game: &CoalitionGame,
    grid_step: f64,
) -> Result<Allocation, NucleolusError> {
    assert!(
        grid_step > 0.0 && grid_step.is_finite(),
        "grid_step must be positive"
    );
    if game.player_count() != 3 {
        return Err(NucleolusError::UnsupportedPlayerCount(game.player_count()));
    }
    let v1 = game.singleton_worth(1);
    let v2 = game.singleton_worth(2);
    let v3 = game.singleton_worth(3);
    let spare = game.grand_worth() - v1 - v2 - v3;
    if spare < -1e-9 {
        return Err(NucleolusError::InfeasibleGame);
    }

    let steps = |span: f64| -> usize {
        if span < 0.0 {
            0
        } else {
            (span / grid_step + 1e-9).floor() as usize
        }
    };

    let mut best: Option<(Allocation, ExcessVector)> = None;
    for i in 0..=steps(spare) {
        let x1 = v1 + i as f64 * grid_step;
        let left = spare - i as f64 * grid_step;
        for j in 0..=steps(left) {
            let x2 = v2 + j as f64 * grid_step;
            let x3 = game.grand_worth() - x1 - x2;
            let x = Allocation::new(vec![x1, x2, x3]);
            let ev = game.excess_vector(&x)?;
            let better = match &best {
                None => true,
                Some((_, best_ev)) => ev.lex_cmp(best_ev, 1e-9) == std::cmp::Ordering::Less,
            };
            if better {
                best = Some((x, ev));
            }
        }
    }
    best.map(|(x, _)| x).ok_or(NucleolusError::InfeasibleGame)
}
