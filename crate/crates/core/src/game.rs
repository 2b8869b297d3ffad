//! Characteristic-function games in coalition form.
//!
//! A game assigns a worth `v(S)` to every nonempty coalition `S` of players
//! `1..=n`. The central quantity everywhere in this crate is the *complaint*
//! (excess) of a coalition against an allocation `x`:
//!
//! ```text
//! complaint(S, x) = v(S) - sum of x_i over i in S
//! ```
//!
//! A positive complaint means the coalition could do better on its own; the
//! solvers in [`crate::nucleolus`] and [`crate::hydraulic`] both work by
//! pushing the largest complaints down as far as possible.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

/// Hard cap on the player count: worths are stored densely over all
/// `2^n - 1` nonempty coalitions.
pub const MAX_PLAYERS: usize = 20;

/// Default tolerance for efficiency checks (the allocation sums to `v(N)`).
pub const DEFAULT_EPS_EFF: f64 = 1e-9;

/// Default tie width when collecting the set of maximal complaints.
pub const DEFAULT_EPS_TIE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("player count must be between 2 and {MAX_PLAYERS}, got {0}")]
    InvalidPlayerCount(usize),
    #[error("player {0} out of range 1..={1}")]
    PlayerOutOfRange(usize, usize),
    #[error("coalitions must be nonempty")]
    EmptyCoalition,
    #[error("no worth given for the grand coalition")]
    MissingGrandCoalition,
    #[error("coalition {{{0}}} specified more than once")]
    DuplicateCoalitionKey(Coalition),
    #[error("worth of coalition {{{0}}} is not finite")]
    NonFiniteWorth(Coalition),
    #[error("allocation has {got} entries but the game has {expected} players")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "malformed coalition key {0:?}: expected ascending comma-separated players like \"1,3\""
    )]
    MalformedKey(String),
    #[error("malformed game JSON: {0}")]
    Json(String),
}

/// A nonempty set of players, stored as a bitmask (player `i` is bit `i-1`).
///
/// The derived ordering is by bitmask value, which doubles as the canonical
/// coalition order used for deterministic tie-breaking throughout the crate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u32);

impl Coalition {
    /// Builds a coalition from 1-based player indices. Duplicates collapse
    /// (set semantics); an empty slice is an error.
    pub fn from_members(members: &[usize]) -> Result<Self, GameError> {
        let mut bits = 0u32;
        for &p in members {
            if p == 0 || p > MAX_PLAYERS {
                return Err(GameError::PlayerOutOfRange(p, MAX_PLAYERS));
            }
            bits |= 1 << (p - 1);
        }
        if bits == 0 {
            return Err(GameError::EmptyCoalition);
        }
        Ok(Coalition(bits))
    }

    /// The grand coalition `{1, ..., n}`.
    pub fn grand(n: usize) -> Self {
        debug_assert!((1..=MAX_PLAYERS).contains(&n));
        Coalition((1u32 << n) - 1)
    }

    /// Parses a key of the form `"1,3"`: 1-based players, strictly ascending.
    pub fn parse_key(key: &str) -> Result<Self, GameError> {
        let mut members = Vec::new();
        for token in key.split(',') {
            let p: usize = token
                .trim()
                .parse()
                .map_err(|_| GameError::MalformedKey(key.to_string()))?;
            if let Some(&last) = members.last() {
                if p <= last {
                    return Err(GameError::MalformedKey(key.to_string()));
                }
            }
            members.push(p);
        }
        Self::from_members(&members)
    }

    /// Members in ascending order, 1-based.
    pub fn members(&self) -> Vec<usize> {
        (1..=MAX_PLAYERS).filter(|&p| self.contains(p)).collect()
    }

    pub fn contains(&self, player: usize) -> bool {
        (1..=MAX_PLAYERS).contains(&player) && self.0 & (1 << (player - 1)) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub(crate) fn bits(&self) -> u32 {
        self.0
    }

    pub(crate) fn from_bits(bits: u32) -> Self {
        debug_assert!(bits != 0);
        Coalition(bits)
    }

    fn largest_member(&self) -> usize {
        32 - self.0.leading_zeros() as usize
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in self.members() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// A payoff vector, indexed by player (0-based: entry `i` pays player `i+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    pub fn new(values: Vec<f64>) -> Self {
        Allocation(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Whether the payoffs sum to the grand-coalition worth within `eps`.
    pub fn is_efficient(&self, game: &CoalitionGame, eps: f64) -> bool {
        self.0.len() == game.player_count()
            && (self.0.iter().sum::<f64>() - game.grand_worth()).abs() <= eps
    }

    /// Whether every player receives at least their singleton worth, within `eps`.
    pub fn is_individually_rational(&self, game: &CoalitionGame, eps: f64) -> bool {
        self.0.len() == game.player_count()
            && (0..game.player_count()).all(|i| self.0[i] >= game.singleton_worth(i + 1) - eps)
    }

    /// Max-norm distance to another allocation of the same length.
    pub fn max_norm_distance(&self, other: &Allocation) -> f64 {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for Allocation {
    fn from(values: Vec<f64>) -> Self {
        Allocation(values)
    }
}

impl std::ops::Index<usize> for Allocation {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for Allocation {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// All `2^n - 2` proper-coalition complaints, sorted descending by value.
/// Ties sort by canonical coalition order, so the vector is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessVector {
    entries: Vec<(Coalition, f64)>,
}

impl ExcessVector {
    pub fn entries(&self) -> &[(Coalition, f64)] {
        &self.entries
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest complaint (first entry).
    pub fn max_value(&self) -> f64 {
        self.entries[0].1
    }

    /// Lexicographic comparison of the sorted complaint values. Entries within
    /// `eps` of each other are treated as equal and the scan moves on.
    pub fn lex_cmp(&self, other: &ExcessVector, eps: f64) -> Ordering {
        debug_assert_eq!(self.entries.len(), other.entries.len());
        for (a, b) in self.values().zip(other.values()) {
            if a < b - eps {
                return Ordering::Less;
            }
            if a > b + eps {
                return Ordering::Greater;
            }
        }
        Ordering::Equal
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    players: usize,
    values: BTreeMap<String, f64>,
}

/// A transferable-utility game in characteristic-function form.
///
/// Worths are dense: every nonempty coalition has one, with unspecified
/// proper coalitions defaulted to zero at construction (the defaulted set is
/// kept for echoing back to the user). Values are immutable after
/// construction, so every operation here is a pure function of its inputs.
#[derive(Debug, Clone)]
pub struct CoalitionGame {
    n: usize,
    /// Worth of the coalition with bitmask `m` lives at index `m - 1`.
    worth: Vec<f64>,
    /// Proper coalitions that were defaulted to zero, in canonical order.
    /// Metadata only: excluded from equality.
    defaulted: Vec<Coalition>,
}

impl PartialEq for CoalitionGame {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.worth == other.worth
    }
}

impl CoalitionGame {
    /// Builds a game from a (possibly partial) list of coalition worths.
    /// The grand coalition is required; missing proper coalitions default to
    /// zero and are recorded in [`CoalitionGame::defaulted`].
    pub fn new(
        n: usize,
        worths: impl IntoIterator<Item = (Coalition, f64)>,
    ) -> Result<Self, GameError> {
        if !(2..=MAX_PLAYERS).contains(&n) {
            return Err(GameError::InvalidPlayerCount(n));
        }
        let size = (1usize << n) - 1;
        let mut worth = vec![0.0f64; size];
        let mut seen = vec![false; size];
        for (c, w) in worths {
            if c.largest_member() > n {
                return Err(GameError::PlayerOutOfRange(c.largest_member(), n));
            }
            let idx = (c.bits() - 1) as usize;
            if seen[idx] {
                return Err(GameError::DuplicateCoalitionKey(c));
            }
            if !w.is_finite() {
                return Err(GameError::NonFiniteWorth(c));
            }
            seen[idx] = true;
            worth[idx] = w;
        }
        if !seen[size - 1] {
            return Err(GameError::MissingGrandCoalition);
        }
        let defaulted = (1..=size as u32 - 1)
            .filter(|&bits| !seen[(bits - 1) as usize])
            .map(Coalition::from_bits)
            .collect();
        Ok(CoalitionGame {
            n,
            worth,
            defaulted,
        })
    }

    /// Parses the JSON game format:
    ///
    /// ```json
    /// {"players": 3, "values": {"1,2,3": 21, "1,2": 11, "1,3": 11, "2,3": 5}}
    /// ```
    ///
    /// Keys are ascending comma-separated 1-based player lists. Unknown
    /// top-level fields and malformed keys are errors; missing proper
    /// coalitions default to zero.
    pub fn from_json_str(text: &str) -> Result<Self, GameError> {
        let file: GameFile =
            serde_json::from_str(text).map_err(|e| GameError::Json(e.to_string()))?;
        let mut pairs = Vec::with_capacity(file.values.len());
        for (key, value) in &file.values {
            pairs.push((Coalition::parse_key(key)?, *value));
        }
        Self::new(file.players, pairs)
    }

    /// JSON echo of this game: the originally specified worths plus the list
    /// of coalitions that were defaulted to zero. Re-parsing the `players` /
    /// `values` part reconstructs an identical game.
    pub fn to_json_value(&self) -> serde_json::Value {
        let defaulted: std::collections::BTreeSet<u32> =
            self.defaulted.iter().map(|c| c.bits()).collect();
        let mut values = serde_json::Map::new();
        for c in self.coalitions() {
            if !defaulted.contains(&c.bits()) {
                values.insert(c.to_string(), serde_json::json!(self.worth_bits(c.bits())));
            }
        }
        serde_json::json!({
            "players": self.n,
            "values": serde_json::Value::Object(values),
            "defaulted": self.defaulted.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn player_count(&self) -> usize {
        self.n
    }

    /// Proper coalitions that were not specified and defaulted to zero.
    pub fn defaulted(&self) -> &[Coalition] {
        &self.defaulted
    }

    pub fn worth(&self, c: Coalition) -> Result<f64, GameError> {
        if c.largest_member() > self.n {
            return Err(GameError::PlayerOutOfRange(c.largest_member(), self.n));
        }
        Ok(self.worth_bits(c.bits()))
    }

    pub(crate) fn worth_bits(&self, bits: u32) -> f64 {
        self.worth[(bits - 1) as usize]
    }

    pub fn grand_worth(&self) -> f64 {
        self.worth[self.worth.len() - 1]
    }

    /// Worth of `{player}` (1-based).
    pub fn singleton_worth(&self, player: usize) -> f64 {
        debug_assert!(player >= 1 && player <= self.n);
        self.worth_bits(1 << (player - 1))
    }

    /// All nonempty coalitions in canonical (bitmask) order.
    pub fn coalitions(&self) -> impl Iterator<Item = Coalition> + '_ {
        (1..=(1u32 << self.n) - 1).map(Coalition::from_bits)
    }

    /// All proper nonempty coalitions (grand coalition excluded).
    pub fn proper_coalitions(&self) -> impl Iterator<Item = Coalition> + '_ {
        (1..(1u32 << self.n) - 1).map(Coalition::from_bits)
    }

    fn check_allocation(&self, x: &Allocation) -> Result<(), GameError> {
        if x.len() != self.n {
            return Err(GameError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `complaint(S, x) = v(S) - sum of x_i over i in S`.
    pub fn complaint(&self, s: Coalition, x: &Allocation) -> Result<f64, GameError> {
        self.check_allocation(x)?;
        if s.largest_member() > self.n {
            return Err(GameError::PlayerOutOfRange(s.largest_member(), self.n));
        }
        Ok(self.complaint_bits(s.bits(), x.as_slice()))
    }

    pub(crate) fn complaint_bits(&self, bits: u32, x: &[f64]) -> f64 {
        let mut paid = 0.0;
        let mut rest = bits;
        while rest != 0 {
            let i = rest.trailing_zeros();
            paid += x[i as usize];
            rest &= rest - 1;
        }
        self.worth_bits(bits) - paid
    }

    /// Complaints of all proper coalitions, sorted descending (ties in
    /// canonical coalition order).
    pub fn excess_vector(&self, x: &Allocation) -> Result<ExcessVector, GameError> {
        self.check_allocation(x)?;
        let mut entries: Vec<(Coalition, f64)> = self
            .proper_coalitions()
            .map(|c| (c, self.complaint_bits(c.bits(), x.as_slice())))
            .collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ExcessVector { entries })
    }

    /// Largest proper-coalition complaint and every coalition attaining it
    /// within [`DEFAULT_EPS_TIE`].
    pub fn max_complaint(&self, x: &Allocation) -> Result<(f64, Vec<Coalition>), GameError> {
        self.max_complaint_with(x, DEFAULT_EPS_TIE)
    }

    /// Largest proper-coalition complaint with an explicit tie width.
    pub fn max_complaint_with(
        &self,
        x: &Allocation,
        eps_tie: f64,
    ) -> Result<(f64, Vec<Coalition>), GameError> {
        self.check_allocation(x)?;
        let mut max = f64::NEG_INFINITY;
        for c in self.proper_coalitions() {
            let e = self.complaint_bits(c.bits(), x.as_slice());
            if e > max {
                max = e;
            }
        }
        let attaining = self
            .proper_coalitions()
            .filter(|c| self.complaint_bits(c.bits(), x.as_slice()) >= max - eps_tie)
            .collect();
        Ok((max, attaining))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(members: &[usize]) -> Coalition {
        Coalition::from_members(members).unwrap()
    }

    /// Three-player ride-sharing game: one passenger rides much farther than
    /// the other two, so pair worths are asymmetric.
    pub(crate) fn taxi_game() -> CoalitionGame {
        CoalitionGame::new(
            3,
            vec![
                (c(&[1]), 0.0),
                (c(&[2]), 0.0),
                (c(&[3]), 0.0),
                (c(&[1, 2]), 11.0),
                (c(&[1, 3]), 11.0),
                (c(&[2, 3]), 5.0),
                (c(&[1, 2, 3]), 21.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn coalition_display_and_parse_round_trip() {
        let co = c(&[3, 1]);
        assert_eq!(co.to_string(), "1,3");
        assert_eq!(Coalition::parse_key("1,3").unwrap(), co);
        assert_eq!(co.members(), vec![1, 3]);
        assert!(co.contains(1) && !co.contains(2) && co.contains(3));
    }

    #[test]
    fn parse_key_rejects_disorder_and_junk() {
        assert!(matches!(
            Coalition::parse_key("3,1"),
            Err(GameError::MalformedKey(_))
        ));
        assert!(matches!(
            Coalition::parse_key("1,1"),
            Err(GameError::MalformedKey(_))
        ));
        assert!(matches!(
            Coalition::parse_key("1,x"),
            Err(GameError::MalformedKey(_))
        ));
        assert!(matches!(
            Coalition::parse_key(""),
            Err(GameError::MalformedKey(_))
        ));
        assert!(matches!(
            Coalition::parse_key("0"),
            Err(GameError::PlayerOutOfRange(0, _))
        ));
    }

    #[test]
    fn canonical_order_is_bitmask_order() {
        assert!(c(&[1]) < c(&[2]));
        assert!(c(&[2]) < c(&[1, 2]));
        assert!(c(&[1, 2]) < c(&[3]));
        assert!(c(&[3]) < c(&[1, 3]));
    }

    #[test]
    fn make_game_fills_defaults_and_flags_them() {
        let g = CoalitionGame::new(2, vec![(c(&[1, 2]), 1.0)]).unwrap();
        assert_eq!(g.worth(c(&[1])).unwrap(), 0.0);
        assert_eq!(g.worth(c(&[2])).unwrap(), 0.0);
        assert_eq!(g.defaulted(), &[c(&[1]), c(&[2])]);
        assert_eq!(g.grand_worth(), 1.0);
    }

    #[test]
    fn make_game_requires_grand_coalition() {
        let err = CoalitionGame::new(3, vec![(c(&[1, 2]), 11.0)]).unwrap_err();
        assert_eq!(err, GameError::MissingGrandCoalition);
    }

    #[test]
    fn make_game_rejects_duplicates_and_bad_sizes() {
        let err = CoalitionGame::new(2, vec![(c(&[1, 2]), 1.0), (c(&[1, 2]), 2.0)]).unwrap_err();
        assert_eq!(err, GameError::DuplicateCoalitionKey(c(&[1, 2])));
        assert_eq!(
            CoalitionGame::new(1, vec![]).unwrap_err(),
            GameError::InvalidPlayerCount(1)
        );
        assert_eq!(
            CoalitionGame::new(21, vec![]).unwrap_err(),
            GameError::InvalidPlayerCount(21)
        );
        let err = CoalitionGame::new(2, vec![(c(&[3]), 1.0), (c(&[1, 2]), 1.0)]).unwrap_err();
        assert_eq!(err, GameError::PlayerOutOfRange(3, 2));
        let err = CoalitionGame::new(2, vec![(c(&[1, 2]), f64::NAN)]).unwrap_err();
        assert_eq!(err, GameError::NonFiniteWorth(c(&[1, 2])));
    }

    #[test]
    fn complaint_matches_hand_evaluation() {
        let g = taxi_game();
        let x = Allocation::new(vec![11.0, 5.0, 5.0]);
        // v({1,2}) - x_1 - x_2 = 11 - 16
        assert_eq!(g.complaint(c(&[1, 2]), &x).unwrap(), -5.0);
        // v({2,3}) - x_2 - x_3 = 5 - 10
        assert_eq!(g.complaint(c(&[2, 3]), &x).unwrap(), -5.0);
        assert_eq!(g.complaint(c(&[1]), &x).unwrap(), -11.0);

        let zeroes = Allocation::new(vec![0.0, 0.0, 0.0]);
        for p in 1..=3 {
            assert_eq!(g.complaint(c(&[p]), &zeroes).unwrap(), g.singleton_worth(p));
        }
    }

    #[test]
    fn complaint_checks_dimensions() {
        let g = taxi_game();
        let err = g
            .complaint(c(&[1]), &Allocation::new(vec![1.0, 2.0]))
            .unwrap_err();
        assert_eq!(
            err,
            GameError::DimensionMismatch {
                expected: 3,
                got: 2
            }
        );
    }

    // Expected vectors below were evaluated by hand from the six linear
    // complaint forms of the taxi game before the sort was implemented.
    #[test]
    fn excess_vector_sorted_descending() {
        let g = taxi_game();
        let x = Allocation::new(vec![11.0, 5.0, 5.0]);
        let ev = g.excess_vector(&x).unwrap();
        let values: Vec<f64> = ev.values().collect();
        assert_eq!(values, vec![-5.0, -5.0, -5.0, -5.0, -5.0, -11.0]);

        let lopsided = Allocation::new(vec![21.0, 0.0, 0.0]);
        let ev = g.excess_vector(&lopsided).unwrap();
        let values: Vec<f64> = ev.values().collect();
        assert_eq!(values, vec![5.0, 0.0, 0.0, -10.0, -10.0, -21.0]);
        assert_eq!(ev.max_value(), 5.0);
    }

    #[test]
    fn excess_vector_two_player() {
        let g = CoalitionGame::new(2, vec![(c(&[1, 2]), 1.0)]).unwrap();
        let ev = g.excess_vector(&Allocation::new(vec![0.5, 0.5])).unwrap();
        let values: Vec<f64> = ev.values().collect();
        assert_eq!(values, vec![-0.5, -0.5]);
    }

    #[test]
    fn max_complaint_reports_ties() {
        let g = taxi_game();
        let x = Allocation::new(vec![7.0, 7.0, 7.0]);
        let (max, attaining) = g.max_complaint(&x).unwrap();
        assert_eq!(max, -3.0);
        assert_eq!(attaining, vec![c(&[1, 2]), c(&[1, 3])]);

        let g2 = CoalitionGame::new(2, vec![(c(&[1, 2]), 1.0)]).unwrap();
        let (max, attaining) = g2.max_complaint(&Allocation::new(vec![0.5, 0.5])).unwrap();
        assert_eq!(max, -0.5);
        assert_eq!(attaining, vec![c(&[1]), c(&[2])]);
    }

    #[test]
    fn allocation_predicates() {
        let g = taxi_game();
        let x = Allocation::new(vec![11.0, 5.0, 5.0]);
        assert!(x.is_efficient(&g, DEFAULT_EPS_EFF));
        assert!(x.is_individually_rational(&g, DEFAULT_EPS_EFF));
        let bad = Allocation::new(vec![22.0, 5.0, 5.0]);
        assert!(!bad.is_efficient(&g, DEFAULT_EPS_EFF));
        let unfair = Allocation::new(vec![22.0, 5.0, -6.0]);
        assert!(!unfair.is_individually_rational(&g, DEFAULT_EPS_EFF));
    }

    #[test]
    fn json_parse_matches_explicit_construction() {
        let text = r#"{"players":3,"values":{"1,2,3":21,"1,2":11,"1,3":11,"2,3":5}}"#;
        let g = CoalitionGame::from_json_str(text).unwrap();
        assert_eq!(g, taxi_game());
        assert_eq!(g.defaulted(), &[c(&[1]), c(&[2]), c(&[3])]);
    }

    #[test]
    fn json_rejects_unknown_fields_and_bad_keys() {
        assert!(matches!(
            CoalitionGame::from_json_str(r#"{"players":3,"values":{},"extra":1}"#),
            Err(GameError::Json(_))
        ));
        assert!(matches!(
            CoalitionGame::from_json_str(r#"{"players":3,"values":{"2,1":1,"1,2,3":2}}"#),
            Err(GameError::MalformedKey(_))
        ));
        assert!(matches!(
            CoalitionGame::from_json_str(r#"{"players":3,"values":{"1,2":11}}"#),
            Err(GameError::MissingGrandCoalition)
        ));
    }

    #[test]
    fn json_echo_round_trips() {
        let text = r#"{"players":3,"values":{"1,2,3":21,"1,2":11,"1,3":11,"2,3":5}}"#;
        let g = CoalitionGame::from_json_str(text).unwrap();
        let echo = g.to_json_value();
        let echoed = serde_json::json!({
            "players": echo["players"],
            "values": echo["values"],
        });
        let reparsed = CoalitionGame::from_json_str(&echoed.to_string()).unwrap();
        assert_eq!(reparsed, g);
        assert_eq!(echo["defaulted"], serde_json::json!(["1", "2", "3"]));
    }

    fn arb_game(n: usize) -> impl Strategy<Value = CoalitionGame> {
        let size = (1usize << n) - 1;
        proptest::collection::vec(-20.0f64..20.0, size).prop_map(move |ws| {
            let pairs = ws
                .into_iter()
                .enumerate()
                .map(|(i, w)| (Coalition::from_bits(i as u32 + 1), w));
            CoalitionGame::new(n, pairs).unwrap()
        })
    }

    fn arb_alloc(n: usize) -> impl Strategy<Value = Allocation> {
        proptest::collection::vec(-30.0f64..30.0, n).prop_map(Allocation::new)
    }

    proptest! {
        // Complaints are affine: paying player i one more unit lowers the
        // complaint of exactly the coalitions containing i by that unit.
        #[test]
        fn complaint_is_affine(g in arb_game(3), x in arb_alloc(3), delta in -5.0f64..5.0, player in 1usize..=3) {
            let mut shifted = x.as_slice().to_vec();
            shifted[player - 1] += delta;
            let shifted = Allocation::new(shifted);
            for s in g.coalitions() {
                let before = g.complaint(s, &x).unwrap();
                let after = g.complaint(s, &shifted).unwrap();
                let expected = if s.contains(player) { before - delta } else { before };
                prop_assert!((after - expected).abs() < 1e-9);
            }
        }

        // For efficient x, a pair complaint can be rewritten through the
        // excluded player: v({j,k}) - x_j - x_k = x_i - v(N) + v({j,k}).
        #[test]
        fn pair_complaint_rewriting(g in arb_game(3), x1 in -20.0f64..20.0, x2 in -20.0f64..20.0) {
            let x3 = g.grand_worth() - x1 - x2;
            let x = Allocation::new(vec![x1, x2, x3]);
            for i in 1..=3usize {
                let pair: Vec<usize> = (1..=3).filter(|&p| p != i).collect();
                let s = Coalition::from_members(&pair).unwrap();
                let direct = g.complaint(s, &x).unwrap();
                let rewritten = x[i - 1] - g.grand_worth() + g.worth(s).unwrap();
                prop_assert!((direct - rewritten).abs() < 1e-9);
            }
        }

        // The excess vector is exactly the multiset of proper complaints,
        // sorted descending.
        #[test]
        fn excess_vector_is_sorted_permutation(g in arb_game(3), x in arb_alloc(3)) {
            let ev = g.excess_vector(&x).unwrap();
            prop_assert_eq!(ev.len(), 6);
            let values: Vec<f64> = ev.values().collect();
            for w in values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let mut expected: Vec<f64> = g
                .proper_coalitions()
                .map(|s| g.complaint(s, &x).unwrap())
                .collect();
            expected.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in values.iter().zip(&expected) {
                prop_assert_eq!(a, b);
            }
        }

        // Adding c to every payoff and c*|S| to every worth leaves all
        // complaints unchanged.
        #[test]
        fn complaints_invariant_under_uniform_shift(g in arb_game(3), x in arb_alloc(3), shift in -10.0f64..10.0) {
            let shifted_game = CoalitionGame::new(
                3,
                g.coalitions()
                    .map(|s| (s, g.worth(s).unwrap() + shift * s.len() as f64)),
            )
            .unwrap();
            let shifted_x =
                Allocation::new(x.as_slice().iter().map(|v| v + shift).collect());
            for s in g.coalitions() {
                let a = g.complaint(s, &x).unwrap();
                let b = shifted_game.complaint(s, &shifted_x).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        // max_complaint agrees with the head of the excess vector.
        #[test]
        fn max_complaint_matches_excess_head(g in arb_game(3), x in arb_alloc(3)) {
            let (max, attaining) = g.max_complaint(&x).unwrap();
            let ev = g.excess_vector(&x).unwrap();
            prop_assert_eq!(max, ev.max_value());
            prop_assert!(!attaining.is_empty());
            for s in attaining {
                prop_assert!(g.complaint(s, &x).unwrap() >= max - DEFAULT_EPS_TIE);
            }
        }
    }
}
