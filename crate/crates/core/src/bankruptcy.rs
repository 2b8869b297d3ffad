//! Estate division among creditors whose claims exceed the estate.
//!
//! The two-creditor rule ([`cg_rule`]) splits only the contested part of the
//! estate: each creditor first concedes whatever the other could not touch
//! even with full priority, and the remainder is halved. For more creditors,
//! [`talmud_division`] generalizes it: the estate induces a coalition game
//! where a group's worth is whatever the outsiders' claims cannot absorb,
//! and the division is that game's nucleolus. The result is pairwise
//! consistent: every two creditors split their combined award by the
//! two-creditor rule applied to their own claims.

use thiserror::Error;

use crate::game::{Allocation, Coalition, CoalitionGame, MAX_PLAYERS};
use crate::nucleolus::{nucleolus, NucleolusError};

#[derive(Debug, Error, PartialEq)]
pub enum BankruptcyError {
    #[error("estate must be finite and non-negative, got {0}")]
    InvalidEstate(f64),
    #[error("debt {index} must be finite and non-negative, got {value}")]
    InvalidDebt { index: usize, value: f64 },
    #[error("need at least 2 creditors, got {0}")]
    TooFewCreditors(usize),
    #[error("at most {MAX_PLAYERS} creditors supported, got {0}")]
    TooManyCreditors(usize),
    #[error("estate {estate} exceeds total claims {total}; nothing is contested")]
    EstateExceedsClaims { estate: f64, total: f64 },
}

/// A bankruptcy problem: an estate worth `M` and one claim per creditor,
/// with `M` no larger than the claims' total.
#[derive(Debug, Clone, PartialEq)]
pub struct BankruptcyInstance {
    estate: f64,
    debts: Vec<f64>,
}

impl BankruptcyInstance {
    pub fn new(estate: f64, debts: Vec<f64>) -> Result<Self, BankruptcyError> {
        if !estate.is_finite() || estate < 0.0 {
            return Err(BankruptcyError::InvalidEstate(estate));
        }
        if debts.len() < 2 {
            return Err(BankruptcyError::TooFewCreditors(debts.len()));
        }
        if debts.len() > MAX_PLAYERS {
            return Err(BankruptcyError::TooManyCreditors(debts.len()));
        }
        for (i, &d) in debts.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(BankruptcyError::InvalidDebt {
                    index: i + 1,
                    value: d,
                });
            }
        }
        let total: f64 = debts.iter().sum();
        if estate > total {
            return Err(BankruptcyError::EstateExceedsClaims { estate, total });
        }
        Ok(BankruptcyInstance { estate, debts })
    }

    pub fn estate(&self) -> f64 {
        self.estate
    }

    pub fn debts(&self) -> &[f64] {
        &self.debts
    }

    pub fn creditor_count(&self) -> usize {
        self.debts.len()
    }
}

/// Positive part: `max(x, 0)`.
pub fn plus_part(x: f64) -> f64 {
    x.max(0.0)
}

/// Two-creditor contested-garment split of `estate` between claims `d1` and
/// `d2`. Creditor 1 is first awarded the part creditor 2 cannot contest
/// (`(M - d2)+`), symmetrically for creditor 2, and the contested remainder
/// is split in half. Requires `0 <= estate <= d1 + d2`.
pub fn cg_rule(estate: f64, d1: f64, d2: f64) -> (f64, f64) {
    // Tolerances admit pots computed from other solvers' rounded awards.
    let slack = 1e-9 * (1.0 + d1.abs() + d2.abs());
    debug_assert!(estate >= -slack && d1 >= 0.0 && d2 >= 0.0);
    debug_assert!(estate <= d1 + d2 + slack);
    let conceded1 = plus_part(estate - d2);
    let conceded2 = plus_part(estate - d1);
    let contested = estate - conceded1 - conceded2;
    let x1 = conceded1 + contested / 2.0;
    (x1, estate - x1)
}

/// The coalition game induced by a bankruptcy problem: a coalition's worth
/// is what remains of the estate after paying the outside claims in full,
/// floored at zero.
pub fn bankruptcy_game(instance: &BankruptcyInstance) -> CoalitionGame {
    let n = instance.creditor_count();
    let total: f64 = instance.debts.iter().sum();
    let mut entries = Vec::with_capacity((1 << n) - 1);
    for mask in 1u32..(1 << n) {
        let coalition = Coalition::from_bits(mask);
        let inside: f64 = coalition
            .members()
            .into_iter()
            .map(|p| instance.debts[p - 1])
            .sum();
        entries.push((coalition, plus_part(instance.estate - (total - inside))));
    }
    CoalitionGame::new(n, entries).expect("validated instance yields a valid game")
}

/// Divides the estate by the nucleolus of the induced game. Every creditor
/// receives between zero and their claim, the estate is paid out exactly,
/// and any two creditors split their combined award by [`cg_rule`].
pub fn talmud_division(instance: &BankruptcyInstance) -> Result<Allocation, NucleolusError> {
    let game = bankruptcy_game(instance);
    let result = nucleolus(&game)?;
    debug_assert!(pairwise_consistent(instance, &result.x, 1e-7));
    Ok(result.x)
}

/// Checks that every pair of creditors splits their combined award by the
/// two-creditor rule, within `tol`.
pub fn pairwise_consistent(instance: &BankruptcyInstance, x: &Allocation, tol: f64) -> bool {
    let n = instance.creditor_count();
    if x.len() != n {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let pot = x[i] + x[j];
            let (want_i, want_j) = cg_rule(pot, instance.debts[i], instance.debts[j]);
            if (x[i] - want_i).abs() > tol || (x[j] - want_j).abs() > tol {
                return false;
            }
        }
    }
    true
}
