//! JSON and plain-text rendering of solver results.
//!
//! Every report shares a common core (allocation, maximum complaint, the
//! coalitions tied at it, an efficiency check, and an echo of the parsed
//! game) plus method-specific fields. All numbers are rounded to 9
//! significant digits so reports are stable across platforms.

use fairsplit::bankruptcy::{pairwise_consistent, BankruptcyInstance};
use fairsplit::game::{Allocation, CoalitionGame, GameError};
use fairsplit::hydraulic::Trace;
use fairsplit::nucleolus::NucleolusResult;
use fairsplit::numfmt::round_sig;
use serde_json::{json, Value};

fn num(x: f64) -> Value {
    json!(round_sig(x, 9))
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn base_report(
    method: &str,
    game: &CoalitionGame,
    x: &Allocation,
    eps_eff: f64,
    eps_tie: f64,
) -> Result<Value, GameError> {
    let (max_complaint, tied) = game.max_complaint_with(x, eps_tie)?;
    Ok(json!({
        "method": method,
        "players": game.player_count(),
        "allocation": nums(x.as_slice()),
        "max_complaint": num(max_complaint),
        "tied_at_max": tied.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "efficient": x.is_efficient(game, eps_eff),
        "game": game.to_json_value(),
    }))
}

pub fn nucleolus_report(
    game: &CoalitionGame,
    result: &NucleolusResult,
    eps_eff: f64,
    eps_tie: f64,
) -> Result<Value, GameError> {
    let mut v = base_report("nucleolus-lp", game, &result.x, eps_eff, eps_tie)?;
    v["rounds"] = Value::Array(
        result
            .rounds
            .iter()
            .map(|r| {
                json!({
                    "t_star": num(r.t_star),
                    "fixed": r.fixed.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    );
    Ok(v)
}

pub fn simulate_report(
    game: &CoalitionGame,
    x: &Allocation,
    trace: &Trace,
    stationary: bool,
    eps_eff: f64,
    eps_tie: f64,
) -> Result<Value, GameError> {
    let mut v = base_report("hydraulic-sim", game, x, eps_eff, eps_tie)?;
    let last = trace.rows().last();
    v["steps"] = json!(last.map_or(0, |r| r.step));
    v["phases"] = json!(last.map_or(1, |r| r.phase));
    v["stationary"] = json!(stationary);
    Ok(v)
}

pub fn bankruptcy_report(
    instance: &BankruptcyInstance,
    game: &CoalitionGame,
    x: &Allocation,
    eps_eff: f64,
    eps_tie: f64,
) -> Result<Value, GameError> {
    let mut v = base_report("talmud", game, x, eps_eff, eps_tie)?;
    v["estate"] = num(instance.estate());
    v["debts"] = nums(instance.debts());
    v["pairwise_consistent"] = json!(pairwise_consistent(instance, x, 1e-6));
    Ok(v)
}

pub fn compare_report(lp: Value, sim: Value, gap: f64) -> Value {
    json!({
        "method": "compare",
        "lp": lp,
        "sim": sim,
        "gap": num(gap),
    })
}

/// Renders a report: indented JSON by default, an aligned key/value listing
/// in pretty mode.
pub fn render(v: &Value, pretty: bool) -> String {
    if pretty {
        let mut out = String::new();
        render_listing(v, 0, &mut out);
        out
    } else {
        serde_json::to_string_pretty(v).expect("report serializes")
    }
}

/// A scalar, or an array of scalars joined by spaces; `None` for anything
/// that needs its own block.
fn inline_value(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|item| match item {
                    Value::Array(_) | Value::Object(_) => None,
                    _ => inline_value(item),
                })
                .collect();
            parts.map(|p| p.join(" "))
        }
        Value::Object(_) => None,
    }
}

fn render_listing(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (key, value) in map {
                if let Some(inline) = inline_value(value) {
                    out.push_str(&format!("{pad}{key:<width$}  {inline}\n"));
                } else {
                    out.push_str(&format!("{pad}{key}\n"));
                    render_listing(value, indent + 1, out);
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match inline_value(item) {
                    Some(inline) => out.push_str(&format!("{pad}- {inline}\n")),
                    None => render_listing(item, indent + 1, out),
                }
            }
        }
        scalar => {
            let inline = inline_value(scalar).unwrap_or_default();
            out.push_str(&format!("{pad}{inline}\n"));
        }
    }
}
