#![allow(dead_code)]

use std::collections::BTreeMap;

use mcr_balance::cli::{hand_from_flags, ScoreHandArgs};
use mcr_balance::scoring::{best_fan, FanTable};
use mcr_balance::tiles::{parse_kinds, KindCounts};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct GoldenCase {
    pub name: String,
    pub tiles: String,
    #[serde(default)]
    pub melds: Vec<String>,
    pub win_by: String,
    #[serde(default = "east")]
    pub seat_wind: u8,
    #[serde(default = "east")]
    pub prevalent_wind: u8,
    #[serde(default)]
    pub last_tile: bool,
    #[serde(default)]
    pub visible: Option<String>,
    pub fans: Vec<(String, u32)>,
    pub total: u32,
    #[serde(default = "yes")]
    pub win: bool,
}

fn east() -> u8 {
    1
}

fn yes() -> bool {
    true
}

pub fn golden_cases() -> Vec<GoldenCase> {
    include_str!("../data/golden_scoring.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("golden line parses"))
        .collect()
}

/// Scores a case and returns a description of every disagreement.
pub fn check_case(case: &GoldenCase, table: &FanTable) -> Vec<String> {
    let args = ScoreHandArgs {
        tiles: case.tiles.clone(),
        melds: case.melds.clone(),
        win_tile: None,
        win_by: case.win_by.clone(),
        seat_wind: case.seat_wind,
        prevalent_wind: case.prevalent_wind,
        last_tile: case.last_tile,
        ruleset: "classic".into(),
        json: false,
    };
    let (hand, win, mut ctx) = match hand_from_flags(&args) {
        Ok(v) => v,
        Err(e) => return vec![format!("bad case: {e}")],
    };
    if let Some(v) = &case.visible {
        ctx.visible_counts = KindCounts::from_kinds(&parse_kinds(v).expect("visible tiles parse"));
    }
    let result = best_fan(&hand, win, &ctx, table);
    let got: BTreeMap<String, u32> = result.fans.iter().map(|f| (table.name(f.pattern_id).to_string(), u32::from(f.multiplicity))).collect();
    let want: BTreeMap<String, u32> = case.fans.iter().cloned().collect();
    let mut problems = vec![];
    if got != want {
        problems.push(format!("fans {got:?}, expected {want:?}"));
    }
    if result.total != case.total {
        problems.push(format!("total {}, expected {}", result.total, case.total));
    }
    if result.win != case.win {
        problems.push(format!("win {}, expected {}", result.win, case.win));
    }
    problems
}
