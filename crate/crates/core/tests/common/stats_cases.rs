//! Frozen scipy results for every test procedure, shared by the
//! regression and acceptance targets.

use docsim::stats::{
    mann_whitney_u, one_way_anova, tukey_hsd, wilcoxon_signed_rank, Alternative, GroupSample,
};
use serde::Deserialize;

const P_TOL: f64 = 1e-6;
const TUKEY_P_TOL: f64 = 1e-3;
const STAT_TOL: f64 = 1e-6;

#[derive(Deserialize)]
struct Fixture {
    cases: Vec<Case>,
}

#[derive(Deserialize)]
pub struct Pair {
    a: usize,
    b: usize,
    mean_diff: f64,
    q: f64,
    p_adj: f64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Case {
    Anova {
        name: String,
        groups: Vec<Vec<f64>>,
        statistic: f64,
        df: (f64, f64),
        p_value: f64,
    },
    Tukey {
        name: String,
        groups: Vec<Vec<f64>>,
        pairs: Vec<Pair>,
    },
    MannWhitney {
        name: String,
        x: Vec<f64>,
        y: Vec<f64>,
        alternative: String,
        u_x: f64,
        statistic: f64,
        p_value: f64,
    },
    Wilcoxon {
        name: String,
        x: Vec<f64>,
        y: Vec<f64>,
        statistic: f64,
        p_value: f64,
    },
}

pub fn fixture() -> Vec<Case> {
    let text = include_str!("../fixtures/stats_cases.json");
    serde_json::from_str::<Fixture>(text).unwrap().cases
}

pub fn samples(groups: &[Vec<f64>]) -> Vec<GroupSample> {
    groups
        .iter()
        .enumerate()
        .map(|(i, g)| GroupSample::new(format!("g{i}"), g.clone()).unwrap())
        .collect()
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want} (tol {tol})"))
    }
}

/// Checks one case; `Err` carries every mismatch.
pub fn check_case(case: &Case) -> Result<(), String> {
    match case {
        Case::Anova { groups, statistic, df, p_value, .. } => {
            let r = one_way_anova(&samples(groups)).map_err(|e| e.to_string())?;
            close("F", r.statistic, *statistic, STAT_TOL * statistic.abs().max(1.0))?;
            if r.df != Some(*df) {
                return Err(format!("df {:?} != {:?}", r.df, df));
            }
            close("p", r.p_value, *p_value, P_TOL)
        }
        Case::Tukey { groups, pairs, .. } => {
            let r = tukey_hsd(&samples(groups), 0.05).map_err(|e| e.to_string())?;
            for want in pairs {
                let (la, lb) = (format!("g{}", want.a), format!("g{}", want.b));
                let got = r
                    .pairs
                    .iter()
                    .find(|p| p.label_a == la && p.label_b == lb)
                    .ok_or_else(|| format!("missing pair {la}/{lb}"))?;
                close("mean_diff", got.mean_diff, want.mean_diff, 1e-12)?;
                close("q", got.q, want.q, STAT_TOL)?;
                close("p_adj", got.p_adj, want.p_adj, TUKEY_P_TOL)?;
            }
            Ok(())
        }
        Case::MannWhitney { x, y, alternative, u_x, statistic, p_value, .. } => {
            let alt = match alternative.as_str() {
                "two-sided" => Alternative::TwoSided,
                "greater" => Alternative::Greater,
                "less" => Alternative::Less,
                other => return Err(format!("unknown alternative {other}")),
            };
            let gx = GroupSample::new("x", x.clone()).unwrap();
            let gy = GroupSample::new("y", y.clone()).unwrap();
            let r = mann_whitney_u(&gx, &gy, alt).map_err(|e| e.to_string())?;
            let n = (x.len() * y.len()) as f64;
            close("U", r.statistic, *statistic, 1e-9)?;
            close("min(U_x, U_y)", r.statistic, u_x.min(n - u_x), 1e-9)?;
            close("p", r.p_value, *p_value, P_TOL)
        }
        Case::Wilcoxon { x, y, statistic, p_value, .. } => {
            let gx = GroupSample::new("x", x.clone()).unwrap();
            let gy = GroupSample::new("y", y.clone()).unwrap();
            let r = wilcoxon_signed_rank(&gx, &gy).map_err(|e| e.to_string())?;
            close("W", r.statistic, *statistic, 1e-9)?;
            close("p", r.p_value, *p_value, P_TOL)
        }
    }
}

pub fn name(case: &Case) -> String {
    match case {
        Case::Anova { name, .. } => format!("anova/{name}"),
        Case::Tukey { name, .. } => format!("tukey/{name}"),
        Case::MannWhitney { name, .. } => format!("mann_whitney/{name}"),
        Case::Wilcoxon { name, .. } => format!("wilcoxon/{name}"),
    }
}
