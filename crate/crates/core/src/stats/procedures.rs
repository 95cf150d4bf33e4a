use super::{
    f_sf, normal_cdf, normal_sf, studentized_range_cdf, Alternative, GroupSample, TestMethod,
    TestResult, TukeyPair, TukeyResult,
};
use crate::error::{Error, Result};

struct Decomposition {
    means: Vec<f64>,
    ss_between: f64,
    ss_within: f64,
    n_total: usize,
}

fn decompose(groups: &[GroupSample]) -> Result<Decomposition> {
    if groups.len() < 2 {
        return Err(Error::invalid("ANOVA needs at least two groups"));
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(Error::invalid(format!(
            "group `{}` needs at least two values",
            g.label
        )));
    }
    let means: Vec<f64> = groups.iter().map(GroupSample::mean).collect();
    let n_total: usize = groups.iter().map(GroupSample::len).sum();
    let grand =
        groups.iter().flat_map(|g| &g.values).sum::<f64>() / n_total as f64;
    let ss_between = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.values.iter().map(|x| (x - m).powi(2)).sum::<f64>())
        .sum();
    if ss_within == 0.0 {
        return Err(Error::invalid(
            "ANOVA is undefined: every group has zero within-group variance",
        ));
    }
    Ok(Decomposition {
        means,
        ss_between,
        ss_within,
        n_total,
    })
}

/// One-way ANOVA: `F = MSB / MSW` with `(k - 1, N - k)` degrees of freedom.
pub fn one_way_anova(groups: &[GroupSample]) -> Result<TestResult> {
    let d = decompose(groups)?;
    let df_between = (groups.len() - 1) as f64;
    let df_within = (d.n_total - groups.len()) as f64;
    let f = (d.ss_between / df_between) / (d.ss_within / df_within);
    let p = f_sf(df_between, df_within, f)?;
    Ok(TestResult {
        method: TestMethod::Anova,
        statistic: f,
        df: Some((df_between, df_within)),
        z: None,
        p_value: p.clamp(0.0, 1.0),
        alternative: None,
        groups: groups.iter().map(GroupSample::summary).collect(),
    })
}

/// Tukey HSD with the Tukey–Kramer standard error for unequal group sizes.
pub fn tukey_hsd(groups: &[GroupSample], alpha: f64) -> Result<TukeyResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let d = decompose(groups)?;
    let k = groups.len();
    let df_within = (d.n_total - k) as f64;
    let ms_within = d.ss_within / df_within;

    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let (na, nb) = (groups[a].len() as f64, groups[b].len() as f64);
            let mean_diff = d.means[a] - d.means[b];
            let se = (0.5 * ms_within * (1.0 / na + 1.0 / nb)).sqrt();
            let q = mean_diff.abs() / se;
            let p_adj = (1.0 - studentized_range_cdf(q, k, df_within)?).clamp(0.0, 1.0);
            pairs.push(TukeyPair {
                label_a: groups[a].label.clone(),
                label_b: groups[b].label.clone(),
                mean_diff,
                q,
                p_adj,
                significant_at_alpha: p_adj < alpha,
            });
        }
    }
    Ok(TukeyResult {
        method: "tukey_hsd".into(),
        alpha,
        df_within,
        ms_within,
        groups: groups.iter().map(GroupSample::summary).collect(),
        pairs,
    })
}

/// Midranks (1-based) of `values`, plus the tie term `Σ (t³ − t)`.
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    (ranks, tie_term)
}

/// Continuity-corrected normal approximation for a statistic with the given
/// mean and standard deviation. Returns `(z, p)`.
///
/// Two-sided: the distance from the mean shrinks by 0.5 (not below zero) and
/// `z` is reported non-positive. One-sided: `z` is shifted by 0.5 towards
/// the null.
fn normal_approx(stat: f64, mean: f64, sd: f64, alternative: Alternative) -> (f64, f64) {
    match alternative {
        Alternative::TwoSided => {
            let z = -((stat - mean).abs() - 0.5).max(0.0) / sd;
            (z, (2.0 * normal_cdf(z)).min(1.0))
        }
        Alternative::Greater => {
            let z = (stat - mean - 0.5) / sd;
            (z, normal_sf(z))
        }
        Alternative::Less => {
            let z = (stat - mean + 0.5) / sd;
            (z, normal_cdf(z))
        }
    }
}

/// Mann–Whitney U with tie-corrected normal approximation.
///
/// The reported statistic is `min(U_x, U_y)`; one-sided alternatives are
/// evaluated on `U_x`.
pub fn mann_whitney_u(
    x: &GroupSample,
    y: &GroupSample,
    alternative: Alternative,
) -> Result<TestResult> {
    let (nx, ny) = (x.len(), y.len());
    let pooled: Vec<f64> = x.values.iter().chain(&y.values).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let rank_sum_x: f64 = ranks[..nx].iter().sum();
    let (nxf, nyf) = (nx as f64, ny as f64);
    let n = nxf + nyf;
    let u_x = rank_sum_x - nxf * (nxf + 1.0) / 2.0;
    let u_y = nxf * nyf - u_x;

    let variance = nxf * nyf / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(variance > 0.0) {
        return Err(Error::invalid(
            "Mann-Whitney is undefined: all pooled values are identical",
        ));
    }
    let sd = variance.sqrt();
    let mean = nxf * nyf / 2.0;
    let (z, p) = match alternative {
        Alternative::TwoSided => normal_approx(u_x.min(u_y), mean, sd, alternative),
        _ => normal_approx(u_x, mean, sd, alternative),
    };
    Ok(TestResult {
        method: TestMethod::MannWhitney,
        statistic: u_x.min(u_y),
        df: None,
        z: Some(z),
        p_value: p.clamp(0.0, 1.0),
        alternative: Some(alternative),
        groups: vec![x.summary(), y.summary()],
    })
}

/// Wilcoxon signed-rank test on paired samples, zero differences dropped,
/// two-sided normal approximation with tie and continuity corrections.
pub fn wilcoxon_signed_rank(x: &GroupSample, y: &GroupSample) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "paired samples differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let diffs: Vec<f64> = x
        .values
        .iter()
        .zip(&y.values)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::invalid("Wilcoxon is undefined: all differences are zero"));
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, tie_term) = midranks(&magnitudes);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let m = diffs.len() as f64;
    let w_minus = m * (m + 1.0) / 2.0 - w_plus;
    let statistic = w_plus.min(w_minus);

    let mean = m * (m + 1.0) / 4.0;
    let variance = m * (m + 1.0) * (2.0 * m + 1.0) / 24.0 - tie_term / 48.0;
    if !(variance > 0.0) {
        return Err(Error::invalid("Wilcoxon is undefined: zero variance"));
    }
    let (z, p) = normal_approx(statistic, mean, variance.sqrt(), Alternative::TwoSided);
    Ok(TestResult {
        method: TestMethod::Wilcoxon,
        statistic,
        df: None,
        z: Some(z),
        p_value: p.clamp(0.0, 1.0),
        alternative: Some(Alternative::TwoSided),
        groups: vec![x.summary(), y.summary()],
    })
}
