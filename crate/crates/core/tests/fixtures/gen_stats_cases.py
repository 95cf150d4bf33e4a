"""Generates stats_cases.json, the frozen regression corpus for the stats module.

Expected values come from scipy (an implementation independent of this crate).
Run once; the output file is committed.

    python3 gen_stats_cases.py > stats_cases.json
"""
import json

import numpy as np
from scipy import stats

rng = np.random.default_rng(20240611)


def rounded(a, digits=2):
    return [round(float(v), digits) for v in a]


def anova_case(name, groups):
    res = stats.f_oneway(*groups)
    k = len(groups)
    n = sum(len(g) for g in groups)
    return {
        "kind": "anova",
        "name": name,
        "groups": groups,
        "statistic": float(res.statistic),
        "df": [k - 1, n - k],
        "p_value": float(res.pvalue),
    }


def tukey_case(name, groups):
    res = stats.tukey_hsd(*groups)
    k = len(groups)
    n = sum(len(g) for g in groups)
    means = [float(np.mean(g)) for g in groups]
    ssw = sum(float(np.sum((np.asarray(g) - np.mean(g)) ** 2)) for g in groups)
    msw = ssw / (n - k)
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            se = np.sqrt(msw / 2.0 * (1.0 / len(groups[i]) + 1.0 / len(groups[j])))
            pairs.append({
                "a": i,
                "b": j,
                "mean_diff": means[i] - means[j],
                "q": abs(means[i] - means[j]) / se,
                "p_adj": float(res.pvalue[i, j]),
            })
    return {"kind": "tukey", "name": name, "groups": groups, "pairs": pairs}


def mwu_case(name, x, y, alternative="two-sided"):
    res = stats.mannwhitneyu(x, y, alternative=alternative, method="asymptotic", use_continuity=True)
    u_x = float(res.statistic)
    u_y = len(x) * len(y) - u_x
    return {
        "kind": "mann_whitney",
        "name": name,
        "x": x,
        "y": y,
        "alternative": alternative,
        "u_x": u_x,
        "statistic": min(u_x, u_y),
        "p_value": float(res.pvalue),
    }


def wilcoxon_case(name, x, y):
    res = stats.wilcoxon(x, y, zero_method="wilcox", correction=True, method="approx")
    return {
        "kind": "wilcoxon",
        "name": name,
        "x": x,
        "y": y,
        "statistic": float(res.statistic),
        "p_value": float(res.pvalue),
    }


cases = []

cases.append(anova_case("closed_form", [[1, 2, 3], [2, 3, 4], [3, 4, 5]]))
cases.append(anova_case("unequal_sizes", [[2.1, 3.4, 1.9, 2.8], [3.3, 4.1, 3.9], [1.2, 2.2, 1.7, 2.5, 1.1]]))
cases.append(anova_case("two_groups", [rounded(rng.normal(0, 1, 12)), rounded(rng.normal(0.5, 1, 15))]))
cases.append(anova_case("null_like", [rounded(rng.normal(0, 1, 30)) for _ in range(4)]))
cases.append(anova_case("strong_effect", [rounded(rng.normal(m, 0.2, 40), 3) for m in (0.1, 0.15, 0.3)]))

cases.append(tukey_case("closed_form", [[1, 2, 3], [2, 3, 4], [3, 4, 5]]))
cases.append(tukey_case("unequal_sizes", [[2.1, 3.4, 1.9, 2.8], [3.3, 4.1, 3.9], [1.2, 2.2, 1.7, 2.5, 1.1]]))
cases.append(tukey_case("four_groups", [rounded(rng.normal(m, 1, 20)) for m in (0, 0.2, 0.8, 1.0)]))
cases.append(tukey_case("similarity_like", [rounded(rng.beta(2, 12, n), 4) for n in (60, 60, 90)]))
cases.append(tukey_case("two_groups", [rounded(rng.normal(0, 1, 25)), rounded(rng.normal(0.6, 1.3, 18))]))

cases.append(mwu_case("separated", [1, 2, 3], [4, 5, 6]))
cases.append(mwu_case("ties", [1, 2, 2, 3, 3, 3, 5], [2, 3, 4, 4, 5, 6]))
cases.append(mwu_case("random", rounded(rng.normal(0, 1, 40), 1), rounded(rng.normal(0.3, 1, 35), 1)))
cases.append(mwu_case("greater", rounded(rng.normal(1, 1, 20), 1), rounded(rng.normal(0, 1, 25), 1), "greater"))
cases.append(mwu_case("less", rounded(rng.normal(0, 1, 22), 1), rounded(rng.normal(0.4, 1, 19), 1), "less"))

cases.append(wilcoxon_case("alternating", [1, -2, 3, -4, 5, -6, 7], [0] * 7))
cases.append(wilcoxon_case("with_zeros", [1, 2, 3, 4, 5, 6, 7, 8], [1, 1, 4, 2, 5, 3, 9, 8]))
x = rounded(rng.normal(0, 1, 30), 1)
cases.append(wilcoxon_case("ties", x, rounded(np.asarray(x) + rng.normal(0.2, 0.5, 30), 1)))
x = rounded(rng.uniform(0, 1, 50), 3)
cases.append(wilcoxon_case("paired_shift", x, rounded(np.asarray(x) * 0.9 + rng.normal(0, 0.05, 50), 3)))
x = rounded(rng.normal(0, 1, 26), 2)
cases.append(wilcoxon_case("null_like", x, rounded(rng.normal(0, 1, 26), 2)))

assert len(cases) == 20
print(json.dumps({"generator": "scipy " + __import__("scipy").__version__, "cases": cases}, indent=1))
