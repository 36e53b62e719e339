#include "discrimq/pairselect/pair_selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "discrimq/errors.hpp"

namespace discrimq::pairselect {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) {
    return x > 0.0 ? std::log(x) : kNegInf;
}

double safe_log1m(double x) {
    return x < 1.0 ? std::log1p(-x) : kNegInf;
}

void check_inputs(std::span<double const> va, std::span<double const> vb, SimilarityMatrix const& q_sim,
                  SimilarityMatrix const& v_sim) {
    std::size_t const k = va.size();
    if (vb.size() != k || q_sim.size() != k || v_sim.size() != k) {
        throw ShapeError("attribute scores and similarity matrices disagree on K (" + std::to_string(va.size()) + ", " +
                         std::to_string(vb.size()) + ", " + std::to_string(q_sim.size()) + ", " +
                         std::to_string(v_sim.size()) + ")");
    }
}

// Unilateral terms: a_i = log vA_i(1 - vB_i), b_j = log vB_j(1 - vA_j).
struct Unilateral {
    std::vector<double> a;
    std::vector<double> b;
};

Unilateral unilateral_terms(std::span<double const> va, std::span<double const> vb) {
    Unilateral u;
    u.a.resize(va.size());
    u.b.resize(va.size());
    for (std::size_t k = 0; k < va.size(); ++k) {
        u.a[k] = safe_log(va[k]) + safe_log1m(vb[k]);
        u.b[k] = safe_log(vb[k]) + safe_log1m(va[k]);
    }
    return u;
}

struct Candidate {
    double log_score;
    std::uint32_t i;
    std::uint32_t j;
};

bool candidate_before(Candidate const& x, Candidate const& y) {
    if (x.log_score != y.log_score) {
        return x.log_score > y.log_score;
    }
    if (x.i != y.i) {
        return x.i < y.i;
    }
    return x.j < y.j;
}

double pair_log_score(Unilateral const& u, std::size_t i, std::size_t j, SimilarityMatrix const& q_sim,
                      SimilarityMatrix const& v_sim, SelectorConfig const& config) {
    return (u.a[i] + u.b[j]) + (config.alpha * q_sim(i, j) - config.beta * v_sim(i, j));
}

// Keeps the best `keep` candidates, sorted.
void select_top(std::vector<Candidate>& c, std::size_t keep) {
    keep = std::min(keep, c.size());
    std::partial_sort(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(keep), c.end(), candidate_before);
    c.resize(keep);
}

std::vector<std::size_t> order_desc(std::vector<double> const& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] > v[y]; });
    return idx;
}

}  // namespace

std::string mode_name(RankMode mode) {
    return mode == RankMode::exact ? "exact" : "pruned";
}

RankMode parse_mode(std::string const& name) {
    if (name == "exact") {
        return RankMode::exact;
    }
    if (name == "pruned") {
        return RankMode::pruned;
    }
    throw ConfigError("unknown ranking mode '" + name + "' (expected exact or pruned)");
}

void SelectorConfig::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
        throw ConfigError("selector weights alpha and beta must be non-negative");
    }
    if (top_k == 0) {
        throw ConfigError("selector top_k must be at least 1");
    }
}

bool ranks_before(PairScore const& x, PairScore const& y) {
    if (x.log_score != y.log_score) {
        return x.log_score > y.log_score;
    }
    if (x.i != y.i) {
        return x.i < y.i;
    }
    return x.j < y.j;
}

PairScore score_pair(std::span<double const> va, std::span<double const> vb, std::size_t i, std::size_t j,
                     SimilarityMatrix const& q_sim, SimilarityMatrix const& v_sim, SelectorConfig const& config) {
    check_inputs(va, vb, q_sim, v_sim);
    if (i >= va.size() || j >= va.size()) {
        throw IndexError("attribute pair (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for K=" +
                         std::to_string(va.size()));
    }
    PairScore p;
    p.i = i;
    p.j = j;
    p.contrast = va[i] * (1.0 - vb[i]) * vb[j] * (1.0 - va[j]);
    p.q_sim = q_sim(i, j);
    p.v_sim = v_sim(i, j);
    double const a = safe_log(va[i]) + safe_log1m(vb[i]);
    double const b = safe_log(vb[j]) + safe_log1m(va[j]);
    p.log_score = (a + b) + (config.alpha * p.q_sim - config.beta * p.v_sim);
    p.score = std::exp(p.log_score);
    return p;
}

Ranking rank_pairs_topk(std::span<double const> va, std::span<double const> vb, SimilarityMatrix const& q_sim,
                        SimilarityMatrix const& v_sim, SelectorConfig const& config) {
    config.validate();
    check_inputs(va, vb, q_sim, v_sim);
    std::size_t const k = va.size();
    Ranking out;
    std::size_t top_k = config.top_k;
    if (top_k > k * k) {
        out.clamped = true;
        out.warnings.push_back("top_k " + std::to_string(top_k) + " exceeds K*K = " + std::to_string(k * k) +
                               "; clamped");
        top_k = k * k;
    }
    if (k == 0) {
        return out;
    }

    auto const u = unilateral_terms(va, vb);
    std::vector<Candidate> cands;

    if (config.mode == RankMode::exact) {
        cands.reserve(k * k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                cands.push_back({pair_log_score(u, i, j, q_sim, v_sim, config), static_cast<std::uint32_t>(i),
                                 static_cast<std::uint32_t>(j)});
            }
        }
        out.evaluated = cands.size();
        select_top(cands, top_k);
    } else {
        auto const ia = order_desc(u.a);
        auto const jb = order_desc(u.b);
        double max_q = -std::numeric_limits<double>::infinity();
        for (double x : q_sim.values()) {
            max_q = std::max(max_q, x);
        }
        double const min_v = v_sim.min();
        double const sim_bound = config.alpha * max_q - config.beta * min_v;

        auto score_at = [&](std::size_t r, std::size_t s) {
            std::size_t const i = ia[r];
            std::size_t const j = jb[s];
            cands.push_back({pair_log_score(u, i, j, q_sim, v_sim, config), static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(j)});
            ++out.evaluated;
        };
        std::size_t done = 0;
        std::size_t m = std::min(k, std::max<std::size_t>(top_k, 16));
        for (;;) {
            // Only the band outside the previous done x done grid is new; the
            // previous top_k already covers the inside.
            for (std::size_t r = 0; r < m; ++r) {
                for (std::size_t s = r < done ? done : 0; s < m; ++s) {
                    score_at(r, s);
                }
            }
            select_top(cands, top_k);
            done = m;
            if (m == k) {
                break;
            }
            // Any pair outside the grid has i beyond the first m of ia or j
            // beyond the first m of jb.
            double const outer = std::max(u.a[ia[m]] + u.b[jb[0]], u.a[ia[0]] + u.b[jb[m]]) + sim_bound;
            double const slack = 1e-9 * (1.0 + std::abs(outer));
            if (cands.size() == top_k && std::isfinite(cands.back().log_score) &&
                cands.back().log_score > outer + slack) {
                break;
            }
            if (outer == -std::numeric_limits<double>::infinity() && cands.size() == top_k &&
                cands.back().log_score > outer) {
                break;
            }
            m = std::min(k, 2 * m);
        }
    }

    out.pairs.reserve(cands.size());
    for (auto const& c : cands) {
        PairScore p;
        p.i = c.i;
        p.j = c.j;
        p.contrast = va[c.i] * (1.0 - vb[c.i]) * vb[c.j] * (1.0 - va[c.j]);
        p.q_sim = q_sim(c.i, c.j);
        p.v_sim = v_sim(c.i, c.j);
        p.log_score = c.log_score;
        p.score = std::exp(c.log_score);
        out.pairs.push_back(p);
    }
    return out;
}

}  // namespace discrimq::pairselect
