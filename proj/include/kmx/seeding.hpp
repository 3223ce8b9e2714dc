#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "kmx/clustering.hpp"
#include "kmx/cost.hpp"
#include "kmx/dataset.hpp"
#include "kmx/error.hpp"
#include "kmx/rng.hpp"

namespace kmx {

enum class SeedingMethod { Forgy, KMeansPP, Global };

// Candidate evaluation for global seeding: Direct scores a candidate by the
// assignment cost right after insertion; Polished runs batched 2-step
// iterations to convergence before scoring (the seed kept is still the data
// point itself).
enum class GlobalEvaluator { Direct, Polished };

namespace detail {

// Draws an index with probability proportional to probs[i]. Returns n on total
// mass zero so callers can apply their degenerate-data fallback.
inline std::size_t weighted_draw(std::span<const double> probs, Rng& rng) {
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (!(total > 0.0)) return probs.size();
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        u -= probs[i];
        if (u <= 0.0 && probs[i] > 0.0) return i;
    }
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return i;
    return probs.size();
}

inline bool coincides(std::span<const double> p, std::span<const double> q) {
    for (std::size_t m = 0; m < p.size(); ++m)
        if (p[m] != q[m]) return false;
    return true;
}

inline bool coincides_with_any(const DataSet& data, std::size_t i, const CenterSet& centers,
                               std::span<const std::uint32_t> slots) {
    for (auto j : slots)
        if (coincides(data.point(i), centers[j])) return true;
    return false;
}

}  // namespace detail

/// Draw k distinct point indices uniformly at random; centers in sampled order.
inline CenterSet forgy_seed(const DataSet& data, std::size_t k, Rng& rng) {
    const std::size_t n = data.size();
    if (k < 1 || k > n) throw UsageError("forgy_seed: need 1 <= k <= n");
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return CenterSet::from_points(data, idx);
}

/// D^2 sampling: first center drawn weight-proportionally, each next one with
/// probability proportional to w_i * D(p_i, nearest chosen center). When every
/// remaining point sits exactly on a chosen center, falls back to a uniform
/// draw over the unchosen indices.
inline CenterSet kmeanspp_seed(const DataSet& data, std::size_t k, Rng& rng) {
    const std::size_t n = data.size();
    if (k < 1 || k > n) throw UsageError("kmeanspp_seed: need 1 <= k <= n");

    std::vector<std::uint32_t> chosen;
    std::vector<bool> is_chosen(n, false);
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) weights[i] = data.weight(i);
    std::size_t first = detail::weighted_draw(weights, rng);
    chosen.push_back(static_cast<std::uint32_t>(first));
    is_chosen[first] = true;

    std::vector<double> min_dist(n);
    for (std::size_t i = 0; i < n; ++i)
        min_dist[i] = squared_distance(data.point(i), data.point(first));

    std::vector<double> probs(n);
    while (chosen.size() < k) {
        for (std::size_t i = 0; i < n; ++i) probs[i] = data.weight(i) * min_dist[i];
        std::size_t next = detail::weighted_draw(probs, rng);
        if (next == n) {
            // all remaining distances are zero: duplicate-heavy data
            for (std::size_t i = 0; i < n; ++i) probs[i] = is_chosen[i] ? 0.0 : 1.0;
            next = detail::weighted_draw(probs, rng);
            if (next == n) throw DataError("kmeanspp_seed: no candidate points left");
        }
        chosen.push_back(static_cast<std::uint32_t>(next));
        is_chosen[next] = true;
        for (std::size_t i = 0; i < n; ++i)
            min_dist[i] = std::min(min_dist[i], squared_distance(data.point(i), data.point(next)));
    }
    return CenterSet::from_points(data, chosen);
}

namespace detail {

// Cost of `selected ++ [candidate]` given cached per-point distances to the
// selected centers.
inline double insertion_cost(const DataSet& data, std::span<const double> min_dist, std::size_t cand) {
    double s = 0.0;
    auto c = data.point(cand);
    for (std::size_t i = 0; i < data.size(); ++i)
        s += data.weight(i) * std::min(min_dist[i], squared_distance(data.point(i), c));
    return s;
}

// Batched assign/relocate loop used by the polished global evaluator. Keeps
// stale centers on empty clusters; no reseeding, no randomness.
inline double polished_cost(const DataSet& data, CenterSet centers, long max_iter = 100) {
    Assignment prev;
    for (long it = 0; it < max_iter; ++it) {
        Assignment assign = assign_nearest(data, centers, 1);
        if (it > 0 && assign == prev) break;
        auto members = members_by_cluster(assign, centers.size());
        for (std::size_t j = 0; j < centers.size(); ++j)
            if (!members[j].empty()) centers.set(j, weighted_centroid(data, members[j]));
        prev = std::move(assign);
    }
    return kmeans_cost(data, centers);
}

}  // namespace detail

/// Deterministic incremental seeding: the s-th seed is the data point whose
/// addition minimizes the resulting s-means cost (ties toward the smaller
/// index). The kept seed is always the data point itself, under either
/// evaluator.
inline CenterSet global_seed(const DataSet& data, std::size_t k,
                             GlobalEvaluator evaluator = GlobalEvaluator::Direct) {
    const std::size_t n = data.size();
    if (k < 1 || k > n) throw UsageError("global_seed: need 1 <= k <= n");

    std::vector<std::uint32_t> selected;
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    while (selected.size() < k) {
        std::size_t best = n;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t cand = 0; cand < n; ++cand) {
            double cost;
            if (evaluator == GlobalEvaluator::Direct || selected.empty()) {
                cost = detail::insertion_cost(data, min_dist, cand);
            } else {
                std::vector<std::uint32_t> trial(selected);
                trial.push_back(static_cast<std::uint32_t>(cand));
                cost = detail::polished_cost(data, CenterSet::from_points(data, trial));
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = cand;
            }
        }
        selected.push_back(static_cast<std::uint32_t>(best));
        auto c = data.point(best);
        for (std::size_t i = 0; i < n; ++i)
            min_dist[i] = std::min(min_dist[i], squared_distance(data.point(i), c));
    }
    return CenterSet::from_points(data, selected);
}

inline CenterSet seed_centers(const DataSet& data, std::size_t k, SeedingMethod method, Rng& rng) {
    switch (method) {
        case SeedingMethod::Forgy: return forgy_seed(data, k, rng);
        case SeedingMethod::KMeansPP: return kmeanspp_seed(data, k, rng);
        case SeedingMethod::Global: return global_seed(data, k);
    }
    throw UsageError("seed_centers: unknown method");
}

/// Replace the given empty slots with fresh seeds, leaving every other center
/// untouched. Forgy draws uniformly among points not coinciding with a kept
/// center; KMeansPP D^2-samples against the surviving centers; Global adds the
/// greedy best point one slot at a time.
inline CenterSet partial_reseed(const DataSet& data, const CenterSet& centers,
                                std::span<const std::uint32_t> empty_slots, SeedingMethod method,
                                Rng& rng) {
    const std::size_t k = centers.size();
    const std::size_t n = data.size();
    if (empty_slots.empty()) throw UsageError("partial_reseed: no empty slots given");

    std::vector<bool> is_empty(k, false);
    for (auto j : empty_slots) is_empty[j] = true;
    std::vector<std::uint32_t> live;
    for (std::uint32_t j = 0; j < k; ++j)
        if (!is_empty[j]) live.push_back(j);

    CenterSet out = centers;

    // distances to the live centers, updated as slots fill
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : live) min_dist[i] = std::min(min_dist[i], squared_distance(data.point(i), centers[j]));

    std::vector<std::uint32_t> filled = live;
    std::vector<double> probs(n);
    for (auto slot : empty_slots) {
        std::size_t pick = n;
        switch (method) {
            case SeedingMethod::Forgy: {
                for (std::size_t i = 0; i < n; ++i)
                    probs[i] = detail::coincides_with_any(data, i, out, filled) ? 0.0 : 1.0;
                pick = detail::weighted_draw(probs, rng);
                break;
            }
            case SeedingMethod::KMeansPP: {
                for (std::size_t i = 0; i < n; ++i) probs[i] = data.weight(i) * min_dist[i];
                pick = detail::weighted_draw(probs, rng);
                if (pick == n) {
                    for (std::size_t i = 0; i < n; ++i)
                        probs[i] = detail::coincides_with_any(data, i, out, filled) ? 0.0 : 1.0;
                    pick = detail::weighted_draw(probs, rng);
                }
                break;
            }
            case SeedingMethod::Global: {
                double best_cost = std::numeric_limits<double>::infinity();
                for (std::size_t cand = 0; cand < n; ++cand) {
                    const double cost = detail::insertion_cost(data, min_dist, cand);
                    if (cost < best_cost) {
                        best_cost = cost;
                        pick = cand;
                    }
                }
                break;
            }
        }
        if (pick >= n) throw DataError("partial_reseed: no candidate points available");
        out.set(slot, data.point(pick));
        filled.push_back(slot);
        for (std::size_t i = 0; i < n; ++i)
            min_dist[i] = std::min(min_dist[i], squared_distance(data.point(i), data.point(pick)));
    }
    return out;
}

}  // namespace kmx
