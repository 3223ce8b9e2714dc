#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "kmx/clustering.hpp"
#include "kmx/cost.hpp"
#include "kmx/error.hpp"
#include "kmx/seeding.hpp"

namespace kmx {

struct SplitStrategy {
    enum class Kind { ExactSmall, Discrete2Means, TwoMeansPP };
    Kind kind = Kind::Discrete2Means;
    std::size_t exact_bound = 20;   // exhaustive enumeration cap for ExactSmall
    double alpha_fraction = 0.01;   // TwoMeansPP rounds = ceil(1 + alpha_fraction * C(m,2))
    bool polish = true;             // TwoMeansPP: run 2-means to convergence on the best draw

    static SplitStrategy exact(std::size_t bound = 20) { return {Kind::ExactSmall, bound, 0.01, true}; }
    static SplitStrategy discrete() { return {Kind::Discrete2Means, 20, 0.01, true}; }
    static SplitStrategy pp(double alpha = 0.01, bool do_polish = true) {
        return {Kind::TwoMeansPP, 20, alpha, do_polish};
    }
};

/// A concrete 2-way split of a point subset: member lists, the two centers the
/// split was scored against, and the per-side costs under those centers.
struct SplitResult {
    std::vector<std::uint32_t> side_a, side_b;
    std::vector<double> center_a, center_b;
    double cost_a = 0.0, cost_b = 0.0;

    double total() const { return cost_a + cost_b; }
};

namespace detail {

inline double side_cost(const DataSet& data, std::span<const std::uint32_t> side,
                        std::span<const double> center) {
    return cluster_variance(data, side, center);
}

}  // namespace detail

/// Globally minimal 2-means split by exhaustive bipartition enumeration.
/// Refuses subsets larger than `bound`; use another strategy there.
inline SplitResult split_exact(const DataSet& data, std::span<const std::uint32_t> members,
                               std::size_t bound = 20) {
    const std::size_t m = members.size();
    if (m < 2) throw UsageError("split_exact: need at least 2 points");
    if (m > bound)
        throw BudgetError("split_exact: subset of size " + std::to_string(m) +
                          " exceeds the exact bound " + std::to_string(bound) +
                          "; use the discrete or ++ strategy");

    SplitResult best;
    double best_total = std::numeric_limits<double>::infinity();
    const std::uint64_t masks = 1ull << (m - 1);
    std::vector<std::uint32_t> a, b;
    for (std::uint64_t mask = 1; mask < masks; ++mask) {
        a.clear();
        b.clear();
        a.push_back(members[0]);  // index 0 pinned to side a kills mirror duplicates
        for (std::size_t i = 1; i < m; ++i)
            ((mask >> (i - 1)) & 1u) ? b.push_back(members[i]) : a.push_back(members[i]);
        auto ca = weighted_centroid(data, a);
        auto cb = weighted_centroid(data, b);
        const double cost = detail::side_cost(data, a, ca) + detail::side_cost(data, b, cb);
        if (cost < best_total) {
            best_total = cost;
            best.side_a = a;
            best.side_b = b;
            best.center_a = std::move(ca);
            best.center_b = std::move(cb);
        }
    }
    best.cost_a = detail::side_cost(data, best.side_a, best.center_a);
    best.cost_b = detail::side_cost(data, best.side_b, best.center_b);
    return best;
}

/// Best 2-way split with both centers constrained to subset points, scored
/// against those points (a 2-approximation of the exact 2-means). Each chosen
/// center is pinned to its own side so both sides stay nonempty.
inline SplitResult split_discrete(const DataSet& data, std::span<const std::uint32_t> members) {
    const std::size_t m = members.size();
    if (m < 2) throw UsageError("split_discrete: need at least 2 points");

    std::vector<double> dmat(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            dmat[a * m + b] = dmat[b * m + a] = squared_distance(data.point(members[a]), data.point(members[b]));

    double best_total = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0, best_b = 1;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            double cost = 0.0;
            for (std::size_t x = 0; x < m; ++x)
                cost += data.weight(members[x]) * std::min(dmat[x * m + a], dmat[x * m + b]);
            // the min above already matches the pinned assignment: D(a,a)=D(b,b)=0
            if (cost < best_total) {
                best_total = cost;
                best_a = a;
                best_b = b;
            }
        }
    }

    SplitResult r;
    auto pa = data.point(members[best_a]);
    auto pb = data.point(members[best_b]);
    r.center_a.assign(pa.begin(), pa.end());
    r.center_b.assign(pb.begin(), pb.end());
    for (std::size_t x = 0; x < m; ++x) {
        bool to_a;
        if (x == best_a) to_a = true;
        else if (x == best_b) to_a = false;
        else to_a = dmat[x * m + best_a] <= dmat[x * m + best_b];
        (to_a ? r.side_a : r.side_b).push_back(members[x]);
    }
    r.cost_a = detail::side_cost(data, r.side_a, r.center_a);
    r.cost_b = detail::side_cost(data, r.side_b, r.center_b);
    return r;
}

/// 2-means++ split: ceil(1 + alpha_fraction * C(m,2)) rounds of (weighted
/// uniform first center, D^2-sampled second), keeping the round with the
/// lowest cost against the sampled pair; optionally polished by batched
/// 2-means. Returns centroids of the final split.
inline SplitResult split_pp(const DataSet& data, std::span<const std::uint32_t> members,
                            double alpha_fraction, bool polish, Rng& rng) {
    const std::size_t m = members.size();
    if (m < 2) throw UsageError("split_pp: need at least 2 points");
    if (!(alpha_fraction > 0.0)) throw UsageError("split_pp: alpha_fraction must be positive");

    const double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
    const long rounds = static_cast<long>(std::ceil(1.0 + alpha_fraction * pairs));

    std::vector<double> probs(m);
    std::size_t best_first = 0, best_second = 1;
    double best_score = std::numeric_limits<double>::infinity();
    for (long round = 0; round < rounds; ++round) {
        for (std::size_t x = 0; x < m; ++x) probs[x] = data.weight(members[x]);
        const std::size_t first = detail::weighted_draw(probs, rng);
        auto pf = data.point(members[first]);
        for (std::size_t x = 0; x < m; ++x)
            probs[x] = data.weight(members[x]) * squared_distance(data.point(members[x]), pf);
        std::size_t second = detail::weighted_draw(probs, rng);
        if (second == m) second = (first + 1) % m;  // all-coincident subset
        auto ps = data.point(members[second]);
        double score = 0.0;
        for (std::size_t x = 0; x < m; ++x) {
            if (x == first || x == second) continue;
            auto p = data.point(members[x]);
            score += data.weight(members[x]) *
                     std::min(squared_distance(p, pf), squared_distance(p, ps));
        }
        if (score < best_score) {
            best_score = score;
            best_first = first;
            best_second = second;
        }
    }

    auto assign_sides = [&](std::span<const double> ca, std::span<const double> cb,
                            std::size_t pin_a, std::size_t pin_b, SplitResult& r) {
        r.side_a.clear();
        r.side_b.clear();
        for (std::size_t x = 0; x < m; ++x) {
            bool to_a;
            if (x == pin_a) to_a = true;
            else if (x == pin_b) to_a = false;
            else {
                auto p = data.point(members[x]);
                to_a = squared_distance(p, ca) <= squared_distance(p, cb);
            }
            (to_a ? r.side_a : r.side_b).push_back(members[x]);
        }
    };

    SplitResult r;
    assign_sides(data.point(members[best_first]), data.point(members[best_second]), best_first,
                 best_second, r);
    r.center_a = weighted_centroid(data, r.side_a);
    r.center_b = weighted_centroid(data, r.side_b);

    if (polish) {
        const std::size_t npin = m;  // no pinned points once real centroids exist
        while (true) {
            SplitResult next;
            assign_sides(r.center_a, r.center_b, npin, npin, next);
            if (next.side_a.empty() || next.side_b.empty()) break;
            if (next.side_a == r.side_a && next.side_b == r.side_b) break;
            next.center_a = weighted_centroid(data, next.side_a);
            next.center_b = weighted_centroid(data, next.side_b);
            r = std::move(next);
        }
    }
    r.cost_a = detail::side_cost(data, r.side_a, r.center_a);
    r.cost_b = detail::side_cost(data, r.side_b, r.center_b);
    return r;
}

inline SplitResult split_subset(const DataSet& data, std::span<const std::uint32_t> members,
                                const SplitStrategy& strategy, Rng& rng) {
    switch (strategy.kind) {
        case SplitStrategy::Kind::ExactSmall: return split_exact(data, members, strategy.exact_bound);
        case SplitStrategy::Kind::Discrete2Means: return split_discrete(data, members);
        case SplitStrategy::Kind::TwoMeansPP:
            return split_pp(data, members, strategy.alpha_fraction, strategy.polish, rng);
    }
    throw UsageError("split_subset: unknown strategy");
}

struct MergeSplitProposal {
    double delta = 0.0;  // old pair cost minus new pair cost; > 0 improves
    SplitResult split;
};

/// Score of re-splitting the union of two clusters with the given strategy.
/// The old side is measured against the clusters' current centers, the new
/// side against the centers the strategy produced.
inline MergeSplitProposal merge_split_gain(const DataSet& data,
                                           std::span<const std::uint32_t> members_i, double e1_i,
                                           std::span<const std::uint32_t> members_j, double e1_j,
                                           const SplitStrategy& strategy, Rng& rng) {
    if (members_i.empty() || members_j.empty())
        throw UsageError("merge_split_gain: both clusters must be nonempty");
    std::vector<std::uint32_t> merged;
    merged.reserve(members_i.size() + members_j.size());
    merged.insert(merged.end(), members_i.begin(), members_i.end());
    merged.insert(merged.end(), members_j.begin(), members_j.end());
    MergeSplitProposal p;
    p.split = split_subset(data, merged, strategy, rng);
    p.delta = (e1_i + e1_j) - p.split.total();
    return p;
}

namespace detail {

struct MscCluster {
    std::vector<std::uint32_t> members;
    std::vector<double> center;
    double e1 = 0.0;
    std::uint64_t version = 0;
};

struct PairCacheEntry {
    std::uint64_t ver_i = ~0ull, ver_j = ~0ull;
    double delta = 0.0;
};

}  // namespace detail

/// Merge-and-split local search: sweep all unordered cluster pairs, replace a
/// pair by the strategy's re-split of its union whenever that lowers the cost
/// by more than 1e-9 * (1 + cost), restarting the sweep after each accepted
/// pivot (or applying the best pivot per sweep with best_improvement). Stops
/// when a full sweep accepts nothing. Empty clusters are left untouched.
inline RunOutcome run_merge_split(const DataSet& data, const Clustering& start,
                                  const SplitStrategy& strategy, Rng& rng,
                                  bool best_improvement = false) {
    const std::size_t k = start.k();
    RunOutcome out;

    std::vector<detail::MscCluster> clusters(k);
    {
        auto members = members_by_cluster(start.assignment, k);
        for (std::size_t j = 0; j < k; ++j) {
            clusters[j].members = std::move(members[j]);
            auto c = start.centers[j];
            clusters[j].center.assign(c.begin(), c.end());
            clusters[j].e1 = detail::side_cost(data, clusters[j].members, clusters[j].center);
        }
    }
    double cost = 0.0;
    for (const auto& c : clusters) cost += c.e1;
    out.telemetry.cost_trace.push_back(cost);

    // Deterministic strategies never change their verdict on an untouched
    // pair, so those evaluations are cached by cluster version.
    const bool cacheable = strategy.kind != SplitStrategy::Kind::TwoMeansPP;
    std::vector<detail::PairCacheEntry> cache(cacheable ? k * k : 0);

    auto evaluate = [&](std::size_t i, std::size_t j) -> double {
        if (cacheable) {
            auto& e = cache[i * k + j];
            if (e.ver_i == clusters[i].version && e.ver_j == clusters[j].version) return e.delta;
        }
        const double delta = merge_split_gain(data, clusters[i].members, clusters[i].e1,
                                              clusters[j].members, clusters[j].e1, strategy, rng)
                                 .delta;
        if (cacheable) cache[i * k + j] = {clusters[i].version, clusters[j].version, delta};
        return delta;
    };

    auto apply = [&](std::size_t i, std::size_t j, const SplitResult& split) {
        const double exact_delta = (clusters[i].e1 + clusters[j].e1) - split.total();
        clusters[i].members = split.side_a;
        clusters[i].center = split.center_a;
        clusters[i].e1 = split.cost_a;
        ++clusters[i].version;
        clusters[j].members = split.side_b;
        clusters[j].center = split.center_b;
        clusters[j].e1 = split.cost_b;
        ++clusters[j].version;
        cost -= exact_delta;
        ++out.telemetry.pivots;
        out.telemetry.cost_trace.push_back(cost);
    };

    auto threshold = [&]() { return 1e-9 * (1.0 + cost); };

    bool improved = true;
    while (improved) {
        improved = false;
        ++out.telemetry.iterations;
        double best_delta = 0.0;
        std::size_t best_i = k, best_j = k;
        for (std::size_t i = 0; i < k && !improved; ++i) {
            if (clusters[i].members.empty()) continue;
            for (std::size_t j = i + 1; j < k; ++j) {
                if (clusters[j].members.empty()) continue;
                const double delta = evaluate(i, j);
                if (delta <= threshold()) continue;
                if (best_improvement) {
                    if (delta > best_delta) {
                        best_delta = delta;
                        best_i = i;
                        best_j = j;
                    }
                } else {
                    // re-run the strategy for the proposal; cheap relative to a sweep
                    auto prop = merge_split_gain(data, clusters[i].members, clusters[i].e1,
                                                 clusters[j].members, clusters[j].e1, strategy, rng);
                    if (prop.delta <= threshold()) continue;  // randomized redraw may differ
                    apply(i, j, prop.split);
                    improved = true;
                    break;
                }
            }
        }
        if (best_improvement && best_i < k) {
            auto prop = merge_split_gain(data, clusters[best_i].members, clusters[best_i].e1,
                                         clusters[best_j].members, clusters[best_j].e1, strategy, rng);
            if (prop.delta > threshold()) {
                apply(best_i, best_j, prop.split);
                improved = true;
            }
        }
    }
    out.telemetry.converged = true;

    Clustering& result = out.clustering;
    {
        std::vector<double> coords;
        coords.reserve(k * data.dim());
        for (std::size_t j = 0; j < k; ++j) {
            if (clusters[j].members.empty()) {
                auto c = start.centers[j];
                coords.insert(coords.end(), c.begin(), c.end());
            } else {
                coords.insert(coords.end(), clusters[j].center.begin(), clusters[j].center.end());
            }
        }
        result.centers = CenterSet(data.dim(), std::move(coords));
    }
    result.assignment.l = 1;
    result.assignment.members.resize(data.size());
    result.cluster_weights.assign(k, 0.0);
    result.member_counts.assign(k, 0);
    result.cost = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        for (auto i : clusters[j].members) {
            result.assignment.members[i] = static_cast<std::uint32_t>(j);
            result.cluster_weights[j] += data.weight(i);
        }
        result.member_counts[j] = clusters[j].members.size();
        result.cost += detail::side_cost(data, clusters[j].members, result.centers[j]);
    }
    return out;
}

}  // namespace kmx
