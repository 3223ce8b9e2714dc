#pragma once

#include <cstdint>
#include <vector>

#include "kmx/lloyd.hpp"

namespace kmx {

struct KlConfig {
    std::size_t l = 2;
    long max_iter = 1000;
    // Exceptions get rarer as l grows but still happen; reseeding keeps k live
    // clusters by default.
    EcePolicy ece = EcePolicy::reseed(SeedingMethod::Forgy);
};

/// Batched (k,l)-means: assign each point its l nearest centers, relocate each
/// center to the weighted centroid of all points holding it (a point
/// contributes full weight to each of its l clusters), repeat until the
/// membership matrix is unchanged.
inline RunOutcome kl_lloyd(const DataSet& data, const CenterSet& initial, const KlConfig& config,
                           Rng& rng) {
    return detail::run_batched(data, initial, config.l, config.max_iter, config.ece, rng);
}

namespace detail {

// Centroids of the given membership matrix; slots with no members keep their
// previous center.
inline CenterSet recenter(const DataSet& data, const Assignment& assign, const CenterSet& previous) {
    CenterSet centers = previous;
    auto members = members_by_cluster(assign, previous.size());
    for (std::size_t j = 0; j < previous.size(); ++j)
        if (!members[j].empty()) centers.set(j, weighted_centroid(data, members[j]));
    return centers;
}

}  // namespace detail

/// Relax a converged (k,l) clustering to an ordinary k-means: keep each
/// point's nearest member center, recompute centroids, then run batched
/// k-means to convergence.
inline RunOutcome convert_down(const DataSet& data, const Clustering& kl_result, Rng& rng,
                               const LloydConfig& config = {1000, EcePolicy::reseed(SeedingMethod::Forgy)}) {
    const std::size_t n = kl_result.assignment.points();
    Assignment kept;
    kept.l = 1;
    kept.members.resize(n);
    for (std::size_t i = 0; i < n; ++i) kept.members[i] = kl_result.assignment.row(i)[0];
    CenterSet start = detail::recenter(data, kept, kl_result.centers);
    return run_lloyd(data, start, config, rng);
}

/// Iterative relaxation: run (k,l)-means at l = l_start, then repeatedly drop
/// each point's farthest member (ties drop the larger index), recompute
/// centroids, and re-optimize one level down until l = 1. config.l is ignored;
/// telemetry aggregates all levels and the cost trace is their concatenation.
inline RunOutcome cascade_down(const DataSet& data, const CenterSet& initial, std::size_t l_start,
                               const KlConfig& config, Rng& rng) {
    if (l_start < 2 || l_start > initial.size())
        throw UsageError("cascade_down: need 2 <= l_start <= k");

    RunOutcome total;
    KlConfig level_config = config;
    level_config.l = l_start;
    RunOutcome level = kl_lloyd(data, initial, level_config, rng);
    auto absorb = [&total](const RunTelemetry& tm) {
        total.telemetry.iterations += tm.iterations;
        total.telemetry.ece_events += tm.ece_events;
        total.telemetry.spce_events += tm.spce_events;
        total.telemetry.pivots += tm.pivots;
        total.telemetry.max_concurrent_ece = std::max(total.telemetry.max_concurrent_ece, tm.max_concurrent_ece);
        total.telemetry.cost_trace.insert(total.telemetry.cost_trace.end(), tm.cost_trace.begin(),
                                          tm.cost_trace.end());
    };
    absorb(level.telemetry);

    for (std::size_t l = l_start - 1; l >= 1; --l) {
        const Assignment& prev = level.clustering.assignment;
        Assignment kept;
        kept.l = l;
        kept.members.resize(prev.points() * l);
        for (std::size_t i = 0; i < prev.points(); ++i) {
            auto src = prev.row(i);  // sorted by (distance, index): the tail is the farthest
            std::copy(src.begin(), src.begin() + l, kept.row(i).begin());
        }
        CenterSet start = detail::recenter(data, kept, level.clustering.centers);
        level_config.l = l;
        level = kl_lloyd(data, start, level_config, rng);
        absorb(level.telemetry);
        if (l == 1) break;
    }

    total.clustering = std::move(level.clustering);
    total.telemetry.converged = level.telemetry.converged;
    total.telemetry.stopped_on_ece = level.telemetry.stopped_on_ece;
    return total;
}

}  // namespace kmx
