#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "kmx/clustering.hpp"
#include "kmx/seeding.hpp"

namespace kmx {

/// What a batched optimizer does when a relocation round leaves empty clusters.
struct EcePolicy {
    enum class Kind { StopOnEmpty, KeepStale, Reseed };
    Kind kind = Kind::Reseed;
    SeedingMethod reseed_method = SeedingMethod::Forgy;

    static EcePolicy stop_on_empty() { return {Kind::StopOnEmpty, SeedingMethod::Forgy}; }
    static EcePolicy keep_stale() { return {Kind::KeepStale, SeedingMethod::Forgy}; }
    static EcePolicy reseed(SeedingMethod m = SeedingMethod::Forgy) { return {Kind::Reseed, m}; }
};

struct LloydConfig {
    long max_iter = 1000;
    EcePolicy ece = EcePolicy::stop_on_empty();
};

struct LloydStepResult {
    Assignment assignment;
    CenterSet centers;
    std::vector<std::uint32_t> empty_slots;
};

/// One batched iteration: Voronoi assignment (min-index ties), then each
/// nonempty cluster's center moves to its weighted centroid. Empty clusters
/// are reported and keep their stale center; they are data, not failures.
inline LloydStepResult lloyd_step(const DataSet& data, const CenterSet& centers) {
    LloydStepResult r;
    r.assignment = assign_nearest(data, centers, 1);
    r.centers = centers;
    auto members = members_by_cluster(r.assignment, centers.size());
    for (std::uint32_t j = 0; j < centers.size(); ++j) {
        if (members[j].empty())
            r.empty_slots.push_back(j);
        else
            r.centers.set(j, weighted_centroid(data, members[j]));
    }
    return r;
}

namespace detail {

// Shared engine behind run_lloyd (l = 1) and kl_lloyd (l >= 1): alternate
// l-nearest assignment and centroid relocation until the membership matrix
// repeats, applying the ECE policy whenever a round leaves empty clusters.
//
// cost_trace records both half-steps of every round. On StopOnEmpty the run
// returns the last completed exception-free state (matching the convention
// that a run "stopped at" an exception reports the score it had reached).
inline RunOutcome run_batched(const DataSet& data, const CenterSet& initial, std::size_t l,
                              long max_iter, EcePolicy ece, Rng& rng) {
    const std::size_t k = initial.size();
    if (k < 1) throw UsageError("run_batched: need k >= 1");
    if (l < 1 || l > k) throw UsageError("run_batched: need 1 <= l <= k");
    if (max_iter < 1) throw UsageError("run_batched: need max_iter >= 1");

    RunOutcome out;
    RunTelemetry& tm = out.telemetry;

    CenterSet centers = initial;
    Assignment prev;
    bool have_prev = false;

    struct Snapshot {
        Assignment assignment;
        CenterSet centers;
        double cost;
    };
    std::optional<Snapshot> last_good;

    Assignment memb;
    double final_cost = 0.0;
    bool final_from_snapshot = false;

    while (true) {
        ++tm.iterations;
        memb = assign_nearest(data, centers, l);
        const double cost_assign = membership_cost(data, centers, memb);
        tm.cost_trace.push_back(cost_assign);

        if (have_prev && memb == prev) {
            tm.converged = true;
            final_cost = cost_assign;
            break;
        }

        auto members = members_by_cluster(memb, k);
        std::vector<std::uint32_t> empties;
        for (std::uint32_t j = 0; j < k; ++j) {
            if (members[j].empty())
                empties.push_back(j);
            else
                centers.set(j, weighted_centroid(data, members[j]));
        }
        const double cost_relocate = membership_cost(data, centers, memb);
        tm.cost_trace.push_back(cost_relocate);
        final_cost = cost_relocate;

        if (!empties.empty()) {
            tm.ece_events += static_cast<long>(empties.size());
            tm.max_concurrent_ece = std::max(tm.max_concurrent_ece, static_cast<long>(empties.size()));
            switch (ece.kind) {
                case EcePolicy::Kind::StopOnEmpty:
                    tm.stopped_on_ece = true;
                    if (last_good) final_from_snapshot = true;
                    break;
                case EcePolicy::Kind::KeepStale:
                    break;
                case EcePolicy::Kind::Reseed:
                    centers = partial_reseed(data, centers, empties, ece.reseed_method, rng);
                    break;
            }
            if (tm.stopped_on_ece) break;
        } else {
            last_good = Snapshot{memb, centers, cost_relocate};
        }

        prev = memb;
        have_prev = true;
        if (tm.iterations >= max_iter) break;
    }

    Clustering& c = out.clustering;
    if (final_from_snapshot) {
        c.centers = std::move(last_good->centers);
        c.assignment = std::move(last_good->assignment);
        c.cost = last_good->cost;
    } else {
        c.centers = std::move(centers);
        c.assignment = std::move(memb);
        c.cost = final_cost;
    }
    c.cluster_weights.assign(k, 0.0);
    c.member_counts.assign(k, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (auto j : c.assignment.row(i)) {
            c.cluster_weights[j] += data.weight(i);
            ++c.member_counts[j];
        }
    }
    return out;
}

}  // namespace detail

/// Batched relocation iterations from K0 until the assignment repeats or
/// max_iter is hit, handling empty-cluster exceptions per config.ece.
inline RunOutcome run_lloyd(const DataSet& data, const CenterSet& initial, const LloydConfig& config,
                            Rng& rng) {
    return detail::run_batched(data, initial, 1, config.max_iter, config.ece, rng);
}

/// Online single-point updates: present points in point_order, assign each to
/// the nearest current center and move that center to its cluster's running
/// centroid. Full passes repeat until one changes no assignment.
inline RunOutcome run_macqueen(const DataSet& data, const CenterSet& initial,
                               std::span<const std::uint32_t> point_order, long max_passes = 1000) {
    const std::size_t n = data.size();
    const std::size_t k = initial.size();
    const std::size_t d = data.dim();
    if (point_order.size() != n) throw UsageError("run_macqueen: point_order must be a permutation of all points");
    if (max_passes < 1) throw UsageError("run_macqueen: need max_passes >= 1");

    RunOutcome out;
    CenterSet centers = initial;
    constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> assign(n, kUnassigned);
    std::vector<double> sums(k * d, 0.0);
    std::vector<double> wsum(k, 0.0);
    std::vector<std::size_t> counts(k, 0);

    auto refresh_center = [&](std::uint32_t j) {
        if (counts[j] == 0) return;  // stale center serves until the cluster refills
        auto c = centers.mutable_center(j);
        for (std::size_t m = 0; m < d; ++m) c[m] = sums[j * d + m] / wsum[j];
    };

    for (long pass = 0; pass < max_passes; ++pass) {
        ++out.telemetry.iterations;
        long changed = 0;
        for (auto i : point_order) {
            const auto target = nearest_indices(data.point(i), centers, 1)[0];
            if (target == assign[i]) continue;
            const double w = data.weight(i);
            auto p = data.point(i);
            if (assign[i] != kUnassigned) {
                const auto old = assign[i];
                for (std::size_t m = 0; m < d; ++m) sums[old * d + m] -= w * p[m];
                wsum[old] -= w;
                --counts[old];
                refresh_center(old);
            }
            for (std::size_t m = 0; m < d; ++m) sums[target * d + m] += w * p[m];
            wsum[target] += w;
            ++counts[target];
            refresh_center(target);
            assign[i] = target;
            ++changed;
            ++out.telemetry.pivots;
        }
        double pass_cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            pass_cost += data.weight(i) * squared_distance(data.point(i), centers[assign[i]]);
        out.telemetry.cost_trace.push_back(pass_cost);
        if (changed == 0) {
            out.telemetry.converged = true;
            break;
        }
    }

    Clustering& c = out.clustering;
    c.centers = std::move(centers);
    c.assignment.l = 1;
    c.assignment.members = std::move(assign);
    c.cluster_weights.assign(k, 0.0);
    c.member_counts.assign(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        c.cluster_weights[c.assignment.members[i]] += data.weight(i);
        ++c.member_counts[c.assignment.members[i]];
    }
    c.cost = membership_cost(data, c.centers, c.assignment);
    return out;
}

}  // namespace kmx
