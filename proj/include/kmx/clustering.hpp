#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kmx/cost.hpp"
#include "kmx/dataset.hpp"

namespace kmx {

/// Per-point membership lists: l distinct center indices per point, sorted by
/// (distance, index). l = 1 for plain k-means.
struct Assignment {
    std::size_t l = 1;
    std::vector<std::uint32_t> members;  // n * l, row-major

    std::size_t points() const { return l == 0 ? 0 : members.size() / l; }
    std::span<const std::uint32_t> row(std::size_t i) const { return {members.data() + i * l, l}; }
    std::span<std::uint32_t> row(std::size_t i) { return {members.data() + i * l, l}; }

    friend bool operator==(const Assignment& a, const Assignment& b) {
        return a.l == b.l && a.members == b.members;
    }
};

struct Clustering {
    CenterSet centers;
    Assignment assignment;
    double cost = 0.0;                        // objective consistent with (centers, assignment)
    std::vector<double> cluster_weights;      // n_j: total member weight per cluster
    std::vector<std::size_t> member_counts;   // membership count per cluster (singleton detection)

    std::size_t k() const { return centers.size(); }
};

struct RunTelemetry {
    long iterations = 0;
    long ece_events = 0;        // empty-cluster exceptions, one per empty slot per round
    long spce_events = 0;       // single-point-cluster exceptions encountered
    long pivots = 0;            // accepted local moves
    std::uint64_t rng_seed = 0;
    bool converged = false;
    bool stopped_on_ece = false;
    long max_concurrent_ece = 0;  // largest e observed in a single round
    // Objective value after each recorded step. Batched optimizers record both
    // half-steps (assignment, relocation); move-based optimizers record the
    // initial cost and the cost after every accepted pivot.
    std::vector<double> cost_trace;
};

struct RunOutcome {
    Clustering clustering;
    RunTelemetry telemetry;
};

/// Objective of a fixed membership matrix under the given centers.
inline double membership_cost(const DataSet& data, const CenterSet& centers, const Assignment& assign) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto p = data.point(i);
        double sum = 0.0;
        for (auto j : assign.row(i)) sum += squared_distance(p, centers[j]);
        s += data.weight(i) * sum;
    }
    return s;
}

/// Member index lists per cluster.
inline std::vector<std::vector<std::uint32_t>> members_by_cluster(const Assignment& assign, std::size_t k) {
    std::vector<std::vector<std::uint32_t>> out(k);
    for (std::size_t i = 0; i < assign.points(); ++i)
        for (auto j : assign.row(i)) out[j].push_back(static_cast<std::uint32_t>(i));
    return out;
}

inline Assignment assign_nearest(const DataSet& data, const CenterSet& centers, std::size_t l = 1) {
    Assignment assign;
    assign.l = l;
    assign.members.resize(data.size() * l);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto nearest = nearest_indices(data.point(i), centers, l);
        std::copy(nearest.begin(), nearest.end(), assign.row(i).begin());
    }
    return assign;
}

/// Materialize a Clustering from seed centers: Voronoi assignment, then each
/// nonempty cluster's center moves to its weighted centroid (empty slots keep
/// the seed center).
inline Clustering make_clustering(const DataSet& data, const CenterSet& seed, std::size_t l = 1) {
    Clustering c;
    c.centers = seed;
    c.assignment = assign_nearest(data, seed, l);
    const std::size_t k = seed.size();
    c.cluster_weights.assign(k, 0.0);
    c.member_counts.assign(k, 0);
    auto members = members_by_cluster(c.assignment, k);
    for (std::size_t j = 0; j < k; ++j) {
        for (auto i : members[j]) c.cluster_weights[j] += data.weight(i);
        c.member_counts[j] = members[j].size();
        if (!members[j].empty()) c.centers.set(j, weighted_centroid(data, members[j]));
    }
    c.cost = membership_cost(data, c.centers, c.assignment);
    return c;
}

/// Eq.-style cost identity: sum_i w_i |p_i|^2 - sum_j n_j |c_j|^2. Only valid
/// when every cluster is nonempty and sits at its weighted centroid; then it
/// equals kmeans_cost within rounding.
inline double cost_by_center_norms(const DataSet& data, const Clustering& clustering) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto p = data.point(i);
        double norm2 = 0.0;
        for (double v : p) norm2 += v * v;
        s += data.weight(i) * norm2;
    }
    for (std::size_t j = 0; j < clustering.k(); ++j) {
        auto c = clustering.centers[j];
        double norm2 = 0.0;
        for (double v : c) norm2 += v * v;
        s -= clustering.cluster_weights[j] * norm2;
    }
    return s;
}

}  // namespace kmx
