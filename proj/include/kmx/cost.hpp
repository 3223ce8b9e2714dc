#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "kmx/dataset.hpp"
#include "kmx/error.hpp"

namespace kmx {

inline double squared_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw UsageError("squared_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        const double diff = p[m] - q[m];
        s += diff * diff;
    }
    return s;
}

/// Indices of the l centers nearest to p, sorted by (distance, index).
/// Ties break toward the smaller index.
inline std::vector<std::uint32_t> nearest_indices(std::span<const double> p, const CenterSet& centers,
                                                  std::size_t l = 1) {
    const std::size_t k = centers.size();
    if (l < 1 || l > k) throw UsageError("nearest_indices: need 1 <= l <= k");
    if (l == 1) {
        std::uint32_t best = 0;
        double best_d = squared_distance(p, centers[0]);
        for (std::uint32_t j = 1; j < k; ++j) {
            const double d = squared_distance(p, centers[j]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        return {best};
    }
    std::vector<std::pair<double, std::uint32_t>> ranked(k);
    for (std::uint32_t j = 0; j < k; ++j) ranked[j] = {squared_distance(p, centers[j]), j};
    std::partial_sort(ranked.begin(), ranked.begin() + l, ranked.end());
    std::vector<std::uint32_t> out(l);
    for (std::size_t a = 0; a < l; ++a) out[a] = ranked[a].second;
    return out;
}

/// Weighted mean of the given subset. Throws EmptyClusterError on an empty
/// subset; callers decide how to react (reseed, keep a stale center, ...).
inline std::vector<double> weighted_centroid(const DataSet& data, std::span<const std::uint32_t> members) {
    if (members.empty()) throw EmptyClusterError("weighted_centroid: empty subset");
    std::vector<double> c(data.dim(), 0.0);
    double total = 0.0;
    for (auto i : members) {
        const double w = data.weight(i);
        auto p = data.point(i);
        for (std::size_t m = 0; m < c.size(); ++m) c[m] += w * p[m];
        total += w;
    }
    for (double& v : c) v /= total;
    return c;
}

/// Sum of weighted squared distances of the subset to c. Equals the cluster
/// variance when c is the subset's centroid.
inline double cluster_variance(const DataSet& data, std::span<const std::uint32_t> members,
                               std::span<const double> c) {
    double s = 0.0;
    for (auto i : members) s += data.weight(i) * squared_distance(data.point(i), c);
    return s;
}

inline double kmeans_cost(const DataSet& data, const CenterSet& centers) {
    if (centers.size() < 1) throw UsageError("kmeans_cost: need k >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto p = data.point(i);
        double best = squared_distance(p, centers[0]);
        for (std::size_t j = 1; j < centers.size(); ++j)
            best = std::min(best, squared_distance(p, centers[j]));
        s += data.weight(i) * best;
    }
    return s;
}

/// (k,l)-means objective: each point pays all of its l nearest centers.
/// Reduces to kmeans_cost at l = 1.
inline double kl_cost(const DataSet& data, const CenterSet& centers, std::size_t l) {
    const std::size_t k = centers.size();
    if (l < 1 || l > k) throw UsageError("kl_cost: need 1 <= l <= k");
    double s = 0.0;
    std::vector<double> dists(k);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto p = data.point(i);
        for (std::size_t j = 0; j < k; ++j) dists[j] = squared_distance(p, centers[j]);
        std::nth_element(dists.begin(), dists.begin() + (l - 1), dists.end());
        double sum_l = std::accumulate(dists.begin(), dists.begin() + l, 0.0);
        s += data.weight(i) * sum_l;
    }
    return s;
}

/// Ordered-pair sum of squared distances within one cluster (unit weights).
/// Satisfies pairwise_intra_cost(C) = 2 * |C| * v(C).
inline double pairwise_intra_cost(const DataSet& data, std::span<const std::uint32_t> members) {
    if (members.empty()) throw UsageError("pairwise_intra_cost: empty subset");
    double s = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            s += 2.0 * squared_distance(data.point(members[a]), data.point(members[b]));
    return s;
}

}  // namespace kmx
