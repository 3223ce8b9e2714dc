#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "kmx/clustering.hpp"
#include "kmx/cost.hpp"
#include "kmx/rng.hpp"
#include "kmx/seeding.hpp"

namespace kmx {

enum class SpceCandidate { GreedyMisfit, DSquaredSample, ScanAll };

struct HartiganConfig {
    enum class ScanOrder { Cyclic, RandomPermutationPerPass };
    ScanOrder scan_order = ScanOrder::Cyclic;
    bool spce_handling = false;
    long max_passes = 1000;
    SpceCandidate spce_candidate = SpceCandidate::GreedyMisfit;
};

/// Exact cost change of moving a point of weight w from one cluster to
/// another, both centers at their centroids and n_* denoting total cluster
/// weights. Negative means the move strictly improves. Requires the source
/// cluster to keep positive weight (singletons are SPCEs, not movable).
inline double relocation_gain(std::span<const double> p, double w, std::span<const double> from_centroid,
                              double from_weight, std::span<const double> to_centroid, double to_weight) {
    if (!(from_weight > w)) throw UsageError("relocation_gain: source cluster would be emptied");
    const double gain = to_weight <= 0.0
                            ? 0.0
                            : (to_weight / (to_weight + w)) * w * squared_distance(p, to_centroid);
    const double loss = (from_weight / (from_weight - w)) * w * squared_distance(p, from_centroid);
    return gain - loss;
}

namespace detail {

// Mutable partition state for single-point relocation: running coordinate
// sums, weights and counts per cluster, cached centroids, incremental cost.
struct RelocState {
    const DataSet* data = nullptr;
    std::size_t k = 0, d = 0;
    std::vector<std::uint32_t> assign;
    std::vector<double> sums;       // k*d
    std::vector<double> wsum;       // k
    std::vector<std::size_t> count; // k
    std::vector<double> centroid;   // k*d; stale for empty clusters
    double cost = 0.0;
    long moves_since_refresh = 0;

    static constexpr long kRefreshInterval = 1024;

    void init(const DataSet& dataset, const CenterSet& seed) {
        data = &dataset;
        k = seed.size();
        d = dataset.dim();
        assign.resize(dataset.size());
        centroid.assign(seed.coords().begin(), seed.coords().end());
        for (std::size_t i = 0; i < dataset.size(); ++i)
            assign[i] = nearest_indices(dataset.point(i), seed, 1)[0];
        rebuild();
    }

    void init_from(const DataSet& dataset, const Clustering& clustering) {
        data = &dataset;
        k = clustering.k();
        d = dataset.dim();
        assign.resize(dataset.size());
        for (std::size_t i = 0; i < dataset.size(); ++i) assign[i] = clustering.assignment.row(i)[0];
        centroid.assign(clustering.centers.coords().begin(), clustering.centers.coords().end());
        rebuild();
    }

    // Recompute sums, centroids, and cost from the assignment; empty clusters
    // keep whatever centroid they had.
    void rebuild() {
        sums.assign(k * d, 0.0);
        wsum.assign(k, 0.0);
        count.assign(k, 0);
        for (std::size_t i = 0; i < data->size(); ++i) {
            const auto j = assign[i];
            const double w = data->weight(i);
            auto p = data->point(i);
            for (std::size_t m = 0; m < d; ++m) sums[j * d + m] += w * p[m];
            wsum[j] += w;
            ++count[j];
        }
        for (std::size_t j = 0; j < k; ++j)
            if (count[j] > 0)
                for (std::size_t m = 0; m < d; ++m) centroid[j * d + m] = sums[j * d + m] / wsum[j];
        cost = 0.0;
        for (std::size_t i = 0; i < data->size(); ++i)
            cost += data->weight(i) * squared_distance(data->point(i), centroid_of(assign[i]));
        moves_since_refresh = 0;
    }

    std::span<const double> centroid_of(std::size_t j) const { return {centroid.data() + j * d, d}; }

    double candidate_gain(std::size_t i, std::uint32_t to) const {
        const auto from = assign[i];
        const double w = data->weight(i);
        auto p = data->point(i);
        const double gain = count[to] == 0 ? 0.0
                                           : (wsum[to] / (wsum[to] + w)) * w *
                                                 squared_distance(p, centroid_of(to));
        const double loss = count[from] == 1 ? 0.0
                                             : (wsum[from] / (wsum[from] - w)) * w *
                                                   squared_distance(p, centroid_of(from));
        return gain - loss;
    }

    void move(std::size_t i, std::uint32_t to) {
        const auto from = assign[i];
        cost += candidate_gain(i, to);
        const double w = data->weight(i);
        auto p = data->point(i);
        for (std::size_t m = 0; m < d; ++m) {
            sums[from * d + m] -= w * p[m];
            sums[to * d + m] += w * p[m];
        }
        wsum[from] -= w;
        wsum[to] += w;
        --count[from];
        ++count[to];
        if (count[from] > 0)
            for (std::size_t m = 0; m < d; ++m) centroid[from * d + m] = sums[from * d + m] / wsum[from];
        for (std::size_t m = 0; m < d; ++m) centroid[to * d + m] = sums[to * d + m] / wsum[to];
        assign[i] = to;
        if (++moves_since_refresh >= kRefreshInterval) rebuild();
    }

    double accept_threshold() const { return -1e-12 * (1.0 + std::abs(cost)); }

    Clustering finish() {
        rebuild();
        Clustering c;
        c.centers = CenterSet(d, centroid);
        c.assignment.l = 1;
        c.assignment.members = assign;
        c.cost = cost;
        c.cluster_weights.assign(wsum.begin(), wsum.end());
        c.member_counts.assign(count.begin(), count.end());
        return c;
    }
};

// Merge a singleton cluster {x} into the cluster of its nearest other center
// and refill the freed slot with a candidate point drawn from the data;
// applied only when the combined operation strictly lowers the cost.
inline bool attempt_spce_merge(RelocState& st, std::size_t x, SpceCandidate policy, Rng& rng) {
    const auto slot = st.assign[x];
    const DataSet& data = *st.data;
    const double wx = data.weight(x);

    std::uint32_t target = std::numeric_limits<std::uint32_t>::max();
    double target_dist = std::numeric_limits<double>::infinity();
    for (std::uint32_t m = 0; m < st.k; ++m) {
        if (m == slot || st.count[m] == 0) continue;
        const double dist = squared_distance(data.point(x), st.centroid_of(m));
        if (dist < target_dist) {
            target_dist = dist;
            target = m;
        }
    }
    if (target == std::numeric_limits<std::uint32_t>::max()) return false;

    const double merge_delta = (st.wsum[target] / (st.wsum[target] + wx)) * wx * target_dist;

    // post-merge view of the target cluster, needed when the candidate lives there
    const double wt2 = st.wsum[target] + wx;
    std::vector<double> ct2(st.d);
    for (std::size_t m = 0; m < st.d; ++m)
        ct2[m] = (st.sums[target * st.d + m] + wx * data.point(x)[m]) / wt2;

    auto removal_delta = [&](std::size_t y) {
        const auto cy = st.assign[y];
        const double wy = data.weight(y);
        if (cy == target)
            return -(wt2 / (wt2 - wy)) * wy * squared_distance(data.point(y), std::span<const double>(ct2));
        return -(st.wsum[cy] / (st.wsum[cy] - wy)) * wy *
               squared_distance(data.point(y), st.centroid_of(cy));
    };
    auto eligible = [&](std::size_t y) {
        if (y == x) return false;
        const auto cy = st.assign[y];
        const std::size_t post_count = cy == target ? st.count[cy] + 1 : st.count[cy];
        return post_count >= 2;
    };

    std::size_t pick = data.size();
    switch (policy) {
        case SpceCandidate::GreedyMisfit: {
            double best = -1.0;
            for (std::size_t y = 0; y < data.size(); ++y) {
                if (!eligible(y)) continue;
                const double misfit =
                    data.weight(y) * squared_distance(data.point(y), st.centroid_of(st.assign[y]));
                if (misfit > best) {
                    best = misfit;
                    pick = y;
                }
            }
            break;
        }
        case SpceCandidate::DSquaredSample: {
            std::vector<double> probs(data.size(), 0.0);
            for (std::size_t y = 0; y < data.size(); ++y)
                if (eligible(y))
                    probs[y] = data.weight(y) * squared_distance(data.point(y), st.centroid_of(st.assign[y]));
            std::size_t drawn = detail::weighted_draw(probs, rng);
            if (drawn < data.size()) pick = drawn;
            break;
        }
        case SpceCandidate::ScanAll: {
            double best_delta = 0.0;
            for (std::size_t y = 0; y < data.size(); ++y) {
                if (!eligible(y)) continue;
                const double delta = merge_delta + removal_delta(y);
                if (delta < best_delta) {
                    best_delta = delta;
                    pick = y;
                }
            }
            break;
        }
    }
    if (pick >= data.size()) return false;

    const double total_delta = merge_delta + removal_delta(pick);
    if (!(total_delta < st.accept_threshold())) return false;

    st.move(x, target);                         // empties the singleton slot
    st.move(pick, slot);                        // refill with the candidate
    return true;
}

}  // namespace detail

struct SpceResult {
    Clustering clustering;
    long accepted = 0;
};

/// Resolve single-point-cluster exceptions on an existing partition: each
/// singleton is merged into its closest other cluster and the freed slot is
/// re-seeded with a candidate point, applied iff the total cost strictly
/// drops. Centers are treated as cluster centroids.
inline SpceResult spce_merge_reseed(const DataSet& data, const Clustering& clustering, Rng& rng,
                                    SpceCandidate policy = SpceCandidate::GreedyMisfit) {
    detail::RelocState st;
    st.init_from(data, clustering);
    SpceResult result;
    for (std::uint32_t j = 0; j < st.k; ++j) {
        if (st.count[j] != 1) continue;
        std::size_t x = 0;
        while (st.assign[x] != j) ++x;
        if (detail::attempt_spce_merge(st, x, policy, rng)) ++result.accepted;
    }
    result.clustering = result.accepted > 0 ? st.finish() : clustering;
    return result;
}

/// Single-point relocation from the Voronoi partition of K0: scan points,
/// apply the best strictly-improving move per point, stop when a full pass
/// moves nothing. Singleton encounters count as SPCEs and are merged &
/// re-seeded when config.spce_handling is on, otherwise skipped.
inline RunOutcome run_hartigan(const DataSet& data, const CenterSet& initial,
                               const HartiganConfig& config, Rng& rng) {
    if (config.max_passes < 1) throw UsageError("run_hartigan: need max_passes >= 1");
    RunOutcome out;
    detail::RelocState st;
    st.init(data, initial);
    out.telemetry.cost_trace.push_back(st.cost);

    std::vector<std::uint32_t> order(data.size());
    std::iota(order.begin(), order.end(), 0u);

    for (long pass = 0; pass < config.max_passes; ++pass) {
        ++out.telemetry.iterations;
        if (config.scan_order == HartiganConfig::ScanOrder::RandomPermutationPerPass)
            std::shuffle(order.begin(), order.end(), rng);
        bool moved = false;
        for (auto i : order) {
            const auto from = st.assign[i];
            if (st.count[from] == 1) {
                ++out.telemetry.spce_events;
                if (config.spce_handling && detail::attempt_spce_merge(st, i, config.spce_candidate, rng)) {
                    ++out.telemetry.pivots;
                    moved = true;
                    out.telemetry.cost_trace.push_back(st.cost);
                }
                continue;
            }
            double best_gain = st.accept_threshold();
            std::uint32_t best_to = from;
            for (std::uint32_t t = 0; t < st.k; ++t) {
                if (t == from) continue;
                const double g = st.candidate_gain(i, t);
                if (g < best_gain) {
                    best_gain = g;
                    best_to = t;
                }
            }
            if (best_to != from) {
                st.move(i, best_to);
                ++out.telemetry.pivots;
                moved = true;
                out.telemetry.cost_trace.push_back(st.cost);
            }
        }
        if (!moved) {
            out.telemetry.converged = true;
            break;
        }
    }
    out.clustering = st.finish();
    return out;
}

namespace detail {

// Partition state for the medoid-constrained variant. Keeps the full pairwise
// distance matrix plus, for every point, the weighted distance sum to its own
// cluster, so medoid updates and candidate moves are linear scans.
struct MedoidState {
    const DataSet* data = nullptr;
    std::size_t n = 0, k = 0;
    std::vector<double> dmat;  // n*n squared distances
    std::vector<std::uint32_t> assign;
    std::vector<std::vector<std::uint32_t>> members;
    std::vector<double> wsum;
    std::vector<double> rowsum;          // per point: sum of w_y * D(y, p) over its own cluster
    std::vector<std::uint32_t> medoid;   // index into data, n for empty clusters
    std::vector<double> e1;              // cluster cost at its medoid
    double cost = 0.0;
    long moves_since_refresh = 0;

    double dist(std::size_t a, std::size_t b) const { return dmat[a * n + b]; }

    void init(const DataSet& dataset, const CenterSet& seed) {
        data = &dataset;
        n = dataset.size();
        k = seed.size();
        dmat.resize(n * n);
        for (std::size_t a = 0; a < n; ++a) {
            dmat[a * n + a] = 0.0;
            for (std::size_t b = a + 1; b < n; ++b)
                dmat[a * n + b] = dmat[b * n + a] = squared_distance(dataset.point(a), dataset.point(b));
        }
        assign.resize(n);
        for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_indices(dataset.point(i), seed, 1)[0];
        rebuild();
    }

    void rebuild() {
        members.assign(k, {});
        wsum.assign(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            members[assign[i]].push_back(static_cast<std::uint32_t>(i));
            wsum[assign[i]] += data->weight(i);
        }
        rowsum.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (auto y : members[assign[i]]) rowsum[i] += data->weight(y) * dist(y, i);
        medoid.assign(k, static_cast<std::uint32_t>(n));
        e1.assign(k, 0.0);
        cost = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            refresh_medoid(j);
            cost += e1[j];
        }
        moves_since_refresh = 0;
    }

    void refresh_medoid(std::size_t j) {
        medoid[j] = static_cast<std::uint32_t>(n);
        e1[j] = 0.0;
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_idx = static_cast<std::uint32_t>(n);
        for (auto m : members[j])
            if (rowsum[m] < best || (rowsum[m] == best && m < best_idx)) {
                best = rowsum[m];
                best_idx = m;
            }
        if (best_idx < n) {
            medoid[j] = best_idx;
            e1[j] = best;
        }
    }

    // Cost change of moving x to cluster `to`, with both affected medoids
    // recomputed; does not mutate.
    double candidate_gain(std::size_t x, std::uint32_t to) const {
        const auto from = assign[x];
        const double wx = data->weight(x);
        double from_after = 0.0;
        {
            double best = std::numeric_limits<double>::infinity();
            bool any = false;
            for (auto m : members[from]) {
                if (m == x) continue;
                any = true;
                best = std::min(best, rowsum[m] - wx * dist(m, x));
            }
            from_after = any ? best : 0.0;
        }
        double to_after = 0.0;
        for (auto y : members[to]) to_after += data->weight(y) * dist(y, x);  // x as the new medoid
        for (auto m : members[to]) to_after = std::min(to_after, rowsum[m] + wx * dist(m, x));
        return (from_after + to_after) - (e1[from] + e1[to]);
    }

    void move(std::size_t x, std::uint32_t to) {
        const auto from = assign[x];
        const double wx = data->weight(x);
        cost -= e1[from] + e1[to];
        auto& mf = members[from];
        mf.erase(std::find(mf.begin(), mf.end(), static_cast<std::uint32_t>(x)));
        for (auto m : mf) rowsum[m] -= wx * dist(m, x);
        rowsum[x] = 0.0;
        for (auto m : members[to]) {
            rowsum[m] += wx * dist(m, x);
            rowsum[x] += data->weight(m) * dist(m, x);
        }
        members[to].push_back(static_cast<std::uint32_t>(x));
        wsum[from] -= wx;
        wsum[to] += wx;
        assign[x] = to;
        refresh_medoid(from);
        refresh_medoid(to);
        cost += e1[from] + e1[to];
        if (++moves_since_refresh >= RelocState::kRefreshInterval) rebuild();
    }

    double accept_threshold() const { return -1e-12 * (1.0 + std::abs(cost)); }

    Clustering finish(const CenterSet& seed) {
        rebuild();
        Clustering c;
        std::vector<double> coords;
        coords.reserve(k * data->dim());
        for (std::size_t j = 0; j < k; ++j) {
            auto p = medoid[j] < n ? data->point(medoid[j]) : seed[j];
            coords.insert(coords.end(), p.begin(), p.end());
        }
        c.centers = CenterSet(data->dim(), std::move(coords));
        c.assignment.l = 1;
        c.assignment.members = assign;
        c.cost = cost;
        c.cluster_weights.assign(wsum.begin(), wsum.end());
        c.member_counts.assign(k, 0);
        for (std::size_t j = 0; j < k; ++j) c.member_counts[j] = members[j].size();
        return c;
    }
};

}  // namespace detail

/// Medoid of a subset: the member minimizing the weighted sum of squared
/// distances to the subset, ties toward the smaller index.
inline std::uint32_t medoid_index(const DataSet& data, std::span<const std::uint32_t> members) {
    if (members.empty()) throw UsageError("medoid_index: empty subset");
    std::uint32_t best = members[0];
    double best_sum = std::numeric_limits<double>::infinity();
    for (auto m : members) {
        double s = 0.0;
        for (auto y : members) s += data.weight(y) * squared_distance(data.point(y), data.point(m));
        if (s < best_sum || (s == best_sum && m < best)) {
            best_sum = s;
            best = m;
        }
    }
    return best;
}

/// Discrete Hartigan: single-point relocation with centers constrained to
/// cluster medoids, a move being accepted iff the cost under the two
/// recomputed medoids strictly drops. Needs O(n^2) memory for the distance
/// matrix.
inline RunOutcome run_discrete_hartigan(const DataSet& data, const CenterSet& initial,
                                        const HartiganConfig& config, Rng& rng) {
    if (config.max_passes < 1) throw UsageError("run_discrete_hartigan: need max_passes >= 1");
    RunOutcome out;
    detail::MedoidState st;
    st.init(data, initial);
    out.telemetry.cost_trace.push_back(st.cost);

    std::vector<std::uint32_t> order(data.size());
    std::iota(order.begin(), order.end(), 0u);

    for (long pass = 0; pass < config.max_passes; ++pass) {
        ++out.telemetry.iterations;
        if (config.scan_order == HartiganConfig::ScanOrder::RandomPermutationPerPass)
            std::shuffle(order.begin(), order.end(), rng);
        bool moved = false;
        for (auto i : order) {
            const auto from = st.assign[i];
            if (st.members[from].size() == 1) {
                ++out.telemetry.spce_events;
                continue;  // merge & re-seed is a centroid-world operation
            }
            double best_gain = st.accept_threshold();
            std::uint32_t best_to = from;
            for (std::uint32_t t = 0; t < st.k; ++t) {
                if (t == from) continue;
                const double g = st.candidate_gain(i, t);
                if (g < best_gain) {
                    best_gain = g;
                    best_to = t;
                }
            }
            if (best_to != from) {
                st.move(i, best_to);
                ++out.telemetry.pivots;
                moved = true;
                out.telemetry.cost_trace.push_back(st.cost);
            }
        }
        if (!moved) {
            out.telemetry.converged = true;
            break;
        }
    }
    out.clustering = st.finish(initial);
    return out;
}

}  // namespace kmx
