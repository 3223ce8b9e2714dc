#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kmx/error.hpp"

namespace kmx {

/// Immutable weighted point cloud in d dimensions, row-major storage.
class DataSet {
public:
    DataSet(std::size_t dim, std::vector<double> coords, std::vector<double> weights = {},
            std::vector<std::string> labels = {}, std::string name = "")
        : dim_(dim),
          coords_(std::move(coords)),
          weights_(std::move(weights)),
          labels_(std::move(labels)),
          name_(std::move(name)) {
        if (dim_ < 1) throw UsageError("DataSet: dimension must be >= 1");
        if (coords_.empty() || coords_.size() % dim_ != 0)
            throw UsageError("DataSet: coordinate count not a positive multiple of dim");
        n_ = coords_.size() / dim_;
        for (double v : coords_)
            if (!std::isfinite(v)) throw DataError("DataSet: non-finite coordinate");
        if (weights_.empty()) {
            unit_weights_ = true;
            total_weight_ = static_cast<double>(n_);
        } else {
            if (weights_.size() != n_) throw UsageError("DataSet: weight count != point count");
            unit_weights_ = true;
            total_weight_ = 0.0;
            for (double w : weights_) {
                if (!(w > 0.0) || !std::isfinite(w)) throw DataError("DataSet: weights must be positive and finite");
                if (w != 1.0) unit_weights_ = false;
                total_weight_ += w;
            }
        }
        if (!labels_.empty() && labels_.size() != n_)
            throw UsageError("DataSet: label count != point count");
    }

    static DataSet from_rows(const std::vector<std::vector<double>>& rows,
                             std::vector<double> weights = {}, std::string name = "") {
        if (rows.empty()) throw UsageError("DataSet: no rows");
        std::vector<double> coords;
        coords.reserve(rows.size() * rows.front().size());
        for (const auto& r : rows) {
            if (r.size() != rows.front().size()) throw UsageError("DataSet: ragged rows");
            coords.insert(coords.end(), r.begin(), r.end());
        }
        return DataSet(rows.front().size(), std::move(coords), std::move(weights), {}, std::move(name));
    }

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    double weight(std::size_t i) const { return unit_weights_ && weights_.empty() ? 1.0 : weights_[i]; }
    bool unit_weights() const { return unit_weights_; }
    double total_weight() const { return total_weight_; }
    const std::vector<double>& coords() const { return coords_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& name() const { return name_; }

private:
    std::size_t dim_;
    std::size_t n_ = 0;
    std::vector<double> coords_;
    std::vector<double> weights_;
    std::vector<std::string> labels_;
    std::string name_;
    bool unit_weights_ = true;
    double total_weight_ = 0.0;
};

/// Ordered list of k cluster prototypes, row-major storage.
class CenterSet {
public:
    CenterSet() = default;

    CenterSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
        if (dim_ < 1) throw UsageError("CenterSet: dimension must be >= 1");
        if (coords_.empty() || coords_.size() % dim_ != 0)
            throw UsageError("CenterSet: coordinate count not a positive multiple of dim");
        for (double v : coords_)
            if (!std::isfinite(v)) throw DataError("CenterSet: non-finite coordinate");
    }

    static CenterSet from_points(const DataSet& data, std::span<const std::uint32_t> indices) {
        std::vector<double> coords;
        coords.reserve(indices.size() * data.dim());
        for (auto i : indices) {
            auto p = data.point(i);
            coords.insert(coords.end(), p.begin(), p.end());
        }
        return CenterSet(data.dim(), std::move(coords));
    }

    std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> operator[](std::size_t j) const { return {coords_.data() + j * dim_, dim_}; }
    std::span<double> mutable_center(std::size_t j) { return {coords_.data() + j * dim_, dim_}; }
    const std::vector<double>& coords() const { return coords_; }

    void set(std::size_t j, std::span<const double> c) {
        auto dst = mutable_center(j);
        for (std::size_t m = 0; m < dim_; ++m) dst[m] = c[m];
    }

    friend bool operator==(const CenterSet& a, const CenterSet& b) {
        return a.dim_ == b.dim_ && a.coords_ == b.coords_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
};

}  // namespace kmx
