#include "adm/pricegrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adm/errors.hpp"

namespace adm {

bool BucketDistribution::valid(double tol) const {
    if (probs.empty()) return false;
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

PriceGrid make_grid(double lower, double upper, double width) {
    if (!(width > 0.0))
        throw ConfigError("grid width must be positive, got " + std::to_string(width));
    if (!(upper > lower))
        throw ConfigError("grid upper bound must exceed lower bound");
    double count = (upper - lower) / width;
    double rounded = std::round(count);
    if (std::abs(count - rounded) >= 1e-9)
        throw ConfigError("grid range is not an integral number of buckets: (upper - lower) / width = " +
                          std::to_string(count));
    int n = static_cast<int>(rounded);
    if (n < 2) throw ConfigError("grid needs at least 2 buckets, got " + std::to_string(n));
    return PriceGrid{lower, upper, width, n};
}

double scale_price(double raw_price, double duration) {
    if (!(raw_price > 0.0) || !std::isfinite(raw_price))
        throw DataError("raw price must be positive and finite, got " + std::to_string(raw_price));
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw DataError("duration must be positive and finite, got " + std::to_string(duration));
    return std::log(raw_price / duration);
}

double unscale_price(double scaled, double duration) {
    return std::exp(scaled) * duration;
}

int bucket_of(double scaled, const PriceGrid& grid) {
    if (!std::isfinite(scaled)) throw DataError("scaled price is not finite");
    int idx = static_cast<int>(std::floor((scaled - grid.lower) / grid.width));
    return std::clamp(idx, 0, grid.n_buckets - 1);
}

double midpoint(int index, const PriceGrid& grid) {
    if (index < 0 || index >= grid.n_buckets)
        throw std::logic_error("bucket index " + std::to_string(index) + " out of range [0, " +
                               std::to_string(grid.n_buckets) + ")");
    return grid.lower + (index + 0.5) * grid.width;
}

double winning_rate(const BucketDistribution& dist, int i_b) {
    if (i_b < 0 || i_b >= dist.size())
        throw std::logic_error("winning_rate bucket index out of range");
    double sum = 0.0;
    for (int i = 0; i <= i_b; ++i) sum += dist.probs[static_cast<size_t>(i)];
    return sum;
}

std::vector<double> winning_rate_curve(const BucketDistribution& dist) {
    std::vector<double> out(dist.probs.size());
    double sum = 0.0;
    for (size_t i = 0; i < dist.probs.size(); ++i) {
        sum += dist.probs[i];
        out[i] = sum;
    }
    return out;
}

}  // namespace adm
