#pragma once

#include <vector>

namespace adm {

/// Discretized scaled-price axis. Buckets are half-open intervals
/// [lower + i*width, lower + (i+1)*width); the exact upper bound clamps
/// into the top bucket.
struct PriceGrid {
    double lower = 0.0;
    double upper = 0.0;
    double width = 0.0;
    int n_buckets = 0;

    double edge(int i) const { return lower + i * width; }
};

/// Probability vector over grid buckets. Entries are non-negative and sum
/// to 1 within 1e-6 for a valid distribution.
struct BucketDistribution {
    std::vector<double> probs;

    int size() const { return static_cast<int>(probs.size()); }
    double operator[](int i) const { return probs[static_cast<size_t>(i)]; }
    bool valid(double tol = 1e-6) const;
};

PriceGrid make_grid(double lower, double upper, double width);

/// ln(raw_price / duration). Both inputs must be positive.
double scale_price(double raw_price, double duration);

/// Inverse of scale_price for the unit price: exp(scaled) * duration.
double unscale_price(double scaled, double duration = 1.0);

/// Bucket index of a scaled price, clamped to [0, n_buckets-1].
int bucket_of(double scaled, const PriceGrid& grid);

/// Representative price of a bucket: lower + (index + 0.5) * width.
double midpoint(int index, const PriceGrid& grid);

/// Probability that a bid in bucket i_b wins: sum of probs[0..i_b] inclusive.
double winning_rate(const BucketDistribution& dist, int i_b);

/// Cumulative sums of the distribution, i.e. winning_rate at every bucket.
std::vector<double> winning_rate_curve(const BucketDistribution& dist);

}  // namespace adm
