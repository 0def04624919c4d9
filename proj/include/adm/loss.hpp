#pragma once

#include <optional>
#include <vector>

#include "adm/pricegrid.hpp"

namespace adm {

/// Hyper-parameters of the neighborhood likelihood loss.
/// alpha weighs the exact-bucket term against the two neighborhood terms;
/// beta splits the remaining weight between the win-side and lose-side
/// neighborhood terms. r_win_l / r_win_r scale the win neighborhood around
/// the observed winning price; delta_lose is the lose neighborhood breadth
/// in buckets.
struct LossConfig {
    double alpha = 0.2;
    double beta = 0.8;
    double r_win_l = 1.0;
    double r_win_r = 1.0;
    int delta_lose = 40;

    void validate() const;
};

/// Inclusive bucket range [lo, hi] whose total probability a loss term
/// promotes.
struct Zone {
    int lo = 0;
    int hi = 0;
    bool contains(int i) const { return i >= lo && i <= hi; }
    int width() const { return hi - lo + 1; }
};

enum class LossKind { Nll, Legacy, WinOnly };

// Probabilities are clamped to at least this value before any log, which
// keeps every loss and gradient finite.
inline constexpr double kProbFloor = 1e-12;

/// Neighborhood of the winning-price bucket for a won auction. The breadth
/// is the bucket distance i_b - i_z scaled by the config ratios and clamped
/// into the grid; a zero distance yields the singleton {i_z}.
Zone win_zone(int i_z, int i_b, const LossConfig& cfg, int n_buckets);

/// Neighborhood above the bid bucket for a lost auction: buckets
/// [i_b + 1, i_b + delta_lose] clamped into the grid. At the top bucket the
/// zone collapses to {n_buckets - 1}.
Zone lose_zone(int i_b, const LossConfig& cfg, int n_buckets);

/// Shared zone kernel: L = -ln(max(P_zone, kProbFloor)) with
/// P_zone = sum of probs inside the zone. The gradient is with respect to
/// the softmax logits that produced `probs`:
///   dL/do_j = p_j - 1[j in zone] * p_j / P_zone.
/// `dL_dlogits` is accumulated with the given weight (caller zeroes it).
double zone_loss_grad(const BucketDistribution& probs, const Zone& zone,
                      std::vector<double>& dL_dlogits, double weight = 1.0);

/// Loss-only variant for oracles and metrics.
double zone_loss(const BucketDistribution& probs, const Zone& zone);

/// Per-sample loss terms. Won samples populate l1 (exact bucket) and l2
/// (win neighborhood); lost samples populate l3 (lose neighborhood).
/// `contribution` is the alpha/beta-weighted sum of the present terms and
/// `dL_dlogits` its gradient.
struct SampleLoss {
    std::optional<double> l1;
    std::optional<double> l2;
    std::optional<double> l3;
    double contribution = 0.0;
    std::vector<double> dL_dlogits;
};

/// Observation view used by the loss functions: bucket indices only.
/// Won observations supply both i_z and i_b; lost ones only i_b.
struct ObservedBuckets {
    bool won = false;
    int i_z = -1;
    int i_b = -1;
};

SampleLoss nll_sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs,
                           const LossConfig& cfg);

/// Censored likelihood used by prior work: won pays the exact-bucket term
/// plus the full left-tail winning-rate term over [0, i_b]; lost pays the
/// right-tail term over [i_b + 1, n - 1].
SampleLoss legacy_sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs);

/// Exact-bucket term only, computed on won samples.
SampleLoss win_only_sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs);

/// Dispatch by kind. Lost observations contribute nothing under WinOnly.
SampleLoss sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs,
                       const LossConfig& cfg, LossKind kind);

}  // namespace adm
