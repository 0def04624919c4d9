#include "adm/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adm/errors.hpp"

namespace adm {

void LossConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
    if (beta < 0.0 || beta > 1.0) throw ConfigError("beta must be in [0, 1]");
    if (r_win_l < 0.0) throw ConfigError("r_win_l must be >= 0");
    if (r_win_r < 0.0) throw ConfigError("r_win_r must be >= 0");
    if (delta_lose < 1) throw ConfigError("delta_lose must be >= 1");
}

Zone win_zone(int i_z, int i_b, const LossConfig& cfg, int n_buckets) {
    if (i_z < 0 || i_b >= n_buckets)
        throw std::logic_error("win_zone bucket indices out of range");
    if (i_z > i_b)
        throw DataError("won observation has winning bucket above bid bucket");
    int delta = i_b - i_z;
    int lo = i_z - static_cast<int>(std::lround(cfg.r_win_l * delta));
    int hi = i_z + static_cast<int>(std::lround(cfg.r_win_r * delta));
    return Zone{std::max(0, lo), std::min(n_buckets - 1, hi)};
}

Zone lose_zone(int i_b, const LossConfig& cfg, int n_buckets) {
    if (i_b < 0 || i_b >= n_buckets)
        throw std::logic_error("lose_zone bid bucket out of range");
    int lo = std::min(i_b + 1, n_buckets - 1);
    int hi = std::min(i_b + cfg.delta_lose, n_buckets - 1);
    return Zone{lo, hi};
}

namespace {

double zone_mass(const BucketDistribution& probs, const Zone& zone) {
    double mass = 0.0;
    for (int i = zone.lo; i <= zone.hi; ++i) mass += probs[i];
    return mass;
}

}  // namespace

double zone_loss(const BucketDistribution& probs, const Zone& zone) {
    if (zone.lo < 0 || zone.hi >= probs.size() || zone.lo > zone.hi)
        throw std::logic_error("zone out of range for distribution");
    return -std::log(std::max(zone_mass(probs, zone), kProbFloor));
}

double zone_loss_grad(const BucketDistribution& probs, const Zone& zone,
                      std::vector<double>& dL_dlogits, double weight) {
    if (zone.lo < 0 || zone.hi >= probs.size() || zone.lo > zone.hi)
        throw std::logic_error("zone out of range for distribution");
    if (dL_dlogits.size() != probs.probs.size())
        throw std::logic_error("gradient buffer size mismatch");
    double mass = std::max(zone_mass(probs, zone), kProbFloor);
    const int n = probs.size();
    for (int j = 0; j < n; ++j) {
        double g = probs[j];
        if (zone.contains(j)) g -= probs[j] / mass;
        dL_dlogits[static_cast<size_t>(j)] += weight * g;
    }
    return -std::log(mass);
}

SampleLoss nll_sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs,
                           const LossConfig& cfg) {
    SampleLoss out;
    out.dL_dlogits.assign(probs.probs.size(), 0.0);
    const int n = probs.size();
    if (obs.won) {
        double w1 = cfg.alpha;
        double w2 = (1.0 - cfg.alpha) * cfg.beta;
        out.l1 = zone_loss_grad(probs, Zone{obs.i_z, obs.i_z}, out.dL_dlogits, w1);
        out.l2 = zone_loss_grad(probs, win_zone(obs.i_z, obs.i_b, cfg, n), out.dL_dlogits, w2);
        out.contribution = w1 * *out.l1 + w2 * *out.l2;
    } else {
        double w3 = (1.0 - cfg.alpha) * (1.0 - cfg.beta);
        out.l3 = zone_loss_grad(probs, lose_zone(obs.i_b, cfg, n), out.dL_dlogits, w3);
        out.contribution = w3 * *out.l3;
    }
    return out;
}

SampleLoss legacy_sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs) {
    SampleLoss out;
    out.dL_dlogits.assign(probs.probs.size(), 0.0);
    const int n = probs.size();
    if (obs.won) {
        out.l1 = zone_loss_grad(probs, Zone{obs.i_z, obs.i_z}, out.dL_dlogits, 1.0);
        out.l2 = zone_loss_grad(probs, Zone{0, obs.i_b}, out.dL_dlogits, 1.0);
        out.contribution = *out.l1 + *out.l2;
    } else {
        out.l3 = zone_loss_grad(probs, Zone{std::min(obs.i_b + 1, n - 1), n - 1},
                                out.dL_dlogits, 1.0);
        out.contribution = *out.l3;
    }
    return out;
}

SampleLoss win_only_sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs) {
    SampleLoss out;
    out.dL_dlogits.assign(probs.probs.size(), 0.0);
    if (obs.won) {
        out.l1 = zone_loss_grad(probs, Zone{obs.i_z, obs.i_z}, out.dL_dlogits, 1.0);
        out.contribution = *out.l1;
    }
    return out;
}

SampleLoss sample_loss(const BucketDistribution& probs, const ObservedBuckets& obs,
                       const LossConfig& cfg, LossKind kind) {
    switch (kind) {
        case LossKind::Nll: return nll_sample_loss(probs, obs, cfg);
        case LossKind::Legacy: return legacy_sample_loss(probs, obs);
        case LossKind::WinOnly: return win_only_sample_loss(probs, obs);
    }
    throw std::logic_error("unknown loss kind");
}

}  // namespace adm
