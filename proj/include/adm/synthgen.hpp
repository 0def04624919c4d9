#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "adm/features.hpp"
#include "adm/pricegrid.hpp"

namespace adm {

struct GaussianComponent {
    double mean = 0.0;
    double std = 1.0;
    double weight = 0.5;
};

/// Two-component Gaussian mixture over scaled prices; the per-context
/// ground truth the generator integrates into bucket distributions.
struct MixtureSpec {
    GaussianComponent first;
    GaussianComponent second;
};

struct SynthConfig {
    int n_contexts = 3;
    PriceGrid grid;
    std::vector<MixtureSpec> mixtures;  // per context; auto-generated from seed when empty
    double bid_noise_std = 0.2;
    int n_extra_noise_features = 4;  // alternating categorical / numeric distractors
    int noise_vocab = 10;            // values per categorical distractor
    std::uint64_t seed = 1;

    void validate() const;
};

/// A synthetic market with known per-context winning-price distributions.
/// The schema covers the context id plus the pure-noise distractor fields
/// and is fixed a priori, independent of any sampled data.
struct SynthWorld {
    SynthConfig config;
    std::shared_ptr<const FeatureSchema> schema;
    std::vector<BucketDistribution> true_dists;
};

SynthWorld build_world(const SynthConfig& config);

const BucketDistribution& true_distribution(const SynthWorld& world, int context);

/// -sum p ln p in nats, with 0 ln 0 = 0. The ANLP of a perfect model
/// approaches this in expectation.
double true_entropy(const SynthWorld& world, int context);

/// One generated auction before encoding, with enough raw detail to write
/// a TSV row.
struct SynthAuction {
    int context_id = 0;
    std::vector<std::string> cat_noise;
    std::vector<double> num_noise;
    double duration = 1.0;
    double z_scaled = 0.0;
    double bid_scaled = 0.0;
    bool won = false;
};

/// Per auction: context uniform; winning bucket from the true distribution
/// with the price uniform inside the bucket; bid = z + eps with eps a
/// Normal(0, bid_noise_std) truncated to +-3 sigma. Ties count as wins.
std::vector<SynthAuction> sample_raw_auctions(const SynthWorld& world, size_t n,
                                              std::uint64_t seed);

BidObservation to_observation(const SynthWorld& world, const SynthAuction& auction);

std::vector<BidObservation> sample_auctions(const SynthWorld& world, size_t n,
                                            std::uint64_t seed);

Dataset make_dataset(const SynthWorld& world, std::vector<BidObservation> observations);

std::vector<FieldSpec> synth_field_specs(const SynthWorld& world);

/// Writes the TSV dataset format; prices are written raw (unit price times
/// duration) so ingestion exercises the full scaling path.
void write_tsv(const SynthWorld& world, const std::vector<SynthAuction>& auctions,
               const std::string& path);

void write_oracle(const SynthWorld& world, const std::string& path);

struct OracleFile {
    PriceGrid grid;
    std::vector<int> context_ids;
    std::vector<BucketDistribution> dists;
};

OracleFile read_oracle(const std::string& path);

}  // namespace adm
