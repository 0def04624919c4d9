#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adm/pricegrid.hpp"

namespace adm {

enum class FieldKind { Categorical, Numeric };
enum class FieldGroup { Publisher, User, Ad, Context };

std::string to_string(FieldKind kind);
std::string to_string(FieldGroup group);
FieldKind field_kind_from_string(const std::string& s);
FieldGroup field_group_from_string(const std::string& s);

/// Declares one dataset column: its name, whether it is categorical or
/// numeric, and which feature group it belongs to.
struct FieldSpec {
    std::string name;
    FieldKind kind = FieldKind::Categorical;
    FieldGroup group = FieldGroup::Context;
};

std::vector<FieldSpec> load_field_specs(const std::string& path);
void save_field_specs(const std::vector<FieldSpec>& specs, const std::string& path);

/// min(ceil(sqrt(cardinality)), 64); cardinality includes any reserved slots
/// the caller counts in.
int embedding_dim(int cardinality);

struct CatField {
    std::string name;
    FieldGroup group = FieldGroup::Context;
    std::vector<std::string> vocab;  // observed values, index = position
    std::unordered_map<std::string, int> index;
    int emb_dim = 1;

    int missing_index() const { return static_cast<int>(vocab.size()); }
    int oov_index() const { return static_cast<int>(vocab.size()) + 1; }
    /// Vocabulary size including the reserved missing and OOV slots.
    int table_size() const { return static_cast<int>(vocab.size()) + 2; }
};

struct NumField {
    std::string name;
    FieldGroup group = FieldGroup::Context;
    double min = 0.0;
    double max = 0.0;
    double fill = 0.0;  // mean of observed values, used for missing entries
};

/// Frozen encoding statistics: vocabularies, numeric min/max and fill
/// values. Built once from training data and reused everywhere else.
struct FeatureSchema {
    std::vector<CatField> cats;
    std::vector<NumField> nums;

    std::string serialize() const;
    static FeatureSchema deserialize(const std::string& json_text);
    std::uint64_t fingerprint() const;

    const CatField* find_cat(const std::string& name) const;
};

/// A raw record maps column name to string value; an absent key or empty
/// string counts as missing.
using RawRecord = std::map<std::string, std::string>;

struct EncodedSample {
    std::vector<std::int32_t> cat_indices;
    std::vector<double> num_values;  // normalized into [0, 1]
};

/// One auction from the DSP's view. For won auctions winning_scaled is the
/// observed winning price; for lost auctions it is the hidden winning price
/// recorded for evaluation only and must never feed training.
struct BidObservation {
    EncodedSample sample;
    double bid_scaled = 0.0;
    bool won = false;
    std::optional<double> winning_scaled;

    bool has_z() const { return winning_scaled.has_value(); }
};

struct Dataset {
    std::shared_ptr<const FeatureSchema> schema;
    PriceGrid grid;
    std::vector<BidObservation> observations;

    size_t size() const { return observations.size(); }
    size_t n_won() const;
    size_t n_lost() const;
};

FeatureSchema build_schema(const std::vector<RawRecord>& records,
                           const std::vector<FieldSpec>& specs);

/// Total by construction: unseen categories go to the OOV slot, absent
/// values to the missing slot / fill value.
EncodedSample encode(const RawRecord& record, const FeatureSchema& schema);

struct IngestReport {
    Dataset dataset;
    size_t rows_total = 0;
    size_t rows_skipped = 0;
    std::vector<std::pair<size_t, std::string>> issues;  // (line number, reason), capped
};

/// Reads the TSV dataset format. Core columns: outcome (WON|LOST),
/// bid_price, winning_price (may be empty on LOST rows), duration; feature
/// columns follow the given field specs. Prices are raw and get scaled at
/// ingestion. Malformed rows are skipped and reported; more than 50%
/// skipped rows is a data error. When no schema is passed one is built
/// from this file.
IngestReport read_log(const std::string& tsv_path, const std::vector<FieldSpec>& specs,
                      const PriceGrid& grid,
                      std::shared_ptr<const FeatureSchema> schema = nullptr);

/// Deterministic shuffle of [0, n) by seed, then contiguous partition.
/// Validation and test sizes are floor allocations, the remainder goes to
/// the first part.
std::array<std::vector<size_t>, 3> split_indices(size_t n, double f_train, double f_val,
                                                 double f_test, std::uint64_t seed);

std::array<Dataset, 3> split(const Dataset& dataset, double f_train, double f_val,
                             double f_test, std::uint64_t seed);

}  // namespace adm
