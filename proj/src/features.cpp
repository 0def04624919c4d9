#include "adm/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "adm/errors.hpp"
#include "adm/rng.hpp"

namespace adm {

using nlohmann::json;

std::string to_string(FieldKind kind) {
    return kind == FieldKind::Categorical ? "cat" : "num";
}

std::string to_string(FieldGroup group) {
    switch (group) {
        case FieldGroup::Publisher: return "publisher";
        case FieldGroup::User: return "user";
        case FieldGroup::Ad: return "ad";
        case FieldGroup::Context: return "context";
    }
    return "context";
}

FieldKind field_kind_from_string(const std::string& s) {
    if (s == "cat") return FieldKind::Categorical;
    if (s == "num") return FieldKind::Numeric;
    throw ConfigError("unknown field kind '" + s + "', expected cat|num");
}

FieldGroup field_group_from_string(const std::string& s) {
    if (s == "publisher") return FieldGroup::Publisher;
    if (s == "user") return FieldGroup::User;
    if (s == "ad") return FieldGroup::Ad;
    if (s == "context") return FieldGroup::Context;
    throw ConfigError("unknown field group '" + s + "'");
}

std::vector<FieldSpec> load_field_specs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open field spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("field spec file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_array()) throw DataError("field spec file must hold a JSON array");
    std::vector<FieldSpec> specs;
    for (const auto& item : j) {
        FieldSpec s;
        s.name = item.at("name").get<std::string>();
        s.kind = field_kind_from_string(item.at("kind").get<std::string>());
        s.group = field_group_from_string(item.at("group").get<std::string>());
        specs.push_back(std::move(s));
    }
    if (specs.empty()) throw DataError("field spec file declares no fields");
    return specs;
}

void save_field_specs(const std::vector<FieldSpec>& specs, const std::string& path) {
    json j = json::array();
    for (const auto& s : specs)
        j.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"group", to_string(s.group)}});
    std::ofstream out(path);
    if (!out) throw DataError("cannot write field spec file: " + path);
    out << j.dump(2) << "\n";
}

int embedding_dim(int cardinality) {
    if (cardinality < 1) throw ConfigError("embedding_dim requires cardinality >= 1");
    int dim = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cardinality))));
    return std::min(dim, 64);
}

namespace {

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size()) return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

const std::string* record_value(const RawRecord& record, const std::string& name) {
    auto it = record.find(name);
    if (it == record.end() || it->second.empty()) return nullptr;
    return &it->second;
}

}  // namespace

std::string FeatureSchema::serialize() const {
    json j;
    j["cats"] = json::array();
    for (const auto& c : cats) {
        j["cats"].push_back({{"name", c.name},
                             {"group", to_string(c.group)},
                             {"vocab", c.vocab},
                             {"emb_dim", c.emb_dim}});
    }
    j["nums"] = json::array();
    for (const auto& f : nums) {
        j["nums"].push_back({{"name", f.name},
                             {"group", to_string(f.group)},
                             {"min", f.min},
                             {"max", f.max},
                             {"fill", f.fill}});
    }
    return j.dump();
}

FeatureSchema FeatureSchema::deserialize(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw DataError(std::string("schema JSON is malformed: ") + e.what());
    }
    FeatureSchema schema;
    for (const auto& item : j.at("cats")) {
        CatField c;
        c.name = item.at("name").get<std::string>();
        c.group = field_group_from_string(item.at("group").get<std::string>());
        c.vocab = item.at("vocab").get<std::vector<std::string>>();
        c.emb_dim = item.at("emb_dim").get<int>();
        for (size_t i = 0; i < c.vocab.size(); ++i) c.index[c.vocab[i]] = static_cast<int>(i);
        schema.cats.push_back(std::move(c));
    }
    for (const auto& item : j.at("nums")) {
        NumField f;
        f.name = item.at("name").get<std::string>();
        f.group = field_group_from_string(item.at("group").get<std::string>());
        f.min = item.at("min").get<double>();
        f.max = item.at("max").get<double>();
        f.fill = item.at("fill").get<double>();
        schema.nums.push_back(std::move(f));
    }
    return schema;
}

std::uint64_t FeatureSchema::fingerprint() const {
    // FNV-1a over the canonical serialization.
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : serialize()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

const CatField* FeatureSchema::find_cat(const std::string& name) const {
    for (const auto& c : cats)
        if (c.name == name) return &c;
    return nullptr;
}

size_t Dataset::n_won() const {
    return static_cast<size_t>(
        std::count_if(observations.begin(), observations.end(),
                      [](const BidObservation& o) { return o.won; }));
}

size_t Dataset::n_lost() const { return observations.size() - n_won(); }

FeatureSchema build_schema(const std::vector<RawRecord>& records,
                           const std::vector<FieldSpec>& specs) {
    if (records.empty()) throw DataError("cannot build schema from an empty record stream");
    FeatureSchema schema;
    for (const auto& spec : specs) {
        if (spec.kind == FieldKind::Categorical) {
            CatField c;
            c.name = spec.name;
            c.group = spec.group;
            for (const auto& record : records) {
                const std::string* v = record_value(record, spec.name);
                if (v && !c.index.count(*v)) {
                    c.index[*v] = static_cast<int>(c.vocab.size());
                    c.vocab.push_back(*v);
                }
            }
            c.emb_dim = embedding_dim(c.table_size());
            schema.cats.push_back(std::move(c));
        } else {
            NumField f;
            f.name = spec.name;
            f.group = spec.group;
            double sum = 0.0;
            size_t count = 0;
            double lo = 0.0, hi = 0.0;
            for (const auto& record : records) {
                const std::string* v = record_value(record, spec.name);
                double parsed;
                if (v && parse_double(*v, parsed)) {
                    if (count == 0) {
                        lo = hi = parsed;
                    } else {
                        lo = std::min(lo, parsed);
                        hi = std::max(hi, parsed);
                    }
                    sum += parsed;
                    ++count;
                }
            }
            if (count == 0)
                throw DataError("numeric field '" + spec.name + "' has no finite values");
            f.min = lo;
            f.max = hi;
            f.fill = sum / static_cast<double>(count);
            schema.nums.push_back(std::move(f));
        }
    }
    return schema;
}

EncodedSample encode(const RawRecord& record, const FeatureSchema& schema) {
    EncodedSample sample;
    sample.cat_indices.reserve(schema.cats.size());
    sample.num_values.reserve(schema.nums.size());
    for (const auto& c : schema.cats) {
        const std::string* v = record_value(record, c.name);
        if (!v) {
            sample.cat_indices.push_back(c.missing_index());
        } else {
            auto it = c.index.find(*v);
            sample.cat_indices.push_back(it == c.index.end() ? c.oov_index() : it->second);
        }
    }
    for (const auto& f : schema.nums) {
        const std::string* v = record_value(record, f.name);
        double value = f.fill;
        if (v) {
            double parsed;
            if (parse_double(*v, parsed)) value = parsed;
        }
        double normalized = 0.0;
        if (f.max > f.min) normalized = std::clamp((value - f.min) / (f.max - f.min), 0.0, 1.0);
        sample.num_values.push_back(normalized);
    }
    return sample;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

struct ParsedRow {
    RawRecord features;
    double bid_scaled = 0.0;
    bool won = false;
    std::optional<double> winning_scaled;
};

constexpr size_t kMaxReportedIssues = 20;

}  // namespace

IngestReport read_log(const std::string& tsv_path, const std::vector<FieldSpec>& specs,
                      const PriceGrid& grid,
                      std::shared_ptr<const FeatureSchema> schema) {
    std::ifstream in(tsv_path);
    if (!in) throw DataError("cannot open dataset file: " + tsv_path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw DataError("dataset file is empty: " + tsv_path);
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    std::vector<std::string> header = split_tabs(header_line);
    std::unordered_map<std::string, size_t> column;
    for (size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
    for (const char* required : {"outcome", "bid_price", "winning_price", "duration"})
        if (!column.count(required))
            throw DataError("dataset file is missing required column '" + std::string(required) + "'");

    IngestReport report;
    report.dataset.grid = grid;
    std::vector<ParsedRow> rows;
    std::string line;
    size_t line_no = 1;

    auto skip = [&](size_t line_number, const std::string& reason) {
        ++report.rows_skipped;
        if (report.issues.size() < kMaxReportedIssues) report.issues.emplace_back(line_number, reason);
    };

    auto cell = [&](const std::vector<std::string>& cells, const char* name) -> const std::string& {
        return cells[column.at(name)];
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++report.rows_total;
        std::vector<std::string> cells = split_tabs(line);
        if (cells.size() != header.size()) {
            skip(line_no, "column count mismatch");
            continue;
        }
        const std::string& outcome = cell(cells, "outcome");
        bool won;
        if (outcome == "WON") {
            won = true;
        } else if (outcome == "LOST") {
            won = false;
        } else {
            skip(line_no, "unknown outcome '" + outcome + "'");
            continue;
        }
        double bid_raw, duration;
        if (!parse_double(cell(cells, "bid_price"), bid_raw) || bid_raw <= 0.0) {
            skip(line_no, "bad bid_price");
            continue;
        }
        if (!parse_double(cell(cells, "duration"), duration) || duration <= 0.0) {
            skip(line_no, "bad duration");
            continue;
        }
        ParsedRow row;
        row.won = won;
        row.bid_scaled = scale_price(bid_raw, duration);
        const std::string& z_text = cell(cells, "winning_price");
        if (won) {
            double z_raw;
            if (!parse_double(z_text, z_raw) || z_raw <= 0.0) {
                skip(line_no, "won row lacks a valid winning_price");
                continue;
            }
            double z_scaled = scale_price(z_raw, duration);
            if (z_scaled > row.bid_scaled + 1e-9) {
                skip(line_no, "won row has winning price above bid");
                continue;
            }
            row.winning_scaled = z_scaled;
        } else if (!z_text.empty()) {
            double z_raw;
            if (!parse_double(z_text, z_raw) || z_raw <= 0.0) {
                skip(line_no, "lost row has unparseable winning_price");
                continue;
            }
            double z_scaled = scale_price(z_raw, duration);
            if (z_scaled < row.bid_scaled - 1e-9) {
                skip(line_no, "lost row has winning price below bid");
                continue;
            }
            row.winning_scaled = z_scaled;
        }
        for (const auto& spec : specs) {
            auto it = column.find(spec.name);
            if (it != column.end() && !cells[it->second].empty())
                row.features[spec.name] = cells[it->second];
        }
        rows.push_back(std::move(row));
    }

    if (report.rows_total == 0) throw DataError("dataset file has no data rows: " + tsv_path);
    if (report.rows_skipped * 2 > report.rows_total)
        throw DataError("more than 50% of rows were skipped in " + tsv_path + " (" +
                        std::to_string(report.rows_skipped) + "/" +
                        std::to_string(report.rows_total) + ")");

    if (!schema) {
        std::vector<RawRecord> records;
        records.reserve(rows.size());
        for (const auto& row : rows) records.push_back(row.features);
        schema = std::make_shared<FeatureSchema>(build_schema(records, specs));
    }
    report.dataset.schema = schema;
    report.dataset.observations.reserve(rows.size());
    for (const auto& row : rows) {
        BidObservation obs;
        obs.sample = encode(row.features, *schema);
        obs.bid_scaled = row.bid_scaled;
        obs.won = row.won;
        obs.winning_scaled = row.winning_scaled;
        report.dataset.observations.push_back(std::move(obs));
    }
    return report;
}

std::array<std::vector<size_t>, 3> split_indices(size_t n, double f_train, double f_val,
                                                 double f_test, std::uint64_t seed) {
    if (f_train < 0.0 || f_val < 0.0 || f_test < 0.0)
        throw ConfigError("split fractions must be non-negative");
    if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    auto rng = make_rng(seed, /*tag=*/17);
    std::shuffle(order.begin(), order.end(), rng);
    size_t n_val = static_cast<size_t>(std::floor(f_val * static_cast<double>(n)));
    size_t n_test = static_cast<size_t>(std::floor(f_test * static_cast<double>(n)));
    size_t n_train = n - n_val - n_test;
    std::array<std::vector<size_t>, 3> parts;
    parts[0].assign(order.begin(), order.begin() + n_train);
    parts[1].assign(order.begin() + n_train, order.begin() + n_train + n_val);
    parts[2].assign(order.begin() + n_train + n_val, order.end());
    return parts;
}

std::array<Dataset, 3> split(const Dataset& dataset, double f_train, double f_val,
                             double f_test, std::uint64_t seed) {
    auto parts = split_indices(dataset.size(), f_train, f_val, f_test, seed);
    std::array<Dataset, 3> out;
    for (int p = 0; p < 3; ++p) {
        out[p].schema = dataset.schema;
        out[p].grid = dataset.grid;
        out[p].observations.reserve(parts[p].size());
        for (size_t idx : parts[p]) out[p].observations.push_back(dataset.observations[idx]);
    }
    return out;
}

}  // namespace adm
