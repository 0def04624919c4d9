#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adm/features.hpp"
#include "adm/pricegrid.hpp"

namespace adm {

enum class InteractionKind { None, Fm, InnerProduct };

std::string to_string(InteractionKind kind);
InteractionKind interaction_kind_from_string(const std::string& s);

struct NetConfig {
    InteractionKind interaction = InteractionKind::None;
    int d_int = 8;       // shared dimension of the interaction embeddings
    int n_layers = 3;    // fully connected layers, widths halving
    bool softmax_bias = false;
};

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
};

/// The learnable tensors. Gradients and optimizer moments reuse this
/// layout so that elementwise updates can walk parameters generically.
struct ParamTensors {
    std::vector<Matrix> embeddings;      // one per categorical field
    std::vector<Matrix> int_embeddings;  // present iff interaction enabled
    std::vector<Matrix> mlp_w;           // layer i: (width_i x width_{i-1})
    std::vector<std::vector<double>> mlp_b;
    Matrix head_w;                       // (n_buckets x concat_width)
    std::vector<double> head_b;          // empty unless softmax_bias

    void zero();
    size_t n_values() const;
    /// Calls fn(span-begin, count) over every tensor in a fixed order.
    template <typename Fn>
    void for_each(Fn&& fn) {
        for (auto& m : embeddings) fn(m.data.data(), m.data.size());
        for (auto& m : int_embeddings) fn(m.data.data(), m.data.size());
        for (auto& m : mlp_w) fn(m.data.data(), m.data.size());
        for (auto& b : mlp_b) fn(b.data(), b.size());
        fn(head_w.data.data(), head_w.data.size());
        if (!head_b.empty()) fn(head_b.data(), head_b.size());
    }
};

struct ModelParams {
    NetConfig net;
    PriceGrid grid;
    std::uint64_t schema_fingerprint = 0;
    std::string schema_json;  // full schema, so checkpoints are self-contained

    int x1_dim = 0;
    int x2_dim = 0;
    std::vector<int> mlp_widths;  // output width per layer
    int concat_dim = 0;

    ParamTensors t;

    FeatureSchema schema() const { return FeatureSchema::deserialize(schema_json); }
};

using ParamGrads = ParamTensors;

struct ForwardCache {
    EncodedSample sample;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<std::vector<double>> pre;  // per-layer pre-activations
    std::vector<std::vector<double>> act;  // per-layer ReLU outputs
    std::vector<double> logits;
    BucketDistribution probs;

    // scratch reused by backward to avoid per-sample allocation
    mutable std::vector<double> d_concat;
    mutable std::vector<std::vector<double>> d_act;
};

/// Widths of the halving MLP given the 1-order width. Each halving first
/// rounds the incoming width down to even; widths never drop below 4.
std::vector<int> mlp_widths_for(int x1_dim, int n_layers);

ModelParams init_params(const FeatureSchema& schema, const PriceGrid& grid,
                        const NetConfig& net, std::uint64_t seed);

ParamGrads make_grads(const ModelParams& params);

/// 2-order interaction over per-field vectors of equal length.
/// Fm: elementwise 0.5 * ((sum v)^2 - sum v^2), length d_int.
/// InnerProduct: all pairwise dot products, length C(F, 2).
/// None: empty.
std::vector<double> interaction(const std::vector<std::vector<double>>& field_vectors,
                                InteractionKind kind);

void forward(const ModelParams& params, const EncodedSample& sample, ForwardCache& cache);

/// Convenience wrapper allocating a fresh cache.
ForwardCache forward(const ModelParams& params, const EncodedSample& sample);

BucketDistribution predict(const ModelParams& params, const EncodedSample& sample);

/// Accumulates exact gradients of dL_dlogits . logits(params) into `grads`
/// (adds, does not overwrite). Only embedding rows touched by the cached
/// sample receive gradient.
void backward_accumulate(const ModelParams& params, const ForwardCache& cache,
                         const std::vector<double>& dL_dlogits, ParamGrads& grads);

/// Fresh-gradient variant matching the spec of the single-sample op.
ParamGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const std::vector<double>& dL_dlogits);

}  // namespace adm
