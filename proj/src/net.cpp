#include "adm/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "adm/errors.hpp"
#include "adm/rng.hpp"

namespace adm {

std::string to_string(InteractionKind kind) {
    switch (kind) {
        case InteractionKind::None: return "none";
        case InteractionKind::Fm: return "fm";
        case InteractionKind::InnerProduct: return "inner_product";
    }
    return "none";
}

InteractionKind interaction_kind_from_string(const std::string& s) {
    if (s == "none") return InteractionKind::None;
    if (s == "fm") return InteractionKind::Fm;
    if (s == "inner_product") return InteractionKind::InnerProduct;
    throw ConfigError("unknown interaction kind '" + s + "', expected none|fm|inner_product");
}

void ParamTensors::zero() {
    for_each([](double* p, size_t n) { std::memset(p, 0, n * sizeof(double)); });
}

size_t ParamTensors::n_values() const {
    size_t total = 0;
    const_cast<ParamTensors*>(this)->for_each([&](double*, size_t n) { total += n; });
    return total;
}

std::vector<int> mlp_widths_for(int x1_dim, int n_layers) {
    if (x1_dim < 8)
        throw ConfigError("1-order width " + std::to_string(x1_dim) +
                          " is too small for a halving MLP (need at least 8)");
    std::vector<int> widths;
    int w = x1_dim;
    for (int i = 0; i < n_layers; ++i) {
        w = std::max(4, (w - (w % 2)) / 2);
        widths.push_back(w);
    }
    return widths;
}

ModelParams init_params(const FeatureSchema& schema, const PriceGrid& grid,
                        const NetConfig& net, std::uint64_t seed) {
    if (net.n_layers < 1) throw ConfigError("net needs at least one MLP layer");
    if (net.interaction != InteractionKind::None && net.d_int < 1)
        throw ConfigError("interaction embedding dimension must be >= 1");
    if (net.interaction != InteractionKind::None && schema.cats.size() < 2)
        throw ConfigError("2-order interaction needs at least 2 categorical fields");

    ModelParams p;
    p.net = net;
    p.grid = grid;
    p.schema_json = schema.serialize();
    p.schema_fingerprint = schema.fingerprint();

    int x1 = 0;
    for (const auto& c : schema.cats) x1 += c.emb_dim;
    x1 += static_cast<int>(schema.nums.size());
    p.x1_dim = x1;
    p.mlp_widths = mlp_widths_for(x1, net.n_layers);

    const int n_fields = static_cast<int>(schema.cats.size());
    switch (net.interaction) {
        case InteractionKind::None: p.x2_dim = 0; break;
        case InteractionKind::Fm: p.x2_dim = net.d_int; break;
        case InteractionKind::InnerProduct: p.x2_dim = n_fields * (n_fields - 1) / 2; break;
    }
    p.concat_dim = p.x1_dim + p.x2_dim + p.mlp_widths.back();

    auto rng = make_rng(seed, /*tag=*/3);
    std::uniform_real_distribution<double> emb_init(-0.05, 0.05);

    for (const auto& c : schema.cats) {
        Matrix m(c.table_size(), c.emb_dim);
        for (double& v : m.data) v = emb_init(rng);
        p.t.embeddings.push_back(std::move(m));
    }
    if (net.interaction != InteractionKind::None) {
        for (const auto& c : schema.cats) {
            Matrix m(c.table_size(), net.d_int);
            for (double& v : m.data) v = emb_init(rng);
            p.t.int_embeddings.push_back(std::move(m));
        }
    }
    int in_width = p.x1_dim;
    for (int w : p.mlp_widths) {
        Matrix m(w, in_width);
        std::normal_distribution<double> he(0.0, std::sqrt(2.0 / in_width));
        for (double& v : m.data) v = he(rng);
        p.t.mlp_w.push_back(std::move(m));
        p.t.mlp_b.emplace_back(static_cast<size_t>(w), 0.0);
        in_width = w;
    }
    p.t.head_w = Matrix(grid.n_buckets, p.concat_dim);
    {
        std::normal_distribution<double> he(0.0, std::sqrt(2.0 / p.concat_dim));
        for (double& v : p.t.head_w.data) v = he(rng);
    }
    if (net.softmax_bias) p.t.head_b.assign(static_cast<size_t>(grid.n_buckets), 0.0);
    return p;
}

ParamGrads make_grads(const ModelParams& params) {
    ParamGrads g;
    for (const auto& m : params.t.embeddings) g.embeddings.emplace_back(m.rows, m.cols);
    for (const auto& m : params.t.int_embeddings) g.int_embeddings.emplace_back(m.rows, m.cols);
    for (const auto& m : params.t.mlp_w) g.mlp_w.emplace_back(m.rows, m.cols);
    for (const auto& b : params.t.mlp_b) g.mlp_b.emplace_back(b.size(), 0.0);
    g.head_w = Matrix(params.t.head_w.rows, params.t.head_w.cols);
    if (!params.t.head_b.empty()) g.head_b.assign(params.t.head_b.size(), 0.0);
    return g;
}

std::vector<double> interaction(const std::vector<std::vector<double>>& field_vectors,
                                InteractionKind kind) {
    if (kind == InteractionKind::None) return {};
    if (field_vectors.size() < 2)
        throw std::logic_error("interaction needs at least 2 field vectors");
    const size_t d = field_vectors.front().size();
    for (const auto& v : field_vectors)
        if (v.size() != d) throw std::logic_error("interaction field vectors differ in length");

    if (kind == InteractionKind::Fm) {
        std::vector<double> out(d, 0.0);
        for (size_t k = 0; k < d; ++k) {
            double sum = 0.0, sum_sq = 0.0;
            for (const auto& v : field_vectors) {
                sum += v[k];
                sum_sq += v[k] * v[k];
            }
            out[k] = 0.5 * (sum * sum - sum_sq);
        }
        return out;
    }
    // InnerProduct: pairwise dots in field order
    std::vector<double> out;
    out.reserve(field_vectors.size() * (field_vectors.size() - 1) / 2);
    for (size_t a = 0; a < field_vectors.size(); ++a) {
        for (size_t b = a + 1; b < field_vectors.size(); ++b) {
            double dot = 0.0;
            for (size_t k = 0; k < d; ++k) dot += field_vectors[a][k] * field_vectors[b][k];
            out.push_back(dot);
        }
    }
    return out;
}

namespace {

void check_finite(const std::vector<double>& v, const char* where, int layer) {
    for (double x : v) {
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite activation in ") + where +
                               (layer >= 0 ? " layer " + std::to_string(layer) : ""));
    }
}

}  // namespace

void forward(const ModelParams& params, const EncodedSample& sample, ForwardCache& cache) {
    const auto& t = params.t;
    if (sample.cat_indices.size() != t.embeddings.size())
        throw std::logic_error("sample categorical arity does not match model");

    cache.sample = sample;
    cache.x1.resize(static_cast<size_t>(params.x1_dim));
    size_t offset = 0;
    for (size_t f = 0; f < t.embeddings.size(); ++f) {
        const Matrix& emb = t.embeddings[f];
        int idx = sample.cat_indices[f];
        if (idx < 0 || idx >= emb.rows)
            throw std::logic_error("categorical index out of vocabulary range");
        const double* row = emb.row(idx);
        std::copy(row, row + emb.cols, cache.x1.begin() + offset);
        offset += static_cast<size_t>(emb.cols);
    }
    for (double v : sample.num_values) cache.x1[offset++] = v;

    // 2-order features over the dedicated interaction embeddings
    cache.x2.assign(static_cast<size_t>(params.x2_dim), 0.0);
    if (params.net.interaction == InteractionKind::Fm) {
        const int d = params.net.d_int;
        std::vector<double> sum(static_cast<size_t>(d), 0.0);
        std::vector<double> sum_sq(static_cast<size_t>(d), 0.0);
        for (size_t f = 0; f < t.int_embeddings.size(); ++f) {
            const double* row = t.int_embeddings[f].row(sample.cat_indices[f]);
            for (int k = 0; k < d; ++k) {
                sum[k] += row[k];
                sum_sq[k] += row[k] * row[k];
            }
        }
        for (int k = 0; k < d; ++k) cache.x2[k] = 0.5 * (sum[k] * sum[k] - sum_sq[k]);
    } else if (params.net.interaction == InteractionKind::InnerProduct) {
        const int d = params.net.d_int;
        size_t out = 0;
        for (size_t a = 0; a < t.int_embeddings.size(); ++a) {
            const double* ra = t.int_embeddings[a].row(sample.cat_indices[a]);
            for (size_t b = a + 1; b < t.int_embeddings.size(); ++b) {
                const double* rb = t.int_embeddings[b].row(sample.cat_indices[b]);
                double dot = 0.0;
                for (int k = 0; k < d; ++k) dot += ra[k] * rb[k];
                cache.x2[out++] = dot;
            }
        }
    }

    // halving ReLU MLP over x1
    const size_t n_layers = t.mlp_w.size();
    cache.pre.resize(n_layers);
    cache.act.resize(n_layers);
    const std::vector<double>* input = &cache.x1;
    for (size_t l = 0; l < n_layers; ++l) {
        const Matrix& w = t.mlp_w[l];
        cache.pre[l].resize(static_cast<size_t>(w.rows));
        cache.act[l].resize(static_cast<size_t>(w.rows));
        for (int r = 0; r < w.rows; ++r) {
            const double* wr = w.row(r);
            double z = t.mlp_b[l][static_cast<size_t>(r)];
            for (int c = 0; c < w.cols; ++c) z += wr[c] * (*input)[static_cast<size_t>(c)];
            cache.pre[l][static_cast<size_t>(r)] = z;
            cache.act[l][static_cast<size_t>(r)] = z > 0.0 ? z : 0.0;
        }
        check_finite(cache.pre[l], "mlp", static_cast<int>(l + 1));
        input = &cache.act[l];
    }

    // softmax head over [x1, x2, xh]
    const std::vector<double>& xh = cache.act.back();
    cache.logits.resize(static_cast<size_t>(params.grid.n_buckets));
    for (int n = 0; n < t.head_w.rows; ++n) {
        const double* wr = t.head_w.row(n);
        double z = t.head_b.empty() ? 0.0 : t.head_b[static_cast<size_t>(n)];
        size_t c = 0;
        for (double v : cache.x1) z += wr[c++] * v;
        for (double v : cache.x2) z += wr[c++] * v;
        for (double v : xh) z += wr[c++] * v;
        cache.logits[static_cast<size_t>(n)] = z;
    }
    check_finite(cache.logits, "softmax head", -1);

    double max_logit = *std::max_element(cache.logits.begin(), cache.logits.end());
    cache.probs.probs.resize(cache.logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < cache.logits.size(); ++i) {
        double e = std::exp(cache.logits[i] - max_logit);
        cache.probs.probs[i] = e;
        sum += e;
    }
    for (double& p : cache.probs.probs) p /= sum;
}

ForwardCache forward(const ModelParams& params, const EncodedSample& sample) {
    ForwardCache cache;
    forward(params, sample, cache);
    return cache;
}

BucketDistribution predict(const ModelParams& params, const EncodedSample& sample) {
    ForwardCache cache;
    forward(params, sample, cache);
    return std::move(cache.probs);
}

void backward_accumulate(const ModelParams& params, const ForwardCache& cache,
                         const std::vector<double>& dL_dlogits, ParamGrads& grads) {
    const auto& t = params.t;
    if (dL_dlogits.size() != cache.logits.size())
        throw std::logic_error("logit gradient length mismatch");

    auto& d_concat = cache.d_concat;
    d_concat.assign(static_cast<size_t>(params.concat_dim), 0.0);

    // head: logits = head_w . concat (+ head_b)
    const std::vector<double>& xh = cache.act.back();
    for (int n = 0; n < t.head_w.rows; ++n) {
        double g = dL_dlogits[static_cast<size_t>(n)];
        if (!t.head_b.empty()) grads.head_b[static_cast<size_t>(n)] += g;
        double* grow = grads.head_w.row(n);
        const double* wrow = t.head_w.row(n);
        size_t c = 0;
        for (double v : cache.x1) grow[c++] += g * v;
        for (double v : cache.x2) grow[c++] += g * v;
        for (double v : xh) grow[c++] += g * v;
        if (g != 0.0)
            for (size_t k = 0; k < d_concat.size(); ++k) d_concat[k] += g * wrow[k];
    }

    const size_t x1_dim = cache.x1.size();
    const size_t x2_dim = cache.x2.size();

    // MLP backward from d_xh; collects the gradient reaching x1 through layer 1
    auto& d_act = cache.d_act;
    d_act.resize(t.mlp_w.size() + 1);
    d_act[t.mlp_w.size()].assign(xh.size(), 0.0);
    for (size_t k = 0; k < xh.size(); ++k)
        d_act[t.mlp_w.size()][k] = d_concat[x1_dim + x2_dim + k];

    for (size_t l = t.mlp_w.size(); l-- > 0;) {
        const Matrix& w = t.mlp_w[l];
        const std::vector<double>& input = l == 0 ? cache.x1 : cache.act[l - 1];
        d_act[l].assign(input.size(), 0.0);
        for (int r = 0; r < w.rows; ++r) {
            double up = d_act[l + 1][static_cast<size_t>(r)];
            if (cache.pre[l][static_cast<size_t>(r)] <= 0.0 || up == 0.0) continue;
            grads.mlp_b[l][static_cast<size_t>(r)] += up;
            double* grow = grads.mlp_w[l].row(r);
            const double* wrow = w.row(r);
            for (int c = 0; c < w.cols; ++c) {
                grow[c] += up * input[static_cast<size_t>(c)];
                d_act[l][static_cast<size_t>(c)] += up * wrow[c];
            }
        }
    }

    // gradient reaching x1 directly from the head plus through the MLP
    std::vector<double>& d_x1 = d_act[0];
    for (size_t k = 0; k < x1_dim; ++k) d_x1[k] += d_concat[k];

    size_t offset = 0;
    for (size_t f = 0; f < t.embeddings.size(); ++f) {
        const Matrix& emb = t.embeddings[f];
        double* grow = grads.embeddings[f].row(cache.sample.cat_indices[f]);
        for (int c = 0; c < emb.cols; ++c) grow[c] += d_x1[offset + static_cast<size_t>(c)];
        offset += static_cast<size_t>(emb.cols);
    }
    // numeric inputs carry no parameters

    // interaction backward
    if (params.net.interaction == InteractionKind::Fm) {
        const int d = params.net.d_int;
        std::vector<double> sum(static_cast<size_t>(d), 0.0);
        for (size_t f = 0; f < t.int_embeddings.size(); ++f) {
            const double* row = t.int_embeddings[f].row(cache.sample.cat_indices[f]);
            for (int k = 0; k < d; ++k) sum[static_cast<size_t>(k)] += row[k];
        }
        for (size_t f = 0; f < t.int_embeddings.size(); ++f) {
            const double* row = t.int_embeddings[f].row(cache.sample.cat_indices[f]);
            double* grow = grads.int_embeddings[f].row(cache.sample.cat_indices[f]);
            for (int k = 0; k < d; ++k)
                grow[k] += d_concat[x1_dim + static_cast<size_t>(k)] *
                           (sum[static_cast<size_t>(k)] - row[k]);
        }
    } else if (params.net.interaction == InteractionKind::InnerProduct) {
        const int d = params.net.d_int;
        size_t pair = 0;
        for (size_t a = 0; a < t.int_embeddings.size(); ++a) {
            for (size_t b = a + 1; b < t.int_embeddings.size(); ++b) {
                double g = d_concat[x1_dim + pair++];
                if (g == 0.0) continue;
                const double* ra = t.int_embeddings[a].row(cache.sample.cat_indices[a]);
                const double* rb = t.int_embeddings[b].row(cache.sample.cat_indices[b]);
                double* ga = grads.int_embeddings[a].row(cache.sample.cat_indices[a]);
                double* gb = grads.int_embeddings[b].row(cache.sample.cat_indices[b]);
                for (int k = 0; k < d; ++k) {
                    ga[k] += g * rb[k];
                    gb[k] += g * ra[k];
                }
            }
        }
    }
}

ParamGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const std::vector<double>& dL_dlogits) {
    ParamGrads grads = make_grads(params);
    backward_accumulate(params, cache, dL_dlogits, grads);
    return grads;
}

}  // namespace adm
