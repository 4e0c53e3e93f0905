#include "absa/encoder.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace absa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Row-wise layer norm over the feature axis with optional backward cache.
Eigen::MatrixXd layer_norm_rows(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& scale,
                                const Eigen::VectorXd& shift,
                                LayerNormCache* cache) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index h = x.cols();
  Eigen::MatrixXd normalized(rows, h);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() /
                       static_cast<double>(h);
    const double is = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    normalized.row(r) = (x.row(r).array() - mean) * is;
    inv_std(r) = is;
  }
  Eigen::MatrixXd out =
      (normalized.array().rowwise() * scale.transpose().array()).rowwise() +
      shift.transpose().array();
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

// Entries are 0 (dropped) or 1/keep_prob; iteration order is fixed so runs
// are reproducible per seed.
Eigen::MatrixXd make_dropout_mask(Eigen::Index rows, Eigen::Index cols,
                                  double rate, std::mt19937_64& rng) {
  Eigen::MatrixXd mask(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      mask(r, c) = keep(rng) ? scale : 0.0;
    }
  }
  return mask;
}

Eigen::MatrixXd attention_core(const Eigen::MatrixXd& hidden,
                               const std::vector<std::int32_t>& mask,
                               int batch_size, int seq_len,
                               const LayerParams& layer,
                               const EncoderConfig& config,
                               const std::vector<Eigen::MatrixXd>* prob_drop,
                               std::vector<Eigen::MatrixXd>* probs_out,
                               LayerCache* cache) {
  const int heads = config.num_heads;
  const int head_dim = config.head_size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Eigen::MatrixXd q = hidden * layer.w_query;
  q.rowwise() += layer.b_query.transpose();
  Eigen::MatrixXd k = hidden * layer.w_key;
  k.rowwise() += layer.b_key.transpose();
  Eigen::MatrixXd v = hidden * layer.w_value;
  v.rowwise() += layer.b_value.transpose();

  Eigen::MatrixXd context(hidden.rows(), hidden.cols());
  if (probs_out) {
    probs_out->assign(static_cast<std::size_t>(batch_size) * heads,
                      Eigen::MatrixXd());
  }
  for (int b = 0; b < batch_size; ++b) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(b) * seq_len;
    bool any_unmasked = false;
    for (int j = 0; j < seq_len; ++j) {
      if (mask[row0 + j] != 0) {
        any_unmasked = true;
        break;
      }
    }
    if (!any_unmasked) {
      throw std::invalid_argument(
          "attention over a fully masked sequence is undefined");
    }
    for (int a = 0; a < heads; ++a) {
      const Eigen::Index col0 = static_cast<Eigen::Index>(a) * head_dim;
      auto qa = q.block(row0, col0, seq_len, head_dim);
      auto ka = k.block(row0, col0, seq_len, head_dim);
      auto va = v.block(row0, col0, seq_len, head_dim);
      Eigen::MatrixXd scores = qa * ka.transpose() * scale;
      for (int j = 0; j < seq_len; ++j) {
        if (mask[row0 + j] == 0) scores.col(j).setConstant(kNegInf);
      }
      Eigen::MatrixXd probs(seq_len, seq_len);
      for (int t = 0; t < seq_len; ++t) {
        const double row_max = scores.row(t).maxCoeff();
        probs.row(t) = (scores.row(t).array() - row_max).exp();
        probs.row(t) /= probs.row(t).sum();
      }
      if (probs_out) {
        (*probs_out)[static_cast<std::size_t>(b) * heads + a] = probs;
      }
      if (prob_drop) {
        probs = probs.cwiseProduct(
            (*prob_drop)[static_cast<std::size_t>(b) * heads + a]);
      }
      context.block(row0, col0, seq_len, head_dim) = probs * va;
    }
  }

  Eigen::MatrixXd attn_out = context * layer.w_attn_out;
  attn_out.rowwise() += layer.b_attn_out.transpose();
  if (cache) {
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->context = std::move(context);
  }
  return attn_out;
}

void validate_batch(const EncoderConfig& config, const Batch& batch) {
  if (batch.batch_size < 1 || batch.seq_len < 1) {
    throw std::invalid_argument("batch must hold at least one sequence");
  }
  if (batch.seq_len > config.max_len) {
    throw std::invalid_argument(
        "sequence length " + std::to_string(batch.seq_len) +
        " exceeds configured max_len " + std::to_string(config.max_len));
  }
  const std::size_t n =
      static_cast<std::size_t>(batch.batch_size) * batch.seq_len;
  if (batch.token_ids.size() != n || batch.segment_ids.size() != n ||
      batch.attention_mask.size() != n) {
    throw std::invalid_argument("batch tensor shape mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.token_ids[i] < 0 || batch.token_ids[i] >= config.vocab_size) {
      throw std::invalid_argument("token id out of range: " +
                                  std::to_string(batch.token_ids[i]));
    }
    if (batch.segment_ids[i] != 0 && batch.segment_ids[i] != 1) {
      throw std::invalid_argument("segment ids must be 0 or 1");
    }
    if (batch.attention_mask[i] != 0 && batch.attention_mask[i] != 1) {
      throw std::invalid_argument("attention mask must be 0 or 1");
    }
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (num_layers < 1 || num_heads < 1 || hidden_size < 1 ||
      feed_forward_size < 1 || vocab_size < 1 || max_len < 1) {
    throw std::invalid_argument("encoder dimensions must be >= 1");
  }
  if (hidden_size % num_heads != 0) {
    throw std::invalid_argument("hidden_size must be divisible by num_heads");
  }
  if (num_classes != 2 && num_classes != 3) {
    throw std::invalid_argument("num_classes must be 2 or 3");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout_rate must lie in [0, 1)");
  }
}

ModelParams ModelParams::zeros(const EncoderConfig& config) {
  config.validate();
  ModelParams p;
  p.config = config;
  const int h = config.hidden_size;
  const int f = config.feed_forward_size;
  p.token_embeddings = Eigen::MatrixXd::Zero(config.vocab_size, h);
  p.position_embeddings = Eigen::MatrixXd::Zero(config.max_len, h);
  p.segment_embeddings = Eigen::MatrixXd::Zero(2, h);
  p.ln_embed_scale = Eigen::VectorXd::Zero(h);
  p.ln_embed_shift = Eigen::VectorXd::Zero(h);
  p.layers.resize(config.num_layers);
  for (LayerParams& layer : p.layers) {
    layer.w_query = Eigen::MatrixXd::Zero(h, h);
    layer.w_key = Eigen::MatrixXd::Zero(h, h);
    layer.w_value = Eigen::MatrixXd::Zero(h, h);
    layer.w_attn_out = Eigen::MatrixXd::Zero(h, h);
    layer.b_query = Eigen::VectorXd::Zero(h);
    layer.b_key = Eigen::VectorXd::Zero(h);
    layer.b_value = Eigen::VectorXd::Zero(h);
    layer.b_attn_out = Eigen::VectorXd::Zero(h);
    layer.ln_attn_scale = Eigen::VectorXd::Zero(h);
    layer.ln_attn_shift = Eigen::VectorXd::Zero(h);
    layer.w_ff_in = Eigen::MatrixXd::Zero(h, f);
    layer.b_ff_in = Eigen::VectorXd::Zero(f);
    layer.w_ff_out = Eigen::MatrixXd::Zero(f, h);
    layer.b_ff_out = Eigen::VectorXd::Zero(h);
    layer.ln_ffn_scale = Eigen::VectorXd::Zero(h);
    layer.ln_ffn_shift = Eigen::VectorXd::Zero(h);
  }
  p.w_classifier = Eigen::MatrixXd::Zero(h, config.num_classes);
  p.b_classifier = Eigen::VectorXd::Zero(config.num_classes);
  return p;
}

ModelParams ModelParams::init(const EncoderConfig& config) {
  ModelParams p = zeros(config);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, kInitStdDev);
  const double bound = 2.0 * kInitStdDev;
  auto fill_truncated = [&](Eigen::MatrixXd& m) {
    double* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double x;
      do {
        x = normal(rng);
      } while (std::abs(x) > bound);
      data[i] = x;
    }
  };
  fill_truncated(p.token_embeddings);
  fill_truncated(p.position_embeddings);
  fill_truncated(p.segment_embeddings);
  p.ln_embed_scale.setOnes();
  for (LayerParams& layer : p.layers) {
    fill_truncated(layer.w_query);
    fill_truncated(layer.w_key);
    fill_truncated(layer.w_value);
    fill_truncated(layer.w_attn_out);
    layer.ln_attn_scale.setOnes();
    fill_truncated(layer.w_ff_in);
    fill_truncated(layer.w_ff_out);
    layer.ln_ffn_scale.setOnes();
  }
  fill_truncated(p.w_classifier);
  return p;
}

namespace {

template <typename RefT, typename ParamsT>
std::vector<RefT> collect_tensors(ParamsT& params) {
  std::vector<RefT> refs;
  auto add_mat = [&](std::string name, auto& m) {
    refs.push_back(RefT{std::move(name), m.data(), m.size(), m.rows(),
                        m.cols()});
  };
  auto add_vec = [&](std::string name, auto& v) {
    refs.push_back(RefT{std::move(name), v.data(), v.size(), v.size(), 1});
  };
  add_mat("embeddings.token", params.token_embeddings);
  add_mat("embeddings.position", params.position_embeddings);
  add_mat("embeddings.segment", params.segment_embeddings);
  add_vec("embeddings.layer_norm.scale", params.ln_embed_scale);
  add_vec("embeddings.layer_norm.shift", params.ln_embed_shift);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    add_mat(prefix + "attention.query.weight", layer.w_query);
    add_vec(prefix + "attention.query.bias", layer.b_query);
    add_mat(prefix + "attention.key.weight", layer.w_key);
    add_vec(prefix + "attention.key.bias", layer.b_key);
    add_mat(prefix + "attention.value.weight", layer.w_value);
    add_vec(prefix + "attention.value.bias", layer.b_value);
    add_mat(prefix + "attention.output.weight", layer.w_attn_out);
    add_vec(prefix + "attention.output.bias", layer.b_attn_out);
    add_vec(prefix + "attention.layer_norm.scale", layer.ln_attn_scale);
    add_vec(prefix + "attention.layer_norm.shift", layer.ln_attn_shift);
    add_mat(prefix + "ffn.in.weight", layer.w_ff_in);
    add_vec(prefix + "ffn.in.bias", layer.b_ff_in);
    add_mat(prefix + "ffn.out.weight", layer.w_ff_out);
    add_vec(prefix + "ffn.out.bias", layer.b_ff_out);
    add_vec(prefix + "ffn.layer_norm.scale", layer.ln_ffn_scale);
    add_vec(prefix + "ffn.layer_norm.shift", layer.ln_ffn_shift);
  }
  add_mat("classifier.weight", params.w_classifier);
  add_vec("classifier.bias", params.b_classifier);
  return refs;
}

}  // namespace

std::vector<TensorRef> named_tensors(ModelParams& params) {
  return collect_tensors<TensorRef>(params);
}

std::vector<ConstTensorRef> named_tensors(const ModelParams& params) {
  return collect_tensors<ConstTensorRef>(params);
}

std::int64_t parameter_count(const EncoderConfig& config) {
  ModelParams p = ModelParams::zeros(config);
  std::int64_t total = 0;
  for (const TensorRef& ref : named_tensors(p)) total += ref.size;
  return total;
}

Batch Batch::from_sequences(std::span<const EncodedSequence> sequences) {
  if (sequences.empty()) {
    throw std::invalid_argument("cannot build a batch from zero sequences");
  }
  Batch batch;
  batch.batch_size = static_cast<int>(sequences.size());
  batch.seq_len = static_cast<int>(sequences.front().token_ids.size());
  const std::size_t n =
      static_cast<std::size_t>(batch.batch_size) * batch.seq_len;
  batch.token_ids.reserve(n);
  batch.segment_ids.reserve(n);
  batch.attention_mask.reserve(n);
  batch.labels.reserve(sequences.size());
  for (const EncodedSequence& seq : sequences) {
    if (static_cast<int>(seq.token_ids.size()) != batch.seq_len ||
        seq.segment_ids.size() != seq.token_ids.size() ||
        seq.attention_mask.size() != seq.token_ids.size()) {
      throw std::invalid_argument("batch requires a uniform max_len");
    }
    batch.token_ids.insert(batch.token_ids.end(), seq.token_ids.begin(),
                           seq.token_ids.end());
    batch.segment_ids.insert(batch.segment_ids.end(), seq.segment_ids.begin(),
                             seq.segment_ids.end());
    batch.attention_mask.insert(batch.attention_mask.end(),
                                seq.attention_mask.begin(),
                                seq.attention_mask.end());
    batch.labels.push_back(seq.label);
  }
  return batch;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  if (logits.size() == 0) {
    throw std::invalid_argument("softmax of an empty vector");
  }
  if (!logits.allFinite()) {
    throw std::invalid_argument("softmax requires finite logits");
  }
  Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
  Eigen::VectorXd exps = shifted.array().exp();
  return exps / exps.sum();
}

double gelu(double x) {
  return x * 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

double gelu_derivative(double x) {
  const double phi = 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
  const double density =
      std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return phi + x * density;
}

Eigen::VectorXd layer_norm(const Eigen::VectorXd& v,
                           const Eigen::VectorXd& scale,
                           const Eigen::VectorXd& shift, double epsilon) {
  if (v.size() == 0) {
    throw std::invalid_argument("layer_norm of an empty vector");
  }
  if (scale.size() != v.size() || shift.size() != v.size()) {
    throw std::invalid_argument("layer_norm scale/shift shape mismatch");
  }
  const double mean = v.mean();
  const double var =
      (v.array() - mean).square().sum() / static_cast<double>(v.size());
  const double inv_std = 1.0 / std::sqrt(var + epsilon);
  return (((v.array() - mean) * inv_std) * scale.array() + shift.array())
      .matrix();
}

Eigen::MatrixXd multi_head_attention(
    const Eigen::MatrixXd& hidden,
    const std::vector<std::int32_t>& attention_mask, int batch_size,
    int seq_len, const LayerParams& layer, const EncoderConfig& config,
    std::vector<Eigen::MatrixXd>* attention_probs) {
  if (hidden.rows() != static_cast<Eigen::Index>(batch_size) * seq_len ||
      hidden.cols() != config.hidden_size) {
    throw std::invalid_argument("attention input shape mismatch");
  }
  if (attention_mask.size() != static_cast<std::size_t>(hidden.rows())) {
    throw std::invalid_argument("attention mask shape mismatch");
  }
  return attention_core(hidden, attention_mask, batch_size, seq_len, layer,
                        config, nullptr, attention_probs, nullptr);
}

Eigen::MatrixXd forward(const ModelParams& params, const Batch& batch,
                        RunMode mode, ForwardCache* cache,
                        std::mt19937_64* dropout_rng) {
  const EncoderConfig& config = params.config;
  config.validate();
  validate_batch(config, batch);

  const bool use_dropout =
      mode == RunMode::train && config.dropout_rate > 0.0;
  if (use_dropout && dropout_rng == nullptr) {
    throw std::invalid_argument(
        "train-mode dropout requires a dropout RNG stream");
  }
  const double rate = config.dropout_rate;
  const int b_sz = batch.batch_size;
  const int t_len = batch.seq_len;
  const Eigen::Index rows = static_cast<Eigen::Index>(b_sz) * t_len;
  const int h_dim = config.hidden_size;

  if (cache) {
    cache->batch = batch;
    cache->layers.assign(static_cast<std::size_t>(config.num_layers),
                         LayerCache{});
    cache->embed_drop_mask.resize(0, 0);
  }

  Eigen::MatrixXd h(rows, h_dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int t = static_cast<int>(r % t_len);
    h.row(r) = params.token_embeddings.row(batch.token_ids[r]) +
               params.position_embeddings.row(t) +
               params.segment_embeddings.row(batch.segment_ids[r]);
  }
  h = layer_norm_rows(h, params.ln_embed_scale, params.ln_embed_shift,
                      cache ? &cache->ln_embed : nullptr);
  if (use_dropout) {
    Eigen::MatrixXd mask = make_dropout_mask(rows, h_dim, rate, *dropout_rng);
    h = h.cwiseProduct(mask);
    if (cache) cache->embed_drop_mask = std::move(mask);
  }

  for (int l = 0; l < config.num_layers; ++l) {
    const LayerParams& layer = params.layers[l];
    LayerCache* lc = cache ? &cache->layers[l] : nullptr;
    if (lc) lc->input = h;

    std::vector<Eigen::MatrixXd> attn_drop;
    if (use_dropout) {
      attn_drop.reserve(static_cast<std::size_t>(b_sz) * config.num_heads);
      for (int i = 0; i < b_sz * config.num_heads; ++i) {
        attn_drop.push_back(
            make_dropout_mask(t_len, t_len, rate, *dropout_rng));
      }
    }
    Eigen::MatrixXd attn_out = attention_core(
        h, batch.attention_mask, b_sz, t_len, layer, config,
        use_dropout ? &attn_drop : nullptr, lc ? &lc->attn_probs : nullptr,
        lc);
    if (lc) lc->attn_drop_mask = std::move(attn_drop);

    if (use_dropout) {
      Eigen::MatrixXd mask =
          make_dropout_mask(rows, h_dim, rate, *dropout_rng);
      attn_out = attn_out.cwiseProduct(mask);
      if (lc) lc->attn_out_drop_mask = std::move(mask);
    }
    h = layer_norm_rows(h + attn_out, layer.ln_attn_scale,
                        layer.ln_attn_shift, lc ? &lc->ln_attn : nullptr);
    if (lc) lc->h_mid = h;

    Eigen::MatrixXd ffn_pre = h * layer.w_ff_in;
    ffn_pre.rowwise() += layer.b_ff_in.transpose();
    Eigen::MatrixXd ffn_act =
        ffn_pre.unaryExpr([](double x) { return gelu(x); });
    Eigen::MatrixXd ffn_out = ffn_act * layer.w_ff_out;
    ffn_out.rowwise() += layer.b_ff_out.transpose();
    if (lc) {
      lc->ffn_pre = std::move(ffn_pre);
      lc->ffn_act = std::move(ffn_act);
    }
    if (use_dropout) {
      Eigen::MatrixXd mask =
          make_dropout_mask(rows, h_dim, rate, *dropout_rng);
      ffn_out = ffn_out.cwiseProduct(mask);
      if (lc) lc->ffn_drop_mask = std::move(mask);
    }
    h = layer_norm_rows(h + ffn_out, layer.ln_ffn_scale, layer.ln_ffn_shift,
                        lc ? &lc->ln_ffn : nullptr);
  }

  Eigen::MatrixXd logits(b_sz, config.num_classes);
  for (int b = 0; b < b_sz; ++b) {
    logits.row(b) =
        h.row(static_cast<Eigen::Index>(b) * t_len) * params.w_classifier +
        params.b_classifier.transpose();
  }
  if (cache) {
    cache->final_hidden = std::move(h);
    cache->logits = logits;
  }
  return logits;
}

}  // namespace absa
