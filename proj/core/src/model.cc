// Copyright 2026 The regionptr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regionptr/model.h"

#include <cmath>
#include <ostream>
#include <sstream>

#include "regionptr/error.h"
#include "regionptr/nn/layers.h"
#include "regionptr/random.h"

namespace regionptr {
namespace {

using nn::Matrix;
using nn::Vector;

constexpr int kCheckpointFormat = 1;
constexpr const char* kGeometryOrder = "count,max_x,min_x,max_y,min_y";
constexpr const char* kGateOrder = "input,forget,cell,output";

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::size_t parse_size(const nn::Checkpoint& ck, const std::string& key) {
  const std::string& v = ck.field(key);
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw DataError("checkpoint field " + key + " is not an integer: " + v);
  }
}

void expect_field(const nn::Checkpoint& ck, const std::string& key,
                  const std::string& expected) {
  if (ck.field(key) != expected) {
    throw DataError("checkpoint " + key + " is '" + ck.field(key) +
                    "', this build expects '" + expected + "'");
  }
}

// Per-timestep state kept for the backward pass.
struct StepRecord {
  TokenId input = 0;
  TokenId target = 0;
  double alpha = 0;
  Vector h_top_prev;
  Vector word;
  Vector region;
  nn::StepCache lstm;
  Vector h_top;
  Vector dlogits;
};

// Teacher-forced forward over one sequence; backward when grad_scale > 0.
SequenceResult run_sequence(Captioner& model, const TrainingExample& example,
                            bool ablation, Rng* dropout_rng, double grad_scale) {
  const ModelConfig& cfg = model.config();
  validate_example(example, cfg);
  const auto& idx = model.index();
  nn::ParameterSet& params = model.parameters();
  const Matrix& out_w = params[idx.output_w].value;
  const auto out_b = params[idx.output_b].value.col(0);
  const auto E = static_cast<Eigen::Index>(cfg.embed_dim);
  const auto R = static_cast<Eigen::Index>(cfg.region_dim());
  const bool use_dropout = dropout_rng != nullptr && cfg.dropout > 0.0;
  const bool backward = grad_scale > 0.0;

  SequenceResult result;
  nn::LstmState state = model.init_state(example.full_image);
  std::vector<StepRecord> records;
  const std::size_t T = example.tokens.size() - 1;
  if (backward) records.reserve(T);

  std::size_t pointer = 0;
  double total = 0;
  for (std::size_t t = 1; t <= T; ++t) {
    const TokenId input = example.tokens[t - 1];
    const TokenId target = example.tokens[t];
    if (t > 1 && input == token::kNext) {
      pointer = std::min(pointer + 1, example.regions.size());
    }
    const RegionFeatureVector region =
        teacher_region(example, pointer, ablation, cfg.appearance_dim);

    const Vector& h_top_prev = state.back().h;
    const double alpha = model.gate(h_top_prev);
    Vector word = model.embed(input);

    // Dropout covers the word half of the input and the layer connection,
    // never the region half or the recurrences.
    nn::DropoutMasks masks;
    if (use_dropout) {
      masks.input = Vector::Ones(E + R);
      masks.input.head(E) = nn::dropout_mask(E, cfg.dropout, *dropout_rng);
      masks.between.push_back(nn::dropout_mask(
          static_cast<Eigen::Index>(cfg.hidden_dim), cfg.dropout, *dropout_rng));
    }
    const Vector input_vec = compose_input(alpha, word, region.values());

    nn::LstmState next;
    StepRecord rec;
    const Vector h_top = model.lstm().step(params, input_vec, state, next, masks,
                                           backward ? &rec.lstm : nullptr);
    const Vector logits = nn::linear(h_top, out_w, out_b);
    nn::CrossEntropy ce = nn::softmax_cross_entropy(logits, target);
    total += ce.loss;

    result.trace.push_back({t, pointer, pointer >= example.regions.size(),
                            alpha, input, target});
    if (backward) {
      rec.input = input;
      rec.target = target;
      rec.alpha = alpha;
      rec.h_top_prev = h_top_prev;
      rec.word = word;
      rec.region = region.values();
      rec.h_top = h_top;
      rec.dlogits = std::move(ce.dlogits);
      records.push_back(std::move(rec));
    }
    state = std::move(next);
  }
  result.loss = total / static_cast<double>(T);
  if (!backward) return result;

  // Each step's loss enters the mean with weight 1/T.
  const double scale = grad_scale / static_cast<double>(T);
  nn::LstmState dstate = model.lstm().zero_state();
  nn::Parameter& emb = params[idx.embedding];
  nn::Parameter& gate_w = params[idx.gate_w];
  nn::Parameter& gate_b = params[idx.gate_b];
  nn::Parameter& output_w = params[idx.output_w];
  nn::Parameter& output_b = params[idx.output_b];
  Vector dinput;
  for (std::size_t k = records.size(); k-- > 0;) {
    StepRecord& rec = records[k];
    const Vector dlogits = rec.dlogits * scale;
    Vector dh_top;
    auto db_out = output_b.grad.col(0);
    nn::linear_backward(rec.h_top, output_w.value, dlogits, &dh_top,
                        output_w.grad, db_out);
    model.lstm().step_backward(params, rec.lstm, dh_top, dstate, dinput);

    const auto d_word_part = dinput.head(E);
    const auto d_region_part = dinput.tail(R);
    // dinput is already taken w.r.t. the unmasked composed input.
    const double dalpha =
        d_word_part.dot(rec.word) - d_region_part.dot(rec.region);
    emb.grad.row(rec.input) += (rec.alpha * d_word_part).transpose();

    const double dpre = dalpha * rec.alpha * (1.0 - rec.alpha);
    gate_w.grad.col(0) += dpre * rec.h_top_prev;
    gate_b.grad(0, 0) += dpre;
    dstate.back().h += dpre * gate_w.value.col(0);
  }

  // Initial state came from the full-image projections.
  const auto H = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto L = static_cast<Eigen::Index>(kLstmLayers);
  Vector dh0(L * H);
  Vector dc0(L * H);
  for (Eigen::Index l = 0; l < L; ++l) {
    dh0.segment(l * H, H) = dstate[static_cast<std::size_t>(l)].h;
    dc0.segment(l * H, H) = dstate[static_cast<std::size_t>(l)].c;
  }
  const Vector& full = example.full_image.values();
  nn::Parameter& ih_w = params[idx.init_h_w];
  nn::Parameter& ih_b = params[idx.init_h_b];
  nn::Parameter& ic_w = params[idx.init_c_w];
  nn::Parameter& ic_b = params[idx.init_c_b];
  auto dih_b = ih_b.grad.col(0);
  auto dic_b = ic_b.grad.col(0);
  nn::linear_backward(full, ih_w.value, dh0, nullptr, ih_w.grad, dih_b);
  nn::linear_backward(full, ic_w.value, dc0, nullptr, ic_w.grad, dic_b);
  return result;
}

}  // namespace

void ModelConfig::validate() const {
  if (embed_dim == 0 || hidden_dim == 0 || appearance_dim == 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  if (vocab_size < static_cast<std::size_t>(token::kFirstWordId) + 1) {
    throw InvalidArgument("vocabulary must hold the reserved tokens and a word");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw InvalidArgument("dropout must be in [0, 1)");
  }
}

void write_trace(std::ostream& out, std::span<const TraceRecord> trace,
                 const Vocabulary* vocab) {
  auto tok = [&](TokenId id) -> std::string {
    if (vocab != nullptr && id >= 0 && static_cast<std::size_t>(id) < vocab->size()) {
      return vocab->word(id);
    }
    return std::to_string(id);
  };
  for (const auto& r : trace) {
    out << "t=" << r.step << " pointer=" << r.pointer
        << " empty=" << (r.empty_region ? 1 : 0)
        << " alpha=" << format_double(r.alpha) << " input=" << tok(r.input)
        << " output=" << tok(r.output) << '\n';
  }
}

Vector compose_input(double alpha, const Vector& word_emb,
                     const Vector& region) {
  Vector out(word_emb.size() + region.size());
  out.head(word_emb.size()) = alpha * word_emb;
  out.tail(region.size()) = (1.0 - alpha) * region;
  return out;
}

Captioner::Captioner(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  const auto V = static_cast<Eigen::Index>(config_.vocab_size);
  const auto E = static_cast<Eigen::Index>(config_.embed_dim);
  const auto H = static_cast<Eigen::Index>(config_.hidden_dim);
  const auto R = static_cast<Eigen::Index>(config_.region_dim());
  const auto L = static_cast<Eigen::Index>(kLstmLayers);
  using nn::Role;
  index_.embedding = params_.add("embedding", V, E, Role::kEmbedding);
  index_.gate_w = params_.add("gate.w", H, 1, Role::kWeight);
  index_.gate_b = params_.add("gate.b", 1, 1, Role::kBias);
  lstm_ = nn::LstmStack(params_, "lstm", E + R, H, kLstmLayers);
  index_.output_w = params_.add("output.w", H, V, Role::kWeight);
  index_.output_b = params_.add("output.b", V, 1, Role::kBias);
  index_.init_h_w = params_.add("init_h.w", R, L * H, Role::kWeight);
  index_.init_h_b = params_.add("init_h.b", L * H, 1, Role::kBias);
  index_.init_c_w = params_.add("init_c.w", R, L * H, Role::kWeight);
  index_.init_c_b = params_.add("init_c.b", L * H, 1, Role::kBias);
  nn::init_parameters(params_, seed);
}

nn::LstmState Captioner::init_state(const RegionFeatureVector& full_image) const {
  if (full_image.size() != config_.region_dim()) {
    throw InvalidArgument("full-image features have size " +
                          std::to_string(full_image.size()) + ", expected " +
                          std::to_string(config_.region_dim()));
  }
  const Vector h = nn::linear(full_image.values(), params_[index_.init_h_w].value,
                              params_[index_.init_h_b].value.col(0));
  const Vector c = nn::linear(full_image.values(), params_[index_.init_c_w].value,
                              params_[index_.init_c_b].value.col(0));
  const auto H = static_cast<Eigen::Index>(config_.hidden_dim);
  nn::LstmState state(kLstmLayers);
  for (std::size_t l = 0; l < kLstmLayers; ++l) {
    state[l].h = h.segment(static_cast<Eigen::Index>(l) * H, H);
    state[l].c = c.segment(static_cast<Eigen::Index>(l) * H, H);
  }
  return state;
}

double Captioner::gate(const Vector& h_prev) const {
  const Matrix& w = params_[index_.gate_w].value;
  if (h_prev.size() != w.rows()) throw InvalidArgument("gate input size mismatch");
  return nn::sigmoid(h_prev.dot(w.col(0)) + params_[index_.gate_b].value(0, 0));
}

void Captioner::check_token(TokenId token) const {
  if (token < 0 || static_cast<std::size_t>(token) >= config_.vocab_size) {
    throw InvalidArgument("token id " + std::to_string(token) +
                          " outside vocabulary of " +
                          std::to_string(config_.vocab_size));
  }
}

Vector Captioner::embed(TokenId token) const {
  check_token(token);
  return params_[index_.embedding].value.row(token).transpose();
}

Captioner::Step Captioner::forward_step(const nn::LstmState& state,
                                        TokenId prev_token,
                                        const RegionFeatureVector& region) const {
  if (region.size() != config_.region_dim()) {
    throw InvalidArgument("region features have size " +
                          std::to_string(region.size()) + ", expected " +
                          std::to_string(config_.region_dim()));
  }
  lstm_.check_state(state);
  Step out;
  out.alpha = gate(state.back().h);
  const Vector input = compose_input(out.alpha, embed(prev_token), region.values());
  const Vector h_top = lstm_.step(params_, input, state, out.state);
  out.logits = nn::linear(h_top, params_[index_.output_w].value,
                          params_[index_.output_b].value.col(0));
  return out;
}

nn::Checkpoint Captioner::to_checkpoint(const nn::Optimizer* optimizer) const {
  nn::Checkpoint ck;
  ck.header["format"] = std::to_string(kCheckpointFormat);
  ck.header["appearance_dim"] = std::to_string(config_.appearance_dim);
  ck.header["embed_dim"] = std::to_string(config_.embed_dim);
  ck.header["hidden_dim"] = std::to_string(config_.hidden_dim);
  ck.header["vocab_size"] = std::to_string(config_.vocab_size);
  ck.header["layers"] = std::to_string(kLstmLayers);
  ck.header["geometry_order"] = kGeometryOrder;
  ck.header["box_count"] = "raw";
  ck.header["gate_order"] = kGateOrder;
  ck.header["alpha"] = "scalar";
  ck.header["alpha_input"] = "top_layer_hidden";
  ck.header["init_state_input"] = "full_image_appearance+geometry";
  ck.header["dropout"] = format_double(config_.dropout);
  for (const auto& p : params_) ck.arrays.emplace_back(p.name, p.value);

  const auto* adam = dynamic_cast<const nn::Adam*>(optimizer);
  if (adam != nullptr && adam->steps() > 0) {
    ck.header["optimizer_state"] = "adam";
    Matrix t(1, 1);
    t(0, 0) = static_cast<double>(adam->steps());
    ck.arrays.emplace_back("adam.t", t);
    std::size_t k = 0;
    for (const auto& p : params_) {
      ck.arrays.emplace_back("adam.m/" + p.name, adam->first_moments()[k]);
      ck.arrays.emplace_back("adam.v/" + p.name, adam->second_moments()[k]);
      ++k;
    }
  } else {
    ck.header["optimizer_state"] = "none";
  }
  return ck;
}

Captioner Captioner::from_checkpoint(const nn::Checkpoint& ck) {
  if (ck.field("format") != std::to_string(kCheckpointFormat)) {
    throw DataError("unsupported checkpoint format " + ck.field("format"));
  }
  expect_field(ck, "geometry_order", kGeometryOrder);
  expect_field(ck, "gate_order", kGateOrder);
  expect_field(ck, "alpha", "scalar");
  expect_field(ck, "layers", std::to_string(kLstmLayers));
  ModelConfig cfg;
  cfg.appearance_dim = parse_size(ck, "appearance_dim");
  cfg.embed_dim = parse_size(ck, "embed_dim");
  cfg.hidden_dim = parse_size(ck, "hidden_dim");
  cfg.vocab_size = parse_size(ck, "vocab_size");
  cfg.dropout = std::stod(ck.field("dropout"));
  Captioner model(cfg, 0);
  for (auto& p : model.params_) {
    const Matrix& stored = ck.array(p.name);
    if (stored.rows() != p.value.rows() || stored.cols() != p.value.cols()) {
      throw DataError("checkpoint array '" + p.name + "' has the wrong shape");
    }
    p.value = stored;
  }
  return model;
}

void Captioner::restore_optimizer(const nn::Checkpoint& ck,
                                  nn::Optimizer& optimizer) const {
  auto* adam = dynamic_cast<nn::Adam*>(&optimizer);
  auto it = ck.header.find("optimizer_state");
  if (adam == nullptr || it == ck.header.end() || it->second != "adam") return;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  for (const auto& p : params_) {
    m.push_back(ck.array("adam.m/" + p.name));
    v.push_back(ck.array("adam.v/" + p.name));
  }
  adam->restore(std::move(m), std::move(v),
                static_cast<long>(ck.array("adam.t")(0, 0)));
}

void validate_example(const TrainingExample& example,
                      const ModelConfig& config) {
  const auto& tokens = example.tokens;
  if (tokens.size() < 2 || tokens.front() != token::kBos ||
      tokens.back() != token::kEos) {
    throw DataError("training sequence must start with BOS and end with EOS");
  }
  std::size_t nexts = 0;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const TokenId t = tokens[i];
    if (t < 0 || static_cast<std::size_t>(t) >= config.vocab_size) {
      throw DataError("token id " + std::to_string(t) + " outside vocabulary");
    }
    if (t == token::kBos) throw DataError("BOS inside a training sequence");
    if (t == token::kEos && i + 1 != tokens.size()) {
      throw DataError("EOS before the end of a training sequence");
    }
    if (t == token::kNext) ++nexts;
  }
  if (nexts != example.regions.size()) {
    throw DataError("sequence has " + std::to_string(nexts) +
                    " NEXT tokens but " + std::to_string(example.regions.size()) +
                    " regions");
  }
  for (const auto& r : example.regions) {
    if (r.size() != config.region_dim()) {
      throw DataError("region feature size mismatch");
    }
  }
  if (example.full_image.size() != config.region_dim()) {
    throw DataError("full-image feature size mismatch");
  }
}

RegionFeatureVector teacher_region(const TrainingExample& example,
                                   std::size_t pointer, bool ablation,
                                   std::size_t appearance_dim) {
  if (pointer >= example.regions.size()) return empty_region(appearance_dim);
  if (ablation) return ablation_pool(example.regions, appearance_dim);
  return example.regions[pointer];
}

SequenceResult sequence_loss(const Captioner& model,
                             const TrainingExample& example, bool ablation) {
  // run_sequence only mutates gradients, and only when grad_scale > 0.
  return run_sequence(const_cast<Captioner&>(model), example, ablation, nullptr,
                      0.0);
}

double train_step(Captioner& model, std::span<const TrainingExample> batch,
                  nn::Optimizer* optimizer, const TrainOptions& options,
                  std::uint64_t dropout_seed) {
  if (batch.empty()) throw InvalidArgument("train_step needs a non-empty batch");
  model.parameters().zero_grad();
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    Rng rng(derive_seed(dropout_seed, k));
    total += run_sequence(model, batch[k], options.ablation,
                          options.dropout ? &rng : nullptr, scale)
                 .loss;
  }
  const double loss = total * scale;
  if (!std::isfinite(loss)) throw NumericError("non-finite training loss");
  if (optimizer != nullptr) optimizer->step(model.parameters());
  return loss;
}

}  // namespace regionptr
