// net.h

// Copyright 2026  spkdino authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Speaker embedding extractor and projection head with hand-written reverse
// mode gradients.
//
//   features (T x D)
//     -> time-delay layers (dilated 1-D convolutions, ReLU)
//     -> statistics pooling [mean; sqrt(var + 1e-8)]
//     -> linear embedding e                                  (extractor g)
//     -> GELU hidden layers -> linear bottleneck -> l2 norm
//     -> weight-normalised prototypes, unit-norm rows -> q   (head h)
//
// Fine-tuned models drop the head and carry an angular-margin classifier
// (`aam`) on top of e instead.

#ifndef SPKDINO_NET_H_
#define SPKDINO_NET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "common.h"

namespace spkdino {

struct TdnnSpec {
  int kernel = 1;
  int dilation = 1;
};

struct ModelDims {
  int feat_dim = 40;
  int channels = 64;
  std::vector<TdnnSpec> tdnn{{5, 1}, {3, 2}, {3, 3}};
  int embed_dim = 32;
  int head_hidden = 128;
  int head_layers = 2;
  int bottleneck = 32;
  int k = 256;

  /// Minimum number of input frames the encoder accepts.
  int ReceptiveField() const;
  void Validate() const;
};

inline constexpr double kPoolingEpsilon = 1e-8;
inline constexpr double kNormEpsilon = 1e-12;

struct TdnnLayer {
  int kernel = 1;
  int dilation = 1;
  Matrix weight;  // (kernel * in) x out; block j multiplies frame t + j * dilation
  Matrix bias;    // 1 x out
};

struct Linear {
  Matrix weight;  // out x in
  Matrix bias;    // out x 1
};

struct ModelParams {
  std::vector<TdnnLayer> encoder;
  Linear embed;
  std::vector<Linear> hidden;
  Linear bottleneck;
  Matrix prototypes;  // K x bottleneck, direction parameters of the last layer
  Matrix aam;         // n_classes x embed_dim, direction parameters

  bool has_head() const { return prototypes.size() > 0; }
  bool has_aam() const { return aam.size() > 0; }

  /// Visits every tensor as f(name, matrix) in a fixed order.
  template <typename F>
  void ForEach(F&& f) {
    for (size_t i = 0; i < encoder.size(); ++i) {
      f("encoder." + std::to_string(i) + ".weight", encoder[i].weight);
      f("encoder." + std::to_string(i) + ".bias", encoder[i].bias);
    }
    f(std::string("embed.weight"), embed.weight);
    f(std::string("embed.bias"), embed.bias);
    if (has_head()) {
      for (size_t i = 0; i < hidden.size(); ++i) {
        f("head.hidden." + std::to_string(i) + ".weight", hidden[i].weight);
        f("head.hidden." + std::to_string(i) + ".bias", hidden[i].bias);
      }
      f(std::string("head.bottleneck.weight"), bottleneck.weight);
      f(std::string("head.bottleneck.bias"), bottleneck.bias);
      f(std::string("head.prototypes"), prototypes);
    }
    if (has_aam()) f(std::string("aam.prototypes"), aam);
  }
  template <typename F>
  void ForEach(F&& f) const {
    const_cast<ModelParams*>(this)->ForEach(
        [&f](const std::string& name, Matrix& m) { f(name, static_cast<const Matrix&>(m)); });
  }

  ModelParams ZerosLike() const;
  size_t NumParameters() const;
  bool AllFinite() const;
};

/// Same layout as ModelParams.
using Gradients = ModelParams;

/// Seeded uniform fan-in initialisation; biases start at zero.
ModelParams InitModel(const ModelDims& dims, uint64_t seed, bool with_head = true);

/// Data-dependent initialisation in the manner of weight normalisation:
/// layer by layer, rescales each unit and shifts its bias so that its
/// pre-activation has zero mean and unit variance over the probe sequences.
/// Units that are constant over the probe are only centred. The prototypes
/// and the classifier are left alone.
void DataDependentInit(ModelParams* params, const std::vector<Matrix>& probe);

/// Recovers the layer dimensions from a parameter set.
ModelDims DimsOf(const ModelParams& params);

/// Rows scaled to unit norm (weight normalisation with a fixed gain of 1).
Matrix NormalizeRows(const Matrix& v);

struct EncoderCache {
  std::vector<Matrix> unfolded;  // per layer: T_out x (kernel * in)
  std::vector<Matrix> outputs;   // per layer: post-ReLU activations
  Vector mean, stddev;
  Vector pooled;
};

struct HeadCache {
  std::vector<Vector> inputs;  // input of each hidden layer
  std::vector<Vector> pre;     // pre-activation of each hidden layer
  Vector bottleneck_in;
  Vector bottleneck;           // before l2 normalisation
  double norm = 0.0;
  Vector unit;
  Matrix directions;           // normalised prototypes
  Vector q;
};

/// e = g(x). Throws if feats has fewer frames than the receptive field.
Vector Encode(const ModelParams& params, const Matrix& feats, EncoderCache* cache = nullptr);

/// q = h(e), no softmax.
Vector Project(const ModelParams& params, const Vector& embedding, HeadCache* cache = nullptr);

struct ForwardPass {
  EncoderCache encoder;
  HeadCache head;
  Vector embedding;
  Vector q;
};

ForwardPass Forward(const ModelParams& params, const Matrix& feats);

/// Accumulates dLoss/dparams into `grads` given dLoss/dq for one forward pass.
void Backward(const ModelParams& params, const ForwardPass& pass, const Vector& d_q,
              Gradients* grads);

/// Head-only and encoder-only halves of Backward.
Vector BackwardHead(const ModelParams& params, const HeadCache& cache, const Vector& d_q,
                    Gradients* grads);
void BackwardEncoder(const ModelParams& params, const EncoderCache& cache,
                     const Vector& d_embedding, Gradients* grads);

struct AamConfig {
  double margin = 0.2;
  double scale = 30.0;
  int n_classes = 0;

  void Validate() const;
};

struct AamResult {
  double loss = 0.0;
  Vector d_embedding;
  Matrix d_prototypes;  // gradient w.r.t. the direction parameters
  Vector logits;
};

/// Additive angular margin softmax cross-entropy on cos(theta_j + m [j = label])
/// with the cosine between the normalised embedding and normalised prototype
/// rows. `prototypes` are direction parameters (normalised internally).
AamResult AamLoss(const Vector& embedding, int label, const Matrix& prototypes,
                  const AamConfig& cfg);

/// g += decay * p for every weight tensor; biases are left alone.
void AddWeightDecay(const ModelParams& params, double decay, Gradients* grads);

/// v <- momentum * v + g; p <- p - lr * v. Throws Error(kNumeric) without
/// touching params if the update would be non-finite.
void SgdStep(ModelParams* params, const Gradients& grads, double lr, Gradients* velocity,
             double momentum = 0.9);

/// FNV-1a over the raw parameter bytes, for cheap equality checks.
uint64_t ParamHash(const ModelParams& params);

}  // namespace spkdino

#endif  // SPKDINO_NET_H_
