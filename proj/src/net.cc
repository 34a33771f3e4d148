// net.cc

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

#include "net.h"

#include <cmath>
#include <cstring>
#include <numbers>

namespace spkdino {

namespace {

double Gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double GeluGrad(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

void FillUniform(Matrix* m, double bound, Rng& rng) {
  for (long i = 0; i < m->size(); ++i) m->data()[i] = UniformIn(rng, -bound, bound);
}

Linear MakeLinear(int in, int out, double gain, Rng& rng) {
  Linear l;
  l.weight.resize(out, in);
  FillUniform(&l.weight, std::sqrt(gain / in), rng);
  l.bias = Matrix::Zero(out, 1);
  return l;
}

void CheckFinite(const Vector& v, const char* what) {
  if (!v.allFinite()) Fail(ErrorCode::kNumeric, "non-finite ", what);
}

}  // namespace

int ModelDims::ReceptiveField() const {
  int rf = 1;
  for (const auto& s : tdnn) rf += (s.kernel - 1) * s.dilation;
  return rf;
}

void ModelDims::Validate() const {
  if (feat_dim < 1 || channels < 1 || embed_dim < 1)
    Fail(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  if (tdnn.empty()) Fail(ErrorCode::kInvalidArgument, "encoder needs at least one layer");
  for (const auto& s : tdnn)
    if (s.kernel < 1 || s.dilation < 1)
      Fail(ErrorCode::kInvalidArgument, "time-delay kernel and dilation must be >= 1");
  if (head_layers < 0 || head_hidden < 1 || bottleneck < 1 || k < 2)
    Fail(ErrorCode::kInvalidArgument, "invalid projection head dimensions");
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams z = *this;
  z.ForEach([](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

size_t ModelParams::NumParameters() const {
  size_t n = 0;
  ForEach([&n](const std::string&, const Matrix& m) { n += static_cast<size_t>(m.size()); });
  return n;
}

bool ModelParams::AllFinite() const {
  bool ok = true;
  ForEach([&ok](const std::string&, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

ModelParams InitModel(const ModelDims& dims, uint64_t seed, bool with_head) {
  dims.Validate();
  Rng rng(seed);
  ModelParams p;
  int in = dims.feat_dim;
  for (const auto& s : dims.tdnn) {
    TdnnLayer layer;
    layer.kernel = s.kernel;
    layer.dilation = s.dilation;
    layer.weight.resize(s.kernel * in, dims.channels);
    FillUniform(&layer.weight, std::sqrt(6.0 / (s.kernel * in)), rng);
    layer.bias = Matrix::Zero(1, dims.channels);
    p.encoder.push_back(std::move(layer));
    in = dims.channels;
  }
  p.embed = MakeLinear(2 * dims.channels, dims.embed_dim, 3.0, rng);
  if (with_head) {
    int width = dims.embed_dim;
    for (int i = 0; i < dims.head_layers; ++i) {
      p.hidden.push_back(MakeLinear(width, dims.head_hidden, 6.0, rng));
      width = dims.head_hidden;
    }
    p.bottleneck = MakeLinear(width, dims.bottleneck, 3.0, rng);
    p.prototypes.resize(dims.k, dims.bottleneck);
    FillUniform(&p.prototypes, 1.0, rng);
  }
  return p;
}

namespace {

// Per-column mean and standard deviation of the rows of `pre` (samples x units).
void ColumnMoments(const Matrix& pre, Vector* mean, Vector* sd) {
  const double n = static_cast<double>(pre.rows());
  *mean = pre.colwise().sum().transpose() / n;
  Matrix centered = pre.rowwise() - mean->transpose();
  *sd = (centered.array().square().colwise().sum().transpose() / n).sqrt().matrix();
}

constexpr double kInitMinStd = 1e-8;

// Units are columns of the weight (time-delay layers).
void StandardizeColumns(const Matrix& pre, Matrix* weight, Matrix* bias) {
  Vector mean, sd;
  ColumnMoments(pre, &mean, &sd);
  for (long u = 0; u < weight->cols(); ++u) {
    const double scale = sd(u) > kInitMinStd ? 1.0 / sd(u) : 1.0;
    weight->col(u) *= scale;
    (*bias)(0, u) = ((*bias)(0, u) - mean(u)) * scale;
  }
}

// Units are rows of the weight (linear layers).
void StandardizeRows(const Matrix& pre, Linear* layer) {
  Vector mean, sd;
  ColumnMoments(pre, &mean, &sd);
  for (long u = 0; u < layer->weight.rows(); ++u) {
    const double scale = sd(u) > kInitMinStd ? 1.0 / sd(u) : 1.0;
    layer->weight.row(u) *= scale;
    layer->bias(u, 0) = (layer->bias(u, 0) - mean(u)) * scale;
  }
}

Matrix StackRows(const std::vector<Vector>& rows) {
  Matrix m(static_cast<long>(rows.size()), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<long>(i)) = rows[i].transpose();
  return m;
}

}  // namespace

void DataDependentInit(ModelParams* params, const std::vector<Matrix>& probe) {
  if (probe.size() < 2)
    Fail(ErrorCode::kInvalidArgument, "data-dependent init needs at least 2 probe sequences");
  for (size_t l = 0; l < params->encoder.size(); ++l) {
    TdnnLayer& layer = params->encoder[l];
    std::vector<Matrix> pres;
    long rows = 0;
    for (const auto& x : probe) {
      EncoderCache cache;
      Encode(*params, x, &cache);
      pres.push_back(cache.unfolded[l] * layer.weight);
      pres.back().rowwise() += layer.bias.row(0);
      rows += pres.back().rows();
    }
    Matrix all(rows, layer.weight.cols());
    long at = 0;
    for (const auto& p : pres) {
      all.middleRows(at, p.rows()) = p;
      at += p.rows();
    }
    StandardizeColumns(all, &layer.weight, &layer.bias);
  }
  std::vector<Vector> embeddings;
  for (const auto& x : probe) embeddings.push_back(Encode(*params, x));
  StandardizeRows(StackRows(embeddings), &params->embed);
  if (!params->has_head()) return;
  for (size_t j = 0; j < probe.size(); ++j) embeddings[j] = Encode(*params, probe[j]);
  for (size_t i = 0; i <= params->hidden.size(); ++i) {
    std::vector<Vector> pre;
    for (const auto& e : embeddings) {
      HeadCache cache;
      Project(*params, e, &cache);
      pre.push_back(i < params->hidden.size() ? cache.pre[i] : cache.bottleneck);
    }
    StandardizeRows(StackRows(pre), i < params->hidden.size() ? &params->hidden[i]
                                                             : &params->bottleneck);
  }
}

ModelDims DimsOf(const ModelParams& params) {
  ModelDims d;
  if (params.encoder.empty()) Fail(ErrorCode::kInvalidArgument, "model has no encoder");
  d.tdnn.clear();
  for (const auto& l : params.encoder) d.tdnn.push_back({l.kernel, l.dilation});
  d.feat_dim = static_cast<int>(params.encoder[0].weight.rows()) / params.encoder[0].kernel;
  d.channels = static_cast<int>(params.encoder[0].weight.cols());
  d.embed_dim = static_cast<int>(params.embed.weight.rows());
  d.head_layers = static_cast<int>(params.hidden.size());
  if (params.has_head()) {
    if (!params.hidden.empty()) d.head_hidden = static_cast<int>(params.hidden[0].weight.rows());
    d.bottleneck = static_cast<int>(params.prototypes.cols());
    d.k = static_cast<int>(params.prototypes.rows());
  }
  return d;
}

Matrix NormalizeRows(const Matrix& v) {
  Matrix out = v;
  for (long r = 0; r < v.rows(); ++r) out.row(r) /= std::max(v.row(r).norm(), kNormEpsilon);
  return out;
}

Vector Encode(const ModelParams& params, const Matrix& feats, EncoderCache* cache) {
  if (params.encoder.empty()) Fail(ErrorCode::kInvalidArgument, "model has no encoder");
  int rf = 1;
  for (const auto& l : params.encoder) rf += (l.kernel - 1) * l.dilation;
  if (feats.rows() < rf)
    Fail(ErrorCode::kInvalidArgument, "encoder needs at least ", rf, " frames, got ",
         feats.rows());
  const long in_dim = params.encoder[0].weight.rows() / params.encoder[0].kernel;
  if (feats.cols() != in_dim)
    Fail(ErrorCode::kInvalidArgument, "feature dim ", feats.cols(), " != model input ", in_dim);

  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  c.unfolded.resize(params.encoder.size());
  c.outputs.resize(params.encoder.size());
  const Matrix* x = &feats;
  for (size_t l = 0; l < params.encoder.size(); ++l) {
    const TdnnLayer& layer = params.encoder[l];
    const long c_in = x->cols();
    const long t_out = x->rows() - static_cast<long>(layer.kernel - 1) * layer.dilation;
    Matrix& u = c.unfolded[l];
    u.resize(t_out, layer.kernel * c_in);
    for (int j = 0; j < layer.kernel; ++j)
      u.block(0, j * c_in, t_out, c_in) = x->middleRows(static_cast<long>(j) * layer.dilation, t_out);
    Matrix& y = c.outputs[l];
    y.noalias() = u * layer.weight;
    y.rowwise() += layer.bias.row(0);
    y = y.cwiseMax(0.0);
    x = &y;
  }
  const Matrix& h = *x;
  const double t = static_cast<double>(h.rows());
  c.mean = h.colwise().sum().transpose() / t;
  Matrix centered = h.rowwise() - c.mean.transpose();
  c.stddev = ((centered.array().square().colwise().sum().transpose() / t) + kPoolingEpsilon)
                 .sqrt()
                 .matrix();
  c.pooled.resize(2 * h.cols());
  c.pooled << c.mean, c.stddev;
  Vector e = params.embed.weight * c.pooled + params.embed.bias.col(0);
  return e;
}

Vector Project(const ModelParams& params, const Vector& embedding, HeadCache* cache) {
  if (!params.has_head()) Fail(ErrorCode::kInvalidArgument, "model has no projection head");
  HeadCache local;
  HeadCache& c = cache ? *cache : local;
  c.inputs.resize(params.hidden.size());
  c.pre.resize(params.hidden.size());
  Vector x = embedding;
  for (size_t i = 0; i < params.hidden.size(); ++i) {
    c.inputs[i] = x;
    c.pre[i] = params.hidden[i].weight * x + params.hidden[i].bias.col(0);
    x = c.pre[i].unaryExpr([](double v) { return Gelu(v); });
  }
  c.bottleneck_in = x;
  c.bottleneck = params.bottleneck.weight * x + params.bottleneck.bias.col(0);
  c.norm = std::max(c.bottleneck.norm(), kNormEpsilon);
  c.unit = c.bottleneck / c.norm;
  c.directions = NormalizeRows(params.prototypes);
  c.q = c.directions * c.unit;
  return c.q;
}

ForwardPass Forward(const ModelParams& params, const Matrix& feats) {
  ForwardPass pass;
  pass.embedding = Encode(params, feats, &pass.encoder);
  pass.q = Project(params, pass.embedding, &pass.head);
  return pass;
}

Vector BackwardHead(const ModelParams& params, const HeadCache& c, const Vector& d_q,
                    Gradients* grads) {
  CheckFinite(d_q, "upstream gradient");
  // q_k = <v_k / |v_k|, u>
  Vector d_unit = c.directions.transpose() * d_q;
  for (long k = 0; k < params.prototypes.rows(); ++k) {
    double vnorm = std::max(params.prototypes.row(k).norm(), kNormEpsilon);
    double coef = d_q(k) / vnorm;
    if (coef == 0.0) continue;
    grads->prototypes.row(k) +=
        coef * (c.unit.transpose() - c.q(k) * c.directions.row(k));
  }
  Vector d_y;
  if (c.bottleneck.norm() > kNormEpsilon)
    d_y = (d_unit - c.unit * c.unit.dot(d_unit)) / c.norm;
  else
    d_y = d_unit / kNormEpsilon;
  grads->bottleneck.weight.noalias() += d_y * c.bottleneck_in.transpose();
  grads->bottleneck.bias.col(0) += d_y;
  Vector d_x = params.bottleneck.weight.transpose() * d_y;
  for (size_t i = params.hidden.size(); i-- > 0;) {
    Vector d_pre = d_x.cwiseProduct(c.pre[i].unaryExpr([](double v) { return GeluGrad(v); }));
    grads->hidden[i].weight.noalias() += d_pre * c.inputs[i].transpose();
    grads->hidden[i].bias.col(0) += d_pre;
    d_x = params.hidden[i].weight.transpose() * d_pre;
  }
  return d_x;
}

void BackwardEncoder(const ModelParams& params, const EncoderCache& c, const Vector& d_embedding,
                     Gradients* grads) {
  CheckFinite(d_embedding, "upstream gradient");
  grads->embed.weight.noalias() += d_embedding * c.pooled.transpose();
  grads->embed.bias.col(0) += d_embedding;
  Vector d_pooled = params.embed.weight.transpose() * d_embedding;
  const long ch = c.mean.size();
  const Matrix& h = c.outputs.back();
  const double t = static_cast<double>(h.rows());

  // d/dh of mean and of sqrt(var + eps); the mean's effect on var cancels.
  Vector d_mean = d_pooled.head(ch) / t;
  Vector d_std_scaled = (d_pooled.tail(ch).array() / (t * c.stddev.array())).matrix();
  Matrix d_out = (h.rowwise() - c.mean.transpose());
  d_out.array().rowwise() *= d_std_scaled.transpose().array();
  d_out.rowwise() += d_mean.transpose();

  for (size_t l = params.encoder.size(); l-- > 0;) {
    const TdnnLayer& layer = params.encoder[l];
    const Matrix& y = c.outputs[l];
    Matrix d_pre = (y.array() > 0.0).select(d_out, 0.0);
    grads->encoder[l].weight.noalias() += c.unfolded[l].transpose() * d_pre;
    grads->encoder[l].bias.row(0) += d_pre.colwise().sum();
    if (l == 0) break;
    Matrix d_unf = d_pre * layer.weight.transpose();
    const long c_in = c.outputs[l - 1].cols();
    const long t_out = d_pre.rows();
    Matrix d_in = Matrix::Zero(c.outputs[l - 1].rows(), c_in);
    for (int j = 0; j < layer.kernel; ++j)
      d_in.middleRows(static_cast<long>(j) * layer.dilation, t_out) +=
          d_unf.block(0, j * c_in, t_out, c_in);
    d_out = std::move(d_in);
  }
}

void Backward(const ModelParams& params, const ForwardPass& pass, const Vector& d_q,
              Gradients* grads) {
  Vector d_e = BackwardHead(params, pass.head, d_q, grads);
  BackwardEncoder(params, pass.encoder, d_e, grads);
}

void AamConfig::Validate() const {
  if (!(margin >= 0.0 && margin <= 0.5))
    Fail(ErrorCode::kInvalidArgument, "AAM margin ", margin, " outside [0, 0.5]");
  if (!(scale > 0.0)) Fail(ErrorCode::kInvalidArgument, "AAM scale must be > 0");
  if (n_classes < 2) Fail(ErrorCode::kInvalidArgument, "AAM needs at least 2 classes");
}

AamResult AamLoss(const Vector& embedding, int label, const Matrix& prototypes,
                  const AamConfig& cfg) {
  cfg.Validate();
  if (label < 0 || label >= cfg.n_classes)
    Fail(ErrorCode::kInvalidArgument, "label ", label, " outside [0, ", cfg.n_classes, ")");
  if (prototypes.rows() != cfg.n_classes || prototypes.cols() != embedding.size())
    Fail(ErrorCode::kInvalidArgument, "prototype matrix shape mismatch");

  const double enorm = std::max(embedding.norm(), kNormEpsilon);
  const Vector e_hat = embedding / enorm;
  const Matrix p_hat = NormalizeRows(prototypes);
  const Vector cosine = p_hat * e_hat;

  const double cos_m = std::cos(cfg.margin), sin_m = std::sin(cfg.margin);
  const double threshold = std::cos(std::numbers::pi - cfg.margin);
  const double fallback = std::sin(std::numbers::pi - cfg.margin) * cfg.margin;
  const double c = std::clamp(cosine(label), -1.0, 1.0);
  const double sine = std::sqrt(std::max(0.0, 1.0 - c * c));
  double target, d_target;
  if (c > threshold) {
    // cos(theta + m)
    target = c * cos_m - sine * sin_m;
    d_target = sine > 1e-12 ? cos_m + sin_m * c / sine : cos_m;
  } else {
    target = c - fallback;
    d_target = 1.0;
  }

  AamResult r;
  r.logits = cfg.scale * cosine;
  r.logits(label) = cfg.scale * target;
  const double max_logit = r.logits.maxCoeff();
  Vector prob = (r.logits.array() - max_logit).exp().matrix();
  const double z = prob.sum();
  prob /= z;
  r.loss = -(r.logits(label) - max_logit - std::log(z));

  Vector d_logits = prob;
  d_logits(label) -= 1.0;
  Vector d_cos = cfg.scale * d_logits;
  d_cos(label) *= d_target;

  Vector d_ehat = p_hat.transpose() * d_cos;
  r.d_embedding = (d_ehat - e_hat * e_hat.dot(d_ehat)) / enorm;
  r.d_prototypes.resize(prototypes.rows(), prototypes.cols());
  for (long j = 0; j < prototypes.rows(); ++j) {
    double vnorm = std::max(prototypes.row(j).norm(), kNormEpsilon);
    r.d_prototypes.row(j) =
        d_cos(j) * (e_hat.transpose() - cosine(j) * p_hat.row(j)) / vnorm;
  }
  return r;
}

void AddWeightDecay(const ModelParams& params, double decay, Gradients* grads) {
  if (decay == 0.0) return;
  std::vector<const Matrix*> src;
  params.ForEach([&](const std::string&, const Matrix& m) { src.push_back(&m); });
  size_t i = 0;
  grads->ForEach([&](const std::string& name, Matrix& g) {
    if (i >= src.size() || src[i]->rows() != g.rows() || src[i]->cols() != g.cols())
      Fail(ErrorCode::kInvalidArgument, "parameter/gradient shape mismatch at ", name);
    if (!name.ends_with(".bias")) g += decay * *src[i];
    ++i;
  });
}

void SgdStep(ModelParams* params, const Gradients& grads, double lr, Gradients* velocity,
             double momentum) {
  std::vector<const Matrix*> g_list, v_list;
  grads.ForEach([&](const std::string&, const Matrix& m) { g_list.push_back(&m); });
  std::vector<Matrix*> p_list, vel_list;
  params->ForEach([&](const std::string&, Matrix& m) { p_list.push_back(&m); });
  velocity->ForEach([&](const std::string&, Matrix& m) { vel_list.push_back(&m); });
  if (g_list.size() != p_list.size() || vel_list.size() != p_list.size())
    Fail(ErrorCode::kInvalidArgument, "parameter/gradient layout mismatch");
  for (size_t i = 0; i < p_list.size(); ++i) {
    if (g_list[i]->rows() != p_list[i]->rows() || g_list[i]->cols() != p_list[i]->cols() ||
        vel_list[i]->rows() != p_list[i]->rows() || vel_list[i]->cols() != p_list[i]->cols())
      Fail(ErrorCode::kInvalidArgument, "parameter/gradient shape mismatch");
  }
  // Validate first so a failing step leaves everything untouched.
  for (size_t i = 0; i < p_list.size(); ++i) {
    Matrix v = momentum * *vel_list[i] + *g_list[i];
    if (!v.allFinite() || !(*p_list[i] - lr * v).allFinite())
      Fail(ErrorCode::kNumeric, "non-finite parameter update");
  }
  for (size_t i = 0; i < p_list.size(); ++i) {
    *vel_list[i] = momentum * *vel_list[i] + *g_list[i];
    *p_list[i] -= lr * *vel_list[i];
  }
}

uint64_t ParamHash(const ModelParams& params) {
  uint64_t h = 1469598103934665603ull;
  params.ForEach([&h](const std::string& name, const Matrix& m) {
    for (unsigned char ch : name) h = (h ^ ch) * 1099511628211ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    for (size_t i = 0; i < static_cast<size_t>(m.size()) * sizeof(double); ++i)
      h = (h ^ bytes[i]) * 1099511628211ull;
  });
  return h;
}

}  // namespace spkdino
