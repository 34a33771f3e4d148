// dino.cc

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

#include "dino.h"

#include <cmath>
#include <numbers>

namespace spkdino {

void DinoConfig::Validate() const {
  if (!(tau_s > 0.0 && tau_t_start > 0.0 && tau_t_end > 0.0))
    Fail(ErrorCode::kInvalidArgument, "temperatures must be positive");
  if (!(tau_t_start <= tau_t_end))
    Fail(ErrorCode::kInvalidArgument, "teacher temperature must not decrease");
  if (!(center_momentum > 0.0 && center_momentum < 1.0))
    Fail(ErrorCode::kInvalidArgument, "center momentum must be in (0, 1)");
  if (!(tau_t_warm_fraction >= 0.0 && tau_t_warm_fraction <= 1.0))
    Fail(ErrorCode::kInvalidArgument, "teacher temperature warm fraction must be in [0, 1]");
  if (!(lambda_start >= 0.0 && lambda_start <= 1.0 && lambda_end >= 0.0 && lambda_end <= 1.0))
    Fail(ErrorCode::kInvalidArgument, "EMA lambda must be in [0, 1]");
}

DinoState DinoState::Create(const DinoConfig& cfg, int k, int64_t total_steps) {
  cfg.Validate();
  DinoState s;
  s.config = cfg;
  s.center = Vector::Zero(k);
  s.total_steps = total_steps;
  return s;
}

double DinoState::TeacherTemperature() const {
  return LinearWarmSchedule(config.tau_t_start, config.tau_t_end, step,
                            WarmSteps(config.tau_t_warm_fraction, total_steps));
}

double DinoState::Lambda() const {
  return CosineSchedule(config.lambda_start, config.lambda_end, step, total_steps);
}

double CosineSchedule(double start, double end, int64_t step, int64_t total) {
  if (total <= 0 || step >= total) return end;
  if (step <= 0) return start;
  double frac = static_cast<double>(step) / static_cast<double>(total);
  return end + 0.5 * (start - end) * (1.0 + std::cos(std::numbers::pi * frac));
}

double LinearWarmSchedule(double start, double end, int64_t step, int64_t warm_steps) {
  if (warm_steps <= 0 || step >= warm_steps) return end;
  if (step <= 0) return start;
  return start + (end - start) * static_cast<double>(step) / static_cast<double>(warm_steps);
}

int64_t WarmSteps(double warm_fraction, int64_t total) {
  return static_cast<int64_t>(std::llround(warm_fraction * static_cast<double>(total)));
}

double ScheduleValue(ScheduleKind kind, int64_t step, int64_t total, const DinoConfig& dino,
                     double lr_start, double lr_end) {
  if (step < 0 || (total > 0 && step > total))
    Fail(ErrorCode::kInvalidArgument, "schedule step ", step, " outside [0, ", total, "]");
  switch (kind) {
    case ScheduleKind::kLambda:
      return CosineSchedule(dino.lambda_start, dino.lambda_end, step, total);
    case ScheduleKind::kLearningRate:
      return CosineSchedule(lr_start, lr_end, step, total);
    case ScheduleKind::kTeacherTemperature:
      return LinearWarmSchedule(dino.tau_t_start, dino.tau_t_end, step,
                                WarmSteps(dino.tau_t_warm_fraction, total));
  }
  return 0.0;
}

Vector Sharpen(const Vector& q, double tau) {
  if (!(tau > 0.0)) Fail(ErrorCode::kInvalidArgument, "temperature must be positive");
  Vector z = q / tau;
  Vector p = (z.array() - z.maxCoeff()).exp().matrix();
  return p / p.sum();
}

std::vector<Vector> CenterAndUpdate(DinoState* state, const std::vector<Vector>& teacher_qs) {
  if (teacher_qs.empty()) Fail(ErrorCode::kInvalidArgument, "empty teacher batch");
  if (!state->config.centering) return teacher_qs;
  std::vector<Vector> centered;
  centered.reserve(teacher_qs.size());
  Vector batch_mean = Vector::Zero(state->center.size());
  for (const auto& q : teacher_qs) {
    if (q.size() != state->center.size())
      Fail(ErrorCode::kInvalidArgument, "teacher output dim ", q.size(), " != center dim ",
           state->center.size());
    centered.push_back(q - state->center);
    batch_mean += q;
  }
  batch_mean /= static_cast<double>(teacher_qs.size());
  const double m = state->config.center_momentum;
  state->center = m * state->center + (1.0 - m) * batch_mean;
  return centered;
}

DinoLossResult DinoLoss(const ViewOutputs& outputs, double tau_t, double tau_s) {
  const int n_long = static_cast<int>(outputs.teacher_q.size());
  const int n_views = static_cast<int>(outputs.student_q.size());
  if (n_long < 1) Fail(ErrorCode::kInvalidArgument, "need at least one teacher view");
  if (n_views < 2 || n_views < n_long)
    Fail(ErrorCode::kInvalidArgument, "need L + M >= 2 student views covering the L long ones");

  DinoLossResult r;
  r.pairs = n_long * (n_views - 1);
  const double scale = 1.0 / r.pairs;
  std::vector<Vector> log_ps(n_views), ps(n_views);
  for (int j = 0; j < n_views; ++j) {
    Vector z = outputs.student_q[j] / tau_s;
    double lse = z.maxCoeff() + std::log((z.array() - z.maxCoeff()).exp().sum());
    log_ps[j] = z.array() - lse;
    ps[j] = log_ps[j].array().exp();
  }
  r.d_student_q.assign(n_views, Vector::Zero(outputs.student_q[0].size()));
  for (int i = 0; i < n_long; ++i) {
    Vector pt = Sharpen(outputs.teacher_q[i], tau_t);
    for (int j = 0; j < n_views; ++j) {
      if (j == i) continue;
      r.loss -= scale * pt.dot(log_ps[j]);
      // d/dz of -sum p_t log softmax(z) is softmax(z) - p_t, with z = q / tau_s.
      r.d_student_q[j] += (scale / tau_s) * (ps[j] - pt);
    }
    r.teacher_probs.push_back(std::move(pt));
  }
  return r;
}

void EmaUpdate(const ModelParams& student, ModelParams* teacher, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    Fail(ErrorCode::kInvalidArgument, "EMA lambda ", lambda, " outside [0, 1]");
  std::vector<const Matrix*> src;
  student.ForEach([&](const std::string&, const Matrix& m) { src.push_back(&m); });
  size_t i = 0;
  teacher->ForEach([&](const std::string& name, Matrix& m) {
    if (i >= src.size() || src[i]->rows() != m.rows() || src[i]->cols() != m.cols())
      Fail(ErrorCode::kInvalidArgument, "student/teacher shape mismatch at ", name);
    if (lambda != 1.0) m = lambda * m + (1.0 - lambda) * *src[i];
    ++i;
  });
  if (i != src.size()) Fail(ErrorCode::kInvalidArgument, "student/teacher layout mismatch");
}

double Entropy(const Vector& p) {
  double h = 0.0;
  for (long k = 0; k < p.size(); ++k)
    if (p(k) > 0.0) h -= p(k) * std::log(p(k));
  return h;
}

}  // namespace spkdino
