// dino.h

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

// Self-distillation objective: temperature softmax, teacher centering, the
// multi-crop cross-entropy, the EMA teacher update and training schedules.

#ifndef SPKDINO_DINO_H_
#define SPKDINO_DINO_H_

#include <cstdint>
#include <vector>

#include "common.h"
#include "net.h"

namespace spkdino {

struct DinoConfig {
  double tau_s = 0.1;
  double tau_t_start = 0.04;
  double tau_t_end = 0.07;
  double tau_t_warm_fraction = 0.2;  // of total steps
  double center_momentum = 0.9;
  double lambda_start = 0.996;
  double lambda_end = 1.0;
  bool centering = true;

  void Validate() const;
};

/// Mutable training-time state owned by the trainer.
struct DinoState {
  DinoConfig config;
  Vector center;  // K
  int64_t step = 0;
  int64_t total_steps = 0;

  static DinoState Create(const DinoConfig& cfg, int k, int64_t total_steps);
  double TeacherTemperature() const;
  double Lambda() const;
};

enum class ScheduleKind { kLambda, kLearningRate, kTeacherTemperature };

/// end + (start - end) * (1 + cos(pi * step / total)) / 2.
double CosineSchedule(double start, double end, int64_t step, int64_t total);

/// start + (end - start) * min(step / warm_steps, 1); exactly `end` once warm.
double LinearWarmSchedule(double start, double end, int64_t step, int64_t warm_steps);

/// Steps covered by the teacher temperature warm-up.
int64_t WarmSteps(double warm_fraction, int64_t total);

/// Evaluates the schedule of `kind` at `step`. Returns the end value when
/// total is 0.
double ScheduleValue(ScheduleKind kind, int64_t step, int64_t total, const DinoConfig& dino,
                     double lr_start, double lr_end);

/// softmax(q / tau) with max subtraction.
Vector Sharpen(const Vector& q, double tau);

/// Returns q - c for every teacher vector using the current center, then moves
/// c <- m c + (1 - m) mean(raw teacher vectors). With centering disabled the
/// vectors pass through unchanged and c is left alone.
std::vector<Vector> CenterAndUpdate(DinoState* state, const std::vector<Vector>& teacher_qs);

/// Projections of one utterance: teacher sees the L long views, the student
/// sees all L + M views with the long ones first.
struct ViewOutputs {
  std::vector<Vector> teacher_q;  // already centered
  std::vector<Vector> student_q;
};

struct DinoLossResult {
  double loss = 0.0;
  int pairs = 0;
  std::vector<Vector> d_student_q;
  std::vector<Vector> teacher_probs;
};

/// (1 / (L (L + M - 1))) sum_i sum_{j != i} H(p_t^i, p_s^j). Gradients flow
/// only into the student projections.
DinoLossResult DinoLoss(const ViewOutputs& outputs, double tau_t, double tau_s);

/// teacher <- lambda teacher + (1 - lambda) student, tensor by tensor.
void EmaUpdate(const ModelParams& student, ModelParams* teacher, double lambda);

double Entropy(const Vector& p);

}  // namespace spkdino

#endif  // SPKDINO_DINO_H_
