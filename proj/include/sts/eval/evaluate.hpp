// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sts/data/samples.hpp"
#include "sts/eval/metrics.hpp"
#include "sts/synth/predict.hpp"

namespace sts {

struct EvalOptions {
  int num_samples = 100;        // requested evaluation set size
  unsigned seed = 0;            // seeds the sample selection
  double min_speech_sec = 1.0;  // eligibility cut on speech duration
  PredictConfig predict{};      // inference settings per sample
  bool oracle_passthrough = false;  // score the true singing instead of
                                    // running the model (metric ceiling)
  std::ostream* warn = nullptr;     // shortfall notes; nullptr -> stderr
};

struct EvalRow {
  std::string sample_id;  // speaker/song#index within the given set
  double speech_sec = 0.0;
  double lsd_db = 0.0;
  double rca = 0.0;
};

struct MetricReport {
  std::vector<EvalRow> rows;
  double mean_lsd_db = 0.0;
  double mean_rca = 0.0;
};

// Scores a model on a test set: seeded selection of num_samples samples
// with at least min_speech_sec of speech (when fewer qualify, all of them
// are used and a note goes to `warn`), conversion via predict, then per
// sample the log-spectral distance between predicted and true singing and
// the chroma accuracy of the prediction's detected pitch against the input
// contour. Rows keep corpus order; means are arithmetic over rows. With
// oracle_passthrough the true singing is scored instead, giving LSD 0.
// Throws ContractError when nothing is eligible, ParamError for
// num_samples < 1; per-sample stage errors propagate.
MetricReport evaluate_system(const StsModelF& model,
                             const std::vector<TrainSample>& test_set,
                             const EvalOptions& opts = {});

}  // namespace sts
