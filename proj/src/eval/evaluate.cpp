// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sts/eval/evaluate.hpp"

#include <algorithm>
#include <iostream>
#include <random>

#include "sts/error.hpp"
#include "sts/eval/yin.hpp"

namespace sts {

MetricReport evaluate_system(const StsModelF& model,
                             const std::vector<TrainSample>& test_set,
                             const EvalOptions& opts) {
  if (opts.num_samples < 1)
    throw ParamError("evaluate_system: sample count must be positive");
  opts.predict.stft.validate();

  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < test_set.size(); ++i)
    if (test_set[i].speech.duration_sec() >= opts.min_speech_sec)
      chosen.push_back(i);
  if (chosen.empty())
    throw ContractError("evaluate_system: no sample has enough speech");
  const auto wanted = static_cast<std::size_t>(opts.num_samples);
  if (chosen.size() > wanted) {
    std::mt19937 rng(opts.seed);
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(wanted);
    std::sort(chosen.begin(), chosen.end());
  } else if (chosen.size() < wanted) {
    std::ostream& sink = opts.warn ? *opts.warn : std::cerr;
    sink << "evaluate_system: only " << chosen.size() << " of the requested "
         << wanted << " samples have at least " << opts.min_speech_sec
         << " s of speech; using all of them\n";
  }

  YinConfig yin;
  yin.frame_len = opts.predict.stft.window_len;
  yin.hop = opts.predict.stft.hop;

  MetricReport report;
  for (const std::size_t idx : chosen) {
    const TrainSample& s = test_set[idx];
    const Waveform sung =
        opts.oracle_passthrough
            ? s.singing
            : predict(model, s.speech, s.contour, opts.predict);
    EvalRow row;
    row.sample_id =
        s.speaker_id + "/" + s.song_id + "#" + std::to_string(idx);
    row.speech_sec = s.speech.duration_sec();
    row.lsd_db = lsd(log_mag(stft(s.singing, opts.predict.stft)),
                     log_mag(stft(sung, opts.predict.stft)));
    row.rca = rca(s.contour, yin_f0(sung, yin));
    report.mean_lsd_db += row.lsd_db;
    report.mean_rca += row.rca;
    report.rows.push_back(std::move(row));
  }
  report.mean_lsd_db /= static_cast<double>(report.rows.size());
  report.mean_rca /= static_cast<double>(report.rows.size());
  return report;
}

}  // namespace sts
