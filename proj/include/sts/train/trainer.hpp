// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sts/data/batch.hpp"
#include "sts/data/samples.hpp"
#include "sts/error.hpp"
#include "sts/model/model.hpp"
#include "sts/tensor/checkpoint.hpp"
#include "sts/train/adam.hpp"
#include "sts/train/loss.hpp"

namespace sts {

// Everything one run needs. Defaults are the reference operating point:
// lambda 0.015, initial learning rate 0.002 decayed by 0.92 each epoch,
// 14 epochs of 1000 iterations at batch size 16.
struct TrainConfig {
  double lambda = 0.015;
  double lr0 = 0.002;
  double lr_decay = 0.92;
  int epochs = 14;
  int iters_per_epoch = 1000;
  int batch_size = 16;
  AdamConfig adam{};
  unsigned long long seed = 0;
  bool sum_mse = false;   // see LossOptions
  bool augment = true;    // random speech pitch shift in [-1, 1] semitones
  bool phsync = false;    // per-phone alignment instead of silence removal
  int max_frames = 0;     // cap on batch frames; 0 = uncapped
  StftConfig stft{};
  std::string out_dir;    // checkpoints + CSV log; empty = keep in memory

  void validate() const {
    if (lambda < 0) throw ParamError("TrainConfig: lambda must be >= 0");
    if (lr0 <= 0) throw ParamError("TrainConfig: lr0 must be positive");
    if (lr_decay <= 0 || lr_decay > 1)
      throw ParamError("TrainConfig: lr_decay must lie in (0, 1]");
    if (epochs <= 0 || iters_per_epoch <= 0 || batch_size <= 0)
      throw ParamError("TrainConfig: epochs/iterations/batch must be positive");
    if (max_frames < 0)
      throw ParamError("TrainConfig: max_frames must be >= 0");
  }
};

inline double lr_for_epoch(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(cfg.lr_decay, static_cast<double>(epoch));
}

struct IterationStats {
  int iter = 0;   // global iteration index
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0;  // batch means
  double mse = 0.0;
  double ce = 0.0;
};

struct TrainResult {
  std::vector<IterationStats> curve;           // one entry per iteration
  std::vector<std::string> checkpoint_paths;   // one per epoch
  std::string log_path;                        // empty when out_dir is empty
};

namespace detail {

inline std::string csv_row(const IterationStats& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.10g,%.10g", s.iter,
                s.epoch, s.lr, s.total, s.mse, s.ce);
  return buf;
}

}  // namespace detail

// Runs the optimization loop: per iteration draw a batch with replacement,
// optionally pitch-shift each speech take (targets untouched), run every
// sample through the model, average the losses, and take one Adam step at
// the epoch's learning rate. Checkpoints land in out_dir as epoch_{n}.ckpt
// next to train_log.csv. Aborts with diagnostics if the loss goes
// non-finite. Deterministic for a fixed seed.
template <typename S>
TrainResult train_loop(StsModel<S>& model, const std::vector<TrainSample>& data,
                       const TrainConfig& cfg, std::ostream* progress = nullptr) {
  cfg.validate();
  if (data.empty()) throw ContractError("train_loop: training set is empty");
  if (cfg.lambda > 0 && !model.flags().use_dp)
    throw ConfigError("train_loop: variant '" + model.variant() +
                      "' has no phoneme decoder; set lambda = 0");

  auto named = model.params();
  std::vector<Tensor<S>> params;
  params.reserve(named.size());
  for (auto& [name, t] : named) {
    t.set_requires_grad(true);
    params.push_back(t);
  }
  Adam<S> adam(params, cfg.adam);

  // Separate streams so toggling augmentation cannot shift batch selection.
  std::mt19937_64 pick_rng(cfg.seed);
  std::mt19937_64 aug_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::uniform_real_distribution<double> semitones(-1.0, 1.0);

  TrainResult result;
  std::ofstream log;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    result.log_path =
        (std::filesystem::path(cfg.out_dir) / "train_log.csv").string();
    log.open(result.log_path, std::ios::trunc);
    if (!log) throw IoError("train_loop: cannot write " + result.log_path);
    log << "iter,epoch,lr,total,mse,ce\n";
  }

  const LossOptions lopts{cfg.lambda, cfg.sum_mse};
  BatchOptions bopts;
  bopts.stft = cfg.stft;
  bopts.phsync = cfg.phsync;
  bopts.max_frames = cfg.max_frames;

  int global = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_for_epoch(cfg, epoch);
    for (int it = 0; it < cfg.iters_per_epoch; ++it, ++global) {
      std::vector<const TrainSample*> ptrs(
          static_cast<std::size_t>(cfg.batch_size));
      std::vector<double> shifts(static_cast<std::size_t>(cfg.batch_size));
      for (auto& p : ptrs) p = &data[pick(pick_rng)];
      for (auto& s : shifts) s = semitones(aug_rng);
      Batch batch = make_batch(ptrs, bopts, cfg.augment ? &shifts : nullptr);

      IterationStats stats;
      stats.iter = global;
      stats.epoch = epoch;
      stats.lr = lr;
      const int b_n = batch.batch_size();
      const S grad_seed = static_cast<S>(1.0 / b_n);
      for (int b = 0; b < b_n; ++b) {
        auto x_b = slice(batch.x, 0, b, 1);
        Tensor<S> c_b;
        if (model.flags().use_contour) c_b = slice(batch.c, 0, b, 1);
        auto out = model.forward(x_b, c_b);
        auto y_b = reshape(slice(batch.y, 0, b, 1),
                           {batch.y.dim(1), batch.y.dim(2)});
        auto loss = mtl_sample_loss(
            out.spectrogram, y_b,
            cfg.lambda > 0 ? out.phoneme_logits : Tensor<S>{},
            batch.frame_phones[static_cast<std::size_t>(b)],
            batch.lengths[static_cast<std::size_t>(b)], lopts);
        backward(loss.total, grad_seed);
        stats.total += loss.total_value / b_n;
        stats.mse += loss.mse / b_n;
        stats.ce += loss.ce / b_n;
      }

      if (!std::isfinite(stats.total)) {
        std::string ids;
        for (const auto* p : ptrs)
          ids += " " + p->speaker_id + "/" + p->song_id;
        throw ContractError("train_loop: non-finite loss at iteration " +
                            std::to_string(global) + " (epoch " +
                            std::to_string(epoch) + "); batch:" + ids);
      }

      adam.step(lr);
      adam.zero_grads();

      if (log.is_open()) log << detail::csv_row(stats) << "\n";
      result.curve.push_back(stats);
      if (progress && (it == 0 || (it + 1) % 100 == 0))
        *progress << "epoch " << epoch << " iter " << (it + 1) << "/"
                  << cfg.iters_per_epoch << " total " << stats.total
                  << " mse " << stats.mse << " ce " << stats.ce << "\n";
    }
    if (!cfg.out_dir.empty()) {
      const auto path = (std::filesystem::path(cfg.out_dir) /
                         ("epoch_" + std::to_string(epoch) + ".ckpt"))
                            .string();
      save_checkpoint(model.to_checkpoint(), path);
      result.checkpoint_paths.push_back(path);
    }
  }
  return result;
}

}  // namespace sts
