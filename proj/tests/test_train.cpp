// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sts/data/batch.hpp"
#include "sts/data/samples.hpp"
#include "sts/error.hpp"
#include "sts/model/model.hpp"
#include "sts/train/adam.hpp"
#include "sts/train/loss.hpp"
#include "sts/train/trainer.hpp"
#include "toy_corpus.hpp"

namespace fs = std::filesystem;

namespace {

using sts::Tensor;
using sts::TensorF;

TensorF random_tensor(std::vector<int> shape, unsigned seed, float lo = 0.0f,
                      float hi = 1.0f) {
  auto t = TensorF::zeros(shape);
  std::mt19937 g(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  for (auto& v : t.data()) v = d(g);
  return t;
}

std::vector<sts::TrainSample> toy_samples(const std::string& dirname) {
  const auto dir = tst::fresh_dir(dirname);
  tst::write_toy_song(dir, "spk1", "songA", 4);
  tst::write_toy_song(dir, "spk1", "songB", 4);
  auto corpus = sts::load_corpus(dir.string());
  auto samples = sts::generate_samples(corpus, sts::Split::Train, {});
  fs::remove_all(dir);
  return samples;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("the training config carries the reference operating point") {
  sts::TrainConfig cfg;
  CHECK(cfg.lambda == 0.015);
  CHECK(cfg.lr0 == 0.002);
  CHECK(cfg.lr_decay == 0.92);
  CHECK(cfg.epochs == 14);
  CHECK(cfg.iters_per_epoch == 1000);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.adam.beta1 == 0.9);
  CHECK(cfg.adam.beta2 == 0.999);
  CHECK(cfg.adam.eps == 1e-8);
  CHECK(cfg.augment);
  cfg.validate();

  auto bad = cfg;
  bad.lambda = -0.1;
  CHECK_THROWS_AS(bad.validate(), sts::ParamError);
  bad = cfg;
  bad.lr_decay = 0.0;
  CHECK_THROWS_AS(bad.validate(), sts::ParamError);
  bad = cfg;
  bad.lr_decay = 1.5;
  CHECK_THROWS_AS(bad.validate(), sts::ParamError);
  bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), sts::ParamError);
  bad = cfg;
  bad.epochs = -1;
  CHECK_THROWS_AS(bad.validate(), sts::ParamError);
  bad = cfg;
  bad.max_frames = -8;
  CHECK_THROWS_AS(bad.validate(), sts::ParamError);
}

TEST_CASE("the learning rate decays exponentially per epoch") {
  sts::TrainConfig cfg;
  CHECK(sts::lr_for_epoch(cfg, 0) == doctest::Approx(0.002));
  for (int e = 1; e < 14; ++e)
    CHECK(sts::lr_for_epoch(cfg, e) ==
          doctest::Approx(sts::lr_for_epoch(cfg, e - 1) * 0.92));
  CHECK(sts::lr_for_epoch(cfg, 13) ==
        doctest::Approx(0.002 * std::pow(0.92, 13)));
  CHECK(sts::lr_for_epoch(cfg, 13) ==
        doctest::Approx(0.000679).epsilon(0.01));
}

TEST_CASE("perfect prediction with uniform logits costs lambda times log 41") {
  const int f = 20, t = 12;
  auto y = random_tensor({f, t}, 1);
  auto logits = TensorF::zeros({t, 41});  // equal scores = uniform softmax
  std::vector<int> phones(t, 5);
  sts::LossOptions opts;
  opts.lambda = 0.015;
  auto loss = sts::mtl_sample_loss(y, y, logits, phones, t, opts);
  CHECK(loss.mse == doctest::Approx(0.0));
  CHECK(loss.ce == doctest::Approx(std::log(41.0)).epsilon(1e-6));
  CHECK(loss.total_value ==
        doctest::Approx(0.015 * std::log(41.0)).epsilon(1e-6));
}

TEST_CASE("lambda zero is pure reconstruction; sum and mean modes agree") {
  const int f = 16, t = 10;
  auto pred = random_tensor({f, t}, 2);
  auto target = random_tensor({f, t}, 3);
  sts::LossOptions mean_mode;
  mean_mode.lambda = 0.0;
  auto mean_loss = sts::mtl_sample_loss(pred, target, {}, {}, t, mean_mode);
  CHECK(mean_loss.ce == 0.0);
  CHECK(mean_loss.total_value == mean_loss.mse);

  sts::LossOptions sum_mode = mean_mode;
  sum_mode.sum_mse = true;
  auto sum_loss = sts::mtl_sample_loss(pred, target, {}, {}, t, sum_mode);
  CHECK(sum_loss.mse ==
        doctest::Approx(mean_loss.mse * f * t).epsilon(1e-5));

  // oracle: direct accumulation
  double sse = 0;
  for (int i = 0; i < f * t; ++i) {
    const double d = static_cast<double>(pred.data()[static_cast<std::size_t>(
                         i)]) -
                     target.data()[static_cast<std::size_t>(i)];
    sse += d * d;
  }
  CHECK(sum_loss.mse == doctest::Approx(sse).epsilon(1e-5));
}

TEST_CASE("loss decomposition holds and padding never contributes") {
  const int f = 24, t = 16, valid = 11;
  auto pred = random_tensor({f, t}, 4);
  auto target = random_tensor({f, t}, 5);
  auto logits = random_tensor({t, 41}, 6, -2.0f, 2.0f);
  std::vector<int> phones;
  for (int j = 0; j < t; ++j) phones.push_back(j % 41);

  sts::LossOptions opts;
  opts.lambda = 0.015;
  auto loss = sts::mtl_sample_loss(pred, target, logits, phones, valid, opts);
  CHECK(loss.total_value ==
        doctest::Approx(loss.mse + 0.015 * loss.ce).epsilon(1e-6));

  // garbage in the padded columns changes nothing
  auto dirty_pred = pred.detached();
  auto dirty_logits = logits.detached();
  for (int i = 0; i < f; ++i)
    for (int j = valid; j < t; ++j)
      dirty_pred.data()[static_cast<std::size_t>(i) * t + j] = 1e6f;
  for (int j = valid; j < t; ++j)
    for (int k = 0; k < 41; ++k)
      dirty_logits.data()[static_cast<std::size_t>(j) * 41 + k] = 300.0f;
  auto dirty_phones = phones;
  for (int j = valid; j < t; ++j) dirty_phones[static_cast<std::size_t>(j)] = 7;
  auto dirty =
      sts::mtl_sample_loss(dirty_pred, target, dirty_logits, dirty_phones,
                           valid, opts);
  CHECK(dirty.total_value == doctest::Approx(loss.total_value));
  CHECK(dirty.mse == doctest::Approx(loss.mse));
  CHECK(dirty.ce == doctest::Approx(loss.ce));

  // reconstruction gradient: 2·diff/(F·valid) inside the mask, zero outside
  auto p2 = pred.detached();
  p2.set_requires_grad(true);
  sts::LossOptions mse_only;
  mse_only.lambda = 0.0;
  auto l2 = sts::mtl_sample_loss(p2, target, {}, {}, valid, mse_only);
  sts::backward(l2.total);
  for (int i = 0; i < f; ++i)
    for (int j = 0; j < t; ++j) {
      const std::size_t at = static_cast<std::size_t>(i) * t + j;
      const double expect =
          j < valid ? 2.0 * (p2.data()[at] - target.data()[at]) / (f * valid)
                    : 0.0;
      CHECK(p2.grad()[at] == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_CASE("loss contract violations are rejected") {
  auto pred = random_tensor({8, 6}, 7);
  auto target = random_tensor({8, 6}, 8);
  auto logits = random_tensor({6, 41}, 9);
  std::vector<int> phones(6, 0);
  CHECK_THROWS_AS(sts::mtl_sample_loss(pred, target, logits, phones, 0),
                  sts::ContractError);
  CHECK_THROWS_AS(sts::mtl_sample_loss(pred, target, logits, phones, 7),
                  sts::ShapeError);
  CHECK_THROWS_AS(
      sts::mtl_sample_loss(pred, random_tensor({8, 5}, 1), logits, phones, 5),
      sts::ShapeError);
  CHECK_THROWS_AS(
      sts::mtl_sample_loss(random_tensor({2, 8, 6}, 1),
                           random_tensor({2, 8, 6}, 2), logits, phones, 5),
      sts::ShapeError);
  sts::LossOptions opts;
  opts.lambda = 0.015;
  CHECK_THROWS_AS(sts::mtl_sample_loss(pred, target, {}, phones, 6, opts),
                  sts::ContractError);
  CHECK_THROWS_AS(sts::mtl_sample_loss(pred, target,
                                       random_tensor({5, 41}, 3), phones, 6,
                                       opts),
                  sts::ShapeError);
  CHECK_THROWS_AS(sts::mtl_sample_loss(pred, target, logits,
                                       std::vector<int>(4, 0), 6, opts),
                  sts::ShapeError);
  sts::LossOptions neg;
  neg.lambda = -1.0;
  CHECK_THROWS_AS(sts::mtl_sample_loss(pred, target, logits, phones, 6, neg),
                  sts::ParamError);
}

TEST_CASE("adam leaves parameters alone when the gradient is zero") {
  auto p = random_tensor({4, 3}, 10);
  p.set_requires_grad(true);
  const auto before = p.data();
  sts::Adam<float> adam({p});
  adam.step(0.1);
  adam.step(0.1);
  CHECK(p.data() == before);

  CHECK_THROWS_AS(sts::Adam<float>({p}, {1.0, 0.999, 1e-8}), sts::ParamError);
  CHECK_THROWS_AS(sts::Adam<float>({p}, {0.9, -0.1, 1e-8}), sts::ParamError);
  CHECK_THROWS_AS(sts::Adam<float>({p}, {0.9, 0.999, 0.0}), sts::ParamError);
  CHECK_THROWS_AS(sts::Adam<float>({TensorF{}}), sts::ContractError);
}

TEST_CASE("adam's first step is minus lr times the gradient sign") {
  auto p = Tensor<double>::zeros({3});
  p.set_requires_grad(true);
  p.grad()[0] = 3.7;
  p.grad()[1] = -0.004;
  p.grad()[2] = 0.0;
  sts::Adam<double> adam({p});
  adam.step(0.01);
  CHECK(p.data()[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p.data()[1] == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(p.data()[2] == 0.0);
  CHECK(adam.step_count() == 1);
}

TEST_CASE("constant gradients drive adam's step size to lr") {
  auto p = Tensor<double>::zeros({2});
  p.set_requires_grad(true);
  sts::Adam<double> adam({p});
  const double lr = 0.001;
  double prev0 = 0, prev1 = 0;
  double delta0 = 0, delta1 = 0;
  for (int i = 0; i < 1000; ++i) {
    p.grad()[0] = 0.3;
    p.grad()[1] = -42.0;
    adam.step(lr);
    delta0 = p.data()[0] - prev0;
    delta1 = p.data()[1] - prev1;
    prev0 = p.data()[0];
    prev1 = p.data()[1];
  }
  CHECK(std::abs(delta0) == doctest::Approx(lr).epsilon(0.01));
  CHECK(std::abs(delta1) == doctest::Approx(lr).epsilon(0.01));
  CHECK(delta0 < 0);
  CHECK(delta1 > 0);
}

TEST_CASE("train_loop writes a deterministic curve, log, and checkpoints") {
  auto samples = toy_samples("sts_train_toy");
  REQUIRE(samples.size() == 3);

  auto run = [&](unsigned long long seed, const std::string& out) {
    auto model = sts::StsModel<float>::build_variant("P-MSE", 11);
    sts::TrainConfig cfg;
    cfg.lambda = 0.0;
    cfg.epochs = 2;
    cfg.iters_per_epoch = 3;
    cfg.batch_size = 2;
    cfg.max_frames = 32;
    cfg.seed = seed;
    cfg.out_dir = out;
    return sts::train_loop(model, samples, cfg);
  };

  const auto out1 = tst::fresh_dir("sts_train_out1");
  auto r1 = run(123, out1.string());
  REQUIRE(r1.curve.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(r1.curve[static_cast<std::size_t>(i)].iter == i);
    CHECK(r1.curve[static_cast<std::size_t>(i)].epoch == i / 3);
    CHECK(r1.curve[static_cast<std::size_t>(i)].ce == 0.0);
    CHECK(r1.curve[static_cast<std::size_t>(i)].total ==
          r1.curve[static_cast<std::size_t>(i)].mse);
    CHECK(std::isfinite(r1.curve[static_cast<std::size_t>(i)].total));
  }
  CHECK(r1.curve[0].lr == doctest::Approx(0.002));
  CHECK(r1.curve[5].lr == doctest::Approx(0.002 * 0.92));
  REQUIRE(r1.checkpoint_paths.size() == 2);
  CHECK(fs::exists(out1 / "epoch_0.ckpt"));
  CHECK(fs::exists(out1 / "epoch_1.ckpt"));

  // the CSV mirrors the in-memory curve
  std::ifstream log(r1.log_path);
  REQUIRE(log.good());
  std::string line;
  std::getline(log, line);
  CHECK(line == "iter,epoch,lr,total,mse,ce");
  int rows = 0;
  while (std::getline(log, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int iter, epoch;
    double lr, total, mse, ce;
    REQUIRE((ss >> iter >> epoch >> lr >> total >> mse >> ce));
    const auto& c = r1.curve[static_cast<std::size_t>(rows)];
    CHECK(iter == c.iter);
    CHECK(epoch == c.epoch);
    CHECK(lr == doctest::Approx(c.lr).epsilon(1e-9));
    CHECK(total == doctest::Approx(c.total).epsilon(1e-9));
    CHECK(mse == doctest::Approx(c.mse).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows == 6);

  // same seed: bit-identical curve and checkpoint files
  const auto out2 = tst::fresh_dir("sts_train_out2");
  auto r2 = run(123, out2.string());
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(r1.curve[i].total == r2.curve[i].total);
    CHECK(r1.curve[i].mse == r2.curve[i].mse);
  }
  CHECK(file_bytes((out1 / "epoch_1.ckpt").string()) ==
        file_bytes((out2 / "epoch_1.ckpt").string()));

  // another seed walks another path
  const auto out3 = tst::fresh_dir("sts_train_out3");
  auto r3 = run(321, out3.string());
  bool differs = false;
  for (std::size_t i = 0; i < 6; ++i)
    differs = differs || r1.curve[i].total != r3.curve[i].total;
  CHECK(differs);

  // checkpoints restore a working model of the same variant
  auto restored = sts::StsModel<float>::from_checkpoint(
      sts::load_checkpoint((out1 / "epoch_1.ckpt").string()));
  CHECK(restored.variant() == "P-MSE");
  fs::remove_all(out1);
  fs::remove_all(out2);
  fs::remove_all(out3);
}

TEST_CASE("a small step on a frozen batch lowers that batch's loss") {
  auto samples = toy_samples("sts_train_frozen");
  std::vector<const sts::TrainSample*> ptrs{&samples[0], &samples[1]};
  sts::BatchOptions bopts;
  bopts.max_frames = 32;
  auto batch = sts::make_batch(ptrs, bopts);

  auto model = sts::StsModel<float>::build_variant("P-MSE", 3);
  auto named = model.params();
  std::vector<TensorF> params;
  for (auto& [name, t] : named) {
    t.set_requires_grad(true);
    params.push_back(t);
  }
  sts::Adam<float> adam(params);
  sts::LossOptions lopts;
  lopts.lambda = 0.0;

  auto batch_loss = [&](bool with_grads) {
    double total = 0;
    for (int b = 0; b < batch.batch_size(); ++b) {
      auto x = sts::slice(batch.x, 0, b, 1);
      auto c = sts::slice(batch.c, 0, b, 1);
      auto y = sts::reshape(sts::slice(batch.y, 0, b, 1),
                            {batch.y.dim(1), batch.y.dim(2)});
      auto out = model.forward(x, c);
      auto loss = sts::mtl_sample_loss(
          out.spectrogram, y, {},
          batch.frame_phones[static_cast<std::size_t>(b)],
          batch.lengths[static_cast<std::size_t>(b)], lopts);
      if (with_grads)
        sts::backward(loss.total, 1.0f / batch.batch_size());
      total += loss.total_value / batch.batch_size();
    }
    return total;
  };

  const double before = batch_loss(true);
  adam.step(1e-5);
  sts::NoGradGuard guard;
  const double after = batch_loss(false);
  CHECK(after < before);
  CHECK(after > before * 0.9);  // a 1e-5 step must not teleport
}

TEST_CASE("train_loop rejects broken setups with diagnostics") {
  auto samples = toy_samples("sts_train_contract");
  sts::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.iters_per_epoch = 1;
  cfg.batch_size = 2;
  cfg.max_frames = 16;

  auto mtl = sts::StsModel<float>::build_variant("P-MTL", 1);
  CHECK_THROWS_AS(sts::train_loop(mtl, {}, cfg), sts::ContractError);

  auto mse = sts::StsModel<float>::build_variant("P-MSE", 1);
  CHECK_THROWS_WITH_AS(sts::train_loop(mse, samples, cfg),
                       doctest::Contains("no phoneme decoder"),
                       sts::ConfigError);

  // a poisoned parameter surfaces as a non-finite loss abort
  for (auto& [name, t] : mtl.params())
    if (name == "dp.out.weight")
      for (auto& v : t.data()) v = std::nanf("");
  CHECK_THROWS_WITH_AS(sts::train_loop(mtl, samples, cfg),
                       doctest::Contains("non-finite loss at iteration 0"),
                       sts::ContractError);
}

TEST_CASE("a short optimization run reduces the training loss") {
  auto samples = toy_samples("sts_train_descent");
  // The final ReLU can start fully clamped for an unlucky seed, freezing
  // training at zero gradient; this seed starts alive, and the guard below
  // keeps the check meaningful if upstream initialization details move.
  auto model = sts::StsModel<float>::build_variant("P-MSE", 11);
  {
    std::vector<const sts::TrainSample*> one{&samples[0]};
    sts::BatchOptions bo;
    bo.max_frames = 32;
    auto probe = sts::make_batch(one, bo);
    sts::NoGradGuard guard;
    auto out = model.forward(sts::slice(probe.x, 0, 0, 1),
                             sts::slice(probe.c, 0, 0, 1));
    int live = 0;
    for (float v : out.spectrogram.data()) live += v > 0.0f;
    REQUIRE(live > 100);
  }
  sts::TrainConfig cfg;
  cfg.lambda = 0.0;
  cfg.epochs = 1;
  cfg.iters_per_epoch = 60;
  cfg.batch_size = 2;
  cfg.max_frames = 32;
  cfg.seed = 9;
  std::ostringstream progress;
  auto r = sts::train_loop(model, samples, cfg, &progress);
  REQUIRE(r.curve.size() == 60);
  CHECK(r.checkpoint_paths.empty());
  CHECK(r.log_path.empty());
  CHECK(progress.str().find("epoch 0 iter 1/60") != std::string::npos);
  // averaged tail well below the first iterations
  double head = 0, tail = 0;
  for (int i = 0; i < 5; ++i) {
    head += r.curve[static_cast<std::size_t>(i)].total / 5;
    tail += r.curve[static_cast<std::size_t>(55 + i)].total / 5;
  }
  CHECK(tail < 0.5 * head);
}
