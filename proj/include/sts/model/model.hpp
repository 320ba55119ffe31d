// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sts/error.hpp"
#include "sts/nn/blocks.hpp"
#include "sts/tensor/checkpoint.hpp"
#include "sts/tensor/conv.hpp"
#include "sts/tensor/ops.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {

// Spectrogram-to-spectrogram converter. Two mirrored encoders — one for the
// source log-magnitude spectrogram, one for the rasterized melody contour —
// feed a shared decoder through a channel-concatenated bottleneck; the
// decoder mirrors the encoder with skip connections from the source encoder,
// and an optional phoneme head taps the penultimate frequency upsampling
// stage to predict per-frame phoneme logits.
//
// Feature maps are single-sample [channels, frequency, time] tensors; batch
// elements run through forward() one at a time and average their losses.

// How much instance normalization the variant uses: none at all, only in
// front of the two recurrent blocks, or additionally before every
// down/upsampling convolution.
enum class NormPlan { None, PreGru, All };

struct VariantFlags {
  bool use_contour = true;
  bool use_skips = true;
  bool use_dp = false;
  NormPlan norm = NormPlan::PreGru;
};

// Number of phoneme classes: the 39-phone CMU inventory plus silence and
// inhalation marks.
constexpr int kNumPhones = 41;

namespace detail {

// Encoder and decoder stage widths; stage i halves one axis per block.
constexpr std::array<int, 3> kWidths = {32, 64, 128};

inline const char* norm_plan_name(NormPlan p) {
  switch (p) {
    case NormPlan::None:
      return "none";
    case NormPlan::PreGru:
      return "pre_gru";
    case NormPlan::All:
      return "all";
  }
  return "pre_gru";
}

inline NormPlan norm_plan_from(const std::string& s) {
  if (s == "none") return NormPlan::None;
  if (s == "pre_gru") return NormPlan::PreGru;
  if (s == "all") return NormPlan::All;
  throw FormatError("unknown normalization plan: " + s);
}

}  // namespace detail

template <typename S = float>
class StsModel {
 public:
  using Params = std::vector<std::pair<std::string, Tensor<S>>>;

  // Named configurations: "P-MSE" (full model, reconstruction loss only),
  // "P-MTL" (adds the phoneme head), "B1" (no contour input), "B2" (no
  // instance norm, no skip connections), "AllNorm" (instance norm before
  // every resampling block as well).
  static StsModel build_variant(const std::string& name,
                                unsigned seed = 0) {
    VariantFlags flags;
    if (name == "P-MSE") {
    } else if (name == "P-MTL") {
      flags.use_dp = true;
    } else if (name == "B1") {
      flags.use_contour = false;
    } else if (name == "B2") {
      flags.use_skips = false;
      flags.norm = NormPlan::None;
    } else if (name == "AllNorm") {
      flags.norm = NormPlan::All;
    } else {
      throw ConfigError("unknown model variant: " + name);
    }
    return StsModel(name, flags, seed);
  }

  const VariantFlags& flags() const { return flags_; }
  const std::string& variant() const { return variant_; }
  int dp_tap_channels() const { return tap_channels_; }

  struct Output {
    Tensor<S> spectrogram;     // same F x T as the input
    Tensor<S> phoneme_logits;  // [T, 41]; undefined unless the head exists
  };

  // x: [F, T] (or [1, F, T]) log-magnitude spectrogram; contour: same shape,
  // required exactly when the variant uses melody conditioning. F and T are
  // zero-padded to multiples of 8 internally and the output is cropped back.
  Output forward(const Tensor<S>& x_in, const Tensor<S>& c_in = {}) const {
    Tensor<S> x = as_map(x_in, "input");
    const int f_in = x.dim(1), t_in = x.dim(2);
    Tensor<S> c;
    if (flags_.use_contour) {
      if (!c_in.defined())
        throw ContractError("this variant requires a contour input");
      c = as_map(c_in, "contour");
      if (c.dim(1) != f_in || c.dim(2) != t_in)
        throw ShapeError("contour shape must match the input spectrogram");
    } else if (c_in.defined()) {
      throw ContractError("this variant takes no contour input");
    }
    const int f_pad = (8 - f_in % 8) % 8;
    const int t_pad = (8 - t_in % 8) % 8;
    if (f_pad) x = pad_axis(x, 1, 0, f_pad);
    if (t_pad) x = pad_axis(x, 2, 0, t_pad);
    std::array<Tensor<S>, 6> acts;  // source-encoder activations, in order
    auto code = encode(e1_, x, &acts);
    Tensor<S> z = code;
    if (flags_.use_contour) {
      if (f_pad) c = pad_axis(c, 1, 0, f_pad);
      if (t_pad) c = pad_axis(c, 2, 0, t_pad);
      z = concat<S>({code, encode(e2_, c, nullptr)}, 0);
    }
    z = norm_gru_block(z, gru1_);
    const auto sk = [&](int i) {
      return flags_.use_skips ? acts[static_cast<std::size_t>(i)]
                              : Tensor<S>{};
    };
    auto d = up_block(z, sk(4), tu1_);
    d = up_block(d, sk(3), fu1_);
    d = norm_gru_block(d, gru2_);
    d = up_block(d, sk(2), tu2_);
    auto tap = up_block(d, sk(1), fu2_);
    d = up_block(tap, sk(0), tu3_);
    d = up_block(d, Tensor<S>{}, fu3_);
    // Final 1x1 convolution down to one channel, then ReLU to keep the
    // prediction in the non-negative log-magnitude domain.
    auto folded = detail::fold_to_axis(d, Axis::Time);
    auto y = conv1d(folded, out_w_, out_b_, 1, 0);
    y = relu(detail::unfold_from_axis(y, Axis::Time));
    if (f_pad) y = slice(y, 1, 0, f_in);
    if (t_pad) y = slice(y, 2, 0, t_in);
    Output out;
    out.spectrogram = reshape(y, {f_in, t_in});
    if (flags_.use_dp) out.phoneme_logits = phoneme_decoder_pass(tap, t_in);
    return out;
  }

  // The phoneme head on its own: takes the penultimate frequency-upsampling
  // activation [C, F/2, T'/2] and returns [T, 41] logits (time cropped to
  // t_out rows).
  Tensor<S> phoneme_decoder_pass(const Tensor<S>& tap, int t_out) const {
    if (!flags_.use_dp)
      throw ContractError("this variant has no phoneme decoder");
    if (tap.rank() != 3 || tap.dim(0) != tap_channels_)
      throw ShapeError("phoneme decoder expects the tap activation");
    auto pooled = mean_axis3(tap, 1);  // collapse frequency: [C, T/2]
    auto up = tconv1d(pooled, dp_tconv_w_, dp_tconv_b_, 2, 1);
    auto h = norm_gru_block(up, dp_gru_);
    auto logits = conv1d(h, dp_out_w_, dp_out_b_, 1, 0);  // [41, T]
    if (logits.dim(1) < t_out)
      throw ShapeError("phoneme decoder produced too few frames");
    if (logits.dim(1) > t_out) logits = slice(logits, 1, 0, t_out);
    // [41, T] -> [T, 41]
    auto cube = reshape(logits, {kNumPhones, 1, t_out});
    return reshape(permute3(cube, 2, 1, 0), {t_out, kNumPhones});
  }

  // All learnable tensors with stable names, in a fixed registration order
  // (checkpoints depend on it being deterministic).
  Params params() const {
    Params out;
    collect_encoder(out, "e1", e1_);
    if (flags_.use_contour) collect_encoder(out, "e2", e2_);
    collect_gru(out, "bottleneck_gru", gru1_);
    collect_updown(out, "dec.time_up1", tu1_);
    collect_updown(out, "dec.freq_up1", fu1_);
    collect_gru(out, "dec.gru", gru2_);
    collect_updown(out, "dec.time_up2", tu2_);
    collect_updown(out, "dec.freq_up2", fu2_);
    collect_updown(out, "dec.time_up3", tu3_);
    collect_updown(out, "dec.freq_up3", fu3_);
    out.emplace_back("dec.out.weight", out_w_);
    out.emplace_back("dec.out.bias", out_b_);
    if (flags_.use_dp) {
      out.emplace_back("dp.tconv.weight", dp_tconv_w_);
      out.emplace_back("dp.tconv.bias", dp_tconv_b_);
      collect_gru(out, "dp.gru", dp_gru_);
      out.emplace_back("dp.out.weight", dp_out_w_);
      out.emplace_back("dp.out.bias", dp_out_b_);
    }
    return out;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params()) n += t.size();
    return n;
  }

  void zero_grads() const {
    for (auto& [name, t] : params()) {
      Tensor<S> h = t;
      h.zero_grad();
    }
  }

  Checkpoint to_checkpoint() const {
    nlohmann::json meta;
    meta["kind"] = "sts-model";
    meta["variant"] = variant_;
    meta["flags"] = {{"contour", flags_.use_contour},
                     {"skips", flags_.use_skips},
                     {"phoneme_decoder", flags_.use_dp},
                     {"norm", detail::norm_plan_name(flags_.norm)}};
    meta["stage_widths"] = detail::kWidths;
    meta["dp_tap_channels"] = tap_channels_;
    meta["phoneme_classes"] = kNumPhones;
    Checkpoint ckpt;
    ckpt.metadata = meta.dump();
    for (const auto& [name, t] : params()) {
      std::vector<float> data(t.size());
      for (std::size_t i = 0; i < t.size(); ++i)
        data[i] = static_cast<float>(t.data()[i]);
      ckpt.tensors.emplace_back(name,
                                TensorF::from(std::move(data), t.shape()));
    }
    return ckpt;
  }

  static StsModel from_checkpoint(const Checkpoint& ckpt) {
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(ckpt.metadata);
    } catch (const nlohmann::json::exception&) {
      throw FormatError("checkpoint metadata is not valid JSON");
    }
    if (!meta.contains("variant") || meta.value("kind", "") != "sts-model")
      throw FormatError("checkpoint does not describe a model");
    auto model = build_variant(meta["variant"].get<std::string>(), 0);
    for (auto& [name, t] : model.params()) {
      const TensorF* src = ckpt.find(name);
      if (!src)
        throw FormatError("checkpoint is missing tensor: " + name);
      if (src->shape() != t.shape())
        throw FormatError("checkpoint tensor has wrong shape: " + name);
      Tensor<S> dst = t;
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst.data()[i] = static_cast<S>(src->data()[i]);
    }
    return model;
  }

 private:
  struct Encoder {
    std::array<DownBlock<S>, 3> fd, td;
  };

  StsModel(std::string name, VariantFlags flags, unsigned seed)
      : variant_(std::move(name)), flags_(flags) {
    std::mt19937 rng(seed);
    const bool all_norm = flags_.norm == NormPlan::All;
    const bool gru_norm = flags_.norm != NormPlan::None;
    init_encoder(e1_, all_norm, rng);
    if (flags_.use_contour) init_encoder(e2_, all_norm, rng);
    const int bott = flags_.use_contour ? 2 * detail::kWidths[2]
                                        : detail::kWidths[2];
    gru1_.init(bott, bott, gru_norm, rng);
    const int s = flags_.use_skips ? 1 : 0;
    // Each up block halves the width; a skip doubles it back via concat.
    tu1_.init(Axis::Time, bott, detail::kWidths[2], all_norm, rng);
    fu1_.init(Axis::Frequency, detail::kWidths[2] * (1 + s),
              detail::kWidths[1], all_norm, rng);
    const int mid = detail::kWidths[1] * (1 + s);
    gru2_.init(mid, mid, gru_norm, rng);
    tu2_.init(Axis::Time, mid, detail::kWidths[1], all_norm, rng);
    fu2_.init(Axis::Frequency, detail::kWidths[1] * (1 + s),
              detail::kWidths[0], all_norm, rng);
    tap_channels_ = detail::kWidths[0] * (1 + s);
    tu3_.init(Axis::Time, tap_channels_, detail::kWidths[0], all_norm, rng);
    fu3_.init(Axis::Frequency, detail::kWidths[0] * (1 + s),
              detail::kWidths[0], all_norm, rng);
    out_w_ = detail::init_uniform<S>({1, detail::kWidths[0], 1},
                                     detail::kWidths[0], rng);
    out_b_ = detail::init_uniform<S>({1}, detail::kWidths[0], rng);
    if (flags_.use_dp) {
      const int dp_w = 64;
      dp_tconv_w_ = detail::init_uniform<S>({tap_channels_, dp_w, 4},
                                            tap_channels_ * 4, rng);
      dp_tconv_b_ = detail::init_uniform<S>({dp_w}, tap_channels_ * 4, rng);
      dp_gru_.init(dp_w, dp_w, false, rng);
      dp_out_w_ = detail::init_uniform<S>({kNumPhones, dp_w, 1}, dp_w, rng);
      dp_out_b_ = detail::init_uniform<S>({kNumPhones}, dp_w, rng);
    }
  }

  static void init_encoder(Encoder& e, bool all_norm, std::mt19937& rng) {
    int c_in = 1;
    for (int i = 0; i < 3; ++i) {
      const int w = detail::kWidths[static_cast<std::size_t>(i)];
      e.fd[static_cast<std::size_t>(i)].init(Axis::Frequency, c_in, w,
                                             all_norm, rng);
      e.td[static_cast<std::size_t>(i)].init(Axis::Time, w, w, all_norm,
                                             rng);
      c_in = w;
    }
  }

  // Runs one encoder; when `acts` is given, stores the activation after
  // every block (the decoder's skip sources, outermost first).
  Tensor<S> encode(const Encoder& e, const Tensor<S>& x,
                   std::array<Tensor<S>, 6>* acts) const {
    Tensor<S> h = x;
    int k = 0;
    for (int i = 0; i < 3; ++i) {
      h = down_block(h, e.fd[static_cast<std::size_t>(i)]);
      if (acts) (*acts)[static_cast<std::size_t>(k)] = h;
      ++k;
      h = down_block(h, e.td[static_cast<std::size_t>(i)]);
      if (acts && k < 5) (*acts)[static_cast<std::size_t>(k)] = h;
      ++k;
    }
    return h;
  }

  static Tensor<S> as_map(const Tensor<S>& t, const char* what) {
    if (t.rank() == 2) return reshape(t, {1, t.dim(0), t.dim(1)});
    if (t.rank() == 3 && t.dim(0) == 1) return t;
    throw ShapeError(std::string(what) +
                     " must be a single [F, T] spectrogram");
  }

  static void collect_updown_common(Params& out, const std::string& prefix,
                                    const Tensor<S>& w, const Tensor<S>& b,
                                    const PreNorm<S>& n) {
    out.emplace_back(prefix + ".weight", w);
    out.emplace_back(prefix + ".bias", b);
    if (n.enabled()) {
      out.emplace_back(prefix + ".norm.gamma", n.gamma);
      out.emplace_back(prefix + ".norm.beta", n.beta);
    }
  }
  static void collect_updown(Params& out, const std::string& prefix,
                             const DownBlock<S>& blk) {
    collect_updown_common(out, prefix, blk.weight, blk.bias, blk.norm);
  }
  static void collect_updown(Params& out, const std::string& prefix,
                             const UpBlock<S>& blk) {
    collect_updown_common(out, prefix, blk.weight, blk.bias, blk.norm);
  }
  static void collect_encoder(Params& out, const std::string& prefix,
                              const Encoder& e) {
    for (int i = 0; i < 3; ++i) {
      const std::string n = std::to_string(i + 1);
      collect_updown(out, prefix + ".freq_down" + n,
                     e.fd[static_cast<std::size_t>(i)]);
      collect_updown(out, prefix + ".time_down" + n,
                     e.td[static_cast<std::size_t>(i)]);
    }
  }
  static void collect_gru(Params& out, const std::string& prefix,
                          const NormGruBlock<S>& g) {
    if (g.gamma.defined()) {
      out.emplace_back(prefix + ".norm.gamma", g.gamma);
      out.emplace_back(prefix + ".norm.beta", g.beta);
    }
    out.emplace_back(prefix + ".w_ih", g.w_ih);
    out.emplace_back(prefix + ".w_hh", g.w_hh);
    out.emplace_back(prefix + ".b_ih", g.b_ih);
    out.emplace_back(prefix + ".b_hh", g.b_hh);
  }

  std::string variant_;
  VariantFlags flags_;
  int tap_channels_ = 0;
  Encoder e1_, e2_;
  NormGruBlock<S> gru1_, gru2_;
  UpBlock<S> tu1_, fu1_, tu2_, fu2_, tu3_, fu3_;
  Tensor<S> out_w_, out_b_;
  Tensor<S> dp_tconv_w_, dp_tconv_b_;
  NormGruBlock<S> dp_gru_;
  Tensor<S> dp_out_w_, dp_out_b_;
};

using StsModelF = StsModel<float>;

}  // namespace sts
