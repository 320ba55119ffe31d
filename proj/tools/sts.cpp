// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Command-line front end for the speech-to-singing pipeline:
//   prep     corpus directory -> cached training/test samples
//   train    sample cache     -> per-epoch checkpoints + loss log
//   convert  checkpoint + speech + melody contour -> sung waveform
//   eval     checkpoint + sample cache -> per-sample metric CSV + summary
//
// Every command accepts --config FILE, a flat `key = value` text file (one
// shared namespace for the whole pipeline; '#' starts a comment; keys a
// command does not use are ignored). Explicit command-line flags override
// file values. Every command honors --seed; equal seeds and inputs produce
// bit-identical outputs.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sts/data/cache.hpp"
#include "sts/data/corpus.hpp"
#include "sts/data/samples.hpp"
#include "sts/error.hpp"
#include "sts/eval/evaluate.hpp"
#include "sts/eval/metrics.hpp"
#include "sts/eval/yin.hpp"
#include "sts/model/model.hpp"
#include "sts/prep/contour.hpp"
#include "sts/signal/resample.hpp"
#include "sts/signal/wav.hpp"
#include "sts/synth/predict.hpp"
#include "sts/tensor/checkpoint.hpp"
#include "sts/train/trainer.hpp"

namespace {

constexpr int kPipelineRate = 16000;

// ---------------------------------------------------------------------------
// Flat key = value configuration files.

using ConfigMap = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sts::IoError("config: cannot read " + path);
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(body.substr(0, eq));
    if (key.empty())
      throw sts::FormatError("config: " + path + ":" + std::to_string(lineno) +
                             ": expected key = value");
    out[key] = trim(body.substr(eq + 1));  // a repeated key: last line wins
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& raw);

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  std::istringstream in(raw);
  T value{};
  in >> value;
  if (!in || !in.eof())
    throw sts::ConfigError("config: bad value for '" + key + "': " + raw);
  return value;
}

template <>
double parse_value<double>(const std::string& key, const std::string& raw) {
  return parse_number<double>(key, raw);
}
template <>
int parse_value<int>(const std::string& key, const std::string& raw) {
  return parse_number<int>(key, raw);
}
template <>
unsigned long long parse_value<unsigned long long>(const std::string& key,
                                                   const std::string& raw) {
  return parse_number<unsigned long long>(key, raw);
}
template <>
bool parse_value<bool>(const std::string& key, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off")
    return false;
  throw sts::ConfigError("config: bad value for '" + key + "': " + raw);
}
template <>
std::string parse_value<std::string>(const std::string& key,
                                     const std::string& raw) {
  (void)key;
  return raw;
}

// Applies config-file values to everything the command line left untouched.
class ConfigBinder {
 public:
  explicit ConfigBinder(const std::string& path) {
    if (!path.empty()) cfg_ = read_config_file(path);
  }
  template <typename T>
  void apply(const CLI::Option* opt, const std::string& key, T& var) const {
    if (opt != nullptr && opt->count() > 0) return;  // explicit flag wins
    const auto it = cfg_.find(key);
    if (it != cfg_.end()) var = parse_value<T>(key, it->second);
  }

 private:
  ConfigMap cfg_;
};

// ---------------------------------------------------------------------------
// Shared option blocks.

struct StftArgs {
  sts::StftConfig cfg{};
  CLI::Option* o_fft = nullptr;
  CLI::Option* o_win = nullptr;
  CLI::Option* o_hop = nullptr;

  void add(CLI::App* sub) {
    o_fft = sub->add_option("--fft-size", cfg.fft_size,
                            "analysis FFT size in samples");
    o_win = sub->add_option("--window-len", cfg.window_len,
                            "analysis window length in samples");
    o_hop = sub->add_option("--hop", cfg.hop, "frame hop in samples");
  }
  void bind(const ConfigBinder& b) {
    b.apply(o_fft, "fft_size", cfg.fft_size);
    b.apply(o_win, "window_len", cfg.window_len);
    b.apply(o_hop, "hop", cfg.hop);
  }
};

struct SeedArg {
  unsigned long long seed = 0;
  CLI::Option* opt = nullptr;

  void add(CLI::App* sub, const char* help) {
    opt = sub->add_option("--seed", seed, help);
  }
  void bind(const ConfigBinder& b) { b.apply(opt, "seed", seed); }
};

sts::YinConfig yin_for(const sts::StftConfig& stft) {
  sts::YinConfig yc;
  yc.frame_len = stft.window_len;
  yc.hop = stft.hop;
  return yc;
}

// ---------------------------------------------------------------------------
// prep

struct PrepCmd {
  std::string corpus_dir, out_dir, config_path;
  std::string test_song;
  double min_silence_sec = 0.1;
  int min_words = 3;
  bool force = false;
  StftArgs stft;
  SeedArg seed;
  CLI::Option *o_test_song = nullptr, *o_min_sil = nullptr,
              *o_min_words = nullptr;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "prep", "build the sample cache from a paired corpus");
    sub->add_option("corpus_dir", corpus_dir,
                    "corpus root: <speaker>/{read,sing}/<song>.{wav,txt}")
        ->required();
    sub->add_option("out_dir", out_dir, "cache output directory")->required();
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_flag("--force", force, "rebuild even when the cache exists");
    o_test_song = sub->add_option(
        "--test-song", test_song,
        "song id held out for the test split (default: first song)");
    o_min_sil = sub->add_option("--min-silence", min_silence_sec,
                                "silence length that splits segments, seconds");
    o_min_words = sub->add_option("--min-words", min_words,
                                  "shortest word run that becomes a sample");
    stft.add(sub);
    seed.add(sub, "accepted for interface symmetry; preparation is "
                  "deterministic");
    sub->callback([this] { run(); });
  }

  void run() {
    const ConfigBinder b(config_path);
    b.apply(o_test_song, "test_song", test_song);
    b.apply(o_min_sil, "min_silence_sec", min_silence_sec);
    b.apply(o_min_words, "min_words", min_words);
    stft.bind(b);
    seed.bind(b);

    if (sts::cache_exists(out_dir) && !force) {
      std::cout << "cache up to date: " << out_dir << "\n";
      return;
    }
    const sts::Corpus corpus = sts::load_corpus(corpus_dir);
    if (corpus.pairs.empty())
      throw sts::ConfigError("no paired recordings under " + corpus_dir);
    sts::SampleOptions so;
    so.stft = stft.cfg;
    so.min_silence_sec = min_silence_sec;
    so.min_words = min_words;
    so.test_song = test_song;
    so.log = &std::cerr;
    const auto train = sts::generate_samples(corpus, sts::Split::Train, so);
    const auto test = sts::generate_samples(corpus, sts::Split::Test, so);
    sts::write_sample_cache(out_dir, train, test);
    std::cout << "train samples: " << train.size() << "\n"
              << "test samples: " << test.size() << "\n"
              << "cache written to " << out_dir << "\n";
  }
};

// ---------------------------------------------------------------------------
// train

struct TrainCmd {
  std::string cache_dir, out_dir, config_path;
  std::string variant = "P-MTL";
  double lambda = -1.0;  // negative: pick the variant's default
  sts::TrainConfig cfg;
  StftArgs stft;
  SeedArg seed;
  CLI::Option *o_variant = nullptr, *o_lambda = nullptr, *o_lr0 = nullptr,
              *o_decay = nullptr, *o_epochs = nullptr, *o_iters = nullptr,
              *o_batch = nullptr, *o_beta1 = nullptr, *o_beta2 = nullptr,
              *o_eps = nullptr, *o_sum = nullptr, *o_aug = nullptr,
              *o_phsync = nullptr, *o_max_frames = nullptr;

  void add(CLI::App& app) {
    auto* sub =
        app.add_subcommand("train", "train a model variant on a sample cache");
    sub->add_option("cache_dir", cache_dir, "sample cache from `prep`")
        ->required();
    sub->add_option("out_dir", out_dir, "checkpoint + log output directory")
        ->required();
    sub->add_option("--config", config_path, "key = value configuration file");
    o_variant = sub->add_option(
        "--variant", variant, "P-MTL, P-MSE, B1, B2 or AllNorm");
    o_lambda = sub->add_option(
        "--lambda", lambda,
        "phoneme-loss weight (default: 0.015 for P-MTL, 0 otherwise)");
    o_lr0 = sub->add_option("--lr0", cfg.lr0, "initial learning rate");
    o_decay = sub->add_option("--lr-decay", cfg.lr_decay,
                              "per-epoch learning-rate factor");
    o_epochs = sub->add_option("--epochs", cfg.epochs, "number of epochs");
    o_iters = sub->add_option("--iters", cfg.iters_per_epoch,
                              "iterations per epoch");
    o_batch = sub->add_option("--batch-size", cfg.batch_size, "batch size");
    o_beta1 = sub->add_option("--beta1", cfg.adam.beta1, "Adam beta1");
    o_beta2 = sub->add_option("--beta2", cfg.adam.beta2, "Adam beta2");
    o_eps = sub->add_option("--adam-eps", cfg.adam.eps, "Adam epsilon");
    o_sum = sub->add_flag("--sum-mse", cfg.sum_mse,
                          "sum the masked squared error instead of averaging");
    o_aug = sub->add_flag("--augment,!--no-augment", cfg.augment,
                          "random speech pitch shift in [-1, 1] semitones");
    o_phsync = sub->add_flag(
        "--phsync", cfg.phsync,
        "align speech to singing per phone instead of removing silences");
    o_max_frames = sub->add_option("--max-frames", cfg.max_frames,
                                   "truncate batch samples to this many "
                                   "frames (0 = uncapped)");
    stft.add(sub);
    seed.add(sub, "seeds model init, batch order and augmentation");
    sub->callback([this] { run(); });
  }

  void run() {
    const ConfigBinder b(config_path);
    b.apply(o_variant, "variant", variant);
    b.apply(o_lambda, "lambda", lambda);
    b.apply(o_lr0, "lr0", cfg.lr0);
    b.apply(o_decay, "lr_decay", cfg.lr_decay);
    b.apply(o_epochs, "epochs", cfg.epochs);
    b.apply(o_iters, "iters", cfg.iters_per_epoch);
    b.apply(o_batch, "batch_size", cfg.batch_size);
    b.apply(o_beta1, "beta1", cfg.adam.beta1);
    b.apply(o_beta2, "beta2", cfg.adam.beta2);
    b.apply(o_eps, "adam_eps", cfg.adam.eps);
    b.apply(o_sum, "sum_mse", cfg.sum_mse);
    b.apply(o_aug, "augment", cfg.augment);
    b.apply(o_phsync, "phsync", cfg.phsync);
    b.apply(o_max_frames, "max_frames", cfg.max_frames);
    stft.bind(b);
    seed.bind(b);

    const sts::SampleCache cache = sts::read_sample_cache(cache_dir);
    if (cache.train.empty())
      throw sts::ConfigError("cache holds no training samples: " + cache_dir);
    auto model = sts::StsModelF::build_variant(
        variant, static_cast<unsigned>(seed.seed));
    cfg.lambda = lambda >= 0 ? lambda
                             : (model.flags().use_dp ? 0.015 : 0.0);
    cfg.seed = seed.seed;
    cfg.stft = stft.cfg;
    cfg.out_dir = out_dir;
    const sts::TrainResult res =
        sts::train_loop(model, cache.train, cfg, &std::cout);
    std::cout << "wrote " << res.checkpoint_paths.size()
              << " checkpoints and " << res.log_path << "\n";
  }
};

// ---------------------------------------------------------------------------
// convert

struct ConvertCmd {
  std::string ckpt_path, speech_path, contour_path, out_path, config_path;
  int gl_iters = 60;
  double gl_power = 1.2;
  StftArgs stft;
  SeedArg seed;
  CLI::Option *o_gl_iters = nullptr, *o_gl_power = nullptr;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "convert", "sing a speech recording along a melody contour");
    sub->add_option("checkpoint", ckpt_path, "trained model checkpoint")
        ->required();
    sub->add_option("speech_wav", speech_path, "input speech WAV")->required();
    sub->add_option("contour_txt", contour_path,
                    "target melody contour (time<TAB>f0 per frame)")
        ->required();
    sub->add_option("out_wav", out_path, "output WAV path")->required();
    sub->add_option("--config", config_path, "key = value configuration file");
    o_gl_iters = sub->add_option("--gl-iters", gl_iters,
                                 "phase-recovery iterations");
    o_gl_power = sub->add_option("--gl-power", gl_power,
                                 "magnitude exponent before phase recovery");
    stft.add(sub);
    seed.add(sub, "seeds the synthesis phase init");
    sub->callback([this] { run(); });
  }

  void run() {
    const ConfigBinder b(config_path);
    b.apply(o_gl_iters, "gl_iters", gl_iters);
    b.apply(o_gl_power, "gl_power", gl_power);
    stft.bind(b);
    seed.bind(b);

    const auto model =
        sts::StsModelF::from_checkpoint(sts::load_checkpoint(ckpt_path));
    const sts::Waveform speech =
        sts::resample(sts::read_wav(speech_path), kPipelineRate);
    const sts::MelodyContour contour = sts::read_contour(contour_path);

    sts::PredictConfig pc;
    pc.stft = stft.cfg;
    pc.gl_iterations = gl_iters;
    pc.gl_power = gl_power;
    pc.seed = static_cast<unsigned>(seed.seed);
    const sts::Waveform sung = sts::predict(model, speech, contour, pc);
    sts::write_wav(sung, out_path);

    const double chroma = sts::rca(contour, sts::yin_f0(sung, yin_for(stft.cfg)));
    std::printf("duration %.3f s\n", sung.duration_sec());
    std::printf("rca %.4f\n", chroma);
    std::cout << "wrote " << out_path << "\n";
  }
};

// ---------------------------------------------------------------------------
// eval

struct EvalCmd {
  std::string ckpt_path, cache_dir, out_csv, config_path;
  int n = 100;
  double min_speech_sec = 1.0;
  bool oracle = false;
  int gl_iters = 60;
  double gl_power = 1.2;
  StftArgs stft;
  SeedArg seed;
  CLI::Option *o_n = nullptr, *o_min_speech = nullptr, *o_gl_iters = nullptr,
              *o_gl_power = nullptr;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "eval", "score a checkpoint on the cached test split");
    sub->add_option("checkpoint", ckpt_path, "trained model checkpoint")
        ->required();
    sub->add_option("cache_dir", cache_dir, "sample cache from `prep`")
        ->required();
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--out", out_csv,
                    "write the per-sample CSV here instead of stdout");
    o_n = sub->add_option("-n,--num-samples", n,
                          "evaluation set size (seeded selection)");
    o_min_speech = sub->add_option("--min-speech-sec", min_speech_sec,
                                   "eligibility cut on speech duration");
    sub->add_flag("--oracle-passthrough", oracle,
                  "score the true singing instead of the model (metric "
                  "ceiling check)");
    o_gl_iters = sub->add_option("--gl-iters", gl_iters,
                                 "phase-recovery iterations");
    o_gl_power = sub->add_option("--gl-power", gl_power,
                                 "magnitude exponent before phase recovery");
    stft.add(sub);
    seed.add(sub, "seeds sample selection and synthesis");
    sub->callback([this] { run(); });
  }

  void run() {
    const ConfigBinder b(config_path);
    b.apply(o_n, "n", n);
    b.apply(o_min_speech, "min_speech_sec", min_speech_sec);
    b.apply(o_gl_iters, "gl_iters", gl_iters);
    b.apply(o_gl_power, "gl_power", gl_power);
    stft.bind(b);
    seed.bind(b);

    const auto model =
        sts::StsModelF::from_checkpoint(sts::load_checkpoint(ckpt_path));
    const sts::SampleCache cache = sts::read_sample_cache(cache_dir);
    sts::EvalOptions eo;
    eo.num_samples = n;
    eo.seed = static_cast<unsigned>(seed.seed);
    eo.min_speech_sec = min_speech_sec;
    eo.oracle_passthrough = oracle;
    eo.predict.stft = stft.cfg;
    eo.predict.gl_iterations = gl_iters;
    eo.predict.gl_power = gl_power;
    eo.predict.seed = static_cast<unsigned>(seed.seed);
    eo.warn = &std::cerr;
    const sts::MetricReport rep = evaluate_system(model, cache.test, eo);

    std::ostringstream csv;
    csv << "sample,speech_sec,lsd_db,rca\n";
    char buf[128];
    for (const auto& row : rep.rows) {
      std::snprintf(buf, sizeof buf, ",%.6g,%.6g,%.6g", row.speech_sec,
                    row.lsd_db, row.rca);
      csv << row.sample_id << buf << "\n";
    }
    if (out_csv.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream out(out_csv, std::ios::trunc);
      if (!out) throw sts::IoError("cannot write " + out_csv);
      out << csv.str();
    }
    std::printf("mean lsd %.4f dB, mean rca %.4f over %zu samples\n",
                rep.mean_lsd_db, rep.mean_rca, rep.rows.size());
  }
};

int classify(const sts::Error& e) {
  const bool usage = dynamic_cast<const sts::ConfigError*>(&e) != nullptr ||
                     dynamic_cast<const sts::ParamError*>(&e) != nullptr ||
                     dynamic_cast<const sts::IoError*>(&e) != nullptr ||
                     dynamic_cast<const sts::FormatError*>(&e) != nullptr ||
                     dynamic_cast<const sts::ParseError*>(&e) != nullptr ||
                     dynamic_cast<const sts::UnsupportedError*>(&e) != nullptr ||
                     dynamic_cast<const sts::PairingError*>(&e) != nullptr ||
                     dynamic_cast<const sts::AlignError*>(&e) != nullptr;
  return usage ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech-to-singing conversion pipeline"};
  app.require_subcommand(1);
  PrepCmd prep;
  TrainCmd train;
  ConvertCmd convert;
  EvalCmd eval;
  prep.add(app);
  train.add(app);
  convert.add(app);
  eval.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits clean, bad usage exits 2
  } catch (const sts::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
