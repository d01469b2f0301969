// retone: unpaired guitar-timbre emulation toolkit.
// Subcommands: preprocess, train, process, evaluate, benchmark.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "retone/checkpoint.hpp"
#include "retone/dataset.hpp"
#include "retone/errors.hpp"
#include "retone/metrics.hpp"
#include "retone/runconfig.hpp"
#include "retone/streaming.hpp"
#include "retone/training.hpp"
#include "retone/wav.hpp"

namespace fs = std::filesystem;
using namespace retone;

namespace {

std::vector<std::string> list_wavs(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct PreprocessOptions {
  double trim_threshold_db;
  double trim_window_ms;
  double clip_level;
  int clip_min_run;
  double clip_max_ratio;
  double segment_seconds;
  double skip_seconds = 0.0;
  bool no_trim = false;
};

struct FileSegments {
  std::string path;
  std::vector<SegmentRef> segments;
};

/// Trim, segment and clip-filter one file; returns kept segments.
FileSegments scan_file(const std::string& path, const PreprocessOptions& opt, int& sample_rate,
                       std::int64_t seg_len_out, std::size_t& dropped) {
  AudioBuffer buf = load_audio(path);
  if (sample_rate == 0) sample_rate = buf.sample_rate;
  if (buf.sample_rate != sample_rate)
    throw DataError("sample rate mismatch: " + path + " has " + std::to_string(buf.sample_rate) +
                    ", expected " + std::to_string(sample_rate));
  std::int64_t begin = static_cast<std::int64_t>(opt.skip_seconds * sample_rate);
  std::int64_t end = static_cast<std::int64_t>(buf.size());
  if (!opt.no_trim) {
    try {
      const TrimSpan span = trim_silence_span(buf, opt.trim_threshold_db, opt.trim_window_ms);
      begin = std::max(begin, span.begin);
      end = span.end;
    } catch (const DataError&) {
      std::fprintf(stderr, "  %s: entirely silent, skipped\n", path.c_str());
      return {path, {}};
    }
  }
  FileSegments out{path, {}};
  for (std::int64_t s = begin; s + seg_len_out <= end; s += seg_len_out) {
    AudioBuffer seg;
    seg.sample_rate = sample_rate;
    seg.samples.assign(buf.samples.begin() + s, buf.samples.begin() + s + seg_len_out);
    if (detect_clipping(seg, opt.clip_level, opt.clip_min_run) > opt.clip_max_ratio) {
      ++dropped;
      continue;
    }
    out.segments.push_back(SegmentRef{path, s, seg_len_out});
  }
  return out;
}

int cmd_preprocess(const std::string& in_dir, const std::string& target_dir,
                   const std::string& out_path, const std::string& mode,
                   const PreprocessOptions& opt) {
  int sample_rate = 0;
  std::size_t dropped = 0;
  const auto files = list_wavs(in_dir);
  if (files.empty()) throw DataError("no WAV files in " + in_dir);

  // segment length needs the rate of the first readable file
  AudioBuffer probe = load_audio(files.front());
  sample_rate = probe.sample_rate;
  const auto seg_len = static_cast<std::int64_t>(opt.segment_seconds * sample_rate);
  if (seg_len < 1) throw UsageError("segment length is below one sample");

  DatasetManifest manifest;
  manifest.sample_rate = sample_rate;
  manifest.segment_length_samples = seg_len;

  if (mode == "alternating") {
    std::size_t index = 0;
    for (const auto& f : files) {
      auto scanned = scan_file(f, opt, sample_rate, seg_len, dropped);
      for (auto& seg : scanned.segments) {
        (index % 2 == 0 ? manifest.input_segments : manifest.target_segments)
            .push_back(std::move(seg));
        ++index;
      }
    }
  } else if (mode == "unpaired") {
    if (target_dir.empty()) throw UsageError("unpaired mode needs --target-dir");
    for (const auto& f : files) {
      auto scanned = scan_file(f, opt, sample_rate, seg_len, dropped);
      for (auto& seg : scanned.segments) manifest.input_segments.push_back(std::move(seg));
    }
    for (const auto& f : list_wavs(target_dir)) {
      auto scanned = scan_file(f, opt, sample_rate, seg_len, dropped);
      for (auto& seg : scanned.segments) manifest.target_segments.push_back(std::move(seg));
    }
  } else {
    throw UsageError("mode must be alternating or unpaired");
  }

  if (manifest.input_segments.empty()) throw DataError("input domain ended up empty");
  if (manifest.target_segments.empty()) throw DataError("target domain ended up empty");
  save_manifest(manifest, out_path);
  std::fprintf(stderr, "%zu input + %zu target segments (%zu dropped for clipping) -> %s\n",
               manifest.input_segments.size(), manifest.target_segments.size(), dropped,
               out_path.c_str());
  return 0;
}

/// Buffers one loss-log line so validation metrics land on the same line.
class LossLogWriter {
 public:
  explicit LossLogWriter(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw DataError("cannot open loss log: " + path);
  }
  ~LossLogWriter() { flush(); }

  void line(const std::string& text) {
    flush();
    pending_ = text;
  }
  void append(const std::string& text) { pending_ += text; }
  void flush() {
    if (!pending_.empty()) {
      out_ << pending_ << "\n";
      out_.flush();
      pending_.clear();
    }
  }

 private:
  std::ofstream out_;
  std::string pending_;
};

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.8g", v);
  return buf;
}

template <typename S>
Checkpoint make_checkpoint(ModelKind kind, const std::string& config_text, std::uint64_t step,
                           std::uint64_t seed, std::vector<TensorView<S>> params,
                           AdamState<S>* opt) {
  Checkpoint ckpt;
  ckpt.kind = kind;
  ckpt.config_text = config_text;
  ckpt.training_step = step;
  ckpt.seed = seed;
  checkpoint_put_tensors(ckpt, params);
  if (opt) {
    checkpoint_put_tensors(ckpt, opt->moment_views(params));
    CheckpointTensor t;
    t.name = "adam.step";
    t.dtype = 1;
    t.rows = 1;
    t.cols = 1;
    const double step_value = static_cast<double>(opt->step_count());
    detail::store_scalar_le<double>(t.data, step_value);
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

template <typename S>
void restore_optimizer(const Checkpoint& ckpt, const std::vector<TensorView<S>>& params,
                       AdamState<S>& opt) {
  checkpoint_get_tensors(ckpt, opt.moment_views(params));
  const CheckpointTensor* t = ckpt.find("adam.step");
  if (!t || t->data.size() != 8) throw DataError("checkpoint: missing optimizer step");
  opt.set_step_count(
      static_cast<std::uint64_t>(detail::load_scalar_le<double>(t->data.data())));
}

int cmd_train(const std::string& config_path, const std::string& manifest_path,
              const std::string& val_manifest_path, const std::string& out_dir,
              const std::string& data_root, const std::string& resume_prefix) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
  fs::create_directories(out_dir);

  const DatasetManifest manifest = load_manifest(manifest_path);
  SegmentStore data = SegmentStore::from_manifest(manifest, data_root);

  std::optional<SegmentStore> val;
  if (!val_manifest_path.empty()) {
    val = SegmentStore::from_manifest(load_manifest(val_manifest_path), data_root);
    val->require_paired();
    std::int64_t needed = cfg.metrics_config().mel_window;
    for (int n : cfg.parsed_fft_sizes()) needed = std::max<std::int64_t>(needed, n);
    if (val->segment_length < needed)
      throw DataError("validation segments (" + std::to_string(val->segment_length) +
                      " samples) are shorter than the largest metric window (" +
                      std::to_string(needed) + "); shrink metric_fft_sizes or use longer segments");
  }

  const GeneratorConfig gcfg = cfg.generator_config();
  const MultiScaleConfig dcfg = cfg.discriminator_config();
  const bool supervised = cfg.train_mode == "supervised";
  if (supervised) {
    data.require_paired();
  } else {
    data.require_unpaired();
    for (const auto& sub : dcfg.subs)
      if (data.segment_length < sub.representation.window_size)
        throw DataError("segments shorter than discriminator window " +
                        std::to_string(sub.representation.window_size));
  }

  // record the data rate in the resolved config so inference can warn
  RunConfig resolved = cfg;
  std::string config_text = resolved.to_text();
  config_text += "# resolved\nsample_rate = " + std::to_string(data.sample_rate) + "\n";
  {
    std::ofstream f(out_dir + "/config_resolved.txt", std::ios::trunc);
    f << config_text;
  }

  TrainConfig tcfg;
  tcfg.batch_size = cfg.batch_size;
  tcfg.iterations = cfg.iterations;
  tcfg.d_steps_per_g_step = cfg.d_steps_per_g_step;
  tcfg.lr_g = cfg.lr_g;
  tcfg.lr_d = cfg.lr_d;
  tcfg.adam_beta1 = cfg.adam_beta1;
  tcfg.adam_beta2 = cfg.adam_beta2;
  tcfg.adam_epsilon = cfg.adam_epsilon;
  tcfg.preemph_coeff = cfg.preemph_coeff;
  tcfg.seed = cfg.seed;
  tcfg.checkpoint_every = cfg.checkpoint_every;
  tcfg.validate_every = cfg.validate_every;
  tcfg.mask_receptive_field = cfg.mask_receptive_field != 0;

  Rng init_rng(cfg.seed);
  auto gen = GeneratorParams<float>::init(gcfg, init_rng);
  auto disc = MultiScaleParams<float>::init(dcfg, init_rng);
  AdamState<float> opt_g(gen.tensor_views(), tcfg.adam_for(tcfg.lr_g));
  AdamState<float> opt_d(disc.tensor_views(), tcfg.adam_for(tcfg.lr_d));

  std::int64_t start_iteration = 0;
  if (!resume_prefix.empty()) {
    const Checkpoint gc = load_checkpoint(resume_prefix + "_gen.rtc");
    if (gc.kind != ModelKind::generator) throw DataError("resume: not a generator checkpoint");
    checkpoint_get_tensors(gc, gen.tensor_views());
    restore_optimizer(gc, gen.tensor_views(), opt_g);
    start_iteration = static_cast<std::int64_t>(gc.training_step);
    if (!supervised) {
      const Checkpoint dc = load_checkpoint(resume_prefix + "_disc.rtc");
      checkpoint_get_tensors(dc, disc.tensor_views());
      restore_optimizer(dc, disc.tensor_views(), opt_d);
    }
    std::fprintf(stderr, "resumed at iteration %lld\n",
                 static_cast<long long>(start_iteration));
  }

  const ModelKind disc_kind =
      dcfg.subs.size() > 1 ? ModelKind::multiscale : ModelKind::discriminator;
  LossLogWriter log(out_dir + "/loss_log.txt");
  const MetricsConfig mcfg = cfg.metrics_config();
  const Representation rep = cfg.representation();

  TrainHooks hooks;
  hooks.on_iteration = [&](std::int64_t iter, double a, double b) {
    if (supervised) {
      log.line(std::to_string(iter) + " " + format_g(a));
    } else {
      log.line(std::to_string(iter) + " " + format_g(a) + " " + format_g(b));
    }
  };
  if (val) {
    hooks.validate = [&](std::int64_t) {
      const MetricReport report = validate_paired<float>(gcfg, gen, *val, mcfg);
      const auto& v = report.aggregate;
      log.append(" val " + format_g(v.e_ms) + " " + format_g(v.e_lms) + " " + format_g(v.e_mel) +
                 " " + format_g(v.e_lmel) + " " + format_g(v.e_esr));
      return supervised ? v.e_esr : selection_metric(v, rep);
    };
  }
  hooks.on_checkpoint = [&](std::int64_t iter, const std::string& tag) {
    const std::string stem = tag == "periodic" ? "ckpt_" + std::to_string(iter + 1) : "ckpt_" + tag;
    const std::uint64_t step = static_cast<std::uint64_t>(iter) + 1;
    save_checkpoint(make_checkpoint<float>(ModelKind::generator, config_text, step, cfg.seed,
                                           gen.tensor_views(), &opt_g),
                    out_dir + "/" + stem + "_gen.rtc");
    if (!supervised)
      save_checkpoint(make_checkpoint<float>(disc_kind, config_text, step, cfg.seed,
                                             disc.tensor_views(), &opt_d),
                      out_dir + "/" + stem + "_disc.rtc");
  };
  hooks.on_warning = [](const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); };

  if (supervised) {
    train_supervised<float>(data, gcfg, gen, tcfg, opt_g, start_iteration, hooks);
  } else {
    train_adversarial<float>(data, gcfg, gen, dcfg, disc, tcfg, opt_g, opt_d, start_iteration,
                             hooks);
  }
  log.flush();
  return 0;
}

struct LoadedGenerator {
  GeneratorConfig config;
  GeneratorParams<float> params;
  int sample_rate = 0;
};

LoadedGenerator load_generator(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != ModelKind::generator)
    throw DataError("not a generator checkpoint: " + path + " (kind " +
                    model_kind_name(ckpt.kind) + ")");
  // the resolved config block may carry a trailing sample_rate line
  std::string text = ckpt.config_text;
  int sample_rate = 0;
  const std::string key = "sample_rate = ";
  const auto pos = text.find(key);
  if (pos != std::string::npos)
    sample_rate = std::atoi(text.c_str() + pos + key.size());
  const auto resolved = text.find("# resolved");
  if (resolved != std::string::npos) text = text.substr(0, resolved);

  LoadedGenerator g;
  g.config = RunConfig::from_text(text).generator_config();
  g.params = GeneratorParams<float>::zeros(g.config);
  checkpoint_get_tensors(ckpt, g.params.tensor_views());
  g.sample_rate = sample_rate;
  return g;
}

int cmd_process_raw(const LoadedGenerator& g, int block_size) {
  StreamState state(g.config, g.params, block_size);
  std::vector<float> in(static_cast<std::size_t>(block_size));
  std::vector<float> out(static_cast<std::size_t>(block_size));
  for (;;) {
    const std::size_t got = std::fread(in.data(), sizeof(float), in.size(), stdin);
    if (got == 0) break;
    state.process(in.data(), out.data(), got);
    if (std::fwrite(out.data(), sizeof(float), got, stdout) != got)
      throw DataError("raw mode: short write to stdout");
  }
  std::fflush(stdout);
  return 0;
}

int cmd_process(const std::string& ckpt_path, const std::string& in_path,
                const std::string& out_path, int block_size, int bit_depth, bool raw) {
  const LoadedGenerator g = load_generator(ckpt_path);
  if (raw) return cmd_process_raw(g, block_size);
  if (in_path.empty() || out_path.empty())
    throw UsageError("process: input and output files are required (or use --raw)");

  AudioBuffer in = load_audio(in_path);
  if (g.sample_rate > 0 && in.sample_rate != g.sample_rate)
    std::fprintf(stderr, "warning: input rate %d differs from the model's training rate %d\n",
                 in.sample_rate, g.sample_rate);

  StreamState state(g.config, g.params, block_size);
  AudioBuffer out;
  out.sample_rate = in.sample_rate;
  out.samples.resize(in.size());
  state.process(in.samples.data(), out.samples.data(), in.size());
  const std::size_t clipped = save_audio(out, out_path, bit_depth);
  if (clipped > 0)
    std::fprintf(stderr, "warning: %zu output samples were clipped on write\n", clipped);
  return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& dir,
                 const std::string& report_path, int block_size) {
  const LoadedGenerator g = load_generator(ckpt_path);
  const std::string suffix_in = "-input.wav";
  const std::string suffix_target = "-target.wav";

  std::vector<std::string> names;
  for (const auto& f : list_wavs(dir)) {
    if (f.size() > suffix_in.size() &&
        f.compare(f.size() - suffix_in.size(), suffix_in.size(), suffix_in) == 0)
      names.push_back(f.substr(0, f.size() - suffix_in.size()));
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw DataError("no *-input.wav files in " + dir);

  for (const auto& f : list_wavs(dir)) {
    if (f.size() > suffix_target.size() &&
        f.compare(f.size() - suffix_target.size(), suffix_target.size(), suffix_target) == 0) {
      const std::string stem = f.substr(0, f.size() - suffix_target.size());
      if (std::find(names.begin(), names.end(), stem) == names.end())
        throw DataError("unmatched target file: " + f);
    }
  }

  MetricsConfig mcfg;
  std::vector<ClipMetrics> clips;
  for (const auto& stem : names) {
    const AudioBuffer in = load_audio(stem + suffix_in);
    const std::string target_path = stem + suffix_target;
    if (!fs::exists(target_path)) throw DataError("unmatched input file: " + stem + suffix_in);
    const AudioBuffer target = load_audio(target_path);
    if (target.sample_rate != in.sample_rate)
      throw DataError("sample rate mismatch for pair " + stem);
    if (target.size() != in.size()) throw DataError("length mismatch for pair " + stem);

    StreamState state(g.config, g.params, block_size);
    AudioBuffer out;
    out.sample_rate = in.sample_rate;
    out.samples.resize(in.size());
    state.process(in.samples.data(), out.samples.data(), in.size());

    ClipMetrics c;
    c.name = fs::path(stem).filename().string();
    c.length = static_cast<Eigen::Index>(in.size());
    c.values = compute_metrics(out, target, mcfg);
    clips.push_back(std::move(c));
  }
  const MetricReport report = aggregate_metrics(std::move(clips));
  std::fputs(metric_report_text(report).c_str(), stdout);
  if (!report_path.empty()) {
    std::ofstream f(report_path, std::ios::trunc);
    if (!f) throw DataError("cannot write report: " + report_path);
    f << metric_report_keyvalues(report);
  }
  return 0;
}

int cmd_benchmark(const std::string& ckpt_path, double seconds, int block_size, int sample_rate,
                  std::uint64_t seed) {
  GeneratorConfig gcfg;
  GeneratorParams<float> params;
  if (ckpt_path.empty()) {
    Rng rng(seed);
    params = GeneratorParams<float>::init(gcfg, rng);
  } else {
    LoadedGenerator g = load_generator(ckpt_path);
    gcfg = g.config;
    params = std::move(g.params);
  }
  const BenchmarkResult r = benchmark_realtime(params, gcfg, seconds, block_size, sample_rate, seed);
  std::printf("audio_seconds = %.3f\nwall_seconds = %.3f\nrealtime_factor = %.4f\n",
              r.audio_seconds, r.wall_seconds, r.realtime_factor);
  std::printf("%s\n", r.realtime_factor < 1.0 ? "faster than real time" : "SLOWER than real time");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retone: emulate a target electric-guitar timbre from unpaired recordings"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "trim, segment and filter WAVs into a manifest");
  std::string pre_dir, pre_target_dir, pre_out, pre_mode = "alternating", pre_config;
  PreprocessOptions popt{};
  {
    RunConfig defaults;
    popt.trim_threshold_db = defaults.trim_threshold_db;
    popt.trim_window_ms = defaults.trim_window_ms;
    popt.clip_level = defaults.clip_level;
    popt.clip_min_run = defaults.clip_min_run;
    popt.clip_max_ratio = defaults.clip_max_ratio;
    popt.segment_seconds = defaults.segment_seconds;
  }
  pre->add_option("dir", pre_dir, "directory of WAV files (input domain)")->required();
  pre->add_option("-o,--output", pre_out, "manifest file to write")->required();
  pre->add_option("--mode", pre_mode, "alternating | unpaired");
  pre->add_option("--target-dir", pre_target_dir, "target-domain directory (unpaired mode)");
  pre->add_option("--config", pre_config, "run configuration file (defaults for thresholds)");
  pre->add_option("--trim-threshold-db", popt.trim_threshold_db, "silence trim threshold (dBFS)");
  pre->add_option("--trim-window-ms", popt.trim_window_ms, "silence trim RMS window (ms)");
  pre->add_option("--clip-level", popt.clip_level, "amplitude counted as clipped");
  pre->add_option("--clip-min-run", popt.clip_min_run, "minimum clipped run length");
  pre->add_option("--clip-max-ratio", popt.clip_max_ratio, "max clipped fraction per segment");
  pre->add_option("--segment-seconds", popt.segment_seconds, "segment length in seconds");
  pre->add_option("--skip-seconds", popt.skip_seconds, "drop this much leading audio (count-in)");
  pre->add_flag("--no-trim", popt.no_trim, "disable silence trimming");

  // train
  auto* train = app.add_subcommand("train", "adversarial or supervised training");
  train->footer("run configuration keys (key = value file passed with --config):\n" +
                RunConfig::help_text());
  std::string train_config, train_manifest, train_val_manifest, train_out, train_root,
      train_resume;
  train->add_option("--config", train_config, "run configuration file");
  train->add_option("--manifest", train_manifest, "training manifest")->required();
  train->add_option("--val-manifest", train_val_manifest, "paired validation manifest");
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--data-root", train_root, "prefix for relative manifest paths");
  train->add_option("--resume", train_resume,
                    "checkpoint prefix to resume from (expects <prefix>_gen.rtc)");

  // process
  auto* proc = app.add_subcommand("process", "run a trained generator over audio");
  std::string proc_ckpt, proc_in, proc_out;
  int proc_block = 512, proc_depth = 16;
  bool proc_raw = false;
  proc->add_option("checkpoint", proc_ckpt, "generator checkpoint")->required();
  proc->add_option("input", proc_in, "input WAV");
  proc->add_option("output", proc_out, "output WAV");
  proc->add_option("--block-size", proc_block, "streaming block size");
  proc->add_option("--bit-depth", proc_depth, "output bit depth (16, 24 or 32)");
  proc->add_flag("--raw", proc_raw, "read float32 samples from stdin, write to stdout");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "metrics over a paired directory");
  std::string eval_ckpt, eval_dir, eval_report;
  int eval_block = 4096;
  eval->add_option("checkpoint", eval_ckpt, "generator checkpoint")->required();
  eval->add_option("dir", eval_dir, "directory of <name>-input.wav / <name>-target.wav pairs")
      ->required();
  eval->add_option("--out", eval_report, "write aggregate metrics as key = value");
  eval->add_option("--block-size", eval_block, "streaming block size");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "real-time factor of the streaming engine");
  std::string bench_ckpt;
  double bench_seconds = 10.0;
  int bench_block = 512, bench_rate = 44100;
  std::uint64_t bench_seed = 1;
  bench->add_option("--checkpoint", bench_ckpt, "generator checkpoint (default: fresh init)");
  bench->add_option("--seconds", bench_seconds, "amount of audio to stream");
  bench->add_option("--block-size", bench_block, "streaming block size");
  bench->add_option("--sample-rate", bench_rate, "nominal sample rate");
  bench->add_option("--seed", bench_seed, "seed for the benchmark source noise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (pre->parsed()) {
      if (!pre_config.empty()) {
        RunConfig cfg = RunConfig::from_file(pre_config);
        if (pre->count("--trim-threshold-db") == 0) popt.trim_threshold_db = cfg.trim_threshold_db;
        if (pre->count("--trim-window-ms") == 0) popt.trim_window_ms = cfg.trim_window_ms;
        if (pre->count("--clip-level") == 0) popt.clip_level = cfg.clip_level;
        if (pre->count("--clip-min-run") == 0) popt.clip_min_run = cfg.clip_min_run;
        if (pre->count("--clip-max-ratio") == 0) popt.clip_max_ratio = cfg.clip_max_ratio;
        if (pre->count("--segment-seconds") == 0) popt.segment_seconds = cfg.segment_seconds;
      }
      return cmd_preprocess(pre_dir, pre_target_dir, pre_out, pre_mode, popt);
    }
    if (train->parsed())
      return cmd_train(train_config, train_manifest, train_val_manifest, train_out, train_root,
                       train_resume);
    if (proc->parsed())
      return cmd_process(proc_ckpt, proc_in, proc_out, proc_block, proc_depth, proc_raw);
    if (eval->parsed()) return cmd_evaluate(eval_ckpt, eval_dir, eval_report, eval_block);
    if (bench->parsed())
      return cmd_benchmark(bench_ckpt, bench_seconds, bench_block, bench_rate, bench_seed);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
