#include "retone/runconfig.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "retone/errors.hpp"

namespace retone {

namespace {

struct KeyEntry {
  const char* name;
  const char* description;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& v, const char* key) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw UsageError(std::string("config: bad value for ") + key + ": '" + v + "'");
    }
  } else {
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
      throw UsageError(std::string("config: bad value for ") + key + ": '" + v + "'");
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

#define NUM_KEY(field, desc)                                                       \
  KeyEntry {                                                                       \
    #field, desc, [](const RunConfig& c) { return format_double(double(c.field)); }, \
        [](RunConfig& c, const std::string& v) {                                   \
          c.field = parse_number<decltype(c.field)>(v, #field);                    \
        }                                                                          \
  }

#define STR_KEY(field, desc)                                              \
  KeyEntry {                                                              \
    #field, desc, [](const RunConfig& c) { return c.field; },             \
        [](RunConfig& c, const std::string& v) { c.field = v; }           \
  }

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = {
      NUM_KEY(seed, "master seed; all randomness derives from it"),
      NUM_KEY(trim_threshold_db, "silence trim RMS threshold in dBFS (negative)"),
      NUM_KEY(trim_window_ms, "silence trim RMS window in milliseconds"),
      NUM_KEY(clip_level, "absolute amplitude counted as clipped"),
      NUM_KEY(clip_min_run, "minimum consecutive clipped samples to count a run"),
      NUM_KEY(clip_max_ratio, "segment dropped when clipped fraction exceeds this"),
      NUM_KEY(segment_seconds, "training segment length in seconds"),
      NUM_KEY(gen_stacks, "generator dilation stacks"),
      NUM_KEY(gen_layers_per_stack, "dilated conv layers per stack"),
      NUM_KEY(gen_kernel_size, "generator conv kernel size"),
      NUM_KEY(gen_dilation_growth, "dilation growth factor per layer"),
      NUM_KEY(gen_channels, "generator hidden channels"),
      STR_KEY(disc_input, "discriminator input: spect | mel | log-spect | log-mel"),
      NUM_KEY(disc_scales, "number of sub-discriminators: 1 or 3"),
      NUM_KEY(disc_window, "STFT window for the single-scale discriminator"),
      NUM_KEY(mel_bands, "mel bands for mel representations"),
      NUM_KEY(log_epsilon, "epsilon inside log scaling"),
      STR_KEY(train_mode, "adversarial | supervised"),
      NUM_KEY(batch_size, "segments per training batch"),
      NUM_KEY(iterations, "training iterations"),
      NUM_KEY(lr_g, "generator Adam learning rate"),
      NUM_KEY(lr_d, "discriminator Adam learning rate"),
      NUM_KEY(adam_beta1, "Adam first-moment decay"),
      NUM_KEY(adam_beta2, "Adam second-moment decay"),
      NUM_KEY(adam_epsilon, "Adam denominator epsilon"),
      NUM_KEY(d_steps_per_g_step, "discriminator updates per generator update"),
      NUM_KEY(preemph_coeff, "pre-emphasis coefficient for the ESR loss"),
      NUM_KEY(checkpoint_every, "periodic checkpoint interval in iterations"),
      NUM_KEY(validate_every, "validation interval in iterations (0 = never)"),
      NUM_KEY(mask_receptive_field,
              "exclude the first receptive_field-1 samples from the supervised loss"),
      NUM_KEY(tiny, "shrink both models for smoke runs"),
      STR_KEY(metric_fft_sizes, "comma-separated FFT sizes for the multi-scale metric"),
  };
  return table;
}

#undef NUM_KEY
#undef STR_KEY

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool found = false;
    for (const auto& entry : key_table()) {
      if (key == entry.name) {
        entry.set(cfg, value);
        found = true;
        break;
      }
    }
    if (!found) throw UsageError("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& entry : key_table()) {
    out += entry.name;
    out += " = ";
    out += entry.get(*this);
    out += "\n";
  }
  return out;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write config: " + path);
  f << to_text();
}

std::string RunConfig::help_text() {
  RunConfig defaults;
  std::string out;
  for (const auto& entry : key_table()) {
    out += "  ";
    out += entry.name;
    out += " (default ";
    out += entry.get(defaults);
    out += "): ";
    out += entry.description;
    out += "\n";
  }
  return out;
}

std::vector<std::string> RunConfig::key_names() {
  std::vector<std::string> names;
  for (const auto& entry : key_table()) names.emplace_back(entry.name);
  return names;
}

GeneratorConfig RunConfig::generator_config() const {
  GeneratorConfig g;
  g.n_stacks = gen_stacks;
  g.layers_per_stack = gen_layers_per_stack;
  g.kernel_size = gen_kernel_size;
  g.dilation_growth = gen_dilation_growth;
  g.channels = gen_channels;
  if (tiny) {
    g.n_stacks = 1;
    g.layers_per_stack = 4;
    g.channels = 4;
  }
  return g;
}

Representation RunConfig::representation() const {
  if (disc_input == "spect") return Representation::spectrogram;
  if (disc_input == "mel") return Representation::mel;
  if (disc_input == "log-spect") return Representation::log_spectrogram;
  if (disc_input == "log-mel") return Representation::log_mel;
  throw UsageError("config: disc_input must be spect | mel | log-spect | log-mel");
}

MultiScaleConfig RunConfig::discriminator_config() const {
  std::vector<int> windows;
  if (disc_scales == 3) {
    windows = {512, 1024, 2048};
  } else if (disc_scales == 1) {
    windows = {disc_window};
  } else {
    throw UsageError("config: disc_scales must be 1 or 3");
  }
  MultiScaleConfig cfg = MultiScaleConfig::make(representation(), windows, mel_bands, log_epsilon);
  if (tiny) {
    for (auto& sub : cfg.subs) sub.layers = {{5, 8, 1}, {3, 16, 4}, {3, 1, 1}};
  }
  return cfg;
}

MetricsConfig RunConfig::metrics_config() const {
  MetricsConfig m;
  m.fft_sizes = parsed_fft_sizes();
  m.n_mels = mel_bands;
  m.log_epsilon = log_epsilon;
  m.preemph_coeff = preemph_coeff;
  return m;
}

std::vector<int> RunConfig::parsed_fft_sizes() const {
  std::vector<int> sizes;
  std::istringstream in(metric_fft_sizes);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    sizes.push_back(parse_number<int>(tok, "metric_fft_sizes"));
  }
  if (sizes.empty()) throw UsageError("config: metric_fft_sizes is empty");
  return sizes;
}

void RunConfig::validate() const {
  generator_config().validate();
  (void)representation();
  if (batch_size < 1) throw UsageError("config: batch_size must be >= 1");
  if (iterations < 1) throw UsageError("config: iterations must be >= 1");
  if (!(segment_seconds > 0)) throw UsageError("config: segment_seconds must be > 0");
  if (d_steps_per_g_step < 1) throw UsageError("config: d_steps_per_g_step must be >= 1");
  if (train_mode != "adversarial" && train_mode != "supervised")
    throw UsageError("config: train_mode must be adversarial | supervised");
  if (!(trim_threshold_db < 0)) throw UsageError("config: trim_threshold_db must be negative");
  if (!(trim_window_ms > 0)) throw UsageError("config: trim_window_ms must be positive");
  if (!(clip_level > 0 && clip_level <= 1)) throw UsageError("config: clip_level in (0, 1]");
  if (clip_min_run < 1) throw UsageError("config: clip_min_run must be >= 1");
  (void)parsed_fft_sizes();
}

}  // namespace retone
