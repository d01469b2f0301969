// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria. An optional argument selects one criterion.
//
// The two training criteria (6, 7) run on synthetic tanh-distortion
// material; their sample rates (8 kHz / 4 kHz) keep desk-scale runtimes
// sane on one CPU core without changing any model architecture.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "retone/losses.hpp"
#include "retone/metrics.hpp"
#include "retone/spectrogram.hpp"
#include "retone/streaming.hpp"
#include "retone/training.hpp"
#include "support.hpp"

using namespace retone;
using namespace retone::testsupport;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename S>
ArrayX<S> random_signal(Eigen::Index n, std::uint64_t seed, double amp = 0.8) {
  Rng rng(seed);
  ArrayX<S> x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = static_cast<S>(rng.uniform(-amp, amp));
  return x;
}

// --- criterion 1: receptive field ------------------------------------------

/// All-positive weights, zero biases: the zero-input baseline stays exactly
/// zero and every reachable lag gets a strictly positive contribution, so
/// the impulse response support is the receptive field without cancellation.
template <typename S>
GeneratorParams<S> propagation_params(const GeneratorConfig& cfg) {
  auto p = GeneratorParams<S>::zeros(cfg);
  p.input_w.setConstant(S(1));
  for (auto& l : p.layers) {
    for (auto& w : l.filter_w) w.setConstant(S(0.25));
    for (auto& w : l.gate_w) w.setConstant(S(0.25));
    l.residual_w.setConstant(S(0.1));
  }
  p.post_w.setConstant(S(0.5));
  return p;
}

bool criterion_receptive_field(std::string& detail) {
  GeneratorConfig cfg;  // default: two stacks of nine, kernel 3
  const int formula = receptive_field(cfg);
  auto params = propagation_params<float>(cfg);
  const Eigen::Index n = 2200;
  ArrayX<float> impulse = ArrayX<float>::Zero(n);
  impulse[0] = 1e-3f;
  ArrayX<float> response = generator_forward<float>(impulse, params, cfg).abs();
  Eigen::Index last = -1;
  bool gap = false;
  for (Eigen::Index t = 0; t < n; ++t)
    if (response[t] != 0.0f) last = t;
  for (Eigen::Index t = 0; t <= last; ++t)
    if (response[t] == 0.0f) gap = true;
  const auto measured = last + 1;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "formula %d, measured %lld samples (%.2f ms at 44.1 kHz), contiguous %s", formula,
                static_cast<long long>(measured), 1000.0 * measured / 44100.0, gap ? "no" : "yes");
  detail = buf;
  return formula == 2045 && measured == 2045 && !gap;
}

// --- criterion 2: causality -------------------------------------------------

bool criterion_causality(std::string& detail) {
  GeneratorConfig cfg;
  Rng rng(101);
  auto params = GeneratorParams<float>::init(cfg, rng);
  const Eigen::Index n = 2300;
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng trial_rng(200 + static_cast<std::uint64_t>(trial));
    const Eigen::Index prefix = 1 + static_cast<Eigen::Index>(trial_rng.index(n - 1));
    ArrayX<float> a = random_signal<float>(n, 300 + static_cast<std::uint64_t>(trial));
    ArrayX<float> b = a;
    for (Eigen::Index t = prefix; t < n; ++t)
      b[t] = static_cast<float>(trial_rng.uniform(-0.8, 0.8));
    ArrayX<float> ya = generator_forward<float>(a, params, cfg);
    ArrayX<float> yb = generator_forward<float>(b, params, cfg);
    for (Eigen::Index t = 0; t < prefix; ++t)
      if (ya[t] != yb[t]) {
        ++failures;
        break;
      }
  }
  detail = "100 random prefix pairs, " + std::to_string(failures) + " mismatches (exact compare)";
  return failures == 0;
}

// --- criterion 3: streaming equivalence -------------------------------------

bool criterion_streaming(std::string& detail) {
  GeneratorConfig cfg;
  Rng rng(401);
  auto params = GeneratorParams<float>::init(cfg, rng);
  ArrayX<float> x = random_signal<float>(6000, 402);
  ArrayX<float> offline = generator_forward<float>(x, params, cfg);

  StreamState state(cfg, params, 4096);
  float worst = 0.0f;
  Rng part_rng(403);
  for (int trial = 0; trial < 50; ++trial) {
    state.reset();
    ArrayX<float> streamed(x.size());
    Eigen::Index done = 0;
    while (done < x.size()) {
      const auto block = static_cast<Eigen::Index>(std::min<std::size_t>(
          1 + part_rng.index(4096), static_cast<std::size_t>(x.size() - done)));
      state.process(x.data() + done, streamed.data() + done, static_cast<std::size_t>(block));
      done += block;
    }
    worst = std::max(worst, (streamed - offline).abs().maxCoeff());
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "50 random partitions, max |streamed - offline| = %.3g", worst);
  detail = buf;
  return worst < 1e-5f;
}

// --- criterion 4: gradient correctness (miniature system) -------------------

struct FdStats {
  double max_rel = 0.0;
  long checked = 0;
};

template <typename LossFn, typename S>
void fd_check(std::vector<TensorView<S>> params, const std::vector<TensorView<S>>& grads,
              LossFn&& loss, FdStats& stats, double h = 1e-4) {
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (Eigen::Index i = 0; i < params[t].size(); ++i) {
      const double saved = params[t].data[i];
      params[t].data[i] = saved + h;
      const double fp = loss();
      params[t].data[i] = saved - h;
      const double fm = loss();
      params[t].data[i] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = grads[t].data[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
      stats.max_rel = std::max(stats.max_rel, std::abs(fd - an) / denom);
      ++stats.checked;
    }
  }
}

bool criterion_gradients(std::string& detail) {
  // miniature: generator 2 layers / 4 channels, discriminator 2 layers /
  // 8 channels, 1024-sample segments, double precision
  GeneratorConfig gcfg;
  gcfg.n_stacks = 1;
  gcfg.layers_per_stack = 2;
  gcfg.channels = 4;
  MultiScaleConfig dcfg = MultiScaleConfig::make(Representation::log_mel, {128}, 12);
  for (auto& sub : dcfg.subs) sub.layers = {{3, 8, 2}, {3, 1, 1}};
  const int sr = 4000;

  // Central differences are only valid away from the Leaky ReLU and hinge
  // kinks, so screen seeds until every pre-activation clears zero by a
  // margin larger than any h-induced shift. This picks a generic smooth
  // evaluation point; it does not loosen the check itself.
  GeneratorParams<double> gen;
  MultiScaleParams<double> disc;
  ArrayX<double> x, y;
  std::uint64_t seed = 501;
  double margin = 0.0;
  for (;; ++seed) {
    Rng rng(seed);
    gen = GeneratorParams<double>::init(gcfg, rng);
    disc = MultiScaleParams<double>::init(dcfg, rng);
    x = random_signal<double>(1024, seed * 7 + 1, 0.7);
    y = random_signal<double>(1024, seed * 7 + 2, 0.7);
    auto min_pre = [&](const ArrayX<double>& audio) {
      std::vector<DiscriminatorTape<double>> tapes;
      const auto scores = multiscale_forward<double>(audio, disc, dcfg, sr, &tapes);
      double m = 1e9;
      for (double s : scores) m = std::min({m, std::abs(1.0 - s), std::abs(1.0 + s)});
      for (const auto& t : tapes)
        for (std::size_t i = 1; i < t.padded.size(); ++i)
          for (Eigen::Index c = 0; c < t.padded[i].size(); ++c) {
            const double post = t.padded[i].data()[c];
            if (post == 0.0) continue;  // padding zeros
            m = std::min(m, post >= 0 ? post : -post / 0.2);
          }
      return m;
    };
    margin = std::min(min_pre(y), min_pre(generator_forward<double>(x, gen, gcfg)));
    if (margin > 0.01) break;
    if (seed > 600) break;  // give up screening; run anyway and report
  }
  const std::size_t n_subs = dcfg.subs.size();

  // discriminator loss (one real, one fake segment)
  auto loss_d_fn = [&] {
    const auto real = multiscale_forward<double>(y, disc, dcfg, sr);
    const auto fake =
        multiscale_forward<double>(generator_forward<double>(x, gen, gcfg), disc, dcfg, sr);
    return static_cast<double>(hinge_loss_d<double>(real, fake));
  };
  MultiScaleParams<double> dgrads = MultiScaleParams<double>::zeros(dcfg);
  {
    std::vector<DiscriminatorTape<double>> tapes;
    const auto real = multiscale_forward<double>(y, disc, dcfg, sr, &tapes);
    for (std::size_t k = 0; k < n_subs; ++k) {
      const double u = hinge_loss_d_grad_real(real[k], n_subs);
      if (u != 0) discriminator_backward(tapes[k], disc.subs[k], u, dgrads.subs[k]);
    }
    const ArrayX<double> fake = generator_forward<double>(x, gen, gcfg);
    const auto fs = multiscale_forward<double>(fake, disc, dcfg, sr, &tapes);
    for (std::size_t k = 0; k < n_subs; ++k) {
      const double u = hinge_loss_d_grad_fake(fs[k], n_subs);
      if (u != 0) discriminator_backward(tapes[k], disc.subs[k], u, dgrads.subs[k]);
    }
  }
  FdStats stats_d;
  fd_check(disc.tensor_views(), dgrads.tensor_views(), loss_d_fn, stats_d);

  // generator loss through the frozen discriminator and front end
  auto loss_g_fn = [&] {
    return static_cast<double>(hinge_loss_g<double>(
        multiscale_forward<double>(generator_forward<double>(x, gen, gcfg), disc, dcfg, sr)));
  };
  GeneratorParams<double> ggrads;
  {
    GeneratorTape<double> gtape;
    const ArrayX<double> fake = generator_forward<double>(x, gen, gcfg, &gtape);
    std::vector<DiscriminatorTape<double>> tapes;
    multiscale_forward<double>(fake, disc, dcfg, sr, &tapes);
    ArrayX<double> d_audio = ArrayX<double>::Zero(fake.size());
    MultiScaleParams<double> scratch = MultiScaleParams<double>::zeros(dcfg);
    for (std::size_t k = 0; k < n_subs; ++k)
      d_audio += discriminator_backward(tapes[k], disc.subs[k],
                                        hinge_loss_g_grad<double>(n_subs), scratch.subs[k], false);
    generator_backward(gtape, gen, d_audio, ggrads);
  }
  FdStats stats_g;
  fd_check(gen.tensor_views(), ggrads.tensor_views(), loss_g_fn, stats_g);

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "D loss: %ld params max rel err %.3g; G loss: %ld params max rel err %.3g "
                "(seed %llu, kink margin %.3f)",
                stats_d.checked, stats_d.max_rel, stats_g.checked, stats_g.max_rel,
                static_cast<unsigned long long>(seed), margin);
  detail = buf;
  return stats_d.max_rel < 1e-4 && stats_g.max_rel < 1e-4;
}

// --- criterion 5: hinge-loss arithmetic --------------------------------------

bool criterion_hinge(std::string& detail) {
  const bool d_ok = hinge_loss_d<double>({1.0, 1.0}, {-1.0, -1.0}) == 0.0 &&
                    hinge_loss_d<double>({0.0}, {0.0}) == 2.0 &&
                    hinge_loss_d<double>({-0.5}, {0.5}) == 3.0;
  const bool g_ok = hinge_loss_g<double>({0.0, 0.0}) == 0.0 &&
                    hinge_loss_g<double>({1.0}) == -1.0 &&
                    hinge_loss_g<double>({0.5, -0.5}) == 0.0;
  detail = std::string("D triples ") + (d_ok ? "exact" : "WRONG") + ", G triples " +
           (g_ok ? "exact" : "WRONG");
  return d_ok && g_ok;
}

// --- criteria 6 and 7: desk-scale training ----------------------------------

bool criterion_supervised(std::string& detail) {
  const int sr = 8000;
  SegmentStore all = paired_tanh_store(120.0, sr, 2.0, 42);
  SegmentStore train, val;
  train.sample_rate = val.sample_rate = sr;
  train.segment_length = val.segment_length = all.segment_length;
  for (std::size_t i = 0; i < all.inputs.size(); ++i) {
    auto& dst = (i + 4 >= all.inputs.size()) ? val : train;
    dst.inputs.push_back(all.inputs[i]);
    dst.targets.push_back(all.targets[i]);
  }

  GeneratorConfig gcfg;  // default generator
  Rng rng(7);
  auto gen = GeneratorParams<float>::init(gcfg, rng);
  TrainConfig cfg;
  cfg.batch_size = 5;
  cfg.iterations = 20000;
  cfg.lr_g = 1e-3;
  cfg.validate_every = 100;
  cfg.checkpoint_every = 0;
  cfg.seed = 42;
  AdamState<float> opt(gen.tensor_views(), cfg.adam_for(cfg.lr_g));
  MetricsConfig mcfg;

  struct Reached {
    std::int64_t iter = -1;
    double esr = 0.0;
  };
  Reached reached;
  const auto t0 = Clock::now();
  TrainHooks hooks;
  hooks.validate = [&](std::int64_t iter) {
    const double esr = validate_paired<float>(gcfg, gen, val, mcfg).aggregate.e_esr;
    if (esr < 0.05 && reached.iter < 0) {
      reached.iter = iter;
      reached.esr = esr;
      throw NumericalError("done");  // stop the run; criterion met
    }
    if (seconds_since(t0) > 2700.0)
      throw NumericalError("time budget exhausted before reaching the threshold");
    return esr;
  };
  try {
    train_supervised<float>(train, gcfg, gen, cfg, opt, 0, hooks);
  } catch (const NumericalError&) {
    // thrown by the validation hook to stop early
  }
  char buf[160];
  if (reached.iter >= 0) {
    std::snprintf(buf, sizeof(buf),
                  "validation ESR %.4f < 0.05 after %lld iterations (%.0f s, bound 20k)",
                  reached.esr, static_cast<long long>(reached.iter) + 1, seconds_since(t0));
    detail = buf;
    return true;
  }
  std::snprintf(buf, sizeof(buf), "ESR still >= 0.05 when the run stopped (%.0f s)",
                seconds_since(t0));
  detail = buf;
  return false;
}

bool criterion_adversarial(std::string& detail) {
  const int sr = 4000;
  SegmentStore train = unpaired_tanh_store(120.0, sr, 2.0, 42);
  SegmentStore val;
  val.sample_rate = sr;
  val.segment_length = train.segment_length;
  {
    const ArrayX<float> vx = synth_plucks(8.0, sr, 43);
    const ArrayX<float> vy = tanh_drive(vx);
    for (Eigen::Index s = 0; s + val.segment_length <= vx.size(); s += val.segment_length) {
      val.inputs.push_back(vx.segment(s, val.segment_length));
      val.targets.push_back(vy.segment(s, val.segment_length));
    }
  }

  GeneratorConfig gcfg;  // default generator
  MultiScaleConfig dcfg = MultiScaleConfig::make(Representation::log_mel);  // Log Mel / 3
  Rng rng(7);
  auto gen = GeneratorParams<float>::init(gcfg, rng);
  auto disc = MultiScaleParams<float>::init(dcfg, rng);
  TrainConfig cfg;
  cfg.batch_size = 5;
  cfg.iterations = 50000;
  cfg.lr_g = 1e-4;
  cfg.lr_d = 1e-4;
  cfg.validate_every = 100;
  cfg.checkpoint_every = 0;
  cfg.seed = 42;
  AdamState<float> opt_g(gen.tensor_views(), cfg.adam_for(cfg.lr_g));
  AdamState<float> opt_d(disc.tensor_views(), cfg.adam_for(cfg.lr_d));
  MetricsConfig mcfg;

  const double baseline = validate_paired<float>(gcfg, gen, val, mcfg).aggregate.e_lmel;

  struct Status {
    std::int64_t iter = -1;
    double lmel = 0.0;
    bool losses_finite = true;
  };
  Status status;
  const auto t0 = Clock::now();
  TrainHooks hooks;
  hooks.on_iteration = [&](std::int64_t, double loss_d, double loss_g) {
    if (!std::isfinite(loss_d) || !std::isfinite(loss_g)) status.losses_finite = false;
  };
  hooks.validate = [&](std::int64_t iter) {
    const double lmel = validate_paired<float>(gcfg, gen, val, mcfg).aggregate.e_lmel;
    if (lmel < 0.5 * baseline && status.iter < 0) {
      status.iter = iter;
      status.lmel = lmel;
      throw NumericalError("done");
    }
    if (seconds_since(t0) > 5400.0)
      throw NumericalError("time budget exhausted before halving");
    return lmel;
  };
  try {
    train_adversarial<float>(train, gcfg, gen, dcfg, disc, cfg, opt_g, opt_d, 0, hooks);
  } catch (const NumericalError&) {
  }
  char buf[200];
  if (status.iter >= 0 && status.losses_finite) {
    std::snprintf(buf, sizeof(buf),
                  "val lmel %.4f vs untrained %.4f (-%.0f%%) after %lld iterations (%.0f s, "
                  "bound 50k); all losses finite",
                  status.lmel, baseline, 100.0 * (1.0 - status.lmel / baseline),
                  static_cast<long long>(status.iter) + 1, seconds_since(t0));
    detail = buf;
    return true;
  }
  std::snprintf(buf, sizeof(buf), "lmel not halved (baseline %.4f) or losses non-finite (%.0f s)",
                baseline, seconds_since(t0));
  detail = buf;
  return false;
}

// --- criterion 8: real-time factor -------------------------------------------

bool criterion_realtime(std::string& detail) {
  GeneratorConfig cfg;  // default
  Rng rng(801);
  auto params = GeneratorParams<float>::init(cfg, rng);
  const BenchmarkResult r = benchmark_realtime(params, cfg, 10.0, 512, 44100, 1);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "block 512 at 44.1 kHz: factor %.3f (%.2f s for %.2f s audio)",
                r.realtime_factor, r.wall_seconds, r.audio_seconds);
  detail = buf;
  return r.realtime_factor < 1.0;
}

// --- criterion 9: front-end correctness ---------------------------------------

MatrixX<double> brute_dft_magnitudes(const ArrayX<double>& x, int n_window, int hop) {
  const auto n_frames = static_cast<Eigen::Index>((x.size() - n_window) / hop + 1);
  const int n_bins = n_window / 2 + 1;
  VectorX<double> w(n_window);
  for (int i = 0; i < n_window; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n_window));
  // direct DFT sum; twiddle lookup via (k*n) mod N keeps it honest and fast
  std::vector<double> cos_table(static_cast<std::size_t>(n_window)),
      sin_table(static_cast<std::size_t>(n_window));
  for (int i = 0; i < n_window; ++i) {
    cos_table[static_cast<std::size_t>(i)] = std::cos(2.0 * M_PI * i / n_window);
    sin_table[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * i / n_window);
  }
  MatrixX<double> mags(n_bins, n_frames);
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    for (int k = 0; k < n_bins; ++k) {
      double re = 0.0, im = 0.0;
      std::size_t phase = 0;
      for (int n = 0; n < n_window; ++n) {
        const double v = w[n] * x[t * hop + n];
        re += v * cos_table[phase];
        im -= v * sin_table[phase];
        phase += static_cast<std::size_t>(k);
        if (phase >= static_cast<std::size_t>(n_window)) phase -= static_cast<std::size_t>(n_window);
      }
      mags(k, t) = std::hypot(re, im);
    }
  }
  return mags;
}

bool criterion_frontend(std::string& detail) {
  const ArrayX<double> x = random_signal<double>(44100, 901);
  double worst = 0.0;
  for (int n : {512, 1024, 2048}) {
    SpectrogramConfig cfg = SpectrogramConfig::with_default_hop(n);
    const MatrixX<double> got = stft_magnitude<double>(x, cfg).values;
    const MatrixX<double> oracle = brute_dft_magnitudes(x, n, cfg.hop);
    const double floor = 1e-9 * oracle.maxCoeff();
    for (Eigen::Index j = 0; j < got.cols(); ++j)
      for (Eigen::Index i = 0; i < got.rows(); ++i) {
        const double rel =
            std::abs(got(i, j) - oracle(i, j)) / std::max(std::abs(oracle(i, j)), floor);
        worst = std::max(worst, rel);
      }
  }

  MelConfig mel;
  mel.n_mels = 160;
  const auto fb = mel_filterbank<double>(mel, 513, 44100);
  const auto centers = mel_center_frequencies(mel, 44100);
  bool mel_ok = fb.rows() == 160;
  for (std::size_t m = 1; m < centers.size(); ++m)
    if (!(centers[m] > centers[m - 1])) mel_ok = false;
  Eigen::Index prev_arg = -1;
  for (Eigen::Index m = 0; m < fb.rows(); ++m) {
    Eigen::Index arg;
    fb.row(m).maxCoeff(&arg);
    if (arg < prev_arg) mel_ok = false;
    prev_arg = arg;
    if (!(fb.row(m).sum() > 0.0)) mel_ok = false;
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "STFT vs brute DFT max rel err %.3g over windows {512,1024,2048}; mel: 160 rows, "
                "peaks increasing: %s",
                worst, mel_ok ? "yes" : "NO");
  detail = buf;
  return worst < 1e-6 && mel_ok;
}

// --- criterion 10: metric identities ------------------------------------------

bool criterion_metrics(std::string& detail) {
  const ArrayX<double> y = random_signal<double>(12000, 1001, 0.6);
  const double esr_half = esr_metric((0.5 * y).eval(), y);
  MetricsConfig cfg;
  const MetricValues same = compute_metrics(y, y, 8000, cfg);
  const double flip =
      multiscale_spectral_loss(y, (-y).eval(), cfg.fft_sizes, SpectrogramScale::linear);
  const bool ok = std::abs(esr_half - 0.25) < 1e-6 && same.e_ms == 0.0 && same.e_lms == 0.0 &&
                  same.e_mel == 0.0 && same.e_lmel == 0.0 && same.e_esr == 0.0 && flip == 0.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "ESR(0.5y, y) = %.9f; identical-pair metrics all zero: %s; sign-flip e_ms = %g",
                esr_half,
                (same.e_ms == 0 && same.e_lms == 0 && same.e_mel == 0 && same.e_lmel == 0 &&
                 same.e_esr == 0)
                    ? "yes"
                    : "NO",
                flip);
  detail = buf;
  return ok;
}

struct Criterion {
  int number;
  const char* name;
  bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "receptive field is exactly 2045 samples", criterion_receptive_field},
    {2, "causality over shared prefixes", criterion_causality},
    {3, "streaming equals offline within 1e-5", criterion_streaming},
    {4, "hinge-loss gradients match finite differences", criterion_gradients},
    {5, "hinge-loss arithmetic", criterion_hinge},
    {6, "supervised toy training reaches ESR < 0.05", criterion_supervised},
    {7, "adversarial toy training halves validation lmel", criterion_adversarial},
    {8, "real-time factor below 1.0", criterion_realtime},
    {9, "front-end matches brute-force DFT; mel structure", criterion_frontend},
    {10, "metric identities", criterion_metrics},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.number != only) continue;
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", c.number, ok ? "PASS" : "FAIL", c.name,
                detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  std::printf(failures == 0 ? "all criteria passed\n" : "%d criteria FAILED\n", failures);
  return failures;
}
