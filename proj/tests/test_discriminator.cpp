#include <cmath>

#include "doctest.h"
#include "retone/discriminator.hpp"
#include "retone/rng.hpp"

using namespace retone;

namespace {

ArrayX<double> random_audio(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  ArrayX<double> x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(-0.8, 0.8);
  return x;
}

// 2 layers, 8 hidden channels, log-mel front end over a 16-sample window.
DiscriminatorConfig mini_config() {
  DiscriminatorConfig cfg;
  cfg.layers = {{3, 8, 2}, {3, 1, 1}};
  cfg.representation = representation_config(Representation::log_mel, 16, 6, 1e-5);
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("discriminator");

TEST_CASE("Table-1 stack bookkeeping") {
  auto stack = DiscriminatorConfig::default_stack();
  REQUIRE(stack.size() == 7);
  CHECK(stack[0].kernel == 10);
  CHECK(stack[5].kernel == 5);
  CHECK(stack[6].out_channels == 1);

  DiscriminatorConfig cfg = DiscriminatorConfig::make(Representation::mel);
  cfg.validate();
  // layer 2: 32 in, 128 out, 8 groups -> each group maps 4 -> 16 channels
  CHECK(cfg.in_channels(1) == 32);
  CHECK(cfg.layers[1].out_channels / cfg.layers[1].groups == 16);
  CHECK(cfg.in_channels(1) / cfg.layers[1].groups == 4);

  auto params = DiscriminatorParams<float>::zeros(cfg);
  CHECK(params.layers[1].dir.rows() == 128);
  CHECK(params.layers[1].dir.cols() == 4 * 21);
}

TEST_CASE("multiscale window sizes give the right bin counts") {
  MultiScaleConfig spect = MultiScaleConfig::make(Representation::spectrogram);
  REQUIRE(spect.subs.size() == 3);
  CHECK(spect.subs[0].representation.n_rows() == 257);
  CHECK(spect.subs[1].representation.n_rows() == 513);
  CHECK(spect.subs[2].representation.n_rows() == 1025);
  CHECK(spect.subs[0].representation.hop == 128);
  CHECK(spect.subs[2].representation.hop == 512);

  MultiScaleConfig mel = MultiScaleConfig::make(Representation::log_mel);
  for (const auto& sub : mel.subs) CHECK(sub.representation.n_rows() == 160);
}

TEST_CASE("zero parameters score zero for any input") {
  DiscriminatorConfig cfg = mini_config();
  auto params = DiscriminatorParams<double>::zeros(cfg);
  ArrayX<double> x = random_audio(500, 1);
  CHECK(discriminator_forward<double>(x, params, cfg, 8000) == 0.0);
}

TEST_CASE("score is the time-mean of the final layer") {
  DiscriminatorConfig cfg = mini_config();
  auto params = DiscriminatorParams<double>::zeros(cfg);
  params.layers[1].bias[0] = 0.37;  // constant final output
  ArrayX<double> x = random_audio(500, 2);
  CHECK(discriminator_forward<double>(x, params, cfg, 8000) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("each layer preserves the frame count") {
  DiscriminatorConfig cfg = mini_config();
  Rng rng(3);
  auto params = DiscriminatorParams<double>::init(cfg, rng);
  ArrayX<double> x = random_audio(400, 4);
  DiscriminatorTape<double> tape;
  discriminator_forward<double>(x, params, cfg, 8000, &tape);
  const Eigen::Index frames = tape.frontend.output.cols();
  CHECK(frames == (400 - 16) / 4 + 1);
  for (std::size_t i = 0; i < cfg.layers.size(); ++i)
    CHECK(tape.padded[i].cols() == frames + cfg.layers[i].kernel - 1);
}

TEST_CASE("grouped convolution equals independent per-group convolutions") {
  // layer under test: 9 channels in, 6 out, 3 groups, kernel 3
  DiscriminatorConfig cfg;
  cfg.layers = {{3, 6, 3}, {1, 1, 1}};
  cfg.representation = representation_config(Representation::spectrogram, 16, 0, 1e-5);
  Rng rng(5);
  auto params = DiscriminatorParams<double>::init(cfg, rng);
  ArrayX<double> audio = random_audio(200, 6);

  // observe each hidden channel c through a one-hot final layer
  DiscriminatorTape<double> tape;
  discriminator_forward<double>(audio, params, cfg, 8000, &tape);
  const MatrixX<double> rep = tape.frontend.output;  // 9 x T
  const Eigen::Index t_frames = rep.cols();

  VectorX<double> norms;
  MatrixX<double> eff = detail::effective_weight(params.layers[0], &norms);
  const double slope = cfg.leaky_slope;
  for (int c = 0; c < 6; ++c) {
    auto probe = params;
    probe.layers[1].dir.setZero();
    probe.layers[1].dir(0, c) = 1.0;
    probe.layers[1].mag[0] = 1.0;  // effective weight = one-hot row
    probe.layers[1].bias[0] = 0.0;
    const double score = discriminator_forward<double>(audio, probe, cfg, 8000);

    // dense oracle: group g of channel c covers input rows [3g, 3g+3)
    const int g = c / 2;
    double mean = 0.0;
    for (Eigen::Index t = 0; t < t_frames; ++t) {
      double acc = params.layers[0].bias[c];
      for (int j = 0; j < 3; ++j) {
        const Eigen::Index src = t + j - 1;  // "same" padding, pad_left = 1
        if (src < 0 || src >= t_frames) continue;
        for (int i = 0; i < 3; ++i) acc += eff(c, j * 3 + i) * rep(3 * g + i, src);
      }
      mean += std::max(acc, slope * acc);
    }
    mean /= static_cast<double>(t_frames);
    CHECK(score == doctest::Approx(mean).epsilon(1e-10));
  }
}

TEST_CASE("weight normalization: effective row norms equal the magnitudes") {
  DiscriminatorConfig cfg = mini_config();
  Rng rng(7);
  auto params = DiscriminatorParams<double>::init(cfg, rng);
  params.layers[0].mag = params.layers[0].mag.cwiseAbs();
  MatrixX<double> eff = detail::effective_weight(params.layers[0]);
  for (Eigen::Index o = 0; o < eff.rows(); ++o)
    CHECK(eff.row(o).norm() == doctest::Approx(params.layers[0].mag[o]).epsilon(1e-6));
}

TEST_CASE("score is invariant to input sign flip, and deterministic") {
  DiscriminatorConfig cfg = mini_config();
  Rng rng(8);
  auto params = DiscriminatorParams<double>::init(cfg, rng);
  ArrayX<double> x = random_audio(600, 9);
  const double s1 = discriminator_forward<double>(x, params, cfg, 8000);
  const double s2 = discriminator_forward<double>((-x).eval(), params, cfg, 8000);
  const double s3 = discriminator_forward<double>(x, params, cfg, 8000);
  CHECK(s1 == s2);
  CHECK(s1 == s3);
}

TEST_CASE("audio too short for one frame is rejected") {
  DiscriminatorConfig cfg = mini_config();
  auto params = DiscriminatorParams<double>::zeros(cfg);
  CHECK_THROWS_AS(discriminator_forward<double>(ArrayX<double>::Zero(8), params, cfg, 8000),
                  DataError);
}

TEST_CASE("backward matches finite differences through the whole chain") {
  DiscriminatorConfig cfg = mini_config();
  Rng rng(10);
  auto params = DiscriminatorParams<double>::init(cfg, rng);
  ArrayX<double> x = random_audio(400, 11);

  DiscriminatorTape<double> tape;
  const double score = discriminator_forward<double>(x, params, cfg, 8000, &tape);
  (void)score;
  DiscriminatorParams<double> grads = DiscriminatorParams<double>::zeros(cfg);
  ArrayX<double> dx = discriminator_backward(tape, params, 1.0, grads);

  const double h = 1e-4;
  auto views = params.tensor_views();
  auto grad_views = grads.tensor_views();
  double max_rel = 0.0;
  for (std::size_t t = 0; t < views.size(); ++t) {
    for (Eigen::Index i = 0; i < views[t].size(); ++i) {
      const double saved = views[t].data[i];
      views[t].data[i] = saved + h;
      const double fp = discriminator_forward<double>(x, params, cfg, 8000);
      views[t].data[i] = saved - h;
      const double fm = discriminator_forward<double>(x, params, cfg, 8000);
      views[t].data[i] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = grad_views[t].data[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
      max_rel = std::max(max_rel, std::abs(fd - an) / denom);
    }
  }
  CHECK(max_rel < 1e-4);

  double max_rel_x = 0.0;
  for (Eigen::Index i = 0; i < x.size(); i += 17) {
    ArrayX<double> xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (discriminator_forward<double>(xp, params, cfg, 8000) -
                       discriminator_forward<double>(xm, params, cfg, 8000)) /
                      (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(dx[i]), 1e-8});
    max_rel_x = std::max(max_rel_x, std::abs(fd - dx[i]) / denom);
  }
  CHECK(max_rel_x < 1e-4);

  // zero upstream gives zero everywhere
  DiscriminatorParams<double> zgrads = DiscriminatorParams<double>::zeros(cfg);
  ArrayX<double> zdx = discriminator_backward(tape, params, 0.0, zgrads);
  CHECK(zdx.abs().maxCoeff() == 0.0);
  for (auto v : zgrads.tensor_views())
    CHECK(Eigen::Map<VectorX<double>>(v.data, v.size()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weight-norm gradients agree with the composed-parameter chain rule") {
  DiscriminatorConfig cfg = mini_config();
  Rng rng(12);
  auto params = DiscriminatorParams<double>::init(cfg, rng);
  ArrayX<double> x = random_audio(300, 13);

  DiscriminatorTape<double> tape;
  discriminator_forward<double>(x, params, cfg, 8000, &tape);
  DiscriminatorParams<double> grads = DiscriminatorParams<double>::zeros(cfg);
  discriminator_backward(tape, params, 1.0, grads);

  // dL/dW_eff via finite differences: setting dir := W and mag := row norms
  // of W makes the effective weight equal W itself.
  const std::size_t layer = 0;
  MatrixX<double> eff = detail::effective_weight(params.layers[layer]);
  const double h = 1e-5;
  MatrixX<double> d_eff(eff.rows(), eff.cols());
  for (Eigen::Index o = 0; o < std::min<Eigen::Index>(eff.rows(), 3); ++o) {
    for (Eigen::Index c = 0; c < eff.cols(); ++c) {
      auto probe = params;
      MatrixX<double> w = eff;
      w(o, c) += h;
      probe.layers[layer].dir = w;
      probe.layers[layer].mag = w.rowwise().norm();
      const double fp = discriminator_forward<double>(x, probe, cfg, 8000);
      w(o, c) -= 2 * h;
      probe.layers[layer].dir = w;
      probe.layers[layer].mag = w.rowwise().norm();
      const double fm = discriminator_forward<double>(x, probe, cfg, 8000);
      d_eff(o, c) = (fp - fm) / (2.0 * h);
    }
  }
  // chain rule through W = mag * dir / ||dir||
  const auto& lp = params.layers[layer];
  for (Eigen::Index o = 0; o < std::min<Eigen::Index>(eff.rows(), 3); ++o) {
    const double norm = lp.dir.row(o).norm();
    const double dot = d_eff.row(o).dot(lp.dir.row(o));
    const double expect_mag = dot / norm;
    CHECK(grads.layers[layer].mag[o] == doctest::Approx(expect_mag).epsilon(1e-4));
    VectorX<double> expect_dir =
        (lp.mag[o] / norm) * d_eff.row(o).transpose() -
        (lp.mag[o] * dot / (norm * norm * norm)) * lp.dir.row(o).transpose();
    for (Eigen::Index c = 0; c < eff.cols(); ++c) {
      const double an = grads.layers[layer].dir(o, c);
      const double ex = expect_dir[c];
      const double denom = std::max({std::abs(an), std::abs(ex), 1e-8});
      CHECK(std::abs(an - ex) / denom < 1e-3);
    }
  }
}

TEST_SUITE_END();
