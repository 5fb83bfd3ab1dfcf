#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "madrive/mappo.hpp"
#include "madrive/mlp.hpp"

using namespace madrive;

namespace {

// independent reimplementation of the same architecture: explicit
// matrix-of-vectors layout instead of the flat parameter walk
double reference_forward(const Mlp& net, const std::vector<double>& input,
                         int output_index) {
  const MlpSpec& s = net.spec();
  const std::vector<double>& p = net.params();
  auto weight = [&](int layer, int row, int col) {
    int offset = 0;
    int rows[] = {s.hidden1, s.hidden2, s.output_dim};
    int cols[] = {s.input_dim, s.hidden1, s.hidden2};
    for (int l = 0; l < layer; ++l) offset += rows[l] * cols[l] + rows[l];
    return p[static_cast<size_t>(offset + row * cols[layer] + col)];
  };
  auto bias = [&](int layer, int row) {
    int offset = 0;
    int rows[] = {s.hidden1, s.hidden2, s.output_dim};
    int cols[] = {s.input_dim, s.hidden1, s.hidden2};
    for (int l = 0; l < layer; ++l) offset += rows[l] * cols[l] + rows[l];
    offset += rows[layer] * cols[layer];
    return p[static_cast<size_t>(offset + row)];
  };
  std::vector<double> h1(static_cast<size_t>(s.hidden1));
  for (int r = 0; r < s.hidden1; ++r) {
    double acc = bias(0, r);
    for (int c = 0; c < s.input_dim; ++c) {
      acc += weight(0, r, c) * input[static_cast<size_t>(c)];
    }
    h1[static_cast<size_t>(r)] = std::tanh(acc);
  }
  std::vector<double> h2(static_cast<size_t>(s.hidden2));
  for (int r = 0; r < s.hidden2; ++r) {
    double acc = bias(1, r);
    for (int c = 0; c < s.hidden1; ++c) {
      acc += weight(1, r, c) * h1[static_cast<size_t>(c)];
    }
    h2[static_cast<size_t>(r)] = std::tanh(acc);
  }
  double out = bias(2, output_index);
  for (int c = 0; c < s.hidden2; ++c) {
    out += weight(2, output_index, c) * h2[static_cast<size_t>(c)];
  }
  return out;
}

}  // namespace

TEST_CASE("zero weights give a uniform action distribution") {
  Mlp actor({9, 64, 64, 4});
  MlpWorkspace ws;
  std::vector<double> obs(9, 0.7);
  actor.forward(obs, ws);
  const std::vector<double> probs = softmax(ws.out);
  for (double p : probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax outputs a distribution and preserves the argmax") {
  Rng rng(17);
  Mlp actor({9, 64, 64, 4});
  actor.init_weights(rng, 1.0);
  MlpWorkspace ws;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> obs(9);
    for (double& v : obs) v = rng.normal(0.0, 2.0);
    actor.forward(obs, ws);
    const std::vector<double> probs = softmax(ws.out);
    double sum = 0.0;
    int argmax_p = 0;
    for (int i = 0; i < 4; ++i) {
      CHECK(probs[static_cast<size_t>(i)] >= 0.0);
      sum += probs[static_cast<size_t>(i)];
      if (probs[static_cast<size_t>(i)] > probs[static_cast<size_t>(argmax_p)]) {
        argmax_p = i;
      }
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(argmax_p == argmax_action(ws.out));
  }
}

TEST_CASE("critic: zero weights, last-layer linearity, non-finite input") {
  Mlp critic({39, 64, 64, 1});
  MlpWorkspace ws;
  std::vector<double> state(39, 0.3);
  critic.forward(state, ws);
  CHECK(ws.out[0] == 0.0);

  Rng rng(23);
  critic.init_weights(rng, 1.0);
  critic.forward(state, ws);
  const double v1 = ws.out[0];
  // doubling the output layer's weights with zero output bias doubles the value
  const MlpSpec& s = critic.spec();
  const int out_w_start = s.hidden1 * s.input_dim + s.hidden1 +
                          s.hidden2 * s.hidden1 + s.hidden2;
  for (int i = 0; i < s.output_dim * s.hidden2; ++i) {
    critic.params()[static_cast<size_t>(out_w_start + i)] *= 2.0;
  }
  critic.forward(state, ws);
  CHECK(ws.out[0] == doctest::Approx(2.0 * v1).epsilon(1e-12));

  state[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(critic.forward(state, ws), std::invalid_argument);
  state[5] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(critic.forward(state, ws), std::invalid_argument);
}

TEST_CASE("forward pass matches an independent reimplementation") {
  Rng rng(29);
  Mlp critic({39, 64, 64, 1});
  critic.init_weights(rng, 1.0);
  Mlp actor({9, 64, 64, 4});
  actor.init_weights(rng, 0.5);
  MlpWorkspace ws;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> state(39);
    for (double& v : state) v = rng.normal(0.0, 1.0);
    critic.forward(state, ws);
    CHECK(std::abs(ws.out[0] - reference_forward(critic, state, 0)) < 1e-10);

    std::vector<double> obs(9);
    for (double& v : obs) v = rng.normal(0.0, 1.0);
    actor.forward(obs, ws);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(ws.out[static_cast<size_t>(j)] -
                     reference_forward(actor, obs, j)) < 1e-10);
    }
  }
}

TEST_CASE("backward matches central finite differences on a scalar loss") {
  // loss = sum of squares of outputs; independent finite-difference oracle
  Rng rng(31);
  Mlp net({5, 64, 64, 3});
  net.init_weights(rng, 1.0);
  std::vector<double> input(5);
  for (double& v : input) v = rng.normal(0.0, 1.0);

  MlpWorkspace ws;
  auto loss_of = [&](const Mlp& m) {
    MlpWorkspace w;
    m.forward(input, w);
    double loss = 0.0;
    for (double o : w.out) loss += o * o;
    return loss;
  };

  net.forward(input, ws);
  std::vector<double> dout(3);
  for (int i = 0; i < 3; ++i) dout[static_cast<size_t>(i)] = 2.0 * ws.out[static_cast<size_t>(i)];
  std::vector<double> grad(net.params().size(), 0.0);
  net.backward(ws, dout, grad);

  Mlp probe = net;
  const double h = 1e-6;
  Rng pick(7);
  for (int k = 0; k < 300; ++k) {
    const size_t i = pick.uniform_index(net.params().size());
    const double saved = probe.params()[i];
    probe.params()[i] = saved + h;
    const double up = loss_of(probe);
    probe.params()[i] = saved - h;
    const double down = loss_of(probe);
    probe.params()[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    CHECK(std::abs(grad[i] - fd) <
          1e-4 * std::max({1.0, std::abs(fd), std::abs(grad[i])}));
  }
}

TEST_CASE("adam takes a step against the gradient") {
  std::vector<double> params = {1.0, -2.0};
  AdamOptimizer opt(2, 0.1);
  const std::vector<double> grad = {0.5, -0.5};
  opt.step(params, grad);
  CHECK(params[0] < 1.0);
  CHECK(params[1] > -2.0);
}

TEST_CASE("gradient norm clipping") {
  std::vector<double> grad = {3.0, 4.0};  // norm 5
  const double norm = clip_grad_norm(grad, 10.0);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(grad[0] == 3.0);
  const double norm2 = clip_grad_norm(grad, 2.5);
  CHECK(norm2 == doctest::Approx(5.0));
  CHECK(grad[0] == doctest::Approx(1.5));
  CHECK(grad[1] == doctest::Approx(2.0));
}

TEST_CASE("running normalizer statistics and clipping") {
  RunningNorm norm(2);
  Rng rng(43);
  double sum0 = 0.0;
  const int n = 5000;
  for (int i = 0; i < n; ++i) {
    const double a = rng.normal(3.0, 2.0);
    const double b = rng.uniform(-1.0, 1.0);
    sum0 += a;
    norm.update(std::vector<double>{a, b});
  }
  CHECK(norm.count() == n);
  CHECK(norm.mean()[0] == doctest::Approx(sum0 / n).epsilon(1e-12));
  CHECK(std::sqrt(norm.m2()[0] / n) == doctest::Approx(2.0).epsilon(0.05));

  std::vector<double> out(2);
  norm.normalize(std::vector<double>{3.0, 0.0}, out);
  CHECK(std::abs(out[0]) < 0.1);
  norm.normalize(std::vector<double>{1e9, 0.0}, out);
  CHECK(out[0] == 10.0);  // clipped
  norm.normalize(std::vector<double>{-1e9, 0.0}, out);
  CHECK(out[0] == -10.0);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "madrive_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "test.ckpt").string();

  PolicyBundle bundle = PolicyBundle::init(9, 39, 12345);
  // touch the normalizers so their state round-trips too
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> obs(9), gs(39);
    for (double& v : obs) v = rng.normal(0.0, 1.0);
    for (double& v : gs) v = rng.normal(0.0, 1.0);
    bundle.obs_norm.update(obs);
    bundle.gs_norm.update(gs);
  }

  save_checkpoint(bundle, path);
  const PolicyBundle back = load_checkpoint(path);
  CHECK(back.actor.spec() == bundle.actor.spec());
  CHECK(back.critic.spec() == bundle.critic.spec());
  CHECK(back.actor.params() == bundle.actor.params());
  CHECK(back.critic.params() == bundle.critic.params());
  CHECK(back.obs_norm.count() == bundle.obs_norm.count());
  CHECK(back.obs_norm.mean() == bundle.obs_norm.mean());
  CHECK(back.obs_norm.m2() == bundle.obs_norm.m2());
  CHECK(back.gs_norm.mean() == bundle.gs_norm.mean());
  fs::remove_all(dir);
}

TEST_CASE("checkpoint error kinds are distinct") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "madrive_ckpt_err";
  fs::create_directories(dir);
  const std::string path = (dir / "x.ckpt").string();
  PolicyBundle bundle = PolicyBundle::init(9, 39, 1);
  save_checkpoint(bundle, path);

  SUBCASE("missing file is an io error") {
    try {
      load_checkpoint((dir / "missing.ckpt").string());
      FAIL("expected a throw");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::Io);
    }
  }

  SUBCASE("truncated file is corrupt") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    const std::string cut = (dir / "cut.ckpt").string();
    std::ofstream out(cut, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    try {
      load_checkpoint(cut);
      FAIL("expected a throw");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::Corrupt);
    }
  }

  SUBCASE("bad magic is corrupt") {
    const std::string bad = (dir / "bad.ckpt").string();
    std::ofstream out(bad, std::ios::binary);
    out << "NOTACKPTxxxxxxxxxxxxxxxxxxxxxxx";
    out.close();
    try {
      load_checkpoint(bad);
      FAIL("expected a throw");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::Corrupt);
    }
  }

  SUBCASE("future version is a version mismatch") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    bytes[8] = 99;  // version field follows the 8-byte magic
    const std::string versioned = (dir / "v99.ckpt").string();
    std::ofstream out(versioned, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    try {
      load_checkpoint(versioned);
      FAIL("expected a throw");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::VersionMismatch);
    }
  }

  SUBCASE("a 9-dim checkpoint against a 10-dim environment") {
    const PolicyBundle loaded = load_checkpoint(path);
    CHECK_NOTHROW(validate_dims(loaded, 9, 39));
    try {
      validate_dims(loaded, 10, 42);
      FAIL("expected a throw");
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::DimensionMismatch);
    }
  }
  fs::remove_all(dir);
}
