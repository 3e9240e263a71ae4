#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "mwcons/matgraph.hpp"
#include "mwcons/sim.hpp"

namespace mwtest {

inline Eigen::MatrixXd mat3(double a11, double a12, double a13, double a22,
                            double a23, double a33) {
  Eigen::MatrixXd m(3, 3);
  m << a11, a12, a13, a12, a22, a23, a13, a23, a33;
  return m;
}

// The five-agent benchmark weights.
inline Eigen::MatrixXd a12() {
  return mat3(10.14, 1.64, -2.16, 10.06, -1.58, 12.45);
}
inline Eigen::MatrixXd a23() {
  return mat3(-9.75, 1.87, 4.69, -7.17, 0.72, -9.51);
}
inline Eigen::MatrixXd a34() {
  return mat3(7.36, 4.67, 5.13, 10.89, -2.31, 9.92);
}
inline Eigen::MatrixXd a45() {
  return mat3(-4.88, -3.07, 0.46, -2.82, -2.03, -6.13);
}
inline Eigen::MatrixXd a15() {
  return mat3(12.42, -1.51, -1.07, 11.52, -1.1, 14.4);
}
inline Eigen::MatrixXd a25() {
  return mat3(3.03, -2.21, 3.92, 4.58, -1.63, 5.6);
}
inline Eigen::VectorXd w0() {
  Eigen::VectorXd w(3);
  w << 0.2, 0.4, 0.6;
  return w;
}

inline mwcons::MatrixWeightedNetwork five_agent_network() {
  using mwcons::WeightMatrix;
  mwcons::MatrixWeightedNetwork g(5, 3);
  g.add_edge(0, 1, WeightMatrix::make(a12()));
  g.add_edge(1, 2, WeightMatrix::make(a23()));
  g.add_edge(2, 3, WeightMatrix::make(a34()));
  g.add_edge(3, 4, WeightMatrix::make(a45()));
  g.add_edge(0, 4, WeightMatrix::make(a15()));
  g.add_edge(1, 4, WeightMatrix::make(a25()));
  return g;
}

inline mwcons::MatrixWeightedNetwork five_agent_leader_network() {
  using mwcons::WeightMatrix;
  mwcons::MatrixWeightedNetwork g = five_agent_network();
  g.add_input(w0());
  g.add_input(w0());
  g.add_leader_edge(0, 0, WeightMatrix::make(a25()));
  g.add_leader_edge(4, 1, WeightMatrix::make(a12()));
  return g;
}

/// Deterministic RNG with an implementation-independent uniform mapping.
struct TestRng {
  std::mt19937_64 engine;
  explicit TestRng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo, double hi) {
    const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(engine() %
                                 static_cast<std::uint64_t>(hi - lo + 1));
  }
};

inline Eigen::VectorXd random_vector(TestRng& rng, int d, double lo = -1.0,
                                     double hi = 1.0) {
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v(k) = rng.uniform(lo, hi);
  return v;
}

/// Random symmetric positive (semi)definite matrix; with `allow_singular`
/// roughly a third of the draws are rank-deficient.
inline Eigen::MatrixXd random_psd(TestRng& rng, int d,
                                  bool allow_singular = true) {
  Eigen::MatrixXd r(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) r(i, j) = rng.uniform(-1.0, 1.0);
  }
  if (allow_singular && d > 1 && rng.uniform(0.0, 1.0) < 0.3) {
    r.row(0).setZero();
  }
  const Eigen::MatrixXd m = r * r.transpose();
  return 0.5 * (m + m.transpose());
}

/// Random connected, structurally balanced network: a path backbone plus a
/// few chords, with edge signs induced by a random node sign assignment.
/// With `definite_weights` every magnitude gets a ridge so the weights are
/// strictly definite (semidefinite weights can legitimately enlarge the
/// gauged-laplacian null space).
inline mwcons::MatrixWeightedNetwork random_balanced_network(
    TestRng& rng, int n, int d, std::vector<int>* signs_out = nullptr,
    bool with_leaders = false, bool definite_weights = false) {
  mwcons::MatrixWeightedNetwork g(n, d);
  std::vector<int> sigma(n);
  for (int i = 0; i < n; ++i) {
    sigma[i] = rng.uniform(0.0, 1.0) < 0.5 ? 1 : -1;
  }
  const auto add = [&](int i, int j) {
    if (i == j || g.has_edge(i, j)) return;
    Eigen::MatrixXd magnitude = random_psd(rng, d, !definite_weights);
    if (definite_weights) {
      magnitude += 0.05 * Eigen::MatrixXd::Identity(d, d);
    }
    const double sign = static_cast<double>(sigma[i] * sigma[j]);
    g.add_edge(i, j, mwcons::WeightMatrix::make(sign * magnitude));
  };
  for (int i = 1; i < n; ++i) add(i - 1, i);
  const int extras = n / 2;
  for (int k = 0; k < extras; ++k) {
    add(rng.uniform_int(0, n - 1), rng.uniform_int(0, n - 1));
  }
  if (with_leaders) {
    const Eigen::VectorXd w = random_vector(rng, d);
    g.add_input(w);
    const int node = rng.uniform_int(0, n - 1);
    // Couple the input consistently with the node's sign so the augmented
    // network stays balanced.
    const Eigen::MatrixXd magnitude =
        random_psd(rng, d, /*allow_singular=*/false) +
        0.1 * Eigen::MatrixXd::Identity(d, d);
    g.add_leader_edge(node, 0,
                      mwcons::WeightMatrix::make(
                          static_cast<double>(sigma[node]) * magnitude));
  }
  if (signs_out != nullptr) *signs_out = sigma;
  return g;
}

inline Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& xs) {
  const int d = static_cast<int>(xs[0].size());
  Eigen::VectorXd z(static_cast<int>(xs.size()) * d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    z.segment(static_cast<int>(i) * d, d) = xs[i];
  }
  return z;
}

inline std::string scenario_path(const char* name) {
  return std::string(MWCONS_SCENARIO_DIR) + "/" + name;
}

}  // namespace mwtest
