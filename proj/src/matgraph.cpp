#include "mwcons/matgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace mwcons {

namespace {

void require_square_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    std::ostringstream os;
    os << what << ": matrix is asymmetric (max deviation " << asym << ")";
    throw std::invalid_argument(os.str());
  }
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue computation failed");
  }
  return solver.eigenvalues();
}

}  // namespace

Definiteness classify_definiteness(const Eigen::MatrixXd& m, double tol) {
  if (tol < 0.0 || !std::isfinite(tol)) {
    throw std::invalid_argument("classification tolerance must be >= 0");
  }
  require_square_symmetric(m, "classify_definiteness");
  const Eigen::VectorXd ev = symmetric_eigenvalues(m);
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (std::abs(lo) <= tol && std::abs(hi) <= tol) return Definiteness::Zero;
  if (lo > tol) return Definiteness::PosDef;
  if (lo >= -tol && hi > tol) return Definiteness::PosSemiDef;
  if (hi < -tol) return Definiteness::NegDef;
  if (hi <= tol && lo < -tol) return Definiteness::NegSemiDef;
  std::ostringstream os;
  os << "indefinite weight matrix: eigenvalues span [" << lo << ", " << hi
     << "] at tolerance " << tol;
  throw IndefiniteWeightError(os.str());
}

WeightMatrix WeightMatrix::make(const Eigen::MatrixXd& entries, double tol) {
  require_square_symmetric(entries, "WeightMatrix");
  // Store an exactly symmetric copy so downstream eigensolves see a clean
  // symmetric operand.
  Eigen::MatrixXd sym = 0.5 * (entries + entries.transpose());
  if (tol < 0.0) {
    const Eigen::VectorXd ev = symmetric_eigenvalues(sym);
    const double radius =
        std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    tol = kDefaultClassifyTol * radius;
  }
  const Definiteness cls = classify_definiteness(sym, tol);
  return WeightMatrix(std::move(sym), cls);
}

WeightMatrix WeightMatrix::make_relative(const Eigen::MatrixXd& entries,
                                         double rel_tol) {
  if (rel_tol < 0.0 || !std::isfinite(rel_tol)) {
    throw std::invalid_argument("relative tolerance must be >= 0");
  }
  require_square_symmetric(entries, "WeightMatrix");
  const Eigen::MatrixXd sym = 0.5 * (entries + entries.transpose());
  const Eigen::VectorXd ev = symmetric_eigenvalues(sym);
  const double radius = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return make(sym, rel_tol * radius);
}

Eigen::MatrixXd abs_weight(const WeightMatrix& w) {
  switch (w.definiteness()) {
    case Definiteness::PosDef:
    case Definiteness::PosSemiDef:
      return w.entries();
    case Definiteness::NegDef:
    case Definiteness::NegSemiDef:
      return -w.entries();
    case Definiteness::Zero:
      return Eigen::MatrixXd::Zero(w.dim(), w.dim());
  }
  throw std::logic_error("unreachable definiteness class");
}

int weight_sign(const WeightMatrix& w) {
  switch (w.definiteness()) {
    case Definiteness::PosDef:
    case Definiteness::PosSemiDef:
      return 1;
    case Definiteness::NegDef:
    case Definiteness::NegSemiDef:
      return -1;
    case Definiteness::Zero:
      return 0;
  }
  throw std::logic_error("unreachable definiteness class");
}

double lambda_max_abs(const WeightMatrix& w) {
  const Eigen::VectorXd abs_ev = symmetric_eigenvalues(abs_weight(w));
  const double lam = abs_ev(abs_ev.size() - 1);
  const Eigen::VectorXd raw_ev = symmetric_eigenvalues(w.entries());
  const double radius =
      std::max(std::abs(raw_ev(0)), std::abs(raw_ev(raw_ev.size() - 1)));
  if (std::abs(lam - radius) > 1e-10 * std::max(1.0, radius)) {
    throw std::logic_error(
        "lambda_max_abs cross-check failed: |W| spectrum does not match the "
        "spectral radius of the entries");
  }
  return lam;
}

MatrixWeightedNetwork::MatrixWeightedNetwork(int node_count, int dim)
    : n_(node_count), d_(dim), adjacency_(std::max(node_count, 0)) {
  if (node_count <= 0) {
    throw std::invalid_argument("network needs at least one node");
  }
  if (dim <= 0) {
    throw std::invalid_argument("state dimension must be positive");
  }
}

void MatrixWeightedNetwork::add_edge(int i, int j, const WeightMatrix& w) {
  if (i < 0 || i >= n_ || j < 0 || j >= n_) {
    throw std::invalid_argument("edge endpoint out of range");
  }
  if (i == j) {
    throw std::invalid_argument("self-loops are not allowed");
  }
  if (w.dim() != d_) {
    throw std::invalid_argument("edge weight dimension mismatch");
  }
  if (w.definiteness() == Definiteness::Zero) {
    return;  // an all-zero weight is the absence of an edge
  }
  const auto key = std::minmax(i, j);
  if (edges_.count({key.first, key.second}) > 0) {
    throw std::invalid_argument("duplicate edge");
  }
  edges_.emplace(std::make_pair(key.first, key.second), w);
  adjacency_[i].insert(
      std::lower_bound(adjacency_[i].begin(), adjacency_[i].end(), j), j);
  adjacency_[j].insert(
      std::lower_bound(adjacency_[j].begin(), adjacency_[j].end(), i), i);
}

void MatrixWeightedNetwork::add_input(const Eigen::VectorXd& w) {
  if (w.size() != d_) {
    throw std::invalid_argument("input vector dimension mismatch");
  }
  if (!inputs_.empty() && (inputs_.front() - w).cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("all inputs must be identical");
  }
  inputs_.push_back(w);
}

void MatrixWeightedNetwork::add_leader_edge(int node, int input_idx,
                                            const WeightMatrix& w) {
  if (node < 0 || node >= n_) {
    throw std::invalid_argument("leader edge node out of range");
  }
  if (input_idx < 0 || input_idx >= static_cast<int>(inputs_.size())) {
    throw std::invalid_argument(
        "leader edge refers to an unregistered input; declare inputs first");
  }
  if (w.dim() != d_) {
    throw std::invalid_argument("leader edge weight dimension mismatch");
  }
  if (w.definiteness() == Definiteness::Zero) {
    return;
  }
  if (leader_edges_.count({node, input_idx}) > 0) {
    throw std::invalid_argument("duplicate leader edge");
  }
  leader_edges_.emplace(std::make_pair(node, input_idx), w);
}

bool MatrixWeightedNetwork::has_edge(int i, int j) const {
  const auto key = std::minmax(i, j);
  return edges_.count({key.first, key.second}) > 0;
}

const WeightMatrix& MatrixWeightedNetwork::weight(int i, int j) const {
  const auto key = std::minmax(i, j);
  const auto it = edges_.find({key.first, key.second});
  if (it == edges_.end()) {
    throw std::invalid_argument("no such edge");
  }
  return it->second;
}

Eigen::MatrixXd gauge_matrix(const Gauge& g, int dim) {
  const int n = static_cast<int>(g.signs.size());
  Eigen::MatrixXd d_star = Eigen::MatrixXd::Zero(n * dim, n * dim);
  for (int i = 0; i < n; ++i) {
    d_star.block(i * dim, i * dim, dim, dim) =
        static_cast<double>(g.signs[i]) *
        Eigen::MatrixXd::Identity(dim, dim);
  }
  return d_star;
}

Eigen::MatrixXd degree_matrix(const MatrixWeightedNetwork& g) {
  const int n = g.node_count();
  const int d = g.dim();
  Eigen::MatrixXd deg = Eigen::MatrixXd::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i) {
    for (int j : g.neighbors(i)) {
      deg.block(i * d, i * d, d, d) += abs_weight(g.weight(i, j));
    }
  }
  return deg;
}

Eigen::MatrixXd laplacian(const MatrixWeightedNetwork& g) {
  const int d = g.dim();
  Eigen::MatrixXd lap = degree_matrix(g);
  for (const auto& [key, w] : g.edges()) {
    lap.block(key.first * d, key.second * d, d, d) -= w.entries();
    lap.block(key.second * d, key.first * d, d, d) -= w.entries();
  }
  return lap;
}

Eigen::MatrixXd leader_laplacian(const MatrixWeightedNetwork& g) {
  const int d = g.dim();
  Eigen::MatrixXd lap = laplacian(g);
  for (const auto& [key, w] : g.leader_edges()) {
    lap.block(key.first * d, key.first * d, d, d) += abs_weight(w);
  }
  return lap;
}

Eigen::MatrixXd input_matrix(const MatrixWeightedNetwork& g) {
  const int d = g.dim();
  const int m = static_cast<int>(g.inputs().size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(g.node_count() * d, m * d);
  for (const auto& [key, w] : g.leader_edges()) {
    b.block(key.first * d, key.second * d, d, d) = w.entries();
  }
  return b;
}

namespace {

/// Generic 2-coloring over an explicit signed adjacency list. Roots each
/// component at its lowest unvisited index with sign +1.
std::optional<std::vector<int>> two_color(
    int count, const std::vector<std::vector<std::pair<int, int>>>& adj) {
  std::vector<int> signs(count, 0);
  for (int root = 0; root < count; ++root) {
    if (signs[root] != 0) continue;
    signs[root] = 1;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& [v, edge_sign] : adj[u]) {
        const int expected = signs[u] * edge_sign;
        if (signs[v] == 0) {
          signs[v] = expected;
          queue.push_back(v);
        } else if (signs[v] != expected) {
          return std::nullopt;
        }
      }
    }
  }
  return signs;
}

}  // namespace

std::optional<Gauge> find_gauge(const MatrixWeightedNetwork& g) {
  const int n = g.node_count();
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (const auto& [key, w] : g.edges()) {
    const int s = weight_sign(w);
    adj[key.first].emplace_back(key.second, s);
    adj[key.second].emplace_back(key.first, s);
  }
  for (auto& lst : adj) std::sort(lst.begin(), lst.end());
  auto signs = two_color(n, adj);
  if (!signs) return std::nullopt;
  return Gauge{std::move(*signs)};
}

std::optional<AugmentedGauge> find_augmented_gauge(
    const MatrixWeightedNetwork& g) {
  const int n = g.node_count();
  const int m = static_cast<int>(g.inputs().size());
  std::vector<std::vector<std::pair<int, int>>> adj(n + m);
  for (const auto& [key, w] : g.edges()) {
    const int s = weight_sign(w);
    adj[key.first].emplace_back(key.second, s);
    adj[key.second].emplace_back(key.first, s);
  }
  for (const auto& [key, w] : g.leader_edges()) {
    const int s = weight_sign(w);
    adj[key.first].emplace_back(n + key.second, s);
    adj[n + key.second].emplace_back(key.first, s);
  }
  for (auto& lst : adj) std::sort(lst.begin(), lst.end());
  auto signs = two_color(n + m, adj);
  if (!signs) return std::nullopt;

  // Every input that actually couples into the network must carry the same
  // sign; otherwise no single reference direction exists.
  int input_sign = 0;
  for (const auto& [key, w] : g.leader_edges()) {
    const int s = (*signs)[n + key.second];
    if (input_sign == 0) {
      input_sign = s;
    } else if (input_sign != s) {
      return std::nullopt;
    }
  }
  if (input_sign == 0) input_sign = 1;

  Gauge agent_signs;
  agent_signs.signs.assign(signs->begin(), signs->begin() + n);
  return AugmentedGauge{std::move(agent_signs), input_sign};
}

bool check_assumption1(const MatrixWeightedNetwork& g, const Gauge& gauge,
                       double tol) {
  const int n = g.node_count();
  const int d = g.dim();
  if (static_cast<int>(gauge.signs.size()) != n) {
    throw std::invalid_argument("gauge size does not match node count");
  }
  // Gauged Laplacian S = D* L D*: flip the sign of block (i,j) by
  // sigma_i * sigma_j.
  Eigen::MatrixXd s = laplacian(g);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double f =
          static_cast<double>(gauge.signs[i] * gauge.signs[j]);
      if (f != 1.0) s.block(i * d, j * d, d, d) *= f;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue computation failed");
  }
  const Eigen::VectorXd ev = solver.eigenvalues();
  const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
  const double threshold = tol * scale;
  if (ev(0) < -threshold) return false;  // not positive semidefinite
  int near_zero = 0;
  for (int k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) <= threshold) ++near_zero;
  }
  if (near_zero != d) return false;
  // The d near-zero eigenvectors must span range(1_n (x) I_d): all singular
  // values of U^T Q are then 1 (principal-angle cosines).
  const Eigen::MatrixXd u = solver.eigenvectors().leftCols(d);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n * d, d);
  for (int i = 0; i < n; ++i) {
    q.block(i * d, 0, d, d) = Eigen::MatrixXd::Identity(d, d);
  }
  q /= std::sqrt(static_cast<double>(n));
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(u.transpose() * q);
  const double min_cosine = svd.singularValues().minCoeff();
  return min_cosine >= 1.0 - tol;
}

bool check_assumption2(const MatrixWeightedNetwork& g) {
  if (g.inputs().empty() || g.leader_edges().empty()) return false;
  if (!find_augmented_gauge(g)) return false;
  const int d = g.dim();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [key, w] : g.leader_edges()) {
    total += abs_weight(w);
  }
  const Eigen::VectorXd ev = symmetric_eigenvalues(total);
  const double radius = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  try {
    return classify_definiteness(total, kDefaultClassifyTol * radius) ==
           Definiteness::PosDef;
  } catch (const IndefiniteWeightError&) {
    return false;
  }
}

}  // namespace mwcons
