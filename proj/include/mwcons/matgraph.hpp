#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mwcons/errors.hpp"

namespace mwcons {

/// Sign class of a symmetric weight matrix. Indefinite matrices are not
/// representable; classification throws IndefiniteWeightError for them.
enum class Definiteness { PosDef, PosSemiDef, NegDef, NegSemiDef, Zero };

/// Classify a symmetric matrix by its spectrum against an absolute eigenvalue
/// tolerance `tol` >= 0:
///   Zero        all |lambda| <= tol
///   PosDef      lambda_min >  tol
///   PosSemiDef  lambda_min >= -tol and lambda_max > tol
///   NegDef      lambda_max < -tol
///   NegSemiDef  lambda_max <= tol and lambda_min < -tol
/// Throws IndefiniteWeightError when eigenvalues straddle zero beyond tol.
Definiteness classify_definiteness(const Eigen::MatrixXd& m, double tol);

/// Default relative tolerance for weight classification: the absolute
/// threshold is kDefaultClassifyTol times the spectral radius of the matrix.
inline constexpr double kDefaultClassifyTol = 1e-6;

/// A symmetric d x d edge weight together with its sign class. Construction
/// rejects asymmetric or indefinite input, so every instance has a valid
/// |W| / sgn(W) decomposition.
class WeightMatrix {
public:
  /// Build from symmetric entries. `tol` is the absolute eigenvalue
  /// threshold used for classification; pass a negative value (the default)
  /// to use kDefaultClassifyTol relative to the spectral radius.
  static WeightMatrix make(const Eigen::MatrixXd& entries, double tol = -1.0);

  /// Build with a classification threshold of `rel_tol` times the spectral
  /// radius of `entries`.
  static WeightMatrix make_relative(const Eigen::MatrixXd& entries,
                                    double rel_tol);

  const Eigen::MatrixXd& entries() const { return entries_; }
  Definiteness definiteness() const { return definiteness_; }
  int dim() const { return static_cast<int>(entries_.rows()); }

private:
  WeightMatrix(Eigen::MatrixXd entries, Definiteness definiteness)
      : entries_(std::move(entries)), definiteness_(definiteness) {}

  Eigen::MatrixXd entries_;
  Definiteness definiteness_;
};

/// |W|: the entries for positive classes, their negation for negative
/// classes, and the zero matrix for the Zero class.
Eigen::MatrixXd abs_weight(const WeightMatrix& w);

/// +1 for positive classes, -1 for negative classes, 0 for Zero.
int weight_sign(const WeightMatrix& w);

/// Largest eigenvalue of |W| (its spectral radius). Cross-checked against
/// the spectral radius of the raw entries; a mismatch indicates a broken
/// invariant and throws std::logic_error.
double lambda_max_abs(const WeightMatrix& w);

/// Undirected network of `n` agents with matrix-valued signed edge weights,
/// plus optional constant external inputs attached through weighted edges
/// ("leader" edges). All node and input indices are 0-based internally.
class MatrixWeightedNetwork {
public:
  MatrixWeightedNetwork(int node_count, int dim);

  int node_count() const { return n_; }
  int dim() const { return d_; }

  /// Add an undirected edge {i, j}. Zero-class weights are ignored (an
  /// all-zero weight means "no edge"). Rejects self-loops, out-of-range
  /// nodes, dimension mismatches and duplicate edges.
  void add_edge(int i, int j, const WeightMatrix& w);

  /// Register a constant input vector. All inputs must be identical;
  /// a differing vector is rejected.
  void add_input(const Eigen::VectorXd& w);

  /// Attach input `input_idx` (already registered) to `node` with weight
  /// `w`. Zero-class weights are ignored.
  void add_leader_edge(int node, int input_idx, const WeightMatrix& w);

  bool has_edge(int i, int j) const;
  const WeightMatrix& weight(int i, int j) const;
  /// Neighbor lists are kept sorted so that iteration order (and therefore
  /// floating-point summation order) is deterministic.
  const std::vector<int>& neighbors(int i) const { return adjacency_[i]; }

  const std::map<std::pair<int, int>, WeightMatrix>& edges() const {
    return edges_;
  }
  const std::map<std::pair<int, int>, WeightMatrix>& leader_edges() const {
    return leader_edges_;
  }
  const std::vector<Eigen::VectorXd>& inputs() const { return inputs_; }

private:
  int n_;
  int d_;
  std::vector<std::vector<int>> adjacency_;
  std::map<std::pair<int, int>, WeightMatrix> edges_;         // key: (min,max)
  std::map<std::pair<int, int>, WeightMatrix> leader_edges_;  // (node, input)
  std::vector<Eigen::VectorXd> inputs_;
};

/// Node sign assignment sigma_i in {+1, -1} certifying structural balance:
/// every edge satisfies sgn(A_ij) = sigma_i * sigma_j.
struct Gauge {
  std::vector<int> signs;
};

/// Block-diagonal gauge matrix D* = diag(sigma_1 I_d, ..., sigma_n I_d).
Eigen::MatrixXd gauge_matrix(const Gauge& g, int dim);

/// Block-diagonal degree matrix: block (i,i) is the sum of |A_ij| over the
/// neighbors of i. Isolated nodes contribute a zero block.
Eigen::MatrixXd degree_matrix(const MatrixWeightedNetwork& g);

/// Matrix-valued Laplacian L = D - A as a dense (n*d) x (n*d) matrix.
Eigen::MatrixXd laplacian(const MatrixWeightedNetwork& g);

/// L plus the block-diagonal of summed |B_il| over each node's leader
/// edges. Equals laplacian(g) when no leader edges exist.
Eigen::MatrixXd leader_laplacian(const MatrixWeightedNetwork& g);

/// Input coupling matrix B: (n*d) x (m*d), block (i,l) = B_il for each
/// leader edge, zero elsewhere.
Eigen::MatrixXd input_matrix(const MatrixWeightedNetwork& g);

/// Two-color the nodes so that positive edges join same-sign nodes and
/// negative edges join opposite-sign nodes. Deterministic: each connected
/// component is rooted at its lowest-index node with sign +1. Returns
/// nullopt when no consistent assignment exists (structural imbalance).
std::optional<Gauge> find_gauge(const MatrixWeightedNetwork& g);

/// Gauge of the augmented network that treats each input as an extra node
/// joined by the leader edges, together with the common sign assigned to
/// the inputs. Inputs must all receive the same sign; otherwise nullopt.
struct AugmentedGauge {
  Gauge agent_signs;
  int input_sign;  // +1 when there are no leader edges
};
std::optional<AugmentedGauge> find_augmented_gauge(
    const MatrixWeightedNetwork& g);

/// Numerically verify that the gauged Laplacian D* L D* is positive
/// semidefinite with a null space of dimension exactly `dim` spanned by
/// range(1_n (x) I_d). Eigenvalue thresholds scale `tol` by max(1,
/// lambda_max); the span comparison requires all principal-angle cosines
/// >= 1 - tol.
bool check_assumption1(const MatrixWeightedNetwork& g, const Gauge& gauge,
                       double tol = 1e-8);

/// Verify the leader-tracking prerequisites: at least one input and leader
/// edge, the augmented network admits a gauge with a common input sign, and
/// the sum of |B_il| over all leader edges is positive definite.
bool check_assumption2(const MatrixWeightedNetwork& g);

}  // namespace mwcons
