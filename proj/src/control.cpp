#include "mwcons/control.hpp"

#include <cmath>
#include <sstream>

namespace mwcons {

Eigen::VectorXd saturate(const Eigen::VectorXd& h, SaturationLevel level) {
  return h.cwiseMax(-level.value).cwiseMin(level.value);
}

Eigen::VectorXd control_leaderless(const MatrixWeightedNetwork& g, int i,
                                   const std::vector<Eigen::VectorXd>& xhat) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(g.dim());
  for (int j : g.neighbors(i)) {
    const WeightMatrix& w = g.weight(i, j);
    u -= abs_weight(w) *
         (xhat[i] - static_cast<double>(weight_sign(w)) * xhat[j]);
  }
  return u;
}

Eigen::VectorXd control_leader_follower(
    const MatrixWeightedNetwork& g, int i,
    const std::vector<Eigen::VectorXd>& xhat) {
  Eigen::VectorXd u = control_leaderless(g, i, xhat);
  for (const auto& [key, w] : g.leader_edges()) {
    if (key.first != i) continue;
    const Eigen::VectorXd& input = g.inputs()[key.second];
    u -= abs_weight(w) *
         (xhat[i] - static_cast<double>(weight_sign(w)) * input);
  }
  return u;
}

double compute_varpi(const MatrixWeightedNetwork& g, int i) {
  const double n = static_cast<double>(g.node_count());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int j : g.neighbors(i)) {
    const double lam = lambda_max_abs(g.weight(i, j));
    sum += lam;
    sum_sq += lam * lam;
  }
  return n * sum * sum + n * sum_sq;
}

double compute_omega(const MatrixWeightedNetwork& g, int i) {
  const double n = static_cast<double>(g.node_count());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int j : g.neighbors(i)) {
    const double lam = lambda_max_abs(g.weight(i, j));
    sum += lam;
    sum_sq += lam * lam;
  }
  for (const auto& [key, w] : g.leader_edges()) {
    if (key.first == i) sum += lambda_max_abs(w);
  }
  return n * sum * sum + n * sum_sq;
}

double trigger_excess(const Eigen::VectorXd& error,
                      const Eigen::VectorXd& control, double psi,
                      const TriggerParams& params, SaturationLevel level) {
  const double effort = control.dot(saturate(control, level));
  return params.theta *
             (params.gain * error.squaredNorm() - params.rho * effort) -
         psi;
}

double psi_rate(const Eigen::VectorXd& error, const Eigen::VectorXd& control,
                double psi, const TriggerParams& params,
                SaturationLevel level) {
  const double effort = control.dot(saturate(control, level));
  return -params.beta * psi +
         params.delta *
             (params.rho * effort - params.gain * error.squaredNorm());
}

std::vector<std::string> validate_params(
    const std::vector<TriggerParams>& params, const MatrixWeightedNetwork& g,
    bool leader_mode) {
  std::vector<std::string> violations;
  auto complain = [&violations](int agent, const std::string& what) {
    violations.push_back("agent " + std::to_string(agent + 1) + ": " + what);
  };
  if (static_cast<int>(params.size()) != g.node_count()) {
    violations.push_back("expected one parameter set per agent");
    return violations;
  }
  for (int i = 0; i < g.node_count(); ++i) {
    const TriggerParams& p = params[i];
    if (!(p.rho >= 0.0 && p.rho < 1.0)) {
      complain(i, "rho must be in [0, 1)");
    }
    if (!(p.delta >= 0.0 && p.delta <= 1.0)) {
      complain(i, "delta must be in [0, 1]");
    }
    if (!(p.beta > 0.0)) {
      complain(i, "beta must be positive");
    }
    if (!(p.psi0 > 0.0)) {
      complain(i, "psi0 must be positive");
    }
    if (p.beta > 0.0 && !(p.theta > (1.0 - p.delta) / p.beta)) {
      std::ostringstream os;
      os << "theta must exceed (1 - delta) / beta = "
         << (1.0 - p.delta) / p.beta;
      complain(i, os.str());
    }
    const double expected =
        leader_mode ? compute_omega(g, i) : compute_varpi(g, i);
    if (std::abs(p.gain - expected) > 1e-9 * std::max(1.0, expected)) {
      std::ostringstream os;
      os << "gain " << p.gain << " does not match the network-derived value "
         << expected;
      complain(i, os.str());
    }
  }
  return violations;
}

}  // namespace mwcons
