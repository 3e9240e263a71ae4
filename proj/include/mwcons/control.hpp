#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mwcons/matgraph.hpp"

namespace mwcons {

/// Componentwise actuator limit. Controls are clamped to [-value, value].
struct SaturationLevel {
  explicit SaturationLevel(double v = 1.0) : value(v) {
    if (!(v > 0.0)) {
      throw std::invalid_argument("saturation level must be positive");
    }
  }
  double value;
};

/// Componentwise clamp of `h` to [-level, level].
Eigen::VectorXd saturate(const Eigen::VectorXd& h, SaturationLevel level);

/// Per-agent event-trigger configuration. `gain` is the measurement-error
/// coefficient in the trigger and auxiliary dynamics; it must equal the
/// value of compute_varpi (leaderless) or compute_omega (leader-follower)
/// for the agent.
struct TriggerParams {
  double rho = 0.0;    // control-effort retention, in [0, 1)
  double delta = 0.0;  // auxiliary coupling, in [0, 1]
  double beta = 1.0;   // auxiliary decay rate, > 0
  double theta = 1.0;  // trigger scaling, > (1 - delta) / beta
  double psi0 = 1.0;   // auxiliary initial value, > 0
  double gain = 0.0;   // error gain (varpi or omega)
};

/// Nominal consensus control for agent i from the latest broadcast states:
/// u_i = -sum_j |A_ij| (xhat_i - sgn(A_ij) xhat_j).
Eigen::VectorXd control_leaderless(const MatrixWeightedNetwork& g, int i,
                                   const std::vector<Eigen::VectorXd>& xhat);

/// Leader-follower control: the leaderless term plus
/// -sum_l |B_il| (xhat_i - sgn(B_il) w_l) over agent i's leader edges.
Eigen::VectorXd control_leader_follower(
    const MatrixWeightedNetwork& g, int i,
    const std::vector<Eigen::VectorXd>& xhat);

/// Leaderless error gain for agent i:
///   n (sum_j lambda_max|A_ij|)^2 + n sum_j lambda_max^2|A_ij|
/// where n is the total number of agents.
double compute_varpi(const MatrixWeightedNetwork& g, int i);

/// Leader-follower error gain for agent i: the neighbor sum inside the
/// square additionally includes lambda_max|B_il| over leader edges; the
/// second sum is over graph edges only. Equals compute_varpi for agents
/// without leader edges.
double compute_omega(const MatrixWeightedNetwork& g, int i);

/// Trigger condition value theta (gain ||e||^2 - rho u^T sat(u)) - psi.
/// An event fires when this becomes strictly positive.
double trigger_excess(const Eigen::VectorXd& error,
                      const Eigen::VectorXd& control, double psi,
                      const TriggerParams& params, SaturationLevel level);

/// Auxiliary dynamic rate
/// -beta psi + delta (rho u^T sat(u) - gain ||e||^2).
double psi_rate(const Eigen::VectorXd& error, const Eigen::VectorXd& control,
                double psi, const TriggerParams& params,
                SaturationLevel level);

/// Validate one TriggerParams per agent against the ranges above and check
/// that each gain matches the network-derived value (omega when
/// `leader_mode`, varpi otherwise) to a relative 1e-9. Returns a list of
/// human-readable violations; empty means valid.
std::vector<std::string> validate_params(
    const std::vector<TriggerParams>& params, const MatrixWeightedNetwork& g,
    bool leader_mode);

}  // namespace mwcons
