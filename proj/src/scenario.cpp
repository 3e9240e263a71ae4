#include "mwcons/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fmt_util.hpp"

namespace mwcons {

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::EventLeaderless:
      return "event_leaderless";
    case Mode::EventLeaderFollower:
      return "event_leader_follower";
    case Mode::ContinuousLeaderless:
      return "continuous_leaderless";
    case Mode::ContinuousLeaderFollower:
      return "continuous_leader_follower";
  }
  throw std::logic_error("unreachable mode");
}

namespace {

std::optional<Mode> mode_from_name(const std::string& name) {
  if (name == "event_leaderless") return Mode::EventLeaderless;
  if (name == "event_leader_follower") return Mode::EventLeaderFollower;
  if (name == "continuous_leaderless") return Mode::ContinuousLeaderless;
  if (name == "continuous_leader_follower")
    return Mode::ContinuousLeaderFollower;
  return std::nullopt;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> tokens;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) tokens.push_back(tok);
  return tokens;
}

bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

bool parse_u64(const std::string& tok, std::uint64_t& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

bool parse_int(const std::string& tok, int& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

struct Entry {
  int line;
  std::vector<std::string> values;
};

using Section = std::map<std::string, std::vector<Entry>>;

const std::map<std::string, std::set<std::string>> kGrammar = {
    {"network", {"n", "d", "tol", "edge"}},
    {"leaders", {"input", "leader_edge"}},
    {"params", {"rho", "delta", "beta", "theta", "psi0"}},
    {"sim",
     {"mode", "delta_sat", "t_end", "dt", "sample_dt", "refine_tol", "seed",
      "init", "init_range", "state", "max_events_per_second"}},
};

const std::set<std::string> kRepeatable = {"edge", "leader_edge", "input",
                                           "state"};

std::map<std::string, Section> scan_lines(const std::string& text) {
  std::map<std::string, Section> sections;
  std::set<std::string> seen_sections;
  std::string current;
  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(line_no, "malformed section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (kGrammar.count(name) == 0) {
        throw ParseError(line_no, "unknown section [" + name + "]");
      }
      if (!seen_sections.insert(name).second) {
        throw ParseError(line_no, "duplicate section [" + name + "]");
      }
      current = name;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, "expected key = value");
    }
    if (current.empty()) {
      throw ParseError(line_no, "key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::vector<std::string> values =
        split_tokens(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (values.empty()) {
      throw ParseError(line_no, "missing value for key '" + key + "'");
    }
    if (kGrammar.at(current).count(key) == 0) {
      throw ParseError(line_no,
                       "unknown key '" + key + "' in section [" + current +
                           "]");
    }
    Section& section = sections[current];
    if (kRepeatable.count(key) == 0 && section.count(key) > 0) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
    section[key].push_back(Entry{line_no, values});
  }
  return sections;
}

const Entry* find_entry(const std::map<std::string, Section>& sections,
                        const std::string& section, const std::string& key) {
  const auto sec = sections.find(section);
  if (sec == sections.end()) return nullptr;
  const auto it = sec->second.find(key);
  if (it == sec->second.end()) return nullptr;
  return &it->second.front();
}

const std::vector<Entry>* find_entries(
    const std::map<std::string, Section>& sections, const std::string& section,
    const std::string& key) {
  const auto sec = sections.find(section);
  if (sec == sections.end()) return nullptr;
  const auto it = sec->second.find(key);
  if (it == sec->second.end()) return nullptr;
  return &it->second;
}

double required_double(const std::map<std::string, Section>& sections,
                       const std::string& section, const std::string& key) {
  const Entry* entry = find_entry(sections, section, key);
  if (entry == nullptr) {
    throw ValidationError("missing required key [" + section + "] " + key);
  }
  if (entry->values.size() != 1) {
    throw ParseError(entry->line, key + " expects a single value");
  }
  double out = 0.0;
  if (!parse_double(entry->values[0], out)) {
    throw ParseError(entry->line,
                     "cannot parse number '" + entry->values[0] + "'");
  }
  return out;
}

double optional_double(const std::map<std::string, Section>& sections,
                       const std::string& section, const std::string& key,
                       double fallback) {
  if (find_entry(sections, section, key) == nullptr) return fallback;
  return required_double(sections, section, key);
}

int required_int(const std::map<std::string, Section>& sections,
                 const std::string& section, const std::string& key) {
  const Entry* entry = find_entry(sections, section, key);
  if (entry == nullptr) {
    throw ValidationError("missing required key [" + section + "] " + key);
  }
  if (entry->values.size() != 1) {
    throw ParseError(entry->line, key + " expects a single value");
  }
  int out = 0;
  if (!parse_int(entry->values[0], out)) {
    throw ParseError(entry->line,
                     "cannot parse integer '" + entry->values[0] + "'");
  }
  return out;
}

Eigen::MatrixXd parse_matrix(const Entry& entry, int d, std::size_t offset) {
  Eigen::MatrixXd m(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      double v = 0.0;
      const std::string& tok = entry.values[offset + r * d + c];
      if (!parse_double(tok, v)) {
        throw ParseError(entry.line, "cannot parse number '" + tok + "'");
      }
      m(r, c) = v;
    }
  }
  return m;
}

/// Symmetry gate for hand-written matrices; construction then stores the
/// exactly symmetrized average.
void require_loose_symmetry(const Eigen::MatrixXd& m, const std::string& ctx) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    std::ostringstream os;
    os << ctx << ": matrix must be symmetric (max asymmetry " << asym << ")";
    throw ValidationError(os.str());
  }
}

std::vector<double> per_agent_values(
    const std::map<std::string, Section>& sections, const std::string& key,
    int n) {
  const Entry* entry = find_entry(sections, "params", key);
  if (entry == nullptr) {
    throw ValidationError("missing required key [params] " + key);
  }
  std::vector<double> out;
  for (const std::string& tok : entry->values) {
    double v = 0.0;
    if (!parse_double(tok, v)) {
      throw ParseError(entry->line, "cannot parse number '" + tok + "'");
    }
    out.push_back(v);
  }
  if (out.size() == 1) {
    out.assign(static_cast<std::size_t>(n), out.front());
  } else if (out.size() != static_cast<std::size_t>(n)) {
    throw ParseError(entry->line,
                     key + " expects one value or one value per agent");
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  const auto sections = scan_lines(text);

  const int n = required_int(sections, "network", "n");
  if (n <= 0) throw ValidationError("[network] n must be positive");
  const int d = required_int(sections, "network", "d");
  if (d <= 0) throw ValidationError("[network] d must be positive");
  const double weight_tol =
      optional_double(sections, "network", "tol", kDefaultClassifyTol);
  if (weight_tol < 0.0) {
    throw ValidationError("[network] tol must be >= 0");
  }

  MatrixWeightedNetwork network(n, d);
  if (const auto* edges = find_entries(sections, "network", "edge")) {
    for (const Entry& entry : *edges) {
      if (entry.values.size() != static_cast<std::size_t>(2 + d * d)) {
        throw ParseError(entry.line,
                         "edge expects two node indices followed by d*d "
                         "matrix entries");
      }
      int i = 0;
      int j = 0;
      if (!parse_int(entry.values[0], i) || !parse_int(entry.values[1], j)) {
        throw ParseError(entry.line, "cannot parse edge node indices");
      }
      if (i < 1 || i > n || j < 1 || j > n) {
        throw ParseError(entry.line, "edge node index out of range");
      }
      const Eigen::MatrixXd m = parse_matrix(entry, d, 2);
      const std::string ctx =
          "edge (" + std::to_string(i) + ", " + std::to_string(j) + ")";
      require_loose_symmetry(m, ctx);
      try {
        network.add_edge(i - 1, j - 1,
                         WeightMatrix::make_relative(m, weight_tol));
      } catch (const IndefiniteWeightError& e) {
        throw ValidationError(ctx + ": " + e.what());
      } catch (const std::invalid_argument& e) {
        throw ParseError(entry.line, ctx + ": " + e.what());
      }
    }
  }

  if (const auto* inputs = find_entries(sections, "leaders", "input")) {
    for (const Entry& entry : *inputs) {
      if (entry.values.size() != static_cast<std::size_t>(d)) {
        throw ParseError(entry.line, "input expects d entries");
      }
      Eigen::VectorXd w(d);
      for (int k = 0; k < d; ++k) {
        double v = 0.0;
        if (!parse_double(entry.values[k], v)) {
          throw ParseError(entry.line,
                           "cannot parse number '" + entry.values[k] + "'");
        }
        w(k) = v;
      }
      try {
        network.add_input(w);
      } catch (const std::invalid_argument& e) {
        throw ParseError(entry.line, e.what());
      }
    }
  }
  if (const auto* ledges = find_entries(sections, "leaders", "leader_edge")) {
    for (const Entry& entry : *ledges) {
      if (entry.values.size() != static_cast<std::size_t>(2 + d * d)) {
        throw ParseError(entry.line,
                         "leader_edge expects a node index, an input index "
                         "and d*d matrix entries");
      }
      int node = 0;
      int input_idx = 0;
      if (!parse_int(entry.values[0], node) ||
          !parse_int(entry.values[1], input_idx)) {
        throw ParseError(entry.line, "cannot parse leader_edge indices");
      }
      if (node < 1 || node > n) {
        throw ParseError(entry.line, "leader_edge node index out of range");
      }
      if (input_idx < 1 ||
          input_idx > static_cast<int>(network.inputs().size())) {
        throw ParseError(entry.line, "leader_edge input index out of range");
      }
      const Eigen::MatrixXd m = parse_matrix(entry, d, 2);
      const std::string ctx = "leader_edge (node " + std::to_string(node) +
                              ", input " + std::to_string(input_idx) + ")";
      require_loose_symmetry(m, ctx);
      try {
        network.add_leader_edge(node - 1, input_idx - 1,
                                WeightMatrix::make_relative(m, weight_tol));
      } catch (const IndefiniteWeightError& e) {
        throw ValidationError(ctx + ": " + e.what());
      } catch (const std::invalid_argument& e) {
        throw ParseError(entry.line, ctx + ": " + e.what());
      }
    }
  }

  const std::vector<double> rho = per_agent_values(sections, "rho", n);
  const std::vector<double> delta = per_agent_values(sections, "delta", n);
  const std::vector<double> beta = per_agent_values(sections, "beta", n);
  const std::vector<double> theta = per_agent_values(sections, "theta", n);
  const std::vector<double> psi0 = per_agent_values(sections, "psi0", n);
  std::vector<TriggerParams> params(n);
  for (int i = 0; i < n; ++i) {
    params[i].rho = rho[i];
    params[i].delta = delta[i];
    params[i].beta = beta[i];
    params[i].theta = theta[i];
    params[i].psi0 = psi0[i];
  }

  const Entry* mode_entry = find_entry(sections, "sim", "mode");
  if (mode_entry == nullptr) {
    throw ValidationError("missing required key [sim] mode");
  }
  if (mode_entry->values.size() != 1) {
    throw ParseError(mode_entry->line, "mode expects a single value");
  }
  const auto mode = mode_from_name(mode_entry->values[0]);
  if (!mode) {
    throw ParseError(mode_entry->line,
                     "unknown mode '" + mode_entry->values[0] + "'");
  }

  const double delta_sat = required_double(sections, "sim", "delta_sat");
  if (!(delta_sat > 0.0)) {
    throw ParseError(find_entry(sections, "sim", "delta_sat")->line,
                     "delta_sat must be positive");
  }
  const double t_end = required_double(sections, "sim", "t_end");
  if (t_end < 0.0) {
    throw ParseError(find_entry(sections, "sim", "t_end")->line,
                     "t_end must be >= 0");
  }
  const double dt = required_double(sections, "sim", "dt");
  if (!(dt > 0.0)) {
    throw ParseError(find_entry(sections, "sim", "dt")->line,
                     "dt must be positive");
  }
  const double sample_dt = required_double(sections, "sim", "sample_dt");
  if (!(sample_dt > 0.0)) {
    throw ParseError(find_entry(sections, "sim", "sample_dt")->line,
                     "sample_dt must be positive");
  }
  const double refine_tol = required_double(sections, "sim", "refine_tol");
  if (!(refine_tol > 0.0)) {
    throw ParseError(find_entry(sections, "sim", "refine_tol")->line,
                     "refine_tol must be positive");
  }
  const double max_eps =
      optional_double(sections, "sim", "max_events_per_second", 1e4);
  if (!(max_eps > 0.0)) {
    throw ParseError(find_entry(sections, "sim", "max_events_per_second")->line,
                     "max_events_per_second must be positive");
  }

  const Entry* seed_entry = find_entry(sections, "sim", "seed");
  if (seed_entry == nullptr) {
    throw ValidationError("missing required key [sim] seed");
  }
  if (seed_entry->values.size() != 1) {
    throw ParseError(seed_entry->line, "seed expects a single value");
  }
  std::uint64_t seed = 0;
  if (!parse_u64(seed_entry->values[0], seed)) {
    throw ParseError(seed_entry->line,
                     "seed must be a non-negative integer");
  }

  InitSpec init;
  const Entry* init_entry = find_entry(sections, "sim", "init");
  if (init_entry != nullptr) {
    if (init_entry->values.size() != 1) {
      throw ParseError(init_entry->line, "init expects a single value");
    }
    const std::string& kind = init_entry->values[0];
    if (kind == "uniform") {
      init.explicit_states = false;
    } else if (kind == "explicit") {
      init.explicit_states = true;
    } else {
      throw ParseError(init_entry->line,
                       "init must be 'uniform' or 'explicit'");
    }
  }
  const Entry* range_entry = find_entry(sections, "sim", "init_range");
  if (range_entry != nullptr) {
    if (init.explicit_states) {
      throw ParseError(range_entry->line,
                       "init_range requires init = uniform");
    }
    if (range_entry->values.size() != 2) {
      throw ParseError(range_entry->line, "init_range expects two values");
    }
    if (!parse_double(range_entry->values[0], init.lo) ||
        !parse_double(range_entry->values[1], init.hi)) {
      throw ParseError(range_entry->line, "cannot parse init_range values");
    }
    if (!(init.lo < init.hi)) {
      throw ParseError(range_entry->line,
                       "init_range lower bound must be below upper bound");
    }
  }
  if (const auto* states = find_entries(sections, "sim", "state")) {
    if (!init.explicit_states) {
      throw ParseError(states->front().line,
                       "state entries require init = explicit");
    }
    for (const Entry& entry : *states) {
      if (entry.values.size() != static_cast<std::size_t>(d)) {
        throw ParseError(entry.line, "state expects d entries");
      }
      Eigen::VectorXd x(d);
      for (int k = 0; k < d; ++k) {
        double v = 0.0;
        if (!parse_double(entry.values[k], v)) {
          throw ParseError(entry.line,
                           "cannot parse number '" + entry.values[k] + "'");
        }
        x(k) = v;
      }
      init.states.push_back(std::move(x));
    }
  }
  if (init.explicit_states &&
      init.states.size() != static_cast<std::size_t>(n)) {
    throw ValidationError(
        "explicit init requires exactly one state entry per agent (got " +
        std::to_string(init.states.size()) + " of " + std::to_string(n) +
        ")");
  }

  // Semantic validation: mode requirements, structural balance, the
  // null-space and leader-coverage checks, and parameter constraints.
  const bool leader = is_leader_mode(*mode);
  if (leader &&
      (network.inputs().empty() || network.leader_edges().empty())) {
    throw ValidationError(
        "leader-follower modes require [leaders] input and leader_edge "
        "entries");
  }
  const auto gauge = find_gauge(network);
  if (!gauge) {
    throw ValidationError(
        "network is structurally imbalanced: no consistent sign partition "
        "exists");
  }
  if (!check_assumption1(network, *gauge)) {
    throw ValidationError(
        "the gauged Laplacian lacks the required d-dimensional null space "
        "(network must be connected and structurally balanced)");
  }
  if (leader && !check_assumption2(network)) {
    throw ValidationError(
        "leader coverage check failed: the input-augmented network must stay "
        "balanced with a common input sign and the summed leader weights "
        "must be positive definite");
  }
  for (int i = 0; i < n; ++i) {
    params[i].gain =
        leader ? compute_omega(network, i) : compute_varpi(network, i);
  }
  const std::vector<std::string> violations =
      validate_params(params, network, leader);
  if (!violations.empty()) {
    std::string joined = "invalid trigger parameters: ";
    for (std::size_t k = 0; k < violations.size(); ++k) {
      if (k > 0) joined += "; ";
      joined += violations[k];
    }
    throw ValidationError(joined);
  }

  return Scenario{std::move(network), std::move(params),     *mode,
                  SaturationLevel(delta_sat), t_end,          dt,
                  sample_dt,          refine_tol,             seed,
                  std::move(init),    max_eps,                weight_tol};
}

Scenario parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot read scenario file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario& scenario) {
  using detail::fmt17;
  const MatrixWeightedNetwork& g = scenario.network;
  const int n = g.node_count();
  const int d = g.dim();
  std::ostringstream os;
  os << "[network]\n";
  os << "n = " << n << "\n";
  os << "d = " << d << "\n";
  os << "tol = " << fmt17(scenario.weight_tol) << "\n";
  const auto write_matrix = [&](const Eigen::MatrixXd& m) {
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        os << " " << fmt17(m(r, c));
      }
    }
  };
  for (const auto& [key, w] : g.edges()) {
    os << "edge = " << key.first + 1 << " " << key.second + 1;
    write_matrix(w.entries());
    os << "\n";
  }
  if (!g.inputs().empty() || !g.leader_edges().empty()) {
    os << "\n[leaders]\n";
    for (const Eigen::VectorXd& w : g.inputs()) {
      os << "input =";
      for (int k = 0; k < d; ++k) os << " " << fmt17(w(k));
      os << "\n";
    }
    for (const auto& [key, w] : g.leader_edges()) {
      os << "leader_edge = " << key.first + 1 << " " << key.second + 1;
      write_matrix(w.entries());
      os << "\n";
    }
  }
  os << "\n[params]\n";
  const auto write_param = [&](const char* name, auto getter) {
    os << name << " =";
    for (int i = 0; i < n; ++i) {
      os << " " << fmt17(getter(scenario.params[i]));
    }
    os << "\n";
  };
  write_param("rho", [](const TriggerParams& p) { return p.rho; });
  write_param("delta", [](const TriggerParams& p) { return p.delta; });
  write_param("beta", [](const TriggerParams& p) { return p.beta; });
  write_param("theta", [](const TriggerParams& p) { return p.theta; });
  write_param("psi0", [](const TriggerParams& p) { return p.psi0; });
  os << "\n[sim]\n";
  os << "mode = " << mode_name(scenario.mode) << "\n";
  os << "delta_sat = " << fmt17(scenario.sat_level.value) << "\n";
  os << "t_end = " << fmt17(scenario.t_end) << "\n";
  os << "dt = " << fmt17(scenario.dt) << "\n";
  os << "sample_dt = " << fmt17(scenario.sample_dt) << "\n";
  os << "refine_tol = " << fmt17(scenario.refine_tol) << "\n";
  os << "seed = " << scenario.seed << "\n";
  os << "max_events_per_second = " << fmt17(scenario.max_events_per_second)
     << "\n";
  if (scenario.init.explicit_states) {
    os << "init = explicit\n";
    for (const Eigen::VectorXd& x : scenario.init.states) {
      os << "state =";
      for (int k = 0; k < x.size(); ++k) os << " " << fmt17(x(k));
      os << "\n";
    }
  } else {
    os << "init = uniform\n";
    os << "init_range = " << fmt17(scenario.init.lo) << " "
       << fmt17(scenario.init.hi) << "\n";
  }
  return os.str();
}

}  // namespace mwcons
