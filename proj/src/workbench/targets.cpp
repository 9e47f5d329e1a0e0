#include "sird/workbench/targets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sird/errors.hpp"

namespace sird::workbench {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string_view rest = line;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("column '" + column + "' is not a number: '" + field + "'", row);
  }
  return v;
}

std::string format(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Target synthesize_known_target(const ParameterVector& alpha_star, const Vec3& rho0,
                               const TimeGrid& grid, const SolverSettings& solver) {
  if (!alpha_star.feasible()) throw ConfigError("generating parameters must be feasible");
  const StateTrajectory state = solve_state(alpha_star, rho0, grid, solver);
  return {state.interpolant(), TargetSource::Synthetic};
}

Target synthesize_known_target(const Vec3& alpha_star, const Vec3& rho0, double horizon,
                               std::size_t interior, const SolverSettings& solver) {
  return synthesize_known_target(
      ParameterVector::constant(alpha_star[0], alpha_star[1], alpha_star[2]), rho0,
      chebyshev_grid(interior, horizon), solver);
}

Eigen::Matrix3Xd sine_transform(const Eigen::Matrix3Xd& rho, const Vec3& rho0) {
  Eigen::Matrix3Xd out = rho;
  for (Eigen::Index k = 0; k < rho.cols(); ++k) {
    for (int i = 0; i < 3; ++i) out(i, k) += 4.0 * (std::sin(rho(i, k)) - std::sin(rho0[i]));
  }
  return out;
}

Target synthesize_noisy_target(const Vec3& alpha_star, const Vec3& rho0, double horizon,
                               std::size_t cells, std::size_t interior,
                               const SolverSettings& solver) {
  if (cells < 1) throw ConfigError("noisy target needs at least one cell");
  const auto alpha = ParameterVector::constant(alpha_star[0], alpha_star[1], alpha_star[2]);
  if (!alpha.feasible()) throw ConfigError("generating parameters must be feasible");
  const StateTrajectory state = solve_state(alpha, rho0, chebyshev_grid(interior, horizon), solver);

  // Hermite data of the transformed curve: chain rule on the state slopes.
  const Eigen::Matrix3Xd values = sine_transform(state.rho(), rho0);
  Eigen::Matrix3Xd slopes = state.rho_dot();
  for (Eigen::Index k = 0; k < slopes.cols(); ++k) {
    for (int i = 0; i < 3; ++i) slopes(i, k) *= 1.0 + 4.0 * std::cos(state.rho()(i, k));
  }
  const Interpolant transformed = Interpolant::cubic_hermite(state.grid().nodes(), values, slopes);
  return {rolling_average(transformed, cells), TargetSource::RollingAverage};
}

DataTable read_table(std::istream& in, const std::array<std::string, 4>& columns) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 0);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split(line);
  std::array<std::size_t, 4> pos{};
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t found = header.size();
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (header[h] == columns[c]) found = h;
    }
    if (found == header.size()) throw ConfigError("missing column '" + columns[c] + "'");
    pos[c] = found;
  }

  std::vector<double> time;
  std::vector<Vec3> counts;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       row);
    }
    const double t = parse_number(fields[pos[0]], row, columns[0]);
    if (!time.empty() && !(t > time.back())) throw ParseError("time is not strictly increasing", row);
    Vec3 c;
    for (int i = 0; i < 3; ++i) {
      const auto k = static_cast<std::size_t>(i + 1);
      c[i] = parse_number(fields[pos[k]], row, columns[k]);
      if (c[i] < 0.0) throw ParseError("negative count in '" + columns[k] + "'", row);
    }
    time.push_back(t);
    counts.push_back(c);
  }
  if (time.size() < 2) throw ParseError("need at least two data rows", row);

  DataTable table;
  table.time = std::move(time);
  table.counts.resize(3, static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) table.counts.col(static_cast<Eigen::Index>(k)) = counts[k];
  return table;
}

DataTable read_table(const std::filesystem::path& path, const std::array<std::string, 4>& columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_table(in, columns);
}

void write_table(const std::filesystem::path& path, const DataTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "time,susceptible,infected,recovered\n";
  for (std::size_t k = 0; k < table.time.size(); ++k) {
    const auto c = table.counts.col(static_cast<Eigen::Index>(k));
    out << format(table.time[k]) << ',' << format(c[0]) << ',' << format(c[1]) << ','
        << format(c[2]) << '\n';
  }
}

LoadedTarget table_target(const DataTable& table, double time_scale, double population_scale,
                          const std::string& interpolation) {
  if (table.time.size() < 2) throw ConfigError("need at least two data rows");
  std::vector<double> t(table.time.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = (table.time[k] - table.time.front()) * time_scale;
  const Eigen::Matrix3Xd v = table.counts * population_scale;

  LoadedTarget out;
  out.rho0 = v.col(0);
  out.population = out.rho0.sum();
  out.horizon = t.back();
  if (interpolation == "linear") {
    out.target = {Interpolant::linear(t, v), TargetSource::ExternalData};
  } else if (interpolation == "hermite") {
    // Centred difference slopes inside, one-sided at the ends.
    const auto n = v.cols();
    Eigen::Matrix3Xd d(3, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index a = k == 0 ? 0 : k - 1;
      const Eigen::Index b = k == n - 1 ? n - 1 : k + 1;
      d.col(k) = (v.col(b) - v.col(a)) /
                 (t[static_cast<std::size_t>(b)] - t[static_cast<std::size_t>(a)]);
    }
    out.target = {Interpolant::cubic_hermite(t, v, d), TargetSource::ExternalData};
  } else {
    throw ConfigError("interpolation must be linear or hermite");
  }
  return out;
}

LoadedTarget load_csv_target(const TargetConfig& cfg) {
  return table_target(read_table(cfg.path, cfg.columns), cfg.time_scale, cfg.population_scale,
                      cfg.interpolation);
}

ParameterVector fixture_parameters(double horizon, std::size_t nodes) {
  if (nodes < 2) throw ConfigError("fixture needs at least two nodes");
  std::vector<double> t(nodes);
  Eigen::MatrixXd v(3, static_cast<Eigen::Index>(nodes));
  for (std::size_t k = 0; k < nodes; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(nodes - 1);
    t[k] = horizon * u;
    const auto c = static_cast<Eigen::Index>(k);
    v(0, c) = 1.2e-3 + 1.0e-3 * u * u;
    v(1, c) = 0.25 + 0.05 * std::sin(std::numbers::pi * u);
    v(2, c) = 0.004;
  }
  t.back() = horizon;
  return ParameterVector::piecewise_linear(std::move(t), std::move(v));
}

DataTable synthesize_fixture_table() {
  constexpr double kPersonsPerUnit = 1e4;
  constexpr int kDays = 60;
  const double horizon = kDays / 7.0;
  const Vec3 rho0(585.0 - 0.01, 0.004, 0.006);

  SolverSettings tight;
  tight.state_tol = {1e-11, 1e-13};
  const StateTrajectory state =
      solve_state(fixture_parameters(horizon), rho0, chebyshev_grid(200, horizon), tight);

  DataTable table;
  table.counts.resize(3, kDays + 1);
  for (int d = 0; d <= kDays; ++d) {
    table.time.push_back(d);
    const double t = d == kDays ? horizon : d / 7.0;
    table.counts.col(d) = (d == 0 ? rho0 : state.at(t)) * kPersonsPerUnit;
  }
  return table;
}

}  // namespace sird::workbench
