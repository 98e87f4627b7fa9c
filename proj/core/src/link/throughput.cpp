#include "fieldsim/link/throughput.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "fieldsim/errors.hpp"
#include "fieldsim/json_util.hpp"

namespace fieldsim::link {

using json_util::join;

void ThroughputModel::validate(std::string_view path) const {
  if (!std::isfinite(curve.a) || !std::isfinite(curve.b) || !std::isfinite(curve.c)) {
    throw ConfigInvalid(std::string(path), "coefficients must be finite");
  }
  if (!(udp_offered_bps > 0.0)) throw ConfigInvalid(join(path, "udp_offered"), "must be > 0");
  if (!(loss_stability_threshold >= 0.0 && loss_stability_threshold <= 1.0)) {
    throw ConfigInvalid(join(path, "loss_threshold"), "must lie in [0, 1]");
  }
}

double tcp_rate(double distance, const ThroughputModel& model) {
  return std::max(0.0, model.curve(distance));
}

UdpOutcome udp_delivered(double offered_bps, double capacity_bps, double loss_stability_threshold) {
  if (!(offered_bps > 0.0)) throw std::invalid_argument("udp_delivered: offered rate must be > 0");
  UdpOutcome out;
  out.delivered_bps = std::min(offered_bps, std::max(0.0, capacity_bps));
  out.loss_fraction = 1.0 - out.delivered_bps / offered_bps;
  out.stable = out.loss_fraction <= loss_stability_threshold;
  return out;
}

UdpOutcome udp_delivered_at(double offered_bps, double distance, const ThroughputModel& model) {
  return udp_delivered(offered_bps, tcp_rate(distance, model), model.loss_stability_threshold);
}

QuadraticFit fit_quadratic(std::span<const Sample> points) {
  std::set<double> distinct;
  double scale = 0.0;
  for (const auto& [x, y] : points) {
    distinct.insert(x);
    scale = std::max(scale, std::abs(x));
  }
  if (distinct.size() < 3) {
    throw DegenerateFit("need at least 3 distinct abscissae, got " + std::to_string(distinct.size()));
  }
  // Solve in u = x / scale so the Vandermonde columns are comparable in size.
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = points[static_cast<std::size_t>(i)].first / scale;
    design(i, 0) = 1.0;
    design(i, 1) = u;
    design(i, 2) = u * u;
    rhs(i) = points[static_cast<std::size_t>(i)].second;
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  return {coef(0), coef(1) / scale, coef(2) / (scale * scale)};
}

double sum_squared_residuals(std::span<const Sample> points, const QuadraticFit& fit) {
  double total = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - fit(x);
    total += r * r;
  }
  return total;
}

ThroughputModel throughput_model_from_json(const nlohmann::json& j, std::string_view path) {
  ThroughputModel m;
  m.curve.a = json_util::optional<double>(j, "a", path, m.curve.a);
  m.curve.b = json_util::optional<double>(j, "b", path, m.curve.b);
  m.curve.c = json_util::optional<double>(j, "c", path, m.curve.c);
  m.udp_offered_bps = json_util::optional<double>(j, "udp_offered", path, m.udp_offered_bps);
  m.loss_stability_threshold = json_util::optional<double>(j, "loss_threshold", path, m.loss_stability_threshold);
  m.validate(path);
  return m;
}

nlohmann::json to_json(const ThroughputModel& m) {
  return {{"a", m.curve.a},
          {"b", m.curve.b},
          {"c", m.curve.c},
          {"udp_offered", m.udp_offered_bps},
          {"loss_threshold", m.loss_stability_threshold}};
}

}  // namespace fieldsim::link
