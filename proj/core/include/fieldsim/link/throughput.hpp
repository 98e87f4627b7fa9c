#pragma once

#include <span>
#include <utility>

#include <nlohmann/json.hpp>

namespace fieldsim::link {

struct QuadraticFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double x) const { return a + b * x + c * x * x; }
};

// Achievable TCP rate over distance, rate(d) = a + b*d + c*d^2 in bit/s,
// clamped at zero. The default coefficients are synthetic placeholders that
// decrease monotonically from 30 Mbit/s at 0 m to 2 Mbit/s at 200 m; replace
// them with a fit of measured data.
struct ThroughputModel {
  QuadraticFit curve{30e6, -280e3, 700.0};
  double udp_offered_bps = 1e6;
  double loss_stability_threshold = 0.01;

  void validate(std::string_view path = "throughput") const;
};

double tcp_rate(double distance, const ThroughputModel& model);

struct UdpOutcome {
  double delivered_bps = 0.0;
  double loss_fraction = 0.0;
  bool stable = false;
};

// delivered = min(offered, capacity); loss = 1 - delivered / offered.
UdpOutcome udp_delivered(double offered_bps, double capacity_bps, double loss_stability_threshold);
// Capacity taken from the model's TCP curve at `distance`.
UdpOutcome udp_delivered_at(double offered_bps, double distance, const ThroughputModel& model);

using Sample = std::pair<double, double>;

// Least-squares degree-2 polynomial. Throws DegenerateFit with fewer than
// three distinct abscissae.
QuadraticFit fit_quadratic(std::span<const Sample> points);
double sum_squared_residuals(std::span<const Sample> points, const QuadraticFit& fit);

ThroughputModel throughput_model_from_json(const nlohmann::json& j, std::string_view path);
nlohmann::json to_json(const ThroughputModel& m);

}  // namespace fieldsim::link
