#include "lgnav/query_decision.hpp"

#include <cmath>
#include <limits>

#include "lgnav/errors.hpp"

namespace lgnav {

DeviationMonitor::DeviationMonitor(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("tau must be a finite value > 0");
}

void DeviationMonitor::adopt(double length) {
  // A zero-length plan cannot serve as a relative reference.
  if (length > 0.0) {
    reference_ = length;
  } else {
    reference_.reset();
  }
}

Decision DeviationMonitor::assess(const std::optional<PlannedPath>& new_plan) {
  return assess_length(new_plan ? std::optional<double>(new_plan->length) : std::nullopt);
}

Decision DeviationMonitor::assess_length(std::optional<double> new_length) {
  last_deviation_.reset();
  if (!reference_) {
    if (new_length) adopt(*new_length);
    return Decision::Continue;
  }
  if (!new_length) {
    last_deviation_ = std::numeric_limits<double>::infinity();
    reference_.reset();
    return Decision::Query;
  }
  const double deviation = std::abs(*new_length - *reference_) / *reference_;
  last_deviation_ = deviation;
  if (deviation > tau_) {
    reference_.reset();
    return Decision::Query;
  }
  adopt(*new_length);
  return Decision::Continue;
}

void DeviationMonitor::rebase(double remaining) {
  if (!reference_) return;
  adopt(remaining);
}

}  // namespace lgnav
