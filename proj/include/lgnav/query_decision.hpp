#pragma once

#include <optional>

#include "lgnav/planner.hpp"

namespace lgnav {

enum class Decision { Continue, Query };

// Watches successive global plans and asks for help when the plan length
// jumps by more than `tau` relative to the reference plan.
class DeviationMonitor {
 public:
  static constexpr double kDefaultTau = 0.25;

  explicit DeviationMonitor(double tau = kDefaultTau);

  // deviation = |L_new - L_ref| / L_ref. Continue adopts the new plan as the
  // reference; Query clears the reference. NoPath with a reference set is a
  // Query; the first plan after a reset never is.
  Decision assess(const std::optional<PlannedPath>& new_plan);
  Decision assess_length(std::optional<double> new_length);

  // The robot moved along the reference plan; `remaining` is the length of
  // the unexecuted part. No-op while the reference is unset.
  void rebase(double remaining);

  void reset() { reference_.reset(); }

  double tau() const { return tau_; }
  std::optional<double> reference_length() const { return reference_; }
  // Deviation of the most recent assess() with a reference, if any.
  std::optional<double> last_deviation() const { return last_deviation_; }

 private:
  void adopt(double length);

  double tau_;
  std::optional<double> reference_;
  std::optional<double> last_deviation_;
};

}  // namespace lgnav
