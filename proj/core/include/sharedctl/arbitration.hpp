// Copyright 2026 The sharedctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sharedctl/nmpc.hpp"
#include "sharedctl/world.hpp"

namespace sharedctl {

/// Trapezoid (a, b, c, d): zero outside [a, d], one on [b, c]. a == b or c == d
/// gives a shoulder; b == c gives a triangle.
struct MembershipFunction {
  std::string name;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  double grade(double x) const;
};

struct LinguisticVariable {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  std::vector<MembershipFunction> terms;

  std::size_t term_index(const std::string& term) const;
  /// Input values outside the universe are clamped to it.
  double clamp(double x) const;
};

struct FuzzyRule {
  std::size_t position;  ///< term of the lateral-position input
  std::size_t intention; ///< term of the lateral-rate input
  std::size_t risk;      ///< term of the distance-to-collision input
  std::size_t output;    ///< term of the authority output
};

enum class Defuzzifier { Centroid };

/// Three-input Mamdani system: lateral position, lateral rate (intention), DTC (risk).
struct FuzzySystem {
  LinguisticVariable position;
  LinguisticVariable intention;
  LinguisticVariable risk;
  LinguisticVariable authority;
  std::vector<FuzzyRule> rules;
  Defuzzifier defuzzifier = Defuzzifier::Centroid;
  int resolution = 401;

  static FuzzySystem corrective_default();
  static FuzzySystem from_json(const std::string& text);
  std::string to_json() const;
  void validate() const;
};

struct RiskInputs {
  double e_y = 0.0;       ///< from the right-lane center, left positive
  double e_y_dot = 0.0;
  double dtc = std::numeric_limits<double>::infinity();
  std::optional<double> ttc;
};

struct FuzzyEvaluation {
  double lambda = 0.0;
  std::vector<double> rule_strengths;
};

FuzzyEvaluation evaluate(const FuzzySystem& sys, const RiskInputs& in);

/// Mamdani min/max inference with centroid defuzzification, output in [0, 8] N m.
double corrective_authority(const RiskInputs& inputs, const FuzzySystem& sys);

inline constexpr double kEvasiveClearance = 50.0;  // m
inline constexpr double kEvasiveSafeUpper = 1.5;   // m
inline constexpr double kEvasiveShiftUpper = -1.25;// m
inline constexpr double kEvasiveLower = -1.5;      // m
inline constexpr double kEvasiveLowAuthority = 3.0;
inline constexpr double kEvasiveHighAuthority = 12.0;

/// Threshold rules on predicted clearances d(k): per-stage upper lateral bound and authority.
AuthorityCommand evasive_authority(const std::vector<double>& predicted_clearance);

/// DTC, TTC and lateral error/rate of the ego with respect to the designated threat.
RiskInputs threat_assessment(const WorldState& world);

/// Time-to-collision with the threat, defined only while the ego footprint encroaches the
/// threat's lane corridor (threat lateral position +- half a lane) and the two are closing.
std::optional<double> conflict_ttc(const OrientedBox& ego, double ego_vx_world, const ActorState& threat,
                                   double lane_width);

/// First-order low-pass used to smooth the corrective authority between ticks.
class AuthorityFilter {
 public:
  explicit AuthorityFilter(double time_constant = 0.2, double initial = 3.0)
      : tau_(time_constant), value_(initial) {}
  double update(double target, double dt);
  double value() const { return value_; }
  void reset(double v) { value_ = v; }

 private:
  double tau_;
  double value_;
};

}  // namespace sharedctl
