#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "drtraffic/idm.hpp"
#include "drtraffic/rng.hpp"
#include "drtraffic/sl2015.hpp"

namespace drtraffic {

/// The seven randomized driver parameters, in sampling order.
enum class DriverParam : std::size_t {
  kDelta = 0,
  kTimeGap,
  kAccelMax,
  kAccelMin,
  kSpeedMax,
  kLcSpeedGain,
  kLcAssertive,
};
inline constexpr std::size_t kDriverParamCount = 7;

std::string_view param_name(DriverParam p);
/// Accepts the canonical names ("delta", "T", "a_max", "a_min", "v_max",
/// "lcSpeedGain", "lcAssertive") plus "δ". Throws UnknownParameter.
DriverParam parse_param(std::string_view name);
double default_value(DriverParam p);

struct ParamRange {
  bool enabled = true;
  double s_min = 0.0;
  double s_max = 0.0;

  double mean() const { return 0.5 * (s_max + s_min); }
  double sigma() const { return (s_max - s_min) / 6.0; }
};

struct RandomizationSpec {
  std::array<ParamRange, kDriverParamCount> ranges{};

  ParamRange& operator[](DriverParam p) { return ranges[static_cast<std::size_t>(p)]; }
  const ParamRange& operator[](DriverParam p) const {
    return ranges[static_cast<std::size_t>(p)];
  }
  bool valid() const;
  bool any_enabled() const;

  /// All seven parameters enabled over their nominal intervals.
  static RandomizationSpec full();
  /// All parameters disabled: every vehicle gets the default driver.
  static RandomizationSpec none();
};

enum class ParamProvenance { kDefault, kRandomized };

struct DriverParams {
  IdmParams idm;
  Sl2015Params lc;
  ParamProvenance provenance = ParamProvenance::kDefault;

  static DriverParams defaults() { return {}; }
  double get(DriverParam p) const;
  void set(DriverParam p, double value);
};

/// Pre-clip Gaussian draws for every parameter. Exactly seven standard normal
/// deviates are consumed per call whether or not a parameter is enabled, so
/// ablating one parameter leaves the others' values unchanged.
std::array<double, kDriverParamCount> draw_unclipped(const RandomizationSpec& spec, RngStream& rng);

/// Enabled parameters: N(mu, sigma^2) clipped to [s_min, s_max]. Disabled:
/// default value.
DriverParams sample_params(const RandomizationSpec& spec, RngStream& rng);

/// Copy of base with one parameter disabled. Throws UnknownParameter.
RandomizationSpec ablation_spec(const RandomizationSpec& base, std::string_view drop);

}  // namespace drtraffic
