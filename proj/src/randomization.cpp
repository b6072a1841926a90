#include "drtraffic/randomization.hpp"

#include <algorithm>

#include "drtraffic/errors.hpp"

namespace drtraffic {

namespace {

struct ParamInfo {
  std::string_view name;
  double default_value;
  double s_min;
  double s_max;
};

constexpr std::array<ParamInfo, kDriverParamCount> kTable{{
    {"delta", 4.0, 3.5, 4.5},
    {"T", 1.0, 0.5, 1.5},
    {"a_max", 2.6, 1.8, 3.4},
    {"a_min", -4.5, -5.5, -3.5},
    {"v_max", 8.33, 7.33, 9.33},
    {"lcSpeedGain", 1.0, 0.0, 100.0},
    {"lcAssertive", 1.0, 1.0, 5.0},
}};

const ParamInfo& info(DriverParam p) { return kTable[static_cast<std::size_t>(p)]; }

}  // namespace

std::string_view param_name(DriverParam p) { return info(p).name; }

double default_value(DriverParam p) { return info(p).default_value; }

DriverParam parse_param(std::string_view name) {
  if (name == "δ") return DriverParam::kDelta;
  for (std::size_t i = 0; i < kTable.size(); ++i) {
    if (kTable[i].name == name) return static_cast<DriverParam>(i);
  }
  throw UnknownParameter("unknown driver parameter '" + std::string(name) + "'");
}

bool RandomizationSpec::valid() const {
  return std::all_of(ranges.begin(), ranges.end(),
                     [](const ParamRange& r) { return r.s_min < r.s_max; });
}

bool RandomizationSpec::any_enabled() const {
  return std::any_of(ranges.begin(), ranges.end(), [](const ParamRange& r) { return r.enabled; });
}

RandomizationSpec RandomizationSpec::full() {
  RandomizationSpec spec;
  for (std::size_t i = 0; i < kTable.size(); ++i) {
    spec.ranges[i] = {true, kTable[i].s_min, kTable[i].s_max};
  }
  return spec;
}

RandomizationSpec RandomizationSpec::none() {
  RandomizationSpec spec = full();
  for (auto& r : spec.ranges) r.enabled = false;
  return spec;
}

double DriverParams::get(DriverParam p) const {
  switch (p) {
    case DriverParam::kDelta: return idm.delta;
    case DriverParam::kTimeGap: return idm.T;
    case DriverParam::kAccelMax: return idm.a_max;
    case DriverParam::kAccelMin: return idm.a_min;
    case DriverParam::kSpeedMax: return idm.v0;
    case DriverParam::kLcSpeedGain: return lc.lc_speed_gain;
    case DriverParam::kLcAssertive: return lc.lc_assertive;
  }
  return 0.0;
}

void DriverParams::set(DriverParam p, double value) {
  switch (p) {
    case DriverParam::kDelta: idm.delta = value; break;
    case DriverParam::kTimeGap: idm.T = value; break;
    case DriverParam::kAccelMax: idm.a_max = value; break;
    case DriverParam::kAccelMin: idm.a_min = value; break;
    case DriverParam::kSpeedMax: idm.v0 = value; break;
    case DriverParam::kLcSpeedGain: lc.lc_speed_gain = value; break;
    case DriverParam::kLcAssertive: lc.lc_assertive = value; break;
  }
}

std::array<double, kDriverParamCount> draw_unclipped(const RandomizationSpec& spec,
                                                     RngStream& rng) {
  std::array<double, kDriverParamCount> out{};
  for (std::size_t i = 0; i < kDriverParamCount; ++i) {
    const double z = rng.normal();
    out[i] = spec.ranges[i].mean() + spec.ranges[i].sigma() * z;
  }
  return out;
}

DriverParams sample_params(const RandomizationSpec& spec, RngStream& rng) {
  const auto raw = draw_unclipped(spec, rng);
  DriverParams params;
  for (std::size_t i = 0; i < kDriverParamCount; ++i) {
    const auto p = static_cast<DriverParam>(i);
    const ParamRange& r = spec.ranges[i];
    if (!r.enabled) continue;
    params.set(p, std::clamp(raw[i], r.s_min, r.s_max));
    params.provenance = ParamProvenance::kRandomized;
  }
  return params;
}

RandomizationSpec ablation_spec(const RandomizationSpec& base, std::string_view drop) {
  RandomizationSpec spec = base;
  spec[parse_param(drop)].enabled = false;
  return spec;
}

}  // namespace drtraffic
