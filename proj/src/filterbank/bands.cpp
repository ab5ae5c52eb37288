#include "filterbank/bands.hpp"

#include <json.hpp>

#include <cmath>

using nlohmann::json;

namespace fbtrca {

const char* to_string(RangeSetting setting) {
  switch (setting) {
    case RangeSetting::M1: return "M1";
    case RangeSetting::M2: return "M2";
    case RangeSetting::M3: return "M3";
    case RangeSetting::custom: return "custom";
  }
  return "?";
}

RangeSetting range_setting_from_string(const std::string& name) {
  if (name == "M1" || name == "m1") return RangeSetting::M1;
  if (name == "M2" || name == "m2") return RangeSetting::M2;
  if (name == "M3" || name == "m3") return RangeSetting::M3;
  if (name == "custom") return RangeSetting::custom;
  throw ValidationError("unknown frequency range setting: " + name);
}

void BandSpec::validate() const {
  if (!(low_hz > 0.0)) throw ValidationError("band low edge must be positive");
  if (!(low_hz < high_hz)) throw ValidationError("band needs low < high");
  if (high_hz > 10.0 + 1e-12)
    throw ValidationError("band high edge exceeds the 10 Hz MRCP ceiling");
}

std::vector<BandSpec> make_bands(RangeSetting setting, int m, double f_min, double f_max) {
  if (m < 1) throw ValidationError("band count m must be >= 1");
  if (!(f_min > 0.0 && f_min < f_max))
    throw ValidationError("need 0 < f_min < f_max");

  std::vector<BandSpec> bands;
  bands.reserve(static_cast<std::size_t>(m));
  switch (setting) {
    case RangeSetting::M1: {
      if (std::abs(f_max - m) > 1e-9)
        throw ValidationError("M1 needs m == f_max (1 Hz band widths): got m=" +
                              std::to_string(m));
      if (f_min >= 1.0) throw ValidationError("M1 needs f_min < 1 Hz");
      for (int k = 0; k < m; ++k)
        bands.push_back({k == 0 ? f_min : static_cast<double>(k), static_cast<double>(k + 1),
                         RangeSetting::M1, k});
      break;
    }
    case RangeSetting::M2: {
      const double step = 0.09 * f_max;
      if (f_min >= step) throw ValidationError("M2 needs f_min below the first stop edge");
      if (step * (m - 1) >= f_max)
        throw ValidationError("M2 band count m too large for f_max: got m=" + std::to_string(m));
      bands.push_back({f_min, step, RangeSetting::M2, 0});
      for (int k = 1; k < m; ++k) {
        const double low = step * k;
        bands.push_back({low, std::min(2.0 * low, f_max), RangeSetting::M2, k});
      }
      break;
    }
    case RangeSetting::M3: {
      if (f_max / m <= f_min)
        throw ValidationError("M3 band count m too large for f_max: got m=" + std::to_string(m));
      for (int k = 0; k < m; ++k)
        bands.push_back({f_min, (k + 1) * f_max / m, RangeSetting::M3, k});
      break;
    }
    case RangeSetting::custom:
      throw ValidationError("make_bands needs one of M1, M2, M3");
  }
  for (const auto& b : bands) b.validate();
  return bands;
}

std::vector<BandSpec> make_shifted_grid() {
  std::vector<BandSpec> bands;
  bands.reserve(100);
  int index = 0;
  for (int li = 1; li <= 10; ++li)
    for (int hi = 1; hi <= 10; ++hi)
      bands.push_back({0.05 * li, static_cast<double>(hi), RangeSetting::custom, index++});
  for (const auto& b : bands) b.validate();
  return bands;
}

std::vector<BandSpec> bands_from_json(const std::string& text) {
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed band config JSON: ") + e.what());
  }
  if (cfg.contains("bands")) {
    std::vector<BandSpec> bands;
    int index = 0;
    for (const auto& item : cfg.at("bands")) {
      BandSpec b{item.at("low_hz").get<double>(), item.at("high_hz").get<double>(),
                 RangeSetting::custom, index++};
      b.validate();
      bands.push_back(b);
    }
    if (bands.empty()) throw ValidationError("band config lists no bands");
    return bands;
  }
  const auto setting = range_setting_from_string(cfg.at("setting").get<std::string>());
  return make_bands(setting, cfg.at("m").get<int>(), cfg.value("f_min", 0.05),
                    cfg.value("f_max", 10.0));
}

std::string bands_to_json(const std::vector<BandSpec>& bands) {
  json out;
  out["bands"] = json::array();
  for (const auto& b : bands)
    out["bands"].push_back({{"low_hz", b.low_hz},
                            {"high_hz", b.high_hz},
                            {"setting", to_string(b.setting)},
                            {"index", b.index}});
  return out.dump(2);
}

}  // namespace fbtrca
