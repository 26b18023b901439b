#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "aquanet/payload.hpp"
#include "aquanet/types.hpp"

namespace aquanet {

struct HourlyWeather {
  Timestamp time = 0;
  std::int64_t temp_milli_c = 0;
  std::int64_t precip_milli_mm = 0;
  int humidity_pct = 0;
  std::int64_t wind_milli_ms = 0;
  int cloudiness_pct = 0;
};

struct WeatherForecast {
  double lat = 0.0;
  double lon = 0.0;
  std::vector<HourlyWeather> entries;  // sorted, hourly spacing
};

inline Document forecast_to_document(const WeatherForecast& f) {
  Document entries = Document::array();
  for (const auto& e : f.entries) {
    entries.push_back({{"time", e.time},
                       {"temperature_c", milli_to_double(e.temp_milli_c)},
                       {"precipitation_mm", milli_to_double(e.precip_milli_mm)},
                       {"humidity_pct", e.humidity_pct},
                       {"wind_ms", milli_to_double(e.wind_milli_ms)},
                       {"cloudiness_pct", e.cloudiness_pct}});
  }
  return {{"location", {{"lat", f.lat}, {"lon", f.lon}}}, {"entries", std::move(entries)}};
}

inline WeatherForecast forecast_from_document(const Document& doc) {
  WeatherForecast f;
  f.lat = doc.at("location").at("lat").get<double>();
  f.lon = doc.at("location").at("lon").get<double>();
  for (const auto& e : doc.at("entries")) {
    HourlyWeather h;
    h.time = e.at("time").get<Timestamp>();
    h.temp_milli_c = milli_from_json(e.at("temperature_c"));
    h.precip_milli_mm = milli_from_json(e.at("precipitation_mm"));
    h.humidity_pct = e.at("humidity_pct").get<int>();
    h.wind_milli_ms = milli_from_json(e.at("wind_ms"));
    h.cloudiness_pct = e.at("cloudiness_pct").get<int>();
    if (h.humidity_pct < 0 || h.humidity_pct > 100 || h.cloudiness_pct < 0 ||
        h.cloudiness_pct > 100)
      throw ConfigError("forecast percentage out of [0,100]");
    if (!f.entries.empty() && h.time != f.entries.back().time + kSecondsPerHour)
      throw ConfigError("forecast entries must be hourly and sorted");
    f.entries.push_back(h);
  }
  return f;
}

// A location's climate, used by the simulated forecast service. Temperatures
// follow a triangle wave (coldest 04:00, warmest 16:00); rain falls as a
// steady drizzle. Integer arithmetic keeps generated forecasts identical
// across platforms.
struct WeatherProfile {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
  std::int64_t temp_min_milli_c = 0;
  std::int64_t temp_max_milli_c = 0;
  std::int64_t rain_milli_mm_per_day = 0;
};

inline std::int64_t profile_temp_at_hour(const WeatherProfile& p, std::int64_t hour_of_day) {
  const std::int64_t dist = std::abs(((hour_of_day + 24 - 16) % 24) - 12);  // 0 at 16:00
  return p.temp_max_milli_c - (p.temp_max_milli_c - p.temp_min_milli_c) * (12 - dist) / 12;
}

inline WeatherForecast synthesize_forecast(const WeatherProfile& p, Timestamp from_day_start,
                                           int days) {
  WeatherForecast f;
  f.lat = p.lat;
  f.lon = p.lon;
  const std::int64_t hourly_rain = p.rain_milli_mm_per_day / 24;
  for (std::int64_t h = 0; h < days * 24; ++h) {
    HourlyWeather e;
    e.time = from_day_start + h * kSecondsPerHour;
    e.temp_milli_c = profile_temp_at_hour(p, h % 24);
    e.precip_milli_mm = hourly_rain;
    e.humidity_pct = p.rain_milli_mm_per_day > 0 ? 80 : 40;
    e.wind_milli_ms = 3000;
    e.cloudiness_pct = p.rain_milli_mm_per_day > 0 ? 75 : 20;
    f.entries.push_back(e);
  }
  return f;
}

// Watering-need model: a linear-in-temperature evapotranspiration proxy
// against forecast rain, normalized by the base plan's daily water need.
//   need(T, R) = clamp((ET0(T) - R) / base_need, 0, 1.5)
//   ET0(T)     = max(0, k * (T - T_ref))
struct NeedModel {
  std::int64_t k_permille = 400;           // mm per degC per day, in permille
  std::int64_t t_ref_milli_c = 10000;      // ET0 is zero at or below this
  std::int64_t base_need_milli_mm = 4000;  // daily water need of the base plan
};

// Per-day watering percentage in permille, keyed by epoch day. Monotone
// non-decreasing in every temperature and non-increasing in every
// precipitation value.
inline std::map<std::int64_t, int> watering_permille(const WeatherForecast& f,
                                                     const NeedModel& model) {
  struct DayAgg {
    std::int64_t temp_sum = 0;
    std::int64_t rain_sum = 0;
    std::int64_t hours = 0;
  };
  std::map<std::int64_t, DayAgg> days;
  for (const auto& e : f.entries) {
    DayAgg& d = days[e.time / kSecondsPerDay];
    d.temp_sum += e.temp_milli_c;
    d.rain_sum += e.precip_milli_mm;
    d.hours += 1;
  }
  std::map<std::int64_t, int> out;
  for (const auto& [day, agg] : days) {
    // floor division keeps the mean monotone for negative temperatures too
    std::int64_t mean_temp = agg.temp_sum >= 0 ? agg.temp_sum / agg.hours
                                               : -((-agg.temp_sum + agg.hours - 1) / agg.hours);
    std::int64_t et0 = mean_temp > model.t_ref_milli_c
                           ? model.k_permille * (mean_temp - model.t_ref_milli_c) / 1000
                           : 0;
    std::int64_t deficit = et0 - agg.rain_sum;
    std::int64_t permille = deficit <= 0 ? 0 : deficit * 1000 / model.base_need_milli_mm;
    out[day] = static_cast<int>(std::min<std::int64_t>(permille, 1500));
  }
  return out;
}

}  // namespace aquanet
