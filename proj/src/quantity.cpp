#include "snv/quantity.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "snv/units.hpp"

namespace snv {

namespace {

struct UnitEntry {
  std::string_view suffix;
  double factor; // to the canonical unit of the dimension
};

const std::vector<UnitEntry>& units_for(Dimension d) {
  static const std::vector<UnitEntry> time{{"ps", 1e-3}, {"ns", 1.0}, {"us", 1e3}, {"\xC2\xB5s", 1e3},
                                           {"ms", 1e6},  {"s", 1e9}};
  static const std::vector<UnitEntry> freq{{"Hz", 1e-9},
                                           {"kHz", 1e-6},
                                           {"MHz", 1e-3},
                                           {"GHz", 1.0},
                                           {"THz", 1e3},
                                           {"ueV", 1e-6 / constants::ev_per_ghz},
                                           {"meV", 1e-3 / constants::ev_per_ghz},
                                           {"eV", 1.0 / constants::ev_per_ghz}};
  static const std::vector<UnitEntry> rate{{"cps", 1.0},  {"kcps", 1e3},   {"Mcps", 1e6}, {"cts/s", 1.0},
                                           {"kcts/s", 1e3}, {"Mcts/s", 1e6}, {"Hz", 1.0},   {"kHz", 1e3},
                                           {"MHz", 1e6},  {"/s", 1.0}};
  static const std::vector<UnitEntry> power{{"pW", 1e-6}, {"nW", 1e-3}, {"uW", 1.0},
                                            {"\xC2\xB5W", 1.0}, {"mW", 1e3}, {"W", 1e6}};
  static const std::vector<UnitEntry> length{{"pm", 1e-3}, {"nm", 1.0}, {"um", 1e3}, {"\xC2\xB5m", 1e3}};
  static const std::vector<UnitEntry> energy{{"ueV", 1e-6}, {"meV", 1e-3}, {"eV", 1.0}};
  static const std::vector<UnitEntry> temp{{"mK", 1e-3}, {"K", 1.0}};
  static const std::vector<UnitEntry> speed{{"MHz/s", 1e-3}, {"GHz/s", 1.0}};
  switch (d) {
  case Dimension::time_ns: return time;
  case Dimension::frequency_ghz: return freq;
  case Dimension::rate_hz: return rate;
  case Dimension::power_uw: return power;
  case Dimension::length_nm: return length;
  case Dimension::energy_ev: return energy;
  case Dimension::temperature_k: return temp;
  case Dimension::scan_speed_ghz_s: return speed;
  }
  throw std::logic_error("bad dimension");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

// Splits into the numeric prefix and the unit suffix.
std::pair<double, std::string_view> split_number(std::string_view text) {
  text = trim(text);
  std::string_view num = text;
  if (!num.empty() && num.front() == '+') num.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
  if (ec != std::errc() || p == num.data()) throw std::invalid_argument("'" + std::string(text) + "' is not a quantity");
  if (!std::isfinite(v)) throw std::invalid_argument("'" + std::string(text) + "' is not finite");
  return {v, trim(std::string_view(p, static_cast<std::size_t>(num.data() + num.size() - p)))};
}

} // namespace

const char* to_string(Dimension d) {
  switch (d) {
  case Dimension::time_ns: return "time";
  case Dimension::frequency_ghz: return "frequency";
  case Dimension::rate_hz: return "rate";
  case Dimension::power_uw: return "power";
  case Dimension::length_nm: return "length";
  case Dimension::energy_ev: return "energy";
  case Dimension::temperature_k: return "temperature";
  case Dimension::scan_speed_ghz_s: return "scan speed";
  }
  return "?";
}

double parse_quantity(std::string_view text, Dimension dim) {
  const auto [v, unit] = split_number(text);
  if (unit.empty())
    throw std::invalid_argument("'" + std::string(text) + "' needs a " + to_string(dim) + " unit suffix");
  for (const auto& u : units_for(dim))
    if (unit == u.suffix) return v * u.factor;
  std::string known;
  for (const auto& u : units_for(dim)) {
    if (u.suffix.front() & 0x80) continue;
    known += (known.empty() ? "" : ", ") + std::string(u.suffix);
  }
  throw std::invalid_argument("'" + std::string(text) + "': unit '" + std::string(unit) + "' is not a " +
                              to_string(dim) + " unit (" + known + ")");
}

std::pair<double, double> parse_range(std::string_view text, Dimension dim, bool allow_bare) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("'" + std::string(text) + "' is not lo:hi");
  auto one = [&](std::string_view part) {
    if (allow_bare) {
      const auto [v, unit] = split_number(part);
      if (unit.empty()) return v;
    }
    return parse_quantity(part, dim);
  };
  const double lo = one(text.substr(0, colon));
  const double hi = one(text.substr(colon + 1));
  if (!(hi > lo)) throw std::invalid_argument("'" + std::string(text) + "': upper end must exceed lower end");
  return {lo, hi};
}

} // namespace snv
