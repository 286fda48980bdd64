#pragma once

#include <iterator>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace greenwave {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Engine and vehicle constants for the HBEFA-style emission formulas.
// Values model a mid-size gasoline car: octane fuel (114 g/mole), standard
// air (28.97 g/mole), 1 kW idle draw. The three engine coefficients select
// the reported species; the move/stop forms are shared.
struct EmissionParams {
  double co_engine = 2.0;      // g/kWh
  double co2_engine = 750.0;   // g/kWh
  double fuel_engine = 240.0;  // g/kWh
  double v_engine = 1.5;       // L
  double fc = 8.0;             // L/100km
  double m_fuel = 114.0;       // g/mole
  double m_air = 28.97;        // g/mole
  double r_stop = 1.0;         // kW
};

inline void validate_emission_params(const EmissionParams& p) {
  auto need_positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw ConfigError(std::string("emission params: ") + name + " must be strictly positive");
  };
  need_positive(p.co_engine, "co_engine");
  need_positive(p.co2_engine, "co2_engine");
  need_positive(p.fuel_engine, "fuel_engine");
  need_positive(p.v_engine, "v_engine");
  need_positive(p.m_fuel, "m_fuel");
  need_positive(p.m_air, "m_air");
  need_positive(p.r_stop, "r_stop");
  need_positive(p.fc, "fc");
}

// Driving-state term: engine_coef * V_engine * FC * M_fuel / (M_air * 1000)
inline double emission_move(double engine_coef, const EmissionParams& p) {
  if (!(p.m_air > 0.0)) throw ConfigError("emission_move: m_air must be positive");
  return engine_coef * p.v_engine * p.fc * p.m_fuel / (p.m_air * 1000.0);
}

// Stopped-state term: engine_coef * V_engine * r_stop * t_stop / (3600 * M_air)
inline double emission_stop(double engine_coef, const EmissionParams& p, double t_stop) {
  if (!(p.m_air > 0.0)) throw ConfigError("emission_stop: m_air must be positive");
  if (t_stop < 0.0) throw std::invalid_argument("emission_stop: negative stopped time");
  return engine_coef * p.v_engine * p.r_stop * t_stop / (3600.0 * p.m_air);
}

inline double emission_total(double engine_coef, const EmissionParams& p, double t_stop) {
  return emission_move(engine_coef, p) + emission_stop(engine_coef, p, t_stop);
}

inline double co_move(const EmissionParams& p) { return emission_move(p.co_engine, p); }
inline double co_stop(const EmissionParams& p, double t) { return emission_stop(p.co_engine, p, t); }
inline double total_co(const EmissionParams& p, double t) { return emission_total(p.co_engine, p, t); }

inline double co2_move(const EmissionParams& p) { return emission_move(p.co2_engine, p); }
inline double co2_stop(const EmissionParams& p, double t) { return emission_stop(p.co2_engine, p, t); }
inline double total_co2(const EmissionParams& p, double t) { return emission_total(p.co2_engine, p, t); }

inline double fuel_move(const EmissionParams& p) { return emission_move(p.fuel_engine, p); }
inline double fuel_stop(const EmissionParams& p, double t) { return emission_stop(p.fuel_engine, p, t); }
inline double total_fuel(const EmissionParams& p, double t) { return emission_total(p.fuel_engine, p, t); }

struct FleetEmissions {
  double fuel_mg_s = 0.0;
  double co_mg_s = 0.0;
  double co2_mg_s = 0.0;
};

// Per-vehicle totals with that vehicle's stopped seconds, summed over the
// fleet and normalized per simulated second. Formula outputs are grams, the
// report columns are mg/s.
inline FleetEmissions fleet_emissions(const std::vector<double>& stop_times,
                                      const EmissionParams& p, double horizon_seconds) {
  if (!(horizon_seconds > 0.0))
    throw std::invalid_argument("fleet_emissions: horizon must be positive");
  FleetEmissions out;
  double fuel = 0.0, co = 0.0, co2 = 0.0;
  for (double t : stop_times) {
    fuel += total_fuel(p, t);
    co += total_co(p, t);
    co2 += total_co2(p, t);
  }
  const double to_mg_per_s = 1000.0 / horizon_seconds;
  out.fuel_mg_s = fuel * to_mg_per_s;
  out.co_mg_s = co * to_mg_per_s;
  out.co2_mg_s = co2 * to_mg_per_s;
  return out;
}

// ---- symbolic unit audit -------------------------------------------------

// Exponent map over unit tokens. "kWh" is expanded to kW*h so energy and
// power-times-time cancel; "100km" stays one token (the 100 is part of the
// fuel-consumption convention, not a dimension).
struct Unit {
  std::map<std::string, int> exp;

  static Unit parse(const std::string& text) {
    Unit u;
    int sign = 1;
    std::string tok;
    auto flush = [&](int s) {
      if (tok.empty()) return;
      if (tok == "1") { tok.clear(); return; }
      if (tok == "kWh") {
        u.exp["kW"] += s;
        u.exp["h"] += s;
      } else {
        u.exp[tok] += s;
      }
      tok.clear();
    };
    for (char c : text) {
      if (c == '*') {
        flush(sign);
      } else if (c == '/') {
        flush(sign);
        sign = -1;
      } else if (c != ' ') {
        tok += c;
      }
    }
    flush(sign);
    for (auto it = u.exp.begin(); it != u.exp.end();)
      it = (it->second == 0) ? u.exp.erase(it) : std::next(it);
    return u;
  }

  Unit operator*(const Unit& o) const {
    Unit r = *this;
    for (const auto& [k, v] : o.exp) {
      r.exp[k] += v;
      if (r.exp[k] == 0) r.exp.erase(k);
    }
    return r;
  }

  Unit operator/(const Unit& o) const {
    Unit r = *this;
    for (const auto& [k, v] : o.exp) {
      r.exp[k] -= v;
      if (r.exp[k] == 0) r.exp.erase(k);
    }
    return r;
  }

  bool operator==(const Unit& o) const { return exp == o.exp; }

  std::string str() const {
    if (exp.empty()) return "1";
    std::string num, den;
    for (const auto& [k, v] : exp) {
      std::string part = k;
      const int mag = v < 0 ? -v : v;
      if (mag > 1) part += "^" + std::to_string(mag);
      if (v > 0)
        num += (num.empty() ? "" : "*") + part;
      else
        den += "/" + part;
    }
    if (num.empty()) num = "1";
    return num + den;
  }
};

// Units each parameter must carry in a config file, per the reference
// vehicle-parameter table.
inline const std::map<std::string, std::string>& expected_param_units() {
  static const std::map<std::string, std::string> table = {
      {"co_engine", "g/kWh"}, {"co2_engine", "g/kWh"}, {"fuel_engine", "g/kWh"},
      {"v_engine", "L"},      {"fc", "L/100km"},       {"m_fuel", "g/mole"},
      {"m_air", "g/mole"},    {"r_stop", "kW"},
  };
  return table;
}

// Composed unit of the driving term. The formula is used as written, so the
// residual is documented rather than forced to a mass: g*L^2/(kW*h*100km),
// with the 1000 treated as dimensionless.
inline Unit move_term_unit() {
  return Unit::parse("g/kWh") * Unit::parse("L") * Unit::parse("L/100km") *
         Unit::parse("g/mole") / Unit::parse("g/mole");
}

// Composed unit of the stopped term, with the 3600 carrying s/h: the kW*h
// cancels against kWh leaving L*mole.
inline Unit stop_term_unit() {
  return Unit::parse("g/kWh") * Unit::parse("L") * Unit::parse("kW") * Unit::parse("s") /
         (Unit::parse("s/h") * Unit::parse("g/mole"));
}

}  // namespace greenwave
