#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "chaoskit/series.hpp"

namespace chaoskit {

// Deterministic random source: mt19937_64 is bit-exact across platforms, and
// the uniform/normal transforms below are written out explicitly instead of
// relying on implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller, one value per call
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform direction on the unit sphere in `dim` dimensions.
  std::vector<double> unit_vector(int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double ss = 0.0;
    do {
      ss = 0.0;
      for (auto& x : v) {
        x = normal();
        ss += x * x;
      }
    } while (ss == 0.0);
    const double inv = 1.0 / std::sqrt(ss);
    for (auto& x : v) x *= inv;
    return v;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

struct LogisticParams {
  double r = 4.0;
  double x0 = 0.2;
};

struct HenonParams {
  double a = 1.4;
  double b = 0.3;
  double x0 = 0.0;
  double y0 = 0.0;
};

struct NoiseParams {
  double sd = 1.0;
};

struct SineParams {
  double amplitude = 1.0;
  double period = 100.0;
  double phase = 0.0;
};

struct RandomWalkParams {
  double step_sd = 1.0;
};

struct MapSpec {
  std::variant<LogisticParams, HenonParams, NoiseParams, SineParams, RandomWalkParams> params;
  std::uint64_t seed = 1;
  std::size_t length = 1000;
  std::size_t transient = 0;
};

inline const char* family_name(const MapSpec& spec) {
  struct Visitor {
    const char* operator()(const LogisticParams&) const { return "logistic"; }
    const char* operator()(const HenonParams&) const { return "henon"; }
    const char* operator()(const NoiseParams&) const { return "noise"; }
    const char* operator()(const SineParams&) const { return "sine"; }
    const char* operator()(const RandomWalkParams&) const { return "randomwalk"; }
  };
  return std::visit(Visitor{}, spec.params);
}

namespace detail {

constexpr double kDivergenceBound = 1e10;

inline void check_bounded(double x) {
  if (!std::isfinite(x) || std::abs(x) > kDivergenceBound)
    throw std::runtime_error("generate: orbit diverged");
}

}  // namespace detail

// Generates the scalar series for a spec: `transient` initial steps are
// discarded, then `length` values are emitted starting with the current
// state.
inline std::vector<double> generate(const MapSpec& spec) {
  if (spec.length == 0) throw std::invalid_argument("generate: length must be > 0");
  std::vector<double> out;
  out.reserve(spec.length);

  if (const auto* p = std::get_if<LogisticParams>(&spec.params)) {
    if (!(p->r > 0.0 && p->r <= 4.0))
      throw std::invalid_argument("generate: logistic r must be in (0, 4]");
    if (!(p->x0 > 0.0 && p->x0 < 1.0))
      throw std::invalid_argument("generate: logistic x0 must be in (0, 1)");
    double x = p->x0;
    for (std::size_t i = 0; i < spec.transient; ++i) x = p->r * x * (1.0 - x);
    for (std::size_t i = 0; i < spec.length; ++i) {
      detail::check_bounded(x);
      out.push_back(x);
      x = p->r * x * (1.0 - x);
    }
  } else if (const auto* p = std::get_if<HenonParams>(&spec.params)) {
    double x = p->x0, y = p->y0;
    auto step = [&] {
      const double nx = 1.0 - p->a * x * x + y;
      y = p->b * x;
      x = nx;
    };
    for (std::size_t i = 0; i < spec.transient; ++i) {
      step();
      detail::check_bounded(x);
    }
    for (std::size_t i = 0; i < spec.length; ++i) {
      detail::check_bounded(x);
      out.push_back(x);
      step();
    }
  } else if (const auto* p = std::get_if<NoiseParams>(&spec.params)) {
    if (!(p->sd > 0.0)) throw std::invalid_argument("generate: noise sd must be > 0");
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.transient; ++i) rng.normal();
    for (std::size_t i = 0; i < spec.length; ++i) out.push_back(p->sd * rng.normal());
  } else if (const auto* p = std::get_if<SineParams>(&spec.params)) {
    if (!(p->period > 0.0)) throw std::invalid_argument("generate: sine period must be > 0");
    for (std::size_t i = 0; i < spec.length; ++i) {
      const double t = static_cast<double>(spec.transient + i);
      out.push_back(p->amplitude * std::sin(2.0 * M_PI * t / p->period + p->phase));
    }
  } else if (const auto* p = std::get_if<RandomWalkParams>(&spec.params)) {
    if (!(p->step_sd > 0.0)) throw std::invalid_argument("generate: step sd must be > 0");
    Rng rng(spec.seed);
    double x = 0.0;
    for (std::size_t i = 0; i < spec.transient; ++i) x += p->step_sd * rng.normal();
    for (std::size_t i = 0; i < spec.length; ++i) {
      detail::check_bounded(x);
      out.push_back(x);
      x += p->step_sd * rng.normal();
    }
  }
  return out;
}

inline ReturnSeries generate_series(const MapSpec& spec, std::string label = {}) {
  return make_return_series(generate(spec), label.empty() ? family_name(spec) : std::move(label));
}

struct JacobianMle {
  double lambda = 0.0;
  std::size_t skipped_terms = 0;  // exact zero-derivative points along the orbit
};

// Independent maximal-exponent reference for maps with a known derivative:
// the logistic exponent is the orbit average of ln|r - 2 r x|, the Henon one
// comes from iterating the 2x2 tangent map with per-step renormalization.
inline JacobianMle jacobian_mle(const MapSpec& spec) {
  JacobianMle out;
  if (const auto* p = std::get_if<LogisticParams>(&spec.params)) {
    if (!(p->r > 0.0 && p->r <= 4.0))
      throw std::invalid_argument("jacobian_mle: logistic r must be in (0, 4]");
    double x = p->x0;
    for (std::size_t i = 0; i < spec.transient; ++i) x = p->r * x * (1.0 - x);
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < spec.length; ++i) {
      const double deriv = std::abs(p->r - 2.0 * p->r * x);
      if (deriv == 0.0) {
        ++out.skipped_terms;
      } else {
        sum += std::log(deriv);
        ++used;
      }
      x = p->r * x * (1.0 - x);
    }
    if (used == 0) throw std::runtime_error("jacobian_mle: every term hit a zero derivative");
    out.lambda = sum / static_cast<double>(used);
    return out;
  }
  if (const auto* p = std::get_if<HenonParams>(&spec.params)) {
    double x = p->x0, y = p->y0;
    auto step = [&] {
      const double nx = 1.0 - p->a * x * x + y;
      y = p->b * x;
      x = nx;
    };
    for (std::size_t i = 0; i < spec.transient; ++i) {
      step();
      detail::check_bounded(x);
    }
    double vx = 1.0, vy = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < spec.length; ++i) {
      detail::check_bounded(x);
      // Tangent map of (x, y) -> (1 - a x^2 + y, b x).
      const double wx = -2.0 * p->a * x * vx + vy;
      const double wy = p->b * vx;
      const double norm = std::sqrt(wx * wx + wy * wy);
      if (norm == 0.0) throw std::runtime_error("jacobian_mle: tangent vector collapsed");
      sum += std::log(norm);
      vx = wx / norm;
      vy = wy / norm;
      step();
    }
    out.lambda = sum / static_cast<double>(spec.length);
    return out;
  }
  throw std::invalid_argument("jacobian_mle: only map families with a known derivative");
}

}  // namespace chaoskit
