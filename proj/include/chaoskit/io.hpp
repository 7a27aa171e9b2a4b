#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "chaoskit/determinism.hpp"
#include "chaoskit/fnn.hpp"
#include "chaoskit/lyapunov.hpp"

namespace chaoskit {

// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string sanitize_name(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
               ? c
               : '_';
  }
  return out.empty() ? std::string("series") : out;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // fixed newlines across platforms
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

inline void write_fnn_csv(const std::string& path, const FnnCurve& curve) {
  auto out = open_for_write(path);
  out << "m,fraction,numerator,denominator\n";
  for (const auto& rec : curve.records) {
    out << rec.m << ',' << (rec.fraction ? format_double(*rec.fraction) : "nan") << ','
        << rec.numerator << ',' << rec.denominator << '\n';
  }
}

inline void write_stretch_csv(const std::string& path, const StretchingCurve& curve) {
  auto out = open_for_write(path);
  out << "delta_n,s\n";
  for (std::size_t dn = 0; dn < curve.s.size(); ++dn) {
    out << dn << ',' << format_double(curve.s[dn]) << '\n';
  }
}

inline void write_box_csv(const std::string& path, const std::vector<BoxRow>& rows) {
  auto out = open_for_write(path);
  out << "box,n,v_norm,d\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.box.size(); ++j) {
      if (j) out << '-';
      out << row.box[j];
    }
    out << ',' << row.n << ',' << format_double(row.v_norm) << ',' << format_double(row.d)
        << '\n';
  }
}

// Plot metadata sidecar: axis labels plus the log-y hint for FNN curves.
inline void write_plot_meta(const std::string& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label, bool log_y) {
  nlohmann::json meta;
  meta["title"] = title;
  meta["x_label"] = x_label;
  meta["y_label"] = y_label;
  meta["log_y"] = log_y;
  auto out = open_for_write(path);
  out << meta.dump(2) << '\n';
}

}  // namespace chaoskit
