#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "volgrow/curve.hpp"
#include "volgrow/series.hpp"

namespace volgrow {

/// 17 significant digits: doubles round-trip exactly through text.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline const char* method_name(ExtrapolationMethod m) {
    switch (m) {
        case ExtrapolationMethod::linear_inv_n: return "linear_inv_n";
        case ExtrapolationMethod::fekete_min: return "fekete_min";
        case ExtrapolationMethod::log_slope: return "log_slope";
    }
    return "unknown";
}

inline void write_series_csv(std::ostream& os, const GrowthSeries& s) {
    os << "n,value\n";
    for (const auto& e : s.entries) os << e.n << "," << fmt_g17(e.value) << "\n";
}

inline void write_polyline_csv(std::ostream& os, const Polyline& p) {
    os << "t,u,v\n";
    for (const auto& v : p.vertices)
        os << fmt_g17(v.t) << "," << fmt_g17(v.p.u) << "," << fmt_g17(v.p.v) << "\n";
}

}  // namespace volgrow
