#pragma once

#include <cstdio>
#include <string>

namespace qgraph {

/// 17 significant digits: enough to round-trip a double bit-exactly, so
/// output files diff cleanly across implementations.
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string format_int(long long x) { return std::to_string(x); }

}  // namespace qgraph
