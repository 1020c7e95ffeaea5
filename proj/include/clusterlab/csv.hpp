#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace clusterlab {

/// Plain-text number with 12 significant digits; "inf"/"nan" for non-finite.
inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace clusterlab
