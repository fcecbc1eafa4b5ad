#ifndef TRISTEP_REPORT_HPP
#define TRISTEP_REPORT_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tristep/harness.hpp"

namespace tristep {

// Static dot-matrix rendering of a result matrix: one row per configuration,
// one column per pattern id; solid dot = every judged case effective, half
// dot = some, empty = none. Rendered after the CSVs, never instead of them.
inline std::string render_dot_matrix_svg(
    const std::vector<std::pair<std::string, const SuiteResult*>>& rows) {
  if (rows.empty()) return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>";
  const auto& patterns = rows.front().second->patterns;
  const int cell = 14, r = 5, label_w = 160, top = 40;
  int width = label_w + cell * static_cast<int>(patterns.size()) + 20;
  int height = top + cell * static_cast<int>(rows.size()) + 20;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"monospace\" font-size=\"9\">\n";
  for (size_t col = 0; col < patterns.size(); ++col) {
    if (patterns[col].id % 5 != 0 && patterns[col].id != 1) continue;
    int x = label_w + static_cast<int>(col) * cell + cell / 2;
    s << "<text x=\"" << x << "\" y=\"" << top - 8 << "\" text-anchor=\"middle\">"
      << patterns[col].id << "</text>\n";
  }
  for (size_t row = 0; row < rows.size(); ++row) {
    int cy = top + static_cast<int>(row) * cell + cell / 2;
    s << "<text x=\"4\" y=\"" << cy + 3 << "\">" << rows[row].first << "</text>\n";
    const auto& pats = rows[row].second->patterns;
    for (size_t col = 0; col < pats.size(); ++col) {
      int cx = label_w + static_cast<int>(col) * cell + cell / 2;
      const PatternOutcome& p = pats[col];
      bool full = p.effective && p.effective_cases == p.judged_cases;
      bool part = p.effective && !full;
      s << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r
        << "\" fill=\"none\" stroke=\"black\"/>\n";
      if (full)
        s << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r << "\" fill=\"black\"/>\n";
      else if (part)
        s << "<path d=\"M " << cx - r << " " << cy << " A " << r << " " << r << " 0 0 1 "
          << cx + r << " " << cy << " Z\" fill=\"black\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

inline void write_dot_matrix_svg(const std::vector<std::pair<std::string, const SuiteResult*>>& rows,
                                 const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write plot: " + path);
  f << render_dot_matrix_svg(rows);
}

}  // namespace tristep

#endif
