#ifndef TRISTEP_CATALOG_IO_HPP
#define TRISTEP_CATALOG_IO_HPP

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tristep/catalog.hpp"
#include "tristep/errors.hpp"

namespace tristep {

namespace detail {

inline int line_of_byte(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Line of the n-th (0-based) pattern object; the writer emits one per line.
inline int line_of_pattern(const std::string& text, int index) {
  size_t pos = 0;
  for (int seen = 0;; ++seen) {
    pos = text.find("{\"id\":", pos);
    if (pos == std::string::npos) return 0;
    if (seen == index) return line_of_byte(text, pos);
    ++pos;
  }
}

}  // namespace detail

inline std::string catalog_to_json(const Catalog& cat) {
  std::ostringstream out;
  out << "{\n\"version\": 1,\n\"meta\": {";
  out << "\"total_triples\": " << cat.report.total_triples;
  out << ", \"structural\": " << cat.report.structural;
  out << ", \"raw_survivors\": " << cat.report.raw_survivors;
  out << ", \"robust_survivors\": " << cat.report.robust_survivors;
  out << ", \"curated\": " << cat.report.curated;
  out << ", \"single_core_cases\": " << cat.report.curated_case_total;
  out << ", \"notes\": [";
  for (size_t i = 0; i < cat.report.notes.size(); ++i) {
    if (i) out << ", ";
    out << nlohmann::json(cat.report.notes[i]).dump();
  }
  out << "]},\n\"patterns\": [\n";
  for (size_t i = 0; i < cat.patterns.size(); ++i) {
    const VulnPattern& p = cat.patterns[i];
    out << "{\"id\":" << p.id << ",\"steps\":[";
    for (int s = 0; s < 3; ++s) {
      if (s) out << ",";
      out << "{\"actor\":\"" << to_string(p.steps[s].actor) << "\",\"target\":\""
          << to_string(p.steps[s].target) << "\"}";
    }
    out << "],\"type\":\"" << to_string(p.type) << "\",\"interference\":\""
        << to_string(p.interference) << "\",\"name\":" << nlohmann::json(p.name).dump() << "}";
    if (i + 1 < cat.patterns.size()) out << ",";
    out << "\n";
  }
  out << "]}\n";
  return out.str();
}

inline void write_catalog(const Catalog& cat, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write catalog file: " + path);
  f << catalog_to_json(cat);
}

inline Catalog parse_catalog(const std::string& text, const std::string& origin = "<catalog>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(origin + ":" + std::to_string(detail::line_of_byte(text, e.byte)) +
                      ": " + e.what());
  }
  auto fail = [&](int index, const std::string& why) -> SchemaError {
    return SchemaError(origin + ":" + std::to_string(detail::line_of_pattern(text, index)) +
                       ": " + why);
  };
  if (!j.is_object() || !j.contains("patterns") || !j["patterns"].is_array())
    throw SchemaError(origin + ":1: catalog must be an object with a patterns array");

  Catalog cat;
  if (j.contains("meta") && j["meta"].is_object()) {
    const auto& m = j["meta"];
    cat.report.raw_survivors = m.value("raw_survivors", 0);
    cat.report.robust_survivors = m.value("robust_survivors", 0);
    cat.report.curated_case_total = m.value("single_core_cases", 0);
  }
  std::set<int> ids;
  int index = 0;
  for (const auto& pj : j["patterns"]) {
    if (!pj.is_object() || !pj.contains("id") || !pj["id"].is_number_integer())
      throw fail(index, "pattern entry needs an integer id");
    VulnPattern p;
    p.id = pj["id"].get<int>();
    if (p.id < 1) throw fail(index, "pattern id must be >= 1");
    if (!ids.insert(p.id).second) throw fail(index, "duplicate pattern id " + std::to_string(p.id));
    if (!pj.contains("steps") || !pj["steps"].is_array() || pj["steps"].size() != 3)
      throw fail(index, "pattern needs exactly 3 steps");
    for (int s = 0; s < 3; ++s) {
      const auto& sj = pj["steps"][s];
      if (!sj.is_object() || !sj.contains("actor") || !sj.contains("target"))
        throw fail(index, "step needs actor and target");
      std::string actor = sj["actor"].get<std::string>();
      if (actor != "V" && actor != "A") throw fail(index, "actor must be V or A");
      p.steps[s].actor = actor == "V" ? Actor::Victim : Actor::Attacker;
      try {
        p.steps[s].target = target_from_string(sj["target"].get<std::string>());
      } catch (const SchemaError& e) {
        throw fail(index, e.what());
      }
      if (p.steps[s].actor == Actor::Attacker && p.steps[s].is_secret())
        throw fail(index, "u / inv_u belong to the Victim only");
    }
    if (!pj.contains("type")) throw fail(index, "pattern needs a type");
    try {
      p.type = signal_from_string(pj["type"].get<std::string>());
    } catch (const SchemaError& e) {
      throw fail(index, e.what());
    }
    std::string ie = pj.value("interference", "E");
    if (ie != "I" && ie != "E") throw fail(index, "interference must be I or E");
    p.interference = ie == "I" ? Interference::Internal : Interference::External;
    p.name = pj.value("name", "");
    cat.patterns.push_back(p);
    ++index;
  }
  std::sort(cat.patterns.begin(), cat.patterns.end(),
            [](const VulnPattern& a, const VulnPattern& b) { return a.id < b.id; });
  cat.report.curated = static_cast<int>(cat.patterns.size());
  return cat;
}

inline Catalog read_catalog(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read catalog file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_catalog(ss.str(), path);
}

}  // namespace tristep

#endif
