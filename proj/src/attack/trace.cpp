#include "drt/attack/trace.hpp"

#include <istream>
#include <map>
#include <json.hpp>
#include <ostream>

namespace drt::attack {

void write_trace_jsonl(std::ostream& os, const std::vector<ImageTrace>& traces) {
  for (const auto& t : traces) {
    for (const auto& r : t.records) {
      nlohmann::json j{{"id", t.id}, {"iter", r.iteration}, {"objective", r.objective}, {"linf", r.linf}};
      os << j.dump() << '\n';
    }
  }
}

std::vector<ImageTrace> read_trace_jsonl(std::istream& is) {
  std::vector<ImageTrace> traces;
  std::map<std::string, std::size_t> index;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto id = j.at("id").get<std::string>();
    auto [it, fresh] = index.try_emplace(id, traces.size());
    if (fresh) traces.push_back(ImageTrace{id, {}, 0});
    auto& trace = traces[it->second];
    trace.records.push_back({j.at("iter").get<int>(), j.at("objective").get<double>(), j.at("linf").get<double>()});
  }
  for (auto& t : traces) {
    for (std::size_t i = 1; i < t.records.size(); ++i) {
      if (t.records[i].objective < t.records[t.best_iteration].objective) t.best_iteration = static_cast<int>(i);
    }
  }
  return traces;
}

}  // namespace drt::attack
