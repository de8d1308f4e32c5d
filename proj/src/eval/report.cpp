#include "drt/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <json.hpp>
#include <ostream>
#include <sstream>

namespace drt::eval {

using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void write_notes(std::ostream& os, const EvalReport& report) {
  for (const auto& n : report.notes) os << "# " << n << '\n';
}

json row_json(const EvalRow& r) {
  json j{{"source_model", r.source_model},
         {"attack", r.attack},
         {"target", r.target},
         {"task", r.task},
         {"metric", r.metric_name},
         {"clean_value", r.clean_value},
         {"adv_value", r.adv_value},
         {"evaluated", r.evaluated},
         {"excluded", r.excluded}};
  if (r.steps) j["steps"] = *r.steps;
  if (r.layer) j["layer"] = *r.layer;
  if (r.std_delta) j["std_delta"] = *r.std_delta;
  return j;
}

}  // namespace

void write_report_csv(std::ostream& os, const EvalReport& report) {
  write_notes(os, report);
  os << "source_model,attack,target,task,metric,clean_value,adv_value,evaluated,excluded,steps,layer,std_delta\n";
  for (const auto& r : report.rows) {
    os << r.source_model << ',' << r.attack << ',' << r.target << ',' << r.task << ',' << r.metric_name << ','
       << num(r.clean_value) << ',' << num(r.adv_value) << ',' << r.evaluated << ',' << r.excluded << ','
       << (r.steps ? std::to_string(*r.steps) : "") << ',' << r.layer.value_or("") << ','
       << (r.std_delta ? num(*r.std_delta) : "") << '\n';
  }
}

void write_report_json(std::ostream& os, const EvalReport& report) {
  json j{{"notes", report.notes}, {"rows", json::array()}};
  for (const auto& r : report.rows) j["rows"].push_back(row_json(r));
  os << j.dump(2) << '\n';
}

EvalReport read_report_json(std::istream& is) {
  const json j = json::parse(is);
  EvalReport report;
  report.notes = j.value("notes", std::vector<std::string>{});
  for (const auto& r : j.at("rows")) {
    EvalRow row;
    row.source_model = r.at("source_model").get<std::string>();
    row.attack = r.at("attack").get<std::string>();
    row.target = r.at("target").get<std::string>();
    row.task = r.at("task").get<std::string>();
    row.metric_name = r.at("metric").get<std::string>();
    row.clean_value = r.at("clean_value").is_null() ? std::nan("") : r.at("clean_value").get<double>();
    row.adv_value = r.at("adv_value").is_null() ? std::nan("") : r.at("adv_value").get<double>();
    row.evaluated = r.at("evaluated").get<std::size_t>();
    row.excluded = r.at("excluded").get<std::size_t>();
    if (r.contains("steps")) row.steps = r.at("steps").get<int>();
    if (r.contains("layer")) row.layer = r.at("layer").get<std::string>();
    if (r.contains("std_delta")) row.std_delta = r.at("std_delta").get<double>();
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_table_csv(std::ostream& os, const EvalReport& report) {
  write_notes(os, report);
  std::vector<std::string> columns;
  std::vector<std::pair<std::string, std::string>> row_keys;
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> cells;
  for (const auto& r : report.rows) {
    const std::string column = r.target + " " + r.metric_name;
    if (std::find(columns.begin(), columns.end(), column) == columns.end()) columns.push_back(column);
    const auto key = std::pair{r.source_model, r.attack};
    if (!cells.count(key)) row_keys.push_back(key);
    cells[key][column] = r.adv_value;
  }
  os << "source_model,attack";
  for (const auto& c : columns) os << ',' << c;
  os << '\n';
  for (const auto& key : row_keys) {
    os << key.first << ',' << key.second;
    for (const auto& c : columns) {
      const auto it = cells[key].find(c);
      os << ',' << (it == cells[key].end() ? std::string() : num(it->second));
    }
    os << '\n';
  }
}

void write_step_curve_csv(std::ostream& os, const EvalReport& report) {
  write_notes(os, report);
  os << "attack,target,steps,metric,value\n";
  for (const auto& r : report.rows) {
    if (!r.steps) continue;
    os << r.attack << ',' << r.target << ',' << *r.steps << ',' << r.metric_name << ',' << num(r.adv_value) << '\n';
  }
}

void write_layer_curve_csv(std::ostream& os, const EvalReport& report) {
  write_notes(os, report);
  os << "layer,std_delta,target,metric,value\n";
  for (const auto& r : report.rows) {
    if (!r.layer) continue;
    os << *r.layer << ',' << (r.std_delta ? num(*r.std_delta) : "") << ',' << r.target << ',' << r.metric_name << ','
       << num(r.adv_value) << '\n';
  }
}

void write_profile_csv(std::ostream& os, const models::LayerProfile& profile) {
  os << "layer,std_before,std_after,delta\n";
  for (const auto& r : profile.rows) {
    os << r.layer << ',' << num(r.std_before) << ',' << num(r.std_after) << ',' << num(r.delta) << '\n';
  }
}

}  // namespace drt::eval
