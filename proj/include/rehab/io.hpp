#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "rehab/episode.hpp"

namespace rehab {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

void write_ticks_csv(const std::string& path, const Eigen::ArrayXXd& ticks);
Eigen::ArrayXXd read_ticks_csv(const std::string& path);

void write_cycles_csv(const std::string& path, const std::vector<CycleRow>& rows);
std::vector<CycleRow> read_cycles_csv(const std::string& path);

void write_decisions_csv(const std::string& path, const std::vector<DecisionRow>& rows);

// Columnar file: header row then one row per entry of the equal-length columns.
void write_columns_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace rehab
