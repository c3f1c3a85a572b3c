#include "rehab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rehab {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view text, const std::string& where) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw SchemaError(where + ": cannot parse number '" + std::string(text) + "'");
  return value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return in;
}

// Maps each expected column to its index in the header, naming any that is missing.
template <std::size_t N>
std::array<std::size_t, N> header_index(const std::string& header, const std::array<std::string, N>& expected,
                                        const std::string& path) {
  const auto names = split(header);
  std::array<std::size_t, N> idx{};
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t j = 0;
    while (j < names.size() && names[j] != expected[i]) ++j;
    if (j == names.size()) throw SchemaError(path + ": missing column '" + expected[i] + "'");
    idx[i] = j;
  }
  return idx;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_ticks_csv(const std::string& path, const Eigen::ArrayXXd& ticks) {
  auto out = open_out(path);
  const auto& cols = tick_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j];
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < ticks.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < ticks.cols(); ++j) {
      if (j) line += ',';
      line += format_double(ticks(i, j));
    }
    line += '\n';
    out << line;
  }
}

Eigen::ArrayXXd read_ticks_csv(const std::string& path) {
  auto in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) throw SchemaError(path + ": empty file");
  const auto idx = header_index(header, tick_columns(), path);
  std::vector<double> values;
  std::string line;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    for (std::size_t c = 0; c < idx.size(); ++c) {
      if (idx[c] >= fields.size()) throw SchemaError(path + ": short row " + std::to_string(rows + 2));
      values.push_back(parse_double(fields[idx[c]], path));
    }
    ++rows;
  }
  Eigen::ArrayXXd ticks(rows, static_cast<Eigen::Index>(kTickCols));
  for (long i = 0; i < rows; ++i)
    for (int j = 0; j < kTickCols; ++j) ticks(i, j) = values[static_cast<std::size_t>(i * kTickCols + j)];
  return ticks;
}

void write_cycles_csv(const std::string& path, const std::vector<CycleRow>& rows) {
  auto out = open_out(path);
  const auto& cols = cycle_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j];
  out << '\n';
  for (const auto& r : rows) {
    out << r.index << ',' << format_double(r.E_cycle) << ',' << format_double(r.E_diss) << ','
        << format_double(r.baseline) << ',' << format_double(r.r) << ',' << format_double(r.moment_var) << ','
        << format_double(r.traj_rms) << ',' << format_double(r.peak_force) << ',' << format_double(r.phase_lag)
        << ',' << format_double(r.k) << ',' << format_double(r.c) << ',' << r.committed << ',' << r.context_truth
        << ',' << r.context_label << '\n';
  }
}

std::vector<CycleRow> read_cycles_csv(const std::string& path) {
  auto in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) throw SchemaError(path + ": empty file");
  const auto idx = header_index(header, cycle_columns(), path);
  std::vector<CycleRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    auto field = [&](std::size_t c) {
      if (idx[c] >= f.size()) throw SchemaError(path + ": short row " + std::to_string(rows.size() + 2));
      return f[idx[c]];
    };
    CycleRow r;
    r.index = static_cast<long>(parse_double(field(0), path));
    r.E_cycle = parse_double(field(1), path);
    r.E_diss = parse_double(field(2), path);
    r.baseline = parse_double(field(3), path);
    r.r = parse_double(field(4), path);
    r.moment_var = parse_double(field(5), path);
    r.traj_rms = parse_double(field(6), path);
    r.peak_force = parse_double(field(7), path);
    r.phase_lag = parse_double(field(8), path);
    r.k = parse_double(field(9), path);
    r.c = parse_double(field(10), path);
    r.committed = static_cast<int>(parse_double(field(11), path));
    r.context_truth = std::string(field(12));
    r.context_label = std::string(field(13));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_decisions_csv(const std::string& path, const std::vector<DecisionRow>& rows) {
  auto out = open_out(path);
  out << "window_id,truth,label,dE_rel,phase_lag,phase_var,k_request,c_request\n";
  for (const auto& r : rows) {
    const auto& d = r.decision;
    out << r.window << ',' << to_string(d.truth) << ',' << to_string(d.label) << ','
        << format_double(d.features.dE_rel) << ',' << format_double(d.features.phase_lag) << ','
        << format_double(d.features.phase_var) << ',' << format_double(r.k_request) << ','
        << format_double(r.c_request) << '\n';
  }
}

void write_columns_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_double(columns[j][i]);
    out << '\n';
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": invalid JSON: " + e.what());
  }
}

}  // namespace rehab
