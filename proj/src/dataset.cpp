#include "rmstmatch/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

std::vector<std::size_t> Dataset::treated_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n_rows(); ++i)
    if (treatment[i] == 1) idx.push_back(i);
  return idx;
}

std::vector<std::size_t> Dataset::control_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n_rows(); ++i)
    if (treatment[i] == 0) idx.push_back(i);
  return idx;
}

void Dataset::validate() const {
  const std::size_t n = n_rows();
  if (n == 0) throw validation_error("dataset is empty");
  if (ids.size() != n || event.size() != n || treatment.size() != n ||
      covariates.size() != n * n_covariates())
    throw validation_error("dataset arrays have inconsistent lengths");
  bool any_treated = false, any_control = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(time[i] > 0.0) || !std::isfinite(time[i])) throw negative_time_error(i, time[i]);
    if (event[i] > 1) throw non_binary_flag_error(i, "event", event[i]);
    if (treatment[i] > 1) throw non_binary_flag_error(i, "treat", treatment[i]);
    (treatment[i] == 1 ? any_treated : any_control) = true;
  }
  if (!any_treated || !any_control)
    throw validation_error("dataset needs at least one treated and one control subject");
  for (std::size_t i = 0; i < covariates.size(); ++i)
    if (!std::isfinite(covariates[i]))
      throw validation_error("covariate matrix contains a non-finite value");
}

CsvSchema CsvSchema::parse(const std::string& spec) {
  CsvSchema schema;
  if (spec.empty()) return schema;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw validation_error("bad schema entry '" + item + "' (expected key=COLUMN)");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "id") schema.id = value;
    else if (key == "time") schema.time = value;
    else if (key == "event") schema.event = value;
    else if (key == "treat") schema.treat = value;
    else throw validation_error("unknown schema key '" + key + "'");
  }
  return schema;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_number(const std::string& raw, std::size_t row, const std::string& column) {
  const char* begin = raw.data();
  const char* end = begin + raw.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end)
    throw non_numeric_cell_error(row, column, raw);
  return value;
}

std::uint8_t parse_flag(const std::string& raw, std::size_t row, const std::string& column) {
  const double value = parse_number(raw, row, column);
  if (value == 0.0) return 0;
  if (value == 1.0) return 1;
  throw non_binary_flag_error(row, column, value);
}

} // namespace

Dataset read_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open '" + path.string() + "'");

  std::string line;
  do {
    if (!std::getline(in, line)) throw validation_error("'" + path.string() + "' has no header row");
  } while (!line.empty() && line[0] == '#');

  const auto header = split_line(line);
  auto find_col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw missing_column_error(name);
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t id_col = find_col(schema.id);
  const std::size_t time_col = find_col(schema.time);
  const std::size_t event_col = find_col(schema.event);
  const std::size_t treat_col = find_col(schema.treat);

  std::size_t t0_col = header.size(), t1_col = header.size();
  Dataset d;
  std::vector<std::size_t> cov_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == id_col || c == time_col || c == event_col || c == treat_col) continue;
    if (header[c] == "t0") { t0_col = c; continue; }
    if (header[c] == "t1") { t1_col = c; continue; }
    cov_cols.push_back(c);
    d.covariate_names.push_back(header[c]);
  }
  const bool has_potential = t0_col < header.size() && t1_col < header.size();
  if (has_potential) {
    d.potential_t0.emplace();
    d.potential_t1.emplace();
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw validation_error("data row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(header.size()));
    d.ids.push_back(fields[id_col]);
    const double t = parse_number(fields[time_col], row, schema.time);
    if (!(t > 0.0)) throw negative_time_error(row, t);
    d.time.push_back(t);
    d.event.push_back(parse_flag(fields[event_col], row, schema.event));
    d.treatment.push_back(parse_flag(fields[treat_col], row, schema.treat));
    for (std::size_t k = 0; k < cov_cols.size(); ++k)
      d.covariates.push_back(parse_number(fields[cov_cols[k]], row, d.covariate_names[k]));
    if (has_potential) {
      d.potential_t0->push_back(parse_number(fields[t0_col], row, "t0"));
      d.potential_t1->push_back(parse_number(fields[t1_col], row, "t1"));
    }
    ++row;
  }

  d.validate();
  return d;
}

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  out += buf;
}

} // namespace

void write_csv(const Dataset& d, const std::filesystem::path& path,
               const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write '" + path.string() + "'");
  if (!header_comment.empty()) out << "# " << header_comment << '\n';

  out << "id,time,event,treat";
  for (const auto& name : d.covariate_names) out << ',' << name;
  const bool has_potential = d.potential_t0 && d.potential_t1;
  if (has_potential) out << ",t0,t1";
  out << '\n';

  std::string line;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    line.clear();
    line += d.ids[i];
    line += ',';
    append_number(line, d.time[i]);
    line += ',';
    line += d.event[i] ? '1' : '0';
    line += ',';
    line += d.treatment[i] ? '1' : '0';
    for (std::size_t c = 0; c < d.n_covariates(); ++c) {
      line += ',';
      append_number(line, d.cov(i, c));
    }
    if (has_potential) {
      line += ',';
      append_number(line, (*d.potential_t0)[i]);
      line += ',';
      append_number(line, (*d.potential_t1)[i]);
    }
    out << line << '\n';
  }
}

} // namespace rmstmatch
