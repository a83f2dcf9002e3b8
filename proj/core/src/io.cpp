#include "akglue/io.hpp"

#include "akglue/base.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace akg {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& c) {
  if (std::holds_alternative<double>(c)) return fmt_g17(std::get<double>(c));
  if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c) ? "true" : "false";
  return csv_field(std::get<std::string>(c));
}

void cell_json(ordered_json& obj, const std::string& key, const Cell& c) {
  if (std::holds_alternative<double>(c))
    obj[key] = std::get<double>(c);
  else if (std::holds_alternative<long long>(c))
    obj[key] = std::get<long long>(c);
  else if (std::holds_alternative<bool>(c))
    obj[key] = std::get<bool>(c);
  else
    obj[key] = std::get<std::string>(c);
}

}  // namespace

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_row(std::vector<Cell> cells) {
  if (cells.size() != columns.size()) throw DomainError("table row width mismatch");
  rows.push_back(std::move(cells));
}

std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string table_json(const Table& t) {
  ordered_json arr = ordered_json::array();
  for (const auto& row : t.rows) {
    ordered_json obj = ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) cell_json(obj, t.columns[i], row[i]);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string summary_json(const std::vector<SummaryRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json obj = ordered_json::object();
    obj["name"] = r.name;
    obj["criterion"] = r.criterion;
    obj["measured"] = r.measured;
    obj["expected"] = r.expected;
    obj["tolerance"] = r.tolerance;
    obj["pass"] = r.pass;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

bool all_pass(const std::vector<SummaryRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("short write: " + path.string());
}

}  // namespace akg
