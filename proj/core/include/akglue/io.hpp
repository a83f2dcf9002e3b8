#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace akg {

// printf %.17g: enough digits to round-trip a double, stable across reruns.
std::string fmt_g17(double v);

// Typed cell so the CSV and JSON emitters agree on formatting.
using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add_row(std::vector<Cell> cells);  // throws DomainError on width mismatch
};

std::string table_csv(const Table& t);
std::string table_json(const Table& t);  // array of row objects, column order kept

// One line of summary.json; name identifies the check, criterion the
// acceptance clause it belongs to.
struct SummaryRow {
  std::string name;
  std::string criterion;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::string summary_json(const std::vector<SummaryRow>& rows);
bool all_pass(const std::vector<SummaryRow>& rows);

// Overwrites atomically enough for our purposes (single writer); LF endings,
// no timestamps anywhere so identical runs produce identical bytes.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace akg
