#pragma once

#include <string>
#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/lp.hpp"

namespace threshlasso {

/// Numeric table with a header row. Cells must parse completely as finite doubles.
struct CsvTable {
  std::vector<std::string> header;
  Matrix data;  // rows x header.size()

  Index column(const std::string& name) const;  // -1 when absent
  Vector col(const std::string& name) const;    // throws InputError naming the column
};

CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");
CsvTable read_csv(const std::string& path);

/// Expands a column selector: comma separated names, or `first:last` for the
/// inclusive run of header columns between two names.
std::vector<std::string> expand_columns(const CsvTable& table, const std::string& selector);

struct ColumnMapping {
  std::string y = "y";
  std::string q = "q";
  std::string x;  // empty: every column other than y and q
};

Sample table_sample(const CsvTable& table, const ColumnMapping& mapping, std::vector<std::string>* x_names = nullptr);
Sample read_sample(const std::string& path, const ColumnMapping& mapping, std::vector<std::string>* x_names = nullptr);

struct LpMapping {
  std::string y = "y";
  std::string shock = "shock";
  std::string q = "q";
  std::string slow;  // contemporaneous + lagged controls
  std::string fast;  // empty: every column not otherwise used, lagged only
};

LpData table_lp_data(const CsvTable& table, const LpMapping& mapping);

}  // namespace threshlasso
