#include "threshlasso/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "threshlasso/errors.hpp"

namespace threshlasso {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<Index>(it - header.begin());
}

Vector CsvTable::col(const std::string& name) const {
  const Index c = column(name);
  if (c < 0) throw InputError("missing column '" + name + "'");
  return data.col(c);
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (!have_header) {
      for (auto& c : cells) t.header.push_back(unquote(c));
      for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i].empty()) throw InputError(source + ": empty column name at position " + std::to_string(i + 1));
        for (std::size_t k = 0; k < i; ++k) {
          if (t.header[k] == t.header[i]) throw InputError(source + ": duplicate column '" + t.header[i] + "'");
        }
      }
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InputError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                       " fields, header has " + std::to_string(t.header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != last) {
        throw InputError(source + ": line " + std::to_string(line_no) + ", column '" + t.header[c] +
                         "': not a number: '" + cell + "'");
      }
      if (!std::isfinite(v)) {
        throw InputError(source + ": line " + std::to_string(line_no) + ", column '" + t.header[c] +
                         "': non-finite value");
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError(source + ": no header and no data rows");
  if (rows.empty()) throw InputError(source + ": no data rows");
  t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.data(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_csv(buf.str(), path);
}

std::vector<std::string> expand_columns(const CsvTable& table, const std::string& selector) {
  std::vector<std::string> out;
  for (const std::string& raw : split(selector, ',')) {
    if (raw.empty()) continue;
    const auto colon = raw.find(':');
    if (colon == std::string::npos) {
      if (table.column(raw) < 0) throw InputError("missing column '" + raw + "'");
      out.push_back(raw);
      continue;
    }
    const std::string a = trim(raw.substr(0, colon));
    const std::string b = trim(raw.substr(colon + 1));
    const Index ia = table.column(a);
    const Index ib = table.column(b);
    if (ia < 0) throw InputError("missing column '" + a + "'");
    if (ib < 0) throw InputError("missing column '" + b + "'");
    if (ib < ia) throw InputError("column range '" + raw + "' runs backwards");
    for (Index k = ia; k <= ib; ++k) out.push_back(table.header[static_cast<std::size_t>(k)]);
  }
  if (out.empty()) throw InputError("column selector '" + selector + "' selects nothing");
  return out;
}

Sample table_sample(const CsvTable& table, const ColumnMapping& mapping, std::vector<std::string>* x_names) {
  const Vector y = table.col(mapping.y);
  const Vector q = table.col(mapping.q);
  std::vector<std::string> names;
  if (mapping.x.empty()) {
    for (const auto& h : table.header) {
      if (h != mapping.y && h != mapping.q) names.push_back(h);
    }
    if (names.empty()) throw InputError("no covariate columns besides '" + mapping.y + "' and '" + mapping.q + "'");
  } else {
    names = expand_columns(table, mapping.x);
  }
  Matrix x(table.data.rows(), static_cast<Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) x.col(static_cast<Index>(k)) = table.col(names[k]);
  if (x_names != nullptr) *x_names = names;
  return make_sample(y, std::move(x), q);
}

Sample read_sample(const std::string& path, const ColumnMapping& mapping, std::vector<std::string>* x_names) {
  return table_sample(read_csv(path), mapping, x_names);
}

LpData table_lp_data(const CsvTable& table, const LpMapping& mapping) {
  LpData d;
  d.y = table.col(mapping.y);
  d.shock = table.col(mapping.shock);
  d.q = table.col(mapping.q);
  std::vector<std::string> slow = mapping.slow.empty() ? std::vector<std::string>{} : expand_columns(table, mapping.slow);
  std::vector<std::string> fast;
  if (!mapping.fast.empty()) {
    fast = expand_columns(table, mapping.fast);
  } else {
    for (const auto& h : table.header) {
      if (h == mapping.y || h == mapping.shock || h == mapping.q) continue;
      if (std::find(slow.begin(), slow.end(), h) != slow.end()) continue;
      fast.push_back(h);
    }
  }
  const Index t = table.data.rows();
  d.slow.resize(t, static_cast<Index>(slow.size()));
  for (std::size_t k = 0; k < slow.size(); ++k) d.slow.col(static_cast<Index>(k)) = table.col(slow[k]);
  d.fast.resize(t, static_cast<Index>(fast.size()));
  for (std::size_t k = 0; k < fast.size(); ++k) d.fast.col(static_cast<Index>(k)) = table.col(fast[k]);
  return d;
}

}  // namespace threshlasso
