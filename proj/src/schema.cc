#include "dersens/schema.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "dersens/format.h"

namespace dersens {

int TableSchema::ColumnIndex(const std::string& column) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return static_cast<int>(i);
  }
  return -1;
}

bool TableSchema::IsSensitive(const std::string& column) const {
  return norm && Variables(norm).count(column) > 0;
}

const TableSchema* Schema::Find(const std::string& table) const {
  for (const auto& t : tables) {
    if (t.name == table) return &t;
  }
  return nullptr;
}

TableSchema* Schema::Find(const std::string& table) {
  for (auto& t : tables) {
    if (t.name == table) return &t;
  }
  return nullptr;
}

namespace {

std::string Trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

std::string StripComment(std::string_view line) {
  return Trim(line.substr(0, line.find('#') == std::string_view::npos
                                 ? line.size()
                                 : line.find('#')));
}

std::vector<std::string> Words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double ParseCombiner(const std::vector<std::string>& w, int line) {
  if (w.size() == 2 && w[1] == "linf") return kInf;
  if (w.size() == 3 && w[1] == "lp") {
    char* end = nullptr;
    double p = std::strtod(w[2].c_str(), &end);
    if (*end != '\0' || !(p >= 1)) {
      throw ParseError("exponent must be a number >= 1, got '" + w[2] + "'",
                       line, 1);
    }
    return p;
  }
  throw ParseError("expected '" + w[0] + " lp <p>' or '" + w[0] + " linf'",
                   line, 1);
}

ColumnType ParseType(const std::string& t, int line) {
  if (t == "int") return ColumnType::kInt;
  if (t == "real") return ColumnType::kReal;
  if (t == "date") return ColumnType::kDate;
  if (t == "text") return ColumnType::kText;
  throw ParseError("unknown column type '" + t + "'", line, 1);
}

// Parses a norm expression that starts at `column` of `line`, shifting
// error positions to the enclosing file.
NormPtr ParseNormAt(std::string_view text, int line, int column) {
  try {
    return ParseNorm(text);
  } catch (const ParseError& e) {
    std::string what = e.what();
    what = what.substr(0, what.rfind(" at line "));
    throw ParseError(what, line + e.line() - 1,
                     e.line() == 1 ? column + e.column() - 1 : e.column());
  }
}

}  // namespace

Schema ParseSchema(std::string_view text) {
  Schema s;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  TableSchema* cur = nullptr;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = StripComment(raw);
    if (l.empty()) continue;
    auto w = Words(l);
    const std::string& kw = w[0];
    if (kw == "database") {
      s.database_p = ParseCombiner(w, line);
      continue;
    }
    if (kw == "table") {
      if (w.size() != 2) throw ParseError("expected 'table <name>'", line, 1);
      if (s.Find(w[1])) throw ParseError("duplicate table '" + w[1] + "'", line, 1);
      s.tables.push_back(TableSchema{w[1], {}, nullptr, 1.0});
      cur = &s.tables.back();
      continue;
    }
    if (!cur) throw ParseError("'" + kw + "' before any 'table' line", line, 1);
    if (kw == "col") {
      if (w.size() != 3) throw ParseError("expected 'col <name> <type>'", line, 1);
      if (cur->ColumnIndex(w[1]) >= 0) {
        throw ParseError("duplicate column '" + w[1] + "'", line, 1);
      }
      cur->columns.push_back(ColumnDef{w[1], ParseType(w[2], line)});
    } else if (kw == "rows") {
      cur->rows_p = ParseCombiner(w, line);
    } else if (kw == "norm") {
      size_t at = raw.find("norm") + 4;
      cur->norm = ParseNormAt(std::string_view(raw).substr(at, raw.find('#') - at),
                              line, static_cast<int>(at) + 1);
    } else {
      throw ParseError("unknown directive '" + kw + "'", line, 1);
    }
  }
  ValidateSchema(s);
  return s;
}

void ApplyNormSpec(Schema& schema, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = StripComment(raw);
    if (l.empty()) continue;
    size_t start = raw.find_first_not_of(" \t");
    size_t sp = raw.find_first_of(" \t", start);
    if (sp == std::string::npos) {
      throw ParseError("expected '<table> <norm>'", line, 1);
    }
    std::string table = raw.substr(start, sp - start);
    TableSchema* t = schema.Find(table);
    if (!t) {
      throw ParseError("norm for unknown table '" + table + "'", line,
                       static_cast<int>(start) + 1);
    }
    size_t end = raw.find('#');
    t->norm = ParseNormAt(std::string_view(raw).substr(sp, end == std::string::npos
                                                               ? std::string::npos
                                                               : end - sp),
                          line, static_cast<int>(sp) + 1);
  }
  ValidateSchema(schema);
}

void ValidateSchema(const Schema& schema) {
  for (const auto& t : schema.tables) {
    if (!t.norm) continue;
    for (const auto& v : Variables(t.norm)) {
      int i = t.ColumnIndex(v);
      if (i < 0) {
        throw InputError("norm of table '" + t.name +
                         "' references unknown column '" + v + "'");
      }
      if (t.columns[i].type == ColumnType::kText) {
        throw InputError("norm of table '" + t.name +
                         "' references text column '" + v + "'");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// CSV.

std::vector<std::vector<std::string>> ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  size_t i = 0;
  int line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled by the '\n'
    } else if (c == '\n') {
      end_row();
      ++line;
    } else {
      field += c;
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", line, 1);
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

// ---------------------------------------------------------------------------
// Dates.

double DateToMonths(std::string_view iso) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  std::string s(iso);
  if (std::sscanf(s.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3 || m < 1 ||
      m > 12 || d < 1 || d > 31) {
    throw InputError("malformed date '" + s + "', expected YYYY-MM-DD");
  }
  return (y - 1980) * 12.0 + (m - 1) + (d - 1) / 30.4375;
}

std::string MonthsToDate(double months) {
  double whole = std::floor(months + 1e-9);
  long m = static_cast<long>(whole);
  long y = 1980 + (m >= 0 ? m / 12 : -((-m + 11) / 12));
  long mon = m - (y - 1980) * 12 + 1;
  long day = std::lround((months - whole) * 30.4375) + 1;
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04ld-%02ld-%02ld", y, mon, day);
  return buf;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Loading.

namespace {

double ParseCell(const std::string& cell, ColumnType type,
                 const std::string& where) {
  std::string v = Trim(cell);
  char* end = nullptr;
  if (type == ColumnType::kDate) {
    if (v.find('-', 1) != std::string::npos) return DateToMonths(v);
  }
  if (type == ColumnType::kInt) {
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0') {
      throw InputError("type mismatch at " + where + ": '" + cell +
                       "' is not an integer");
    }
    return static_cast<double>(x);
  }
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') {
    throw InputError("type mismatch at " + where + ": '" + cell +
                     "' is not a number");
  }
  return x;
}

bool ParseFlag(const std::string& cell, const std::string& where) {
  std::string v = Trim(cell);
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "1" || v == "true" || v == "t") return true;
  if (v == "0" || v == "false" || v == "f") return false;
  throw InputError("type mismatch at " + where + ": '" + cell +
                   "' is not a boolean");
}

Table LoadTable(const std::filesystem::path& dir, const TableSchema& ts) {
  auto path = dir / (ts.name + ".csv");
  auto records = ParseCsv(ReadFile(path));
  if (records.empty()) throw InputError("'" + path.string() + "' has no header");
  const auto& header = records[0];
  std::vector<int> source(ts.columns.size(), -1);
  for (size_t h = 1; h < header.size(); ++h) {
    int c = ts.ColumnIndex(Trim(header[h]));
    if (c < 0) {
      throw InputError("'" + path.string() + "' has column '" + header[h] +
                       "' not declared for table '" + ts.name + "'");
    }
    source[c] = static_cast<int>(h);
  }
  for (size_t c = 0; c < ts.columns.size(); ++c) {
    if (source[c] < 0) {
      throw InputError("'" + path.string() + "' lacks column '" +
                       ts.columns[c].name + "'");
    }
  }
  Table t;
  t.numbers.assign(ts.columns.size(), {});
  t.texts.assign(ts.columns.size(), {});
  std::set<std::string> seen;
  for (size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    std::string where = path.filename().string() + " record " + std::to_string(r + 1);
    if (rec.size() != header.size()) {
      throw InputError(where + " has " + std::to_string(rec.size()) +
                       " fields, expected " + std::to_string(header.size()));
    }
    std::string id = Trim(rec[0]);
    if (!seen.insert(id).second) throw InputError(where + ": duplicate ID '" + id + "'");
    t.ids.push_back(id);
    for (size_t c = 0; c < ts.columns.size(); ++c) {
      const std::string& cell = rec[source[c]];
      if (ts.columns[c].type == ColumnType::kText) {
        t.texts[c].push_back(cell);
        t.numbers[c].push_back(std::nan(""));
      } else {
        t.numbers[c].push_back(
            ParseCell(cell, ts.columns[c].type, where + " column " + ts.columns[c].name));
      }
    }
  }
  auto mask_path = dir / (ts.name + "_sensRows.csv");
  if (!std::filesystem::exists(mask_path)) {
    t.sensitive.assign(t.size(), ts.norm != nullptr);
    return t;
  }
  t.sensitive.assign(t.size(), false);
  auto mask = ParseCsv(ReadFile(mask_path));
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < t.size(); ++i) index[t.ids[i]] = i;
  for (size_t r = 1; r < mask.size(); ++r) {
    std::string where = mask_path.filename().string() + " record " + std::to_string(r + 1);
    if (mask[r].size() != 2) throw InputError(where + " must have 2 fields");
    auto it = index.find(Trim(mask[r][0]));
    if (it == index.end()) {
      throw InputError(where + " references absent ID '" + mask[r][0] + "'");
    }
    t.sensitive[it->second] = ParseFlag(mask[r][1], where);
  }
  return t;
}

}  // namespace

Database LoadDatabase(const std::filesystem::path& dir, const Schema& schema) {
  if (!std::filesystem::is_directory(dir)) {
    throw InputError("data directory '" + dir.string() + "' does not exist");
  }
  Database db;
  db.schema = schema;
  for (const auto& ts : schema.tables) db.tables[ts.name] = LoadTable(dir, ts);
  return db;
}

}  // namespace dersens
