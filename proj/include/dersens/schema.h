#ifndef DERSENS_SCHEMA_H_
#define DERSENS_SCHEMA_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dersens/error.h"
#include "dersens/norm.h"

namespace dersens {

enum class ColumnType { kInt, kReal, kDate, kText };

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::kReal;
};

struct TableSchema {
  std::string name;
  std::vector<ColumnDef> columns;
  NormPtr norm;         // over column names; nullptr: no sensitive column
  double rows_p = 1.0;  // how the rows of the table are combined

  int ColumnIndex(const std::string& column) const;  // -1 when absent
  bool IsSensitive(const std::string& column) const;
};

struct Schema {
  std::vector<TableSchema> tables;
  double database_p = kInf;  // how tables are combined

  const TableSchema* Find(const std::string& table) const;
  TableSchema* Find(const std::string& table);
};

// Line format: "table <name>", "col <name> <int|real|date|text>",
// "rows lp <p>" or "rows linf", "norm <norm-expr>", and optionally
// "database lp <p>" or "database linf". '#' starts a comment.
Schema ParseSchema(std::string_view text);

// One "<table> <norm-expr>" per line; replaces the norms of those tables.
void ApplyNormSpec(Schema& schema, std::string_view text);

// Checks that norm variables are numeric columns of their table.
void ValidateSchema(const Schema& schema);

struct Table {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> numbers;     // per column, NaN for text
  std::vector<std::vector<std::string>> texts;  // per column, empty for numeric
  std::vector<bool> sensitive;
  size_t size() const { return ids.size(); }
};

struct Database {
  Schema schema;
  std::map<std::string, Table> tables;
};

// Reads <dir>/<table>.csv and <dir>/<table>_sensRows.csv. Without a sensRows
// file every row of a table with a norm is sensitive.
Database LoadDatabase(const std::filesystem::path& dir, const Schema& schema);

// RFC 4180 records; the first record is the header.
std::vector<std::vector<std::string>> ParseCsv(std::string_view text);

// Months since 1980-01-01 with day fractions of a 30.4375-day month.
double DateToMonths(std::string_view iso_date);
std::string MonthsToDate(double months);

std::string ReadFile(const std::filesystem::path& path);

}  // namespace dersens

#endif  // DERSENS_SCHEMA_H_
