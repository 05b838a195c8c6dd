#ifndef DERSENS_TESTS_SUPPORT_FIXTURES_H_
#define DERSENS_TESTS_SUPPORT_FIXTURES_H_

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dersens/norm.h"
#include "dersens/schema.h"

namespace dersens::testing {

// Directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct TableData {
  std::string name;
  std::vector<std::string> header;           // without ID
  std::vector<std::vector<std::string>> rows;  // without ID; IDs are 1..n
  std::vector<bool> sensitive;               // empty: no sensRows file
};

void WriteTable(const std::filesystem::path& dir, const TableData& t);

// Writes the tables and loads them back through LoadDatabase.
Database BuildDatabase(const std::filesystem::path& dir, const Schema& schema,
                       const std::vector<TableData>& tables);

// Lineitem rows for the b1_1 query: flags and dates chosen so that every
// passing row lies at least `margin` months inside the date filter and
// every failing row at least `margin` outside it.
TableData LineitemFixture(size_t rows, double margin, uint64_t seed);

// Lineitem-only schema matching LineitemFixture.
Schema LineitemSchema();

// Random composite norm over `vars`, each used at least once.
NormPtr RandomNorm(std::mt19937_64& rng, const std::vector<std::string>& vars,
                   int depth);

Assignment RandomPoint(std::mt19937_64& rng, const std::vector<std::string>& vars,
                       double scale);

// Copy of `db` with one random sensitive row of `table` moved by exactly `d`
// under the table norm.
Database MoveSensitiveRow(const Database& db, const std::string& table,
                          std::mt19937_64& rng, double d);

struct DpTrial {
  double distance = 0.0;
  double log_ratio = 0.0;  // grid sup of the log density ratio
  double budget = 0.0;     // epsilon * distance
};

// Releases of the b1_1 query (alpha 0.1, beta 0.1, gamma 4) on `pairs`
// random lineitem fixtures and their neighbors at distance <= 1.
std::vector<DpTrial> EndToEndDpTrials(int pairs, uint64_t seed, double epsilon);

}  // namespace dersens::testing

#endif  // DERSENS_TESTS_SUPPORT_FIXTURES_H_
