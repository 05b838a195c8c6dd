#ifndef DERSENS_TPCH_GEN_H_
#define DERSENS_TPCH_GEN_H_

#include <cstdint>
#include <filesystem>
#include <string>

namespace dersens {

// Schema text of the generated lineitem table, with the benchmark norm.
std::string LineitemSchemaText();

// Writes lineitem.csv and lineitem_sensRows.csv with `rows` seeded rows in
// the value ranges of TPC-H. Every row is sensitive.
void GenerateLineitem(const std::filesystem::path& dir, size_t rows,
                      uint64_t seed);

// The b1_1 benchmark query.
std::string BenchQueryText();

}  // namespace dersens

#endif  // DERSENS_TPCH_GEN_H_
