#include "dersens/tpch_gen.h"

#include <cmath>
#include <fstream>

#include "dersens/dp.h"
#include "dersens/error.h"
#include "dersens/format.h"
#include "dersens/schema.h"

namespace dersens {

std::string LineitemSchemaText() {
  return "database linf\n"
         "table lineitem\n"
         "col l_orderkey text\n"
         "col l_quantity real\n"
         "col l_extendedprice real\n"
         "col l_discount real\n"
         "col l_tax real\n"
         "col l_returnflag text\n"
         "col l_linestatus text\n"
         "col l_shipdateG real\n"
         "col l_commitdateG real\n"
         "col l_receiptdateG real\n"
         "rows lp 1.0\n"
         "norm lp 1.0 l_quantity (scaled 0.0001 l_extendedprice) "
         "(scaled 50.0 l_discount) "
         "(scaled 30.0 (linf l_shipdateG l_commitdateG l_receiptdateG))\n";
}

std::string BenchQueryText() {
  return "select sum(lineitem.l_quantity) from lineitem "
         "where lineitem.l_shipdateG <= 230.3 - 30 "
         "and lineitem.l_returnflag = 'R' and lineitem.l_linestatus = 'F';";
}

void GenerateLineitem(const std::filesystem::path& dir, size_t rows,
                      uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::ofstream data(dir / "lineitem.csv"), mask(dir / "lineitem_sensRows.csv");
  if (!data || !mask) throw InputError("cannot write to '" + dir.string() + "'");
  data << "ID,l_orderkey,l_quantity,l_extendedprice,l_discount,l_tax,"
          "l_returnflag,l_linestatus,l_shipdateG,l_commitdateG,l_receiptdateG\n";
  mask << "ID,sensitive\n";
  SplitMix64 rng(seed);
  auto uniform_int = [&](int lo, int hi) {
    return lo + static_cast<int>(rng.Uniform() * (hi - lo + 1));
  };
  // TPC-H dates span 1992-01-01 .. 1998-08-02; the status cutoff is 1995-06-17.
  const double first = DateToMonths("1992-01-01");
  const double last = DateToMonths("1998-08-02");
  const double cutoff = DateToMonths("1995-06-17");
  for (size_t i = 0; i < rows; ++i) {
    int quantity = uniform_int(1, 50);
    double price = 900.0 + 0.01 * uniform_int(0, 110000);
    double discount = 0.01 * uniform_int(0, 10);
    double tax = 0.01 * uniform_int(0, 8);
    double ship = first + (last - first) * rng.Uniform();
    double commit = ship + uniform_int(-60, 60) / 30.4375;
    double receipt = ship + uniform_int(1, 30) / 30.4375;
    std::string flag = receipt <= cutoff ? (rng.Uniform() < 0.5 ? "R" : "A") : "N";
    std::string status = ship > cutoff ? "O" : "F";
    std::string id = std::to_string(i + 1);
    data << id << ',' << (i / 4 + 1) << ',' << quantity << ','
         << FormatDouble(quantity * price) << ',' << FormatDouble(discount) << ','
         << FormatDouble(tax) << ',' << flag << ',' << status << ','
         << FormatDouble(ship) << ',' << FormatDouble(commit) << ','
         << FormatDouble(receipt) << '\n';
    mask << id << ",1\n";
  }
}

}  // namespace dersens
