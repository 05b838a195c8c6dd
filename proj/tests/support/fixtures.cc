#include "fixtures.h"

#include <fstream>

#include "dersens/analyzer.h"
#include "dersens/dp.h"
#include "dersens/engine.h"
#include "dersens/format.h"
#include "dersens/tpch_gen.h"

namespace dersens::testing {

TempDir::TempDir() {
  static int counter = 0;
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("dersens_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void WriteTable(const std::filesystem::path& dir, const TableData& t) {
  std::ofstream out(dir / (t.name + ".csv"));
  out << "ID";
  for (const auto& h : t.header) out << ',' << h;
  out << '\n';
  for (size_t i = 0; i < t.rows.size(); ++i) {
    out << i + 1;
    for (const auto& v : t.rows[i]) out << ',' << v;
    out << '\n';
  }
  if (t.sensitive.empty()) return;
  std::ofstream mask(dir / (t.name + "_sensRows.csv"));
  mask << "ID,sensitive\n";
  for (size_t i = 0; i < t.sensitive.size(); ++i) {
    mask << i + 1 << ',' << (t.sensitive[i] ? 1 : 0) << '\n';
  }
}

Database BuildDatabase(const std::filesystem::path& dir, const Schema& schema,
                       const std::vector<TableData>& tables) {
  for (const auto& t : tables) WriteTable(dir, t);
  return LoadDatabase(dir, schema);
}

Schema LineitemSchema() { return ParseSchema(LineitemSchemaText()); }

TableData LineitemFixture(size_t rows, double margin, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> qty(1, 50), coin(0, 3);
  std::uniform_real_distribution<double> spread(0.0, 40.0);
  const double threshold = 200.3;
  TableData t;
  t.name = "lineitem";
  t.header = {"l_orderkey", "l_quantity", "l_extendedprice", "l_discount", "l_tax",
              "l_returnflag", "l_linestatus", "l_shipdateG", "l_commitdateG",
              "l_receiptdateG"};
  for (size_t i = 0; i < rows; ++i) {
    int q = qty(rng);
    bool inside = coin(rng) != 0;
    double ship = inside ? threshold - margin - spread(rng) : threshold + margin + spread(rng);
    int flag = coin(rng);
    t.rows.push_back({std::to_string(i / 4 + 1), std::to_string(q),
                      FormatDouble(q * 1000.0), "0.05", "0.02",
                      flag == 3 ? "A" : "R", flag == 2 ? "O" : "F", FormatDouble(ship),
                      FormatDouble(ship + 1.0), FormatDouble(ship + 0.5)});
    t.sensitive.push_back(i % 3 != 2);
  }
  return t;
}

NormPtr RandomNorm(std::mt19937_64& rng, const std::vector<std::string>& vars,
                   int depth) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto exponent = [&]() {
    double u = unit(rng);
    if (u < 0.3) return 1.0;
    if (u < 0.55) return kInf;
    if (u < 0.75) return 2.0;
    return 1.0 + 3.0 * unit(rng);
  };
  auto maybe_scale = [&](NormPtr n) {
    return unit(rng) < 0.3 ? NormExpr::Scale(0.1 + 10.0 * unit(rng), n) : n;
  };
  if (vars.size() == 1 || depth == 0) {
    std::vector<NormPtr> leaves;
    for (const auto& v : vars) leaves.push_back(maybe_scale(NormExpr::Var(v)));
    if (leaves.size() == 1) return leaves[0];
    return NormExpr::Combine(exponent(), leaves);
  }
  std::vector<std::string> shuffled = vars;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  size_t parts = std::min<size_t>(shuffled.size(), 2 + rng() % 2);
  std::vector<std::vector<std::string>> groups(parts);
  for (size_t i = 0; i < shuffled.size(); ++i) groups[i % parts].push_back(shuffled[i]);
  std::vector<NormPtr> kids;
  for (const auto& g : groups) kids.push_back(maybe_scale(RandomNorm(rng, g, depth - 1)));
  return NormExpr::Combine(exponent(), kids);
}

Assignment RandomPoint(std::mt19937_64& rng, const std::vector<std::string>& vars,
                       double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Assignment a;
  for (const auto& v : vars) a[v] = g(rng);
  return a;
}

Database MoveSensitiveRow(const Database& db, const std::string& table,
                          std::mt19937_64& rng, double d) {
  Database out = db;
  Table& t = out.tables.at(table);
  const TableSchema& ts = *db.schema.Find(table);
  std::vector<size_t> sensitive;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t.sensitive[i]) sensitive.push_back(i);
  }
  if (sensitive.empty()) throw InputError("no sensitive row in " + table);
  size_t row = sensitive[rng() % sensitive.size()];
  std::normal_distribution<double> g(0.0, 1.0);
  Assignment dir;
  for (const auto& v : Variables(ts.norm)) dir[v] = rng() % 3 ? g(rng) : 0.0;
  dir.begin()->second += 1e-3;
  double n = EvalNorm(ts.norm, dir);
  for (const auto& [v, x] : dir) t.numbers[ts.ColumnIndex(v)][row] += x * d / n;
  return out;
}

std::vector<DpTrial> EndToEndDpTrials(int pairs, uint64_t seed, double epsilon) {
  const double gamma = 4.0;
  PlanOptions o;
  o.alpha = 0.1;
  o.beta = 0.1;
  o.noise_gamma = gamma;
  Schema schema = LineitemSchema();
  SensitivityPlan plan = BuildPlan(ParseQuery(BenchQueryText()), schema, o);
  NoiseParams params = MakeNoiseParams(epsilon, o.beta, gamma);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<DpTrial> out;
  for (int i = 0; i < pairs; ++i) {
    TempDir dir;
    Database db = BuildDatabase(dir.path(), schema,
                                {LineitemFixture(20 + rng() % 40, 10.0 * unit(rng), rng())});
    DpTrial t;
    t.distance = unit(rng);
    Database nb = MoveSensitiveRow(db, "lineitem", rng, t.distance);
    double a1 = RunModified(plan, db), a2 = RunModified(plan, nb);
    double c1 = RunSensitivity(plan, db).value / params.b;
    double c2 = RunSensitivity(plan, nb).value / params.b;
    t.log_ratio = DdpCheck(a1, c1, a2, c2, gamma);
    t.budget = epsilon * t.distance;
    out.push_back(t);
  }
  return out;
}

}  // namespace dersens::testing
