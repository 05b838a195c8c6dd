// Command-line front end: analyze, run, privatize and bench.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "dersens/analyzer.h"
#include "dersens/dp.h"
#include "dersens/engine.h"
#include "dersens/format.h"
#include "dersens/schema.h"
#include "dersens/sql.h"
#include "dersens/tpch_gen.h"
#include "json.hpp"

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kReportVersion = "1.0";

constexpr double kBenchAlpha = 0.1;

struct Config {
  std::string query_path;
  std::string schema_path;
  std::string norm_path;
  std::string data_dir;
  std::string emit_dir;
  double epsilon = 1.0;
  double beta = 0.1;
  double gamma = 4.0;
  double alpha = 5.0;
  std::optional<double> smoothing;
  std::optional<uint64_t> seed;
  bool auto_beta = false;
  bool precise = false;
  double precision = 1.0;
  bool or_as_xor = false;
  std::string scaling = "elaborate";
  double product_row_weight = 1.0;
  bool json = false;
  size_t bench_rows = 5000;
};

dersens::PlanOptions Options(const Config& c) {
  dersens::PlanOptions o;
  o.alpha = c.alpha;
  o.beta = c.beta;
  o.smoothing = c.smoothing;
  o.auto_beta = c.auto_beta;
  o.precise = c.precise;
  o.precision = c.precision;
  o.or_as_xor = c.or_as_xor;
  o.product_row_weight = c.product_row_weight;
  o.noise_gamma = c.gamma;
  if (c.scaling == "identity") {
    o.scaling = dersens::ScalingMethod::kIdentity;
  } else if (c.scaling == "straightforward") {
    o.scaling = dersens::ScalingMethod::kStraightforward;
  } else {
    o.scaling = dersens::ScalingMethod::kElaborate;
  }
  return o;
}

uint64_t ResolveSeed(const Config& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("DERSENS_SEED")) {
    try {
      size_t used = 0;
      uint64_t s = std::stoull(env, &used);
      if (used == std::string(env).size()) return s;
    } catch (const std::exception&) {
    }
    throw dersens::InputError("DERSENS_SEED is not an unsigned integer: '" +
                              std::string(env) + "'");
  }
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

struct Loaded {
  dersens::Schema schema;
  dersens::SensitivityPlan plan;
};

Loaded Load(const Config& c) {
  Loaded l;
  l.schema = dersens::ParseSchema(dersens::ReadFile(c.schema_path));
  if (!c.norm_path.empty()) {
    dersens::ApplyNormSpec(l.schema, dersens::ReadFile(c.norm_path));
  }
  dersens::QuerySpec q = dersens::ParseQuery(dersens::ReadFile(c.query_path));
  l.plan = dersens::BuildPlan(q, l.schema, Options(c));
  return l;
}

ordered_json PlanJson(const dersens::SensitivityPlan& plan) {
  ordered_json factors = ordered_json::object();
  for (const auto& [var, f] : plan.witness.factor) factors[var] = f;
  return {{"beta", plan.beta},
          {"beta_requested", plan.beta_requested},
          {"smoothing", plan.smoothing},
          {"scaling",
           {{"method", dersens::ToString(plan.witness.method)},
            {"global", plan.witness.global},
            {"factors", factors}}},
          {"warnings", plan.warnings}};
}

void PrintPlan(const dersens::SensitivityPlan& plan) {
  std::cout << "-- beta achieved " << dersens::FormatDouble(plan.beta)
            << " (requested " << dersens::FormatDouble(plan.beta_requested)
            << "), leaf smoothing " << dersens::FormatDouble(plan.smoothing) << "\n";
  std::cout << "-- scaling " << dersens::ToString(plan.witness.method) << ", global "
            << dersens::FormatDouble(plan.witness.global);
  for (const auto& [var, f] : plan.witness.factor) {
    std::cout << ", " << var << " " << dersens::FormatDouble(f);
  }
  std::cout << "\n";
  for (const auto& w : plan.warnings) std::cout << "-- warning: " << w << "\n";
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw dersens::InputError("cannot write '" + path.string() + "'");
  out << text << "\n";
}

void Analyze(const Config& c) {
  Loaded l = Load(c);
  dersens::EmittedSql sql = dersens::EmitSql(l.plan);
  if (!c.emit_dir.empty()) {
    fs::create_directories(c.emit_dir);
    WriteText(fs::path(c.emit_dir) / "modified.sql", sql.modified);
    WriteText(fs::path(c.emit_dir) / "sensitivity.sql", sql.sensitivity);
  }
  if (c.json) {
    ordered_json j = {{"version", kReportVersion},
                      {"command", "analyze"},
                      {"modified_sql", sql.modified},
                      {"sensitivity_sql", sql.sensitivity}};
    j.update(PlanJson(l.plan));
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "-- modified query\n" << sql.modified << "\n";
  std::cout << "-- sensitivity query\n" << sql.sensitivity << "\n";
  PrintPlan(l.plan);
}

struct Evaluation {
  double initial = 0.0;
  double modified = 0.0;
  dersens::SensitivityResult sensitivity;
  double rel_error = 0.0;
};

Evaluation Evaluate(const dersens::SensitivityPlan& plan, const dersens::Database& db) {
  Evaluation e;
  e.initial = dersens::RunInitial(plan.ctx, db);
  e.modified = dersens::RunModified(plan, db);
  e.sensitivity = dersens::RunSensitivity(plan, db);
  e.rel_error = dersens::RelativeError(e.initial, e.modified, e.sensitivity.value);
  return e;
}

ordered_json EvaluationJson(const Evaluation& e) {
  ordered_json j = {{"initial", e.initial},
                    {"modified", e.modified},
                    {"sensitivity", e.sensitivity.value},
                    {"rel_error", e.rel_error}};
  if (!e.sensitivity.groups.empty()) {
    j["argmax"] = {{"table", e.sensitivity.argmax.alias},
                   {"id", e.sensitivity.argmax.id},
                   {"value", e.sensitivity.argmax.value}};
  }
  return j;
}

void PrintEvaluation(const Evaluation& e) {
  std::cout << "initial: " << dersens::FormatDouble(e.initial) << "\n"
            << "modified: " << dersens::FormatDouble(e.modified) << "\n"
            << "sensitivity: " << dersens::FormatDouble(e.sensitivity.value) << "\n"
            << "rel_error: " << dersens::FormatDouble(e.rel_error) << "%\n";
  if (!e.sensitivity.groups.empty()) {
    std::cout << "argmax: " << e.sensitivity.argmax.alias << " ID "
              << e.sensitivity.argmax.id << "\n";
  }
}

void Run(const Config& c) {
  Loaded l = Load(c);
  dersens::Database db = dersens::LoadDatabase(c.data_dir, l.schema);
  Evaluation e = Evaluate(l.plan, db);
  if (c.json) {
    ordered_json j = {{"version", kReportVersion}, {"command", "run"}};
    j.update(EvaluationJson(e));
    j.update(PlanJson(l.plan));
    std::cout << j.dump(2) << "\n";
    return;
  }
  PrintEvaluation(e);
  PrintPlan(l.plan);
}

void Privatize(const Config& c) {
  Loaded l = Load(c);
  dersens::NoiseParams params =
      dersens::MakeNoiseParams(c.epsilon, l.plan.beta, c.gamma);
  dersens::Database db = dersens::LoadDatabase(c.data_dir, l.schema);
  double modified = dersens::RunModified(l.plan, db);
  double sens = dersens::RunSensitivity(l.plan, db).value;
  dersens::Release r = dersens::Privatize(modified, sens, params, ResolveSeed(c));
  if (c.json) {
    ordered_json j = {{"version", kReportVersion},
                      {"command", "privatize"},
                      {"noised", r.noised},
                      {"raw", r.raw},
                      {"sensitivity", r.sensitivity},
                      {"noise", r.noise},
                      {"seed", r.seed},
                      {"params",
                       {{"epsilon", params.epsilon},
                        {"beta", params.beta},
                        {"gamma", params.gamma},
                        {"b", params.b}}}};
    j.update(PlanJson(l.plan));
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "noised: " << dersens::FormatDouble(r.noised) << "\n"
            << "epsilon " << dersens::FormatDouble(params.epsilon) << ", beta "
            << dersens::FormatDouble(params.beta) << ", gamma "
            << dersens::FormatDouble(params.gamma) << ", b "
            << dersens::FormatDouble(params.b) << ", seed " << r.seed << "\n";
}

void Bench(const Config& c) {
  fs::path dir = c.data_dir.empty()
                     ? fs::temp_directory_path() / ("dersens_bench_" + std::to_string(::getpid()))
                     : fs::path(c.data_dir);
  const bool cleanup = c.data_dir.empty();
  uint64_t seed = c.seed.value_or(1);
  auto start = std::chrono::steady_clock::now();
  dersens::GenerateLineitem(dir, c.bench_rows, seed);
  dersens::Schema schema = dersens::ParseSchema(dersens::LineitemSchemaText());
  dersens::Database db = dersens::LoadDatabase(dir, schema);
  dersens::SensitivityPlan plan = dersens::BuildPlan(
      dersens::ParseQuery(dersens::BenchQueryText()), schema, Options(c));
  Evaluation e = Evaluate(plan, db);
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (cleanup) fs::remove_all(dir);
  if (c.json) {
    ordered_json j = {{"version", kReportVersion},
                      {"command", "bench"},
                      {"rows", c.bench_rows},
                      {"seed", seed},
                      {"seconds", seconds}};
    j.update(EvaluationJson(e));
    j.update(PlanJson(plan));
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "rows: " << c.bench_rows << ", seed " << seed << ", "
            << dersens::FormatDouble(seconds) << " s\n";
  PrintEvaluation(e);
}

void AddPlanFlags(CLI::App* app, Config& c, bool needs_query) {
  if (needs_query) {
    app->add_option("--query", c.query_path, "SQL query file")->required();
    app->add_option("--schema", c.schema_path, "schema file")->required();
    app->add_option("--norm", c.norm_path, "norm file, one '<table> <norm>' per line");
  }
  app->add_option("--beta", c.beta, "requested smoothness")->capture_default_str();
  app->add_option("--alpha", c.alpha, "sigmoid and tauoid precision")
      ->capture_default_str();
  app->add_option("--gamma", c.gamma, "GenCauchy exponent")->capture_default_str();
  app->add_option("--smoothing", c.smoothing, "fixed smoothness of identity leaves");
  app->add_flag("--auto-beta", c.auto_beta,
                "accept the smoothness reached instead of failing");
  app->add_flag("--precise", c.precise, "exact clamped comparisons");
  app->add_option("--precision", c.precision, "smallest data step is 1/k")
      ->capture_default_str();
  app->add_flag("--or-as-xor", c.or_as_xor, "OR operands are mutually exclusive");
  app->add_option("--scaling", c.scaling, "norm alignment")
      ->check(CLI::IsMember({"identity", "straightforward", "elaborate"}))
      ->capture_default_str();
  app->add_option("--product-row-weight", c.product_row_weight,
                  "PRODUCT: bound on joined rows per sensitive row")
      ->capture_default_str();
  app->add_flag("--json", c.json, "JSON report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth derivative sensitivity of SQL aggregates"};
  app.require_subcommand(1);
  Config c;

  auto* analyze = app.add_subcommand("analyze", "emit the modified and sensitivity queries");
  AddPlanFlags(analyze, c, true);
  analyze->add_option("--emit-sql", c.emit_dir,
                      "also write modified.sql and sensitivity.sql to this directory");

  auto* run = app.add_subcommand("run", "evaluate the query on CSV data");
  AddPlanFlags(run, c, true);
  run->add_option("--data", c.data_dir, "directory of <table>.csv files")->required();

  auto* privatize = app.add_subcommand("privatize", "release the query with noise");
  AddPlanFlags(privatize, c, true);
  privatize->add_option("--data", c.data_dir, "directory of <table>.csv files")
      ->required();
  privatize->add_option("--epsilon", c.epsilon, "privacy budget")->capture_default_str();
  privatize->add_option("--seed", c.seed, "RNG seed, else DERSENS_SEED");

  auto* bench = app.add_subcommand("bench", "b1_1 on seeded synthetic lineitem data");
  AddPlanFlags(bench, c, false);
  bench->get_option("--alpha")->description("sigmoid and tauoid precision (default 0.1)");
  bench->add_option("--rows", c.bench_rows, "lineitem rows")->capture_default_str();
  bench->add_option("--seed", c.seed, "data seed (default 1)");
  bench->add_option("--data", c.data_dir, "keep the generated data here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*bench && bench->get_option("--alpha")->count() == 0) c.alpha = kBenchAlpha;

  try {
    if (*analyze) Analyze(c);
    if (*run) Run(c);
    if (*privatize) Privatize(c);
    if (*bench) Bench(c);
  } catch (const dersens::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    if (std::isfinite(e.min_beta())) {
      std::cerr << "smallest achievable beta: " << dersens::FormatDouble(e.min_beta())
                << "; epsilon must exceed "
                << dersens::FormatDouble(std::isfinite(e.min_epsilon())
                                             ? e.min_epsilon()
                                             : (c.gamma + 1.0) * e.min_beta())
                << "\n";
    }
    return 2;
  } catch (const dersens::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
