#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "mrshe/cli.hpp"
#include "mrshe/csv.hpp"
#include "mrshe/manifest.hpp"

using namespace mrshe;
using nlohmann::json;

namespace {

int run(const std::vector<std::string>& argv) {
  std::vector<const char*> args{"mrshe"};
  for (const std::string& a : argv) args.push_back(a.c_str());
  return run_cli(static_cast<int>(args.size()), args.data());
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("mrshe_test_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

json small_simulate_config() {
  return {
      {"grid", {{"T", 0.25}, {"nt", 128}, {"nx", 16}}},
      {"coefficients",
       {{"f", {{"kind", "zero"}}},
        {"sigma", {{"kind", "constant"}, {"c", 1.0}}},
        {"M_sigma", 1.0}}},
      {"obstacle", {{"kind", "linear"}, {"y", {{"kind", "zero"}}}}},
      {"n_particles", 32},
      {"seed", 7},
      {"snapshots", {0.125, 0.25}},
      {"workers", 2},
  };
}

}  // namespace

TEST_CASE("shortest round-trip formatting survives re-parsing") {
  for (double v : {0.1, 1.0 / 3.0, 4.9406564584124654e-324, 0.25, 1e308,
                   -7.000000000000001}) {
    // strtod instead of stod: stod raises on subnormals it parses fine.
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(format_double(0.25) == "0.25");
}

TEST_CASE("checksums are stable and content-sensitive") {
  const std::string text = "eps,tail\n0.5,0.3\n";
  CHECK(fnv1a64_hex(text) == fnv1a64_hex(text));
  CHECK(fnv1a64_hex(text) != fnv1a64_hex(text + " "));
  CHECK(fnv1a64_hex("").size() == 16);
}

TEST_CASE("csv matrices round-trip through the writer and reader") {
  TempDir dir;
  CsvWriter csv;
  csv.header({"a", "b", "c"});
  csv.row({0.1, 1.0 / 3.0, -2.5});
  csv.row({4.0, 5.0, 6.0});
  write_text_file(dir.file("m.csv"), csv.str());
  const auto rows = read_csv_matrix(dir.file("m.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][1] == 1.0 / 3.0);
  CHECK(rows[1][2] == 6.0);
}

TEST_CASE("constants subcommand emits the closed-form record") {
  TempDir dir;
  const int status = run({"constants", "--T", "0.25", "--c-t", "0",
                          "--m-sigma", "1", "--output-dir", dir.str()});
  CHECK(status == 0);
  const json doc = json::parse(read_text_file(dir.file("constants.json")));
  CHECK(doc["log_c1"]["value"].get<double>() ==
        doctest::Approx(std::log(12.0 * std::sqrt(0.5 / 3.14159265358979))));
  // Manifest lists the output with a matching checksum.
  const json manifest = json::parse(read_text_file(dir.file("run_manifest.json")));
  bool found = false;
  for (const auto& out : manifest["outputs"]) {
    if (out["path"] == "constants.json") {
      found = true;
      CHECK(out["fnv1a64"].get<std::string>() ==
            fnv1a64_hex(read_text_file(dir.file("constants.json"))));
    }
  }
  CHECK(found);
}

TEST_CASE("CFL-violating simulate config is a configuration error") {
  TempDir dir;
  json cfg = small_simulate_config();
  cfg["grid"]["nt"] = 16;  // dt = 1/64 > dx^2/2 = 1/512
  cfg["output_dir"] = dir.str();
  write_text_file(dir.file("cfg.json"), cfg.dump());
  CHECK(run({"simulate", "--config", dir.file("cfg.json")}) == 2);
}

TEST_CASE("unknown keys and malformed json are configuration errors") {
  TempDir dir;
  write_text_file(dir.file("bad.json"), "{ not json");
  CHECK(run({"simulate", "--config", dir.file("bad.json")}) == 2);
  write_text_file(dir.file("empty.json"), "{}");
  CHECK(run({"simulate", "--config", dir.file("empty.json")}) == 2);
  CHECK(run({"no-such-subcommand"}) == 2);
}

TEST_CASE("simulate writes outputs, a complete manifest, and diagnostics") {
  TempDir dir;
  json cfg = small_simulate_config();
  cfg["output_dir"] = dir.str();
  write_text_file(dir.file("cfg.json"), cfg.dump());
  CHECK(run({"simulate", "--config", dir.file("cfg.json")}) == 0);

  const json traj = json::parse(read_text_file(dir.file("trajectory.json")));
  CHECK(traj["diagnostics"]["min_constraint"].get<double>() >= -1e-8);
  CHECK(traj["diagnostics"]["flatness_residual"].get<double>() >= 0.0);

  const auto k_rows = read_csv_matrix(dir.file("k_increments.csv"));
  CHECK(k_rows.size() == 128);
  CHECK(k_rows[0].size() == 16);  // t_index + 15 interior nodes

  const json manifest = json::parse(read_text_file(dir.file("run_manifest.json")));
  CHECK(manifest["outputs"].size() == 3);
  for (const auto& out : manifest["outputs"]) {
    const std::string body =
        read_text_file(dir.file(out["path"].get<std::string>()));
    CHECK(out["bytes"].get<std::size_t>() == body.size());
    CHECK(out["fnv1a64"].get<std::string>() == fnv1a64_hex(body));
  }
  CHECK(manifest.contains("timings"));
}

TEST_CASE("simulate pipelines are byte-identical across worker counts") {
  json cfg = small_simulate_config();
  const SimulateConfig one = parse_simulate([&] {
    json j = cfg;
    j["workers"] = 1;
    return j;
  }());
  const SimulateConfig eight = parse_simulate([&] {
    json j = cfg;
    j["workers"] = 8;
    return j;
  }());
  const SimulateOutputs a = run_simulate_pipeline(one);
  const SimulateOutputs b = run_simulate_pipeline(eight);
  CHECK(a.trajectory_json == b.trajectory_json);
  CHECK(a.k_csv == b.k_csv);
  CHECK(a.snapshots_csv == b.snapshots_csv);
}

TEST_CASE("couple pipeline reports the chain and echoes its inputs") {
  json cfg = small_simulate_config();
  cfg.erase("n_particles");
  cfg["n_pairs"] = 24;
  cfg["drift"] = {{"kind", "constant"}, {"c", 0.5}};
  cfg["marginal"] = {{"t", 0.25}, {"x", 0.5}};
  const CoupleConfig parsed = parse_couple(cfg);
  const CoupleOutputs out = run_couple_pipeline(parsed);
  const json doc = json::parse(out.report_json);
  CHECK(doc["entropy_h"].get<double>() == 0.03125);
  CHECK(doc["margins"]["log_margin_dist"].get<double>() > 0.0);
  CHECK(doc["inputs"]["drift"]["c"].get<double>() == 0.5);
  CHECK(doc["marginal"]["node"].get<int>() == 8);

  // One marginal row per pair, after the header.
  std::size_t lines = 0;
  for (char c : out.marginals_csv)
    if (c == '\n') ++lines;
  CHECK(lines == 25);
}

TEST_CASE("couple pipelines are byte-identical across worker counts") {
  json cfg = small_simulate_config();
  cfg.erase("n_particles");
  cfg["n_pairs"] = 16;
  cfg["drift"] = {{"kind", "constant"}, {"c", 0.5}};
  json one = cfg;
  one["workers"] = 1;
  json eight = cfg;
  eight["workers"] = 8;
  const CoupleOutputs a = run_couple_pipeline(parse_couple(one));
  const CoupleOutputs b = run_couple_pipeline(parse_couple(eight));
  // Worker count is part of the echoed config, so compare the science.
  const json da = json::parse(a.report_json);
  const json db = json::parse(b.report_json);
  CHECK(da["dist_sq"] == db["dist_sq"]);
  CHECK(da["w2_marginal"] == db["w2_marginal"]);
  CHECK(a.marginals_csv == b.marginals_csv);
}

TEST_CASE("drift grid files load with dimension checks") {
  TempDir dir;
  const SpaceTimeGrid grid{0.25, 4, 3};
  CsvWriter csv;
  csv.header({"g1", "g2", "g3"});
  for (int n = 0; n < 4; ++n)
    csv.row({0.1 * n, 0.2, -0.3});
  write_text_file(dir.file("g.csv"), csv.str());
  const json spec = {{"kind", "grid"}, {"path", dir.file("g.csv")}};
  const DriftField g = parse_drift(spec, grid);
  CHECK(g.at(3, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(g.at(0, 2) == -0.3);

  const SpaceTimeGrid wrong{0.25, 5, 3};
  CHECK_THROWS_AS(parse_drift(spec, wrong), config_error);
}

TEST_CASE("concentration subcommand writes the tail table") {
  TempDir dir;
  const int status = run({"concentration", "--source", "gaussian",
                          "--n-samples", "5000", "--seed", "11",
                          "--output-dir", dir.str()});
  CHECK(status == 0);
  const auto rows = read_csv_matrix(dir.file("tails.csv"));
  REQUIRE(!rows.empty());
  for (const auto& row : rows) {
    CHECK(row.size() == 3);
    CHECK(row[1] >= 0.0);
    CHECK(row[1] <= 1.0);
  }
  const json doc = json::parse(read_text_file(dir.file("concentration.json")));
  CHECK(doc["n_samples"].get<int>() == 5000);
}

TEST_CASE("acknowledged unstable grid exits with the blow-up status") {
  TempDir dir;
  json cfg = small_simulate_config();
  cfg["grid"] = {{"T", 0.25}, {"nt", 512}, {"nx", 64}};  // dt > dx^2/2
  cfg["n_particles"] = 1;
  cfg["output_dir"] = dir.str();
  write_text_file(dir.file("cfg.json"), cfg.dump());
  CHECK(run({"simulate", "--config", dir.file("cfg.json"),
             "--allow-unstable"}) == 3);
}

TEST_CASE("kernel-check reports the failing Gaussian form with status 4") {
  // The exp(-(x-y)^2/(2t)) form cannot dominate the kernel off the diagonal,
  // so the sweep flags it; every other bound in the summary must be clean.
  TempDir dir;
  json cfg = {{"t_samples", 10}, {"x_samples", 10}, {"y_samples", 10},
              {"quad_n", 128},   {"output_dir", dir.str()}};
  write_text_file(dir.file("cfg.json"), cfg.dump());
  CHECK(run({"kernel-check", "--config", dir.file("cfg.json")}) == 4);
  const json doc = json::parse(read_text_file(dir.file("kernel_summary.json")));
  CHECK(doc["max_nash_aronson_excess"].get<double>() > 1e-10);
  CHECK(doc["max_negative_value"].get<double>() == 0.0);
  CHECK(doc["max_symmetry_err"].get<double>() <= 1e-12);
  CHECK(doc["max_l2_excess_over_bound"].get<double>() <= 1e-6);
  CHECK(doc["max_semigroup_err"].get<double>() <= 1e-6);
  CHECK(doc["max_mass_excess_over_1"].get<double>() <= 1e-10);
}

TEST_CASE("obstacle and coefficient validation reject bad declarations") {
  json cfg = small_simulate_config();
  cfg["obstacle"] = {{"kind", "general"},
                     {"h", {{"name", "cubic_plus_linear"}}},
                     {"c_h", 1.0},
                     {"C_h", 1.5}};  // cubic slope reaches 4 on [-1, 1]
  CHECK_THROWS_AS(parse_simulate(cfg), config_error);

  json lip = small_simulate_config();
  lip["coefficients"]["f"] = {{"kind", "linear_u"}, {"a", 2.0}};
  lip["coefficients"]["C_T"] = 0.5;  // declared too small
  CHECK_THROWS_AS(parse_simulate(lip), config_error);
}
