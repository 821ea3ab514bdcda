#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "cli_app.hpp"
#include "sawtooth/csv.hpp"

namespace {

namespace fs = std::filesystem;
using sawtooth::parse_double;
using sawtooth::split_csv_line;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  double num(std::size_t row, const std::string& col) const {
    const auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end()) throw std::out_of_range("no column " + col);
    return parse_double(rows.at(row).at(static_cast<std::size_t>(it - header.begin())));
  }
  std::string str(std::size_t row, const std::string& col) const {
    const auto it = std::find(header.begin(), header.end(), col);
    return rows.at(row).at(static_cast<std::size_t>(it - header.begin()));
  }
};

Result parse_output(const std::string& text) {
  Result r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      r.comments.push_back(line);
    } else if (r.header.empty()) {
      r.header = split_csv_line(line);
    } else {
      r.rows.push_back(split_csv_line(line));
    }
  }
  return r;
}

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = sawtooth::cli::run(args, out, err);
  Result r = parse_output(out.str());
  r.code = code;
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool has_comment(const Result& r, const std::string& needle) {
  return std::any_of(r.comments.begin(), r.comments.end(),
                     [&](const std::string& c) { return c.find(needle) != std::string::npos; });
}

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / ("sawtooth_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Bands, MaxBandListsOrderedEdges) {
  const Result r = run({"bands", "--kappa", "2.8", "--max-band", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.header, (std::vector<std::string>{"p", "e_min", "e_max"}));
  ASSERT_EQ(r.rows.size(), 6u);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(r.num(i, "p"), double(i));
    EXPECT_LE(r.num(i, "e_min"), r.num(i, "e_max"));
    if (i > 0) {
      EXPECT_LT(r.num(i - 1, "e_max"), r.num(i, "e_min"));
    }
  }
  EXPECT_TRUE(has_comment(r, "# kappa=2.8"));
}

TEST(Bands, CarbonPresetMetadata) {
  const Result r = run({"bands", "--preset", "carbon", "--unit", "eV"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has_comment(r, "# kappa=10.682"));
  EXPECT_TRUE(has_comment(r, "preset carbon: kappa pinned to 10.682"));
  EXPECT_TRUE(has_comment(r, "# unit=eV"));
  EXPECT_EQ(r.header.size(), 5u);
  ASSERT_EQ(r.rows.size(), 15u);
  EXPECT_NEAR(r.num(0, "E_min_eV"), 489.99 * r.num(0, "e_min"), 1e-9);
  const Result h = run({"bands", "--preset", "hydrogen"});
  EXPECT_TRUE(has_comment(h, "hydrogen: L0 = 1 A read as the half-period"));
  EXPECT_GT(r.rows.size(), h.rows.size());
}

TEST(Validity, SmallKappaWarns) {
  const Result r = run({"bands", "--kappa", "0.5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("kappa = 0.5 is below kappa0"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("IDS/DOS formulas not validated"), std::string::npos);
  const Result s = run({"ids", "--kappa", "0.5", "--strict"});
  EXPECT_EQ(s.code, 2);
  EXPECT_TRUE(s.out.empty());
  EXPECT_EQ(run({"bands", "--kappa", "2.8", "--strict"}).code, 0);
}

TEST(Usage, ErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"bands"}).code, 1);  // no lattice
  EXPECT_EQ(run({"bands", "--kappa", "2.8", "--preset", "carbon"}).code, 1);
  EXPECT_EQ(run({"bands", "--kappa", "2.8", "--unit", "eV"}).code, 1);
  EXPECT_EQ(run({"bands", "--preset", "oxygen"}).code, 1);
  EXPECT_EQ(run({"ids", "--kappa", "2.8", "--emin", "-0.2", "--emax", "-0.5"}).code, 1);
  EXPECT_EQ(run({"ids", "--kappa", "2.8", "--points", "1"}).code, 1);
  EXPECT_EQ(run({"spectrum", "--kappa", "2.8", "-N", "-1"}).code, 1);
  EXPECT_EQ(run({"convergence", "--kappa", "2.8", "-N", "20,10"}).code, 1);
  EXPECT_EQ(run({"lifshitz", "--kappa", "2.8", "--samples", "0"}).code, 1);
  EXPECT_EQ(run({"bands", "--kappa", "abc"}).code, 1);
}

TEST(Ids, PlateausInGaps) {
  const Result r = run({"ids", "--kappa", "2.8", "--points", "101"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.header, (std::vector<std::string>{"E", "e", "p", "phi", "ids", "dos", "flag"}));
  int half = 0, full = 0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const double e = r.num(i, "e");
    if (std::abs(e + 0.4) < 0.1) {
      EXPECT_DOUBLE_EQ(r.num(i, "ids"), 0.5);
      ++half;
    }
    if (e < -0.7) {
      EXPECT_EQ(r.num(i, "ids"), 0.0);
    }
    if (std::abs(e + 0.03) < 0.03) {
      EXPECT_DOUBLE_EQ(r.num(i, "ids"), 1.0);
      ++full;
    }
    if (i > 0) {
      EXPECT_GE(r.num(i, "ids"), r.num(i - 1, "ids"));
    }
  }
  EXPECT_GT(half, 5);
  EXPECT_GT(full, 3);
}

TEST(Dos, ZeroInGapsUShapedInBand) {
  const Result r = run({"dos", "--kappa", "2.8", "--points", "201"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<double> band1;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const std::string flag = r.str(i, "flag");
    if (flag == "gap") {
      EXPECT_EQ(r.num(i, "dos"), 0.0);
    }
    if (flag == "band" && r.num(i, "p") == 1.0) band1.push_back(r.num(i, "dos"));
    if (flag == "edge-guard") {
      EXPECT_TRUE(r.str(i, "dos").empty());
    }
  }
  ASSERT_GT(band1.size(), 10u);
  const auto lowest = std::min_element(band1.begin(), band1.end());
  EXPECT_NE(lowest, band1.begin());
  EXPECT_NE(lowest, band1.end() - 1);
}

TEST(Spectrum, RowsAndMetadata) {
  const Result r = run({"spectrum", "--kappa", "2.8", "-N", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.header, (std::vector<std::string>{"index", "e", "E_unit", "band"}));
  EXPECT_EQ(r.rows.size(), 42u);
  EXPECT_TRUE(has_comment(r, "# N=10, wells=21"));
  EXPECT_NE(r.err.find("warning:"), std::string::npos);  // 2N+1 per band, not 2N+2
  EXPECT_EQ(run({"spectrum", "--kappa", "2.8", "-N", "0"}).rows.size(), 2u);
  EXPECT_EQ(run({"spectrum", "--kappa", "2.8", "-N", "10", "--strict"}).code, 2);
}

TEST(Convergence, ErrorDecreases) {
  const Result r = run({"convergence", "--kappa", "2.8", "-N", "5,10,20", "--grid-points", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_GT(r.num(0, "sup_error"), r.num(1, "sup_error"));
  EXPECT_GT(r.num(1, "sup_error"), r.num(2, "sup_error"));
  EXPECT_TRUE(has_comment(r, "# decay_exponent="));
}

TEST(Lifshitz, ReproducibleForFixedSeed) {
  const std::vector<std::string> args = {"lifshitz", "--kappa", "2.8", "--n-sites", "61",
                                         "--samples", "6", "--tail-points", "30", "--seed", "11"};
  const Result a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const Result b = run(threaded);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.rows.size(), 30u);
  ASSERT_TRUE(has_comment(a, "# fit {"));
  const std::string fit_line = a.comments.back();
  const auto j = nlohmann::json::parse(fit_line.substr(6));
  EXPECT_EQ(j["seed"], 11);
  EXPECT_EQ(j["samples"], 6);
  EXPECT_TRUE(j.contains("exponent"));
  EXPECT_TRUE(j.contains("mismatch"));
}

TEST(Lifshitz, CleanChainIsFlagged) {
  const fs::path dir = temp_dir();
  const fs::path out = dir / "clean.csv";
  const Result r = run({"lifshitz", "--kappa", "2.8", "--delta", "0", "--n-sites", "61",
                        "--samples", "3", "--tail-points", "40", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(out.string() + ".fit.json"));
  EXPECT_TRUE(j["mismatch"].get<bool>());
  EXPECT_NE(r.err.find("model mismatch"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Config, RoundTripAndOverride) {
  const fs::path dir = temp_dir();
  const Result printed = run({"convergence", "--kappa", "2.8", "-N", "4,8", "--grid-points", "50",
                              "--print-config"});
  ASSERT_EQ(printed.code, 0) << printed.err;
  const auto cfg = sawtooth::cli::parse_config(printed.out);
  EXPECT_EQ(cfg.command, "convergence");
  EXPECT_EQ(*cfg.kappa, 2.8);
  EXPECT_EQ(cfg.n_values, (std::vector<int>{4, 8}));
  EXPECT_EQ(sawtooth::cli::emit_config(cfg), printed.out);
  const fs::path path = dir / "run.json";
  std::ofstream(path) << printed.out;

  const Result direct = run({"convergence", "--kappa", "2.8", "-N", "4,8", "--grid-points", "50"});
  const Result via = run({"convergence", "--config", path.string()});
  ASSERT_EQ(via.code, 0) << via.err;
  EXPECT_EQ(direct.out, via.out);

  const Result over = run({"convergence", "--config", path.string(), "--grid-points", "20",
                           "--print-config"});
  const auto cfg2 = sawtooth::cli::parse_config(over.out);
  EXPECT_EQ(cfg2.grid_points, 20);
  EXPECT_EQ(cfg2.n_values, (std::vector<int>{4, 8}));

  std::ofstream(dir / "bad.json") << R"({"command": "bands", "kapa": 2.8})";
  const Result bad = run({"bands", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("kapa"), std::string::npos) << bad.err;
  fs::remove_all(dir);
}

TEST(Output, AtomicFileWrite) {
  const fs::path dir = temp_dir();
  const fs::path out = dir / "bands.csv";
  const Result r = run({"bands", "--kappa", "2.8", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const Result file = parse_output(slurp(out));
  EXPECT_EQ(file.rows.size(), 2u);
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_EQ(entry.path().filename(), "bands.csv");
  }
  fs::remove_all(dir);
}

}  // namespace
