#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "error.hpp"
#include "manifest.hpp"
#include "marked_io.hpp"
#include "rng.hpp"
#include "study_runner.hpp"

using namespace rcg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Manifest from_text(const std::string& text) {
  std::istringstream in(text);
  return Manifest::parse(in, "test.ini");
}

std::string expect_error(const std::function<void()>& fn, ErrorCode code) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == code);
    return e.what();
  }
  FAIL("no error thrown");
  return {};
}

const char* kDlr = R"(
[study]
kind = dlr
seed = 3

[window]
lower = 0 0
upper = 3 1

[configuration]
points = 0.5 0.5; 1.5 0.5; 2.5 0.5

[model]
J = 0.2

[dlr]
eta1 = 1
eta2 = 0 1 2
nodes = 101
)";

}  // namespace

TEST_CASE("manifest parsing errors name the line") {
  auto msg = expect_error([] { from_text("[study]\nkind dlr\n"); }, ErrorCode::Parse);
  CHECK(msg.find("test.ini:2") != std::string::npos);
  msg = expect_error([] { from_text("key = 1\n"); }, ErrorCode::Parse);
  CHECK(msg.find("test.ini:1") != std::string::npos);
  msg = expect_error([] { from_text("[a]\nx = 1\nx = 2\n"); }, ErrorCode::Parse);
  CHECK(msg.find("duplicate") != std::string::npos);
  expect_error([] { from_text("[a\n"); }, ErrorCode::Parse);
}

TEST_CASE("manifest lookups, defaults and overrides") {
  auto m = from_text("# comment\n[model]\nq = 4 # trailing\nname = x\n");
  CHECK(m.get_double("model", "q") == 4.0);
  CHECK(m.get_double("model", "p", 3.0) == 3.0);
  auto msg = expect_error([&] { m.get_double("model", "name"); }, ErrorCode::Parse);
  CHECK(msg.find("test.ini:4") != std::string::npos);
  CHECK(msg.find("model.name") != std::string::npos);
  m.apply_override("model.q=6");
  CHECK(m.get_double("model", "q") == 6.0);
  expect_error([&] { m.apply_override("q=6"); }, ErrorCode::Parse);
  const std::string text = m.resolved_text();
  CHECK(text.find("p = 3") != std::string::npos);
  CHECK(text.find("q = 6") != std::string::npos);
  m.get_string("model", "name");
  m.check_all_used();
  auto unused = from_text("[model]\nqq = 4\n");
  msg = expect_error([&] { unused.check_all_used(); }, ErrorCode::Parse);
  CHECK(msg.find("model.qq") != std::string::npos);
}

TEST_CASE("marked records round-trip bit-exactly") {
  MarkedFile empty{2, 1, 1.0, {}};
  std::stringstream e;
  save_marked(e, empty);
  const auto back = load_marked(e);
  CHECK(back.records.empty());
  CHECK(back.dimension == 2);

  Stream rng(12);
  MarkedFile f{2, 3, 0.75, {}};
  for (int k = 0; k < 3; ++k) {
    auto c = sample_poisson(Window({0.0, 0.0}, {20.0, 20.0}), 2.5 + k, 70 + k);  // ~1000 points each
    std::vector<double> s(c.size() * 3);
    for (auto& v : s) v = rng.normal() * std::pow(10.0, rng.normal() * 5);
    f.records.push_back({c, SpinField(c.size(), 3, s)});
  }
  for (bool hex : {false, true}) {
    std::stringstream ss;
    save_marked(ss, f, hex);
    const std::string first = ss.str();
    const auto g = load_marked(ss, 2, 3);
    REQUIRE(g.records.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(g.records[k].config == f.records[k].config);
      CHECK(g.records[k].sigma == f.records[k].sigma);
    }
    std::stringstream again;
    save_marked(again, g, hex);
    CHECK(again.str() == first);
  }
  std::stringstream ss;
  save_marked(ss, f);
  const std::string text = ss.str();
  std::stringstream a(text);
  auto msg = expect_error([&] { load_marked(a, 3, 3); }, ErrorCode::DimensionMismatch);
  CHECK(msg.find("dimension") != std::string::npos);
  std::stringstream b(text);
  expect_error([&] { load_marked(b, 2, 1); }, ErrorCode::DimensionMismatch);
  std::stringstream corrupt("# rcgibbs marked v0\n");
  expect_error([&] { load_marked(corrupt); }, ErrorCode::Parse);
  // A row with the wrong number of columns.
  std::string broken = text;
  const auto pos = broken.find("points ");
  const auto eol = broken.find('\n', broken.find('\n', pos) + 1);
  broken.insert(eol, " 1.0");
  std::stringstream c(broken);
  expect_error([&] { load_marked(c); }, ErrorCode::DimensionMismatch);
}

TEST_CASE("run rejects q = 2 citing the inequality") {
  auto m = from_text(kDlr);
  m.apply_override("model.q=2");
  RunOptions opts;
  opts.out_dir = (fs::temp_directory_path() / "rcg_q2").string();
  const auto msg = expect_error([&] { run_manifest(m, opts); }, ErrorCode::Validation);
  CHECK(msg.find("q > 2 violated") != std::string::npos);
}

TEST_CASE("run rejects unknown keys and kinds") {
  auto m = from_text(std::string(kDlr) + "\n[dlr2]\nfoo = 1\n");
  RunOptions opts;
  opts.out_dir = (fs::temp_directory_path() / "rcg_unknown").string();
  auto msg = expect_error([&] { run_manifest(m, opts); }, ErrorCode::Parse);
  CHECK(msg.find("dlr2.foo") != std::string::npos);
  auto k = from_text("[study]\nkind = magic\nseed = 1\n");
  expect_error([&] { run_manifest(k, opts); }, ErrorCode::Parse);
  auto noseed = from_text("[study]\nkind = dlr\n");
  msg = expect_error([&] { run_manifest(noseed, opts); }, ErrorCode::Parse);
  CHECK(msg.find("study.seed") != std::string::npos);
}

TEST_CASE("dlr study run writes a reproducible report") {
  const fs::path d1 = fs::temp_directory_path() / "rcg_dlr_1", d2 = fs::temp_directory_path() / "rcg_dlr_2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  RunOptions o1, o2;
  o1.out_dir = d1.string();
  o2.out_dir = d2.string();
  o2.threads = 2;
  run_manifest(from_text(kDlr), o1);
  run_manifest(from_text(kDlr), o2);
  const std::string r1 = slurp(d1 / "report.json"), r2 = slurp(d2 / "report.json");
  CHECK(r1 == r2);
  const auto j = nlohmann::json::parse(r1);
  CHECK(j["result"]["max_residual"].get<double>() < 1e-6);
  CHECK(j["manifest"]["model"]["q"] == "4");
  CHECK(j["manifest"]["dlr"]["u_max"] == "3");
  CHECK(fs::exists(d1 / "resolved_manifest.ini"));
  CHECK(slurp(d1 / "resolved_manifest.ini").find("output = ") != std::string::npos);
}

TEST_CASE("model description file sections fold into [model]") {
  auto file = from_text("[pair]\nkind = bilinear\nmatrix = -0.3\nrange = 1.5\n[single]\na = 2\nq = 6\n"
                        "[tempered]\nalpha = 0.5\np = 4\nM = 8\n");
  auto mf = from_text("[model]\nq = 5\n");
  merge_model_file(mf, file);
  const auto p = model_from_manifest(mf);
  CHECK(p.pair.kind() == PairPotential::Kind::Bilinear);
  CHECK(p.pair.range() == 1.5);
  CHECK(p.pair.matrix() == std::vector<double>{-0.3});
  CHECK(p.single.leading() == 2.0);
  CHECK(p.single.exponent() == 5.0);  // the manifest's own key wins
  CHECK(p.alpha == 0.5);
  CHECK(p.p == 4.0);
  CHECK(p.M == 8);

  auto stray = from_text("[pair]\nkind = none\nJJ = 1\n");
  auto msg = expect_error([&] { Manifest m; merge_model_file(m, stray); }, ErrorCode::Parse);
  CHECK(msg.find("pair.JJ") != std::string::npos);
  auto section = from_text("[model]\nq = 4\n");
  msg = expect_error([&] { Manifest m; merge_model_file(m, section); }, ErrorCode::Parse);
  CHECK(msg.find("[model]") != std::string::npos);
}

TEST_CASE("validity report JSON") {
  ModelParams p;
  p.single = SinglePotential(1.0, 2.0);
  const auto j = nlohmann::json::parse(validity_json(validate_params(p)));
  CHECK(j["valid"] == false);
  REQUIRE(j["violations"].size() >= 1);
  CHECK(j["violations"][0]["inequality"] == "q > 2");
  const auto ok = nlohmann::json::parse(validity_json(validate_params(ModelParams{})));
  CHECK(ok["valid"] == true);
  CHECK(ok["p_prime"] == doctest::Approx(2.0));
}
