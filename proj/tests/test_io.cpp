#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "json.hpp"
#include "thermoforge/errors.hpp"
#include "thermoforge/io.hpp"
#include "thermoforge/numeric.hpp"
#include "thermoforge/pressure.hpp"
#include "thermoforge/runner.hpp"

using namespace thermoforge;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = THERMOFORGE_FIXTURE_DIR;

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("thermoforge-test-" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("shift space files") {
  const auto s = parse_shift_space("# golden\n2\n1 1\n1 0\n", "g.sft");
  CHECK(s == ShiftSpace::golden_mean());
  CHECK(parse_shift_space(format_shift_space(s), "round") == s);
  const auto msg = error_of([] { parse_shift_space("2\n1 1\n1 2\n", "bad.sft"); });
  CHECK(msg.find("bad.sft:") == 0);
  CHECK(error_of([] { parse_shift_space("2\n1 1\n1\n", "short.sft"); }).find("short.sft:3:") == 0);
  CHECK_THROWS_AS(parse_shift_space("2\n1 1\n", "x"), InputError);
  CHECK_THROWS_AS(parse_shift_space("", "x"), InputError);
  CHECK_THROWS_AS(parse_shift_space("2\n0 0\n1 1\n", "x"), InputError);
}

TEST_CASE("additive potential files") {
  const auto full = ShiftSpace::full_shift(2);
  const auto g = parse_potential("range 2\n00 0.25\n01 -1\n10 0.5\n11 0\n", full, "p");
  REQUIRE(g.as_additive() != nullptr);
  CHECK(g.as_additive()->value(Word{0, 1}) == -1.0);
  const auto again = parse_potential(format_potential(full, g), full, "round");
  for (const auto& w : periodic_points(full, 6)) CHECK(birkhoff(again, w) == birkhoff(g, w));
  CHECK(error_of([&] { parse_potential("range 2\n00 1\n01 x\n10 1\n11 1\n", full, "p.pot"); }).find("p.pot:3:") == 0);
  CHECK(error_of([&] { parse_potential("range 2\n00 1\n00 1\n", full, "p.pot"); }).find("p.pot:3:") == 0);
  CHECK_THROWS_AS(parse_potential("range 2\n00 1\n01 1\n10 1\n", full, "p"), InputError);
  CHECK_THROWS_AS(parse_potential("range 1\n0 1\n2 1\n", full, "p"), InputError);
  CHECK_THROWS_AS(parse_potential("range 1\n0 nan\n1 1\n", full, "p"), InputError);
  CHECK_THROWS_AS(parse_potential("bogus\n", full, "p"), InputError);
}

TEST_CASE("matrix potential files") {
  const auto full = ShiftSpace::full_shift(2);
  const auto g = load_potential(kFixtures / "matrix.pot", full);
  REQUIRE(g.as_matrix_product() != nullptr);
  CHECK(g.as_matrix_product()->norm == MatrixNorm::kInfinity);
  CHECK(g.as_matrix_product()->matrices[1](1, 1) == 3.0);
  CHECK_THROWS_AS(parse_potential("matrices 2\nsymbol 0\n1 1\n1 1\n", full, "m"), InputError);
  CHECK_THROWS_AS(parse_potential("matrices 2\nsymbol 0\n1 1\n1 0\nsymbol 1\n1 1\n1 1\n", full, "m"), InputError);
  CHECK_THROWS_AS(parse_potential("matrices 2\nnorm two\n", full, "m"), InputError);
}

TEST_CASE("reversal files") {
  const auto r = parse_reversal("kind commutation\nperm 1 0\n", "r");
  CHECK(r.kind == ReversalKind::kCommutation);
  CHECK(r.perm == std::vector<Symbol>{1, 0});
  const auto t = parse_reversal_inline("time_reversal 0 1", "cfg");
  CHECK(t.kind == ReversalKind::kTimeReversal);
  const auto back = parse_reversal(format_reversal(r), "round");
  CHECK(back.kind == r.kind);
  CHECK(back.perm == r.perm);
  CHECK_THROWS_AS(parse_reversal("kind sideways\nperm 0 1\n", "r"), InputError);
  CHECK_THROWS_AS(parse_reversal("kind commutation\n", "r"), InputError);
}

TEST_CASE("config files") {
  const auto c = parse_config("# c\n[a]\nx = 1\n\n[b]\ny = two words # trailing\n", "c.cfg");
  REQUIRE(c.find("a", "x") != nullptr);
  CHECK(c.find("a", "x")->value == "1");
  CHECK(c.find("a", "x")->line == 3);
  CHECK(c.find("b", "y")->value == "two words");
  CHECK(c.find("b", "z") == nullptr);
  CHECK(error_of([] { parse_config("[a]\nx = 1\nx = 2\n", "c.cfg"); }).find("c.cfg:3:") == 0);
  CHECK(error_of([] { parse_config("x = 1\n", "c.cfg"); }).find("c.cfg:1:") == 0);
  CHECK(error_of([] { parse_config("[a]\nnothing here\n", "c.cfg"); }).find("c.cfg:2:") == 0);
}

TEST_CASE("experiment configs") {
  const auto c = load_experiment_config(kFixtures / "bernoulli.cfg");
  CHECK(c.system == kFixtures / "full2.sft");
  CHECK(c.scenarios == std::vector<std::string>{"fluctuation", "ldp", "exponents", "level2"});
  CHECK(c.n_max == 16);
  CHECK(c.seed == 7);
  CHECK(c.alpha_grid.size() == 901);
  CHECK(c.alpha_grid.front() == -4.0);
  CHECK(c.alpha_grid.back() == doctest::Approx(5.0));

  const std::string base = "[system]\nshift = a\npotential = b\n";
  const auto inline_rev = parse_experiment_config(base + "reversal = commutation 1 0\n", "e.cfg", ".");
  REQUIRE(inline_rev.reversal.has_value());
  CHECK(inline_rev.reversal->kind == ReversalKind::kCommutation);
  CHECK(error_of([&] { parse_experiment_config(base + "[run]\nn_max = many\n", "e.cfg", "."); }).find("e.cfg:5:") == 0);
  CHECK(error_of([&] { parse_experiment_config(base + "[run]\nscenarios = pressure, nonsense\n", "e.cfg", "."); })
            .find("e.cfg:5:") == 0);
  CHECK(error_of([&] { parse_experiment_config(base + "[run]\ncolour = blue\n", "e.cfg", "."); }).find("e.cfg:5:") == 0);
  CHECK(error_of([&] { parse_experiment_config(base + "[run]\nn_max = 0\n", "e.cfg", "."); }).find("n_max") !=
        std::string::npos);
  CHECK_THROWS_AS(parse_experiment_config("[system]\nshift = a\n", "e.cfg", "."), InputError);
  CHECK_THROWS_AS(parse_experiment_config(base + "[extra]\nx = 1\n", "e.cfg", "."), InputError);
  const auto g = parse_experiment_config(base + "[run]\nalpha_grid = 0, 0.5, 1\n", "e.cfg", ".");
  CHECK(g.alpha_grid == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("csv formatting") {
  CHECK(format_real(0.0) == "0");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_real(std::log(3.0))) == std::log(3.0));
  CsvTable t({"n", "value", "name"});
  t.add_row({1LL, 0.5, std::string("a")});
  t.add_row({2LL, -0.0, std::string("b")});
  CHECK(t.render() == "# thermoforge-csv v1\nn,value,name\n1,0.5,a\n2,0,b\n");
  CHECK_THROWS_AS(t.add_row({1LL}), ContractError);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("enumeration cap from the environment") {
  ::unsetenv("THERMOFORGE_CAP");
  CHECK(default_enumeration_cap() == (std::uint64_t{1} << 24));
  ::setenv("THERMOFORGE_CAP", "100", 1);
  CHECK(default_enumeration_cap() == 100);
  CHECK_THROWS_AS(periodic_points(ShiftSpace::full_shift(2), 8), ResourceError);
  ::setenv("THERMOFORGE_CAP", "-3", 1);
  CHECK_THROWS_AS(default_enumeration_cap(), InputError);
  ::unsetenv("THERMOFORGE_CAP");
}

TEST_CASE("run writes a complete manifest and is deterministic") {
  auto c = load_experiment_config(kFixtures / "pressure-golden.cfg");
  c.output_dir = fresh_dir("run-a");
  const auto report = run_experiment(c);
  for (const auto& chk : report.checks) CHECK(chk.passed);
  const auto manifest = nlohmann::json::parse(read_text_file(c.output_dir / "manifest.json"));
  CHECK(manifest["config_sha256"] == sha256_hex(c.source));
  CHECK(manifest["versions"]["thermoforge"] == kVersion);
  for (const auto& name : report.files) {
    if (name == "manifest.json") continue;
    REQUIRE(manifest["files"].contains(name));
    CHECK(manifest["files"][name] == sha256_hex(read_text_file(c.output_dir / name)));
  }
  CHECK(manifest["files"].size() + 1 == report.files.size());
  const auto csv = read_text_file(c.output_dir / "pressure_periodic.csv");
  CHECK(csv.rfind("# thermoforge-csv v1\n", 0) == 0);

  auto c2 = c;
  c2.output_dir = fresh_dir("run-b");
  run_experiment(c2);
  for (const auto& name : report.files) CHECK(read_text_file(c.output_dir / name) == read_text_file(c2.output_dir / name));
  fs::remove_all(c.output_dir);
  fs::remove_all(c2.output_dir);
}

TEST_CASE("run error paths") {
  auto bad = load_experiment_config(kFixtures / "incompatible.cfg");
  bad.output_dir = fresh_dir("bad");
  const auto msg = error_of([&] { run_experiment(bad); });
  CHECK(msg.find("incompatible reversal") != std::string::npos);
  CHECK_THROWS_AS(run_experiment(bad), ContractError);

  auto over = load_experiment_config(kFixtures / "over-cap.cfg");
  over.output_dir = fresh_dir("over");
  CHECK_THROWS_AS(run_experiment(over), ResourceError);

  auto empty = load_experiment_config(kFixtures / "empty-scenarios.cfg");
  empty.output_dir = fresh_dir("empty");
  CHECK_THROWS_AS(run_experiment(empty), InputError);
  for (const auto& d : {bad.output_dir, over.output_dir, empty.output_dir}) fs::remove_all(d);
}

TEST_CASE("verify fault injection") {
  VerifyOptions opt;
  opt.output_dir = fresh_dir("verify-fault");
  opt.n_max = 8;
  opt.inject_fault = true;
  const auto report = run_verify(opt);
  bool any_failed = false;
  for (const auto& c : report.checks) any_failed = any_failed || !c.passed;
  CHECK(any_failed);
  CHECK(format_checks(report.checks).find("FAIL") != std::string::npos);
  fs::remove_all(opt.output_dir);
}
