#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

using Json = nlohmann::ordered_json;

namespace {

const std::filesystem::path kDir = "trajpace_cli_scratch";

std::string bin() {
  if (const char* env = std::getenv("TRAJPACE_BIN")) return env;
  return "./trajpace";
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  std::string cmd = (env.empty() ? "" : env + " ") + bin() + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Json report(const RunResult& r) {
  REQUIRE(r.code == 0);
  return Json::parse(r.out);
}

std::string put(const std::string& name, const std::string& text) {
  std::filesystem::create_directories(kDir);
  std::filesystem::path p = kDir / name;
  std::ofstream os(p, std::ios::binary);
  REQUIRE(os.good());
  os << text;
  os.close();
  return p.string();
}

// One-step trinomial set with the strict price interval [0, 0.05].
std::string trinomial_tree_file() {
  std::string paths = put("tri_paths.json",
                          R"({"paths": [[[1.0, 0], [0.9, 1]],
                                        [[1.0, 0], [1.0, 2]],
                                        [[1.0, 0], [1.1, 3]]]})");
  Json rep = report(run("build --paths " + paths));
  return put("tri_tree.json", rep["result"]["tree"].dump());
}

const std::string kGridToml =
    "# two-tick observable steps\n"
    "s0 = 1.0\n"
    "delta = 0.1\n"
    "beta = 0.1\n"
    "p = 1\n"
    "c = 0.02\n"
    "N1 = 2\n"
    "N2 = 2\n"
    "Lambda = [2]\n";

}  // namespace

TEST_CASE("build, price, hedge and classify compose through files") {
  std::string tree = trinomial_tree_file();

  Json priced = report(run("price --tree " + tree + " --payoff call:K=1.0"));
  CHECK(priced["command"] == "price");
  CHECK(priced["wall_ms"].get<std::int64_t>() >= 0);
  REQUIRE(priced["inputs"].size() == 1);
  CHECK(priced["inputs"][0]["name"] == "tree");
  CHECK(priced["inputs"][0]["fnv64"].get<std::string>().size() > 0);
  CHECK(priced["result"]["lower"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(priced["result"]["upper"].get<double>() == doctest::Approx(0.05).epsilon(1e-9));

  Json capped = report(
      run("price --tree " + tree + " --payoff call:K=1.0 --constraint interval:-0.2,0.2"));
  CHECK(capped["result"]["upper"].get<double>() == doctest::Approx(0.08).epsilon(1e-9));

  Json att = report(run("price --tree " + tree + " --payoff call:K=1.0 --attainability"));
  CHECK(att["result"]["attainability"]["attainable"] == false);
  CHECK(att["result"]["attainability"]["eps_up"].get<double>() > 0.0);

  Json hedged = report(run("hedge --tree " + tree + " --payoff call:K=1.0"));
  CHECK(hedged["result"]["upper_hedge"]["v0"].get<double>() ==
        doctest::Approx(0.05).epsilon(1e-9));
  CHECK(hedged["result"]["upper_hedge"]["holdings"]["0"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-9));

  Json classified = report(run("classify --tree " + tree));
  CHECK(classified["result"]["up_down"] == 1);
  CHECK(classified["result"]["not_zero_neutral"] == 0);
  CHECK(classified["result"]["m_hat"] == 0);
  CHECK(classified["result"]["locally_arbitrage_free"] == true);
  CHECK(classified["result"]["classes"][0] == "up_down");
  CHECK(classified["result"]["classes"][1].is_null());
}

TEST_CASE("tree inputs accept a report envelope, so commands chain unwrapped") {
  std::string paths = put("chain_paths.json",
                          R"({"paths": [[[1.0, 0], [0.9, 1]],
                                        [[1.0, 0], [1.0, 2]],
                                        [[1.0, 0], [1.1, 3]]]})");
  std::string envelope = (kDir / "chain_report.json").string();
  REQUIRE(run("build --paths " + paths + " --out " + envelope).code == 0);
  Json priced = report(run("price --tree " + envelope + " --payoff call:K=1.0"));
  CHECK(priced["result"]["upper"].get<double>() == doctest::Approx(0.05).epsilon(1e-9));
  Json classified = report(run("classify --tree " + envelope));
  CHECK(classified["result"]["up_down"] == 1);
}

TEST_CASE("--out writes the report to a file instead of stdout") {
  std::string tree = trinomial_tree_file();
  std::string outfile = (kDir / "report.json").string();
  RunResult r = run("price --tree " + tree + " --out " + outfile);
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(outfile);
  REQUIRE(in.good());
  Json rep = Json::parse(in);
  CHECK(rep["command"] == "price");
  CHECK(rep["result"]["upper"].get<double>() == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("grid sampling reads TOML and JSON configs interchangeably") {
  std::string toml = put("grid.toml", kGridToml);
  Json full = report(run("sample --config " + toml + " --enumerate"));
  CHECK(full["result"]["nodes"] == 16);
  CHECK(full["result"]["trajectories"] == 12);
  CHECK(full["result"]["config"]["Lambda"] == Json::array({2}));

  std::string json_cfg = put("grid.json", full["result"]["config"].dump());
  Json again = report(run("sample --config " + json_cfg + " --enumerate"));
  CHECK(again["result"]["tree"].dump() == full["result"]["tree"].dump());

  Json s1 = report(run("sample --config " + toml + " --n 5 --seed 9"));
  Json s2 = report(run("sample --config " + toml + " --n 5 --seed 9"));
  CHECK(s1["result"]["tree"].dump() == s2["result"]["tree"].dump());

  Json with_paths = report(run("sample --config " + toml + " --n 3 --seed 2 --emit-paths"));
  CHECK(with_paths["result"]["paths"].is_array());
  CHECK(with_paths["result"]["paths"].size() ==
        with_paths["result"]["trajectories"].get<std::size_t>());

  // Squared-increment variant couples W jumps to price jumps.
  Json bjn = report(run("sample --config " + toml + " --bjn"));
  CHECK(bjn["result"]["nodes"].get<int>() > 1);
}

TEST_CASE("node budget guards every sampling branch through the environment") {
  std::string toml = put("grid_budget.toml", kGridToml);
  RunResult blown = run("sample --config " + toml + " --enumerate", "TRAJPACE_NODE_BUDGET=10");
  CHECK(blown.code == 1);
  RunResult fine = run("sample --config " + toml + " --enumerate", "TRAJPACE_NODE_BUDGET=100");
  CHECK(fine.code == 0);
  RunResult junk = run("sample --config " + toml + " --enumerate", "TRAJPACE_NODE_BUDGET=ten");
  CHECK(junk.code == 2);

  // Monte Carlo sampling honors the same cap and rejects the same junk.
  RunResult mc_blown = run("sample --config " + toml + " --n 50 --seed 1",
                           "TRAJPACE_NODE_BUDGET=3");
  CHECK(mc_blown.code == 1);
  RunResult mc_junk = run("sample --config " + toml + " --n 1", "TRAJPACE_NODE_BUDGET=ten");
  CHECK(mc_junk.code == 2);
}

TEST_CASE("martingale sampler runs from a JSON config") {
  std::string cfg = put("mart.json",
                        R"({"model": {"kind": "binomial", "s0": 100.0, "u": 1.2, "d": 0.8},
                            "t_steps": 2, "exhaustive": true})");
  Json rep = report(run("sample-mart --config " + cfg));
  CHECK(rep["result"]["nodes"] == 7);
  CHECK(rep["result"]["trajectories"] == 4);
  CHECK(rep["result"]["tree"]["nodes"][1].contains("q_prob"));

  std::string mc = put("mart_mc.json",
                       R"({"model": {"kind": "trinomial", "s0": 1.0},
                           "t_steps": 4,
                           "sampling": {"kind": "every_m", "m": 2},
                           "n_paths": 20, "seed": 5})");
  Json sampled = report(run("sample-mart --config " + mc));
  CHECK(sampled["result"]["nodes"].get<int>() > 1);
  CHECK_FALSE(sampled["result"]["tree"]["nodes"][1].contains("q_prob"));
}

TEST_CASE("chart ingestion reports the mapped path and its violations") {
  std::string csv = put("chart.csv", "time,price\n0,1.0\n1,1.05\n2,0.98\n");
  std::string cfg = put("ingest_cfg.json",
                        R"({"s0": 1.0, "delta": 0.01, "beta": 0.01, "p": 10,
                            "N1": 10, "N2": 100, "Lambda": [100]})");
  Json rep = report(run("ingest --csv " + csv + " --config " + cfg));
  CHECK(rep["result"]["k_indices"] == Json::array({0, 5, -2}));
  CHECK(rep["result"]["clipped"] == false);
  CHECK(rep["result"]["terminated"] == false);
  CHECK(rep["result"]["path"][1][1] == 25);
  CHECK(rep["result"]["path"][2][1] == 74);
  // The unterminated mapped path is not a member of the space yet.
  CHECK(rep["result"]["violations"].size() > 0);
  REQUIRE(rep["inputs"].size() == 2);
  CHECK(rep["inputs"][0]["name"] == "csv");
  CHECK(rep["inputs"][1]["name"] == "config");
}

TEST_CASE("stopping-time truncation drops everything past the horizon") {
  std::string paths = put("deep_paths.json",
                          R"({"paths": [[[1.0, 0], [1.1, 1], [1.2, 2]],
                                        [[1.0, 0], [1.1, 1], [1.0, 3]],
                                        [[1.0, 0], [0.9, 4], [1.0, 5]]]})");
  Json built = report(run("build --paths " + paths));
  CHECK(built["result"]["tree"]["nodes"].size() == 6);
  std::string tree = put("deep_tree.json", built["result"]["tree"].dump());

  Json cut = report(run("stopped --tree " + tree + " --horizon fixed:1"));
  CHECK(cut["result"]["tree"]["nodes"].size() == 3);

  Json at_nodes = report(run("stopped --tree " + tree + " --horizon nodes:1"));
  // Stopping at node 1 keeps its sibling's subtree intact: root, node 1, and
  // the untouched down branch of two nodes.
  CHECK(at_nodes["result"]["tree"]["nodes"].size() == 4);
}

TEST_CASE("contrarian descent runs against a stored portfolio") {
  std::string tree = trinomial_tree_file();
  std::string portfolio = put("portfolio.json",
                              R"({"v0": 0.0, "holdings": {"0": 1.0},
                                  "horizon": {"kind": "terminal"},
                                  "liquidated": false})");
  Json rep = report(
      run("contrarian --tree " + tree + " --portfolio " + portfolio + " --epsilon 1.0"));
  CHECK(rep["result"]["found"] == true);
  CHECK(rep["result"]["descent"]["achieved_gain"].get<double>() < 1.0);
  CHECK(rep["result"]["descent"]["path"].size() == 2);

  Json strict = report(
      run("contrarian --tree " + tree + " --portfolio " + portfolio + " --epsilon 0"));
  CHECK(strict["result"]["found"] == true);
  for (const Json& g : strict["result"]["descent"]["step_gains"])
    CHECK(g.get<double>() <= 0.0);
}

TEST_CASE("arbitrage search reports found, none and unknown outcomes") {
  std::string tree = trinomial_tree_file();
  Json none = report(run("arbitrage --tree " + tree));
  CHECK(none["result"]["outcome"] == "none");

  // One-sided node: up moves only, one of them flat.
  std::string paths = put("arb_paths.json",
                          R"({"paths": [[[1.0, 0], [1.0, 1]],
                                        [[1.0, 0], [1.2, 2]]]})");
  Json built = report(run("build --paths " + paths));
  std::string arb_tree = put("arb_tree.json", built["result"]["tree"].dump());
  Json found = report(run("arbitrage --tree " + arb_tree));
  CHECK(found["result"]["outcome"] == "found");
  CHECK(found["result"]["strategy"]["v0"].get<double>() == 0.0);
  CHECK(found["result"]["strategy"]["holdings"]["0"].get<double>() > 0.0);

  Json unknown = report(
      run("arbitrage --tree " + tree + " --constraint grid:0.5,1.0 --budget 1"));
  CHECK(unknown["result"]["outcome"] == "unknown");
}

TEST_CASE("verify subcommand reports suite results and failure counts") {
  Json rep = report(run("verify --suite duality --cases 5 --seed 2"));
  CHECK(rep["result"]["failures"] == 0);
  REQUIRE(rep["result"]["suites"].size() == 1);
  CHECK(rep["result"]["suites"][0]["suite"] == "duality");
  CHECK(rep["result"]["suites"][0]["cases"] == 5);

  RunResult bogus = run("verify --suite bogus");
  CHECK(bogus.code == 2);
}

TEST_CASE("input mistakes exit with the input-error status") {
  std::string tree = trinomial_tree_file();
  CHECK(run("price --tree " + (kDir / "missing.json").string()).code == 2);
  CHECK(run("price --tree " + tree + " --payoff nonsense:x=1").code == 2);
  CHECK(run("price --tree " + tree + " --constraint interval:1").code == 2);
  CHECK(run("price --tree " + tree + " --horizon sometimes").code == 2);

  std::string garbage = put("garbage.json", "{not json");
  CHECK(run("build --paths " + garbage).code == 2);
  CHECK(run("classify --tree " + garbage).code == 2);

  // Missing subcommand / unknown flags are command-line errors from the parser.
  CHECK(run("").code != 0);
  CHECK(run("price --no-such-flag").code != 0);
}
