#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "msvcj/config.hpp"
#include "msvcj/errors.hpp"

using namespace msvcj;
using nlohmann::json;

namespace {

const std::string kCli = MSVCJ_CLI_PATH;
const std::string kConfigs = MSVCJ_CONFIG_DIR;

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>cli_stderr.txt").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json table2_doc() { return json::parse(slurp(kConfigs + "/table2_european.json")); }

void write(const std::string& path, const json& doc) { std::ofstream(path) << doc.dump(2); }

}  // namespace

TEST_SUITE("config") {

TEST_CASE("round trip through JSON") {
  for (const char* name : {"table2_european.json", "bermudan_mssv.json", "bermudan_mssvcj.json",
                           "ibm_calibration.json"}) {
    CAPTURE(name);
    const auto cfg = load_config(kConfigs + "/" + name);
    const json once = to_json(cfg);
    const json twice = to_json(parse_config(once));
    CHECK(once == twice);
  }
  const auto cfg = parse_config(table2_doc());
  CHECK(cfg.model.kind() == ModelSpec::Kind::ms_svcj);
  CHECK(cfg.model.chain.initial_state() == 1);
  CHECK(cfg.model.jump->max_jumps == 10);
  CHECK(cfg.numerics.orders.hermite == 40);

  // An emitted result document is read through its "config" object.
  json wrapped{{"price", 1.0}, {"config", to_json(cfg)}};
  CHECK(to_json(parse_config(wrapped)) == to_json(cfg));
}

TEST_CASE("model kind follows the blocks present") {
  json d = table2_doc();
  d.erase("pea");
  CHECK(parse_config(d).model.kind() == ModelSpec::Kind::ms_svj);
  d.erase("jumps");
  CHECK(parse_config(d).model.kind() == ModelSpec::Kind::ms_sv);
}

TEST_CASE("volatility-level chains") {
  json d = table2_doc();
  d["chain"].erase("states_var");
  d["chain"].erase("initial_var");
  d["chain"]["states_vol"] = {0.1, 0.2, 0.3, 0.4};
  d["chain"]["initial_vol"] = 0.2;
  const auto cfg = parse_config(d);
  CHECK(cfg.model.chain.variances()[1] == doctest::Approx(0.04));
  CHECK(cfg.model.chain.initial_state() == 1);
}

TEST_CASE("invalid documents name the problem") {
  auto fails_with = [](json d, const std::string& needle) {
    try {
      parse_config(d);
      return false;
    } catch (const ValidationError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
  };
  json d = table2_doc();
  d["chain"]["states_vol"] = {0.1, 0.2, 0.3, 0.4};
  CHECK(fails_with(d, "exactly one"));

  d = table2_doc();
  d.erase("jumps");
  CHECK(fails_with(d, "pea block needs a jumps block"));

  d = table2_doc();
  d["market"]["kind"] = "straddle";
  CHECK(fails_with(d, "market.kind"));

  d = table2_doc();
  d["chain"]["initial_var"] = 0.05;
  CHECK(fails_with(d, "initial level"));

  d = table2_doc();
  d["chain"]["transition"][2][0] = 1.05;
  CHECK(fails_with(d, "row 2"));

  d = table2_doc();
  d["market"].erase("strike");
  CHECK(fails_with(d, "market.strike"));

  d = table2_doc();
  d["jumps"]["lambda"] = "three";
  CHECK(fails_with(d, "jumps.lambda"));
}

}

TEST_SUITE("cli") {

TEST_CASE("price-eu reproduces the Table 2 price and its own config") {
  REQUIRE(run("price-eu --config " + kConfigs + "/table2_european.json --out cli_eu.json") == 0);
  const json out = json::parse(slurp("cli_eu.json"));
  CHECK(std::abs(out["price"].get<double>() - 0.9696) <= 1e-3);
  CHECK(out["support_size"] == 88);
  REQUIRE(run("price-eu --config cli_eu.json --out cli_eu2.json") == 0);
  CHECK(json::parse(slurp("cli_eu2.json"))["price"] == out["price"]);
}

TEST_CASE("aiv CSV output") {
  REQUIRE(run("aiv --config " + kConfigs + "/table2_european.json --csv cli_aiv.csv --out cli_aiv.json") == 0);
  std::ifstream in("cli_aiv.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "v,prob");
  double prev = -1.0, total = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double v = std::stod(line.substr(0, comma));
    total += std::stod(line.substr(comma + 1));
    CHECK(v > prev);
    prev = v;
    ++rows;
  }
  CHECK(rows == 88);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  const json meta = json::parse(slurp("cli_aiv.json"));
  CHECK(meta["L"] == 30);
  CHECK(meta["m"] == 4);
}

TEST_CASE("exit codes") {
  json bad = table2_doc();
  bad["chain"]["transition"][2] = {0.5, 0.5, 0.5, 0.5};
  write("cli_bad.json", bad);
  CHECK(run("price-eu --config cli_bad.json") == 2);
  CHECK(slurp("cli_stderr.txt").find("row 2") != std::string::npos);

  CHECK(run("price-eu --config " + kConfigs + "/table2_european.json --bogus") == 2);
  CHECK(run("price-eu") == 2);

  // Six incommensurate states over 200 steps exceed the 1e8 triple cap.
  json big = table2_doc();
  big.erase("jumps");
  big.erase("pea");
  big["chain"]["states_var"] = json::array();
  for (int p : {2, 3, 5, 7, 11, 13}) big["chain"]["states_var"].push_back(0.01 * std::sqrt(p));
  big["chain"]["transition"] = json::array();
  for (int i = 0; i < 6; ++i) big["chain"]["transition"].push_back(std::vector<double>(6, 1.0 / 6));
  big["chain"]["initial_var"] = big["chain"]["states_var"][0];
  big["chain"]["tau"] = 0.01;
  big["market"]["maturity"] = 2.0;
  write("cli_big.json", big);
  CHECK(run("aiv --config cli_big.json") == 3);
  CHECK(slurp("cli_stderr.txt").find("574481758200") != std::string::npos);
}

TEST_CASE("bench: CE agrees with RR where feasible and is skipped past the cap") {
  REQUIRE(run("bench --m 2 4 --ce-L 15 16 --rr-L 15 16 --repeats 1 --out cli_bench.csv "
              "--summary cli_bench.json") == 0);
  const std::string csv = slurp("cli_bench.csv");
  CHECK(csv.find("ce,4,16,skipped,1,oom") != std::string::npos);
  CHECK(csv.find("ce,2,15,skipped") == std::string::npos);
  const json s = json::parse(slurp("cli_bench.json"));
  bool saw = false;
  for (const auto& e : s["ce_rr_equal"]) {
    CHECK(e["equal"] == true);
    if (e["m"] == 2 && e["L"] == 15) saw = true;
  }
  CHECK(saw);
}

TEST_CASE("bias command") {
  REQUIRE(run("bias --config " + kConfigs + "/table2_european.json --out cli_bias.json") == 0);
  const json out = json::parse(slurp("cli_bias.json"));
  CHECK(out["expected_bias"].get<double>() == doctest::Approx(2.07e-6).epsilon(0.01));
}

}
