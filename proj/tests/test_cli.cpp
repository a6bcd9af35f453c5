#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "rmtk/config.hpp"

namespace fs = std::filesystem;
using rmtk::cli::run;

namespace {

fs::path dir() {
  const fs::path d = fs::path(RMTK_TEST_DIR) / "cli";
  fs::create_directories(d);
  return d;
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int s = run(args, out, err);
  return {s, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("parse_invocation") {
    std::ostringstream out, err;
    const auto p = rmtk::cli::parse_invocation({"tail", "--config", "c.toml", "--set", "trials=3", "--seed", "9"}, out, err);
    REQUIRE(p.invocation);
    CHECK(p.invocation->subcommand == "tail");
    CHECK(p.invocation->config_path == "c.toml");
    CHECK(p.invocation->overrides == std::vector<std::string>{"trials=3"});
    CHECK(p.invocation->seed == 9u);
  }

  TEST_CASE("usage errors exit 2") {
    CHECK(invoke({"tail"}).status == 2);
    CHECK(invoke({}).status == 2);
    CHECK(invoke({"nonsense", "--config", "x"}).status == 2);
    const std::string cfg = write_config("u.toml", "n = [8]\ntrials = 2\n");
    const Outcome bad = invoke({"tail", "--config", cfg, "--set", "trials"});
    CHECK(bad.status == 2);
    CHECK(bad.err.find("trials") != std::string::npos);
    const Outcome unknown = invoke({"tail", "--config", cfg, "--set", "bogus_key=1", "--output", (dir() / "u.csv").string()});
    CHECK(unknown.status == 2);
    CHECK(unknown.err.find("bogus_key") != std::string::npos);
    CHECK(invoke({"tail", "--config", (dir() / "missing.toml").string(), "--output", (dir() / "u.csv").string()}).status == 2);
  }

  TEST_CASE("json errors") {
    const std::string cfg = write_config("j.toml", "n = [8]\n");
    const Outcome o = invoke({"tail", "--config", cfg, "--json-errors", "--set", "bogus=1", "--output", (dir() / "j.csv").string()});
    CHECK(o.status == 2);
    const auto j = nlohmann::json::parse(o.err);
    CHECK(j["error"]["exit_status"] == 2);
    CHECK(j["error"]["kind"] == "validation");
  }

  TEST_CASE("overrides reach the resolved config") {
    const std::string cfg = write_config("o.toml", "n = [8]\ntrials = 10\n");
    const fs::path csv = dir() / "o.csv";
    REQUIRE(invoke({"tail", "--config", cfg, "--set", "trials=100", "--output", csv.string()}).status == 0);
    const rmtk::Config resolved = rmtk::Config::load(csv.string() + ".config.toml");
    CHECK(resolved.get_size("trials", 0) == 100);
    CHECK(resolved.get_string("dist", "") == "gaussian");
  }

  TEST_CASE("identity-check") {
    const std::string cfg = write_config("id.toml", "n = 8\ntrials = 5\n");
    const Outcome o = invoke({"identity-check", "--config", cfg});
    CHECK(o.status == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["max_rel_err"].get<double>() <= 1e-8);
    CHECK(j["instances"][0].contains("rel_err"));
  }

  TEST_CASE("uniform anti-concentration with a constant law is flagged") {
    const std::string cfg = write_config("uc.toml", "verifier = \"uniform\"\ndist = \"constant(1)\"\nm = 1000\n");
    const fs::path out = dir() / "uc.json";
    const Outcome o = invoke({"anticonc-verify", "--config", cfg, "--output", out.string()});
    CHECK(o.status == 1);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["flag"] == true);
    CHECK(j["found"] == false);
    for (const char* k : {"lhs", "rhs", "std_errs", "margin", "parameters"}) CHECK(j.contains(k));
  }

  TEST_CASE("tail on a Ginibre config writes the CSV") {
    const std::string cfg = write_config("g.toml", "n = [16]\ntrials = 50\ndist = \"ginibre\"\n");
    const fs::path csv = dir() / "g.csv";
    CHECK(invoke({"tail", "--config", cfg, "--output", csv.string()}).status == 0);
    CHECK(slurp(csv).rfind("n,eps,trials,prob,stderr\n", 0) == 0);
    CHECK(fs::exists(csv.string() + ".config.toml"));
  }

  TEST_CASE("data outputs are byte-identical across worker counts") {
    const std::string cfg = write_config("d.toml", "n = [12, 16]\ntrials = 9\nz = \"0.5+0.5i\"\n[y]\ndist = \"fourpoint\"\n");
    for (const char* q : {"logdet", "distsum", "esd", "extreme-sv"}) {
      const fs::path a = dir() / (std::string("d1_") + q + ".csv");
      const fs::path b = dir() / (std::string("d4_") + q + ".csv");
      REQUIRE(invoke({"universality", "--config", cfg, "--set", std::string("quantity=") + q, "--workers", "1", "--output", a.string()}).status == 0);
      REQUIRE(invoke({"universality", "--config", cfg, "--set", std::string("quantity=") + q, "--workers", "4", "--output", b.string()}).status == 0);
      CHECK(slurp(a) == slurp(b));
      CHECK(slurp(a.string() + ".config.toml") == slurp(b.string() + ".config.toml"));
    }
  }

  TEST_CASE("seed override changes the data") {
    const std::string cfg = write_config("s.toml", "n = 16\ntrials = 3\n");
    const fs::path a = dir() / "s1.csv", b = dir() / "s2.csv";
    REQUIRE(invoke({"esd", "--config", cfg, "--seed", "1", "--output", a.string()}).status == 0);
    REQUIRE(invoke({"esd", "--config", cfg, "--seed", "2", "--output", b.string()}).status == 0);
    CHECK(slurp(a) != slurp(b));
  }

  TEST_CASE("data commands require --output") {
    const std::string cfg = write_config("r.toml", "n = [8]\n");
    CHECK(invoke({"tail", "--config", cfg}).status == 2);
  }

  TEST_CASE("numerical failure exits 3") {
    const std::string cfg = write_config("ns.toml", "n = 4\ntrials = 2\nscale = 0\n");
    const Outcome o = invoke({"identity-check", "--config", cfg, "--json-errors"});
    CHECK(o.status == 3);
    CHECK(nlohmann::json::parse(o.err)["error"]["kind"] == "numerical");
  }

  TEST_CASE("crlcd and sphere-probe reports") {
    const std::string cfg = write_config("c.toml", "dist = \"rademacher\"\nmc_samples = 4000\n");
    const Outcome o = invoke({"crlcd", "--config", cfg});
    CHECK(o.status == 0);
    CHECK(nlohmann::json::parse(o.out)["value"].get<double>() > 0.0);

    const std::string sp = write_config("sp.toml", "probe = \"crlcd-scan\"\nn = 16\ndist = \"fourpoint\"\nvector_samples = 2\n");
    const Outcome s = invoke({"sphere-probe", "--config", sp, "--audit"});
    CHECK(s.status == 0);
    const auto j = nlohmann::json::parse(s.out);
    CHECK(j["entries"][0].contains("v"));
  }
}
