#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path& tmp_dir() {
  static const fs::path dir = [] {
    fs::path p(RAGLSA_TEST_TMP);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with `args`, capturing stdout; stderr is discarded.
Run cli(const std::string& args) {
  const fs::path out = tmp_dir() / "stdout.txt";
  const std::string cmd = std::string("\"") + RAGLSA_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(out)};
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  return {};
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(cli("verify --trials 4000").code == 0);
  CHECK(cli("verify --trials 4000 --set mc_k=1e-15").code == 2);
  CHECK(cli("optimal-n --set regime=mixture --set c_s=2 --set c_l=1").code == 1);
  CHECK(cli("sweep --axis n").code == 1);
  CHECK(cli("sweep --axis n --values ''").code == 1);
  CHECK(cli("sweep --axis bogus --values 1:3").code == 1);
  CHECK(cli("optimal-n --set nonsense=1").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("verify --config /nonexistent/raglsa.cfg").code == 3);
  CHECK(cli("sweep --axis n --values 0:2 --out /nonexistent/dir/out.csv").code == 3);
  CHECK(cli("moments-check --kernel sixth --trials 5000").code == 0);
  CHECK(cli("moments-check --kernel nope").code == 1);
}

TEST_CASE("settings precedence: flags over --set over file") {
  const fs::path cfg = tmp_dir() / "prec.cfg";
  std::ofstream(cfg) << "# comment\nm = 20\nd = 3\nsigma2_rag = 0.05\n";
  const std::string base = "optimal-n --config \"" + cfg.string() + "\"";

  Run r = cli(base);
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out, "m") == "20");
  CHECK(value_of(r.out, "d") == "3");

  r = cli(base + " --set m=24");
  CHECK(value_of(r.out, "m") == "24");
  CHECK(value_of(r.out, "sigma2_rag") == "0.05");

  const fs::path csv = tmp_dir() / "prec.csv";
  const fs::path sweep_cfg = tmp_dir() / "prec_sweep.cfg";
  std::ofstream(sweep_cfg) << "axis = m\nvalues = 4,8\nseed = 5\n";
  r = cli("sweep --config \"" + sweep_cfg.string() + "\" --set seed=6 --seed 7 --values 2,3 --axis n --out \"" +
          csv.string() + "\"");
  REQUIRE(r.code == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("# seed=7\n") != std::string::npos);
  CHECK(text.find("# values=2,3\n") != std::string::npos);
  CHECK(text.find("# axis=n\n") != std::string::npos);
}

TEST_CASE("sweep output does not depend on --workers") {
  const fs::path a = tmp_dir() / "w1.csv", b = tmp_dir() / "w8.csv";
  const std::string common = "sweep --axis n --values 0:5 --mode both --trials 4000 --seed 11";
  REQUIRE(cli(common + " --workers 1 --out \"" + a.string() + "\"").code == 0);
  REQUIRE(cli(common + " --workers 8 --out \"" + b.string() + "\"").code == 0);
  CHECK(!slurp(a).empty());
  CHECK(slurp(a) == slurp(b));
  // stdout carries the same bytes when --out is absent.
  CHECK(cli(common + " --workers 3").out == slurp(a));
}

TEST_CASE("JSON sweep output") {
  const Run r = cli("sweep --axis n --values 0,4 --format json");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"tool\": \"raglsa\"") != std::string::npos);
  CHECK(r.out.find("\"rows\"") != std::string::npos);
}

TEST_CASE("optimal-n") {
  const Run a = cli("optimal-n --set m=32 --set sigma2=0.5 --set sigma2_rag=0.02 --set delta2=0");
  const Run b = cli("optimal-n --set m=32 --set sigma2=0.5 --set sigma2_rag=0.02 --set delta2=0");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(std::stod(value_of(a.out, "n_star")) > 0);
  CHECK(a.out.find("(confirmed)") != std::string::npos);

  // Retrieval noise at least d * |beta|^2 leaves nothing to gain.
  const Run c = cli("optimal-n --set d=4 --set sigma2_rag=20");
  REQUIRE(c.code == 0);
  CHECK(value_of(c.out, "n_star") == "0");
  CHECK(value_of(c.out, "improvement") == "0");
}
