#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const char* cli_path() { return std::getenv("SPACL_CLI"); }

int run(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("spacl_cli_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("cli: generate is reproducible and fit/eval close the loop") {
  if (!cli_path()) {
    MESSAGE("SPACL_CLI not set; skipping CLI tests");
    return;
  }
  TempDir dir;
  const std::string prefix = (dir.path / "g").string();
  const std::string gen_args = "generate --n 300 --k 3 --alpha 0.5,0.5,0.5 --rho 0.2 "
                               "--b-diag 1.0 --b-offdiag 0.05 --seed 9 --out-prefix ";

  REQUIRE(run(gen_args + prefix) == 0);
  const std::string edges1 = slurp(prefix + ".edges");
  const std::string truth1 = slurp(prefix + ".truth.csv");

  const std::string prefix2 = (dir.path / "h").string();
  REQUIRE(run(gen_args + prefix2) == 0);
  CHECK(slurp(prefix2 + ".edges") == edges1);
  CHECK(slurp(prefix2 + ".truth.csv") == truth1);

  const std::string fit_prefix = (dir.path / "fit").string();
  REQUIRE(run("fit " + prefix + ".edges --k 3 --out-prefix " + fit_prefix) == 0);
  CHECK(std::filesystem::exists(fit_prefix + ".theta.csv"));
  CHECK(std::filesystem::exists(fit_prefix + ".fit.json"));

  CHECK(run("eval " + prefix + ".truth.csv " + prefix + ".truth.csv --metric all") == 0);
}

TEST_CASE("cli: exit codes for I/O errors") {
  if (!cli_path()) return;
  CHECK(run("fit /nonexistent/file.edges --k 3") == 2);
  CHECK(run("eval /nope.csv /nada.csv") == 2);
  CHECK(run("experiment bogus-preset") == 2);
  CHECK(run("definitely-not-a-command") == 2);
}

TEST_CASE("cli: full-scale generation config") {
  // n=5000, alpha=0.4, B=(1-q)I+q11' with q=0.001, rho=0.007; the file
  // should carry all 5000 nodes and land in the expected degree window.
  if (!cli_path()) return;
  TempDir dir;
  const std::string prefix = (dir.path / "big").string();
  REQUIRE(run("generate --n 5000 --k 3 --alpha 0.4,0.4,0.4 --b-diag 1.0 "
              "--b-offdiag 0.001 --rho 0.007 --seed 1 --out-prefix " + prefix) == 0);
  const std::string edges = slurp(prefix + ".edges");
  std::int64_t max_id = 0, count = 0;
  std::istringstream ss(edges);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::int64_t u = 0, v = 0;
    std::istringstream ls(line);
    ls >> u >> v;
    max_id = std::max({max_id, u, v});
    ++count;
  }
  CHECK(max_id == 4999);
  const double mean_degree = 2.0 * static_cast<double>(count) / 5000.0;
  CHECK(mean_degree >= 7.0);
  CHECK(mean_degree <= 13.0);
}

TEST_CASE("cli: eval of identical files is exact") {
  if (!cli_path()) return;
  TempDir dir;
  const std::string prefix = (dir.path / "e").string();
  REQUIRE(run("generate --n 120 --k 3 --alpha 0.6,0.6,0.6 --rho 0.3 --b-diag 1 "
              "--b-offdiag 0.1 --seed 5 --out-prefix " + prefix) == 0);
  const std::string csv = (dir.path / "self.csv").string();
  REQUIRE(run("eval " + prefix + ".truth.csv " + prefix + ".truth.csv --metric all --csv " +
              csv) == 0);
  const std::string scores = slurp(csv);
  CHECK(scores.find(",frob,0\n") != std::string::npos);
  CHECK(scores.find(",rowwise,0\n") != std::string::npos);
  CHECK(scores.find(",rc,1\n") != std::string::npos);
}

TEST_CASE("cli: single-community generation") {
  if (!cli_path()) return;
  TempDir dir;
  const std::string prefix = (dir.path / "k1").string();
  REQUIRE(run("generate --n 50 --k 1 --alpha 1.0 --b-diag 1.0 --b-offdiag 0 --rho 0.3 "
              "--seed 2 --out-prefix " + prefix) == 0);
  const std::string truth = slurp(prefix + ".truth.csv");
  CHECK(truth.find("node,c0") != std::string::npos);
}

TEST_CASE("cli: noiseless fixture recovers exactly") {
  // Tiny alpha collapses every membership row to a basis vector, and rho=1
  // with B=I makes the sampled graph equal its population matrix: two
  // disjoint cliques, recoverable without error.
  if (!cli_path()) return;
  TempDir dir;
  const std::string prefix = (dir.path / "pure").string();
  REQUIRE(run("generate --n 60 --k 2 --alpha 1e-9,1e-9 --b-diag 1 --b-offdiag 0 "
              "--rho 1.0 --seed 11 --out-prefix " + prefix) == 0);
  const std::string fit_prefix = (dir.path / "fit").string();
  REQUIRE(run("fit " + prefix + ".edges --k 2 --no-prune --out-prefix " + fit_prefix) == 0);

  const std::string csv = (dir.path / "scores.csv").string();
  REQUIRE(run("eval " + fit_prefix + ".theta.csv " + prefix + ".truth.csv --metric all "
              "--csv " + csv) == 0);
  const std::string scores = slurp(csv);
  CHECK(scores.find(",frob,0\n") != std::string::npos);
  CHECK(scores.find(",rc,1\n") != std::string::npos);
}

TEST_CASE("cli: checker subcommands run end to end") {
  if (!cli_path()) return;
  TempDir dir;
  const std::string prefix = (dir.path / "c").string();
  REQUIRE(run("generate --n 80 --k 2 --alpha 0.5,0.5 --b \"1,0.2;0.2,0.6\" --rho 0.4 "
              "--seed 3 --out-prefix " + prefix) == 0);
  CHECK(run("check-identifiability --theta " + prefix + ".truth.csv --b \"1,0.2;0.2,0.6\" "
            "--rho 0.4") == 0);
  CHECK(run("check-assumptions --n 5000 --k 3 --alpha 0.4,0.4,0.4 --rho 0.2 --b-diag 1 "
            "--b-offdiag 0.05") == 0);
}

TEST_CASE("cli: experiment emits a parseable CSV") {
  if (!cli_path()) return;
  TempDir dir;
  REQUIRE(run("experiment fig2a --n 250 --seeds 2 --out " + dir.path.string()) == 0);
  const std::string csv = slurp(dir.path / "fig2a.csv");
  CHECK(csv.find("# preset=fig2a") != std::string::npos);
  CHECK(csv.find("sweep,seed,variant,metric,value") != std::string::npos);
}
