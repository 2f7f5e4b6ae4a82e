#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(NETLOC_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1))
    ++n;
  return n;
}

const std::string kData = NETLOC_TEST_DATA_DIR;
const std::string kPair = "2 2 1\n1 2 3.996001 4.004001\n";  // distance 2 +/- 1e-3

}  // namespace

TEST_CASE("generate writes both files and reports the edge count", "[cli]") {
  const Run r = run("generate --n 10 --density 0.62 --noise 0.15 --seed 7 "
                    "--instance gen_a.txt --truth gen_a_truth.txt");
  REQUIRE(r.code == 0);
  CHECK(r.out == "density 0.6222222222 edges 28\n");
  const std::string inst = slurp("gen_a.txt");
  CHECK(inst.rfind("10 2 28\n", 0) == 0);
  CHECK(count(inst, "\n") == 29);
  CHECK(count(slurp("gen_a_truth.txt"), "\n") == 10);

  REQUIRE(run("generate --n 10 --density 0.62 --noise 0.15 --seed 7 "
              "--instance gen_b.txt --truth gen_b_truth.txt")
              .code == 0);
  CHECK(slurp("gen_b.txt") == inst);
  CHECK(slurp("gen_b_truth.txt") == slurp("gen_a_truth.txt"));
}

TEST_CASE("flag validation exits with code 2", "[cli]") {
  CHECK(run("generate --n 1 --instance x.txt --truth y.txt").code == 2);
  CHECK(run("generate --density 1.5 --instance x.txt --truth y.txt").code == 2);
  CHECK(run("sweep --densities 0.5 --trials 0").code == 2);
  CHECK(run("sweep --densities 0.9,0.5 --trials 1").code == 2);
  CHECK(run("bogus").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("solve on the two-node instance", "[cli]") {
  spit("pair.txt", kPair);
  const Run r = run("solve pair.txt --out pair_est.txt --trace pair_trace");
  REQUIRE(r.code == 0);
  std::istringstream summary(r.out);
  double c0 = 0.0, residual = 1.0;
  std::size_t iterations = 0;
  std::string feasible;
  summary >> c0 >> residual >> iterations >> feasible;
  CHECK(std::abs(c0 - 2.0) <= 0.1);
  CHECK(std::abs(residual) <= 1e-2);
  CHECK(feasible == "true");
  CHECK(count(slurp("pair_est.txt"), "\n") == 2);
  CHECK(slurp("pair_trace_solver.csv").rfind("iter,mu,smoothed_value,grad_norm,step\n", 0) == 0);
  CHECK(slurp("pair_trace_root.csv").rfind("step,c_lo,c_hi,c_mid,psi_upper,sign\n", 0) == 0);

  REQUIRE(run("solve pair.txt --out pair_est2.txt").code == 0);
  CHECK(slurp("pair_est2.txt") == slurp("pair_est.txt"));
}

TEST_CASE("solve error exit codes", "[cli]") {
  spit("broken.txt", "2 2 1\n1 2 oops 4\n");
  CHECK(run("solve broken.txt --out o.txt").code == 3);
  CHECK(run("solve missing_file.txt --out o.txt").code == 3);

  spit("triangle.txt", "3 2 3\n1 2 1 1\n2 3 1 1\n1 3 25 25\n");
  CHECK(run("solve triangle.txt --out o.txt --multistart 2 --max-bracket-steps 5").code == 4);

  // The bracket [1.5, 2.5] is already narrower than c_tol and neither end is
  // within the tight root band.
  spit("pair.txt", kPair);
  CHECK(run("solve pair.txt --out o.txt --c-init 0.5 --c-tol 1000 --root-tol 1e-4").code == 5);

  CHECK(run("solve pair.txt --out o.txt --sigma1 0.7").code == 2);
}

TEST_CASE("config files fill flags that are absent", "[cli]") {
  spit("pair.txt", kPair);
  spit("bad.ini", "[solve]\nsigma1 = 0.7\n");
  CHECK(run("solve pair.txt --out o.txt --config bad.ini").code == 2);
  CHECK(run("solve pair.txt --out o.txt --config bad.ini --sigma1 0.1").code == 0);
  spit("typo.ini", "[solve]\nsigmaone = 0.1\n");
  CHECK(run("solve pair.txt --out o.txt --config typo.ini").code == 2);
}

TEST_CASE("evaluate reports offsets and writes plots", "[cli]") {
  const std::string truth = kData + "/ten_node_truth.txt";
  const std::string est = kData + "/ten_node_estimate.txt";
  const Run same = run("evaluate " + truth + " " + truth);
  REQUIRE(same.code == 0);
  CHECK(same.out.rfind("mean_error 0\nmax_error 0\n", 0) == 0);

  const Run raw = run("evaluate " + truth + " " + est +
                      " --no-align --svg ten.svg --scatter ten.csv");
  REQUIRE(raw.code == 0);
  CHECK(raw.out.find("max_error 6.843019043\n") != std::string::npos);
  CHECK(raw.out.find("offset 7 6.843019043\n") != std::string::npos);
  const std::string svg = slurp("ten.svg");
  CHECK(count(svg, "<circle class=\"truth\"") == 10);
  CHECK(count(svg, "<path class=\"estimate\"") == 10);
  CHECK(count(slurp("ten.csv"), "\n") == 11);

  spit("short.txt", "1 0 0\n2 1 1\n");
  CHECK(run("evaluate " + truth + " short.txt").code == 3);
}

TEST_CASE("sweep output is deterministic", "[cli]") {
  const std::string flags = "sweep --densities 0.6,0.9 --trials 2 --n 5 --noise 0.1 --seed 4 "
                            "--multistart 2";
  const Run a = run(flags);
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("density,avg_mean_error,avg_max_error,trials,failures\n", 0) == 0);
  CHECK(count(a.out, "\n") == 3);
  REQUIRE(run(flags + " --jobs 2 --out sweep_b.csv").code == 0);
  CHECK(slurp("sweep_b.csv") == a.out);
}
