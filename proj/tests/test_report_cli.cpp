// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qnnae/cli.hpp"
#include "qnnae/dataio.hpp"
#include "qnnae/pqm.hpp"
#include "qnnae/report.hpp"

using namespace qnnae;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("qnnae_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return file(name);
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_of(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

evaluation::ArchitectureReport fake_report(std::size_t hidden, double score, double acc) {
  evaluation::ArchitectureReport r;
  r.architecture = {2, hidden, 1};
  r.score_p0 = score;
  r.mean_accuracy = acc;
  r.accuracy_per_sample = {acc - 0.1, acc + 0.1};
  r.num_samples = 2;
  r.seed = 42;
  r.validation_size = 3;
  r.performances = {{pqm::BitString::parse("110"), 0}, {pqm::BitString::parse("111"), 1}};
  return r;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("architecture CSV") {
    const std::vector reports{fake_report(1, 0.25, 0.5), fake_report(2, 1.0, 0.75)};
    std::ostringstream out;
    report::write_csv(out, reports);
    CHECK(out.str() ==
          "hidden,score_p0,mean_accuracy,min,max,stddev,num_samples,excluded,seed\n"
          "1,0.2500000000,0.5000000000,0.4000000000,0.6000000000,0.1000000000,2,0,42\n"
          "2,1.0000000000,0.7500000000,0.6500000000,0.8500000000,0.1000000000,2,0,42\n");
  }

  TEST_CASE("performance matrix is a pattern memory file") {
    const auto r = fake_report(3, 0.5, 0.5);
    std::stringstream out;
    report::write_performance_matrix(out, r);
    const auto memory = pqm::PatternMemory::parse(out);
    CHECK(memory.size() == 2);
    CHECK(memory.patterns()[0].to_string() == "110");
    CHECK(memory.patterns()[1].to_string() == "111");
  }

  TEST_CASE("scatter plot") {
    const std::vector reports{fake_report(1, 0.2, 0.5), fake_report(2, 0.9, 0.8),
                              fake_report(3, 0.95, 0.85)};
    std::ostringstream out;
    report::PlotOptions opts;
    opts.title = "a <b> & c";
    report::write_scatter_svg(out, reports, opts);
    const auto svg = out.str();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_of(svg, "class=\"marker\"") == 3);
    CHECK(svg.find("a &lt;b&gt; &amp; c") != std::string::npos);
    CHECK(svg.find("mean validation accuracy") != std::string::npos);
    CHECK(svg.find("P(c=0)") != std::string::npos);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("pqm subcommand") {
    TempDir dir;
    const auto single = dir.write("single.txt", "0000\n");
    auto r = run_cli({"pqm", single, "0000"});
    CHECK(r.code == 0);
    CHECK(r.out.find("p0=1.000000") != std::string::npos);

    const auto four = dir.write("four.txt", "# all two-bit strings\n00\n01\n10\n11\n");
    r = run_cli({"pqm", four, "00", "--circuit"});
    CHECK(r.code == 0);
    CHECK(r.out.find("p0=0.500000") != std::string::npos);
    CHECK(r.out.find("circuit_p0=0.500000") != std::string::npos);

    r = run_cli({"pqm", four, "00", "--shots", "1000", "--seed", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("shots=1000") != std::string::npos);
    CHECK(run_cli({"pqm", four, "00", "--shots", "1000", "--seed", "3"}).out == r.out);

    const auto wide = dir.write("wide.txt", "000000000000\n");
    r = run_cli({"pqm", wide, "000000000000", "--circuit"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
    CHECK(run_cli({"pqm", wide, "000000000000"}).code == 0);

    CHECK(run_cli({"pqm", four, "000"}).code == 1);
    CHECK(run_cli({"pqm", dir.file("missing.txt"), "00"}).code == 1);
    CHECK(run_cli({"pqm", four, "0a"}).code == 1);
  }

  TEST_CASE("argument errors and help") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"bogus"}).code == 1);
    CHECK(run_cli({"evaluate", "--samples", "many"}).code == 1);
    const auto help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("sweep") != std::string::npos);
    CHECK(run_cli({"sweep", "--help"}).code == 0);
  }

  TEST_CASE("synth then evaluate") {
    TempDir dir;
    const auto csv = dir.file("xor.csv");
    auto r = run_cli({"synth", "--kind", "xor", "--n", "80", "--seed", "5", "--out", csv});
    REQUIRE(r.code == 0);
    CHECK(dataio::load_csv(csv).size() == 80);
    CHECK(run_cli({"synth", "--kind", "spiral", "--out", csv}).code == 1);
    CHECK(run_cli({"synth", "--kind", "xor"}).code == 1);

    r = run_cli({"evaluate", csv, "--hidden", "2", "--samples", "5", "--seed", "7",
                 "--train-fraction", "0.25"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind(report::kCsvHeader, 0) == 0);
    CHECK(count_of(r.out, "\n") == 2);
    CHECK(r.out.find("\n2,") != std::string::npos);
    CHECK(r.err.find("score_p0=") != std::string::npos);
    const auto again = run_cli({"evaluate", csv, "--hidden", "2", "--samples", "5", "--seed", "7",
                                "--train-fraction", "0.25"});
    CHECK(again.out == r.out);

    const auto out_csv = dir.file("eval.csv");
    const auto perf = dir.file("perf.txt");
    r = run_cli({"evaluate", csv, "--hidden", "2", "--samples", "5", "--seed", "7",
                 "--train-fraction", "0.25", "--out", out_csv, "--performances", perf});
    CHECK(r.code == 0);
    CHECK(slurp(out_csv) == again.out);
    CHECK(pqm::PatternMemory::load(perf).size() == 5);

    CHECK(run_cli({"evaluate", csv, "--hidden", "0"}).code == 1);
    CHECK(run_cli({"evaluate", csv, "--hidden", "2", "--activation", "softsign"}).code == 1);
    CHECK(run_cli({"evaluate", dir.file("nope.csv"), "--hidden", "2"}).code == 1);
  }

  TEST_CASE("exhaustive budget") {
    TempDir dir;
    const auto csv = dir.file("xor.csv");
    REQUIRE(run_cli({"synth", "--n", "40", "--out", csv}).code == 0);
    // hidden=3 on two features: 13 weights, 3^13 points.
    auto r = run_cli({"evaluate", csv, "--hidden", "3", "--exhaustive"});
    CHECK(r.code == 2);
    CHECK(r.err.find("budget") != std::string::npos);
    r = run_cli({"evaluate", csv, "--hidden", "1", "--exhaustive", "--levels=-1,1",
                 "--train-fraction", "0.25"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\n1,") != std::string::npos);
    CHECK(run_cli({"evaluate", csv, "--hidden", "1", "--exhaustive", "--levels=1,1"}).code == 1);
  }

  TEST_CASE("sweep writes CSV and plot") {
    TempDir dir;
    const auto csv = dir.file("g.csv");
    REQUIRE(run_cli({"synth", "--kind", "two_gaussians", "--n", "60", "--out", csv}).code == 0);
    const auto out_csv = dir.file("sweep.csv");
    const auto svg = dir.file("sweep.svg");
    auto r = run_cli({"sweep", csv, "--hidden-range", "1", "4", "--samples", "3",
                      "--train-fraction", "0.2", "--out", out_csv, "--plot", svg});
    REQUIRE(r.code == 0);
    const auto text = slurp(out_csv);
    CHECK(count_of(text, "\n") == 4);
    CHECK(count_of(slurp(svg), "class=\"marker\"") == 3);
    CHECK(count_of(r.err, "hidden=") == 3);
    CHECK(run_cli({"sweep", csv, "--hidden-range", "3", "3"}).code == 1);
  }

  TEST_CASE("defaults and config precedence") {
    TempDir dir;
    auto r = run_cli({"sweep", "--print-config"});
    CHECK(r.code == 0);
    CHECK(r.out.find("alpha=1e-05\n") != std::string::npos);
    CHECK(r.out.find("max_iter=400\n") != std::string::npos);
    CHECK(r.out.find("samples=1000\n") != std::string::npos);
    CHECK(r.out.find("hidden_range=[1,20)\n") != std::string::npos);
    CHECK(r.out.find("train_fraction=0.1\n") != std::string::npos);
    CHECK(r.out.find("seed=42\n") != std::string::npos);

    const auto cfg = dir.write("run.cfg",
                               "# overrides\nsamples = 50\nalpha=0.01\nhidden-range = 2 5\n"
                               "no-stratify = true\nexhaustive = false\n");
    r = run_cli({"sweep", "--config", cfg, "--print-config"});
    CHECK(r.code == 0);
    CHECK(r.out.find("samples=50\n") != std::string::npos);
    CHECK(r.out.find("alpha=0.01\n") != std::string::npos);
    CHECK(r.out.find("hidden_range=[2,5)\n") != std::string::npos);
    CHECK(r.out.find("stratified=false\n") != std::string::npos);
    CHECK(r.out.find("mode=sampled\n") != std::string::npos);

    r = run_cli({"sweep", "--samples", "7", "--config", cfg, "--print-config"});
    CHECK(r.out.find("samples=7\n") != std::string::npos);
    CHECK(r.out.find("alpha=0.01\n") != std::string::npos);

    const auto broken = dir.write("broken.cfg", "samples\n");
    CHECK(run_cli({"sweep", "--config", broken, "--print-config"}).code == 1);
    CHECK(run_cli({"sweep", "--config", dir.file("absent.cfg")}).code == 1);
    CHECK(run_cli({"evaluate", "--config", dir.write("u.cfg", "unknown-key=3\n")}).code == 1);
  }
}
