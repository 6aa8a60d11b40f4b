#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "mplace/cli.hpp"
#include "mplace/io.hpp"
#include "support.hpp"

using namespace mplace;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "mplace_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string p(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("generate, place and check a tiny benchmark") {
  REQUIRE(run({"generate", "--seed", "1", "--profile", "tiny", "--out", p("t1")}).code == 0);
  const std::vector<std::string> place{"place", "--layout", p("t1.layout"), "--design", p("t1.design"),
                                       "--out", p("t1.pl"), "--seed", "1", "--trace", p("t1.csv"), "--plot", p("t1.svg")};
  const Run a = run(place);
  INFO(a.err);
  REQUIRE(a.code == 0);
  CHECK(fs::exists(p("t1.pl.manifest.json")));
  CHECK(read_file(p("t1.svg")).rfind("<svg", 0) == 0);
  CHECK(read_file(p("t1.csv")).rfind("iter,", 0) == 0);

  const Run c = run({"check", "--layout", p("t1.layout"), "--design", p("t1.design"), "--placement", p("t1.pl")});
  CHECK(c.code == 0);
  CHECK(c.out.find("violations 0") != std::string::npos);

  // same seed, byte-identical files
  const std::string first = read_file(p("t1.pl")), trace = read_file(p("t1.csv"));
  REQUIRE(run(place).code == 0);
  CHECK(read_file(p("t1.pl")) == first);
  CHECK(read_file(p("t1.csv")) == trace);

  SUBCASE("a mutated placement fails the check") {
    const FpgaLayout layout = parse_layout(read_file(p("t1.layout")));
    const Design d = parse_design(read_file(p("t1.design")), layout);
    Placement pl = parse_placement(first, d);
    int a = -1, b = -1;
    for (std::size_t i = 0; i < d.instances.size(); ++i) {
      if (d.instances[i].resource != ResourceType::DSP || d.instances[i].shape >= 0) continue;
      (a < 0 ? a : b) = static_cast<int>(i);
      if (b >= 0) break;
    }
    REQUIRE(b >= 0);
    pl.positions[b] = pl.positions[a];
    write_file_atomic(p("bad.pl"), write_placement(d, pl));
    const Run r = run({"check", "--layout", p("t1.layout"), "--design", p("t1.design"), "--placement", p("bad.pl")});
    CHECK(r.code != 0);
    CHECK(r.out.find("violations 0") == std::string::npos);
  }

  SUBCASE("legalize and plot on their own") {
    const Run l = run({"legalize", "--layout", p("t1.layout"), "--design", p("t1.design"), "--placement", p("t1.pl"),
                       "--out", p("t1.lg.pl"), "--report", p("t1.report.csv")});
    CHECK(l.code == 0);
    CHECK(read_file(p("t1.lg.pl")) == first);
    CHECK(run({"plot", "--layout", p("t1.layout"), "--design", p("t1.design"), "--placement", p("t1.pl"), "--out",
               p("t1b.svg")})
              .code == 0);
  }
}

TEST_CASE("usage errors") {
  const Run r = run({"place", "--design", "x.design", "--out", p("never.pl")});
  CHECK(r.code == 1);
  CHECK(r.err.find("--layout") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);

  write_file_atomic(p("broken.layout"), "GRID 2 2\nSITETYPE C 1 1 LUT:1\nCOLUMN 0 X\n");
  write_file_atomic(p("empty.design"), "");
  const Run e = run({"place", "--layout", p("broken.layout"), "--design", p("empty.design"), "--out", p("b.pl")});
  CHECK(e.code == 1);
  CHECK(e.err.find("3") != std::string::npos);
  CHECK(fs::exists(p("b.pl.manifest.json")));
}

TEST_CASE("help lists every flag") {
  const Run h = run({"place", "--help"});
  CHECK(h.code == 0);
  for (const char* flag : {"--layout", "--design", "--out", "--seed", "--config", "--trace", "--plot"})
    CHECK(h.out.find(flag) != std::string::npos);
  const Run s = run({"score", "--help"});
  for (const char* flag : {"--metrics", "--hidden-weight", "--out"}) CHECK(s.out.find(flag) != std::string::npos);
}

TEST_CASE("eval prints hpwl") {
  write_file_atomic(p("e.layout"), write_layout(testing::fabric()));
  write_file_atomic(p("e.design"), "INST a LUT\nINST b LUT\nNET n a:0:0 b:0:0\n");
  write_file_atomic(p("e.pl"), "a 0 0\nb 3 4\n");
  const Run r = run({"eval", "--layout", p("e.layout"), "--design", p("e.design"), "--placement", p("e.pl")});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("total 7\n", 0) == 0);
  CHECK(r.out.find("net n 7") != std::string::npos);
}

TEST_CASE("score a metrics file") {
  write_file_atomic(p("m.txt"), "DESIGN Design_10 t_mp=1.43 t_pr=0.5 l_short=1,2,3,3 l_global=0,0,0,0 dri=6\n");
  const Run r = run({"score", "--metrics", p("m.txt")});
  CHECK(r.code == 0);
  CHECK(r.out.find("Design_10,1,0.5,1,6,7,3.5,0") != std::string::npos);
  CHECK(r.out.find("# weighted_final 12.25") != std::string::npos);
  CHECK(run({"score", "--metrics", p("m.txt"), "--hidden-weight", "0"}).code == 1);
}

TEST_CASE("config overrides") {
  REQUIRE(run({"generate", "--seed", "2", "--profile", "tiny", "--out", p("t2")}).code == 0);
  write_file_atomic(p("bad.json"), R"({"max_iter": 5})");
  CHECK(run({"place", "--layout", p("t2.layout"), "--design", p("t2.design"), "--out", p("t2.pl"), "--config",
             p("bad.json")})
            .code == 1);
  write_file_atomic(p("ok.json"), R"({"max_iters": 0})");
  const Run r = run({"place", "--layout", p("t2.layout"), "--design", p("t2.design"), "--out", p("t2.pl"), "--config",
                     p("ok.json")});
  INFO(r.err);
  CHECK((r.code == 0 || r.code == 2));
  CHECK(read_file(p("t2.pl.manifest.json")).find("\"max_iters\"") != std::string::npos);
}
