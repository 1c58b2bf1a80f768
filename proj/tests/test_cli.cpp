#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "clickstream/session_io.hpp"

using namespace clickstream;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "clickstream");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("clickstream-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Last stdout line as JSON.
nlohmann::json summary(const std::string& out) {
  auto end = out.find_last_not_of('\n');
  auto start = out.rfind('\n', end);
  return nlohmann::json::parse(out.substr(start == std::string::npos ? 0 : start + 1,
                                          end - (start == std::string::npos ? 0 : start + 1) + 1));
}

/// 60 clients with one 15-event session each; every third ends in a buy.
void write_raw_log(const fs::path& p) {
  static const char* kinds[] = {"view", "detail", "add", "remove", "click"};
  std::ofstream out(p);
  out << "client_id\tuser_id\tsession_id\ttimestamp\tevent_id\tevent_type\tproduct_id\tproduct_meta\n";
  for (int c = 0; c < 60; ++c) {
    for (int t = 0; t < 15; ++t) {
      const bool buy = c % 3 == 0 && t == 14;
      out << "c" << c << "\t\ts" << c << '\t' << 1000 * (t + 1) << "\te" << c << "-" << t << '\t'
          << (buy ? "buy" : kinds[(c * t + t) % 5]) << "\t\t\n";
    }
  }
  out << "broken line\n";
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"sessionize", "--output", "x"}).code == 2);
  CHECK(run({"generate", "--n", "5", "--output", "x", "--bogus"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"train", "--input", "x", "--output", "y", "--model", "svm"}).code == 2);
  CHECK(run({"evaluate", "--input", "x", "--runs", "0"}).code == 2);
}

TEST_CASE("every subcommand has help") {
  for (const char* cmd : {"sessionize", "prepare", "stats", "generate", "train", "evaluate",
                          "compare", "gradcheck", "sweep"}) {
    const auto r = run({cmd, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("data errors exit 1") {
  const auto dir = scratch("data-errors");
  CHECK(run({"prepare", "--input", (dir / "missing.txt").string(), "--output", dir.string()}).code == 1);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK(run({"generate", "--spec", (dir / "bad.json").string(), "--n", "3", "--output",
             (dir / "o.txt").string()})
            .code == 1);
  std::ofstream(dir / "bad.tsv") << "client_id\tnope\n";
  CHECK(run({"sessionize", "--input", (dir / "bad.tsv").string(), "--output",
             (dir / "s.txt").string()})
            .code == 1);
}

TEST_CASE("generate: balanced corpus, config echo, byte-identical reruns") {
  const auto dir = scratch("generate");
  const auto a = run({"generate", "--n", "14352", "--seed", "7", "--output", (dir / "a.txt").string()});
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("# generate {", 0) == 0);
  const auto s = summary(a.out);
  CHECK(s["labels"]["BUY"] == 7176);
  CHECK(s["labels"]["NOBUY"] == 7176);
  CHECK(s["oracle_accuracy"].get<double>() > 0.5);
  const auto b = run({"generate", "--n", "14352", "--seed", "7", "--output", (dir / "b.txt").string()});
  CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
  CHECK(read_sessions_file(dir / "a.txt").size() == 14352);
}

TEST_CASE("gradcheck passes") {
  const auto r = run({"gradcheck", "--n", "20", "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(summary(r.out)["max_rel_error"].get<double>() < 1e-4);
}

TEST_CASE("pipeline: sessionize, prepare, stats, train, evaluate, compare") {
  const auto dir = scratch("pipeline");
  write_raw_log(dir / "raw.tsv");
  auto r = run({"sessionize", "--input", (dir / "raw.tsv").string(), "--output",
                (dir / "sessions.txt").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("raw.tsv:902:") != std::string::npos);
  CHECK(summary(r.out)["sessions"] == 60);
  CHECK(summary(r.out)["labels"]["BUY"] == 20);

  r = run({"prepare", "--input", (dir / "sessions.txt").string(), "--output",
           (dir / "corpus").string(), "--seed", "1"});
  REQUIRE(r.code == 0);
  CHECK(summary(r.out)["total"] == 40);
  CHECK(fs::exists(dir / "corpus" / "prep.json"));

  r = run({"stats", "--input", (dir / "sessions.txt").string(), "--output", (dir / "stats").string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"stats.json", "events.csv", "transitions_all.csv", "transitions_buy.csv",
                        "transitions_nobuy.csv", "transitions_diff.csv"}) {
    CHECK(fs::exists(dir / "stats" / f));
  }

  r = run({"train", "--input", (dir / "corpus").string(), "--output", (dir / "nb.json").string(),
           "--model", "nb", "--n", "2"});
  REQUIRE(r.code == 0);
  r = run({"evaluate", "--input", (dir / "corpus").string(), "--checkpoint",
           (dir / "nb.json").string(), "--output", (dir / "nb-report.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("nb-2") != std::string::npos);

  r = run({"evaluate", "--input", (dir / "corpus").string(), "--model", "s2l", "--hidden", "3",
           "--max-epochs", "2", "--runs", "3", "--output", (dir / "s2l-report.json").string()});
  REQUIRE(r.code == 0);
  const auto first = slurp(dir / "s2l-report.json");
  run({"evaluate", "--input", (dir / "corpus").string(), "--model", "s2l", "--hidden", "3",
       "--max-epochs", "2", "--runs", "3", "--output", (dir / "s2l-report.json").string()});
  CHECK(slurp(dir / "s2l-report.json") == first);

  r = run({"compare", (dir / "nb-report.json").string(), (dir / "s2l-report.json").string()});
  REQUIRE(r.code == 0);
  CHECK(summary(r.out)["point_comparison"] == true);
}
