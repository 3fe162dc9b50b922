#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pglfree/cli.hpp"
#include "pglfree/io.hpp"

using namespace pglfree;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pglfree_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST(CliExit, ErrorKindsMapToExitCodes) {
  EXPECT_EQ(cli::exit_code_for(ErrorKind::SearchExhausted), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::BudgetExceeded), 3);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::Format), 4);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::Io), 4);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::InvalidArgument), 1);
  const auto gens = cli::parse_generators("1,1,0,1;2,0,0,1", 5);
  ASSERT_EQ(gens.size(), 2u);
  EXPECT_EQ(gens[0], canonicalize(Mat2::make(5, 1, 1, 0, 1)));
  EXPECT_THROW(cli::parse_generators("1,1,0", 5), Error);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"search", "--eps", "0.9", "--k0", "3", "--p0", "5"}).code, 1);
  EXPECT_EQ(invoke({"search", "--eps", "abc", "--k0", "3", "--p0", "5", "--ell", "2"}).code, 1);
  EXPECT_EQ(invoke({"no-such-command"}).code, 1);
  EXPECT_EQ(invoke({"certify-gap", "--p", "9", "--gens", "1,1,0,1", "--eps", "0.5"}).code, 1);
}

TEST_F(CliTest, ImpossibleSearchExitsWithFailure) {
  const CliResult r = invoke({"search", "--eps", "0.01", "--k0", "3", "--p0", "5", "--ell", "2", "--p-max", "7",
                     "--retries", "2", "--out", path("s.json")});
  EXPECT_EQ(r.code, 2);
  const auto f = io::parse_certificate(io::read_file(path("s.json")));
  EXPECT_EQ(f.body.at("status"), "exhausted");
  EXPECT_FALSE(f.body.at("history").empty());
  EXPECT_EQ(invoke({"tower-verify", path("s.json")}).code, 0);
}

TEST_F(CliTest, CorruptFilesExitWithFormatError) {
  {
    std::ofstream(path("bad.json")) << "{\"format_version\": 1";
  }
  EXPECT_EQ(invoke({"tower-verify", path("bad.json")}).code, 4);
  EXPECT_EQ(invoke({"tower-verify", path("absent.json")}).code, 4);
  fs::copy_file(std::string(PGLFREE_SOURCE_DIR) + "/samples/search_quickstart.json", path("g.json"));
  EXPECT_EQ(invoke({"tower-verify", path("g.json")}).code, 0);
  std::string text = io::read_file(path("g.json"));
  const auto pos = text.find("\"eps\"");
  ASSERT_NE(pos, std::string::npos);
  text.insert(pos + 7, "1");
  {
    std::ofstream(path("g.json"), std::ios::trunc) << text;
  }
  EXPECT_EQ(invoke({"tower-verify", path("g.json")}).code, 4);

  text = io::read_file(std::string(PGLFREE_SOURCE_DIR) + "/samples/search_quickstart.json");
  const auto hex = text.find("\"hex\": \"") + 9;
  text[hex + 3] = text[hex + 3] == '0' ? '1' : '0';
  {
    std::ofstream(path("g.json"), std::ios::trunc) << text;
  }
  EXPECT_EQ(invoke({"tower-verify", path("g.json")}).code, 4);
}

TEST_F(CliTest, QuickstartSampleIsReproduced) {
  const CliResult r = invoke({"search", "--eps", "0.9", "--k0", "3", "--p0", "5", "--ell", "2", "--seed", "1", "--out",
                     path("q.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::read_file(path("q.json")),
            io::read_file(std::string(PGLFREE_SOURCE_DIR) + "/samples/search_quickstart.json"));
  const CliResult v = invoke({"tower-verify", "--in", path("q.json")});
  EXPECT_EQ(v.code, 0) << v.out;
}

TEST_F(CliTest, OutputDoesNotDependOnThreadCount) {
  const std::vector<std::string> base{"search", "--eps", "0.85", "--k0", "4", "--p0", "5", "--ell", "3", "--seed", "7"};
  auto with = [&](const char* threads) {
    std::vector<std::string> a{"--threads", threads};
    a.insert(a.end(), base.begin(), base.end());
    return invoke(a);
  };
  const CliResult one = with("1");
  const CliResult four = with("4");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, four.out);
  EXPECT_EQ(one.out, with("0").out);
}

TEST_F(CliTest, ConfigFileAndEnvironmentPrecedence) {
  {
    std::ofstream(path("c.ini")) << "seed=7\n[search]\neps=0.85\nk0=4\np0=5\nell=3\n";
  }
  const CliResult from_config = invoke({"--config", path("c.ini"), "search"});
  ASSERT_EQ(from_config.code, 0) << from_config.err;
  const CliResult from_flags = invoke({"search", "--eps", "0.85", "--k0", "4", "--p0", "5", "--ell", "3", "--seed", "7"});
  EXPECT_EQ(from_config.out, from_flags.out);
  const CliResult overridden = invoke({"--config", path("c.ini"), "--seed", "8", "search"});
  ASSERT_EQ(overridden.code, 0);
  EXPECT_NE(overridden.out, from_config.out);
  EXPECT_EQ(io::parse_certificate(overridden.out).config.at("seed"), 8);

  ::setenv("PGLFREE_WORD_BUDGET", "12345", 1);
  const CliResult env = invoke({"--config", path("c.ini"), "search"});
  ::unsetenv("PGLFREE_WORD_BUDGET");
  EXPECT_EQ(io::parse_certificate(env.out).config.at("word_budget"), 12345);
  {
    std::ofstream(path("c.ini"), std::ios::app) << "bogus=1\n";
  }
  EXPECT_EQ(invoke({"--config", path("c.ini"), "search"}).code, 1);
}

TEST_F(CliTest, ResumeMatchesStraightBuild) {
  const std::vector<std::string> common{"--seed", "29", "tower-build", "--eps-schedule", "0.9,0.7",
                                        "--ell-schedule", "2,3"};
  auto args = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = common;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  ASSERT_EQ(invoke(args({"--levels", "1", "--out", path("partial.json")})).code, 0);
  const auto partial = io::parse_certificate(io::read_file(path("partial.json")));
  EXPECT_EQ(partial.body.at("tower").at("levels").size(), 1u);
  const CliResult resumed = invoke({"tower-build", "--resume", path("partial.json"), "--eps-schedule", "0.9,0.7",
                           "--ell-schedule", "2,3", "--out", path("resumed.json")});
  ASSERT_EQ(resumed.code, 0) << resumed.err;
  ASSERT_EQ(invoke(args({"--out", path("straight.json")})).code, 0);
  const auto a = io::parse_certificate(io::read_file(path("resumed.json")));
  const auto b = io::parse_certificate(io::read_file(path("straight.json")));
  EXPECT_EQ(a.body.at("tower").dump(), b.body.at("tower").dump());
  EXPECT_EQ(invoke({"tower-build", "--resume", path("partial.json"), "--eps-schedule", "0.8,0.7", "--ell-schedule",
                 "2,3", "--out", path("x.json")})
                .code,
            1);

  // verdicts from the file match those of the in-memory state
  const CliResult v = invoke({"tower-verify", path("straight.json")});
  EXPECT_EQ(v.code, 0) << v.out;
  const TowerState st = io::tower_state_from_json(b.body.at("tower"));
  std::ostringstream expect;
  for (const auto& c : reverify(st, TowerOptions{}).checks) {
    expect << "level " << c.level << '\t' << c.name << '\t' << (c.ok ? "ok" : "FAILED");
    if (!c.detail.empty()) expect << '\t' << c.detail;
    expect << '\n';
  }
  EXPECT_EQ(v.out.substr(0, expect.str().size()), expect.str());

  // a tampered level fails verification with exit 2
  io::Json j = io::Json::parse(io::read_file(path("straight.json")));
  io::Json body = j.at("body");
  body["tower"]["certificates"][1]["bounds"]["level_bound"] = 0.1;
  const io::CertificateFile forged{j.at("kind"), j.at("config"), body};
  io::write_atomic(path("forged.json"), io::serialize(forged));
  EXPECT_EQ(invoke({"tower-verify", path("forged.json")}).code, 2);
}

TEST_F(CliTest, ThreeLevelProfile) {
  const CliResult b = invoke({"--seed", "1", "--out", path("t3.json"), "tower-build", "--eps-schedule", "0.9,0.7,0.5",
                     "--ell-schedule", "2,3,2", "--p-max", "17"});
  ASSERT_EQ(b.code, 0) << b.err;
  const CliResult p = invoke({"measure-profile", path("t3.json"), "--plain"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(std::count(p.out.begin(), p.out.end(), '\n'), 4);
  const CliResult o = invoke({"--out", path("prof.json"), "measure-profile", path("t3.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto f = io::parse_certificate(io::read_file(path("prof.json")));
  EXPECT_EQ(f.kind, "profile");
  EXPECT_EQ(f.body.at("profile").at("rows").size(), 3u);
  EXPECT_EQ(f.body.at("non_atomic"), true);
}

TEST_F(CliTest, MonteCarloCommands) {
  const CliResult g = invoke({"--seed", "3", "--out", path("mc.json"), "mc-gap", "--p", "5", "--k", "10,50", "--trials", "10"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(invoke({"tower-verify", path("mc.json")}).code, 0);
  const CliResult w = invoke({"mc-wordcount", "--p", "2,3", "--k", "2", "--word", "abAB"});
  ASSERT_EQ(w.code, 0) << w.err;
  const CliResult gi = invoke({"mc-girth", "--p", "13", "--k", "2", "--ell", "2", "--trials", "5"});
  EXPECT_EQ(gi.code, 0) << gi.err;
  EXPECT_EQ(invoke({"certify-girth", "--p", "5", "--gens", "1,1,0,1;1,0,1,1", "--ell", "5"}).code, 2);
  EXPECT_EQ(invoke({"certify-girth", "--p", "5", "--gens", "1,1,0,1;1,0,1,1", "--ell", "4"}).code, 0);
}
