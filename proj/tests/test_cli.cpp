#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + SWL_CLI_PATH + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, *header);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(Cli, DistShapeAndFormat) {
  const CliRun r = run("dist --family gse1 --t-min -4 --t-max 2 --steps 13");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find('\r'), std::string::npos);
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  EXPECT_EQ(header, "T,F");
  ASSERT_EQ(rows.size(), 13u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i][1], rows[i - 1][1]);
  // 17 significant digits
  EXPECT_NE(r.out.find("-3.5,"), std::string::npos);
  const std::string second = r.out.substr(r.out.find('\n', r.out.find('\n') + 1) + 1);
  const std::string value = second.substr(second.find(',') + 1, second.find('\n') - second.find(',') - 1);
  EXPECT_GE(value.size(), 17u);
}

TEST(Cli, DistGse1EqualsGoe) {
  std::string h;
  const auto a = parse_csv(run("dist --family gse1 --t-min -4 --t-max 2 --steps 13").out, &h);
  const auto b = parse_csv(run("dist --family goe --t-min -4 --t-max 2 --steps 13").out, &h);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i][1], b[i][1], 5e-6);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("dist --family gaussian --t-min 0 --t-max 0 --steps 1").code, 2);
  EXPECT_EQ(run("dist --family tracy --t-min 0 --t-max 1 --steps 2").code, 2);
  EXPECT_EQ(run("dist --bogus").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("verify bogus").code, 2);
  EXPECT_EQ(run("finite-cdf --n 2 --m-samples 41 --a 0.5 --t-min 1 --t-max 2 --steps 2").code, 2);
  EXPECT_EQ(run("finite-cdf --n 2 --m-samples 3 --gamma 1 --a 0.5 --t-min 1 --t-max 2 --steps 2").code, 2);
  EXPECT_EQ(run("mc --n 4 --trials 3 --ensemble real").code, 2);
  EXPECT_EQ(run("dist --family gse --t-min 0 --t-max 1 --steps 2", "SWL_QUAD_NODES=abc").code, 2);
}

TEST(Cli, ConvergenceExitCode) {
  const CliRun r = run("dist --family gse --t-min -6 --t-max -5 --steps 2 --quad-nodes 16");
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, EnvironmentSetsDefaultNodes) {
  const CliRun a = run("dist --family goe --t-min -1 --t-max 1 --steps 3", "SWL_QUAD_NODES=48");
  const CliRun b = run("dist --family goe --t-min -1 --t-max 1 --steps 3 --quad-nodes 48");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, FiniteCdfGammaColumn) {
  const CliRun r = run("finite-cdf --n 1 --m-samples 2 --a 0.5 --t-min 0.25 --t-max 40 --steps 12");
  ASSERT_EQ(r.code, 0);
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  EXPECT_EQ(header, "T,P");
  for (const auto& row : rows)
    EXPECT_NEAR(row[1], boost::math::gamma_p(4.0, 4.0 * row[0] / 1.5), 1e-8) << row[0];
  EXPECT_NEAR(rows.back()[1], 1.0, 1e-6);
}

TEST(Cli, FiniteCdfNodeDoubling) {
  std::string h;
  const auto a = parse_csv(run("finite-cdf --n 2 --m-samples 3 --a 0.5 --t-min 0.5 --t-max 5 --steps 5").out, &h);
  const auto b = parse_csv(
      run("finite-cdf --n 2 --m-samples 3 --a 0.5 --t-min 0.5 --t-max 5 --steps 5 --quad-nodes 128").out, &h);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i][1], b[i][1], 1e-6);
}

TEST(Cli, McDeterministicFileOutput) {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string f1 = (dir / "swl_cli_mc1.csv").string(), f2 = (dir / "swl_cli_mc2.csv").string();
  const std::string args = "mc --n 10 --gamma 1 --a 3 --trials 50 --seed 9 --out ";
  ASSERT_EQ(run(args + f1).code, 0);
  ASSERT_EQ(run(args + f2).code, 0);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string s1 = slurp(f1);
  EXPECT_EQ(s1, slurp(f2));
  EXPECT_EQ(s1.rfind("trial,raw_max,rescaled\n", 0), 0u);
  EXPECT_NE(s1.find("# ks_gse="), std::string::npos);
  EXPECT_NE(s1.find("regime=supercritical\n"), std::string::npos);
  std::string h;
  EXPECT_EQ(parse_csv(s1, &h).size(), 50u);
  std::filesystem::remove(f1);
  std::filesystem::remove(f2);
}

TEST(Cli, VerifySelectors) {
  const CliRun p = run("verify painleve");
  EXPECT_EQ(p.code, 0);
  EXPECT_EQ(p.out.find("FAIL"), std::string::npos);
  EXPECT_NE(p.out.find("ok painleve_resolvent_T0 residual="), std::string::npos);
  const CliRun s = run("verify skew");
  EXPECT_EQ(s.code, 0) << s.out;
}
