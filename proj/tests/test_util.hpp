#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <sys/wait.h>
#include <unistd.h>

#include "mimic/mimic.hpp"

namespace mimic::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mimic_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> random_walk(std::mt19937_64& gen, std::size_t n, double start = 100.0) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> out;
  double p = start;
  for (std::size_t i = 0; i < n; ++i) {
    p = std::max(1.0, p + step(gen));
    out.push_back(p);
  }
  return out;
}

/// Largest relative deviation between the analytic MLP gradient and central
/// finite differences, on a 5-row batch at a random parameter point.
inline double mlp_gradient_check(std::uint64_t seed, std::size_t width = 6) {
  Rng rng(seed);
  MlpParams params;
  const auto model = MlpRegressor::initialize(width, params, seed);
  std::vector<double> w = model.weights();
  for (auto& x : w) x += 0.1 * rng.normal();
  Matrix zx(5, width);
  std::vector<double> zy(5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < width; ++j) zx(i, j) = rng.normal();
    zy[i] = rng.normal();
  }
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4};
  std::vector<double> grad;
  mlp_batch_loss(model.layout(), w, zx, zy, rows, &grad);
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double orig = w[k];
    w[k] = orig + h;
    const double up = mlp_batch_loss(model.layout(), w, zx, zy, rows, nullptr);
    w[k] = orig - h;
    const double down = mlp_batch_loss(model.layout(), w, zx, zy, rows, nullptr);
    w[k] = orig;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(grad[k]), 1e-4});
    worst = std::max(worst, std::abs(numeric - grad[k]) / denom);
  }
  return worst;
}

/// Local HTTP endpoint speaking the VLM JSON contract. It answers with the
/// call-day open found in the prompt's numeric payload, or with `garbage`.
class MockVlmServer {
 public:
  explicit MockVlmServer(bool garbage = false) {
    server_.Post("/v1/generate", [this, garbage](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      const auto body = nlohmann::json::parse(req.body);
      const std::string prompt = body.at("prompt").get<std::string>();
      std::string answer = "I cannot say.";
      if (!garbage) {
        const auto start = prompt.find("\nInput Numeric: ") + 16;
        const auto end = prompt.find("\nInput Images: ");
        const auto numeric = nlohmann::json::parse(prompt.substr(start, end - start));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", numeric.at("open_d").get<double>());
        answer = buf;
      }
      res.set_content(nlohmann::json{{"text", answer}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockVlmServer() {
    server_.stop();
    thread_.join();
  }
  MockVlmServer(const MockVlmServer&) = delete;
  MockVlmServer& operator=(const MockVlmServer&) = delete;

  [[nodiscard]] std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/generate"; }
  [[nodiscard]] std::size_t requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
};

struct CliResult {
  int code = -1;
  std::string output;  ///< stdout and stderr interleaved
};

/// Runs the command-line tool with `args` (already shell-quoted).
inline CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + MIMIC_CLI_PATH + "' " + args + " 2>&1";
  CliResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// A small hand-written manifest: two companies, three instances, inline
/// prices and an index series around the call dates.
inline nlohmann::json fixture_manifest_json() {
  using nlohmann::json;
  json nifty = json::array();
  json prices_a = json::array();
  json prices_b = json::array();
  Date d(2024, 1, 1);
  for (int i = 0; i < 120; ++i, d = d.plus_days(1)) {
    nifty.push_back({{"date", d.iso()}, {"open", 21000.0 + i}, {"close", 21010.0 + i}, {"volume", 3e8}});
    prices_a.push_back({{"date", d.iso()}, {"open", 100.0 + i}, {"close", 100.5 + i}, {"volume", 1e5}});
    prices_b.push_back({{"date", d.iso()}, {"open", 500.0 - i}, {"close", 499.0 - i}, {"volume", 2e5}});
  }
  json doc = json::parse(R"({
    "version": "fixture-1",
    "companies": [
      {"company_id": "AAA", "name": "Alpha",
       "fundamentals": [
         {"fiscal_year": 2022, "period_end": "2022-03-31", "values": {"sales": 10.0, "eps": 1.0}},
         {"fiscal_year": 2023, "period_end": "2023-03-31", "values": {"sales": 20.0, "eps": 2.0}}]},
      {"company_id": "BBB", "name": "Beta"}],
    "market": {
      "gdp_growth": [{"date": "2023-12-01", "value": 7.0}, {"date": "2024-03-01", "value": 7.5}],
      "inflation_rate": [{"date": "2024-01-15", "value": 5.1}]},
    "instances": [
      {"company_id": "AAA", "call_date": "2024-03-01", "transcript_text": "Alpha results were strong.",
       "open_d": 160.0, "open_d1": 161.0},
      {"company_id": "AAA", "call_date": "2024-04-01", "transcript_text": "Alpha guidance unchanged.",
       "table_markdown": "| a | b |\n|---|---|\n| 1 | 2 |", "open_d": 191.0, "open_d1": 190.5},
      {"company_id": "BBB", "call_date": "2024-03-15", "transcript_text": "Beta had a difficult quarter.",
       "open_d": 426.0, "open_d1": 426.0}]
  })");
  doc["companies"][0]["prices"] = prices_a;
  doc["companies"][1]["prices"] = prices_b;
  doc["market"]["nifty"] = nifty;
  return doc;
}

}  // namespace mimic::testing
