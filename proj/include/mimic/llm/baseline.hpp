#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <thread>
#include <vector>

#include "mimic/core/binary.hpp"
#include "mimic/dataset/manifest.hpp"
#include "mimic/eval/metrics.hpp"
#include "mimic/llm/client.hpp"
#include "mimic/llm/parse.hpp"

namespace mimic {

struct BaselineConfig {
  std::string endpoint;
  std::string model_name = "llama-4-maverick";
  double timeout_seconds = 60.0;
  std::size_t concurrency = 4;
  bool strict = false;
  std::filesystem::path cache_dir = "cache";
};

struct BaselineRecord {
  std::string instance_id;
  double target = 0.0;
  std::optional<double> prediction;
  std::optional<double> relative_error;
  bool cached = false;
  std::string error;  ///< non-empty when the instance was skipped
};

struct BaselineResult {
  MetricSet metrics;
  std::size_t requests_sent = 0;  ///< transport calls, including retries
  std::size_t cache_hits = 0;
  std::size_t parse_failures = 0;
  std::size_t network_failures = 0;
  std::vector<BaselineRecord> records;
};

namespace detail {

inline std::string request_hash(const VlmRequest& req) {
  std::string blob = req.instance_id + '\n' + req.model_name + '\n' + req.prompt_text;
  for (const auto& r : req.image_refs) blob += '\n' + r;
  return hex64(fnv1a64(blob));
}

inline std::string sanitize(std::string s) {
  for (auto& c : s)
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  return s;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Path of the cache entry for one request.
inline std::filesystem::path cache_entry_path(const BaselineConfig& cfg, const std::string& instance_id) {
  return cfg.cache_dir / detail::sanitize(cfg.model_name) / (instance_id + ".json");
}

/// Queries the endpoint once per test instance and scores the parsed
/// answers. Responses are cached per (instance, model, prompt hash); a
/// cached entry is reused instead of re-querying. Transport failures are
/// retried once and then skipped; unparseable answers are skipped. Both
/// are counted in the result.
inline BaselineResult run_baseline(const DatasetManifest& manifest, const SplitSpec& split, const BaselineConfig& cfg,
                                   const VlmTransport& transport) {
  const auto test = temporal_split(manifest, split).test;
  BaselineResult out;
  out.records.resize(test.size());
  std::atomic<std::size_t> next{0}, sent{0}, hits{0};
  std::mutex dir_mu;

  auto work = [&] {
    for (std::size_t i = next++; i < test.size(); i = next++) {
      const auto& inst = test[i];
      VlmRequest req = build_prompt(inst, inst.numeric);
      req.endpoint = cfg.endpoint;
      req.model_name = cfg.model_name;
      req.timeout_seconds = cfg.timeout_seconds;
      const std::string hash = detail::request_hash(req);
      const auto path = cache_entry_path(cfg, req.instance_id);
      BaselineRecord& rec = out.records[i];
      rec.instance_id = req.instance_id;
      rec.target = inst.open_d1;

      std::optional<std::string> raw;
      std::error_code ec;
      if (std::filesystem::exists(path, ec)) {
        try {
          const auto entry = nlohmann::json::parse(read_file(path));
          if (entry.value("request_hash", "") == hash) {
            raw = entry.at("raw_response").get<std::string>();
            rec.cached = true;
            ++hits;
          }
        } catch (const std::exception&) {
          // unreadable entries are refetched
        }
      }
      if (!raw) {
        for (int attempt = 0; attempt < 2 && !raw; ++attempt) {
          ++sent;
          try {
            raw = transport(req);
          } catch (const std::exception& e) {
            rec.error = e.what();
          }
        }
        if (!raw) continue;
        rec.error.clear();
      }
      std::optional<double> parsed;
      try {
        parsed = parse_price(*raw, cfg.strict);
      } catch (const ParseError& e) {
        rec.error = std::string("parse error: ") + e.what();
      }
      if (!rec.cached) {
        const nlohmann::json entry{{"instance_id", req.instance_id}, {"model", cfg.model_name},
                                   {"request_hash", hash},            {"prompt", req.prompt_text},
                                   {"raw_response", *raw},            {"parsed_value", parsed ? nlohmann::json(*parsed) : nlohmann::json(nullptr)},
                                   {"timestamp", detail::utc_timestamp()}};
        std::lock_guard lock(dir_mu);
        std::filesystem::create_directories(path.parent_path());
        write_file_atomic(path, entry.dump(1) + "\n");
      }
      rec.prediction = parsed;
      if (parsed) rec.relative_error = std::abs(*parsed - inst.open_d1) / inst.open_d1;
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.concurrency, test.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  out.requests_sent = sent;
  out.cache_hits = hits;
  std::vector<double> pred, target;
  for (const auto& r : out.records) {
    if (r.prediction) {
      pred.push_back(*r.prediction);
      target.push_back(r.target);
    } else if (r.error.rfind("parse error", 0) == 0) {
      ++out.parse_failures;
    } else {
      ++out.network_failures;
    }
  }
  if (pred.empty()) throw Error("llm baseline: no valid predictions");
  out.metrics = regression_metrics(pred, target);
  return out;
}

}  // namespace mimic
