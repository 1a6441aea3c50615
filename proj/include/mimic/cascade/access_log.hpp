#pragma once

#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace mimic {

/// Why a target value (next-day open or its direction label) was read.
enum class TargetUse {
  stage1_fit,         ///< direction labels used to train stage-1 classifiers
  stage1_validation,  ///< direction labels used to score stage-1 classifiers
  stage2_fit,         ///< prices used for regressor gradient steps
  early_stopping,     ///< prices used to monitor validation loss
  evaluation,         ///< prices used for reported metrics
};

inline const char* to_string(TargetUse u) {
  switch (u) {
    case TargetUse::stage1_fit: return "stage1_fit";
    case TargetUse::stage1_validation: return "stage1_validation";
    case TargetUse::stage2_fit: return "stage2_fit";
    case TargetUse::early_stopping: return "early_stopping";
    case TargetUse::evaluation: return "evaluation";
  }
  return "?";
}

/// Records every target read made by the cascade, so callers can prove which
/// split each read came from.
class TargetAccessLog {
 public:
  struct Entry {
    std::string key;
    TargetUse use;
  };

  void record(const std::string& key, TargetUse use) {
    std::lock_guard lock(mu_);
    entries_.push_back({key, use});
  }

  [[nodiscard]] std::vector<Entry> entries() const {
    std::lock_guard lock(mu_);
    return entries_;
  }

  [[nodiscard]] std::set<std::string> keys(TargetUse use) const {
    std::lock_guard lock(mu_);
    std::set<std::string> out;
    for (const auto& e : entries_)
      if (e.use == use) out.insert(e.key);
    return out;
  }

 private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

}  // namespace mimic
