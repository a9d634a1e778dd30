#pragma once

#include <string>
#include <utility>
#include <vector>

namespace xpci {

// Structured, machine-readable warning. Operations report recoverable
// conditions (sampling limits exceeded, clamped pixels, ...) through these
// instead of writing to stderr; the CLI serializes them as JSON lines.
struct Warning {
  std::string code;
  std::string message;
  // Optional numeric context, e.g. {"clamped_pixels", 12}.
  std::vector<std::pair<std::string, double>> data;
};

class WarningLog {
 public:
  void add(std::string code, std::string message,
           std::vector<std::pair<std::string, double>> data = {}) {
    items_.push_back({std::move(code), std::move(message), std::move(data)});
  }

  const std::vector<Warning>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  bool has(const std::string& code) const {
    for (const auto& w : items_)
      if (w.code == code) return true;
    return false;
  }

  void merge(const WarningLog& other) {
    items_.insert(items_.end(), other.items_.begin(), other.items_.end());
  }

  void clear() { items_.clear(); }

 private:
  std::vector<Warning> items_;
};

// Appends to `log` when non-null, otherwise drops the warning.
inline void warn(WarningLog* log, std::string code, std::string message,
                 std::vector<std::pair<std::string, double>> data = {}) {
  if (log) log->add(std::move(code), std::move(message), std::move(data));
}

}  // namespace xpci
