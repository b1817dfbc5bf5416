#pragma once
// Verification reports: one record per check, JSON and text rendering.

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "t2m/sampling.hpp"

namespace t2m {

struct CheckRecord {
  std::string id;
  std::string anchor;  // identity under test, written as a formula
  int points = 0;
  double max_residual = 0.0;
  bool pass = false;
  std::string note;
};

class VerificationReport {
 public:
  VerificationReport() = default;
  explicit VerificationReport(std::string scenario) : scenario_(std::move(scenario)) {}

  const std::string& scenario() const noexcept { return scenario_; }
  const std::vector<CheckRecord>& checks() const noexcept { return checks_; }
  nlohmann::ordered_json& config() noexcept { return config_; }
  const nlohmann::ordered_json& config() const noexcept { return config_; }

  void add(CheckRecord rec) { checks_.push_back(std::move(rec)); }

  /// Records a residual check against a tolerance.
  void add(std::string id, std::string anchor, const Residual& r, const Tolerance& tol,
           std::string note = {}) {
    add(CheckRecord{std::move(id), std::move(anchor), r.points, r.max_abs, tol.accepts(r),
                    std::move(note)});
  }

  /// Records a boolean check.
  void add_flag(std::string id, std::string anchor, bool ok, int points, std::string note = {}) {
    add(CheckRecord{std::move(id), std::move(anchor), points, ok ? 0.0 : 1.0, ok, std::move(note)});
  }

  void append(const VerificationReport& other) {
    for (const auto& c : other.checks_) checks_.push_back(c);
  }

  int passed() const {
    int k = 0;
    for (const auto& c : checks_) k += c.pass ? 1 : 0;
    return k;
  }
  int failed() const { return static_cast<int>(checks_.size()) - passed(); }
  bool all_pass() const { return failed() == 0; }

  const CheckRecord* find(const std::string& id) const {
    for (const auto& c : checks_)
      if (c.id == id) return &c;
    return nullptr;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = scenario_;
    j["config"] = config_.is_null() ? nlohmann::ordered_json::object() : config_;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks_) {
      nlohmann::ordered_json r;
      r["id"] = c.id;
      r["anchor"] = c.anchor;
      r["points"] = c.points;
      r["max_residual"] = c.max_residual;
      r["verdict"] = c.pass ? "pass" : "fail";
      if (!c.note.empty()) r["note"] = c.note;
      j["checks"].push_back(std::move(r));
    }
    j["summary"] = {{"total", checks_.size()}, {"passed", passed()}, {"failed", failed()}};
    return j;
  }

  std::string to_text() const {
    std::string out = "scenario " + scenario_ + "\n";
    char buf[64];
    for (const auto& c : checks_) {
      std::snprintf(buf, sizeof buf, "%.3e", c.max_residual);
      out += std::string(c.pass ? "PASS " : "FAIL ") + c.id + "  [" + c.anchor + "]  residual " + buf +
             "  points " + std::to_string(c.points);
      if (!c.note.empty()) out += "  (" + c.note + ")";
      out += "\n";
    }
    out += std::to_string(passed()) + "/" + std::to_string(checks_.size()) + " checks passed\n";
    return out;
  }

 private:
  std::string scenario_;
  nlohmann::ordered_json config_;
  std::vector<CheckRecord> checks_;
};

}  // namespace t2m
