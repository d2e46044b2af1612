#pragma once

// Machine-readable outcome of a verification campaign.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace rdmc {

struct ReportItem {
    std::string description;
    double target = 0.0;
    double achieved = 0.0;
    double margin = 0.0;  // achieved - target, oriented so that >= 0 passes
    bool pass = false;
    std::string detail;   // exact values, failing point, ...
};

struct VerificationReport {
    std::string campaign;
    std::vector<std::pair<std::string, std::string>> config;  // echo, in insertion order
    std::vector<ReportItem> items;
    std::vector<std::string> notes;                           // exclusions, interpretation choices

    void set(const std::string& key, const std::string& value);
    ReportItem& add(ReportItem item);
    /// Convenience: pass iff achieved >= target.
    ReportItem& add_at_least(std::string description, double target, double achieved, std::string detail = {});
    /// Convenience: pass iff achieved <= target.
    ReportItem& add_at_most(std::string description, double target, double achieved, std::string detail = {});
    ReportItem& add_check(std::string description, bool pass, std::string detail = {});
    void merge(const VerificationReport& other, const std::string& prefix = {});

    std::size_t passed() const;
    std::size_t failed() const { return items.size() - passed(); }
    bool all_pass() const { return failed() == 0; }
    double min_margin() const;
};

/// JSON with a fixed field order: campaign, config, summary, items, notes.
std::string to_json(const VerificationReport& r, int indent = 2);
VerificationReport report_from_json(const std::string& text);
/// Short human-readable rendering.
std::string to_text(const VerificationReport& r);

}  // namespace rdmc
