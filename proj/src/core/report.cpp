#include "rdmc/report.hpp"

#include "rdmc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rdmc {

using ojson = nlohmann::ordered_json;

void VerificationReport::set(const std::string& key, const std::string& value)
{
    for (auto& kv : config) {
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    }
    config.emplace_back(key, value);
}

ReportItem& VerificationReport::add(ReportItem item)
{
    items.push_back(std::move(item));
    return items.back();
}

ReportItem& VerificationReport::add_at_least(std::string description, double target, double achieved,
                                             std::string detail)
{
    return add({std::move(description), target, achieved, achieved - target, achieved >= target, std::move(detail)});
}

ReportItem& VerificationReport::add_at_most(std::string description, double target, double achieved,
                                            std::string detail)
{
    return add({std::move(description), target, achieved, target - achieved, achieved <= target, std::move(detail)});
}

ReportItem& VerificationReport::add_check(std::string description, bool pass, std::string detail)
{
    return add({std::move(description), 1.0, pass ? 1.0 : 0.0, pass ? 0.0 : -1.0, pass, std::move(detail)});
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix)
{
    for (ReportItem it : other.items) {
        if (!prefix.empty()) it.description = prefix + it.description;
        items.push_back(std::move(it));
    }
    for (const auto& n : other.notes) notes.push_back(prefix + n);
}

std::size_t VerificationReport::passed() const
{
    return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const ReportItem& i) { return i.pass; }));
}

double VerificationReport::min_margin() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& i : items) m = std::min(m, i.margin);
    return m;
}

namespace {

// JSON has no infinities; they only appear in margins of vacuous items.
ojson number(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

double from_number(const ojson& j)
{
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

}  // namespace

std::string to_json(const VerificationReport& r, int indent)
{
    ojson j;
    j["campaign"] = r.campaign;
    ojson cfg = ojson::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["config"] = cfg;
    j["summary"] = {{"items", r.items.size()}, {"passed", r.passed()}, {"failed", r.failed()}, {"all_pass", r.all_pass()}};
    ojson items = ojson::array();
    for (const auto& i : r.items) {
        ojson e;
        e["description"] = i.description;
        e["target"] = number(i.target);
        e["achieved"] = number(i.achieved);
        e["margin"] = number(i.margin);
        e["pass"] = i.pass;
        if (!i.detail.empty()) e["detail"] = i.detail;
        items.push_back(std::move(e));
    }
    j["items"] = std::move(items);
    j["notes"] = r.notes;
    return j.dump(indent);
}

VerificationReport report_from_json(const std::string& text)
{
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const std::exception& e) {
        fail(ErrorCode::Format, std::string("report is not valid JSON: ") + e.what());
    }
    VerificationReport r;
    try {
        r.campaign = j.at("campaign").get<std::string>();
        for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
        for (const auto& e : j.at("items")) {
            ReportItem it;
            it.description = e.at("description").get<std::string>();
            it.target = from_number(e.at("target"));
            it.achieved = from_number(e.at("achieved"));
            it.margin = from_number(e.at("margin"));
            it.pass = e.at("pass").get<bool>();
            if (e.contains("detail")) it.detail = e.at("detail").get<std::string>();
            r.items.push_back(std::move(it));
        }
        for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Format, std::string("report JSON is missing fields: ") + e.what());
    }
    return r;
}

std::string to_text(const VerificationReport& r)
{
    std::ostringstream os;
    os << r.campaign << ": " << r.passed() << "/" << r.items.size() << " passed";
    if (!r.items.empty()) os << ", min margin " << r.min_margin();
    os << '\n';
    for (const auto& i : r.items) {
        os << (i.pass ? "  PASS " : "  FAIL ") << i.description << "  achieved " << i.achieved << " target "
           << i.target;
        if (!i.detail.empty()) os << "  [" << i.detail << "]";
        os << '\n';
    }
    for (const auto& n : r.notes) os << "  note: " << n << '\n';
    return os.str();
}

}  // namespace rdmc
