#pragma once

// Market data model for day-ahead clearing with a uniform purchase price
// (UPP) and curtailable profile block orders.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uppclear {

using Hour = int;

/// Energy quantity held as an exact integer count of 10^-c MWh.
struct Qty {
  std::int64_t units = 0;
  auto operator<=>(const Qty&) const = default;
};

double to_mwh(Qty q, int digits);
std::int64_t pow10_i64(int digits);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// An order book invariant was violated. `rule` names the invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string subject, std::string rule)
      : std::runtime_error(subject + ": " + rule), subject_(std::move(subject)), rule_(std::move(rule)) {}
  const std::string& subject() const { return subject_; }
  const std::string& rule() const { return rule_; }

 private:
  std::string subject_;
  std::string rule_;
};

/// An order refers to a zone or hour the instance does not declare.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Zone {
  std::string id;
  bool upp_member = false;
};

/// Directed interconnection; the reverse direction is a separate link.
/// Hours absent from `capacity` have zero capacity.
struct TransmissionLink {
  std::string from;
  std::string to;
  std::map<Hour, Qty> capacity;

  Qty capacity_at(Hour t) const {
    auto it = capacity.find(t);
    return it == capacity.end() ? Qty{} : it->second;
  }
};

struct DemandOrder {
  std::string id;
  std::string zone;
  Hour hour = 0;
  double price = 0.0;
  Qty quantity;
  bool pays_upp = false;
  int merit = 0;  // 0 = unassigned; only meaningful when pays_upp
};

struct SupplyOrder {
  std::string id;
  std::string zone;
  Hour hour = 0;
  double price = 0.0;
  Qty quantity;
};

struct BlockOrder {
  std::string id;
  std::string zone;
  double price = 0.0;
  double mar = 0.0;
  std::map<Hour, Qty> profile;

  Qty total() const {
    Qty s;
    for (const auto& [t, q] : profile) s.units += q.units;
    return s;
  }
};

struct MarketConfig {
  int digits = 3;
  double kappa_lo = -1.0;
  double kappa_hi = 5.0;
  double price_cap = 3000.0;
  double epsilon = 1e-8;
  double epsilon_f = 1e-6;

  bool operator==(const MarketConfig&) const = default;
};

struct MarketInstance {
  std::vector<Hour> hours;
  std::vector<Zone> zones;
  std::vector<TransmissionLink> links;
  std::vector<DemandOrder> demands;
  std::vector<SupplyOrder> supplies;
  std::vector<BlockOrder> blocks;
  MarketConfig config;

  double mwh(Qty q) const { return to_mwh(q, config.digits); }
  std::optional<std::size_t> zone_index(std::string_view id) const;
  std::optional<std::size_t> hour_index(Hour t) const;
  bool empty_book() const { return demands.empty() && supplies.empty() && blocks.empty(); }
  /// Orders priced exactly at the cap are cleared unconditionally.
  bool must_run(const DemandOrder& d) const { return d.pays_upp && d.price >= config.price_cap; }
};

bool operator==(const Zone&, const Zone&);
bool operator==(const TransmissionLink&, const TransmissionLink&);
bool operator==(const DemandOrder&, const DemandOrder&);
bool operator==(const SupplyOrder&, const SupplyOrder&);
bool operator==(const BlockOrder&, const BlockOrder&);
bool operator==(const MarketInstance&, const MarketInstance&);

/// Throws ValidationError / ReferenceError on the first violated invariant.
void validate_instance(const MarketInstance& inst);

/// Merit by descending price, ties by ascending order id, per hour across all
/// UPP zones. Non-UPP orders get merit 0.
MarketInstance assign_merit(MarketInstance inst);

// Instance file schema "upp-instance/1": ';'-separated, one section per
// record type, header row per section.
inline constexpr std::string_view kInstanceFormat = "upp-instance/1";

MarketInstance parse_instance(std::string_view text);
MarketInstance load_instance(const std::filesystem::path& path,
                             std::string_view format = kInstanceFormat);
std::string serialize_instance(const MarketInstance& inst);
void save_instance(const MarketInstance& inst, const std::filesystem::path& path);

/// Decimal text to exact units; rejects values that are not multiples of 10^-digits.
std::optional<Qty> parse_quantity(std::string_view text, int digits);
std::string format_quantity(Qty q, int digits);

/// Restrict an instance to the orders and capacities of a single hour.
MarketInstance restrict_to_hour(const MarketInstance& inst, Hour t);

}  // namespace uppclear
