#pragma once

// Single-level MILP for day-ahead clearing with a uniform purchase price and
// curtailable profile blocks: lower-level primal and dual feasibility, strong
// duality, the exact UPP row with binary expansion, and big-M linearizations.
//
// Naming scheme (t = hour, k = order id, i/j = zone ids, p = supply/block id):
//   ug ue uw ud dw dd dpi ygp yep ywphi phiw phiwlo   [t,k]   UPP orders
//   ygz                                                [t,k,i]
//   dz phiz [t,k]   s phis [t,p]   zeta [t,i]   pi kappa [t]
//   f delta eta uf [t,i,j]   uB r phiBmax phiBmin yBmax yBmin [p]
//   b [t,j,i] (bit j)   ybz [t,i,j]

#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "uppclear/milp_model.hpp"
#include "uppclear/orderbook.hpp"

namespace uppclear {

enum class MarketSplit { Off, Strict, Loose };

struct BuildOptions {
  MarketSplit market_split = MarketSplit::Off;
  bool search_reduction = true;
};

class OverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BigMParams {
  double m_pi = 0.0;
  std::map<std::string, double> m_block;                                  // block id
  std::map<std::tuple<Hour, std::string, std::string>, double> m_flow;     // (t, i, j)
  std::map<std::pair<Hour, std::string>, double> m_demand;                 // (t, k)
};

struct ExpansionSpec {
  int digits = 0;
  std::map<std::pair<Hour, std::string>, int> width;  // (t, UPP zone) -> J
};

/// Bits 0..J with 2^(J+1) - 1 >= scaled_total. Throws OverflowError when the
/// total cannot be represented exactly in double precision.
int expansion_width(std::int64_t scaled_total);

/// A linearized product y = u * x.
struct ProductLink {
  int u = -1, x = -1, y = -1;
  double m = 0.0;
  bool one_sided = false;
};

/// Name -> column registry with family bookkeeping.
class VariableCatalog {
 public:
  explicit VariableCatalog(const MilpModel* model = nullptr) : model_(model) {}
  /// Column index or -1.
  int find(const std::string& name) const { return model_ ? model_->find_var(name) : -1; }
  /// Column index; throws std::out_of_range when missing.
  int at(const std::string& name) const;
  std::size_t count(const std::string& family) const { return model_ ? model_->count_family(family) : 0; }
  void rebind(const MilpModel* model) { model_ = model; }

 private:
  const MilpModel* model_;
};

struct BuiltModel {
  MilpModel model;
  VariableCatalog catalog;
  BigMParams bigm;
  ExpansionSpec expansion;
  std::vector<ProductLink> products;
  BuildOptions options;

  BuiltModel() = default;
  BuiltModel(const BuiltModel& o);
  BuiltModel& operator=(const BuiltModel& o);
};

BuiltModel build_model(const MarketInstance& inst, const BuildOptions& options = {});

/// Emits -M u <= y <= M u and -M(1-u) <= x - y <= M(1-u), or the one-sided
/// variant 0 <= y <= M u, 0 <= x - y <= M(1-u). Throws on M <= 0.
ProductLink linearize_product(MilpModel& model, const std::string& y_name, const std::string& family, int u,
                              int x, double m, bool one_sided);

/// Products whose multiplicand bound exceeds the big-M (empty = certified).
std::vector<std::string> certify_big_m(const BuiltModel& built);

}  // namespace uppclear
