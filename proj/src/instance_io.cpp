#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "uppclear/orderbook.hpp"

namespace uppclear {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, int line, const char* what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw ParseError(std::string("malformed ") + what + " '" + std::string(s) + "'", line);
  return v;
}

int parse_int(std::string_view s, int line, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw ParseError(std::string("malformed ") + what + " '" + std::string(s) + "'", line);
  return v;
}

bool parse_bool(std::string_view s, int line) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError("malformed boolean '" + std::string(s) + "'", line);
}

Qty parse_qty_field(std::string_view s, int digits, int line, const std::string& who) {
  if (s.empty()) throw ParseError("empty quantity", line);
  auto q = parse_quantity(s, digits);
  if (!q) {
    // Distinguish syntax errors from quantization errors.
    std::string_view body = s.front() == '-' ? s.substr(1) : s;
    bool numeric = !body.empty() && std::all_of(body.begin(), body.end(), [](char c) {
      return (c >= '0' && c <= '9') || c == '.';
    }) && std::count(body.begin(), body.end(), '.') <= 1;
    if (numeric) throw ValidationError(who, "quantity not a multiple of 10^-" + std::to_string(digits));
    throw ParseError("malformed quantity '" + std::string(s) + "'", line);
  }
  return *q;
}

// "9=12.000|10=3.500", "*" expands to every declared hour.
std::map<Hour, Qty> parse_hour_map(std::string_view s, const std::vector<Hour>& hours, int digits,
                                   int line, const std::string& who) {
  std::map<Hour, Qty> out;
  if (s.empty()) return out;
  for (auto item : split(s, '|')) {
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ParseError("malformed hour entry '" + std::string(item) + "'", line);
    auto key = trim(item.substr(0, eq));
    Qty q = parse_qty_field(trim(item.substr(eq + 1)), digits, line, who);
    if (key == "*") {
      for (Hour t : hours) out[t] = q;
    } else {
      Hour t = parse_int(key, line, "hour");
      if (!out.emplace(t, q).second) throw ParseError("hour " + std::to_string(t) + " repeated", line);
    }
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt_hour_map(const std::map<Hour, Qty>& m, int digits) {
  std::string out;
  for (const auto& [t, q] : m) {
    if (!out.empty()) out += '|';
    out += std::to_string(t) + "=" + format_quantity(q, digits);
  }
  return out;
}

const std::vector<std::string> kConfigHeader = {"key", "value"};
const std::vector<std::string> kZoneHeader = {"id", "upp"};
const std::vector<std::string> kLinkHeader = {"from", "to", "capacity"};
const std::vector<std::string> kDemandHeader = {"id", "zone", "hour", "price", "quantity", "upp", "merit"};
const std::vector<std::string> kSupplyHeader = {"id", "zone", "hour", "price", "quantity"};
const std::vector<std::string> kBlockHeader = {"id", "zone", "price", "mar", "profile"};

const std::vector<std::string>& header_for(const std::string& section) {
  if (section == "CONFIG") return kConfigHeader;
  if (section == "ZONE") return kZoneHeader;
  if (section == "LINK") return kLinkHeader;
  if (section == "DEMAND") return kDemandHeader;
  if (section == "SUPPLY") return kSupplyHeader;
  if (section == "BLOCK") return kBlockHeader;
  throw std::logic_error("unknown section");
}

}  // namespace

std::optional<Qty> parse_quantity(std::string_view text, int digits) {
  text = trim(text);
  bool neg = false;
  if (!text.empty() && text.front() == '-') {
    neg = true;
    text.remove_prefix(1);
  }
  if (text.empty()) return std::nullopt;
  auto dot = text.find('.');
  std::string_view ip = text.substr(0, dot);
  std::string_view fp = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (ip.empty() && fp.empty()) return std::nullopt;
  auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(ip) || !all_digits(fp)) return std::nullopt;
  if (dot != std::string_view::npos && fp.empty()) return std::nullopt;
  if (ip.size() > 15) return std::nullopt;
  // Digits past the market resolution must all be zero.
  if (fp.size() > static_cast<std::size_t>(digits)) {
    auto extra = fp.substr(digits);
    if (!std::all_of(extra.begin(), extra.end(), [](char c) { return c == '0'; })) return std::nullopt;
    fp = fp.substr(0, digits);
  }
  std::int64_t units = 0;
  for (char c : ip) units = units * 10 + (c - '0');
  for (int i = 0; i < digits; ++i) {
    units *= 10;
    if (static_cast<std::size_t>(i) < fp.size()) units += fp[i] - '0';
  }
  return Qty{neg ? -units : units};
}

std::string format_quantity(Qty q, int digits) {
  std::int64_t scale = pow10_i64(digits);
  std::int64_t a = q.units < 0 ? -q.units : q.units;
  std::string out = (q.units < 0 ? "-" : "") + std::to_string(a / scale);
  if (digits > 0) {
    std::string frac = std::to_string(a % scale);
    out += "." + std::string(digits - frac.size(), '0') + frac;
  }
  return out;
}

MarketInstance parse_instance(std::string_view text) {
  MarketInstance inst;
  std::string section;
  bool expect_header = false;
  bool saw_format = false;
  bool hours_set = false;
  int line_no = 0;

  struct RawDemand { DemandOrder order; std::string quantity; int line; };
  struct RawSupply { SupplyOrder order; std::string quantity; int line; };
  struct RawLink { TransmissionLink link; std::string capacity; int line; };
  struct RawBlock { BlockOrder block; std::string profile; int line; };
  std::vector<RawDemand> demands;
  std::vector<RawSupply> supplies;
  std::vector<RawLink> links;
  std::vector<RawBlock> blocks;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (!saw_format) {
      auto f = split(line, ';');
      if (f.size() != 2 || f[0] != "FORMAT") throw ParseError("first record must be FORMAT;<id>", line_no);
      if (f[1] != kInstanceFormat)
        throw ParseError("unsupported instance format '" + std::string(f[1]) + "'", line_no);
      saw_format = true;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section header", line_no);
      section = std::string(line.substr(1, line.size() - 2));
      if (section != "CONFIG" && section != "ZONE" && section != "LINK" && section != "DEMAND" &&
          section != "SUPPLY" && section != "BLOCK")
        throw ParseError("unknown section '" + section + "'", line_no);
      expect_header = true;
      continue;
    }
    if (section.empty()) throw ParseError("record outside any section", line_no);
    auto f = split(line, ';');
    const auto& header = header_for(section);
    if (expect_header) {
      if (f.size() != header.size() || !std::equal(header.begin(), header.end(), f.begin()))
        throw ParseError("bad header row for section " + section, line_no);
      expect_header = false;
      continue;
    }
    if (f.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields in " + section + " record, got " +
                           std::to_string(f.size()),
                       line_no);

    if (section == "CONFIG") {
      auto key = f[0];
      auto& c = inst.config;
      if (key == "digits") c.digits = parse_int(f[1], line_no, "digits");
      else if (key == "kappa_lo") c.kappa_lo = parse_double(f[1], line_no, "kappa_lo");
      else if (key == "kappa_hi") c.kappa_hi = parse_double(f[1], line_no, "kappa_hi");
      else if (key == "price_cap") c.price_cap = parse_double(f[1], line_no, "price_cap");
      else if (key == "epsilon") c.epsilon = parse_double(f[1], line_no, "epsilon");
      else if (key == "epsilon_f") c.epsilon_f = parse_double(f[1], line_no, "epsilon_f");
      else if (key == "hours") {
        for (auto h : split(f[1], ',')) inst.hours.push_back(parse_int(h, line_no, "hour"));
        hours_set = true;
      } else throw ParseError("unknown config key '" + std::string(key) + "'", line_no);
      if (c.digits < 0 || c.digits > 9) throw ParseError("digits outside [0, 9]", line_no);
    } else if (section == "ZONE") {
      inst.zones.push_back(Zone{std::string(f[0]), parse_bool(f[1], line_no)});
    } else if (section == "LINK") {
      links.push_back({TransmissionLink{std::string(f[0]), std::string(f[1]), {}}, std::string(f[2]), line_no});
    } else if (section == "DEMAND") {
      DemandOrder d;
      d.id = f[0];
      d.zone = f[1];
      d.hour = parse_int(f[2], line_no, "hour");
      d.price = parse_double(f[3], line_no, "price");
      d.pays_upp = parse_bool(f[5], line_no);
      d.merit = f[6].empty() ? 0 : parse_int(f[6], line_no, "merit");
      if (d.merit < 0) throw ParseError("merit must be positive", line_no);
      demands.push_back({std::move(d), std::string(f[4]), line_no});
    } else if (section == "SUPPLY") {
      SupplyOrder s;
      s.id = f[0];
      s.zone = f[1];
      s.hour = parse_int(f[2], line_no, "hour");
      s.price = parse_double(f[3], line_no, "price");
      supplies.push_back({std::move(s), std::string(f[4]), line_no});
    } else if (section == "BLOCK") {
      BlockOrder b;
      b.id = f[0];
      b.zone = f[1];
      b.price = parse_double(f[2], line_no, "price");
      b.mar = parse_double(f[3], line_no, "mar");
      blocks.push_back({std::move(b), std::string(f[4]), line_no});
    }
  }
  if (!saw_format) throw ParseError("missing FORMAT record", 0);
  if (!hours_set) throw ParseError("CONFIG must declare hours", 0);
  if (expect_header) throw ParseError("section " + section + " has no header row", line_no);

  // Quantities need the final digit count, so they are converted after the pass.
  const int c = inst.config.digits;
  for (auto& l : links) {
    l.link.capacity = parse_hour_map(l.capacity, inst.hours, c, l.line, "link " + l.link.from + "->" + l.link.to);
    inst.links.push_back(std::move(l.link));
  }
  for (auto& d : demands) {
    d.order.quantity = parse_qty_field(d.quantity, c, d.line, d.order.id);
    inst.demands.push_back(std::move(d.order));
  }
  for (auto& s : supplies) {
    s.order.quantity = parse_qty_field(s.quantity, c, s.line, s.order.id);
    inst.supplies.push_back(std::move(s.order));
  }
  for (auto& b : blocks) {
    b.block.profile = parse_hour_map(b.profile, inst.hours, c, b.line, b.block.id);
    inst.blocks.push_back(std::move(b.block));
  }

  bool any_upp = false, all_missing = true;
  for (const auto& d : inst.demands)
    if (d.pays_upp) {
      any_upp = true;
      all_missing = all_missing && d.merit == 0;
    }
  if (any_upp && all_missing) inst = assign_merit(std::move(inst));

  validate_instance(inst);
  return inst;
}

MarketInstance load_instance(const std::filesystem::path& path, std::string_view format) {
  if (format != kInstanceFormat) throw ParseError("unsupported instance format '" + std::string(format) + "'", 0);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

std::string serialize_instance(const MarketInstance& inst) {
  const int c = inst.config.digits;
  std::ostringstream o;
  auto header = [&](const char* name) {
    o << "[" << name << "]\n";
    const auto& h = header_for(name);
    for (std::size_t i = 0; i < h.size(); ++i) o << (i ? ";" : "") << h[i];
    o << "\n";
  };
  o << "FORMAT;" << kInstanceFormat << "\n";
  header("CONFIG");
  o << "digits;" << c << "\n";
  o << "kappa_lo;" << fmt_double(inst.config.kappa_lo) << "\n";
  o << "kappa_hi;" << fmt_double(inst.config.kappa_hi) << "\n";
  o << "price_cap;" << fmt_double(inst.config.price_cap) << "\n";
  o << "epsilon;" << fmt_double(inst.config.epsilon) << "\n";
  o << "epsilon_f;" << fmt_double(inst.config.epsilon_f) << "\n";
  o << "hours;";
  for (std::size_t i = 0; i < inst.hours.size(); ++i) o << (i ? "," : "") << inst.hours[i];
  o << "\n";
  header("ZONE");
  for (const auto& z : inst.zones) o << z.id << ";" << (z.upp_member ? 1 : 0) << "\n";
  if (!inst.links.empty()) {
    header("LINK");
    for (const auto& l : inst.links) o << l.from << ";" << l.to << ";" << fmt_hour_map(l.capacity, c) << "\n";
  }
  if (!inst.demands.empty()) {
    header("DEMAND");
    for (const auto& d : inst.demands)
      o << d.id << ";" << d.zone << ";" << d.hour << ";" << fmt_double(d.price) << ";"
        << format_quantity(d.quantity, c) << ";" << (d.pays_upp ? 1 : 0) << ";"
        << (d.pays_upp ? std::to_string(d.merit) : "") << "\n";
  }
  if (!inst.supplies.empty()) {
    header("SUPPLY");
    for (const auto& s : inst.supplies)
      o << s.id << ";" << s.zone << ";" << s.hour << ";" << fmt_double(s.price) << ";"
        << format_quantity(s.quantity, c) << "\n";
  }
  if (!inst.blocks.empty()) {
    header("BLOCK");
    for (const auto& b : inst.blocks)
      o << b.id << ";" << b.zone << ";" << fmt_double(b.price) << ";" << fmt_double(b.mar) << ";"
        << fmt_hour_map(b.profile, c) << "\n";
  }
  return o.str();
}

void save_instance(const MarketInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file " + path.string());
  out << serialize_instance(inst);
}

}  // namespace uppclear
