#include "didc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace didc {

int CrossSection::count_above() const {
  return static_cast<int>(std::count_if(z.begin(), z.end(), [](double v) { return v >= 0.0; }));
}

int CrossSection::count_below() const {
  return static_cast<int>(std::count_if(z.begin(), z.end(), [](double v) { return v < 0.0; }));
}

PanelDataset::PanelDataset(std::vector<std::string> unit_ids, std::vector<double> z,
                           std::vector<std::string> period_order,
                           std::vector<std::vector<double>> outcomes, double cutoff,
                           bool treat_cutoff_as_above)
    : unit_ids_(std::move(unit_ids)),
      z_(std::move(z)),
      period_order_(std::move(period_order)),
      outcomes_(std::move(outcomes)),
      cutoff_(cutoff),
      treat_cutoff_as_above_(treat_cutoff_as_above) {
  const std::size_t n = z_.size();
  if (unit_ids_.size() != n) throw std::invalid_argument("panel: unit id / z length mismatch");
  if (period_order_.size() < 2) throw std::invalid_argument("panel: need at least 2 periods");
  if (outcomes_.size() != period_order_.size())
    throw std::invalid_argument("panel: outcome matrix / period count mismatch");
  for (const auto& col : outcomes_) {
    if (col.size() != n) throw std::invalid_argument("ragged panel: a period is missing units");
    for (double v : col)
      if (!std::isfinite(v)) throw std::invalid_argument("panel: non-finite outcome");
  }
  if (!std::isfinite(cutoff_)) throw std::invalid_argument("panel: non-finite cutoff");
  int above = 0, below = 0;
  for (double v : z_) {
    if (!std::isfinite(v)) throw std::invalid_argument("panel: non-finite running variable");
    (v >= cutoff_ ? above : below)++;
  }
  // "Strictly on each side" excludes units sitting exactly at the cutoff.
  int strictly_above = 0;
  for (double v : z_)
    if (v > cutoff_) strictly_above++;
  if (strictly_above < 2 || below < 2)
    throw std::invalid_argument("panel: need at least 2 units strictly on each side of the cutoff");
}

int PanelDataset::period_index(const std::string& label) const {
  for (std::size_t i = 0; i < period_order_.size(); ++i)
    if (period_order_[i] == label) return static_cast<int>(i);
  throw std::invalid_argument("unknown period label: " + label);
}

const std::vector<double>& PanelDataset::outcomes(const std::string& period) const {
  return outcomes_[static_cast<std::size_t>(period_index(period))];
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& what, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("non-numeric " + what + " '" + s + "' at line " +
                                std::to_string(line_no));
  }
}

bool all_numeric(const std::vector<std::string>& labels) {
  for (const auto& s : labels) {
    try {
      std::size_t pos = 0;
      (void)std::stod(s, &pos);
      if (pos != s.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

}  // namespace

PanelDataset load_panel(const std::string& path, const ColumnSchema& schema, double cutoff,
                        std::vector<std::string> period_order, bool treat_cutoff_as_above) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("empty input file: " + path);
  auto cols = split_csv_line(header);
  auto col_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("missing column '" + name + "' in " + path);
  };
  const int c_unit = col_of(schema.unit);
  const int c_period = col_of(schema.period);
  const int c_y = col_of(schema.outcome);
  const int c_z = col_of(schema.running);

  struct Row {
    double y, z;
  };
  std::map<std::string, std::map<std::string, Row>> by_unit;  // unit -> period -> row
  std::vector<std::string> unit_seen_order;
  std::vector<std::string> period_seen;

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) <= std::max({c_unit, c_period, c_y, c_z}))
      throw std::invalid_argument("too few fields at line " + std::to_string(line_no));
    const std::string& unit = f[static_cast<std::size_t>(c_unit)];
    const std::string& period = f[static_cast<std::size_t>(c_period)];
    double y = parse_number(f[static_cast<std::size_t>(c_y)], "outcome", line_no);
    double z = parse_number(f[static_cast<std::size_t>(c_z)], "running variable", line_no);
    auto [uit, fresh] = by_unit.try_emplace(unit);
    if (fresh) unit_seen_order.push_back(unit);
    if (!uit->second.emplace(period, Row{y, z}).second)
      throw std::invalid_argument("duplicate (unit, period) pair (" + unit + ", " + period + ")");
    if (std::find(period_seen.begin(), period_seen.end(), period) == period_seen.end())
      period_seen.push_back(period);
  }
  if (by_unit.empty()) throw std::invalid_argument("no data rows in " + path);

  if (period_order.empty()) {
    period_order = period_seen;
    if (all_numeric(period_order)) {
      std::sort(period_order.begin(), period_order.end(),
                [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); });
    } else {
      std::sort(period_order.begin(), period_order.end());
    }
  }

  std::vector<std::string> unit_ids;
  std::vector<double> z;
  std::vector<std::vector<double>> outcomes(period_order.size());
  for (const auto& unit : unit_seen_order) {
    const auto& rows = by_unit.at(unit);
    double uz = rows.begin()->second.z;
    for (const auto& [period, row] : rows) {
      if (row.z != uz)
        throw std::invalid_argument("inconsistent running variable for unit " + unit);
    }
    for (std::size_t t = 0; t < period_order.size(); ++t) {
      auto it = rows.find(period_order[t]);
      if (it == rows.end())
        throw std::invalid_argument("ragged panel: unit " + unit + " is missing period " +
                                    period_order[t]);
      outcomes[t].push_back(it->second.y);
    }
    if (rows.size() != period_order.size())
      throw std::invalid_argument("unit " + unit + " has periods outside the declared order");
    unit_ids.push_back(unit);
    z.push_back(uz);
  }

  return PanelDataset(std::move(unit_ids), std::move(z), std::move(period_order),
                      std::move(outcomes), cutoff, treat_cutoff_as_above);
}

namespace {

// Estimation code assigns z >= 0 to the treated side. When units exactly at
// the cutoff are configured to be controls, nudge their centered value to the
// smallest negative double; kernel weights are unaffected.
double centered(const PanelDataset& panel, std::size_t i) {
  double zc = panel.running()[i] - panel.cutoff();
  if (zc == 0.0 && !panel.treat_cutoff_as_above())
    return -std::numeric_limits<double>::denorm_min();
  return zc;
}

}  // namespace

CrossSection first_difference(const PanelDataset& panel, const std::string& t1,
                              const std::string& t0) {
  int i1 = panel.period_index(t1);
  int i0 = panel.period_index(t0);
  if (i1 <= i0) throw std::invalid_argument("first_difference: t1 must come after t0");
  const auto& y1 = panel.outcomes(t1);
  const auto& y0 = panel.outcomes(t0);
  CrossSection cs;
  cs.z.reserve(panel.n_units());
  cs.y.reserve(panel.n_units());
  for (std::size_t i = 0; i < panel.n_units(); ++i) {
    cs.z.push_back(centered(panel, i));
    cs.y.push_back(y1[i] - y0[i]);
  }
  return cs;
}

CrossSection slice_period(const PanelDataset& panel, const std::string& t) {
  const auto& y = panel.outcomes(t);
  CrossSection cs;
  cs.z.reserve(panel.n_units());
  cs.y.reserve(panel.n_units());
  for (std::size_t i = 0; i < panel.n_units(); ++i) {
    cs.z.push_back(centered(panel, i));
    cs.y.push_back(y[i]);
  }
  return cs;
}

}  // namespace didc
